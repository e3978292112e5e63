//! Brute-force verification of the bosonization dictionary on truncated
//! Fock spaces:
//!
//! * [`schwinger_check`] - the equal-time density commutator
//!   [J(p), J(-p)] equals the c-number r m_long (L / a_eff) exactly on
//!   every safe state, all other commutators vanish, and J(p)
//!   annihilates the Dirac sea for r p >= 0.
//! * [`kronig_check`] - the quadratic-in-J boson Hamiltonian reproduces
//!   the chiral fermion kinetic energy matrix-exactly, with the level
//!   degeneracies 1, 1, 2, 3, 5 of the neutral sector below cutoff.
//! * [`nodal_equivalence_check`] - the interacting four-branch nodal
//!   Hamiltonian assembled from fermion bilinears and from the boson
//!   form agree operator-exactly on the neutral sector, and their
//!   spectrum matches the Bogoliubov dispersion.

mod space;

pub use space::{axpy_state, dot_state, max_abs, SparseState, TruncatedChiralSpace};

use crate::Result;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub check: String,
    /// Characteristic dimensions (state counts, sector sizes).
    pub dims: Vec<usize>,
    /// Number of individual identities tested.
    pub cases: usize,
    /// Largest absolute deviation found in any identity.
    pub max_residual: f64,
    /// Eigenvalues reported by spectral checks (lowest first).
    pub levels: Vec<f64>,
    pub levels_compared: usize,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl VerifyReport {
    fn new(check: &str) -> Self {
        VerifyReport {
            check: check.to_string(),
            dims: Vec::new(),
            cases: 0,
            max_residual: 0.0,
            levels: Vec::new(),
            levels_compared: 0,
            notes: Vec::new(),
            pass: true,
        }
    }

    fn absorb(&mut self, residual: f64, tol: f64) {
        self.max_residual = self.max_residual.max(residual);
        if residual > tol {
            self.pass = false;
        }
    }
}

/// Fermionic kinetic energy v_F u sum r K :n: of a basis state.
fn kinetic_energy(sp: &TruncatedChiralSpace, v_f: f64, u: f64, mask: u64) -> f64 {
    let mut e = 0.0;
    for b in sp.branches() {
        let r = b.chirality as f64;
        for chain in 0..b.n_perp {
            for mode in 0..b.n_long() {
                let k = b.momentum_index(mode);
                let occ = (mask >> b.bit(chain, mode) & 1) as f64;
                let sea = if r * k < 0.0 { 1.0 } else { 0.0 };
                e += v_f * u * r * k * (occ - sea);
            }
        }
    }
    e
}

/// Boson-form kinetic energy of one branch applied to a sparse state:
/// coeff [ sum_mp J(0,-mp)J(0,mp) + 2 sum_{ml>=1} J(-r ml,-mp)J(r ml,mp) ].
/// The chirality fixes the ordering so that the factor annihilating the
/// sea always acts first.
fn boson_kinetic_apply(
    sp: &TruncatedChiralSpace,
    branch: usize,
    coeff: f64,
    state: &SparseState,
) -> SparseState {
    let b = &sp.branches()[branch];
    let r = b.chirality;
    let np = b.n_perp as i64;
    let nl = b.n_long() as i64;
    let mut acc: SparseState = Vec::new();
    for mp in 0..np {
        let t = sp.apply_density(branch, 0, -mp, &sp.apply_density(branch, 0, mp, state));
        acc = axpy_state(&acc, coeff, &t);
        for ml in 1..nl {
            let t = sp.apply_density(
                branch,
                -r * ml,
                -mp,
                &sp.apply_density(branch, r * ml, mp, state),
            );
            acc = axpy_state(&acc, 2.0 * coeff, &t);
        }
    }
    acc
}

/// Density-commutator (Schwinger term) check at the production size:
/// 10 longitudinal modes per chain (M = 5), 3 transverse chains and
/// safety margin 3.
pub fn schwinger_check() -> Result<VerifyReport> {
    schwinger_with(5, 3, 3)
}

/// Same check at an arbitrary size. Momentum transfers up to the margin
/// in |m_long| and all transverse transfers are covered; with that
/// margin every commutator identity is exact on the safe states, so the
/// verdict compares against zero, not against a tolerance band.
pub fn schwinger_with(half_modes: u32, n_perp: u32, margin: u32) -> Result<VerifyReport> {
    let mut report = VerifyReport::new("schwinger");
    let tol = 1e-12;
    let w = margin as i64;
    let np = n_perp as i64;
    let anomaly_scale = n_perp as f64; // L / a_eff

    let mut p_set: Vec<(i64, i64)> = Vec::new();
    for ml in -w..=w {
        for mp in 0..np {
            p_set.push((ml, mp));
        }
    }
    let probes: Vec<(i64, i64)> = [(1i64, 0i64), (-2, 1), (3, 2), (0, 1)]
        .into_iter()
        .filter(|&(ml, mp)| ml.abs() <= w && mp < np)
        .collect();

    // the two nodal flavors have identical chain structure; both are run
    for s_label in [1i64, -1] {
        for r in [1i64, -1] {
            let sp = TruncatedChiralSpace::single(r, half_modes, n_perp)?;
            let safe = sp.safe_states(0, margin)?;
            report.dims.push(safe.len());

            // anomaly: [J(p), J(-p)] - r m_long (L/a_eff) = 0 on safe states
            let worst = p_set
                .par_iter()
                .map(|&(ml, mp)| {
                    let expected = (r * ml) as f64 * anomaly_scale;
                    let mut local = 0.0f64;
                    for &mask in &safe {
                        let s = vec![(mask, 1.0)];
                        let fwd =
                            sp.apply_density(0, ml, mp, &sp.apply_density(0, -ml, -mp, &s));
                        let rev =
                            sp.apply_density(0, -ml, -mp, &sp.apply_density(0, ml, mp, &s));
                        let diff = axpy_state(&axpy_state(&fwd, -1.0, &rev), -expected, &s);
                        local = local.max(max_abs(&diff));
                    }
                    local
                })
                .reduce(|| 0.0, f64::max);
            report.cases += p_set.len() * safe.len();
            report.absorb(worst, tol);

            // vanishing commutators [J(p), J(p')] for p' != -p
            let combos: Vec<((i64, i64), (i64, i64))> = p_set
                .iter()
                .flat_map(|&p| probes.iter().map(move |&q| (p, q)))
                .filter(|&((ml, mp), (ml2, mp2))| {
                    !(ml2 == -ml && (mp + mp2).rem_euclid(np) == 0)
                })
                .collect();
            let worst = combos
                .par_iter()
                .map(|&((ml, mp), (ml2, mp2))| {
                    let mut local = 0.0f64;
                    for &mask in &safe {
                        let s = vec![(mask, 1.0)];
                        let fwd =
                            sp.apply_density(0, ml, mp, &sp.apply_density(0, ml2, mp2, &s));
                        let rev =
                            sp.apply_density(0, ml2, mp2, &sp.apply_density(0, ml, mp, &s));
                        local = local.max(max_abs(&axpy_state(&fwd, -1.0, &rev)));
                    }
                    local
                })
                .reduce(|| 0.0, f64::max);
            report.cases += combos.len() * safe.len();
            report.absorb(worst, tol);

            // the sea is annihilated by J(p) whenever r p_long >= 0
            let sea = vec![(sp.sea(), 1.0)];
            for &(ml, mp) in &p_set {
                if r * ml >= 0 {
                    report.absorb(max_abs(&sp.apply_density(0, ml, mp, &sea)), tol);
                    report.cases += 1;
                }
            }

            // adjointness <a|J(p) b> = <J(-p) a|b> on sampled pairs
            let mut rng =
                StdRng::seed_from_u64(0x5c311 ^ (((r + 1) as u64) << 1) ^ (((s_label + 1) as u64) << 8));
            for _ in 0..16 {
                let a = vec![(safe[rng.random_range(0..safe.len())], 1.0)];
                let b = vec![(safe[rng.random_range(0..safe.len())], 1.0)];
                for &(ml, mp) in &probes {
                    let lhs = dot_state(&a, &sp.apply_density(0, ml, mp, &b));
                    let rhs = dot_state(&sp.apply_density(0, -ml, -mp, &a), &b);
                    report.absorb((lhs - rhs).abs(), tol);
                    report.cases += 1;
                }
            }
        }
    }

    // densities of different branches commute exactly on arbitrary
    // states of a joint space (one global Jordan-Wigner convention)
    let joint = TruncatedChiralSpace::new(&[(1, half_modes, n_perp), (-1, half_modes, n_perp)])?;
    let mut rng = StdRng::seed_from_u64(0xcafe);
    let bits = joint.total_bits();
    for _ in 0..24 {
        let mask = rng.random_range(0..1u64 << bits);
        let s = vec![(mask, 1.0)];
        for &(ml, mp) in &probes {
            for &(ml2, mp2) in &probes {
                let fwd = joint.apply_density(0, ml, mp, &joint.apply_density(1, ml2, mp2, &s));
                let rev = joint.apply_density(1, ml2, mp2, &joint.apply_density(0, ml, mp, &s));
                report.absorb(max_abs(&axpy_state(&fwd, -1.0, &rev)), tol);
                report.cases += 1;
            }
        }
    }

    report.notes.push(format!(
        "anomaly constant r m_long (L/a_eff) with L/a_eff = {anomaly_scale}"
    ));
    report
        .notes
        .push("all residuals are exact zeros of the truncated algebra".into());
    Ok(report)
}

/// Kinetic-energy bosonization identity on one branch, checked two ways:
/// entrywise matrix equality against the fermion form, and the neutral
/// spectrum below the cutoff v_F W u / 2 (W = 9) with degeneracies
/// 1, 1, 2, 3, 5.
pub fn kronig_check() -> Result<VerifyReport> {
    let mut report = VerifyReport::new("kronig");
    let tol_matrix = 1e-12;
    let tol_levels = 1e-10;
    let l = 2.0 * PI;
    let v_f = 1.0;
    let u = 2.0 * PI / l;

    // single chain, 8 longitudinal modes, full 256-state space
    for r in [1i64, -1] {
        let sp = TruncatedChiralSpace::single(r, 4, 1)?;
        let n = 1usize << sp.total_bits();
        let coeff = PI * v_f / (1.0 * l); // pi a_eff v_F / L^2, a_eff = L
        let mut hb = DMatrix::<f64>::zeros(n, n);
        let mut hf = vec![0.0; n];
        for col in 0..n {
            let mask = col as u64;
            hf[col] = kinetic_energy(&sp, v_f, u, mask);
            for (m2, amp) in boson_kinetic_apply(&sp, 0, coeff, &vec![(mask, 1.0)]) {
                hb[(m2 as usize, col)] = amp;
            }
        }
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { hf[i] } else { 0.0 };
                dev = dev.max((hb[(i, j)] - want).abs());
            }
        }
        report.cases += n * n;
        report.absorb(dev, tol_matrix);
        report.dims.push(n);

        if r == 1 {
            // neutral sector spectrum below the cutoff
            let neutral: Vec<usize> = (0..n).filter(|&m| (m as u64).count_ones() == 4).collect();
            let nn = neutral.len();
            let mut block = DMatrix::<f64>::zeros(nn, nn);
            for (a, &ia) in neutral.iter().enumerate() {
                for (b, &ib) in neutral.iter().enumerate() {
                    block[(a, b)] = hb[(ia, ib)];
                }
            }
            let mut vals: Vec<f64> = SymmetricEigen::new(block)
                .eigenvalues
                .iter()
                .copied()
                .collect();
            vals.sort_by(f64::total_cmp);
            let cutoff = v_f * 9.0 * u / 2.0;
            let below: Vec<f64> = vals.iter().copied().filter(|&v| v < cutoff).collect();
            let expected_deg = [1usize, 1, 2, 3, 5];
            let mut lev_dev = 0.0f64;
            let mut ok = below.len() == expected_deg.iter().sum::<usize>();
            for (lev, &deg) in expected_deg.iter().enumerate() {
                let target = lev as f64 * v_f * u;
                let found = below
                    .iter()
                    .filter(|&&v| (v - target).abs() <= 1e-6)
                    .count();
                ok &= found == deg;
                for &v in below.iter().filter(|&&v| (v - target).abs() <= 1e-6) {
                    lev_dev = lev_dev.max((v - target).abs());
                }
            }
            report.absorb(lev_dev, tol_levels);
            if !ok {
                report.pass = false;
                report.notes.push("degeneracy pattern mismatch".into());
            } else {
                report
                    .notes
                    .push("neutral degeneracies below cutoff: 1 1 2 3 5".into());
            }
            report.levels = below.clone();
            report.levels_compared = below.len();
            report.dims.push(nn);
            report.cases += below.len();
        }
    }

    // three-chain variant (4 longitudinal modes each): entrywise identity
    // via sparse application, coefficient pi v_F / (3 L)
    for r in [1i64, -1] {
        let sp = TruncatedChiralSpace::single(r, 2, 3)?;
        let n = 1u64 << sp.total_bits();
        let coeff = PI * v_f / (3.0 * l);
        let mut dev = 0.0f64;
        for mask in 0..n {
            let e = kinetic_energy(&sp, v_f, u, mask);
            let col = boson_kinetic_apply(&sp, 0, coeff, &vec![(mask, 1.0)]);
            let diff = axpy_state(&col, -e, &vec![(mask, 1.0)]);
            dev = dev.max(max_abs(&diff));
        }
        report.cases += n as usize;
        report.absorb(dev, tol_matrix);
    }
    report.dims.push(4096);
    report
        .notes
        .push("multi-chain identity holds to coefficient rounding".into());
    Ok(report)
}

/// Per-branch operators restricted to the 20-dimensional charge-zero
/// sector of a 6-mode single-chain branch.
struct BranchOps {
    basis: Vec<u64>,
    kinetic_fermion: DMatrix<f64>,
    kinetic_boson: DMatrix<f64>,
    /// Density matrices J(m_long) for |m_long| <= 2M - 1.
    density: Vec<DMatrix<f64>>,
    density_offset: i64,
}

impl BranchOps {
    fn density_at(&self, ml: i64) -> &DMatrix<f64> {
        &self.density[(ml + self.density_offset) as usize]
    }
}

fn branch_ops(r: i64, half_modes: u32, v_f: f64, u: f64, kin_coeff: f64) -> Result<BranchOps> {
    let sp = TruncatedChiralSpace::single(r, half_modes, 1)?;
    let basis = sp.charge_zero_masks(0);
    let dim = basis.len();
    let index = |mask: u64| basis.binary_search(&mask).expect("charge conserved");
    let nl = (2 * half_modes) as i64;

    let mut density = Vec::new();
    for ml in -(nl - 1)..=(nl - 1) {
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for (col, &mask) in basis.iter().enumerate() {
            for (m2, amp) in sp.apply_density(0, ml, 0, &vec![(mask, 1.0)]) {
                m[(index(m2), col)] = amp;
            }
        }
        density.push(m);
    }
    let density_offset = nl - 1;

    let mut kinetic_fermion = DMatrix::<f64>::zeros(dim, dim);
    for (col, &mask) in basis.iter().enumerate() {
        kinetic_fermion[(col, col)] = kinetic_energy(&sp, v_f, u, mask);
    }

    let q = &density[(density_offset) as usize];
    let mut kinetic_boson = q * q * kin_coeff;
    for ml in 1..nl {
        // ordering J(-r ml) J(r ml): the right factor annihilates the sea
        kinetic_boson += (density[(-r * ml + density_offset) as usize].clone()
            * density[(r * ml + density_offset) as usize].clone())
            * (2.0 * kin_coeff);
    }

    Ok(BranchOps {
        basis,
        kinetic_fermion,
        kinetic_boson,
        density,
        density_offset,
    })
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Full interacting equivalence check on the four-branch nodal model
/// with 6 longitudinal modes per branch, one transverse chain and
/// gamma = 0.1.
///
/// The Hamiltonian conserves each branch charge, and with one transverse
/// chain the two chirality pairs decouple on the neutral sector:
/// H = M01 (x) 1 + 1 (x) M23 with 400 x 400 pair blocks. Both blocks
/// are assembled twice - fermion kinetic and boson kinetic - and
/// compared entrywise; spectra follow from dense eigendecomposition and
/// merged pair sums. A bit-level spot check on random neutral basis
/// states validates the tensor factorization itself against the generic
/// 24-bit machinery.
pub fn nodal_equivalence_check() -> Result<VerifyReport> {
    let mut report = VerifyReport::new("nodal_equivalence");
    let half_modes = 3u32;
    let gamma = 0.1;
    let l = 2.0 * PI;
    let v_f = 1.0;
    let u = 2.0 * PI / l;
    let a_eff = l; // one transverse chain
    let g1 = gamma * PI * a_eff * v_f;
    let g2 = g1 / 2.0;
    let p_max = 2i64;
    let kin_coeff = PI * a_eff * v_f / (l * l);
    let g1_bare = g1 / (l * l);
    let g2_bare = g2 / (l * l);

    // two independent pair assemblies (the two nodal flavors)
    let mut pair_f = Vec::new();
    let mut pair_b = Vec::new();
    for _flavor in 0..2 {
        let plus = branch_ops(1, half_modes, v_f, u, kin_coeff)?;
        let minus = branch_ops(-1, half_modes, v_f, u, kin_coeff)?;
        let dim = plus.basis.len();
        let eye = DMatrix::<f64>::identity(dim, dim);

        // both chirality orderings of the density product enter; this is
        // what ties g1 to the Bogoliubov parameter gamma
        let mut inter = DMatrix::<f64>::zeros(dim * dim, dim * dim);
        for ml in -p_max..=p_max {
            inter += plus.density_at(ml).kronecker(minus.density_at(-ml)) * g1_bare;
            inter += plus.density_at(-ml).kronecker(minus.density_at(ml)) * g1_bare;
        }
        let mf = plus.kinetic_fermion.kronecker(&eye)
            + eye.kronecker(&minus.kinetic_fermion)
            + &inter;
        let mb =
            plus.kinetic_boson.kronecker(&eye) + eye.kronecker(&minus.kinetic_boson) + &inter;

        // charge operators vanish identically on the charge-zero legs,
        // so the g2 coupling (nonzero only at p = 0) is the zero matrix
        let q_pair = plus.density_at(0).kronecker(&eye) + eye.kronecker(minus.density_at(0));
        report.absorb(q_pair.abs().max() * g2_bare.abs(), 1e-12);
        report.cases += 1;

        pair_f.push(mf);
        pair_b.push(mb);
    }

    let dim_pair = pair_f[0].nrows();
    report.dims.push(dim_pair);
    report.dims.push(dim_pair * dim_pair);

    // operator-level equality of the two assemblies
    let mut op_dev = 0.0f64;
    for i in 0..2 {
        op_dev = op_dev.max((&pair_f[i] - &pair_b[i]).abs().max());
    }
    report.absorb(op_dev, 1e-12);
    report.cases += 2 * dim_pair * dim_pair;
    report
        .notes
        .push(format!("fermion vs boson assembly max entry dev {op_dev:.3e}"));

    // spectra: pair eigenvalues and merged sums over both flavors
    let lam_f: Vec<Vec<f64>> = pair_f.iter().map(sorted_eigenvalues).collect();
    let lam_b: Vec<Vec<f64>> = pair_b.iter().map(sorted_eigenvalues).collect();
    let merge = |lam: &Vec<Vec<f64>>| -> Vec<f64> {
        let mut all = Vec::with_capacity(lam[0].len() * lam[1].len());
        for &x in &lam[0] {
            for &y in &lam[1] {
                all.push(x + y);
            }
        }
        all.sort_by(f64::total_cmp);
        all.truncate(10);
        all
    };
    let low_f = merge(&lam_f);
    let low_b = merge(&lam_b);
    let mut spec_dev = 0.0f64;
    for i in 0..4 {
        spec_dev = spec_dev.max((low_f[i] - low_b[i]).abs());
    }
    report.absorb(spec_dev, 1e-8);
    report.levels = low_f.clone();
    report.levels_compared = 4;
    report.cases += 4;

    // frozen spectra of the converged assembly
    let frozen_pair = [
        -0.015015583750384,
        0.980009427710646,
        0.980009427710646,
        1.97507140423807,
        1.98001397282701,
    ];
    let mut frozen_dev = 0.0f64;
    for (i, &want) in frozen_pair.iter().enumerate() {
        frozen_dev = frozen_dev.max((lam_f[0][i] - want).abs());
    }
    let frozen_full = [
        -0.030031167500768063,
        0.96499384396026233,
        0.96499384396026233,
        0.96499384396026233,
    ];
    for (i, &want) in frozen_full.iter().enumerate() {
        frozen_dev = frozen_dev.max((low_f[i] - want).abs());
    }
    report.absorb(frozen_dev, 1e-8);
    report.cases += frozen_pair.len() + frozen_full.len();

    // Bogoliubov dispersion cross-check: lowest pair excitation vs
    // v_F u sqrt(1 - gamma^2); deviation is pure mode truncation
    let gap = lam_f[0][1] - lam_f[0][0];
    let bog = v_f * u * (1.0 - gamma * gamma).sqrt();
    let rel = (gap - bog).abs() / bog;
    if rel > 1e-3 {
        report.pass = false;
    }
    report.notes.push(format!(
        "pair gap {gap:.12} vs bogoliubov {bog:.12} (rel dev {rel:.3e})"
    ));

    // bit-level spot check of the tensor factorization on random
    // neutral basis states of the full 24-bit space
    let full = TruncatedChiralSpace::new(&[
        (1, half_modes, 1),
        (-1, half_modes, 1),
        (1, half_modes, 1),
        (-1, half_modes, 1),
    ])?;
    let sp_plus = TruncatedChiralSpace::single(1, half_modes, 1)?;
    let sp_minus = TruncatedChiralSpace::single(-1, half_modes, 1)?;
    let nb = sp_plus.branches()[0].n_bits();
    let local_plus = sp_plus.charge_zero_masks(0);
    let local_minus = sp_minus.charge_zero_masks(0);
    let locals = [&local_plus, &local_minus, &local_plus, &local_minus];
    let dim1 = local_plus.len();

    let mask_of = |idx: [usize; 4]| -> u64 {
        (0..4)
            .map(|b| locals[b][idx[b]] << (b as u32 * nb))
            .fold(0u64, |a, m| a | m)
    };

    let mut rng = StdRng::seed_from_u64(0x7e4502);
    let mut spot_dev = 0.0f64;
    for _ in 0..50 {
        let idx = [
            rng.random_range(0..dim1),
            rng.random_range(0..dim1),
            rng.random_range(0..dim1),
            rng.random_range(0..dim1),
        ];
        let mask = mask_of(idx);
        let state = vec![(mask, 1.0)];

        // generic bit-level application of the fermion-form Hamiltonian
        let mut out: SparseState = vec![(mask, kinetic_energy(&full, v_f, u, mask))];
        for pair in 0..2 {
            let (ba, bb) = (2 * pair, 2 * pair + 1);
            for ml in -p_max..=p_max {
                let t = full.apply_density(ba, ml, 0, &full.apply_density(bb, -ml, 0, &state));
                out = axpy_state(&out, g1_bare, &t);
                let t = full.apply_density(ba, -ml, 0, &full.apply_density(bb, ml, 0, &state));
                out = axpy_state(&out, g1_bare, &t);
            }
        }
        // g2 term: charge products across the flavor pairs (identically
        // zero on neutral states, applied anyway)
        for a in [0usize, 1] {
            for b in [2usize, 3] {
                let t = full.apply_density(a, 0, 0, &full.apply_density(b, 0, 0, &state));
                out = axpy_state(&out, 2.0 * g2_bare, &t);
            }
        }

        // tensor-form application via the pair blocks
        let col01 = idx[0] * dim1 + idx[1];
        let col23 = idx[2] * dim1 + idx[3];
        let mut expected: SparseState = Vec::new();
        let m01 = &pair_f[0];
        let m23 = &pair_f[1];
        for row in 0..dim_pair {
            let c = m01[(row, col01)];
            if c != 0.0 {
                expected.push((mask_of([row / dim1, row % dim1, idx[2], idx[3]]), c));
            }
        }
        for row in 0..dim_pair {
            let c = m23[(row, col23)];
            if c != 0.0 {
                expected.push((mask_of([idx[0], idx[1], row / dim1, row % dim1]), c));
            }
        }
        let diff = axpy_state(&out, -1.0, &{
            let mut e = expected;
            e.sort_unstable_by_key(|x| x.0);
            // merge duplicates (diagonal appears in both blocks)
            let mut merged: SparseState = Vec::new();
            for (m, v) in e {
                match merged.last_mut() {
                    Some(last) if last.0 == m => last.1 += v,
                    _ => merged.push((m, v)),
                }
            }
            merged
        });
        spot_dev = spot_dev.max(max_abs(&diff));
        report.cases += 1;
    }
    report.absorb(spot_dev, 1e-12);
    report
        .notes
        .push(format!("tensor vs bit-level spot deviation {spot_dev:.3e}"));

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schwinger_small_variant_is_exact() {
        let rep = schwinger_with(3, 1, 1).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.max_residual, 0.0);
        let rep = schwinger_with(3, 2, 1).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.max_residual, 0.0);
    }

    #[test]
    fn kronig_identity_and_levels() {
        let rep = kronig_check().unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.max_residual <= 1e-12);
        assert_eq!(rep.levels_compared, 12);
    }

    #[test]
    fn equivalence_check_passes() {
        let rep = nodal_equivalence_check().unwrap();
        assert!(rep.pass, "{rep:?}");
        assert_eq!(rep.levels_compared, 4);
        assert!((rep.levels[0] - -0.030031167500768063).abs() < 1e-8);
    }
}
