//! Exact diagonalization of the microscopic t-V model on small periodic
//! tori: H = -t sum (c+ c + h.c.) + (V/2) sum_e n n - mu N, where the edge
//! sum enumerates, for every site, its forward x and forward y neighbor.
//! On rings of length two both forward edges of a pair coincide
//! geometrically and are kept as parallel edges; this multigraph
//! convention is exactly what the momentum-space interaction
//! (V/2N) sum_p [cos(a p1) + cos(a p2)] rho(p) rho(-p) demands, see
//! [`interaction_identity_check`].

mod basis;
mod lanczos;
mod sparse;

pub use basis::{parity_below, FockBasis};
pub use lanczos::{lowest_eigenpairs, LanczosOpts};
pub use sparse::SparseOperator;

use crate::params::MicroParams;
use crate::{CoreError, Result};
use nalgebra::{Complex, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Periodic n1 x n2 site cluster, at most 20 sites.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n1: u32,
    pub n2: u32,
}

impl LatticeSpec {
    pub fn new(n1: u32, n2: u32) -> Result<Self> {
        if n1 < 2 || n2 < 2 {
            return Err(CoreError::InvalidInput(format!(
                "lattice sides must be >= 2, got {n1} x {n2}"
            )));
        }
        if n1 * n2 > 20 {
            return Err(CoreError::SizeLimit(format!(
                "{n1} x {n2} = {} sites exceeds the 20-site cap",
                n1 * n2
            )));
        }
        Ok(LatticeSpec { n1, n2 })
    }

    pub fn n_sites(&self) -> u32 {
        self.n1 * self.n2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbKind {
    Hopping,
    Interaction,
}

/// Multiplies one forward bond coupling by `factor`; used as a symmetry
/// negative control.
#[derive(Clone, Copy, Debug)]
pub struct BondPerturbation {
    pub site: (u32, u32),
    pub horizontal: bool,
    pub kind: PerturbKind,
    pub factor: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BuildOptions {
    /// Rigid shift of the site-to-bit labeling; physics must not depend
    /// on it.
    pub label_offset: (u32, u32),
    pub perturbation: Option<BondPerturbation>,
}

struct Edge {
    i: u32,
    j: u32,
    t_factor: f64,
    v_factor: f64,
}

fn site_bit(spec: &LatticeSpec, opts: &BuildOptions, x: u32, y: u32) -> u32 {
    let (ox, oy) = opts.label_offset;
    ((x + ox) % spec.n1) + spec.n1 * ((y + oy) % spec.n2)
}

fn edges(spec: &LatticeSpec, opts: &BuildOptions) -> Vec<Edge> {
    let mut out = Vec::with_capacity(2 * spec.n_sites() as usize);
    for y in 0..spec.n2 {
        for x in 0..spec.n1 {
            for horizontal in [true, false] {
                let (nx, ny) = if horizontal {
                    ((x + 1) % spec.n1, y)
                } else {
                    (x, (y + 1) % spec.n2)
                };
                let mut t_factor = 1.0;
                let mut v_factor = 1.0;
                if let Some(p) = opts.perturbation {
                    if p.site == (x, y) && p.horizontal == horizontal {
                        match p.kind {
                            PerturbKind::Hopping => t_factor = p.factor,
                            PerturbKind::Interaction => v_factor = p.factor,
                        }
                    }
                }
                out.push(Edge {
                    i: site_bit(spec, opts, x, y),
                    j: site_bit(spec, opts, nx, ny),
                    t_factor,
                    v_factor,
                });
            }
        }
    }
    out
}

/// Hamiltonian restricted to the given basis (full space or one sector).
pub fn htv_operator(
    spec: &LatticeSpec,
    p: &MicroParams,
    mu: f64,
    basis: &FockBasis,
    opts: &BuildOptions,
) -> SparseOperator {
    let edge_list = edges(spec, opts);
    let t = p.t;
    let lambda = p.v / 2.0;
    SparseOperator::from_rows(basis.dim(), move |row| {
        let mask = basis.states[row];
        let mut entries = Vec::with_capacity(2 * edge_list.len() + 1);
        let mut diag = -mu * mask.count_ones() as f64;
        for e in &edge_list {
            if mask >> e.i & 1 == 1 && mask >> e.j & 1 == 1 {
                diag += lambda * e.v_factor;
            }
            for (from, to) in [(e.i, e.j), (e.j, e.i)] {
                if mask >> from & 1 == 1 && mask >> to & 1 == 0 {
                    let s1 = parity_below(mask, from);
                    let m1 = mask ^ (1 << from);
                    let s2 = parity_below(m1, to);
                    let m2 = m1 | (1 << to);
                    let sign = if (s1 + s2) % 2 == 0 { 1.0 } else { -1.0 };
                    let col = basis.index_of(m2).expect("hop stays in sector");
                    entries.push((col, -t * e.t_factor * sign));
                }
            }
        }
        entries.push((row, diag));
        entries
    })
}

/// Convenience: Hamiltonian on the full Fock space.
pub fn build_htv(
    spec: &LatticeSpec,
    p: &MicroParams,
    mu: f64,
) -> Result<(FockBasis, SparseOperator)> {
    let basis = FockBasis::full(spec.n_sites())?;
    let op = htv_operator(spec, p, mu, &basis, &BuildOptions::default());
    Ok((basis, op))
}

/// All eigenvalues of a sector by dense diagonalization (dimension capped
/// at 4096), sorted ascending.
pub fn sector_spectrum_dense(
    spec: &LatticeSpec,
    p: &MicroParams,
    mu: f64,
    n: u32,
    opts: &BuildOptions,
) -> Result<Vec<f64>> {
    let basis = FockBasis::sector(spec.n_sites(), n)?;
    if basis.dim() > 4096 {
        return Err(CoreError::SizeLimit(format!(
            "dense path refused for dimension {}",
            basis.dim()
        )));
    }
    let op = htv_operator(spec, p, mu, &basis, opts);
    let mut vals: Vec<f64> = SymmetricEigen::new(op.to_dense())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Lowest `k` eigenvalues of a sector by deflated Lanczos iteration.
pub fn sector_lowest(
    spec: &LatticeSpec,
    p: &MicroParams,
    mu: f64,
    n: u32,
    k: usize,
    opts: &BuildOptions,
) -> Result<Vec<f64>> {
    let basis = FockBasis::sector(spec.n_sites(), n)?;
    let op = htv_operator(spec, p, mu, &basis, opts);
    let (vals, _) = lowest_eigenpairs(
        basis.dim(),
        |x, y| op.matvec(x, y),
        k,
        &LanczosOpts::default(),
    )?;
    Ok(vals)
}

/// Ground state of one particle-number sector: dense below dimension 4096,
/// Lanczos above.
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub basis: FockBasis,
}

pub fn ground_state(spec: &LatticeSpec, p: &MicroParams, mu: f64, n: u32) -> Result<GroundState> {
    let basis = FockBasis::sector(spec.n_sites(), n)?;
    let op = htv_operator(spec, p, mu, &basis, &BuildOptions::default());
    let (energy, vector) = if basis.dim() <= 4096 {
        let eig = SymmetricEigen::new(op.to_dense());
        let mut best = 0;
        for i in 1..basis.dim() {
            if eig.eigenvalues[i] < eig.eigenvalues[best] {
                best = i;
            }
        }
        (
            eig.eigenvalues[best],
            eig.eigenvectors.column(best).iter().copied().collect(),
        )
    } else {
        let (vals, vecs) = lowest_eigenpairs(
            basis.dim(),
            |x, y| op.matvec(x, y),
            1,
            &LanczosOpts::default(),
        )?;
        (vals[0], vecs.into_iter().next().unwrap())
    };
    let mut hv = vec![0.0; basis.dim()];
    op.matvec(&vector, &mut hv);
    let residual = hv
        .iter()
        .zip(&vector)
        .map(|(h, v)| (h - energy * v) * (h - energy * v))
        .sum::<f64>()
        .sqrt();
    Ok(GroundState {
        energy,
        vector,
        residual,
        basis,
    })
}

/// Spectral check of the particle-hole duality: the sector-N spectrum of
/// H(mu) must equal the sector-(Ns - N) spectrum of H(V - mu) up to one
/// constant shift, and that shift must equal V N - mu Ns.
#[derive(Clone, Debug, Serialize)]
pub struct PhReport {
    pub pass: bool,
    pub max_level_dev: f64,
    pub max_shift_dev: f64,
    /// (sector, level deviation, shift deviation) per tested sector.
    pub sectors: Vec<(u32, f64, f64)>,
}

pub fn ph_transform_check(
    spec: &LatticeSpec,
    p: &MicroParams,
    mu: f64,
    sectors: &[u32],
    levels: usize,
    opts: &BuildOptions,
) -> Result<PhReport> {
    let ns = spec.n_sites();
    let tol = 1e-9;
    let mut report = PhReport {
        pass: true,
        max_level_dev: 0.0,
        max_shift_dev: 0.0,
        sectors: Vec::new(),
    };
    for &n in sectors {
        let dual = ns - n;
        let (s1, s2) = if levels == 0 {
            (
                sector_spectrum_dense(spec, p, mu, n, opts)?,
                sector_spectrum_dense(spec, p, p.v - mu, dual, opts)?,
            )
        } else {
            (
                sector_lowest(spec, p, mu, n, levels, opts)?,
                sector_lowest(spec, p, p.v - mu, dual, levels, opts)?,
            )
        };
        let compared = s1.len().min(s2.len());
        let shift = s1[0] - s2[0];
        let mut dev = 0.0f64;
        for i in 0..compared {
            dev = dev.max((s1[i] - s2[i] - shift).abs());
        }
        let shift_dev = (shift - (p.v * n as f64 - mu * ns as f64)).abs();
        report.max_level_dev = report.max_level_dev.max(dev);
        report.max_shift_dev = report.max_shift_dev.max(shift_dev);
        if dev > tol || shift_dev > tol {
            report.pass = false;
        }
        report.sectors.push((n, dev, shift_dev));
    }
    Ok(report)
}

/// Staggered moment squared M(mask)^2 with M = sum_x (-1)^(x1+x2) n_x,
/// per basis state.
pub fn staggered_squared(basis: &FockBasis, spec: &LatticeSpec, opts: &BuildOptions) -> Vec<f64> {
    let mut sign_of_bit = vec![0.0; spec.n_sites() as usize];
    for y in 0..spec.n2 {
        for x in 0..spec.n1 {
            sign_of_bit[site_bit(spec, opts, x, y) as usize] =
                if (x + y) % 2 == 0 { 1.0 } else { -1.0 };
        }
    }
    basis
        .states
        .iter()
        .map(|&mask| {
            let mut m = 0.0;
            for b in 0..spec.n_sites() {
                if mask >> b & 1 == 1 {
                    m += sign_of_bit[b as usize];
                }
            }
            m * m
        })
        .collect()
}

/// Staggered density correlator (1/Ns^2) sum_{x,y} (-1)^(x-y) <n_x n_y>
/// of a normalized state.
pub fn cdw_order(state: &[f64], basis: &FockBasis, spec: &LatticeSpec) -> f64 {
    let m2 = staggered_squared(basis, spec, &BuildOptions::default());
    let ns = spec.n_sites() as f64;
    state
        .iter()
        .zip(&m2)
        .map(|(a, m)| a * a * m)
        .sum::<f64>()
        / (ns * ns)
}

/// Ground multiplet CDW diagnostic: the correlator averaged over all
/// states within `energy_window` of the ground energy, which removes the
/// solver-order ambiguity of degenerate ground states.
#[derive(Clone, Debug, Serialize)]
pub struct CdwMultiplet {
    pub energies: Vec<f64>,
    pub value: f64,
    pub multiplicity: usize,
}

pub fn cdw_ground_multiplet(
    spec: &LatticeSpec,
    p: &MicroParams,
    mu: f64,
    n: u32,
    energy_window: f64,
) -> Result<CdwMultiplet> {
    let basis = FockBasis::sector(spec.n_sites(), n)?;
    let op = htv_operator(spec, p, mu, &basis, &BuildOptions::default());
    let (vals, vecs): (Vec<f64>, Vec<Vec<f64>>) = if basis.dim() <= 4096 {
        let eig = SymmetricEigen::new(op.to_dense());
        let mut order: Vec<usize> = (0..basis.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let take = order.len().min(8);
        (
            order[..take].iter().map(|&i| eig.eigenvalues[i]).collect(),
            order[..take]
                .iter()
                .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
                .collect(),
        )
    } else {
        lowest_eigenpairs(
            basis.dim(),
            |x, y| op.matvec(x, y),
            8.min(basis.dim()),
            &LanczosOpts::default(),
        )?
    };
    let e0 = vals[0];
    let mut value = 0.0;
    let mut multiplicity = 0;
    for (e, v) in vals.iter().zip(&vecs) {
        if e - e0 <= energy_window {
            value += cdw_order(v, &basis, spec);
            multiplicity += 1;
        }
    }
    Ok(CdwMultiplet {
        energies: vals,
        value: value / multiplicity as f64,
        multiplicity,
    })
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1u64;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// CDW correlator of the free (V = 0) ground manifold at particle number
/// `n`, evaluated exactly by averaging over every Slater determinant that
/// fills the degenerate boundary shell, without any eigensolver.
pub fn free_fermi_cdw_average(spec: &LatticeSpec, n: u32) -> Result<f64> {
    let ns = spec.n_sites();
    if n == 0 || n > ns {
        return Err(CoreError::InvalidInput(format!(
            "particle number {n} outside 1..={ns}"
        )));
    }
    // single-particle modes of the torus, grouped into degenerate shells
    let mut modes: Vec<(f64, u32, u32)> = Vec::new();
    for m1 in 0..spec.n1 {
        for m2 in 0..spec.n2 {
            let e = -2.0
                * ((2.0 * PI * m1 as f64 / spec.n1 as f64).cos()
                    + (2.0 * PI * m2 as f64 / spec.n2 as f64).cos());
            modes.push((e, m1, m2));
        }
    }
    modes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut filled: Vec<(u32, u32)> = Vec::new();
    let mut i = 0;
    while i < modes.len() {
        let mut jx = i;
        while jx < modes.len() && (modes[jx].0 - modes[i].0).abs() < 1e-9 {
            jx += 1;
        }
        if filled.len() + (jx - i) <= n as usize {
            filled.extend(modes[i..jx].iter().map(|m| (m.1, m.2)));
            i = jx;
        } else {
            break;
        }
    }
    let remaining = n as usize - filled.len();
    let shell: Vec<(u32, u32)> = if remaining > 0 {
        let mut jx = i;
        while jx < modes.len() && (modes[jx].0 - modes[i].0).abs() < 1e-9 {
            jx += 1;
        }
        modes[i..jx].iter().map(|m| (m.1, m.2)).collect()
    } else {
        Vec::new()
    };
    let n_dets = if remaining > 0 {
        binom(shell.len() as u64, remaining as u64)
    } else {
        1
    };
    if n_dets > 200 {
        return Err(CoreError::SizeLimit(format!(
            "{n_dets} boundary determinants exceed the cap"
        )));
    }

    let bases: Vec<FockBasis> = (0..=n)
        .map(|k| FockBasis::sector(ns, k))
        .collect::<Result<_>>()?;
    let opts = BuildOptions::default();
    let apply_mode = |state: &[Complex<f64>], level: usize, mode: (u32, u32)| {
        let src = &bases[level];
        let dst = &bases[level + 1];
        let mut out = vec![Complex::new(0.0, 0.0); dst.dim()];
        let norm = (ns as f64).sqrt();
        for (idx, amp) in state.iter().enumerate() {
            if amp.norm_sqr() == 0.0 {
                continue;
            }
            let mask = src.states[idx];
            for y in 0..spec.n2 {
                for x in 0..spec.n1 {
                    let b = site_bit(spec, &opts, x, y);
                    if mask >> b & 1 == 1 {
                        continue;
                    }
                    let phase = 2.0 * PI
                        * (mode.0 as f64 * x as f64 / spec.n1 as f64
                            + mode.1 as f64 * y as f64 / spec.n2 as f64);
                    let sign = if parity_below(mask, b) == 0 { 1.0 } else { -1.0 };
                    let target = dst.index_of(mask | (1 << b)).expect("in sector");
                    out[target] +=
                        amp * Complex::new(phase.cos(), phase.sin()) * (sign / norm);
                }
            }
        }
        out
    };

    let choices = combinations(shell.len(), remaining);
    let m2 = staggered_squared(&bases[n as usize], spec, &opts);
    let nsf = ns as f64;
    let mut total = 0.0;
    for choice in &choices {
        let mut state = vec![Complex::new(1.0, 0.0)];
        let mut level = 0usize;
        for &mode in &filled {
            state = apply_mode(&state, level, mode);
            level += 1;
        }
        for &ci in choice {
            state = apply_mode(&state, level, shell[ci]);
            level += 1;
        }
        let norm: f64 = state.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidInput(format!(
                "determinant construction lost normalization: {norm}"
            )));
        }
        total += state
            .iter()
            .zip(&m2)
            .map(|(a, m)| a.norm_sqr() * m)
            .sum::<f64>()
            / (nsf * nsf);
    }
    Ok(total / choices.len() as f64)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for jx in i + 1..k {
            idx[jx] = idx[jx - 1] + 1;
        }
    }
}

/// Entrywise identity between the position-space interaction
/// (V/2) sum_edges n n and the momentum-space form
/// (V/2N) sum_p [cos p1 + cos p2] rho(p) rho(-p); both are diagonal.
/// Returns (max entry deviation, |sum_p u(p)|); the second value is the
/// coefficient of the contraction term and must vanish, i.e. the
/// interaction generates no Hartree shift on the torus.
pub fn interaction_identity_check(spec: &LatticeSpec, v: f64) -> Result<(f64, f64)> {
    let ns = spec.n_sites();
    if ns > 12 {
        return Err(CoreError::SizeLimit(
            "identity check meant for tiny clusters".into(),
        ));
    }
    let opts = BuildOptions::default();
    let edge_list = edges(spec, &opts);
    let lambda = v / 2.0;
    let mut w_sum = 0.0;
    let mut w_list = Vec::new();
    for m1 in 0..spec.n1 {
        for m2 in 0..spec.n2 {
            let w = (2.0 * PI * m1 as f64 / spec.n1 as f64).cos()
                + (2.0 * PI * m2 as f64 / spec.n2 as f64).cos();
            w_sum += w;
            w_list.push((m1, m2, w));
        }
    }
    let mut worst = 0.0f64;
    for mask in 0..1u32 << ns {
        let mut pos = 0.0;
        for e in &edge_list {
            if mask >> e.i & 1 == 1 && mask >> e.j & 1 == 1 {
                pos += lambda;
            }
        }
        let mut mom = 0.0;
        for &(m1, m2, w) in &w_list {
            let mut rho = Complex::new(0.0, 0.0);
            for y in 0..spec.n2 {
                for x in 0..spec.n1 {
                    let b = site_bit(spec, &opts, x, y);
                    if mask >> b & 1 == 1 {
                        let phase = -2.0 * PI
                            * (m1 as f64 * x as f64 / spec.n1 as f64
                                + m2 as f64 * y as f64 / spec.n2 as f64);
                        rho += Complex::new(phase.cos(), phase.sin());
                    }
                }
            }
            mom += w * rho.norm_sqr();
        }
        mom *= v / (2.0 * ns as f64);
        worst = worst.max((pos - mom).abs());
    }
    Ok((worst, w_sum.abs()))
}
