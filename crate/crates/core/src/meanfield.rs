//! Self-consistent antinodal charge-density-wave gap.
//!
//! The two antinodal flavors are folded onto each other by the checkerboard
//! ordering vector, which opens a gap Delta in the hyperbolic bands
//! eps = c_F k_+ k_-.  The gap equation is
//!
//! ```text
//! Delta = (g3_eff / a_tilde^2) < occ / (2 E) >  Delta,
//! ```
//!
//! with E = sqrt(eps^2 + Delta^2), the average taken over a midpoint
//! momentum grid covering the reduced cell [-pi/a_tilde, pi/a_tilde)^2,
//! and occ the thermal pair-occupation factor at antinodal chemical
//! potential mu_a.  g3_eff is the boson-integrated antinodal coupling.
//!
//! Two solvers are provided: a damped fixed-point iteration and a
//! bisection on rhs(Delta)/Delta - 1, which agree at the self-consistent
//! gap and serve as mutual cross-checks.

use crate::boson::effective_antinodal_couplings;
use crate::momentum::A_TILDE_FACTOR;
use crate::params::EffectiveParams;
use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Midpoint momentum grid with n points per axis on
/// [-pi/a_tilde, pi/a_tilde): k_j = -pi/a_tilde + (j + 1/2) (2 pi / a_tilde) / n.
/// n must be even so that no grid point lands on a zero of the hyperbolic
/// band and the gap kernel stays finite as Delta -> 0.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AntinodalGrid {
    pub n: usize,
    pub a_tilde: f64,
}

impl AntinodalGrid {
    pub fn new(n: usize, a_tilde: f64) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(CoreError::InvalidInput(format!(
                "antinodal grid needs an even n >= 2, got {n}"
            )));
        }
        if !(a_tilde > 0.0) {
            return Err(CoreError::InvalidInput(format!(
                "a_tilde must be positive, got {a_tilde}"
            )));
        }
        Ok(AntinodalGrid { n, a_tilde })
    }

    /// Grid matched to the reduced cell of the given effective parameters.
    pub fn for_params(eff: &EffectiveParams, n: usize) -> Result<Self> {
        Self::new(n, A_TILDE_FACTOR * eff.a)
    }

    /// Axis coordinates k_j, identical for both axes.
    pub fn coords(&self) -> Vec<f64> {
        let step = 2.0 * PI / self.a_tilde / self.n as f64;
        (0..self.n)
            .map(|j| -PI / self.a_tilde + (j as f64 + 0.5) * step)
            .collect()
    }
}

/// Fermi factor; at T = 0 a sharp step.
fn fermi(x: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        if x < 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 / (1.0 + (x / temperature).exp())
    }
}

/// Thermal pair-occupation factor entering the gap kernel.  At T = 0 the
/// quasiparticle at energy E contributes only when it clears the antinodal
/// chemical potential, |mu_a| < E (Pauli blocking of the folded bands).
fn pair_occupation(e: f64, mu_a: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        if e > mu_a.abs() {
            1.0
        } else {
            0.0
        }
    } else {
        0.5 * (((e + mu_a) / (2.0 * temperature)).tanh() + ((e - mu_a) / (2.0 * temperature)).tanh())
    }
}

fn kernel_mean(eff: &EffectiveParams, grid: &AntinodalGrid, temperature: f64, delta: f64) -> f64 {
    let ks = grid.coords();
    let mut sum = 0.0;
    for &kp in &ks {
        for &km in &ks {
            let eps = eff.c_f * kp * km;
            let e = (eps * eps + delta * delta).sqrt();
            sum += pair_occupation(e, eff.mu_a, temperature) / (2.0 * e);
        }
    }
    sum / (grid.n * grid.n) as f64
}

/// Right-hand side of the gap equation,
/// (g3_eff / a_tilde^2) < occ / (2E) > Delta.
pub fn gap_rhs(eff: &EffectiveParams, grid: &AntinodalGrid, temperature: f64, delta: f64) -> f64 {
    let (g3_eff, _) = effective_antinodal_couplings(eff);
    g3_eff / (grid.a_tilde * grid.a_tilde) * kernel_mean(eff, grid, temperature, delta) * delta
}

/// Mean-field quasiparticle bands (E - mu_a, -E - mu_a) at local momentum
/// (k_+, k_-), with E = sqrt((c_F k_+ k_-)^2 + Delta^2).
pub fn mf_bands(eff: &EffectiveParams, delta: f64, k_plus: f64, k_minus: f64) -> (f64, f64) {
    let eps = eff.c_f * k_plus * k_minus;
    let e = (eps * eps + delta * delta).sqrt();
    (e - eff.mu_a, -e - eff.mu_a)
}

/// Controls for the damped fixed-point solver.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GapOptions {
    /// Mixing weight of the new iterate; 1/2 mixes half old, half new.
    pub damping: f64,
    /// Starting gap; defaults to t.
    pub delta0: Option<f64>,
    /// Convergence when |Delta' - Delta| <= tol * max(t, Delta').
    pub tol: f64,
    pub max_iter: usize,
    /// Converged gaps below snap * t collapse to exactly zero.
    pub snap: f64,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            damping: 0.5,
            delta0: None,
            tol: 1e-10,
            max_iter: 100_000,
            snap: 1e-8,
        }
    }
}

/// Solved gap together with solver diagnostics.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GapSolution {
    pub delta: f64,
    pub iterations: usize,
    /// Last fixed-point increment, or final bracket width for bisection.
    pub residual: f64,
    pub g3_eff: f64,
    pub mu_a: f64,
}

/// Damped fixed-point iteration Delta' = (1 - damping) Delta + damping rhs(Delta)
/// starting from Delta = t.  A non-positive g3_eff short-circuits to the
/// exact zero solution.
pub fn solve_gap(
    eff: &EffectiveParams,
    grid: &AntinodalGrid,
    temperature: f64,
    opts: &GapOptions,
) -> Result<GapSolution> {
    if temperature < 0.0 {
        return Err(CoreError::InvalidInput(format!(
            "temperature must be nonnegative, got {temperature}"
        )));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(CoreError::InvalidInput(format!(
            "damping must lie in (0, 1], got {}",
            opts.damping
        )));
    }
    let (g3_eff, _) = effective_antinodal_couplings(eff);
    if g3_eff <= 0.0 {
        return Ok(GapSolution {
            delta: 0.0,
            iterations: 0,
            residual: 0.0,
            g3_eff,
            mu_a: eff.mu_a,
        });
    }
    let mut delta = opts.delta0.unwrap_or(eff.t);
    let mut trace: Vec<f64> = Vec::new();
    for it in 1..=opts.max_iter {
        let next = (1.0 - opts.damping) * delta + opts.damping * gap_rhs(eff, grid, temperature, delta);
        let inc = next - delta;
        trace.push(inc);
        delta = next;
        if inc.abs() <= opts.tol * eff.t.max(delta) {
            if delta < opts.snap * eff.t {
                delta = 0.0;
            }
            return Ok(GapSolution {
                delta,
                iterations: it,
                residual: inc.abs(),
                g3_eff,
                mu_a: eff.mu_a,
            });
        }
    }
    let tail: Vec<f64> = trace.iter().rev().take(6).rev().copied().collect();
    let alternating = tail.len() >= 4 && tail.windows(2).all(|w| w[0] * w[1] < 0.0);
    if alternating {
        Err(CoreError::Oscillation {
            iterations: opts.max_iter,
            trace: tail,
        })
    } else {
        Err(CoreError::NonConvergence {
            iterations: opts.max_iter,
            trace: tail,
        })
    }
}

/// Bisection on h(Delta) = rhs(Delta)/Delta - 1, which is decreasing in
/// Delta.  The bracket is [1e-12 t, 50 t]; h(lo) <= 0 certifies that only
/// the trivial solution exists and returns exactly zero.
pub fn solve_gap_bisection(
    eff: &EffectiveParams,
    grid: &AntinodalGrid,
    temperature: f64,
) -> Result<GapSolution> {
    if temperature < 0.0 {
        return Err(CoreError::InvalidInput(format!(
            "temperature must be nonnegative, got {temperature}"
        )));
    }
    let (g3_eff, _) = effective_antinodal_couplings(eff);
    let zero = GapSolution {
        delta: 0.0,
        iterations: 0,
        residual: 0.0,
        g3_eff,
        mu_a: eff.mu_a,
    };
    if g3_eff <= 0.0 {
        return Ok(zero);
    }
    let h = |d: f64| gap_rhs(eff, grid, temperature, d) / d - 1.0;
    let mut lo = 1e-12 * eff.t;
    let mut hi = 50.0 * eff.t;
    if h(lo) <= 0.0 {
        return Ok(zero);
    }
    if h(hi) >= 0.0 {
        return Err(CoreError::NonConvergence {
            iterations: 0,
            trace: vec![h(hi)],
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(GapSolution {
        delta: 0.5 * (lo + hi),
        iterations: 200,
        residual: hi - lo,
        g3_eff,
        mu_a: eff.mu_a,
    })
}

fn filling_at_mu(
    eff: &EffectiveParams,
    grid: &AntinodalGrid,
    temperature: f64,
    delta: f64,
    mu_a: f64,
) -> f64 {
    let ks = grid.coords();
    let mut sum = 0.0;
    for &kp in &ks {
        for &km in &ks {
            let eps = eff.c_f * kp * km;
            let e = (eps * eps + delta * delta).sqrt();
            sum += fermi(e - mu_a, temperature) + fermi(-e - mu_a, temperature);
        }
    }
    sum / (grid.n * grid.n) as f64 / 2.0 - 0.5
}

/// Antinodal filling relative to half filling: the grid average of the
/// occupations of both quasiparticle bands, divided by two, minus 1/2.
/// Exactly zero when mu_a = 0.
pub fn antinodal_filling(
    eff: &EffectiveParams,
    grid: &AntinodalGrid,
    temperature: f64,
    delta: f64,
) -> f64 {
    filling_at_mu(eff, grid, temperature, delta, eff.mu_a)
}

/// d(filling)/d(mu_a) by central finite difference with step 1e-3 t,
/// holding the gap fixed.
pub fn filling_susceptibility(
    eff: &EffectiveParams,
    grid: &AntinodalGrid,
    temperature: f64,
    delta: f64,
) -> f64 {
    let h = 1e-3 * eff.t;
    let up = filling_at_mu(eff, grid, temperature, delta, eff.mu_a + h);
    let down = filling_at_mu(eff, grid, temperature, delta, eff.mu_a - h);
    (up - down) / (2.0 * h)
}

/// One point of a gap-versus-Q scan.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GapScanPoint {
    pub q: f64,
    pub delta: f64,
    /// True when the solved gap exceeds 1e-6 t.
    pub gapped: bool,
}

/// Solve the gap on n_q equally spaced Q values over [0.3 pi, 0.7 pi],
/// an interval symmetric about the half-filled point pi/2; the solved
/// gap inherits that symmetry.
pub fn gap_phase_scan(
    t: f64,
    v: f64,
    a: f64,
    temperature: f64,
    grid_n: usize,
    n_q: usize,
) -> Result<Vec<GapScanPoint>> {
    if n_q < 2 {
        return Err(CoreError::InvalidInput(format!(
            "scan needs at least two Q points, got {n_q}"
        )));
    }
    let opts = GapOptions::default();
    let mut out = Vec::with_capacity(n_q);
    for i in 0..n_q {
        let q = PI * (0.3 + 0.4 * i as f64 / (n_q - 1) as f64);
        let eff = EffectiveParams::from_q(t, v, a, q)?;
        let grid = AntinodalGrid::for_params(&eff, grid_n)?;
        let sol = solve_gap(&eff, &grid, temperature, &opts)?;
        out.push(GapScanPoint {
            q,
            delta: sol.delta,
            gapped: sol.delta > 1e-6 * t,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eff_at(v: f64, q: f64) -> EffectiveParams {
        EffectiveParams::from_q(1.0, v, 1.0, q).unwrap()
    }

    #[test]
    fn grid_validation_and_coords() {
        assert!(AntinodalGrid::new(0, 1.0).is_err());
        assert!(AntinodalGrid::new(7, 1.0).is_err());
        assert!(AntinodalGrid::new(4, -1.0).is_err());
        let g = AntinodalGrid::new(4, A_TILDE_FACTOR).unwrap();
        let ks = g.coords();
        assert_eq!(ks.len(), 4);
        // midpoints: symmetric about zero, zero excluded
        assert!((ks[0] + ks[3]).abs() < 1e-15);
        assert!((ks[1] + ks[2]).abs() < 1e-15);
        assert!(ks.iter().all(|&k| k.abs() > 1e-12));
        // spacing and range
        let step = 2.0 * PI / A_TILDE_FACTOR / 4.0;
        assert!((ks[1] - ks[0] - step).abs() < 1e-15);
        assert!((ks[0] - (-PI / A_TILDE_FACTOR + 0.5 * step)).abs() < 1e-15);
    }

    #[test]
    fn frozen_gap_half_filling() {
        let eff = eff_at(4.0, PI / 2.0);
        let grid = AntinodalGrid::for_params(&eff, 64).unwrap();
        let sol = solve_gap_bisection(&eff, &grid, 0.0).unwrap();
        assert!((sol.delta - 0.1899855859384128).abs() < 1e-10, "{}", sol.delta);
        assert!((sol.g3_eff - 6.4440618814066291).abs() < 1e-13);
        assert_eq!(sol.mu_a, 0.0);

        let fine = AntinodalGrid::for_params(&eff, 128).unwrap();
        let sol_fine = solve_gap_bisection(&eff, &fine, 0.0).unwrap();
        assert!((sol_fine.delta - 0.18997754025350228).abs() < 1e-10);
        // grid refinement moves the gap by well under a percent
        assert!(((sol_fine.delta - sol.delta) / sol.delta).abs() < 1e-2);

        let weak = eff_at(2.0, PI / 2.0);
        let s = solve_gap_bisection(&weak, &grid, 0.0).unwrap();
        assert!((s.delta - 0.051495485126172066).abs() < 1e-10, "{}", s.delta);
        let strong = eff_at(8.0, PI / 2.0);
        let s8 = solve_gap_bisection(&strong, &grid, 0.0).unwrap();
        assert!((s8.delta - 0.50242424547852726).abs() < 1e-10, "{}", s8.delta);
        // monotone in V
        assert!(s.delta < sol.delta && sol.delta < s8.delta);
    }

    #[test]
    fn temperature_and_doping_close_the_gap() {
        let eff = eff_at(4.0, PI / 2.0);
        let grid = AntinodalGrid::for_params(&eff, 64).unwrap();
        let hot = solve_gap_bisection(&eff, &grid, 0.5).unwrap();
        assert_eq!(hot.delta, 0.0);
        let hot_fp = solve_gap(&eff, &grid, 0.5, &GapOptions::default()).unwrap();
        assert_eq!(hot_fp.delta, 0.0);
        // warm but below the transition: gap shrinks yet survives
        let warm = solve_gap_bisection(&eff, &grid, 0.05).unwrap();
        let cold = solve_gap_bisection(&eff, &grid, 0.0).unwrap();
        assert!(warm.delta > 0.0 && warm.delta < cold.delta);
        // away from half filling mu_a Pauli-blocks the T = 0 kernel
        for q in [0.45 * PI, 0.55 * PI] {
            let doped = eff_at(4.0, q);
            let g = AntinodalGrid::for_params(&doped, 64).unwrap();
            assert_eq!(solve_gap_bisection(&doped, &g, 0.0).unwrap().delta, 0.0);
            assert_eq!(
                solve_gap(&doped, &g, 0.0, &GapOptions::default()).unwrap().delta,
                0.0
            );
        }
    }

    #[test]
    fn free_system_has_exactly_zero_gap() {
        let eff = eff_at(0.0, PI / 2.0);
        let grid = AntinodalGrid::for_params(&eff, 64).unwrap();
        let sol = solve_gap(&eff, &grid, 0.0, &GapOptions::default()).unwrap();
        assert_eq!(sol.delta, 0.0);
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.g3_eff, 0.0);
        assert_eq!(solve_gap_bisection(&eff, &grid, 0.0).unwrap().delta, 0.0);
    }

    #[test]
    fn fixed_point_agrees_with_bisection() {
        let eff = eff_at(4.0, PI / 2.0);
        let grid = AntinodalGrid::for_params(&eff, 64).unwrap();
        let fp = solve_gap(&eff, &grid, 0.0, &GapOptions::default()).unwrap();
        let bi = solve_gap_bisection(&eff, &grid, 0.0).unwrap();
        assert!((fp.delta - bi.delta).abs() < 1e-8, "{} vs {}", fp.delta, bi.delta);
        assert!(fp.iterations > 0 && fp.residual <= 1e-10 * fp.delta.max(1.0));
    }

    #[test]
    fn rhs_scaling_and_bands() {
        let eff = eff_at(4.0, PI / 2.0);
        let grid = AntinodalGrid::for_params(&eff, 32).unwrap();
        // rhs is odd under Delta -> -Delta through the explicit factor
        let r = gap_rhs(&eff, &grid, 0.0, 0.3);
        assert!(r > 0.0);
        // kernel decreases with Delta, so rhs grows sublinearly
        assert!(gap_rhs(&eff, &grid, 0.0, 0.6) < 2.0 * r);
        let (up, down) = mf_bands(&eff, 0.2, 0.3, 0.0);
        assert!((up - 0.2).abs() < 1e-15 && (down + 0.2).abs() < 1e-15);
        let (u2, d2) = mf_bands(&eff, 0.2, 0.5, 0.4);
        let e = (0.4f64.powi(2) + 0.04).sqrt();
        assert!((u2 - e).abs() < 1e-15 && (d2 + e).abs() < 1e-15);
    }

    #[test]
    fn filling_zero_at_half_filling_and_susceptibility_positive() {
        let eff = eff_at(4.0, PI / 2.0);
        let grid = AntinodalGrid::for_params(&eff, 64).unwrap();
        assert_eq!(antinodal_filling(&eff, &grid, 0.0, 0.19), 0.0);
        assert!(antinodal_filling(&eff, &grid, 0.3, 0.19).abs() < 1e-15);
        let chi = filling_susceptibility(&eff, &grid, 0.3, 0.19);
        assert!(chi > 0.0, "{chi}");
        // doped case fills away from zero with the sign of mu_a
        let doped = eff_at(4.0, 0.45 * PI);
        let f = antinodal_filling(&doped, &grid, 0.3, 0.0);
        assert!(f * doped.mu_a > 0.0, "{f} vs {}", doped.mu_a);
    }

    #[test]
    fn phase_scan_symmetric_with_gapped_interval() {
        let pts = gap_phase_scan(1.0, 4.0, 1.0, 0.0, 32, 9).unwrap();
        assert_eq!(pts.len(), 9);
        for i in 0..9 {
            let j = 8 - i;
            assert!((pts[i].q + pts[j].q - PI).abs() < 1e-12);
            assert!(
                (pts[i].delta - pts[j].delta).abs() < 1e-8,
                "{} vs {}",
                pts[i].delta,
                pts[j].delta
            );
        }
        // the half-filled midpoint is gapped, the far wings are not
        assert!(pts[4].gapped);
        assert!(!pts[0].gapped && !pts[8].gapped);
        assert!(pts.iter().filter(|p| p.gapped).count() >= 1);
    }
}
