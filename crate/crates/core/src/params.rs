//! Model parameters: microscopic inputs and the closed-form effective
//! parameters of the partial continuum limit.
//!
//! Microscopic model: H = -t sum_<xy> (c+ c + h.c.) + V sum_<xy> n n - mu N
//! on the square lattice with lattice constant a and linear size L.
//! Effective model: linear nodal branches with velocity v_F, hyperbolic
//! antinodal bands with curvature c_F, couplings g1..g4, and the antinodal
//! chemical potential mu_a, all parameterized by Q = pi nu.

use crate::momentum::{Momentum, A_TILDE_FACTOR};
use crate::zone::{Flavor, RegionIndex};
use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Microscopic inputs. The linear size must satisfy L/a = 2 sqrt(2) m with
/// m a positive odd integer so that the rotated momentum grids close; the
/// filling nu is rounded to the nearest commensurate value j/(2m) and the
/// applied rounding is recorded.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MicroParams {
    pub t: f64,
    pub v: f64,
    pub a: f64,
    pub l: f64,
    /// Commensurate filling j/(2m) actually used.
    pub nu: f64,
    /// Filling as requested before rounding.
    pub nu_requested: f64,
    /// L/a = 2 sqrt(2) m; m is odd.
    pub m: i64,
    /// nu = j/(2m).
    pub j: i64,
}

impl MicroParams {
    pub fn new(t: f64, v: f64, a: f64, l: f64, nu: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(CoreError::InvalidInput(format!("t must be > 0, got {t}")));
        }
        if !(v >= 0.0) {
            return Err(CoreError::InvalidInput(format!("V must be >= 0, got {v}")));
        }
        if !(a > 0.0) {
            return Err(CoreError::InvalidInput(format!("a must be > 0, got {a}")));
        }
        let ratio = l / (A_TILDE_FACTOR * a);
        let m = ratio.round();
        if !(ratio > 0.0) || (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
            return Err(CoreError::InvalidInput(format!(
                "L/a = {} is not an integer multiple of 2 sqrt(2)",
                l / a
            )));
        }
        let m = m as i64;
        if m % 2 == 0 {
            return Err(CoreError::InvalidInput(format!(
                "L/a = 2 sqrt(2) m requires odd m, got m = {m}"
            )));
        }
        if !(0.0..=1.0).contains(&nu) {
            return Err(CoreError::InvalidInput(format!(
                "nu must lie in [0, 1], got {nu}"
            )));
        }
        // round half away from zero onto the commensurate grid j/(2m)
        let j = (2.0 * m as f64 * nu).round() as i64;
        Ok(MicroParams {
            t,
            v,
            a,
            l,
            nu: j as f64 / (2.0 * m as f64),
            nu_requested: nu,
            m,
            j,
        })
    }

    /// Parameters for finite-lattice diagnostics where only (t, V, a) are
    /// used; L and nu are placeholders on the smallest valid grid.
    pub fn microscopic(t: f64, v: f64) -> Self {
        MicroParams::new(t, v, 1.0, A_TILDE_FACTOR * 3.0, 0.5).expect("valid placeholder grid")
    }

    /// Number of lattice sites (L/a)^2 = 8 m^2.
    pub fn n_sites(&self) -> i64 {
        8 * self.m * self.m
    }

    /// Rounding applied to reach the commensurate filling.
    pub fn nu_rounding(&self) -> f64 {
        self.nu - self.nu_requested
    }

    pub fn a_tilde(&self) -> f64 {
        A_TILDE_FACTOR * self.a
    }
}

/// Closed-form parameters of the effective model at Fermi parameter Q.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub t: f64,
    pub v: f64,
    pub a: f64,
    /// Nodal Fermi parameter Q = pi nu.
    pub q: f64,
    /// Nodal Fermi velocity 2 sqrt(2) t a sin Q.
    pub v_f: f64,
    /// Antinodal curvature 2 t a^2.
    pub c_f: f64,
    /// Nodal same-flavor coupling 2 V sin^2(Q) a^2.
    pub g1: f64,
    /// Nodal cross-flavor coupling g1/2.
    pub g2: f64,
    /// Antinodal coupling 2 V a^2 (before boson integration).
    pub g3: f64,
    /// Nodal-antinodal coupling, equal to g3.
    pub g4: f64,
    /// Antinodal chemical potential; antisymmetric under Q -> pi - Q.
    pub mu_a: f64,
    /// Dimensionless interaction strength V sin(Q) / (4 pi t).
    pub gamma: f64,
    /// Microscopic chemical potential implied by setting the nodal
    /// chemical potential to zero.
    pub mu_micro: f64,
    /// False when gamma >= 1 (V >= 4 pi t / sin Q).
    pub stable: bool,
}

impl EffectiveParams {
    /// Evaluate the closed forms at exact filling nu in (1/2, 3/4)
    /// without any grid commensuration.
    pub fn from_filling(t: f64, v: f64, a: f64, nu: f64) -> Result<Self> {
        if !(nu > 0.5 && nu < 0.75) {
            return Err(CoreError::InvalidInput(format!(
                "effective model requires 1/2 < nu < 3/4, got {nu}"
            )));
        }
        Self::from_q(t, v, a, PI * nu)
    }

    /// Evaluate the closed forms at Fermi parameter Q in (pi/4, 3pi/4).
    pub fn from_q(t: f64, v: f64, a: f64, q: f64) -> Result<Self> {
        if !(t > 0.0 && a > 0.0 && v >= 0.0) {
            return Err(CoreError::InvalidInput(
                "require t > 0, a > 0, V >= 0".into(),
            ));
        }
        if !(q > PI / 4.0 && q < 3.0 * PI / 4.0) {
            return Err(CoreError::InvalidInput(format!(
                "Q must lie in (pi/4, 3pi/4), got {q}"
            )));
        }
        let sin_q = q.sin();
        // evaluated as sin(pi/2 - q) so that mu_a(pi/2) is exactly zero
        let cos_q = (PI / 2.0 - q).sin();
        let v_f = 2.0 * std::f64::consts::SQRT_2 * t * a * sin_q;
        let g1 = 2.0 * v * sin_q * sin_q * a * a;
        let g3 = 2.0 * v * a * a;
        let mu_a = -(4.0 * t + v / 4.0) * cos_q + v * cos_q * cos_q * (1.0 - 2.0 * q / PI);
        let mu_micro = -4.0 * t * cos_q
            + (2.0 * q * sin_q * sin_q / PI + cos_q * cos_q + cos_q / 4.0) * v;
        let gamma = v * sin_q / (4.0 * PI * t);
        Ok(EffectiveParams {
            t,
            v,
            a,
            q,
            v_f,
            c_f: 2.0 * t * a * a,
            g1,
            g2: g1 / 2.0,
            g3,
            g4: g3,
            mu_a,
            gamma,
            mu_micro,
            stable: gamma < 1.0,
        })
    }
}

/// Closed-form effective parameters for commensurate microscopic inputs.
pub fn derive_effective_params(p: &MicroParams) -> Result<EffectiveParams> {
    EffectiveParams::from_filling(p.t, p.v, p.a, p.nu)
}

/// Tight-binding band -2t (cos(a k1) + cos(a k2)).
pub fn band_energy(k: Momentum, p: &MicroParams) -> f64 {
    -2.0 * p.t * ((p.a * k.k1()).cos() + (p.a * k.k2()).cos())
}

/// Band linearized around the region's representative point, in local
/// momenta: the antinodal flavor keeps the full hyperbolic term
/// -r c_F k_+ k_-, the nodal flavors are linear with slope r v_F along
/// the longitudinal direction.
pub fn linearized_band(idx: RegionIndex, k: Momentum, eff: &EffectiveParams) -> f64 {
    let r = idx.r as f64;
    let cos_q = (PI / 2.0 - eff.q).sin();
    match idx.s {
        Flavor::Antinodal => -r * eff.c_f * k.k_plus * k.k_minus,
        Flavor::NodalPlus => -4.0 * eff.t * cos_q + r * eff.v_f * k.k_plus,
        Flavor::NodalMinus => -4.0 * eff.t * cos_q + r * eff.v_f * k.k_minus,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Stable,
    Unstable,
}

/// Stable iff gamma < 1, equivalently V < 4 pi t / sin Q.
pub fn stability_check(eff: &EffectiveParams) -> Stability {
    if eff.gamma < 1.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zone::{Flavor, RegionIndex};
    use rand::{Rng, SeedableRng};

    #[test]
    fn band_extremes_and_zero_surface() {
        let p = MicroParams::microscopic(1.0, 0.0);
        assert!((band_energy(Momentum::from_cartesian(0.0, 0.0), &p) + 4.0).abs() < 1e-15);
        assert!((band_energy(Momentum::from_cartesian(PI, PI), &p) - 4.0).abs() < 1e-12);
        // vanishes on the square |k1 + k2| = pi
        for i in 0..20 {
            let k1 = -PI + 0.1 + 0.3 * i as f64 / 20.0;
            let k2 = PI - k1;
            assert!(band_energy(Momentum::from_cartesian(k1, k2), &p).abs() < 1e-12);
        }
    }

    #[test]
    fn band_particle_hole_covariance() {
        // shifting by (pi, pi)/a flips the band sign exactly
        let p = MicroParams::microscopic(1.3, 0.0);
        let shift = Momentum::from_cartesian(PI, PI);
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let k = Momentum::from_cartesian(
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
            );
            let e = band_energy(k, &p);
            let e_shift = band_energy(k + shift, &p);
            assert!((e + e_shift).abs() < 1e-12, "{e} vs {e_shift}");
        }
    }

    #[test]
    fn effective_params_closed_forms() {
        let eff = EffectiveParams::from_filling(1.0, 2.0, 1.0, 0.55).unwrap();
        assert!((eff.q - 1.7278759594743864).abs() < 1e-15);
        assert!((eff.v_f - 2.7936044933348412).abs() < 1e-13);
        assert!((eff.c_f - 2.0).abs() < 1e-15);
        assert!((eff.g1 - 3.9021130325903064).abs() < 1e-13);
        assert!((eff.g2 - 1.9510565162951532).abs() < 1e-13);
        assert!((eff.g3 - 4.0).abs() < 1e-15);
        assert!((eff.g4 - 4.0).abs() < 1e-15);
        assert!((eff.mu_a - 0.69906074431055498).abs() < 1e-13);
        assert!((eff.mu_micro - 2.7426262792703238).abs() < 1e-13);
        assert!((eff.gamma - 0.15719548163994768).abs() < 1e-15);
        assert!(eff.stable);
        assert!((eff.g1 - 2.0 * eff.g2).abs() < 1e-15);
    }

    #[test]
    fn mu_a_vanishes_exactly_at_half_filling() {
        let eff = EffectiveParams::from_q(1.0, 2.0, 1.0, PI / 2.0).unwrap();
        assert_eq!(eff.mu_a, 0.0);
        assert!((eff.gamma - 0.15915494309189535).abs() < 1e-16);
    }

    #[test]
    fn mu_a_antisymmetric_and_couplings_symmetric() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let q = rng.random_range(0.2501 * PI..0.7499 * PI);
            let e1 = EffectiveParams::from_q(1.0, 3.0, 1.0, q).unwrap();
            let e2 = EffectiveParams::from_q(1.0, 3.0, 1.0, PI - q).unwrap();
            assert!((e1.mu_a + e2.mu_a).abs() < 1e-12);
            assert!((e1.v_f - e2.v_f).abs() < 1e-12);
            assert!((e1.g1 - e2.g1).abs() < 1e-12);
            assert!((e1.g3 - e2.g3).abs() < 1e-15);
        }
    }

    #[test]
    fn stability_boundary() {
        let stable = EffectiveParams::from_q(1.0, 2.0, 1.0, PI / 2.0).unwrap();
        assert_eq!(stability_check(&stable), Stability::Stable);
        let boundary = EffectiveParams::from_q(1.0, 4.0 * PI, 1.0, PI / 2.0).unwrap();
        assert_eq!(stability_check(&boundary), Stability::Unstable);
        assert!(!boundary.stable);
        let free = EffectiveParams::from_q(1.0, 0.0, 1.0, 1.9).unwrap();
        assert_eq!(stability_check(&free), Stability::Stable);
        assert_eq!(free.gamma, 0.0);
    }

    #[test]
    fn linearized_band_values() {
        let eff = EffectiveParams::from_q(1.0, 0.0, 1.0, PI / 2.0).unwrap();
        let saddle = RegionIndex {
            r: 1,
            s: Flavor::Antinodal,
        };
        assert_eq!(linearized_band(saddle, Momentum::zero(), &eff), 0.0);
        let nodal = RegionIndex {
            r: 1,
            s: Flavor::NodalPlus,
        };
        assert_eq!(linearized_band(nodal, Momentum::zero(), &eff), 0.0);
        let nodal_m = RegionIndex {
            r: -1,
            s: Flavor::NodalPlus,
        };
        let val = linearized_band(nodal_m, Momentum::new(0.1, 0.0), &eff);
        assert!((val - (-0.28284271247461906)).abs() < 1e-15);
    }

    #[test]
    fn commensurate_rounding_is_small_and_recorded() {
        let p = MicroParams::new(1.0, 2.0, 1.0, A_TILDE_FACTOR * 9.0, 0.55).unwrap();
        assert_eq!(p.m, 9);
        assert_eq!(p.j, 10);
        assert!((p.nu - 10.0 / 18.0).abs() < 1e-15);
        // rounding never exceeds half a grid step 1/(4m)
        assert!(p.nu_rounding().abs() <= 1.0 / (4.0 * p.m as f64) + 1e-15);
    }

    #[test]
    fn micro_params_rejects_bad_grids() {
        assert!(MicroParams::new(1.0, 1.0, 1.0, 4.0, 0.5).is_err());
        assert!(MicroParams::new(1.0, 1.0, 1.0, A_TILDE_FACTOR * 4.0, 0.5).is_err());
        assert!(MicroParams::new(-1.0, 1.0, 1.0, A_TILDE_FACTOR * 3.0, 0.5).is_err());
        assert!(MicroParams::new(1.0, 1.0, 1.0, A_TILDE_FACTOR * 3.0, 1.5).is_err());
        assert!(MicroParams::new(1.0, 1.0, 1.0, A_TILDE_FACTOR * 5.0, 0.6).is_ok());
    }

    #[test]
    fn derive_uses_commensurate_filling() {
        let p = MicroParams::new(1.0, 2.0, 1.0, A_TILDE_FACTOR * 5.0, 0.61).unwrap();
        let eff = derive_effective_params(&p).unwrap();
        assert!((eff.q - PI * p.nu).abs() < 1e-15);
        assert!(EffectiveParams::from_filling(1.0, 2.0, 1.0, 0.4).is_err());
    }
}
