//! Momenta in rotated coordinates k_pm = (k1 +- k2)/sqrt(2).
//!
//! Fermion momenta live on the half-integer grid (Z+1/2)(2pi/L) in both
//! rotated components; difference momenta live on the integer grid.
//! The effective lattice constant of the rotated coarse lattice is
//! a_tilde = 2 sqrt(2) a.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Ratio a_tilde / a between the coarse rotated lattice constant and the
/// microscopic lattice constant.
pub const A_TILDE_FACTOR: f64 = 2.0 * SQRT2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Momentum {
    pub k_plus: f64,
    pub k_minus: f64,
}

impl Momentum {
    pub fn new(k_plus: f64, k_minus: f64) -> Self {
        Momentum { k_plus, k_minus }
    }

    pub fn zero() -> Self {
        Momentum::new(0.0, 0.0)
    }

    pub fn from_cartesian(k1: f64, k2: f64) -> Self {
        Momentum::new((k1 + k2) / SQRT2, (k1 - k2) / SQRT2)
    }

    pub fn k1(&self) -> f64 {
        (self.k_plus + self.k_minus) / SQRT2
    }

    pub fn k2(&self) -> f64 {
        (self.k_plus - self.k_minus) / SQRT2
    }

    pub fn norm_sq(&self) -> f64 {
        self.k_plus * self.k_plus + self.k_minus * self.k_minus
    }

    /// Reduce modulo the reciprocal lattice (2pi/a)Z^2 so that both
    /// Cartesian components land in [-pi/a, pi/a).
    pub fn reduce_bz(self, a: f64) -> Momentum {
        let w = 2.0 * PI / a;
        let wrap = |x: f64| x - w * ((x / w) + 0.5).floor();
        Momentum::from_cartesian(wrap(self.k1()), wrap(self.k2()))
    }
}

impl std::ops::Add for Momentum {
    type Output = Momentum;
    fn add(self, rhs: Momentum) -> Momentum {
        Momentum::new(self.k_plus + rhs.k_plus, self.k_minus + rhs.k_minus)
    }
}

impl std::ops::Sub for Momentum {
    type Output = Momentum;
    fn sub(self, rhs: Momentum) -> Momentum {
        Momentum::new(self.k_plus - rhs.k_plus, self.k_minus - rhs.k_minus)
    }
}

impl std::ops::Neg for Momentum {
    type Output = Momentum;
    fn neg(self) -> Momentum {
        Momentum::new(-self.k_plus, -self.k_minus)
    }
}

/// Sharp interaction cutoff: chi(p) = 1 iff -bound <= p_pm <= bound
/// (closed interval) with bound = pi/a_tilde.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CutoffWindow {
    pub bound: f64,
}

impl CutoffWindow {
    pub fn new(bound: f64) -> Self {
        CutoffWindow { bound }
    }

    /// Window for the coarse rotated lattice derived from the microscopic
    /// lattice constant a.
    pub fn for_micro_lattice(a: f64) -> Self {
        CutoffWindow::new(PI / (A_TILDE_FACTOR * a))
    }

    pub fn contains(&self, p: Momentum) -> bool {
        p.k_plus.abs() <= self.bound && p.k_minus.abs() <= self.bound
    }

    pub fn chi(&self, p: Momentum) -> f64 {
        if self.contains(p) {
            1.0
        } else {
            0.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_round_trips() {
        let k = Momentum::from_cartesian(0.3, -1.2);
        assert!((k.k1() - 0.3).abs() < 1e-15);
        assert!((k.k2() + 1.2).abs() < 1e-15);
        let back = Momentum::from_cartesian(k.k1(), k.k2());
        assert!((back.k_plus - k.k_plus).abs() < 1e-15);
        assert!((back.k_minus - k.k_minus).abs() < 1e-15);
    }

    #[test]
    fn bz_reduction_lands_in_window() {
        let a = 1.0;
        for i in 0..100 {
            let k1 = -17.0 + 0.37 * i as f64;
            let k2 = 9.0 - 0.53 * i as f64;
            let r = Momentum::from_cartesian(k1, k2).reduce_bz(a);
            assert!(r.k1() >= -PI - 1e-12 && r.k1() < PI + 1e-12);
            assert!(r.k2() >= -PI - 1e-12 && r.k2() < PI + 1e-12);
            // the reduction is exact modulo 2pi/a
            let d1 = (k1 - r.k1()) / (2.0 * PI);
            let d2 = (k2 - r.k2()) / (2.0 * PI);
            assert!((d1 - d1.round()).abs() < 1e-9);
            assert!((d2 - d2.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn cutoff_closed_interval() {
        let w = CutoffWindow::new(1.0);
        assert!(w.contains(Momentum::new(1.0, -1.0)));
        assert!(!w.contains(Momentum::new(1.0 + 1e-12, 0.0)));
        assert_eq!(w.chi(Momentum::new(0.5, 0.5)), 1.0);
        assert_eq!(w.chi(Momentum::new(0.0, 2.0)), 0.0);
    }
}
