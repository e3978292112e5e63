//! Six-region decomposition of the Brillouin zone.
//!
//! Regions are labeled (r, s) with r = +-1 and s in {0, +, -}: the two
//! s = 0 regions sit at the saddle points (pi, 0)/a and (0, pi)/a
//! (antinodal), the four s = +- regions at (r Q, r s Q)/a on the zone
//! diagonals (nodal).
//!
//! All membership arithmetic is exact: momenta are represented by doubled
//! integer coordinates d_pm = 2 k_pm L / (2 pi), which are odd integers for
//! fermion momenta. The grid has L/a = 2 sqrt(2) m with odd m, giving
//! 8 m^2 points, and Q = pi j / (2m).

use crate::momentum::Momentum;
use crate::params::MicroParams;
use crate::{CoreError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Flavor label s: antinodal s = 0, nodal s = +-.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flavor {
    Antinodal,
    NodalPlus,
    NodalMinus,
}

impl Flavor {
    pub fn all() -> [Flavor; 3] {
        [Flavor::Antinodal, Flavor::NodalPlus, Flavor::NodalMinus]
    }

    /// s as an integer: 0 for antinodal, +-1 for nodal.
    pub fn s_sign(&self) -> i64 {
        match self {
            Flavor::Antinodal => 0,
            Flavor::NodalPlus => 1,
            Flavor::NodalMinus => -1,
        }
    }

    pub fn is_nodal(&self) -> bool {
        !matches!(self, Flavor::Antinodal)
    }
}

/// One of the six regions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RegionIndex {
    /// +1 or -1.
    pub r: i64,
    pub s: Flavor,
}

impl RegionIndex {
    pub fn new(r: i64, s: Flavor) -> Self {
        assert!(r == 1 || r == -1, "r must be +-1");
        RegionIndex { r, s }
    }

    /// All six regions in a fixed order: antinodal pair first, then the
    /// nodal flavors, each with r = + before r = -.
    pub fn all() -> [RegionIndex; 6] {
        [
            RegionIndex::new(1, Flavor::Antinodal),
            RegionIndex::new(-1, Flavor::Antinodal),
            RegionIndex::new(1, Flavor::NodalPlus),
            RegionIndex::new(-1, Flavor::NodalPlus),
            RegionIndex::new(1, Flavor::NodalMinus),
            RegionIndex::new(-1, Flavor::NodalMinus),
        ]
    }

    /// Position of this region in [`RegionIndex::all`].
    pub fn ordinal(&self) -> usize {
        let base = match self.s {
            Flavor::Antinodal => 0,
            Flavor::NodalPlus => 2,
            Flavor::NodalMinus => 4,
        };
        base + if self.r == 1 { 0 } else { 1 }
    }
}

/// Representative point Q_{r,s}/a of a region, for Q in (pi/4, 3pi/4).
pub fn q_point(idx: RegionIndex, q: f64, a: f64) -> Result<Momentum> {
    if !(q > PI / 4.0 && q < 3.0 * PI / 4.0) {
        return Err(CoreError::InvalidInput(format!(
            "Q must lie in (pi/4, 3pi/4), got {q}"
        )));
    }
    let r = idx.r as f64;
    Ok(match idx.s {
        Flavor::Antinodal => {
            if idx.r == 1 {
                Momentum::from_cartesian(PI / a, 0.0)
            } else {
                Momentum::from_cartesian(0.0, PI / a)
            }
        }
        Flavor::NodalPlus => Momentum::from_cartesian(r * q / a, r * q / a),
        Flavor::NodalMinus => Momentum::from_cartesian(r * q / a, -r * q / a),
    })
}

/// Per-region filling fractions: 1/16 for each antinodal region and
/// (Q/pi - 1/8)/4 for each nodal region; they sum to Q/pi.
pub fn filling_fractions(q: f64) -> Result<[(RegionIndex, f64); 6]> {
    if !(q > PI / 4.0 && q < 3.0 * PI / 4.0) {
        return Err(CoreError::InvalidInput(format!(
            "Q must lie in (pi/4, 3pi/4), got {q}"
        )));
    }
    let nodal = (q / PI - 0.125) / 4.0;
    let mut out = [(RegionIndex::all()[0], 0.0); 6];
    for (slot, idx) in out.iter_mut().zip(RegionIndex::all()) {
        let f = if idx.s.is_nodal() { nodal } else { 1.0 / 16.0 };
        *slot = (idx, f);
    }
    Ok(out)
}

/// Momentum grid in doubled integer coordinates.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BzGrid {
    /// L/a = 2 sqrt(2) m, odd.
    pub m: i64,
    /// Q = pi j/(2m); requires m/2 < j < 3m/2.
    pub j: i64,
    pub a: f64,
}

impl BzGrid {
    pub fn from_mj(m: i64, j: i64, a: f64) -> Result<Self> {
        if m < 1 || m % 2 == 0 {
            return Err(CoreError::InvalidInput(format!("m must be odd >= 1, got {m}")));
        }
        if !(2 * j > m && 2 * j < 3 * m) {
            return Err(CoreError::InvalidInput(format!(
                "Q = pi j/(2m) must lie in (pi/4, 3pi/4): m = {m}, j = {j}"
            )));
        }
        if !(a > 0.0) {
            return Err(CoreError::InvalidInput(format!("a must be > 0, got {a}")));
        }
        Ok(BzGrid { m, j, a })
    }

    pub fn new(p: &MicroParams) -> Result<Self> {
        BzGrid::from_mj(p.m, p.j, p.a)
    }

    pub fn q(&self) -> f64 {
        PI * self.j as f64 / (2.0 * self.m as f64)
    }

    pub fn l(&self) -> f64 {
        2.0 * std::f64::consts::SQRT_2 * self.m as f64 * self.a
    }

    pub fn n_sites(&self) -> usize {
        (8 * self.m * self.m) as usize
    }

    /// Both Cartesian components in [-pi/a, pi/a), expressed through the
    /// doubled rotated coordinates.
    fn in_bz(&self, d: (i64, i64)) -> bool {
        let u = (d.0 + d.1) / 2;
        let w = (d.0 - d.1) / 2;
        let b = 2 * self.m;
        (-b..b).contains(&u) && (-b..b).contains(&w)
    }

    /// All 8 m^2 fermion momenta as doubled odd-integer pairs, in a fixed
    /// row-major order.
    pub fn points(&self) -> Vec<(i64, i64)> {
        let lim = 4 * self.m;
        let mut out = Vec::with_capacity(self.n_sites());
        let mut dp = -lim + 1;
        while dp < lim {
            let mut dm = -lim + 1;
            while dm < lim {
                if self.in_bz((dp, dm)) {
                    out.push((dp, dm));
                }
                dm += 2;
            }
            dp += 2;
        }
        out
    }

    /// Physical momentum of a doubled coordinate pair.
    pub fn momentum(&self, d: (i64, i64)) -> Momentum {
        let u = 2.0 * PI / self.l();
        Momentum::new(0.5 * d.0 as f64 * u, 0.5 * d.1 as f64 * u)
    }

    /// Doubled representative-point offset of a region.
    fn offset(&self, idx: RegionIndex) -> (i64, i64) {
        let (m, j, r) = (self.m, self.j, idx.r);
        match idx.s {
            Flavor::Antinodal => (2 * m, 2 * m * r),
            Flavor::NodalPlus => (2 * r * j, 0),
            Flavor::NodalMinus => (0, 2 * r * j),
        }
    }

    /// Reciprocal lattice vectors (2pi/a)Z^2 in doubled coordinates:
    /// (4m g1, 4m g2) with g1 + g2 even.
    fn reciprocal_vectors(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for g1 in -2i64..=2 {
            for g2 in -2i64..=2 {
                if (g1 + g2) % 2 == 0 {
                    out.push((4 * self.m * g1, 4 * self.m * g2));
                }
            }
        }
        out
    }

    /// Half-open local windows in doubled coordinates. The antinodal
    /// window is the square |k'_pm| < pi/a_tilde; the nodal windows keep
    /// the transverse component in that square and constrain the two
    /// Cartesian combinations shifted by r(j - m).
    fn in_window(&self, idx: RegionIndex, d: (i64, i64)) -> bool {
        let m = self.m;
        let half = -m..m;
        match idx.s {
            Flavor::Antinodal => half.contains(&d.0) && half.contains(&d.1),
            _ => {
                let s = idx.s.s_sign();
                let transverse = if s == 1 { d.1 } else { d.0 };
                if !half.contains(&transverse) {
                    return false;
                }
                let shift = idx.r * (self.j - m);
                let u = (d.0 + d.1) / 2 + shift;
                let w = (d.0 - d.1) / 2 + s * shift;
                half.contains(&u) && half.contains(&w)
            }
        }
    }

    /// Region and local doubled momentum of a grid point. Errors if the
    /// point is off-grid or the regions fail to cover it exactly once
    /// (which would falsify the partition and must be impossible).
    pub fn classify_doubled(&self, d: (i64, i64)) -> Result<(RegionIndex, (i64, i64))> {
        if d.0.rem_euclid(2) == 0 || d.1.rem_euclid(2) == 0 || !self.in_bz(d) {
            return Err(CoreError::InvalidInput(format!(
                "({}, {}) is not a fermion grid point of the Brillouin zone",
                d.0, d.1
            )));
        }
        let gs = self.reciprocal_vectors();
        let mut found: Option<(RegionIndex, (i64, i64))> = None;
        for idx in RegionIndex::all() {
            let o = self.offset(idx);
            for g in &gs {
                let local = (d.0 - o.0 + g.0, d.1 - o.1 + g.1);
                if self.in_window(idx, local) {
                    if found.is_some() {
                        return Err(CoreError::InvalidInput(format!(
                            "point ({}, {}) matched two regions",
                            d.0, d.1
                        )));
                    }
                    found = Some((idx, local));
                }
            }
        }
        found.ok_or_else(|| {
            CoreError::InvalidInput(format!("point ({}, {}) matched no region", d.0, d.1))
        })
    }

    /// Classify a physical momentum by snapping it to the doubled grid.
    pub fn classify(&self, k: Momentum) -> Result<(RegionIndex, Momentum)> {
        let u = 2.0 * PI / self.l();
        let dp = 2.0 * k.k_plus / u;
        let dm = 2.0 * k.k_minus / u;
        if (dp - dp.round()).abs() > 1e-6 || (dm - dm.round()).abs() > 1e-6 {
            return Err(CoreError::InvalidInput(
                "momentum does not lie on the fermion grid".into(),
            ));
        }
        let (idx, local) = self.classify_doubled((dp.round() as i64, dm.round() as i64))?;
        Ok((idx, self.momentum(local)))
    }

    /// Region sizes computed by streaming the predicate without
    /// materializing the point lists.
    pub fn counts_by_predicate(&self) -> Result<[usize; 6]> {
        let mut counts = [0usize; 6];
        for d in self.points() {
            let (idx, _) = self.classify_doubled(d)?;
            counts[idx.ordinal()] += 1;
        }
        Ok(counts)
    }
}

/// One classified grid point.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ZonePoint {
    /// Doubled rotated coordinates of the momentum.
    pub d: (i64, i64),
    pub region: RegionIndex,
    /// Doubled rotated coordinates of the local momentum.
    pub local: (i64, i64),
}

/// Materialized partition of the whole grid.
#[derive(Clone, Debug)]
pub struct RegionMap {
    pub grid: BzGrid,
    pub points: Vec<ZonePoint>,
    pub counts: [usize; 6],
}

impl RegionMap {
    pub fn build(grid: BzGrid) -> Result<Self> {
        let mut points = Vec::with_capacity(grid.n_sites());
        let mut counts = [0usize; 6];
        for d in grid.points() {
            let (region, local) = grid.classify_doubled(d)?;
            counts[region.ordinal()] += 1;
            points.push(ZonePoint { d, region, local });
        }
        if points.len() != grid.n_sites() {
            return Err(CoreError::InvalidInput(format!(
                "grid enumeration produced {} of {} points",
                points.len(),
                grid.n_sites()
            )));
        }
        Ok(RegionMap {
            grid,
            points,
            counts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn q_points_match_definitions() {
        let k = q_point(RegionIndex::new(1, Flavor::Antinodal), 1.3, 1.0).unwrap();
        assert!((k.k1() - PI).abs() < 1e-14 && k.k2().abs() < 1e-14);
        let k = q_point(RegionIndex::new(-1, Flavor::NodalMinus), PI / 2.0, 1.0).unwrap();
        assert!((k.k1() + PI / 2.0).abs() < 1e-14);
        assert!((k.k2() - PI / 2.0).abs() < 1e-14);
        let k = q_point(RegionIndex::new(1, Flavor::NodalPlus), 0.55 * PI, 1.0).unwrap();
        assert!((k.k1() - 0.55 * PI).abs() < 1e-14);
        assert!((k.k2() - 0.55 * PI).abs() < 1e-14);
        assert!(q_point(RegionIndex::new(1, Flavor::NodalPlus), 0.1, 1.0).is_err());
        assert!(q_point(RegionIndex::new(1, Flavor::NodalPlus), 3.0, 1.0).is_err());
    }

    #[test]
    fn filling_fractions_values_and_sum() {
        let f = filling_fractions(PI / 2.0).unwrap();
        for (idx, v) in f {
            let expect = if idx.s.is_nodal() { 3.0 / 32.0 } else { 1.0 / 16.0 };
            assert!((v - expect).abs() < 1e-16);
        }
        let total: f64 = f.iter().map(|(_, v)| v).sum();
        assert!((total - 0.5).abs() < 1e-16);

        let f = filling_fractions(0.6 * PI).unwrap();
        let nodal = f[2].1;
        assert!((nodal - 0.11875).abs() < 1e-15);

        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..1000 {
            let q = rng.random_range(PI / 4.0 + 1e-6..3.0 * PI / 4.0 - 1e-6);
            let f = filling_fractions(q).unwrap();
            let total: f64 = f.iter().map(|(_, v)| v).sum();
            assert!((total - q / PI).abs() < 1e-14);
        }
    }

    #[test]
    fn counts_m3_and_m5() {
        for j in [2, 3, 4] {
            let grid = BzGrid::from_mj(3, j, 1.0).unwrap();
            let map = RegionMap::build(grid).unwrap();
            assert_eq!(map.counts, [9, 9, 13, 13, 14, 14], "j = {j}");
            assert_eq!(map.counts.iter().sum::<usize>(), 72);
        }
        for j in [3, 4, 5, 6, 7] {
            let grid = BzGrid::from_mj(5, j, 1.0).unwrap();
            let map = RegionMap::build(grid).unwrap();
            assert_eq!(map.counts, [25, 25, 37, 37, 38, 38], "j = {j}");
            assert_eq!(map.counts.iter().sum::<usize>(), 200);
        }
    }

    #[test]
    fn chirality_partners_have_equal_counts() {
        for (m, j) in [(3, 2), (3, 4), (5, 4), (7, 7), (9, 11)] {
            let map = RegionMap::build(BzGrid::from_mj(m, j, 1.0).unwrap()).unwrap();
            assert_eq!(map.counts[0], map.counts[1]);
            assert_eq!(map.counts[2], map.counts[3]);
            assert_eq!(map.counts[4], map.counts[5]);
            assert_eq!(map.counts.iter().sum::<usize>(), (8 * m * m) as usize);
        }
    }

    #[test]
    fn materialized_and_predicate_counts_agree() {
        let grid = BzGrid::from_mj(5, 6, 1.0).unwrap();
        let map = RegionMap::build(grid).unwrap();
        assert_eq!(map.counts, grid.counts_by_predicate().unwrap());
    }

    #[test]
    fn classify_recovers_representative_neighborhood() {
        let grid = BzGrid::from_mj(5, 5, 1.0).unwrap();
        for idx in RegionIndex::all() {
            // nearest grid point to the representative: local doubled (1, 1)
            let o = grid.offset(idx);
            let d = (o.0 + 1, o.1 + 1);
            // reduce into the zone before classifying
            let k = grid.momentum(d).reduce_bz(grid.a);
            let (found, local) = grid.classify(k).unwrap();
            assert_eq!(found, idx);
            assert!((local.k_plus - grid.momentum((1, 1)).k_plus).abs() < 1e-12);
        }
    }

    #[test]
    fn decomposition_reconstructs_momenta() {
        let grid = BzGrid::from_mj(3, 4, 1.0).unwrap();
        let map = RegionMap::build(grid).unwrap();
        for zp in &map.points {
            let k = grid.momentum(zp.d);
            let rep = q_point(zp.region, grid.q(), grid.a).unwrap();
            let rebuilt = (rep + grid.momentum(zp.local)).reduce_bz(grid.a);
            let orig = k.reduce_bz(grid.a);
            assert!((rebuilt.k_plus - orig.k_plus).abs() < 1e-10);
            assert!((rebuilt.k_minus - orig.k_minus).abs() < 1e-10);
        }
    }

    #[test]
    fn off_grid_momentum_rejected() {
        let grid = BzGrid::from_mj(3, 3, 1.0).unwrap();
        assert!(grid.classify(Momentum::new(0.1234, 0.0)).is_err());
        assert!(grid.classify_doubled((2, 3)).is_err());
        assert!(grid.classify_doubled((25, 1)).is_err());
    }
}
