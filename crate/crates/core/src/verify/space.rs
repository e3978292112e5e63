//! Truncated Fock spaces for chiral lattice fermions.
//!
//! A branch is a set of `n_perp` parallel chains, each carrying `2M`
//! longitudinal modes with half-integer momentum indices
//! K = -M + 1/2 + mode (in units of the momentum spacing u). The Dirac
//! sea fills every mode with r K < 0, where r = +-1 is the chirality.
//! States are u64 bit masks; several branches live on disjoint bit
//! ranges of the same mask so that joint-space operators can be applied
//! with one global Jordan-Wigner convention.

use crate::{CoreError, Result};

fn parity_below(mask: u64, bit: u32) -> u32 {
    (mask & ((1u64 << bit) - 1)).count_ones() & 1
}

#[derive(Clone, Copy, Debug)]
pub struct ChiralBranch {
    /// Chirality r = +1 or -1.
    pub chirality: i64,
    /// Half the number of longitudinal modes (M).
    pub half_modes: u32,
    /// Number of transverse chains.
    pub n_perp: u32,
    /// First global bit of this branch.
    pub bit_offset: u32,
}

impl ChiralBranch {
    pub fn n_long(&self) -> u32 {
        2 * self.half_modes
    }

    pub fn n_bits(&self) -> u32 {
        self.n_long() * self.n_perp
    }

    pub fn bit(&self, chain: u32, mode: u32) -> u32 {
        debug_assert!(chain < self.n_perp && mode < self.n_long());
        self.bit_offset + chain * self.n_long() + mode
    }

    /// Longitudinal momentum of a mode in units of the spacing u.
    pub fn momentum_index(&self, mode: u32) -> f64 {
        -(self.half_modes as f64) + 0.5 + mode as f64
    }

    /// Mask of the filled Dirac sea (modes with r K < 0) on this branch.
    pub fn sea_mask(&self) -> u64 {
        let mut m = 0u64;
        for chain in 0..self.n_perp {
            for mode in 0..self.n_long() {
                if self.chirality as f64 * self.momentum_index(mode) < 0.0 {
                    m |= 1u64 << self.bit(chain, mode);
                }
            }
        }
        m
    }

    pub fn sea_count(&self) -> u32 {
        self.half_modes * self.n_perp
    }

    pub fn bits_mask(&self) -> u64 {
        ((1u64 << self.n_bits()) - 1) << self.bit_offset
    }
}

/// Sparse state: (mask, amplitude) pairs sorted by mask with no
/// duplicates and no stored zeros.
pub type SparseState = Vec<(u64, f64)>;

fn sort_merge(mut v: SparseState) -> SparseState {
    v.sort_unstable_by_key(|e| e.0);
    let mut out: SparseState = Vec::with_capacity(v.len());
    for (mask, amp) in v {
        match out.last_mut() {
            Some(last) if last.0 == mask => last.1 += amp,
            _ => out.push((mask, amp)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    out
}

/// a + c * b for sparse states.
pub fn axpy_state(a: &SparseState, c: f64, b: &SparseState) -> SparseState {
    let mut v = a.clone();
    v.extend(b.iter().map(|&(m, x)| (m, c * x)));
    sort_merge(v)
}

pub fn max_abs(a: &SparseState) -> f64 {
    a.iter().fold(0.0f64, |acc, &(_, x)| acc.max(x.abs()))
}

pub fn dot_state(a: &SparseState, b: &SparseState) -> f64 {
    let mut i = 0;
    let mut j = 0;
    let mut s = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

/// One or more chiral branches on disjoint bit ranges of a u64 mask.
#[derive(Clone, Debug)]
pub struct TruncatedChiralSpace {
    branches: Vec<ChiralBranch>,
    total_bits: u32,
}

impl TruncatedChiralSpace {
    /// Branch specs as (chirality, M, n_perp); bit offsets are assigned
    /// consecutively.
    pub fn new(specs: &[(i64, u32, u32)]) -> Result<Self> {
        let mut branches = Vec::with_capacity(specs.len());
        let mut offset = 0u32;
        for &(r, m, np) in specs {
            if r != 1 && r != -1 {
                return Err(CoreError::InvalidInput(format!("chirality must be +-1, got {r}")));
            }
            if m == 0 || np == 0 {
                return Err(CoreError::InvalidInput(
                    "branch needs at least one mode and one chain".into(),
                ));
            }
            let b = ChiralBranch {
                chirality: r,
                half_modes: m,
                n_perp: np,
                bit_offset: offset,
            };
            offset += b.n_bits();
            branches.push(b);
        }
        if offset > 62 {
            return Err(CoreError::SizeLimit(format!(
                "{offset} bits exceed the truncated-space cap of 62"
            )));
        }
        Ok(TruncatedChiralSpace {
            branches,
            total_bits: offset,
        })
    }

    pub fn single(r: i64, half_modes: u32, n_perp: u32) -> Result<Self> {
        Self::new(&[(r, half_modes, n_perp)])
    }

    pub fn branches(&self) -> &[ChiralBranch] {
        &self.branches
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    /// Joint Dirac sea of all branches.
    pub fn sea(&self) -> u64 {
        self.branches.iter().map(|b| b.sea_mask()).fold(0, |a, m| a | m)
    }

    /// Normal-ordered charge of one branch in a basis state.
    pub fn charge(&self, branch: usize, mask: u64) -> i64 {
        let b = &self.branches[branch];
        (mask & b.bits_mask()).count_ones() as i64 - b.sea_count() as i64
    }

    /// Truncated density operator J_branch(p) with p = (m_long, m_perp):
    /// sum over chains and modes of c+(chain - m_perp, mode - m_long)
    /// c(chain, mode). The transverse shift wraps modulo n_perp (umklapp
    /// identification); longitudinal images outside the mode window are
    /// dropped. p = (0, 0 mod n_perp) is the normal-ordered charge.
    pub fn apply_density(
        &self,
        branch: usize,
        m_long: i64,
        m_perp: i64,
        state: &SparseState,
    ) -> SparseState {
        let b = &self.branches[branch];
        let np = b.n_perp as i64;
        let nl = b.n_long() as i64;
        let mp = m_perp.rem_euclid(np);
        if m_long == 0 && mp == 0 {
            let mut out: SparseState = Vec::with_capacity(state.len());
            for &(mask, amp) in state {
                let q = self.charge(branch, mask);
                if q != 0 {
                    out.push((mask, amp * q as f64));
                }
            }
            return out;
        }
        let mut out: SparseState = Vec::new();
        for &(mask, amp) in state {
            for chain in 0..np {
                let dst_chain = (chain - mp).rem_euclid(np) as u32;
                for mode in 0..nl {
                    let i = b.bit(chain as u32, mode as u32);
                    if mask >> i & 1 == 0 {
                        continue;
                    }
                    let dmode = mode - m_long;
                    if !(0..nl).contains(&dmode) {
                        continue;
                    }
                    let j = b.bit(dst_chain, dmode as u32);
                    debug_assert_ne!(i, j);
                    if mask >> j & 1 == 1 {
                        continue;
                    }
                    let s1 = parity_below(mask, i);
                    let m1 = mask & !(1u64 << i);
                    let s2 = parity_below(m1, j);
                    let m2 = m1 | 1u64 << j;
                    out.push((m2, if (s1 ^ s2) == 0 { amp } else { -amp }));
                }
            }
        }
        sort_merge(out)
    }

    /// All states whose deviation from the sea is confined to the safe
    /// longitudinal window [w, 2M - w) on every chain of `branch`, with
    /// every other branch frozen at its sea.
    pub fn safe_states(&self, branch: usize, w: u32) -> Result<Vec<u64>> {
        let b = &self.branches[branch];
        if 2 * w >= b.n_long() {
            return Err(CoreError::InvalidInput(format!(
                "margin {w} leaves no safe window for 2M = {}",
                b.n_long()
            )));
        }
        let free: Vec<u32> = (0..b.n_perp)
            .flat_map(|chain| (w..b.n_long() - w).map(move |mode| b.bit(chain, mode)))
            .collect();
        if free.len() > 16 {
            return Err(CoreError::SizeLimit(format!(
                "{} free bits is too many safe states",
                free.len()
            )));
        }
        let frozen = self.sea() & !free.iter().fold(0u64, |a, &bit| a | 1u64 << bit);
        let mut out = Vec::with_capacity(1usize << free.len());
        for counter in 0u64..1u64 << free.len() {
            let mut mask = frozen;
            for (idx, &bit) in free.iter().enumerate() {
                if counter >> idx & 1 == 1 {
                    mask |= 1u64 << bit;
                }
            }
            out.push(mask);
        }
        Ok(out)
    }

    /// All basis masks of `branch`'s single-branch space with exactly the
    /// sea particle number (charge zero), other branches at their sea.
    pub fn charge_zero_masks(&self, branch: usize) -> Vec<u64> {
        let b = &self.branches[branch];
        let others = self.sea() & !b.bits_mask();
        let n = b.n_bits();
        let target = b.sea_count();
        let mut out = Vec::new();
        for local in 0u64..1u64 << n {
            if local.count_ones() == target {
                out.push(others | (local << b.bit_offset));
            }
        }
        out
    }
}
