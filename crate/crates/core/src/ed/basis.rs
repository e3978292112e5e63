//! Bit-encoded fermionic Fock bases on up to 20 sites.

use crate::{CoreError, Result};

/// Ordered basis of occupation bit masks, either the full Fock space or a
/// fixed-particle-number sector. Masks are listed in increasing order, so
/// membership lookups are binary searches.
#[derive(Clone, Debug)]
pub struct FockBasis {
    pub n_sites: u32,
    pub n_particles: Option<u32>,
    pub states: Vec<u32>,
}

impl FockBasis {
    pub fn full(n_sites: u32) -> Result<Self> {
        check_sites(n_sites)?;
        Ok(FockBasis {
            n_sites,
            n_particles: None,
            states: (0..1u32 << n_sites).collect(),
        })
    }

    pub fn sector(n_sites: u32, n_particles: u32) -> Result<Self> {
        check_sites(n_sites)?;
        if n_particles > n_sites {
            return Err(CoreError::InvalidInput(format!(
                "sector {n_particles} exceeds {n_sites} sites"
            )));
        }
        let states = (0..1u32 << n_sites)
            .filter(|m| m.count_ones() == n_particles)
            .collect();
        Ok(FockBasis {
            n_sites,
            n_particles: Some(n_particles),
            states,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, mask: u32) -> Option<usize> {
        self.states.binary_search(&mask).ok()
    }
}

fn check_sites(n_sites: u32) -> Result<()> {
    if n_sites == 0 || n_sites > 20 {
        return Err(CoreError::SizeLimit(format!(
            "site count {n_sites} outside 1..=20"
        )));
    }
    Ok(())
}

/// Parity of the set bits of `mask` strictly below position `i`.
#[inline]
pub fn parity_below(mask: u32, i: u32) -> u32 {
    (mask & ((1u32 << i) - 1)).count_ones() & 1
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn sector_sizes_are_binomials() {
        for n in [4u32, 8, 12] {
            for k in 0..=n {
                let b = FockBasis::sector(n, k).unwrap();
                assert_eq!(b.dim() as u64, binom(n as u64, k as u64));
            }
        }
        assert_eq!(FockBasis::full(10).unwrap().dim(), 1024);
    }

    #[test]
    fn lookup_round_trips() {
        let b = FockBasis::sector(8, 3).unwrap();
        for (i, &m) in b.states.iter().enumerate() {
            assert_eq!(b.index_of(m), Some(i));
        }
        assert_eq!(b.index_of(0b11), None);
    }

    #[test]
    fn size_limit_enforced() {
        assert!(FockBasis::full(21).is_err());
        assert!(FockBasis::sector(9, 10).is_err());
    }

    #[test]
    fn parity_counts_low_bits() {
        assert_eq!(parity_below(0b1011, 0), 0);
        assert_eq!(parity_below(0b1011, 1), 1);
        assert_eq!(parity_below(0b1011, 2), 0);
        assert_eq!(parity_below(0b1011, 4), 1);
    }
}
