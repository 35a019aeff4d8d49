//! Vertex sets as bitmasks with cached stationary measure, plus the
//! exhaustive enumeration everything downstream sweeps over.

use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;

/// Hard cap on exhaustive subset enumeration (2^24 subsets).
pub const ENUMERATION_CAP: usize = 24;
/// Slack used when testing `pi(A) <= 1/2` so that exact ties count.
pub const HALF_TIE_TOL: f64 = 1e-12;

/// A subset of states, stored as a bitmask, with `pi(A)` cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexSet {
    bits: u32,
    measure: f64,
}

impl VertexSet {
    pub fn from_bits(k: &MarkovKernel, bits: u32) -> Result<VertexSet> {
        if k.n() > 32 {
            return Err(Error::TooManyStates { n: k.n(), cap: 32 });
        }
        if k.n() < 32 && bits >= 1u32 << k.n() {
            return Err(Error::InvalidSpec(format!(
                "bitmask {bits:#b} has bits outside 0..{}",
                k.n()
            )));
        }
        let measure = (0..k.n())
            .filter(|&x| bits >> x & 1 == 1)
            .map(|x| k.pi()[x])
            .sum();
        Ok(VertexSet { bits, measure })
    }

    pub fn singleton(k: &MarkovKernel, x: usize) -> VertexSet {
        VertexSet::from_bits(k, 1 << x).expect("state index in range")
    }

    pub fn full(k: &MarkovKernel) -> VertexSet {
        let bits = if k.n() == 32 {
            u32::MAX
        } else {
            (1u32 << k.n()) - 1
        };
        VertexSet { bits, measure: 1.0 }
    }

    pub fn empty() -> VertexSet {
        VertexSet {
            bits: 0,
            measure: 0.0,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Cached `pi(A)`.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn is_proper(&self, k: &MarkovKernel) -> bool {
        !self.is_empty() && self.bits != VertexSet::full(k).bits
    }

    pub fn contains(&self, x: usize) -> bool {
        self.bits >> x & 1 == 1
    }

    pub fn complement(&self, k: &MarkovKernel) -> VertexSet {
        VertexSet::from_bits(k, VertexSet::full(k).bits & !self.bits).expect("bits in range")
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.bits;
        (0..32).filter(move |&x| bits >> x & 1 == 1)
    }

    /// Human-readable `{a, b, ...}` using the kernel's labels.
    pub fn describe(&self, k: &MarkovKernel) -> String {
        let names: Vec<String> = self.iter().map(|x| k.label(x)).collect();
        format!("{{{}}}", names.join(","))
    }
}

fn check_enumerable(k: &MarkovKernel) -> Result<()> {
    if k.n() > ENUMERATION_CAP {
        Err(Error::TooManyStates {
            n: k.n(),
            cap: ENUMERATION_CAP,
        })
    } else {
        Ok(())
    }
}

/// Every proper subset in ascending bitmask order; with `half_only`, only
/// those with `pi(A) <= 1/2` (ties included with slack).
pub fn enumerate_proper_subsets(
    k: &MarkovKernel,
    half_only: bool,
) -> Result<impl Iterator<Item = VertexSet> + '_> {
    check_enumerable(k)?;
    let full = VertexSet::full(k).bits;
    Ok((1..full).filter_map(move |bits| {
        let set = VertexSet::from_bits(k, bits).expect("bits below full mask");
        if !half_only || set.measure() <= 0.5 + HALF_TIE_TOL {
            Some(set)
        } else {
            None
        }
    }))
}

/// All subsets (including the empty set and `V`) whose measure is within
/// `tol` of `target`, ascending bitmask order.
pub fn subsets_with_measure(
    k: &MarkovKernel,
    target: f64,
    tol: f64,
) -> Result<impl Iterator<Item = VertexSet> + '_> {
    check_enumerable(k)?;
    let full = VertexSet::full(k).bits;
    Ok((0..=full).filter_map(move |bits| {
        let set = VertexSet::from_bits(k, bits).expect("bits below full mask");
        if (set.measure() - target).abs() <= tol {
            Some(set)
        } else {
            None
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{generate, ChainSpec};

    #[test]
    fn two_state_proper_subsets() {
        let k = generate(&ChainSpec::two_point()).unwrap();
        let sets: Vec<_> = enumerate_proper_subsets(&k, false).unwrap().collect();
        assert_eq!(sets.len(), 2);
        assert!(sets.iter().all(|s| s.len() == 1));
    }

    #[test]
    fn half_restriction_counts() {
        let k3 = generate(&ChainSpec::cycle(3)).unwrap();
        assert_eq!(enumerate_proper_subsets(&k3, true).unwrap().count(), 3);

        let k4 = generate(&ChainSpec::cycle(4)).unwrap();
        assert_eq!(enumerate_proper_subsets(&k4, true).unwrap().count(), 10);
    }

    #[test]
    fn enumeration_is_exhaustive() {
        for n in 3..=10 {
            let k = generate(&ChainSpec::cycle(n)).unwrap();
            let count = enumerate_proper_subsets(&k, false).unwrap().count();
            assert_eq!(count, (1usize << n) - 2);
            let half = enumerate_proper_subsets(&k, true).unwrap().count();
            let direct = (1..(1u32 << n) - 1)
                .filter(|&b| {
                    VertexSet::from_bits(&k, b).unwrap().measure() <= 0.5 + HALF_TIE_TOL
                })
                .count();
            assert_eq!(half, direct);
        }
    }

    #[test]
    fn measure_matching() {
        let k = generate(&ChainSpec::cycle(5)).unwrap();
        let triples: Vec<_> = subsets_with_measure(&k, 0.6, 1e-12).unwrap().collect();
        assert_eq!(triples.len(), 10);
        let all: Vec<_> = subsets_with_measure(&k, 1.0, 1e-12).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].bits(), VertexSet::full(&k).bits());
        // A target no subset achieves yields an empty stream.
        assert_eq!(subsets_with_measure(&k, 0.3, 1e-12).unwrap().count(), 0);
    }

    #[test]
    fn complement_measures_sum_to_one() {
        let k = generate(&ChainSpec::random_general(7, 2)).unwrap();
        for a in enumerate_proper_subsets(&k, false).unwrap() {
            let c = a.complement(&k);
            assert!((a.measure() + c.measure() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let k = generate(&ChainSpec::hypercube(5, 0.5)).unwrap();
        assert_eq!(k.n(), 32);
        assert!(matches!(
            enumerate_proper_subsets(&k, false).err(),
            Some(Error::TooManyStates { .. })
        ));
    }
}
