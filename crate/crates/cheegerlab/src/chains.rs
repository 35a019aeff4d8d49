//! Built-in kernel generators: the classic small examples plus seeded random
//! fixtures for the property suites.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{make_kernel, MarkovKernel};

/// Which chain to build.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    TwoPoint,
    Cycle,
    LazyCycle,
    Complete,
    Hypercube,
    Rotation,
    RandomReversible,
    RandomGeneral,
}

/// A chain family with its parameters. Random families are deterministic
/// in the seed.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    pub family: Family,
    /// State count (cycle, complete, rotation, random) — ignored for
    /// hypercube, which uses `dimension`.
    pub n: usize,
    pub dimension: usize,
    pub seed: u64,
    /// Holding probability blended in on top of the base chain.
    pub laziness: f64,
}

impl ChainSpec {
    fn base(family: Family) -> ChainSpec {
        ChainSpec {
            family,
            n: 2,
            dimension: 1,
            seed: 0,
            laziness: 0.0,
        }
    }

    pub fn two_point() -> ChainSpec {
        ChainSpec::base(Family::TwoPoint)
    }

    pub fn cycle(n: usize) -> ChainSpec {
        ChainSpec {
            n,
            ..ChainSpec::base(Family::Cycle)
        }
    }

    pub fn lazy_cycle(n: usize) -> ChainSpec {
        ChainSpec {
            n,
            ..ChainSpec::base(Family::LazyCycle)
        }
    }

    pub fn complete(n: usize) -> ChainSpec {
        ChainSpec {
            n,
            ..ChainSpec::base(Family::Complete)
        }
    }

    /// Lazy hypercube walk on `2^d` states with the given holding
    /// probability (1/2 is the usual convention).
    pub fn hypercube(d: usize, laziness: f64) -> ChainSpec {
        ChainSpec {
            dimension: d,
            laziness,
            ..ChainSpec::base(Family::Hypercube)
        }
    }

    pub fn rotation(n: usize) -> ChainSpec {
        ChainSpec {
            n,
            ..ChainSpec::base(Family::Rotation)
        }
    }

    pub fn random_reversible(n: usize, seed: u64) -> ChainSpec {
        ChainSpec {
            n,
            seed,
            ..ChainSpec::base(Family::RandomReversible)
        }
    }

    pub fn random_general(n: usize, seed: u64) -> ChainSpec {
        ChainSpec {
            n,
            seed,
            ..ChainSpec::base(Family::RandomGeneral)
        }
    }

    pub fn with_laziness(mut self, laziness: f64) -> ChainSpec {
        self.laziness = laziness;
        self
    }
}

/// Build the requested kernel.
pub fn generate(spec: &ChainSpec) -> Result<MarkovKernel> {
    if !(0.0..1.0).contains(&spec.laziness) {
        return Err(Error::InvalidSpec(format!(
            "laziness {} outside [0, 1)",
            spec.laziness
        )));
    }
    let p = match spec.family {
        Family::TwoPoint => DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        Family::Cycle => cycle_matrix(spec.n)?,
        Family::LazyCycle => {
            let base = cycle_matrix(spec.n)?;
            blend_lazy(base, 0.5)
        }
        Family::Complete => {
            let n = spec.n;
            if n < 2 {
                return Err(Error::InvalidSpec("complete graph needs n >= 2".into()));
            }
            DMatrix::from_fn(n, n, |x, y| {
                if x == y {
                    0.0
                } else {
                    1.0 / (n - 1) as f64
                }
            })
        }
        Family::Hypercube => {
            let d = spec.dimension;
            if !(1..=5).contains(&d) {
                return Err(Error::InvalidSpec(format!(
                    "hypercube dimension {d} outside 1..=5"
                )));
            }
            let n = 1usize << d;
            // Non-lazy nearest-neighbor walk; laziness is blended below
            // (hypercubes default to 1/2 at the CLI).
            DMatrix::from_fn(n, n, |x, y| {
                if (x ^ y).count_ones() == 1 {
                    1.0 / d as f64
                } else {
                    0.0
                }
            })
        }
        Family::Rotation => {
            let n = spec.n;
            if n < 2 {
                return Err(Error::InvalidSpec("rotation needs n >= 2".into()));
            }
            DMatrix::from_fn(n, n, |x, y| if (x + 1) % n == y { 1.0 } else { 0.0 })
        }
        Family::RandomReversible => {
            let n = spec.n;
            if n < 2 {
                return Err(Error::InvalidSpec("need n >= 2".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            // Symmetric positive weights give exact reversibility by
            // construction: pi(x) P(x,y) = w(x,y) / total.
            let mut w = DMatrix::<f64>::zeros(n, n);
            for x in 0..n {
                for y in x..n {
                    let v = rng.gen_range(0.05..1.0);
                    w[(x, y)] = v;
                    w[(y, x)] = v;
                }
            }
            let mut p = DMatrix::<f64>::zeros(n, n);
            for x in 0..n {
                let row_sum: f64 = (0..n).map(|y| w[(x, y)]).sum();
                for y in 0..n {
                    p[(x, y)] = w[(x, y)] / row_sum;
                }
            }
            p
        }
        Family::RandomGeneral => {
            let n = spec.n;
            if n < 2 {
                return Err(Error::InvalidSpec("need n >= 2".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut p = DMatrix::<f64>::zeros(n, n);
            for x in 0..n {
                let row: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
                let row_sum: f64 = row.iter().sum();
                for y in 0..n {
                    p[(x, y)] = row[y] / row_sum;
                }
            }
            p
        }
    };
    let p = if spec.laziness > 0.0 && !matches!(spec.family, Family::LazyCycle) {
        blend_lazy(p, spec.laziness)
    } else {
        p
    };
    make_kernel(p, None)
}

fn cycle_matrix(n: usize) -> Result<DMatrix<f64>> {
    if n < 3 {
        return Err(Error::InvalidSpec(format!(
            "cycle needs n >= 3 (n = 2 is the two-point chain), got {n}"
        )));
    }
    Ok(DMatrix::from_fn(n, n, |x, y| {
        if (x + 1) % n == y || (y + 1) % n == x {
            0.5
        } else {
            0.0
        }
    }))
}

fn blend_lazy(p: DMatrix<f64>, laziness: f64) -> DMatrix<f64> {
    let n = p.nrows();
    DMatrix::<f64>::identity(n, n) * laziness + p * (1.0 - laziness)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_matrix() {
        let k = generate(&ChainSpec::two_point()).unwrap();
        assert_eq!(k.p()[(0, 1)], 1.0);
        assert_eq!(k.p()[(1, 0)], 1.0);
    }

    #[test]
    fn cycle_five() {
        let k = generate(&ChainSpec::cycle(5)).unwrap();
        for i in 0..5 {
            assert_eq!(k.p()[(i, (i + 1) % 5)], 0.5);
            assert_eq!(k.p()[(i, (i + 4) % 5)], 0.5);
        }
    }

    #[test]
    fn rotation_is_permutation() {
        let k = generate(&ChainSpec::rotation(3)).unwrap();
        assert!(!k.is_reversible());
        for i in 0..3 {
            assert_eq!(k.p()[(i, (i + 1) % 3)], 1.0);
        }
    }

    #[test]
    fn random_reversible_is_reversible() {
        for seed in 0..30 {
            let k = generate(&ChainSpec::random_reversible(3 + (seed as usize % 6), seed)).unwrap();
            assert!(k.reversibility_residual() < 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate(&ChainSpec::random_general(6, 7)).unwrap();
        let b = generate(&ChainSpec::random_general(6, 7)).unwrap();
        assert_eq!(a.p(), b.p());
    }

    #[test]
    fn hypercube_is_lazy_with_blend() {
        let k = generate(&ChainSpec::hypercube(3, 0.5)).unwrap();
        assert_eq!(k.n(), 8);
        assert!(k.is_lazy());
        assert!(k.is_reversible());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate(&ChainSpec::cycle(2)).is_err());
        assert!(generate(&ChainSpec::cycle(4).with_laziness(1.0)).is_err());
    }
}
