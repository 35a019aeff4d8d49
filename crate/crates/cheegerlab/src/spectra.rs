//! Exact eigenvalue computations: the ground truth every bound in this
//! crate is checked against.
//!
//! Reversible kernels go through the symmetric conjugation
//! `D^{1/2} P D^{-1/2}` so a backward-stable symmetric eigensolver can be
//! used; non-reversible kernels use a general complex eigensolver.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::kernel::{additive_symmetrization, MarkovKernel, INPUT_TOL};

/// Eigenvalues two solves agree to declare numerically equal.
pub const MULTIPLICITY_TOL: f64 = 1e-12;

/// Real spectrum of a reversible kernel, sorted descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// `1 = lambda_0 >= lambda_1 >= ... >= lambda_{n-1} >= -1`.
    pub eigenvalues: Vec<f64>,
    /// Spectral gap `1 - lambda_1`.
    pub gap: f64,
    /// `max{lambda_1, |lambda_{n-1}|}`.
    pub lambda_max: f64,
}

impl Spectrum {
    /// Multiplicity of `value` up to [`MULTIPLICITY_TOL`].
    pub fn multiplicity(&self, value: f64) -> usize {
        self.eigenvalues
            .iter()
            .filter(|&&e| (e - value).abs() <= MULTIPLICITY_TOL)
            .count()
    }
}

/// Eigenvalues of a reversible kernel via symmetric conjugation.
pub fn real_spectrum(k: &MarkovKernel) -> Result<Spectrum> {
    let residual = k.reversibility_residual();
    if residual > INPUT_TOL {
        return Err(Error::NotReversible { residual });
    }
    let n = k.n();
    let sym = DMatrix::from_fn(n, n, |x, y| {
        // D^{1/2} P D^{-1/2}; symmetrize explicitly to cancel rounding.
        let a = (k.pi()[x] / k.pi()[y]).sqrt() * k.p()[(x, y)];
        let b = (k.pi()[y] / k.pi()[x]).sqrt() * k.p()[(y, x)];
        (a + b) / 2.0
    });
    let mut eigenvalues: Vec<f64> = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).expect("real eigenvalues"));
    if (eigenvalues[0] - 1.0).abs() > INPUT_TOL {
        return Err(Error::EigensolveFailed(format!(
            "top eigenvalue {} is not 1",
            eigenvalues[0]
        )));
    }
    if eigenvalues[n - 1] < -1.0 - INPUT_TOL {
        return Err(Error::EigensolveFailed(format!(
            "bottom eigenvalue {} below -1",
            eigenvalues[n - 1]
        )));
    }
    let gap = 1.0 - eigenvalues[1];
    let lambda_max = eigenvalues[1].max(eigenvalues[n - 1].abs());
    Ok(Spectrum {
        eigenvalues,
        gap,
        lambda_max,
    })
}

/// Spectral gap `lambda = 1 - lambda_1((P+P*)/2)`; for reversible kernels
/// this equals `1 - lambda_1(P)`.
pub fn spectral_gap(k: &MarkovKernel) -> Result<f64> {
    let sym = additive_symmetrization(k);
    Ok(real_spectrum(&sym)?.gap)
}

/// `lambda_max = max{lambda_1, |lambda_{n-1}|}` of a reversible kernel.
pub fn lambda_max(k: &MarkovKernel) -> Result<f64> {
    Ok(real_spectrum(k)?.lambda_max)
}

/// Second largest eigenvalue magnitude over the complex spectrum of `P`.
/// Equals `lambda_max` for reversible kernels.
pub fn lambda_star(k: &MarkovKernel) -> Result<f64> {
    let eig = k.p().clone().complex_eigenvalues();
    let mut moduli: Vec<(f64, f64)> = eig.iter().map(|z| (z.norm(), (z - 1.0).norm())).collect();
    if moduli.iter().any(|&(m, _)| m > 1.0 + 1e-9) {
        return Err(Error::EigensolveFailed(
            "eigenvalue modulus above 1".into(),
        ));
    }
    // Drop the Perron eigenvalue: the one closest to 1.
    let perron = moduli
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).expect("finite"))
        .map(|(i, _)| i)
        .expect("n >= 2");
    if moduli[perron].1 > 1e-6 {
        return Err(Error::EigensolveFailed(format!(
            "no eigenvalue near 1 (closest residual {})",
            moduli[perron].1
        )));
    }
    moduli.swap_remove(perron);
    Ok(moduli
        .iter()
        .map(|&(m, _)| m)
        .fold(0.0, f64::max)
        .min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{generate, ChainSpec};
    use crate::kernel::{lazify, tv_distance};
    use std::f64::consts::PI;

    #[test]
    fn two_point_spectrum() {
        let k = generate(&ChainSpec::two_point()).unwrap();
        let s = real_spectrum(&k).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] + 1.0).abs() < 1e-12);
        assert!((s.gap - 2.0).abs() < 1e-12);
        assert!((s.lambda_max - 1.0).abs() < 1e-12);
        assert!((lambda_star(&k).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cycle_spectrum_is_circulant() {
        let k = generate(&ChainSpec::cycle(5)).unwrap();
        let s = real_spectrum(&k).unwrap();
        assert!((s.eigenvalues[1] - (2.0 * PI / 5.0).cos()).abs() < 1e-10);
        assert!((s.lambda_max - (PI / 5.0).cos()).abs() < 1e-10);
        assert!((spectral_gap(&k).unwrap() - (1.0 - (2.0 * PI / 5.0).cos())).abs() < 1e-10);
        let k4 = generate(&ChainSpec::cycle(4)).unwrap();
        assert!((spectral_gap(&k4).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lazy_cycle_three_spectrum() {
        let k = lazify(&generate(&ChainSpec::cycle(3)).unwrap());
        let s = real_spectrum(&k).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert_eq!(s.multiplicity(0.25), 2);
        assert!((lambda_max(&k).unwrap() - 0.25).abs() < 1e-10);
    }

    #[test]
    fn rotation_lambda_star_is_one() {
        let k = generate(&ChainSpec::rotation(3)).unwrap();
        assert!((lambda_star(&k).unwrap() - 1.0).abs() < 1e-9);
        assert!(real_spectrum(&k).is_err());
    }

    #[test]
    fn lambda_star_matches_lambda_max_when_reversible() {
        for seed in 0..20 {
            let k = generate(&ChainSpec::random_reversible(3 + (seed as usize % 5), seed)).unwrap();
            let lm = lambda_max(&k).unwrap();
            let ls = lambda_star(&k).unwrap();
            assert!((lm - ls).abs() < 1e-8, "seed {seed}: {lm} vs {ls}");
        }
    }

    #[test]
    fn gap_agrees_with_symmetrization_and_lazification() {
        for seed in 0..10 {
            let k = generate(&ChainSpec::random_reversible(5, seed)).unwrap();
            let s = real_spectrum(&k).unwrap();
            assert!((s.gap - spectral_gap(&k).unwrap()).abs() < 1e-9);
            assert!((1.0 - s.gap - s.eigenvalues[1]).abs() < 1e-9);
            let lazy = lazify(&k);
            assert!((s.gap - 2.0 * spectral_gap(&lazy).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn mixing_sandwich() {
        // 1/2 (1-l)^n <= 1/2 l_max^n <= max_x TV <= 1/2 l_max^n / min pi
        let chains = [
            ChainSpec::two_point(),
            ChainSpec::cycle(5),
            ChainSpec::lazy_cycle(6),
            ChainSpec::random_reversible(5, 42),
        ];
        for spec in chains {
            let k = generate(&spec).unwrap();
            let s = real_spectrum(&k).unwrap();
            let min_pi = k.pi().min();
            for n in 0..=30usize {
                let tv = (0..k.n())
                    .map(|x| tv_distance(&k, x, n))
                    .fold(0.0, f64::max);
                let envelope = 0.5 * s.lambda_max.powi(n as i32) / min_pi;
                let lower = 0.5 * s.lambda_max.powi(n as i32);
                let gap_lower = 0.5 * (1.0 - s.gap).powi(n as i32);
                assert!(gap_lower <= lower + 1e-9);
                assert!(lower <= tv + 1e-9, "{spec:?} n={n}: {lower} > {tv}");
                assert!(tv <= envelope + 1e-9, "{spec:?} n={n}: {tv} > {envelope}");
            }
        }
    }
}
