//! Shape functions, the f-congestion, the rearrangement lemma for
//! non-increasing step functions, and the extremal profiles it is applied
//! to.

use crate::error::{Error, Result};
use crate::evolving::{integrate_f, profile, StepFn};
use crate::kernel::MarkovKernel;
use crate::setops::{enumerate_proper_subsets, VertexSet};

/// Grid resolution for tabulated custom shape functions.
const CUSTOM_GRID: usize = 10_000;

#[derive(Debug, Clone)]
enum Family {
    SqrtA,
    SqrtAOneMinusA,
    SinPiA,
    Custom(Vec<f64>),
}

/// A function `f : [0,1] -> R+` with the metadata the theorems gate on:
/// whether `f(a) <= f(1-a)` below 1/2, whether `f` is concave, and whether
/// `f''` is concave.
#[derive(Debug, Clone)]
pub struct ShapeFunction {
    name: String,
    family: Family,
    symmetric: bool,
    concave: bool,
    second_derivative_concave: bool,
}

impl ShapeFunction {
    /// `f(a) = sqrt(a)`.
    pub fn sqrt_a() -> ShapeFunction {
        ShapeFunction {
            name: "sqrt(a)".into(),
            family: Family::SqrtA,
            symmetric: true,
            concave: true,
            second_derivative_concave: true,
        }
    }

    /// `f(a) = sqrt(a(1-a))`.
    pub fn sqrt_a_one_minus_a() -> ShapeFunction {
        ShapeFunction {
            name: "sqrt(a(1-a))".into(),
            family: Family::SqrtAOneMinusA,
            symmetric: true,
            concave: true,
            second_derivative_concave: true,
        }
    }

    /// `f(a) = sin(pi a)`. Concave, but `f''` is not, so it is rejected by
    /// the closed-form route that differentiates twice.
    pub fn sin_pi_a() -> ShapeFunction {
        ShapeFunction {
            name: "sin(pi a)".into(),
            family: Family::SinPiA,
            symmetric: true,
            concave: true,
            second_derivative_concave: false,
        }
    }

    /// Tabulate an arbitrary shape function on a uniform grid; evaluation
    /// interpolates linearly. Flags are caller-asserted.
    pub fn custom(
        name: &str,
        f: impl Fn(f64) -> f64,
        symmetric: bool,
        concave: bool,
    ) -> ShapeFunction {
        let table = (0..=CUSTOM_GRID)
            .map(|i| f(i as f64 / CUSTOM_GRID as f64))
            .collect();
        ShapeFunction {
            name: name.into(),
            family: Family::Custom(table),
            symmetric,
            concave,
            second_derivative_concave: false,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn concave(&self) -> bool {
        self.concave
    }

    pub fn second_derivative_concave(&self) -> bool {
        self.second_derivative_concave
    }

    pub fn eval(&self, a: f64) -> f64 {
        let a = a.clamp(0.0, 1.0);
        match &self.family {
            Family::SqrtA => a.sqrt(),
            Family::SqrtAOneMinusA => (a * (1.0 - a)).max(0.0).sqrt(),
            Family::SinPiA => (std::f64::consts::PI * a).sin().max(0.0),
            Family::Custom(table) => {
                let pos = a * CUSTOM_GRID as f64;
                let i = (pos.floor() as usize).min(CUSTOM_GRID - 1);
                let frac = pos - i as f64;
                table[i] * (1.0 - frac) + table[i + 1] * frac
            }
        }
    }

    /// Closed-form `f''(a)`, available for the built-in families only.
    pub fn second_derivative(&self, a: f64) -> Option<f64> {
        match self.family {
            Family::SqrtA => Some(-0.25 * a.powf(-1.5)),
            Family::SqrtAOneMinusA => Some(-0.25 * (a * (1.0 - a)).powf(-1.5)),
            Family::SinPiA => {
                let pi = std::f64::consts::PI;
                Some(-pi * pi * (pi * a).sin())
            }
            Family::Custom(_) => None,
        }
    }
}

/// Result of a global f-congestion sweep.
#[derive(Debug, Clone)]
pub struct CongestionResult {
    /// `C_f = max_A C_f(A)`.
    pub value: f64,
    /// The maximizing set (first attained in ascending bitmask order).
    pub witness: VertexSet,
    /// Whether the sweep was restricted to `pi(A) <= 1/2`.
    pub restricted: bool,
    /// Sets skipped because `f(pi(A)) = 0`.
    pub skipped: usize,
}

/// `C_f(A) = ∫_0^1 f(pi(A_u)) du / f(pi(A))`.
pub fn f_congestion_set(k: &MarkovKernel, a: &VertexSet, f: &ShapeFunction) -> Result<f64> {
    let denom = f.eval(a.measure());
    if denom <= 0.0 {
        return Err(Error::ZeroDenominator {
            measure: a.measure(),
        });
    }
    Ok(integrate_f(&profile(k, a), |v| f.eval(v)) / denom)
}

/// Global f-congestion. When `f(a) <= f(1-a)` on `(0, 1/2)` the sweep is
/// restricted to `pi(A) <= 1/2`.
pub fn f_congestion(k: &MarkovKernel, f: &ShapeFunction) -> Result<CongestionResult> {
    let restricted = f.symmetric();
    let mut best: Option<(f64, VertexSet)> = None;
    let mut skipped = 0;
    for a in enumerate_proper_subsets(k, restricted)? {
        match f_congestion_set(k, &a, f) {
            Ok(c) => {
                if best.as_ref().is_none_or(|&(b, _)| c > b) {
                    best = Some((c, a));
                }
            }
            Err(Error::ZeroDenominator { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let (value, witness) = best.ok_or(Error::ZeroDenominator { measure: f64::NAN })?;
    Ok(CongestionResult {
        value,
        witness,
        restricted,
        skipped,
    })
}

/// `1 - C_f`, a lower bound on `1 - lambda_max` (reversible) or
/// `1 - lambda_*` (general). Returns the gap bound and the sweep result.
pub fn generalized_cheeger(k: &MarkovKernel, f: &ShapeFunction) -> Result<(f64, CongestionResult)> {
    let result = f_congestion(k, f)?;
    Ok((1.0 - result.value, result))
}

/// Outcome of a rearrangement comparison: both composed integrals.
#[derive(Debug, Clone, Copy)]
pub struct RearrangementVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Rearrangement comparison for non-increasing step functions: given
/// concave `f` and step functions `g`, `g_hat` with equal mass and
/// `∫_0^t g >= ∫_0^t g_hat` for every `t`, checks
/// `∫ f∘g <= ∫ f∘g_hat + 1e-12`.
///
/// A failed mass/dominance precondition signals a bad fixture, not a
/// failure of the inequality, and is reported as such.
pub fn check_rearrangement(
    f: &ShapeFunction,
    g: &StepFn,
    g_hat: &StepFn,
) -> Result<RearrangementVerdict> {
    if !g.is_non_increasing() || !g_hat.is_non_increasing() {
        return Err(Error::PreconditionViolated(
            "step functions must be non-increasing".into(),
        ));
    }
    if (g.mass() - g_hat.mass()).abs() > 1e-12 {
        return Err(Error::PreconditionViolated(format!(
            "masses differ: {} vs {}",
            g.mass(),
            g_hat.mass()
        )));
    }
    let mut cuts = g.breakpoints();
    cuts.extend(g_hat.breakpoints());
    for t in cuts {
        if g.partial_mass(t) < g_hat.partial_mass(t) - 1e-12 {
            return Err(Error::PreconditionViolated(format!(
                "dominance fails at t = {t}"
            )));
        }
    }
    let lhs = g.integrate_composed(|v| f.eval(v));
    let rhs = g_hat.integrate_composed(|v| f.eval(v));
    Ok(RearrangementVerdict {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// Extremal step-function shapes dominated by every true profile with the
/// same summary statistics.
#[derive(Debug, Clone, Copy)]
pub enum WorstProfile {
    /// Lazy chain, edge quantity: `pi(A) + 2Q` on `(0,1/2]`,
    /// `pi(A) - 2Q` on `(1/2,1]`.
    LazyEdge { base: f64, flow: f64 },
    /// General chain, two-step shape around a crossing point:
    /// `pi(A) + Psi/p` on `(0,p]`, `pi(A) - Psi/(1-p)` on `(p,1]`.
    NonlazyTwoStep { base: f64, psi: f64, crossing: f64 },
    /// Lazy chain, internal boundary: `pi(A) + 2 P0 b` on `(0,1/2]`,
    /// `pi(A)` on `(1/2, 1-P0]`, `pi(A) - b` on `(1-P0, 1]`.
    LazyInBoundary { base: f64, boundary: f64, p0: f64 },
    /// Lazy chain, external boundary (mirror image under the reversal):
    /// `pi(A) + b` on `(0,P0]`, `pi(A)` on `(P0, 1/2]`,
    /// `pi(A) - 2 P0 b` on `(1/2, 1]`.
    LazyOutBoundary { base: f64, boundary: f64, p0: f64 },
}

/// Build the extremal step function. Every variant integrates to the base
/// measure exactly.
pub fn worst_profile(kind: WorstProfile) -> Result<StepFn> {
    // Tolerate rounding dust at the endpoints, reject real violations.
    let check_unit = |v: f64, what: &str| -> Result<f64> {
        if (-1e-12..=1.0 + 1e-12).contains(&v) {
            Ok(v.clamp(0.0, 1.0))
        } else {
            Err(Error::InconsistentParams(format!("{what} = {v} outside [0,1]")))
        }
    };
    match kind {
        WorstProfile::LazyEdge { base, flow } => {
            let hi = check_unit(base + 2.0 * flow, "pi(A) + 2Q")?;
            let lo = check_unit(base - 2.0 * flow, "pi(A) - 2Q")?;
            StepFn::from_lengths(&[(0.5, lo), (0.5, hi)])
        }
        WorstProfile::NonlazyTwoStep {
            base,
            psi,
            crossing,
        } => {
            if psi < -1e-12 {
                return Err(Error::InconsistentParams(format!("Psi = {psi} negative")));
            }
            if psi <= 1e-15 {
                return StepFn::from_lengths(&[(1.0, base)]);
            }
            let crossing = check_unit(crossing, "crossing point")?;
            if crossing <= 0.0 || crossing >= 1.0 {
                return Err(Error::InconsistentParams(format!(
                    "crossing point {crossing} must be interior when Psi > 0"
                )));
            }
            let hi = check_unit(base + psi / crossing, "pi(A) + Psi/p")?;
            let lo = check_unit(base - psi / (1.0 - crossing), "pi(A) - Psi/(1-p)")?;
            StepFn::from_lengths(&[(1.0 - crossing, lo), (crossing, hi)])
        }
        WorstProfile::LazyInBoundary { base, boundary, p0 } => {
            if !(0.0..=0.5).contains(&p0) {
                return Err(Error::InconsistentParams(format!(
                    "P0 = {p0} outside [0, 1/2] for a lazy chain"
                )));
            }
            let hi = check_unit(base + 2.0 * p0 * boundary, "pi(A) + 2 P0 b")?;
            let lo = check_unit(base - boundary, "pi(A) - b")?;
            StepFn::from_lengths(&[(p0, lo), (0.5 - p0, base), (0.5, hi)])
        }
        WorstProfile::LazyOutBoundary { base, boundary, p0 } => {
            if !(0.0..=0.5).contains(&p0) {
                return Err(Error::InconsistentParams(format!(
                    "P0 = {p0} outside [0, 1/2] for a lazy chain"
                )));
            }
            let hi = check_unit(base + boundary, "pi(A) + b")?;
            let lo = check_unit(base - 2.0 * p0 * boundary, "pi(A) - 2 P0 b")?;
            StepFn::from_lengths(&[(0.5, lo), (0.5 - p0, base), (p0, hi)])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{generate, ChainSpec};
    use crate::kernel::lazify;

    fn set(k: &MarkovKernel, bits: u32) -> VertexSet {
        VertexSet::from_bits(k, bits).unwrap()
    }

    #[test]
    fn congestion_of_cycle_three_singleton() {
        let k = generate(&ChainSpec::cycle(3)).unwrap();
        let f = ShapeFunction::sqrt_a_one_minus_a();
        let c = f_congestion_set(&k, &set(&k, 0b001), &f).unwrap();
        assert!((c - 0.5).abs() < 1e-12);
        let c2 = f_congestion_set(&k, &set(&k, 0b011), &f).unwrap();
        assert!((c2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn congestion_of_two_point_is_one() {
        let k = generate(&ChainSpec::two_point()).unwrap();
        let f = ShapeFunction::sqrt_a_one_minus_a();
        let c = f_congestion_set(&k, &set(&k, 0b01), &f).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn global_congestion_cycle_three() {
        let k = generate(&ChainSpec::cycle(3)).unwrap();
        let f = ShapeFunction::sqrt_a_one_minus_a();
        let r = f_congestion(&k, &f).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        assert_eq!(r.witness.bits(), 0b001);
        assert!(r.restricted);
    }

    #[test]
    fn constant_shape_gives_congestion_one() {
        let k = generate(&ChainSpec::random_general(5, 1)).unwrap();
        let f = ShapeFunction::custom("1", |_| 1.0, true, true);
        let r = f_congestion(&k, &f).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_denominator_reported() {
        let k = generate(&ChainSpec::two_point()).unwrap();
        let f = ShapeFunction::sin_pi_a();
        // sin(pi a) vanishes only at 0 and 1, so proper sets are fine...
        assert!(f_congestion_set(&k, &set(&k, 0b01), &f).is_ok());
        // ...but a custom f that vanishes at 1/2 is skipped.
        let zero_at_half = ShapeFunction::custom("dip", |a| (a - 0.5).abs(), false, false);
        assert!(matches!(
            f_congestion_set(&k, &set(&k, 0b01), &zero_at_half),
            Err(Error::ZeroDenominator { .. })
        ));
    }

    #[test]
    fn second_derivatives_match_finite_differences() {
        let h = 1e-6;
        for f in [
            ShapeFunction::sqrt_a(),
            ShapeFunction::sqrt_a_one_minus_a(),
            ShapeFunction::sin_pi_a(),
        ] {
            for &a in &[0.2, 0.35, 0.5, 0.71] {
                let closed = f.second_derivative(a).unwrap();
                let fd = (f.eval(a + h) - 2.0 * f.eval(a) + f.eval(a - h)) / (h * h);
                assert!(
                    (closed - fd).abs() < 1e-3 * (1.0 + closed.abs()),
                    "{} at {a}: {closed} vs {fd}",
                    f.name()
                );
            }
        }
    }

    #[test]
    fn rearrangement_equality_case() {
        let g = StepFn::from_lengths(&[(0.5, 0.2), (0.5, 0.8)]).unwrap();
        let f = ShapeFunction::sqrt_a_one_minus_a();
        let v = check_rearrangement(&f, &g, &g).unwrap();
        assert!(v.holds && (v.lhs - v.rhs).abs() < 1e-15);
    }

    #[test]
    fn rearrangement_against_worst_case() {
        let k = lazify(&generate(&ChainSpec::cycle(3)).unwrap());
        let a = set(&k, 0b001);
        let p = crate::evolving::profile(&k, &a);
        let q = crate::kernel::ergodic_flow(&k, &a, &a.complement(&k)).value();
        let m = worst_profile(WorstProfile::LazyEdge {
            base: a.measure(),
            flow: q,
        })
        .unwrap();
        let f = ShapeFunction::sqrt_a_one_minus_a();
        let v = check_rearrangement(&f, p.steps(), &m).unwrap();
        assert!(v.holds);
    }

    #[test]
    fn rearrangement_rejects_bad_fixture() {
        let g = StepFn::from_lengths(&[(0.5, 0.2), (0.5, 0.8)]).unwrap();
        let other = StepFn::from_lengths(&[(0.5, 0.1), (0.5, 0.8)]).unwrap();
        let f = ShapeFunction::sqrt_a();
        assert!(matches!(
            check_rearrangement(&f, &g, &other),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn worst_profile_shapes() {
        let flat = worst_profile(WorstProfile::LazyEdge {
            base: 0.25,
            flow: 0.0,
        })
        .unwrap();
        assert!((flat.value_at(0.3) - 0.25).abs() < 1e-15);

        let m = worst_profile(WorstProfile::LazyEdge {
            base: 1.0 / 3.0,
            flow: 1.0 / 6.0,
        })
        .unwrap();
        assert!((m.value_at(0.3) - 2.0 / 3.0).abs() < 1e-12);
        assert!(m.value_at(0.7).abs() < 1e-12);
        assert!((m.mass() - 1.0 / 3.0).abs() < 1e-12);

        let two_step = worst_profile(WorstProfile::NonlazyTwoStep {
            base: 1.0 / 3.0,
            psi: 1.0 / 6.0,
            crossing: 0.5,
        })
        .unwrap();
        assert_eq!(two_step.pieces(), m.pieces());

        for kind in [
            WorstProfile::LazyInBoundary {
                base: 0.4,
                boundary: 0.2,
                p0: 0.25,
            },
            WorstProfile::LazyOutBoundary {
                base: 0.4,
                boundary: 0.2,
                p0: 0.25,
            },
        ] {
            let m = worst_profile(kind).unwrap();
            assert!((m.mass() - 0.4).abs() < 1e-12);
            assert!(m.is_non_increasing());
        }
    }

    #[test]
    fn worst_profile_rejects_inconsistent_params() {
        assert!(worst_profile(WorstProfile::LazyEdge {
            base: 0.1,
            flow: 0.6,
        })
        .is_err());
        assert!(worst_profile(WorstProfile::LazyInBoundary {
            base: 0.4,
            boundary: 0.2,
            p0: 0.8,
        })
        .is_err());
    }
}
