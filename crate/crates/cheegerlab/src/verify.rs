//! Reusable verification suites: every identity and inequality the crate
//! relies on, checked over seeded fixtures. The CLI `verify` command and
//! the acceptance tests both run these.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::full_report;
use crate::chains::{generate, ChainSpec};
use crate::congestion::{check_rearrangement, worst_profile, ShapeFunction, WorstProfile};
use crate::error::Result;
use crate::evolving::{
    crossing_point, ergodic_flow_identity, integrate_f, mp_mixing_bound_trajectory, profile, psi,
    psi_minflow, StepFn,
};
use crate::expansion::boundaries;
use crate::kernel::{ergodic_flow, lazify, min_transition_prob, tv_distance, MarkovKernel};
use crate::setops::enumerate_proper_subsets;

/// Identity tolerance used by the exact-arithmetic suites.
pub const SUITE_TOL: f64 = 1e-12;

/// Outcome of one suite: the number of individual checks performed and a
/// description of every failure.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> SuiteResult {
        SuiteResult {
            name,
            checks: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(detail());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Shared knobs for the suites.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Base seed for every randomized fixture.
    pub seed: u64,
    /// Number of random kernels (soundness) or random fixtures
    /// (rearrangement).
    pub count: usize,
    /// Largest random-kernel size.
    pub n_max: usize,
    /// Monte-Carlo sample count for the mixing suite.
    pub samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> VerifyConfig {
        VerifyConfig {
            seed: 0,
            count: 100,
            n_max: 8,
            samples: 20_000,
        }
    }
}

/// Names accepted by [`run_suite`], in run order.
pub const SUITE_NAMES: &[&str] = &[
    "martingale",
    "flow",
    "psi",
    "rearrangement",
    "appendix",
    "complement",
    "mixing",
    "soundness",
];

/// Small named kernels plus seeded random ones, capped at `n_max` states.
fn fixture_kernels(seed: u64, n_max: usize) -> Result<Vec<(String, MarkovKernel)>> {
    let mut specs = vec![
        ("two_point".to_string(), ChainSpec::two_point()),
        ("cycle(3)".to_string(), ChainSpec::cycle(3)),
        ("cycle(4)".to_string(), ChainSpec::cycle(4)),
        ("cycle(5)".to_string(), ChainSpec::cycle(5)),
        ("lazy_cycle(6)".to_string(), ChainSpec::lazy_cycle(6)),
        ("complete(5)".to_string(), ChainSpec::complete(5)),
        ("hypercube(3)".to_string(), ChainSpec::hypercube(3, 0.5)),
        ("rotation(5)".to_string(), ChainSpec::rotation(5)),
    ];
    for i in 0..6u64 {
        let n = 3 + (i as usize % (n_max.saturating_sub(2)).max(1));
        specs.push((
            format!("random_reversible({n}, {})", seed + i),
            ChainSpec::random_reversible(n, seed + i),
        ));
        specs.push((
            format!("random_general({n}, {})", seed + i),
            ChainSpec::random_general(n, seed + i),
        ));
    }
    specs
        .into_iter()
        .filter(|(_, s)| {
            let n = if matches!(s.family, crate::chains::Family::Hypercube) {
                1 << s.dimension
            } else {
                s.n
            };
            n <= n_max.max(8)
        })
        .map(|(name, s)| Ok((name, generate(&s)?)))
        .collect()
}

/// Lemma-style martingale identity: `∫_0^1 pi(A_u) du = pi(A)` for every
/// proper subset of every fixture kernel.
pub fn martingale_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut r = SuiteResult::new("martingale");
    for (name, k) in fixture_kernels(cfg.seed, cfg.n_max.max(10))? {
        for a in enumerate_proper_subsets(&k, false)? {
            let mean = integrate_f(&profile(&k, &a), |v| v);
            r.check((mean - a.measure()).abs() <= SUITE_TOL, || {
                format!("{name} A={:#b}: E pi(A_u) = {mean} != {}", a.bits(), a.measure())
            });
        }
    }
    Ok(r)
}

/// Lazy flow identity: both deviation areas of the profile equal
/// `Q(A,A^c)` on lazified kernels.
pub fn flow_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut r = SuiteResult::new("flow");
    for (name, k) in fixture_kernels(cfg.seed, cfg.n_max.max(10))? {
        let lazy = lazify(&k);
        for a in enumerate_proper_subsets(&lazy, false)? {
            let q = ergodic_flow(&lazy, &a, &a.complement(&lazy)).value();
            let (up, down) = ergodic_flow_identity(&lazy, &a)?;
            r.check(
                (up - q).abs() <= SUITE_TOL && (down - q).abs() <= SUITE_TOL,
                || format!("{name} A={:#b}: areas ({up}, {down}) != Q = {q}", a.bits()),
            );
        }
    }
    Ok(r)
}

/// `Psi(A)` from the profile equals the brute-force min-flow form.
pub fn psi_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut r = SuiteResult::new("psi");
    for i in 0..cfg.count as u64 {
        let n = 3 + (i as usize % cfg.n_max.min(8).saturating_sub(2).max(1));
        let spec = if i % 2 == 0 {
            ChainSpec::random_reversible(n, cfg.seed + i)
        } else {
            ChainSpec::random_general(n, cfg.seed + i)
        };
        let k = generate(&spec)?;
        for a in enumerate_proper_subsets(&k, false)? {
            let exact = psi(&k, &a).value();
            let brute = psi_minflow(&k, &a)?.value();
            r.check((exact - brute).abs() <= SUITE_TOL, || {
                format!("{spec:?} A={:#b}: Psi {exact} != minflow {brute}", a.bits())
            });
        }
    }
    Ok(r)
}

/// A random non-increasing step function with a handful of pieces.
fn random_step(rng: &mut impl Rng) -> StepFn {
    let pieces = rng.gen_range(2..6);
    let mut lens: Vec<f64> = (0..pieces).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = lens.iter().sum();
    for l in &mut lens {
        *l /= total;
    }
    let mut values: Vec<f64> = (0..pieces).map(|_| rng.gen_range(0.0..1.0)).collect();
    // Sorted ascending: pieces are listed from u = 1 down, so the value
    // must grow towards u = 0.
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let parts: Vec<(f64, f64)> = lens.into_iter().zip(values).collect();
    StepFn::from_lengths(&parts).expect("lengths normalized")
}

/// Mass-preserving flattening: replace a run of pieces by their average
/// value. Keeps monotonicity and total mass, and can only lower the
/// partial integrals from 0, so the preconditions of the rearrangement
/// comparison hold by construction.
fn flatten(g: &StepFn, lo: usize, hi: usize) -> StepFn {
    let pieces = g.pieces();
    let mut parts = Vec::new();
    let span: f64 = pieces[lo..=hi].iter().map(|p| p.len()).sum();
    let avg: f64 = pieces[lo..=hi].iter().map(|p| p.len() * p.value).sum::<f64>() / span;
    for (i, p) in pieces.iter().enumerate() {
        if i == lo {
            parts.push((span, avg));
        } else if i < lo || i > hi {
            parts.push((p.len(), p.value));
        }
    }
    StepFn::from_lengths(&parts).expect("flattening preserves total length")
}

/// Randomized rearrangement fixtures plus every worst-case profile
/// compared against the true evolving-set profile it must dominate.
pub fn rearrangement_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut r = SuiteResult::new("rearrangement");
    let shapes = [
        ShapeFunction::sqrt_a(),
        ShapeFunction::sqrt_a_one_minus_a(),
        ShapeFunction::sin_pi_a(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..cfg.count {
        let g = random_step(&mut rng);
        let np = g.pieces().len();
        let lo = rng.gen_range(0..np);
        let hi = rng.gen_range(lo..np);
        let g_hat = flatten(&g, lo, hi);
        let f = &shapes[i % shapes.len()];
        match check_rearrangement(f, &g, &g_hat) {
            Ok(v) => r.check(v.holds, || {
                format!("fixture {i}: ∫f∘g = {} > ∫f∘ĝ = {}", v.lhs, v.rhs)
            }),
            Err(e) => r.check(false, || format!("fixture {i}: bad fixture: {e}")),
        }
    }

    // True profiles against their extremal counterparts.
    let f = ShapeFunction::sqrt_a_one_minus_a();
    for (name, k) in fixture_kernels(cfg.seed, cfg.n_max.max(8))? {
        let lazy = lazify(&k);
        let p0 = min_transition_prob(&lazy, false)?;
        for a in enumerate_proper_subsets(&lazy, true)? {
            let p = profile(&lazy, &a);
            let q = ergodic_flow(&lazy, &a, &a.complement(&lazy)).value();
            let (inner, outer) = boundaries(&lazy, &a);
            let cases = [
                worst_profile(WorstProfile::LazyEdge {
                    base: a.measure(),
                    flow: q,
                }),
                worst_profile(WorstProfile::LazyInBoundary {
                    base: a.measure(),
                    boundary: inner.measure(),
                    p0,
                }),
                worst_profile(WorstProfile::LazyOutBoundary {
                    base: a.measure(),
                    boundary: outer.measure(),
                    p0,
                }),
            ];
            for (kind, m) in ["edge", "in", "out"].iter().zip(cases) {
                let m = match m {
                    Ok(m) => m,
                    Err(e) => {
                        r.check(false, || format!("{name} {kind} A={:#b}: {e}", a.bits()));
                        continue;
                    }
                };
                match check_rearrangement(&f, p.steps(), &m) {
                    Ok(v) => r.check(v.holds, || {
                        format!("{name} {kind} A={:#b}: {} > {}", a.bits(), v.lhs, v.rhs)
                    }),
                    Err(e) => r.check(false, || {
                        format!("{name} {kind} A={:#b}: dominance: {e}", a.bits())
                    }),
                }
            }
        }
        // Non-lazy two-step shape against the raw kernel's profile.
        for a in enumerate_proper_subsets(&k, true)? {
            let p = profile(&k, &a);
            let m = worst_profile(WorstProfile::NonlazyTwoStep {
                base: a.measure(),
                psi: psi(&k, &a).value(),
                crossing: crossing_point(&p),
            });
            let m = match m {
                Ok(m) => m,
                Err(e) => {
                    r.check(false, || format!("{name} twostep A={:#b}: {e}", a.bits()));
                    continue;
                }
            };
            match check_rearrangement(&f, p.steps(), &m) {
                Ok(v) => r.check(v.holds, || {
                    format!("{name} twostep A={:#b}: {} > {}", a.bits(), v.lhs, v.rhs)
                }),
                Err(e) => r.check(false, || {
                    format!("{name} twostep A={:#b}: dominance: {e}", a.bits())
                }),
            }
        }
    }
    Ok(r)
}

/// Grid check of the two-variable inequality
/// `sqrt(XY) + sqrt((1-X)(1-Y)) <= sqrt(1 - (X-Y)^2)` on `[0,1]^2`.
pub fn appendix_suite(_cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut r = SuiteResult::new("appendix");
    let steps = 200usize;
    for i in 0..=steps {
        for j in 0..=steps {
            let x = i as f64 / steps as f64;
            let y = j as f64 / steps as f64;
            let lhs = (x * y).sqrt() + ((1.0 - x) * (1.0 - y)).sqrt();
            let rhs = (1.0 - (x - y) * (x - y)).max(0.0).sqrt();
            r.check(rhs - lhs >= -SUITE_TOL, || {
                format!("X={x} Y={y}: {lhs} > {rhs}")
            });
        }
    }
    Ok(r)
}

/// Complement symmetry of profile integrals for symmetric shapes:
/// `∫ f(pi((A^c)_u)) du = ∫ f(pi(A_u)) du`.
pub fn complement_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut r = SuiteResult::new("complement");
    let shapes = [ShapeFunction::sqrt_a_one_minus_a(), ShapeFunction::sin_pi_a()];
    for (name, k) in fixture_kernels(cfg.seed, cfg.n_max.max(8))? {
        for a in enumerate_proper_subsets(&k, false)? {
            let pa = profile(&k, &a);
            let pc = profile(&k, &a.complement(&k));
            for f in &shapes {
                let ia = integrate_f(&pa, |v| f.eval(v));
                let ic = integrate_f(&pc, |v| f.eval(v));
                r.check((ia - ic).abs() <= SUITE_TOL, || {
                    format!("{name} {} A={:#b}: {ia} != {ic}", f.name(), a.bits())
                });
            }
        }
    }
    Ok(r)
}

/// Monte-Carlo evolving-set bound dominates the exact total variation
/// distance within three standard errors on lazy fixtures.
pub fn mixing_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut r = SuiteResult::new("mixing");
    let fixtures = [
        ("lazy_cycle(6)", generate(&ChainSpec::lazy_cycle(6))?),
        ("hypercube(3)", generate(&ChainSpec::hypercube(3, 0.5))?),
    ];
    for (name, k) in fixtures {
        let ests = mp_mixing_bound_trajectory(&k, 0, 8, cfg.samples.max(1), cfg.seed);
        for (n, est) in ests.iter().enumerate() {
            let tv = tv_distance(&k, 0, n);
            r.check(est.mean + 3.0 * est.stderr >= tv - SUITE_TOL, || {
                format!(
                    "{name} n={n}: bound {} + 3*{} below TV {tv}",
                    est.mean, est.stderr
                )
            });
        }
    }
    Ok(r)
}

/// Every implemented bound holds on seeded random kernels.
pub fn soundness_suite(cfg: &VerifyConfig) -> Result<SuiteResult> {
    let mut r = SuiteResult::new("soundness");
    for i in 0..cfg.count as u64 {
        let n = 3 + (i as usize % cfg.n_max.min(8).saturating_sub(2).max(1));
        let spec = if i % 2 == 0 {
            ChainSpec::random_reversible(n, cfg.seed + i)
        } else {
            ChainSpec::random_general(n, cfg.seed + i)
        };
        let k = generate(&spec)?;
        let report = full_report(&k)?;
        r.check(report.errors.is_empty(), || {
            format!("{spec:?}: evaluation errors {:?}", report.errors)
        });
        for e in &report.entries {
            r.check(e.valid, || {
                format!(
                    "{spec:?}: {} = {} violates {} = {}",
                    e.name,
                    e.value,
                    e.target.label(),
                    e.exact
                )
            });
        }
    }
    Ok(r)
}

/// Run one suite by name.
pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<SuiteResult> {
    match name {
        "martingale" => martingale_suite(cfg),
        "flow" => flow_suite(cfg),
        "psi" => psi_suite(cfg),
        "rearrangement" => rearrangement_suite(cfg),
        "appendix" => appendix_suite(cfg),
        "complement" => complement_suite(cfg),
        "mixing" => mixing_suite(cfg),
        "soundness" => soundness_suite(cfg),
        other => Err(crate::error::Error::InvalidSpec(format!(
            "unknown suite {other:?}; available: {}",
            SUITE_NAMES.join(", ")
        ))),
    }
}

/// Run every suite in order.
pub fn run_all(cfg: &VerifyConfig) -> Result<Vec<SuiteResult>> {
    SUITE_NAMES.iter().map(|n| run_suite(n, cfg)).collect()
}
