//! Every spectral lower bound implemented by the crate, evaluated from
//! the expansion and congestion quantities and checked against the exact
//! spectrum.
//!
//! All bounds report the strongest displayed closed form as `value` and
//! record the weaker simplified forms alongside, so reports show the
//! chains of inequalities end to end. Non-reversible kernels route edge
//! bounds through the additive symmetrization (which preserves the gap)
//! and vertex bounds through the symmetrization with the halved minimum
//! transition probability; each entry labels the route taken.

use crate::congestion::{f_congestion_set, generalized_cheeger, ShapeFunction};
use crate::error::{Error, Result};
use crate::expansion::{
    boundaries, conductance, conductance_global, hbar_out, modified_cheeger, sym_conductance,
    sym_conductance_global, vertex_expansion_set, vertex_expansions,
};
use crate::kernel::{
    additive_symmetrization, ergodic_flow, lazify, min_transition_prob, MarkovKernel,
};
use crate::setops::{enumerate_proper_subsets, VertexSet};
use crate::spectra::{lambda_max, lambda_star, spectral_gap};

/// Slack allowed when checking a bound against its exact target.
pub const BOUND_SLACK: f64 = 1e-9;

/// Radicands this far below zero are treated as floating-point dust and
/// clamped; anything lower is an error. Sharp cases sit exactly on the
/// boundary, so some tolerance is unavoidable.
pub const RADICAND_TOL: f64 = 1e-12;

/// What a bound constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// The spectral gap `lambda = 1 - lambda_1((P+P*)/2)`.
    Gap,
    /// `1 - lambda_max` (reversible kernels).
    OneMinusLambdaMax,
    /// `1 - lambda_*` (second largest eigenvalue magnitude).
    OneMinusLambdaStar,
}

impl Target {
    /// Exact value of the target for `k`, from the eigensolvers.
    pub fn exact(self, k: &MarkovKernel) -> Result<f64> {
        match self {
            Target::Gap => spectral_gap(k),
            Target::OneMinusLambdaMax => Ok(1.0 - lambda_max(k)?),
            Target::OneMinusLambdaStar => Ok(1.0 - lambda_star(k)?),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Target::Gap => "gap",
            Target::OneMinusLambdaMax => "1-lambda_max",
            Target::OneMinusLambdaStar => "1-lambda_star",
        }
    }
}

/// Which kernel the bound's quantities were computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// The input kernel itself.
    Direct,
    /// The additive symmetrization `(P + P*)/2`.
    Symmetrized,
    /// The lazy chain `(I + (P + P*)/2)/2`.
    Lazified,
}

impl Route {
    pub fn label(self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::Symmetrized => "symmetrized",
            Route::Lazified => "lazified",
        }
    }
}

/// One evaluated bound.
#[derive(Debug, Clone)]
pub struct BoundEntry {
    pub name: String,
    /// The strongest displayed form.
    pub value: f64,
    /// Weaker simplified forms recorded for the report.
    pub weak_forms: Vec<(String, f64)>,
    pub target: Target,
    /// Exact target value from the eigensolver.
    pub exact: f64,
    /// `true` when this entry is an upper bound on the target rather
    /// than a lower bound.
    pub upper: bool,
    /// `value <= exact + slack` (or `exact <= value + slack` for upper
    /// bounds). A `false` here contradicts a theorem and is a defect.
    pub valid: bool,
    /// Minimizing (or maximizing) set, where applicable.
    pub witness: Option<VertexSet>,
    pub route: Route,
}

fn lower_entry(
    name: &str,
    value: f64,
    weak_forms: Vec<(String, f64)>,
    target: Target,
    k: &MarkovKernel,
    witness: Option<VertexSet>,
    route: Route,
) -> Result<BoundEntry> {
    let exact = target.exact(k)?;
    Ok(BoundEntry {
        name: name.into(),
        value,
        weak_forms,
        target,
        exact,
        upper: false,
        valid: value <= exact + BOUND_SLACK,
        witness,
        route,
    })
}

/// `sqrt` with the dust clamp of [`RADICAND_TOL`].
fn safe_sqrt(x: f64) -> Result<f64> {
    if x < -RADICAND_TOL {
        return Err(Error::InconsistentParams(format!(
            "negative radicand {x}"
        )));
    }
    Ok(x.max(0.0).sqrt())
}

/// Clamp an argument of a shape function to `[0, 1]`, tolerating only
/// floating-point dust outside it.
fn clamp_unit(x: f64) -> Result<f64> {
    if !(-RADICAND_TOL..=1.0 + RADICAND_TOL).contains(&x) {
        return Err(Error::InconsistentParams(format!(
            "argument {x} outside [0, 1]"
        )));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Kernel the edge-expansion bounds are computed on: the input itself
/// when reversible, else its additive symmetrization (same gap).
fn edge_route(k: &MarkovKernel) -> (MarkovKernel, Route) {
    if k.is_reversible() {
        (k.clone(), Route::Direct)
    } else {
        (additive_symmetrization(k), Route::Symmetrized)
    }
}

/// Kernel and minimum transition probability the vertex bounds use. For
/// non-reversible input the quantities come from the symmetrization and
/// the probability is the smaller of the halved original and the
/// symmetrization's own minimum, which keeps every radicand in range
/// while staying below the theorem's constant.
fn vertex_route(k: &MarkovKernel) -> Result<(MarkovKernel, f64, Route)> {
    let p0 = min_transition_prob(k, false)?;
    if k.is_reversible() {
        Ok((k.clone(), p0, Route::Direct))
    } else {
        let sym = additive_symmetrization(k);
        let p0_sym = min_transition_prob(&sym, false)?;
        Ok((sym, (p0 / 2.0).min(p0_sym), Route::Symmetrized))
    }
}

/// `lambda >= 1 - sqrt(1 - h^2)`, with the weaker `h^2/2` recorded.
pub fn classic_cheeger(k: &MarkovKernel) -> Result<BoundEntry> {
    let (ek, route) = edge_route(k);
    let h = conductance_global(&ek)?;
    let value = 1.0 - safe_sqrt(1.0 - h.global_value * h.global_value)?;
    lower_entry(
        "classic_cheeger",
        value,
        vec![("h^2/2".into(), h.global_value * h.global_value / 2.0)],
        Target::Gap,
        k,
        Some(h.witness),
        route,
    )
}

/// `lambda >= 2(1 - sqrt(1 - h~^2/4))`, with the weaker `h~^2/4`.
pub fn chi_cheeger(k: &MarkovKernel) -> Result<BoundEntry> {
    let (ek, route) = edge_route(k);
    let hs = sym_conductance_global(&ek)?;
    let v = hs.global_value;
    let value = 2.0 * (1.0 - safe_sqrt(1.0 - v * v / 4.0)?);
    lower_entry(
        "chi_cheeger",
        value,
        vec![("h~^2/4".into(), v * v / 4.0)],
        Target::Gap,
        k,
        Some(hs.witness),
        route,
    )
}

/// The classical upper bound `lambda <= h~`, reported as an upper entry.
pub fn chi_upper(k: &MarkovKernel) -> Result<BoundEntry> {
    let (ek, route) = edge_route(k);
    let hs = sym_conductance_global(&ek)?;
    let exact = Target::Gap.exact(k)?;
    Ok(BoundEntry {
        name: "sym_conductance_upper".into(),
        value: hs.global_value,
        weak_forms: vec![],
        target: Target::Gap,
        exact,
        upper: true,
        valid: exact <= hs.global_value + BOUND_SLACK,
        witness: Some(hs.witness),
        route,
    })
}

/// `lambda >= 2(1 - max_A [f(pi(A)+Q) + f(pi(A)-Q)] / (2 f(pi(A))))`,
/// exhaustively over all proper subsets.
pub fn strong_cheeger(k: &MarkovKernel, f: &ShapeFunction) -> Result<BoundEntry> {
    let (ek, route) = edge_route(k);
    let mut best: Option<(f64, VertexSet)> = None;
    for a in enumerate_proper_subsets(&ek, false)? {
        let denom = f.eval(a.measure());
        if denom <= 0.0 {
            continue;
        }
        let q = ergodic_flow(&ek, &a, &a.complement(&ek)).value();
        let num = f.eval(clamp_unit(a.measure() + q)?) + f.eval(clamp_unit(a.measure() - q)?);
        let ratio = num / (2.0 * denom);
        if best.as_ref().is_none_or(|&(b, _)| ratio > b) {
            best = Some((ratio, a));
        }
    }
    let (ratio, witness) = best.ok_or(Error::ZeroDenominator {
        measure: 0.0,
    })?;
    lower_entry(
        &format!("strong_cheeger[{}]", f.name()),
        2.0 * (1.0 - ratio),
        vec![],
        Target::Gap,
        k,
        Some(witness),
        route,
    )
}

/// `lambda >= min_{pi(A)<=1/2} Q(A,A^c)^2 / (-f(pi(A))/f''(pi(A)))` for
/// `f` with both `f` and `f''` concave.
pub fn diffi_q(k: &MarkovKernel, f: &ShapeFunction) -> Result<BoundEntry> {
    if !(f.concave() && f.second_derivative_concave()) {
        return Err(Error::ConcavityRequired);
    }
    let (ek, route) = edge_route(k);
    let mut best: Option<(f64, VertexSet)> = None;
    for a in enumerate_proper_subsets(&ek, true)? {
        let fpp = f
            .second_derivative(a.measure())
            .ok_or(Error::ConcavityRequired)?;
        let q = ergodic_flow(&ek, &a, &a.complement(&ek)).value();
        let v = q * q / (-f.eval(a.measure()) / fpp);
        if best.as_ref().is_none_or(|&(b, _)| v < b) {
            best = Some((v, a));
        }
    }
    let (value, witness) = best.ok_or(Error::NoPositiveEntry)?;
    lower_entry(
        &format!("diffiQ[{}]", f.name()),
        value,
        vec![],
        Target::Gap,
        k,
        Some(witness),
        route,
    )
}

/// The three vertex-expansion bounds (external, internal, symmetrized
/// internal), each with its weaker polynomial form.
pub fn vertex_bounds(k: &MarkovKernel) -> Result<Vec<BoundEntry>> {
    let (vk, p0, route) = vertex_route(k)?;
    let (h_in, h_out, h_in_sym) = vertex_expansions(&vk)?;
    let (hi, ho, hs) = (
        h_in.global_value,
        h_out.global_value,
        h_in_sym.global_value,
    );

    let out_value = 1.0 - safe_sqrt(1.0 - ho * p0)? - p0 * ((1.0 + ho).sqrt() - 1.0);
    let out = lower_entry(
        "vertex_out",
        out_value,
        vec![(
            "P0/12 min{h_out^2, h_out}".into(),
            p0 / 12.0 * (ho * ho).min(ho),
        )],
        Target::Gap,
        k,
        Some(h_out.witness),
        route,
    )?;

    let in_value = 1.0 - (1.0 + hi * p0).sqrt() - p0 * (safe_sqrt(1.0 - hi)? - 1.0);
    let inner = lower_entry(
        "vertex_in",
        in_value,
        vec![("P0/8 h_in^2".into(), p0 / 8.0 * hi * hi)],
        Target::Gap,
        k,
        Some(h_in.witness),
        route,
    )?;

    let sym_value = 1.0 - safe_sqrt(1.0 - (hs * p0 / 2.0).powi(2))?
        - p0 * (safe_sqrt(1.0 - (hs / 2.0).powi(2))? - 1.0);
    let sym = lower_entry(
        "vertex_in_sym",
        sym_value,
        vec![(
            "P0(1+P0)/8 h~_in^2".into(),
            p0 * (1.0 + p0) / 8.0 * hs * hs,
        )],
        Target::Gap,
        k,
        Some(h_in_sym.witness),
        route,
    )?;

    Ok(vec![out, inner, sym])
}

/// The strengthened reversible vertex bound
/// `(P0/2) max{1 - sqrt(1-h_in), sqrt(1+h_out) - 1}^2`.
pub fn reversible_vertex_bound(k: &MarkovKernel) -> Result<BoundEntry> {
    if !k.is_reversible() {
        return Err(Error::NotReversible {
            residual: k.reversibility_residual(),
        });
    }
    let p0 = min_transition_prob(k, false)?;
    let (h_in, h_out, h_in_sym) = vertex_expansions(k)?;
    let (hi, ho, hs) = (
        h_in.global_value,
        h_out.global_value,
        h_in_sym.global_value,
    );
    let value = p0 / 2.0
        * (1.0 - safe_sqrt(1.0 - hi)?)
            .max((1.0 + ho).sqrt() - 1.0)
            .powi(2);
    lower_entry(
        "reversible_vertex",
        value,
        vec![(
            "max{P0/8 h~_in^2, P0/12 min{h_out^2, h_out}}".into(),
            (p0 / 8.0 * hs * hs).max(p0 / 12.0 * (ho * ho).min(ho)),
        )],
        Target::Gap,
        k,
        None,
        Route::Direct,
    )
}

/// Stoyanov's baseline bounds for reversible chains: the strong form
/// `max{(P0/2)(1-sqrt(1-h_in))^2, (P0/4)(sqrt(1+h_out)-1)^2}` and the
/// weak form `max{(P0/8)h_in^2, (P0/24)min{h_out^2, h_out}}`.
pub fn stoyanov_baseline(k: &MarkovKernel) -> Result<(BoundEntry, BoundEntry)> {
    if !k.is_reversible() {
        return Err(Error::NotReversible {
            residual: k.reversibility_residual(),
        });
    }
    let p0 = min_transition_prob(k, false)?;
    let (h_in, h_out, _) = vertex_expansions(k)?;
    let (hi, ho) = (h_in.global_value, h_out.global_value);
    let strong = (p0 / 2.0 * (1.0 - safe_sqrt(1.0 - hi)?).powi(2))
        .max(p0 / 4.0 * ((1.0 + ho).sqrt() - 1.0).powi(2));
    let weak = (p0 / 8.0 * hi * hi).max(p0 / 24.0 * (ho * ho).min(ho));
    Ok((
        lower_entry(
            "stoyanov",
            strong,
            vec![],
            Target::Gap,
            k,
            None,
            Route::Direct,
        )?,
        lower_entry(
            "stoyanov_weak",
            weak,
            vec![],
            Target::Gap,
            k,
            None,
            Route::Direct,
        )?,
    ))
}

/// The two set-level mixed edge/vertex bounds plus the per-set max
/// display `min_A max{h~(A)^2/4, (P0/8)h~_in(A)^2, (P0/12)min{...}}`.
///
/// The second formula is evaluated as
///
/// ```text
/// 2 - P0 sqrt(1-(h~_in/2)^2) - sqrt(1-(h~/2)^2)
///   - (1-P0) sqrt(1-((h~-P0 h~_in)/(2(1-P0)))^2)
/// ```
///
/// with all radical terms subtracted: the signs are forced by the sharp
/// two-point case together with the `P0 -> 0` limit, which must recover
/// the chi-squared Cheeger bound.
pub fn mixed_bounds(k: &MarkovKernel) -> Result<(BoundEntry, BoundEntry, BoundEntry)> {
    let (vk, p0, route) = vertex_route(k)?;
    let c = 1.0 - p0;
    let mut first: Option<(f64, VertexSet)> = None;
    let mut second: Option<(f64, VertexSet)> = None;
    let mut per_set: Option<(f64, VertexSet)> = None;
    for a in enumerate_proper_subsets(&vk, true)? {
        let h = conductance(&vk, &a);
        let hs = sym_conductance(&vk, &a);
        let (hi, ho, his) = vertex_expansion_set(&vk, &a);

        // (1-P0) sqrt(1 -+ x/(1-P0)) written as sqrt((1-P0)((1-P0) -+ x))
        // so the lazy (P0 = 1) limit is just 0.
        let t3 = if c <= RADICAND_TOL {
            0.0
        } else {
            safe_sqrt(c * (c - (h - p0 * hi)))?
        };
        let t4 = if c <= RADICAND_TOL {
            0.0
        } else {
            safe_sqrt(c * (c + (h - p0 * ho)))?
        };
        let v1 = 2.0 - p0 * safe_sqrt(1.0 - hi)? - p0 * (1.0 + ho).sqrt() - t3 - t4;
        if first.as_ref().is_none_or(|&(b, _)| v1 < b) {
            first = Some((v1, a));
        }

        let t5 = if c <= RADICAND_TOL {
            0.0
        } else {
            safe_sqrt(c * c - ((hs - p0 * his) / 2.0).powi(2))?
        };
        let v2 = 2.0
            - p0 * safe_sqrt(1.0 - (his / 2.0).powi(2))?
            - safe_sqrt(1.0 - (hs / 2.0).powi(2))?
            - t5;
        if second.as_ref().is_none_or(|&(b, _)| v2 < b) {
            second = Some((v2, a));
        }

        let v3 = (hs * hs / 4.0)
            .max(p0 / 8.0 * his * his)
            .max(p0 / 12.0 * (ho * ho).min(ho));
        if per_set.as_ref().is_none_or(|&(b, _)| v3 < b) {
            per_set = Some((v3, a));
        }
    }
    let (v1, w1) = first.ok_or(Error::NoPositiveEntry)?;
    let (v2, w2) = second.ok_or(Error::NoPositiveEntry)?;
    let (v3, w3) = per_set.ok_or(Error::NoPositiveEntry)?;
    Ok((
        lower_entry("mixed_vertex", v1, vec![], Target::Gap, k, Some(w1), route)?,
        lower_entry("mixed_sym", v2, vec![], Target::Gap, k, Some(w2), route)?,
        lower_entry(
            "mixed_per_set_max",
            v3,
            vec![],
            Target::Gap,
            k,
            Some(w3),
            route,
        )?,
    ))
}

/// `1 - lambda_* >= 1 - sqrt(1 - hbar~^2)`, with the weaker `hbar~^2/2`.
pub fn modified_cheeger_bound(k: &MarkovKernel) -> Result<BoundEntry> {
    let hb = modified_cheeger(k)?;
    let v = hb.global_value;
    let value = 1.0 - safe_sqrt(1.0 - v * v)?;
    lower_entry(
        "modified_cheeger",
        value,
        vec![("hbar~^2/2".into(), v * v / 2.0)],
        Target::OneMinusLambdaStar,
        k,
        Some(hb.witness),
        Route::Direct,
    )
}

/// `1 - lambda_* >= (Phat0/12) min{hbar_out^2, hbar_out}` with the
/// minimum transition probability taken over all entries including the
/// diagonal.
pub fn hbar_out_bound(k: &MarkovKernel) -> Result<BoundEntry> {
    let p0_hat = min_transition_prob(k, true)?;
    let hbo = hbar_out(k)?;
    let v = hbo.global_value;
    lower_entry(
        "hbar_out",
        p0_hat / 12.0 * (v * v).min(v),
        vec![],
        Target::OneMinusLambdaStar,
        k,
        Some(hbo.witness),
        Route::Direct,
    )
}

/// The sin-congestion pipeline for the gap: build the lazy chain
/// `P' = (I + (P+P*)/2)/2`, compute `1 - C_{sin(pi a)}(P')`, and return
/// `2(1 - C_{sin}(P'))` as the bound on `lambda_P` via the factor-2
/// relation `lambda_P = 2 lambda_{P'}`.
pub fn sin_congestion_gap(k: &MarkovKernel) -> Result<BoundEntry> {
    let lazy = lazify(k);
    let (gap_bound, res) = generalized_cheeger(&lazy, &ShapeFunction::sin_pi_a())?;
    lower_entry(
        "sin_congestion_gap",
        2.0 * gap_bound,
        vec![],
        Target::Gap,
        k,
        Some(res.witness),
        Route::Lazified,
    )
}

/// The analogous pipeline with `f = sqrt(a(1-a))`, the sharp congestion
/// quantity: `2(1 - C_{sqrt(a(1-a))}(P'))`.
pub fn sqrt_congestion_gap(k: &MarkovKernel) -> Result<BoundEntry> {
    let lazy = lazify(k);
    let (gap_bound, res) = generalized_cheeger(&lazy, &ShapeFunction::sqrt_a_one_minus_a())?;
    lower_entry(
        "sqrt_congestion_gap",
        2.0 * gap_bound,
        vec![],
        Target::Gap,
        k,
        Some(res.witness),
        Route::Lazified,
    )
}

/// `1 - lambda_max >= 1 - C_{sin(pi a)}(P)` for reversible `P`, computed
/// on the kernel directly (not the lazy chain).
pub fn sin_psi_eigen_bound(k: &MarkovKernel) -> Result<BoundEntry> {
    if !k.is_reversible() {
        return Err(Error::NotReversible {
            residual: k.reversibility_residual(),
        });
    }
    let (value, res) = generalized_cheeger(k, &ShapeFunction::sin_pi_a())?;
    lower_entry(
        "sin_psi_eigen",
        value,
        vec![],
        Target::OneMinusLambdaMax,
        k,
        Some(res.witness),
        Route::Direct,
    )
}

/// Everything [`full_report`] computed for one kernel.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub n: usize,
    pub reversible: bool,
    /// Minimum off-diagonal positive transition probability.
    pub p0: f64,
    /// Minimum positive transition probability including the diagonal.
    pub p0_hat: f64,
    pub entries: Vec<BoundEntry>,
    /// Bounds that could not be evaluated, with the reason.
    pub errors: Vec<(String, String)>,
}

impl BoundReport {
    /// Entry lookup by name.
    pub fn entry(&self, name: &str) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// `true` when every entry's validity check passed.
    pub fn all_valid(&self) -> bool {
        self.entries.iter().all(|e| e.valid)
    }
}

/// Run every applicable bound for `k`. Evaluations are independent and
/// pure, so they run on scoped threads; per-entry errors are collected
/// rather than aborting the report, and the output order is fixed.
pub fn full_report(k: &MarkovKernel) -> Result<BoundReport> {
    let p0 = min_transition_prob(k, false)?;
    let p0_hat = min_transition_prob(k, true)?;
    let reversible = k.is_reversible();

    type Job<'a> = (
        &'static str,
        Box<dyn Fn() -> Result<Vec<BoundEntry>> + Send + Sync + 'a>,
    );
    let mut jobs: Vec<Job> = vec![
        ("classic_cheeger", Box::new(|| Ok(vec![classic_cheeger(k)?]))),
        ("chi_cheeger", Box::new(|| Ok(vec![chi_cheeger(k)?]))),
        ("sym_conductance_upper", Box::new(|| Ok(vec![chi_upper(k)?]))),
        (
            "strong_cheeger",
            Box::new(|| {
                Ok(vec![strong_cheeger(
                    k,
                    &ShapeFunction::sqrt_a_one_minus_a(),
                )?])
            }),
        ),
        (
            "diffiQ",
            Box::new(|| Ok(vec![diffi_q(k, &ShapeFunction::sqrt_a_one_minus_a())?])),
        ),
        ("vertex_bounds", Box::new(|| vertex_bounds(k))),
        (
            "mixed_bounds",
            Box::new(|| {
                let (a, b, c) = mixed_bounds(k)?;
                Ok(vec![a, b, c])
            }),
        ),
        (
            "modified_cheeger",
            Box::new(|| Ok(vec![modified_cheeger_bound(k)?])),
        ),
        ("hbar_out", Box::new(|| Ok(vec![hbar_out_bound(k)?]))),
        (
            "sin_congestion_gap",
            Box::new(|| Ok(vec![sin_congestion_gap(k)?])),
        ),
        (
            "sqrt_congestion_gap",
            Box::new(|| Ok(vec![sqrt_congestion_gap(k)?])),
        ),
    ];
    if reversible {
        jobs.push((
            "reversible_vertex",
            Box::new(|| Ok(vec![reversible_vertex_bound(k)?])),
        ));
        jobs.push((
            "stoyanov",
            Box::new(|| {
                let (a, b) = stoyanov_baseline(k)?;
                Ok(vec![a, b])
            }),
        ));
        jobs.push((
            "sin_psi_eigen",
            Box::new(|| Ok(vec![sin_psi_eigen_bound(k)?])),
        ));
    }

    let results: Vec<(&'static str, Result<Vec<BoundEntry>>)> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(name, f)| (*name, s.spawn(f)))
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| (name, h.join().expect("bound evaluation panicked")))
            .collect()
    });

    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for (name, result) in results {
        match result {
            Ok(mut batch) => entries.append(&mut batch),
            Err(e) => errors.push((name.to_string(), e.to_string())),
        }
    }
    Ok(BoundReport {
        n: k.n(),
        reversible,
        p0,
        p0_hat,
        entries,
        errors,
    })
}

/// Per-set sanity used by the report tests: the sharp generalized value
/// `1 - C_{sqrt(a(1-a))}(A)` for a single set.
pub fn sqrt_congestion_set(k: &MarkovKernel, a: &VertexSet) -> Result<f64> {
    Ok(1.0 - f_congestion_set(k, a, &ShapeFunction::sqrt_a_one_minus_a())?)
}

/// The first mixed formula's radicand precondition
/// `Q(A,A^c) >= P0 pi(boundary_in(A))`, checked directly.
pub fn in_boundary_flow_slack(k: &MarkovKernel, a: &VertexSet, p0: f64) -> f64 {
    let (inner, _) = boundaries(k, a);
    ergodic_flow(k, a, &a.complement(k)).value() - p0 * inner.measure()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::{generate, ChainSpec};
    use std::f64::consts::PI;

    #[test]
    fn classic_cheeger_examples() {
        let two = generate(&ChainSpec::two_point()).unwrap();
        let e = classic_cheeger(&two).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert!(e.valid);

        let c6 = generate(&ChainSpec::cycle(6)).unwrap();
        let e = classic_cheeger(&c6).unwrap();
        assert!((e.weak_forms[0].1 - 2.0 / 36.0).abs() < 1e-12);
        assert!(e.value > 0.0);
        assert!(e.valid);
    }

    #[test]
    fn chi_cheeger_sharp_on_two_point() {
        let two = generate(&ChainSpec::two_point()).unwrap();
        let e = chi_cheeger(&two).unwrap();
        assert!((e.value - 2.0).abs() < 1e-12);
        assert!((e.exact - 2.0).abs() < 1e-12);
        assert!(e.valid);
    }

    #[test]
    fn chi_cheeger_cycles() {
        let c3 = generate(&ChainSpec::cycle(3)).unwrap();
        let e = chi_cheeger(&c3).unwrap();
        assert!((e.value - 2.0 * (1.0 - (7.0f64 / 16.0).sqrt())).abs() < 1e-12);
        assert!((e.exact - 1.5).abs() < 1e-10);
        assert!(e.valid);

        let c6 = generate(&ChainSpec::cycle(6)).unwrap();
        let e = chi_cheeger(&c6).unwrap();
        assert!((e.weak_forms[0].1 - 4.0 / 36.0).abs() < 1e-12);
    }

    #[test]
    fn chi_upper_holds() {
        for spec in [
            ChainSpec::two_point(),
            ChainSpec::cycle(5),
            ChainSpec::random_reversible(6, 3),
            ChainSpec::random_general(5, 9),
        ] {
            let k = generate(&spec).unwrap();
            let e = chi_upper(&k).unwrap();
            assert!(e.upper);
            assert!(e.valid, "{spec:?}: gap {} > h~ {}", e.exact, e.value);
        }
    }

    #[test]
    fn strong_cheeger_examples() {
        let f = ShapeFunction::sqrt_a_one_minus_a();
        let c3 = generate(&ChainSpec::cycle(3)).unwrap();
        let e = strong_cheeger(&c3, &f).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);

        let two = generate(&ChainSpec::two_point()).unwrap();
        let e = strong_cheeger(&two, &f).unwrap();
        assert!((e.value - 2.0).abs() < 1e-12);

        let sin = ShapeFunction::sin_pi_a();
        for n in [4usize, 5, 6, 7] {
            let k = generate(&ChainSpec::cycle(n)).unwrap();
            let e = strong_cheeger(&k, &sin).unwrap();
            let expect = 2.0 * (1.0 - (PI / n as f64).cos());
            assert!((e.value - expect).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn strong_dominates_chi() {
        let f = ShapeFunction::sqrt_a_one_minus_a();
        for seed in 0..10 {
            let k = generate(&ChainSpec::random_reversible(3 + (seed as usize % 5), seed)).unwrap();
            let s = strong_cheeger(&k, &f).unwrap();
            let c = chi_cheeger(&k).unwrap();
            assert!(s.value >= c.value - 1e-12, "seed {seed}");
            assert!(s.valid && c.valid);
        }
    }

    #[test]
    fn diffi_q_examples() {
        let f = ShapeFunction::sqrt_a_one_minus_a();
        let two = generate(&ChainSpec::two_point()).unwrap();
        let e = diffi_q(&two, &f).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert!(e.valid);

        // The closed form -f/f'' = 4a^2(1-a)^2 makes the bound
        // min Q^2 / (4 pi(A)^2 pi(A^c)^2).
        let k = generate(&ChainSpec::random_reversible(6, 11)).unwrap();
        let e = diffi_q(&k, &f).unwrap();
        let mut expect = f64::INFINITY;
        for a in enumerate_proper_subsets(&k, true).unwrap() {
            let q = ergodic_flow(&k, &a, &a.complement(&k)).value();
            let pa = a.measure();
            let pc = a.complement(&k).measure();
            expect = expect.min(q * q / (4.0 * pa * pa * pc * pc));
        }
        assert!((e.value - expect).abs() < 1e-12);

        assert!(matches!(
            diffi_q(&two, &ShapeFunction::sin_pi_a()),
            Err(Error::ConcavityRequired)
        ));
    }

    #[test]
    fn vertex_bounds_two_point() {
        let two = generate(&ChainSpec::two_point()).unwrap();
        let entries = vertex_bounds(&two).unwrap();
        let inner = entries.iter().find(|e| e.name == "vertex_in").unwrap();
        assert!((inner.value - (2.0 - 2.0f64.sqrt())).abs() < 1e-12);
        assert!((inner.weak_forms[0].1 - 1.0 / 8.0).abs() < 1e-12);
        for e in &entries {
            assert!(e.valid, "{}", e.name);
        }
    }

    #[test]
    fn vertex_bounds_lazy_hypercube() {
        let k = generate(&ChainSpec::hypercube(3, 0.5)).unwrap();
        for e in vertex_bounds(&k).unwrap() {
            assert!(e.value > 0.0, "{}", e.name);
            assert!(e.valid, "{}", e.name);
        }
    }

    #[test]
    fn stoyanov_two_point() {
        let two = generate(&ChainSpec::two_point()).unwrap();
        let (strong, weak) = stoyanov_baseline(&two).unwrap();
        assert!((strong.value - 0.5).abs() < 1e-12);
        assert!(weak.value <= strong.value + 1e-12);
        assert!(strong.valid && weak.valid);
    }

    #[test]
    fn reversible_vertex_beats_stoyanov() {
        for seed in 0..15 {
            let k = generate(&ChainSpec::random_reversible(3 + (seed as usize % 6), seed)).unwrap();
            let new = reversible_vertex_bound(&k).unwrap();
            let (baseline, weak) = stoyanov_baseline(&k).unwrap();
            assert!(new.value >= baseline.value - 1e-12, "seed {seed}");
            assert!(new.valid && baseline.valid && weak.valid);
        }
        let rot = generate(&ChainSpec::rotation(3)).unwrap();
        assert!(reversible_vertex_bound(&rot).is_err());
    }

    #[test]
    fn mixed_bounds_two_point_sharp() {
        let two = generate(&ChainSpec::two_point()).unwrap();
        let (first, second, per_set) = mixed_bounds(&two).unwrap();
        assert!((second.value - 2.0).abs() < 1e-12);
        assert!(first.valid && second.valid && per_set.valid);
    }

    #[test]
    fn mixed_per_set_dominates_component_minima() {
        // min_A max{...} >= max over components of min_A (minimax >= maximin).
        for seed in 0..10 {
            let k = generate(&ChainSpec::random_reversible(4 + (seed as usize % 4), seed)).unwrap();
            let p0 = min_transition_prob(&k, false).unwrap();
            let (_, _, per_set) = mixed_bounds(&k).unwrap();
            let hs = sym_conductance_global(&k).unwrap().global_value;
            let (_, h_out, h_in_sym) = vertex_expansions(&k).unwrap();
            let component_max = (hs * hs / 4.0)
                .max(p0 / 8.0 * h_in_sym.global_value.powi(2))
                .max(p0 / 12.0 * (h_out.global_value.powi(2)).min(h_out.global_value));
            assert!(per_set.value >= component_max - 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn in_boundary_flow_precondition() {
        for seed in 0..10 {
            let k = generate(&ChainSpec::random_reversible(3 + (seed as usize % 5), seed)).unwrap();
            let p0 = min_transition_prob(&k, false).unwrap();
            for a in enumerate_proper_subsets(&k, true).unwrap() {
                assert!(in_boundary_flow_slack(&k, &a, p0) >= -1e-12);
            }
        }
    }

    #[test]
    fn modified_cheeger_bound_cycles() {
        let c5 = generate(&ChainSpec::cycle(5)).unwrap();
        let e = modified_cheeger_bound(&c5).unwrap();
        let hb = 5.0 / 12.0;
        assert!((e.value - (1.0 - (1.0f64 - hb * hb).sqrt())).abs() < 1e-12);
        assert!((e.exact - (1.0 - (PI / 5.0).cos())).abs() < 1e-9);
        assert!(e.valid);

        let c4 = generate(&ChainSpec::cycle(4)).unwrap();
        let e = modified_cheeger_bound(&c4).unwrap();
        assert!(e.value.abs() < 1e-12);
        assert!(e.exact.abs() < 1e-9);
        assert!(e.valid);
    }

    #[test]
    fn hbar_out_bound_examples() {
        let two = generate(&ChainSpec::two_point()).unwrap();
        let e = hbar_out_bound(&two).unwrap();
        assert!(e.value.abs() < 1e-12);
        assert!(e.valid);

        let c5 = generate(&ChainSpec::cycle(5)).unwrap();
        let e = hbar_out_bound(&c5).unwrap();
        assert!(e.valid);
    }

    #[test]
    fn sin_congestion_gap_sharp_on_cycles() {
        for n in 3..=8usize {
            let k = generate(&ChainSpec::cycle(n)).unwrap();
            let e = sin_congestion_gap(&k).unwrap();
            let expect = 1.0 - (2.0 * PI / n as f64).cos();
            assert!((e.value - expect).abs() < 1e-9, "n={n}: {}", e.value);
            assert!((e.exact - expect).abs() < 1e-9, "n={n}");
            assert!(e.valid);
        }
    }

    #[test]
    fn sin_psi_eigen_sharp_on_odd_cycles() {
        for n in [5usize, 7] {
            let k = generate(&ChainSpec::cycle(n)).unwrap();
            let e = sin_psi_eigen_bound(&k).unwrap();
            let expect = 1.0 - (PI / n as f64).cos();
            assert!((e.value - expect).abs() < 1e-9, "n={n}");
            assert!((e.exact - expect).abs() < 1e-9, "n={n}");
            assert!(e.valid);
        }
        assert!(sin_psi_eigen_bound(&generate(&ChainSpec::rotation(3)).unwrap()).is_err());
    }

    #[test]
    fn full_report_two_point() {
        let two = generate(&ChainSpec::two_point()).unwrap();
        let report = full_report(&two).unwrap();
        assert!(report.reversible);
        assert!((report.p0 - 1.0).abs() < 1e-12);
        let chi = report.entry("chi_cheeger").unwrap();
        assert!((chi.value - chi.exact).abs() < 1e-12);
        assert!(report.all_valid());
        assert!(report.errors.is_empty());
    }

    #[test]
    fn full_report_cycle_sharpness() {
        let c5 = generate(&ChainSpec::cycle(5)).unwrap();
        let report = full_report(&c5).unwrap();
        let sin_gap = report.entry("sin_congestion_gap").unwrap();
        assert!((sin_gap.value - sin_gap.exact).abs() < 1e-9);
        let sin_psi = report.entry("sin_psi_eigen").unwrap();
        assert!((sin_psi.value - sin_psi.exact).abs() < 1e-9);
        assert!(report.all_valid());
    }

    #[test]
    fn full_report_random_kernels_sound() {
        for seed in 0..8 {
            let rev = generate(&ChainSpec::random_reversible(3 + (seed as usize % 6), seed)).unwrap();
            let report = full_report(&rev).unwrap();
            assert!(report.all_valid(), "reversible seed {seed}");
            assert!(report.errors.is_empty());

            let gen = generate(&ChainSpec::random_general(3 + (seed as usize % 6), seed)).unwrap();
            let report = full_report(&gen).unwrap();
            assert!(report.all_valid(), "general seed {seed}");
        }
    }
}
