//! The evolving set process: exact step profiles, their integrals, the
//! modified ergodic flow, and Monte-Carlo mixing bounds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{Flow, MarkovKernel, IDENTITY_TOL};
use crate::setops::VertexSet;

/// One constant piece of a step function on `(lower, upper] ⊆ (0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub upper: f64,
    pub lower: f64,
    pub value: f64,
}

impl Piece {
    pub fn len(&self) -> f64 {
        self.upper - self.lower
    }
}

/// A piecewise-constant function on `(0,1]`, pieces stored in descending
/// `u` order and covering the whole interval.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFn {
    pieces: Vec<Piece>,
}

impl StepFn {
    /// Build from `(length, value)` pairs listed from `u = 1` downwards.
    /// Lengths must sum to 1; zero-length pieces are dropped.
    pub fn from_lengths(parts: &[(f64, f64)]) -> Result<StepFn> {
        let total: f64 = parts.iter().map(|&(len, _)| len).sum();
        if (total - 1.0).abs() > 1e-9 || parts.iter().any(|&(len, _)| len < -1e-12) {
            return Err(Error::InconsistentParams(format!(
                "piece lengths sum to {total}, expected 1"
            )));
        }
        let mut pieces = Vec::new();
        let mut upper = 1.0;
        for &(len, value) in parts {
            if len <= 0.0 {
                continue;
            }
            let lower = (upper - len).max(0.0);
            pieces.push(Piece { upper, lower, value });
            upper = lower;
        }
        if let Some(last) = pieces.last_mut() {
            last.lower = 0.0;
        }
        Ok(StepFn { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Value at `u` (pieces cover `(lower, upper]`).
    pub fn value_at(&self, u: f64) -> f64 {
        for p in &self.pieces {
            if u > p.lower && u <= p.upper {
                return p.value;
            }
        }
        self.pieces.last().map_or(0.0, |p| p.value)
    }

    /// `∫_0^1 g`.
    pub fn mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.len() * p.value).sum()
    }

    /// `∫_0^t g`.
    pub fn partial_mass(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for p in &self.pieces {
            if t >= p.upper {
                acc += p.len() * p.value;
            } else if t > p.lower {
                acc += (t - p.lower) * p.value;
            }
        }
        acc
    }

    /// `∫_0^1 f ∘ g`.
    pub fn integrate_composed(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.pieces.iter().map(|p| p.len() * f(p.value)).sum()
    }

    /// Non-increasing as a function of `u` (values grow as `u` shrinks).
    pub fn is_non_increasing(&self) -> bool {
        self.pieces
            .windows(2)
            .all(|w| w[1].value >= w[0].value - 1e-12)
    }

    /// All piece boundaries, including 0 and 1.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.pieces.iter().map(|p| p.upper).collect();
        b.push(0.0);
        b
    }
}

/// The exact map `u -> pi(A_u)` on `(0,1]` for a fixed set `A`, where
/// `A_u = {y : Q(A,y) >= u pi(y)}`.
#[derive(Debug, Clone)]
pub struct StepProfile {
    /// Per-state threshold `t_y = Q(A,y)/pi(y) = P*(y,A)`.
    thresholds: Vec<f64>,
    steps: StepFn,
    base: f64,
}

impl StepProfile {
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// `pi(A)`.
    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn steps(&self) -> &StepFn {
        &self.steps
    }

    /// The set `A_u` as a bitmask.
    pub fn set_at(&self, u: f64) -> u32 {
        let mut bits = 0u32;
        for (y, &t) in self.thresholds.iter().enumerate() {
            if t >= u {
                bits |= 1 << y;
            }
        }
        bits
    }
}

/// Exact step profile of a proper set.
pub fn profile(k: &MarkovKernel, a: &VertexSet) -> StepProfile {
    debug_assert!(a.is_proper(k), "profile expects a proper subset");
    let n = k.n();
    let thresholds: Vec<f64> = (0..n)
        .map(|y| {
            let q: f64 = a.iter().map(|x| k.pi()[x] * k.p()[(x, y)]).sum();
            q / k.pi()[y]
        })
        .collect();
    // Distinct positive thresholds, descending; membership at a breakpoint
    // uses >= so the value on (u_{k+1}, u_k] is the mass with t_y >= u_k.
    let mut cuts: Vec<f64> = thresholds.iter().copied().filter(|&t| t > 0.0).collect();
    cuts.sort_by(|a, b| b.partial_cmp(a).expect("finite thresholds"));
    cuts.dedup();
    let mut parts: Vec<(f64, f64)> = Vec::new();
    let mut prev = 1.0;
    for (i, &cut) in cuts.iter().enumerate() {
        let cut = cut.min(1.0);
        if cut < prev {
            // Above the largest remaining threshold the set is smaller.
            let value = if i == 0 {
                0.0
            } else {
                mass_at_least(k, &thresholds, cuts[i - 1])
            };
            parts.push((prev - cut, value));
            prev = cut;
        }
    }
    let bottom = mass_at_least(k, &thresholds, *cuts.last().expect("Q(A,V) = pi(A) > 0"));
    parts.push((prev, bottom));
    let steps = StepFn::from_lengths(&parts).expect("profile pieces tile (0,1]");
    StepProfile {
        thresholds,
        steps,
        base: a.measure(),
    }
}

fn mass_at_least(k: &MarkovKernel, thresholds: &[f64], cut: f64) -> f64 {
    let states: Vec<usize> = (0..k.n()).filter(|&y| thresholds[y] >= cut).collect();
    if states.len() == k.n() {
        // pi(V) = 1 by definition; summing would leave rounding dust that
        // square-root-singular shape functions amplify.
        return 1.0;
    }
    states.iter().map(|&y| k.pi()[y]).sum()
}

/// `∫_0^1 f(pi(A_u)) du`, the numerator of the f-congestion.
pub fn integrate_f(p: &StepProfile, f: impl Fn(f64) -> f64) -> f64 {
    p.steps.integrate_composed(f)
}

/// Lemma-style split of the flow for a lazy kernel:
/// `Q(A,A^c) = ∫_0^{1/2}(pi(A_u)-pi(A)) du = ∫_{1/2}^1(pi(A)-pi(A_u)) du`.
/// Returns `(upper_area, lower_area)`.
pub fn ergodic_flow_identity(k: &MarkovKernel, a: &VertexSet) -> Result<(f64, f64)> {
    for x in 0..k.n() {
        if k.p()[(x, x)] < 0.5 - IDENTITY_TOL {
            return Err(Error::NotLazy {
                state: x,
                value: k.p()[(x, x)],
            });
        }
    }
    let p = profile(k, a);
    let upper = p.steps.partial_mass(0.5) - 0.5 * p.base;
    let lower = 0.5 * p.base - (p.steps.mass() - p.steps.partial_mass(0.5));
    Ok((upper, lower))
}

/// One step of the evolving set process: draw `u` uniform on `(0,1]` and
/// return `A_u`. The empty set and `V` are absorbing.
pub fn sample_step(k: &MarkovKernel, a: &VertexSet, rng: &mut impl Rng) -> VertexSet {
    if !a.is_proper(k) {
        return *a;
    }
    let p = profile(k, a);
    let u = 1.0 - rng.gen::<f64>();
    VertexSet::from_bits(k, p.set_at(u)).expect("profile bits in range")
}

/// A Monte-Carlo estimate of the evolving-set mixing bound.
#[derive(Debug, Clone, Copy)]
pub struct MixingBoundEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub steps: usize,
}

/// Monte-Carlo estimate of
/// `(1 / 2 pi(x)) E_n sqrt(min{pi(S_n), 1 - pi(S_n)})` with `S_0 = {x}`.
///
/// Deterministic in the seed: sample `i` always uses stream `i` of the
/// generator, so a parallel consumer partitioning the sample range gets
/// identical results.
pub fn mp_mixing_bound(
    k: &MarkovKernel,
    x: usize,
    steps: usize,
    samples: usize,
    seed: u64,
) -> MixingBoundEstimate {
    let ests = mp_mixing_bound_trajectory(k, x, steps, samples, seed);
    ests[steps]
}

/// Same as [`mp_mixing_bound`] but returns the estimate at every step
/// count `0..=steps` from the same trajectories.
pub fn mp_mixing_bound_trajectory(
    k: &MarkovKernel,
    x: usize,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Vec<MixingBoundEstimate> {
    assert!(samples >= 1);
    let scale = 1.0 / (2.0 * k.pi()[x]);
    let mut sums = vec![0.0f64; steps + 1];
    let mut sq_sums = vec![0.0f64; steps + 1];
    let start = VertexSet::singleton(k, x);
    for i in 0..samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut s = start;
        for record in 0..=steps {
            let m = s.measure();
            let v = scale * m.min(1.0 - m).max(0.0).sqrt();
            sums[record] += v;
            sq_sums[record] += v * v;
            if record < steps {
                s = sample_step(k, &s, &mut rng);
            }
        }
    }
    (0..=steps)
        .map(|n| {
            let mean = sums[n] / samples as f64;
            let var = (sq_sums[n] / samples as f64 - mean * mean).max(0.0);
            let stderr = if samples > 1 {
                (var / (samples as f64 - 1.0)).sqrt()
            } else {
                0.0
            };
            MixingBoundEstimate {
                mean,
                stderr,
                samples,
                steps: n,
            }
        })
        .collect()
}

/// Modified ergodic flow `Psi(A) = 1/2 ∫_0^1 |pi(A_u) - pi(A)| du`.
pub fn psi(k: &MarkovKernel, a: &VertexSet) -> Flow {
    let p = profile(k, a);
    let v = 0.5 * p.steps.integrate_composed(|v| (v - p.base).abs());
    Flow::new(v)
}

/// Brute-force isoperimetric form of `Psi(A)`:
/// the minimum of `Q(A,B) + ((pi(A^c)-pi(B))/pi(v)) Q(A,v)` over `B` and
/// `v` with `pi(B) <= pi(A^c) < pi(B ∪ v)`.
pub fn psi_minflow(k: &MarkovKernel, a: &VertexSet) -> Result<Flow> {
    let n = k.n();
    if n > crate::setops::ENUMERATION_CAP {
        return Err(Error::TooManyStates {
            n,
            cap: crate::setops::ENUMERATION_CAP,
        });
    }
    let target = a.complement(k).measure();
    // Q(A, x) for each state, then Q(A, B) by lowest-bit recursion.
    let q: Vec<f64> = (0..n)
        .map(|y| a.iter().map(|x| k.pi()[x] * k.p()[(x, y)]).sum())
        .collect();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut qb = vec![0.0f64; full as usize + 1];
    let mut measure = vec![0.0f64; full as usize + 1];
    for bits in 1..=full {
        let low = bits.trailing_zeros() as usize;
        qb[bits as usize] = qb[(bits & (bits - 1)) as usize] + q[low];
        measure[bits as usize] = measure[(bits & (bits - 1)) as usize] + k.pi()[low];
    }
    let mut best = f64::INFINITY;
    for bits in 0..=full {
        let pb = measure[bits as usize];
        if pb > target + IDENTITY_TOL {
            continue;
        }
        // Indexing three parallel arrays by state; an iterator form would
        // obscure the bit test.
        #[allow(clippy::needless_range_loop)]
        for v in 0..n {
            if bits >> v & 1 == 1 {
                continue;
            }
            if pb + k.pi()[v] <= target + IDENTITY_TOL {
                continue;
            }
            let value = qb[bits as usize] + (target - pb) / k.pi()[v] * q[v];
            if value < best {
                best = value;
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::NoFeasibleB);
    }
    Ok(Flow::new(best.max(0.0)))
}

/// The crossing point of a profile: a `℘` with `pi(A_u) >= pi(A)` below it
/// and `pi(A_u) <= pi(A)` above it. Degenerate (constant) profiles return
/// the convention value 1/2, as does any profile whose admissible interval
/// contains 1/2 — in particular every lazy kernel.
pub fn crossing_point(p: &StepProfile) -> f64 {
    let eps = 1e-12;
    let mut lo = 0.0f64; // sup{u : value > base}
    let mut hi = 1.0f64; // inf{u : value < base}
    for piece in p.steps.pieces() {
        if piece.value > p.base + eps {
            lo = lo.max(piece.upper);
        }
        if piece.value < p.base - eps {
            hi = hi.min(piece.lower);
        }
    }
    if lo <= 0.5 && 0.5 <= hi {
        0.5
    } else {
        0.5 * (lo + hi)
    }
}
