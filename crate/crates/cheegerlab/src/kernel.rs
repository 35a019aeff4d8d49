//! Finite ergodic Markov kernels: validation, stationary distribution,
//! time-reversal, symmetrization, lazification, ergodic flow and exact
//! total variation distances.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setops::VertexSet;

/// Input validation tolerance for row sums and stationarity.
pub const INPUT_TOL: f64 = 1e-9;
/// Tolerance for internal exact identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Residual demanded of the computed stationary distribution.
pub const STATIONARY_TOL: f64 = 1e-10;

/// Probability mass flowing between two sets in one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow(f64);

impl Flow {
    pub(crate) fn new(value: f64) -> Self {
        debug_assert!((-IDENTITY_TOL..=1.0 + IDENTITY_TOL).contains(&value));
        Flow(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A row-stochastic transition matrix together with its stationary
/// distribution. Immutable after construction; every operation borrows it.
#[derive(Debug, Clone)]
pub struct MarkovKernel {
    n: usize,
    p: DMatrix<f64>,
    pi: DVector<f64>,
    labels: Option<Vec<String>>,
}

/// On-disk JSON form: `{ "labels": [..]?, "P": [[row], ..] }`.
#[derive(Debug, Serialize, Deserialize)]
pub struct KernelFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
}

/// Build a kernel from a row-stochastic matrix, solving for the stationary
/// distribution.
///
/// ```
/// use cheegerlab::kernel::make_kernel;
/// use nalgebra::dmatrix;
///
/// let k = make_kernel(dmatrix![0.0, 1.0; 1.0, 0.0], None).unwrap();
/// assert!((k.pi()[0] - 0.5).abs() < 1e-12);
/// ```
pub fn make_kernel(p: DMatrix<f64>, labels: Option<Vec<String>>) -> Result<MarkovKernel> {
    let n = p.nrows();
    if n < 2 || p.ncols() != n {
        return Err(Error::InvalidSpec(format!(
            "transition matrix must be square with n >= 2, got {}x{}",
            p.nrows(),
            p.ncols()
        )));
    }
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            let v = p[(i, j)];
            if v < 0.0 {
                return Err(Error::NegativeEntry { row: i, col: j });
            }
            sum += v;
        }
        if (sum - 1.0).abs() > INPUT_TOL {
            return Err(Error::NotStochastic { row: i, sum });
        }
    }
    if !strongly_connected(&p) {
        return Err(Error::NotIrreducible);
    }
    let pi = stationary_distribution(&p)?;
    if let Some(ref l) = labels {
        if l.len() != n {
            return Err(Error::InvalidSpec(format!(
                "{} labels for {} states",
                l.len(),
                n
            )));
        }
    }
    Ok(MarkovKernel { n, p, pi, labels })
}

/// Strong connectivity of the support graph. Support is structural: an
/// entry counts iff it is exactly positive.
fn strongly_connected(p: &DMatrix<f64>) -> bool {
    let n = p.nrows();
    let reach = |transpose: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for y in 0..n {
                let v = if transpose { p[(y, x)] } else { p[(x, y)] };
                if v > 0.0 && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen
    };
    reach(false).iter().all(|&s| s) && reach(true).iter().all(|&s| s)
}

/// Stationary distribution as the null space of `P^T - I` with the
/// normalization row appended, refined by one power-iteration sweep.
fn stationary_distribution(p: &DMatrix<f64>) -> Result<DVector<f64>> {
    let n = p.nrows();
    // (P^T - I) with the last equation replaced by sum(pi) = 1.
    let mut m = p.transpose() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        m[(n - 1, j)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let mut pi = m
        .full_piv_lu()
        .solve(&rhs)
        .ok_or_else(|| Error::EigensolveFailed("stationary system is singular".into()))?;
    // One refinement sweep; pi P = pi is a fixed point so this never hurts.
    pi = (pi.transpose() * p).transpose();
    let total: f64 = pi.iter().sum();
    pi /= total;
    let residual = (pi.transpose() * p - pi.transpose()).abs().max();
    if residual > STATIONARY_TOL {
        return Err(Error::EigensolveFailed(format!(
            "stationary residual {residual} exceeds {STATIONARY_TOL}"
        )));
    }
    if pi.iter().any(|&x| x <= 0.0) {
        return Err(Error::NotIrreducible);
    }
    Ok(pi)
}

impl MarkovKernel {
    /// Internal constructor for transforms that preserve the stationary
    /// distribution exactly.
    pub(crate) fn with_pi(p: DMatrix<f64>, pi: DVector<f64>, labels: Option<Vec<String>>) -> Self {
        let n = p.nrows();
        debug_assert!((pi.transpose() * &p - pi.transpose()).abs().max() < 1e-8);
        MarkovKernel { n, p, pi, labels }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn pi(&self) -> &DVector<f64> {
        &self.pi
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, x: usize) -> String {
        match &self.labels {
            Some(l) => l[x].clone(),
            None => x.to_string(),
        }
    }

    /// Max detailed-balance residual `|pi(x)P(x,y) - pi(y)P(y,x)|`.
    pub fn reversibility_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.n {
            for y in (x + 1)..self.n {
                let d = (self.pi[x] * self.p[(x, y)] - self.pi[y] * self.p[(y, x)]).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_reversible(&self) -> bool {
        self.reversibility_residual() <= INPUT_TOL
    }

    pub fn is_lazy(&self) -> bool {
        (0..self.n).all(|x| self.p[(x, x)] >= 0.5 - IDENTITY_TOL)
    }

    pub fn to_file(&self) -> KernelFile {
        KernelFile {
            labels: self.labels.clone(),
            p: (0..self.n)
                .map(|i| (0..self.n).map(|j| self.p[(i, j)]).collect())
                .collect(),
        }
    }

    pub fn from_file(file: KernelFile) -> Result<MarkovKernel> {
        let n = file.p.len();
        if file.p.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidSpec("transition matrix is not square".into()));
        }
        let p = DMatrix::from_fn(n, n, |i, j| file.p[i][j]);
        make_kernel(p, file.labels)
    }
}

/// Time-reversal `P*(x,y) = pi(y) P(y,x) / pi(x)`; shares the stationary
/// distribution with the original kernel.
pub fn time_reversal(k: &MarkovKernel) -> MarkovKernel {
    let n = k.n;
    let p = DMatrix::from_fn(n, n, |x, y| k.pi[y] * k.p[(y, x)] / k.pi[x]);
    MarkovKernel::with_pi(p, k.pi.clone(), k.labels.clone())
}

/// Additive symmetrization `(P + P*)/2`; reversible with the same pi.
pub fn additive_symmetrization(k: &MarkovKernel) -> MarkovKernel {
    let rev = time_reversal(k);
    let p = (&k.p + &rev.p) / 2.0;
    MarkovKernel::with_pi(p, k.pi.clone(), k.labels.clone())
}

/// The lazy, reversible chain `P' = (I + (P+P*)/2) / 2`. Ergodic flows
/// satisfy `Q(A,A^c) = 2 Q_{P'}(A,A^c)`.
pub fn lazify(k: &MarkovKernel) -> MarkovKernel {
    let sym = additive_symmetrization(k);
    let p = (DMatrix::<f64>::identity(k.n, k.n) + sym.p) / 2.0;
    MarkovKernel::with_pi(p, k.pi.clone(), k.labels.clone())
}

/// Ergodic flow `Q(A,B) = sum_{x in A, y in B} pi(x) P(x,y)`. The sets may
/// overlap.
pub fn ergodic_flow(k: &MarkovKernel, a: &VertexSet, b: &VertexSet) -> Flow {
    let mut q = 0.0;
    for x in a.iter() {
        for y in b.iter() {
            q += k.pi[x] * k.p[(x, y)];
        }
    }
    Flow::new(q)
}

/// Flow from a single state into a set, `Q(x, B)`.
pub fn state_flow(k: &MarkovKernel, x: usize, b: &VertexSet) -> f64 {
    b.iter().map(|y| k.pi[x] * k.p[(x, y)]).sum()
}

/// Minimum positive transition probability: `P_0` over off-diagonal
/// entries, or `P_hat_0` when the diagonal is included.
pub fn min_transition_prob(k: &MarkovKernel, include_diagonal: bool) -> Result<f64> {
    let mut best = f64::INFINITY;
    for x in 0..k.n {
        for y in 0..k.n {
            if x == y && !include_diagonal {
                continue;
            }
            let v = k.p[(x, y)];
            if v > 0.0 && v < best {
                best = v;
            }
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::NoPositiveEntry)
    }
}

/// Exact total variation distance `|| p_x^n - pi ||_TV` by matrix powering.
pub fn tv_distance(k: &MarkovKernel, x: usize, steps: usize) -> f64 {
    let dist = step_distribution(k, x, steps);
    0.5 * dist
        .iter()
        .zip(k.pi.iter())
        .map(|(p, q)| (p - q).abs())
        .sum::<f64>()
}

/// Distribution of the chain after `steps` steps started from state `x`.
pub fn step_distribution(k: &MarkovKernel, x: usize, steps: usize) -> DVector<f64> {
    let mut dist = DVector::<f64>::zeros(k.n);
    dist[x] = 1.0;
    for _ in 0..steps {
        dist = (dist.transpose() * &k.p).transpose();
    }
    dist
}
