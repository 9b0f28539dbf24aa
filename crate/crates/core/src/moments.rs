//! Normalizing variance, expectation approximation and related quantities
//! for a topological index on a heterogeneous random graph.
//!
//! Everything here is computed by exact finite-n summation over the weight
//! matrix:
//!
//! * local mean degree `w_{i(k)} = 1 + sum_{l not in {i,k}} p_n w_il`
//! * linear coefficient
//!   `a_ij = f(w_{i(j)}, w_{j(i)}) / 2
//!         + sum_{l not in {i,j}} p_n w_il [f_x + f_y](w_{i(l)}, w_{l(i)}) / 2`
//! * `sigma_n^2 = sum_{i<j} (a_ij + a_ji)^2 p_n w_ij (1 - p_n w_ij)`
//! * `E[I_n] ~ sum_{i<j} p_n w_ij f(w_{i(j)}, w_{j(i)})`
//!
//! For the Randić index (`tau = -1/2`) the linear coefficients nearly cancel
//! and `sigma_n^2` above has the wrong order; [`er_randic_sigma_sq`] holds
//! the replacement for homogeneous graphs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph_model::{ModelError, WeightModel};
use crate::indices::IndexFamily;
use crate::numeric::NeumaierSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentsError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("normalizing variance is zero")]
    ZeroVariance,
    #[error("kappa = {0} must be non-negative")]
    NegativeKappa(f64),
    #[error("general Randić exponent must be non-zero")]
    ZeroTau,
    #[error("need n >= {min}, got {n}")]
    TooFewNodes { n: usize, min: usize },
    #[error("edge probability p = {0} is outside (0, 1)")]
    ProbabilityOutOfRange(f64),
}

/// `|tau + 1/2|` below this selects the critical variance branch.
pub const CRITICAL_BRANCH_TOL: f64 = 1e-12;

/// `|tau + 1/2|` below this marks the linear-term variance as unreliable.
pub const CRITICAL_WARNING_TOL: f64 = 1e-6;

pub const CRITICAL_TAU_WARNING: &str =
    "linear-term variance has the wrong order for the Randić exponent tau = -1/2 \
     and is not a valid normalization";

/// Linearization coefficients and the derived theoretical moments.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoreticalMoments {
    n: usize,
    /// Variance of the linear (leading) term.
    pub sigma_sq: f64,
    pub expectation_approx: f64,
    /// Row-major `a_ij`; not symmetric in general. Diagonal is zero.
    a: Vec<f64>,
    pub c1_ratio: f64,
    /// Set when the family is within [`CRITICAL_WARNING_TOL`] of the Randić
    /// exponent, where `sigma_sq` is not the right normalization.
    pub critical_tau: bool,
}

impl TheoreticalMoments {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn warnings(&self) -> Vec<String> {
        if self.critical_tau {
            vec![CRITICAL_TAU_WARNING.to_string()]
        } else {
            Vec::new()
        }
    }

    /// `sum_{i<j} (a_ij + a_ji)^2 p_n w_ij (1 - p_n w_ij)` from the stored coefficients.
    pub fn recompute_sigma_sq(&self, model: &WeightModel) -> f64 {
        linear_variance(model, &self.a)
    }
}

/// `w_{i(j)}` by direct summation.
pub fn local_mean_degree(model: &WeightModel, i: usize, j: usize) -> Result<f64, MomentsError> {
    model.check_pair(i, j)?;
    Ok(local_mean_degree_direct(model, i, j))
}

fn local_mean_degree_direct(model: &WeightModel, i: usize, k: usize) -> f64 {
    let mut acc = NeumaierSum::new();
    acc.add(1.0);
    for (l, &w) in model.row(i).iter().enumerate() {
        if l != i && l != k {
            acc.add(model.p_n() * w);
        }
    }
    acc.value()
}

/// `a_ij` by direct summation, `O(n^2)` per coefficient.
pub fn coefficient_a(
    model: &WeightModel,
    family: &IndexFamily,
    i: usize,
    j: usize,
) -> Result<f64, MomentsError> {
    model.check_pair(i, j)?;
    Ok(coefficient_direct(model, family, i, j, &|a, b| {
        local_mean_degree_direct(model, a, b)
    }))
}

fn coefficient_direct(
    model: &WeightModel,
    family: &IndexFamily,
    i: usize,
    j: usize,
    local: &dyn Fn(usize, usize) -> f64,
) -> f64 {
    let mut inner = NeumaierSum::new();
    for l in 0..model.n() {
        if l == i || l == j {
            continue;
        }
        let (x, y) = (local(i, l), local(l, i));
        inner.add(model.edge_probability(i, l) * (family.fx(x, y) + family.fy(x, y)));
    }
    0.5 * family.f(local(i, j), local(j, i)) + 0.5 * inner.value()
}

fn row_sums(model: &WeightModel) -> Vec<f64> {
    (0..model.n())
        .map(|i| crate::numeric::compensated_sum(model.row(i).iter().copied()))
        .collect()
}

fn linear_variance(model: &WeightModel, a: &[f64]) -> f64 {
    let n = model.n();
    let mut acc = NeumaierSum::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = a[i * n + j] + a[j * n + i];
            let q = model.edge_probability(i, j);
            acc.add(s * s * q * (1.0 - q));
        }
    }
    acc.value()
}

fn finish(
    model: &WeightModel,
    family: &IndexFamily,
    a: Vec<f64>,
    expectation_approx: f64,
) -> Result<TheoreticalMoments, MomentsError> {
    let sigma_sq = linear_variance(model, &a);
    if !(sigma_sq > 0.0) {
        return Err(MomentsError::ZeroVariance);
    }
    let mut m = TheoreticalMoments {
        n: model.n(),
        sigma_sq,
        expectation_approx,
        a,
        c1_ratio: 0.0,
        critical_tau: family.is_randic_near(CRITICAL_WARNING_TOL),
    };
    m.c1_ratio = assumption_c1_ratio(&m, model)?;
    Ok(m)
}

/// All theoretical moments in `O(n^2)`, using cached weight row sums so
/// that each inner sum over `l` becomes a row total minus one term.
pub fn sigma_sq_general(
    model: &WeightModel,
    family: &IndexFamily,
) -> Result<TheoreticalMoments, MomentsError> {
    let n = model.n();
    let p = model.p_n();
    let sums = row_sums(model);
    let local = |i: usize, k: usize| 1.0 + p * (sums[i] - model.weight(i, k));

    let mut a = vec![0.0; n * n];
    let mut g = vec![0.0; n];
    let mut expectation = NeumaierSum::new();
    for i in 0..n {
        let mut total = NeumaierSum::new();
        for l in 0..n {
            if l == i {
                g[l] = 0.0;
                continue;
            }
            let (x, y) = (local(i, l), local(l, i));
            g[l] = model.edge_probability(i, l) * (family.fx(x, y) + family.fy(x, y));
            total.add(g[l]);
        }
        let total = total.value();
        for j in 0..n {
            if j == i {
                continue;
            }
            let fval = family.f(local(i, j), local(j, i));
            a[i * n + j] = 0.5 * fval + 0.5 * (total - g[j]);
            if j > i {
                expectation.add(model.edge_probability(i, j) * fval);
            }
        }
    }
    finish(model, family, a, expectation.value())
}

/// Reference `O(n^3)` evaluation with every local mean degree and inner
/// sum computed directly. Used to cross-check [`sigma_sq_general`].
pub fn sigma_sq_reference(
    model: &WeightModel,
    family: &IndexFamily,
) -> Result<TheoreticalMoments, MomentsError> {
    let n = model.n();
    let mut local = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            if i != k {
                local[i * n + k] = local_mean_degree_direct(model, i, k);
            }
        }
    }
    let lookup = |i: usize, k: usize| local[i * n + k];
    let mut a = vec![0.0; n * n];
    let mut expectation = NeumaierSum::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a[i * n + j] = coefficient_direct(model, family, i, j, &lookup);
            }
            if j > i {
                expectation.add(model.edge_probability(i, j) * family.f(lookup(i, j), lookup(j, i)));
            }
        }
    }
    finish(model, family, a, expectation.value())
}

/// Leading factor of the expectation approximation,
/// `sum_{i<j} p_n w_ij f(w_{i(j)}, w_{j(i)})`.
pub fn expectation_approx(model: &WeightModel, family: &IndexFamily) -> f64 {
    let n = model.n();
    let p = model.p_n();
    let sums = row_sums(model);
    let local = |i: usize, k: usize| 1.0 + p * (sums[i] - model.weight(i, k));
    let mut acc = NeumaierSum::new();
    for i in 0..n {
        for j in (i + 1)..n {
            acc.add(model.edge_probability(i, j) * family.f(local(i, j), local(j, i)));
        }
    }
    acc.value()
}

/// Finite-n diagnostic `sum_{i<j} (a_ij + a_ji)^4 p_n / sigma_n^4`.
/// Its decay along a growing `n` grid is what the fourth-moment condition
/// asks for.
pub fn assumption_c1_ratio(
    moments: &TheoreticalMoments,
    model: &WeightModel,
) -> Result<f64, MomentsError> {
    if !(moments.sigma_sq > 0.0) {
        return Err(MomentsError::ZeroVariance);
    }
    let n = model.n();
    let mut acc = NeumaierSum::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = moments.a(i, j) + moments.a(j, i);
            acc.add(s * s * s * s);
        }
    }
    Ok(acc.value() * model.p_n() / (moments.sigma_sq * moments.sigma_sq))
}

/// `c(kappa) = (1 - e^-kappa) / kappa`, `c(0) = 1`.
pub fn c_kappa(kappa: f64) -> Result<f64, MomentsError> {
    if !(kappa >= 0.0) {
        return Err(MomentsError::NegativeKappa(kappa));
    }
    if kappa < 1e-6 {
        Ok(1.0 - kappa / 2.0 + kappa * kappa / 6.0)
    } else {
        Ok(-(-kappa).exp_m1() / kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceBranch {
    /// `tau = -1/2`: quadratic-term variance.
    Critical,
    /// Any other `tau`: leading linear-term variance.
    Regular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandicVarianceBranch {
    pub tau: f64,
    pub branch: VarianceBranch,
    pub sigma_sq: f64,
}

/// Variance of the general Randić index on a homogeneous Erdős–Rényi graph.
///
/// Critical (`tau = -1/2`):
/// `n(n-1)(n-2) p^2 (1-p)^2 / (32 (1 + (n-2)p)^4)`.
///
/// Regular: the leading term `(1+2 tau)^2 / 2 * n(n-1) p (1 + (n-2)p)^(4 tau)`;
/// the true variance differs from it by a `1 + O(1/(np) + p)` factor.
pub fn er_randic_sigma_sq(n: usize, p: f64, tau: f64) -> Result<RandicVarianceBranch, MomentsError> {
    if tau == 0.0 {
        return Err(MomentsError::ZeroTau);
    }
    if n < 3 {
        return Err(MomentsError::TooFewNodes { n, min: 3 });
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(MomentsError::ProbabilityOutOfRange(p));
    }
    let nf = n as f64;
    let mean_local = 1.0 + (nf - 2.0) * p;
    let (branch, sigma_sq) = if (tau + 0.5).abs() < CRITICAL_BRANCH_TOL {
        (VarianceBranch::Critical, er_randic_critical_sigma_sq(n, p))
    } else {
        let c = 1.0 + 2.0 * tau;
        (
            VarianceBranch::Regular,
            c * c / 2.0 * nf * (nf - 1.0) * p * mean_local.powf(4.0 * tau),
        )
    };
    Ok(RandicVarianceBranch {
        tau,
        branch,
        sigma_sq,
    })
}

/// Critical-branch Randić variance on `G(n, p)`, the variance of the
/// quadratic term that dominates when the linear coefficients cancel.
pub fn er_randic_critical_sigma_sq(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let w = 1.0 + (nf - 2.0) * p;
    let q = 1.0 - p;
    nf * (nf - 1.0) * (nf - 2.0) * p * p * q * q / (32.0 * w.powi(4))
}

/// Exact `E[hyper-Zagreb]` on `G(n, p)`.
pub fn er_hyper_zagreb_expectation_exact(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let falling3 = nf * (nf - 1.0) * (nf - 2.0);
    falling3 * (2.0 * nf - 5.0) * p.powi(3) + 5.0 * falling3 * p * p + 2.0 * nf * (nf - 1.0) * p
}

/// Exact `E[forgotten index]` on `G(n, p)`.
pub fn er_forgotten_expectation_exact(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let falling3 = nf * (nf - 1.0) * (nf - 2.0);
    falling3 * (nf - 3.0) * p.powi(3) + 3.0 * falling3 * p * p + nf * (nf - 1.0) * p
}

/// Leading-order `E[inverse sum indeg]` on `G(n, p)`: `n(n-1)(n-2) p^2 / 4`.
pub fn er_isi_expectation_approx(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    nf * (nf - 1.0) * (nf - 2.0) * p * p / 4.0
}
