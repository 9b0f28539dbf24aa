//! Independent ground truth for small cases.
//!
//! * exact `E[I]` and `Var[I]` by enumerating every graph on `n <= 5` nodes
//! * the Poisson-Binomial law of `d_{i(j)} - 1` by iterated convolution
//! * the binomial envelope `C(n-2, k) p^k (1 - p beta)^(n-2-k)` that bounds it
//!
//! The enumeration recomputes degrees and the index sum from the bit
//! pattern itself and shares no code with the sampling path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph_model::{check_pair, ModelError, WeightModel};
use crate::indices::IndexFamily;
use crate::numeric::{compensated_sum, NeumaierSum};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("exhaustive enumeration is limited to n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("empty probability list")]
    Empty,
    #[error("k = {k} is outside 0..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error("need n >= 2, got {0}")]
    TooFewNodes(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub const MAX_ENUMERATION_NODES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactMoments {
    pub n: usize,
    pub graph_count: u64,
    pub expectation: f64,
    pub variance: f64,
    /// Sum of all graph probabilities; 1 up to rounding.
    pub total_probability: f64,
}

/// Exact mean and variance of the index over all `2^(n(n-1)/2)` graphs.
///
/// Graph `code` sets pair `k` (upper-triangular pairs in row-major order)
/// present iff bit `k` of `code` is set.
pub fn enumerate_exact_moments(
    model: &WeightModel,
    family: &IndexFamily,
) -> Result<ExactMoments, OracleError> {
    let n = model.n();
    if n > MAX_ENUMERATION_NODES {
        return Err(OracleError::TooLarge {
            n,
            max: MAX_ENUMERATION_NODES,
        });
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let probs: Vec<f64> = pairs.iter().map(|&(i, j)| model.edge_probability(i, j)).collect();
    let graph_count = 1u64 << pairs.len();

    let mut weights = Vec::with_capacity(graph_count as usize);
    let mut values = Vec::with_capacity(graph_count as usize);
    for code in 0..graph_count {
        let present = |k: usize| code >> k & 1 == 1;
        let mut prob = 1.0;
        let mut degree = [0u32; MAX_ENUMERATION_NODES];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            if present(k) {
                prob *= probs[k];
                degree[i] += 1;
                degree[j] += 1;
            } else {
                prob *= 1.0 - probs[k];
            }
        }
        let index = compensated_sum(
            pairs
                .iter()
                .enumerate()
                .filter(|&(k, _)| present(k))
                .map(|(_, &(i, j))| family.f(f64::from(degree[i]), f64::from(degree[j]))),
        );
        weights.push(prob);
        values.push(index);
    }

    let total_probability = compensated_sum(weights.iter().copied());
    let expectation = compensated_sum(weights.iter().zip(&values).map(|(w, v)| w * v));
    let variance = compensated_sum(
        weights
            .iter()
            .zip(&values)
            .map(|(w, v)| w * (v - expectation) * (v - expectation)),
    );
    Ok(ExactMoments {
        n,
        graph_count,
        expectation,
        variance,
        total_probability,
    })
}

/// Law of a sum of independent Bernoulli variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PBDistribution {
    pub probs: Vec<f64>,
    /// `pmf[k] = P(sum = k)`, `k = 0..=probs.len()`.
    pub pmf: Vec<f64>,
}

impl PBDistribution {
    pub fn mean(&self) -> f64 {
        compensated_sum(self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p))
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.pmf.iter().copied())
    }
}

/// Poisson-Binomial pmf by folding in one Bernoulli at a time.
pub fn pb_pmf(probs: &[f64]) -> Result<PBDistribution, OracleError> {
    if probs.is_empty() {
        return Err(OracleError::Empty);
    }
    if let Some(&bad) = probs.iter().find(|&&q| !(0.0..=1.0).contains(&q)) {
        return Err(OracleError::ProbabilityOutOfRange(bad));
    }
    let mut pmf = Vec::with_capacity(probs.len() + 1);
    pmf.push(1.0);
    for &q in probs {
        pmf.push(0.0);
        for k in (1..pmf.len()).rev() {
            pmf[k] = pmf[k] * (1.0 - q) + pmf[k - 1] * q;
        }
        pmf[0] *= 1.0 - q;
    }
    Ok(PBDistribution {
        probs: probs.to_vec(),
        pmf,
    })
}

fn ln_binomial(m: usize, k: usize) -> f64 {
    let k = k.min(m - k);
    let mut acc = NeumaierSum::new();
    for i in 1..=k {
        acc.add(((m - k + i) as f64 / i as f64).ln());
    }
    acc.value()
}

/// `C(n-2, k) p^k (1 - p beta)^(n-2-k)`, evaluated in log space.
pub fn pb_binomial_bound(n: usize, p: f64, beta: f64, k: usize) -> Result<f64, OracleError> {
    if n < 2 {
        return Err(OracleError::TooFewNodes(n));
    }
    let m = n - 2;
    if k > m {
        return Err(OracleError::KOutOfRange { k, max: m });
    }
    let log = ln_binomial(m, k) + k as f64 * p.ln() + (m - k) as f64 * (-p * beta).ln_1p();
    Ok(log.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub pmf: Vec<f64>,
    pub bound: Vec<f64>,
    /// `bound[k] - pmf[k]`.
    pub margins: Vec<f64>,
    /// `pmf[k] <= bound[k]` for every `k`, up to relative rounding slack.
    pub holds: bool,
    /// Some `k` has a bound strictly above the pmf.
    pub strict_somewhere: bool,
}

/// Relative slack used when comparing the convolution pmf to the envelope.
pub const ENVELOPE_RTOL: f64 = 1e-9;

/// Compares the law of `d_{i(j)} - 1` with its binomial envelope at every `k`.
pub fn check_lemma1_bound(model: &WeightModel, i: usize, j: usize) -> Result<Lemma1Report, OracleError> {
    check_pair(model.n(), i, j)?;
    let probs: Vec<f64> = (0..model.n())
        .filter(|&l| l != i && l != j)
        .map(|l| model.edge_probability(i, l))
        .collect();
    let pmf = if probs.is_empty() {
        vec![1.0]
    } else {
        pb_pmf(&probs)?.pmf
    };
    let bound = (0..pmf.len())
        .map(|k| pb_binomial_bound(model.n(), model.p_n(), model.beta(), k))
        .collect::<Result<Vec<_>, _>>()?;
    let margins: Vec<f64> = bound.iter().zip(&pmf).map(|(b, p)| b - p).collect();
    let holds = pmf
        .iter()
        .zip(&bound)
        .all(|(p, b)| *p <= b * (1.0 + ENVELOPE_RTOL));
    let strict_somewhere = pmf
        .iter()
        .zip(&bound)
        .any(|(p, b)| *b > p * (1.0 + ENVELOPE_RTOL));
    Ok(Lemma1Report {
        pmf,
        bound,
        margins,
        holds,
        strict_somewhere,
    })
}
