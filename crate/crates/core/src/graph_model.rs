//! Heterogeneous Erdős–Rényi weight models and deterministic graph sampling.
//!
//! A [`WeightModel`] fixes the edge probabilities `P(A_ij = 1) = p_n * w_ij`
//! for a symmetric weight matrix with entries in `[beta, 1]`. Sampling is
//! driven by a counter-based generator, so a graph is a pure function of the
//! model and its [`GraphSeed`].
//!
//! Node indices in this API are 0-based. Kernels that are written in terms
//! of 1-based labels (the exponential kernel) convert internally.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::CounterRng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("need at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("edge probability scale p = {0} is outside (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("alpha = {0} is outside (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("kappa = {0} must be finite and non-negative")]
    NegativeKappa(f64),
    #[error("beta = {0} is outside (0, 1]")]
    BetaOutOfRange(f64),
    #[error("weight matrix is not square (row {row} has {len} entries, expected {n})")]
    NotSquare { row: usize, len: usize, n: usize },
    #[error("weight matrix is asymmetric at ({i}, {j}): {a} vs {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("diagonal weight w[{i}][{i}] = {value} is not zero")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("weight w[{i}][{j}] = {value} is outside [beta = {beta}, 1]")]
    WeightOutOfRange {
        i: usize,
        j: usize,
        value: f64,
        beta: f64,
    },
    #[error("node pair ({0}, {0}) is not a pair of distinct nodes")]
    SameNode(usize),
    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("failed to read weight matrix: {0}")]
    Io(String),
    #[error("could not parse weight matrix: {0}")]
    Parse(String),
}

/// Edge-probability scale `p_n` together with the weight matrix `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightModel {
    n: usize,
    p_n: f64,
    beta: f64,
    weights: Vec<f64>,
}

fn check_probability(p: f64) -> Result<(), ModelError> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(ModelError::ProbabilityOutOfRange(p))
    }
}

impl WeightModel {
    /// Homogeneous Erdős–Rényi model: every off-diagonal weight is 1.
    pub fn er(n: usize, p: f64) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::TooFewNodes(n));
        }
        check_probability(p)?;
        let mut weights = vec![1.0; n * n];
        for i in 0..n {
            weights[i * n + i] = 0.0;
        }
        Ok(Self {
            n,
            p_n: p,
            beta: 1.0,
            weights,
        })
    }

    /// The kernel model with `p_n = n^-alpha` and
    /// `w_ij = exp(-kappa i / n) exp(-kappa j / n)` over labels `1..=n`.
    pub fn exp_kernel(n: usize, alpha: f64, kappa: f64) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::TooFewNodes(n));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ModelError::AlphaOutOfRange(alpha));
        }
        if !(kappa >= 0.0 && kappa.is_finite()) {
            return Err(ModelError::NegativeKappa(kappa));
        }
        let p_n = (n as f64).powf(-alpha);
        check_probability(p_n)?;
        let nf = n as f64;
        let decay: Vec<f64> = (1..=n).map(|label| (-kappa * (label as f64 / nf)).exp()).collect();
        let mut weights = vec![0.0; n * n];
        let mut min_weight = 1.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let w = decay[i] * decay[j];
                    weights[i * n + j] = w;
                    min_weight = min_weight.min(w);
                }
            }
        }
        // exp(-kappa)^2 can land one ulp under exp(-2 kappa)
        let beta = (-2.0 * kappa).exp().min(min_weight);
        Ok(Self {
            n,
            p_n,
            beta,
            weights,
        })
    }

    /// Validates a user-supplied weight matrix.
    pub fn from_matrix(p: f64, matrix: &[Vec<f64>], beta: f64) -> Result<Self, ModelError> {
        check_probability(p)?;
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(ModelError::BetaOutOfRange(beta));
        }
        let n = matrix.len();
        if n < 2 {
            return Err(ModelError::TooFewNodes(n));
        }
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != n {
                return Err(ModelError::NotSquare {
                    row,
                    len: r.len(),
                    n,
                });
            }
        }
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            let d = matrix[i][i];
            if d != 0.0 {
                return Err(ModelError::NonzeroDiagonal { i, value: d });
            }
            for j in (i + 1)..n {
                let (a, b) = (matrix[i][j], matrix[j][i]);
                if a != b {
                    return Err(ModelError::Asymmetric { i, j, a, b });
                }
                if !(a >= beta && a <= 1.0) {
                    return Err(ModelError::WeightOutOfRange {
                        i,
                        j,
                        value: a,
                        beta,
                    });
                }
                weights[i * n + j] = a;
                weights[j * n + i] = a;
            }
        }
        Ok(Self {
            n,
            p_n: p,
            beta,
            weights,
        })
    }

    /// Reads a whitespace-separated square matrix, one row per line.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn from_matrix_file(p: f64, path: &Path, beta: f64) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| ModelError::Parse(format!("line {}: bad number {tok:?}", lineno + 1)))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::from_matrix(p, &rows, beta)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p_n(&self) -> f64 {
        self.p_n
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Row `i` of the weight matrix.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    /// Edge probability `p_n * w_ij`.
    #[inline]
    pub fn edge_probability(&self, i: usize, j: usize) -> f64 {
        self.p_n * self.weight(i, j)
    }

    /// The common off-diagonal weight if all weights are equal.
    pub fn homogeneous_weight(&self) -> Option<f64> {
        let w0 = self.weight(0, 1);
        let all_equal = (0..self.n).all(|i| {
            self.row(i)
                .iter()
                .enumerate()
                .all(|(j, &w)| i == j || w == w0)
        });
        all_equal.then_some(w0)
    }

    /// `p_n * w` when the model is a plain Erdős–Rényi graph.
    pub fn homogeneous_probability(&self) -> Option<f64> {
        self.homogeneous_weight().map(|w| self.p_n * w)
    }

    pub(crate) fn check_pair(&self, i: usize, j: usize) -> Result<(), ModelError> {
        check_pair(self.n, i, j)
    }
}

pub(crate) fn check_pair(n: usize, i: usize, j: usize) -> Result<(), ModelError> {
    for node in [i, j] {
        if node >= n {
            return Err(ModelError::NodeOutOfRange { node, n });
        }
    }
    if i == j {
        return Err(ModelError::SameNode(i));
    }
    Ok(())
}

/// Seed of one replicate: the master seed keys the generator, the
/// replicate index selects an independent counter stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphSeed {
    pub master_seed: u64,
    pub replicate_index: u64,
}

impl GraphSeed {
    pub fn new(master_seed: u64, replicate_index: u64) -> Self {
        Self {
            master_seed,
            replicate_index,
        }
    }
}

/// One realization of a random graph as a dense symmetric adjacency matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct SampledGraph {
    n: usize,
    adjacency: Vec<bool>,
}

impl fmt::Debug for SampledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledGraph")
            .field("n", &self.n)
            .field("edges", &self.edge_count())
            .finish()
    }
}

impl SampledGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adjacency: vec![false; n * n],
        }
    }

    /// Builds a graph from 0-based edges. Duplicates collapse to one edge.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            check_pair(n, u, v)?;
            g.set_edge(u, v, true);
        }
        Ok(g)
    }

    #[inline]
    fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        self.adjacency[i * self.n + j] = present;
        self.adjacency[j * self.n + i] = present;
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[bool] {
        &self.adjacency[i * self.n..(i + 1) * self.n]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&a| a).count() / 2
    }

    /// Unordered edges as `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| self.has_edge(i, j).then_some((i, j)))
        })
    }

    /// Degree sequence: row sums of the adjacency matrix.
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n)
            .map(|i| self.row(i).iter().filter(|&&a| a).count())
            .collect()
    }

    /// `d_{i(j)} = 1 + #{l not in {i, j} : A_il = 1}`.
    pub fn local_degree(&self, i: usize, j: usize) -> Result<usize, ModelError> {
        check_pair(self.n, i, j)?;
        let neighbours = self
            .row(i)
            .iter()
            .enumerate()
            .filter(|&(l, &a)| a && l != j)
            .count();
        Ok(1 + neighbours)
    }

    /// The graph with node `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n, "permutation length must equal n");
        let mut g = Self::empty(self.n);
        for (i, j) in self.edges() {
            g.set_edge(perm[i], perm[j], true);
        }
        g
    }

    pub fn is_symmetric_loopless(&self) -> bool {
        (0..self.n).all(|i| {
            !self.has_edge(i, i) && ((i + 1)..self.n).all(|j| self.has_edge(i, j) == self.has_edge(j, i))
        })
    }
}

/// Draws one graph. Pair `(i, j)`, `i < j`, is present iff the uniform at
/// counter `(replicate_index, i * n + j)` falls below `p_n * w_ij`.
pub fn sample_graph(model: &WeightModel, seed: GraphSeed) -> SampledGraph {
    let n = model.n();
    let rng = CounterRng::new(seed.master_seed);
    let mut g = SampledGraph::empty(n);
    for i in 0..n {
        let weights = model.row(i);
        for j in (i + 1)..n {
            let u = rng.uniform(seed.replicate_index, (i * n + j) as u64);
            if u < model.p_n() * weights[j] {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}
