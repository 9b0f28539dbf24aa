//! Degree-based topological indices of heterogeneous Erdős–Rényi graphs.
//!
//! Sampling, index evaluation, first- and second-order theory, Monte Carlo
//! experiments and small-case exact oracles.

pub mod graph_model;
pub mod indices;
pub mod moments;
pub mod numeric;
pub mod oracle;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use graph_model::{sample_graph, GraphSeed, ModelError, SampledGraph, WeightModel};
pub use indices::{compute_index, compute_indices, IndexError, IndexFamily};
pub use moments::{MomentsError, TheoreticalMoments, VarianceBranch};
pub use oracle::{check_lemma1_bound, enumerate_exact_moments, pb_pmf, ExactMoments, OracleError};
pub use simulate::{run_experiment, ExperimentConfig, ExperimentReport, SimError};
