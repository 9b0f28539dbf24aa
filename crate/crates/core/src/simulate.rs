//! Monte Carlo engine: replicated index sampling, standardization, normality
//! diagnostics, the leading-term check and the Randić phase sweep.
//!
//! Replicate `r` always uses seed `(master_seed, r)`, and results are
//! collected in replicate order, so every output here is a pure function of
//! its configuration regardless of the worker count.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph_model::{sample_graph, GraphSeed, ModelError, SampledGraph, WeightModel};
use crate::indices::{compute_index, compute_indices, IndexFamily};
use crate::moments::{
    er_forgotten_expectation_exact, er_hyper_zagreb_expectation_exact, er_randic_critical_sigma_sq,
    er_randic_sigma_sq,
    sigma_sq_general, MomentsError, TheoreticalMoments, VarianceBranch, CRITICAL_WARNING_TOL,
};
use crate::numeric::NeumaierSum;
use crate::stats::{
    correlation, fit_log_slope, ks_critical_5pct, ks_statistic, mean, sample_variance,
    standardize, summary_moments, StatsError, SummaryMoments,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Moments(#[from] MomentsError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("replicate count must be positive")]
    NoReplicates,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("failed to build worker pool: {0}")]
    ThreadPool(String),
}

pub const NO_HETEROGENEOUS_CRITICAL_SIGMA: &str =
    "no theoretical sigma for heterogeneous critical case; reporting empirical variance only";
pub const SINGLE_REPLICATE: &str =
    "variance statistics unavailable with a single replicate";
pub const CRITICAL_SUBSTITUTED: &str =
    "Randić exponent tau = -1/2 on a homogeneous graph: the critical quadratic-term variance replaces the linear-term variance";

/// How the edge-probability scale is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeScale {
    /// `p` directly.
    P(f64),
    /// `p = n^-alpha`.
    AlphaP(f64),
}

impl EdgeScale {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            EdgeScale::P(p) => p,
            EdgeScale::AlphaP(alpha) => (n as f64).powf(-alpha),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Er { n: usize, scale: EdgeScale },
    ExpKernel { n: usize, alpha: f64, kappa: f64 },
    Matrix { path: PathBuf, p: f64, beta: f64 },
}

impl ModelSpec {
    pub fn build(&self) -> Result<WeightModel, ModelError> {
        match self {
            ModelSpec::Er { n, scale } => WeightModel::er(*n, scale.resolve(*n)),
            ModelSpec::ExpKernel { n, alpha, kappa } => WeightModel::exp_kernel(*n, *alpha, *kappa),
            ModelSpec::Matrix { path, p, beta } => WeightModel::from_matrix_file(*p, path, *beta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterMode {
    #[default]
    EmpiricalMean,
    /// Center by the leading-order expectation approximation.
    TheoreticalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// Linear-term variance; on homogeneous graphs with `tau = -1/2` the
    /// critical variance is substituted.
    #[default]
    Linear,
    /// Critical Randić variance (homogeneous graphs, `tau = -1/2` only).
    RandicCritical,
    /// Sample standard deviation of the replicates.
    EmpiricalSd,
}

/// Which theoretical variance a report used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaSource {
    Linear,
    RandicCritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityThresholds {
    pub max_abs_skewness: f64,
    pub max_abs_excess_kurtosis: f64,
}

impl Default for NormalityThresholds {
    fn default() -> Self {
        Self {
            max_abs_skewness: 0.15,
            max_abs_excess_kurtosis: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub family: IndexFamily,
    pub replicates: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub center: CenterMode,
    #[serde(default)]
    pub scale: ScaleMode,
    #[serde(default)]
    pub thresholds: NormalityThresholds,
    /// Worker cap; does not affect results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(model: ModelSpec, family: IndexFamily, replicates: usize, master_seed: u64) -> Self {
        Self {
            model,
            family,
            replicates,
            master_seed,
            center: CenterMode::default(),
            scale: ScaleMode::default(),
            thresholds: NormalityThresholds::default(),
            threads: None,
        }
    }
}

/// Verdict of the finite-sample normality checks. The thresholds are
/// calibration policy: the limit theorem carries no convergence rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityVerdict {
    pub ks_critical: f64,
    pub ks_pass: bool,
    pub skewness_pass: bool,
    pub kurtosis_pass: bool,
    pub normal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub raw_values: Vec<f64>,
    pub standardized: Vec<f64>,
    pub summary: SummaryMoments,
    pub ks_statistic: Option<f64>,
    /// Theoretical variance available for this model and family.
    pub theory_sigma_sq: Option<f64>,
    pub theory_source: Option<SigmaSource>,
    /// Variance of the linear term, even where it is not the right normalization.
    pub linear_sigma_sq: Option<f64>,
    pub expectation_approx: f64,
    /// Closed-form expectation when one exists (homogeneous graphs).
    pub exact_expectation: Option<f64>,
    pub c1_ratio: Option<f64>,
    pub center: f64,
    /// Scale actually used to standardize.
    pub scale: Option<f64>,
    pub variance_ratio: Option<f64>,
    pub normality: Option<NormalityVerdict>,
    pub warnings: Vec<String>,
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, SimError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    builder.build().map_err(|e| SimError::ThreadPool(e.to_string()))
}

/// Evaluates `work(r)` for `r in 0..replicates`, in replicate order.
pub fn map_replicates<T, F>(replicates: usize, threads: Option<usize>, work: F) -> Result<Vec<T>, SimError>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    let pool = pool(threads)?;
    Ok(pool.install(|| (0..replicates as u64).into_par_iter().map(&work).collect()))
}

/// Theoretical variance of the index, choosing the critical Randić formula
/// where the linear term degenerates.
pub struct TheorySelection {
    pub moments: Option<TheoreticalMoments>,
    pub sigma_sq: Option<f64>,
    pub source: Option<SigmaSource>,
    pub exact_expectation: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn select_theory(model: &WeightModel, family: &IndexFamily) -> Result<TheorySelection, SimError> {
    let mut warnings = Vec::new();
    let moments = match sigma_sq_general(model, family) {
        Ok(m) => Some(m),
        Err(MomentsError::ZeroVariance) => {
            warnings.push("linear-term variance is zero".to_string());
            None
        }
        Err(e) => return Err(e.into()),
    };
    let homogeneous = model.homogeneous_probability();
    let critical = family.is_randic_near(CRITICAL_WARNING_TOL);
    let (sigma_sq, source) = if critical {
        if let Some(m) = &moments {
            warnings.extend(m.warnings());
        }
        match homogeneous {
            Some(p) if model.n() >= 3 => {
                warnings.push(CRITICAL_SUBSTITUTED.to_string());
                (Some(er_randic_critical_sigma_sq(model.n(), p)), Some(SigmaSource::RandicCritical))
            }
            _ => {
                warnings.push(NO_HETEROGENEOUS_CRITICAL_SIGMA.to_string());
                (None, None)
            }
        }
    } else {
        (moments.as_ref().map(|m| m.sigma_sq), moments.as_ref().map(|_| SigmaSource::Linear))
    };
    let exact_expectation = homogeneous.and_then(|p| match family {
        IndexFamily::HyperZagreb => Some(er_hyper_zagreb_expectation_exact(model.n(), p)),
        IndexFamily::Forgotten => Some(er_forgotten_expectation_exact(model.n(), p)),
        _ => None,
    });
    Ok(TheorySelection {
        moments,
        sigma_sq,
        source,
        exact_expectation,
        warnings,
    })
}

/// Samples `config.replicates` graphs and summarizes the standardized index.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, SimError> {
    if config.replicates == 0 {
        return Err(SimError::NoReplicates);
    }
    let model = config.model.build()?;
    let family = config.family;
    let theory = select_theory(&model, &family)?;
    let mut warnings = theory.warnings.clone();

    if config.scale == ScaleMode::RandicCritical && theory.source != Some(SigmaSource::RandicCritical) {
        return Err(SimError::InvalidConfig(
            "the critical Randić scale needs tau = -1/2 on a homogeneous graph".to_string(),
        ));
    }

    let raw_values = map_replicates(config.replicates, config.threads, |r| {
        compute_index(&sample_graph(&model, GraphSeed::new(config.master_seed, r)), &family)
    })?;

    let summary = summary_moments(&raw_values)?;
    if raw_values.len() < 2 {
        warnings.push(SINGLE_REPLICATE.to_string());
    }

    let expectation_approx = theory
        .moments
        .as_ref()
        .map(|m| m.expectation_approx)
        .unwrap_or_else(|| crate::moments::expectation_approx(&model, &family));

    let scale = match config.scale {
        ScaleMode::Linear | ScaleMode::RandicCritical => match theory.sigma_sq {
            Some(s) => Some(s.sqrt()),
            None => {
                warnings.push("falling back to the sample standard deviation for scaling".to_string());
                summary.variance.filter(|v| *v > 0.0).map(f64::sqrt)
            }
        },
        ScaleMode::EmpiricalSd => summary.variance.filter(|v| *v > 0.0).map(f64::sqrt),
    };

    let center = match config.center {
        CenterMode::EmpiricalMean => summary.mean,
        CenterMode::TheoreticalApprox => {
            let mean_degree = (model.n() - 1) as f64 * mean_edge_probability(&model);
            if let Some(s) = scale {
                warnings.push(format!(
                    "theoretical centering bias is of order {:.3e} standard deviations",
                    expectation_approx.abs() / mean_degree / s
                ));
            }
            expectation_approx
        }
    };

    let standardized = match scale {
        Some(s) => standardize(&raw_values, center, s)?,
        None => {
            warnings.push("no positive scale available; standardized samples omitted".to_string());
            Vec::new()
        }
    };

    let has_spread = raw_values.len() >= 2 && !standardized.is_empty();
    let ks = has_spread.then(|| ks_statistic(&standardized));
    let variance_ratio = match (summary.variance, theory.sigma_sq) {
        (Some(v), Some(s)) if raw_values.len() >= 2 => Some(v / s),
        _ => None,
    };
    let normality = ks.map(|d| {
        let std_summary = summary_moments(&standardized).ok();
        let skew = std_summary.and_then(|s| s.skewness);
        let kurt = std_summary.and_then(|s| s.excess_kurtosis);
        let ks_critical = ks_critical_5pct(raw_values.len());
        let ks_pass = d <= ks_critical;
        let skewness_pass = skew.is_some_and(|s| s.abs() <= config.thresholds.max_abs_skewness);
        let kurtosis_pass =
            kurt.is_some_and(|k| k.abs() <= config.thresholds.max_abs_excess_kurtosis);
        NormalityVerdict {
            ks_critical,
            ks_pass,
            skewness_pass,
            kurtosis_pass,
            normal: ks_pass && skewness_pass && kurtosis_pass,
        }
    });

    Ok(ExperimentReport {
        config: config.clone(),
        raw_values,
        standardized,
        summary,
        ks_statistic: ks,
        theory_sigma_sq: theory.sigma_sq,
        theory_source: theory.source,
        linear_sigma_sq: theory.moments.as_ref().map(|m| m.sigma_sq),
        expectation_approx,
        exact_expectation: theory.exact_expectation,
        c1_ratio: theory.moments.as_ref().map(|m| m.c1_ratio),
        center,
        scale,
        variance_ratio,
        normality,
        warnings,
    })
}

fn mean_edge_probability(model: &WeightModel) -> f64 {
    let n = model.n();
    let mut acc = NeumaierSum::new();
    for i in 0..n {
        for j in (i + 1)..n {
            acc.add(model.edge_probability(i, j));
        }
    }
    acc.value() / (n * (n - 1) / 2) as f64
}

/// The normalized linear statistic
/// `sum_{i<j} (a_ij + a_ji)(A_ij - p_n w_ij) / sigma_n` on one graph.
pub fn leading_term_z(graph: &SampledGraph, model: &WeightModel, moments: &TheoreticalMoments) -> f64 {
    let n = model.n();
    let mut acc = NeumaierSum::new();
    for i in 0..n {
        let row = graph.row(i);
        for j in (i + 1)..n {
            let centered = f64::from(u8::from(row[j])) - model.edge_probability(i, j);
            acc.add((moments.a(i, j) + moments.a(j, i)) * centered);
        }
    }
    acc.value() / moments.sigma_sq.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadingTermStudy {
    pub index_values: Vec<f64>,
    pub z_values: Vec<f64>,
    pub z_mean: f64,
    /// Correlation between `Z_n` and the empirically standardized index.
    pub correlation: f64,
}

/// Pairs each replicate's index with its leading linear term.
pub fn leading_term_study(
    model: &WeightModel,
    family: &IndexFamily,
    replicates: usize,
    master_seed: u64,
    threads: Option<usize>,
) -> Result<LeadingTermStudy, SimError> {
    let moments = sigma_sq_general(model, family)?;
    let pairs = map_replicates(replicates, threads, |r| {
        let g = sample_graph(model, GraphSeed::new(master_seed, r));
        (compute_index(&g, family), leading_term_z(&g, model, &moments))
    })?;
    let (index_values, z_values): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let center = mean(&index_values)?;
    let sd = sample_variance(&index_values)?.sqrt();
    let standardized = standardize(&index_values, center, sd)?;
    Ok(LeadingTermStudy {
        z_mean: mean(&z_values)?,
        correlation: correlation(&z_values, &standardized)?,
        index_values,
        z_values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweepRow {
    pub tau: f64,
    pub n: usize,
    pub p_n: f64,
    pub empirical_variance: f64,
    pub theory_sigma_sq: f64,
    pub branch: VarianceBranch,
    /// Slope of `ln(empirical variance)` against `ln n` over this tau's rows.
    pub fitted_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub tau: f64,
    pub fitted: f64,
    pub intercept: f64,
    pub theoretical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweep {
    pub alpha: f64,
    pub replicates: usize,
    pub master_seed: u64,
    pub rows: Vec<PhaseSweepRow>,
    pub fits: Vec<ExponentFit>,
}

/// Growth exponent in `n` of the general Randić variance with `p = n^-alpha`:
/// `n (np)^(4 tau + 1)` off the critical point, `n / (np)^2` at `tau = -1/2`.
pub fn theoretical_variance_exponent(tau: f64, alpha: f64) -> f64 {
    if (tau + 0.5).abs() < crate::moments::CRITICAL_BRANCH_TOL {
        1.0 - 2.0 * (1.0 - alpha)
    } else {
        1.0 + (4.0 * tau + 1.0) * (1.0 - alpha)
    }
}

pub const DEFAULT_SWEEP_TAUS: [f64; 5] = [-0.8, -0.5, -0.2, 0.5, 1.0];
pub const DEFAULT_SWEEP_NS: [usize; 4] = [200, 400, 800, 1600];
pub const DEFAULT_SWEEP_ALPHA: f64 = 0.3;
pub const DEFAULT_SWEEP_REPLICATES: usize = 400;

/// Empirical variance of the general Randić index over a `(tau, n)` grid on
/// `G(n, n^-alpha)`, with a log-log exponent fit per tau. Every tau shares
/// the same sampled graphs for a given `(n, r)`.
pub fn phase_sweep(
    taus: &[f64],
    ns: &[usize],
    alpha: f64,
    replicates: usize,
    master_seed: u64,
    threads: Option<usize>,
) -> Result<PhaseSweep, SimError> {
    if ns.len() < 2 {
        return Err(SimError::InvalidConfig(
            "need at least two n values to fit an exponent".to_string(),
        ));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SimError::InvalidConfig("n grid must be strictly increasing".to_string()));
    }
    if taus.is_empty() {
        return Err(SimError::InvalidConfig("tau grid is empty".to_string()));
    }
    if replicates < 2 {
        return Err(SimError::InvalidConfig("need at least two replicates".to_string()));
    }
    let families = taus
        .iter()
        .map(|&t| IndexFamily::general_randic(t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;

    // variances[n_idx][tau_idx]
    let mut variances = Vec::with_capacity(ns.len());
    let mut probabilities = Vec::with_capacity(ns.len());
    for &n in ns {
        let p = EdgeScale::AlphaP(alpha).resolve(n);
        let model = WeightModel::er(n, p)?;
        let per_replicate = map_replicates(replicates, threads, |r| {
            compute_indices(&sample_graph(&model, GraphSeed::new(master_seed, r)), &families)
        })?;
        let per_tau = (0..taus.len())
            .map(|t| {
                let column: Vec<f64> = per_replicate.iter().map(|v| v[t]).collect();
                sample_variance(&column)
            })
            .collect::<Result<Vec<_>, _>>()?;
        variances.push(per_tau);
        probabilities.push(p);
    }

    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for (t, &tau) in taus.iter().enumerate() {
        let ys: Vec<f64> = variances.iter().map(|v| v[t]).collect();
        let (fitted, intercept) = fit_log_slope(&xs, &ys)?;
        fits.push(ExponentFit {
            tau,
            fitted,
            intercept,
            theoretical: theoretical_variance_exponent(tau, alpha),
        });
        for (k, &n) in ns.iter().enumerate() {
            let theory = er_randic_sigma_sq(n, probabilities[k], tau)?;
            rows.push(PhaseSweepRow {
                tau,
                n,
                p_n: probabilities[k],
                empirical_variance: ys[k],
                theory_sigma_sq: theory.sigma_sq,
                branch: theory.branch,
                fitted_exponent: fitted,
            });
        }
    }
    Ok(PhaseSweep {
        alpha,
        replicates,
        master_seed,
        rows,
        fits,
    })
}
