//! JSON documents written by the CLI.

use serde::{Deserialize, Serialize};

use topix::graph_model::WeightModel;
use topix::indices::IndexFamily;
use topix::moments::{er_randic_sigma_sq, VarianceBranch};
use topix::oracle::ExactMoments;
use topix::simulate::{
    select_theory, CenterMode, ExperimentReport, ModelSpec, ScaleMode, SigmaSource, SimError,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Calibration note attached to every normality verdict.
pub const KS_POLICY_NOTE: &str =
    "normality thresholds are calibration policy: the limit theorem states no convergence rate";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelSpec,
    pub family: IndexFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<CenterMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<ScaleMode>,
}

/// Closed-form general Randić variance on a homogeneous graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormRandic {
    pub tau: f64,
    pub branch: VarianceBranch,
    pub sigma_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheorySection {
    /// Variance used for normalization; absent where no formula applies.
    pub sigma_sq: Option<f64>,
    /// Which formula `sigma_sq` came from.
    pub branch: Option<SigmaSource>,
    pub linear_sigma_sq: Option<f64>,
    pub expectation_approx: f64,
    pub exact_expectation: Option<f64>,
    pub c1_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form_randic: Option<ClosedFormRandic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSection {
    pub replicates: usize,
    pub mean: f64,
    pub variance: Option<f64>,
    pub variance_ratio: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub ks_statistic: Option<f64>,
    pub ks_critical: Option<f64>,
    pub normal: Option<bool>,
    pub center: f64,
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub config: RunConfig,
    pub theory: TheorySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empirical: Option<EmpiricalSection>,
    pub warnings: Vec<String>,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDocument {
    pub config: RunConfig,
    pub exact: ExactMoments,
    pub version: String,
}

fn finite(x: Option<f64>) -> Option<f64> {
    x.filter(|v| v.is_finite())
}

fn closed_form_randic(model: &WeightModel, family: &IndexFamily) -> Option<ClosedFormRandic> {
    let IndexFamily::GeneralRandic { tau } = *family else {
        return None;
    };
    let p = model.homogeneous_probability()?;
    let b = er_randic_sigma_sq(model.n(), p, tau).ok()?;
    finite(Some(b.sigma_sq)).map(|sigma_sq| ClosedFormRandic {
        tau,
        branch: b.branch,
        sigma_sq,
    })
}

/// Theory-only report for `spec` and `family`.
pub fn theory_document(spec: &ModelSpec, family: &IndexFamily) -> Result<ReportDocument, SimError> {
    let model = spec.build()?;
    let theory = select_theory(&model, family)?;
    let expectation_approx = match &theory.moments {
        Some(m) => m.expectation_approx,
        None => topix::moments::expectation_approx(&model, family),
    };
    Ok(ReportDocument {
        config: RunConfig {
            model: spec.clone(),
            family: *family,
            replicates: None,
            master_seed: None,
            center: None,
            scale: None,
        },
        theory: TheorySection {
            sigma_sq: finite(theory.sigma_sq),
            branch: theory.source,
            linear_sigma_sq: finite(theory.moments.as_ref().map(|m| m.sigma_sq)),
            expectation_approx,
            exact_expectation: finite(theory.exact_expectation),
            c1_ratio: finite(theory.moments.as_ref().map(|m| m.c1_ratio)),
            closed_form_randic: closed_form_randic(&model, family),
        },
        empirical: None,
        warnings: theory.warnings,
        version: VERSION.to_string(),
    })
}

/// Full report for a finished experiment.
pub fn experiment_document(report: &ExperimentReport) -> Result<ReportDocument, SimError> {
    let cfg = &report.config;
    let model = cfg.model.build()?;
    let mut warnings = report.warnings.clone();
    if report.normality.is_some() {
        warnings.push(KS_POLICY_NOTE.to_string());
    }
    Ok(ReportDocument {
        config: RunConfig {
            model: cfg.model.clone(),
            family: cfg.family,
            replicates: Some(cfg.replicates),
            master_seed: Some(cfg.master_seed),
            center: Some(cfg.center),
            scale: Some(cfg.scale),
        },
        theory: TheorySection {
            sigma_sq: finite(report.theory_sigma_sq),
            branch: report.theory_source,
            linear_sigma_sq: finite(report.linear_sigma_sq),
            expectation_approx: report.expectation_approx,
            exact_expectation: finite(report.exact_expectation),
            c1_ratio: finite(report.c1_ratio),
            closed_form_randic: closed_form_randic(&model, &cfg.family),
        },
        empirical: Some(EmpiricalSection {
            replicates: report.raw_values.len(),
            mean: report.summary.mean,
            variance: finite(report.summary.variance),
            variance_ratio: finite(report.variance_ratio),
            skewness: finite(report.summary.skewness),
            excess_kurtosis: finite(report.summary.excess_kurtosis),
            ks_statistic: finite(report.ks_statistic),
            ks_critical: report.normality.map(|v| v.ks_critical),
            normal: report.normality.map(|v| v.normal),
            center: report.center,
            scale: finite(report.scale),
        }),
        warnings,
        version: VERSION.to_string(),
    })
}

/// Replicate table with header `replicate,index_value,z_value`.
pub fn samples_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("replicate,index_value,z_value\n");
    for (r, x) in report.raw_values.iter().enumerate() {
        let z = report
            .standardized
            .get(r)
            .map(|z| crate::format::csv_number(*z))
            .unwrap_or_default();
        out.push_str(&format!("{r},{},{z}\n", crate::format::csv_number(*x)));
    }
    out
}
