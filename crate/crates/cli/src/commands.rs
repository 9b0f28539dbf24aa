//! Subcommand definitions and their execution.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use topix::indices::{compute_index, IndexFamily};
use topix::oracle::enumerate_exact_moments;
use topix::simulate::{
    phase_sweep, run_experiment, CenterMode, EdgeScale, ExperimentConfig, ModelSpec, PhaseSweep,
    ScaleMode, DEFAULT_SWEEP_ALPHA, DEFAULT_SWEEP_NS, DEFAULT_SWEEP_REPLICATES, DEFAULT_SWEEP_TAUS,
};

use crate::edgelist::{load_edge_list, EdgeListError};
use crate::error::CliError;
use crate::format::{csv_number, format_significant, to_json};
use crate::report::{experiment_document, samples_csv, theory_document, OracleDocument, RunConfig, VERSION};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TOPIX_THREADS";

#[derive(Debug, Parser)]
#[command(name = "topix", version, about = "Degree-based topological indices of random graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Index value of a graph read from an edge list.
    Index {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        family: IndexFamily,
    },
    /// Theoretical variance and expectation as JSON.
    Theory {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        family: IndexFamily,
    },
    /// Monte Carlo replicates with a CSV of samples and a JSON report.
    Simulate(SimulateArgs),
    /// Variance growth exponents of the general Randić index.
    Phase(PhaseArgs),
    /// Exact moments by enumerating every graph (n <= 5).
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        family: IndexFamily,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Er,
    Exp,
    Matrix,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "er")]
    pub model: ModelKind,
    #[arg(long)]
    pub n: Option<usize>,
    /// Edge probability scale.
    #[arg(long)]
    pub p: Option<f64>,
    /// Sets p = n^-alpha_p.
    #[arg(long = "alpha-p")]
    pub alpha_p: Option<f64>,
    /// Exponent of the kernel model, p = n^-alpha.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Whitespace-separated weight matrix.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Lower weight bound of the matrix model.
    #[arg(long)]
    pub beta: Option<f64>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl ModelArgs {
    pub fn to_spec(&self) -> Result<ModelSpec, CliError> {
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| usage(format!("--{flag} is required for --model {}", self.kind_name())));
        let need_n = || self.n.ok_or_else(|| usage(format!("--n is required for --model {}", self.kind_name())));
        match self.model {
            ModelKind::Er => {
                let scale = match (self.p, self.alpha_p) {
                    (Some(p), None) => EdgeScale::P(p),
                    (None, Some(a)) => EdgeScale::AlphaP(a),
                    _ => return Err(usage("--model er needs exactly one of --p and --alpha-p")),
                };
                Ok(ModelSpec::Er { n: need_n()?, scale })
            }
            ModelKind::Exp => Ok(ModelSpec::ExpKernel {
                n: need_n()?,
                alpha: need(self.alpha, "alpha")?,
                kappa: need(self.kappa, "kappa")?,
            }),
            ModelKind::Matrix => Ok(ModelSpec::Matrix {
                path: self
                    .matrix
                    .clone()
                    .ok_or_else(|| usage("--matrix is required for --model matrix"))?,
                p: need(self.p, "p")?,
                beta: need(self.beta, "beta")?,
            }),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self.model {
            ModelKind::Er => "er",
            ModelKind::Exp => "exp",
            ModelKind::Matrix => "matrix",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CenterArg {
    EmpiricalMean,
    TheoreticalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Linear,
    RandicCritical,
    EmpiricalSd,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub family: IndexFamily,
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "empirical-mean")]
    pub center: CenterArg,
    #[arg(long, value_enum, default_value = "linear")]
    pub scale: ScaleArg,
    /// CSV of replicate values.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[arg(long, default_value_t = DEFAULT_SWEEP_ALPHA)]
    pub alpha: f64,
    /// Comma-separated tau grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub taus: Option<Vec<f64>>,
    /// Comma-separated, increasing n grid.
    #[arg(long, value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_SWEEP_REPLICATES)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Reads the worker cap from `TOPIX_THREADS`; unset or empty means no cap.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn json(value: &impl serde::Serialize) -> Result<String, CliError> {
    to_json(value).map_err(|e| CliError::Io(e.to_string()))
}

/// Runs one command and returns what it prints on stdout.
pub fn run(cli: Cli, threads: Option<usize>) -> Result<String, CliError> {
    match cli.command {
        Command::Index { graph, family } => {
            let g = load_edge_list(&graph).map_err(|e| match e {
                EdgeListError::Io { .. } => CliError::Io(e.to_string()),
                other => CliError::Usage(other.to_string()),
            })?;
            Ok(format!("{}\n", format_significant(compute_index(&g, &family), 12)))
        }
        Command::Theory { model, family } => {
            let doc = theory_document(&model.to_spec()?, &family)?;
            json(&doc)
        }
        Command::Simulate(args) => simulate(args, threads),
        Command::Phase(args) => phase(args, threads),
        Command::Oracle { model, family } => {
            let spec = model.to_spec()?;
            let exact = enumerate_exact_moments(&spec.build()?, &family)?;
            json(&OracleDocument {
                config: RunConfig {
                    model: spec,
                    family,
                    replicates: None,
                    master_seed: None,
                    center: None,
                    scale: None,
                },
                exact,
                version: VERSION.to_string(),
            })
        }
    }
}

fn simulate(args: SimulateArgs, threads: Option<usize>) -> Result<String, CliError> {
    let mut config = ExperimentConfig::new(args.model.to_spec()?, args.family, args.replicates, args.seed);
    config.center = match args.center {
        CenterArg::EmpiricalMean => CenterMode::EmpiricalMean,
        CenterArg::TheoreticalApprox => CenterMode::TheoreticalApprox,
    };
    config.scale = match args.scale {
        ScaleArg::Linear => ScaleMode::Linear,
        ScaleArg::RandicCritical => ScaleMode::RandicCritical,
        ScaleArg::EmpiricalSd => ScaleMode::EmpiricalSd,
    };
    config.threads = threads;
    let report = run_experiment(&config)?;
    let doc = experiment_document(&report)?;
    if let Some(path) = &args.out {
        write_file(path, &samples_csv(&report))?;
    }
    if let Some(path) = &args.report {
        write_file(path, &json(&doc)?)?;
    }
    let emp = doc.empirical.as_ref().expect("experiment documents carry empirical data");
    let opt = |x: Option<f64>| x.map(|v| format_significant(v, 6)).unwrap_or_else(|| "NA".to_string());
    let mut line = format!(
        "replicates={} mean={} variance={} variance_ratio={} skewness={} excess_kurtosis={} ks={}",
        emp.replicates,
        format_significant(emp.mean, 10),
        opt(emp.variance),
        opt(emp.variance_ratio),
        opt(emp.skewness),
        opt(emp.excess_kurtosis),
        opt(emp.ks_statistic),
    );
    if let Some(normal) = emp.normal {
        line.push_str(&format!(" normal={normal}"));
    }
    line.push('\n');
    for w in &doc.warnings {
        line.push_str(&format!("warning: {w}\n"));
    }
    Ok(line)
}

/// Phase table with header `tau,n,p,empirical_var,theory_var,fitted_exponent`.
pub fn phase_csv(sweep: &PhaseSweep) -> String {
    let mut out = String::from("tau,n,p,empirical_var,theory_var,fitted_exponent\n");
    for row in &sweep.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_number(row.tau),
            row.n,
            csv_number(row.p_n),
            csv_number(row.empirical_variance),
            csv_number(row.theory_sigma_sq),
            csv_number(row.fitted_exponent),
        ));
    }
    out
}

fn phase(args: PhaseArgs, threads: Option<usize>) -> Result<String, CliError> {
    let taus = args.taus.unwrap_or_else(|| DEFAULT_SWEEP_TAUS.to_vec());
    let ns = args.ns.unwrap_or_else(|| DEFAULT_SWEEP_NS.to_vec());
    let sweep = phase_sweep(&taus, &ns, args.alpha, args.replicates, args.seed, threads)?;
    let csv = phase_csv(&sweep);
    match &args.out {
        Some(path) => {
            write_file(path, &csv)?;
            let mut summary = String::new();
            for fit in &sweep.fits {
                summary.push_str(&format!(
                    "tau={} fitted_exponent={} theoretical_exponent={}\n",
                    csv_number(fit.tau),
                    format_significant(fit.fitted, 6),
                    format_significant(fit.theoretical, 6),
                ));
            }
            Ok(summary)
        }
        None => Ok(csv),
    }
}
