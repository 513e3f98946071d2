//! Command-line entry points: `extract`, `reduce`, `evaluate` and `serve`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::service::{self, AppState, ModelSummary};
use rulelens::evaluation::evaluate;
use rulelens::ingest::{extract_rules, load_schema, parse_ensemble, ModelFormat, Rule};
use rulelens::{Analysis, Error, ReduceOptions};

#[derive(Debug, Parser)]
#[command(name = "rulelens", version, about = "Explore and reduce the rules of tree ensembles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write every root-to-leaf rule of a model as JSON.
    Extract {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select a small rule subset approximating the model.
    Reduce {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        reduction: Reduction,
        /// Report path; stdout when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare the reducer against random rule subsets.
    Evaluate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        reduction: Reduction,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "random")]
        baselines: Vec<Baseline>,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Start the HTTP service with the model preloaded.
    Serve {
        #[command(flatten)]
        input: Input,
        /// Rules per level.
        #[arg(long, default_value_t = 80)]
        m: usize,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8000)]
        port: u16,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    GbtText,
}

impl From<Format> for ModelFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ModelFormat::JsonInterchange,
            Format::GbtText => ModelFormat::GbtText,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Random,
}

#[derive(Debug, Args)]
pub struct Input {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
}

impl Input {
    fn load(&self) -> Result<Analysis, Error> {
        Analysis::load(&self.model, self.format.into(), &self.data, &self.schema)
    }
}

#[derive(Debug, Args)]
pub struct Reduction {
    /// Rule budget.
    #[arg(long, default_value_t = 80)]
    pub m: usize,
    #[arg(long, requires = "lambda", conflicts_with = "grid")]
    pub xi: Option<f64>,
    #[arg(long, requires = "xi", conflicts_with = "grid")]
    pub lambda: Option<f64>,
    /// Two-stage search over xi and lambda (the default without --xi).
    #[arg(long)]
    pub grid: bool,
}

impl Reduction {
    fn options(&self) -> Result<ReduceOptions, Error> {
        if self.m == 0 {
            return Err(Error::InvalidArgument("--m must be at least 1".into()));
        }
        match (self.xi, self.lambda) {
            (Some(xi), Some(lambda)) => {
                if !(xi.is_finite() && xi >= 0.0 && lambda.is_finite() && lambda >= 0.0) {
                    return Err(Error::InvalidArgument("--xi and --lambda must be finite and non-negative".into()));
                }
                Ok(ReduceOptions::fixed(self.m, xi, lambda))
            }
            _ => Ok(ReduceOptions::grid(self.m)),
        }
    }
}

/// Failure of a command, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad input or solver failure: exit 1.
    Input(String),
    /// Anything else: exit 2.
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Input(_) => ExitCode::from(1),
            Failure::Internal(_) => ExitCode::from(2),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Internal(m) => m,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReduceReport {
    pub m: usize,
    pub n_rules: usize,
    pub xi: Option<f64>,
    pub lambda: Option<f64>,
    pub fidelity_train: Option<f64>,
    pub fidelity_test: Option<f64>,
    pub average_anomaly_score: Option<f64>,
    /// Mean anomaly score over every rule of the model.
    pub mean_anomaly_score_all_rules: f64,
    pub objective: Option<f64>,
    pub selected_rule_ids: Vec<usize>,
    pub grid_trace: Vec<GridCell>,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct GridCell {
    pub xi: f64,
    pub lambda: f64,
    pub fidelity_train: f64,
}

#[derive(Debug, Serialize)]
pub struct EvaluateReport {
    #[serde(flatten)]
    pub report: rulelens::evaluation::EvaluationReport,
    pub wall_time_seconds: f64,
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    match path {
        Some(p) => std::fs::write(p, text + "\n")
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub fn extract(model: &Path, format: Format, schema: &Path, out: &Path) -> Result<Vec<Rule>, Failure> {
    let schema = load_schema(schema)?;
    let ensemble = parse_ensemble(model, format.into(), &schema)?;
    let rules = extract_rules(&ensemble, &schema)?;
    write_json(&rules, Some(out))?;
    Ok(rules)
}

pub fn reduce(analysis: &Analysis, options: &ReduceOptions) -> Result<ReduceReport, Failure> {
    let start = Instant::now();
    let selection = analysis.reduce_all(options)?;
    Ok(ReduceReport {
        m: options.budget,
        n_rules: analysis.n_rules(),
        xi: selection.xi,
        lambda: selection.lambda,
        fidelity_train: selection.metrics.fidelity_train,
        fidelity_test: selection.metrics.fidelity_test,
        average_anomaly_score: selection.metrics.average_anomaly_score,
        mean_anomaly_score_all_rules: analysis.scores.mean(),
        objective: selection.objective,
        selected_rule_ids: selection.rule_ids,
        grid_trace: selection
            .grid_trace
            .into_iter()
            .map(|(xi, lambda, fidelity_train)| GridCell { xi, lambda, fidelity_train })
            .collect(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

fn show(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.4}"))
}

async fn serve(analysis: Analysis, m: usize, host: &str, port: u16) -> Result<(), Failure> {
    if m == 0 {
        return Err(Failure::Input("--m must be at least 1".into()));
    }
    let listener = tokio::net::TcpListener::bind((host, port))
        .await
        .map_err(|e| Failure::Input(format!("cannot listen on {host}:{port}: {e}")))?;
    let addr = listener.local_addr().map_err(|e| Failure::Internal(e.to_string()))?;
    let summary = ModelSummary::of(&analysis);
    let state = AppState::new(Some(Arc::new(analysis)), ReduceOptions::grid(m), service::DEFAULT_IDLE_TIMEOUT);
    service::spawn_eviction(state.clone());
    println!("serving {} rules from {} trees at http://{addr}", summary.n_rules, summary.n_trees);
    axum::serve(listener, service::router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Failure::Internal(e.to_string()))
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Extract { model, format, schema, out } => {
            let rules = extract(&model, format, &schema, &out)?;
            println!("{} rules written to {}", rules.len(), out.display());
        }
        Command::Reduce { input, reduction, report } => {
            let options = reduction.options()?;
            let analysis = input.load()?;
            let r = reduce(&analysis, &options)?;
            if report.is_some() {
                eprintln!(
                    "selected {} of {} rules (xi {}, lambda {}): fidelity train {}, test {}, anomaly {}",
                    r.selected_rule_ids.len(),
                    r.n_rules,
                    show(r.xi),
                    show(r.lambda),
                    show(r.fidelity_train),
                    show(r.fidelity_test),
                    show(r.average_anomaly_score)
                );
            }
            write_json(&r, report.as_deref())?;
        }
        Command::Evaluate { input, reduction, baselines, trials, seed, report } => {
            debug_assert!(baselines.iter().all(|b| *b == Baseline::Random));
            let options = reduction.options()?;
            let analysis = input.load()?;
            let start = Instant::now();
            let r = evaluate(&analysis, &options, trials, seed)?;
            for m in &r.methods {
                eprintln!(
                    "{:<16} mean fidelity train {} test {}, mean anomaly {}",
                    m.method,
                    show(m.mean_fidelity_train),
                    show(m.mean_fidelity_test),
                    show(m.mean_average_anomaly_score)
                );
            }
            write_json(&EvaluateReport { report: r, wall_time_seconds: start.elapsed().as_secs_f64() }, report.as_deref())?;
        }
        Command::Serve { input, m, host, port } => {
            let analysis = input.load()?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Internal(e.to_string()))?;
            rt.block_on(serve(analysis, m, &host, port))?;
        }
    }
    Ok(())
}
