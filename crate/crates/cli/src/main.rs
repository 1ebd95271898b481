//! `nnk`: leave-one-out evaluation, neighbor explanations, k sweeps,
//! neighbor census and model-gap reports over precomputed embeddings.
//!
//! Exit codes: 0 success, 1 I/O or data error, 2 configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nnk::data::load_predictions;
use nnk::estimators::{LossKind, Method};
use nnk::evaluation::{
    compare_census, model_gap, neighbor_census, sweep_compare, sweep_csv, CensusSummary, EvalMode,
};
use nnk::kernel::KernelKind;
use nnk::{
    load_dataset, load_embeddings, loo_evaluate, nnk_neighborhood, DataFormat, EvalConfig,
    KernelSpec, NnkError,
};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "nnk", version, about = "Non-negative kernel regression diagnostics for embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Leave-one-out risk, spread and neighbor statistics of a labelled set
    Loo {
        #[command(flatten)]
        common: Common,
    },
    /// NNK neighbors, weights and polytope diameter for each query
    Explain {
        #[command(flatten)]
        common: Common,
        /// Query embeddings; a label column is accepted and ignored
        #[arg(long)]
        queries: PathBuf,
    },
    /// Risk of each method over a grid of k
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated k values
        #[arg(long, value_delimiter = ',', default_value = "5,10,25,50")]
        k_grid: Vec<usize>,
        /// Comma-separated methods
        #[arg(long, value_delimiter = ',', default_value = "nnk,winn")]
        methods: Vec<Method>,
        /// Evaluate on this labelled set instead of leave-one-out
        #[arg(long)]
        holdout: Option<PathBuf>,
    },
    /// Distribution of NNK support sizes for one or more query sets
    Census {
        #[command(flatten)]
        common: Common,
        /// Query set; repeat to compare several
        #[arg(long, required = true)]
        queries: Vec<PathBuf>,
    },
    /// External model error against leave-one-out NNK error
    Gap {
        #[command(flatten)]
        common: Common,
        /// CSV with header `id,predicted_label`
        #[arg(long)]
        predictions: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Labelled training embeddings (.csv, or .bin/.nnkd binary)
    #[arg(long)]
    train: PathBuf,
    /// Input format; inferred from the file extension when omitted
    #[arg(long)]
    format: Option<DataFormat>,
    /// Report to start from: an EvalConfig or any report embedding one.
    /// Flags given explicitly override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// cosine | gaussian
    #[arg(long)]
    kernel: Option<KernelKind>,
    /// Gaussian bandwidth
    #[arg(long)]
    sigma: Option<f64>,
    /// Candidate pool size [default: 50]
    #[arg(long)]
    k: Option<usize>,
    /// Weights below this are zero [default: 1e-6]
    #[arg(long)]
    tol: Option<f64>,
    /// nnk | winn [default: nnk]
    #[arg(long)]
    method: Option<Method>,
    /// zero_one | squared [default: zero_one]
    #[arg(long)]
    loss: Option<LossKind>,
    /// Worker threads; 0 uses every core
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<EvalConfig, NnkError> {
        let mut config = match &self.config {
            Some(path) => read_config(path)?,
            None => EvalConfig::default(),
        };
        match (self.kernel, self.sigma) {
            (Some(KernelKind::Gaussian), Some(sigma)) => config.kernel = KernelSpec::gaussian(sigma)?,
            (Some(KernelKind::Gaussian), None) if config.kernel.kind != KernelKind::Gaussian => {
                return Err(NnkError::InvalidArgument("--kernel gaussian needs --sigma".into()))
            }
            (Some(KernelKind::Cosine), _) => config.kernel = KernelSpec::cosine(),
            (None, Some(sigma)) if config.kernel.kind == KernelKind::Gaussian => {
                config.kernel = KernelSpec::gaussian(sigma)?
            }
            _ => {}
        }
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(tol) = self.tol {
            config.tol = tol;
        }
        if let Some(method) = self.method {
            config.method = method;
        }
        if let Some(loss) = self.loss {
            config.loss = loss;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        config.threads = self.threads;
        config.validate()?;
        Ok(config)
    }

    fn format_of(&self, path: &Path) -> DataFormat {
        self.format.unwrap_or_else(|| DataFormat::from_path(path))
    }
}

fn read_config(path: &Path) -> Result<EvalConfig, NnkError> {
    let text = std::fs::read_to_string(path).map_err(|source| NnkError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| NnkError::InvalidArgument(format!("{}: {e}", path.display())))?;
    let inner = value.get("config").cloned().unwrap_or(value);
    serde_json::from_value(inner)
        .map_err(|e| NnkError::InvalidArgument(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct Neighbor {
    id: u64,
    label: u32,
    theta: f64,
    weight: f64,
}

#[derive(Serialize)]
struct Explanation {
    query_id: u64,
    neighbors: Vec<Neighbor>,
    k_hat: usize,
    diameter: f64,
    fallback: bool,
}

#[derive(Serialize)]
struct ExplainReport {
    config: EvalConfig,
    explanations: Vec<Explanation>,
}

#[derive(Serialize)]
struct CensusReport {
    config: EvalConfig,
    sets: Vec<CensusSummary>,
    lowest_mean_k_hat: String,
}

#[derive(Serialize)]
struct GapReport {
    config: EvalConfig,
    xi_model: f64,
    xi_nnk: f64,
    gap: f64,
}

#[derive(Serialize)]
struct SweepReport {
    config: EvalConfig,
    rows: Vec<nnk::evaluation::SweepRow>,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), NnkError> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(|source| NnkError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), NnkError> {
    let common = match &command {
        Command::Loo { common }
        | Command::Explain { common, .. }
        | Command::Sweep { common, .. }
        | Command::Census { common, .. }
        | Command::Gap { common, .. } => common,
    };
    let config = common.config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| NnkError::InvalidArgument(format!("thread pool: {e}")))?;
    let out = common.out.as_deref();

    let body = pool.install(|| -> Result<String, NnkError> {
        let train = load_dataset(&common.train, common.format_of(&common.train))?;
        match &command {
            Command::Loo { .. } => Ok(json(&loo_evaluate(&train, &config)?)),
            Command::Explain { queries, .. } => {
                let q = load_embeddings(queries, common.format_of(queries))?;
                let explanations = (0..q.len())
                    .into_par_iter()
                    .map(|i| {
                        let n = nnk_neighborhood(
                            &config.kernel,
                            train.points(),
                            q.row(i),
                            config.k,
                            config.tol,
                            &[],
                        )?;
                        Ok(Explanation {
                            query_id: q.id(i),
                            neighbors: n
                                .support
                                .iter()
                                .map(|s| Neighbor {
                                    id: train.id(s.index),
                                    label: train.label(s.index),
                                    theta: s.theta,
                                    weight: s.weight,
                                })
                                .collect(),
                            k_hat: n.k_hat,
                            diameter: n.diameter,
                            fallback: n.fallback,
                        })
                    })
                    .collect::<Result<Vec<_>, NnkError>>()?;
                Ok(json(&ExplainReport {
                    config: config.clone(),
                    explanations,
                }))
            }
            Command::Sweep {
                k_grid,
                methods,
                holdout,
                ..
            } => {
                let holdout = holdout
                    .as_ref()
                    .map(|p| load_dataset(p, common.format_of(p)))
                    .transpose()?;
                let mode = holdout.as_ref().map_or(EvalMode::Loo, EvalMode::Holdout);
                let rows = sweep_compare(&train, mode, k_grid, methods, &config)?;
                let as_json = out.is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
                Ok(if as_json {
                    json(&SweepReport {
                        config: config.clone(),
                        rows,
                    })
                } else {
                    sweep_csv(&rows)
                })
            }
            Command::Census { queries, .. } => {
                let mut sets = Vec::with_capacity(queries.len());
                for path in queries {
                    let q = load_embeddings(path, common.format_of(path))?;
                    let mut summary =
                        neighbor_census(&config.kernel, train.points(), &q, config.k, config.tol)?;
                    summary.name = path.display().to_string();
                    sets.push(summary);
                }
                let cmp = compare_census(sets)?;
                Ok(json(&CensusReport {
                    config: config.clone(),
                    sets: cmp.sets,
                    lowest_mean_k_hat: cmp.lowest_mean_k_hat,
                }))
            }
            Command::Gap { predictions, .. } => {
                let predictions = load_predictions(predictions)?;
                let report = loo_evaluate(&train, &config)?;
                let g = model_gap(&report, &predictions)?;
                Ok(json(&GapReport {
                    config: config.clone(),
                    xi_model: g.xi_model,
                    xi_nnk: g.xi_nnk,
                    gap: g.gap,
                }))
            }
        }
    })?;
    emit(out, &body)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
