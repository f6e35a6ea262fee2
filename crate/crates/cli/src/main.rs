use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use exindex::diagnostics::{
    default_grid, k_selection_report, trajectory, Statistic, DEFAULT_GAP_THRESHOLD,
};
use exindex::estimators::{estimate, DEFAULT_UPPER_FRACTION};
use exindex::harness::emit::{self, Format};
use exindex::harness::study::{run_study_with, Execution, StudyConfig};
use exindex::harness::{application_report_with, ingest_prices, read_series};
use exindex::mm::{mm_check_dk, mm_extremal_index, mm_min_k};
use exindex::series::block_cycles;
use exindex::simulators::{oracle_theta, simulate, OracleConfig, ReferenceEntry, ReferenceTable};
use exindex::{Error, EstimatorId, LevelSpec, MMSignature, Model, ModelSpec, Result};

#[derive(Parser)]
#[command(
    name = "exindex",
    version,
    about = "Extremal index estimation via block-maxima cycles"
)]
struct Cli {
    /// Master seed for simulation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON configuration file (a StudyConfig for `study`, a model spec elsewhere).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `csv` or `table`.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model name: AR_CAUCHY, AR_UNIF, MAR, MARKOV_LOGISTIC, GARCH11 or MM.
    #[arg(long)]
    model: Option<String>,
    /// Model parameter as name=value, e.g. `--param phi=0.5`.
    #[arg(long = "param")]
    params: Vec<String>,
    /// MM signature row, e.g. `2/6,1/6,3/6`.
    #[arg(long)]
    signature: Option<String>,
    /// MM signature file with `l j alpha` rows.
    #[arg(long)]
    signature_file: Option<PathBuf>,
    #[arg(long)]
    burn_in: Option<usize>,
}

#[derive(Args)]
struct LevelArgs {
    /// Threshold as an empirical quantile probability.
    #[arg(long, conflicts_with_all = ["level", "tau"])]
    quantile: Option<f64>,
    /// Absolute threshold.
    #[arg(long, conflicts_with = "tau")]
    level: Option<f64>,
    /// Normalized level: quantile at 1 - tau/n.
    #[arg(long)]
    tau: Option<f64>,
}

impl LevelArgs {
    fn spec(&self) -> LevelSpec {
        match (self.quantile, self.level, self.tau) {
            (_, Some(u), _) => LevelSpec::Absolute(u),
            (_, _, Some(t)) => LevelSpec::Normalized(t),
            (Some(q), _, _) => LevelSpec::Quantile(q),
            _ => LevelSpec::Quantile(0.95),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a model and write the series.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Series length.
        #[arg(short, long)]
        n: usize,
    },
    /// Estimate the extremal index of a series file.
    Estimate {
        /// One value per row, optional header.
        #[arg(long)]
        input: PathBuf,
        /// Estimator ids; all when absent.
        #[arg(long = "estimator", value_delimiter = ',')]
        estimators: Vec<String>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Run length for RUNS; defaults to k.
        #[arg(long)]
        run: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_UPPER_FRACTION)]
        upper_fraction: f64,
        #[command(flatten)]
        level: LevelArgs,
    },
    /// Write the cycle series of order k.
    Cycles {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Local dependence diagnostics: p_k / d_k trajectories, or the
    /// k-selection table with `--select`.
    Diagnose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 50.0)]
        tau: f64,
        #[arg(long, default_value_t = 3.0)]
        s: f64,
        /// `p_k` or `d_k`.
        #[arg(long, default_value = "p_k")]
        statistic: String,
        /// Number of prefix lengths in the trajectory.
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// Emit the k-selection table for k = 1..=K instead.
        #[arg(long, value_name = "K")]
        select: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_GAP_THRESHOLD)]
        threshold: f64,
    },
    /// Check D(k) for a moving-maxima signature.
    MmCheck {
        #[arg(long)]
        signature: Option<String>,
        #[arg(long)]
        signature_file: Option<PathBuf>,
        /// Single k to check; 1..=k_max when absent.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 10)]
        k_max: usize,
    },
    /// Run a Monte-Carlo study described by `--config`.
    Study {
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(short, long)]
        n: Option<usize>,
        /// Run replicates on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Convert a price file to log-returns, dropping repeated prices.
    Ingest {
        #[arg(long)]
        input: PathBuf,
    },
    /// Table of all estimators on one series.
    Report {
        /// Series file, or a price file with `--prices`.
        #[arg(long)]
        input: PathBuf,
        /// Treat the input as prices and ingest it first.
        #[arg(long)]
        prices: bool,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0.95)]
        quantile: f64,
        #[arg(long, default_value_t = DEFAULT_UPPER_FRACTION)]
        upper_fraction: f64,
    },
    /// Brute-force block-maxima estimate of a model's extremal index.
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        chains: Option<usize>,
        #[arg(long)]
        chain_length: Option<usize>,
        #[arg(long)]
        block: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        taus: Vec<f64>,
        /// Add or replace the entry in this reference table file.
        #[arg(long)]
        update: Option<PathBuf>,
    },
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn signature(inline: Option<&str>, file: Option<&Path>) -> Result<Option<MMSignature>> {
    match (inline, file) {
        (Some(_), Some(_)) => Err(Error::Config(
            "give either --signature or --signature-file".into(),
        )),
        (Some(row), None) => MMSignature::parse_row(row).map(Some),
        (None, Some(path)) => MMSignature::parse_file_contents(&read_text(path)?).map(Some),
        (None, None) => Ok(None),
    }
}

fn param_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn model_spec(cli: &Cli, args: &ModelArgs) -> Result<ModelSpec> {
    let mut spec = match (&args.model, &cli.config) {
        (Some(name), _) => {
            let name = name.to_ascii_uppercase().replace('-', "_");
            let model = if name == "MM" {
                let sig = signature(args.signature.as_deref(), args.signature_file.as_deref())?
                    .ok_or_else(|| {
                        Error::Config("MM needs --signature or --signature-file".into())
                    })?;
                Model::Mm { signature: sig }
            } else {
                let mut obj = Map::new();
                obj.insert("model".into(), Value::String(name));
                for p in &args.params {
                    let (k, v) = p.split_once('=').ok_or_else(|| {
                        Error::Config(format!("parameter '{p}' is not name=value"))
                    })?;
                    obj.insert(k.trim().to_string(), param_value(v.trim()));
                }
                serde_json::from_value(Value::Object(obj))
                    .map_err(|e| Error::Config(format!("model: {e}")))?
            };
            ModelSpec::new(model, 0)
        }
        (None, Some(path)) => read_json(path)?,
        (None, None) => return Err(Error::Config("no model: use --model or --config".into())),
    };
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    if let Some(b) = args.burn_in {
        spec.burn_in = b;
    }
    spec.model.validate()?;
    Ok(spec)
}

fn run(cli: &Cli) -> Result<()> {
    let format: Format = cli.format.parse()?;
    let out = cli.out.as_deref();
    let text = match &cli.command {
        Command::Simulate { model, n } => {
            let spec = model_spec(cli, model)?;
            emit::series_csv(simulate(&spec, *n)?.values())
        }
        Command::Estimate {
            input,
            estimators,
            k,
            run,
            upper_fraction,
            level,
        } => {
            let series = read_series(input)?;
            let ids: Vec<EstimatorId> = if estimators.is_empty() {
                exindex::harness::report::REPORT_ESTIMATORS.to_vec()
            } else {
                estimators
                    .iter()
                    .map(|s| s.parse())
                    .collect::<Result<_>>()?
            };
            let spec = level.spec();
            let rows: Vec<_> = ids
                .into_iter()
                .map(|id| {
                    (
                        id,
                        estimate(&series, id, *k, spec, run.unwrap_or(*k), *upper_fraction),
                    )
                })
                .collect();
            if rows.iter().all(|(_, r)| r.is_err()) {
                return Err(rows.into_iter().next().expect("nonempty").1.unwrap_err());
            }
            match format {
                Format::Csv => emit::estimates_csv(&rows),
                Format::Table => emit::estimates_table(&rows),
            }
        }
        Command::Cycles { input, k } => {
            let z = block_cycles(&read_series(input)?, *k)?;
            emit::series_csv(z.values())
        }
        Command::Diagnose {
            input,
            k,
            tau,
            s,
            statistic,
            points,
            select,
            threshold,
        } => {
            let series = read_series(input)?;
            match select {
                Some(k_max) => {
                    let rep = k_selection_report(&series, *k_max, *tau, *s, *threshold)?;
                    match format {
                        Format::Csv => emit::k_selection_csv(&rep),
                        Format::Table => emit::k_selection_table(&rep),
                    }
                }
                None => {
                    let stat = match statistic.to_ascii_lowercase().as_str() {
                        "p_k" | "p" | "proportion" => Statistic::Proportion,
                        "d_k" | "d" | "count" => Statistic::Count,
                        other => return Err(Error::Config(format!("unknown statistic '{other}'"))),
                    };
                    let grid = default_grid(series.len(), *k, *tau, *s, *points);
                    let pts = trajectory(&series, *k, *tau, *s, &grid, stat)?;
                    match format {
                        Format::Csv => emit::trajectory_csv(&pts),
                        Format::Table => emit::trajectory_table(&pts),
                    }
                }
            }
        }
        Command::MmCheck {
            signature: inline,
            signature_file,
            k,
            k_max,
        } => {
            let sig = signature(inline.as_deref(), signature_file.as_deref())?
                .ok_or_else(|| Error::Config("give --signature or --signature-file".into()))?;
            let ks: Vec<usize> = match k {
                Some(k) => vec![*k],
                None => (1..=*k_max).collect(),
            };
            let checks: Vec<_> = ks.iter().map(|&k| (k, mm_check_dk(&sig, k))).collect();
            match format {
                Format::Csv => emit::mm_check_csv(&checks),
                Format::Table => emit::mm_check_table(
                    &checks,
                    mm_extremal_index(&sig),
                    mm_min_k(&sig, (*k_max).max(sig.max_width())),
                ),
            }
        }
        Command::Study {
            replicates,
            n,
            sequential,
        } => {
            let path = cli
                .config
                .as_deref()
                .ok_or_else(|| Error::Config("study needs --config <file>".into()))?;
            let mut config: StudyConfig = read_json(path)?;
            if let Some(seed) = cli.seed {
                config.master_seed = seed;
            }
            if let Some(r) = replicates {
                config.replicates = *r;
            }
            if let Some(n) = n {
                config.n = *n;
            }
            let execution = if *sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let result = run_study_with(&config, execution)?;
            match format {
                Format::Csv => emit::study_csv(&result),
                Format::Table => emit::study_table(&result),
            }
        }
        Command::Ingest { input } => emit::series_csv(ingest_prices(input)?.values()),
        Command::Report {
            input,
            prices,
            k,
            quantile,
            upper_fraction,
        } => {
            let series = if *prices {
                ingest_prices(input)?
            } else {
                read_series(input)?
            };
            let rep = application_report_with(&series, *k, *quantile, *upper_fraction)?;
            match format {
                Format::Csv => emit::report_csv(&rep),
                Format::Table => emit::report_table(&rep),
            }
        }
        Command::Oracle {
            model,
            chains,
            chain_length,
            block,
            taus,
            update,
        } => {
            let spec = model_spec(cli, model)?;
            let mut cfg = OracleConfig {
                burn_in: spec.burn_in,
                ..OracleConfig::default()
            };
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if let Some(c) = chains {
                cfg.chains = *c;
            }
            if let Some(l) = chain_length {
                cfg.chain_length = *l;
            }
            if let Some(b) = block {
                cfg.block = *b;
            }
            if !taus.is_empty() {
                cfg.taus = taus.clone();
            }
            let run = oracle_theta(&spec.model, &cfg)?;
            let entry = ReferenceEntry {
                model: spec.model.clone(),
                theta: run.theta,
                oracle: run,
            };
            if let Some(path) = update {
                let mut table: ReferenceTable = if path.exists() {
                    read_json(path)?
                } else {
                    ReferenceTable::default()
                };
                table.entries.retain(|e| e.model != entry.model);
                table.entries.push(entry.clone());
                let json = serde_json::to_string_pretty(&table)
                    .map_err(|e| Error::Degenerate(e.to_string()))?;
                emit::write_output(Some(path), &(json + "\n"))?;
            }
            serde_json::to_string_pretty(&entry).map_err(|e| Error::Degenerate(e.to_string()))?
                + "\n"
        }
    };
    emit::write_output(out, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
