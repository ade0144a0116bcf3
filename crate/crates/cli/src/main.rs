use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fuzzprobe_core::analysis::{analyze, AnalysisConfig};
use fuzzprobe_core::config::{validate, PipelineConfig, ENDPOINT_ENV};
use fuzzprobe_core::curve::{build_curves, read_curves, write_curves, Pooling, Source};
use fuzzprobe_core::jsonl::{read_jsonl, write_jsonl};
use fuzzprobe_core::pipeline::{run_pipeline, write_report, RunOptions};
use fuzzprobe_core::plot::write_plots;
use fuzzprobe_core::scoring::{cache_read, cache_write, OracleSpec, RemoteConfig, ScoreIndex, Scorer};
use fuzzprobe_core::smoothing::{smooth_all, Selection, SmootherConfig};
use fuzzprobe_core::stimuli::{generate_dataset, StimulusPair, Unit};
use fuzzprobe_core::{Error, Result};

#[derive(Parser)]
#[command(name = "fuzzprobe", version, about = "Probe NLI models for fuzzy temperature semantics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the stimulus pairs described by a config.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score stimulus pairs; rows already in --out are reused.
    Score {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        scorer: ScorerArg,
        #[arg(long, env = ENDPOINT_ENV)]
        endpoint: Option<String>,
        #[arg(long)]
        oracle_spec: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build entailment curves from a score cache and smooth them.
    Smooth {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `gcv` or `fixed:<penalty>`.
        #[arg(long, default_value = "gcv")]
        lambda: Selection,
        /// One curve per location instead of pooling locations.
        #[arg(long)]
        per_location: bool,
    },
    /// Fit hedge exponents and ordering statistics.
    Analyze {
        #[arg(long)]
        curves: PathBuf,
        #[arg(long)]
        raw: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = SourceArg::Smoothed)]
        hedge_source: SourceArg,
        #[arg(long, value_enum, default_value_t = SourceArg::Raw)]
        ordering_source: SourceArg,
        #[arg(long, default_value = "warm")]
        base: String,
        #[arg(long, default_value = "hot")]
        target: String,
    },
    /// Write SVG figures and CSV series for a curves file.
    Plot {
        #[arg(long)]
        curves: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage and write a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = ENDPOINT_ENV)]
        endpoint: Option<String>,
    },
    /// Check a config; prints one line per problem.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = ENDPOINT_ENV)]
        endpoint: Option<String>,
        /// Also require a remote scorer's health route to answer.
        #[arg(long)]
        probe: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScorerArg {
    Oracle,
    Remote,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Raw,
    Smoothed,
}

impl From<SourceArg> for Source {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Raw => Source::Raw,
            SourceArg::Smoothed => Source::Smoothed,
        }
    }
}

fn load_oracle(path: Option<&Path>) -> Result<OracleSpec> {
    let Some(path) = path else { return Ok(OracleSpec::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        path: "--oracle-spec".into(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Config {
        path: "--oracle-spec".into(),
        message: format!("{}: {e}", path.display()),
    })
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Generate { config, out } => {
            let config = PipelineConfig::load(&config)?;
            let pairs = generate_dataset(&config.stimuli)?;
            write_jsonl(&out, &pairs)?;
            for unit in Unit::ALL {
                let n = pairs.iter().filter(|p| p.unit == unit).count();
                if n > 0 {
                    println!("{unit}\t{n}");
                }
            }
            println!("total\t{}", pairs.len());
        }
        Command::Score {
            input,
            scorer,
            endpoint,
            oracle_spec,
            batch_size,
            concurrency,
            out,
        } => {
            let pairs: Vec<StimulusPair> = read_jsonl(&input)?;
            let scorer = match scorer {
                ScorerArg::Oracle => Scorer::Oracle(load_oracle(oracle_spec.as_deref())?),
                ScorerArg::Remote => {
                    let mut remote = RemoteConfig {
                        batch_size,
                        concurrency,
                        ..RemoteConfig::default()
                    };
                    if let Some(endpoint) = endpoint {
                        remote.endpoint = endpoint;
                    }
                    Scorer::Remote(remote)
                }
            };
            let index = if out.exists() {
                ScoreIndex::from_scored(&cache_read(&out)?)
            } else {
                ScoreIndex::default()
            };
            let scored = scorer.score_with_cache(&pairs, &index)?;
            cache_write(&scored, &out)?;
            println!("scored {} pairs with {}", scored.len(), scorer.id());
        }
        Command::Smooth {
            input,
            out,
            lambda,
            per_location,
        } => {
            let config = SmootherConfig {
                selection: lambda,
                pooling: if per_location { Pooling::PerLocation } else { Pooling::UnitCategory },
                ..SmootherConfig::default()
            };
            config.validate()?;
            let curves = smooth_all(&build_curves(&cache_read(&input)?, config.pooling)?, &config)?;
            write_curves(&out, &curves)?;
            println!("smoothed {} curves", curves.len());
        }
        Command::Analyze {
            curves,
            raw,
            out,
            hedge_source,
            ordering_source,
            base,
            target,
        } => {
            let config = AnalysisConfig {
                hedge_source: hedge_source.into(),
                ordering_source: ordering_source.into(),
                base_category: base,
                target_category: target,
                ..AnalysisConfig::default()
            };
            let report = analyze(&read_curves(&curves)?, &cache_read(&raw)?, &config)?;
            write_report(&out, &report)?;
            for (unit, r) in &report.units {
                println!(
                    "{unit}\tlambda*={:.4}\tordering={:.4}",
                    r.hedge_fit.lambda_star, r.ordering_fraction
                );
            }
        }
        Command::Plot { curves, out } => {
            let written = write_plots(&read_curves(&curves)?, &AnalysisConfig::default(), &out)?;
            for path in written {
                println!("{}", path.display());
            }
        }
        Command::Run { config, out, endpoint } => {
            let outcome = run_pipeline(
                &config,
                &RunOptions {
                    out_dir: out,
                    endpoint_override: endpoint,
                },
            )?;
            println!("{} pairs; artifacts in {}", outcome.pairs, outcome.dir.display());
        }
        Command::Validate { config, endpoint, probe } => {
            let diagnostics = validate(&config, endpoint.as_deref(), probe)?;
            if diagnostics.is_empty() {
                println!("ok");
            } else {
                for d in &diagnostics {
                    println!("{d}");
                }
                let first = diagnostics.into_iter().next().expect("non-empty");
                return Err(first.into());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
