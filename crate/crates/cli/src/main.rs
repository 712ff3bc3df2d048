//! Command-line harness: instance generation, smoothing, sampling, labeling,
//! learning, oracle batteries, and experiment sweeps.
//!
//! Every randomized subcommand takes `--seed` and is fully reproducible.
//! Outputs go to `--output` or stdout; model, junta, and report formats are
//! JSON, samples are JSON lines, experiments emit CSV by default.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use junta_mrf::battery::{BatterySpec, Verdict};
use junta_mrf::dist::enumerate_distribution;
use junta_mrf::experiment::{experiment_csv, run_experiment, ExperimentConfig};
use junta_mrf::gibbs::{gibbs_sample, GibbsConfig};
use junta_mrf::learner::{default_threshold, learn_junta, LearnerConfig};
use junta_mrf::{gen, oracle, Junta, MrfModel, SampleSet};

#[derive(Parser)]
#[command(name = "junta-mrf", version, about = "Smoothed-MRF junta learning harness")]
struct Cli {
    /// Master seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format where both apply (experiment: csv or json).
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampler {
    Exact,
    Gibbs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ThresholdModeArg {
    Theoretical,
    Calibrated,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random bounded-degree model (unsmoothed; no alpha field).
    GenModel {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        lambda: f64,
        /// Smoothing radius recorded in the file for a later `smooth`.
        #[arg(long)]
        sigma: f64,
        /// Permit sigma = 0 (oracle/baseline use only; `smooth` will refuse it).
        #[arg(long)]
        allow_unsmoothed: bool,
    },
    /// Draw the random external-field perturbation for a model file.
    Smooth {
        #[arg(long)]
        model: PathBuf,
    },
    /// Draw samples from a model file (labels default to 0).
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Sampler::Exact)]
        sampler: Sampler,
        /// Gibbs: burn-in sweeps (default 200·n).
        #[arg(long)]
        burn_in: Option<usize>,
        /// Gibbs: sweeps between kept states (default 10).
        #[arg(long)]
        thinning: Option<usize>,
        /// Gibbs: independent chains (default 4).
        #[arg(long)]
        chains: Option<usize>,
    },
    /// Replace sample labels with a junta's outputs.
    Label {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        junta: PathBuf,
    },
    /// Select relevant variables and fit the truth table.
    Learn {
        /// Model file; supplies the dependency graph (and σ, λ for the
        /// theoretical threshold).
        #[arg(long)]
        model: PathBuf,
        /// Labeled samples (JSON lines).
        #[arg(long)]
        samples: PathBuf,
        /// Explicit threshold; overrides --threshold-mode.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, value_enum, default_value_t = ThresholdModeArg::Theoretical)]
        threshold_mode: ThresholdModeArg,
        /// True junta file; required by the calibrated threshold.
        #[arg(long)]
        junta: Option<PathBuf>,
        /// Failure budget for the theoretical threshold.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        /// Junta arity bound (selection aborts above twice this).
        #[arg(long, default_value_t = 3)]
        k_bound: usize,
        /// Label for assignments never seen in the sample.
        #[arg(long, default_value_t = 0)]
        default_label: u8,
    },
    /// Run a battery of brute-force checks; nonzero exit iff any fails.
    Oracle {
        /// Battery spec JSON; the built-in default battery when omitted.
        #[arg(long)]
        battery: Option<PathBuf>,
    },
    /// Run a seeded experiment sweep from a config JSON.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Also write the summary JSON here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {path:?}"))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn load_model(path: &PathBuf) -> Result<MrfModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path:?}"))?;
    Ok(MrfModel::from_json(&text)?)
}

fn load_samples(path: &PathBuf) -> Result<SampleSet> {
    let file = fs::File::open(path).with_context(|| format!("reading {path:?}"))?;
    Ok(SampleSet::read_jsonl(std::io::BufReader::new(file))?)
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::GenModel {
            n,
            d,
            lambda,
            sigma,
            allow_unsmoothed,
        } => {
            if sigma == 0.0 && !allow_unsmoothed {
                bail!(
                    "sigma = 0 is outside the smoothing model; pass --allow-unsmoothed for oracle/baseline use"
                );
            }
            let graph = gen::random_graph(n, d, junta_mrf::seeds::derive(cli.seed, 1))?;
            let psi_bar =
                gen::random_psi_bar(&graph, lambda, junta_mrf::seeds::derive(cli.seed, 2))?;
            let model = MrfModel::new(psi_bar, graph, lambda, sigma, None)?;
            emit(&cli.output, &(model.to_json()? + "\n"))?;
        }
        Command::Smooth { model } => {
            let base = load_model(&model)?;
            if base.is_smoothed() {
                bail!("model already carries a smoothing vector");
            }
            let smoothed = MrfModel::apply_smoothing(
                base.psi_bar().clone(),
                base.graph().clone(),
                base.lambda(),
                base.sigma(),
                cli.seed,
            )?;
            emit(&cli.output, &(smoothed.to_json()? + "\n"))?;
        }
        Command::Sample {
            model,
            count,
            sampler,
            burn_in,
            thinning,
            chains,
        } => {
            let model = load_model(&model)?;
            let samples = match sampler {
                Sampler::Exact => enumerate_distribution(&model)?.sample(count, cli.seed)?,
                Sampler::Gibbs => {
                    let mut config = GibbsConfig::for_dimension(model.n());
                    if let Some(b) = burn_in {
                        config.burn_in = b;
                    }
                    if let Some(t) = thinning {
                        config.thinning = t;
                    }
                    if let Some(c) = chains {
                        config.chains = c;
                    }
                    gibbs_sample(&model, count, &config, cli.seed)?
                }
            };
            let mut buf = Vec::new();
            samples.write_jsonl(&mut buf)?;
            emit(&cli.output, std::str::from_utf8(&buf)?)?;
        }
        Command::Label { samples, junta } => {
            let set = load_samples(&samples)?;
            let junta_text = fs::read_to_string(&junta)?;
            let f = Junta::from_json(&junta_text)?;
            let labeled = f.label_samples(&set)?;
            let mut buf = Vec::new();
            labeled.write_jsonl(&mut buf)?;
            emit(&cli.output, std::str::from_utf8(&buf)?)?;
        }
        Command::Learn {
            model,
            samples,
            tau,
            threshold_mode,
            junta,
            delta,
            k_bound,
            default_label,
        } => {
            let model = load_model(&model)?;
            let set = load_samples(&samples)?;
            let tau = match (tau, threshold_mode) {
                (Some(t), _) => t,
                (None, ThresholdModeArg::Theoretical) => default_threshold(
                    delta,
                    k_bound,
                    model.graph().max_degree(),
                    model.sigma(),
                    model.lambda(),
                )?,
                (None, ThresholdModeArg::Calibrated) => {
                    let junta_path = junta
                        .as_ref()
                        .context("--threshold-mode calibrated needs --junta (the true junta)")?;
                    let f = Junta::from_json(&fs::read_to_string(junta_path)?)?;
                    let dist = enumerate_distribution(&model)?;
                    oracle::calibrated_threshold(&dist, &f, model.graph())?
                }
            };
            let config = LearnerConfig {
                tau,
                delta,
                k_bound,
                default_label,
            };
            let outcome = learn_junta(&set, model.graph(), &config)?;
            let report = outcome.report()?;
            emit(&cli.output, &(serde_json::to_string_pretty(&report)? + "\n"))?;
        }
        Command::Oracle { battery } => {
            let spec = match battery {
                Some(path) => {
                    let text = fs::read_to_string(&path)?;
                    let mut spec = BatterySpec::from_json(&text)?;
                    if spec.seed == 0 {
                        spec.seed = cli.seed;
                    }
                    spec
                }
                None => BatterySpec::default_battery(cli.seed),
            };
            let verdicts: Vec<Verdict> = junta_mrf::battery::run_battery(&spec)?;
            let mut text = String::new();
            for v in &verdicts {
                text.push_str(&serde_json::to_string(v)?);
                text.push('\n');
            }
            emit(&cli.output, &text)?;
            if verdicts.iter().any(|v| !v.pass) {
                return Ok(1);
            }
        }
        Command::Experiment { config, summary } => {
            let text = fs::read_to_string(&config)?;
            let mut config: ExperimentConfig = serde_json::from_str(&text)?;
            if cli.seed != 0 {
                config.seed = cli.seed;
            }
            let outcome = run_experiment(&config)?;
            match cli.format {
                Format::Csv => emit(&cli.output, &experiment_csv(&outcome))?,
                Format::Json => {
                    let body = serde_json::json!({
                        "summary": outcome.summary,
                        "trials": outcome.trials,
                    });
                    emit(&cli.output, &(serde_json::to_string_pretty(&body)? + "\n"))?;
                }
            }
            if let Some(path) = summary {
                fs::write(&path, serde_json::to_string_pretty(&outcome.summary)? + "\n")?;
            }
            eprintln!(
                "trials {} recovery {:.3} mean test error {:.5}",
                outcome.summary.trials,
                outcome.summary.recovery_rate,
                outcome.summary.mean_test_error
            );
        }
    }
    Ok(0)
}

fn main() {
    match run() {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            let _ = writeln!(std::io::stderr(), "error: {err:#}");
            std::process::exit(1);
        }
    }
}
