//! Seeded end-to-end experiments: generate an instance, sample, learn,
//! score, repeat.
//!
//! Trials are independent; trial t derives its own seed from the master
//! seed, so results are reproducible regardless of how many threads execute
//! the sweep. Rows are emitted in trial order either way.
//!
//! The per-trial CSV schema is append-only:
//! `trial,seed,n,k,d,sigma,lambda,N,threshold,recovered_exact,rel_superset,rel_size,test_error,runtime_ms`.
//! The runtime column is written as 0 unless timings are explicitly enabled,
//! so a default run of the same config and seed is byte-identical.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{enumerate_distribution, ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::gen;
use crate::gibbs::{gibbs_sample, GibbsConfig};
use crate::junta::Junta;
use crate::learner::{learn_junta, LearnerConfig};
use crate::model::MrfModel;
use crate::oracle;
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ThresholdMode {
    /// τ from the proved recipe at the configured δ.
    Theoretical,
    /// A user-supplied τ.
    Explicit { tau: f64 },
    /// τ = half the weakest per-variable detection signal of the true
    /// instance (exact oracle statistics); requires enumeration.
    Calibrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Exact,
    Gibbs,
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub sigma: f64,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub sample_count: usize,
    pub trials: usize,
    pub seed: u64,
    pub threshold_mode: ThresholdMode,
    pub sampler: SamplerKind,
    /// Failure budget for the theoretical threshold.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Record wall-clock per-trial runtimes in the CSV; off by default so
    /// output is byte-reproducible.
    #[serde(default)]
    pub record_timings: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k > self.n {
            return Err(Error::InvalidParameter(format!(
                "k = {} exceeds n = {}",
                self.k, self.n
            )));
        }
        if self.n == 0 || self.k == 0 {
            return Err(Error::InvalidParameter(
                "n and k must be >= 1".to_string(),
            ));
        }
        if self.d + 1 > self.n {
            return Err(Error::InvalidParameter(format!(
                "d = {} infeasible for n = {}",
                self.d, self.n
            )));
        }
        if !(self.sigma > 0.0 && self.sigma < 0.5) {
            return Err(Error::SigmaOutOfRange { sigma: self.sigma });
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda = {} must be nonnegative",
                self.lambda
            )));
        }
        if self.sample_count == 0 || self.trials == 0 {
            return Err(Error::InvalidParameter(
                "N and trials must be >= 1".to_string(),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} outside (0, 1)",
                self.delta
            )));
        }
        let needs_enumeration = self.sampler == SamplerKind::Exact
            || matches!(self.threshold_mode, ThresholdMode::Calibrated);
        if needs_enumeration && self.n > ENUMERATION_CAP {
            return Err(Error::EnumerationCapExceeded {
                n: self.n,
                cap: ENUMERATION_CAP,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub threshold: f64,
    pub recovered_exact: bool,
    pub rel_superset: bool,
    pub rel_size: usize,
    pub test_error: f64,
    pub runtime_ms: u64,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub recovery_rate: f64,
    pub superset_rate: f64,
    pub mean_test_error: f64,
    /// Trials with both exact recovery and zero measured test error.
    pub zero_error_recoveries: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialResult>,
    pub summary: Summary,
}

/// Disagreement mass between hypothesis and truth under the instance
/// distribution: exact when the dimension permits enumeration, otherwise a
/// fresh held-out Gibbs sample.
fn measure_test_error(
    model: &MrfModel,
    truth: &Junta,
    hypothesis: &Junta,
    seed: u64,
) -> Result<f64> {
    let n = model.n();
    if n <= ENUMERATION_CAP {
        let dist = enumerate_distribution(model)?;
        let mut err = 0.0;
        let mut buf = vec![0u8; n];
        for (m, &p) in dist.probabilities().iter().enumerate() {
            crate::dist::fill_point_bits(m, &mut buf);
            if truth.eval(&buf)? != hypothesis.eval(&buf)? {
                err += p;
            }
        }
        Ok(err)
    } else {
        let holdout = gibbs_sample(model, 100_000, &GibbsConfig::for_dimension(n), seed)?;
        let mut wrong = 0usize;
        for ex in holdout.iter() {
            if truth.eval(&ex.x)? != hypothesis.eval(&ex.x)? {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / holdout.len() as f64)
    }
}

fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialResult> {
    let trial_seed = seeds::derive(config.seed, trial as u64);
    let started = Instant::now();
    let (model, truth) = gen::generate_instance(
        config.n,
        config.k,
        config.d,
        config.lambda,
        config.sigma,
        trial_seed,
    )?;
    let sample_seed = seeds::derive(trial_seed, 5);
    let unlabeled = match config.sampler {
        SamplerKind::Exact => {
            enumerate_distribution(&model)?.sample(config.sample_count, sample_seed)?
        }
        SamplerKind::Gibbs => gibbs_sample(
            &model,
            config.sample_count,
            &GibbsConfig::for_dimension(config.n),
            sample_seed,
        )?,
    };
    let samples = truth.label_samples(&unlabeled)?;
    let tau = match config.threshold_mode {
        ThresholdMode::Theoretical => crate::learner::default_threshold(
            config.delta,
            config.k,
            config.d,
            config.sigma,
            config.lambda,
        )?,
        ThresholdMode::Explicit { tau } => tau,
        ThresholdMode::Calibrated => {
            let dist = enumerate_distribution(&model)?;
            oracle::calibrated_threshold(&dist, &truth, model.graph())?
        }
    };
    let learner_config = LearnerConfig {
        tau,
        delta: config.delta,
        k_bound: config.k,
        default_label: 0,
    };
    let outcome = learn_junta(&samples, model.graph(), &learner_config)?;
    let true_relevant: std::collections::BTreeSet<usize> =
        truth.relevant().iter().copied().collect();
    let recovered_exact = outcome.relevant == true_relevant;
    let rel_superset = true_relevant.is_subset(&outcome.relevant);
    let test_error = measure_test_error(
        &model,
        &truth,
        &outcome.hypothesis,
        seeds::derive(trial_seed, 6),
    )?;
    Ok(TrialResult {
        trial,
        seed: trial_seed,
        threshold: tau,
        recovered_exact,
        rel_superset,
        rel_size: outcome.relevant.len(),
        test_error,
        runtime_ms: started.elapsed().as_millis() as u64,
        diagnostics: outcome.diagnostics,
    })
}

/// Runs every trial; a failed trial is recorded with its error message, not
/// fatal. Deterministic per config and seed (up to the timing column, which
/// is zeroed in the CSV unless enabled).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let trials: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            run_trial(config, t).unwrap_or_else(|err| TrialResult {
                trial: t,
                seed: seeds::derive(config.seed, t as u64),
                threshold: 0.0,
                recovered_exact: false,
                rel_superset: false,
                rel_size: 0,
                test_error: 1.0,
                runtime_ms: 0,
                diagnostics: vec![format!("trial failed: {err}")],
            })
        })
        .collect();
    let recovered = trials.iter().filter(|t| t.recovered_exact).count();
    let supersets = trials.iter().filter(|t| t.rel_superset).count();
    let zero_error = trials
        .iter()
        .filter(|t| t.recovered_exact && t.test_error == 0.0)
        .count();
    let summary = Summary {
        trials: trials.len(),
        recovery_rate: recovered as f64 / trials.len() as f64,
        superset_rate: supersets as f64 / trials.len() as f64,
        mean_test_error: trials.iter().map(|t| t.test_error).sum::<f64>() / trials.len() as f64,
        zero_error_recoveries: zero_error,
    };
    Ok(ExperimentOutcome {
        config: config.clone(),
        trials,
        summary,
    })
}

/// The contrast experiment on the chain-confounder instance: per trial a
/// fresh smoothing and a fresh exact sample, calibrated threshold, then a
/// check that the selector leaves the confounded irrelevant variable out.
/// Returns (trials excluding the confounder, total trials).
pub fn confounder_exclusion_experiment(
    trials: usize,
    sample_count: usize,
    sigma: f64,
    seed: u64,
) -> Result<(usize, usize)> {
    if trials == 0 || sample_count == 0 {
        return Err(Error::InvalidParameter(
            "trials and N must be >= 1".to_string(),
        ));
    }
    let excluded: usize = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<usize> {
            let trial_seed = seeds::derive(seed, 9000 + t as u64);
            let instance = gen::chain_confounder_instance(sigma, trial_seed)?;
            let dist = enumerate_distribution(&instance.model)?;
            let unlabeled = dist.sample(sample_count, seeds::derive(trial_seed, 5))?;
            let samples = instance.junta.label_samples(&unlabeled)?;
            let tau = oracle::calibrated_threshold(&dist, &instance.junta, instance.model.graph())?;
            let rel =
                crate::learner::find_relevant_variables(&samples, instance.model.graph(), tau)?;
            Ok((!rel.contains(&instance.confounder)) as usize)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok((excluded, trials))
}

pub const CSV_HEADER: &str = "trial,seed,n,k,d,sigma,lambda,N,threshold,recovered_exact,rel_superset,rel_size,test_error,runtime_ms";

/// Renders the per-trial rows under the stable header.
pub fn experiment_csv(outcome: &ExperimentOutcome) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let c = &outcome.config;
    for t in &outcome.trials {
        let runtime = if c.record_timings { t.runtime_ms } else { 0 };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            t.trial,
            t.seed,
            c.n,
            c.k,
            c.d,
            c.sigma,
            c.lambda,
            c.sample_count,
            t.threshold,
            t.recovered_exact,
            t.rel_superset,
            t.rel_size,
            t.test_error,
            runtime,
        ));
    }
    out
}
