//! Configured verification batteries.
//!
//! Each check runs a battery of randomly generated instances through one of
//! the oracle comparisons and reduces it to a single verdict object:
//! `{ check, instances, max_residual, bound, pass }` with `pass ⇔
//! max_residual ≤ bound`. Identity checks report the worst absolute
//! residual against its tolerance; floor and fraction checks report the
//! worst *deficit* (required − observed, positive means violation) against a
//! bound of zero. The one deliberate negative control follows the same
//! convention with its deficit defined so that a healthy failure of
//! independence passes.
//!
//! Battery models draw n ∈ [6, 10], max degree ∈ [1, 3], λ ∈ [0.2, 1.0]
//! and σ = 0.3; juntas draw k ∈ [1, 3].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dist::enumerate_distribution;
use crate::error::{Error, Result};
use crate::gen;
use crate::junta::Junta;
use crate::model::MrfModel;
use crate::oracle;
use crate::poly::MultilinearPolynomial;
use crate::restriction::Restriction;
use crate::seeds;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub instances: usize,
    pub max_residual: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Verdict {
    fn new(check: &str, instances: usize, max_residual: f64, bound: f64) -> Self {
        Self {
            check: check.to_string(),
            instances,
            max_residual,
            bound,
            pass: max_residual <= bound,
        }
    }
}

fn battery_model(seed: u64, index: usize) -> Result<MrfModel> {
    let model_seed = seeds::derive(seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(model_seed);
    let n = rng.gen_range(6..=10);
    let d = rng.gen_range(1..=3);
    let lambda = rng.gen_range(0.2..=1.0);
    gen::random_model(n, d, lambda, 0.3, model_seed)
}

fn battery_junta(seed: u64, model: &MrfModel, index: usize) -> Result<Junta> {
    let junta_seed = seeds::derive(seed, 10_000 + index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(junta_seed);
    let k = rng.gen_range(1..=3);
    Junta::random(model.n(), k, &mut rng)
}

/// Irrelevant variables carry exactly zero conditional correlation: over the
/// battery, the exact statistic of every irrelevant variable under every
/// neighborhood restriction stays below 1e−10.
pub fn markov_soundness_check(models: usize, juntas: usize, seed: u64) -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    for mi in 0..models {
        let model = battery_model(seed, mi)?;
        let dist = enumerate_distribution(&model)?;
        let graph = model.graph();
        for ji in 0..juntas {
            let f = battery_junta(seed, &model, mi * juntas + ji)?;
            for i in 0..model.n() {
                if f.depends_on(i) {
                    continue;
                }
                for rho in Restriction::enumerate_over(model.n(), &graph.neighbors(i)?)? {
                    let stat = oracle::exact_statistic(&dist, &f, graph, i, &rho)?;
                    worst = worst.max(stat);
                    instances += 1;
                }
            }
        }
    }
    Ok(Verdict::new("markov_soundness", instances, worst, 1e-10))
}

/// The covariance statistic equals its factored form, and the conditional
/// independence behind the factoring holds, on every properly conditioned
/// (variable, restriction) pair in the battery.
pub fn factored_statistic_check(models: usize, juntas: usize, seed: u64) -> Result<Verdict> {
    let mut worst: f64 = 0.0;
    let mut instances = 0;
    for mi in 0..models {
        let model = battery_model(seed, mi)?;
        let dist = enumerate_distribution(&model)?;
        let graph = model.graph();
        for ji in 0..juntas {
            let f = battery_junta(seed, &model, mi * juntas + ji)?;
            for i in 0..model.n() {
                for rho in Restriction::enumerate_over(model.n(), &graph.neighbors(i)?)? {
                    let check = oracle::verify_factored_statistic(&dist, &f, i, &rho)?;
                    worst = worst.max(check.identity_residual);
                    worst = worst.max(check.independence_residual);
                    instances += 1;
                }
            }
        }
    }
    Ok(Verdict::new("factored_statistic", instances, worst, 1e-10))
}

/// Negative control: on a strongly coupled 3-chain, conditioning on a strict
/// subset of the neighborhood leaves a visible independence residual
/// (> 1e−3). The verdict's residual is the deficit 1e−3 − observed.
pub fn under_conditioning_control(seed: u64) -> Result<Verdict> {
    let psi = MultilinearPolynomial::from_terms(3, vec![(vec![0, 1], 1.0), (vec![1, 2], 1.0)])?;
    let graph = crate::graph::DependencyGraph::new(3, &[(0, 1), (1, 2)])?;
    let model = MrfModel::apply_smoothing(psi, graph, 2.0, 0.3, seed)?;
    let dist = enumerate_distribution(&model)?;
    let f = Junta::new(3, vec![1, 2], vec![0, 1, 1, 1])?;
    // supp = {0} is a strict subset of N(1) = {0, 2}
    let rho = Restriction::parse("1**")?;
    let check = oracle::verify_factored_statistic(&dist, &f, 1, &rho)?;
    Ok(Verdict::new(
        "under_conditioning_control",
        1,
        1e-3 - check.independence_residual,
        0.0,
    ))
}

/// The density-ratio identity and the 2^{−k} floor on its shared factor,
/// over every relevant pivot, neighborhood restriction, and far-set
/// assignment in the battery. Returns (identity verdict, floor verdict).
pub fn density_ratio_checks(
    models: usize,
    juntas: usize,
    seed: u64,
) -> Result<(Verdict, Verdict)> {
    let mut worst_residual: f64 = 0.0;
    let mut worst_deficit = f64::NEG_INFINITY;
    let mut instances = 0;
    for mi in 0..models {
        let model = battery_model(seed, mi)?;
        let graph = model.graph();
        for ji in 0..juntas {
            let f = battery_junta(seed, &model, mi * juntas + ji)?;
            for &pivot in f.relevant() {
                for rho in Restriction::enumerate_over(model.n(), &graph.neighbors(pivot)?)? {
                    let derived = oracle::DerivedModel::new(&model, &f, pivot, &rho)?;
                    let t = derived.far_set().len();
                    for z_idx in 0..(1usize << t) {
                        let z: Vec<u8> =
                            (0..t).map(|l| ((z_idx >> (t - 1 - l)) & 1) as u8).collect();
                        let check = oracle::verify_density_ratio(&derived, &model, &z)?;
                        worst_residual = worst_residual.max(check.residual);
                        worst_deficit =
                            worst_deficit.max(check.shared_floor - check.shared_factor);
                        instances += 1;
                    }
                }
            }
        }
    }
    Ok((
        Verdict::new("density_ratio", instances, worst_residual, 1e-9),
        Verdict::new("density_ratio_floor", instances, worst_deficit, 0.0),
    ))
}

/// For every relevant pivot of a batch of instances, the fraction of fresh
/// smoothings in which some neighborhood restriction pushes the exact
/// statistic above γ²(σe^{−λ}/16)^{k+2} must reach 1 − γ minus three
/// binomial standard errors. Residual is the worst deficit.
pub fn completeness_check(
    instances: usize,
    smoothings: usize,
    gamma: f64,
    seed: u64,
) -> Result<Verdict> {
    let target = 1.0 - gamma;
    let allowance = 3.0 * (target * gamma / smoothings as f64).sqrt();
    let required = target - allowance;
    let mut worst_deficit = f64::NEG_INFINITY;
    let mut pairs = 0;
    for inst in 0..instances {
        let inst_seed = seeds::derive(seed, 777 + inst as u64);
        let graph = gen::random_graph(8, 2, seeds::derive(inst_seed, 1))?;
        let psi_bar = gen::random_psi_bar(&graph, 0.5, seeds::derive(inst_seed, 2))?;
        let f = gen::random_junta(8, 3, seeds::derive(inst_seed, 3))?;
        for &pivot in f.relevant() {
            let fraction = oracle::completeness_experiment(
                &psi_bar,
                &graph,
                0.5,
                0.3,
                &f,
                pivot,
                gamma,
                smoothings,
                seeds::derive(inst_seed, 100 + pivot as u64),
            )?;
            worst_deficit = worst_deficit.max(required - fraction);
            pairs += 1;
        }
    }
    Ok(Verdict::new("completeness", pairs, worst_deficit, 0.0))
}

/// Exhaustive single-site conditional minima: e^{−λ}/4 for every smoothed
/// battery model and e^{−λ}/2 for its unsmoothed base. Residual is the
/// worst deficit.
pub fn unbiasedness_check(models: usize, seed: u64) -> Result<Verdict> {
    let mut worst_deficit = f64::NEG_INFINITY;
    let mut instances = 0;
    for mi in 0..models {
        let model = battery_model(seed, mi)?;
        let smoothed_floor = (-model.lambda()).exp() / 4.0;
        let scan = oracle::unbiasedness_scan(&model)?;
        worst_deficit = worst_deficit.max(smoothed_floor - scan.minimum);
        let plain = MrfModel::unsmoothed(
            model.psi_bar().clone(),
            model.graph().clone(),
            model.lambda(),
        )?;
        let plain_floor = (-model.lambda()).exp() / 2.0;
        let scan = oracle::unbiasedness_scan(&plain)?;
        worst_deficit = worst_deficit.max(plain_floor - scan.minimum);
        instances += 2;
    }
    Ok(Verdict::new("unbiasedness", instances, worst_deficit, 0.0))
}

/// Conditional floors: on every smoothed battery model, for every support of
/// size ≤ `max_support` and every assignment of it, every conditional point
/// mass of the complementary coordinates is at least (e^{−λ}/4)^(free
/// coordinates). Residual is the worst deficit.
pub fn conditional_floor_check(models: usize, max_support: usize, seed: u64) -> Result<Verdict> {
    let mut worst_deficit = f64::NEG_INFINITY;
    let mut instances = 0;
    for mi in 0..models {
        let model = battery_model(seed, mi)?;
        let n = model.n();
        let dist = enumerate_distribution(&model)?;
        let delta = (-model.lambda()).exp() / 4.0;
        let supports = subsets_up_to(n, max_support);
        for support in supports {
            let smask: usize = support.iter().map(|&i| 1usize << i).sum();
            let floor = delta.powi((n - support.len()) as i32);
            // bucket the table by the support assignment in one pass
            let mut mass = vec![0.0f64; 1 << n];
            let mut min_point = vec![f64::INFINITY; 1 << n];
            for (m, &p) in dist.probabilities().iter().enumerate() {
                let key = m & smask;
                mass[key] += p;
                if p < min_point[key] {
                    min_point[key] = p;
                }
            }
            for key in 0..(1usize << n) {
                if key & smask == key && mass[key] > 0.0 && min_point[key].is_finite() {
                    let min_conditional = min_point[key] / mass[key];
                    worst_deficit = worst_deficit.max(floor - min_conditional);
                    instances += 1;
                }
            }
        }
    }
    Ok(Verdict::new(
        "conditional_floors",
        instances,
        worst_deficit,
        0.0,
    ))
}

fn subsets_up_to(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for size in 1..=max_size.min(n) {
        let mut stack = vec![(Vec::new(), 0usize)];
        while let Some((prefix, start)) = stack.pop() {
            if prefix.len() == size {
                out.push(prefix);
                continue;
            }
            for v in start..n {
                let mut next = prefix.clone();
                next.push(v);
                stack.push((next, v + 1));
            }
        }
    }
    out
}

/// Monte Carlo anticoncentration: over a battery of degree 1–3 polynomials
/// and ε ∈ {1e−4, 1e−3, 1e−2}, the empirical probability of |p(x)| ≤
/// c·σ^ℓ·ε stays within the 2^ℓ√ε bound plus three binomial standard
/// errors. Residual is the worst deficit.
pub fn anticoncentration_check(trials: usize, seed: u64) -> Result<Verdict> {
    let sigma = 0.3;
    let mut polys: Vec<MultilinearPolynomial> = vec![
        MultilinearPolynomial::from_terms(6, vec![(vec![0], 1.0)])?,
        MultilinearPolynomial::from_terms(6, vec![(vec![0, 1], 1.0)])?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, 55));
    for _ in 0..6 {
        let degree = rng.gen_range(1..=3usize);
        let mut terms: Vec<(Vec<usize>, f64)> = Vec::new();
        // one witness term of full degree plus random lower clutter
        let mut vars: Vec<usize> = (0..6).collect();
        use rand::seq::SliceRandom;
        vars.shuffle(&mut rng);
        terms.push((
            vars[..degree].to_vec(),
            rng.gen_range(0.5..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 },
        ));
        for _ in 0..3 {
            let size = rng.gen_range(0..=degree);
            vars.shuffle(&mut rng);
            terms.push((
                vars[..size].to_vec(),
                rng.gen_range(-2.0..2.0),
            ));
        }
        polys.push(MultilinearPolynomial::from_terms(6, terms)?);
    }
    let mut worst_deficit = f64::NEG_INFINITY;
    let mut instances = 0;
    for (pi, p) in polys.iter().enumerate() {
        let ell = p.degree();
        let c = p
            .terms()
            .filter(|(vars, _)| vars.len() == ell)
            .map(|(_, coeff)| coeff.abs())
            .fold(f64::INFINITY, f64::min);
        for (ei, &epsilon) in [1e-4, 1e-3, 1e-2].iter().enumerate() {
            let fraction = oracle::anticoncentration_trial(
                p,
                c,
                ell,
                sigma,
                epsilon,
                trials,
                seeds::derive(seed, (100 + pi * 10 + ei) as u64),
            )?;
            let bound = ((1u64 << ell) as f64 * epsilon.sqrt()).min(1.0);
            let allowed = bound + 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
            worst_deficit = worst_deficit.max(fraction - allowed);
            instances += 1;
        }
    }
    Ok(Verdict::new(
        "anticoncentration",
        instances,
        worst_deficit,
        0.0,
    ))
}

/// Loads and validates a model file; a file that fails validation produces a
/// failing verdict rather than an error, so corrupted inputs surface as a
/// nonzero battery exit.
pub fn validate_model_check(path: &str) -> Verdict {
    match std::fs::read_to_string(path).map_err(Error::from).and_then(|text| {
        MrfModel::from_json(&text)
    }) {
        Ok(_) => Verdict::new("validate_model", 1, 0.0, 0.0),
        Err(_) => Verdict::new("validate_model", 1, 1.0, 0.0),
    }
}

fn default_models() -> usize {
    50
}
fn default_juntas() -> usize {
    20
}
fn default_smoothings() -> usize {
    200
}
fn default_gamma() -> f64 {
    0.2
}
fn default_instances() -> usize {
    4
}
fn default_max_support() -> usize {
    3
}
fn default_trials() -> usize {
    100_000
}

/// One named check with its parameters; unknown names fail to parse.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckSpec {
    MarkovSoundness {
        #[serde(default = "default_models")]
        models: usize,
        #[serde(default = "default_juntas")]
        juntas: usize,
    },
    FactoredStatistic {
        #[serde(default = "default_models")]
        models: usize,
        #[serde(default = "default_juntas")]
        juntas: usize,
    },
    UnderConditioningControl {},
    DensityRatio {
        #[serde(default = "default_models")]
        models: usize,
        #[serde(default = "default_juntas")]
        juntas: usize,
    },
    Completeness {
        #[serde(default = "default_instances")]
        instances: usize,
        #[serde(default = "default_smoothings")]
        smoothings: usize,
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    Unbiasedness {
        #[serde(default = "default_models")]
        models: usize,
    },
    ConditionalFloors {
        #[serde(default = "default_models")]
        models: usize,
        #[serde(default = "default_max_support")]
        max_support: usize,
    },
    Anticoncentration {
        #[serde(default = "default_trials")]
        trials: usize,
    },
    ValidateModel {
        path: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatterySpec {
    #[serde(default)]
    pub seed: u64,
    pub checks: Vec<CheckSpec>,
}

impl BatterySpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed {
            what: "battery spec".to_string(),
            reason: e.to_string(),
        })
    }

    /// Every generated check at its default desk-scale size.
    pub fn default_battery(seed: u64) -> Self {
        Self {
            seed,
            checks: vec![
                CheckSpec::MarkovSoundness {
                    models: default_models(),
                    juntas: default_juntas(),
                },
                CheckSpec::FactoredStatistic {
                    models: default_models(),
                    juntas: default_juntas(),
                },
                CheckSpec::UnderConditioningControl {},
                CheckSpec::DensityRatio {
                    models: default_models(),
                    juntas: default_juntas(),
                },
                CheckSpec::Completeness {
                    instances: default_instances(),
                    smoothings: default_smoothings(),
                    gamma: default_gamma(),
                },
                CheckSpec::Unbiasedness {
                    models: default_models(),
                },
                CheckSpec::ConditionalFloors {
                    models: default_models(),
                    max_support: default_max_support(),
                },
                CheckSpec::Anticoncentration {
                    trials: default_trials(),
                },
            ],
        }
    }
}

/// Runs every check in order, collecting verdicts.
pub fn run_battery(spec: &BatterySpec) -> Result<Vec<Verdict>> {
    let mut verdicts = Vec::new();
    for check in &spec.checks {
        match check {
            CheckSpec::MarkovSoundness { models, juntas } => {
                verdicts.push(markov_soundness_check(*models, *juntas, spec.seed)?);
            }
            CheckSpec::FactoredStatistic { models, juntas } => {
                verdicts.push(factored_statistic_check(*models, *juntas, spec.seed)?);
            }
            CheckSpec::UnderConditioningControl {} => {
                verdicts.push(under_conditioning_control(spec.seed)?);
            }
            CheckSpec::DensityRatio { models, juntas } => {
                let (identity, floor) = density_ratio_checks(*models, *juntas, spec.seed)?;
                verdicts.push(identity);
                verdicts.push(floor);
            }
            CheckSpec::Completeness {
                instances,
                smoothings,
                gamma,
            } => {
                verdicts.push(completeness_check(*instances, *smoothings, *gamma, spec.seed)?);
            }
            CheckSpec::Unbiasedness { models } => {
                verdicts.push(unbiasedness_check(*models, spec.seed)?);
            }
            CheckSpec::ConditionalFloors {
                models,
                max_support,
            } => {
                verdicts.push(conditional_floor_check(*models, *max_support, spec.seed)?);
            }
            CheckSpec::Anticoncentration { trials } => {
                verdicts.push(anticoncentration_check(*trials, spec.seed)?);
            }
            CheckSpec::ValidateModel { path } => {
                verdicts.push(validate_model_check(path));
            }
        }
    }
    Ok(verdicts)
}
