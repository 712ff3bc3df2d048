//! Relevant-variable selection and truth-table learning.
//!
//! The selector computes, for every variable i and every restriction ρ fixing
//! exactly the neighborhood N_G(i), the empirical conditional correlation
//!
//! ```text
//! I_S(i, ρ) = |E_{S_ρ}[y·x_i] − E_{S_ρ}[y]·E_{S_ρ}[x_i]|
//! ```
//!
//! and keeps the variables for which some restriction pushes the statistic
//! strictly above the threshold τ. Conditioning on the neighborhood is what
//! makes the statistic exactly zero for irrelevant variables: given its
//! neighbors, x_i is independent of everything else, so only a genuine
//! dependence of the label on x_i can produce correlation.
//!
//! The second stage builds a truth table over the selected variables by
//! per-assignment majority vote, which coincides with the empirical risk
//! minimizer in the realizable fully-covered case.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DependencyGraph;
use crate::junta::Junta;
use crate::restriction::Restriction;
use crate::samples::SampleSet;

/// One evaluated statistic: the pivot, the conditioning restriction, the
/// empirical value, and how many samples survived the restriction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticRecord {
    pub i: usize,
    pub rho: Restriction,
    pub value: f64,
    pub support_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Selection threshold; values strictly above it select the variable.
    pub tau: f64,
    /// Failure probability budget, used when deriving τ from theory.
    pub delta: f64,
    /// Junta arity bound; the learner aborts if more than `2 * k_bound`
    /// variables get selected.
    pub k_bound: usize,
    /// Label for truth-table assignments never seen in the sample.
    pub default_label: u8,
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold tau = {} must be positive",
                self.tau
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} outside (0, 1)",
                self.delta
            )));
        }
        if self.k_bound == 0 {
            return Err(Error::InvalidParameter("k_bound must be >= 1".to_string()));
        }
        if self.default_label > 1 {
            return Err(Error::InvalidParameter(
                "default label must be 0/1".to_string(),
            ));
        }
        Ok(())
    }

    pub fn relevant_cap(&self) -> usize {
        2 * self.k_bound
    }
}

fn check_pivot_and_support(
    samples: &SampleSet,
    graph: &DependencyGraph,
    i: usize,
    rho: &Restriction,
) -> Result<()> {
    if rho.n() != samples.n() || graph.n() != samples.n() {
        return Err(Error::DimensionMismatch {
            expected: samples.n(),
            actual: rho.n().min(graph.n()),
        });
    }
    if !rho.is_free(i) {
        return Err(Error::PivotInSupport { index: i });
    }
    let support = rho.support();
    let neighborhood = graph.neighbors(i)?;
    if support != neighborhood {
        return Err(Error::SupportMismatch {
            index: i,
            support,
            neighborhood,
        });
    }
    Ok(())
}

/// I_S(i, ρ) over the filtered subsample S_ρ. An empty S_ρ yields value 0
/// with support_count 0; the strictly positive threshold then never selects
/// on it.
pub fn empirical_statistic(
    samples: &SampleSet,
    graph: &DependencyGraph,
    i: usize,
    rho: &Restriction,
) -> Result<StatisticRecord> {
    check_pivot_and_support(samples, graph, i, rho)?;
    let mut count = 0u64;
    let mut sum_x = 0u64;
    let mut sum_y = 0u64;
    let mut sum_xy = 0u64;
    for ex in samples.iter() {
        if rho.matches(&ex.x) {
            count += 1;
            sum_x += ex.x[i] as u64;
            sum_y += ex.y as u64;
            sum_xy += (ex.x[i] & ex.y) as u64;
        }
    }
    let value = if count == 0 {
        0.0
    } else {
        let m = count as f64;
        (sum_xy as f64 / m - (sum_x as f64 / m) * (sum_y as f64 / m)).abs()
    };
    Ok(StatisticRecord {
        i,
        rho: rho.clone(),
        value,
        support_count: count as usize,
    })
}

/// Evaluates the statistic for every variable and every restriction of its
/// neighborhood, in (variable, lexicographic restriction) order.
pub fn scan_statistics(
    samples: &SampleSet,
    graph: &DependencyGraph,
) -> Result<Vec<StatisticRecord>> {
    if graph.n() != samples.n() {
        return Err(Error::DimensionMismatch {
            expected: samples.n(),
            actual: graph.n(),
        });
    }
    let per_variable: Vec<Vec<StatisticRecord>> = (0..graph.n())
        .into_par_iter()
        .map(|i| {
            let neighborhood = graph.neighbors(i)?;
            Restriction::enumerate_over(samples.n(), &neighborhood)?
                .iter()
                .map(|rho| empirical_statistic(samples, graph, i, rho))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_variable.into_iter().flatten().collect())
}

/// The selection pass: every variable with some restriction of its
/// neighborhood whose statistic is strictly above τ.
pub fn find_relevant_variables(
    samples: &SampleSet,
    graph: &DependencyGraph,
    tau: f64,
) -> Result<BTreeSet<usize>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "threshold tau = {tau} must be positive"
        )));
    }
    Ok(scan_statistics(samples, graph)?
        .into_iter()
        .filter(|r| r.value > tau)
        .map(|r| r.i)
        .collect())
}

/// Output of the full learner: the selected variables, the majority-vote
/// truth table over them, every statistic evaluated, and coverage
/// diagnostics.
#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub tau: f64,
    pub relevant: BTreeSet<usize>,
    pub hypothesis: Junta,
    pub records: Vec<StatisticRecord>,
    pub diagnostics: Vec<String>,
}

impl LearnOutcome {
    /// The JSON report: chosen τ, records above τ/2, the selected set, the
    /// hypothesis, and diagnostics.
    pub fn report(&self) -> Result<LearnerReport> {
        Ok(LearnerReport {
            tau: self.tau,
            relevant: self.relevant.iter().copied().collect(),
            records: self
                .records
                .iter()
                .filter(|r| r.value > self.tau / 2.0)
                .cloned()
                .collect(),
            hypothesis: serde_json::from_str(&self.hypothesis.to_json()?)?,
            diagnostics: self.diagnostics.clone(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LearnerReport {
    pub tau: f64,
    pub relevant: Vec<usize>,
    pub records: Vec<StatisticRecord>,
    pub hypothesis: serde_json::Value,
    pub diagnostics: Vec<String>,
}

/// Runs selection then builds the hypothesis truth table by majority label
/// per assignment of the selected variables. Ties and unseen assignments
/// fall back to the configured default label; both are reported as
/// diagnostics. Aborts if the selected set overflows the cap.
pub fn learn_junta(
    samples: &SampleSet,
    graph: &DependencyGraph,
    config: &LearnerConfig,
) -> Result<LearnOutcome> {
    config.validate()?;
    let records = scan_statistics(samples, graph)?;
    let relevant: BTreeSet<usize> = records
        .iter()
        .filter(|r| r.value > config.tau)
        .map(|r| r.i)
        .collect();
    if relevant.len() > config.relevant_cap() {
        return Err(Error::RelevantSetOverflow {
            found: relevant.len(),
            cap: config.relevant_cap(),
        });
    }
    let rel: Vec<usize> = relevant.iter().copied().collect();
    let k = rel.len();
    let mut ones = vec![0u64; 1 << k];
    let mut zeros = vec![0u64; 1 << k];
    for ex in samples.iter() {
        let idx = rel.iter().enumerate().fold(0usize, |acc, (l, &r)| {
            acc | (((ex.x[r] & 1) as usize) << (k - 1 - l))
        });
        if ex.y == 1 {
            ones[idx] += 1;
        } else {
            zeros[idx] += 1;
        }
    }
    let mut diagnostics = Vec::new();
    let mut unseen = 0usize;
    let mut inconsistent = 0usize;
    let mut ties = 0usize;
    let table: Vec<u8> = (0..(1usize << k))
        .map(|idx| {
            let (o, z) = (ones[idx], zeros[idx]);
            if o + z == 0 {
                unseen += 1;
                config.default_label
            } else {
                if o > 0 && z > 0 {
                    inconsistent += 1;
                }
                match o.cmp(&z) {
                    std::cmp::Ordering::Greater => 1,
                    std::cmp::Ordering::Less => 0,
                    std::cmp::Ordering::Equal => {
                        ties += 1;
                        config.default_label
                    }
                }
            }
        })
        .collect();
    if unseen > 0 {
        diagnostics.push(format!(
            "{unseen} of {} assignments of the selected variables were never sampled; defaulted to {}",
            1usize << k,
            config.default_label
        ));
    }
    if inconsistent > 0 {
        diagnostics.push(format!(
            "{inconsistent} assignments carried both labels; majority vote applied"
        ));
    }
    if ties > 0 {
        diagnostics.push(format!(
            "{ties} assignments tied; defaulted to {}",
            config.default_label
        ));
    }
    let hypothesis = Junta::new(samples.n(), rel, table)?;
    Ok(LearnOutcome {
        tau: config.tau,
        relevant,
        hypothesis,
        records,
        diagnostics,
    })
}

/// The threshold recipe: τ = ½ · (δ / (k·2^d))² · (σ·e^{−λ} / 16)^{k+2}.
///
/// Parameter checks are positivity and δ ≤ 1 only; the formula itself is
/// defined for any positive σ, which the sanity tests exploit.
pub fn default_threshold(delta: f64, k: usize, d: usize, sigma: f64, lambda: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta = {delta} outside (0, 1]"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".to_string()));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma = {sigma} must be positive"
        )));
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must be nonnegative"
        )));
    }
    let union = delta / (k as f64 * (1u64 << d) as f64);
    let base = sigma * (-lambda).exp() / 16.0;
    Ok(0.5 * union * union * base.powi(k as i32 + 2))
}

/// Sample size under which |I_S(i,ρ) − I(i,ρ)| ≤ τ holds with probability
/// at least 1 − γ: Hoeffding for each of the three expectations at
/// tolerance τ/10 over S_ρ, then inflated by the worst-case restriction
/// probability (e^{−λ}/8)^d so S_ρ is large enough with high probability.
pub fn concentration_sample_size(tau: f64, d: usize, lambda: f64, gamma: f64) -> Result<usize> {
    if !(tau > 0.0 && gamma > 0.0 && gamma < 1.0 && lambda >= 0.0) {
        return Err(Error::InvalidParameter(
            "need tau > 0, gamma in (0,1), lambda >= 0".to_string(),
        ));
    }
    let per_expectation = (6.0 / gamma).ln() / (2.0 * (tau / 10.0).powi(2));
    let restriction_floor = ((-lambda).exp() / 8.0).powi(d as i32);
    Ok((2.0 * per_expectation / restriction_floor).ceil() as usize)
}

/// The unconditional correlation statistic |E_S[y·x_i] − E_S[y]·E_S[x_i]|,
/// kept for contrast experiments only: on non-product marginals it can rank
/// a coupled irrelevant variable above a genuinely relevant one.
pub fn baseline_product_statistic(samples: &SampleSet, i: usize) -> Result<f64> {
    if i >= samples.n() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: samples.n(),
        });
    }
    if samples.is_empty() {
        return Ok(0.0);
    }
    let m = samples.len() as f64;
    let mut sum_x = 0u64;
    let mut sum_y = 0u64;
    let mut sum_xy = 0u64;
    for ex in samples.iter() {
        sum_x += ex.x[i] as u64;
        sum_y += ex.y as u64;
        sum_xy += (ex.x[i] & ex.y) as u64;
    }
    Ok((sum_xy as f64 / m - (sum_x as f64 / m) * (sum_y as f64 / m)).abs())
}
