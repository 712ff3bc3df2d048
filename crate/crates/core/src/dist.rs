//! Exact distributions by full enumeration.
//!
//! For n up to the enumeration cap the density exp(ψ(x)) is tabulated over
//! all 2^n points and normalized in log space with a max shift. The table is
//! the ground truth that every oracle check and the Gibbs fidelity test
//! compare against.
//!
//! Point indexing: point index m encodes coordinate j as bit j of m (the
//! lowest bit is coordinate 0). This is internal; file formats use explicit
//! bitstrings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::MrfModel;
use crate::poly::MultilinearPolynomial;
use crate::restriction::Restriction;
use crate::samples::SampleSet;

/// Largest dimension for which full enumeration is supported (a 2^20 table).
pub const ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    n: usize,
    log_weights: Vec<f64>,
    probabilities: Vec<f64>,
}

/// Bit pattern of point index `m` as a coordinate vector.
pub fn point_bits(m: usize, n: usize) -> Vec<u8> {
    (0..n).map(|j| ((m >> j) & 1) as u8).collect()
}

/// Writes the bit pattern of `m` into an existing buffer (hot loops).
pub fn fill_point_bits(m: usize, buf: &mut [u8]) {
    for (j, slot) in buf.iter_mut().enumerate() {
        *slot = ((m >> j) & 1) as u8;
    }
}

/// Index of a coordinate vector.
pub fn point_index(x: &[u8]) -> usize {
    x.iter()
        .enumerate()
        .fold(0usize, |acc, (j, &b)| acc | ((b as usize & 1) << j))
}

/// Precompiled term masks for fast evaluation of a polynomial over all
/// points of the cube: a term is active at point m iff m contains its mask.
pub(crate) fn compile_masks(p: &MultilinearPolynomial) -> Vec<(usize, f64)> {
    p.terms()
        .map(|(vars, coeff)| {
            let mask = vars.iter().fold(0usize, |acc, &v| acc | (1 << v));
            (mask, coeff)
        })
        .collect()
}

pub(crate) fn eval_masks(masks: &[(usize, f64)], m: usize) -> f64 {
    let mut acc = 0.0;
    for &(mask, coeff) in masks {
        if m & mask == mask {
            acc += coeff;
        }
    }
    acc
}

/// Tabulates Pr[X = x] = exp(ψ(x)) / Σ_z exp(ψ(z)) for the model.
pub fn enumerate_distribution(model: &MrfModel) -> Result<ExactDistribution> {
    let dist = enumerate_polynomial(&model.factorization())?;
    // positive density is part of the construction contract
    debug_assert!(dist.probabilities.iter().all(|&p| p > 0.0));
    Ok(dist)
}

/// Tabulates the distribution with unnormalized log density `psi`.
pub fn enumerate_polynomial(psi: &MultilinearPolynomial) -> Result<ExactDistribution> {
    let n = psi.n();
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCapExceeded {
            n,
            cap: ENUMERATION_CAP,
        });
    }
    let masks = compile_masks(psi);
    let size = 1usize << n;
    let mut log_weights = Vec::with_capacity(size);
    for m in 0..size {
        log_weights.push(eval_masks(&masks, m));
    }
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probabilities: Vec<f64> = log_weights.iter().map(|&lw| (lw - max).exp()).collect();
    let total: f64 = probabilities.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "degenerate normalizer {total}"
        )));
    }
    for p in &mut probabilities {
        *p /= total;
    }
    if probabilities.iter().any(|&p| p <= 0.0) {
        return Err(Error::InvalidParameter(
            "enumerated density is not strictly positive".to_string(),
        ));
    }
    Ok(ExactDistribution {
        n,
        log_weights,
        probabilities,
    })
}

impl ExactDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn probability_of(&self, x: &[u8]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(self.probabilities[point_index(x)])
    }

    /// Expectation of a function given by point index.
    pub fn expectation_by_index<F: FnMut(usize) -> f64>(&self, mut f: F) -> f64 {
        self.probabilities
            .iter()
            .enumerate()
            .map(|(m, &p)| p * f(m))
            .sum()
    }

    /// Probability of the event that `rho` fixes.
    pub fn event_probability(&self, rho: &Restriction) -> Result<f64> {
        if rho.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: rho.n(),
            });
        }
        let (fix_mask, fix_bits) = rho_masks(rho);
        Ok(self
            .probabilities
            .iter()
            .enumerate()
            .filter(|(m, _)| m & fix_mask == fix_bits)
            .map(|(_, &p)| p)
            .sum())
    }

    /// D_ρ: renormalized over points agreeing with `rho`, zero elsewhere.
    pub fn conditional(&self, rho: &Restriction) -> Result<ExactDistribution> {
        if rho.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: rho.n(),
            });
        }
        let (fix_mask, fix_bits) = rho_masks(rho);
        let mass: f64 = self
            .probabilities
            .iter()
            .enumerate()
            .filter(|(m, _)| m & fix_mask == fix_bits)
            .map(|(_, &p)| p)
            .sum();
        if mass <= 0.0 {
            return Err(Error::ZeroProbabilityEvent);
        }
        let mut probabilities = vec![0.0; self.probabilities.len()];
        let mut log_weights = vec![f64::NEG_INFINITY; self.probabilities.len()];
        for m in 0..self.probabilities.len() {
            if m & fix_mask == fix_bits {
                probabilities[m] = self.probabilities[m] / mass;
                log_weights[m] = self.log_weights[m];
            }
        }
        Ok(ExactDistribution {
            n: self.n,
            log_weights,
            probabilities,
        })
    }

    /// Total variation distance to another table on the same space.
    pub fn total_variation(&self, other: &ExactDistribution) -> Result<f64> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        Ok(0.5
            * self
                .probabilities
                .iter()
                .zip(&other.probabilities)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>())
    }

    /// Total variation distance to an empirical histogram of point counts.
    pub fn total_variation_from_counts(&self, counts: &[u64]) -> Result<f64> {
        if counts.len() != self.probabilities.len() {
            return Err(Error::DimensionMismatch {
                expected: self.probabilities.len(),
                actual: counts.len(),
            });
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidParameter("empty histogram".to_string()));
        }
        Ok(0.5
            * self
                .probabilities
                .iter()
                .zip(counts)
                .map(|(&p, &c)| (p - c as f64 / total as f64).abs())
                .sum::<f64>())
    }

    /// `count` iid draws by inverse CDF over the table; deterministic per
    /// seed. Labels default to 0.
    pub fn sample(&self, count: usize, seed: u64) -> Result<SampleSet> {
        if count == 0 {
            return Err(Error::InvalidParameter(
                "sample count must be positive".to_string(),
            ));
        }
        let mut cumulative = Vec::with_capacity(self.probabilities.len());
        let mut acc = 0.0;
        for &p in &self.probabilities {
            acc += p;
            cumulative.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Vec<u8>> = (0..count)
            .map(|_| {
                let u: f64 = rng.gen();
                let idx = cumulative.partition_point(|&c| c <= u);
                point_bits(idx.min(self.probabilities.len() - 1), self.n)
            })
            .collect();
        SampleSet::from_points(self.n, points)
    }
}

fn rho_masks(rho: &Restriction) -> (usize, usize) {
    let mut fix_mask = 0usize;
    let mut fix_bits = 0usize;
    for (i, b) in rho.fixed_bits() {
        fix_mask |= 1 << i;
        if b == 1 {
            fix_bits |= 1 << i;
        }
    }
    (fix_mask, fix_bits)
}
