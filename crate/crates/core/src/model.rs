//! Smoothed Markov random fields on {0,1}^n.
//!
//! A model is an adversarial factorization polynomial ψ̄ of bounded width
//! (‖∂_i ψ̄‖₁ ≤ λ for every variable) over a dependency graph, plus an
//! optional random perturbation of the external field: Δ_i = ln(1 + α_i)
//! with α_i drawn iid uniform from [−σ, σ]. The full factorization is
//! ψ(x) = ψ̄(x) + Σ Δ_i x_i and the density is Pr[X = x] ∝ exp(ψ(x)).
//!
//! Single-site conditionals come from the factorization directly:
//! Pr[X_i = 1 | X_{−i} = x] = logistic(∂_i ψ(x)), which is what both the
//! Gibbs sampler and the unbiasedness checks consume.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::DependencyGraph;
use crate::poly::MultilinearPolynomial;

/// Slack applied to the width bound at validation time; the mathematical
/// bound is strict but rescaled coefficients carry rounding error.
pub const WIDTH_TOLERANCE: f64 = 1e-9;

pub fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// The random external-field perturbation: α uniform in [−σ, σ] per
/// coordinate and Δ_i = ln(1 + α_i).
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingVector {
    alpha: Vec<f64>,
    delta: Vec<f64>,
    sigma: f64,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 0.5) {
        return Err(Error::SigmaOutOfRange { sigma });
    }
    Ok(())
}

impl SmoothingVector {
    /// Draws α_i ~ Unif([−σ, σ]) independently per coordinate.
    ///
    /// Each coordinate uses its own counter-based stream keyed by
    /// (seed, coordinate), so draws are reproducible independent of
    /// iteration order and of the total dimension.
    pub fn draw(n: usize, sigma: f64, seed: u64) -> Result<Self> {
        check_sigma(sigma)?;
        let alpha: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let u: f64 = rng.gen();
                sigma * (2.0 * u - 1.0)
            })
            .collect();
        Self::from_alpha(alpha, sigma)
    }

    /// Builds the vector from stored α values (e.g. read from a model file),
    /// recomputing Δ.
    pub fn from_alpha(alpha: Vec<f64>, sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        for (i, &a) in alpha.iter().enumerate() {
            if !(a.is_finite() && a.abs() <= sigma) {
                return Err(Error::InvalidParameter(format!(
                    "alpha[{i}] = {a} outside [-{sigma}, {sigma}]"
                )));
            }
        }
        let delta = alpha.iter().map(|&a| (1.0 + a).ln()).collect();
        Ok(Self { alpha, delta, sigma })
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// A (σ, λ)-smooth MRF, or its unsmoothed base when `smoothing` is absent.
#[derive(Debug, Clone, PartialEq)]
pub struct MrfModel {
    psi_bar: MultilinearPolynomial,
    graph: DependencyGraph,
    lambda: f64,
    sigma: f64,
    smoothing: Option<SmoothingVector>,
}

impl MrfModel {
    pub fn new(
        psi_bar: MultilinearPolynomial,
        graph: DependencyGraph,
        lambda: f64,
        sigma: f64,
        smoothing: Option<SmoothingVector>,
    ) -> Result<Self> {
        if psi_bar.n() != graph.n() {
            return Err(Error::DimensionMismatch {
                expected: graph.n(),
                actual: psi_bar.n(),
            });
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda = {lambda} must be finite and nonnegative"
            )));
        }
        if let Some(sv) = &smoothing {
            if sv.n() != graph.n() {
                return Err(Error::DimensionMismatch {
                    expected: graph.n(),
                    actual: sv.n(),
                });
            }
            if sv.sigma() != sigma {
                return Err(Error::InvalidParameter(format!(
                    "model sigma {sigma} disagrees with smoothing sigma {}",
                    sv.sigma()
                )));
            }
        } else if sigma != 0.0 {
            check_sigma(sigma)?;
        }
        for i in 0..psi_bar.n() {
            let w = psi_bar.width(i)?;
            if w > lambda + WIDTH_TOLERANCE {
                return Err(Error::WidthViolation {
                    index: i,
                    width: w,
                    lambda,
                });
            }
        }
        for (vars, _) in psi_bar.terms() {
            if vars.len() >= 2 && !graph.is_clique(vars) {
                return Err(Error::CliqueInconsistency {
                    term: vars.to_vec(),
                });
            }
        }
        Ok(Self {
            psi_bar,
            graph,
            lambda,
            sigma,
            smoothing,
        })
    }

    /// The base MRF without any perturbation (Δ = 0).
    pub fn unsmoothed(
        psi_bar: MultilinearPolynomial,
        graph: DependencyGraph,
        lambda: f64,
    ) -> Result<Self> {
        Self::new(psi_bar, graph, lambda, 0.0, None)
    }

    /// Draws a fresh smoothing vector for ψ̄ and returns the smoothed model.
    /// Deterministic for a fixed seed.
    pub fn apply_smoothing(
        psi_bar: MultilinearPolynomial,
        graph: DependencyGraph,
        lambda: f64,
        sigma: f64,
        seed: u64,
    ) -> Result<Self> {
        let smoothing = SmoothingVector::draw(graph.n(), sigma, seed)?;
        Self::new(psi_bar, graph, lambda, sigma, Some(smoothing))
    }

    /// Replaces the smoothing vector, revalidating. Used by the oracle checks
    /// that re-randomize a subset of coordinates.
    pub fn with_smoothing(&self, smoothing: SmoothingVector) -> Result<Self> {
        Self::new(
            self.psi_bar.clone(),
            self.graph.clone(),
            self.lambda,
            smoothing.sigma(),
            Some(smoothing),
        )
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn psi_bar(&self) -> &MultilinearPolynomial {
        &self.psi_bar
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub fn smoothing(&self) -> Option<&SmoothingVector> {
        self.smoothing.as_ref()
    }

    pub fn is_smoothed(&self) -> bool {
        self.smoothing.is_some()
    }

    /// Δ_i, zero when unsmoothed.
    pub fn delta(&self, i: usize) -> f64 {
        self.smoothing.as_ref().map_or(0.0, |sv| sv.delta()[i])
    }

    /// Δ as a dense vector.
    pub fn delta_vector(&self) -> Vec<f64> {
        match &self.smoothing {
            Some(sv) => sv.delta().to_vec(),
            None => vec![0.0; self.n()],
        }
    }

    /// The full factorization polynomial ψ = ψ̄ + Σ Δ_i x_i.
    pub fn factorization(&self) -> MultilinearPolynomial {
        self.psi_bar
            .plus_linear(&self.delta_vector())
            .expect("dimensions validated at construction")
    }

    /// ∂_i ψ as a polynomial that never mentions x_i; callers that scan many
    /// points should compute this once per site.
    pub fn site_derivative(&self, i: usize) -> Result<MultilinearPolynomial> {
        self.factorization().partial_derivative(i)
    }

    /// Pr[X_i = 1 | X_{−i} = x_rest] = logistic(∂_i ψ(x_rest)).
    ///
    /// `x_rest` lists the other n − 1 coordinates in index order; the value
    /// is strictly inside (0, 1).
    pub fn conditional_probability(&self, i: usize, x_rest: &[u8]) -> Result<f64> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n(),
            });
        }
        if x_rest.len() != self.n() - 1 {
            return Err(Error::DimensionMismatch {
                expected: self.n() - 1,
                actual: x_rest.len(),
            });
        }
        let mut x = Vec::with_capacity(self.n());
        x.extend_from_slice(&x_rest[..i]);
        x.push(0);
        x.extend_from_slice(&x_rest[i..]);
        let d = self.site_derivative(i)?;
        Ok(logistic(d.eval(&x)?))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            n: self.n(),
            lambda: self.lambda,
            sigma: self.sigma,
            edges: self.graph.edges(),
            psi_bar: self
                .psi_bar
                .terms()
                .map(|(vars, coeff)| TermFile {
                    vars: vars.to_vec(),
                    coeff,
                })
                .collect(),
            alpha: self.smoothing.as_ref().map(|sv| sv.alpha().to_vec()),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let graph = DependencyGraph::new(file.n, &file.edges)?;
        let psi_bar = MultilinearPolynomial::from_terms(
            file.n,
            file.psi_bar.into_iter().map(|t| (t.vars, t.coeff)),
        )?;
        let smoothing = file
            .alpha
            .map(|alpha| SmoothingVector::from_alpha(alpha, file.sigma))
            .transpose()?;
        Self::new(psi_bar, graph, file.lambda, file.sigma, smoothing)
    }
}

/// On-disk model format. Indices are 0-based. `alpha` absent means the model
/// is unsmoothed.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    n: usize,
    lambda: f64,
    sigma: f64,
    edges: Vec<(usize, usize)>,
    psi_bar: Vec<TermFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    vars: Vec<usize>,
    coeff: f64,
}
