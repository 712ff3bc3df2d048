//! Seeded instance generators for experiments and check batteries.
//!
//! Models come from a random bounded-degree graph with uniform random clique
//! potentials (linear terms, edge terms, and occasional triangle terms),
//! rescaled so that the largest per-variable width is exactly λ, then
//! smoothed. Juntas are uniform over true k-juntas.
//!
//! The chain-confounder instance is the crafted regression case for the
//! contrast experiment: an irrelevant variable sits next to a strongly
//! coupled relevant one while a genuinely relevant variable acts only
//! through a rarely-active mask, so plain label correlation ranks the
//! irrelevant neighbor above it.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::DependencyGraph;
use crate::junta::Junta;
use crate::model::MrfModel;
use crate::poly::MultilinearPolynomial;
use crate::seeds;

/// Random graph with maximum degree at most `d`: candidate pairs are
/// shuffled and accepted greedily (with some slack so graphs vary) while
/// both endpoints have spare degree.
pub fn random_graph(n: usize, d: usize, seed: u64) -> Result<DependencyGraph> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".to_string()));
    }
    if d >= n && d != 0 {
        return Err(Error::InvalidParameter(format!(
            "degree bound {d} infeasible for n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .collect();
    pairs.shuffle(&mut rng);
    let mut graph = DependencyGraph::empty(n);
    for (u, v) in pairs {
        if graph.degree(u)? < d && graph.degree(v)? < d && rng.gen::<f64>() < 0.75 {
            graph.add_edge(u, v)?;
        }
    }
    Ok(graph)
}

/// Random potentials over the cliques of `graph`: every vertex gets a linear
/// term, every edge a pair term, and each triangle a cubic term with
/// probability 1/2, all with Unif[−1, 1] coefficients; the result is then
/// rescaled so the maximum width equals λ. λ = 0 gives the zero polynomial.
pub fn random_psi_bar(
    graph: &DependencyGraph,
    lambda: f64,
    seed: u64,
) -> Result<MultilinearPolynomial> {
    if lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must be nonnegative"
        )));
    }
    let n = graph.n();
    if lambda == 0.0 {
        return Ok(MultilinearPolynomial::zero(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms: Vec<(Vec<usize>, f64)> = Vec::new();
    for i in 0..n {
        terms.push((vec![i], rng.gen_range(-1.0..1.0)));
    }
    for (u, v) in graph.edges() {
        terms.push((vec![u, v], rng.gen_range(-1.0..1.0)));
    }
    for tri in graph.triangles() {
        if rng.gen::<f64>() < 0.5 {
            terms.push((tri.to_vec(), rng.gen_range(-1.0..1.0)));
        }
    }
    let raw = MultilinearPolynomial::from_terms(n, terms)?;
    let max_width = raw.max_width();
    if max_width == 0.0 {
        return Ok(raw);
    }
    Ok(raw.scale(lambda / max_width))
}

/// Random (σ, λ)-smooth model; σ = 0 yields the unsmoothed base model,
/// which only the oracle and baseline paths use.
pub fn random_model(n: usize, d: usize, lambda: f64, sigma: f64, seed: u64) -> Result<MrfModel> {
    let graph = random_graph(n, d, seeds::derive(seed, 1))?;
    let psi_bar = random_psi_bar(&graph, lambda, seeds::derive(seed, 2))?;
    if sigma == 0.0 {
        MrfModel::unsmoothed(psi_bar, graph, lambda)
    } else {
        MrfModel::apply_smoothing(psi_bar, graph, lambda, sigma, seeds::derive(seed, 3))
    }
}

/// Random true k-junta, seeded.
pub fn random_junta(n: usize, k: usize, seed: u64) -> Result<Junta> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Junta::random(n, k, &mut rng)
}

/// A full labeled-learning instance: a smoothed model plus an independent
/// random k-junta over the same variables.
pub fn generate_instance(
    n: usize,
    k: usize,
    d: usize,
    lambda: f64,
    sigma: f64,
    seed: u64,
) -> Result<(MrfModel, Junta)> {
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    let model = random_model(n, d, lambda, sigma, seed)?;
    let junta = random_junta(n, k, seeds::derive(seed, 4))?;
    Ok((model, junta))
}

/// The crafted contrast instance. See the module docs; the learner's
/// conditional statistic must exclude `confounder` while the unconditional
/// baseline ranks it above `weak_relevant`.
#[derive(Debug, Clone)]
pub struct ChainConfounder {
    pub model: MrfModel,
    pub junta: Junta,
    /// Irrelevant variable tightly coupled to `strong_relevant`.
    pub confounder: usize,
    /// The dominant relevant variable.
    pub strong_relevant: usize,
    /// The relevant variable the baseline under-ranks.
    pub weak_relevant: usize,
}

/// Builds the chain-confounder instance with a fresh smoothing.
///
/// Layout on 6 variables: a strong edge (0,1) couples the confounder x₁ to
/// the dominant relevant variable x₀; x₁ also hangs off a chain stub (1,2).
/// The label is f = x₀ ∨ (x₃ ∧ x₅); x₅ carries a strong negative field so
/// that the x₃∧x₅ mask fires rarely, which crushes the plain correlation of
/// x₃ with the label but not its neighborhood-conditioned statistic (the
/// edge (3,5) puts the mask inside x₃'s neighborhood).
pub fn chain_confounder_instance(sigma: f64, seed: u64) -> Result<ChainConfounder> {
    let n = 6;
    let graph = DependencyGraph::new(n, &[(0, 1), (1, 2), (3, 5)])?;
    let psi_bar = MultilinearPolynomial::from_terms(
        n,
        vec![
            (vec![0, 1], 2.0),
            (vec![1, 2], 0.3),
            (vec![3, 5], 0.2),
            (vec![5], -1.9),
        ],
    )?;
    let lambda = psi_bar.max_width();
    let model = if sigma == 0.0 {
        MrfModel::unsmoothed(psi_bar, graph, lambda)?
    } else {
        MrfModel::apply_smoothing(psi_bar, graph, lambda, sigma, seed)?
    };
    // f = x0 OR (x3 AND x5), table over (x0, x3, x5) MSB-first
    let junta = Junta::new(n, vec![0, 3, 5], vec![0, 0, 0, 1, 1, 1, 1, 1])?;
    Ok(ChainConfounder {
        model,
        junta,
        confounder: 1,
        strong_relevant: 0,
        weak_relevant: 3,
    })
}
