//! Brute-force ground truth for the identities and bounds the learner
//! relies on.
//!
//! Everything here is computed from fully enumerated tables, so each check is
//! an equality or inequality between two quantities obtained along
//! independent routes:
//!
//! - the conditional correlation statistic versus its factored form
//!   E_ρ[x_i](1 − E_ρ[x_i]) · |E_ρ[slope_i]|, together with the
//!   conditional-independence residual that justifies the factoring;
//! - the density ratio Pr_{D_ρ}[x_T = z] / Pr_{(D_i)_ρ}[x_T = z] versus its
//!   closed form exp(Σ Δ_j z_j) · Σ exp(ψ_i) / Σ exp(ψ), plus the 2^{−k}
//!   floor on the shared factor;
//! - exhaustive minima of single-site conditionals against the unbiasedness
//!   floors e^{−λ}/4 (smoothed) and e^{−λ}/2 (unsmoothed);
//! - Monte Carlo anticoncentration of multilinear polynomials under uniform
//!   box perturbations against the 2^ℓ·√ε bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::{enumerate_polynomial, fill_point_bits, ExactDistribution};
use crate::error::{Error, Result};
use crate::graph::DependencyGraph;
use crate::junta::Junta;
use crate::model::{logistic, MrfModel, SmoothingVector};
use crate::poly::MultilinearPolynomial;
use crate::restriction::Restriction;
use crate::seeds;

/// Exact statistics below this are treated as the zero the Markov property
/// predicts; calibration ignores them.
pub const CALIBRATION_FLOOR: f64 = 1e-8;

struct ConditionalMoments {
    mean_x: f64,
    mean_y: f64,
    mean_xy: f64,
}

fn conditional_moments(
    dist: &ExactDistribution,
    f: &Junta,
    i: usize,
    rho: &Restriction,
) -> Result<ConditionalMoments> {
    if f.n() != dist.n() || rho.n() != dist.n() {
        return Err(Error::DimensionMismatch {
            expected: dist.n(),
            actual: f.n().min(rho.n()),
        });
    }
    if i >= dist.n() {
        return Err(Error::IndexOutOfRange {
            index: i,
            n: dist.n(),
        });
    }
    let mut mass = 0.0;
    let mut sum_x = 0.0;
    let mut sum_y = 0.0;
    let mut sum_xy = 0.0;
    let mut buf = vec![0u8; dist.n()];
    for (m, &p) in dist.probabilities().iter().enumerate() {
        fill_point_bits(m, &mut buf);
        if !rho.matches(&buf) {
            continue;
        }
        let x_i = ((m >> i) & 1) as f64;
        let y = f.eval(&buf)? as f64;
        mass += p;
        sum_x += p * x_i;
        sum_y += p * y;
        sum_xy += p * x_i * y;
    }
    if mass <= 0.0 {
        return Err(Error::ZeroProbabilityEvent);
    }
    Ok(ConditionalMoments {
        mean_x: sum_x / mass,
        mean_y: sum_y / mass,
        mean_xy: sum_xy / mass,
    })
}

/// The population statistic I(i, ρ) = |E_{D_ρ}[y·x_i] − E_{D_ρ}[y]·E_{D_ρ}[x_i]|
/// with exact conditional expectations. Requires supp(ρ) = N_G(i).
pub fn exact_statistic(
    dist: &ExactDistribution,
    f: &Junta,
    graph: &DependencyGraph,
    i: usize,
    rho: &Restriction,
) -> Result<f64> {
    let support = rho.support();
    let neighborhood = graph.neighbors(i)?;
    if support != neighborhood {
        return Err(Error::SupportMismatch {
            index: i,
            support,
            neighborhood,
        });
    }
    let m = conditional_moments(dist, f, i, rho)?;
    Ok((m.mean_xy - m.mean_x * m.mean_y).abs())
}

/// The unconditional statistic |E[y·x_i] − E[y]·E[x_i]| computed exactly;
/// the contrast baseline.
pub fn exact_baseline_statistic(dist: &ExactDistribution, f: &Junta, i: usize) -> Result<f64> {
    let m = conditional_moments(dist, f, i, &Restriction::all_free(dist.n()))?;
    Ok((m.mean_xy - m.mean_x * m.mean_y).abs())
}

/// Residuals from the factored form of the statistic.
#[derive(Debug, Clone, Copy)]
pub struct FactoredStatisticCheck {
    /// |covariance form − factored form|; an identity under proper
    /// neighborhood conditioning.
    pub identity_residual: f64,
    /// |E_ρ[intercept | x_i = 1] − E_ρ[intercept]|; zero exactly when x_i is
    /// independent of the rest under D_ρ.
    pub independence_residual: f64,
}

/// Verifies, from the table alone, that the covariance statistic equals
/// E_ρ[x_i](1 − E_ρ[x_i]) · |E_ρ[slope_i]| and that the conditional
/// independence driving that factoring holds. Accepts any restriction so
/// that under-conditioned negative controls can demonstrate failure.
pub fn verify_factored_statistic(
    dist: &ExactDistribution,
    f: &Junta,
    i: usize,
    rho: &Restriction,
) -> Result<FactoredStatisticCheck> {
    let moments = conditional_moments(dist, f, i, rho)?;
    let lhs = (moments.mean_xy - moments.mean_x * moments.mean_y).abs();

    let decomp = f.decompose(i)?;
    let mut buf = vec![0u8; dist.n()];
    let mut slope_sum = 0.0;
    let mut intercept_sum = 0.0;
    let mut intercept_given_one = 0.0;
    let mut mass_one = 0.0;
    let mut mass = 0.0;
    for (m, &p) in dist.probabilities().iter().enumerate() {
        fill_point_bits(m, &mut buf);
        if !rho.matches(&buf) {
            continue;
        }
        mass += p;
        slope_sum += p * decomp.slope_at(&buf) as f64;
        let h = decomp.intercept_at(&buf) as f64;
        intercept_sum += p * h;
        if (m >> i) & 1 == 1 {
            mass_one += p;
            intercept_given_one += p * h;
        }
    }
    let mean_slope = slope_sum / mass;
    let rhs = (moments.mean_x * (1.0 - moments.mean_x)).abs() * mean_slope.abs();
    let independence_residual = if mass_one > 0.0 {
        (intercept_given_one / mass_one - intercept_sum / mass).abs()
    } else {
        0.0
    };
    Ok(FactoredStatisticCheck {
        identity_residual: (lhs - rhs).abs(),
        independence_residual,
    })
}

/// The auxiliary model for the density-ratio identity: for a pivot i with
/// relevant set R, the far set T_i = R ∖ {i} ∖ N_G(i) holds the relevant
/// variables outside the conditioned neighborhood, and the stripped
/// factorization ψ_i = ψ − Σ_{j∈T_i} Δ_j x_j removes exactly their
/// perturbations.
#[derive(Debug, Clone)]
pub struct DerivedModel {
    n: usize,
    pivot: usize,
    junta_arity: usize,
    far_set: Vec<usize>,
    scope: Vec<usize>,
    stripped_psi: MultilinearPolynomial,
    full_psi: MultilinearPolynomial,
    rho: Restriction,
    /// h̄(z) = Pr_{(D_i)_ρ}[x_{T_i} = z] · slope value at (w_ρ, z), indexed
    /// by z over `far_set` in listed order, first listed most significant.
    weighted_slope: Vec<f64>,
}

impl DerivedModel {
    pub fn new(model: &MrfModel, f: &Junta, pivot: usize, rho: &Restriction) -> Result<Self> {
        let n = model.n();
        if f.n() != n || rho.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: f.n().min(rho.n()),
            });
        }
        let neighborhood = model.graph().neighbors(pivot)?;
        let support = rho.support();
        if support != neighborhood {
            return Err(Error::SupportMismatch {
                index: pivot,
                support,
                neighborhood,
            });
        }
        let far_set: Vec<usize> = f
            .relevant()
            .iter()
            .copied()
            .filter(|&r| r != pivot && !neighborhood.contains(&r))
            .collect();
        let mut scope = neighborhood.clone();
        scope.extend(&far_set);
        let full_psi = model.factorization();
        let stripped_psi = full_psi.minus_linear_on(&far_set, &model.delta_vector())?;

        // h̄ from the stripped distribution conditioned on ρ
        let stripped_dist = enumerate_polynomial(&stripped_psi)?.conditional(rho)?;
        let decomp = f.decompose(pivot)?;
        let t = far_set.len();
        let mut weighted_slope = vec![0.0; 1 << t];
        let mut buf = vec![0u8; n];
        for (z_idx, slot) in weighted_slope.iter_mut().enumerate() {
            // slope value at (w_ρ, z): neighbors from ρ, far set from z
            let mut probe = vec![0u8; n];
            for (j, b) in rho.fixed_bits() {
                probe[j] = b;
            }
            for (l, &v) in far_set.iter().enumerate() {
                probe[v] = ((z_idx >> (t - 1 - l)) & 1) as u8;
            }
            let slope_value = decomp.slope_at(&probe) as f64;
            let mut mass = 0.0;
            for (m, &p) in stripped_dist.probabilities().iter().enumerate() {
                fill_point_bits(m, &mut buf);
                let agrees = far_set
                    .iter()
                    .enumerate()
                    .all(|(l, &v)| buf[v] as usize == (z_idx >> (t - 1 - l)) & 1);
                if agrees {
                    mass += p;
                }
            }
            *slot = mass * slope_value;
        }
        Ok(Self {
            n,
            pivot,
            junta_arity: f.arity(),
            far_set,
            scope,
            stripped_psi,
            full_psi,
            rho: rho.clone(),
            weighted_slope,
        })
    }

    pub fn pivot(&self) -> usize {
        self.pivot
    }

    /// T_i: relevant variables outside the pivot's neighborhood.
    pub fn far_set(&self) -> &[usize] {
        &self.far_set
    }

    /// Q_i = N_G(pivot) ∪ T_i.
    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn stripped_psi(&self) -> &MultilinearPolynomial {
        &self.stripped_psi
    }

    pub fn weighted_slope(&self) -> &[f64] {
        &self.weighted_slope
    }

    pub fn rho(&self) -> &Restriction {
        &self.rho
    }
}

/// Both sides of the density-ratio identity for one far-set assignment.
#[derive(Debug, Clone, Copy)]
pub struct DensityRatioCheck {
    /// |enumerated ratio − closed form|.
    pub residual: f64,
    /// The z-independent factor Σ exp(ψ_i) / Σ exp(ψ) over the ρ-slice.
    pub shared_factor: f64,
    /// Its proved floor 2^{−k}.
    pub shared_floor: f64,
}

/// log Σ exp(values) with a max shift.
fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = values.collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + vals.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Computes Pr_{D_ρ}[x_{T_i} = z] / Pr_{(D_i)_ρ}[x_{T_i} = z] two ways:
/// by enumerating both conditioned distributions, and by the closed form
/// exp(Σ_{j∈T_i} Δ_j z_j) · (Σ_{x ~ ρ} exp(ψ_i)) / (Σ_{x ~ ρ} exp(ψ)).
pub fn verify_density_ratio(
    derived: &DerivedModel,
    model: &MrfModel,
    z: &[u8],
) -> Result<DensityRatioCheck> {
    let t = derived.far_set.len();
    if z.len() != t {
        return Err(Error::DimensionMismatch {
            expected: t,
            actual: z.len(),
        });
    }
    let rho = &derived.rho;
    let full_weights = enumerate_polynomial(&derived.full_psi)?;
    let stripped_weights = enumerate_polynomial(&derived.stripped_psi)?;
    let full_dist = full_weights.conditional(rho)?;
    let stripped_dist = stripped_weights.conditional(rho)?;
    let far_event = |dist: &ExactDistribution| -> f64 {
        let mut mass = 0.0;
        for (m, &p) in dist.probabilities().iter().enumerate() {
            let agrees = derived
                .far_set
                .iter()
                .enumerate()
                .all(|(l, &v)| ((m >> v) & 1) as u8 == z[l]);
            if agrees {
                mass += p;
            }
        }
        mass
    };
    let enumerated = far_event(&full_dist) / far_event(&stripped_dist);

    // closed form from the unnormalized slice sums
    let mut buf = vec![0u8; derived.n];
    let slice: Vec<usize> = (0..(1usize << derived.n))
        .filter(|&m| {
            fill_point_bits(m, &mut buf);
            rho.matches(&buf)
        })
        .collect();
    let lse_full = log_sum_exp(slice.iter().map(|&m| full_weights.log_weights()[m]));
    let lse_stripped = log_sum_exp(slice.iter().map(|&m| stripped_weights.log_weights()[m]));
    let shared_factor = (lse_stripped - lse_full).exp();
    let delta = model.delta_vector();
    let delta_term: f64 = derived
        .far_set
        .iter()
        .zip(z)
        .map(|(&j, &b)| if b == 1 { delta[j] } else { 0.0 })
        .sum();
    let closed_form = delta_term.exp() * shared_factor;

    Ok(DensityRatioCheck {
        residual: (enumerated - closed_form).abs(),
        shared_factor,
        shared_floor: (0.5f64).powi(derived.junta_arity as i32),
    })
}

/// Exhaustive minimum of min(p, 1−p) over all sites and all assignments of
/// the other coordinates.
#[derive(Debug, Clone)]
pub struct UnbiasednessScan {
    pub minimum: f64,
    pub argmin_site: usize,
    pub argmin_rest: Vec<u8>,
}

pub fn unbiasedness_scan(model: &MrfModel) -> Result<UnbiasednessScan> {
    let n = model.n();
    if n > crate::dist::ENUMERATION_CAP {
        return Err(Error::EnumerationCapExceeded {
            n,
            cap: crate::dist::ENUMERATION_CAP,
        });
    }
    let mut best = f64::INFINITY;
    let mut argmin_site = 0;
    let mut argmin_rest = Vec::new();
    let mut buf = vec![0u8; n];
    for i in 0..n {
        let deriv = model.site_derivative(i)?;
        let masks = crate::dist::compile_masks(&deriv);
        for m in 0..(1usize << n) {
            if (m >> i) & 1 == 1 {
                continue;
            }
            let p = logistic(crate::dist::eval_masks(&masks, m));
            let value = p.min(1.0 - p);
            if value < best {
                best = value;
                argmin_site = i;
                fill_point_bits(m, &mut buf);
                argmin_rest = buf
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &b)| b)
                    .collect();
            }
        }
    }
    Ok(UnbiasednessScan {
        minimum: best,
        argmin_site,
        argmin_rest,
    })
}

/// Draws `trials` points uniform in [−σ, σ]^n and returns the fraction with
/// |p(x)| ≤ c·σ^ℓ·ε. The caller compares against the 2^ℓ·√ε bound, which
/// requires a degree-ℓ coefficient of magnitude at least c; that
/// precondition is validated here.
#[allow(clippy::too_many_arguments)]
pub fn anticoncentration_trial(
    p: &MultilinearPolynomial,
    c: f64,
    ell: usize,
    sigma: f64,
    epsilon: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".to_string()));
    }
    if !(c > 0.0 && sigma > 0.0 && epsilon > 0.0) {
        return Err(Error::InvalidParameter(
            "need c > 0, sigma > 0, epsilon > 0".to_string(),
        ));
    }
    let has_witness = p
        .terms()
        .any(|(vars, coeff)| vars.len() == ell && coeff.abs() >= c);
    if !has_witness {
        return Err(Error::InvalidParameter(format!(
            "no degree-{ell} coefficient of magnitude >= {c}"
        )));
    }
    let cutoff = c * sigma.powi(ell as i32) * epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.n();
    let mut hits = 0usize;
    let mut x = vec![0.0; n];
    for _ in 0..trials {
        for slot in x.iter_mut() {
            let u: f64 = rng.gen();
            *slot = sigma * (2.0 * u - 1.0);
        }
        if p.eval_real(&x)?.abs() <= cutoff {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// Over fresh smoothings of ψ̄, the fraction in which some restriction of
/// the pivot's neighborhood pushes the exact statistic to at least
/// γ² · (σ·e^{−λ}/16)^{k+2}.
#[allow(clippy::too_many_arguments)]
pub fn completeness_experiment(
    psi_bar: &MultilinearPolynomial,
    graph: &DependencyGraph,
    lambda: f64,
    sigma: f64,
    f: &Junta,
    pivot: usize,
    gamma: f64,
    smoothing_trials: usize,
    seed: u64,
) -> Result<f64> {
    if !f.depends_on(pivot) {
        return Err(Error::InvalidParameter(format!(
            "variable {pivot} is irrelevant to the junta; the completeness bound is vacuous"
        )));
    }
    if smoothing_trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".to_string()));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} outside (0, 1]"
        )));
    }
    let threshold = completeness_bound(gamma, sigma, lambda, f.arity());
    let neighborhood = graph.neighbors(pivot)?;
    let restrictions = Restriction::enumerate_over(graph.n(), &neighborhood)?;
    let mut successes = 0usize;
    for t in 0..smoothing_trials {
        let model = MrfModel::apply_smoothing(
            psi_bar.clone(),
            graph.clone(),
            lambda,
            sigma,
            seeds::derive(seed, t as u64),
        )?;
        let dist = crate::dist::enumerate_distribution(&model)?;
        let best = restrictions
            .iter()
            .map(|rho| exact_statistic(&dist, f, graph, pivot, rho))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        if best >= threshold {
            successes += 1;
        }
    }
    Ok(successes as f64 / smoothing_trials as f64)
}

/// γ² · (σ·e^{−λ}/16)^{k+2}.
pub fn completeness_bound(gamma: f64, sigma: f64, lambda: f64, k: usize) -> f64 {
    gamma * gamma * (sigma * (-lambda).exp() / 16.0).powi(k as i32 + 2)
}

/// Calibrated threshold: half the smallest per-variable detection signal,
/// where a variable's signal is the best exact statistic over the
/// restrictions of its neighborhood. Detection works through the best
/// restriction, so this is the largest τ that still leaves every detectable
/// variable a factor-2 margin; signals below `CALIBRATION_FLOOR` are the
/// float residue of the Markov zeros and are ignored.
pub fn calibrated_threshold(
    dist: &ExactDistribution,
    f: &Junta,
    graph: &DependencyGraph,
) -> Result<f64> {
    let mut smallest = f64::INFINITY;
    for i in 0..graph.n() {
        let neighborhood = graph.neighbors(i)?;
        let mut best = 0.0f64;
        for rho in Restriction::enumerate_over(graph.n(), &neighborhood)? {
            let value = exact_statistic(dist, f, graph, i, &rho)?;
            if value > best {
                best = value;
            }
        }
        if best > CALIBRATION_FLOOR && best < smallest {
            smallest = best;
        }
    }
    if !smallest.is_finite() {
        return Err(Error::InvalidParameter(
            "no nonzero exact statistic to calibrate against".to_string(),
        ));
    }
    Ok(smallest / 2.0)
}

/// Re-randomizes α on the given coordinates only, leaving the rest in place.
pub fn resmooth_coordinates(
    smoothing: &SmoothingVector,
    coords: &[usize],
    seed: u64,
) -> Result<SmoothingVector> {
    let fresh = SmoothingVector::draw(smoothing.n(), smoothing.sigma(), seed)?;
    let mut alpha = smoothing.alpha().to_vec();
    for &c in coords {
        if c >= alpha.len() {
            return Err(Error::IndexOutOfRange {
                index: c,
                n: alpha.len(),
            });
        }
        alpha[c] = fresh.alpha()[c];
    }
    SmoothingVector::from_alpha(alpha, smoothing.sigma())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::enumerate_distribution;
    use crate::gen;

    fn poly(n: usize, terms: &[(&[usize], f64)]) -> MultilinearPolynomial {
        MultilinearPolynomial::from_terms(n, terms.iter().map(|(s, c)| (s.to_vec(), *c))).unwrap()
    }

    fn uniform_dist(n: usize) -> ExactDistribution {
        let g = DependencyGraph::empty(n);
        let m = MrfModel::unsmoothed(MultilinearPolynomial::zero(n), g, 0.0).unwrap();
        enumerate_distribution(&m).unwrap()
    }

    #[test]
    fn dictator_statistic_under_uniform_is_quarter() {
        let d = uniform_dist(3);
        let f = Junta::dictator(3, 0).unwrap();
        let g = DependencyGraph::empty(3);
        let stat = exact_statistic(&d, &f, &g, 0, &Restriction::all_free(3)).unwrap();
        assert!((stat - 0.25).abs() < 1e-12);
    }

    #[test]
    fn irrelevant_statistic_is_zero_on_coupled_model() {
        let n = 5;
        let psi = poly(n, &[(&[0, 1], 0.6), (&[1, 2], -0.4), (&[2, 3], 0.5)]);
        let g = DependencyGraph::new(n, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let model = MrfModel::apply_smoothing(psi, g.clone(), 1.0, 0.3, 5).unwrap();
        let dist = enumerate_distribution(&model).unwrap();
        let f = Junta::new(n, vec![0, 4], vec![0, 1, 1, 0]).unwrap();
        for i in 0..n {
            if f.depends_on(i) {
                continue;
            }
            for rho in Restriction::enumerate_over(n, &g.neighbors(i).unwrap()).unwrap() {
                let stat = exact_statistic(&dist, &f, &g, i, &rho).unwrap();
                assert!(stat <= 1e-10, "i={i} rho={rho} stat={stat}");
            }
        }
    }

    #[test]
    fn statistic_matches_factored_form() {
        let n = 6;
        let model = gen::random_model(n, 2, 0.8, 0.3, 77).unwrap();
        let dist = enumerate_distribution(&model).unwrap();
        let g = model.graph().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let f = Junta::random(n, 2, &mut rng).unwrap();
            for i in 0..n {
                for rho in Restriction::enumerate_over(n, &g.neighbors(i).unwrap()).unwrap() {
                    let check = verify_factored_statistic(&dist, &f, i, &rho).unwrap();
                    assert!(check.identity_residual <= 1e-10);
                    assert!(check.independence_residual <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn under_conditioning_breaks_independence() {
        // 3-node chain with strong coupling; fixing only one neighbor leaves
        // x1 correlated with x2
        let psi = poly(3, &[(&[0, 1], 1.0), (&[1, 2], 1.0)]);
        let g = DependencyGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let model = MrfModel::apply_smoothing(psi, g, 2.0, 0.3, 9).unwrap();
        let dist = enumerate_distribution(&model).unwrap();
        // junta on {1, 2}: intercept against pivot 1 depends on x2
        let f = Junta::new(3, vec![1, 2], vec![0, 1, 1, 1]).unwrap();
        let rho = Restriction::parse("1**").unwrap();
        let check = verify_factored_statistic(&dist, &f, 1, &rho).unwrap();
        assert!(
            check.independence_residual > 1e-3,
            "residual {} too small for the negative control",
            check.independence_residual
        );
    }

    #[test]
    fn uniform_marginal_factoring_is_exact() {
        let d = uniform_dist(4);
        let f = Junta::new(4, vec![0, 2], vec![0, 0, 0, 1]).unwrap();
        let check =
            verify_factored_statistic(&d, &f, 0, &Restriction::all_free(4)).unwrap();
        assert!(check.identity_residual < 1e-14);
        assert!(check.independence_residual < 1e-14);
    }

    #[test]
    fn density_ratio_identity_on_random_instance() {
        let n = 8;
        let model = gen::random_model(n, 2, 0.8, 0.3, 21).unwrap();
        let g = model.graph().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let f = Junta::random(n, 3, &mut rng).unwrap();
        for &pivot in f.relevant() {
            for rho in Restriction::enumerate_over(n, &g.neighbors(pivot).unwrap()).unwrap() {
                let derived = DerivedModel::new(&model, &f, pivot, &rho).unwrap();
                let t = derived.far_set().len();
                for z_idx in 0..(1usize << t) {
                    let z: Vec<u8> = (0..t).map(|l| ((z_idx >> (t - 1 - l)) & 1) as u8).collect();
                    let check = verify_density_ratio(&derived, &model, &z).unwrap();
                    assert!(check.residual <= 1e-9, "residual {}", check.residual);
                    assert!(
                        check.shared_factor >= check.shared_floor,
                        "{} < {}",
                        check.shared_factor,
                        check.shared_floor
                    );
                }
            }
        }
    }

    #[test]
    fn density_ratio_trivial_when_far_set_empty() {
        // junta inside the closed neighborhood of the pivot → T_i = ∅
        let psi = poly(3, &[(&[0, 1], 0.5)]);
        let g = DependencyGraph::new(3, &[(0, 1)]).unwrap();
        let model = MrfModel::apply_smoothing(psi, g, 1.0, 0.3, 4).unwrap();
        let f = Junta::new(3, vec![0, 1], vec![0, 0, 0, 1]).unwrap();
        let rho = Restriction::parse("*1*").unwrap();
        let derived = DerivedModel::new(&model, &f, 0, &rho).unwrap();
        assert!(derived.far_set().is_empty());
        let check = verify_density_ratio(&derived, &model, &[]).unwrap();
        assert!(check.residual < 1e-12);
        assert!((check.shared_factor - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_slope_ignores_far_set_perturbations() {
        let n = 7;
        let model = gen::random_model(n, 2, 0.8, 0.3, 31).unwrap();
        let g = model.graph().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = Junta::random(n, 3, &mut rng).unwrap();
        let pivot = f.relevant()[0];
        let rho = &Restriction::enumerate_over(n, &g.neighbors(pivot).unwrap()).unwrap()[0];
        let derived = DerivedModel::new(&model, &f, pivot, rho).unwrap();
        if derived.far_set().is_empty() {
            return;
        }
        let resmoothed = resmooth_coordinates(
            model.smoothing().unwrap(),
            derived.far_set(),
            987,
        )
        .unwrap();
        let changed = model.with_smoothing(resmoothed).unwrap();
        let derived2 = DerivedModel::new(&changed, &f, pivot, rho).unwrap();
        for (a, b) in derived.weighted_slope().iter().zip(derived2.weighted_slope()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn unbiasedness_scan_uniform_is_half() {
        let g = DependencyGraph::empty(4);
        let m = MrfModel::unsmoothed(MultilinearPolynomial::zero(4), g, 0.0).unwrap();
        let scan = unbiasedness_scan(&m).unwrap();
        assert_eq!(scan.minimum, 0.5);
    }

    #[test]
    fn unbiasedness_floors() {
        let n = 6;
        for seed in 0..5u64 {
            let smoothed = gen::random_model(n, 2, 1.0, 0.3, seed).unwrap();
            let scan = unbiasedness_scan(&smoothed).unwrap();
            assert!(scan.minimum >= (-1.0f64).exp() / 4.0);
            let plain = MrfModel::unsmoothed(
                smoothed.psi_bar().clone(),
                smoothed.graph().clone(),
                smoothed.lambda(),
            )
            .unwrap();
            let scan = unbiasedness_scan(&plain).unwrap();
            assert!(scan.minimum >= (-1.0f64).exp() / 2.0);
        }
    }

    #[test]
    fn anticoncentration_single_variable() {
        // |x₀| ≤ 0.01σ has probability exactly 0.01 under Unif[−σ, σ]
        let p = poly(2, &[(&[0], 1.0)]);
        let frac = anticoncentration_trial(&p, 1.0, 1, 0.3, 0.01, 100_000, 5).unwrap();
        assert!((frac - 0.01).abs() < 0.003, "frac = {frac}");
        assert!(frac <= 2.0 * (0.01f64).sqrt());
    }

    #[test]
    fn anticoncentration_vacuous_epsilon() {
        let p = poly(2, &[(&[0], 1.0)]);
        // cutoff σ·ε with ε ≥ 1/σ·max|p| ⇒ every draw hits
        let frac = anticoncentration_trial(&p, 1.0, 1, 0.3, 10.0, 1000, 5).unwrap();
        assert_eq!(frac, 1.0);
    }

    #[test]
    fn anticoncentration_rejects_missing_witness() {
        let p = poly(2, &[(&[0], 0.5)]);
        assert!(anticoncentration_trial(&p, 1.0, 1, 0.3, 0.01, 10, 5).is_err());
        assert!(anticoncentration_trial(&p, 0.5, 2, 0.3, 0.01, 10, 5).is_err());
    }

    #[test]
    fn completeness_experiment_dictator() {
        // dictator over a smoothed product distribution: the bound is tiny,
        // the statistic is ~1/4, so every smoothing succeeds
        let n = 5;
        let psi = MultilinearPolynomial::zero(n);
        let g = DependencyGraph::empty(n);
        let f = Junta::dictator(n, 2).unwrap();
        let frac =
            completeness_experiment(&psi, &g, 0.0, 0.3, &f, 2, 0.5, 50, 7).unwrap();
        assert!(frac >= 0.5);
        // irrelevant pivot is rejected
        assert!(completeness_experiment(&psi, &g, 0.0, 0.3, &f, 0, 0.5, 10, 7).is_err());
    }

    #[test]
    fn calibration_picks_half_the_smallest_signal() {
        let d = uniform_dist(3);
        let f = Junta::dictator(3, 1).unwrap();
        let g = DependencyGraph::empty(3);
        // only nonzero statistic is I(1, all-free) = 1/4
        let tau = calibrated_threshold(&d, &f, &g).unwrap();
        assert!((tau - 0.125).abs() < 1e-12);
        // constant junta has no signal at all
        let c = Junta::constant(3, 0).unwrap();
        assert!(calibrated_threshold(&d, &c, &g).is_err());
    }
}
