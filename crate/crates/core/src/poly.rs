//! Sparse multilinear polynomials over n binary variables.
//!
//! A polynomial is stored as a map from monomial index-sets to real
//! coefficients. On {0,1}^n every polynomial has a unique multilinear
//! representation, so this is a canonical form: keys are sorted and
//! deduplicated, and zero coefficients are never stored.
//!
//! The factorization polynomial of an MRF lives here, as do the boolean
//! derivatives used by the single-site conditionals: `partial_derivative(i)`
//! collects the terms containing variable `i` and deletes `i` from them, so
//! that for binary inputs `p(x | x_i=1) - p(x | x_i=0) = (∂_i p)(x)`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MultilinearPolynomial {
    n: usize,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl MultilinearPolynomial {
    /// The zero polynomial on `n` variables.
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Builds a polynomial from (index-set, coefficient) pairs.
    ///
    /// Index-sets are sorted and deduplicated; repeated sets have their
    /// coefficients summed; terms whose final coefficient is zero are
    /// dropped. A term with an empty index-set is a constant.
    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut map: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (mut vars, coeff) in terms {
            vars.sort_unstable();
            vars.dedup();
            for &v in &vars {
                if v >= n {
                    return Err(Error::IndexOutOfRange { index: v, n });
                }
            }
            if !coeff.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite coefficient {coeff} for term {vars:?}"
                )));
            }
            *map.entry(vars).or_insert(0.0) += coeff;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(Self { n, terms: map })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Largest index-set cardinality among stored terms (0 for constants and
    /// the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|s| s.len()).max().unwrap_or(0)
    }

    /// Iterates terms in a deterministic (lexicographic) order.
    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(s, &c)| (s.as_slice(), c))
    }

    pub fn coefficient(&self, vars: &[usize]) -> f64 {
        let mut key = vars.to_vec();
        key.sort_unstable();
        key.dedup();
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    fn check_dimension(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: len,
            });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(())
    }

    /// Evaluates at a binary point: a term contributes iff all its variables
    /// are set.
    pub fn eval(&self, x: &[u8]) -> Result<f64> {
        self.check_dimension(x.len())?;
        let mut acc = 0.0;
        for (vars, coeff) in &self.terms {
            if vars.iter().all(|&v| x[v] != 0) {
                acc += coeff;
            }
        }
        Ok(acc)
    }

    /// Evaluates at a real point (used by the anticoncentration experiments,
    /// where inputs are uniform in a box rather than binary).
    pub fn eval_real(&self, x: &[f64]) -> Result<f64> {
        self.check_dimension(x.len())?;
        let mut acc = 0.0;
        for (vars, coeff) in &self.terms {
            acc += coeff * vars.iter().map(|&v| x[v]).product::<f64>();
        }
        Ok(acc)
    }

    /// Boolean derivative with respect to variable `i`: keeps exactly the
    /// terms containing `i` with `i` deleted from their index-sets. The
    /// result never mentions `i`.
    pub fn partial_derivative(&self, i: usize) -> Result<Self> {
        self.check_index(i)?;
        let mut map = BTreeMap::new();
        for (vars, &coeff) in &self.terms {
            if let Ok(pos) = vars.binary_search(&i) {
                let mut reduced = vars.clone();
                reduced.remove(pos);
                map.insert(reduced, coeff);
            }
        }
        Ok(Self { n: self.n, terms: map })
    }

    /// ℓ₁ norm of the derivative's coefficients: Σ |coeff| over terms
    /// containing `i`.
    pub fn width(&self, i: usize) -> Result<f64> {
        self.check_index(i)?;
        Ok(self
            .terms
            .iter()
            .filter(|(vars, _)| vars.binary_search(&i).is_ok())
            .map(|(_, c)| c.abs())
            .sum())
    }

    /// Maximum width over all variables.
    pub fn max_width(&self) -> f64 {
        (0..self.n)
            .map(|i| self.width(i).expect("index in range"))
            .fold(0.0, f64::max)
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scale(&self, factor: f64) -> Self {
        let mut terms: BTreeMap<Vec<usize>, f64> = self
            .terms
            .iter()
            .map(|(s, c)| (s.clone(), c * factor))
            .collect();
        terms.retain(|_, c| *c != 0.0);
        Self { n: self.n, terms }
    }

    /// Returns this polynomial plus the linear form Σ weights[i] · x_i.
    pub fn plus_linear(&self, weights: &[f64]) -> Result<Self> {
        self.check_dimension(weights.len())?;
        let mut terms = self.terms.clone();
        for (i, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                *terms.entry(vec![i]).or_insert(0.0) += w;
            }
        }
        terms.retain(|_, c| *c != 0.0);
        Ok(Self { n: self.n, terms })
    }

    /// Returns this polynomial minus the linear terms of the given variables,
    /// with the subtracted weights taken from `weights`.
    pub fn minus_linear_on(&self, vars: &[usize], weights: &[f64]) -> Result<Self> {
        self.check_dimension(weights.len())?;
        let mut terms = self.terms.clone();
        for &i in vars {
            self.check_index(i)?;
            if weights[i] != 0.0 {
                *terms.entry(vec![i]).or_insert(0.0) -= weights[i];
            }
        }
        terms.retain(|_, c| *c != 0.0);
        Ok(Self { n: self.n, terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(n: usize, terms: &[(&[usize], f64)]) -> MultilinearPolynomial {
        MultilinearPolynomial::from_terms(n, terms.iter().map(|(s, c)| (s.to_vec(), *c))).unwrap()
    }

    #[test]
    fn eval_zero_polynomial() {
        let p = MultilinearPolynomial::zero(3);
        assert_eq!(p.eval(&[0, 1, 1]).unwrap(), 0.0);
        assert_eq!(p.eval(&[1, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn eval_monomial_on_off() {
        let p = poly(2, &[(&[0, 1], 1.0)]);
        assert_eq!(p.eval(&[1, 1]).unwrap(), 1.0);
        assert_eq!(p.eval(&[1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn eval_sum_of_active_terms() {
        // 0.5·x₁ + 2·x₁x₂x₃ at (1,1,1) = 2.5
        let p = poly(3, &[(&[0], 0.5), (&[0, 1, 2], 2.0)]);
        assert_eq!(p.eval(&[1, 1, 1]).unwrap(), 2.5);
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        let p = poly(3, &[(&[0], 1.0)]);
        assert!(matches!(
            p.eval(&[1, 1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn derivative_of_monomial() {
        let p = poly(2, &[(&[0, 1], 1.0)]);
        let d = p.partial_derivative(0).unwrap();
        assert_eq!(d, poly(2, &[(&[1], 1.0)]));
    }

    #[test]
    fn derivative_of_absent_variable_is_zero() {
        let p = poly(3, &[(&[1, 2], 1.0)]);
        assert!(p.partial_derivative(0).unwrap().is_zero());
    }

    #[test]
    fn derivative_term_by_term() {
        // 3x₁ + 2x₁x₂ − x₁x₂x₃, ∂ wrt x₁ → 3 + 2x₂ − x₂x₃
        let p = poly(3, &[(&[0], 3.0), (&[0, 1], 2.0), (&[0, 1, 2], -1.0)]);
        let d = p.partial_derivative(0).unwrap();
        assert_eq!(d, poly(3, &[(&[], 3.0), (&[1], 2.0), (&[1, 2], -1.0)]));
    }

    #[test]
    fn derivative_index_out_of_range() {
        let p = poly(2, &[(&[0], 1.0)]);
        assert!(matches!(
            p.partial_derivative(5),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn width_examples() {
        assert_eq!(MultilinearPolynomial::zero(2).width(0).unwrap(), 0.0);
        let p = poly(3, &[(&[0], 3.0), (&[0, 1], 2.0), (&[0, 1, 2], -1.0)]);
        assert_eq!(p.width(0).unwrap(), 6.0);
        let q = poly(3, &[(&[1, 2], 1.0)]);
        assert_eq!(q.width(0).unwrap(), 0.0);
    }

    #[test]
    fn duplicate_terms_merge_and_zeros_drop() {
        let p = MultilinearPolynomial::from_terms(
            2,
            vec![(vec![1, 0], 1.0), (vec![0, 1], 2.0), (vec![0], 0.0)],
        )
        .unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coefficient(&[0, 1]), 3.0);
        // exact cancellation also drops
        let q =
            MultilinearPolynomial::from_terms(2, vec![(vec![0], 1.0), (vec![0], -1.0)]).unwrap();
        assert!(q.is_zero());
    }

    #[test]
    fn rejects_out_of_range_index() {
        assert!(MultilinearPolynomial::from_terms(2, vec![(vec![2], 1.0)]).is_err());
    }

    #[test]
    fn finite_difference_identity_exhaustive() {
        // p(x|x_i=1) − p(x|x_i=0) = (∂_i p)(x) for all x, all i
        let n = 8;
        let p = poly(
            n,
            &[
                (&[0], 1.25),
                (&[0, 3], -2.0),
                (&[1, 4, 6], 0.75),
                (&[2], -0.5),
                (&[0, 2, 5, 7], 3.0),
                (&[], 4.0),
            ],
        );
        for i in 0..n {
            let d = p.partial_derivative(i).unwrap();
            // derivative never mentions i
            assert!(d.terms().all(|(vars, _)| !vars.contains(&i)));
            for m in 0..(1u32 << n) {
                let mut x: Vec<u8> = (0..n).map(|j| ((m >> j) & 1) as u8).collect();
                x[i] = 1;
                let hi = p.eval(&x).unwrap();
                x[i] = 0;
                let lo = p.eval(&x).unwrap();
                let dv = d.eval(&x).unwrap();
                assert!((hi - lo - dv).abs() < 1e-12, "i={i} m={m}");
            }
        }
    }

    proptest! {
        #[test]
        fn prop_finite_difference(seed in 0u64..1000, i in 0usize..6) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 6;
            let terms: Vec<(Vec<usize>, f64)> = (0..8)
                .map(|_| {
                    let size = rng.gen_range(0..=3);
                    let vars: Vec<usize> = (0..size).map(|_| rng.gen_range(0..n)).collect();
                    (vars, rng.gen_range(-2.0..2.0))
                })
                .collect();
            let p = MultilinearPolynomial::from_terms(n, terms).unwrap();
            let d = p.partial_derivative(i).unwrap();
            prop_assert!(d.terms().all(|(vars, _)| !vars.contains(&i)));
            for m in 0..(1u32 << n) {
                let mut x: Vec<u8> = (0..n).map(|j| ((m >> j) & 1) as u8).collect();
                x[i] = 1;
                let hi = p.eval(&x).unwrap();
                x[i] = 0;
                let lo = p.eval(&x).unwrap();
                prop_assert!((hi - lo - d.eval(&x).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eval_real_matches_binary_on_cube() {
        let p = poly(3, &[(&[0, 1], 2.0), (&[2], -1.0), (&[], 0.25)]);
        for m in 0..8u32 {
            let x: Vec<u8> = (0..3).map(|j| ((m >> j) & 1) as u8).collect();
            let xr: Vec<f64> = x.iter().map(|&b| b as f64).collect();
            assert!((p.eval(&x).unwrap() - p.eval_real(&xr).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn plus_and_minus_linear_roundtrip() {
        let p = poly(3, &[(&[0, 1], 1.0), (&[2], 0.5)]);
        let w = [0.1, 0.0, -0.2];
        let q = p.plus_linear(&w).unwrap();
        assert_eq!(q.coefficient(&[0]), 0.1);
        assert_eq!(q.coefficient(&[2]), 0.3);
        let back = q.minus_linear_on(&[0, 2], &w).unwrap();
        assert_eq!(back, p);
    }
}
