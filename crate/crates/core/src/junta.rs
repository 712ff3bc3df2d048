//! k-juntas: boolean functions on n bits that depend on k coordinates.
//!
//! A junta stores its relevant index list and a 2^k truth table indexed by
//! the relevant coordinates in listed order, first listed most significant.
//! Construction canonicalizes: declared-relevant indices with no influence
//! on the table are dropped, so the stored arity is the true arity and the
//! pivot decomposition below has `slope ≡ 0` exactly for irrelevant pivots.
//!
//! Every junta decomposes against a pivot variable i as
//!
//! ```text
//! f(x) = x_i · slope_i(x_{−i}) + intercept_i(x_{−i})
//! ```
//!
//! with intercept_i = f|_{x_i=0} and slope_i = f|_{x_i=1} − f|_{x_i=0}.
//! Slope values lie in {−1, 0, 1} and are kept as integers so that the
//! multilinear expansion is exact.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::MultilinearPolynomial;
use crate::samples::SampleSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Junta {
    n: usize,
    relevant: Vec<usize>,
    table: Vec<u8>,
}

impl Junta {
    /// Builds a junta, validating indices and canonicalizing away
    /// non-influential declared-relevant variables.
    pub fn new(n: usize, relevant: Vec<usize>, table: Vec<u8>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for &r in &relevant {
            if r >= n {
                return Err(Error::IndexOutOfRange { index: r, n });
            }
            if !seen.insert(r) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate relevant index {r}"
                )));
            }
        }
        if table.len() != 1 << relevant.len() {
            return Err(Error::InvalidParameter(format!(
                "table length {} does not match 2^{}",
                table.len(),
                relevant.len()
            )));
        }
        if table.iter().any(|&b| b > 1) {
            return Err(Error::InvalidParameter(
                "table entries must be 0/1".to_string(),
            ));
        }
        let (relevant, table) = canonicalize(relevant, table);
        Ok(Self { n, relevant, table })
    }

    pub fn constant(n: usize, value: u8) -> Result<Self> {
        Self::new(n, vec![], vec![value])
    }

    pub fn dictator(n: usize, i: usize) -> Result<Self> {
        Self::new(n, vec![i], vec![0, 1])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True arity k after canonicalization.
    pub fn arity(&self) -> usize {
        self.relevant.len()
    }

    /// Relevant indices in listed (table) order.
    pub fn relevant(&self) -> &[usize] {
        &self.relevant
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn depends_on(&self, i: usize) -> bool {
        self.relevant.contains(&i)
    }

    fn table_index(&self, x: &[u8]) -> usize {
        let k = self.relevant.len();
        self.relevant
            .iter()
            .enumerate()
            .fold(0usize, |acc, (l, &r)| {
                acc | (((x[r] & 1) as usize) << (k - 1 - l))
            })
    }

    pub fn eval(&self, x: &[u8]) -> Result<u8> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(self.table[self.table_index(x)])
    }

    /// The pivot decomposition f = x_i · slope + intercept.
    pub fn decompose(&self, pivot: usize) -> Result<Decomposition> {
        if pivot >= self.n {
            return Err(Error::IndexOutOfRange {
                index: pivot,
                n: self.n,
            });
        }
        let vars: Vec<usize> = self
            .relevant
            .iter()
            .copied()
            .filter(|&r| r != pivot)
            .collect();
        let k = vars.len();
        let mut slope = vec![0i8; 1 << k];
        let mut intercept = vec![0i8; 1 << k];
        let mut x = vec![0u8; self.n];
        for m in 0..(1usize << k) {
            for (l, &v) in vars.iter().enumerate() {
                x[v] = ((m >> (k - 1 - l)) & 1) as u8;
            }
            x[pivot] = 0;
            let lo = self.table[self.table_index(&x)] as i8;
            x[pivot] = 1;
            let hi = self.table[self.table_index(&x)] as i8;
            intercept[m] = lo;
            slope[m] = hi - lo;
        }
        Ok(Decomposition {
            n: self.n,
            pivot,
            vars,
            slope,
            intercept,
        })
    }

    /// The unique multilinear real polynomial agreeing with f on the cube,
    /// with terms over the relevant variables only.
    pub fn expansion(&self) -> MultilinearPolynomial {
        let values: Vec<i64> = self.table.iter().map(|&b| b as i64).collect();
        multilinear_expansion(self.n, &self.relevant, &values)
            .expect("junta invariants guarantee a valid expansion")
    }

    /// Replaces every label with f(x).
    pub fn label_samples(&self, samples: &SampleSet) -> Result<SampleSet> {
        if samples.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: samples.n(),
            });
        }
        let relabeled = samples
            .iter()
            .map(|ex| {
                Ok(crate::samples::Example {
                    x: ex.x.clone(),
                    y: self.eval(&ex.x)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        SampleSet::from_examples(self.n, relabeled)
    }

    /// Uniformly random junta with true arity exactly `k`: the relevant set
    /// is a uniform k-subset and the table is uniform among tables where all
    /// k coordinates are influential (rejection sampling).
    pub fn random<R: Rng>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
        }
        let mut indices: Vec<usize> = (0..n).collect();
        for _ in 0..100_000 {
            indices.shuffle(rng);
            let mut relevant: Vec<usize> = indices[..k].to_vec();
            relevant.sort_unstable();
            let table: Vec<u8> = (0..(1usize << k)).map(|_| rng.gen_range(0..2u8)).collect();
            let junta = Self::new(n, relevant, table)?;
            if junta.arity() == k {
                return Ok(junta);
            }
        }
        Err(Error::InvalidParameter(format!(
            "failed to draw an influential {k}-junta"
        )))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = JuntaFile {
            n: self.n,
            relevant: self.relevant.clone(),
            table: self
                .table
                .iter()
                .map(|&b| if b == 1 { '1' } else { '0' })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: JuntaFile = serde_json::from_str(text)?;
        let table: Vec<u8> = file
            .table
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => Err(Error::Malformed {
                    what: "junta table".to_string(),
                    reason: format!("bit {other:?}"),
                }),
            })
            .collect::<Result<_>>()?;
        Self::new(file.n, file.relevant, table)
    }
}

fn influential(position: usize, k: usize, table: &[u8]) -> bool {
    let bit = 1usize << (k - 1 - position);
    (0..table.len()).any(|idx| idx & bit == 0 && table[idx] != table[idx | bit])
}

fn canonicalize(mut relevant: Vec<usize>, mut table: Vec<u8>) -> (Vec<usize>, Vec<u8>) {
    loop {
        let k = relevant.len();
        let Some(pos) = (0..k).find(|&l| !influential(l, k, &table)) else {
            return (relevant, table);
        };
        let bit = 1usize << (k - 1 - pos);
        let mut reduced = Vec::with_capacity(table.len() / 2);
        for (idx, &value) in table.iter().enumerate() {
            if idx & bit == 0 {
                reduced.push(value);
            }
        }
        relevant.remove(pos);
        table = reduced;
    }
}

/// The decomposition of a junta against a pivot: f = x_pivot · slope +
/// intercept, both over the remaining relevant variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    n: usize,
    pivot: usize,
    vars: Vec<usize>,
    slope: Vec<i8>,
    intercept: Vec<i8>,
}

impl Decomposition {
    pub fn pivot(&self) -> usize {
        self.pivot
    }

    /// Variables the two component functions may depend on (the junta's
    /// relevant set minus the pivot).
    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    fn index(&self, x: &[u8]) -> usize {
        let k = self.vars.len();
        self.vars.iter().enumerate().fold(0usize, |acc, (l, &v)| {
            acc | (((x[v] & 1) as usize) << (k - 1 - l))
        })
    }

    /// slope(x_{−i}) ∈ {−1, 0, 1}; ignores x[pivot].
    pub fn slope_at(&self, x: &[u8]) -> i8 {
        self.slope[self.index(x)]
    }

    /// intercept(x_{−i}) ∈ {0, 1}; ignores x[pivot].
    pub fn intercept_at(&self, x: &[u8]) -> i8 {
        self.intercept[self.index(x)]
    }

    pub fn slope_table(&self) -> &[i8] {
        &self.slope
    }

    pub fn intercept_table(&self) -> &[i8] {
        &self.intercept
    }

    /// True iff the pivot is irrelevant to the junta.
    pub fn slope_is_zero(&self) -> bool {
        self.slope.iter().all(|&v| v == 0)
    }

    pub fn slope_polynomial(&self) -> MultilinearPolynomial {
        let values: Vec<i64> = self.slope.iter().map(|&v| v as i64).collect();
        multilinear_expansion(self.n, &self.vars, &values).expect("valid by construction")
    }

    pub fn intercept_polynomial(&self) -> MultilinearPolynomial {
        let values: Vec<i64> = self.intercept.iter().map(|&v| v as i64).collect();
        multilinear_expansion(self.n, &self.vars, &values).expect("valid by construction")
    }
}

/// Multilinear expansion of an integer-valued function of the listed
/// variables, given as a table indexed by the variables in listed order
/// (first listed most significant). Coefficients come from the finite
/// difference (Möbius) transform and are exact integers.
pub fn multilinear_expansion(
    n: usize,
    vars: &[usize],
    values: &[i64],
) -> Result<MultilinearPolynomial> {
    let k = vars.len();
    if values.len() != 1 << k {
        return Err(Error::InvalidParameter(format!(
            "table length {} does not match 2^{k}",
            values.len()
        )));
    }
    // reindex so that bit l (from the low end) is vars[l]
    let mut coeffs = vec![0i64; 1 << k];
    for (idx, &v) in values.iter().enumerate() {
        let mut internal = 0usize;
        for l in 0..k {
            if idx & (1 << (k - 1 - l)) != 0 {
                internal |= 1 << l;
            }
        }
        coeffs[internal] = v;
    }
    // subset finite-difference transform: coeffs[S] = Σ_{T⊆S} (−1)^{|S∖T|} f(T)
    for l in 0..k {
        let bit = 1usize << l;
        for mask in 0..(1usize << k) {
            if mask & bit != 0 {
                coeffs[mask] -= coeffs[mask ^ bit];
            }
        }
    }
    let terms = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(mask, &c)| {
            let term: Vec<usize> = (0..k)
                .filter(|&l| mask & (1 << l) != 0)
                .map(|l| vars[l])
                .collect();
            (term, c as f64)
        });
    MultilinearPolynomial::from_terms(n, terms)
}

#[derive(Serialize, Deserialize)]
struct JuntaFile {
    n: usize,
    relevant: Vec<usize>,
    table: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_and_dictator_eval() {
        let zero = Junta::constant(4, 0).unwrap();
        assert_eq!(zero.arity(), 0);
        for m in 0..16usize {
            let x = crate::dist::point_bits(m, 4);
            assert_eq!(zero.eval(&x).unwrap(), 0);
        }
        let d = Junta::dictator(4, 2).unwrap();
        assert_eq!(d.eval(&[0, 0, 1, 0]).unwrap(), 1);
        assert_eq!(d.eval(&[1, 1, 0, 1]).unwrap(), 0);
    }

    #[test]
    fn majority_table_lookup() {
        // majority on relevant {1, 4, 6} of 8 variables
        let table: Vec<u8> = (0..8usize)
            .map(|idx| ((idx.count_ones() >= 2) as u8))
            .collect();
        let f = Junta::new(8, vec![1, 4, 6], table).unwrap();
        let mut x = vec![0u8; 8];
        x[1] = 1;
        x[4] = 0;
        x[6] = 1;
        assert_eq!(f.eval(&x).unwrap(), 1);
        x[1] = 0;
        assert_eq!(f.eval(&x).unwrap(), 0);
    }

    #[test]
    fn canonicalization_drops_dead_variables() {
        // table over (x0, x1) that only depends on x1
        let f = Junta::new(3, vec![0, 1], vec![0, 1, 0, 1]).unwrap();
        assert_eq!(f.relevant(), &[1]);
        assert_eq!(f.arity(), 1);
        assert_eq!(f.table(), &[0, 1]);
        // constant table collapses completely
        let c = Junta::new(3, vec![0, 2], vec![1, 1, 1, 1]).unwrap();
        assert_eq!(c.arity(), 0);
        assert_eq!(c.table(), &[1]);
    }

    #[test]
    fn decompose_dictator() {
        let f = Junta::dictator(3, 0).unwrap();
        let d = f.decompose(0).unwrap();
        assert!(!d.slope_is_zero());
        assert_eq!(d.slope_table(), &[1]);
        assert_eq!(d.intercept_table(), &[0]);
    }

    #[test]
    fn decompose_irrelevant_pivot() {
        let f = Junta::dictator(3, 1).unwrap();
        let d = f.decompose(0).unwrap();
        assert!(d.slope_is_zero());
        assert_eq!(d.intercept_table(), &[0, 1]);
        assert_eq!(d.vars(), &[1]);
    }

    #[test]
    fn decompose_and() {
        // AND(x0, x1): slope against pivot 0 is x1, intercept 0
        let f = Junta::new(2, vec![0, 1], vec![0, 0, 0, 1]).unwrap();
        let d = f.decompose(0).unwrap();
        assert_eq!(d.slope_table(), &[0, 1]);
        assert_eq!(d.intercept_table(), &[0, 0]);
    }

    #[test]
    fn decompose_identity_exhaustive() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let f = Junta::random(8, 3, &mut rng).unwrap();
            for pivot in 0..8 {
                let d = f.decompose(pivot).unwrap();
                for m in 0..(1usize << 8) {
                    let x = crate::dist::point_bits(m, 8);
                    let direct = f.eval(&x).unwrap() as i8;
                    let composed = (x[pivot] as i8) * d.slope_at(&x) + d.intercept_at(&x);
                    assert_eq!(direct, composed);
                }
                // slope ≡ 0 exactly when the pivot is irrelevant
                assert_eq!(d.slope_is_zero(), !f.depends_on(pivot));
            }
        }
    }

    #[test]
    fn expansion_examples() {
        let one = Junta::constant(2, 1).unwrap();
        let p = one.expansion();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coefficient(&[]), 1.0);

        let and = Junta::new(2, vec![0, 1], vec![0, 0, 0, 1]).unwrap();
        let p = and.expansion();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coefficient(&[0, 1]), 1.0);

        // XOR(x0, x1) = x0 + x1 − 2 x0 x1; min |coeff| = 1 ≥ 2^{−2}
        let xor = Junta::new(2, vec![0, 1], vec![0, 1, 1, 0]).unwrap();
        let p = xor.expansion();
        assert_eq!(p.coefficient(&[0]), 1.0);
        assert_eq!(p.coefficient(&[1]), 1.0);
        assert_eq!(p.coefficient(&[0, 1]), -2.0);
    }

    #[test]
    fn expansion_roundtrips_and_coefficient_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 1..=6usize {
            for _ in 0..10 {
                let f = Junta::random(8, k, &mut rng).unwrap();
                let p = f.expansion();
                for m in 0..(1usize << 8) {
                    let x = crate::dist::point_bits(m, 8);
                    assert_eq!(p.eval(&x).unwrap(), f.eval(&x).unwrap() as f64);
                }
                let floor = (0.5f64).powi(k as i32);
                for i in 0..8 {
                    let d = f.decompose(i).unwrap();
                    for poly in [d.slope_polynomial(), d.intercept_polynomial()] {
                        for (_, c) in poly.terms() {
                            assert!(c.abs() >= floor, "coefficient {c} under 2^-{k}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn labels_match_direct_evaluation() {
        let f = Junta::new(5, vec![0, 2, 4], vec![0, 1, 1, 1, 0, 0, 0, 1]).unwrap();
        let rows = vec![
            vec![0, 0, 0, 0, 0],
            vec![1, 0, 1, 0, 1],
            vec![0, 1, 1, 1, 0],
            vec![1, 1, 0, 0, 0],
            vec![1, 0, 0, 1, 1],
        ];
        let s = SampleSet::from_points(5, rows.clone()).unwrap();
        let labeled = f.label_samples(&s).unwrap();
        for (ex, x) in labeled.iter().zip(&rows) {
            assert_eq!(ex.y, f.eval(x).unwrap());
        }
        let zero = Junta::constant(5, 0).unwrap();
        assert!(zero.label_samples(&s).unwrap().iter().all(|ex| ex.y == 0));
        let d = Junta::dictator(5, 0).unwrap();
        assert!(d
            .label_samples(&s)
            .unwrap()
            .iter()
            .all(|ex| ex.y == ex.x[0]));
    }

    #[test]
    fn random_junta_has_true_arity_and_is_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(33);
        let mut b = ChaCha8Rng::seed_from_u64(33);
        for k in 0..=4usize {
            let fa = Junta::random(9, k, &mut a).unwrap();
            let fb = Junta::random(9, k, &mut b).unwrap();
            assert_eq!(fa, fb);
            assert_eq!(fa.arity(), k);
        }
    }

    #[test]
    fn json_roundtrip_msb_convention() {
        let f = Junta::new(5, vec![1, 3], vec![0, 1, 1, 0]).unwrap();
        let text = f.to_json().unwrap();
        assert!(text.contains("\"table\": \"0110\""));
        let back = Junta::from_json(&text).unwrap();
        assert_eq!(f, back);
        // first listed index is the most significant table bit
        let mut x = vec![0u8; 5];
        x[1] = 1;
        assert_eq!(f.eval(&x).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Junta::new(3, vec![0, 1], vec![0, 1]).is_err());
        assert!(Junta::new(3, vec![0, 0], vec![0, 1, 0, 1]).is_err());
        assert!(Junta::new(3, vec![5], vec![0, 1]).is_err());
        assert!(Junta::new(3, vec![0], vec![0, 2]).is_err());
    }

    proptest! {
        #[test]
        fn prop_expansion_agrees_on_cube(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 6;
            let k = (seed % 4) as usize;
            let f = Junta::random(n, k, &mut rng).unwrap();
            let p = f.expansion();
            for m in 0..(1usize << n) {
                let x = crate::dist::point_bits(m, n);
                prop_assert_eq!(p.eval(&x).unwrap(), f.eval(&x).unwrap() as f64);
            }
        }
    }
}
