//! Restrictions: partial assignments in {0, 1, *}^n.
//!
//! A restriction fixes some coordinates and leaves the rest free. Its support
//! is the set of fixed coordinates. Restrictions drive both sample filtering
//! (S_ρ) and exact conditioning (D_ρ).

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Restriction {
    pattern: Vec<Option<bool>>,
}

impl Restriction {
    /// The all-free restriction (empty support).
    pub fn all_free(n: usize) -> Self {
        Self {
            pattern: vec![None; n],
        }
    }

    /// Fixes the listed coordinates to the given bits.
    pub fn fixing(n: usize, fixed: &[(usize, u8)]) -> Result<Self> {
        let mut pattern = vec![None; n];
        for &(i, b) in fixed {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if b > 1 {
                return Err(Error::InvalidParameter(format!(
                    "restriction bit {b} at {i} is not 0/1"
                )));
            }
            pattern[i] = Some(b == 1);
        }
        Ok(Self { pattern })
    }

    /// Parses a pattern string over {'0', '1', '*'}, index 0 leftmost.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pattern = Vec::with_capacity(text.len());
        for (i, ch) in text.chars().enumerate() {
            pattern.push(match ch {
                '0' => Some(false),
                '1' => Some(true),
                '*' => None,
                other => {
                    return Err(Error::Malformed {
                        what: "restriction".to_string(),
                        reason: format!("character {other:?} at position {i}"),
                    })
                }
            });
        }
        Ok(Self { pattern })
    }

    pub fn n(&self) -> usize {
        self.pattern.len()
    }

    /// Fixed coordinates in ascending order.
    pub fn support(&self) -> Vec<usize> {
        self.pattern
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|_| i))
            .collect()
    }

    /// |supp(ρ)|.
    pub fn size(&self) -> usize {
        self.pattern.iter().filter(|p| p.is_some()).count()
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.pattern.get(i).map_or(true, |p| p.is_none())
    }

    /// The fixed (index, bit) pairs in ascending index order; the string of
    /// fixed values w_ρ.
    pub fn fixed_bits(&self) -> Vec<(usize, u8)> {
        self.pattern
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|b| (i, b as u8)))
            .collect()
    }

    /// True iff `x` agrees with every fixed coordinate.
    pub fn matches(&self, x: &[u8]) -> bool {
        debug_assert_eq!(x.len(), self.pattern.len());
        self.pattern
            .iter()
            .zip(x)
            .all(|(p, &b)| p.map_or(true, |v| v == (b != 0)))
    }

    /// All 2^|support| restrictions fixing exactly `support`, in
    /// lexicographic order of the assignment (the lowest support index is
    /// the most significant position). `support` must be strictly ascending.
    pub fn enumerate_over(n: usize, support: &[usize]) -> Result<Vec<Restriction>> {
        if !support.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameter(
                "restriction support must be strictly ascending".to_string(),
            ));
        }
        if let Some(&last) = support.last() {
            if last >= n {
                return Err(Error::IndexOutOfRange { index: last, n });
            }
        }
        let t = support.len();
        let mut out = Vec::with_capacity(1 << t);
        for m in 0..(1u64 << t) {
            let fixed: Vec<(usize, u8)> = support
                .iter()
                .enumerate()
                .map(|(l, &j)| (j, ((m >> (t - 1 - l)) & 1) as u8))
                .collect();
            out.push(Restriction::fixing(n, &fixed)?);
        }
        Ok(out)
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.pattern {
            f.write_str(match p {
                Some(true) => "1",
                Some(false) => "0",
                None => "*",
            })?;
        }
        Ok(())
    }
}

impl Serialize for Restriction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Restriction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Restriction::parse(&text).map_err(D::Error::custom)
    }
}
