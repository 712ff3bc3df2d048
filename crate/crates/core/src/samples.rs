//! Labeled sample sets and restriction filtering.
//!
//! Samples are stored in draw order; filtering by a restriction keeps exactly
//! the examples agreeing with it on its support, preserving order. The
//! on-disk format is JSON lines, one `{"x": "0110...", "y": 0}` object per
//! example with index 0 leftmost in the bitstring.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::restriction::Restriction;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub x: Vec<u8>,
    pub y: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    n: usize,
    examples: Vec<Example>,
}

impl SampleSet {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            examples: Vec::new(),
        }
    }

    pub fn from_examples(n: usize, examples: Vec<Example>) -> Result<Self> {
        for ex in &examples {
            if ex.x.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: ex.x.len(),
                });
            }
            if ex.x.iter().any(|&b| b > 1) || ex.y > 1 {
                return Err(Error::InvalidParameter(
                    "sample entries must be 0/1".to_string(),
                ));
            }
        }
        Ok(Self { n, examples })
    }

    /// Unlabeled set from raw points; labels default to 0 until a junta
    /// labels them.
    pub fn from_points(n: usize, points: Vec<Vec<u8>>) -> Result<Self> {
        Self::from_examples(
            n,
            points.into_iter().map(|x| Example { x, y: 0 }).collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn iter(&self) -> impl Iterator<Item = &Example> {
        self.examples.iter()
    }

    /// S_ρ: the examples agreeing with `rho` on its support, order preserved.
    pub fn restrict(&self, rho: &Restriction) -> Result<SampleSet> {
        if rho.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: rho.n(),
            });
        }
        Ok(SampleSet {
            n: self.n,
            examples: self
                .examples
                .iter()
                .filter(|ex| rho.matches(&ex.x))
                .cloned()
                .collect(),
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> Result<()> {
        for ex in &self.examples {
            let line = SampleLine {
                x: ex.x.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect(),
                y: ex.y,
            };
            serde_json::to_writer(&mut writer, &line)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(reader: R) -> Result<SampleSet> {
        let mut examples = Vec::new();
        let mut n = None;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: SampleLine = serde_json::from_str(&line)?;
            let x: Vec<u8> = parsed
                .x
                .chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    other => Err(Error::Malformed {
                        what: "sample line".to_string(),
                        reason: format!("bit {other:?} on line {}", lineno + 1),
                    }),
                })
                .collect::<Result<_>>()?;
            match n {
                None => n = Some(x.len()),
                Some(expected) if expected != x.len() => {
                    return Err(Error::DimensionMismatch {
                        expected,
                        actual: x.len(),
                    })
                }
                _ => {}
            }
            examples.push(Example { x, y: parsed.y });
        }
        let n = n.ok_or_else(|| Error::Malformed {
            what: "sample file".to_string(),
            reason: "no examples".to_string(),
        })?;
        SampleSet::from_examples(n, examples)
    }
}

#[derive(Serialize, Deserialize)]
struct SampleLine {
    x: String,
    y: u8,
}
