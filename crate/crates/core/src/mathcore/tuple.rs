use crate::error::{PamError, Result};
use std::fmt;

/// A point of the one-sided index cone `n₁ ≥ n₂ ≥ … ≥ n_k ≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedTuple(Vec<i64>);

impl OrderedTuple {
    pub fn new(entries: Vec<i64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(PamError::InvalidParameter("empty index tuple".into()));
        }
        if entries.iter().any(|&n| n < 0) {
            return Err(PamError::InvalidParameter(format!(
                "one-sided tuple entries must be nonnegative: {entries:?}"
            )));
        }
        if entries.windows(2).any(|w| w[0] < w[1]) {
            return Err(PamError::InvalidParameter(format!(
                "tuple entries must be weakly decreasing: {entries:?}"
            )));
        }
        Ok(Self(entries))
    }

    /// `k` copies of `n`.
    pub fn constant(k: usize, n: i64) -> Result<Self> {
        Self::new(vec![n; k])
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for OrderedTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_entries(&self.0, f)
    }
}

/// A pair `n₁ ≥ n₂` of arbitrary sign, the index set of the two-sided
/// second moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OrderedPair {
    pub n1: i64,
    pub n2: i64,
}

impl OrderedPair {
    pub fn new(n1: i64, n2: i64) -> Result<Self> {
        if n1 < n2 {
            return Err(PamError::InvalidParameter(format!(
                "pair must satisfy n1 >= n2 (got {n1}, {n2})"
            )));
        }
        Ok(Self { n1, n2 })
    }

    pub fn entries(&self) -> [i64; 2] {
        [self.n1, self.n2]
    }
}

impl fmt::Display for OrderedPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_entries(&[self.n1, self.n2], f)
    }
}

fn fmt_entries(e: &[i64], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let s: Vec<String> = e.iter().map(|n| n.to_string()).collect();
    write!(f, "{}", s.join(";"))
}
