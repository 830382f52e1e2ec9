//! Partition combinatorics: jump multisets, the disjoint-subset-difference
//! minimum `h̄`, the coarsening order, sub-multisets, and shifts.
//!
//! `h̄` is implemented as the minimum nonzero `|Σ_{k∈A} μ_k − Σ_{l∈B} μ_l|`
//! over disjoint index subsets — the quantity the degree-drop argument
//! actually uses — rather than as a minimum over coarsenings' jump multisets.
//! The subset version is ≤ the definitional version, so bounds built on it
//! remain valid; the coarsening predicate is exposed separately for
//! cross-checking.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("partition has {r} parts; subset-difference search is limited to 24")]
    TooLarge { r: usize },
    #[error("invalid partition syntax: {0}")]
    Parse(String),
}

/// A partition `μ = (μ₁ ≥ … ≥ μ_r)` of `d = Σ μ_i` with positive parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    /// Builds a partition from parts in any order; panics on empty input or
    /// a zero part.
    pub fn new(parts: Vec<u64>) -> Partition {
        assert!(!parts.is_empty(), "partition must have at least one part");
        assert!(parts.iter().all(|&p| p > 0), "partition parts must be positive");
        let mut parts = parts;
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition { parts }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    /// Number of parts `r`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Degree `d = Σ μ_i`.
    pub fn degree(&self) -> u64 {
        self.parts.iter().sum()
    }

    /// Smallest part `μ_r`.
    pub fn smallest(&self) -> u64 {
        *self.parts.last().unwrap()
    }

    /// Largest part `μ₁`.
    pub fn largest(&self) -> u64 {
        self.parts[0]
    }

    /// All parts increased by `t`.
    pub fn shift(&self, t: u64) -> Partition {
        Partition {
            parts: self.parts.iter().map(|p| p + t).collect(),
        }
    }

    /// Multiplicity of the value `v` among the parts.
    pub fn count_of(&self, v: u64) -> usize {
        self.parts.iter().filter(|&&p| p == v).count()
    }

    /// True iff `other`'s parts form a sub-multiset of `self`'s parts.
    pub fn contains_submultiset(&self, other: &Partition) -> bool {
        other
            .distinct_parts()
            .into_iter()
            .all(|v| other.count_of(v) <= self.count_of(v))
    }

    /// Multiset difference `self − other`; `None` unless `other` is a
    /// sub-multiset, or when nothing remains.
    pub fn minus(&self, other: &Partition) -> Option<Partition> {
        if !self.contains_submultiset(other) {
            return None;
        }
        let mut remaining = self.parts.clone();
        for &v in other.parts() {
            let pos = remaining.iter().position(|&p| p == v).unwrap();
            remaining.remove(pos);
        }
        (!remaining.is_empty()).then(|| Partition::new(remaining))
    }

    pub fn distinct_parts(&self) -> Vec<u64> {
        let mut d = self.parts.clone();
        d.dedup();
        d
    }
}

impl fmt::Display for Partition {
    /// Comma list with run-length shorthand: `(3,2,2,2,2)` prints `3,2^4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut i = 0;
        let mut first = true;
        while i < self.parts.len() {
            let v = self.parts[i];
            let run = self.parts[i..].iter().take_while(|&&p| p == v).count();
            if !first {
                write!(f, ",")?;
            }
            first = false;
            if run > 1 {
                write!(f, "{v}^{run}")?;
            } else {
                write!(f, "{v}")?;
            }
            i += run;
        }
        Ok(())
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for Partition {
    type Err = PartitionError;

    /// Parses `"5,3"` or the exponent shorthand `"3,2^4"`; surrounding
    /// whitespace and parentheses are tolerated.
    fn from_str(s: &str) -> Result<Partition, PartitionError> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = Vec::new();
        for piece in trimmed.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                return Err(PartitionError::Parse(format!("empty component in {s:?}")));
            }
            let (base, count) = match piece.split_once('^') {
                Some((b, e)) => {
                    let count: usize = e
                        .trim()
                        .parse()
                        .map_err(|_| PartitionError::Parse(format!("bad exponent in {piece:?}")))?;
                    (b.trim(), count)
                }
                None => (piece, 1),
            };
            let value: u64 = base
                .parse()
                .map_err(|_| PartitionError::Parse(format!("bad part in {piece:?}")))?;
            if value == 0 {
                return Err(PartitionError::Parse("parts must be positive".into()));
            }
            if count == 0 {
                return Err(PartitionError::Parse("exponent must be positive".into()));
            }
            parts.extend(std::iter::repeat(value).take(count));
        }
        if parts.is_empty() {
            return Err(PartitionError::Parse("empty partition".into()));
        }
        Ok(Partition::new(parts))
    }
}

impl TryFrom<Vec<u64>> for Partition {
    type Error = PartitionError;
    fn try_from(parts: Vec<u64>) -> Result<Partition, PartitionError> {
        if parts.is_empty() || parts.iter().any(|&p| p == 0) {
            return Err(PartitionError::Parse(
                "partition needs nonempty positive parts".into(),
            ));
        }
        Ok(Partition::new(parts))
    }
}

impl From<Partition> for Vec<u64> {
    fn from(p: Partition) -> Vec<u64> {
        p.parts
    }
}

/// Jump multiset of a partition and its minimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JumpData {
    /// Positive values among `{μ₁−μ₂, …, μ_{r−1}−μ_r, μ_r}`, ascending.
    pub jumps: Vec<u64>,
    /// The minimal (positive) jump `h`.
    pub h: u64,
}

/// Jump multiset `J_μ`: consecutive differences plus the smallest part,
/// with zero differences dropped. Never empty since `μ_r > 0`.
pub fn jump_data(mu: &Partition) -> JumpData {
    let parts = mu.parts();
    let mut jumps: Vec<u64> = parts
        .windows(2)
        .map(|w| w[0] - w[1])
        .filter(|&j| j > 0)
        .collect();
    jumps.push(mu.smallest());
    jumps.sort_unstable();
    let h = jumps[0];
    JumpData { jumps, h }
}

/// Minimum nonzero `|Σ_{k∈A} μ_k − Σ_{l∈B} μ_l|` over disjoint subsets
/// `A, B` of the index set (`B` possibly empty), via meet-in-the-middle over
/// sign assignments in `{−1, 0, +1}^r`.
pub fn h_bar(mu: &Partition) -> Result<u64, PartitionError> {
    let r = mu.len();
    if r > 24 {
        return Err(PartitionError::TooLarge { r });
    }
    let (left, right) = mu.parts().split_at(r / 2);
    let mut left_sums = signed_sums(left);
    left_sums.sort_unstable();
    left_sums.dedup();
    let mut right_sums = signed_sums(right);
    right_sums.sort_unstable();
    right_sums.dedup();
    let mut best: Option<i128> = None;
    let mut consider = |v: i128| {
        let a = v.abs();
        if a != 0 && best.map_or(true, |b| a < b) {
            best = Some(a);
        }
    };
    for &l in &left_sums {
        // Values closest to -l on either side minimize |l + r|.
        let idx = right_sums.partition_point(|&x| x < -l);
        if idx < right_sums.len() {
            consider(l + right_sums[idx]);
        }
        if idx > 0 {
            consider(l + right_sums[idx - 1]);
        }
        // A zero at idx hides the next-larger candidate; peek one further.
        if idx + 1 < right_sums.len() {
            consider(l + right_sums[idx + 1]);
        }
    }
    Ok(best.expect("a nonzero signed sum always exists") as u64)
}

/// All `3^n` signed sums `Σ ε_i v_i` with `ε_i ∈ {−1, 0, +1}`.
fn signed_sums(values: &[u64]) -> Vec<i128> {
    let mut sums = vec![0i128];
    for &v in values {
        let v = v as i128;
        let mut next = Vec::with_capacity(sums.len() * 3);
        for &s in &sums {
            next.push(s);
            next.push(s + v);
            next.push(s - v);
        }
        sums = next;
    }
    sums
}

/// True iff `mu_prime` is a coarsening of `mu`: the parts of `mu` can be
/// split into groups whose sums are exactly the parts of `mu_prime`.
pub fn is_coarsening(mu_prime: &Partition, mu: &Partition) -> bool {
    if mu_prime.degree() != mu.degree() || mu_prime.len() > mu.len() {
        return false;
    }
    let mut residual: Vec<u64> = mu_prime.parts().to_vec();
    // Place largest parts first: they are the most constrained.
    fn place(parts: &[u64], residual: &mut Vec<u64>) -> bool {
        let Some((&p, rest)) = parts.split_first() else {
            return residual.iter().all(|&r| r == 0);
        };
        let mut tried: Vec<u64> = Vec::new();
        for i in 0..residual.len() {
            let cap = residual[i];
            if cap < p || tried.contains(&cap) {
                continue;
            }
            tried.push(cap);
            residual[i] = cap - p;
            if place(rest, residual) {
                residual[i] = cap;
                return true;
            }
            residual[i] = cap;
        }
        false
    }
    place(mu.parts(), &mut residual)
}
