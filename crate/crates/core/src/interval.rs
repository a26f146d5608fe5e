//! Finite unions of disjoint half-open intervals in `[0, 1]`.
//!
//! Every set is kept normalized: components are sorted, pairwise disjoint,
//! and longer than [`MIN_LENGTH`]. Components whose gap is at most
//! [`MERGE_GUARD`] are fused, which is the only place floating-point slack
//! enters the exact survivor-set computations.

use serde::{Deserialize, Serialize};

/// Gap below which two neighbouring components are merged.
pub const MERGE_GUARD: f64 = 1e-13;
/// Components of this length or shorter are discarded.
pub const MIN_LENGTH: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Half-open membership; the right endpoint 1 is treated as closed.
    pub fn contains(&self, x: f64) -> bool {
        (self.lo <= x && x < self.hi) || (x == 1.0 && self.hi == 1.0)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (hi - lo > MIN_LENGTH).then(|| Interval::new(lo, hi))
    }

    /// Length of the overlap with `[lo, hi)`.
    pub fn overlap(&self, lo: f64, hi: f64) -> f64 {
        (self.hi.min(hi) - self.lo.max(lo)).max(0.0)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
    total_length: f64,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn unit() -> Self {
        IntervalSet::from_intervals(vec![Interval::new(0.0, 1.0)])
    }

    pub fn from_pairs(pairs: &[[f64; 2]]) -> Self {
        IntervalSet::from_intervals(pairs.iter().map(|p| Interval::new(p[0], p[1])).collect())
    }

    /// Normalizes an arbitrary collection of intervals into a set.
    pub fn from_intervals(mut raw: Vec<Interval>) -> Self {
        raw.retain(|iv| iv.hi - iv.lo > MIN_LENGTH);
        raw.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::with_capacity(raw.len());
        for iv in raw {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi + MERGE_GUARD => last.hi = last.hi.max(iv.hi),
                _ => merged.push(iv),
            }
        }
        let total_length = merged.iter().fold(0.0, |acc, iv| acc + iv.length());
        IntervalSet {
            intervals: merged,
            total_length,
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interval> {
        self.intervals.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Number of connected components.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn contains(&self, x: f64) -> bool {
        let idx = self.intervals.partition_point(|iv| iv.hi <= x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains(x))
            || (x == 1.0 && self.intervals.last().is_some_and(|iv| iv.hi == 1.0))
    }

    /// Measure of the intersection with `[lo, hi)`.
    pub fn overlap_length(&self, lo: f64, hi: f64) -> f64 {
        let start = self.intervals.partition_point(|iv| iv.hi <= lo);
        self.intervals[start..]
            .iter()
            .take_while(|iv| iv.lo < hi)
            .map(|iv| iv.overlap(lo, hi))
            .sum()
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IntervalSet::from_intervals(all)
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            if let Some(iv) = a[i].intersect(&b[j]) {
                out.push(iv);
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet::from_intervals(out)
    }

    pub fn intersect_interval(&self, iv: &Interval) -> IntervalSet {
        self.intersection(&IntervalSet::from_intervals(vec![*iv]))
    }

    /// Complement relative to `[0, 1]`.
    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = 0.0;
        for iv in &self.intervals {
            if iv.lo > cursor {
                out.push(Interval::new(cursor, iv.lo));
            }
            cursor = cursor.max(iv.hi);
        }
        if cursor < 1.0 {
            out.push(Interval::new(cursor, 1.0));
        }
        IntervalSet::from_intervals(out)
    }

    /// Sorted endpoints of all components.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .flat_map(|iv| [iv.lo, iv.hi])
            .collect()
    }

    pub fn to_pairs(&self) -> Vec<[f64; 2]> {
        self.intervals.iter().map(|iv| [iv.lo, iv.hi]).collect()
    }

    /// Largest endpoint discrepancy against another set with the same
    /// component count; `None` when the counts differ.
    pub fn max_endpoint_distance(&self, other: &IntervalSet) -> Option<f64> {
        if self.len() != other.len() {
            return None;
        }
        Some(
            self.intervals
                .iter()
                .zip(&other.intervals)
                .map(|(a, b)| (a.lo - b.lo).abs().max((a.hi - b.hi).abs()))
                .fold(0.0, f64::max),
        )
    }
}

impl Serialize for IntervalSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntervalSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(IntervalSet::from_pairs(&pairs))
    }
}
