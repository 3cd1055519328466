//! Hellinger distance between word distributions and exact nearest-neighbor
//! queries in the raw (unreduced) space.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::cooccur::DistributionMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HellingerError {
    /// The word had no counted context under the chosen scenario and
    /// window, so it has no distribution to compare.
    #[error("word id {0} has no distribution (zero row)")]
    NoDistribution(u32),
    #[error("word id {0} out of range")]
    UnknownWord(u32),
}

/// Nearest neighbors of a query word, distances nondecreasing, the query
/// itself excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub query: u32,
    pub neighbors: Vec<(u32, f64)>,
}

/// Squared ℓ2 distance between two sparse vectors, by merge walk.
///
/// Ranking works on squared distances; the 1/√2 Hellinger scaling is a
/// monotone transform applied only at output.
pub(crate) fn sq_l2_distance(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    let mut sum = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (ca, va) = a[i];
        let (cb, vb) = b[j];
        match ca.cmp(&cb) {
            Ordering::Less => {
                sum += va * va;
                i += 1;
            }
            Ordering::Greater => {
                sum += vb * vb;
                j += 1;
            }
            Ordering::Equal => {
                let d = va - vb;
                sum += d * d;
                i += 1;
                j += 1;
            }
        }
    }
    for &(_, v) in &a[i..] {
        sum += v * v;
    }
    for &(_, v) in &b[j..] {
        sum += v * v;
    }
    sum
}

/// H(P, Q) = (1/√2) · ‖√P − √Q‖₂ over sparse √P rows.
///
/// Both inputs must be square-root distributions over the same context
/// dictionary; for unit-norm rows the result lies in [0, 1].
pub fn hellinger_distance(a: &[(u32, f64)], b: &[(u32, f64)]) -> f64 {
    std::f64::consts::FRAC_1_SQRT_2 * sq_l2_distance(a, b).sqrt()
}

impl DistributionMatrix {
    /// Hellinger distance between two word rows; zero rows have no
    /// distribution and are reported as such.
    pub fn distance(&self, w1: u32, w2: u32) -> Result<f64, HellingerError> {
        for w in [w1, w2] {
            if (w as usize) >= self.n_words() {
                return Err(HellingerError::UnknownWord(w));
            }
            if self.is_zero_row(w) {
                return Err(HellingerError::NoDistribution(w));
            }
        }
        Ok(hellinger_distance(self.row(w1), self.row(w2)))
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    d2: f64,
    id: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // larger distance is "worse"; at equal distance the larger id is
        // worse, so ties resolve toward ascending word id
        self.d2
            .total_cmp(&other.d2)
            .then_with(|| self.id.cmp(&other.id))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Keeps the k smallest (distance, id) pairs from a candidate stream,
/// ordered by distance then ascending id, via a bounded max-heap.
pub(crate) fn k_smallest(
    candidates: impl Iterator<Item = (u32, f64)>,
    k: usize,
) -> Vec<(u32, f64)> {
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::with_capacity(k + 1);
    for (id, d2) in candidates {
        heap.push(HeapEntry { d2, id });
        if heap.len() > k {
            heap.pop();
        }
    }
    heap.into_sorted_vec()
        .into_iter()
        .map(|e| (e.id, e.d2))
        .collect()
}

/// Exact k-nearest-neighbor scan under the Hellinger distance.
///
/// Zero rows and the query itself are excluded; a k larger than the number
/// of eligible words yields a truncated list.
pub fn nearest_neighbors(
    m: &DistributionMatrix,
    query: u32,
    k: usize,
) -> Result<NeighborList, HellingerError> {
    if (query as usize) >= m.n_words() {
        return Err(HellingerError::UnknownWord(query));
    }
    if m.is_zero_row(query) {
        return Err(HellingerError::NoDistribution(query));
    }
    let query_row = m.row(query);
    let candidates = (0..m.n_words() as u32)
        .filter(|&id| id != query && !m.is_zero_row(id))
        .map(|id| (id, sq_l2_distance(query_row, m.row(id))));
    let neighbors = k_smallest(candidates, k)
        .into_iter()
        .map(|(id, d2)| (id, std::f64::consts::FRAC_1_SQRT_2 * d2.sqrt()))
        .collect();
    Ok(NeighborList { query, neighbors })
}
