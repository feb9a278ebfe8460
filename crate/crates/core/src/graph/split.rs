use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;

use super::Snapshot;
use crate::error::{invalid, Error, Result};
use crate::tensor::{rng_from_seed, SeededRng, SparseMatrix};

/// Held-out positives and sampled negatives for one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSplit {
    pub train: SparseMatrix,
    pub positives: Vec<(usize, usize)>,
    pub negatives: Vec<(usize, usize)>,
}

/// Rejection-samples `count` distinct non-edges `(u, v)`, `u < v`, among the
/// given local node indices. Gives up after `100 * count` draws.
pub fn sample_non_edges(
    s: &Snapshot,
    candidates: &[usize],
    count: usize,
    rng: &mut SeededRng,
) -> Result<Vec<(usize, usize)>> {
    let mut chosen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    if candidates.len() < 2 {
        return Err(Error::DegenerateGraph(format!(
            "cannot sample non-edges among {} nodes",
            candidates.len()
        )));
    }
    let budget = count.saturating_mul(100);
    for _ in 0..budget {
        let a = candidates[rng.random_range(0..candidates.len())];
        let b = candidates[rng.random_range(0..candidates.len())];
        if a == b || s.has_edge(a, b) {
            continue;
        }
        let pair = (a.min(b), a.max(b));
        if chosen.insert(pair) {
            out.push(pair);
            if out.len() == count {
                return Ok(out);
            }
        }
    }
    Err(Error::DegenerateGraph(format!(
        "found only {} of {count} non-edges after {budget} draws",
        out.len()
    )))
}

/// Holds out `round(test_fraction * |E|)` uniformly chosen edges as positives
/// and as many sampled non-edges as negatives; the rest form the training
/// adjacency.
pub fn split_edges(s: &Snapshot, test_fraction: f64, seed: u64) -> Result<EdgeSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(invalid(format!("test fraction must be in (0, 1), got {test_fraction}")));
    }
    let edges = s.edges();
    if edges.len() < 10 {
        return Err(Error::DegenerateGraph(format!(
            "need at least 10 edges to split, have {}",
            edges.len()
        )));
    }
    let mut rng = rng_from_seed(seed);
    let n_test = (libm::round(test_fraction * edges.len() as f64) as usize).clamp(1, edges.len() - 1);
    let mut held: Vec<usize> = sample(&mut rng, edges.len(), n_test).into_vec();
    held.sort_unstable();
    let held_set: BTreeSet<usize> = held.iter().copied().collect();
    let positives: Vec<(usize, usize)> = held.iter().map(|&k| edges[k]).collect();
    let remaining: Vec<(usize, usize)> = edges
        .iter()
        .enumerate()
        .filter(|(k, _)| !held_set.contains(k))
        .map(|(_, &e)| e)
        .collect();
    let train = SparseMatrix::symmetric_binary(s.num_nodes(), &remaining)?;
    let all: Vec<usize> = (0..s.num_nodes()).collect();
    let negatives = sample_non_edges(s, &all, n_test, &mut rng)?;
    Ok(EdgeSplit {
        train,
        positives,
        negatives,
    })
}
