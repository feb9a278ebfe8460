use alloc::vec::Vec;

use super::{Snapshot, TemporalGraphDataset};

/// Nodes shared by snapshot `target` and an earlier snapshot `source`, as
/// pairs of local indices `(index in target, index in source)` ordered by the
/// target index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentMap {
    pub target: usize,
    pub source: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl AlignmentMap {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Merge-join of the two sorted node lists.
pub fn align_snapshots(target: &Snapshot, source: &Snapshot) -> AlignmentMap {
    let (a, b) = (target.nodes(), source.nodes());
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                pairs.push((i, j));
                i += 1;
                j += 1;
            }
        }
    }
    AlignmentMap {
        target: target.t(),
        source: source.t(),
        pairs,
    }
}

/// One map per prior snapshot `t-1, t-2, …, max(0, t-l)` (by position in the
/// dataset). Empty when `t = 0` or `l = 0`.
pub fn common_nodes(ds: &TemporalGraphDataset, t: usize, l: usize) -> Vec<AlignmentMap> {
    let target = ds.snapshot(t);
    (t.saturating_sub(l)..t)
        .rev()
        .map(|s| {
            let mut m = align_snapshots(target, ds.snapshot(s));
            m.target = t;
            m.source = s;
            m
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::NodeRegistry;
    use alloc::vec;

    fn dataset(node_sets: &[&[&str]]) -> TemporalGraphDataset {
        let mut reg = NodeRegistry::new();
        let mut snaps = vec![];
        for (t, names) in node_sets.iter().enumerate() {
            let mut ids: Vec<usize> = names.iter().map(|n| reg.intern(n)).collect();
            ids.sort_unstable();
            let edges: Vec<_> = (1..ids.len()).map(|k| (k - 1, k)).collect();
            snaps.push(Snapshot::new(t, ids, &edges).unwrap());
        }
        TemporalGraphDataset::new(snaps, reg, None).unwrap()
    }

    #[test]
    fn identical_snapshots_align_fully() {
        let ds = dataset(&[&["a", "b", "c"], &["a", "b", "c"]]);
        let maps = common_nodes(&ds, 1, 1);
        assert_eq!(maps.len(), 1);
        assert_eq!(maps[0].pairs, vec![(0, 0), (1, 1), (2, 2)]);
    }

    #[test]
    fn disjoint_snapshots_give_empty_map() {
        let ds = dataset(&[&["a", "b"], &["c", "d"]]);
        assert!(common_nodes(&ds, 1, 1)[0].is_empty());
    }

    #[test]
    fn partial_overlap_pairs_shared_nodes() {
        let ds = dataset(&[&["a", "b", "c"], &["b", "c", "d"]]);
        let m = &common_nodes(&ds, 1, 1)[0];
        assert_eq!(m.len(), 2);
        for &(lt, ls) in &m.pairs {
            let g = ds.snapshot(1).global_id(lt);
            assert_eq!(g, ds.snapshot(0).global_id(ls));
            let name = ds.registry().name(g).unwrap();
            assert!(name == "b" || name == "c");
        }
    }

    #[test]
    fn window_counts_prior_snapshots() {
        let ds = dataset(&[&["a", "b"], &["a", "b"], &["a", "b"], &["a", "b"]]);
        assert!(common_nodes(&ds, 0, 3).is_empty());
        assert!(common_nodes(&ds, 2, 0).is_empty());
        let sources: Vec<usize> = common_nodes(&ds, 3, 2).iter().map(|m| m.source).collect();
        assert_eq!(sources, vec![2, 1]);
        assert_eq!(common_nodes(&ds, 1, 5).len(), 1);
    }
}
