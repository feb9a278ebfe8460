use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;

use super::{NodeLabels, NodeRegistry, Snapshot, TemporalGraphDataset};
use crate::error::{invalid, Result};
use crate::tensor::{rng_from_seed, SeededRng};

/// Parameters of the dynamic stochastic block model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmConfig {
    pub nodes: usize,
    pub communities: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub snapshots: usize,
    pub churn: f64,
    pub seed: u64,
}

impl SbmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 || self.snapshots == 0 {
            return Err(invalid("node and snapshot counts must be positive"));
        }
        if self.communities == 0 || self.communities > self.nodes {
            return Err(invalid(format!(
                "community count must be in 1..={}, got {}",
                self.nodes, self.communities
            )));
        }
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return Err(invalid(format!(
                "need 0 <= p_out < p_in <= 1, got p_in = {}, p_out = {}",
                self.p_in, self.p_out
            )));
        }
        if !(0.0..=1.0).contains(&self.churn) {
            return Err(invalid(format!("churn fraction must be in [0, 1], got {}", self.churn)));
        }
        Ok(())
    }
}

/// Generates a dynamic SBM.
///
/// Snapshot 0 is a plain SBM with uniformly random community assignment. Each
/// later snapshot moves `round(churn * n)` uniformly chosen nodes to uniformly
/// random communities (possibly their old one) and resamples only the node
/// pairs touching a moved node. Every node is present in every snapshot.
/// Community memberships are exported as labels: the initial assignment as
/// base labels plus per-snapshot overrides for nodes that moved away from it.
pub fn gen_dynamic_sbm(cfg: &SbmConfig) -> Result<TemporalGraphDataset> {
    cfg.validate()?;
    let n = cfg.nodes;
    let mut rng = rng_from_seed(cfg.seed);
    let mut community: Vec<usize> = (0..n).map(|_| rng.random_range(0..cfg.communities)).collect();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];

    let prob = |c: &[usize], u: usize, v: usize| if c[u] == c[v] { cfg.p_in } else { cfg.p_out };
    let coin = |rng: &mut SeededRng, p: f64| rng.random::<f64>() < p;

    for u in 0..n {
        for v in (u + 1)..n {
            if coin(&mut rng, prob(&community, u, v)) {
                adj[u].insert(v);
                adj[v].insert(u);
            }
        }
    }

    let mut registry = NodeRegistry::new();
    for i in 0..n {
        registry.intern(&i.to_string());
    }
    let mut labels = NodeLabels::new();
    // Class ids equal community ids.
    for c in 0..cfg.communities {
        labels.register_class(&c.to_string());
    }
    let initial = community.clone();
    for (node, &c) in initial.iter().enumerate() {
        labels.assign(node, &c.to_string(), None);
    }

    let mut snapshots = vec![to_snapshot(0, &adj)?];
    let moves = libm::round(cfg.churn * n as f64) as usize;
    for t in 1..cfg.snapshots {
        let mut moved = vec![false; n];
        let mut chosen = sample(&mut rng, n, moves).into_vec();
        chosen.sort_unstable();
        for &u in &chosen {
            moved[u] = true;
            community[u] = rng.random_range(0..cfg.communities);
            for v in core::mem::take(&mut adj[u]) {
                adj[v].remove(&u);
            }
        }
        for &u in &chosen {
            for v in 0..n {
                if v == u || (moved[v] && v < u) {
                    continue;
                }
                if coin(&mut rng, prob(&community, u, v)) {
                    adj[u].insert(v);
                    adj[v].insert(u);
                }
            }
        }
        for (node, (&now, &was)) in community.iter().zip(&initial).enumerate() {
            if now != was {
                labels.assign(node, &now.to_string(), Some(t));
            }
        }
        snapshots.push(to_snapshot(t, &adj)?);
    }
    TemporalGraphDataset::new(snapshots, registry, Some(labels))
}

fn to_snapshot(t: usize, adj: &[BTreeSet<usize>]) -> Result<Snapshot> {
    let edges: Vec<(usize, usize)> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, nb)| nb.range(u + 1..).map(move |&v| (u, v)))
        .collect();
    Snapshot::new(t, (0..adj.len()).collect(), &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(churn: f64, snapshots: usize, seed: u64) -> SbmConfig {
        SbmConfig {
            nodes: 200,
            communities: 4,
            p_in: 0.3,
            p_out: 0.02,
            snapshots,
            churn,
            seed,
        }
    }

    fn labels_at(ds: &TemporalGraphDataset, t: usize) -> Vec<usize> {
        let l = ds.labels().unwrap();
        (0..200).map(|g| l.label(t, g).unwrap()).collect()
    }

    #[test]
    fn frozen_dynamics_keep_labels() {
        let ds = gen_dynamic_sbm(&cfg(0.0, 4, 1)).unwrap();
        let first = labels_at(&ds, 0);
        for t in 1..4 {
            assert_eq!(labels_at(&ds, t), first);
            assert_eq!(ds.snapshot(t).adjacency(), ds.snapshot(0).adjacency());
        }
    }

    #[test]
    fn within_community_density_near_p_in() {
        let ds = gen_dynamic_sbm(&cfg(0.05, 5, 2)).unwrap();
        for t in 0..5 {
            let lab = labels_at(&ds, t);
            let s = ds.snapshot(t);
            let (mut pairs, mut hits) = (0usize, 0usize);
            for u in 0..200 {
                for v in (u + 1)..200 {
                    if lab[u] == lab[v] {
                        pairs += 1;
                        hits += usize::from(s.has_edge(u, v));
                    }
                }
            }
            let density = hits as f64 / pairs as f64;
            assert!((density - 0.3).abs() <= 0.06, "t={t} density {density}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(
            gen_dynamic_sbm(&cfg(0.1, 3, 5)).unwrap(),
            gen_dynamic_sbm(&cfg(0.1, 3, 5)).unwrap()
        );
        assert_ne!(
            gen_dynamic_sbm(&cfg(0.1, 3, 5)).unwrap(),
            gen_dynamic_sbm(&cfg(0.1, 3, 6)).unwrap()
        );
    }

    #[test]
    fn label_change_rate_matches_churn() {
        let f = 0.2;
        let ds = gen_dynamic_sbm(&cfg(f, 21, 3)).unwrap();
        let mut total = 0.0;
        for t in 1..21 {
            let (a, b) = (labels_at(&ds, t - 1), labels_at(&ds, t));
            total += a.iter().zip(&b).filter(|(x, y)| x != y).count() as f64 / 200.0;
        }
        let rate = total / 20.0;
        assert!((rate - f * 0.75).abs() <= 0.05, "rate {rate}");
    }

    #[test]
    fn parameter_ranges_are_checked() {
        let mut c = cfg(0.05, 2, 0);
        c.p_in = 0.01;
        c.p_out = 0.3;
        assert!(gen_dynamic_sbm(&c).is_err());
        let mut c = cfg(1.5, 2, 0);
        assert!(gen_dynamic_sbm(&c).is_err());
        c.churn = 0.1;
        c.communities = 0;
        assert!(gen_dynamic_sbm(&c).is_err());
    }
}
