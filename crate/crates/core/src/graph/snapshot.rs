use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::normalize::renormalize;
use crate::error::{invalid, Error, Result};
use crate::tensor::{DenseMatrix, SparseMatrix};

/// Bidirectional map between external node names and dense global ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeRegistry {
    names: Vec<String>,
    ids: BTreeMap<String, usize>,
}

impl NodeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id of `name`, registering it on first sight.
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Class labels keyed by global node id.
///
/// A base label applies to every snapshot; a per-snapshot override replaces it
/// for one snapshot (used when community membership changes over time).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodeLabels {
    classes: Vec<String>,
    base: BTreeMap<usize, usize>,
    overrides: BTreeMap<(usize, usize), usize>,
}

impl NodeLabels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `class`, adding it if unseen.
    pub fn register_class(&mut self, class: &str) -> usize {
        match self.classes.iter().position(|c| c == class) {
            Some(i) => i,
            None => {
                self.classes.push(class.to_string());
                self.classes.len() - 1
            }
        }
    }

    /// Assigns `class` to `node`, for all snapshots or only snapshot `t`.
    pub fn assign(&mut self, node: usize, class: &str, t: Option<usize>) {
        let c = self.register_class(class);
        match t {
            None => {
                self.base.insert(node, c);
            }
            Some(t) => {
                self.overrides.insert((t, node), c);
            }
        }
    }

    /// Class index of `node` at snapshot `t`.
    pub fn label(&self, t: usize, node: usize) -> Option<usize> {
        self.overrides.get(&(t, node)).or_else(|| self.base.get(&node)).copied()
    }

    pub fn class_name(&self, class: usize) -> Option<&str> {
        self.classes.get(class).map(String::as_str)
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn base_labels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.base.iter().map(|(&n, &c)| (n, c))
    }

    pub fn overrides(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.overrides.iter().map(|(&(t, n), &c)| (t, n, c))
    }

    fn referenced_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.base.keys().copied().chain(self.overrides.keys().map(|&(_, n)| n))
    }
}

/// One time step of the dynamic graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    t: usize,
    nodes: Vec<usize>,
    adjacency: SparseMatrix,
    features: Option<DenseMatrix>,
    normalized: SparseMatrix,
}

impl Snapshot {
    /// `nodes` maps local index to global id and must be strictly increasing;
    /// `edges` are undirected pairs of local indices.
    pub fn new(t: usize, nodes: Vec<usize>, edges: &[(usize, usize)]) -> Result<Self> {
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("snapshot node ids must be strictly increasing"));
        }
        let adjacency = SparseMatrix::symmetric_binary(nodes.len(), edges)?;
        let normalized = renormalize(&adjacency, true);
        Ok(Self {
            t,
            nodes,
            adjacency,
            features: None,
            normalized,
        })
    }

    pub fn with_features(mut self, features: DenseMatrix) -> Result<Self> {
        if features.rows() != self.nodes.len() {
            return Err(Error::ShapeMismatch {
                op: "snapshot features",
                left: features.shape(),
                right: (self.nodes.len(), features.cols()),
            });
        }
        self.features = Some(features);
        Ok(self)
    }

    #[inline]
    pub fn t(&self) -> usize {
        self.t
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.nnz() / 2
    }

    /// Local-to-global id map.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn global_id(&self, local: usize) -> usize {
        self.nodes[local]
    }

    pub fn local_id(&self, global: usize) -> Option<usize> {
        self.nodes.binary_search(&global).ok()
    }

    pub fn adjacency(&self) -> &SparseMatrix {
        &self.adjacency
    }

    pub fn features(&self) -> Option<&DenseMatrix> {
        self.features.as_ref()
    }

    /// Cached `D̃^{-1/2}(A+I)D̃^{-1/2}`.
    pub fn normalized(&self) -> &SparseMatrix {
        &self.normalized
    }

    pub fn degree(&self, local: usize) -> usize {
        self.adjacency.row_nnz(local)
    }

    pub fn neighbours(&self, local: usize) -> &[usize] {
        self.adjacency.row(local).0
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.contains(u, v)
    }

    /// Undirected edges `(u, v)`, `u < v`, in local indices.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency.upper_edges()
    }
}

/// A timestamped interaction between two registered nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub src: usize,
    pub dst: usize,
    pub time: u64,
}

/// Ordered snapshot sequence sharing one node registry.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraphDataset {
    snapshots: Vec<Snapshot>,
    registry: NodeRegistry,
    labels: Option<NodeLabels>,
}

impl TemporalGraphDataset {
    pub fn new(snapshots: Vec<Snapshot>, registry: NodeRegistry, labels: Option<NodeLabels>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::EmptyInput("dataset needs at least one snapshot"));
        }
        if snapshots.windows(2).any(|w| w[0].t >= w[1].t) {
            return Err(invalid("snapshot timestamps must be strictly increasing"));
        }
        for s in &snapshots {
            if let Some(&last) = s.nodes.last() {
                if last >= registry.len() {
                    return Err(invalid(format!("snapshot {} references unregistered node {last}", s.t)));
                }
            }
        }
        if let Some(labels) = &labels {
            if let Some(n) = labels.referenced_nodes().find(|&n| n >= registry.len()) {
                return Err(invalid(format!("label for unregistered node {n}")));
            }
        }
        Ok(Self {
            snapshots,
            registry,
            labels,
        })
    }

    /// Buckets events into consecutive windows of `window_length` time units,
    /// starting at the earliest event. Windows without edges are kept as empty
    /// snapshots. With `cumulative`, snapshot `t` holds every edge seen up to
    /// and including window `t`.
    pub fn from_events(
        registry: NodeRegistry,
        events: &[Event],
        window_length: u64,
        cumulative: bool,
        labels: Option<NodeLabels>,
    ) -> Result<Self> {
        if window_length == 0 {
            return Err(invalid("window length must be positive"));
        }
        let start = events
            .iter()
            .map(|e| e.time)
            .min()
            .ok_or(Error::EmptyInput("no events"))?;
        let last_bucket = events
            .iter()
            .map(|e| (e.time - start) / window_length)
            .max()
            .unwrap_or(0);
        let buckets = usize::try_from(last_bucket + 1).map_err(|_| invalid("too many windows"))?;

        let mut per_window: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); buckets];
        for e in events {
            if e.src == e.dst {
                continue;
            }
            let b = ((e.time - start) / window_length) as usize;
            per_window[b].insert((e.src.min(e.dst), e.src.max(e.dst)));
        }

        let mut snapshots = Vec::with_capacity(buckets);
        let mut running: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (t, window) in per_window.into_iter().enumerate() {
            if window.is_empty() {
                log::warn!("window {t} has no edges; keeping an empty snapshot");
            }
            let edges = if cumulative {
                running.extend(window);
                running.clone()
            } else {
                window
            };
            snapshots.push(snapshot_from_global_edges(t, &edges)?);
        }
        Self::new(snapshots, registry, labels)
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn snapshot(&self, t: usize) -> &Snapshot {
        &self.snapshots[t]
    }

    /// Number of snapshots `T`.
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn registry(&self) -> &NodeRegistry {
        &self.registry
    }

    pub fn labels(&self) -> Option<&NodeLabels> {
        self.labels.as_ref()
    }

    pub fn set_labels(&mut self, labels: NodeLabels) -> Result<()> {
        if let Some(n) = labels.referenced_nodes().find(|&n| n >= self.registry.len()) {
            return Err(invalid(format!("label for unregistered node {n}")));
        }
        self.labels = Some(labels);
        Ok(())
    }

    pub fn set_features(&mut self, t: usize, features: DenseMatrix) -> Result<()> {
        let s = self.snapshots[t].clone().with_features(features)?;
        self.snapshots[t] = s;
        Ok(())
    }

    /// Keeps only snapshot `t` (used to train one snapshot in isolation).
    pub fn single(&self, t: usize) -> Self {
        Self {
            snapshots: vec![self.snapshots[t].clone()],
            registry: self.registry.clone(),
            labels: self.labels.clone(),
        }
    }
}

/// Builds a snapshot whose node set is exactly the endpoints of `edges`.
fn snapshot_from_global_edges(t: usize, edges: &BTreeSet<(usize, usize)>) -> Result<Snapshot> {
    let nodes: Vec<usize> = edges
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let local = |g: usize| nodes.binary_search(&g).expect("endpoint registered");
    let local_edges: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (local(u), local(v))).collect();
    Snapshot::new(t, nodes, &local_edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry(names: &[&str]) -> NodeRegistry {
        let mut r = NodeRegistry::new();
        for n in names {
            r.intern(n);
        }
        r
    }

    #[test]
    fn events_bucket_into_consecutive_windows() {
        let reg = registry(&["a", "b", "c"]);
        let events = [
            Event {
                src: 0,
                dst: 1,
                time: 0,
            },
            Event {
                src: 1,
                dst: 2,
                time: 10,
            },
        ];
        let ds = TemporalGraphDataset::from_events(reg, &events, 10, false, None).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.snapshot(0).num_edges(), 1);
        assert_eq!(ds.snapshot(1).num_edges(), 1);
        assert_eq!(ds.snapshot(1).nodes(), &[1, 2]);
    }

    #[test]
    fn reversed_duplicates_collapse_to_one_edge() {
        let reg = registry(&["u", "v"]);
        let events = [
            Event {
                src: 0,
                dst: 1,
                time: 3,
            },
            Event {
                src: 1,
                dst: 0,
                time: 4,
            },
            Event {
                src: 1,
                dst: 1,
                time: 4,
            },
        ];
        let ds = TemporalGraphDataset::from_events(reg, &events, 5, false, None).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.snapshot(0).num_edges(), 1);
        assert!(ds.snapshot(0).adjacency().is_symmetric());
    }

    #[test]
    fn empty_windows_are_kept_and_cumulative_unions() {
        let reg = registry(&["a", "b", "c"]);
        let events = [
            Event {
                src: 0,
                dst: 1,
                time: 0,
            },
            Event {
                src: 1,
                dst: 2,
                time: 2,
            },
        ];
        let ds = TemporalGraphDataset::from_events(reg.clone(), &events, 1, false, None).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.snapshot(1).num_nodes(), 0);
        let cum = TemporalGraphDataset::from_events(reg, &events, 1, true, None).unwrap();
        assert_eq!(cum.snapshot(1).num_edges(), 1);
        assert_eq!(cum.snapshot(2).num_edges(), 2);
    }

    #[test]
    fn labels_round_trip_by_global_id() {
        let mut reg = registry(&["z"]);
        let a = reg.intern("a");
        let mut labels = NodeLabels::new();
        labels.assign(a, "1", None);
        labels.assign(a, "0", Some(3));
        let events = [Event {
            src: 0,
            dst: a,
            time: 0,
        }];
        let ds = TemporalGraphDataset::from_events(reg, &events, 1, false, Some(labels)).unwrap();
        let l = ds.labels().unwrap();
        assert_eq!(l.class_name(l.label(0, a).unwrap()), Some("1"));
        assert_eq!(l.class_name(l.label(3, a).unwrap()), Some("0"));
        assert_eq!(l.label(0, 0), None);
    }

    #[test]
    fn invalid_datasets_are_rejected() {
        assert!(TemporalGraphDataset::from_events(NodeRegistry::new(), &[], 1, false, None).is_err());
        let reg = registry(&["a", "b"]);
        let e = [Event {
            src: 0,
            dst: 1,
            time: 0,
        }];
        assert!(TemporalGraphDataset::from_events(reg.clone(), &e, 0, false, None).is_err());
        let mut labels = NodeLabels::new();
        labels.assign(9, "x", None);
        assert!(TemporalGraphDataset::from_events(reg, &e, 1, false, Some(labels)).is_err());
        assert!(Snapshot::new(0, vec![2, 1], &[]).is_err());
    }
}
