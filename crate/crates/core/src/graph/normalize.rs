use alloc::vec::Vec;

use super::Snapshot;
use crate::tensor::SparseMatrix;

/// Symmetric GCN normalization of a snapshot's adjacency.
///
/// With `self_loops` this is `D̃^{-1/2}(A+I)D̃^{-1/2}` with `D̃` the degree
/// matrix of `A+I`; otherwise `D^{-1/2}AD^{-1/2}`. Isolated nodes get a single
/// `1` on their diagonal in both modes.
pub fn normalize_adjacency(s: &Snapshot, self_loops: bool) -> SparseMatrix {
    if self_loops {
        s.normalized().clone()
    } else {
        renormalize(s.adjacency(), false)
    }
}

pub(crate) fn renormalize(adj: &SparseMatrix, self_loops: bool) -> SparseMatrix {
    let n = adj.rows();
    let loop_weight = if self_loops { 1.0 } else { 0.0 };
    let deg: Vec<f64> = (0..n).map(|r| adj.row(r).1.iter().sum::<f64>() + loop_weight).collect();

    let mut triplets = Vec::with_capacity(adj.nnz() + n);
    for r in 0..n {
        let (cols, vals) = adj.row(r);
        if cols.is_empty() {
            triplets.push((r, r, 1.0));
            continue;
        }
        for (&c, &v) in cols.iter().zip(vals) {
            triplets.push((r, c, v / libm::sqrt(deg[r] * deg[c])));
        }
        if self_loops {
            triplets.push((r, r, loop_weight / deg[r]));
        }
    }
    SparseMatrix::from_triplets(n, n, &triplets).expect("indices within bounds")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::DenseMatrix;
    use alloc::vec;
    use proptest::prelude::*;

    /// Dense evaluation of the formula, independent of the CSR path.
    fn dense_oracle(adj: &DenseMatrix) -> DenseMatrix {
        let n = adj.rows();
        let mut a = adj.clone();
        for i in 0..n {
            a.set(i, i, a.get(i, i) + 1.0);
        }
        let deg: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, a.get(i, j) / (deg[i] * deg[j]).sqrt());
            }
        }
        out
    }

    fn snapshot(n: usize, edges: &[(usize, usize)]) -> Snapshot {
        Snapshot::new(0, (0..n).collect(), edges).unwrap()
    }

    #[test]
    fn single_edge_gives_halves() {
        let d = normalize_adjacency(&snapshot(2, &[(0, 1)]), true).to_dense();
        assert_eq!(d, DenseMatrix::from_rows(&[[0.5, 0.5], [0.5, 0.5]]));
    }

    #[test]
    fn edgeless_graph_is_identity() {
        for loops in [true, false] {
            let d = normalize_adjacency(&snapshot(3, &[]), loops).to_dense();
            assert_eq!(d, DenseMatrix::identity(3));
        }
    }

    #[test]
    fn triangle_entries_are_one_third() {
        let d = normalize_adjacency(&snapshot(3, &[(0, 1), (1, 2), (0, 2)]), true).to_dense();
        assert!(d.as_slice().iter().all(|&v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn without_self_loops_path_graph() {
        let d = normalize_adjacency(&snapshot(3, &[(0, 1), (1, 2)]), false).to_dense();
        let h = 1.0 / 2f64.sqrt();
        let expect = DenseMatrix::from_rows(&[[0.0, h, 0.0], [h, 0.0, h], [0.0, h, 0.0]]);
        assert!(d.max_abs_diff(&expect) < 1e-15);
    }

    proptest! {
        #[test]
        fn matches_dense_formula_on_random_graphs(mask in proptest::collection::vec(any::<bool>(), 45)) {
            let mut edges = vec![];
            let mut k = 0;
            for i in 0..10 {
                for j in (i + 1)..10 {
                    if mask[k] { edges.push((i, j)); }
                    k += 1;
                }
            }
            let s = snapshot(10, &edges);
            let got = normalize_adjacency(&s, true);
            prop_assert!(got.is_symmetric());
            prop_assert!(got.to_dense().max_abs_diff(&dense_oracle(&s.adjacency().to_dense())) < 1e-12);
            for i in 0..10 {
                let row_sum: f64 = s.adjacency().row(i).1.iter().sum::<f64>() + 1.0;
                prop_assert_eq!(row_sum, (s.degree(i) + 1) as f64);
            }
        }
    }
}
