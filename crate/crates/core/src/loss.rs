//! Loss terms of one snapshot: weighted reconstruction cross-entropy, KL to
//! the standard normal prior, and the temporal-smoothness KL to the
//! random-walk prior centred on earlier snapshots' latents.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::AlignmentMap;
use crate::tensor::{dot, DenseMatrix, SparseMatrix};

/// Per-term values of one snapshot's objective.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub recon: f64,
    pub kl_prior: f64,
    pub kl_smooth: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(recon: f64, kl_prior: f64, kl_smooth: f64, gamma: f64) -> Self {
        Self {
            recon,
            kl_prior,
            kl_smooth,
            total: recon + kl_prior + gamma * kl_smooth,
        }
    }

    /// Name and value of the first non-finite term, if any.
    pub fn first_non_finite(&self) -> Option<(&'static str, f64)> {
        [
            ("recon", self.recon),
            ("kl_prior", self.kl_prior),
            ("kl_smooth", self.kl_smooth),
            ("total", self.total),
        ]
        .into_iter()
        .find(|(_, v)| !v.is_finite())
    }
}

/// `(softplus(x), softplus(-x), sigmoid(x), sigmoid(-x))` from a single
/// exponential.
#[inline]
fn logistic_terms(x: f64) -> (f64, f64, f64, f64) {
    let e = libm::exp(-libm::fabs(x));
    let log_term = libm::log1p(e);
    let (big, small) = (1.0 / (1.0 + e), e / (1.0 + e));
    if x >= 0.0 {
        (x + log_term, log_term, big, small)
    } else {
        (log_term, log_term - x, small, big)
    }
}

/// Class-balancing weights for an `n`-node label matrix with `ones` nonzeros:
/// `pos_weight = (n² - ones) / ones`, `norm = n² / (2 (n² - ones))`.
pub fn recon_weights(n: usize, ones: usize) -> Result<(f64, f64)> {
    let total = n * n;
    if ones == 0 || ones >= total {
        return Err(Error::DegenerateGraph(format!(
            "reconstruction target has {ones} ones out of {total} entries"
        )));
    }
    let (total, ones) = (total as f64, ones as f64);
    Ok(((total - ones) / ones, total / (2.0 * (total - ones))))
}

/// Weighted binary cross-entropy over all `N²` logits, and its gradient with
/// respect to the logits.
///
/// `loss = norm · mean(pos_weight · y · softplus(-x) + (1 - y) · softplus(x))`
pub fn recon_loss(
    logits: &DenseMatrix,
    adj_label: &DenseMatrix,
    pos_weight: f64,
    norm: f64,
) -> Result<(f64, DenseMatrix)> {
    logits.same_shape(adj_label, "recon_loss")?;
    let n = logits.rows();
    let ones = adj_label.as_slice().iter().filter(|&&y| y != 0.0).count();
    if ones == 0 || ones == n * logits.cols() {
        return Err(Error::DegenerateGraph(format!(
            "reconstruction target has {ones} ones out of {} entries",
            n * logits.cols()
        )));
    }
    let scale = norm / (logits.as_slice().len() as f64);
    let mut grad = DenseMatrix::zeros(n, logits.cols());
    let mut sum = 0.0;
    for ((g, &x), &y) in grad
        .as_mut_slice()
        .iter_mut()
        .zip(logits.as_slice())
        .zip(adj_label.as_slice())
    {
        let (sp, sp_neg, sig, sig_neg) = logistic_terms(x);
        sum += pos_weight * y * sp_neg + (1.0 - y) * sp;
        *g = scale * ((1.0 - y) * sig - pos_weight * y * sig_neg);
    }
    Ok((scale * sum, grad))
}

/// Reconstruction loss for the label `A + I` computed row by row from `z`,
/// never materializing the `N × N` logits. Returns the loss and `∂L/∂z`.
pub fn recon_loss_latent(z: &DenseMatrix, adjacency: &SparseMatrix) -> Result<(f64, DenseMatrix)> {
    let n = z.rows();
    if adjacency.shape() != (n, n) {
        return Err(Error::ShapeMismatch {
            op: "recon_loss_latent",
            left: adjacency.shape(),
            right: z.shape(),
        });
    }
    let ones = adjacency.nnz() + n;
    let (pos_weight, norm) = recon_weights(n, ones)?;
    let scale = norm / ((n * n) as f64);
    let d = z.cols();
    let mut d_z = DenseMatrix::zeros(n, d);
    let mut sum = 0.0;
    let mut g_row = vec![0.0; n];
    let mut acc = vec![0.0; d];
    for i in 0..n {
        let neighbours = adjacency.row(i).0;
        let mut next = 0;
        let zi = z.row(i);
        for (j, g) in g_row.iter_mut().enumerate() {
            let edge = next < neighbours.len() && neighbours[next] == j;
            if edge {
                next += 1;
            }
            let (sp, sp_neg, sig, sig_neg) = logistic_terms(dot(zi, z.row(j)));
            if edge || i == j {
                sum += pos_weight * sp_neg;
                *g = -scale * pos_weight * sig_neg;
            } else {
                sum += sp;
                *g = scale * sig;
            }
        }
        // (G + Gᵀ) z: row i gets Σ_j G_ij z_j, and each row j gets G_ij z_i.
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (j, &g) in g_row.iter().enumerate() {
            for (a, &v) in acc.iter_mut().zip(z.row(j)) {
                *a += g * v;
            }
            for (o, &v) in d_z.row_mut(j).iter_mut().zip(zi) {
                *o += g * v;
            }
        }
        for (o, &a) in d_z.row_mut(i).iter_mut().zip(&acc) {
            *o += a;
        }
    }
    Ok((scale * sum, d_z))
}

/// `KL(N(mu, σ²) ‖ N(0, I))` summed over latent dimensions and averaged over
/// nodes, with gradients w.r.t. `mu` and `log_sigma`.
pub fn kl_prior(mu: &DenseMatrix, log_sigma: &DenseMatrix) -> Result<(f64, DenseMatrix, DenseMatrix)> {
    mu.same_shape(log_sigma, "kl_prior")?;
    let n = mu.rows();
    let mut d_mu = DenseMatrix::zeros(n, mu.cols());
    let mut d_ls = DenseMatrix::zeros(n, mu.cols());
    if n == 0 {
        return Ok((0.0, d_mu, d_ls));
    }
    let inv_n = 1.0 / n as f64;
    let mut sum = 0.0;
    for k in 0..mu.as_slice().len() {
        let (m, ls) = (mu.as_slice()[k], log_sigma.as_slice()[k]);
        let var = libm::exp(2.0 * ls);
        sum += -0.5 * (1.0 + 2.0 * ls - m * m - var);
        d_mu.as_mut_slice()[k] = m * inv_n;
        d_ls.as_mut_slice()[k] = (var - 1.0) * inv_n;
    }
    Ok((sum * inv_n, d_mu, d_ls))
}

/// Random-walk prior for one earlier snapshot: latent means of the nodes it
/// shares with the current snapshot, held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorAnchor {
    pub source: usize,
    /// `(local index in current snapshot, local index in source)`.
    pub pairs: Vec<(usize, usize)>,
    /// One row per pair, in pair order.
    pub mean: DenseMatrix,
}

impl PriorAnchor {
    /// Restricts `source_latent` (means or samples of the source snapshot) to
    /// the aligned nodes.
    pub fn from_alignment(map: &AlignmentMap, source_latent: &DenseMatrix) -> Self {
        Self {
            source: map.source,
            pairs: map.pairs.clone(),
            mean: source_latent.select_rows(map.pairs.iter().map(|&(_, s)| s)),
        }
    }
}

/// Sum over anchors of `KL(q_t ‖ N(m, σ_rw² I))` restricted to common nodes
/// and divided by their count, with gradients w.r.t. `mu` and `log_sigma`.
/// Anchors without common nodes contribute nothing.
pub fn kl_smooth(
    mu: &DenseMatrix,
    log_sigma: &DenseMatrix,
    anchors: &[PriorAnchor],
    sigma_rw: f64,
) -> Result<(f64, DenseMatrix, DenseMatrix)> {
    mu.same_shape(log_sigma, "kl_smooth")?;
    if !(sigma_rw > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma_rw must be positive, got {sigma_rw}"
        )));
    }
    let d = mu.cols();
    let mut d_mu = DenseMatrix::zeros(mu.rows(), d);
    let mut d_ls = DenseMatrix::zeros(mu.rows(), d);
    let var_rw = sigma_rw * sigma_rw;
    let log_rw = libm::log(sigma_rw);
    let mut total = 0.0;
    for anchor in anchors {
        if anchor.pairs.is_empty() {
            log::warn!("anchor on snapshot {} has no common nodes; skipped", anchor.source);
            continue;
        }
        if anchor.mean.shape() != (anchor.pairs.len(), d) {
            return Err(Error::ShapeMismatch {
                op: "kl_smooth (anchor)",
                left: anchor.mean.shape(),
                right: (anchor.pairs.len(), d),
            });
        }
        let inv_c = 1.0 / anchor.pairs.len() as f64;
        let mut sum = 0.0;
        for (k, &(i, _)) in anchor.pairs.iter().enumerate() {
            if i >= mu.rows() {
                return Err(Error::IndexOutOfBounds {
                    row: i,
                    col: 0,
                    rows: mu.rows(),
                    cols: d,
                });
            }
            for c in 0..d {
                let (m, ls, target) = (mu.get(i, c), log_sigma.get(i, c), anchor.mean.get(k, c));
                let var = libm::exp(2.0 * ls);
                let diff = m - target;
                sum += log_rw - ls + (var + diff * diff) / (2.0 * var_rw) - 0.5;
                d_mu.set(i, c, d_mu.get(i, c) + diff / var_rw * inv_c);
                d_ls.set(i, c, d_ls.get(i, c) + (var / var_rw - 1.0) * inv_c);
            }
        }
        total += sum * inv_c;
    }
    Ok((total, d_mu, d_ls))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{decode_logits, sigmoid, softplus};
    use crate::tensor::{finite_difference_check, glorot_uniform, rng_from_seed, CoordinateSample};

    #[test]
    fn fused_logistic_terms_match_separate_ones() {
        for x in [-800.0, -35.0, -2.5, -1e-9, 0.0, 1e-9, 0.7, 19.0, 750.0] {
            let (sp, sp_neg, sig, sig_neg) = logistic_terms(x);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-15 * b.abs().max(1.0);
            assert!(close(sp, softplus(x)) && close(sp_neg, softplus(-x)), "{x}");
            assert!(close(sig, sigmoid(x)) && close(sig_neg, sigmoid(-x)), "{x}");
        }
    }

    fn anchor(pairs: Vec<(usize, usize)>, mean: DenseMatrix) -> PriorAnchor {
        PriorAnchor { source: 0, pairs, mean }
    }

    #[test]
    fn recon_at_zero_logits_is_ln2() {
        let mut y = DenseMatrix::zeros(3, 3);
        y.set(0, 0, 1.0);
        let (l, _) = recon_loss(&DenseMatrix::zeros(3, 3), &y, 1.0, 1.0).unwrap();
        assert!((l - core::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn recon_vanishes_for_confident_correct_logits() {
        let y = DenseMatrix::identity(3);
        let x = y.map(|v| if v == 1.0 { 60.0 } else { -60.0 });
        let (l, _) = recon_loss(&x, &y, 3.0, 0.75).unwrap();
        assert!(l < 1e-20);
    }

    #[test]
    fn recon_rejects_degenerate_targets() {
        let x = DenseMatrix::zeros(2, 2);
        assert!(recon_loss(&x, &DenseMatrix::zeros(2, 2), 1.0, 1.0).is_err());
        assert!(recon_loss(&x, &DenseMatrix::filled(2, 2, 1.0), 1.0, 1.0).is_err());
        assert!(recon_weights(2, 4).is_err());
        assert!(recon_weights(2, 0).is_err());
    }

    #[test]
    fn recon_gradient_matches_finite_differences() {
        let mut rng = rng_from_seed(13);
        let x = glorot_uniform(&mut rng, 5, 5).map(|v| 4.0 * v);
        let mut y = DenseMatrix::identity(5);
        for &(i, j) in &[(0, 1), (1, 0), (2, 4), (4, 2), (3, 1)] {
            y.set(i, j, 1.0);
        }
        let (pw, norm) = recon_weights(5, 10).unwrap();
        let (_, g) = recon_loss(&x, &y, pw, norm).unwrap();
        let f = |flat: &[f64]| {
            let xm = DenseMatrix::from_vec(5, 5, flat.to_vec()).unwrap();
            recon_loss(&xm, &y, pw, norm).unwrap().0
        };
        let r = finite_difference_check(f, x.as_slice(), g.as_slice(), 1e-5, CoordinateSample::All).unwrap();
        assert!(r.max_relative_error < 1e-6, "{r:?}");
    }

    #[test]
    fn latent_route_matches_dense_route() {
        let adj = SparseMatrix::symmetric_binary(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5)]).unwrap();
        let z = glorot_uniform(&mut rng_from_seed(3), 6, 3).map(|v| 2.0 * v);
        let (loss, d_z) = recon_loss_latent(&z, &adj).unwrap();

        let mut y = adj.to_dense();
        for i in 0..6 {
            y.set(i, i, 1.0);
        }
        let (pw, norm) = recon_weights(6, adj.nnz() + 6).unwrap();
        let (dense_loss, g) = recon_loss(&decode_logits(&z), &y, pw, norm).unwrap();
        let mut dense_dz = g.matmul(&z).unwrap();
        dense_dz.add_scaled(1.0, &g.t_matmul(&z).unwrap()).unwrap();
        assert!((loss - dense_loss).abs() < 1e-12);
        assert!(d_z.max_abs_diff(&dense_dz) < 1e-12);
    }

    #[test]
    fn kl_prior_closed_forms() {
        let (v, _, _) = kl_prior(&DenseMatrix::zeros(4, 2), &DenseMatrix::zeros(4, 2)).unwrap();
        assert_eq!(v, 0.0);
        let (v, _, _) = kl_prior(&DenseMatrix::filled(1, 1, 1.0), &DenseMatrix::zeros(1, 1)).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kl_prior_gradients() {
        let mut rng = rng_from_seed(8);
        let mu = glorot_uniform(&mut rng, 4, 3);
        let ls = glorot_uniform(&mut rng, 4, 3);
        let (_, d_mu, d_ls) = kl_prior(&mu, &ls).unwrap();
        for k in 0..12 {
            let (m, l) = (mu.as_slice()[k], ls.as_slice()[k]);
            assert!((d_mu.as_slice()[k] - m / 4.0).abs() < 1e-15);
            assert!((d_ls.as_slice()[k] - ((2.0 * l).exp() - 1.0) / 4.0).abs() < 1e-15);
        }
        let mut flat = mu.as_slice().to_vec();
        flat.extend_from_slice(ls.as_slice());
        let mut grad = d_mu.as_slice().to_vec();
        grad.extend_from_slice(d_ls.as_slice());
        let f = |p: &[f64]| {
            let m = DenseMatrix::from_vec(4, 3, p[..12].to_vec()).unwrap();
            let l = DenseMatrix::from_vec(4, 3, p[12..].to_vec()).unwrap();
            kl_prior(&m, &l).unwrap().0
        };
        let r = finite_difference_check(f, &flat, &grad, 1e-5, CoordinateSample::All).unwrap();
        assert!(r.max_relative_error < 1e-6);
    }

    #[test]
    fn kl_smooth_closed_forms() {
        let mu = DenseMatrix::from_rows(&[[0.3, -0.2], [1.0, 2.0]]);
        let ls = DenseMatrix::filled(2, 2, 0.5f64.ln());
        let same = anchor(vec![(0, 0), (1, 1)], mu.clone());
        let (v, _, _) = kl_smooth(&mu, &ls, &[same], 0.5).unwrap();
        assert!(v.abs() < 1e-15);

        let one = DenseMatrix::filled(1, 1, 1.0);
        let zero_ls = DenseMatrix::zeros(1, 1);
        let a = anchor(vec![(0, 0)], DenseMatrix::zeros(1, 1));
        let (v, _, _) = kl_smooth(&one, &zero_ls, &[a.clone()], 1.0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let (v2, _, _) = kl_smooth(&one, &zero_ls, &[a.clone(), a], 1.0).unwrap();
        assert!((v2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kl_smooth_without_anchors_is_exactly_zero() {
        let mu = DenseMatrix::filled(3, 2, 4.0);
        let (v, d_mu, d_ls) = kl_smooth(&mu, &DenseMatrix::zeros(3, 2), &[], 0.7).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(d_mu, DenseMatrix::zeros(3, 2));
        assert_eq!(d_ls, DenseMatrix::zeros(3, 2));
        let empty = anchor(vec![], DenseMatrix::zeros(0, 2));
        assert_eq!(kl_smooth(&mu, &DenseMatrix::zeros(3, 2), &[empty], 0.7).unwrap().0, 0.0);
        assert!(kl_smooth(&mu, &DenseMatrix::zeros(3, 2), &[], 0.0).is_err());
    }

    #[test]
    fn kl_smooth_gradients_match_finite_differences() {
        let mut rng = rng_from_seed(17);
        let mu = glorot_uniform(&mut rng, 5, 3);
        let ls = glorot_uniform(&mut rng, 5, 3);
        let anchors = [
            anchor(vec![(0, 2), (3, 0), (4, 1)], glorot_uniform(&mut rng, 3, 3)),
            anchor(vec![(1, 0), (3, 1)], glorot_uniform(&mut rng, 2, 3)),
        ];
        let (_, d_mu, d_ls) = kl_smooth(&mu, &ls, &anchors, 0.8).unwrap();
        let mut flat = mu.as_slice().to_vec();
        flat.extend_from_slice(ls.as_slice());
        let mut grad = d_mu.as_slice().to_vec();
        grad.extend_from_slice(d_ls.as_slice());
        let f = |p: &[f64]| {
            let m = DenseMatrix::from_vec(5, 3, p[..15].to_vec()).unwrap();
            let l = DenseMatrix::from_vec(5, 3, p[15..].to_vec()).unwrap();
            kl_smooth(&m, &l, &anchors, 0.8).unwrap().0
        };
        let r = finite_difference_check(f, &flat, &grad, 1e-5, CoordinateSample::All).unwrap();
        assert!(r.max_relative_error < 1e-6, "{r:?}");
    }

    proptest::proptest! {
        #[test]
        fn kl_terms_are_nonnegative(
            mu in proptest::collection::vec(-5.0f64..5.0, 6),
            ls in proptest::collection::vec(-10.0f64..10.0, 6),
            target in proptest::collection::vec(-5.0f64..5.0, 6),
            sigma_rw in 0.01f64..10.0,
        ) {
            let mu = DenseMatrix::from_vec(3, 2, mu).unwrap();
            let ls = DenseMatrix::from_vec(3, 2, ls).unwrap();
            let a = anchor(vec![(0, 0), (1, 1), (2, 2)], DenseMatrix::from_vec(3, 2, target).unwrap());
            proptest::prop_assert!(kl_prior(&mu, &ls).unwrap().0 >= -1e-9);
            proptest::prop_assert!(kl_smooth(&mu, &ls, &[a], sigma_rw).unwrap().0 >= -1e-9);
        }
    }
}
