use alloc::format;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use super::logistic::{fit_logistic, LogisticConfig};
use super::metrics::{auc, cosine_similarity, f1_scores};
use super::report::{MetricReport, MetricSeries};
use crate::error::{invalid, Error, Result};
use crate::graph::{align_snapshots, sample_non_edges, TemporalGraphDataset};
use crate::model::edge_score;
use crate::tensor::{derive_seed, rng_from_seed, DenseMatrix};

fn check_embeddings(mus: &[DenseMatrix], ds: &TemporalGraphDataset) -> Result<()> {
    if ds.len() < 2 {
        return Err(invalid("evaluation needs at least 2 snapshots"));
    }
    if mus.len() != ds.len() {
        return Err(invalid(format!("{} embeddings for {} snapshots", mus.len(), ds.len())));
    }
    for (t, (mu, s)) in mus.iter().zip(ds.snapshots()).enumerate() {
        if mu.rows() != s.num_nodes() {
            return Err(invalid(format!(
                "embedding {t} has {} rows, snapshot has {} nodes",
                mu.rows(),
                s.num_nodes()
            )));
        }
    }
    Ok(())
}

/// AUC of predicting the edges of `G_t` among nodes also in `G_{t-1}` from
/// `mu_{t-1}`, against as many sampled non-edges of `G_t`.
pub fn link_prediction_eval(mus: &[DenseMatrix], ds: &TemporalGraphDataset, seed: u64) -> Result<MetricReport> {
    check_embeddings(mus, ds)?;
    let mut series = MetricSeries::new("auc");
    for t in 1..ds.len() {
        let cur = ds.snapshot(t);
        let map = align_snapshots(cur, ds.snapshot(t - 1));
        // G_t local id → G_{t-1} local id.
        let mut prev_of = alloc::vec![usize::MAX; cur.num_nodes()];
        for &(a, b) in &map.pairs {
            prev_of[a] = b;
        }
        let positives: Vec<(usize, usize)> = cur
            .edges()
            .into_iter()
            .filter(|&(u, v)| prev_of[u] != usize::MAX && prev_of[v] != usize::MAX)
            .collect();
        if positives.is_empty() {
            log::warn!("link prediction: no eligible positives at t={t}, skipped");
            continue;
        }
        let candidates: Vec<usize> = map.pairs.iter().map(|p| p.0).collect();
        let mut rng = rng_from_seed(derive_seed(seed, &[t as u64]));
        let negatives = match sample_non_edges(cur, &candidates, positives.len(), &mut rng) {
            Ok(n) => n,
            Err(e) => {
                log::warn!("link prediction: {e} at t={t}, skipped");
                continue;
            }
        };
        let mu = &mus[t - 1];
        let score = |pairs: &[(usize, usize)]| -> Result<Vec<f64>> {
            pairs
                .iter()
                .map(|&(u, v)| edge_score(mu, prev_of[u], prev_of[v]))
                .collect()
        };
        series.values.push((t, auc(&score(&positives)?, &score(&negatives)?)?));
    }
    let mut report = MetricReport::new("lp", "");
    report.series.push(series);
    Ok(report)
}

/// Macro/micro-F1 of classifying nodes of `G_t` (present in `G_{t-1}`) from
/// `mu_{t-1}`, with a classifier trained on all labeled `(mu_t', label)` for
/// `t' < t`.
pub fn node_classification_eval(mus: &[DenseMatrix], ds: &TemporalGraphDataset, seed: u64) -> Result<MetricReport> {
    check_embeddings(mus, ds)?;
    let labels = ds
        .labels()
        .ok_or_else(|| Error::MissingLabels("node classification needs a labels file".into()))?;
    let dim = mus.iter().map(DenseMatrix::cols).max().unwrap_or(0);
    let mut train_rows: Vec<f64> = Vec::new();
    let mut train_labels: Vec<usize> = Vec::new();
    let mut macro_f1 = MetricSeries::new("macro_f1");
    let mut micro_f1 = MetricSeries::new("micro_f1");
    for t in 1..ds.len() {
        let prev = ds.snapshot(t - 1);
        for local in 0..prev.num_nodes() {
            if let Some(y) = labels.label(prev.t(), prev.global_id(local)) {
                train_rows.extend_from_slice(mus[t - 1].row(local));
                train_labels.push(y);
            }
        }
        let cur = ds.snapshot(t);
        let mut test_rows: Vec<f64> = Vec::new();
        let mut test_labels: Vec<usize> = Vec::new();
        for &(a, b) in &align_snapshots(cur, prev).pairs {
            if let Some(y) = labels.label(cur.t(), cur.global_id(a)) {
                test_rows.extend_from_slice(mus[t - 1].row(b));
                test_labels.push(y);
            }
        }
        if test_labels.is_empty() {
            log::warn!("node classification: no labeled common nodes at t={t}, skipped");
            continue;
        }
        let x_train = DenseMatrix::from_vec(train_labels.len(), dim, train_rows.clone())?;
        let cfg = LogisticConfig {
            seed: derive_seed(seed, &[t as u64]),
            ..LogisticConfig::default()
        };
        let model = match fit_logistic(&x_train, &train_labels, &cfg) {
            Ok(m) => m,
            Err(e) => {
                log::warn!("node classification: {e} at t={t}, skipped");
                continue;
            }
        };
        let x_test = DenseMatrix::from_vec(test_labels.len(), dim, test_rows)?;
        let (ma, mi) = f1_scores(&model.predict(&x_test)?, &test_labels)?;
        macro_f1.values.push((t, ma));
        micro_f1.values.push((t, mi));
    }
    let mut report = MetricReport::new("nc", "");
    report.series.push(macro_f1);
    report.series.push(micro_f1);
    Ok(report)
}

/// `candidates` (excluding `query`) ordered by decreasing cosine similarity
/// of their embedding rows to `query`'s; ties keep the smaller index first.
pub fn rank_by_cosine(embeddings: &DenseMatrix, query: usize, candidates: &[usize]) -> Vec<usize> {
    let q = embeddings.row(query);
    let mut scored: Vec<(f64, usize)> = candidates
        .iter()
        .filter(|&&c| c != query)
        .map(|&c| (cosine_similarity(q, embeddings.row(c)), c))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, c)| c).collect()
}

/// Precision@k and Recall@k of recommending, for each common node of
/// `G_{t-1}` and `G_t` with more than `k` neighbours in `G_t`, the `k` other
/// common nodes closest in `mu_{t-1}`. Cells without eligible queries are
/// omitted from the series.
pub fn recommend_eval(
    mus: &[DenseMatrix],
    ds: &TemporalGraphDataset,
    ks: RangeInclusive<usize>,
) -> Result<MetricReport> {
    check_embeddings(mus, ds)?;
    if ks.is_empty() || *ks.start() == 0 {
        return Err(invalid(format!(
            "k range {}..{} must be nonempty and start at 1 or more",
            ks.start(),
            ks.end()
        )));
    }
    let mut precision: Vec<MetricSeries> = ks
        .clone()
        .map(|k| MetricSeries::new(format!("precision@{k}")))
        .collect();
    let mut recall: Vec<MetricSeries> = ks.clone().map(|k| MetricSeries::new(format!("recall@{k}"))).collect();
    for t in 1..ds.len() {
        let cur = ds.snapshot(t);
        let map = align_snapshots(cur, ds.snapshot(t - 1));
        let common_prev: Vec<usize> = map.pairs.iter().map(|p| p.1).collect();
        let mut cur_of_prev = alloc::collections::BTreeMap::new();
        for &(a, b) in &map.pairs {
            cur_of_prev.insert(b, a);
        }
        // Rankings do not depend on k; compute once per query.
        let mut ranked: Vec<(usize, Vec<usize>)> = Vec::new();
        let max_k = *ks.end();
        for &(a, b) in &map.pairs {
            if cur.degree(a) > *ks.start() {
                let order = rank_by_cosine(&mus[t - 1], b, &common_prev);
                let top: Vec<usize> = order.into_iter().take(max_k).map(|p| cur_of_prev[&p]).collect();
                ranked.push((a, top));
            }
        }
        for (i, k) in ks.clone().enumerate() {
            let (mut p_sum, mut r_sum, mut queries) = (0.0, 0.0, 0usize);
            for (a, top) in &ranked {
                let degree = cur.degree(*a);
                if degree <= k {
                    continue;
                }
                let hits = top.iter().take(k).filter(|&&c| cur.has_edge(*a, c)).count();
                p_sum += hits as f64 / k as f64;
                r_sum += hits as f64 / degree as f64;
                queries += 1;
            }
            if queries == 0 {
                log::debug!("recommendation: no query node with more than {k} neighbours at t={t}");
                continue;
            }
            precision[i].values.push((t, p_sum / queries as f64));
            recall[i].values.push((t, r_sum / queries as f64));
        }
    }
    let mut report = MetricReport::new("rec", "");
    report.series.extend(precision);
    report.series.extend(recall);
    Ok(report)
}

/// Mean Euclidean distance between `mu_t` and `mu_{t-lag}` rows of common
/// nodes, pooled over all `t ≥ lag`. `None` if no node is shared.
pub fn latent_drift(mus: &[DenseMatrix], ds: &TemporalGraphDataset, lag: usize) -> Result<Option<f64>> {
    if mus.len() != ds.len() {
        return Err(invalid(format!("{} embeddings for {} snapshots", mus.len(), ds.len())));
    }
    if lag == 0 {
        return Err(invalid("drift lag must be positive"));
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for t in lag..ds.len() {
        let map = align_snapshots(ds.snapshot(t), ds.snapshot(t - lag));
        for &(a, b) in &map.pairs {
            let d2: f64 = mus[t]
                .row(a)
                .iter()
                .zip(mus[t - lag].row(b))
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            sum += libm::sqrt(d2);
            count += 1;
        }
    }
    Ok((count > 0).then(|| sum / count as f64))
}
