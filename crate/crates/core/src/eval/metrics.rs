use alloc::collections::BTreeSet;

use crate::error::{invalid, Error, Result};
use crate::tensor::dot;

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() {
        return Err(Error::EmptyInput("auc positives"));
    }
    if neg.is_empty() {
        return Err(Error::EmptyInput("auc negatives"));
    }
    if pos.iter().chain(neg).any(|v| v.is_nan()) {
        return Err(invalid("auc scores must not be NaN"));
    }
    let mut sorted = neg.to_vec();
    sorted.sort_by(f64::total_cmp);
    // Twice the Mann-Whitney U, kept integral so the result is exact.
    let mut twice_u: u64 = 0;
    for &p in pos {
        let below = sorted.partition_point(|&n| n < p);
        let not_above = sorted.partition_point(|&n| n <= p);
        twice_u += 2 * below as u64 + (not_above - below) as u64;
    }
    Ok(twice_u as f64 / (2 * pos.len() as u64 * neg.len() as u64) as f64)
}

/// `(macro_f1, micro_f1)` over the classes appearing in either input.
pub fn f1_scores(predictions: &[usize], labels: &[usize]) -> Result<(f64, f64)> {
    if predictions.is_empty() {
        return Err(Error::EmptyInput("f1 predictions"));
    }
    if predictions.len() != labels.len() {
        return Err(Error::ShapeMismatch {
            op: "f1_scores",
            left: (predictions.len(), 1),
            right: (labels.len(), 1),
        });
    }
    let classes: BTreeSet<usize> = predictions.iter().chain(labels).copied().collect();
    let mut macro_sum = 0.0;
    let mut correct = 0usize;
    for &c in &classes {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for (&p, &y) in predictions.iter().zip(labels) {
            match (p == c, y == c) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                _ => {}
            }
        }
        correct += tp;
        macro_sum += (2 * tp) as f64 / (2 * tp + fp + fn_) as f64;
    }
    let micro = correct as f64 / labels.len() as f64;
    Ok((macro_sum / classes.len() as f64, micro))
}

/// Cosine similarity, defined as 0 when either vector is zero.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let na = libm::sqrt(dot(a, a));
    let nb = libm::sqrt(dot(b, b));
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}
