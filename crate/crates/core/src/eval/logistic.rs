use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::tensor::{rng_from_seed, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

/// Multinomial logistic regression on z-scored inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    /// `d × C`
    pub weights: DenseMatrix,
    pub bias: Vec<f64>,
    /// Label of each output column.
    pub classes: Vec<usize>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub trained_on: usize,
}

impl LogisticModel {
    fn standardize(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.scale[j];
            }
        }
        out
    }

    fn logits(&self, standardized: &DenseMatrix) -> Result<DenseMatrix> {
        let mut logits = standardized.matmul(&self.weights)?;
        for i in 0..logits.rows() {
            for (v, b) in logits.row_mut(i).iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(logits)
    }

    /// Most probable label per row; ties go to the smaller label.
    pub fn predict(&self, x: &DenseMatrix) -> Result<Vec<usize>> {
        if x.cols() != self.weights.rows() {
            return Err(Error::ShapeMismatch {
                op: "logistic predict",
                left: x.shape(),
                right: self.weights.shape(),
            });
        }
        let logits = self.logits(&self.standardize(x))?;
        Ok((0..logits.rows())
            .map(|i| {
                let row = logits.row(i);
                let mut best = 0;
                for (c, &v) in row.iter().enumerate() {
                    if v > row[best] {
                        best = c;
                    }
                }
                self.classes[best]
            })
            .collect())
    }
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = libm::exp(*v - max);
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Full-batch gradient descent on the mean cross-entropy.
pub fn fit_logistic(features: &DenseMatrix, labels: &[usize], config: &LogisticConfig) -> Result<LogisticModel> {
    let (n, d) = features.shape();
    if n == 0 {
        return Err(Error::EmptyInput("logistic training set"));
    }
    if labels.len() != n {
        return Err(Error::ShapeMismatch {
            op: "fit_logistic",
            left: features.shape(),
            right: (labels.len(), 1),
        });
    }
    if !features.is_finite() {
        return Err(invalid("logistic features must be finite"));
    }
    let classes: Vec<usize> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(invalid(format!(
            "logistic regression needs at least 2 classes, got {}",
            classes.len()
        )));
    }
    let targets: Vec<usize> = labels
        .iter()
        .map(|y| classes.binary_search(y).expect("label collected above"))
        .collect();

    let mut mean = vec![0.0; d];
    let mut scale = vec![0.0; d];
    for i in 0..n {
        for (m, &v) in mean.iter_mut().zip(features.row(i)) {
            *m += v / n as f64;
        }
    }
    for i in 0..n {
        for ((s, &m), &v) in scale.iter_mut().zip(&mean).zip(features.row(i)) {
            *s += (v - m) * (v - m) / n as f64;
        }
    }
    for s in scale.iter_mut() {
        *s = if *s > 0.0 { libm::sqrt(*s) } else { 1.0 };
    }

    let c = classes.len();
    let mut rng = rng_from_seed(config.seed);
    let mut weights = DenseMatrix::zeros(d, c);
    for w in weights.as_mut_slice() {
        *w = rng.random_range(-0.01..0.01);
    }
    let mut model = LogisticModel {
        weights,
        bias: vec![0.0; c],
        classes,
        mean,
        scale,
        trained_on: n,
    };
    let x = model.standardize(features);
    for _ in 0..config.epochs {
        let mut residual = model.logits(&x)?;
        for (i, &y) in targets.iter().enumerate() {
            let row = residual.row_mut(i);
            softmax_in_place(row);
            row[y] -= 1.0;
        }
        let grad_w = x.t_matmul(&residual)?;
        model.weights.add_scaled(-config.learning_rate / n as f64, &grad_w)?;
        for k in 0..c {
            let g: f64 = (0..n).map(|i| residual.get(i, k)).sum();
            model.bias[k] -= config.learning_rate * g / n as f64;
        }
    }
    if !model.weights.is_finite() {
        return Err(invalid("logistic regression diverged"));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::standard_normal_fill;
    use rand::seq::SliceRandom;

    fn blobs(n_per: usize, seed: u64) -> (DenseMatrix, Vec<usize>) {
        let mut rng = rng_from_seed(seed);
        let mut noise = vec![0.0; 4 * n_per];
        standard_normal_fill(&mut rng, &mut noise);
        let mut x = DenseMatrix::zeros(2 * n_per, 2);
        let mut y = Vec::new();
        for i in 0..2 * n_per {
            let class = i % 2;
            let centre = if class == 0 { -4.0 } else { 4.0 };
            x.set(i, 0, centre + 0.5 * noise[2 * i]);
            x.set(i, 1, centre + 0.5 * noise[2 * i + 1]);
            y.push(class);
        }
        (x, y)
    }

    fn accuracy(p: &[usize], y: &[usize]) -> f64 {
        p.iter().zip(y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64
    }

    #[test]
    fn separable_blobs_are_fit_exactly() {
        let (x, y) = blobs(50, 3);
        let m = fit_logistic(&x, &y, &LogisticConfig::default()).unwrap();
        assert_eq!(accuracy(&m.predict(&x).unwrap(), &y), 1.0);
    }

    #[test]
    fn shuffled_labels_give_chance_accuracy() {
        let mut rng = rng_from_seed(11);
        let mut noise = vec![0.0; 2000];
        standard_normal_fill(&mut rng, &mut noise);
        let x = DenseMatrix::from_vec(1000, 2, noise).unwrap();
        let mut y: Vec<usize> = (0..1000).map(|i| i % 2).collect();
        y.shuffle(&mut rng);
        let m = fit_logistic(&x, &y, &LogisticConfig::default()).unwrap();
        assert!((accuracy(&m.predict(&x).unwrap(), &y) - 0.5).abs() < 0.1);
    }

    #[test]
    fn deterministic_given_seed() {
        let (x, y) = blobs(20, 4);
        let cfg = LogisticConfig {
            seed: 9,
            ..LogisticConfig::default()
        };
        assert_eq!(fit_logistic(&x, &y, &cfg).unwrap(), fit_logistic(&x, &y, &cfg).unwrap());
    }

    #[test]
    fn labels_need_not_be_contiguous() {
        let (x, y) = blobs(20, 5);
        let y: Vec<usize> = y.iter().map(|c| 3 + 4 * c).collect();
        let m = fit_logistic(&x, &y, &LogisticConfig::default()).unwrap();
        assert_eq!(m.classes, vec![3, 7]);
        assert_eq!(m.predict(&x).unwrap(), y);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = DenseMatrix::zeros(4, 2);
        assert!(fit_logistic(&x, &[1, 1, 1, 1], &LogisticConfig::default()).is_err());
        assert!(fit_logistic(&x, &[0, 1], &LogisticConfig::default()).is_err());
    }
}
