use alloc::vec::Vec;

use rand::seq::index::sample;

use super::random::rng_from_seed;
use crate::error::{invalid, Error, Result};

/// Which coordinates the checker probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordinateSample {
    All,
    /// At most `count` distinct coordinates drawn with `seed`.
    Random {
        count: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub worst_coordinate: usize,
    pub checked: usize,
}

/// Compares an analytic gradient against central differences.
///
/// The error at coordinate `i` is `|g_i - c_i| / max(1, |c_i|)` where `c_i` is
/// `(f(x + eps e_i) - f(x - eps e_i)) / (2 eps)`. Returns the maximum over the
/// probed coordinates. A non-finite loss at any probe is an error naming the
/// coordinate.
pub fn finite_difference_check<F>(
    mut loss: F,
    params: &[f64],
    analytic: &[f64],
    eps: f64,
    coords: CoordinateSample,
) -> Result<GradCheckReport>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(eps > 0.0) {
        return Err(invalid("finite-difference step must be positive"));
    }
    if params.len() != analytic.len() {
        return Err(Error::ShapeMismatch {
            op: "finite_difference_check",
            left: (params.len(), 1),
            right: (analytic.len(), 1),
        });
    }
    let indices: Vec<usize> = match coords {
        CoordinateSample::Random { count, seed } if count < params.len() => {
            let mut idx = sample(&mut rng_from_seed(seed), params.len(), count).into_vec();
            idx.sort_unstable();
            idx
        }
        _ => (0..params.len()).collect(),
    };

    let mut probe = params.to_vec();
    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst_coordinate: 0,
        checked: indices.len(),
    };
    for &i in &indices {
        let orig = probe[i];
        probe[i] = orig + eps;
        let plus = loss(&probe);
        probe[i] = orig - eps;
        let minus = loss(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFiniteProbe { coordinate: i });
        }
        let central = (plus - minus) / (2.0 * eps);
        let err = libm::fabs(analytic[i] - central) / libm::fmax(1.0, libm::fabs(central));
        if err > report.max_relative_error {
            report.max_relative_error = err;
            report.worst_coordinate = i;
        }
    }
    Ok(report)
}
