//! l2-distance estimation from per-bucket counts.
//!
//! With `X_i ~ Poisson(N a_i)` and `Y_i ~ Poisson(N b_i)` independent,
//! `E[(X_i - Y_i)^2 - X_i - Y_i] = N^2 (a_i - b_i)^2`, so
//! `sum_i [(X_i - Y_i)^2 - X_i - Y_i] / N^2` is unbiased for `||a - b||_2^2`.

use crate::error::{Error, Result};
use crate::verdict::{Decision, TestVerdict};

#[derive(Clone, Debug, PartialEq)]
pub struct BucketCounts {
    pub x_counts: Vec<u64>,
    pub y_counts: Vec<u64>,
    /// Expected sample count per side (the Poisson intensity).
    pub n_param: f64,
}

impl BucketCounts {
    pub fn new(x_counts: Vec<u64>, y_counts: Vec<u64>, n_param: f64) -> Result<Self> {
        if x_counts.len() != y_counts.len() {
            return Err(Error::DomainMismatch {
                left: x_counts.len(),
                right: y_counts.len(),
            });
        }
        if !(n_param > 0.0) {
            return Err(Error::param("n_param", format!("{n_param} must be positive")));
        }
        Ok(Self {
            x_counts,
            y_counts,
            n_param,
        })
    }

    pub fn range_m(&self) -> usize {
        self.x_counts.len()
    }

    pub fn x_total(&self) -> u64 {
        self.x_counts.iter().sum()
    }

    pub fn y_total(&self) -> u64 {
        self.y_counts.iter().sum()
    }
}

/// `(1/N^2) sum_i [(X_i - Y_i)^2 - X_i - Y_i]`, unbiased under Poissonized
/// sampling.
pub fn estimate_l2_sq(counts: &BucketCounts) -> Result<f64> {
    if !(counts.n_param > 0.0) {
        return Err(Error::param("n_param", "must be positive"));
    }
    let s: f64 = counts
        .x_counts
        .iter()
        .zip(&counts.y_counts)
        .map(|(&x, &y)| {
            let (x, y) = (x as f64, y as f64);
            (x - y).powi(2) - x - y
        })
        .sum();
    Ok(s / (counts.n_param * counts.n_param))
}

/// Estimate for fixed sample counts `N_x = sum X_i`, `N_y = sum Y_i` (both at
/// least 2): the U-statistic
/// `sum_i X_i(X_i-1)/(N_x(N_x-1)) + Y_i(Y_i-1)/(N_y(N_y-1)) - 2 X_i Y_i/(N_x N_y)`,
/// unbiased under multinomial sampling. `n_param` is ignored.
pub fn estimate_l2_sq_fixed(counts: &BucketCounts) -> Result<f64> {
    let nx = counts.x_total() as f64;
    let ny = counts.y_total() as f64;
    if nx < 2.0 || ny < 2.0 {
        return Err(Error::param(
            "counts",
            "fixed-count estimation needs at least two samples per side",
        ));
    }
    let s = counts
        .x_counts
        .iter()
        .zip(&counts.y_counts)
        .map(|(&x, &y)| {
            let (x, y) = (x as f64, y as f64);
            x * (x - 1.0) / (nx * (nx - 1.0)) + y * (y - 1.0) / (ny * (ny - 1.0))
                - 2.0 * x * y / (nx * ny)
        })
        .sum();
    Ok(s)
}

/// Plug-in standard deviation of [`estimate_l2_sq_fixed`] when both sides
/// share one distribution `a`: `sqrt(2 (1/N_x + 1/N_y)^2 ||a||_2^2)`, with
/// `||a||_2^2` estimated from the pooled counts.
pub fn null_std_fixed(counts: &BucketCounts) -> f64 {
    let nx = counts.x_total() as f64;
    let ny = counts.y_total() as f64;
    let pooled = nx + ny;
    if nx == 0.0 || ny == 0.0 || pooled < 2.0 {
        return f64::INFINITY;
    }
    let sq_norm: f64 = counts
        .x_counts
        .iter()
        .zip(&counts.y_counts)
        .map(|(&x, &y)| {
            let z = (x + y) as f64;
            z * (z - 1.0)
        })
        .sum::<f64>()
        / (pooled * (pooled - 1.0));
    (2.0 * (1.0 / nx + 1.0 / ny).powi(2) * sq_norm).sqrt()
}

/// Midpoint rule: Reject iff the estimate is at least `threshold^2 / 2`.
pub fn l2_closeness_test(counts: &BucketCounts, threshold: f64) -> Result<TestVerdict> {
    if !(threshold > 0.0) {
        return Err(Error::param("threshold", "must be positive"));
    }
    let estimate = estimate_l2_sq(counts)?;
    Ok(TestVerdict::new(
        decide(estimate, threshold * threshold / 2.0),
        counts.x_total() + counts.y_total(),
    ))
}

#[inline]
pub(crate) fn decide(statistic: f64, cutoff: f64) -> Decision {
    if statistic >= cutoff {
        Decision::Reject
    } else {
        Decision::Accept
    }
}

/// Per-side intensity `ceil(c * b / eps^2)` for distributions with l2 norm at
/// most `b` and target l2 separation `eps`.
pub fn required_n_param(c: f64, b: f64, eps: f64) -> f64 {
    (c * b / (eps * eps)).ceil()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_example() {
        let c = BucketCounts::new(vec![3, 1], vec![1, 3], 4.0).unwrap();
        assert_eq!(estimate_l2_sq(&c).unwrap(), 0.0);
    }

    #[test]
    fn identical_counts_are_non_positive() {
        let x = vec![5, 0, 2, 9];
        let c = BucketCounts::new(x.clone(), x, 10.0).unwrap();
        let e = estimate_l2_sq(&c).unwrap();
        assert_eq!(e, -2.0 * 16.0 / 100.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BucketCounts::new(vec![1], vec![1], 0.0).is_err());
        assert!(BucketCounts::new(vec![1], vec![1, 2], 1.0).is_err());
        let c = BucketCounts::new(vec![1], vec![1], 1.0).unwrap();
        assert!(l2_closeness_test(&c, 0.0).is_err());
        let tiny = BucketCounts::new(vec![1, 0], vec![5, 1], 1.0).unwrap();
        assert!(estimate_l2_sq_fixed(&tiny).is_err());
    }

    #[test]
    fn midpoint_rule() {
        // estimate 0 -> accept
        let c = BucketCounts::new(vec![3, 1], vec![1, 3], 4.0).unwrap();
        assert_eq!(l2_closeness_test(&c, 0.1).unwrap().decision, Decision::Accept);
        // (10-0)^2 - 10 = 90, /N^2 with N = sqrt(90/0.02) gives estimate 0.02
        let n = (90.0f64 / 0.02).sqrt();
        let c = BucketCounts::new(vec![10], vec![0], n).unwrap();
        assert!((estimate_l2_sq(&c).unwrap() - 0.02).abs() < 1e-12);
        assert_eq!(l2_closeness_test(&c, 0.1).unwrap().decision, Decision::Reject);
        assert_eq!(decide(0.005, 0.005), Decision::Reject);
    }

    #[test]
    fn required_samples() {
        assert_eq!(required_n_param(40.0, 0.5, 0.1), 2000.0);
    }
}
