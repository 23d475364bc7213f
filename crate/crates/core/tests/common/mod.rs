// SPDX-License-Identifier: MIT OR Apache-2.0
#![allow(dead_code)]

/// Full-sample statistic and its batch-means standard error.
pub fn batch_estimate<T>(data: &[T], batches: usize, stat: impl Fn(&[T]) -> f64) -> (f64, f64) {
    let len = data.len() / batches;
    let per: Vec<f64> = data.chunks_exact(len).map(&stat).collect();
    let (_, sd) = mean_sd(&per);
    (stat(data), sd / (per.len() as f64).sqrt())
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

#[track_caller]
pub fn assert_within_se(got: f64, truth: f64, se: f64, k: f64, what: &str) {
    let z = (got - truth) / se;
    assert!(z.abs() <= k, "{what}: {got} vs {truth}, se {se:.3e}, z = {z:.2}");
}

pub fn mean_u64(x: &[u64]) -> f64 {
    x.iter().sum::<u64>() as f64 / x.len() as f64
}

/// Classical sample ACF with the biased 1/T normalization.
pub fn classical_acf(x: &[u64], lag: usize) -> f64 {
    let m = mean_u64(x);
    let c0: f64 = x.iter().map(|&v| (v as f64 - m).powi(2)).sum();
    let cl: f64 = x.windows(lag + 1).map(|w| (w[0] as f64 - m) * (w[lag] as f64 - m)).sum();
    cl / c0
}
