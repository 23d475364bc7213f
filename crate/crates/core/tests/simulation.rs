// SPDX-License-Identifier: MIT OR Apache-2.0
//! Simulator calibration against the model laws.

mod common;

use common::{assert_within_se, batch_estimate, classical_acf, mean_sd, mean_u64};
use countdiag::model::{apply_mask, simulate_bar1, simulate_markov_mask, simulate_poi_inar1};
use countdiag::moments::{binomial_coefficient, poisson_factorial_moment, sample_factorial_moments};
use countdiag::{Bar1, MissingSpec, PoiInar1, Seed};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson statistic over cells 0..k-1 plus a pooled upper tail.
fn chi_square_p(draws: &[u64], pmf: impl Fn(u64) -> f64, cells: u64) -> f64 {
    let r = draws.len() as f64;
    let mut observed = vec![0f64; cells as usize + 1];
    for &x in draws {
        observed[(x.min(cells)) as usize] += 1.0;
    }
    let mut expected: Vec<f64> = (0..cells).map(|k| pmf(k) * r).collect();
    expected.push(r - expected.iter().sum::<f64>());
    assert!(expected.iter().all(|&e| e >= 5.0), "cells too sparse: {expected:?}");
    let stat: f64 = observed.iter().zip(&expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    let dist = ChiSquared::new(cells as f64).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn stationary_start_poisson() {
    let spec = PoiInar1::new(3.0, 0.5).unwrap();
    let draws: Vec<u64> = (0..10_000)
        .map(|rep| simulate_poi_inar1(&spec, 1, Seed::new(101, rep)).unwrap().values()[0])
        .collect();
    let pmf = |k: u64| (-3.0f64).exp() * 3f64.powi(k as i32) / (1..=k).product::<u64>() as f64;
    let p = chi_square_p(&draws, pmf, 8);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn stationary_start_binomial() {
    let spec = Bar1::new(10, 0.3, 0.5).unwrap();
    let draws: Vec<u64> =
        (0..10_000).map(|rep| simulate_bar1(&spec, 1, Seed::new(102, rep)).unwrap().values()[0]).collect();
    let pmf = |k: u64| binomial_coefficient(10, k) * 0.3f64.powi(k as i32) * 0.7f64.powi(10 - k as i32);
    let p = chi_square_p(&draws, pmf, 7);
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn acf_decays_geometrically() {
    for (i, rho) in [0.3, 0.5, 0.8].into_iter().enumerate() {
        let poi =
            simulate_poi_inar1(&PoiInar1::new(3.0, rho).unwrap(), 100_000, Seed::new(103, i as u64)).unwrap();
        let bar =
            simulate_bar1(&Bar1::new(10, 0.3, rho).unwrap(), 100_000, Seed::new(104, i as u64)).unwrap();
        for x in [poi.values(), bar.values()] {
            for h in 1..=3 {
                let (est, se) = batch_estimate(x, 50, |b| classical_acf(b, h));
                assert_within_se(est, f64::powi(rho, h as i32), se, 3.0, &format!("acf({h}) at rho {rho}"));
            }
        }
    }
}

#[test]
fn mask_lag_products() {
    let spec = MissingSpec::new(0.8, 0.6).unwrap();
    let mask = simulate_markov_mask(&spec, 1_000_000, Seed::new(105, 0)).unwrap();
    for h in 1..=3usize {
        let (est, se) = batch_estimate(&mask, 50, |b| {
            b.iter().zip(&b[h..]).filter(|(&a, &c)| a && c).count() as f64 / (b.len() - h) as f64
        });
        assert_within_se(est, spec.lagged_product(h as u64), se, 3.0, &format!("E[O_h O_0] at h = {h}"));
    }
    let (rate, se) = batch_estimate(&mask, 50, |b| b.iter().filter(|&&o| o).count() as f64 / b.len() as f64);
    assert_within_se(rate, 0.8, se, 3.0, "observation rate");
}

#[test]
fn identical_seeds_identical_series() {
    let spec = PoiInar1::new(2.5, 0.7).unwrap();
    let a = simulate_poi_inar1(&spec, 500, Seed::new(7, 3)).unwrap();
    let b = simulate_poi_inar1(&spec, 500, Seed::new(7, 3)).unwrap();
    let c = simulate_poi_inar1(&spec, 500, Seed::new(7, 4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let from_threads: Vec<_> = (0..4)
        .map(|_| std::thread::spawn(move || simulate_poi_inar1(&spec, 500, Seed::new(7, 3)).unwrap()))
        .map(|h| h.join().unwrap())
        .collect();
    assert!(from_threads.iter().all(|s| *s == a));
}

#[test]
fn sample_factorial_moments_are_unbiased() {
    let spec = PoiInar1::new(3.0, 0.5).unwrap();
    let missing = MissingSpec::new(0.8, 0.3).unwrap();
    let mut est = [Vec::new(), Vec::new(), Vec::new()];
    for rep in 0..10_000 {
        let x = simulate_poi_inar1(&spec, 100, Seed::new(106, rep)).unwrap();
        let mask = simulate_markov_mask(&missing, 100, Seed::new(107, rep)).unwrap();
        let m = sample_factorial_moments(&apply_mask(&x, &mask).unwrap(), 3).unwrap();
        for k in 1..=3 {
            est[k - 1].push(m.factorial(k as u32));
        }
    }
    for k in 1..=3u32 {
        let (m, sd) = mean_sd(&est[k as usize - 1]);
        let se = sd / 100.0;
        assert_within_se(m, poisson_factorial_moment(3.0, k), se, 3.0, &format!("factorial moment {k}"));
    }
}

#[test]
fn iid_limit() {
    let x = simulate_poi_inar1(&PoiInar1::new(3.0, 0.0).unwrap(), 100_000, Seed::new(108, 0)).unwrap();
    let v = x.values();
    let (m, se) = batch_estimate(v, 50, mean_u64);
    assert_within_se(m, 3.0, se, 3.0, "mean");
    let var = |b: &[u64]| {
        let m = mean_u64(b);
        b.iter().map(|&y| (y as f64 - m).powi(2)).sum::<f64>() / b.len() as f64
    };
    let (s2, se) = batch_estimate(v, 50, var);
    assert_within_se(s2, 3.0, se, 3.0, "variance");
}
