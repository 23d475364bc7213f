// SPDX-License-Identifier: MIT OR Apache-2.0

use countdiag::moments::{
    bbin_mixed_factorial, binomial_factorial_moment, bpoi_mixed_factorial, falling_factorial_f64,
    lag0_mixed_factorial, poisson_factorial_moment, raw_from_factorial, Bar1Moments, MomentOracle,
    PoissonInar1Moments, RawMoments,
};
use countdiag::Bar1;
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Lag-h (h >= 1) mixed factorial moments of the Poisson INAR(1) model,
/// expanded term by term for the six order pairs.
fn poisson_pairs(mu: f64, q: f64) -> [((u32, u32), f64); 6] {
    [
        ((1, 1), mu * mu + mu * q),
        ((1, 2), mu.powi(3) + 2.0 * mu * mu * q),
        ((2, 2), mu.powi(4) + 4.0 * mu.powi(3) * q + 2.0 * mu * mu * q * q),
        ((1, 3), mu.powi(4) + 3.0 * mu.powi(3) * q),
        ((2, 3), mu.powi(5) + 6.0 * mu.powi(4) * q + 6.0 * mu.powi(3) * q * q),
        (
            (3, 3),
            mu.powi(6) + 9.0 * mu.powi(5) * q + 18.0 * mu.powi(4) * q * q + 6.0 * mu.powi(3) * q.powi(3),
        ),
    ]
}

fn binomial_pairs(n: u64, pi: f64, q: f64) -> [((u32, u32), f64); 6] {
    let nf = n as f64;
    let n2 = falling_factorial_f64(n, 2);
    let n3 = falling_factorial_f64(n, 3);
    let c = 1.0 - pi;
    [
        ((1, 1), nf * nf * pi * pi + nf * pi * c * q),
        ((1, 2), nf * n2 * pi.powi(3) + 2.0 * n2 * pi * pi * c * q),
        (
            (2, 2),
            n2 * n2 * pi.powi(4)
                + 4.0 * (nf - 1.0) * n2 * c * pi.powi(3) * q
                + 2.0 * n2 * c * c * pi * pi * q * q,
        ),
        ((1, 3), nf * n3 * pi.powi(4) + 3.0 * n3 * c * pi.powi(3) * q),
        (
            (2, 3),
            n2 * n3 * pi.powi(5)
                + 6.0 * n3 * (nf - 1.0) * c * pi.powi(4) * q
                + 6.0 * n3 * c * c * pi.powi(3) * q * q,
        ),
        (
            (3, 3),
            n3 * n3 * pi.powi(6)
                + 9.0 * (nf - 1.0) * (nf - 2.0) * n3 * c * pi.powi(5) * q
                + 18.0 * (nf - 2.0) * n3 * c * c * pi.powi(4) * q * q
                + 6.0 * n3 * c.powi(3) * pi.powi(3) * q.powi(3),
        ),
    ]
}

#[test]
fn printed_binomial_33_coefficient_has_an_extra_factor() {
    // the printed rho^h coefficient carries (n-1) twice; the recursion does not
    let (n, pi, rho, h) = (10u64, 0.3, 0.5, 2u64);
    let q = f64::powi(rho, h as i32);
    let n3 = falling_factorial_f64(n, 3);
    let printed = binomial_pairs(n, pi, q)[5].1 + 9.0 * 9.0 * 8.0 * n3 * 0.7 * pi.powi(5) * q * (9.0 - 1.0);
    let exact = bbin_mixed_factorial(n, pi, rho, h, 3, 3);
    assert!(rel(exact, 602.662_48) < 1e-7, "{exact}");
    assert!(rel(printed, exact) > 1.0);
}

fn bar1_params() -> impl Strategy<Value = (u64, f64, f64)> {
    (2u64..40, 0.02f64..0.98).prop_flat_map(|(n, pi)| {
        let (lo, hi) = Bar1::rho_bounds(pi);
        (Just(n), Just(pi), lo.max(0.0)..hi.min(0.95))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mixed_moments_are_symmetric(mu in 0.05f64..12.0, rho in 0.0f64..0.95, (n, pi, brho) in bar1_params(), h in 1u64..4) {
        for k in 1..=3 {
            for s in 1..=3 {
                let a = bpoi_mixed_factorial(mu, rho, h, k, s);
                prop_assert!(rel(a, bpoi_mixed_factorial(mu, rho, h, s, k)) < 1e-12);
                let b = bbin_mixed_factorial(n, pi, brho, h, k, s);
                let c = bbin_mixed_factorial(n, pi, brho, h, s, k);
                prop_assert!((b - c).abs() <= 1e-12 * b.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn poisson_recursion_matches_expansion(mu in 0.05f64..12.0, rho in 0.0f64..0.99, h in 1u64..30) {
        let q = rho.powi(h as i32);
        for ((k, s), want) in poisson_pairs(mu, q) {
            prop_assert!(rel(bpoi_mixed_factorial(mu, rho, h, k, s), want) < 1e-10, "({}, {})", k, s);
        }
    }

    #[test]
    fn binomial_recursion_matches_expansion((n, pi, rho) in bar1_params(), h in 1u64..30) {
        let q = rho.powi(h as i32);
        for ((k, s), want) in binomial_pairs(n, pi, q) {
            let got = bbin_mixed_factorial(n, pi, rho, h, k, s);
            if want == 0.0 {
                prop_assert!(got.abs() < 1e-12);
            } else {
                prop_assert!(rel(got, want) < 1e-10, "({}, {}) got {} want {}", k, s, got, want);
            }
        }
    }

    #[test]
    fn far_lags_factorize(mu in 0.05f64..12.0, rho in 0.0f64..0.8, (n, pi, brho) in bar1_params()) {
        let brho = brho.min(0.8);
        for k in 0..=3 {
            for s in 0..=3 {
                let prod = poisson_factorial_moment(mu, k) * poisson_factorial_moment(mu, s);
                prop_assert!(rel(bpoi_mixed_factorial(mu, rho, 200, k, s), prod) < 1e-12);
                let prod = binomial_factorial_moment(n, pi, k) * binomial_factorial_moment(n, pi, s);
                let got = bbin_mixed_factorial(n, pi, brho, 200, k, s);
                prop_assert!((got - prod).abs() <= 1e-12 * prod.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn lag0_matches_truncated_pmf(mu in 0.05f64..10.0) {
        let mut pmf = vec![(-mu).exp()];
        let mut x = 1;
        while x < 40 || pmf[x - 1] > 1e-18 {
            let prev = pmf[x - 1];
            pmf.push(prev * mu / x as f64);
            x += 1;
        }
        let fact: Vec<f64> = (1..=6).map(|k| poisson_factorial_moment(mu, k)).collect();
        for k in 0..=3 {
            for s in 0..=3 {
                if k == 0 && s == 0 {
                    continue;
                }
                let brute: f64 = pmf
                    .iter()
                    .enumerate()
                    .map(|(x, p)| falling_factorial_f64(x as u64, k) * falling_factorial_f64(x as u64, s) * p)
                    .sum();
                prop_assert!(rel(lag0_mixed_factorial(&fact, k, s).unwrap(), brute) < 1e-9);
            }
        }
    }

    #[test]
    fn raw_oracle_agrees_with_stirling_conversion((n, pi, rho) in bar1_params(), h in 1u64..6) {
        let oracle = Bar1Moments::new(n, pi, rho);
        let raw = RawMoments::new(oracle);
        let fact: Vec<f64> = (1..=4).map(|k| binomial_factorial_moment(n, pi, k)).collect();
        let expected = raw_from_factorial(&fact);
        for (k, want) in expected.iter().enumerate() {
            prop_assert!(rel(raw.moment(k as u32 + 1), *want) < 1e-12);
        }
        // E[X_t X_{t-h}] = mu^2 + rho^h * variance
        let mu = n as f64 * pi;
        let want = mu * mu + rho.powi(h as i32) * mu * (1.0 - pi);
        prop_assert!(rel(raw.mixed(1, 1, h), want) < 1e-12);
    }
}

#[test]
fn poisson_oracle_lag0_matches_table() {
    let p = PoissonInar1Moments::new(3.0, 0.5);
    let fact: Vec<f64> = (1..=6).map(|k| poisson_factorial_moment(3.0, k)).collect();
    for k in 1..=3 {
        for s in 1..=3 {
            assert_eq!(p.lag0(k, s).unwrap(), lag0_mixed_factorial(&fact, k, s).unwrap());
        }
    }
}
