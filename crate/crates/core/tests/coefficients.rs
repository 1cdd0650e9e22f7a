use fkmg::fsd::{generate_l, generating_polynomial, parse_csv, series_power, FsdCoefficients};
use fkmg::Complex64;
use proptest::prelude::*;

fn convolve(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    (0..=n).map(|k| (0..=k).filter(|&j| j < a.len() && k - j < b.len()).map(|j| a[j] * b[k - j]).sum()).collect()
}

fn convolve_c(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    (0..=n).map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum()).collect()
}

/// Roots of a real polynomial (ascending coefficients) by Durand-Kerner.
fn roots(p: &[f64]) -> Vec<Complex64> {
    let deg = p.len() - 1;
    let lead = p[deg];
    let eval = |z: Complex64| p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c / lead);
    let mut r: Vec<Complex64> = (0..deg).map(|i| Complex64::new(0.4, 0.9).powu(i as u32 + 1)).collect();
    for _ in 0..500 {
        for i in 0..deg {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    den *= r[i] - r[j];
                }
            }
            let step = eval(r[i]) / den;
            r[i] -= step;
        }
    }
    r
}

/// `w(z)^alpha` for `w(z) = (1 - z) q(z)`, factored over the roots of `q`:
/// each `(1 - z / r)^alpha` is a binomial series and the product is an
/// explicit convolution.
fn root_product_oracle(nu: usize, alpha: f64, n: usize) -> Vec<f64> {
    let w = generating_polynomial(nu);
    // synthetic division by (1 - z): q_j = -sum_{i > j} w_i
    let q: Vec<f64> = (0..nu).map(|j| -w[j + 1..].iter().sum::<f64>()).collect();
    let binom = |r: Complex64| {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for k in 1..=n {
            let prev = c[k - 1];
            c.push(prev * ((k as f64 - 1.0 - alpha) / k as f64) / r);
        }
        c
    };
    let mut acc = binom(Complex64::new(1.0, 0.0));
    if nu > 1 {
        for r in roots(&q) {
            assert!(r.norm() > 1.0, "root {r} inside the unit disk");
            acc = convolve_c(&acc, &binom(r), n);
        }
    }
    let scale = q[0].powf(alpha);
    acc.iter()
        .map(|z| {
            assert!(z.im.abs() < 1e-9 * (1.0 + z.re.abs()));
            z.re * scale
        })
        .collect()
}

#[test]
fn first_order_matches_binomial_recurrence() {
    for &alpha in &[0.1, 0.3, 0.5, 0.8, 0.99] {
        let l = generate_l(alpha, 1, 200).unwrap();
        let mut b = 1.0;
        for (k, &lk) in l.iter().enumerate() {
            if k > 0 {
                b *= (k as f64 - 1.0 - alpha) / k as f64;
                assert!(lk < 0.0);
            }
            assert!((lk - b).abs() <= 1e-14 * b.abs(), "alpha={alpha} k={k}");
        }
    }
}

#[test]
fn second_order_matches_naive_square() {
    // (3/2 - 2z + z^2/2)^{0.8}: its fifth power is the integer power w^4
    let n = 64;
    let w = generating_polynomial(2);
    let l = generate_l(0.8, 2, n).unwrap();
    let mut p5 = l.clone();
    for _ in 0..4 {
        p5 = convolve(&p5, &l, n);
    }
    let mut w4 = w.clone();
    for _ in 0..3 {
        w4 = convolve(&w4, &w, n);
    }
    for k in 0..=n {
        assert!((p5[k] - w4[k]).abs() <= 1e-12 * w4.iter().map(|x| x.abs()).fold(0.0, f64::max));
    }
}

#[test]
fn miller_matches_root_product_oracle() {
    for nu in 1..=4 {
        for &alpha in &[0.3, 0.5, 0.8] {
            let got = generate_l(alpha, nu, 64).unwrap();
            let want = root_product_oracle(nu, alpha, 64);
            for k in 0..=64 {
                assert!(
                    (got[k] - want[k]).abs() <= 1e-12 * want[0].abs(),
                    "nu={nu} alpha={alpha} k={k}: {} vs {}",
                    got[k],
                    want[k]
                );
            }
        }
    }
}

proptest! {
    #[test]
    fn complementary_powers_multiply_back(alpha in 0.05f64..0.95, nu in 1usize..=4) {
        let n = 64;
        let w = generating_polynomial(nu);
        let a = series_power(&w, alpha, n).unwrap();
        let b = series_power(&w, 1.0 - alpha, n).unwrap();
        let prod = convolve(&a, &b, n);
        for (k, p) in prod.iter().enumerate() {
            let want = w.get(k).copied().unwrap_or(0.0);
            prop_assert!((p - want).abs() <= 1e-12 * w[0]);
        }
    }

    #[test]
    fn coefficients_do_not_depend_on_tau_or_rho(tau in 1e-3f64..1.0, re in 0.0f64..3.0, im in -3.0f64..3.0) {
        let c = FsdCoefficients::new(0.4, 3, Complex64::new(re, im), tau, 20).unwrap();
        let plain = generate_l(0.4, 3, 20).unwrap();
        prop_assert_eq!(c.l.as_slice(), plain.as_slice());
        for (k, (d, l)) in c.d.iter().zip(c.l.iter()).enumerate() {
            let want = (-Complex64::new(re, im) * (k as f64 * tau)).exp() * *l;
            prop_assert!((d - want).norm() <= 1e-15 * l.abs().max(1e-300));
            prop_assert!(d.norm() <= l.abs() * (1.0 + 1e-15));
        }
    }
}

#[test]
fn partial_sums_decay_to_zero() {
    for nu in 1..=4 {
        for &alpha in &[0.3, 0.8] {
            let l = generate_l(alpha, nu, 4000).unwrap();
            assert!(l[0] > 0.0);
            let mut s = 0.0;
            let sums: Vec<f64> = l
                .iter()
                .map(|x| {
                    s += x;
                    s.abs()
                })
                .collect();
            // monotone after a short transient
            for k in 20..sums.len() - 1 {
                assert!(sums[k + 1] <= sums[k], "nu={nu} alpha={alpha} k={k}");
            }
            // S_k ~ k^{-alpha} / Gamma(1 - alpha)
            let scaled = sums[4000] * 4000f64.powf(alpha) * libm::tgamma(1.0 - alpha);
            assert!((scaled - 1.0).abs() < 0.02, "nu={nu} alpha={alpha}: {scaled}");
        }
    }
}

#[test]
fn csv_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("coeffs.csv");
    let c = FsdCoefficients::new(0.5, 1, Complex64::new(0.0, 0.0), 0.1, 2).unwrap();
    c.dump(&path).unwrap();
    let rows = parse_csv(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(rows, c.rows());
    assert_eq!(rows.iter().map(|r| r.l_k).collect::<Vec<_>>(), vec![1.0, -0.5, -0.125]);
    assert!(rows.iter().all(|r| r.im_d_k == 0.0));
}
