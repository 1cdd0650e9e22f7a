//! Quadrature weights for the fractional substantial derivative.
//!
//! The order-`nu` weights `l_k` are the Taylor coefficients of `W_nu(z)^alpha`
//! with `W_nu(z) = sum_{i=1}^{nu} (1 - z)^i / i`. For `nu = 1` this is
//! `(1 - z)^alpha`, giving `l_k = (-1)^k binom(alpha, k)`. The tempered weights
//! are `d_k = exp(-rho k tau) l_k`.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Highest implemented order.
pub const MAX_ORDER: usize = 4;

/// Polynomial coefficients of `W_nu(z)` in powers of `z`.
pub fn generating_polynomial(nu: usize) -> Vec<f64> {
    let mut w = vec![0.0; nu + 1];
    for i in 1..=nu {
        let mut binom = 1.0;
        for (j, wj) in w.iter_mut().enumerate().take(i + 1) {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *wj += sign * binom / i as f64;
            binom = binom * (i - j) as f64 / (j + 1) as f64;
        }
    }
    w
}

/// First `n + 1` Taylor coefficients of `w(z)^alpha` for a polynomial `w`
/// with `w(0) > 0`, by Miller's recurrence
/// `p_k = (1 / (k w_0)) sum_{j=1}^{min(k, deg)} ((alpha + 1) j - k) w_j p_{k-j}`.
pub fn series_power(w: &[f64], alpha: f64, n: usize) -> Result<Vec<f64>> {
    let w0 = *w.first().ok_or_else(|| Error::InvalidParameter("empty series".into()))?;
    if !(w0 > 0.0) {
        return Err(Error::Domain(format!("series power needs w_0 > 0, got {w0}")));
    }
    let deg = w.len() - 1;
    let mut p = Vec::with_capacity(n + 1);
    p.push(w0.powf(alpha));
    for k in 1..=n {
        let mut s = 0.0;
        for j in 1..=k.min(deg) {
            s += ((alpha + 1.0) * j as f64 - k as f64) * w[j] * p[k - j];
        }
        p.push(s / (k as f64 * w0));
    }
    Ok(p)
}

fn validate(alpha: f64, nu: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(1..=MAX_ORDER).contains(&nu) {
        return Err(Error::InvalidParameter(format!("order nu must be in 1..={MAX_ORDER}, got {nu}")));
    }
    Ok(())
}

/// `l_0, ..., l_n` for order `nu`.
pub fn generate_l(alpha: f64, nu: usize, n: usize) -> Result<Vec<f64>> {
    validate(alpha, nu)?;
    series_power(&generating_polynomial(nu), alpha, n)
}

type CacheKey = (u64, usize, usize);

fn cache() -> &'static Mutex<HashMap<CacheKey, Arc<Vec<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// [`generate_l`] through a process-wide cache.
pub fn cached_l(alpha: f64, nu: usize, n: usize) -> Result<Arc<Vec<f64>>> {
    let key = (alpha.to_bits(), nu, n);
    if let Some(hit) = cache().lock().expect("coefficient cache poisoned").get(&key) {
        return Ok(Arc::clone(hit));
    }
    let l = Arc::new(generate_l(alpha, nu, n)?);
    cache().lock().expect("coefficient cache poisoned").insert(key, Arc::clone(&l));
    Ok(l)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsdCoefficients {
    pub alpha: f64,
    pub nu: usize,
    pub rho: Complex64,
    pub tau: f64,
    pub n_steps: usize,
    pub l: Arc<Vec<f64>>,
    pub d: Vec<Complex64>,
}

impl FsdCoefficients {
    pub fn new(alpha: f64, nu: usize, rho: Complex64, tau: f64, n_steps: usize) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {tau}")));
        }
        if !(rho.re.is_finite() && rho.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be finite, got {rho}")));
        }
        let l = cached_l(alpha, nu, n_steps)?;
        let mut c = Self { alpha, nu, rho, tau, n_steps, l, d: Vec::new() };
        c.d = generate_d(&c);
        Ok(c)
    }

    pub fn l0(&self) -> f64 {
        self.l[0]
    }

    /// `exp(-rho n tau)`.
    pub fn decay(&self, n: usize) -> Complex64 {
        (-self.rho * (n as f64 * self.tau)).exp()
    }

    pub fn rows(&self) -> Vec<CoefficientRow> {
        self.l
            .iter()
            .zip(&self.d)
            .enumerate()
            .map(|(k, (&l, d))| CoefficientRow { k, l_k: l, re_d_k: d.re, im_d_k: d.im })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in self.rows() {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn dump(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// `d_k = exp(-rho k tau) l_k`.
pub fn generate_d(c: &FsdCoefficients) -> Vec<Complex64> {
    c.l.iter().enumerate().map(|(k, &l)| c.decay(k) * l).collect()
}

/// One CSV row: `k,l_k,re_d_k,im_d_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub k: usize,
    pub l_k: f64,
    pub re_d_k: f64,
    pub im_d_k: f64,
}

pub fn parse_csv<R: Read>(reader: R) -> Result<Vec<CoefficientRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order_examples() {
        let l = generate_l(0.5, 1, 2).unwrap();
        assert_eq!(l, vec![1.0, -0.5, -0.125]);
    }

    #[test]
    fn generating_polynomials() {
        assert_eq!(generating_polynomial(1), vec![1.0, -1.0]);
        assert_eq!(generating_polynomial(2), vec![1.5, -2.0, 0.5]);
        let w3 = generating_polynomial(3);
        let expect = [11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0];
        assert!(w3.iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-15));
        // W(1) = 0
        for nu in 1..=4 {
            assert!(generating_polynomial(nu).iter().sum::<f64>().abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(matches!(generate_l(0.0, 1, 3), Err(Error::InvalidParameter(_))));
        assert!(matches!(generate_l(1.0, 1, 3), Err(Error::InvalidParameter(_))));
        assert!(matches!(generate_l(0.5, 0, 3), Err(Error::InvalidParameter(_))));
        assert!(matches!(generate_l(0.5, 5, 3), Err(Error::InvalidParameter(_))));
        assert!(FsdCoefficients::new(0.5, 1, Complex64::new(1.0, 0.0), 0.0, 3).is_err());
    }

    #[test]
    fn tempered_weights() {
        let c = FsdCoefficients::new(0.8, 1, Complex64::new(1.0, 1.0), 0.1, 4).unwrap();
        let expect = Complex64::new(0.1f64.cos(), -0.1f64.sin()) * (-0.1f64).exp() * -0.8;
        assert!((c.d[1] - expect).norm() < 1e-15);
        let flat = FsdCoefficients::new(0.8, 3, Complex64::new(0.0, 0.0), 0.1, 10).unwrap();
        for (d, l) in flat.d.iter().zip(flat.l.iter()) {
            assert_eq!(d.re, *l);
            assert_eq!(d.im, 0.0);
        }
        for (d, l) in c.d.iter().zip(c.l.iter()) {
            assert!(d.norm() <= l.abs());
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let c = FsdCoefficients::new(0.3, 4, Complex64::new(1.0, 1.0), 1.0 / 64.0, 64).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("k,l_k,re_d_k,im_d_k\n"));
        assert_eq!(parse_csv(buf.as_slice()).unwrap(), c.rows());
    }

    #[test]
    fn cache_returns_shared_table() {
        let a = cached_l(0.37, 2, 20).unwrap();
        let b = cached_l(0.37, 2, 20).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
