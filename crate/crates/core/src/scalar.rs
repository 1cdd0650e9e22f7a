use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Vector entry type for the real operators in this crate: `f64` or
/// `Complex64`. Operators are always real, so only scaling by `f64` is needed.
pub trait Scalar:
    Copy
    + Default
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn zero() -> Self {
        Self::default()
    }

    fn modulus_sqr(self) -> f64;

    fn modulus(self) -> f64 {
        self.modulus_sqr().sqrt()
    }
}

impl Scalar for f64 {
    fn modulus_sqr(self) -> f64 {
        self * self
    }

    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn modulus_sqr(self) -> f64 {
        self.norm_sqr()
    }

    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Euclidean norm.
pub fn norm2<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.modulus_sqr()).sum::<f64>().sqrt()
}

/// Maximum modulus.
pub fn norm_inf<T: Scalar>(v: &[T]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.modulus()))
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Scientific notation with `decimals` mantissa digits and an exponent of at
/// least two digits, e.g. `4.2225e-07`.
pub fn format_sci(x: f64, decimals: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{x:.decimals$e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}
