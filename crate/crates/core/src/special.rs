//! Gamma-function helpers, sphere areas and exact rational combinatorics.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::f64::consts::PI;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Surface area ω_{m−1} of the unit sphere in ℝ^m.
pub fn sphere_area(m: usize) -> f64 {
    let h = m as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

pub fn big_factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn big_binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    big_factorial(n) / (big_factorial(k) * big_factorial(n - k))
}

/// 2^{-e} as an exact rational.
pub fn inv_pow2(e: usize) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << e)
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    // numerator and denominator can exceed f64 range only far beyond the dimensions used here
    let n: f64 = q.numer().to_string().parse().unwrap_or(f64::NAN);
    let d: f64 = q.denom().to_string().parse().unwrap_or(f64::NAN);
    n / d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn gamma_half_integers() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.5) / (945.0 / 32.0 * PI.sqrt()) - 1.0).abs() < 1e-14);
        assert!((ln_gamma(20.0) - factorial(19).ln()).abs() < 1e-12);
    }

    #[test]
    fn exact_binomials() {
        assert_eq!(big_binomial(10, 3), BigInt::from(120));
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(rational_to_f64(&inv_pow2(3)), 0.125);
    }
}
