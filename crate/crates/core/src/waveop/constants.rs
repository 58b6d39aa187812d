//! The constants D_m, D_{m,j} and D̃_m multiplying the finite-rank corrections.

use crate::error::{Error, Result};
use crate::quad::{integrate_real, Tolerance};
use crate::special::{big_binomial, big_factorial, binomial, inv_pow2, ln_gamma};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

const TIGHT: Tolerance = Tolerance { abs: 1e-17, rel: 1e-15, max_intervals: 400 };

/// ∫₁^∞ (x² − 1)^j (x² + 1)^{−(m−1)} dx through x = tan θ, where the integrand is the
/// trigonometric polynomial (−cos 2θ)^j cos^{2m−4−2j}θ on [π/4, π/2].
pub fn shin_integral(m: usize, j: usize) -> Result<f64> {
    if m < 3 || 2 * j > 2 * m - 4 {
        return Err(Error::Domain(format!("integral with m={m}, j={j} diverges")));
    }
    let power = (2 * m - 4 - 2 * j) as i32;
    let (v, _) = integrate_real(|t| (-(2.0 * t).cos()).powi(j as i32) * t.cos().powi(power), FRAC_PI_4, FRAC_PI_2, TIGHT)?;
    Ok(v)
}

/// Γ(m/2)/(√π Γ((m−1)/2)) in log-Γ arithmetic.
fn gamma_ratio(m: usize) -> f64 {
    let mf = m as f64;
    (ln_gamma(mf / 2.0) - ln_gamma((mf - 1.0) / 2.0)).exp() / PI.sqrt()
}

/// D_m: Γ((m−2)/2)/(√π Γ((m−1)/2)) for odd m, 2^m Γ(m/2)/(√π Γ((m−1)/2)) ∫₁^∞(x²+1)^{−(m−1)}dx for even m.
pub fn dm_constant(m: usize) -> Result<f64> {
    if m < 5 {
        return Err(Error::Dimension { m, reason: "D_m is defined for m ≥ 5".into() });
    }
    let mf = m as f64;
    if m % 2 == 1 {
        return Ok((ln_gamma((mf - 2.0) / 2.0) - ln_gamma((mf - 1.0) / 2.0)).exp() / PI.sqrt());
    }
    Ok(2f64.powi(m as i32) * gamma_ratio(m) * shin_integral(m, 0)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShinCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Quadrature of ∫₁^∞(x²+1)^{−(m−1)}dx against
/// Γ(m−3/2)/(4Γ(m−1))·(√π − Σ_{j=1}^{m−2} Γ(j)2^{1−j}/Γ(j+1/2)).
pub fn shin_identity(m: usize) -> Result<ShinCheck> {
    if m < 6 || m % 2 == 1 {
        return Err(Error::Dimension { m, reason: "the closed form is stated for even m ≥ 6".into() });
    }
    let mf = m as f64;
    let lhs = shin_integral(m, 0)?;
    let mut sum = 0.0;
    for j in 1..=m - 2 {
        let jf = j as f64;
        sum += (ln_gamma(jf) - ln_gamma(jf + 0.5)).exp() * 2f64.powi(1 - j as i32);
    }
    let pre = (ln_gamma(mf - 1.5) - ln_gamma(mf - 1.0)).exp() / 4.0;
    let rhs = pre * (PI.sqrt() - sum);
    Ok(ShinCheck { lhs, rhs, residual: (lhs - rhs).abs() })
}

/// D_{m,j} = 2^m binom(ν,j) Γ(m/2)/(√πΓ((m−1)/2)) ∫₁^∞ (x²−1)^j (x²+1)^{−(m−1)} dx, ν = (m−2)/2.
pub fn dmj_constant(m: usize, j: usize) -> Result<f64> {
    if m < 6 || m % 2 == 1 {
        return Err(Error::Dimension { m, reason: "D_{m,j} is defined for even m ≥ 6".into() });
    }
    let nu = (m - 2) / 2;
    if j > nu {
        return Err(Error::Domain(format!("j={j} exceeds ν={nu}")));
    }
    Ok(2f64.powi(m as i32) * binomial(nu, j) * gamma_ratio(m) * shin_integral(m, j)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmjTable {
    pub m: usize,
    pub values: Vec<f64>,
    pub sum: f64,
    /// |Σ_j D_{m,j} − 1|.
    pub residual: f64,
}

pub fn dmj_constants(m: usize) -> Result<DmjTable> {
    if m < 6 || m % 2 == 1 {
        return Err(Error::Dimension { m, reason: "D_{m,j} is defined for even m ≥ 6".into() });
    }
    let values: Vec<f64> = (0..=(m - 2) / 2).map(|j| dmj_constant(m, j)).collect::<Result<_>>()?;
    let sum: f64 = values.iter().sum();
    Ok(DmjTable { m, values, sum, residual: (sum - 1.0).abs() })
}

/// The three expressions of D̃_m for odd m, in exact arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct TildeDm {
    pub m: usize,
    /// Σ_{j=0}^{n} (m−3−j)!/(2^{m−3−j} n! (n−j)!), n = (m−3)/2.
    pub boundary_sum: BigRational,
    /// Σ_{k=0}^{n} 2^{−(2n−k)} binom(2n−k, n−k).
    pub descending: BigRational,
    /// Σ_{k=0}^{n} 2^{−(n+k)} binom(n+k, k).
    pub ascending: BigRational,
}

impl TildeDm {
    /// 1 − value for each of the three forms.
    pub fn residuals(&self) -> [BigRational; 3] {
        let one = BigRational::one();
        [&one - &self.boundary_sum, &one - &self.descending, &one - &self.ascending]
    }

    pub fn all_equal_one(&self) -> bool {
        let one = BigRational::one();
        self.boundary_sum == one && self.descending == one && self.ascending == one
    }
}

pub fn tilde_dm_odd(m: usize) -> Result<TildeDm> {
    if m < 5 || m % 2 == 0 {
        return Err(Error::Dimension { m, reason: "D̃_m is defined for odd m ≥ 5".into() });
    }
    let n = (m - 3) / 2;
    let mut boundary_sum = BigRational::from_integer(BigInt::from(0));
    for j in 0..=n {
        let num = big_factorial(m - 3 - j);
        let den = big_factorial(n) * big_factorial(n - j);
        boundary_sum += BigRational::new(num, den) * inv_pow2(m - 3 - j);
    }
    Ok(TildeDm { m, boundary_sum, descending: binomial_sum_descending(n), ascending: binomial_sum_ascending(n) })
}

pub fn binomial_sum_descending(n: usize) -> BigRational {
    let mut acc = BigRational::from_integer(BigInt::from(0));
    for k in 0..=n {
        acc += BigRational::from_integer(big_binomial(2 * n - k, n - k)) * inv_pow2(2 * n - k);
    }
    acc
}

pub fn binomial_sum_ascending(n: usize) -> BigRational {
    let mut acc = BigRational::from_integer(BigInt::from(0));
    for k in 0..=n {
        acc += BigRational::from_integer(big_binomial(n + k, k)) * inv_pow2(n + k);
    }
    acc
}
