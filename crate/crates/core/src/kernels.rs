//! Free resolvent kernels G₀(λ, x) of (−Δ − λ²)⁻¹ on ℝ^m, m ≥ 3, by three routes:
//! the general one-dimensional integral, the odd-dimensional exponential polynomial,
//! and the even-dimensional superposition over a parameter a > 0.

use crate::error::{Error, Result};
use crate::quad::{gauss_legendre, gauss_laguerre, integrate, integrate_to_inf, Tolerance};
use crate::special::{big_factorial, binomial, factorial, gamma, ln_gamma, sphere_area};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

#[derive(Debug, Clone, Copy)]
pub struct KernelOptions {
    pub laguerre_nodes: usize,
    pub rel_tol: f64,
    pub lambda_r_cap: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        KernelOptions { laguerre_nodes: 200, rel_tol: 1e-11, lambda_r_cap: 1e3 }
    }
}

#[derive(Debug, Clone)]
pub struct KernelModel {
    pub m: usize,
    pub parity: Parity,
    pub coeffs: Vec<Complex64>,
    pub nu: usize,
}

impl KernelModel {
    pub fn new(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::Dimension { m, reason: "kernels need m ≥ 3".into() });
        }
        if m % 2 == 1 {
            Ok(KernelModel { m, parity: Parity::Odd, coeffs: odd_kernel_coeffs(m)?, nu: 0 })
        } else {
            Ok(KernelModel { m, parity: Parity::Even, coeffs: Vec::new(), nu: (m - 2) / 2 })
        }
    }

    pub fn eval(&self, lambda: f64, r: f64) -> Result<Complex64> {
        match self.parity {
            Parity::Odd => eval_kernel_odd(self.m, Complex64::new(lambda, 0.0), r),
            Parity::Even => eval_kernel_even(self.m, lambda, r, &KernelOptions::default()),
        }
    }
}

/// Exact form of an odd-dimensional coefficient: C_j = (−i)^j · rational · π^{−(m−1)/2}.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCoeff {
    pub j: usize,
    pub rational: BigRational,
    pub pi_power: usize,
}

impl ExactCoeff {
    pub fn value(&self) -> Complex64 {
        let phase = I.conj().powu(self.j as u32);
        phase * (crate::special::rational_to_f64(&self.rational) * PI.powf(-(self.pi_power as f64) / 2.0))
    }
}

fn check_odd(m: usize) -> Result<()> {
    if m < 3 || m % 2 == 0 {
        return Err(Error::Dimension { m, reason: "odd m ≥ 3 required".into() });
    }
    Ok(())
}

pub fn odd_kernel_coeffs_exact(m: usize) -> Result<Vec<ExactCoeff>> {
    check_odd(m)?;
    let n = (m - 3) / 2;
    Ok((0..=n)
        .map(|j| {
            let num = big_factorial(m - 3 - j);
            let den = (BigInt::from(1) << (m - 1 - j)) * big_factorial(j) * big_factorial(n - j);
            ExactCoeff { j, rational: BigRational::new(num, den), pi_power: m - 1 }
        })
        .collect())
}

pub fn odd_kernel_coeffs(m: usize) -> Result<Vec<Complex64>> {
    Ok(odd_kernel_coeffs_exact(m)?.iter().map(ExactCoeff::value).collect())
}

/// iC₀ + C₁ = 0 holds exactly iff the rational parts of C₀ and C₁ coincide.
pub fn c0_c1_identity_exact(m: usize) -> Result<bool> {
    if m < 5 {
        return Err(Error::Dimension { m, reason: "the identity needs m ≥ 5".into() });
    }
    let c = odd_kernel_coeffs_exact(m)?;
    Ok(c[0].rational == c[1].rational && c[0].pi_power == c[1].pi_power)
}

/// Zero-energy Green constant C₀ = 1/((m−2)ω_{m−1}).
pub fn green_constant(m: usize) -> f64 {
    1.0 / ((m as f64 - 2.0) * sphere_area(m))
}

pub fn eval_kernel_odd(m: usize, lambda: Complex64, r: f64) -> Result<Complex64> {
    let c = odd_kernel_coeffs(m)?;
    if r <= 0.0 {
        return Err(Error::Domain(format!("radius {r} must be positive")));
    }
    let z = lambda * r;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    for cj in &c {
        acc += cj * pow;
        pow *= z;
    }
    Ok(acc * (I * z).exp() * r.powi(-(m as i32 - 2)))
}

/// G₀(λ, x) for |x| = r from the one-dimensional t-integral against e^{−t}t^{(m−3)/2}.
pub fn eval_kernel_general(m: usize, lambda: Complex64, r: f64, opts: &KernelOptions) -> Result<Complex64> {
    if m < 3 {
        return Err(Error::Dimension { m, reason: "kernels need m ≥ 3".into() });
    }
    if r <= 0.0 {
        return Err(Error::Domain(format!("radius {r} must be positive")));
    }
    if lambda.im < 0.0 {
        return Err(Error::Domain("Im λ must be non-negative".into()));
    }
    let alpha = (m as f64 - 3.0) / 2.0;
    let z = -I * lambda * r;
    let g = |t: f64| (Complex64::new(t / 2.0, 0.0) + z).powf(alpha);
    let laguerre = |n: usize| {
        let rule = gauss_laguerre(n, alpha);
        rule.nodes.iter().zip(&rule.weights).map(|(&t, &w)| g(t) * w).sum::<Complex64>()
    };
    let n = opts.laguerre_nodes.max(8);
    let full = laguerre(n);
    let reduced = laguerre(n / 2);
    let integral = if (full - reduced).norm() <= opts.rel_tol * full.norm() {
        full
    } else {
        // t = w² removes the t^α endpoint behaviour for the adaptive rule
        let est = integrate_to_inf(
            |w| {
                let t = w * w;
                g(t) * ((-t).exp() * 2.0 * w.powf(2.0 * alpha + 1.0))
            },
            0.0,
            1.0,
            Tolerance { abs: 0.0, rel: opts.rel_tol, max_intervals: 4000 },
        )?;
        est.value
    };
    let pre = 2.0 * (2.0 * PI).powf(alpha + 1.0) * gamma(alpha + 1.0) * r.powi(m as i32 - 2);
    Ok((I * lambda * r).exp() * integral / pre)
}

/// The superposition operator T_j^(a) for even m: prefactor C_{m,j}ω_{m−1} and the
/// density (1+a)^{−s} a^{−1/2}, s = 2ν−j+1/2.
#[derive(Debug, Clone)]
pub struct SuperpositionRule {
    pub m: usize,
    pub j: usize,
    pub prefactor: Complex64,
    pub exponent: f64,
    /// Nodes a_k and weights W_k with Σ W_k f(a_k) ≈ ∫₀^∞ (1+a)^{−s} f(a) a^{−1/2} da.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SuperpositionRule {
    pub fn new(m: usize, j: usize) -> Result<Self> {
        if m < 4 || m % 2 == 1 {
            return Err(Error::Dimension { m, reason: "superposition needs even m ≥ 4".into() });
        }
        let nu = (m - 2) / 2;
        if j > nu {
            return Err(Error::Domain(format!("index j={j} exceeds ν={nu}")));
        }
        let s = 2.0 * nu as f64 - j as f64 + 0.5;
        let phase = Complex64::new(0.0, -2.0).powu(j as u32);
        let prefactor = phase * (gamma(s) * binomial(nu, j) / (factorial(m - 2) * PI.sqrt()));
        // a = u²/(1−u²) turns the density into 2(1−u²)^{s−3/2} du on [0, 1]
        let gl = gauss_legendre(64);
        let mut nodes = Vec::with_capacity(64);
        let mut weights = Vec::with_capacity(64);
        for (x, w) in gl.nodes.iter().zip(&gl.weights) {
            let u = 0.5 * (x + 1.0);
            let q = 1.0 - u * u;
            nodes.push(u * u / q);
            weights.push(0.5 * w * 2.0 * q.powf(s - 1.5));
        }
        Ok(SuperpositionRule { m, j, prefactor, exponent: s, nodes, weights })
    }

    /// ∫₀^∞ (1+a)^{−s} a^{−1/2} da = B(1/2, s−1/2).
    pub fn weight_mass(&self) -> f64 {
        let s = self.exponent;
        (ln_gamma(0.5) + ln_gamma(s - 0.5) - ln_gamma(s)).exp()
    }

    /// Applies the fixed node table; exact for f ≡ 1.
    pub fn apply_table<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        let acc: Complex64 = self.nodes.iter().zip(&self.weights).map(|(&a, &w)| f(a) * w).sum();
        self.prefactor * acc
    }

    /// T_j^(a)[f] by adaptive quadrature in the compactified variable.
    pub fn apply<F: Fn(f64) -> Complex64>(&self, f: F, tol: f64) -> Result<Complex64> {
        let s = self.exponent;
        let est = integrate(
            |u| {
                let q = 1.0 - u * u;
                if q <= 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let w = 2.0 * q.powf(s - 1.5);
                if w == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                f(u * u / q) * w
            },
            0.0,
            1.0,
            Tolerance { abs: 0.0, rel: tol, max_intervals: 4000 },
        )?;
        Ok(self.prefactor * est.value)
    }
}

/// T_j^(a)[f] for f of polynomial growth of the declared degree in a.
pub fn superposition_functional<F: Fn(f64) -> Complex64>(m: usize, j: usize, f: F, growth_degree: f64) -> Result<Complex64> {
    let rule = SuperpositionRule::new(m, j)?;
    let nu = (m - 2) / 2;
    let limit = 2.0 * nu as f64 - j as f64;
    if growth_degree >= limit {
        return Err(Error::Domain(format!("growth degree {growth_degree} makes the a-integral diverge (need < {limit})")));
    }
    rule.apply(f, 1e-12)
}

/// ∫₀^∞ (1+a)^{−s} a^{−1/2} e^{iκa} da for κ ≥ 0, by rotating a = it onto the
/// imaginary axis where the exponential decays.
fn oscillatory_weight_integral(s: f64, kappa: f64, tol: f64) -> Result<Complex64> {
    if kappa == 0.0 {
        return Ok(Complex64::new((ln_gamma(0.5) + ln_gamma(s - 0.5) - ln_gamma(s)).exp(), 0.0));
    }
    let est = integrate_to_inf(
        |w| (Complex64::new(1.0, w * w)).powf(-s) * (-kappa * w * w).exp() * 2.0,
        0.0,
        1.0,
        Tolerance { abs: 0.0, rel: tol, max_intervals: 4000 },
    )?;
    Ok(I * Complex64::from_polar(1.0, -PI / 4.0) * est.value)
}

/// G₀(λ, x) for even m as the superposition Σ_j ω⁻¹ T_j^(a)[e^{iλr(1+2a)}(λr)^j r^{−(m−2)}].
pub fn eval_kernel_even(m: usize, lambda: f64, r: f64, opts: &KernelOptions) -> Result<Complex64> {
    if m < 4 || m % 2 == 1 {
        return Err(Error::Dimension { m, reason: "even route needs even m ≥ 4".into() });
    }
    if r <= 0.0 || lambda < 0.0 {
        return Err(Error::Domain(format!("need r > 0 and λ ≥ 0, got r={r}, λ={lambda}")));
    }
    let lr = lambda * r;
    if lr > opts.lambda_r_cap {
        return Err(Error::Range { value: lr, cap: opts.lambda_r_cap });
    }
    let nu = (m - 2) / 2;
    let omega = sphere_area(m);
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=nu {
        if j > 0 && lr == 0.0 {
            break;
        }
        let rule = SuperpositionRule::new(m, j)?;
        let weight = oscillatory_weight_integral(rule.exponent, 2.0 * lr, opts.rel_tol)?;
        acc += rule.prefactor * weight * lr.powi(j as i32);
    }
    Ok(acc * Complex64::from_polar(1.0, lr) * r.powi(-(m as i32 - 2)) / omega)
}

/// Closed form of T_j^(a)[(1+2a)^{−k}], k ≥ 1, with its x-integral by quadrature.
pub fn superposition_power_closed_form(m: usize, j: usize, k: usize) -> Result<Complex64> {
    if k == 0 {
        return Err(Error::Domain("closed form needs k ≥ 1".into()));
    }
    let nu = (m - 2) / 2;
    let e = 2.0 * nu as f64 - j as f64 + k as f64;
    let (x_int, _) = crate::quad::integrate_real_to_inf(
        |x| (x * x - 1.0).powi(k as i32 - 1) / (x * x + 1.0).powf(e),
        1.0,
        1.0,
        Tolerance { abs: 0.0, rel: 1e-14, max_intervals: 4000 },
    )?;
    let phase = I.conj().powu(j as u32);
    let c = 2f64.powi(m as i32 - 1) * gamma(e) / (factorial(m - 2) * gamma(k as f64)) * binomial(nu, j);
    Ok(phase * c * x_int)
}
