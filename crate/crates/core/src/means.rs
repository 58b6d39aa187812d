//! Spherical means, the tilde transform, radial Fourier transforms, radial
//! convolutions and the two routes to the spectral pairing
//! ⟨ψ, (G₀(λ) − G₀(−λ))u⟩.

use crate::error::{Error, Result};
use crate::kernels::{odd_kernel_coeffs, SuperpositionRule};
use crate::profile::{FourierPlan, LogGrid, RadialProfile};
use crate::quad::gauss_legendre;
use crate::special::sphere_area;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Sine and cosine transforms ∫₀^∞ r^k u(r) {sin, cos}(ωr) dr of a complex profile,
/// taken from real amplitudes so that small ω loses no digits.
#[derive(Debug, Clone)]
pub struct TrigPlan {
    re: FourierPlan,
    im: Option<FourierPlan>,
}

impl TrigPlan {
    pub fn new(u: &RadialProfile, k: u32) -> Self {
        let re = u.map(|_, v| Complex64::new(v.re, 0.0)).fourier_plan(k);
        let im = if u.values().iter().any(|v| v.im != 0.0) {
            Some(u.map(|_, v| Complex64::new(v.im, 0.0)).fourier_plan(k))
        } else {
            None
        };
        TrigPlan { re, im }
    }

    pub fn sin(&self, omega: f64) -> Result<Complex64> {
        let a = self.re.eval(omega)?.im;
        let b = match &self.im {
            Some(p) => p.eval(omega)?.im,
            None => 0.0,
        };
        Ok(Complex64::new(a, b))
    }

    pub fn cos(&self, omega: f64) -> Result<Complex64> {
        let a = self.re.eval(omega)?.re;
        let b = match &self.im {
            Some(p) => p.eval(omega)?.re,
            None => 0.0,
        };
        Ok(Complex64::new(a, b))
    }

    pub fn both(&self, omega: f64) -> Result<(Complex64, Complex64)> {
        let a = self.re.eval(omega)?;
        let b = match &self.im {
            Some(p) => p.eval(omega)?,
            None => ZERO,
        };
        Ok((Complex64::new(a.im, b.im), Complex64::new(a.re, b.re)))
    }
}

/// Even function M on ℝ held through its samples on r > 0.
#[derive(Debug, Clone)]
pub struct SphericalMean {
    profile: RadialProfile,
    provenance: String,
}

impl SphericalMean {
    pub fn new(profile: RadialProfile, provenance: impl Into<String>) -> Self {
        SphericalMean { profile, provenance: provenance.into() }
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn at(&self, r: f64) -> Complex64 {
        self.profile.interp(r.abs())
    }

    /// ∫_ℝ r^k M(r) dr from the mirrored samples; odd k cancels term by term.
    pub fn line_moment(&self, k: u32) -> Result<Complex64> {
        let r = self.profile.radii();
        let w = self.profile.grid().weights();
        let v = self.profile.values();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            let mut acc = ZERO;
            for i in 0..r.len() {
                let pos = v[i] * (w[i] * r[i].powi(k as i32));
                let neg = v[i] * (w[i] * sign * r[i].powi(k as i32));
                acc += pos + neg;
            }
            return Ok(acc);
        }
        Ok(self.profile.moment(k as f64)? * 2.0)
    }

    /// Oscillatory line integrals ∫_ℝ e^{−iλr} r^k M(r) dr.
    pub fn line_fourier(&self, k: u32) -> LineFourier {
        LineFourier { plan: TrigPlan::new(&self.profile, k), k }
    }
}

#[derive(Debug, Clone)]
pub struct LineFourier {
    plan: TrigPlan,
    k: u32,
}

impl LineFourier {
    pub fn eval(&self, lambda: f64) -> Result<Complex64> {
        // e^{−iλr} + (−1)^k e^{iλr} over r > 0
        if self.k % 2 == 0 {
            Ok(self.plan.cos(lambda)? * 2.0)
        } else {
            Ok(self.plan.sin(lambda)? * Complex64::new(0.0, -2.0))
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum AngularRule {
    /// f depends on x only through (x₁, |x|); Gauss–Legendre in the polar angle.
    Axial { order: usize },
    /// Product rule in hyperspherical angles.
    Product { order: usize },
}

impl Default for AngularRule {
    fn default() -> Self {
        AngularRule::Axial { order: 64 }
    }
}

/// ω_{m−1}⁻¹ ∫ f(rω) dω over the unit sphere.
pub fn spherical_mean<F: Fn(&[f64]) -> Complex64>(f: F, m: usize, r: f64, rule: AngularRule) -> Result<Complex64> {
    if m < 2 {
        return Err(Error::Dimension { m, reason: "spheres need m ≥ 2".into() });
    }
    match rule {
        AngularRule::Axial { order } => {
            let gl = gauss_legendre(order);
            let mut x = vec![0.0; m];
            let mut acc = ZERO;
            let mut mass = 0.0;
            for (t, w) in gl.nodes.iter().zip(&gl.weights) {
                let th = 0.5 * PI * (t + 1.0);
                let wt = w * th.sin().powi(m as i32 - 2);
                x[0] = r * th.cos();
                if m > 1 {
                    x[1] = r * th.sin();
                }
                acc += f(&x) * wt;
                mass += wt;
            }
            Ok(acc / mass)
        }
        AngularRule::Product { order } => {
            let gl = gauss_legendre(order);
            let n_az = 2 * order;
            let mut x = vec![0.0; m];
            let mut acc = ZERO;
            let mut mass = 0.0;
            let mut idx = vec![0usize; m - 2];
            loop {
                // polar angles θ_1..θ_{m−2} with weights sin^{m−1−k}θ_k
                let mut w = 1.0;
                let mut radius = r;
                for (k, &i) in idx.iter().enumerate() {
                    let th = 0.5 * PI * (gl.nodes[i] + 1.0);
                    w *= gl.weights[i] * th.sin().powi((m - 2 - k) as i32);
                    x[k] = radius * th.cos();
                    radius *= th.sin();
                }
                for a in 0..n_az {
                    let ph = 2.0 * PI * a as f64 / n_az as f64;
                    x[m - 2] = radius * ph.cos();
                    x[m - 1] = radius * ph.sin();
                    acc += f(&x) * w;
                    mass += w;
                }
                let mut k = 0;
                loop {
                    if k == idx.len() {
                        return Ok(acc / mass);
                    }
                    idx[k] += 1;
                    if idx[k] < order {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        }
    }
}

/// M̃(ρ) = ∫_ρ^∞ r M(r) dr on the grid of M.
pub fn tilde_mean(mean: &SphericalMean) -> Result<RadialProfile> {
    let p = mean.profile();
    if p.decay() <= 3.0 {
        return Err(Error::Decay { found: p.decay(), needed: 3.0 });
    }
    let vals = p.tail_cumulative_moment(1.0)?;
    RadialProfile::unchecked(p.grid().clone(), vals, p.decay() - 2.0)
}

/// û(ρ) for radial u on ℝ^m, with û(ξ) = ∫ e^{−ix·ξ} u(x) dx.
pub fn radial_fourier(u: &RadialProfile, m: usize, rho: f64) -> Result<Complex64> {
    if rho < 0.0 {
        return Err(Error::Domain(format!("frequency {rho} must be non-negative")));
    }
    if m < 2 {
        return Err(Error::Dimension { m, reason: "radial transform needs m ≥ 2".into() });
    }
    let omega = sphere_area(m);
    if rho == 0.0 {
        return Ok(u.moment(m as f64 - 1.0)? * omega);
    }
    if m == 3 {
        return Ok(TrigPlan::new(u, 1).sin(rho)? * (4.0 * PI / rho));
    }
    RadialTransform::new(u, m)?.eval(rho)
}

/// Radial Fourier transform in general dimension through the angular integral
/// ∫₀^π cos(x cos θ) sin^{m−2}θ dθ.
#[derive(Debug, Clone)]
pub struct RadialTransform {
    m: usize,
    radii: Vec<f64>,
    weights: Vec<Complex64>,
    omega_minor: f64,
}

impl RadialTransform {
    pub fn new(u: &RadialProfile, m: usize) -> Result<Self> {
        let a = u.tail_amplitude();
        if a.norm() * u.grid().r_max().powf(m as f64 - u.decay()) > 1e-13 * u.max_abs() {
            return Err(Error::Decay { found: u.decay(), needed: m as f64 + 13.0 });
        }
        let r = u.radii();
        let w = u.grid().weights();
        let mut radii = Vec::new();
        let mut weights = Vec::new();
        for i in 0..r.len() {
            let c = u.values()[i] * (w[i] * r[i].powi(m as i32 - 1));
            if c != ZERO {
                radii.push(r[i]);
                weights.push(c);
            }
        }
        // core piece below r_min lumped at r_min
        if let Some(first) = weights.first_mut() {
            if radii[0] == r[0] {
                *first += u.values()[0] * (r[0].powi(m as i32) / m as f64);
            }
        }
        Ok(RadialTransform { m, radii, weights, omega_minor: sphere_area(m - 1) })
    }

    pub fn eval(&self, rho: f64) -> Result<Complex64> {
        let mut acc = ZERO;
        for (r, w) in self.radii.iter().zip(&self.weights) {
            acc += w * angular_cosine(self.m, rho * r);
        }
        Ok(acc * self.omega_minor)
    }
}

/// ∫₀^π cos(x cos θ) sin^{m−2}θ dθ.
pub fn angular_cosine(m: usize, x: f64) -> f64 {
    let order = (32 + x.abs().ceil() as usize).min(4096);
    let gl = gauss_legendre(order);
    // symmetric about π/2: integrate over [0, π/2] twice
    let mut acc = 0.0;
    for (t, w) in gl.nodes.iter().zip(&gl.weights) {
        let th = 0.25 * PI * (t + 1.0);
        acc += w * (x * th.cos()).cos() * th.sin().powi(m as i32 - 2);
    }
    acc * 0.25 * PI * 2.0
}

/// (λ^{m−2} i / (2(2π)^{m−1})) ω_{m−1} conj(v̂(λ)) û(λ) for radial v, u.
pub fn pairing_spectral(v: &RadialProfile, u: &RadialProfile, lambda: f64, m: usize) -> Result<Complex64> {
    if lambda < 0.0 {
        return Err(Error::Domain(format!("λ={lambda} must be non-negative")));
    }
    if lambda == 0.0 {
        return Ok(ZERO);
    }
    let vh = radial_fourier(v, m, lambda)?;
    let uh = radial_fourier(u, m, lambda)?;
    let pre = lambda.powi(m as i32 - 2) / (2.0 * (2.0 * PI).powi(m as i32 - 1)) * sphere_area(m);
    Ok(I * pre * vh.conj() * uh)
}

/// Radial convolution (f ∗ g)(s) on ℝ^m sampled on the grid of f.
pub fn radial_convolution(f: &RadialProfile, g: &RadialProfile, m: usize) -> Result<RadialProfile> {
    if m < 3 {
        return Err(Error::Dimension { m, reason: "radial convolution needs m ≥ 3".into() });
    }
    let vals = if m == 3 { abel_convolution(f, g)? } else { angular_convolution(f, g, m)? };
    RadialProfile::unchecked(f.grid().clone(), vals, f.decay().min(g.decay()))
}

/// G(t) = ∫₀^t g(τ)τ dτ with its continuations below and above the grid.
pub struct ShellIntegral {
    profile: RadialProfile,
    core: (Complex64, Complex64),
    total: Complex64,
    tail_amp: Complex64,
    tail_exp: f64,
}

impl ShellIntegral {
    pub fn new(g: &RadialProfile) -> Result<Self> {
        let cum = g.cumulative_moment(1.0);
        let total = cum[cum.len() - 1];
        let profile = RadialProfile::unchecked(g.grid().clone(), cum, 0.0)?;
        Ok(ShellIntegral { profile, core: g.core_model(), total, tail_amp: g.tail_amplitude(), tail_exp: g.decay() })
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let grid = self.profile.grid();
        if t <= grid.r_min() {
            let (a, b) = self.core;
            let t2 = t * t;
            return a * (t2 / 2.0) + b * (t2 * t2 / 4.0);
        }
        if t >= grid.r_max() {
            if self.tail_amp == ZERO {
                return self.total;
            }
            let big_r = grid.r_max();
            let q = self.tail_exp - 2.0;
            let extra = if q.abs() < 1e-12 { (t / big_r).ln() } else { (big_r.powf(-q) - t.powf(-q)) / q };
            return self.total + self.tail_amp * extra;
        }
        self.profile.interp(t)
    }
}

fn abel_convolution(f: &RadialProfile, g: &RadialProfile) -> Result<Vec<Complex64>> {
    let shell = ShellIntegral::new(g)?;
    let r = f.radii();
    let w = f.grid().weights();
    let fv = f.values();
    let scale = f.max_abs();
    let active: Vec<usize> = (0..r.len()).filter(|&i| fv[i].norm() * r[i] > 1e-18 * scale).collect();
    let core_f = f.core_model().0;
    let s_grid = f.radii();
    let out = s_grid
        .iter()
        .map(|&s| {
            let mut acc = ZERO;
            for &i in &active {
                let ri = r[i];
                acc += fv[i] * (w[i] * ri) * (shell.eval(s + ri) - shell.eval((s - ri).abs()));
            }
            // r < r_min: G(s+r) − G(s−r) ≈ 2 r s g(s)
            let r0 = r[0];
            acc += core_f * (2.0 * s * r0.powi(3) / 3.0) * g.interp(s);
            acc * (2.0 * PI / s)
        })
        .collect();
    Ok(out)
}

fn angular_convolution(f: &RadialProfile, g: &RadialProfile, m: usize) -> Result<Vec<Complex64>> {
    let r = f.radii();
    let w = f.grid().weights();
    let fv = f.values();
    let scale = f.max_abs();
    let active: Vec<usize> = (0..r.len()).filter(|&i| fv[i].norm() * r[i].powi(m as i32 - 1) > 1e-18 * scale).collect();
    let width = rms_radius(g, m).max(1e-6);
    let omega_minor = sphere_area(m - 1);
    // (cos θ, w sin^{m−2}θ) per rule order
    let mut rules: Vec<Option<Vec<(f64, f64)>>> = vec![None; 401];
    let out = r
        .iter()
        .map(|&s| {
            let mut acc = ZERO;
            for &i in &active {
                let ri = r[i];
                let order = (24 + (16.0 * s.min(ri) / width).ceil() as usize).min(400);
                let rule = rules[order].get_or_insert_with(|| {
                    let gl = gauss_legendre(order);
                    gl.nodes
                        .iter()
                        .zip(&gl.weights)
                        .map(|(t, wt)| {
                            let th = 0.5 * PI * (t + 1.0);
                            (th.cos(), wt * th.sin().powi(m as i32 - 2))
                        })
                        .collect()
                });
                let mut inner = ZERO;
                for &(c, wt) in rule.iter() {
                    let d = (s * s + ri * ri - 2.0 * s * ri * c).max(0.0).sqrt();
                    inner += g.interp(d) * wt;
                }
                acc += fv[i] * (w[i] * ri.powi(m as i32 - 1) * 0.5 * PI) * inner;
            }
            acc * omega_minor
        })
        .collect();
    Ok(out)
}

fn rms_radius(g: &RadialProfile, m: usize) -> f64 {
    let r = g.radii();
    let w = g.grid().weights();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..r.len() {
        let a = g.values()[i].norm() * w[i] * r[i].powi(m as i32 - 1);
        num += a * r[i] * r[i];
        den += a;
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        1.0
    }
}

/// M for the pairing: the spherical mean of conj(ψ) ∗ ǔ, radial inputs.
pub fn pairing_mean(psi: &RadialProfile, u: &RadialProfile, m: usize) -> Result<SphericalMean> {
    let c = radial_convolution(&psi.conj(), u, m)?;
    Ok(SphericalMean::new(c, "conj(psi)*u"))
}

/// Odd m: Σ_j c_j (−1)^{j+1} λ^j ∫_ℝ e^{−iλr} r^{1+j} M(r) dr with c_j = ω_{m−1}C_j.
pub fn pairing_representation(psi: &RadialProfile, u: &RadialProfile, lambda: f64, m: usize) -> Result<Complex64> {
    if m % 2 == 0 {
        return Err(Error::Dimension { m, reason: "use the even-dimensional representation".into() });
    }
    if lambda <= 0.0 {
        return Err(Error::Domain(format!("λ={lambda} must be positive")));
    }
    let mean = pairing_mean(psi, u, m)?;
    pairing_representation_from_mean(&mean, lambda, m)
}

pub fn pairing_representation_from_mean(mean: &SphericalMean, lambda: f64, m: usize) -> Result<Complex64> {
    let omega = sphere_area(m);
    let coeffs = odd_kernel_coeffs(m)?;
    let mut acc = ZERO;
    for (j, cj) in coeffs.iter().enumerate() {
        let phi = mean.line_fourier(1 + j as u32).eval(lambda)?;
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        acc += cj * omega * sign * lambda.powi(j as i32) * phi;
    }
    Ok(acc)
}

/// Even m: Σ_j (−1)^{j+1} T_j^(a)[λ^j 𝔉(r^{j+1}M^a)(λ)/(1+2a)^{j+2}], M^a(r) = M(r/(1+2a)).
pub fn pairing_representation_even(psi: &RadialProfile, u: &RadialProfile, lambda: f64, m: usize) -> Result<EvenPairing> {
    if m % 2 == 1 || m < 4 {
        return Err(Error::Dimension { m, reason: "even m ≥ 4 required".into() });
    }
    if lambda <= 0.0 {
        return Err(Error::Domain(format!("λ={lambda} must be positive")));
    }
    let mean = pairing_mean(psi, u, m)?;
    pairing_representation_even_from_mean(&mean, lambda, m)
}

#[derive(Debug, Clone, Copy)]
pub struct EvenPairing {
    pub value: Complex64,
    /// The j = 0 contribution by the direct route.
    pub j0_direct: Complex64,
    /// The j = 0 contribution through M̃.
    pub j0_tilde: Complex64,
}

pub fn pairing_representation_even_from_mean(mean: &SphericalMean, lambda: f64, m: usize) -> Result<EvenPairing> {
    let nu = (m - 2) / 2;
    let tol = 1e-11;
    let mut value = ZERO;
    let mut j0_direct = ZERO;
    for j in 0..=nu {
        let rule = SuperpositionRule::new(m, j)?;
        // 𝔉(r^{j+1}M^a)(λ) = (1+2a)^{j+2} Φ_j(λ(1+2a))
        let lf = mean.line_fourier(j as u32 + 1);
        let lj = lambda.powi(j as i32);
        let term = rule.apply(|a| lf.eval(lambda * (1.0 + 2.0 * a)).unwrap_or(Complex64::new(f64::NAN, 0.0)) * lj, tol)?;
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        value += term * sign;
        if j == 0 {
            j0_direct = term * sign;
        }
    }
    let tilde = tilde_mean(mean)?;
    let tilde_mean = SphericalMean::new(tilde, "tilde");
    let lf = tilde_mean.line_fourier(0);
    let rule = SuperpositionRule::new(m, 0)?;
    let j0_tilde = I * rule.apply(
        |a| {
            let k = lambda * (1.0 + 2.0 * a);
            lf.eval(k).unwrap_or(Complex64::new(f64::NAN, 0.0)) * k
        },
        tol,
    )?;
    if !(value.re.is_finite() && value.im.is_finite() && j0_tilde.re.is_finite()) {
        return Err(Error::Accuracy { achieved: f64::INFINITY, requested: tol });
    }
    Ok(EvenPairing { value, j0_direct, j0_tilde })
}

/// Grid suited to pairing checks with unit-scale Gaussian data.
pub fn compact_grid(n: usize) -> Arc<LogGrid> {
    LogGrid::new(1e-3, 60.0, n).expect("valid grid")
}
