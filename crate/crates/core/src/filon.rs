//! Filon-type quadrature: the integrand amplitude is replaced by a local quintic on
//! every interval and the polynomial × e^{iωx} moments are integrated exactly.

use num_complex::Complex64;

const DEG: usize = 5;
const NP: usize = DEG + 1;

/// E_k(θ) = ∫₀¹ s^k e^{iθs} ds for k = 0..5.
pub fn exp_moments(theta: f64) -> [Complex64; NP] {
    let i = Complex64::new(0.0, 1.0);
    if theta.abs() < 2.0 {
        let mut out = [Complex64::new(0.0, 0.0); NP];
        let mut term = Complex64::new(1.0, 0.0);
        for n in 0..40 {
            for (k, o) in out.iter_mut().enumerate() {
                *o += term / (n + k + 1) as f64;
            }
            term *= i * theta / (n + 1) as f64;
            if term.norm() < 1e-18 {
                break;
            }
        }
        out
    } else {
        let e = Complex64::from_polar(1.0, theta);
        let it = i * theta;
        let mut out = [(e - 1.0) / it; NP];
        for k in 1..NP {
            out[k] = (e - out[k - 1] * k as f64) / it;
        }
        out
    }
}

/// Piecewise-quintic representation of sampled data on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct Panels {
    x: Vec<f64>,
    h: Vec<f64>,
    coeffs: Vec<[Complex64; NP]>,
    uniform: bool,
}

impl Panels {
    pub fn new(x: &[f64], f: &[Complex64]) -> Self {
        let n = x.len();
        assert!(n >= NP && f.len() == n, "need at least six samples");
        let mut h = Vec::with_capacity(n - 1);
        let mut coeffs = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let hi = x[i + 1] - x[i];
            let start = i.saturating_sub(2).min(n - NP);
            let s: [f64; NP] = std::array::from_fn(|k| (x[start + k] - x[i]) / hi);
            let v: [Complex64; NP] = std::array::from_fn(|k| f[start + k]);
            h.push(hi);
            coeffs.push(monomial(&s, &v));
        }
        let h0 = h[0];
        let uniform = h.iter().all(|&v| ((v - h0) / h0).abs() < 1e-12);
        Panels { x: x.to_vec(), h, coeffs, uniform }
    }

    pub fn from_real(x: &[f64], f: &[f64]) -> Self {
        let v: Vec<Complex64> = f.iter().map(|&y| Complex64::new(y, 0.0)).collect();
        Self::new(x, &v)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    /// ∫ f(x) e^{iωx} dx over the whole grid.
    pub fn integrate_exp(&self, omega: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        if self.uniform {
            let hh = self.h[0];
            let e = exp_moments(omega * hh);
            let step = Complex64::from_polar(1.0, omega * hh);
            let mut phase = Complex64::from_polar(1.0, omega * self.x[0]);
            for (i, c) in self.coeffs.iter().enumerate() {
                if i % 128 == 0 {
                    phase = Complex64::from_polar(1.0, omega * self.x[i]);
                }
                acc += phase * dot(c, &e);
                phase *= step;
            }
            return acc * hh;
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            let hi = self.h[i];
            let e = exp_moments(omega * hi);
            let phase = Complex64::from_polar(hi, omega * self.x[i]);
            acc += phase * dot(c, &e);
        }
        acc
    }

    pub fn integrate(&self) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&self.h)
            .map(|(c, h)| mean(c) * *h)
            .sum()
    }

    /// Prefix integrals ∫_{x_0}^{x_i} f dx for every node.
    pub fn cumulative(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.x.len());
        let mut acc = Complex64::new(0.0, 0.0);
        out.push(acc);
        for (c, h) in self.coeffs.iter().zip(&self.h) {
            acc += mean(c) * *h;
            out.push(acc);
        }
        out
    }
}

fn dot(c: &[Complex64; NP], e: &[Complex64; NP]) -> Complex64 {
    c.iter().zip(e).map(|(a, b)| a * b).sum()
}

fn mean(c: &[Complex64; NP]) -> Complex64 {
    c.iter().enumerate().map(|(k, a)| a / (k + 1) as f64).sum()
}

/// Monomial coefficients in s of the interpolating polynomial through (s_k, v_k).
fn monomial(s: &[f64; NP], v: &[Complex64; NP]) -> [Complex64; NP] {
    let mut d = *v;
    for level in 1..NP {
        for k in (level..NP).rev() {
            d[k] = (d[k] - d[k - 1]) / (s[k] - s[k - level]);
        }
    }
    // Horner expansion of the Newton form
    let z = Complex64::new(0.0, 0.0);
    let mut p = [z; NP];
    p[0] = d[DEG];
    let mut deg = 0;
    for k in (0..DEG).rev() {
        // p <- p·(s − s_k) + d_k
        let mut q = [z; NP];
        for j in 0..=deg {
            q[j + 1] += p[j];
            q[j] -= p[j] * s[k];
        }
        q[0] += d[k];
        p = q;
        deg += 1;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_across_branches() {
        for &t in &[0.49, 1.99, 2.01] {
            let a = exp_moments(t);
            let b = exp_moments(-t);
            for k in 0..NP {
                assert!((a[k] - b[k].conj()).norm() < 1e-14);
            }
        }
        let lo = exp_moments(1.9999999);
        let hi = exp_moments(2.0000001);
        for k in 0..NP {
            assert!((lo[k] - hi[k]).norm() < 1e-6);
        }
    }

    #[test]
    fn exact_for_low_degree() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.1).powf(1.3)).collect();
        let f: Vec<f64> = x.iter().map(|&t| 1.0 - 2.0 * t + 0.5 * t * t * t).collect();
        let p = Panels::from_real(&x, &f);
        let b = *x.last().unwrap();
        let omega = 7.0;
        // ∫₀^b (1 − 2t + t³/2) e^{iωt} dt via the moment recursion
        let e = exp_moments(omega * b);
        let exact = (e[0] - 2.0 * b * e[1] + 0.5 * b.powi(3) * e[3]) * b;
        assert!((p.integrate_exp(omega) - exact).norm() < 1e-12);
    }

    #[test]
    fn oscillatory_gaussian() {
        let n = 2001;
        let x: Vec<f64> = (0..n).map(|i| -10.0 + 20.0 * i as f64 / (n - 1) as f64).collect();
        let f: Vec<f64> = x.iter().map(|&t| (-t * t / 2.0).exp()).collect();
        let p = Panels::from_real(&x, &f);
        for &w in &[0.0, 1.0, 3.0, 40.0] {
            let exact = (2.0 * std::f64::consts::PI).sqrt() * (-w * w / 2.0f64).exp();
            assert!((p.integrate_exp(w).re - exact).abs() < 1e-9, "w={w}");
        }
    }
}
