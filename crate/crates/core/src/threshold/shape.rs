//! Radial factors with exact first and second derivatives, used to manufacture
//! potentials V = Δφ/φ.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

/// Second-order jet (value, d/dr, d²/dr²).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn var(x: f64) -> Self {
        Jet { v: x, d1: 1.0, d2: 0.0 }
    }

    pub fn cst(c: f64) -> Self {
        Jet { v: c, d1: 0.0, d2: 0.0 }
    }

    fn chain(self, f: f64, f1: f64, f2: f64) -> Self {
        Jet { v: f, d1: f1 * self.d1, d2: f2 * self.d1 * self.d1 + f1 * self.d2 }
    }

    pub fn powf(self, p: f64) -> Self {
        let x = self.v;
        self.chain(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn recip(self) -> Self {
        self.powf(-1.0)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet { v: self.v * o.v, d1: self.d1 * o.v + self.v * o.d1, d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2 }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, c: f64) -> Jet {
        Jet { v: self.v + c, ..self }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, c: f64) -> Jet {
        Jet { v: self.v * c, d1: self.d1 * c, d2: self.d2 * c }
    }
}

/// Quintic smoothstep 6t⁵ − 15t⁴ + 10t³ on [a, a + w], 0 before and 1 after.
pub fn smoothstep(r: Jet, a: f64, w: f64) -> Jet {
    if r.v <= a {
        return Jet::cst(0.0);
    }
    if r.v >= a + w {
        return Jet::cst(1.0);
    }
    let t = (r + (-a)) * (1.0 / w);
    let t3 = t * t * t;
    t3 * (t * (t * 6.0 + (-15.0)) + 10.0)
}

/// Radial factor R of φ = R(r)·Y_ℓ in its angular sector.
type ExactPotential = Arc<dyn Fn(f64) -> Option<f64> + Send + Sync>;

#[derive(Clone)]
pub struct Shape {
    label: String,
    sector: usize,
    f: Arc<dyn Fn(Jet) -> Jet + Send + Sync>,
    exact: Option<ExactPotential>,
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Shape({}, l={})", self.label, self.sector)
    }
}

impl Shape {
    pub fn new<F: Fn(Jet) -> Jet + Send + Sync + 'static>(label: impl Into<String>, sector: usize, f: F) -> Self {
        Shape { label: label.into(), sector, f: Arc::new(f), exact: None }
    }

    /// Supplies Δφ/φ in closed form where known; `None` falls back to the jets.
    pub fn with_exact_potential<G: Fn(f64) -> Option<f64> + Send + Sync + 'static>(mut self, g: G) -> Self {
        self.exact = Some(Arc::new(g));
        self
    }

    /// Δφ/φ at r for φ = R(r)·Y_ℓ.
    pub fn potential(&self, r: f64) -> f64 {
        if let Some(v) = self.exact.as_ref().and_then(|g| g(r)) {
            return v;
        }
        let j = self.eval(r);
        let l = self.sector as f64;
        (j.d2 + 2.0 * j.d1 / r - l * (l + 1.0) * j.v / (r * r)) / j.v
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn sector(&self) -> usize {
        self.sector
    }

    pub fn eval(&self, r: f64) -> Jet {
        (self.f)(Jet::var(r))
    }

    /// (1 + r²)^{−1/2}: the m = 3 threshold resonance with L(φ) = 1.
    pub fn inverse_sqrt() -> Self {
        Shape::new("inverse-sqrt", 0, |r| (r * r + 1.0).powf(-0.5)).with_exact_potential(|r| Some(-3.0 / (1.0 + r * r).powi(2)))
    }

    /// (1 + r²)^{−1/2} blended into c/r across [radius, radius + width].
    pub fn green_tail(radius: f64, width: f64, c: f64) -> Self {
        Shape::new(format!("green-tail(R={radius},c={c})"), 0, move |r| {
            let chi = smoothstep(r, radius, width);
            (Jet::cst(1.0) - chi) * (r * r + 1.0).powf(-0.5) + chi * r.recip() * c
        })
        .with_exact_potential(move |r| {
            if r <= radius {
                Some(-3.0 / (1.0 + r * r).powi(2))
            } else if r >= radius + width {
                Some(0.0)
            } else {
                None
            }
        })
    }

    /// Radial factor r·h(r) of x₁h(r), h = (1 + r²)^{−3/2} blended into r^{−3}
    /// across [inner, outer].
    pub fn dipole(inner: f64, outer: f64) -> Self {
        Shape::new(format!("dipole({inner},{outer})"), 1, move |r| {
            let chi = smoothstep(r, inner, outer - inner);
            let h = (Jet::cst(1.0) - chi) * (r * r + 1.0).powf(-1.5) + chi * r.powf(-3.0);
            r * h
        })
        .with_exact_potential(move |r| {
            if r <= inner {
                Some(-15.0 / (1.0 + r * r).powi(2))
            } else if r >= outer {
                Some(0.0)
            } else {
                None
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jets_differentiate() {
        let s = Shape::inverse_sqrt();
        let r = 0.7f64;
        let j = s.eval(r);
        let q = 1.0 + r * r;
        assert!((j.d1 + r * q.powf(-1.5)).abs() < 1e-15);
        assert!((j.d2 - (2.0 * r * r - 1.0) * q.powf(-2.5)).abs() < 1e-15);
        let st = smoothstep(Jet::var(1.5), 1.0, 1.0);
        let d = Shape::dipole(1.0, 2.0);
        for r in [0.3f64, 2.5] {
            let j = d.eval(r);
            let from_jets = (j.d2 + 2.0 * j.d1 / r - 2.0 * j.v / (r * r)) / j.v;
            assert!((d.potential(r) - from_jets).abs() < 1e-10, "r={r}");
        }
        let g = Shape::inverse_sqrt();
        let j = g.eval(0.8);
        assert!((g.potential(0.8) - (j.d2 + 2.0 * j.d1 / 0.8) / j.v).abs() < 1e-13);
        assert!((st.v - 0.5).abs() < 1e-15 && (st.d1 - 1.875).abs() < 1e-14 && st.d2.abs() < 1e-13);
    }
}
