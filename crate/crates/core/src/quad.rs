//! Gauss rules and adaptive Gauss–Kronrod integration of complex integrands.

use crate::error::{Error, Result};
use crate::special::gamma;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Integrates over `[a, b]` for a rule defined on `[-1, 1]`.
    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }

    pub fn integrate_real<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }
}

fn legendre_cache() -> &'static Mutex<HashMap<usize, Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// n-point Gauss–Legendre rule on [-1, 1], nodes by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> Arc<Rule> {
    assert!(n >= 1);
    if let Some(r) = legendre_cache().lock().unwrap().get(&n) {
        return r.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let rule = Arc::new(Rule { nodes, weights });
    legendre_cache().lock().unwrap().insert(n, rule.clone());
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn laguerre_cache() -> &'static Mutex<HashMap<(usize, u64), Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Generalized Gauss–Laguerre rule for the weight t^α e^{−t} on (0, ∞),
/// computed by Golub–Welsch.
pub fn gauss_laguerre(n: usize, alpha: f64) -> Arc<Rule> {
    let key = (n, alpha.to_bits());
    if let Some(r) = laguerre_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = 2.0 * i as f64 + alpha + 1.0;
        if i + 1 < n {
            let k = (i + 1) as f64;
            let b = (k * (k + alpha)).sqrt();
            j[(i, i + 1)] = b;
            j[(i + 1, i)] = b;
        }
    }
    let eig = SymmetricEigen::new(j);
    let mu0 = gamma(alpha + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v * v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let rule = Arc::new(Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    });
    laguerre_cache().lock().unwrap().insert(key, rule.clone());
    rule
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 4000 }
    }
}

impl Tolerance {
    pub fn rel(rel: f64) -> Self {
        Tolerance { rel, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Result<(Complex64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for k in 0..7 {
        let dx = h * XGK[k];
        let s = f(c - dx) + f(c + dx);
        kron += s * WGK[k];
        if k % 2 == 1 {
            gauss += s * WG[k / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    if !(kron.re.is_finite() && kron.im.is_finite()) {
        return Err(Error::Domain(format!("integrand not finite on [{a}, {b}]")));
    }
    Ok((kron, (kron - gauss).norm()))
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive 7/15-point Gauss–Kronrod integration on a finite interval.
pub fn integrate<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: Complex64::new(0.0, 0.0), error: 0.0 });
    }
    let (v, e) = gk15(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut count = 1;
    while err > tol.abs.max(tol.rel * total.norm()) {
        if count >= tol.max_intervals {
            return Err(Error::Accuracy { achieved: err, requested: tol.abs.max(tol.rel * total.norm()) });
        }
        let p = heap.pop().unwrap();
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(Error::Accuracy { achieved: err, requested: tol.abs.max(tol.rel * total.norm()) });
        }
        let (v1, e1) = gk15(&mut f, p.a, m)?;
        let (v2, e2) = gk15(&mut f, m, p.b)?;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Piece { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: p.b, value: v2, error: e2 });
        count += 1;
        // resum to avoid drift in the running totals
        if count % 64 == 0 {
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
    let value = heap.iter().map(|p| p.value).sum();
    Ok(Estimate { value, error: err })
}

/// Integrates over `[a, ∞)` through t = a + scale·x/(1−x).
pub fn integrate_to_inf<F: FnMut(f64) -> Complex64>(mut f: F, a: f64, scale: f64, tol: Tolerance) -> Result<Estimate> {
    integrate(
        |x| {
            if x >= 1.0 {
                return Complex64::new(0.0, 0.0);
            }
            let d = 1.0 - x;
            let t = a + scale * x / d;
            let v = f(t);
            if v == Complex64::new(0.0, 0.0) {
                v
            } else {
                v * (scale / (d * d))
            }
        },
        0.0,
        1.0,
        tol,
    )
}

pub fn integrate_real<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<(f64, f64)> {
    let e = integrate(|x| Complex64::new(f(x), 0.0), a, b, tol)?;
    Ok((e.value.re, e.error))
}

pub fn integrate_real_to_inf<F: FnMut(f64) -> f64>(mut f: F, a: f64, scale: f64, tol: Tolerance) -> Result<(f64, f64)> {
    let e = integrate_to_inf(|x| Complex64::new(f(x), 0.0), a, scale, tol)?;
    Ok((e.value.re, e.error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn legendre_exact_on_polynomials() {
        let r = gauss_legendre(7);
        for k in 0..14 {
            let v = r.integrate_real(-1.0, 1.0, |x| x.powi(k));
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((v - exact).abs() < 1e-14, "k={k}");
        }
        let r = gauss_legendre(200);
        let v = r.integrate_real(0.0, PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn laguerre_moments() {
        let alpha = 1.5;
        let r = gauss_laguerre(40, alpha);
        for k in 0..10 {
            let v: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k)).sum();
            let exact = gamma(alpha + 1.0 + k as f64);
            assert!((v / exact - 1.0).abs() < 1e-11, "k={k}");
        }
    }

    #[test]
    fn adaptive_handles_peaks_and_infinite_ranges() {
        let e = integrate(|x| Complex64::new(1.0 / (1e-4 + x * x), 0.0), -1.0, 1.0, Tolerance::default()).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((e.value.re - exact).abs() / exact < 1e-11);
        let e = integrate_to_inf(|x| Complex64::new((-x * x).exp(), 0.0), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((e.value.re - PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_reports_failure() {
        let tol = Tolerance { abs: 0.0, rel: 1e-14, max_intervals: 8 };
        let r = integrate(|x| Complex64::new((50.0 * x).sin().abs(), 0.0), 0.0, 10.0, tol);
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }
}
