//! Line signals and the one-dimensional harmonic-analysis layer: Hilbert transform,
//! positive-frequency projection, Hardy–Littlewood maximal function, power weights
//! and the convolution-majorant bound.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::collections::VecDeque;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const PAD: usize = 8;

/// Samples on the uniform grid x_j = −L + j·2L/n, j = 0..n−1.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSignal {
    half_width: f64,
    values: Vec<Complex64>,
    periodic: bool,
}

impl LineSignal {
    pub fn new(half_width: f64, values: Vec<Complex64>, periodic: bool) -> Result<Self> {
        let n = values.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("sample count {n} is not a power of two")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Domain(format!("half width {half_width}")));
        }
        if !periodic {
            let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let edge = values[0].norm().max(values[n - 1].norm());
            if edge > 1e-8 * peak.max(1.0) {
                return Err(Error::Decay { found: edge, needed: 1e-8 });
            }
        }
        Ok(LineSignal { half_width, values, periodic })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(half_width: f64, n: usize, periodic: bool, f: F) -> Result<Self> {
        let dx = 2.0 * half_width / n as f64;
        let v = (0..n).map(|j| f(-half_width + j as f64 * dx)).collect();
        Self::new(half_width, v, periodic)
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(half_width: f64, n: usize, periodic: bool, f: F) -> Result<Self> {
        Self::from_fn(half_width, n, periodic, |x| Complex64::new(f(x), 0.0))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.len() as f64
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    fn with_values(&self, values: Vec<Complex64>) -> Self {
        LineSignal { half_width: self.half_width, values, periodic: self.periodic }
    }

    /// L^p norm with weight |x|^a; the sample at the origin uses |dx/2|^a.
    pub fn weighted_norm(&self, a: f64, p: f64) -> f64 {
        let dx = self.step();
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let x = self.x(j).abs().max(0.5 * dx);
                x.powf(a) * v.norm().powf(p)
            })
            .sum();
        (s * dx).powf(1.0 / p)
    }
}

/// Applies a Fourier multiplier m(ξ) on the padded periodic frame and returns the
/// full padded result together with the frame length.
fn apply_multiplier<M: Fn(f64) -> Complex64>(u: &LineSignal, mult: M) -> Vec<Complex64> {
    let n = u.len();
    let big = if u.periodic { n } else { PAD * n };
    let mut buf = vec![ZERO; big];
    buf[..n].copy_from_slice(&u.values);
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(big).process(&mut buf);
    let dxi = 2.0 * PI / (big as f64 * u.step());
    for (k, b) in buf.iter_mut().enumerate() {
        if 2 * k == big {
            // the Nyquist mode is shared by ±ξ
            *b *= 0.5 * (mult(k as f64 * dxi) + mult(-(k as f64) * dxi));
        } else if 2 * k < big {
            *b *= mult(k as f64 * dxi);
        } else {
            *b *= mult((k as f64 - big as f64) * dxi);
        }
    }
    planner.plan_fft_inverse(big).process(&mut buf);
    let s = 1.0 / big as f64;
    buf.iter_mut().for_each(|v| *v *= s);
    buf
}

fn multiplier_apply<M: Fn(f64) -> Complex64>(u: &LineSignal, mult: M) -> LineSignal {
    let buf = apply_multiplier(u, mult);
    u.with_values(buf[..u.len()].to_vec())
}

/// Fourier multiplier −i·sgn(ξ).
pub fn hilbert_transform(u: &LineSignal) -> LineSignal {
    multiplier_apply(u, |xi| Complex64::new(0.0, -sgn(xi)))
}

/// Positive-frequency projection (1/2π)∫₀^∞ e^{irρ}û(r) dr, the multiplier
/// (1 + sgn ξ)/2; ξ = 0 carries weight 1/2.
pub fn half_projection(u: &LineSignal) -> LineSignal {
    multiplier_apply(u, |xi| Complex64::new(0.5 * (1.0 + sgn(xi)), 0.0))
}

/// Same projection assembled as (u + i·𝐻u)/2 from the Hilbert transform.
pub fn half_projection_via_hilbert(u: &LineSignal) -> LineSignal {
    let h = hilbert_transform(u);
    let v = u.values.iter().zip(&h.values).map(|(a, b)| 0.5 * (a + Complex64::new(0.0, 1.0) * b)).collect();
    u.with_values(v)
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Window widths in cells: 2^{k/q} rounded, deduplicated, q chosen so the family
/// reaches twice the grid length.
fn window_cells(n: usize, count: usize) -> Vec<usize> {
    let count = count.max(2);
    let octaves = ((2 * n) as f64).log2();
    let q = ((count - 1) as f64 / octaves).max(1.0);
    let mut out: Vec<usize> = (0..count).map(|k| 2f64.powf(k as f64 / q).round() as usize).filter(|&c| c <= 2 * n).collect();
    out.dedup();
    out
}

/// Hardy–Littlewood maximal function with the default family of 40 widths.
pub fn maximal(u: &LineSignal) -> LineSignal {
    maximal_with(u, 40)
}

/// sup over windows of `count` geometric widths (and the point value) containing
/// each sample; the signal is extended by zero outside the grid.
pub fn maximal_with(u: &LineSignal, count: usize) -> LineSignal {
    let n = u.len();
    let dx = u.step();
    let abs: Vec<f64> = u.values.iter().map(|v| v.norm()).collect();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + abs[i];
    }
    let cum = |i: isize| -> f64 { prefix[i.clamp(0, n as isize) as usize] };
    let mut best = abs.clone();
    for cells in window_cells(n, count) {
        let c = cells as isize;
        // window starting at s covers samples s..s+c−1
        let avg = |s: isize| (cum(s + c) - cum(s)) / (cells as f64);
        let mut dq: VecDeque<(isize, f64)> = VecDeque::new();
        let mut next = -(c - 1);
        for i in 0..n as isize {
            while next <= i {
                let a = avg(next);
                while dq.back().is_some_and(|b| b.1 <= a) {
                    dq.pop_back();
                }
                dq.push_back((next, a));
                next += 1;
            }
            while dq.front().is_some_and(|f| f.0 < i - c + 1) {
                dq.pop_front();
            }
            let m = dq.front().map(|f| f.1).unwrap_or(0.0);
            if m > best[i as usize] {
                best[i as usize] = m;
            }
        }
    }
    let _ = dx;
    // windows with the sample as an endpoint, every width
    let left = one_sided(&prefix);
    let mut rev = vec![0.0; n + 1];
    for i in 0..n {
        rev[i + 1] = rev[i] + abs[n - 1 - i];
    }
    let right = one_sided(&rev);
    for i in 0..n {
        best[i] = best[i].max(left[i]).max(right[n - 1 - i]);
    }
    u.with_values(best.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
}

/// max over a ≤ i of (P[i+1] − P[a])/(i+1−a): the largest slope from (i+1, P[i+1])
/// back to a point of the lower convex hull of {(a, P[a])}.
fn one_sided(prefix: &[f64]) -> Vec<f64> {
    let n = prefix.len() - 1;
    let slope = |a: (f64, f64), b: (f64, f64)| (b.1 - a.1) / (b.0 - a.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let p = (i as f64, prefix[i]);
        while hull.len() >= 2 && slope(hull[hull.len() - 2], hull[hull.len() - 1]) >= slope(hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
        let q = ((i + 1) as f64, prefix[i + 1]);
        // slope to q rises along the hull while it exceeds the hull edge
        let (mut lo, mut hi) = (0, hull.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if slope(hull[mid], q) > slope(hull[mid], hull[mid + 1]) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        out.push(slope(hull[lo], q));
    }
    out
}

/// The weight |r|^a considered on L^p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerWeight {
    pub a: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApVerdict {
    Finite(f64),
    Diverging { sup: f64 },
}

impl ApVerdict {
    pub fn is_finite(&self) -> bool {
        matches!(self, ApVerdict::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match *self {
            ApVerdict::Finite(v) => v,
            ApVerdict::Diverging { sup } => sup,
        }
    }
}

const SCALES_PER_OCTAVE: usize = 4;
const TOP_SCALE: f64 = 8.0;

/// Interval average of |r|^b over [c−h, c+h]; infinite when not integrable.
fn power_average(b: f64, c: f64, h: f64) -> f64 {
    if b == 0.0 {
        return 1.0;
    }
    let (lo, hi) = (c - h, c + h);
    let contains_zero = lo <= 0.0 && hi >= 0.0;
    if b <= -1.0 && contains_zero {
        return f64::INFINITY;
    }
    let prim = |x: f64| -> f64 {
        if (b + 1.0).abs() < 1e-300 {
            x.abs().ln() * x.signum()
        } else {
            x.signum() * x.abs().powf(b + 1.0) / (b + 1.0)
        }
    };
    if (b + 1.0).abs() < 1e-300 {
        // same sign on the interval
        return (hi.abs().ln() - lo.abs().ln()).abs() / (2.0 * h);
    }
    (prim(hi) - prim(lo)) / (2.0 * h)
}

/// sup over the intervals [c−h, c+h], c ∈ {0} ∪ {j/4 : |j| ≤ 32},
/// h = 8·2^{−k/4}, k < window_count, of (avg w)(avg w^{−1/(p−1)})^{p−1}.
pub fn ap_characteristic(w: &PowerWeight, window_count: usize) -> Result<ApVerdict> {
    if !(w.p > 1.0) {
        return Err(Error::Domain(format!("p={} must exceed 1", w.p)));
    }
    let dual = -w.a / (w.p - 1.0);
    let centers: Vec<f64> = (-32..=32).map(|j| j as f64 / 4.0).collect();
    let mut running = Vec::with_capacity(window_count);
    let mut sup: f64 = 0.0;
    for k in 0..window_count {
        let h = TOP_SCALE * 2f64.powf(-(k as f64) / SCALES_PER_OCTAVE as f64);
        for &c in &centers {
            let q = power_average(w.a, c, h) * power_average(dual, c, h).powf(w.p - 1.0);
            let q = if q.is_nan() { f64::INFINITY } else { q };
            sup = sup.max(q);
        }
        running.push(sup);
    }
    if !sup.is_finite() {
        return Ok(ApVerdict::Diverging { sup });
    }
    // growth factor > 1.25 for 5 consecutive scales within the last decade
    let decade = (10f64.log2() * SCALES_PER_OCTAVE as f64).ceil() as usize;
    let start = running.len().saturating_sub(decade).max(1);
    let mut streak = 0;
    for k in start..running.len() {
        if running[k] > 1.25 * running[k - 1] {
            streak += 1;
            if streak >= 5 {
                return Ok(ApVerdict::Diverging { sup });
            }
        } else {
            streak = 0;
        }
    }
    Ok(ApVerdict::Finite(sup))
}

/// ‖𝐻u‖_{L^p(w)} / ‖u‖_{L^p(w)} for w = |x|^a.
pub fn weighted_hilbert_ratio(u: &LineSignal, a: f64, p: f64) -> f64 {
    hilbert_transform(u).weighted_norm(a, p) / u.weighted_norm(a, p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantReport {
    /// Smallest C with |(F∗u)(t)| ≤ C·Mu(t) on the grid.
    pub constant: f64,
    /// ‖G‖₁ of the supplied majorant.
    pub majorant_mass: f64,
    pub within_bound: bool,
}

/// Empirical constant of |F∗u| ≤ C·Mu against the majorant bound ‖G‖₁.
pub fn majorant_check<G: Fn(f64) -> f64>(kernel: &LineSignal, majorant: G, u: &LineSignal, tol: f64) -> Result<MajorantReport> {
    if (kernel.step() - u.step()).abs() > 1e-12 * u.step() || kernel.len() != u.len() {
        return Err(Error::Grid("kernel and signal must share the grid".into()));
    }
    let n = u.len();
    let dx = u.step();
    let mut prev = f64::INFINITY;
    for j in n / 2..n {
        let g = majorant(kernel.x(j).abs());
        if g > prev * (1.0 + 1e-12) || g <= 0.0 {
            return Err(Error::Precondition("majorant must be positive and decreasing".into()));
        }
        prev = g;
    }
    for (j, v) in kernel.values.iter().enumerate() {
        if v.norm() > majorant(kernel.x(j).abs()) * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!("majorant below |F| at x={}", kernel.x(j))));
        }
    }
    let mass: f64 = (0..n).map(|j| majorant(kernel.x(j).abs())).sum::<f64>() * dx;
    let conv = linear_convolution(kernel, u);
    let mu = maximal(u);
    let mut constant: f64 = 0.0;
    for (c, m) in conv.iter().zip(&mu.values) {
        if m.re > 0.0 {
            constant = constant.max(c.norm() / m.re);
        }
    }
    Ok(MajorantReport { constant, majorant_mass: mass, within_bound: constant <= mass * (1.0 + tol) })
}

/// (F∗u)(x_i) = Σ_j F(x_i − x_j) u(x_j) dx with F centered at sample n/2.
pub fn linear_convolution(kernel: &LineSignal, u: &LineSignal) -> Vec<Complex64> {
    let n = u.len();
    let big = 2 * n;
    let mut a = vec![ZERO; big];
    let mut b = vec![ZERO; big];
    a[..n].copy_from_slice(&kernel.values);
    b[..n].copy_from_slice(&u.values);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(big);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    planner.plan_fft_inverse(big).process(&mut a);
    let s = u.step() / big as f64;
    // kernel index a and signal index b land at a + b; x_a + x_b = x_{a+b−n/2}
    (0..n).map(|i| a[i + n / 2] * s).collect()
}

/// (1/2π)∫₀^∞ e^{iλρ}F(λ)û(λ)dλ, cross-checked against (𝔉*F ∗ ℋu)(ρ).
#[derive(Debug, Clone)]
pub struct SmoothedProjection {
    pub direct: LineSignal,
    pub via_kernel: LineSignal,
    pub discrepancy: f64,
}

/// `band` bounds the support of F up to negligible values.
pub fn smoothed_half_projection<F: Fn(f64) -> Complex64>(cutoff: F, band: f64, u: &LineSignal) -> Result<SmoothedProjection> {
    let n = u.len();
    let direct_full = apply_multiplier(u, |xi| if xi > 0.0 { cutoff(xi) } else if xi == 0.0 { 0.5 * cutoff(0.0) } else { ZERO });
    let proj_full = apply_multiplier(u, |xi| Complex64::new(0.5 * (1.0 + sgn(xi)), 0.0));
    let big = direct_full.len();
    let dx = u.step();
    let period = big as f64 * dx;
    // 𝔉*F(ξ) = (1/2π)∫ e^{iλξ}F(λ)dλ by the trapezoid rule on λ
    let dl = 2.0 * PI / (2.0 * period);
    let kmax = (band / dl).ceil() as i64;
    let fl: Vec<(f64, Complex64)> = (-kmax..=kmax).map(|k| (k as f64 * dl, cutoff(k as f64 * dl))).collect();
    let kernel_at = |xi: f64| -> Complex64 { fl.iter().map(|(l, f)| f * Complex64::from_polar(1.0, l * xi)).sum::<Complex64>() * (dl / (2.0 * PI)) };
    let half = big / 2;
    let ker: Vec<Complex64> = (0..big).map(|d| {
        let off = if d <= half { d as f64 } else { d as f64 - big as f64 };
        kernel_at(off * dx)
    }).collect();
    let kmax_abs = ker.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let support: Vec<usize> = (0..big).filter(|&d| ker[d].norm() > 1e-17 * kmax_abs).collect();
    let mut via = vec![ZERO; n];
    for (i, out) in via.iter_mut().enumerate() {
        let mut acc = ZERO;
        for &d in &support {
            let j = (i + big - d) % big;
            acc += ker[d] * proj_full[j];
        }
        *out = acc * dx;
    }
    let direct: Vec<Complex64> = direct_full[..n].to_vec();
    let scale = direct.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let discrepancy = direct.iter().zip(&via).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
    let direct = u.with_values(direct);
    let via_kernel = u.with_values(via);
    if discrepancy > 1e-8 {
        return Err(Error::Accuracy { achieved: discrepancy, requested: 1e-8 });
    }
    Ok(SmoothedProjection { direct, via_kernel, discrepancy })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_of_cauchy_profile() {
        let u = LineSignal::from_real_fn(1.2e4, 1 << 18, false, |x| 1.0 / (1.0 + x * x)).unwrap();
        let h = hilbert_transform(&u);
        let n = u.len();
        for k in 0..64 {
            let j = n / 2 - 64 * 32 + k * 64;
            let x = u.x(j);
            assert!((h.values()[j].re - x / (1.0 + x * x)).abs() < 1e-4, "x={x}");
        }
    }

    #[test]
    fn maximal_of_indicator() {
        let u = LineSignal::from_real_fn(8.0, 1024, false, |x| if x.abs() <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        let mu = maximal(&u);
        let j = u.points().iter().position(|&x| (x - 3.0).abs() < 1e-12).unwrap();
        assert!((mu.values()[j].re - 0.5).abs() < 1.0 / 64.0);
    }

    #[test]
    fn ap_boundaries() {
        assert_eq!(ap_characteristic(&PowerWeight { a: 0.0, p: 3.0 }, 40).unwrap(), ApVerdict::Finite(1.0));
        assert!(!ap_characteristic(&PowerWeight { a: 1.0, p: 2.0 }, 40).unwrap().is_finite());
        for p in [2.6, 3.5, 4.9] {
            assert!(ap_characteristic(&PowerWeight { a: 4.0 - p, p }, 40).unwrap().is_finite());
        }
        for p in [2.4, 5.1] {
            assert!(!ap_characteristic(&PowerWeight { a: 4.0 - p, p }, 40).unwrap().is_finite());
        }
    }

    #[test]
    fn smoothed_projection_routes() {
        let u = LineSignal::from_real_fn(20.0, 1024, false, |x| (-(x - 1.0) * (x - 1.0)).exp()).unwrap();
        let r = smoothed_half_projection(|l| Complex64::new((-l * l / 2.0).exp(), 0.0), 12.0, &u).unwrap();
        assert!(r.discrepancy < 1e-8);
    }
}
