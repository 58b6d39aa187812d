//! Log-uniform radial grids and sampled radial profiles.

use crate::error::{Error, Result};
use crate::filon::Panels;
use crate::quad::{integrate_to_inf, Tolerance};
use num_complex::Complex64;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

pub const GRID_ENV: &str = "THRESHSCATTER_GRID_N";
pub const DEFAULT_N: usize = 2048;
pub const DEFAULT_R_MIN: f64 = 1e-3;
pub const DEFAULT_R_MAX: f64 = 1e3;

#[derive(Debug, Clone, PartialEq)]
pub struct LogGrid {
    radii: Vec<f64>,
    step: f64,
    weights: Vec<f64>,
}

impl LogGrid {
    pub fn new(r_min: f64, r_max: f64, n: usize) -> Result<Arc<Self>> {
        if n < 16 {
            return Err(Error::Grid(format!("need at least 16 points, got {n}")));
        }
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::Grid(format!("bad radial range [{r_min}, {r_max}]")));
        }
        let u0 = r_min.ln();
        let step = (r_max.ln() - u0) / (n - 1) as f64;
        let mut radii: Vec<f64> = (0..n).map(|i| (u0 + step * i as f64).exp()).collect();
        radii[0] = r_min;
        radii[n - 1] = r_max;
        Ok(Arc::new(Self::assemble(radii, step)))
    }

    /// Default grid, with the point count overridable through the environment.
    pub fn default_grid() -> Arc<Self> {
        Self::new(DEFAULT_R_MIN, DEFAULT_R_MAX, default_n()).expect("default grid parameters are valid")
    }

    /// Adopts externally supplied radii, which must be log-uniform.
    pub fn from_radii(radii: Vec<f64>) -> Result<Arc<Self>> {
        let n = radii.len();
        if n < 16 {
            return Err(Error::Grid(format!("need at least 16 points, got {n}")));
        }
        if radii[0] <= 0.0 {
            return Err(Error::Grid("radii must be positive".into()));
        }
        let step = (radii[n - 1].ln() - radii[0].ln()) / (n - 1) as f64;
        for w in radii.windows(2) {
            let d = w[1].ln() - w[0].ln();
            if !(d > 0.0) || ((d - step) / step).abs() > 1e-6 {
                return Err(Error::Grid("radii are not log-uniform and increasing".into()));
            }
        }
        Ok(Arc::new(Self::assemble(radii, step)))
    }

    fn assemble(radii: Vec<f64>, step: f64) -> Self {
        let n = radii.len();
        let mut weights: Vec<f64> = radii.iter().map(|r| step * r).collect();
        weights[0] *= 0.5;
        weights[n - 1] *= 0.5;
        LogGrid { radii, step, weights }
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Trapezoid weights in ln r, so that Σ w_i g(r_i) ≈ ∫ g dr on the grid span.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn r_min(&self) -> f64 {
        self.radii[0]
    }

    pub fn r_max(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }

    pub fn same_as(&self, other: &LogGrid) -> bool {
        self.radii.len() == other.radii.len()
            && self.r_min().to_bits() == other.r_min().to_bits()
            && self.r_max().to_bits() == other.r_max().to_bits()
    }

    /// Fractional index position of r in log coordinates.
    pub fn position(&self, r: f64) -> f64 {
        (r.ln() - self.radii[0].ln()) / self.step
    }
}

pub fn default_n() -> usize {
    std::env::var(GRID_ENV).ok().and_then(|s| s.trim().parse().ok()).filter(|&n| n >= 16).unwrap_or(DEFAULT_N)
}

#[derive(Debug, Clone)]
pub struct RadialProfile {
    grid: Arc<LogGrid>,
    values: Vec<Complex64>,
    decay: f64,
}

impl RadialProfile {
    /// Builds a profile and checks the claimed decay against the last decade of samples.
    pub fn new(grid: Arc<LogGrid>, values: Vec<Complex64>, decay: f64) -> Result<Self> {
        let p = Self::unchecked(grid, values, decay)?;
        p.check_tail()?;
        Ok(p)
    }

    /// Builds a profile without the tail check; used for intermediate results.
    pub fn unchecked(grid: Arc<LogGrid>, values: Vec<Complex64>, decay: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!("{} values for {} radii", values.len(), grid.len())));
        }
        if decay.is_nan() || decay < 0.0 {
            return Err(Error::Domain(format!("decay exponent {decay}")));
        }
        Ok(RadialProfile { grid, values, decay })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: &Arc<LogGrid>, decay: f64, f: F) -> Result<Self> {
        let values = grid.radii().iter().map(|&r| f(r)).collect();
        Self::new(grid.clone(), values, decay)
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: &Arc<LogGrid>, decay: f64, f: F) -> Result<Self> {
        Self::from_fn(grid, decay, |r| Complex64::new(f(r), 0.0))
    }

    pub fn zeros(grid: &Arc<LogGrid>) -> Self {
        RadialProfile { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.len()], decay: f64::INFINITY }
    }

    pub fn grid(&self) -> &Arc<LogGrid> {
        &self.grid
    }

    pub fn radii(&self) -> &[f64] {
        self.grid.radii()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn with_decay(mut self, decay: f64) -> Self {
        self.decay = decay;
        self
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.values.iter().all(|v| v.im.abs() <= tol * scale)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn check_tail(&self) -> Result<()> {
        let d = self.decay;
        if !d.is_finite() || d == 0.0 {
            return Ok(());
        }
        let r = self.radii();
        let n = r.len();
        let start = r.iter().position(|&x| x >= r[n - 1] / 10.0).unwrap_or(0).min(n - 2);
        let mut prod: Vec<f64> = (start..n).map(|i| self.values[i].norm() * jbracket(r[i]).powf(d)).collect();
        let last = *prod.last().unwrap();
        prod.sort_by(|a, b| a.total_cmp(b));
        let median = prod[prod.len() / 2];
        if last > 10.0 * median && last > 1e-300 {
            return Err(Error::Decay { found: self.estimate_decay(), needed: d });
        }
        Ok(())
    }

    /// Power-law exponent fitted on the last decade by log-log least squares.
    pub fn estimate_decay(&self) -> f64 {
        let r = self.radii();
        let n = r.len();
        let start = r.iter().position(|&x| x >= r[n - 1] / 10.0).unwrap_or(0);
        let pts: Vec<(f64, f64)> = (start..n)
            .filter(|&i| self.values[i].norm() > 0.0)
            .map(|i| (r[i].ln(), self.values[i].norm().ln()))
            .collect();
        if pts.len() < 2 {
            return f64::INFINITY;
        }
        -least_squares_slope(&pts)
    }

    /// Value of the power-law tail model A·r^{−δ} at the last grid point.
    pub fn tail_amplitude(&self) -> Complex64 {
        if !self.decay.is_finite() {
            return Complex64::new(0.0, 0.0);
        }
        let rn = self.grid.r_max();
        self.values[self.values.len() - 1] * rn.powf(self.decay)
    }

    pub fn map<F: Fn(f64, Complex64) -> Complex64>(&self, f: F) -> Self {
        let values = self.radii().iter().zip(&self.values).map(|(&r, &v)| f(r, v)).collect();
        RadialProfile { grid: self.grid.clone(), values, decay: self.decay }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|_, v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|_, v| v.conj())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(RadialProfile { grid: self.grid.clone(), values, decay: self.decay.min(other.decay) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(RadialProfile { grid: self.grid.clone(), values, decay: self.decay + other.decay })
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Grid("profiles live on different grids".into()))
        }
    }

    /// ∫₀^∞ r^k f(r) dr: trapezoid in ln r plus the core piece below r_min and the
    /// power-law tail beyond r_max.
    pub fn moment(&self, k: f64) -> Result<Complex64> {
        if k <= -1.0 {
            return Err(Error::Domain(format!("moment order {k} not integrable at the origin")));
        }
        let r = self.radii();
        let w = self.grid.weights();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..r.len() {
            acc += self.values[i] * (w[i] * r[i].powf(k));
        }
        // the lattice continued past both ends against the models f ≈ α + βr² at the
        // core and A r^{−δ} in the tail keeps the trapezoid sum spectrally accurate
        let h = self.grid.step();
        let (alpha, beta) = self.core_model();
        acc += alpha * (r[0].powf(k + 1.0) * lattice_end(h, k + 1.0));
        acc += beta * (r[0].powf(k + 3.0) * lattice_end(h, k + 3.0));
        let a = self.tail_amplitude();
        if a != Complex64::new(0.0, 0.0) {
            let q = self.decay - k;
            if q <= 1.0 {
                return Err(Error::Decay { found: self.decay, needed: k + 1.0 });
            }
            acc += a * (self.grid.r_max().powf(1.0 - q) * lattice_end(h, q - 1.0));
        }
        Ok(acc)
    }

    /// Even core model f(r) ≈ α + βr² through the first two samples.
    pub fn core_model(&self) -> (Complex64, Complex64) {
        let r = self.radii();
        let beta = (self.values[1] - self.values[0]) / (r[1] * r[1] - r[0] * r[0]);
        (self.values[0] - beta * (r[0] * r[0]), beta)
    }

    fn tail_moment(&self, k: f64) -> Result<Complex64> {
        let a = self.tail_amplitude();
        if a == Complex64::new(0.0, 0.0) {
            return Ok(a);
        }
        let q = self.decay - k;
        if q <= 1.0 {
            return Err(Error::Decay { found: self.decay, needed: k + 1.0 });
        }
        let rn = self.grid.r_max();
        Ok(a * (rn.powf(1.0 - q) / (q - 1.0)))
    }

    /// Prefix integrals ∫₀^{r_i} s^k f(s) ds at every node, fourth order in ln r.
    pub fn cumulative_moment(&self, k: f64) -> Vec<Complex64> {
        let r = self.radii();
        let u: Vec<f64> = r.iter().map(|x| x.ln()).collect();
        let g: Vec<Complex64> = r.iter().zip(&self.values).map(|(&x, &v)| v * x.powf(k + 1.0)).collect();
        let head = self.values[0] * (r[0].powf(k + 1.0) / (k + 1.0));
        Panels::new(&u, &g).cumulative().into_iter().map(|c| c + head).collect()
    }

    /// Suffix integrals ∫_{r_i}^∞ s^k f(s) ds at every node.
    pub fn tail_cumulative_moment(&self, k: f64) -> Result<Vec<Complex64>> {
        let r = self.radii();
        let u: Vec<f64> = r.iter().map(|x| x.ln()).collect();
        let g: Vec<Complex64> = r.iter().zip(&self.values).map(|(&x, &v)| v * x.powf(k + 1.0)).collect();
        let pre = Panels::new(&u, &g).cumulative();
        let tail = self.tail_moment(k)?;
        let total = pre[pre.len() - 1] + tail;
        // past the last nonzero sample only the continuation remains
        let last = g.iter().rposition(|v| *v != Complex64::new(0.0, 0.0)).map_or(0, |i| i + 1);
        Ok(pre.iter().enumerate().map(|(i, p)| if i >= last { tail } else { total - p }).collect())
    }

    /// Evaluates the profile off the grid: six-point Lagrange interpolation in ln r,
    /// constant continuation below r_min, power-law continuation above r_max.
    pub fn interp(&self, r: f64) -> Complex64 {
        let g = &self.grid;
        let n = g.len();
        if r <= g.r_min() {
            // even continuation, linear in r²
            let (alpha, beta) = self.core_model();
            return alpha + beta * (r * r);
        }
        if r >= g.r_max() {
            let a = self.tail_amplitude();
            return if a == Complex64::new(0.0, 0.0) { a } else { a * r.powf(-self.decay) };
        }
        let x = g.position(r);
        let base = (x.floor() as isize - 2).clamp(0, n as isize - 6) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..6 {
            let xj = (base + j) as f64;
            let mut l = 1.0;
            for k in 0..6 {
                if k != j {
                    let xk = (base + k) as f64;
                    l *= (x - xk) / (xj - xk);
                }
            }
            acc += self.values[base + j] * l;
        }
        acc
    }

    /// Resamples onto another grid by interpolation.
    pub fn resample(&self, grid: &Arc<LogGrid>) -> Self {
        let values = grid.radii().iter().map(|&r| self.interp(r)).collect();
        RadialProfile { grid: grid.clone(), values, decay: self.decay }
    }

    /// Prepared ∫₀^∞ r^k f(r) e^{iωr} dr for many ω.
    pub fn fourier_plan(&self, k: u32) -> FourierPlan {
        let r = self.radii();
        let g: Vec<Complex64> = r.iter().zip(&self.values).map(|(&x, &v)| v * x.powi(k as i32)).collect();
        FourierPlan {
            panels: Panels::new(r, &g),
            k,
            r_min: r[0],
            head_value: self.values[0],
            r_max: self.grid.r_max(),
            tail_amp: self.tail_amplitude(),
            tail_exp: self.decay - k as f64,
        }
    }

    pub fn write_file(&self, path: &Path, header: &ProfileHeader) -> Result<()> {
        std::fs::write(path, self.to_text(header))?;
        Ok(())
    }

    pub fn to_text(&self, header: &ProfileHeader) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# m={} l={} delta={:e}", header.m, header.l, header.delta);
        for (r, v) in self.radii().iter().zip(&self.values) {
            let _ = writeln!(s, "{:e} {:e}", r, v.re);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<(ProfileHeader, Self)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines.next().ok_or_else(|| Error::Parse("empty profile file".into()))?;
        let header = ProfileHeader::parse(head)?;
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (no, line) in lines.enumerate() {
            let mut cols = line.split_whitespace();
            let (a, b) = match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => return Err(Error::Parse(format!("line {}: expected two columns", no + 2))),
            };
            let r: f64 = a.parse().map_err(|_| Error::Parse(format!("line {}: bad radius {a}", no + 2)))?;
            let v: f64 = b.parse().map_err(|_| Error::Parse(format!("line {}: bad value {b}", no + 2)))?;
            radii.push(r);
            values.push(Complex64::new(v, 0.0));
        }
        let grid = LogGrid::from_radii(radii)?;
        let p = RadialProfile::new(grid, values, header.delta)?;
        Ok((header, p))
    }

    pub fn read_file(path: &Path) -> Result<(ProfileHeader, Self)> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileHeader {
    pub m: usize,
    pub l: usize,
    pub delta: f64,
}

impl ProfileHeader {
    fn parse(line: &str) -> Result<Self> {
        let body = line.trim().strip_prefix('#').ok_or_else(|| Error::Parse("header must start with '#'".into()))?;
        let (mut m, mut l, mut delta) = (None, None, None);
        for tok in body.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| Error::Parse(format!("bad header token {tok}")))?;
            let bad = || Error::Parse(format!("bad header value {tok}"));
            match k {
                "m" => m = Some(v.parse().map_err(|_| bad())?),
                "l" => l = Some(v.parse().map_err(|_| bad())?),
                "delta" => delta = Some(v.parse().map_err(|_| bad())?),
                _ => return Err(Error::Parse(format!("unknown header key {k}"))),
            }
        }
        match (m, l, delta) {
            (Some(m), Some(l), Some(delta)) => Ok(ProfileHeader { m, l, delta }),
            _ => Err(Error::Parse("header needs m, l and delta".into())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FourierPlan {
    panels: Panels,
    k: u32,
    r_min: f64,
    head_value: Complex64,
    r_max: f64,
    tail_amp: Complex64,
    tail_exp: f64,
}

impl FourierPlan {
    /// ∫₀^∞ r^k f(r) e^{iωr} dr.
    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        let body = self.panels.integrate_exp(omega);
        let e = crate::filon::exp_moments(omega * self.r_min);
        let head = if (self.k as usize) < 6 {
            self.head_value * self.r_min.powi(self.k as i32 + 1) * e[self.k as usize]
        } else {
            self.head_value * self.r_min.powi(self.k as i32 + 1) / (self.k as f64 + 1.0)
        };
        Ok(body + head + self.tail(omega)?)
    }

    fn tail(&self, omega: f64) -> Result<Complex64> {
        if self.tail_amp == Complex64::new(0.0, 0.0) {
            return Ok(self.tail_amp);
        }
        Ok(self.tail_amp * power_tail(self.r_max, self.tail_exp, omega)?)
    }
}

/// ∫_R^∞ r^{−q} e^{iωr} dr, by rotating the contour into the half-plane of decay.
pub fn power_tail(r: f64, q: f64, omega: f64) -> Result<Complex64> {
    if omega == 0.0 {
        if q <= 1.0 {
            return Err(Error::Decay { found: q, needed: 1.0 });
        }
        return Ok(Complex64::new(r.powf(1.0 - q) / (q - 1.0), 0.0));
    }
    if q <= 0.0 {
        return Err(Error::Decay { found: q, needed: 0.0 });
    }
    let dir = Complex64::new(0.0, omega.signum());
    let w = omega.abs();
    let est = integrate_to_inf(
        |t| (Complex64::new(r, 0.0) + dir * t).powf(-q) * (-w * t).exp(),
        0.0,
        1.0 / w,
        Tolerance { abs: 0.0, rel: 1e-13, max_intervals: 2000 },
    )?;
    Ok(Complex64::from_polar(1.0, omega * r) * dir * est.value)
}

/// Missing half end weight plus Σ_{k≥1} h e^{−kha}: the lattice continued beyond an
/// end point for e^{−a|u|}.
fn lattice_end(h: f64, a: f64) -> f64 {
    h / 2.0 + h / (h * a).exp_m1()
}

pub fn jbracket(r: f64) -> f64 {
    (1.0 + r * r).sqrt()
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
