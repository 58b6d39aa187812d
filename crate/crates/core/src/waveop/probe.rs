//! Lᵖ dilation probes: ratios ‖Op u_t‖_p/‖u_t‖_p over u_t(x) = u(x/t).

use super::engine::SingularPart;
use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::quad::gauss_legendre;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

/// An operator acting on functions R(r)Y(x̂) of a fixed angular sector through their
/// radial factors.
pub trait ProbeOperator: Send + Sync {
    fn tag(&self) -> String;
    fn sector(&self) -> usize;
    fn apply(&self, u: &RadialProfile) -> Result<RadialProfile>;
}

impl ProbeOperator for SingularPart {
    fn tag(&self) -> String {
        SingularPart::tag(self).to_string()
    }

    fn sector(&self) -> usize {
        SingularPart::sector(self)
    }

    fn apply(&self, u: &RadialProfile) -> Result<RadialProfile> {
        SingularPart::apply(self, u)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Identity {
    pub sector: usize,
}

impl ProbeOperator for Identity {
    fn tag(&self) -> String {
        "identity".into()
    }

    fn sector(&self) -> usize {
        self.sector
    }

    fn apply(&self, u: &RadialProfile) -> Result<RadialProfile> {
        Ok(u.clone())
    }
}

/// ∫_{S²} |Y|^p for Y = 1, x̂₁ or P_ℓ(cos θ).
pub fn angular_lp(sector: usize, p: f64) -> f64 {
    match sector {
        0 => 4.0 * PI,
        1 => 4.0 * PI / (p + 1.0),
        l => {
            let gl = gauss_legendre(400);
            let s: f64 = gl.nodes.iter().zip(&gl.weights).map(|(&x, &w)| w * legendre(l, x).abs().powf(p)).sum();
            2.0 * PI * s
        }
    }
}

fn legendre(l: usize, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// ‖R(r)Y‖_p over ℝ³ from the grid samples.
pub fn lp_norm(f: &RadialProfile, sector: usize, p: f64) -> f64 {
    let w = f.grid().weights();
    let s: f64 = f.values().iter().zip(f.radii()).zip(w).map(|((v, r), w)| w * r * r * v.norm().powf(p)).sum();
    (angular_lp(sector, p) * s).powf(1.0 / p)
}

/// ⟨g, u⟩ = ∫ conj(g)u over ℝ³ for two functions of the same sector.
pub fn l2_pairing(g: &RadialProfile, u: &RadialProfile, sector: usize) -> Result<Complex64> {
    g.ensure_same_grid(u)?;
    let w = g.grid().weights();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..w.len() {
        acc += g.values()[i].conj() * u.values()[i] * (w[i] * g.radii()[i].powi(2));
    }
    Ok(acc * angular_lp(sector, 2.0))
}

/// u ↦ coef·|f⟩⟨g, u⟩.
#[derive(Debug, Clone)]
pub struct RankOne {
    pub tag: String,
    pub sector: usize,
    pub left: RadialProfile,
    pub right: RadialProfile,
    pub coef: Complex64,
}

impl RankOne {
    pub fn pairing(&self, u: &RadialProfile) -> Result<Complex64> {
        l2_pairing(&self.right, u, self.sector)
    }

    /// Matrix of the operator on grid samples, quadrature weights folded into the columns.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let n = self.left.radii().len();
        let w = self.left.grid().weights();
        let ang = angular_lp(self.sector, 2.0);
        DMatrix::from_fn(n, n, |i, j| {
            self.coef * self.left.values()[i] * self.right.values()[j].conj() * (w[j] * self.right.radii()[j].powi(2) * ang)
        })
    }
}

impl ProbeOperator for RankOne {
    fn tag(&self) -> String {
        self.tag.clone()
    }

    fn sector(&self) -> usize {
        self.sector
    }

    fn apply(&self, u: &RadialProfile) -> Result<RadialProfile> {
        let c = self.coef * self.pairing(u)?;
        Ok(self.left.scale(c).with_decay(self.left.decay()))
    }
}

/// Sum of operators on the same sector.
#[derive(Clone)]
pub struct OperatorSum {
    pub tag: String,
    pub parts: Vec<Arc<dyn ProbeOperator>>,
}

impl ProbeOperator for OperatorSum {
    fn tag(&self) -> String {
        self.tag.clone()
    }

    fn sector(&self) -> usize {
        self.parts.first().map(|p| p.sector()).unwrap_or(0)
    }

    fn apply(&self, u: &RadialProfile) -> Result<RadialProfile> {
        let mut acc = RadialProfile::zeros(u.grid());
        let mut decay = f64::INFINITY;
        for p in &self.parts {
            if p.sector() != self.sector() {
                return Err(Error::Precondition("summands act on different sectors".into()));
            }
            let y = p.apply(u)?;
            decay = decay.min(y.decay());
            acc = acc.add(&y)?;
        }
        Ok(acc.with_decay(decay))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeThresholds {
    /// Growth slope of log-ratio against log t over the top three scales.
    pub slope: f64,
    /// max/min ratio across all scales for a bounded verdict.
    pub spread: f64,
}

impl Default for ProbeThresholds {
    fn default() -> Self {
        ProbeThresholds { slope: 0.15, spread: 3.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    Growing,
    Indeterminate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::Growing => "growing",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub operator: String,
    pub p: f64,
    pub scales: Vec<f64>,
    pub ratios: Vec<f64>,
    pub verdict: Verdict,
    pub slope: f64,
    pub spread: f64,
    pub thresholds: ProbeThresholds,
}

impl ProbeReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# operator={} p={} verdict={} slope={:.6e} spread={:.6e} slope_threshold={} spread_threshold={}",
            self.operator,
            self.p,
            self.verdict.as_str(),
            self.slope,
            self.spread,
            self.thresholds.slope,
            self.thresholds.spread
        );
        let _ = writeln!(s, "scale,ratio");
        for (t, r) in self.scales.iter().zip(&self.ratios) {
            let _ = writeln!(s, "{t},{r:.12e}");
        }
        s
    }
}

/// u_t(r) = u(r/t) on the grid of u.
pub fn dilate(u: &RadialProfile, t: f64) -> Result<RadialProfile> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("dilation scale {t} must be positive")));
    }
    let edge = u.interp(u.grid().r_max() / t).norm();
    if edge > 1e-10 * u.max_abs() {
        return Err(Error::Grid(format!("dilate at scale {t} overflows the grid (edge value {edge:.3e})")));
    }
    let p = u.map(|r, _| u.interp(r / t));
    Ok(p.with_decay(u.decay()))
}

fn verdict(scales: &[f64], ratios: &[f64], th: ProbeThresholds) -> (Verdict, f64, f64) {
    let n = ratios.len();
    let top = n.saturating_sub(3);
    let pts: Vec<(f64, f64)> = (top..n).map(|i| (scales[i].ln(), ratios[i].ln())).collect();
    let slope = if pts.len() >= 2 {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    } else {
        0.0
    };
    let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
    let spread = max / min;
    let v = if slope > th.slope {
        Verdict::Growing
    } else if spread < th.spread {
        Verdict::Bounded
    } else {
        Verdict::Indeterminate
    };
    (v, slope, spread)
}

/// Probes several exponents from one set of operator evaluations.
pub fn lp_probe_many(op: &dyn ProbeOperator, ps: &[f64], base: &RadialProfile, scales: &[f64], th: ProbeThresholds) -> Result<Vec<ProbeReport>> {
    if scales.len() < 2 || scales.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("scales must be increasing with at least two entries".into()));
    }
    let ratio = scales[1] / scales[0];
    if scales.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9) {
        return Err(Error::Domain("scales must be geometric".into()));
    }
    let sector = op.sector();
    let mut pairs = Vec::with_capacity(scales.len());
    for &t in scales {
        let ut = dilate(base, t)?;
        let out = op.apply(&ut)?;
        pairs.push((ut, out));
    }
    let mut reports = Vec::with_capacity(ps.len());
    for &p in ps {
        if !(p >= 1.0) {
            return Err(Error::Domain(format!("exponent p={p} must be at least 1")));
        }
        let ratios: Vec<f64> = pairs.iter().map(|(u, y)| lp_norm(y, sector, p) / lp_norm(u, sector, p)).collect();
        let (verdict, slope, spread) = verdict(scales, &ratios, th);
        reports.push(ProbeReport { operator: op.tag(), p, scales: scales.to_vec(), ratios, verdict, slope, spread, thresholds: th });
    }
    Ok(reports)
}

pub fn lp_probe(op: &dyn ProbeOperator, p: f64, base: &RadialProfile, scales: &[f64]) -> Result<ProbeReport> {
    Ok(lp_probe_many(op, &[p], base, scales, ProbeThresholds::default())?.remove(0))
}

/// Geometric scales 1, 2, 4, …, 2^k.
pub fn dyadic_scales(k: u32) -> Vec<f64> {
    (0..=k).map(|i| 2f64.powi(i as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::LogGrid;

    #[test]
    fn identity_is_bounded() {
        let grid = LogGrid::new(1e-3, 1e4, 1024).unwrap();
        let u = RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| (-r * r).exp()).unwrap();
        let rep = lp_probe(&Identity { sector: 0 }, 2.0, &u, &dyadic_scales(6)).unwrap();
        assert_eq!(rep.verdict, Verdict::Bounded);
        assert!(rep.ratios.iter().all(|r| (r - 1.0).abs() < 1e-12));
        assert!(rep.to_csv().starts_with("# operator=identity p=2 verdict=bounded"));
    }

    #[test]
    fn dipole_angular_factor() {
        assert!((angular_lp(1, 2.0) - 4.0 * PI / 3.0).abs() < 1e-14);
        assert!((angular_lp(2, 2.0) - 4.0 * PI / 5.0).abs() < 1e-10);
    }

    #[test]
    fn overflowing_dilate_is_rejected() {
        let grid = LogGrid::new(1e-3, 10.0, 256).unwrap();
        let u = RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| (-r * r).exp()).unwrap();
        assert!(matches!(dilate(&u, 64.0), Err(Error::Grid(_))));
    }
}
