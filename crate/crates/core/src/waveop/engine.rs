//! Low-energy operators (i/π)∫₀^∞ G₀(λ)|f⟩⟨g|(G₀(λ) − G₀(−λ))u⟩ c F(λ) λ^{−k} dλ on
//! radial factors, evaluated through the line transform
//! J(ρ) = ∫₀^∞ (e^{iλρ} − 1) q(λ) dλ and the shell identity for radial
//! convolutions on ℝ³.

use super::CutoffSpec;
use crate::error::{Error, Result};
use crate::filon::Panels;
use crate::means::TrigPlan;
use crate::profile::{LogGrid, RadialProfile};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub const DEFAULT_LAMBDA_NODES: usize = 1025;

/// Quintic Hermite interpolation on [0, 1] from values and two derivatives at both ends;
/// the derivatives are pre-scaled by the interval length.
fn hermite5(a: &[Complex64; 3], b: &[Complex64; 3], h: f64, t: f64) -> Complex64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
    a[0] * h0 + a[1] * (h * h1) + a[2] * (h * h * h2) + b[0] * h3 + b[1] * (h * h4) + b[2] * (h * h * h5)
}

/// J(ρ) and its derivative W(ρ) = ∫ iλ e^{iλρ} q dλ tabulated on a uniform-then-geometric
/// lattice in ρ. The content is band-limited to the cutoff support, so a spacing of a
/// quarter period keeps the quintic Hermite error near 1e−8.
pub(crate) struct LineTable {
    nodes: Vec<f64>,
    delta: f64,
    n_uniform: usize,
    rho_u: f64,
    kappa: f64,
    jw: Vec<[Complex64; 3]>,
    w: Vec<[Complex64; 3]>,
}

impl LineTable {
    pub(crate) fn new(lambda: &[f64], q: &[Complex64], lambda0: f64, rho_max: f64) -> Self {
        let moment = |k: u32| -> Panels {
            let v: Vec<Complex64> = lambda.iter().zip(q).map(|(&l, &x)| x * (I * l).powu(k)).collect();
            Panels::new(lambda, &v)
        };
        let p: Vec<Panels> = (0..4).map(moment).collect();
        let total = p[0].integrate();
        let delta = 0.25 / lambda0;
        let rho_u = 200.0 / lambda0;
        let kappa = 0.01;
        let n_uniform = (rho_u / delta).round() as usize + 1;
        let mut nodes: Vec<f64> = (0..n_uniform).map(|i| i as f64 * delta).collect();
        let mut k = 1;
        while *nodes.last().unwrap() < rho_max {
            nodes.push(rho_u * (k as f64 * kappa).exp());
            k += 1;
        }
        let mut jw = Vec::with_capacity(nodes.len());
        let mut w = Vec::with_capacity(nodes.len());
        for &rho in &nodes {
            let e: Vec<Complex64> = p.iter().map(|pk| pk.integrate_exp(rho)).collect();
            jw.push([e[0] - total, e[1], e[2]]);
            w.push([e[1], e[2], e[3]]);
        }
        LineTable { nodes, delta, n_uniform, rho_u, kappa, jw, w }
    }

    fn locate(&self, rho: f64) -> (usize, f64, f64) {
        let last = self.nodes.len() - 2;
        let i = if rho < self.rho_u {
            ((rho / self.delta) as usize).min(self.n_uniform - 2)
        } else {
            (self.n_uniform - 1 + ((rho / self.rho_u).ln() / self.kappa) as usize).min(last)
        };
        let h = self.nodes[i + 1] - self.nodes[i];
        (i, h, (rho - self.nodes[i]) / h)
    }

    pub(crate) fn jw(&self, rho: f64) -> Complex64 {
        let (i, h, t) = self.locate(rho);
        hermite5(&self.jw[i], &self.jw[i + 1], h, t)
    }

    pub(crate) fn w(&self, rho: f64) -> Complex64 {
        let (i, h, t) = self.locate(rho);
        hermite5(&self.w[i], &self.w[i + 1], h, t)
    }
}

/// Radial factor of the sector-ℓ function after the reduction f(r)x̂₁ = ∂₁F(|x|),
/// F(r) = −∫_r^∞ f; the identity for ℓ = 0.
pub(crate) fn reduce(f: &RadialProfile, sector: usize) -> Result<RadialProfile> {
    match sector {
        0 => Ok(f.clone()),
        1 => {
            if f.decay() <= 1.0 {
                return Err(Error::Decay { found: f.decay(), needed: 1.0 });
            }
            let tail = f.tail_cumulative_moment(0.0)?;
            let vals = tail.into_iter().map(|v| -v).collect();
            Ok(RadialProfile::unchecked(f.grid().clone(), vals, f.decay() - 1.0)?)
        }
        l => Err(Error::Domain(format!("sector {l} is not supported by the low-energy engine"))),
    }
}

/// û(λ) on ℝ³ at every node.
fn transform(f: &RadialProfile, lambda: &[f64]) -> Result<Vec<Complex64>> {
    let plan = TrigPlan::new(f, 1);
    lambda
        .iter()
        .map(|&l| if l == 0.0 { Ok(f.moment(2.0)? * (4.0 * PI)) } else { Ok(plan.sin(l)? * (4.0 * PI / l)) })
        .collect()
}

/// u ↦ coef·(i/π)∫₀^∞ G₀(λ)|f⟩⟨g|(G₀(λ) − G₀(−λ))u⟩ F(λ) λ^{−k} dλ with f, g and u in the
/// same angular sector (Y = 1 or x̂₁).
#[derive(Debug, Clone)]
pub struct SingularPart {
    tag: String,
    sector: usize,
    grid: Arc<LogGrid>,
    /// w_j s_j f_j of the reduced left payload.
    left: Vec<Complex64>,
    /// s_j f_j, for the kink correction on the diagonal.
    kink: Vec<Complex64>,
    right_hat: Vec<Complex64>,
    lambda: Vec<f64>,
    cutoff: CutoffSpec,
    coef: Complex64,
    inverse_power: u32,
}

impl SingularPart {
    pub fn new(
        tag: impl Into<String>,
        sector: usize,
        left: &RadialProfile,
        right: &RadialProfile,
        coef: Complex64,
        inverse_power: u32,
        cutoff: CutoffSpec,
    ) -> Result<Self> {
        left.ensure_same_grid(right)?;
        let lambda = cutoff.nodes(DEFAULT_LAMBDA_NODES);
        let lr = reduce(left, sector)?;
        let rr = reduce(right, sector)?;
        let w = lr.grid().weights();
        let left_w = lr.values().iter().zip(lr.radii()).zip(w).map(|((v, s), w)| v * (s * w)).collect();
        let kink = lr.values().iter().zip(lr.radii()).map(|(v, s)| v * s).collect();
        let right_hat = transform(&rr, &lambda)?.into_iter().map(|z| z.conj()).collect();
        if sector == 0 && inverse_power > 0 {
            // λ^{−k} needs ĝ(λ) = O(λ^k) at the origin
            let g0 = rr.moment(2.0)?.norm() * 4.0 * PI;
            let scale = rr.values().iter().zip(rr.radii()).zip(w).map(|((v, s), w)| v.norm() * s * s * w).sum::<f64>() * 4.0 * PI;
            if g0 > 1e-8 * scale {
                return Err(Error::Precondition(format!("payload has a nonzero monopole {g0:.3e} against λ^(-{inverse_power})")));
            }
        }
        Ok(SingularPart { tag: tag.into(), sector, grid: left.grid().clone(), left: left_w, kink, right_hat, lambda, cutoff, coef, inverse_power })
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn sector(&self) -> usize {
        self.sector
    }

    pub fn cutoff(&self) -> &CutoffSpec {
        &self.cutoff
    }

    /// q(λ) = w(λ)/(iλ) where w is the spectral weight against G₀(λ)f.
    pub(crate) fn spectral_density(&self, u: &RadialProfile) -> Result<Vec<Complex64>> {
        let ur = reduce(u, self.sector)?;
        let uh = transform(&ur, &self.lambda)?;
        let (shift, denom) = if self.sector == 0 { (0i32, 2.0 * PI) } else { (2i32, 6.0 * PI) };
        let e = shift - self.inverse_power as i32;
        let mut q: Vec<Complex64> = self
            .lambda
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let pow = if l == 0.0 { if e == 0 { 1.0 } else { 0.0 } } else { l.powi(e) };
                self.coef * self.right_hat[k] * uh[k] * (self.cutoff.eval(l) * pow / denom)
            })
            .collect();
        if e < 0 {
            q[0] = q[1] * 3.0 - q[2] * 3.0 + q[3];
        }
        Ok(q)
    }

    pub fn apply(&self, u: &RadialProfile) -> Result<RadialProfile> {
        if !u.grid().same_as(&self.grid) {
            return Err(Error::Grid("input lives on a different grid".into()));
        }
        let q = self.spectral_density(u)?;
        let r = self.grid.radii();
        let table = LineTable::new(&self.lambda, &q, self.cutoff.lambda0, 2.0 * self.grid.r_max() * (1.0 + 1e-9));
        let active: Vec<(f64, Complex64)> = r.iter().zip(&self.left).filter(|(_, w)| **w != ZERO).map(|(s, w)| (*s, *w)).collect();
        let pre = I / (2.0 * PI);
        let h = self.grid.step();
        let w0 = table.w(0.0);
        let n = r.len();
        let out: Vec<Complex64> = r
            .iter()
            .enumerate()
            .map(|(i, &ri)| {
                let mut acc = ZERO;
                let mut dacc = ZERO;
                for &(s, w) in &active {
                    acc += w * (table.jw(ri + s) - table.jw((ri - s).abs()));
                    if self.sector == 1 {
                        let d = ri - s;
                        let inner = if d > 0.0 { table.w(d) } else if d < 0.0 { -table.w(-d) } else { ZERO };
                        dacc += w * (table.w(ri + s) - inner);
                    }
                }
                // trapezoid in ln s across the kink of J(|r − s|) and the jump of sgn(r − s)W(|r − s|)
                if i > 0 && i + 1 < n {
                    let a = self.kink[i];
                    let da = (self.kink[i + 1] - self.kink[i - 1]) / (r[i + 1].ln() - r[i - 1].ln());
                    let c = h * h / 12.0;
                    acc -= c * 2.0 * ri * ri * a * w0;
                    if self.sector == 1 {
                        dacc += c * 2.0 * w0 * (ri * da + ri * a);
                    }
                }
                let value = pre * acc / ri;
                if self.sector == 0 {
                    value
                } else {
                    -value / ri + pre * dacc / ri
                }
            })
            .collect();
        let p = RadialProfile::unchecked(self.grid.clone(), out, f64::INFINITY)?;
        let d = p.estimate_decay();
        Ok(p.with_decay(d))
    }
}
