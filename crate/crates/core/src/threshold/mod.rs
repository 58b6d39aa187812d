//! Zero-energy threshold analysis for −Δ + V on ℝ³ with radial V: the
//! Birman–Schwinger operator 1 + G₀(0)V sector by sector, its null space and
//! classification, the canonical resonance, the operators D_j, Riesz potentials
//! |D|^{−s} and tail fits.

mod shape;
mod tridiag;

pub use shape::{smoothstep, Jet, Shape};
pub use tridiag::Tridiag;

use crate::error::{Error, Result};
use crate::filon::Panels;
use crate::means::{RadialTransform, TrigPlan};
use crate::profile::{LogGrid, RadialProfile};
use crate::special::{binomial, factorial, gamma, sphere_area};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Manufactured { shape: String, sector: usize },
    UserSupplied,
}

/// A real radial potential with decay exponent δ > 2.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    v: RadialProfile,
    provenance: Provenance,
    factor: Option<(usize, RadialProfile)>,
}

impl PotentialSpec {
    pub fn from_profile(v: RadialProfile) -> Result<Self> {
        if !v.is_real(0.0) {
            return Err(Error::Domain("potential must be real".into()));
        }
        if v.decay() <= 2.0 {
            return Err(Error::Decay { found: v.decay(), needed: 2.0 });
        }
        Ok(PotentialSpec { v, provenance: Provenance::UserSupplied, factor: None })
    }

    pub fn zero(grid: &Arc<LogGrid>) -> Self {
        PotentialSpec { v: RadialProfile::zeros(grid).with_decay(f64::INFINITY), provenance: Provenance::UserSupplied, factor: None }
    }

    pub fn potential(&self) -> &RadialProfile {
        &self.v
    }

    pub fn grid(&self) -> &Arc<LogGrid> {
        self.v.grid()
    }

    pub fn decay(&self) -> f64 {
        self.v.decay()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Sector and radial factor of the solution this potential was built from.
    pub fn manufactured_factor(&self) -> Option<(usize, &RadialProfile)> {
        self.factor.as_ref().map(|(l, p)| (*l, p))
    }
}

fn tail_decay(p: &RadialProfile) -> f64 {
    let r = p.radii();
    let n = r.len();
    let start = r.iter().position(|&x| x >= r[n - 1] / 10.0).unwrap_or(0);
    if p.values()[start..].iter().all(|v| v.norm() == 0.0) {
        f64::INFINITY
    } else {
        p.estimate_decay()
    }
}

/// V = Δφ/φ for φ = R(r)·Y_ℓ, so that (−Δ + V)φ = 0.
pub fn manufacture_potential(shape: &Shape, grid: &Arc<LogGrid>) -> Result<PotentialSpec> {
    let mut vals = Vec::with_capacity(grid.len());
    let mut fac = Vec::with_capacity(grid.len());
    for &r in grid.radii() {
        let j = shape.eval(r);
        if !(j.v > 0.0) {
            return Err(Error::Domain(format!("radial factor of {} is not positive at r={r}", shape.label())));
        }
        vals.push(Complex64::new(shape.potential(r), 0.0));
        fac.push(Complex64::new(j.v, 0.0));
    }
    let v0 = RadialProfile::unchecked(grid.clone(), vals, f64::INFINITY)?;
    let delta = tail_decay(&v0);
    if delta <= 2.0 {
        return Err(Error::Decay { found: delta, needed: 2.0 });
    }
    let v = v0.with_decay(delta);
    let f0 = RadialProfile::unchecked(grid.clone(), fac, f64::INFINITY)?;
    let fd = tail_decay(&f0);
    let factor = f0.with_decay(fd);
    Ok(PotentialSpec {
        v,
        provenance: Provenance::Manufactured { shape: shape.label().to_string(), sector: shape.sector() },
        factor: Some((shape.sector(), factor)),
    })
}

/// Measure r² dr on the log grid with the trapezoid weights.
fn radial_measure(grid: &LogGrid) -> Vec<f64> {
    grid.radii().iter().zip(grid.weights()).map(|(r, w)| w * r * r).collect()
}

/// 1 + G₀(0)V restricted to the angular sector ℓ, with sector kernel
/// r_<^ℓ / ((2ℓ+1) r_>^{ℓ+1}).
///
/// The Nyström sum carries the h²/12 correction for the kernel kink on the
/// diagonal, the core below r_min and a power-law tail beyond r_max. Writing
/// K = G·diag(d) with the semiseparable G_ij = a_min(i,j) b_max(i,j), the inverse of G
/// is tridiagonal, so A = G·J with J tridiagonal and every solve is O(N).
#[derive(Debug, Clone)]
pub struct SectorOperator {
    sector: usize,
    grid: Arc<LogGrid>,
    a: Vec<f64>,
    b: Vec<f64>,
    coupling: Vec<f64>,
    correction: Vec<f64>,
    nu: Vec<f64>,
    inv_g: Tridiag,
    j: Tridiag,
    jt: Tridiag,
}

impl SectorOperator {
    pub fn new(v: &RadialProfile, sector: usize) -> Result<Self> {
        let grid = v.grid().clone();
        let r = grid.radii();
        let n = r.len();
        let l = sector as i32;
        let h = grid.step();
        let c = 1.0 / (2 * sector + 1) as f64;
        let a: Vec<f64> = r.iter().map(|x| x.powi(l)).collect();
        let b: Vec<f64> = r.iter().map(|x| x.powi(-l - 1)).collect();
        let mut mu = radial_measure(&grid);
        mu[0] += r[0].powi(3) / (2 * sector + 3) as f64;
        let vv = v.real_values();
        let delta = v.decay();
        if delta.is_finite() && vv[n - 1] != 0.0 {
            let kappa = 2.0 * sector as f64 + delta - 1.0;
            if kappa <= 0.0 {
                return Err(Error::Decay { found: delta, needed: 1.0 - 2.0 * sector as f64 });
            }
            mu[n - 1] += r[n - 1].powi(3) * (1.0 / kappa + kappa * h * h / 12.0);
        }
        let coupling: Vec<f64> = (0..n).map(|i| c * vv[i] * mu[i]).collect();
        let correction: Vec<f64> = (0..n).map(|i| -h * h / 12.0 * vv[i] * r[i] * r[i]).collect();
        let nu: Vec<f64> = radial_measure(&grid).iter().zip(r).map(|(m, x)| m / (1.0 + x * x)).collect();
        let inv_g = green_inverse(r, sector)?;
        let lower: Vec<f64> = (0..n - 1).map(|i| inv_g.lower[i] * (1.0 + correction[i])).collect();
        let upper: Vec<f64> = (0..n - 1).map(|i| inv_g.upper[i] * (1.0 + correction[i + 1])).collect();
        let diag: Vec<f64> = (0..n).map(|i| inv_g.diag[i] * (1.0 + correction[i]) + coupling[i]).collect();
        let j = Tridiag::new(lower, diag, upper)?;
        let jt = j.transpose();
        Ok(SectorOperator { sector, grid, a, b, coupling, correction, nu, inv_g, j, jt })
    }

    pub fn sector(&self) -> usize {
        self.sector
    }

    pub fn grid(&self) -> &Arc<LogGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// G·z through prefix and suffix sums.
    fn green(&self, z: &[f64]) -> Vec<f64> {
        let n = z.len();
        let mut out = vec![0.0; n];
        let mut pre = 0.0;
        for i in 0..n {
            pre += self.a[i] * z[i];
            out[i] = self.b[i] * pre;
        }
        let mut suf = 0.0;
        for i in (0..n).rev() {
            out[i] += self.a[i] * suf;
            suf += self.b[i] * z[i];
        }
        out
    }

    /// A·x on sampled radial factors.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = x.iter().zip(&self.coupling).map(|(a, b)| a * b).collect();
        let g = self.green(&z);
        (0..x.len()).map(|i| x[i] * (1.0 + self.correction[i]) + g[i]).collect()
    }

    /// K·x = (A − 1)·x without the diagonal correction.
    pub fn apply_kernel(&self, x: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = x.iter().zip(&self.coupling).map(|(a, b)| a * b).collect();
        self.green(&z)
    }

    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        self.j.solve(&self.inv_g.mul_vec(y))
    }

    pub fn solve_transpose(&self, y: &[f64]) -> Vec<f64> {
        self.inv_g.mul_vec(&self.jt.solve(y))
    }

    fn weighted_norm(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.nu).map(|(v, w)| v * v * w).sum::<f64>().sqrt()
    }

    /// ‖A·x − y‖/‖x‖ for x = solve(y) on a fixed probe vector: the rounding floor
    /// below which singular values cannot be resolved.
    pub fn solve_floor(&self) -> f64 {
        let y: Vec<f64> = (0..self.len()).map(|i| (0.37 * i as f64).sin() + 0.5).collect();
        let x = self.solve(&y);
        let ax = self.apply(&x);
        let d: Vec<f64> = ax.iter().zip(&y).map(|(a, b)| a - b).collect();
        self.weighted_norm(&d) / self.weighted_norm(&x)
    }

    /// ‖Aφ‖/‖φ‖ in L²(r² dr / ⟨r⟩²).
    pub fn residual(&self, phi: &[f64]) -> f64 {
        self.weighted_norm(&self.apply(phi)) / self.weighted_norm(phi)
    }

    /// The `count` smallest singular values of A in L²(r² dr / ⟨r⟩²) with their right
    /// singular vectors, by subspace iteration on (AᵀA)⁻¹.
    pub fn smallest_singular(&self, count: usize) -> Vec<(f64, Vec<f64>)> {
        let n = self.len();
        let block = (count + 3).min(n);
        let sq: Vec<f64> = self.nu.iter().map(|w| w.sqrt()).collect();
        let op = |x: &[f64]| -> Vec<f64> {
            let y: Vec<f64> = x.iter().zip(&sq).map(|(a, s)| a * s).collect();
            let y = self.solve_transpose(&y);
            let y: Vec<f64> = y.iter().zip(&self.nu).map(|(a, w)| a / w).collect();
            let y = self.solve(&y);
            y.iter().zip(&sq).map(|(a, s)| a * s).collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut x: Vec<Vec<f64>> = (0..block).map(|_| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()).collect();
        orthonormalize(&mut x);
        let mut bx: Vec<Vec<f64>> = x.iter().map(|v| op(v)).collect();
        let mut theta = vec![0.0; block];
        for _ in 0..400 {
            let mut y = bx.clone();
            orthonormalize(&mut y);
            let by: Vec<Vec<f64>> = y.iter().map(|v| op(v)).collect();
            let mut hm = DMatrix::zeros(block, block);
            for p in 0..block {
                for q in 0..block {
                    hm[(p, q)] = dot(&y[p], &by[q]);
                }
            }
            let hm = (&hm + hm.transpose()) * 0.5;
            let eig = SymmetricEigen::new(hm);
            let mut order: Vec<usize> = (0..block).collect();
            order.sort_by(|&p, &q| eig.eigenvalues[q].total_cmp(&eig.eigenvalues[p]));
            let new_theta: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
            x = order.iter().map(|&k| combine(&y, eig.eigenvectors.column(k).as_slice())).collect();
            bx = order.iter().map(|&k| combine(&by, eig.eigenvectors.column(k).as_slice())).collect();
            let settled = (0..count.min(block)).all(|k| (new_theta[k] - theta[k]).abs() <= 1e-12 * new_theta[k].abs());
            theta = new_theta;
            if settled {
                break;
            }
        }
        // the forward residual of each Ritz vector is accurate down to rounding in A,
        // unlike 1/√θ which inherits the conditioning of the solves
        let _ = theta;
        let mut out: Vec<(f64, Vec<f64>)> = (0..count.min(block))
            .map(|k| {
                let phi: Vec<f64> = x[k].iter().zip(&sq).map(|(a, s)| a / s).collect();
                (self.residual(&phi), phi)
            })
            .collect();
        out.sort_by(|p, q| p.0.total_cmp(&q.0));
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(vs: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; vs[0].len()];
    for (v, &w) in vs.iter().zip(c) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += w * x;
        }
    }
    out
}

fn orthonormalize(vs: &mut [Vec<f64>]) {
    for k in 0..vs.len() {
        for _ in 0..2 {
            for p in 0..k {
                let (head, tail) = vs.split_at_mut(k);
                let c = dot(&head[p], &tail[0]);
                for (t, h) in tail[0].iter_mut().zip(&head[p]) {
                    *t -= c * h;
                }
            }
        }
        let nrm = dot(&vs[k], &vs[k]).sqrt();
        if nrm > 0.0 {
            vs[k].iter_mut().for_each(|v| *v /= nrm);
        }
    }
}

/// Tridiagonal inverse of G_ij = a_min(i,j) b_max(i,j) for a = r^ℓ, b = r^{−ℓ−1}.
fn green_inverse(r: &[f64], sector: usize) -> Result<Tridiag> {
    let n = r.len();
    if n < 3 {
        return Err(Error::Grid("need at least three radii".into()));
    }
    let l = sector as i32;
    let p = (2 * sector + 1) as f64;
    let a = |i: usize| r[i].powi(l);
    let b = |i: usize| r[i].powi(-l - 1);
    // Δ_i = a_{i+1}b_i − a_i b_{i+1} = a_i b_{i+1}((r_{i+1}/r_i)^{2ℓ+1} − 1)
    let delta: Vec<f64> = (0..n - 1).map(|i| a(i) * b(i + 1) * (p * (r[i + 1] / r[i]).ln()).exp_m1()).collect();
    let off: Vec<f64> = delta.iter().map(|d| -1.0 / d).collect();
    let mut diag = vec![0.0; n];
    diag[0] = a(1) / (a(0) * delta[0]);
    for i in 1..n - 1 {
        let num = a(i - 1) * b(i + 1) * (p * (r[i + 1] / r[i - 1]).ln()).exp_m1();
        diag[i] = num / (delta[i - 1] * delta[i]);
    }
    diag[n - 1] = b(n - 2) / (b(n - 1) * delta[n - 2]);
    Tridiag::new(off.clone(), diag, off)
}

/// Dense 1 + K in sector ℓ, with the same quadrature as [`SectorOperator`].
pub fn bs_matrix(v: &PotentialSpec, sector: usize) -> Result<DMatrix<f64>> {
    let op = SectorOperator::new(v.potential(), sector)?;
    let n = op.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let g = if i <= j { op.a[i] * op.b[j] } else { op.a[j] * op.b[i] };
            m[(i, j)] = g * op.coupling[j];
        }
        m[(i, i)] += 1.0 + op.correction[i];
    }
    Ok(m)
}

/// Sector kernel r_<^ℓ / ((2ℓ+1) r_>^{ℓ+1}).
pub fn sector_kernel(sector: usize, r: f64, s: f64) -> f64 {
    let (lo, hi) = if r < s { (r, s) } else { (s, r) };
    lo.powi(sector as i32) / ((2 * sector + 1) as f64 * hi.powi(sector as i32 + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Generic,
    First,
    Second,
    Third,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTable {
    /// ⟨V, φ⟩.
    pub monopole: f64,
    /// ⟨x_i V, φ⟩, i = 1, 2, 3.
    pub dipole: [f64; 3],
    pub monopole_error: f64,
    pub dipole_error: f64,
    pub in_e0: bool,
    pub in_e1: bool,
}

/// Integral ∫ V R r^k dr with an error estimate from the half-resolution sum.
fn moment_with_error(v: &RadialProfile, radial: &RadialProfile, k: f64) -> Result<(f64, f64)> {
    let prod: Vec<Complex64> = v.values().iter().zip(radial.values()).map(|(a, b)| a * b).collect();
    let decay = v.decay() + radial.decay().max(0.0);
    let p = RadialProfile::unchecked(v.grid().clone(), prod.clone(), decay)?;
    let full = p.moment(k)?.re;
    let r = v.radii();
    let w = v.grid().weights();
    let plain: f64 = (0..r.len()).map(|i| w[i] * r[i].powf(k) * prod[i].re).sum();
    let half: f64 = (0..r.len()).step_by(2).map(|i| 2.0 * w[i] * r[i].powf(k) * prod[i].re).sum();
    let scale: f64 = (0..r.len()).map(|i| (w[i] * r[i].powf(k) * prod[i].re).abs()).sum();
    Ok((full, (plain - half).abs() + 1e-14 * scale))
}

/// ⟨V, φ⟩ and ⟨x_iV, φ⟩ for φ = R(r)·Y with Y = 1 (ℓ = 0), x̂₁ (ℓ = 1) or
/// P₂(x̂₁) (ℓ = 2); `tol` is the relative size below which a moment counts as zero.
pub fn moments(v: &RadialProfile, sector: usize, radial: &RadialProfile, tol: f64) -> Result<MomentTable> {
    let (mut monopole, mut dipole, mut me, mut de) = (0.0, [0.0; 3], 0.0, 0.0);
    match sector {
        0 => {
            let (val, err) = moment_with_error(v, radial, 2.0)?;
            monopole = 4.0 * PI * val;
            me = 4.0 * PI * err;
        }
        1 => {
            let (val, err) = moment_with_error(v, radial, 3.0)?;
            dipole[0] = 4.0 * PI / 3.0 * val;
            de = 4.0 * PI / 3.0 * err;
        }
        _ => {}
    }
    let zero_m = monopole.abs() <= (5.0 * me).max(tol);
    let zero_d = dipole.iter().all(|d| d.abs() <= (5.0 * de).max(tol));
    Ok(MomentTable { monopole, dipole, monopole_error: me, dipole_error: de, in_e0: zero_m, in_e1: zero_m && zero_d })
}

#[derive(Debug, Clone)]
pub struct NullElement {
    pub sector: usize,
    /// Radial factor, unit norm in L²(r² dr/⟨r⟩²).
    pub radial: RadialProfile,
    pub singular_value: f64,
    pub residual: f64,
    pub moments: MomentTable,
}

impl NullElement {
    pub fn multiplicity(&self) -> usize {
        2 * self.sector + 1
    }

    /// L(φ) = −(1/4π)∫Vφ.
    pub fn l_value(&self) -> f64 {
        -self.moments.monopole / (4.0 * PI)
    }
}

#[derive(Debug, Clone)]
pub struct ThresholdBasis {
    pub elements: Vec<NullElement>,
    pub kind: Kind,
    pub tolerance: f64,
    /// Smallest singular values found in each sector.
    pub sector_spectra: Vec<(usize, Vec<f64>)>,
}

impl ThresholdBasis {
    pub fn dimension(&self) -> usize {
        self.elements.iter().map(|e| e.multiplicity()).sum()
    }

    pub fn l_values(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.l_value()).collect()
    }

    pub fn flags_e0(&self) -> Vec<bool> {
        self.elements.iter().map(|e| e.moments.in_e0).collect()
    }

    pub fn flags_e1(&self) -> Vec<bool> {
        self.elements.iter().map(|e| e.moments.in_e1).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NullOptions {
    pub l_max: usize,
    /// Overrides the tolerance derived from the manufactured-solution residual.
    pub tol: Option<f64>,
    pub candidates: usize,
}

impl Default for NullOptions {
    fn default() -> Self {
        NullOptions { l_max: 2, tol: None, candidates: 3 }
    }
}

/// Residual of a manufactured solution on the grid of `v`: the potential's own
/// factor when it has one, the (1 + r²)^{−1/2} resonance otherwise.
pub fn discretization_residual(v: &PotentialSpec) -> Result<f64> {
    if let Some((l, fac)) = v.manufactured_factor() {
        let op = SectorOperator::new(v.potential(), l)?;
        return Ok(op.residual(&fac.real_values()));
    }
    let probe = manufacture_potential(&Shape::inverse_sqrt(), v.grid())?;
    discretization_residual(&probe)
}

pub fn null_space(v: &PotentialSpec, opts: NullOptions) -> Result<ThresholdBasis> {
    let ops: Vec<SectorOperator> = (0..=opts.l_max).map(|l| SectorOperator::new(v.potential(), l)).collect::<Result<_>>()?;
    let tol = match opts.tol {
        Some(t) => t,
        None => {
            let floor = ops.iter().map(|op| op.solve_floor()).fold(0.0, f64::max);
            (5.0 * discretization_residual(v)?).max(10.0 * floor).max(1e-13)
        }
    };
    let mut elements = Vec::new();
    let mut spectra = Vec::new();
    for op in &ops {
        let sector = op.sector();
        let pairs = op.smallest_singular(opts.candidates);
        let cluster: Vec<f64> = pairs.iter().map(|p| p.0).filter(|&s| s > tol && s < 10.0 * tol).collect();
        if !cluster.is_empty() {
            return Err(Error::Ambiguity { tol, cluster });
        }
        spectra.push((sector, pairs.iter().map(|p| p.0).collect()));
        for (sigma, phi) in pairs.into_iter().filter(|p| p.0 <= tol) {
            let residual = op.residual(&phi);
            let mut prof = RadialProfile::unchecked(v.grid().clone(), phi.iter().map(|&x| Complex64::new(x, 0.0)).collect(), f64::INFINITY)?;
            let d = tail_decay(&prof);
            prof = prof.with_decay(d);
            let mut mt = moments(v.potential(), sector, &prof, 0.0)?;
            let sign = match sector {
                0 if !mt.in_e0 => -mt.monopole.signum(),
                1 if !mt.in_e1 => mt.dipole[0].signum() * -1.0,
                _ => {
                    let k = phi.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|x| x.0).unwrap_or(0);
                    phi[k].signum()
                }
            };
            if sign < 0.0 {
                prof = prof.scale(Complex64::new(-1.0, 0.0));
                mt = moments(v.potential(), sector, &prof, 0.0)?;
            }
            elements.push(NullElement { sector, radial: prof, singular_value: sigma, residual, moments: mt });
        }
    }
    let dim: usize = elements.iter().map(|e| e.multiplicity()).sum();
    let resonant = elements.iter().any(|e| e.sector == 0 && !e.moments.in_e0);
    let kind = if dim == 0 {
        Kind::Generic
    } else if !resonant {
        Kind::Second
    } else if dim == 1 {
        Kind::First
    } else {
        Kind::Third
    };
    Ok(ThresholdBasis { elements, kind, tolerance: tol, sector_spectra: spectra })
}

/// Cosine similarity of two radial factors in L²(r² dr/⟨r⟩²).
pub fn cosine_similarity(a: &RadialProfile, b: &RadialProfile) -> Result<f64> {
    a.ensure_same_grid(b)?;
    let nu: Vec<f64> = radial_measure(a.grid()).iter().zip(a.radii()).map(|(m, r)| m / (1.0 + r * r)).collect();
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for i in 0..nu.len() {
        let (x, y) = (a.values()[i].re, b.values()[i].re);
        ab += nu[i] * x * y;
        aa += nu[i] * x * x;
        bb += nu[i] * y * y;
    }
    Ok(ab / (aa * bb).sqrt())
}

#[derive(Debug, Clone)]
pub struct CanonicalResonance {
    /// Radial resonance ψ with −(Vψ,ψ) = 1, −(Vψ,φ) = 0 on ℰ and L(ψ) > 0.
    pub psi: RadialProfile,
    /// φ_c = ψ + PVD₂Vψ.
    pub phi_c: RadialProfile,
    /// 4πi|⟨V,φ_c⟩|^{−2}.
    pub coupling: Complex64,
    pub l_value: f64,
}

/// −(Vf, g) = −4π∫V f g r² dr for radial f, g.
pub fn v_form(v: &RadialProfile, f: &RadialProfile, g: &RadialProfile) -> Result<f64> {
    let fg = f.mul(g)?.with_decay(f.decay().max(0.0) + g.decay().max(0.0));
    let (val, _) = moment_with_error(v, &fg, 2.0)?;
    Ok(-4.0 * PI * val)
}

fn l2_radial(f: &RadialProfile, g: &RadialProfile) -> Result<f64> {
    let fg = f.mul(g)?.with_decay(f.decay().max(0.0) + g.decay().max(0.0));
    Ok(4.0 * PI * fg.moment(2.0)?.re)
}

pub fn canonical_resonance(tb: &ThresholdBasis, v: &PotentialSpec) -> Result<CanonicalResonance> {
    if matches!(tb.kind, Kind::Generic | Kind::Second) {
        return Err(Error::NoResonance(format!("threshold kind is {:?}", tb.kind)));
    }
    let vp = v.potential();
    let radial: Vec<&NullElement> = tb.elements.iter().filter(|e| e.sector == 0).collect();
    let k = radial.len();
    let mono: Vec<f64> = radial.iter().map(|e| e.moments.monopole).collect();
    let mut q = DMatrix::zeros(k, k);
    for p in 0..k {
        for s in 0..k {
            q[(p, s)] = v_form(vp, &radial[p].radial, &radial[s].radial)?;
        }
    }
    // Q-orthogonality to the kernel of the monopole functional: c ∝ Q⁻¹m
    let c = q.clone().lu().solve(&nalgebra::DVector::from_vec(mono.clone())).ok_or_else(|| Error::Domain("−(V·,·) degenerate on the null space".into()))?;
    let mut psi = RadialProfile::zeros(v.grid());
    for (p, e) in radial.iter().enumerate() {
        psi = psi.add(&e.radial.scale(Complex64::new(c[p], 0.0)))?;
    }
    psi = psi.with_decay(radial.iter().map(|e| e.radial.decay()).fold(f64::INFINITY, f64::min));
    let norm = v_form(vp, &psi, &psi)?;
    if !(norm > 0.0) {
        return Err(Error::Domain("−(Vψ,ψ) is not positive".into()));
    }
    psi = psi.scale(Complex64::new(1.0 / norm.sqrt(), 0.0));
    let l_of = |f: &RadialProfile| -> Result<f64> { Ok(-moments(vp, 0, f, 0.0)?.monopole / (4.0 * PI)) };
    if l_of(&psi)? < 0.0 {
        psi = psi.scale(Complex64::new(-1.0, 0.0));
    }
    // eigenfunctions in the radial sector, L²-orthonormalized
    let mut eig: Vec<RadialProfile> = Vec::new();
    if k > 1 {
        let comp = complement_basis(&mono);
        for co in comp {
            let mut f = RadialProfile::zeros(v.grid());
            for (p, e) in radial.iter().enumerate() {
                f = f.add(&e.radial.scale(Complex64::new(co[p], 0.0)))?;
            }
            f = f.with_decay(2.0);
            for g in &eig {
                let proj = l2_radial(g, &f)?;
                f = f.sub(&g.scale(Complex64::new(proj, 0.0)))?.with_decay(2.0);
            }
            let nrm = l2_radial(&f, &f)?.sqrt();
            eig.push(f.scale(Complex64::new(1.0 / nrm, 0.0)).with_decay(2.0));
        }
    }
    let mut phi_c = psi.clone();
    if !eig.is_empty() {
        if v.decay() <= 3.5 {
            return Err(Error::Decay { found: v.decay(), needed: 3.5 });
        }
        let vpsi = vp.mul(&psi)?.with_decay(v.decay() + psi.decay().max(0.0));
        let d2 = dj_operator(2, &vpsi)?;
        let w = vp.mul(&d2)?.with_decay(v.decay() + d2.decay().min(0.0));
        for e in &eig {
            let proj = l2_radial(e, &w)?;
            phi_c = phi_c.add(&e.scale(Complex64::new(proj, 0.0)))?;
        }
        phi_c = phi_c.with_decay(psi.decay());
    }
    let mono_c = moments(vp, 0, &phi_c, 0.0)?.monopole;
    let coupling = Complex64::new(0.0, 4.0 * PI / (mono_c * mono_c));
    let l_value = l_of(&psi)?;
    Ok(CanonicalResonance { psi, phi_c, coupling, l_value })
}

/// Orthonormal basis of the Euclidean complement of m.
pub(crate) fn complement_basis(m: &[f64]) -> Vec<Vec<f64>> {
    let k = m.len();
    let mut vs: Vec<Vec<f64>> = vec![m.to_vec()];
    for i in 0..k {
        let mut e = vec![0.0; k];
        e[i] = 1.0;
        vs.push(e);
    }
    orthonormalize(&mut vs);
    vs.into_iter().skip(1).filter(|v| dot(v, v) > 0.5).take(k - 1).collect()
}

/// D_j u(x) = (1/(4π j!))∫|x − y|^{j−1}u(y)dy for radial u on ℝ³.
pub fn dj_operator(j: usize, u: &RadialProfile) -> Result<RadialProfile> {
    if j > 3 {
        return Err(Error::Domain(format!("D_{j} is not provided")));
    }
    let r = u.radii();
    let n = j + 1;
    let pref = 1.0 / (factorial(j) * (j + 1) as f64 * 2.0);
    let mut acc = vec![Complex64::new(0.0, 0.0); r.len()];
    let decay_err = |_| Error::Domain(format!("D_{j} needs decay above {}", j + 2));
    for k in (1..=n).step_by(2) {
        let coef = 2.0 * binomial(n, k);
        let inner = u.cumulative_moment((1 + k) as f64);
        let outer = u.tail_cumulative_moment((1 + n - k) as f64).map_err(decay_err)?;
        for i in 0..r.len() {
            acc[i] += (inner[i] * r[i].powi((n - k) as i32) + outer[i] * r[i].powi(k as i32)) * coef;
        }
    }
    for i in 0..r.len() {
        acc[i] *= pref / r[i];
    }
    let out = RadialProfile::unchecked(u.grid().clone(), acc, f64::INFINITY)?;
    let d = tail_decay(&out);
    Ok(out.with_decay(d))
}

/// Riesz kernel constant Γ((m−s)/2)/(2^s π^{m/2} Γ(s/2)).
pub fn riesz_constant(s: f64, m: usize) -> f64 {
    let mf = m as f64;
    gamma((mf - s) / 2.0) / (2f64.powf(s) * PI.powf(mf / 2.0) * gamma(s / 2.0))
}

/// |D|^{−s}u = c_{m,s}∫|x − y|^{s−m}u(y)dy for radial u, through the radial Fourier
/// transform: |D|^{−s}u(σ) = (2π²σ)^{−1}∫₀^∞ sin(ρσ)ρ^{1−s}û(ρ)dρ when m = 3.
pub fn fractional_integral(s: f64, u: &RadialProfile, m: usize) -> Result<RadialProfile> {
    let mf = m as f64;
    if !(s > 0.0 && s < mf) {
        return Err(Error::Domain(format!("order s={s} outside (0, {m})")));
    }
    if u.decay() <= s {
        return Err(Error::Decay { found: u.decay(), needed: s });
    }
    let grid = u.grid();
    let forward: Box<dyn Fn(f64) -> Result<Complex64>> = if m == 3 {
        let plan = TrigPlan::new(u, 1);
        Box::new(move |rho| Ok(plan.sin(rho)? * (4.0 * PI / rho)))
    } else {
        let t = RadialTransform::new(u, m)?;
        Box::new(move |rho| t.eval(rho))
    };
    let rho_lo = 1e-3 / grid.r_max();
    // band edge: last octave where ρ^{m−1−s}|û| is not negligible
    let cap = PI / grid.r_min();
    let mut probes = Vec::new();
    let mut rho = rho_lo;
    while rho < cap {
        probes.push((rho, forward(rho)?.norm() * rho.powf(mf - 1.0 - s)));
        rho *= 2.0;
    }
    let peak = probes.iter().map(|p| p.1).fold(0.0, f64::max);
    let last = probes.iter().rposition(|p| p.1 > 1e-13 * peak).unwrap_or(0);
    let rho_hi = (probes[last].0 * 4.0).min(cap).max(64.0f64.min(cap));
    let count = ((rho_hi / rho_lo).ln() / grid.step()).ceil() as usize + 1;
    let rgrid = LogGrid::new(rho_lo, rho_hi, count.max(512))?;
    let rr = rgrid.radii();
    let mut g = Vec::with_capacity(rr.len());
    for &x in rr {
        g.push(forward(x)? * x.powf(if m == 3 { 1.0 - s } else { -s }));
    }
    let out: Vec<Complex64> = if m == 3 {
        let re: Vec<f64> = g.iter().map(|z| z.re).collect();
        let im: Vec<f64> = g.iter().map(|z| z.im).collect();
        let pre = Panels::from_real(rr, &re);
        let pim = if im.iter().any(|&x| x != 0.0) { Some(Panels::from_real(rr, &im)) } else { None };
        // head below ρ_lo against the local power law cρ^q
        let q = (g[1].norm() / g[0].norm()).ln() / (rr[1] / rr[0]).ln();
        let q = if q.is_finite() { q } else { 0.0 };
        let c = g[0] / rr[0].powf(q);
        grid.radii()
            .iter()
            .map(|&sig| {
                let mut v = Complex64::new(pre.integrate_exp(sig).im, pim.as_ref().map(|p| p.integrate_exp(sig).im).unwrap_or(0.0));
                v += c * sine_power_head(q, rho_lo, sig);
                v / (2.0 * PI * PI * sig)
            })
            .collect()
    } else {
        let prof = RadialProfile::unchecked(rgrid.clone(), g, f64::INFINITY)?;
        let t = RadialTransform::new(&prof, m)?;
        let norm = (2.0 * PI).powi(-(m as i32));
        grid.radii().iter().map(|&sig| t.eval(sig).map(|v| v * norm)).collect::<Result<_>>()?
    };
    RadialProfile::unchecked(grid.clone(), out, mf - s)
}

/// ∫₀^ε ρ^q sin(σρ) dρ by its power series, q > −2.
fn sine_power_head(q: f64, eps: f64, sigma: f64) -> f64 {
    let x = sigma * eps;
    let mut term = sigma * eps.powf(q + 2.0);
    let mut acc = 0.0;
    for k in 0..60 {
        let kf = k as f64;
        acc += term / (q + 2.0 * kf + 2.0);
        term *= -x * x / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
        if term.abs() < 1e-18 * acc.abs() {
            break;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticFit {
    /// Coefficient of r^{−p}.
    pub leading: f64,
    /// Coefficient of r^{−p−1}.
    pub next: f64,
    pub leading_power: f64,
    /// RMS residual relative to the RMS of the data on the fitted decade.
    pub residual: f64,
}

/// Least squares φ ≈ α r^{−p} + β r^{−p−1} on the last decade of the grid.
pub fn fit_tail(phi: &RadialProfile, p: f64) -> Result<AsymptoticFit> {
    let r = phi.radii();
    let n = r.len();
    let start = r.iter().position(|&x| x >= r[n - 1] / 10.0).unwrap_or(0);
    let (mut s11, mut s12, mut s22, mut b1, mut b2, mut yy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    // rows scaled by r^p so both basis functions stay O(1)
    for i in start..n {
        let y = phi.values()[i].re * r[i].powf(p);
        let (f1, f2) = (1.0, 1.0 / r[i]);
        s11 += f1 * f1;
        s12 += f1 * f2;
        s22 += f2 * f2;
        b1 += f1 * y;
        b2 += f2 * y;
        yy += y * y;
    }
    let det = s11 * s22 - s12 * s12;
    let alpha = (b1 * s22 - b2 * s12) / det;
    let beta = (s11 * b2 - s12 * b1) / det;
    let mut res = 0.0;
    for i in start..n {
        let y = phi.values()[i].re * r[i].powf(p);
        let e = y - alpha - beta / r[i];
        res += e * e;
    }
    let residual = if yy > 0.0 { (res / yy).sqrt() } else { 0.0 };
    Ok(AsymptoticFit { leading: alpha, next: beta, leading_power: p, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticReport {
    pub fit: AsymptoticFit,
    /// Leading coefficient predicted from the moments of Vφ.
    pub predicted: f64,
}

/// Tail of a null element: α r^{−(m−2+ℓ)} + β r^{−(m−1+ℓ)} with α predicted by
/// −C₀⟨V,φ⟩ for ℓ = 0 and by −ω_{m−1}^{−1}⟨x₁V,φ⟩ for ℓ = 1 (m = 3).
pub fn fit_asymptotics(element: &NullElement, max_residual: f64) -> Result<AsymptoticReport> {
    let m = 3.0;
    let omega = sphere_area(3);
    let (p, predicted) = match element.sector {
        0 => (m - 2.0, -element.moments.monopole / ((m - 2.0) * omega)),
        1 => (m - 1.0, -element.moments.dipole[0] / omega),
        l => (m - 2.0 + l as f64, 0.0),
    };
    let fit = fit_tail(&element.radial, p)?;
    if fit.residual > max_residual {
        return Err(Error::Asymptotics(format!("fit residual {:.3e} above {:.3e}", fit.residual, max_residual)));
    }
    Ok(AsymptoticReport { fit, predicted })
}

/// Tail of |D|^{−1}u: leading constant (πω_{m−2})^{−1}∫u against r^{−(m−1)}.
pub fn fit_fractional_tail(u: &RadialProfile, psi: &RadialProfile, m: usize, max_residual: f64) -> Result<AsymptoticReport> {
    let total = u.moment(m as f64 - 1.0)?.re * sphere_area(m);
    let predicted = total / (PI * sphere_area(m - 1));
    let fit = fit_tail(psi, m as f64 - 1.0)?;
    if fit.residual > max_residual {
        return Err(Error::Asymptotics(format!("fit residual {:.3e} above {:.3e}", fit.residual, max_residual)));
    }
    Ok(AsymptoticReport { fit, predicted })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn green_inverse_is_exact() {
        let grid = LogGrid::new(0.1, 10.0, 16).unwrap();
        let r = grid.radii();
        for l in 0..3 {
            let t = green_inverse(r, l).unwrap();
            let n = r.len();
            let g = DMatrix::from_fn(n, n, |i, j| {
                let (lo, hi) = (i.min(j), i.max(j));
                r[lo].powi(l as i32) * r[hi].powi(-(l as i32) - 1)
            });
            let mut td = DMatrix::zeros(n, n);
            for i in 0..n {
                td[(i, i)] = t.diag[i];
                if i + 1 < n {
                    td[(i + 1, i)] = t.lower[i];
                    td[(i, i + 1)] = t.upper[i];
                }
            }
            let prod = &g * &td;
            assert!((prod - DMatrix::identity(n, n)).amax() < 1e-9, "l={l}");
        }
    }

    #[test]
    fn fast_operator_matches_dense() {
        let grid = LogGrid::new(1e-2, 1e2, 64).unwrap();
        let v = manufacture_potential(&Shape::inverse_sqrt(), &grid).unwrap();
        for l in 0..2 {
            let dense = bs_matrix(&v, l).unwrap();
            let op = SectorOperator::new(v.potential(), l).unwrap();
            let x: Vec<f64> = (0..64).map(|i| (0.3 * i as f64).cos()).collect();
            let y = op.apply(&x);
            let yd = &dense * nalgebra::DVector::from_vec(x.clone());
            for i in 0..64 {
                assert!((y[i] - yd[i]).abs() < 1e-11 * yd.amax());
            }
            let back = op.apply(&op.solve(&x));
            for i in 0..64 {
                assert!((back[i] - x[i]).abs() < 1e-7, "l={l} i={i}");
            }
            let bt = dense.transpose() * nalgebra::DVector::from_vec(op.solve_transpose(&x));
            for i in 0..64 {
                assert!((bt[i] - x[i]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn head_series() {
        // ∫₀^ε sin(σρ)/ρ dρ = Si(σε) ≈ σε for small σε
        let v = sine_power_head(-1.0, 1e-3, 2.0);
        assert!((v - (2e-3 - (2e-3f64).powi(3) / 18.0)).abs() < 1e-15);
    }
}
