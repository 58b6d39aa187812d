//! The singular low-energy expansion, the singular part Z_s of the wave operator for
//! m = 3 with its K₀ profile, the finite-rank corrections and their constants, and Lᵖ
//! dilation probes.

mod constants;
mod engine;
mod probe;

pub use constants::*;
pub use engine::{SingularPart, DEFAULT_LAMBDA_NODES};
pub use probe::*;

use crate::error::{Error, Result};
use crate::filon::Panels;
use crate::means::{pairing_mean, SphericalMean};
use crate::profile::RadialProfile;
use crate::special::sphere_area;
use crate::threshold::{complement_basis, dj_operator, fractional_integral, CanonicalResonance, Kind, NullElement, PotentialSpec, ThresholdBasis};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Even cutoff with F = 1 on [0, λ₀/2] and F = 0 beyond λ₀, joined by the degree-7
/// smoothstep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub lambda0: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec { lambda0: 0.5 }
    }
}

impl CutoffSpec {
    pub fn new(lambda0: f64) -> Result<Self> {
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(Error::Domain(format!("cutoff edge {lambda0} must be positive")));
        }
        Ok(CutoffSpec { lambda0 })
    }

    fn blend(&self, lambda: f64) -> Option<f64> {
        let half = 0.5 * self.lambda0;
        let x = (lambda.abs() - half) / half;
        if x <= 0.0 {
            None
        } else {
            Some(x.min(1.0))
        }
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        match self.blend(lambda) {
            None => 1.0,
            Some(x) => 1.0 - x.powi(4) * (35.0 - 84.0 * x + 70.0 * x * x - 20.0 * x.powi(3)),
        }
    }

    pub fn derivative(&self, lambda: f64) -> f64 {
        match self.blend(lambda) {
            None => 0.0,
            Some(x) => -140.0 * x.powi(3) * (1.0 - x).powi(3) * (2.0 / self.lambda0) * lambda.signum(),
        }
    }

    /// Uniform nodes on [0, λ₀] containing λ₀/2; the count is rounded up to 1 mod 4.
    pub fn nodes(&self, n: usize) -> Vec<f64> {
        let n = n.max(9);
        let n = n + (4 - (n - 1) % 4) % 4;
        (0..n).map(|i| self.lambda0 * i as f64 / (n - 1) as f64).collect()
    }
}

/// Line transforms Λ_k(λ) = ∫_ℝ e^{−iλr} r^k M(r) dr of a spherical mean sampled on the
/// cutoff support, with the three expressions of K₀.
#[derive(Debug, Clone)]
pub struct K0Plan {
    lambda: Vec<f64>,
    f: Vec<f64>,
    fp: Vec<f64>,
    l0: Vec<Complex64>,
    l1: Vec<Complex64>,
    l2: Vec<Complex64>,
    mass: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct K0Split {
    /// −(i/2π)∫_ℝ M dr, constant in ρ.
    pub boundary: Complex64,
    /// K̃₀(ρ) = −(i/2π)∫₀^∞ (e^{iλρ}F)′ Λ₀ dλ.
    pub remainder: Complex64,
}

impl K0Split {
    pub fn total(&self) -> Complex64 {
        self.boundary + self.remainder
    }
}

impl K0Plan {
    pub fn new(mean: &SphericalMean, cutoff: &CutoffSpec, nodes: usize) -> Result<Self> {
        let lambda = cutoff.nodes(nodes);
        let t0 = mean.line_fourier(0);
        let t1 = mean.line_fourier(1);
        let t2 = mean.line_fourier(2);
        let mut l0 = Vec::with_capacity(lambda.len());
        let mut l1 = Vec::with_capacity(lambda.len());
        let mut l2 = Vec::with_capacity(lambda.len());
        for &l in &lambda {
            l0.push(t0.eval(l)?);
            l1.push(t1.eval(l)?);
            l2.push(t2.eval(l)?);
        }
        let f = lambda.iter().map(|&l| cutoff.eval(l)).collect();
        let fp = lambda.iter().map(|&l| cutoff.derivative(l)).collect();
        Ok(K0Plan { lambda, f, fp, l0, l1, l2, mass: mean.line_moment(0)? })
    }

    fn transform(&self, rho: f64, g: impl Fn(usize) -> Complex64) -> Complex64 {
        let v: Vec<Complex64> = (0..self.lambda.len()).map(g).collect();
        Panels::new(&self.lambda, &v).integrate_exp(rho)
    }

    /// K₀(ρ) = (1/2π)∫₀^∞ e^{iλρ} F(λ) Λ₁(λ) dλ.
    pub fn direct(&self, rho: f64) -> Complex64 {
        self.transform(rho, |k| self.l1[k] * self.f[k]) / (2.0 * PI)
    }

    /// K₀(ρ) = (i/2πρ)∫₀^∞ e^{iλρ}(FΛ₁)′ dλ with Λ₁′ = −iΛ₂.
    pub fn by_parts(&self, rho: f64) -> Result<Complex64> {
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("ρ={rho} must be positive")));
        }
        let v = self.transform(rho, |k| self.l1[k] * self.fp[k] - I * self.l2[k] * self.f[k]);
        Ok(v * I / (2.0 * PI * rho))
    }

    pub fn split(&self, rho: f64) -> K0Split {
        let boundary = -I * self.mass / (2.0 * PI);
        let v = self.transform(rho, |k| self.l0[k] * (I * rho * self.f[k] + self.fp[k]));
        K0Split { boundary, remainder: -I * v / (2.0 * PI) }
    }
}

/// K₀(ρ) by the direct route on the default λ lattice.
pub fn k0_profile(mean: &SphericalMean, cutoff: &CutoffSpec, rho: f64) -> Result<Complex64> {
    Ok(K0Plan::new(mean, cutoff, DEFAULT_LAMBDA_NODES)?.direct(rho))
}

/// (1/π)∫_ℝ M dr, which equals ⟨|D|^{−1}(Vφ), u⟩ when M is the mean of (Vφ) ∗ ǔ.
pub fn boundary_term(mean: &SphericalMean) -> Result<Complex64> {
    Ok(mean.line_moment(0)? / PI)
}

/// Vf with the decay exponents added.
pub fn potential_times(v: &RadialProfile, f: &RadialProfile) -> Result<RadialProfile> {
    let d = v.decay() + f.decay().max(0.0);
    Ok(v.mul(f)?.with_decay(d))
}

/// Threshold data of the first kind: the canonical resonance φ, its coupling
/// a = 4πi|⟨V,φ⟩|^{−2}, Vφ and ψ = |D|^{−1}(Vφ).
#[derive(Debug, Clone)]
pub struct ResonanceData {
    pub potential: RadialProfile,
    pub phi: RadialProfile,
    pub v_phi: RadialProfile,
    pub psi: RadialProfile,
    pub coupling: Complex64,
}

impl ResonanceData {
    pub fn new(v: &PotentialSpec, cr: &CanonicalResonance) -> Result<Self> {
        Self::from_parts(v.potential(), &cr.phi_c, cr.coupling)
    }

    pub fn from_parts(v: &RadialProfile, phi: &RadialProfile, coupling: Complex64) -> Result<Self> {
        v.ensure_same_grid(phi)?;
        let v_phi = potential_times(v, phi)?;
        let psi = fractional_integral(1.0, &v_phi, 3)?;
        Ok(ResonanceData { potential: v.clone(), phi: phi.clone(), v_phi, psi, coupling })
    }

    /// Z_s = −(ia/π)∫₀^∞ G₀(λ)|Vφ⟩⟨Vφ|(G₀(λ) − G₀(−λ))·⟩F(λ)dλ.
    pub fn singular_part(&self, cutoff: CutoffSpec) -> Result<SingularPart> {
        SingularPart::new("Z_s", 0, &self.v_phi, &self.v_phi, -self.coupling, 0, cutoff)
    }

    /// u ↦ aφ⟨ψ, u⟩.
    pub fn correction(&self) -> RankOne {
        RankOne { tag: "a phi(x)psi".into(), sector: 0, left: self.phi.clone(), right: self.psi.clone(), coef: self.coupling }
    }

    /// Z_s + aφ⊗ψ.
    pub fn corrected(&self, cutoff: CutoffSpec) -> Result<OperatorSum> {
        Ok(OperatorSum {
            tag: "Z_s + a phi(x)psi".into(),
            parts: vec![Arc::new(self.singular_part(cutoff)?), Arc::new(self.correction())],
        })
    }

    /// M(r) = M(r, (Vφ) ∗ ǔ).
    pub fn mean(&self, u: &RadialProfile) -> Result<SphericalMean> {
        pairing_mean(&self.v_phi, u, 3)
    }
}

/// Z_s u for radial u and first-kind data.
pub fn apply_zs_m3(u: &RadialProfile, v: &RadialProfile, phi: &RadialProfile, a: Complex64, cutoff: CutoffSpec) -> Result<RadialProfile> {
    ResonanceData::from_parts(v, phi, a)?.singular_part(cutoff)?.apply(u)
}

/// u ↦ aφ⟨ψ, u⟩ with ψ = |D|^{−1}(Vφ).
pub fn rank_one_correction(phi: &RadialProfile, v: &RadialProfile, a: Complex64) -> Result<RankOne> {
    Ok(ResonanceData::from_parts(v, phi, a)?.correction())
}

/// Radial factor rescaled to unit L²(ℝ³) norm of R(r)Y(x̂).
pub fn normalize_l2(f: &RadialProfile, sector: usize) -> Result<RadialProfile> {
    let n = l2_pairing(f, f, sector)?.re.sqrt();
    if !(n > 0.0) {
        return Err(Error::Domain("cannot normalize a vanishing profile".into()));
    }
    Ok(f.scale(Complex64::new(1.0 / n, 0.0)).with_decay(f.decay()))
}

/// Z_{s1,j} = (i/π)∫₀^∞ G₀(λ)|Vφ_j⟩⟨Vφ_j|(G₀(λ) − G₀(−λ))·⟩F(λ)λ^{−1}dλ for an
/// L²-normalized eigenfunction with radial factor `phi`.
pub fn zs1_part(v: &RadialProfile, phi: &RadialProfile, sector: usize, cutoff: CutoffSpec) -> Result<SingularPart> {
    let vphi = potential_times(v, phi)?;
    SingularPart::new(format!("Z_s1[l={sector}]"), sector, &vphi, &vphi, Complex64::new(1.0, 0.0), 1, cutoff)
}

/// Z_{s0,jk} = ia_{jk}∫₀^∞ G₀(λ)|Vφ_j⟩⟨Vφ_k|(G₀(λ) − G₀(−λ))·⟩F(λ)dλ.
pub fn zs0_part(v: &RadialProfile, phi_j: &RadialProfile, phi_k: &RadialProfile, a_jk: f64, sector: usize, cutoff: CutoffSpec) -> Result<SingularPart> {
    let left = potential_times(v, phi_j)?;
    let right = potential_times(v, phi_k)?;
    SingularPart::new(format!("Z_s0[l={sector}]"), sector, &left, &right, Complex64::new(PI * a_jk, 0.0), 0, cutoff)
}

/// Orthogonal projection |φ⟩⟨φ| onto an L²-normalized eigenfunction.
pub fn eigen_projection(phi: &RadialProfile, sector: usize) -> RankOne {
    RankOne { tag: format!("P[l={sector}]"), sector, left: phi.clone(), right: phi.clone(), coef: Complex64::new(1.0, 0.0) }
}

/// Z_{s1} + P for one eigenfunction.
pub fn zs1_corrected(v: &RadialProfile, phi: &RadialProfile, sector: usize, cutoff: CutoffSpec) -> Result<OperatorSum> {
    Ok(OperatorSum {
        tag: format!("Z_s1 + P[l={sector}]"),
        parts: vec![Arc::new(zs1_part(v, phi, sector, cutoff)?), Arc::new(eigen_projection(phi, sector))],
    })
}

/// a_{jk} = π^{−1}⟨φ_j|VD₃V|φ_k⟩ for eigenfunctions of one sector, D₃ with kernel
/// |x − y|²/(24π). Radial factors go through the D₃ quadrature; dipole factors through
/// the vanishing monopole, which leaves −2(∫x₁Vφ_j)(∫x₁Vφ_k)/(24π).
pub fn d3_coupling(v: &RadialProfile, phi_j: &RadialProfile, phi_k: &RadialProfile, sector: usize) -> Result<f64> {
    let fj = potential_times(v, phi_j)?;
    let fk = potential_times(v, phi_k)?;
    let val = match sector {
        0 => {
            let d3 = dj_operator(3, &fk)?;
            let prod = fj.conj().mul(&d3)?.with_decay(fj.decay() + d3.decay().min(0.0));
            4.0 * PI * prod.moment(2.0)?.re
        }
        1 => {
            let dj = fj.moment(3.0)?.re * 4.0 * PI / 3.0;
            let dk = fk.moment(3.0)?.re * 4.0 * PI / 3.0;
            -2.0 * dj * dk / (24.0 * PI)
        }
        l => return Err(Error::Domain(format!("sector {l} coupling not provided"))),
    };
    Ok(val / PI)
}

/// L²-orthonormal eigenfunctions (sector, radial factor) spanning ℰ.
pub fn eigen_basis(tb: &ThresholdBasis) -> Result<Vec<(usize, RadialProfile)>> {
    let mut out = Vec::new();
    let radial: Vec<&NullElement> = tb.elements.iter().filter(|e| e.sector == 0).collect();
    let mut candidates: Vec<RadialProfile> = Vec::new();
    match tb.kind {
        Kind::Generic | Kind::First => {}
        Kind::Second => candidates = radial.iter().map(|e| e.radial.clone()).collect(),
        Kind::Third => {
            let mono: Vec<f64> = radial.iter().map(|e| e.moments.monopole).collect();
            for co in complement_basis(&mono) {
                let mut f = RadialProfile::zeros(radial[0].radial.grid());
                for (p, e) in radial.iter().enumerate() {
                    f = f.add(&e.radial.scale(Complex64::new(co[p], 0.0)))?;
                }
                candidates.push(f.with_decay(2.0));
            }
        }
    }
    let mut done: Vec<RadialProfile> = Vec::new();
    for mut f in candidates {
        for g in &done {
            let c = l2_pairing(g, &f, 0)?;
            f = f.sub(&g.scale(c))?.with_decay(f.decay());
        }
        let g = normalize_l2(&f, 0)?;
        done.push(g);
    }
    out.extend(done.into_iter().map(|g| (0, g)));
    for e in tb.elements.iter().filter(|e| e.sector > 0) {
        out.push((e.sector, normalize_l2(&e.radial, e.sector)?));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankFactor {
    /// PV.
    EigenProjection,
    /// PVD₃VPV.
    EigenDipoleCoupling,
    /// |φ⟩⟨φ|V with the canonical resonance φ.
    Resonance,
    /// |φ⟩⟨φ|V with φ = PV.
    ProjectedPotential,
    /// Vφ ⊗ Vφ with φ = PV.
    PotentialRankOne,
    /// An operator of rank at most the given bound, known only to exist.
    RankAtMost(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Exact(Complex64),
    /// The stored value times ‖φ‖² with φ = PV.
    TimesNormSquared(f64),
    Unknown,
}

/// u ↦ coef·|left⟩⟨right, u⟩ on one angular sector.
#[derive(Debug, Clone)]
pub struct RankOneTerm {
    pub coef: Complex64,
    pub sector: usize,
    pub left: RadialProfile,
    pub right: RadialProfile,
}

#[derive(Debug, Clone)]
pub struct ExpansionTerm {
    pub lambda_power: i32,
    pub log_power: u32,
    pub factor: RankFactor,
    pub coefficient: Coefficient,
    pub label: String,
    pub payload: Option<Vec<RankOneTerm>>,
}

#[derive(Debug, Clone)]
pub struct SingularExpansion {
    pub m: usize,
    pub kind: Kind,
    pub source: &'static str,
    pub terms: Vec<ExpansionTerm>,
}

fn term(lambda_power: i32, log_power: u32, factor: RankFactor, coefficient: Coefficient, label: &str) -> ExpansionTerm {
    ExpansionTerm { lambda_power, log_power, factor, coefficient, label: label.into(), payload: None }
}

/// Singular terms of (1 + G₀(λ)V)^{−1} (of V(1 + G₀(λ)V)^{−1} for even m) as λ → 0.
pub fn singular_expansion(m: usize, tb: &ThresholdBasis, cr: Option<&CanonicalResonance>) -> Result<SingularExpansion> {
    let one = Coefficient::Exact(Complex64::new(1.0, 0.0));
    let kind = tb.kind;
    if m < 3 || m == 4 {
        return Err(Error::Dimension { m, reason: "the expansion is provided for m = 3 and m ≥ 5".into() });
    }
    if m >= 5 && matches!(kind, Kind::First | Kind::Third) {
        return Err(Error::Precondition(format!("threshold kind {kind:?} is impossible for m = {m}, where the null space consists of eigenfunctions")));
    }
    let mut terms = Vec::new();
    let source;
    if m == 3 {
        source = "m = 3 threshold expansion";
        let eig = matches!(kind, Kind::Second | Kind::Third);
        let res = matches!(kind, Kind::First | Kind::Third);
        if eig {
            terms.push(term(-2, 0, RankFactor::EigenProjection, one, "PV/λ²"));
            terms.push(term(-1, 0, RankFactor::EigenDipoleCoupling, Coefficient::Exact(I), "iPVD₃VPV/λ"));
        }
        if res {
            let cr = cr.ok_or_else(|| Error::Precondition("a resonance requires the canonical resonance".into()))?;
            terms.push(term(-1, 0, RankFactor::Resonance, Coefficient::Exact(-cr.coupling), "−(a/λ)|φ⟩⟨φ|V"));
        }
    } else if m % 2 == 1 {
        source = "odd m ≥ 5 threshold expansion";
        if kind != Kind::Generic {
            terms.push(term(-2, 0, RankFactor::EigenProjection, one, "PV/λ²"));
            if m == 5 {
                let a0 = I / (24.0 * PI * PI);
                terms.push(term(-1, 0, RankFactor::ProjectedPotential, Coefficient::Exact(-a0), "−(a₀/λ)|φ⟩⟨φ|V"));
            }
        }
    } else {
        source = "even m ≥ 6 threshold expansion";
        if kind != Kind::Generic {
            terms.push(term(-2, 0, RankFactor::EigenProjection, one, "VPV/λ²"));
            if m == 6 {
                let c = sphere_area(6) / (2.0 * PI).powi(6);
                terms.push(term(0, 1, RankFactor::PotentialRankOne, Coefficient::Exact(Complex64::new(c, 0.0)), "ω₅/(2π)⁶ log λ (Vφ⊗Vφ)"));
                terms.push(term(2, 2, RankFactor::PotentialRankOne, Coefficient::TimesNormSquared(c * c), "(ω₅‖φ‖/(2π)⁶)² λ² log²λ (Vφ⊗Vφ)"));
                terms.push(term(2, 1, RankFactor::RankAtMost(8), Coefficient::Unknown, "λ² log λ F₂"));
            } else if m < 12 {
                terms.push(term(m as i32 - 6, 1, RankFactor::PotentialRankOne, Coefficient::Unknown, "c_m λ^{m−6} log λ (Vφ⊗Vφ)"));
            }
        }
    }
    Ok(SingularExpansion { m, kind, source, terms })
}

impl SingularExpansion {
    /// Fills the grid payloads of the m = 3 terms from the potential.
    pub fn with_payloads(mut self, v: &PotentialSpec, tb: &ThresholdBasis, cr: Option<&CanonicalResonance>) -> Result<Self> {
        if self.m != 3 {
            return Ok(self);
        }
        let vp = v.potential();
        let basis = eigen_basis(tb)?;
        for t in &mut self.terms {
            let mut pay = Vec::new();
            match t.factor {
                RankFactor::EigenProjection => {
                    for (l, phi) in &basis {
                        pay.push(RankOneTerm { coef: Complex64::new(1.0, 0.0), sector: *l, left: phi.clone(), right: potential_times(vp, phi)? });
                    }
                }
                RankFactor::EigenDipoleCoupling => {
                    for (lj, pj) in &basis {
                        for (lk, pk) in &basis {
                            if lj != lk {
                                continue;
                            }
                            let a = d3_coupling(vp, pj, pk, *lj)? * PI;
                            pay.push(RankOneTerm { coef: Complex64::new(a, 0.0), sector: *lj, left: pj.clone(), right: potential_times(vp, pk)? });
                        }
                    }
                }
                RankFactor::Resonance => {
                    let cr = cr.ok_or_else(|| Error::Precondition("a resonance requires the canonical resonance".into()))?;
                    pay.push(RankOneTerm { coef: Complex64::new(1.0, 0.0), sector: 0, left: cr.phi_c.clone(), right: potential_times(vp, &cr.phi_c)? });
                }
                _ => continue,
            }
            t.payload = Some(pay);
        }
        Ok(self)
    }
}
