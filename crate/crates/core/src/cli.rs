//! Batch front-end: constant suites, kernel and representation cross-checks, threshold
//! classification of potential files and Lᵖ dilation probes.

use crate::error::{Error, Result};
use crate::kernels::{c0_c1_identity_exact, eval_kernel_even, eval_kernel_general, eval_kernel_odd, superposition_functional, KernelOptions};
use crate::means::{pairing_representation, pairing_representation_even, pairing_spectral};
use crate::profile::{LogGrid, ProfileHeader, RadialProfile};
use crate::special::{binomial, factorial, rational_to_f64};
use crate::threshold::{canonical_resonance, fit_asymptotics, manufacture_potential, null_space, Kind, NullOptions, PotentialSpec, Shape};
use crate::waveop::{
    dm_constant, dmj_constants, dyadic_scales, eigen_basis, lp_probe_many, shin_identity, tilde_dm_odd, zs1_corrected, zs1_part, CutoffSpec, Identity,
    ProbeOperator, ProbeThresholds, ResonanceData, Verdict,
};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const GRID_ENV: &str = "THRESHSCATTER_GRID_N";
const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Parser)]
#[command(name = "threshscatter", version, about = "Threshold scattering checks and probes")]
pub struct Cli {
    /// Directory for report files; the JSON summary goes to stdout otherwise.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// D_m, D_{m,j}, the closed-form integral and the kernel coefficient identities.
    Constants {
        #[arg(long)]
        m: usize,
    },
    /// Closed-form or superposition kernels against the general integral.
    KernelCheck {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Threshold classification of a potential file.
    Threshold {
        #[arg(long)]
        potential: PathBuf,
        #[arg(long)]
        expect_kind: Option<KindArg>,
    },
    /// Lᵖ dilation probe of one operator.
    Probe {
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long)]
        operator: OperatorTag,
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
        #[arg(long)]
        potential: Option<PathBuf>,
        #[arg(long)]
        expect: Option<VerdictArg>,
        #[arg(long)]
        base_width: Option<f64>,
    },
    /// Representation formulas against the spectral pairing on Gaussian pairs.
    Representation {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Writes a manufactured m = 3 potential file.
    Manufacture {
        #[arg(long)]
        shape: ShapeArg,
        #[arg(long)]
        output: PathBuf,
    },
    /// Runs a JSON configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Constants,
    KernelCheck,
    Threshold,
    Probe,
    Representation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorTag {
    Identity,
    Zs,
    ZsCorrected,
    PhiPsi,
    Zs1,
    Zs1Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictArg {
    Bounded,
    Growing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Generic,
    First,
    Second,
    Third,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    InverseSqrt,
    Dipole,
}

impl From<KindArg> for Kind {
    fn from(k: KindArg) -> Kind {
        match k {
            KindArg::Generic => Kind::Generic,
            KindArg::First => Kind::First,
            KindArg::Second => Kind::Second,
            KindArg::Third => Kind::Third,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl GridConfig {
    fn validate(&self) -> Result<Arc<LogGrid>> {
        if !(64..=16384).contains(&self.n) {
            return Err(Error::Grid(format!("grid size {} outside 64..=16384", self.n)));
        }
        LogGrid::new(self.r_min, self.r_max, self.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub p: Option<Vec<f64>>,
    #[serde(default)]
    pub operator: Option<OperatorTag>,
    #[serde(default)]
    pub scales: Option<Vec<f64>>,
    #[serde(default)]
    pub expect: Option<VerdictArg>,
    #[serde(default)]
    pub expect_kind: Option<KindArg>,
    #[serde(default)]
    pub base_width: Option<f64>,
}

impl RunConfig {
    pub fn new(task: Task) -> Self {
        RunConfig {
            task,
            m: None,
            grid: None,
            tolerances: BTreeMap::new(),
            input: None,
            output: None,
            seed: None,
            samples: None,
            lambda: None,
            p: None,
            operator: None,
            scales: None,
            expect: None,
            expect_kind: None,
            base_width: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn m(&self) -> Result<usize> {
        self.m.ok_or_else(|| Error::Parse(format!("task {:?} needs m", self.task)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    /// The residual or error compared against the tolerance.
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, pass: value <= tolerance, detail: None }
    }

    fn holds(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), value: if pass { 0.0 } else { 1.0 }, tolerance: 0.0, pass, detail: Some(detail.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub task: Task,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    pub tolerances: BTreeMap<String, f64>,
    pub values: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    /// CSV tables by file name.
    #[serde(skip)]
    pub tables: BTreeMap<String, String>,
}

impl Report {
    fn new(config: &RunConfig) -> Self {
        Report {
            task: config.task,
            seed: config.seed(),
            grid: None,
            tolerances: BTreeMap::new(),
            values: BTreeMap::new(),
            checks: Vec::new(),
            tables: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Looks up a tolerance override and records the value used.
    fn tolerance(&mut self, config: &RunConfig, key: &str, default: f64) -> f64 {
        let t = config.tolerances.get(key).copied().unwrap_or(default);
        self.tolerances.insert(key.to_string(), t);
        t
    }

    fn value(&mut self, key: &str, v: Value) {
        self.values.insert(key.to_string(), v);
    }
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Grid size from the environment, `fallback` when unset.
pub fn grid_n_or(fallback: usize) -> Result<usize> {
    match std::env::var(GRID_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| Error::Parse(format!("{GRID_ENV}={s} is not an integer"))),
        Err(_) => Ok(fallback),
    }
}

pub fn default_grid_n() -> Result<usize> {
    grid_n_or(2048)
}

fn grid_for(config: &RunConfig, r_min: f64, r_max: f64, report: &mut Report) -> Result<Arc<LogGrid>> {
    grid_with(config, GridConfig { n: default_grid_n()?, r_min, r_max }, report)
}

fn grid_with(config: &RunConfig, fallback: GridConfig, report: &mut Report) -> Result<Arc<LogGrid>> {
    let g = config.grid.unwrap_or(fallback);
    let grid = g.validate()?;
    report.grid = Some(g);
    Ok(grid)
}

pub fn run(config: &RunConfig) -> Result<Report> {
    let mut report = Report::new(config);
    match config.task {
        Task::Constants => constants(config, &mut report)?,
        Task::KernelCheck => kernel_check(config, &mut report)?,
        Task::Threshold => threshold(config, &mut report)?,
        Task::Probe => probe(config, &mut report)?,
        Task::Representation => representation(config, &mut report)?,
    }
    Ok(report)
}

fn constants(config: &RunConfig, report: &mut Report) -> Result<()> {
    let m = config.m()?;
    if m < 3 {
        return Err(Error::Dimension { m, reason: "constants are tabulated for m ≥ 3".into() });
    }
    if m % 2 == 1 {
        if m >= 5 {
            report.checks.push(Check::holds("kernel coefficients i C_0 + C_1 = 0", c0_c1_identity_exact(m)?, "exact rational arithmetic"));
            let d = dm_constant(m)?;
            report.value("D_m", json!(d));
            let t = tilde_dm_odd(m)?;
            let worst = t.residuals().iter().map(|r| rational_to_f64(r).abs()).fold(0.0, f64::max);
            report.value("tilde_D_m_residual", json!(worst));
            report.checks.push(Check::holds("odd binomial sums tilde D_m = 1", t.all_equal_one(), format!("boundary={} descending={} ascending={}", t.boundary_sum, t.descending, t.ascending)));
            if m == 5 {
                let tol = report.tolerance(config, "d5", 1e-13);
                report.checks.push(Check::at_most("D_5 = 1/2", (d - 0.5).abs(), tol));
            }
        }
        return Ok(());
    }
    let nu = (m - 2) / 2;
    let tol = report.tolerance(config, "superposition", 1e-10);
    let mut csv = String::from("j,T_j[1].re,T_j[1].im,expected.re,expected.im\n");
    for j in 0..=nu {
        let t = superposition_functional(m, j, |_| Complex64::new(1.0, 0.0), 0.0)?;
        let expected = Complex64::new(0.0, -2.0).powu(j as u32) * (binomial(nu, j) * factorial(m - 3 - j) / factorial(m - 2));
        let _ = writeln!(csv, "{j},{:.15e},{:.15e},{:.15e},{:.15e}", t.re, t.im, expected.re, expected.im);
        report.checks.push(Check::at_most(format!("superposition T_{j}[1] = (-2i)^j binom(nu,j) (m-3-j)!/(m-2)!"), (t - expected).norm() / expected.norm(), tol));
    }
    report.tables.insert(format!("superposition_m{m}.csv"), csv);
    if m >= 6 {
        let d = dm_constant(m)?;
        report.value("D_m", json!(d));
        let s = shin_identity(m)?;
        report.value("closed_form_integral", json!({"quadrature": s.lhs, "closed_form": s.rhs}));
        let tol = report.tolerance(config, "closed_form", 1e-10);
        report.checks.push(Check::at_most("closed form of int_1^inf (x^2+1)^-(m-1) dx", s.residual, tol));
        let t = dmj_constants(m)?;
        report.value("D_mj", json!(t.values));
        let tol = report.tolerance(config, "dmj_sum", 1e-10);
        report.checks.push(Check::at_most("sum_j D_{m,j} = 1", t.residual, tol));
    }
    Ok(())
}

fn kernel_check(config: &RunConfig, report: &mut Report) -> Result<()> {
    let m = config.m()?;
    let samples = config.samples.unwrap_or(50);
    let tol = report.tolerance(config, "kernel", 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
    let opts = KernelOptions::default();
    let route = if m % 2 == 1 { "closed form" } else { "superposition" };
    let mut worst: f64 = 0.0;
    let mut csv = String::from("lambda,r,route.re,route.im,general.re,general.im,rel_err\n");
    for _ in 0..samples {
        let lambda = rng.gen_range(0.05..5.0);
        let r = rng.gen_range(0.05..5.0);
        let a = if m % 2 == 1 { eval_kernel_odd(m, Complex64::new(lambda, 0.0), r)? } else { eval_kernel_even(m, lambda, r, &opts)? };
        let b = eval_kernel_general(m, Complex64::new(lambda, 0.0), r, &opts)?;
        let e = (a - b).norm() / b.norm();
        worst = worst.max(e);
        let _ = writeln!(csv, "{lambda:.15e},{r:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{e:.3e}", a.re, a.im, b.re, b.im);
    }
    report.value("samples", json!(samples));
    report.value("route", json!(route));
    report.tables.insert(format!("kernel_m{m}.csv"), csv);
    report.checks.push(Check::at_most(format!("{route} kernel = general integral, max relative error"), worst, tol));
    Ok(())
}

fn read_potential(path: &Path) -> Result<PotentialSpec> {
    let (header, profile) = RadialProfile::read_file(path)?;
    if header.m != 3 {
        return Err(Error::Dimension { m: header.m, reason: "threshold analysis is implemented for m = 3".into() });
    }
    if header.l != 0 {
        return Err(Error::Parse(format!("potential file must be radial (l=0), found l={}", header.l)));
    }
    PotentialSpec::from_profile(profile)
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Generic => "generic",
        Kind::First => "first",
        Kind::Second => "second",
        Kind::Third => "third",
    }
}

fn threshold(config: &RunConfig, report: &mut Report) -> Result<()> {
    let path = config.input.as_ref().ok_or_else(|| Error::Parse("threshold task needs an input potential file".into()))?;
    let v = read_potential(path)?;
    let tb = null_space(&v, NullOptions::default())?;
    report.value("kind", json!(kind_name(tb.kind)));
    report.value("dimension", json!(tb.dimension()));
    report.value("null_tolerance", json!(tb.tolerance));
    report.value("decay", json!(v.decay()));
    let tail_tol = report.tolerance(config, "resonance_tail", 1e-3);
    let mut elements = Vec::new();
    for (i, e) in tb.elements.iter().enumerate() {
        let mut entry = json!({
            "sector": e.sector,
            "monopole": e.moments.monopole,
            "dipole": e.moments.dipole,
            "in_e0": e.moments.in_e0,
            "in_e1": e.moments.in_e1,
        });
        report.checks.push(Check::holds(format!("element {i}: E1 inside E0"), !e.moments.in_e1 || e.moments.in_e0, "flag logic"));
        if e.sector == 0 && !e.moments.in_e0 {
            // L of the element rescaled to unit 1/r tail
            let fit = fit_asymptotics(e, 1e-2)?;
            let l = fit.predicted / fit.fit.leading;
            entry["l_unit_tail"] = json!(l);
            report.checks.push(Check::at_most(format!("element {i}: resonance tail matches monopole, |L - 1|"), (l - 1.0).abs(), tail_tol));
        }
        elements.push(entry);
    }
    report.value("elements", Value::Array(elements));
    if matches!(tb.kind, Kind::First | Kind::Third) {
        let cr = canonical_resonance(&tb, &v)?;
        report.value("coupling", complex_json(cr.coupling));
        report.value("canonical_l", json!(cr.l_value));
    }
    if let Some(k) = config.expect_kind {
        report.checks.push(Check::holds("threshold kind", tb.kind == Kind::from(k), format!("found {}", kind_name(tb.kind))));
    }
    Ok(())
}

fn potential_for(config: &RunConfig, shape: Shape, report: &mut Report) -> Result<PotentialSpec> {
    match (&config.input, shape.sector()) {
        (Some(path), 0) => read_potential(path),
        _ => manufacture_potential(&shape, &grid_for(config, 1e-3, 1e5, report)?),
    }
}

fn probe(config: &RunConfig, report: &mut Report) -> Result<()> {
    let tag = config.operator.ok_or_else(|| Error::Parse("probe task needs an operator".into()))?;
    let ps = config.p.clone().ok_or_else(|| Error::Parse("probe task needs p".into()))?;
    let scales = config.scales.clone().unwrap_or_else(|| dyadic_scales(6));
    let width = config.base_width.unwrap_or(6.0);
    let th = ProbeThresholds::default();
    let slope = report.tolerance(config, "probe_slope", th.slope);
    let spread = report.tolerance(config, "probe_spread", th.spread);
    let th = ProbeThresholds { slope, spread };
    let cutoff = CutoffSpec::default();
    let op: Box<dyn ProbeOperator> = match tag {
        OperatorTag::Identity => {
            grid_for(config, 1e-3, 1e5, report)?;
            Box::new(Identity { sector: 0 })
        }
        OperatorTag::Zs | OperatorTag::ZsCorrected | OperatorTag::PhiPsi => {
            let v = potential_for(config, Shape::inverse_sqrt(), report)?;
            let tb = null_space(&v, NullOptions::default())?;
            let cr = canonical_resonance(&tb, &v)?;
            let data = ResonanceData::new(&v, &cr)?;
            report.value("coupling", complex_json(data.coupling));
            match tag {
                OperatorTag::Zs => Box::new(data.singular_part(cutoff)?),
                OperatorTag::ZsCorrected => Box::new(data.corrected(cutoff)?),
                _ => Box::new(data.correction()),
            }
        }
        OperatorTag::Zs1 | OperatorTag::Zs1Corrected => {
            let v = potential_for(config, Shape::dipole(1.0, 2.0), report)?;
            let tb = null_space(&v, NullOptions::default())?;
            let (sector, phi) = eigen_basis(&tb)?.into_iter().find(|(l, _)| *l == 1).ok_or_else(|| Error::Precondition("no dipole eigenfunction found".into()))?;
            if tag == OperatorTag::Zs1 {
                Box::new(zs1_part(v.potential(), &phi, sector, cutoff)?)
            } else {
                Box::new(zs1_corrected(v.potential(), &phi, sector, cutoff)?)
            }
        }
    };
    let grid = match &report.grid {
        Some(g) => g.validate()?,
        None => {
            let path = config.input.as_ref().expect("grid comes from the potential file");
            RadialProfile::read_file(path)?.1.grid().clone()
        }
    };
    let base = RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| r.powi(op.sector() as i32) * (-(r / width).powi(2)).exp())?;
    report.value("operator", json!(op.tag()));
    report.value("base_width", json!(width));
    let reports = lp_probe_many(op.as_ref(), &ps, &base, &scales, th)?;
    let file_tag = tag.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    let mut verdicts = BTreeMap::new();
    for r in &reports {
        verdicts.insert(format!("p={}", r.p), json!({"verdict": r.verdict.as_str(), "slope": r.slope, "spread": r.spread}));
        report.tables.insert(format!("probe_{}_p{}.csv", file_tag, r.p), r.to_csv());
        if let Some(e) = config.expect {
            let want = match e {
                VerdictArg::Bounded => Verdict::Bounded,
                VerdictArg::Growing => Verdict::Growing,
            };
            report.checks.push(Check::holds(format!("{} at p={}: {}", op.tag(), r.p, want.as_str()), r.verdict == want, format!("found {}", r.verdict.as_str())));
        }
    }
    report.value("verdicts", json!(verdicts));
    Ok(())
}

fn representation(config: &RunConfig, report: &mut Report) -> Result<()> {
    let m = config.m()?;
    let lambda = config.lambda.ok_or_else(|| Error::Parse("representation task needs lambda".into()))?;
    let pairs = config.samples.unwrap_or(10);
    let grid = grid_with(config, GridConfig { n: grid_n_or(1024)?, r_min: 1e-3, r_max: 60.0 }, report)?;
    let tol = report.tolerance(config, "representation", 1e-5);
    let j0_tol = report.tolerance(config, "j0_routes", 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed());
    let mut worst: f64 = 0.0;
    let mut worst_j0: f64 = 0.0;
    let mut csv = String::from("pair,width_psi,width_u,representation.re,representation.im,spectral.re,spectral.im,rel_err\n");
    for k in 0..pairs {
        let (a, b) = (rng.gen_range(0.6..1.4), rng.gen_range(0.6..1.4));
        let psi = RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| (-(r / a).powi(2) / 2.0).exp())?;
        let u = RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| (-(r / b).powi(2) / 2.0).exp())?;
        let spectral = pairing_spectral(&psi, &u, lambda, m)?;
        let rep = if m % 2 == 1 {
            pairing_representation(&psi, &u, lambda, m)?
        } else {
            let e = pairing_representation_even(&psi, &u, lambda, m)?;
            worst_j0 = worst_j0.max((e.j0_direct - e.j0_tilde).norm() / e.j0_direct.norm());
            e.value
        };
        let err = (rep - spectral).norm() / spectral.norm();
        worst = worst.max(err);
        let _ = writeln!(csv, "{k},{a:.15e},{b:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{err:.3e}", rep.re, rep.im, spectral.re, spectral.im);
    }
    report.tables.insert(format!("representation_m{m}.csv"), csv);
    report.value("pairs", json!(pairs));
    report.checks.push(Check::at_most("representation formula = spectral pairing, max relative error", worst, tol));
    if m % 2 == 0 {
        report.checks.push(Check::at_most("j=0 term: direct and tilde routes agree", worst_j0, j0_tol));
    }
    Ok(())
}

/// Writes a manufactured potential as a profile file.
pub fn manufacture(shape: ShapeArg, output: &Path, grid: &Arc<LogGrid>) -> Result<()> {
    let shape = match shape {
        ShapeArg::InverseSqrt => Shape::inverse_sqrt(),
        ShapeArg::Dipole => Shape::dipole(1.0, 2.0),
    };
    let v = manufacture_potential(&shape, grid)?;
    let header = ProfileHeader { m: 3, l: 0, delta: v.decay() };
    v.potential().write_file(output, &header)
}

fn config_from(command: Command) -> Result<Option<RunConfig>> {
    Ok(Some(match command {
        Command::Constants { m } => RunConfig { m: Some(m), ..RunConfig::new(Task::Constants) },
        Command::KernelCheck { m, samples, seed } => RunConfig { m: Some(m), samples: Some(samples), seed: Some(seed), ..RunConfig::new(Task::KernelCheck) },
        Command::Threshold { potential, expect_kind } => RunConfig { input: Some(potential), expect_kind, ..RunConfig::new(Task::Threshold) },
        Command::Probe { p, operator, scales, potential, expect, base_width } => {
            RunConfig { p: Some(p), operator: Some(operator), scales, input: potential, expect, base_width, ..RunConfig::new(Task::Probe) }
        }
        Command::Representation { m, lambda, pairs, seed } => {
            RunConfig { m: Some(m), lambda: Some(lambda), samples: Some(pairs), seed: Some(seed), ..RunConfig::new(Task::Representation) }
        }
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)?;
            RunConfig::from_json(&text)?
        }
        Command::Manufacture { .. } => return Ok(None),
    }))
}

fn usage_error(e: &Error) -> bool {
    matches!(e, Error::Parse(_) | Error::Io(_))
}

fn emit(report: &Report, out: Option<&Path>) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("summary.json"), report.to_json())?;
            for (name, table) in &report.tables {
                std::fs::write(dir.join(name), table)?;
            }
        }
        None => print!("{}", report.to_json()),
    }
    Ok(())
}

/// Parses arguments, runs the task and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let out = cli.out.clone();
    if let Command::Manufacture { shape, output } = &cli.command {
        let grid = default_grid_n().and_then(|n| LogGrid::new(1e-3, 1e5, n));
        return match grid.and_then(|g| manufacture(*shape, output, &g)) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: {e}");
                if usage_error(&e) { EXIT_USAGE } else { EXIT_CHECK_FAILED }
            }
        };
    }
    let config = match config_from(cli.command) {
        Ok(Some(c)) => c,
        Ok(None) => unreachable!("manufacture handled above"),
        Err(e) => {
            eprintln!("usage error: {e}");
            return EXIT_USAGE;
        }
    };
    let out = out.or_else(|| config.output.clone());
    match run(&config) {
        Ok(report) => {
            if let Err(e) = emit(&report, out.as_deref()) {
                eprintln!("error: {e}");
                return EXIT_CHECK_FAILED;
            }
            let failures = report.failures();
            if failures.is_empty() {
                EXIT_OK
            } else {
                for c in failures {
                    eprintln!("check failed: {} (value {:e}, tolerance {:e})", c.name, c.value, c.tolerance);
                }
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if usage_error(&e) {
                EXIT_USAGE
            } else {
                EXIT_CHECK_FAILED
            }
        }
    }
}
