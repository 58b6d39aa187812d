use std::f64::consts::PI;
use threshscatter::quad::{integrate_real, integrate_real_to_inf, Tolerance};
use threshscatter::threshold::*;
use threshscatter::{LogGrid, RadialProfile};

fn resonance_case(n: usize) -> (PotentialSpec, ThresholdBasis) {
    let grid = LogGrid::new(1e-3, 1e3, n).unwrap();
    let v = manufacture_potential(&Shape::inverse_sqrt(), &grid).unwrap();
    let tb = null_space(&v, NullOptions::default()).unwrap();
    (v, tb)
}

#[test]
fn manufactured_resonance_round_trip() {
    let (v, tb) = resonance_case(2048);
    println!("tol {:e} spectra {:?}", tb.tolerance, tb.sector_spectra);
    assert_eq!(tb.kind, Kind::First);
    assert_eq!(tb.dimension(), 1);
    let e = &tb.elements[0];
    let (_, phi) = v.manufactured_factor().unwrap();
    let cs = cosine_similarity(&e.radial, phi).unwrap();
    println!("cos 1-{:e} L={} mono={}", 1.0 - cs, e.l_value(), e.moments.monopole);
    assert!(cs > 1.0 - 1e-4);
    assert!((v.decay() - 4.0).abs() < 1e-3, "delta {}", v.decay());
    let exact = moments(v.potential(), 0, phi, 0.0).unwrap();
    assert!((exact.monopole + 4.0 * PI).abs() < 1e-4 * 4.0 * PI, "{}", exact.monopole);
    let aligned = align(&e.radial, phi);
    let l = -moments(v.potential(), 0, &aligned, 0.0).unwrap().monopole / (4.0 * PI);
    assert!((l - 1.0).abs() < 1e-3, "L {l}");
}

/// Least-squares multiple of `a` closest to `b` in the weighted radial norm.
fn align(a: &RadialProfile, b: &RadialProfile) -> RadialProfile {
    let w: Vec<f64> = a.grid().weights().iter().zip(a.radii()).map(|(w, r)| w * r * r / (1.0 + r * r)).collect();
    let (mut ab, mut aa) = (0.0, 0.0);
    for i in 0..w.len() {
        ab += w[i] * a.values()[i].re * b.values()[i].re;
        aa += w[i] * a.values()[i].re * a.values()[i].re;
    }
    a.scale(threshscatter::Complex64::new(ab / aa, 0.0)).with_decay(a.decay())
}

#[test]
fn canonical_resonance_constants() {
    let (v, tb) = resonance_case(2048);
    let cr = canonical_resonance(&tb, &v).unwrap();
    let norm = v_form(v.potential(), &cr.psi, &cr.psi).unwrap();
    assert!((norm - 1.0).abs() < 1e-8);
    assert!(cr.l_value > 0.0);
    assert!((cr.l_value - 2.0 / (PI * 3f64.sqrt())).abs() < 1e-3, "{}", cr.l_value);
    assert!((cr.coupling.im - 3.0 * PI / 16.0).abs() < 1e-3 * 3.0 * PI / 16.0, "{}", cr.coupling);
    assert!(cr.coupling.re.abs() < 1e-14);
    let (_, phi) = v.manufactured_factor().unwrap();
    let q = v_form(v.potential(), phi, phi).unwrap();
    assert!((q - 0.75 * PI * PI).abs() < 1e-6 * q, "{q}");
}

#[test]
fn resonance_tail_matches_monopole() {
    let (_, tb) = resonance_case(2048);
    let rep = fit_asymptotics(&tb.elements[0], 1e-2).unwrap();
    assert!((rep.fit.leading - rep.predicted).abs() < 1e-3 * rep.predicted.abs(), "{:?}", rep);
    let grid = LogGrid::new(1e-3, 1e3, 2048).unwrap();
    let phi = RadialProfile::from_real_fn(&grid, 1.0, |r| 1.0 / (1.0 + r * r).sqrt()).unwrap();
    let fit = fit_tail(&phi, 1.0).unwrap();
    assert!((fit.leading - 1.0).abs() < 1e-4, "{:?}", fit);
}

#[test]
fn second_moment_kernel_squares_first() {
    // D₂ = −D₀² on inputs with vanishing monopole
    let grid = LogGrid::new(1e-3, 400.0, 1536).unwrap();
    let u = RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| (1.0 - 2.0 * r * r / 3.0) * (-r * r).exp()).unwrap();
    assert!(u.moment(2.0).unwrap().norm() < 1e-12);
    let d0 = dj_operator(0, &u).unwrap().with_decay(f64::INFINITY);
    let d0d0 = dj_operator(0, &d0).unwrap();
    let d2 = dj_operator(2, &u).unwrap();
    for &i in &[200usize, 700, 1000] {
        let (a, b) = (d2.values()[i].re, -d0d0.values()[i].re);
        assert!((a - b).abs() < 1e-6 * b.abs().max(1e-3), "r={} {a} {b}", grid.radii()[i]);
    }
}

#[test]
fn zeroth_kernel_is_newton_potential() {
    let grid = LogGrid::new(1e-3, 60.0, 1024).unwrap();
    let u = RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| (-r * r).exp()).unwrap();
    let d0 = dj_operator(0, &u).unwrap();
    // (1/4π)∫e^{−|y|²}/|x − y| dy = π^{3/2} erf(r)/(4πr)
    for &i in &[100usize, 500, 900] {
        let r = grid.radii()[i];
        let exact = PI.powf(1.5) * statrs::function::erf::erf(r) / (4.0 * PI * r);
        assert!((d0.values()[i].re - exact).abs() < 1e-9, "r={r}");
    }
}

#[test]
fn fractional_integral_inverts_laplacian() {
    let grid = LogGrid::new(1e-3, 60.0, 1024).unwrap();
    let u = RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| (-r * r).exp()).unwrap();
    let f2 = fractional_integral(2.0, &u, 3).unwrap();
    let d0 = dj_operator(0, &u).unwrap();
    for &i in &[100usize, 500, 900] {
        let e = d0.values()[i].re;
        assert!((f2.values()[i].re - e).abs() < 1e-6 * e, "s=2 at {}", grid.radii()[i]);
    }
    assert!((riesz_constant(1.0, 3) - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
    let wide = LogGrid::new(1e-3, 1e4, 2048).unwrap();
    let uw = RadialProfile::from_real_fn(&wide, f64::INFINITY, |r| (-r * r).exp()).unwrap();
    let f1 = fractional_integral(1.0, &uw, 3).unwrap();
    let rep = fit_fractional_tail(&uw, &f1, 3, 1e-2).unwrap();
    assert!((rep.fit.leading - rep.predicted).abs() < 1e-3 * rep.predicted, "{:?}", rep);
}


#[test]
fn zero_potential_is_generic() {
    let grid = LogGrid::new(1e-3, 1e3, 512).unwrap();
    let tb = null_space(&PotentialSpec::zero(&grid), NullOptions::default()).unwrap();
    assert_eq!(tb.kind, Kind::Generic);
    assert_eq!(tb.dimension(), 0);
}

#[test]
fn dipole_eigenfunction() {
    let grid = LogGrid::new(1e-3, 1e3, 2048).unwrap();
    let v = manufacture_potential(&Shape::dipole(1.0, 2.0), &grid).unwrap();
    let tb = null_space(&v, NullOptions::default()).unwrap();
    println!("tol {:e} spectra {:?}", tb.tolerance, tb.sector_spectra);
    assert_eq!(tb.kind, Kind::Second);
    let e = &tb.elements[0];
    println!("{:?}", e.moments);
    assert_eq!(e.sector, 1);
    assert!(e.moments.in_e0 && !e.moments.in_e1);
    let (l, fac) = v.manufactured_factor().unwrap();
    let exact = moments(v.potential(), l, fac, 0.0).unwrap();
    println!("manufactured dipole {:?}", exact.dipole);
    assert!((exact.dipole[0] + 4.0 * PI).abs() < 1e-4 * 4.0 * PI);
}

#[test]
fn row_sums_match_direct_quadrature() {
    let grid = LogGrid::new(1e-3, 1e5, 2048).unwrap();
    let v = PotentialSpec::from_profile(RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| -3.0 / (1.0 + r * r).powi(2)).unwrap().with_decay(f64::INFINITY)).unwrap();
    let op = SectorOperator::new(v.potential(), 0).unwrap();
    let ones = vec![1.0; grid.len()];
    let k1 = op.apply(&ones);
    let tol = Tolerance { abs: 1e-14, rel: 1e-13, max_intervals: 500 };
    for &idx in &[300usize, 1024, 1400] {
        let r = grid.radii()[idx];
        let inner = integrate_real(|s| -3.0 * s * s / (1.0 + s * s).powi(2), 0.0, r, tol).unwrap().0 / r;
        let outer = integrate_real_to_inf(|s| -3.0 * s / (1.0 + s * s).powi(2), r, 1.0, tol).unwrap().0;
        println!("r={r} {} {}", k1[idx] - 1.0, inner + outer);
        assert!((k1[idx] - 1.0 - inner - outer).abs() < 1e-8);
    }
}
