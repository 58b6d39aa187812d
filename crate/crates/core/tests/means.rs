use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;
use threshscatter::means::*;
use threshscatter::quad::gauss_legendre;
use threshscatter::threshold::fractional_integral;
use threshscatter::{LogGrid, RadialProfile};

fn gauss(grid: &Arc<LogGrid>, s: f64) -> RadialProfile {
    RadialProfile::from_real_fn(grid, f64::INFINITY, |r| (-r * r / (2.0 * s * s)).exp()).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// ∫_a^b f by a composite Gauss–Legendre rule.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let gl = gauss_legendre(24);
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let c = a + (k as f64 + 0.5) * h;
        for (t, w) in gl.nodes.iter().zip(&gl.weights) {
            acc += w * f(c + 0.5 * h * t);
        }
    }
    acc * 0.5 * h
}

#[test]
fn representation_examples() {
    let grid = compact_grid(1024);
    let u = gauss(&grid, 1.0);
    let a = pairing_representation(&u, &u, 0.8, 3).unwrap();
    assert!(rel(a, pairing_spectral(&u, &u, 0.8, 3).unwrap()) < 1e-6);
    let b = pairing_representation(&u, &u, 0.5, 5).unwrap();
    assert!(rel(b, pairing_spectral(&u, &u, 0.5, 5).unwrap()) < 1e-6);
    let e = pairing_representation_even(&u, &gauss(&grid, 0.8), 0.6, 4).unwrap();
    assert!(rel(e.value, pairing_spectral(&u, &gauss(&grid, 0.8), 0.6, 4).unwrap()) < 1e-5);
    assert!(rel(e.j0_direct, e.j0_tilde) < 1e-8);
    let z = RadialProfile::zeros(&grid).with_decay(f64::INFINITY);
    assert_eq!(pairing_representation_even(&u, &z, 0.6, 4).unwrap().value, Complex64::new(0.0, 0.0));
    assert!(pairing_representation(&u, &u, 0.6, 4).is_err());
    assert!(pairing_representation_even(&u, &u, 0.6, 5).is_err());
}

#[test]
fn riesz_potential_extends_pairing_to_zero() {
    let grid = LogGrid::new(1e-3, 1e4, 2048).unwrap();
    let v = gauss(&grid, 1.0);
    let u = gauss(&grid, 0.7);
    let dv = fractional_integral(1.0, &v, 3).unwrap();
    for lambda in [0.25, 0.5, 1.0] {
        let a = pairing_spectral(&v, &u, lambda, 3).unwrap() / lambda;
        let b = pairing_spectral(&dv, &u, lambda, 3).unwrap();
        assert!(rel(a, b) < 1e-8, "λ={lambda} {a} {b}");
    }
}

#[test]
fn multiplier_moves_across_pairing() {
    // e^{−|D|²} e^{−r²/2} = 3^{−3/2} e^{−r²/6} in three dimensions
    let grid = compact_grid(1024);
    let v = gauss(&grid, 0.9);
    let u = gauss(&grid, 1.0);
    let fu = RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| 3f64.powf(-1.5) * (-r * r / 6.0).exp()).unwrap();
    for lambda in [0.3, 0.9, 1.7] {
        let a = pairing_spectral(&v, &u, lambda, 3).unwrap() * (-lambda * lambda).exp();
        let b = pairing_spectral(&v, &fu, lambda, 3).unwrap();
        assert!(rel(a, b) < 1e-8, "λ={lambda}");
    }
}

#[test]
fn parseval_on_two_gaussians() {
    let grid = compact_grid(1024);
    let (u, v) = (gauss(&grid, 1.0), gauss(&grid, 0.6));
    let space = 4.0 * PI * integrate(|r| (-r * r / 2.0).exp() * (-r * r / 0.72).exp() * r * r, 0.0, 12.0, 24);
    let freq = 4.0 * PI * integrate(|k| (radial_fourier(&u, 3, k).unwrap() * radial_fourier(&v, 3, k).unwrap()).re * k * k, 0.0, 14.0, 24) / (2.0 * PI).powi(3);
    assert!((space - freq).abs() < 1e-8 * space, "{space} {freq}");
    assert!((radial_fourier(&u, 3, 0.0).unwrap().re - (2.0 * PI).powf(1.5)).abs() < 1e-9);
}

#[test]
fn tilde_mean_of_compact_profile_vanishes_past_support() {
    let grid = compact_grid(1024);
    let bump = RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| if r < 2.0 { (1.0 - r * r / 4.0).powi(3) } else { 0.0 }).unwrap();
    let t = tilde_mean(&SphericalMean::new(bump, "bump")).unwrap();
    for (r, v) in t.radii().iter().zip(t.values()) {
        if *r > 2.0 {
            assert_eq!(*v, Complex64::new(0.0, 0.0));
        }
    }
    let slow = RadialProfile::from_real_fn(&grid, 2.5, |r| (1.0 + r * r).powf(-1.25)).unwrap();
    assert!(tilde_mean(&SphericalMean::new(slow, "slow")).is_err());
}

#[test]
fn tilde_mean_derivative_recovers_profile() {
    let grid = compact_grid(2048);
    let m = SphericalMean::new(RadialProfile::from_real_fn(&grid, f64::INFINITY, |r| (1.0 + r) * (-r * r).exp()).unwrap(), "smooth");
    let t = tilde_mean(&m).unwrap();
    let (r, v) = (t.radii(), t.values());
    for i in (200..1500).step_by(50) {
        let d = (v[i + 1] - v[i - 1]) / (r[i + 1] - r[i - 1]);
        let exact = m.at(r[i]) * (-r[i]);
        assert!(rel(d, exact) < 1e-3, "r={}", r[i]);
    }
}

#[test]
fn mean_is_even() {
    let grid = compact_grid(512);
    let m = SphericalMean::new(gauss(&grid, 1.3), "g");
    for r in [0.01, 0.5, 3.3, 17.0] {
        assert_eq!(m.at(-r), m.at(r));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn spherical_mean_obeys_holder(c in 0.0f64..3.0, s in 0.5f64..1.5, p in prop::sample::select(vec![1.5f64, 2.0, 4.0])) {
        // f(x) = e^{−|x − c e₁|²/s²}, ‖f‖_p^p = (π s²/p)^{3/2}
        let f = |x: &[f64]| {
            let d2 = (x[0] - c).powi(2) + x[1] * x[1];
            Complex64::new((-d2 / (s * s)).exp(), 0.0)
        };
        let rule = AngularRule::Axial { order: 96 };
        let lhs = 4.0 * PI * integrate(|r| spherical_mean(f, 3, r, rule).unwrap().norm().powf(p) * r * r, 0.0, c + 8.0 * s, 32);
        let norm = (PI * s * s / p).powf(1.5);
        prop_assert!(lhs.powf(1.0 / p) <= norm.powf(1.0 / p) * (1.0 + 1e-6), "{} > {}", lhs, norm);
        // the normalized form with ω⁻¹ on the left follows a fortiori
        prop_assert!((lhs / (16.0 * PI * PI)).powf(1.0 / p) <= norm.powf(1.0 / p));
    }

    #[test]
    fn spherical_mean_is_linear_and_kills_odd_parts(a in -2.0f64..2.0, r in 0.1f64..5.0, m in 3usize..6) {
        let rule = AngularRule::Product { order: 12 };
        let even = |x: &[f64]| Complex64::new((-x.iter().map(|t| t * t).sum::<f64>()).exp(), 0.0);
        let odd = |x: &[f64]| Complex64::new(x[0] * (1.0 + x[1] * x[1]), 0.0);
        let sum = spherical_mean(|x| even(x) + odd(x) * a, m, r, rule).unwrap();
        prop_assert!((sum.re - (-r * r).exp()).abs() < 1e-12);
        prop_assert!(spherical_mean(odd, m, r, rule).unwrap().norm() < 1e-12 * (1.0 + r.powi(3)));
    }
}
