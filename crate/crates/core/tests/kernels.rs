use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use threshscatter::kernels::*;
use threshscatter::special::factorial;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn three_dimensional_kernel_is_outgoing_spherical_wave() {
    let o = KernelOptions::default();
    for &(l, r) in &[(0.3, 0.5), (1.0, 2.0), (1.9, 7.5)] {
        let exact = Complex64::from_polar(1.0, l * r) / (4.0 * PI * r);
        assert!(rel(eval_kernel_odd(3, Complex64::new(l, 0.0), r).unwrap(), exact) < 1e-15);
        assert!(rel(eval_kernel_general(3, Complex64::new(l, 0.0), r, &o).unwrap(), exact) < 1e-10);
    }
}

#[test]
fn kernel_model_dispatches_by_parity() {
    let o = KernelOptions::default();
    for m in 3..=8 {
        let model = KernelModel::new(m).unwrap();
        let a = model.eval(0.8, 1.1).unwrap();
        let b = eval_kernel_general(m, Complex64::new(0.8, 0.0), 1.1, &o).unwrap();
        assert!(rel(a, b) < 1e-7, "m={m}");
    }
    assert!(KernelModel::new(2).is_err());
}

#[test]
fn upper_half_plane_decay() {
    // Im λ > 0: odd closed form and general integral both decay like e^{−Im λ r}
    let o = KernelOptions::default();
    for m in [3usize, 5, 7] {
        let lambda = Complex64::new(0.7, 0.4);
        let a = eval_kernel_odd(m, lambda, 3.0).unwrap();
        let b = eval_kernel_general(m, lambda, 3.0, &o).unwrap();
        assert!(rel(a, b) < 1e-7, "m={m}");
    }
}

#[test]
fn green_constant_is_zero_energy_limit() {
    let o = KernelOptions::default();
    for m in 3..=9 {
        let omega = 2.0 * PI.powf(m as f64 / 2.0) / statrs::function::gamma::gamma(m as f64 / 2.0);
        assert!((green_constant(m) - 1.0 / ((m as f64 - 2.0) * omega)).abs() < 1e-14 * green_constant(m));
        let g = eval_kernel_general(m, Complex64::new(0.0, 0.0), 0.9, &o).unwrap();
        assert!((g.re - green_constant(m) * 0.9f64.powi(2 - m as i32)).abs() < 1e-10 * g.re, "m={m}");
    }
}

#[test]
fn factorial_ratio_for_every_even_dimension() {
    for m in (4..=12).step_by(2) {
        let nu = (m - 2) / 2;
        for j in 0..=nu {
            let t = superposition_functional(m, j, |_| Complex64::new(1.0, 0.0), 0.0).unwrap();
            let coef = Complex64::new(0.0, -2.0).powu(j as u32) * threshscatter::special::binomial(nu, j);
            let expected = coef * (factorial(m - 3 - j) / factorial(m - 2));
            assert!(rel(t, expected) < 1e-10, "m={m} j={j}");
        }
    }
}

#[test]
fn superposition_powers_match_closed_form() {
    for (m, j, k) in [(4usize, 0usize, 1usize), (6, 1, 2), (8, 2, 3)] {
        let f = superposition_functional(m, j, |a| Complex64::new((1.0 + 2.0 * a).powi(-(k as i32)), 0.0), 0.0).unwrap();
        assert!(rel(f, superposition_power_closed_form(m, j, k).unwrap()) < 1e-9, "m={m} j={j} k={k}");
    }
}

#[test]
fn exact_coefficients_agree_with_floats() {
    for m in [3usize, 5, 7, 9, 11] {
        let exact = odd_kernel_coeffs_exact(m).unwrap();
        let float = odd_kernel_coeffs(m).unwrap();
        assert_eq!(exact.len(), (m - 1) / 2);
        for (e, f) in exact.iter().zip(&float) {
            assert!(rel(e.value(), *f) < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn odd_closed_form_matches_general(m in prop::sample::select(vec![3usize, 5, 7, 9]), lambda in 1e-3f64..2.0, r in 0.1f64..10.0) {
        let a = eval_kernel_odd(m, Complex64::new(lambda, 0.0), r).unwrap();
        let b = eval_kernel_general(m, Complex64::new(lambda, 0.0), r, &KernelOptions::default()).unwrap();
        prop_assert!(rel(a, b) < 1e-7, "m={} λ={} r={} {} {}", m, lambda, r, a, b);
    }

    #[test]
    fn exact_identity_holds_for_odd_dimensions(k in 2usize..8) {
        prop_assert!(c0_c1_identity_exact(2 * k + 1).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn even_superposition_matches_general(m in prop::sample::select(vec![4usize, 6, 8]), lambda in 1e-3f64..2.0, r in 0.1f64..10.0) {
        let o = KernelOptions::default();
        let a = eval_kernel_even(m, lambda, r, &o).unwrap();
        let b = eval_kernel_general(m, Complex64::new(lambda, 0.0), r, &o).unwrap();
        prop_assert!(rel(a, b) < 1e-6, "m={} λ={} r={} {} {}", m, lambda, r, a, b);
    }

    #[test]
    fn superposition_is_linear(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, k in 1i32..4) {
        let f = |a: f64| Complex64::new((1.0 + 2.0 * a).powi(-k), 0.0);
        let g = |a: f64| Complex64::new(0.0, (-a).exp());
        let lhs = superposition_functional(6, 1, |a| f(a) * c1 + g(a) * c2, 0.0).unwrap();
        let rhs = superposition_functional(6, 1, f, 0.0).unwrap() * c1 + superposition_functional(6, 1, g, 0.0).unwrap() * c2;
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }
}
