use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use threshscatter::harmonic::*;

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Zero-mean trigonometric polynomial on the periodic frame [−L, L).
fn trig_signal(rng: &mut ChaCha8Rng, n: usize, half_width: f64, positive_only: bool) -> LineSignal {
    let base = PI / half_width;
    let terms: Vec<(f64, Complex64)> = (0..6)
        .map(|_| {
            let k = rng.gen_range(1..40) as f64 * if positive_only || rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (k * base, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        })
        .collect();
    LineSignal::from_fn(half_width, n, true, |x| terms.iter().map(|(k, c)| c * Complex64::from_polar(1.0, k * x)).sum()).unwrap()
}

#[test]
fn hilbert_squares_to_minus_identity_off_the_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let base = trig_signal(&mut rng, 1024, 10.0, false);
    let offset = Complex64::new(0.7, -0.2);
    let u = LineSignal::new(10.0, base.values().iter().map(|v| v + offset).collect(), true).unwrap();
    let hh = hilbert_transform(&hilbert_transform(&u));
    for (a, b) in hh.values().iter().zip(u.values()) {
        assert!((a + b - offset).norm() < 1e-10);
    }
    let real = LineSignal::from_real_fn(40.0, 4096, false, |x| (-(x - 1.0) * (x - 1.0)).exp() * (1.0 + 0.3 * x)).unwrap();
    let h = hilbert_transform(&real);
    assert!(h.values().iter().all(|v| v.im.abs() < 1e-12 * max_abs(h.values())));
}

#[test]
fn half_projection_is_idempotent_and_matches_hilbert_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let u = trig_signal(&mut rng, 1024, 10.0, false);
        let p = half_projection(&u);
        let pp = half_projection(&p);
        assert!(max_diff(pp.values(), p.values()) < 1e-8 * max_abs(u.values()));
        let via = half_projection_via_hilbert(&u);
        assert!(max_diff(via.values(), p.values()) < 1e-8 * max_abs(u.values()));
    }
    let v = trig_signal(&mut rng, 1024, 10.0, true);
    assert!(max_diff(half_projection(&v).values(), v.values()) < 1e-10 * max_abs(v.values()));
}

#[test]
fn maximal_dominates_and_commutes_with_translation() {
    let u = LineSignal::from_real_fn(30.0, 2048, false, |x| (-(x * x)).exp() * (3.0 * x).cos() + 0.5 * (-(x - 4.0).powi(2)).exp()).unwrap();
    let mu = maximal(&u);
    for (m, v) in mu.values().iter().zip(u.values()) {
        assert!(m.re >= v.norm() * (1.0 - 1e-12));
    }
    let shift = 100;
    let shifted = LineSignal::new(30.0, (0..u.len()).map(|j| if j >= shift { u.values()[j - shift] } else { Complex64::new(0.0, 0.0) }).collect(), false).unwrap();
    let ms = maximal(&shifted);
    for j in 600..1400 {
        assert!((ms.values()[j + shift].re - mu.values()[j].re).abs() < 1e-10, "j={j}");
    }
}

#[test]
fn maximal_window_family_has_converged() {
    let u = LineSignal::from_real_fn(30.0, 2048, false, |x| (-(x * x) / 3.0).exp() * (1.0 + 0.5 * (2.0 * x).sin())).unwrap();
    let (a, b) = (maximal_with(&u, 40), maximal_with(&u, 80));
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x.re - y.re).abs() <= 0.02 * y.re, "{x} {y}");
    }
}

#[test]
fn constant_weight_has_unit_characteristic() {
    for p in [1.2, 2.0, 7.0] {
        assert_eq!(ap_characteristic(&PowerWeight { a: 0.0, p }, 40).unwrap(), ApVerdict::Finite(1.0));
    }
    assert!(!ap_characteristic(&PowerWeight { a: 1.0, p: 2.0 }, 40).unwrap().is_finite());
    assert!(ap_characteristic(&PowerWeight { a: 0.0, p: 1.0 }, 40).is_err());
}

#[test]
fn resolvent_weights_live_on_their_exponent_ranges() {
    for m in [5usize, 7] {
        let mf = m as f64;
        // weight exponent, open p-range (no upper end for the last)
        let weights: [(Box<dyn Fn(f64) -> f64>, f64, Option<f64>); 4] = [
            (Box::new(move |p| mf - 1.0 - p * (mf - 1.0)), 1.0, Some(mf / (mf - 1.0))),
            (Box::new(move |p| mf - 1.0 - 2.0 * p), mf / 3.0, Some(mf / 2.0)),
            (Box::new(move |p| mf - 1.0 - p), mf / 2.0, Some(mf)),
            (Box::new(move |_| mf - 1.0), mf, None),
        ];
        let finite = |a: f64, p: f64| ap_characteristic(&PowerWeight { a, p }, 40).unwrap().is_finite();
        for (a, lo, hi) in &weights {
            let width = hi.unwrap_or(2.0 * lo) - lo;
            for t in [0.25, 0.5, 0.75] {
                let p = lo + t * width;
                assert!(finite(a(p), p), "m={m} p={p}");
            }
            let below = lo - 0.08 * width;
            if below > 1.0 {
                assert!(!finite(a(below), below), "m={m} p={below}");
            }
            if let Some(hi) = hi {
                let above = hi + 0.08 * width;
                assert!(!finite(a(above), above), "m={m} p={above}");
            }
        }
    }
}

#[test]
fn majorant_examples() {
    let n = 1024;
    let gauss = LineSignal::from_real_fn(12.0, n, false, |x| (-x * x).exp() / PI.sqrt()).unwrap();
    let indicator = LineSignal::from_real_fn(12.0, n, false, |x| if x.abs() <= 1.0 { 1.0 } else { 0.0 }).unwrap();
    let r = majorant_check(&gauss, |x| (-x * x).exp() / PI.sqrt(), &indicator, 1e-2).unwrap();
    assert!(r.within_bound && r.constant > 0.0);
    assert!((r.majorant_mass - 1.0).abs() < 1e-9);

    let zero = LineSignal::from_real_fn(12.0, n, false, |_| 0.0).unwrap();
    assert_eq!(majorant_check(&gauss, |x| (-x * x).exp() / PI.sqrt(), &zero, 1e-2).unwrap().constant, 0.0);

    let rising = |x: f64| x * x + 1.0;
    assert!(majorant_check(&gauss, rising, &indicator, 1e-2).is_err());
    assert!(majorant_check(&gauss, |x| 0.1 * (-x).exp(), &indicator, 1e-2).is_err());

    // inverse transform of the cutoff e^{−λ²}(1 + λ²)
    let c = 1.0 / (2.0 * PI.sqrt());
    let kernel = LineSignal::from_real_fn(40.0, n, false, |x| c * (-x * x / 4.0).exp() * (1.5 - x * x / 4.0)).unwrap();
    let envelope = move |x: f64| c * (-x * x / 4.0).exp() * (1.5 + x * x / 4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let (a, w, b) = (rng.gen_range(-8.0..8.0), rng.gen_range(0.2..3.0), rng.gen_range(-1.0..1.0));
        let u = LineSignal::from_real_fn(40.0, n, false, |x| (-(x - a).powi(2) / (w * w)).exp() * (1.0 + b * x.sin())).unwrap();
        let r = majorant_check(&kernel, envelope, &u, 1e-2).unwrap();
        assert!(r.within_bound, "{r:?}");
    }
}

#[test]
fn smoothed_projection_special_cases() {
    let u = LineSignal::from_real_fn(30.0, 2048, false, |x| (-(x * x) / 2.0).exp() * (1.0 + 0.2 * x)).unwrap();
    let flat = smoothed_half_projection(|l| Complex64::new((-(l / 20.0).powi(16)).exp(), 0.0), 40.0, &u).unwrap();
    let h = half_projection(&u);
    assert!(max_diff(flat.direct.values(), h.values()) < 1e-8 * max_abs(h.values()));

    let neg = LineSignal::from_fn(30.0, 2048, false, |x| (-(x * x) / 8.0).exp() * Complex64::from_polar(1.0, -12.0 * x)).unwrap();
    let r = smoothed_half_projection(|l| Complex64::new((-l * l / 4.0).exp(), 0.0), 30.0, &neg).unwrap();
    assert!(max_abs(r.direct.values()) < 1e-12);
}

#[test]
fn weighted_hilbert_ratio_tracks_the_ap_law() {
    let (half, n) = (600.0, 1 << 16);
    let dilate = |t: f64| LineSignal::from_real_fn(half, n, false, move |x| (-(x / t).powi(2)).exp()).unwrap();
    let inside: Vec<f64> = [0.1, 1.0, 10.0, 100.0].iter().map(|&t| weighted_hilbert_ratio(&dilate(t), 0.5, 2.0)).collect();
    let spread = inside.iter().cloned().fold(0.0, f64::max) / inside.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(spread < 1.2, "{inside:?}");
    // a = 2 > p − 1: the 1/x tail of 𝐻u_t dominates as t shrinks
    let outside: Vec<f64> = [10.0, 1.0, 0.1].iter().map(|&t| weighted_hilbert_ratio(&dilate(t), 2.0, 2.0)).collect();
    for w in outside.windows(2) {
        assert!(w[1] > 1.5 * w[0], "{outside:?}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let terms: Vec<(f64, f64, f64)> = (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.3..0.8), rng.gen_range(-1.0..1.0))).collect();
        let ratios: Vec<f64> = [0.1, 1.0, 10.0, 100.0]
            .iter()
            .map(|&t| {
                let u = LineSignal::from_real_fn(half, n, false, |x| terms.iter().map(|(c, s, a)| a * (-((x / t - c) / s).powi(2)).exp()).sum()).unwrap();
                weighted_hilbert_ratio(&u, -0.5, 3.0)
            })
            .collect();
        let monotone = ratios.windows(2).all(|w| w[1] > w[0]) && ratios[3] > 1.5 * ratios[0];
        assert!(!monotone, "{ratios:?}");
        worst = ratios.iter().cloned().fold(worst, f64::max);
    }
    assert!(worst < 10.0, "max ratio {worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn characteristic_grows_with_window_count(a in -0.95f64..3.0, p in 1.1f64..5.0, k in 4usize..30) {
        let w = PowerWeight { a, p };
        let (lo, hi) = (ap_characteristic(&w, k).unwrap(), ap_characteristic(&w, k + 10).unwrap());
        prop_assert!(hi.value() >= lo.value());
    }

    #[test]
    fn ap_law_in_the_interior(p in 1.2f64..6.0, t in 0.1f64..0.9) {
        let a = -1.0 + t * p;
        let w = PowerWeight { a, p };
        prop_assert!(ap_characteristic(&w, 40).unwrap().is_finite());
    }
}
