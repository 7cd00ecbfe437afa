use prony_bath::analysis::{exact_spectrum, psd_error, series_spectrum, GridPolicy};
use prony_bath::psd::{approximant, pade_poles, psd_correlation_series};
use prony_bath::spectral::{fermi, BathParameters, SpectralDensity, Statistics};
use std::f64::consts::PI;

fn max_deviation(order: usize, reach: f64) -> f64 {
    let p = pade_poles(Statistics::Fermionic, order).unwrap();
    let n = 20_000;
    (0..=n)
        .map(|i| {
            let x = -reach + 2.0 * reach * i as f64 / n as f64;
            (approximant(&p, x) - fermi(x)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn accuracy_window() {
    for order in [5, 10, 20] {
        let dev = max_deviation(order, PI * order as f64 / 2.0);
        assert!(dev <= 1e-6, "P = {order}: {dev:e}");
    }
}

#[test]
fn first_pole_tends_to_matsubara_frequency() {
    let p = pade_poles(Statistics::Fermionic, 20).unwrap();
    assert!((p.xi[0] - PI).abs() <= 1e-6 * PI, "{}", p.xi[0]);
    // the first few poles approach (2j - 1) pi
    for (j, xi) in p.xi.iter().take(5).enumerate() {
        let m = (2 * j + 1) as f64 * PI;
        assert!((xi - m).abs() < 1e-6 * m);
    }
    let b = pade_poles(Statistics::Bosonic, 20).unwrap();
    assert!((b.xi[0] - 2.0 * PI).abs() < 1e-6 * 2.0 * PI);
}

#[test]
fn poles_and_weights_positive() {
    for order in 1..=60 {
        let p = pade_poles(Statistics::Fermionic, order).unwrap();
        assert_eq!(p.xi.len(), order);
        assert!(p.xi.iter().all(|&x| x > 0.0));
        assert!(p.eta.iter().all(|&e| e > 0.0 && e.is_finite()));
        assert!(p.xi.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(approximant(&p, 0.0), 0.5);
    }
}

#[test]
fn large_order_is_well_conditioned() {
    let p = pade_poles(Statistics::Fermionic, 100).unwrap();
    assert!(p.eta.iter().all(|e| e.is_finite() && *e > 0.0));
    assert!(max_deviation(100, 50.0 * PI) <= 1e-6);
}

#[test]
fn series_spectrum_is_pole_approximant_times_density() {
    let d = SpectralDensity::lorentzian(1.0, 10.0).unwrap();
    let bath = BathParameters::fermionic(10.0).unwrap();
    let p = pade_poles(Statistics::Fermionic, 7).unwrap();
    let s = psd_correlation_series(&d, &bath, 7).unwrap();
    for w in [-30.0, -2.0, -0.1, 0.0, 0.03, 1.0, 12.0, 80.0] {
        let expect = d.value(w).unwrap() * approximant(&p, bath.beta * w);
        let got = series_spectrum(&s, w);
        assert!((got - expect).abs() < 1e-12 * (1.0 + expect.abs()), "{w}: {got} vs {expect}");
    }
}

#[test]
fn real_part_of_series_is_analytic_single_exponential() {
    let d = SpectralDensity::lorentzian(1.0, 10.0).unwrap();
    let bath = BathParameters::fermionic(10.0).unwrap();
    let s = psd_correlation_series(&d, &bath, 60).unwrap();
    for i in 0..50 {
        let t = i as f64 * 0.05;
        let exact = 5.0 * (-10.0 * t).exp();
        assert!((s.eval(t).re - exact).abs() <= 1e-6);
    }
}

#[test]
fn error_decreases_with_order() {
    let d = SpectralDensity::lorentzian(1.0, 10.0).unwrap();
    let bath = BathParameters::fermionic(10.0).unwrap();
    let policy = GridPolicy::default();
    let mut previous = f64::INFINITY;
    for order in 1..=30 {
        let e = psd_error(&d, &bath, order, &policy).unwrap().error;
        assert!(e <= previous * (1.0 + 1e-9), "P = {order}: {e} after {previous}");
        previous = e;
    }
    // reference: the exact spectrum itself
    assert!(exact_spectrum(&d, &bath, 0.0).unwrap() == 0.5);
}
