//! The two reference decompositions: Lorentzian with `W = 10 delta`,
//! `beta delta = 10`, analytic real part and four imaginary-part terms; and
//! the semicircle with seven real-part and eight imaginary-part terms.

use prony_bath::analysis::{fit_error, spectrum_curve, GridPolicy};
use prony_bath::prony::{
    build_hankel, candidate_roots, fit_correlation, takagi_factorize, CorrelationFit, EigenSolver,
    FitPolicy, RealPartSpec,
};
use prony_bath::psd::psd_correlation_series;
use prony_bath::spectral::{sample_correlation, Part};
use prony_bath::{BathParameters, Error, QuadratureConfig, SpectralDensity, TimeGrid};

fn grid() -> TimeGrid {
    TimeGrid::new(80.0, 1000).unwrap()
}

fn lorentzian() -> (SpectralDensity, BathParameters) {
    (
        SpectralDensity::lorentzian(1.0, 10.0).unwrap(),
        BathParameters::fermionic(10.0).unwrap(),
    )
}

fn semicircle() -> (SpectralDensity, BathParameters) {
    (
        SpectralDensity::semicircle(1.0, 10.0).unwrap(),
        BathParameters::fermionic(10.0).unwrap(),
    )
}

fn fit(d: &SpectralDensity, b: &BathParameters, real: RealPartSpec, k_imag: usize) -> CorrelationFit {
    fit_correlation(d, b, &grid(), real, k_imag, &QuadratureConfig::default(), &FitPolicy::default())
        .unwrap()
}

#[test]
fn lorentzian_imag_singular_values_fall_ten_orders() {
    let (d, b) = lorentzian();
    let s = sample_correlation(&d, &b, &grid(), Part::Imag, &QuadratureConfig::default()).unwrap();
    let f = takagi_factorize(&build_hankel(&s), 16, EigenSolver::Dense).unwrap();
    let ratios: Vec<f64> = (0..=10).map(|m| f.sigma_ratio(m)).collect();
    println!("sigma_m / sigma_0: {:?}", ratios.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>());
    assert!(ratios[10] <= 1e-10, "sigma_10 / sigma_0 = {:.3e}", ratios[10]);
}

#[test]
fn lorentzian_imag_four_roots_inside_rest_on_circle() {
    let (d, b) = lorentzian();
    let s = sample_correlation(&d, &b, &grid(), Part::Imag, &QuadratureConfig::default()).unwrap();
    let f = takagi_factorize(&build_hankel(&s), 16, EigenSolver::Dense).unwrap();
    let roots = candidate_roots(&f, 4).unwrap();
    let off_circle = roots
        .boundary
        .iter()
        .chain(&roots.exterior)
        .map(|w| (w.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    println!(
        "interior {}, boundary {}, exterior {}, largest distance from the circle {off_circle:.3e}",
        roots.interior.len(),
        roots.boundary.len(),
        roots.exterior.len()
    );
    assert_eq!(roots.interior.len(), 4);
    assert!(off_circle <= 1e-3, "{off_circle:.3e}");
}

#[test]
fn lorentzian_imag_residual_with_four_terms() {
    let (d, b) = lorentzian();
    let r = fit(&d, &b, RealPartSpec::Analytic, 4).imag;
    println!("relative sample residual {:.3e}", r.relative_residual);
    assert!(r.relative_residual <= 1e-4, "{:.3e}", r.relative_residual);
}

#[test]
fn lorentzian_five_term_decomposition() {
    let (d, b) = lorentzian();
    let f = fit(&d, &b, RealPartSpec::Analytic, 4);
    assert_eq!(f.series.len(), 5);
    assert!(f.series.is_decaying());
    // C(0) is real and equals the first real-part sample
    let c0 = f.series.eval(0.0);
    let budget = 10.0 * f.imag.sample_residual + 1e-12;
    assert!((c0.re - f.real_samples.samples[0]).abs() <= budget);
    assert!(c0.im.abs() <= budget);

    let (curve, report) = spectrum_curve(&f.series, &d, &b, &GridPolicy::default()).unwrap();
    let peak = curve.argmax_abs_diff().unwrap();
    println!("error {:.4e}, largest deviation at w = {peak:.4}", report.error);
    assert!(report.error <= 1e-3, "error {:.4e}", report.error);
    assert!(peak.abs() <= 1.0, "largest deviation at w = {peak}");
}

#[test]
fn semicircle_fifteen_term_decomposition() {
    let (d, b) = semicircle();
    let f = fit(&d, &b, RealPartSpec::Fitted(7), 8);
    assert!(f.series.len() >= 15, "{} terms", f.series.len());
    assert!(f.series.is_decaying());
    let report = fit_error(&f.series, &d, &b, &GridPolicy::default()).unwrap();
    println!("error {:.4e} with {} terms", report.error, f.series.len());
    assert!(report.error <= 1e-2, "error {:.4e}", report.error);
}

#[test]
fn pole_expansion_refuses_semicircle() {
    let (d, b) = semicircle();
    assert!(matches!(
        psd_correlation_series(&d, &b, 10),
        Err(Error::UnsupportedDensity(_))
    ));
}
