//! Exact recovery of forward-generated exponential sums.

use num_complex::Complex64;
use prony_bath::prony::{fit_part, FitPolicy};
use prony_bath::spectral::{Part, SampledCorrelation, TimeGrid};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

/// A real signal made of real roots and conjugate pairs.
#[derive(Debug, Clone)]
struct Signal {
    roots: Vec<Complex64>,
    amplitudes: Vec<Complex64>,
}

impl Signal {
    fn samples(&self, len: usize) -> Vec<f64> {
        (0..len)
            .map(|j| {
                self.roots
                    .iter()
                    .zip(&self.amplitudes)
                    .map(|(w, z)| (z * w.powu(j as u32)).re)
                    .sum()
            })
            .collect()
    }
}

fn well_separated(roots: &[Complex64], min_sep: f64) -> bool {
    roots
        .iter()
        .enumerate()
        .all(|(i, a)| roots[i + 1..].iter().all(|b| (a - b).norm() >= min_sep))
}

/// `k` roots with modulus in `[0.2, 0.95]`: real roots, or pairs when room allows.
fn signal(k: usize) -> impl Strategy<Value = Signal> {
    let modes = proptest::collection::vec(
        (0.2f64..0.95, 0.0f64..std::f64::consts::PI, 0.2f64..2.0, any::<bool>(), any::<bool>()),
        k,
    );
    modes
        .prop_map(move |spec| {
            let mut roots = Vec::new();
            let mut amps = Vec::new();
            for (r, theta, a, pair, neg) in spec {
                if roots.len() == k {
                    break;
                }
                let sign = if neg { -1.0 } else { 1.0 };
                if pair && roots.len() + 2 <= k {
                    let w = Complex64::from_polar(r, theta.max(0.05));
                    let z = Complex64::from_polar(0.5 * a, theta);
                    roots.extend([w, w.conj()]);
                    amps.extend([z, z.conj()]);
                } else {
                    roots.push(Complex64::new(r, 0.0));
                    amps.push(Complex64::new(sign * a, 0.0));
                }
            }
            Signal { roots, amplitudes: amps }
        })
        .prop_filter("roots too close", |s| well_separated(&s.roots, 0.02))
}

fn matched(found: &[(Complex64, Complex64)], expected: &Signal, tol: f64) -> Result<(), String> {
    if found.len() != expected.roots.len() {
        return Err(format!("found {} roots, expected {}", found.len(), expected.roots.len()));
    }
    for (w, z) in expected.roots.iter().zip(&expected.amplitudes) {
        let (fw, fz) = found
            .iter()
            .min_by(|a, b| (a.0 - w).norm().total_cmp(&(b.0 - w).norm()))
            .unwrap();
        if (fw - w).norm() > tol * w.norm() || (fz - z).norm() > tol * z.norm() {
            return Err(format!("root {w} amp {z}: got {fw} amp {fz}"));
        }
    }
    Ok(())
}

fn run(s: &Signal, n: usize) -> Result<(), String> {
    let grid = TimeGrid::new(2.0 * n as f64, n).unwrap(); // dt = 1
    let samples = SampledCorrelation::from_samples(grid, Part::Real, s.samples(grid.len())).unwrap();
    let k = s.roots.len();
    let (series, report) = fit_part(&samples, k, &FitPolicy::default()).map_err(|e| e.to_string())?;
    let found: Vec<(Complex64, Complex64)> = series
        .terms
        .iter()
        .map(|t| ((-t.gamma).exp(), t.eta))
        .collect();
    if !series.is_decaying() {
        return Err("non-decaying exponent".into());
    }
    if report.k_effective != k {
        return Err(format!("k_effective {} for K = {k}", report.k_effective));
    }
    matched(&found, s, 1e-8)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, rng_seed: RngSeed::Fixed(0x5eed), ..ProptestConfig::default() })]

    #[test]
    fn recovers_roots_and_amplitudes(s in (1usize..=5).prop_flat_map(signal)) {
        prop_assert!(run(&s, 60).is_ok(), "{:?}", run(&s, 60));
    }

    #[test]
    fn fitted_signal_is_real_between_samples(s in (1usize..=4).prop_flat_map(signal), frac in 0.0f64..1.0) {
        let n = 40;
        let grid = TimeGrid::new(2.0 * n as f64, n).unwrap();
        let phi = s.samples(grid.len());
        let scale = phi.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let samples = SampledCorrelation::from_samples(grid, Part::Imag, phi).unwrap();
        let (series, _) = fit_part(&samples, s.roots.len(), &FitPolicy::default()).unwrap();
        for j in 0..grid.len() {
            let t = grid.time(j) + frac;
            prop_assert!(series.eval(t).im.abs() <= 1e-8 * scale);
        }
    }
}

#[test]
fn two_hundred_signals_at_n_200() {
    use proptest::strategy::ValueTree;
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    let mut runner = TestRunner::new_with_rng(
        Config::default(),
        TestRng::from_seed(RngAlgorithm::ChaCha, &[7u8; 32]),
    );
    let strategy = (1usize..=5).prop_flat_map(signal);
    let start = std::time::Instant::now();
    let mut failures = Vec::new();
    for _ in 0..200 {
        let s = strategy.new_tree(&mut runner).unwrap().current();
        if let Err(e) = run(&s, 200) {
            failures.push(format!("{e} {s:?}"));
        }
    }
    println!("200 signals in {:?}", start.elapsed());
    assert!(failures.is_empty(), "{failures:?}");
}

/// Three real roots within 0.08 of each other at the small-modulus end, next
/// to a close pair near 0.9. Found by random search. Rounding the samples
/// alone moves these parameters by up to about 3e-7 relative, so the 1e-8
/// bound is out of reach in double precision; kept as a recorded exception.
#[test]
fn clustered_real_roots_at_n_200() {
    let roots = [0.2506306408494454, 0.2, 0.27530921541711256, 0.8986760501309441, 0.8676082832443455];
    let amps = [0.2, 0.2, 0.2, 0.2, 1.911212087535012];
    let s = Signal {
        roots: roots.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        amplitudes: amps.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
    };
    assert!(well_separated(&s.roots, 0.02));
    let r = run(&s, 200);
    assert!(r.is_ok(), "{r:?}");
}
