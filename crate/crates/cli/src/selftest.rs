//! Quick invariant checks over seeded random inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use prony_bath::analysis::{ado_count, ado_count_brute_force, part_error, GridPolicy};
use prony_bath::prony::{build_hankel, fit_part, takagi_factorize, EigenSolver, FitPolicy};
use prony_bath::psd::{approximant, pade_poles};
use prony_bath::spectral::{analytic_lorentzian_real_part, fermi};
use prony_bath::{
    BathParameters, Complex64, ExponentialSeries, Part, SampledCorrelation, SpectralDensity,
    Statistics, TimeGrid,
};

use crate::output::json_bytes;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, result: Result<String, String>) -> Check {
    match result {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

/// Random roots in `0.2 <= |w| <= 0.95`, real or in conjugate pairs with
/// conjugate amplitudes, sampled on `2n + 1` points with `dt = 1`.
fn synthetic(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Complex64>, Vec<Complex64>, Vec<f64>) {
    let mut roots: Vec<Complex64> = Vec::new();
    let mut amps: Vec<Complex64> = Vec::new();
    let k = rng.random_range(1..=4);
    while roots.len() < k {
        let r = rng.random_range(0.2..0.95);
        let pair = roots.len() + 2 <= k && rng.random_bool(0.5);
        let w = if pair {
            Complex64::from_polar(r, rng.random_range(0.3..2.8))
        } else {
            Complex64::new(if rng.random_bool(0.5) { r } else { -r }, 0.0)
        };
        let far = roots.iter().all(|z| (z - w).norm() >= 0.05 && (z - w.conj()).norm() >= 0.05);
        if !far {
            continue;
        }
        let a: f64 = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        if pair {
            let c = Complex64::from_polar(a.abs(), rng.random_range(-3.0..3.0));
            roots.extend([w, w.conj()]);
            amps.extend([c, c.conj()]);
        } else {
            roots.push(w);
            amps.push(Complex64::new(a, 0.0));
        }
    }
    let samples = (0..=2 * n)
        .map(|j| {
            roots
                .iter()
                .zip(&amps)
                .map(|(w, a)| a * w.powu(j as u32))
                .sum::<Complex64>()
                .re
        })
        .collect();
    (roots, amps, samples)
}

fn synthetic_recovery(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let n = 40;
    let signals = 20;
    let mut worst: f64 = 0.0;
    for s in 0..signals {
        let (roots, amps, samples) = synthetic(rng, n);
        let data = SampledCorrelation::from_samples(
            TimeGrid::new(2.0 * n as f64, n).map_err(|e| e.to_string())?,
            Part::Real,
            samples,
        )
        .map_err(|e| e.to_string())?;
        let (series, report) = fit_part(&data, roots.len(), &FitPolicy::default())
            .map_err(|e| format!("signal {s}: {e}"))?;
        if report.k_effective != roots.len() {
            return Err(format!("signal {s}: {} of {} roots", report.k_effective, roots.len()));
        }
        // negative real roots come back as two half-amplitude terms
        for (w, a) in roots.iter().zip(&amps) {
            let matches: Vec<_> = series
                .terms
                .iter()
                .filter(|t| ((-t.gamma).exp() - w).norm() <= 1e-6 * w.norm())
                .collect();
            let Some(t) = matches.first() else {
                return Err(format!("signal {s}: root {w} not recovered"));
            };
            let root_err = ((-t.gamma).exp() - w).norm() / w.norm();
            let amp: Complex64 = matches.iter().map(|t| t.eta).sum();
            let amp_err = (amp - a).norm() / a.norm();
            worst = worst.max(root_err).max(amp_err);
        }
    }
    if worst <= 1e-8 {
        Ok(format!("{signals} signals, worst relative error {worst:.2e}"))
    } else {
        Err(format!("worst relative error {worst:.2e}"))
    }
}

fn fermi_pairing(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let worst = (0..1000)
        .map(|_| {
            let x = rng.random_range(-700.0..700.0);
            (fermi(x) + fermi(-x) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    if worst <= 1e-15 {
        Ok(format!("max |f(x) + f(-x) - 1| = {worst:.1e}"))
    } else {
        Err(format!("max |f(x) + f(-x) - 1| = {worst:.1e}"))
    }
}

fn pole_window(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let order = 10;
    let p = pade_poles(Statistics::Fermionic, order).map_err(|e| e.to_string())?;
    let reach = std::f64::consts::PI * order as f64 / 2.0;
    let worst = (0..2000)
        .map(|_| {
            let x = rng.random_range(-reach..reach);
            (approximant(&p, x) - fermi(x)).abs()
        })
        .fold(0.0, f64::max);
    if worst <= 1e-6 {
        Ok(format!("P = {order}, max deviation {worst:.2e}"))
    } else {
        Err(format!("P = {order}, max deviation {worst:.2e}"))
    }
}

fn cost_model() -> Result<String, String> {
    let e = ado_count(5, 1, 2, 6).map_err(|e| e.to_string())?;
    if e.n_ado.to_string() != "60459" {
        return Err(format!("K~ = 20, L = 6 gives {}", e.n_ado));
    }
    for k_tilde in 1..=12u32 {
        for l in 1..=4u32 {
            let exact = prony_bath::analysis::binomial_sum(k_tilde as u64, l as u64);
            let brute = ado_count_brute_force(k_tilde, l);
            if exact.to_string() != brute.to_string() {
                return Err(format!("K~ = {k_tilde}, L = {l}: {exact} vs {brute}"));
            }
        }
    }
    Ok("60459 and subset enumeration for K~ <= 12, L <= 4".into())
}

fn series_round_trip(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let terms = (0..6)
        .map(|_| {
            prony_bath::ExponentialTerm::new(
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                Complex64::new(rng.random_range(1e-3..10.0), rng.random_range(-5.0..5.0)),
            )
        })
        .collect();
    let series = ExponentialSeries::new(terms);
    let first = json_bytes(&series).map_err(|e| e.to_string())?;
    let back: ExponentialSeries = serde_json::from_slice(&first).map_err(|e| e.to_string())?;
    let second = json_bytes(&back).map_err(|e| e.to_string())?;
    if first == second && back == series {
        Ok(format!("{} bytes", first.len()))
    } else {
        Err("re-emitted series differs".into())
    }
}

fn analytic_self_comparison() -> Result<String, String> {
    let d = SpectralDensity::lorentzian(1.0, 10.0).map_err(|e| e.to_string())?;
    let b = BathParameters::fermionic(10.0).map_err(|e| e.to_string())?;
    let s = analytic_lorentzian_real_part(&d).map_err(|e| e.to_string())?;
    let r = part_error(&s, &d, &b, Part::Real, &GridPolicy::default()).map_err(|e| e.to_string())?;
    if r.error <= 1e-10 {
        Ok(format!("error {:.2e}", r.error))
    } else {
        Err(format!("error {:.2e}", r.error))
    }
}

fn fit_invariants(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let n = 150;
    let noise: Vec<f64> = (0..=2 * n).map(|_| rng.random_range(-1e-6..1e-6)).collect();
    let samples: Vec<f64> = (0..=2 * n)
        .map(|j| {
            let t = j as f64 * 0.1;
            (-0.2 * t).exp() * (1.3 * t).cos() - 0.4 * (-0.05 * t).exp() + noise[j]
        })
        .collect();
    let grid = TimeGrid::new(0.2 * n as f64, n).map_err(|e| e.to_string())?;
    let data = SampledCorrelation::from_samples(grid, Part::Real, samples).map_err(|e| e.to_string())?;
    let h = build_hankel(&data);
    let f = takagi_factorize(&h, 8, EigenSolver::Dense).map_err(|e| e.to_string())?;
    let residual = f.residuals.iter().copied().fold(0.0, f64::max);
    let (series, report) = fit_part(&data, 5, &FitPolicy::default()).map_err(|e| e.to_string())?;
    let scale = data.max_abs();
    let imag = (0..200)
        .map(|j| series.eval(j as f64 * 0.173).im.abs())
        .fold(0.0, f64::max);
    let ok = series.is_decaying() && imag <= 1e-8 * scale && residual <= 1e-10 && report.k_effective <= 5;
    let detail = format!(
        "takagi residual {residual:.1e}, max |Im| {imag:.1e}, K_eff {}",
        report.k_effective
    );
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

pub fn run_selftest(seed: u64) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = vec![
        check("synthetic_recovery", synthetic_recovery(&mut rng)),
        check("fermi_pairing", fermi_pairing(&mut rng)),
        check("pole_window", pole_window(&mut rng)),
        check("cost_model", cost_model()),
        check("series_round_trip", series_round_trip(&mut rng)),
        check("analytic_self_comparison", analytic_self_comparison()),
        check("fit_invariants", fit_invariants(&mut rng)),
    ];
    SelftestReport { seed, checks }
}
