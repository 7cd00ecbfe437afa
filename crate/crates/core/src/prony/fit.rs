use num_complex::Complex64;
use serde::Serialize;

use super::hankel::build_hankel;
use super::roots::{
    amplitudes_for_values, candidate_roots_with, exponents_from_roots, mode_norm, sample_residual,
    BOUNDARY_DELTA,
};
use super::takagi::{takagi_factorize, EigenSolver, HankelFactorization};
use crate::error::{Error, Result};
use crate::series::{ExponentialSeries, ExponentialTerm};
use crate::spectral::{
    analytic_lorentzian_real_part, sample_complex, BathParameters, Part, QuadratureConfig,
    SampledCorrelation, SpectralDensity, Statistics, TimeGrid,
};

/// Number of leading `|sigma_m|` kept in reports.
const REPORTED_SIGMAS: usize = 16;

/// Tunables of the root selection and clean-up stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitPolicy {
    pub boundary_delta: f64,
    /// Terms with `|zeta| < prune_rel * max |zeta|` are dropped.
    pub prune_rel: f64,
    /// Roots closer than this to each other's conjugate are symmetrized.
    pub pair_tol: f64,
    pub solver: EigenSolver,
}

impl Default for FitPolicy {
    fn default() -> Self {
        Self {
            boundary_delta: BOUNDARY_DELTA,
            prune_rel: 1e-8,
            pair_tol: 1e-8,
            solver: EigenSolver::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RootCounts {
    pub interior: usize,
    pub boundary: usize,
    pub exterior: usize,
    pub zero: usize,
    pub at_infinity: usize,
}

/// Diagnostics of one part fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PronyReport {
    pub part: String,
    pub k_requested: usize,
    /// Number of distinct roots kept.
    pub k_effective: usize,
    /// Number of emitted terms (a negative real root yields two).
    pub terms: usize,
    pub sample_residual: f64,
    /// `sample_residual / max |phi|`.
    pub relative_residual: f64,
    /// `|sigma_K| / |sigma_0|`.
    pub sigma_tail: f64,
    /// Leading `|sigma_m|` in descending order.
    pub sigma: Vec<f64>,
    pub root_counts: RootCounts,
    pub condition: f64,
    pub warnings: Vec<String>,
}

/// Source of the real-part terms in [`fit_correlation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RealPartSpec {
    /// Closed-form single term; Lorentzian fermionic baths only.
    Analytic,
    Fitted(usize),
}

#[derive(Debug, Clone)]
pub struct CorrelationFit {
    /// `C(t) = sum eta e^{-gamma t}` with imaginary-part amplitudes multiplied by `i`.
    pub series: ExponentialSeries,
    pub real_series: ExponentialSeries,
    pub imag_series: ExponentialSeries,
    /// `None` when the real part is analytic.
    pub real: Option<PronyReport>,
    pub imag: PronyReport,
    /// Sampled parts used for fitting.
    pub real_samples: SampledCorrelation,
    pub imag_samples: SampledCorrelation,
}

/// Fits one real-valued part with `k` exponentials.
pub fn fit_part(
    samples: &SampledCorrelation,
    k: usize,
    policy: &FitPolicy,
) -> Result<(ExponentialSeries, PronyReport)> {
    let h = build_hankel(samples);
    if k == 0 || k >= h.order() {
        return Err(Error::InvalidInput(format!(
            "K = {k} must satisfy 1 <= K < N + 1 = {}",
            h.order()
        )));
    }
    let pairs = (k + 1).max(REPORTED_SIGMAS).min(h.order());
    let factorization = takagi_factorize(&h, pairs, policy.solver)?;
    fit_part_with_factorization(samples, &factorization, k, policy)
}

/// As [`fit_part`], reusing a factorization holding at least `k + 1` pairs.
pub fn fit_part_with_factorization(
    samples: &SampledCorrelation,
    factorization: &HankelFactorization,
    k: usize,
    policy: &FitPolicy,
) -> Result<(ExponentialSeries, PronyReport)> {
    if k == 0 {
        return Err(Error::InvalidInput("K must be at least 1".into()));
    }
    let phi = &samples.samples;
    let scale = samples.max_abs();
    let roots = candidate_roots_with(factorization, k, policy.boundary_delta)?;
    let counts = RootCounts {
        interior: roots.interior.len(),
        boundary: roots.boundary.len(),
        exterior: roots.exterior.len(),
        zero: roots.zero,
        at_infinity: roots.at_infinity,
    };
    let mut warnings = Vec::new();
    let mut kept: Vec<Complex64> = roots.interior.clone();
    if kept.len() < k {
        warnings.push(format!("found {} interior roots, expected {k}", kept.len()));
    }

    let mut fit = amplitudes_for_values(phi, &kept)?;
    if kept.len() > k {
        warnings.push(format!("found {} interior roots, expected {k}", kept.len()));
        let zmax = fit.amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let keep: Vec<bool> = fit
            .amplitudes
            .iter()
            .map(|z| z.norm() >= policy.prune_rel * zmax)
            .collect();
        kept = select(&kept, &keep);
        fit = amplitudes_for_values(phi, &kept)?;
        if kept.len() > k {
            kept = strongest_groups(&kept, &fit.amplitudes, k, phi.len(), policy.pair_tol);
            warnings.push(format!("kept the {} strongest of the interior roots", kept.len()));
            fit = amplitudes_for_values(phi, &kept)?;
        }
    }

    let (sym_roots, changed) = symmetrize(&kept, policy.pair_tol);
    if changed {
        kept = sym_roots;
        fit = amplitudes_for_values(phi, &kept)?;
    }
    let amplitudes = pair_amplitudes(&kept, &fit.amplitudes, policy.pair_tol);
    if fit.ill_conditioned {
        warnings.push(format!("Vandermonde condition number {:.3e}", fit.condition));
    }

    let exponents = exponents_from_roots(&kept, &samples.grid)?;
    let mut terms = Vec::with_capacity(kept.len() + 1);
    for ((&w, &lambda), &zeta) in kept.iter().zip(&exponents).zip(&amplitudes) {
        if w.im == 0.0 && w.re < 0.0 {
            // alternating mode: emit e^{-a t} cos(pi t / dt) as a conjugate pair
            let half = Complex64::new(0.5 * zeta.re, 0.0);
            terms.push(ExponentialTerm::new(half, lambda));
            terms.push(ExponentialTerm::new(half, lambda.conj()));
        } else {
            terms.push(ExponentialTerm::new(zeta, lambda));
        }
    }
    let residual = sample_residual(phi, &kept, &amplitudes);
    let sigma_tail = if k < factorization.len() {
        factorization.sigma_ratio(k)
    } else {
        f64::NAN
    };
    let report = PronyReport {
        part: samples.part.name().to_string(),
        k_requested: k,
        k_effective: kept.len(),
        terms: terms.len(),
        sample_residual: residual,
        relative_residual: if scale > 0.0 { residual / scale } else { residual },
        sigma_tail,
        sigma: factorization
            .c_eigenvalues
            .iter()
            .take(REPORTED_SIGMAS)
            .copied()
            .collect(),
        root_counts: counts,
        condition: fit.condition,
        warnings,
    };
    Ok((ExponentialSeries::new(terms), report))
}

fn select(roots: &[Complex64], keep: &[bool]) -> Vec<Complex64> {
    roots
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(w, _)| *w)
        .collect()
}

/// Index of the conjugate partner of each root, if any.
fn partners(roots: &[Complex64], tol: f64) -> Vec<Option<usize>> {
    let mut partner = vec![None; roots.len()];
    for i in 0..roots.len() {
        if partner[i].is_some() || roots[i].im.abs() <= tol {
            continue;
        }
        let best = (0..roots.len())
            .filter(|&j| j != i && partner[j].is_none() && roots[j].im.abs() > tol)
            .map(|j| (j, (roots[j] - roots[i].conj()).norm()))
            .filter(|&(_, d)| d <= tol)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((j, _)) = best {
            partner[i] = Some(j);
            partner[j] = Some(i);
        }
    }
    partner
}

/// Keeps whole conjugate groups in decreasing order of sampled-mode energy
/// until `k` roots are used.
fn strongest_groups(
    roots: &[Complex64],
    amplitudes: &[Complex64],
    k: usize,
    len: usize,
    tol: f64,
) -> Vec<Complex64> {
    let partner = partners(roots, tol);
    let mut groups: Vec<(Vec<usize>, f64)> = Vec::new();
    for i in 0..roots.len() {
        match partner[i] {
            Some(j) if j < i => continue,
            Some(j) => {
                let weight = amplitudes[i].norm() * mode_norm(roots[i], len)
                    + amplitudes[j].norm() * mode_norm(roots[j], len);
                groups.push((vec![i, j], weight));
            }
            None => groups.push((vec![i], amplitudes[i].norm() * mode_norm(roots[i], len))),
        }
    }
    groups.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0[0].cmp(&b.0[0])));
    let mut chosen = Vec::new();
    for (g, _) in groups {
        if chosen.len() + g.len() <= k {
            chosen.extend(g);
        }
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|i| roots[i]).collect()
}

/// Makes near-real roots real and near-conjugate pairs exactly conjugate.
fn symmetrize(roots: &[Complex64], tol: f64) -> (Vec<Complex64>, bool) {
    let partner = partners(roots, tol);
    let mut out = roots.to_vec();
    for i in 0..roots.len() {
        match partner[i] {
            None if roots[i].im.abs() <= tol => out[i] = Complex64::new(roots[i].re, 0.0),
            Some(j) if i < j => {
                let mid = 0.5 * (roots[i] + roots[j].conj());
                out[i] = mid;
                out[j] = mid.conj();
            }
            _ => {}
        }
    }
    let changed = out != roots;
    (out, changed)
}

/// Forces conjugate amplitudes on conjugate roots and real ones on real roots.
fn pair_amplitudes(roots: &[Complex64], amplitudes: &[Complex64], tol: f64) -> Vec<Complex64> {
    let partner = partners(roots, tol);
    let mut out = amplitudes.to_vec();
    for i in 0..roots.len() {
        match partner[i] {
            None if roots[i].im == 0.0 => out[i] = Complex64::new(amplitudes[i].re, 0.0),
            Some(j) if i < j && roots[j] == roots[i].conj() => {
                let mid = 0.5 * (amplitudes[i] + amplitudes[j].conj());
                out[i] = mid;
                out[j] = mid.conj();
            }
            _ => {}
        }
    }
    out
}

/// Fits both parts of the correlation function and assembles the complex series.
#[allow(clippy::too_many_arguments)]
pub fn fit_correlation(
    density: &SpectralDensity,
    bath: &BathParameters,
    grid: &TimeGrid,
    real: RealPartSpec,
    k_imag: usize,
    quad: &QuadratureConfig,
    policy: &FitPolicy,
) -> Result<CorrelationFit> {
    let analytic = match real {
        RealPartSpec::Analytic => {
            if bath.statistics != Statistics::Fermionic {
                return Err(Error::Unsupported(
                    "the analytic real part applies to fermionic baths only".into(),
                ));
            }
            Some(analytic_lorentzian_real_part(density)?)
        }
        RealPartSpec::Fitted(_) => None,
    };
    let sampled = sample_complex(density, bath, grid, quad)?;
    let real_samples = sampled.part(Part::Real);
    let imag_samples = sampled.part(Part::Imag);
    let (real_series, real_report) = match (real, analytic) {
        (RealPartSpec::Fitted(k), _) => {
            let (s, r) = fit_part(&real_samples, k, policy)?;
            (s, Some(r))
        }
        (RealPartSpec::Analytic, Some(s)) => (s, None),
        (RealPartSpec::Analytic, None) => unreachable!(),
    };
    let (imag_series, imag_report) = fit_part(&imag_samples, k_imag, policy)?;
    let mut series = real_series.clone();
    series.extend(&imag_series.scaled(Complex64::new(0.0, 1.0)));
    Ok(CorrelationFit {
        series,
        real_series,
        imag_series,
        real: real_report,
        imag: imag_report,
        real_samples,
        imag_samples,
    })
}
