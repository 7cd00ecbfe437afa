use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::metric::{fit_error, ErrorReport, GridPolicy};
use crate::error::{Error, Result};
use crate::prony::{
    build_hankel, fit_part_with_factorization, takagi_factorize, FitPolicy, PronyReport,
};
use crate::psd::psd_correlation_series;
use crate::series::{ExponentialSeries, ExponentialTerm};
use crate::spectral::{
    analytic_lorentzian_real_part, sample_complex, BathParameters, Part, QuadratureConfig,
    SampledCorrelation, SpectralDensity, Statistics, TimeGrid,
};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pfd,
    Psd,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Pfd => "pfd",
            Method::Psd => "psd",
        }
    }
}

/// How a total term budget `K` is divided between the two parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PartSplit {
    /// `None` for the analytic single real-part term.
    pub k_real: Option<usize>,
    pub k_imag: usize,
}

/// Lorentzian fermionic baths use the analytic real part and `K - 1` fitted
/// imaginary-part terms; other densities split `K` as `floor(K/2)` real and
/// the rest imaginary.
pub fn split_budget(density: &SpectralDensity, bath: &BathParameters, k: usize) -> Result<PartSplit> {
    let analytic = matches!(density, SpectralDensity::Lorentzian { .. })
        && bath.statistics == Statistics::Fermionic;
    if analytic {
        if k < 2 {
            return Err(Error::InvalidInput(format!("K = {k} leaves no imaginary-part terms")));
        }
        Ok(PartSplit {
            k_real: None,
            k_imag: k - 1,
        })
    } else {
        if k < 2 {
            return Err(Error::InvalidInput(format!("K = {k} is too small to split")));
        }
        Ok(PartSplit {
            k_real: Some(k / 2),
            k_imag: k - k / 2,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: Method,
    /// Number of exponential terms.
    pub k: usize,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub beta: f64,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub grid: TimeGrid,
    pub quad: QuadratureConfig,
    pub fit: FitPolicy,
    pub error_grid: GridPolicy,
}

/// Samples once and factorizes each part once, then fits every requested
/// budget from the shared factorizations.
pub struct PfdSweeper {
    density: SpectralDensity,
    bath: BathParameters,
    real_samples: SampledCorrelation,
    imag_samples: SampledCorrelation,
    real: Option<crate::prony::HankelFactorization>,
    imag: crate::prony::HankelFactorization,
    policy: FitPolicy,
}

/// Series and diagnostics of one budget.
#[derive(Debug, Clone)]
pub struct BudgetFit {
    pub split: PartSplit,
    pub series: ExponentialSeries,
    pub real: Option<PronyReport>,
    pub imag: PronyReport,
}

impl PfdSweeper {
    pub fn new(
        density: &SpectralDensity,
        bath: &BathParameters,
        k_max: usize,
        config: &SweepConfig,
    ) -> Result<Self> {
        let split = split_budget(density, bath, k_max)?;
        let sampled = sample_complex(density, bath, &config.grid, &config.quad)?;
        let real_samples = sampled.part(Part::Real);
        let imag_samples = sampled.part(Part::Imag);
        let order = config.grid.n + 1;
        let pairs = |k: usize| (k + 1).max(16).min(order);
        let real = match split.k_real {
            Some(k) => Some(takagi_factorize(
                &build_hankel(&real_samples),
                pairs(k.max(k_max / 2 + 1)),
                config.fit.solver,
            )?),
            None => None,
        };
        let imag = takagi_factorize(
            &build_hankel(&imag_samples),
            pairs(split.k_imag.max(k_max)),
            config.fit.solver,
        )?;
        Ok(Self {
            density: density.clone(),
            bath: *bath,
            real_samples,
            imag_samples,
            real,
            imag,
            policy: config.fit,
        })
    }

    pub fn real_samples(&self) -> &SampledCorrelation {
        &self.real_samples
    }

    pub fn imag_samples(&self) -> &SampledCorrelation {
        &self.imag_samples
    }

    pub fn fit(&self, k: usize) -> Result<BudgetFit> {
        let split = split_budget(&self.density, &self.bath, k)?;
        let (mut series, real) = match (split.k_real, &self.real) {
            (None, _) => (analytic_lorentzian_real_part(&self.density)?, None),
            (Some(kr), Some(f)) => {
                let (s, r) = fit_part_with_factorization(&self.real_samples, f, kr, &self.policy)?;
                (s, Some(r))
            }
            (Some(_), None) => {
                return Err(Error::InvalidInput("budget exceeds the prepared range".into()))
            }
        };
        let (imag_series, imag) =
            fit_part_with_factorization(&self.imag_samples, &self.imag, split.k_imag, &self.policy)?;
        series.extend(&imag_series.scaled(Complex64::new(0.0, 1.0)));
        Ok(BudgetFit {
            split,
            series,
            real,
            imag,
        })
    }
}

/// Error of each method at each budget; rows sorted by `(method, K)`.
pub fn sweep_accuracy(
    density: &SpectralDensity,
    bath: &BathParameters,
    methods: &[Method],
    k_range: &[usize],
    config: &SweepConfig,
) -> Result<SweepTable> {
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    let mut ks = k_range.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut rows = Vec::new();
    for method in methods {
        match method {
            Method::Pfd => {
                let Some(&k_max) = ks.last() else { continue };
                let sweeper = PfdSweeper::new(density, bath, k_max, config)?;
                for &k in &ks {
                    let fit = sweeper.fit(k)?;
                    let report = fit_error(&fit.series, density, bath, &config.error_grid)?;
                    rows.push(SweepRow {
                        method,
                        k,
                        error: report.error,
                    });
                }
            }
            Method::Psd => {
                for &k in &ks {
                    if k < 2 {
                        return Err(Error::InvalidInput(format!(
                            "K = {k}: the pole expansion needs at least 2 terms"
                        )));
                    }
                    let report = psd_error(density, bath, k - 1, &config.error_grid)?;
                    rows.push(SweepRow {
                        method,
                        k,
                        error: report.error,
                    });
                }
            }
        }
    }
    Ok(SweepTable {
        beta: bath.beta,
        rows,
    })
}

/// Error of the order-`P` pole-expansion series (`P + 1` terms).
pub fn psd_error(
    density: &SpectralDensity,
    bath: &BathParameters,
    order: usize,
    policy: &GridPolicy,
) -> Result<ErrorReport> {
    let series = psd_correlation_series(density, bath, order)?;
    fit_error(&series, density, bath, policy)
}

/// Matched-accuracy comparison at one temperature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchedRatio {
    pub beta: f64,
    pub k_pfd: usize,
    pub pfd_error: f64,
    /// Smallest pole-expansion term count reaching `pfd_error`.
    pub k_psd: usize,
    pub psd_error: f64,
    pub ratio: f64,
}

/// Smallest order in `orders` whose error is at most `target`: doubling
/// from the lower end, then bisection. Assumes the error is monotone in the
/// order.
pub fn minimal_psd_order(
    density: &SpectralDensity,
    bath: &BathParameters,
    target: f64,
    policy: &GridPolicy,
    orders: RangeInclusive<usize>,
) -> Result<(usize, f64)> {
    let (min_order, max_order) = (*orders.start(), *orders.end());
    if min_order == 0 || min_order > max_order {
        return Err(Error::InvalidInput(format!(
            "pole order range {min_order}..={max_order} is empty or starts at 0"
        )));
    }
    let err = |p: usize| psd_error(density, bath, p, policy).map(|r| r.error);
    let mut hi = min_order;
    let mut hi_err = err(hi)?;
    let mut lo = min_order - 1;
    while hi_err > target {
        if hi >= max_order {
            return Err(Error::Unsupported(format!(
                "pole expansion does not reach error {target:.3e} within order {max_order}"
            )));
        }
        lo = hi;
        hi = (lo + (lo - min_order + 1)).min(max_order);
        hi_err = err(hi)?;
    }
    // invariant: err(lo) > target (or lo below the range), err(hi) <= target
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let e = err(mid)?;
        if e <= target {
            hi = mid;
            hi_err = e;
        } else {
            lo = mid;
        }
    }
    Ok((hi, hi_err))
}

pub fn matched_ratio(
    density: &SpectralDensity,
    bath: &BathParameters,
    k_pfd: usize,
    pfd_error: f64,
    policy: &GridPolicy,
    orders: RangeInclusive<usize>,
) -> Result<MatchedRatio> {
    let (order, psd_error) = minimal_psd_order(density, bath, pfd_error, policy, orders)?;
    let k_psd = order + 1;
    Ok(MatchedRatio {
        beta: bath.beta,
        k_pfd,
        pfd_error,
        k_psd,
        psd_error,
        ratio: k_psd as f64 / k_pfd as f64,
    })
}

/// Smallest imaginary-part budget whose relative sample residual is at most
/// `target`, scanning `1..=k_max` on one factorization.
pub fn minimal_k_for_residual(
    samples: &SampledCorrelation,
    target: f64,
    k_max: usize,
    policy: &FitPolicy,
) -> Result<(usize, ExponentialSeries, PronyReport)> {
    let h = build_hankel(samples);
    let k_max = k_max.min(h.order() - 1);
    let f = takagi_factorize(&h, (k_max + 1).max(16).min(h.order()), policy.solver)?;
    let mut best: Option<(usize, ExponentialSeries, PronyReport)> = None;
    for k in 1..=k_max {
        let (s, r) = fit_part_with_factorization(samples, &f, k, policy)?;
        if r.relative_residual <= target {
            return Ok((k, s, r));
        }
        if best.as_ref().is_none_or(|b| r.relative_residual < b.2.relative_residual) {
            best = Some((k, s, r));
        }
    }
    let residual = best.map(|b| b.2.relative_residual).unwrap_or(f64::INFINITY);
    Err(Error::Unsupported(format!(
        "no K <= {k_max} reaches relative residual {target:.3e} (best {residual:.3e})"
    )))
}

/// The first `count` terms of a series.
pub fn truncated(series: &ExponentialSeries, count: usize) -> ExponentialSeries {
    ExponentialSeries::new(series.terms.iter().take(count).copied().collect::<Vec<ExponentialTerm>>())
}
