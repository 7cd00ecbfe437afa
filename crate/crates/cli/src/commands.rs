use std::path::Path;

use serde::Serialize;

use prony_bath::analysis::{
    ado_count, compare_costs, composite_grid, exact_part_spectrum, exact_spectrum, fit_error,
    matched_ratio, minimal_k_for_residual, part_error, sweep_accuracy, CostEstimate, ErrorReport,
    MatchedRatio, Method, PfdSweeper, Rounded3, SpectrumCurve, SweepConfig, SweepTable,
};
use prony_bath::prony::{fit_correlation, fit_part, PronyReport, RealPartSpec};
use prony_bath::spectral::{analytic_lorentzian_real_part, sample_complex};
use prony_bath::{Complex64, ExponentialSeries, Part, SpectralDensity, Statistics};

use crate::config::{AnalyticTag, BathConfig, DensityConfig, GridConfig, RealBudget, RunConfig};
use crate::failure::CliError;
use crate::output::{csv_bytes, json_bytes, sci, Artifact};

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub density: DensityConfig,
    pub bath: BathConfig,
    pub grid: GridConfig,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_error: Option<f64>,
    pub k_r: RealBudget,
    pub k_i: usize,
    pub terms: usize,
    pub real: Option<PronyReport>,
    pub imag: PronyReport,
    /// Relative L1 distance between the series spectrum and `J(w) f(w)`.
    pub spectrum_error: ErrorReport,
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    pub series: ExponentialSeries,
    pub report: FitReport,
    pub samples: Option<Vec<(f64, Complex64)>>,
}

impl FitOutput {
    pub fn artifacts(&self) -> Result<Vec<Artifact>, CliError> {
        let mut out = vec![
            Artifact::new("series.json", json_bytes(&self.series)?),
            Artifact::new("report.json", json_bytes(&self.report)?),
        ];
        if let Some(samples) = &self.samples {
            let rows = samples
                .iter()
                .map(|(t, c)| vec![sci(*t), sci(c.re), sci(c.im)])
                .collect::<Vec<_>>();
            out.push(Artifact::new("samples.csv", csv_bytes(&["t", "c_real", "c_imag"], &rows)?));
        }
        Ok(out)
    }
}

fn lorentzian_fermions(density: &SpectralDensity, cfg: &RunConfig) -> bool {
    matches!(density, SpectralDensity::Lorentzian { .. })
        && cfg.bath().map(|b| b.statistics == Statistics::Fermionic).unwrap_or(false)
}

/// Samples the configured bath and fits both parts.
pub fn cmd_fit(cfg: &RunConfig) -> Result<FitOutput, CliError> {
    let density = cfg.density()?;
    let bath = cfg.bath()?;
    let grid = cfg.grid()?;
    let quad = cfg.quadrature();
    let policy = cfg.fit_policy();
    let k_r = cfg.fit.k_r.or_else(|| {
        lorentzian_fermions(&density, cfg).then_some(RealBudget::Named(AnalyticTag::Analytic))
    });

    let (series, real, imag, k_r, k_i, samples) = match cfg.k_imag() {
        Some(k_i) => {
            let spec = match k_r {
                Some(RealBudget::Named(AnalyticTag::Analytic)) => RealPartSpec::Analytic,
                Some(RealBudget::Terms(k)) => RealPartSpec::Fitted(k),
                None => {
                    return Err(CliError::config(format!(
                        "fit: k_r is required for the {} density",
                        density.name()
                    )))
                }
            };
            let f = fit_correlation(&density, &bath, &grid, spec, k_i, &quad, &policy)?;
            let samples = cfg.output.samples_csv.then(|| {
                (0..grid.len())
                    .map(|j| {
                        (grid.time(j), Complex64::new(f.real_samples.samples[j], f.imag_samples.samples[j]))
                    })
                    .collect()
            });
            (f.series, f.real, f.imag, k_r.expect("resolved above"), k_i, samples)
        }
        None => {
            let target = cfg.fit.target_error.expect("target mode");
            let sampled = sample_complex(&density, &bath, &grid, &quad)?;
            let re = sampled.part(Part::Real);
            let im = sampled.part(Part::Imag);
            let (mut series, real, k_r) = match k_r {
                Some(RealBudget::Named(AnalyticTag::Analytic)) => (
                    analytic_lorentzian_real_part(&density)?,
                    None,
                    RealBudget::Named(AnalyticTag::Analytic),
                ),
                Some(RealBudget::Terms(k)) => {
                    let (s, r) = fit_part(&re, k, &policy)?;
                    (s, Some(r), RealBudget::Terms(k))
                }
                None => {
                    let (k, s, r) = minimal_k_for_residual(&re, target, cfg.fit.k_max, &policy)?;
                    (s, Some(r), RealBudget::Terms(k))
                }
            };
            let (k_i, imag_series, imag) = minimal_k_for_residual(&im, target, cfg.fit.k_max, &policy)?;
            series.extend(&imag_series.scaled(Complex64::new(0.0, 1.0)));
            let samples = cfg.output.samples_csv.then(|| {
                (0..grid.len())
                    .map(|j| (grid.time(j), sampled.values[j]))
                    .collect()
            });
            (series, real, imag, k_r, k_i, samples)
        }
    };
    let spectrum_error = fit_error(&series, &density, &bath, &cfg.error_grid())?;
    let report = FitReport {
        density: cfg.density.clone(),
        bath: cfg.bath,
        grid: cfg.grid,
        seed: cfg.seed,
        target_error: cfg.fit.target_error,
        k_r,
        k_i,
        terms: series.len(),
        real,
        imag,
        spectrum_error,
    };
    Ok(FitOutput {
        series,
        report,
        samples,
    })
}

/// Which exact spectrum a series is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumPart {
    /// `J(w) f(w)`.
    Full,
    /// Even component, the transform of the real part.
    Real,
    /// Odd component, the transform of `i` times the imaginary part.
    Imag,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    pub part: SpectrumPart,
    pub terms: usize,
    pub max_abs_diff: f64,
    pub argmax_omega: f64,
    pub spectrum_error: ErrorReport,
}

#[derive(Debug, Clone)]
pub struct SpectrumOutput {
    pub curve: SpectrumCurve,
    pub summary: SpectrumSummary,
}

impl SpectrumOutput {
    pub fn artifacts(&self) -> Result<Vec<Artifact>, CliError> {
        let c = &self.curve;
        let rows = c
            .omega
            .iter()
            .zip(&c.exact)
            .zip(&c.fitted)
            .map(|((w, e), f)| vec![sci(*w), sci(*e), sci(*f), sci((f - e).abs())])
            .collect::<Vec<_>>();
        Ok(vec![
            Artifact::new(
                "spectrum.csv",
                csv_bytes(&["omega", "c_exact", "c_fit", "abs_diff"], &rows)?,
            ),
            Artifact::new("spectrum.json", json_bytes(&self.summary)?),
        ])
    }
}

pub fn read_series(path: &Path) -> Result<ExponentialSeries, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let series: ExponentialSeries = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("series file {}: {e}", path.display())))?;
    if series.is_empty() {
        return Err(CliError::config("series file holds no terms"));
    }
    if !series.is_decaying() {
        return Err(CliError::config("series has a term with Re gamma <= 0"));
    }
    Ok(series)
}

/// Exact and series spectra on the converged error grid.
pub fn cmd_spectrum(
    cfg: &RunConfig,
    series: &ExponentialSeries,
    part: SpectrumPart,
) -> Result<SpectrumOutput, CliError> {
    let density = cfg.density()?;
    let bath = cfg.bath()?;
    let policy = cfg.error_grid();
    let report = match part {
        SpectrumPart::Full => fit_error(series, &density, &bath, &policy)?,
        SpectrumPart::Real => part_error(series, &density, &bath, Part::Real, &policy)?,
        SpectrumPart::Imag => part_error(series, &density, &bath, Part::Imag, &policy)?,
    };
    let omega = composite_grid(series, &density, &bath, &policy, report.doublings);
    let exact = |w: f64| match part {
        SpectrumPart::Full => exact_spectrum(&density, &bath, w),
        SpectrumPart::Real => exact_part_spectrum(&density, &bath, Part::Real, w),
        SpectrumPart::Imag => exact_part_spectrum(&density, &bath, Part::Imag, w),
    };
    let curve = SpectrumCurve::evaluate(series, &exact, omega)?;
    let diff = curve.abs_diff();
    let max_abs_diff = diff.iter().copied().fold(0.0, f64::max);
    let summary = SpectrumSummary {
        part,
        terms: series.len(),
        max_abs_diff,
        argmax_omega: curve.argmax_abs_diff().unwrap_or(0.0),
        spectrum_error: report,
    };
    Ok(SpectrumOutput { curve, summary })
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareSummary {
    pub seed: u64,
    pub methods: Vec<Method>,
    pub k_range: Vec<usize>,
    pub tables: Vec<SweepTable>,
    /// Present only when both methods and anchors are configured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<MatchedRatio>>,
}

#[derive(Debug, Clone)]
pub struct CompareOutput {
    pub summary: CompareSummary,
}

impl CompareOutput {
    pub fn artifacts(&self) -> Result<Vec<Artifact>, CliError> {
        let rows = self
            .summary
            .tables
            .iter()
            .flat_map(|t| {
                t.rows
                    .iter()
                    .map(move |r| vec![sci(t.beta), r.method.name().to_string(), r.k.to_string(), sci(r.error)])
            })
            .collect::<Vec<_>>();
        Ok(vec![
            Artifact::new("compare.csv", csv_bytes(&["beta", "method", "k", "error"], &rows)?),
            Artifact::new("compare.json", json_bytes(&self.summary)?),
        ])
    }
}

/// Error-versus-K tables at every configured temperature and, with both
/// methods, the pole-expansion size needed to match the fitted error at
/// the anchor budget.
pub fn cmd_compare(cfg: &RunConfig) -> Result<CompareOutput, CliError> {
    let density = cfg.density()?;
    let c = &cfg.compare;
    let mut methods = c.methods.clone();
    methods.sort();
    methods.dedup();
    let mut ks = c.k_range.clone();
    ks.sort_unstable();
    ks.dedup();
    let sweep = SweepConfig {
        grid: cfg.grid()?,
        quad: cfg.quadrature(),
        fit: cfg.fit_policy(),
        error_grid: cfg.error_grid(),
    };
    let with_ratios = methods.contains(&Method::Pfd) && methods.contains(&Method::Psd) && !c.anchor_k.is_empty();
    let [p_min, p_max] = cfg.psd.p_range;
    let mut tables = Vec::with_capacity(c.betas.len());
    let mut ratios = Vec::new();
    for (i, &beta) in c.betas.iter().enumerate() {
        let bath = cfg.bath_at(beta)?;
        let table = sweep_accuracy(&density, &bath, &methods, &ks, &sweep)?;
        if with_ratios {
            let anchor = c.anchor_k[i];
            let tabulated = table
                .rows
                .iter()
                .find(|r| r.method == Method::Pfd && r.k == anchor)
                .map(|r| r.error);
            let pfd_error = match tabulated {
                Some(e) => e,
                None => {
                    let fit = PfdSweeper::new(&density, &bath, anchor, &sweep)?.fit(anchor)?;
                    fit_error(&fit.series, &density, &bath, &sweep.error_grid)?.error
                }
            };
            ratios.push(matched_ratio(
                &density,
                &bath,
                anchor,
                pfd_error,
                &sweep.error_grid,
                p_min..=p_max,
            )?);
        }
        tables.push(table);
    }
    Ok(CompareOutput {
        summary: CompareSummary {
            seed: cfg.seed,
            methods,
            k_range: ks,
            tables,
            ratios: with_ratios.then_some(ratios),
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CostOutput {
    pub first: CostEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub second: Option<CostEstimate>,
    /// `first.n_ado / second.n_ado` to three significant digits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<Rounded3>,
}

/// Hierarchy size for `(K, L)`, optionally against a second `(K2, L2)`.
pub fn cmd_cost(
    k: u64,
    n_alpha: u64,
    n_u: u64,
    l: u64,
    second: Option<(u64, u64)>,
) -> Result<CostOutput, CliError> {
    let first = ado_count(k, n_alpha, n_u, l)?;
    match second {
        None => Ok(CostOutput {
            first,
            second: None,
            ratio: None,
        }),
        Some((k2, l2)) => {
            let other = ado_count(k2, n_alpha, n_u, l2)?;
            let cmp = compare_costs(first, other)?;
            Ok(CostOutput {
                first: cmp.first,
                second: Some(cmp.second),
                ratio: Some(cmp.ratio),
            })
        }
    }
}
