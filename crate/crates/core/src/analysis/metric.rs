//! Relative L1 error between fitted and exact spectra,
//! `int |C_fit - C| dw / int |C| dw`, on a composite frequency grid.

use rayon::prelude::*;
use serde::Serialize;

use super::spectrum::{exact_part_spectrum, exact_spectrum, series_spectrum, SpectrumCurve};
use crate::error::{Error, Result};
use crate::series::ExponentialSeries;
use crate::spectral::{BathParameters, Part, SpectralDensity, TabulatedDensity};

/// Composite grid settings. Point counts refer to the coarsest level and
/// double with every refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPolicy {
    /// Integration limit; defaults to `max(50 delta, 5 W) + 30 / beta`.
    pub omega_max: Option<f64>,
    /// Logarithmic nodes per half axis between `1e-6/beta` and the limit.
    pub log_points: usize,
    /// Uniform nodes on `[-limit, limit]`.
    pub linear_points: usize,
    /// Nodes clustered around each series resonance and density edge.
    pub feature_points: usize,
    /// Relative change in the error accepted between two levels.
    pub rel_tol: f64,
    /// Absolute change accepted when the error itself is negligible.
    pub abs_floor: f64,
    pub max_doublings: usize,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            omega_max: None,
            log_points: 400,
            linear_points: 2000,
            feature_points: 48,
            rel_tol: 0.01,
            abs_floor: 1e-12,
            max_doublings: 8,
        }
    }
}

/// Default integration limit for a density and temperature.
pub fn default_omega_max(density: &SpectralDensity, bath: &BathParameters) -> f64 {
    let (delta, width) = density.scales();
    (50.0 * delta).max(5.0 * width) + 30.0 / bath.beta
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub error: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub omega_max: f64,
    pub points: usize,
    pub doublings: usize,
    pub grid_spec: String,
}

/// Ascending, deduplicated nodes of refinement level `level`.
pub fn composite_grid(
    series: &ExponentialSeries,
    density: &SpectralDensity,
    bath: &BathParameters,
    policy: &GridPolicy,
    level: usize,
) -> Vec<f64> {
    let omega_max = policy
        .omega_max
        .unwrap_or_else(|| default_omega_max(density, bath));
    let scale = 1usize << level;
    let mut nodes = Vec::new();

    let lo = (1e-6 / bath.beta).min(0.5 * omega_max);
    let n_log = policy.log_points * scale;
    let (a, b) = (lo.ln(), omega_max.ln());
    for i in 0..n_log {
        let w = (a + (b - a) * i as f64 / (n_log - 1).max(1) as f64).exp();
        nodes.push(w);
        nodes.push(-w);
    }

    // even count keeps w = 0 off the grid (bosonic pole)
    let n_lin = (policy.linear_points * scale).max(2) & !1;
    for i in 0..n_lin {
        nodes.push(-omega_max + 2.0 * omega_max * (i as f64 + 0.5) / n_lin as f64);
    }
    nodes.push(-omega_max);
    nodes.push(omega_max);

    let n_feat = policy.feature_points * scale;
    for t in &series.terms {
        let center = -t.gamma.im;
        let width = t.gamma.re;
        if width > 0.0 && width.is_finite() {
            lorentz_cluster(&mut nodes, center, width, n_feat);
        }
    }
    for edge in density_features(density) {
        edge_cluster(&mut nodes, edge, omega_max, n_feat);
    }

    nodes.retain(|w| w.is_finite() && w.abs() <= omega_max && *w != 0.0);
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

/// Nodes `c + w tan(theta)` for uniformly spaced `theta`.
fn lorentz_cluster(nodes: &mut Vec<f64>, center: f64, width: f64, n: usize) {
    let h = std::f64::consts::PI / (n + 1) as f64;
    for i in 1..=n {
        let theta = -std::f64::consts::FRAC_PI_2 + h * i as f64;
        nodes.push(center + width * theta.tan());
    }
}

/// Geometric nodes approaching `edge` from both sides.
fn edge_cluster(nodes: &mut Vec<f64>, edge: f64, reach: f64, n: usize) {
    nodes.push(edge);
    let (a, b) = ((1e-9 * reach).ln(), reach.ln());
    for i in 0..n {
        let d = (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp();
        nodes.push(edge - d);
        nodes.push(edge + d);
    }
}

fn density_features(density: &SpectralDensity) -> Vec<f64> {
    match density {
        SpectralDensity::Lorentzian { .. } => Vec::new(),
        SpectralDensity::Semicircle { width, .. } => vec![-width, *width],
        SpectralDensity::Tabulated(t) => tabulated_knots(t),
    }
}

fn tabulated_knots(t: &TabulatedDensity) -> Vec<f64> {
    t.omega().to_vec()
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xw, yw)| 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
        .sum()
}

/// Numerator and denominator integrands on `omega`.
fn integrands(
    series: &ExponentialSeries,
    exact: &(dyn Fn(f64) -> Result<f64> + Sync),
    omega: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let vals: Vec<Result<(f64, f64)>> = omega
        .par_iter()
        .map(|&w| {
            let e = exact(w)?;
            Ok(((series_spectrum(series, w) - e).abs(), e.abs()))
        })
        .collect();
    let mut num = Vec::with_capacity(omega.len());
    let mut den = Vec::with_capacity(omega.len());
    for v in vals {
        let (a, b) = v?;
        num.push(a);
        den.push(b);
    }
    Ok((num, den))
}

/// Error against an arbitrary exact spectrum, refining until converged.
pub fn fit_error_against(
    series: &ExponentialSeries,
    exact: &(dyn Fn(f64) -> Result<f64> + Sync),
    density: &SpectralDensity,
    bath: &BathParameters,
    policy: &GridPolicy,
) -> Result<ErrorReport> {
    let omega_max = policy
        .omega_max
        .unwrap_or_else(|| default_omega_max(density, bath));
    let mut previous: Option<f64> = None;
    let mut change = f64::INFINITY;
    for level in 0..=policy.max_doublings {
        let omega = composite_grid(series, density, bath, policy, level);
        let (num, den) = integrands(series, exact, &omega)?;
        let numerator = trapezoid(&omega, &num);
        let denominator = trapezoid(&omega, &den);
        if !(denominator > 0.0) {
            return Err(Error::Domain("exact spectrum vanishes on the grid".into()));
        }
        let error = numerator / denominator;
        if let Some(p) = previous {
            change = (error - p).abs();
            if change <= policy.rel_tol * error || change <= policy.abs_floor {
                return Ok(ErrorReport {
                    error,
                    numerator,
                    denominator,
                    omega_max,
                    points: omega.len(),
                    doublings: level,
                    grid_spec: format!(
                        "log+linear+feature grid on [-{omega_max:.6e}, {omega_max:.6e}], min |w| {:.3e}, {} nodes",
                        (1e-6 / bath.beta).min(0.5 * omega_max),
                        omega.len()
                    ),
                });
            }
        }
        previous = Some(error);
    }
    Err(Error::GridNotConverged {
        change,
        doublings: policy.max_doublings,
    })
}

/// Error of a full correlation-function series against `J(w) f(w)`.
pub fn fit_error(
    series: &ExponentialSeries,
    density: &SpectralDensity,
    bath: &BathParameters,
    policy: &GridPolicy,
) -> Result<ErrorReport> {
    let exact = |w: f64| exact_spectrum(density, bath, w);
    fit_error_against(series, &exact, density, bath, policy)
}

/// Error of a single-part series (real part, or `i` times the imaginary
/// part) against the matching even or odd spectrum component.
pub fn part_error(
    series: &ExponentialSeries,
    density: &SpectralDensity,
    bath: &BathParameters,
    part: Part,
    policy: &GridPolicy,
) -> Result<ErrorReport> {
    let exact = |w: f64| exact_part_spectrum(density, bath, part, w);
    fit_error_against(series, &exact, density, bath, policy)
}

/// Spectra on the converged error grid.
pub fn spectrum_curve(
    series: &ExponentialSeries,
    density: &SpectralDensity,
    bath: &BathParameters,
    policy: &GridPolicy,
) -> Result<(SpectrumCurve, ErrorReport)> {
    let report = fit_error(series, density, bath, policy)?;
    let omega = composite_grid(series, density, bath, policy, report.doublings);
    let exact = |w: f64| exact_spectrum(density, bath, w);
    Ok((SpectrumCurve::evaluate(series, &exact, omega)?, report))
}

/// Share of the error numerator contributed by `|w| <= window`, on the
/// converged grid.
pub fn numerator_mass_fraction(
    series: &ExponentialSeries,
    density: &SpectralDensity,
    bath: &BathParameters,
    window: f64,
    policy: &GridPolicy,
) -> Result<f64> {
    let (curve, _) = spectrum_curve(series, density, bath, policy)?;
    let diff = curve.abs_diff();
    let total = trapezoid(&curve.omega, &diff);
    let masked: Vec<f64> = curve
        .omega
        .iter()
        .zip(&diff)
        .map(|(w, d)| if w.abs() <= window { *d } else { 0.0 })
        .collect();
    let inside = trapezoid(&curve.omega, &masked);
    Ok(if total > 0.0 { inside / total } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::ExponentialTerm;
    use crate::spectral::analytic_lorentzian_real_part;
    use num_complex::Complex64;

    #[test]
    fn self_comparison_is_tiny() {
        let l = SpectralDensity::lorentzian(1.0, 10.0).unwrap();
        let bath = BathParameters::fermionic(10.0).unwrap();
        let s = analytic_lorentzian_real_part(&l).unwrap();
        let r = part_error(&s, &l, &bath, Part::Real, &GridPolicy::default()).unwrap();
        assert!(r.error <= 1e-10, "{}", r.error);
    }

    #[test]
    fn grid_is_sorted_without_origin() {
        let l = SpectralDensity::semicircle(1.0, 10.0).unwrap();
        let bath = BathParameters::fermionic(100.0).unwrap();
        let s = ExponentialSeries::new(vec![ExponentialTerm::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.01, 3.0),
        )]);
        let g = composite_grid(&s, &l, &bath, &GridPolicy::default(), 1);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(!g.contains(&0.0));
        assert!(g.contains(&10.0) && g.contains(&-10.0));
        let omega_max = default_omega_max(&l, &bath);
        assert_eq!(omega_max, 50.0 + 0.3);
        assert_eq!(g[0], -omega_max);
    }
}
