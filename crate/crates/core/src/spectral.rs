//! Spectral densities, thermal occupations and sampling of the
//! fluctuation–dissipation integral
//!
//! ```text
//! C(t) = (1/pi) * int dw e^{i w t} J(w) f(w)            (sector Plus)
//! C(t) = (1/pi) * int dw e^{-i w t} J(w) (1 - f(w))     (sector Minus, fermions)
//! ```
//!
//! Both sectors are reduced to `C(t) = (1/pi) int e^{i w t} weight(w) dw`
//! with [`BathParameters::spectral_weight`]. The integral is evaluated on
//! composite Gauss–Legendre panels sized by the oscillation of `e^{i w t_max}`
//! and by the Fermi-edge width `1/beta`. For the Lorentzian model the
//! zero-temperature part, whose `1/w^2` tail cannot be truncated, is taken in
//! closed form and only the exponentially localized thermal remainder
//! `J (f - theta(-w))` is integrated numerically.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{composite_nodes, uniform_breakpoints, GaussLegendre};
use crate::series::{ExponentialSeries, ExponentialTerm};
use crate::special::sine_lorentz_kernel;

/// Model of the spectral density `J(w)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    /// `delta * width^2 / (w^2 + width^2)`.
    Lorentzian { delta: f64, width: f64 },
    /// `delta * sqrt(1 - (w/width)^2)` on `|w| <= width`, zero outside.
    Semicircle { delta: f64, width: f64 },
    /// Piecewise-linear interpolation of tabulated values, zero outside the grid.
    Tabulated(TabulatedDensity),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    omega: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedDensity {
    pub fn new(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if omega.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "tabulated density has {} frequencies but {} values",
                omega.len(),
                values.len()
            )));
        }
        if omega.len() < 2 {
            return Err(Error::InvalidInput(
                "tabulated density needs at least two points".into(),
            ));
        }
        if omega.iter().any(|w| !w.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "tabulated density contains non-finite entries".into(),
            ));
        }
        if omega.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidInput(
                "tabulated frequency grid must be strictly ascending".into(),
            ));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput(
                "tabulated density values must be nonnegative".into(),
            ));
        }
        Ok(Self { omega, values })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn interpolate(&self, w: f64) -> f64 {
        let n = self.omega.len();
        if w < self.omega[0] || w > self.omega[n - 1] {
            return 0.0;
        }
        let i = self.omega.partition_point(|&x| x <= w);
        if i == 0 {
            return self.values[0];
        }
        if i >= n {
            return self.values[n - 1];
        }
        let (x0, x1) = (self.omega[i - 1], self.omega[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (w - x0) / (x1 - x0)
    }

    fn reflected(&self) -> Self {
        Self {
            omega: self.omega.iter().rev().map(|w| -w).collect(),
            values: self.values.iter().rev().copied().collect(),
        }
    }
}

impl SpectralDensity {
    pub fn lorentzian(delta: f64, width: f64) -> Result<Self> {
        check_positive("delta", delta)?;
        check_positive("width", width)?;
        Ok(Self::Lorentzian { delta, width })
    }

    pub fn semicircle(delta: f64, width: f64) -> Result<Self> {
        check_positive("delta", delta)?;
        check_positive("width", width)?;
        Ok(Self::Semicircle { delta, width })
    }

    pub fn tabulated(omega: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(TabulatedDensity::new(omega, values)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Lorentzian { .. } => "lorentzian",
            Self::Semicircle { .. } => "semicircle",
            Self::Tabulated(_) => "tabulated",
        }
    }

    /// Evaluates `J(w)`.
    pub fn value(&self, omega: f64) -> Result<f64> {
        if !omega.is_finite() {
            return Err(Error::Domain(format!("J(w) queried at w = {omega}")));
        }
        Ok(self.value_unchecked(omega))
    }

    pub(crate) fn value_unchecked(&self, w: f64) -> f64 {
        match *self {
            Self::Lorentzian { delta, width } => delta * width * width / (w * w + width * width),
            Self::Semicircle { delta, width } => {
                let s = w / width;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    delta * (1.0 - s * s).sqrt()
                }
            }
            Self::Tabulated(ref t) => t.interpolate(w),
        }
    }

    /// Closed support interval, `None` for densities with infinite support.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Self::Lorentzian { .. } => None,
            Self::Semicircle { width, .. } => Some((-width, *width)),
            Self::Tabulated(t) => Some((t.omega[0], t.omega[t.omega.len() - 1])),
        }
    }

    /// Characteristic coupling and width `(delta, width)`. For tabulated data
    /// these are the peak value and the largest `|w|` of the grid.
    pub fn scales(&self) -> (f64, f64) {
        match self {
            Self::Lorentzian { delta, width } | Self::Semicircle { delta, width } => {
                (*delta, *width)
            }
            Self::Tabulated(t) => {
                let peak = t.values.iter().copied().fold(0.0, f64::max);
                let reach = t.omega.iter().map(|w| w.abs()).fold(0.0, f64::max);
                (peak, reach)
            }
        }
    }

    /// `J(-w)` as a density.
    pub fn reflected(&self) -> Self {
        match self {
            Self::Tabulated(t) => Self::Tabulated(t.reflected()),
            other => other.clone(),
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            Self::Tabulated(t) => t.reflected() == *t,
            _ => true,
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Fermionic,
    Bosonic,
}

/// Sign of the exponent in `e^{+- i w t}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParameters {
    pub beta: f64,
    pub statistics: Statistics,
    pub sector: Sector,
}

/// `1/(1 + e^x)` without overflow.
pub fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// `1/(e^x - 1)`; infinite at the origin.
pub fn bose(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

impl BathParameters {
    pub fn new(beta: f64, statistics: Statistics, sector: Sector) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta must be positive and finite, got {beta}"
            )));
        }
        Ok(Self {
            beta,
            statistics,
            sector,
        })
    }

    pub fn fermionic(beta: f64) -> Result<Self> {
        Self::new(beta, Statistics::Fermionic, Sector::Plus)
    }

    /// Occupation factor of the sector: `f(w)` for Plus; the hole factor
    /// `1 - f^F(w)` (fermions) or `1 + f^B(w)` (bosons) for Minus.
    pub fn occupation(&self, omega: f64) -> Result<f64> {
        if !omega.is_finite() {
            return Err(Error::Domain(format!("occupation queried at w = {omega}")));
        }
        let x = self.beta * omega;
        match (self.statistics, self.sector) {
            (Statistics::Fermionic, Sector::Plus) => Ok(fermi(x)),
            (Statistics::Fermionic, Sector::Minus) => Ok(fermi(-x)),
            (Statistics::Bosonic, _) if omega == 0.0 => Err(Error::Pole),
            (Statistics::Bosonic, Sector::Plus) => Ok(bose(x)),
            (Statistics::Bosonic, Sector::Minus) => Ok(-bose(-x)),
        }
    }

    /// Integrand `weight(w)` of `C(t) = (1/pi) int e^{i w t} weight(w) dw`.
    /// Also the exact spectrum `C(w)` of the correlation function.
    pub fn spectral_weight(&self, density: &SpectralDensity, omega: f64) -> Result<f64> {
        match self.sector {
            Sector::Plus => Ok(density.value(omega)? * self.occupation(omega)?),
            Sector::Minus => Ok(density.value(-omega)? * self.occupation(-omega)?),
        }
    }

    /// Plus-sector view of this bath: the density to integrate against
    /// `e^{i w t}` and the Plus-sector occupation with the same statistics.
    fn plus_form(&self, density: &SpectralDensity) -> (SpectralDensity, BathParameters) {
        let plus = BathParameters {
            sector: Sector::Plus,
            ..*self
        };
        match self.sector {
            Sector::Plus => (density.clone(), plus),
            // J(-w) h(-w) = J(-w) f(w) for fermions and -J(-w) f^B(w) for bosons
            Sector::Minus => (density.reflected(), plus),
        }
    }
}

/// Uniform time grid `t_j = j * t_cut / (2N)`, `j = 0..=2N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_cut: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t_cut: f64, n: usize) -> Result<Self> {
        if !(t_cut.is_finite() && t_cut > 0.0) {
            return Err(Error::InvalidInput(format!(
                "t_cut must be positive and finite, got {t_cut}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidInput("N must be positive".into()));
        }
        Ok(Self { t_cut, n })
    }

    pub fn dt(&self) -> f64 {
        self.t_cut / (2 * self.n) as f64
    }

    pub fn len(&self) -> usize {
        2 * self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t_cut * j as f64 / (2 * self.n) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.time(j)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Real,
    Imag,
}

impl Part {
    pub fn name(self) -> &'static str {
        match self {
            Part::Real => "real",
            Part::Imag => "imag",
        }
    }
}

/// Controls of the panel quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Accepted per-sample change under panel halving.
    pub abs_tol: f64,
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Largest phase `w * t_max` swept across one panel, in radians.
    pub max_phase: f64,
    /// Panel width inside the thermal window, in units of `1/beta`.
    pub thermal_width: f64,
    /// Half-width of the thermal window, in units of `1/beta`.
    pub thermal_extent: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            order: 16,
            max_phase: 4.0,
            thermal_width: 2.0,
            thermal_extent: 40.0,
            max_refinements: 5,
        }
    }
}

/// Uniform samples `phi_j` of one part of `C(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCorrelation {
    pub grid: TimeGrid,
    pub part: Part,
    pub samples: Vec<f64>,
    pub provenance: String,
}

impl SampledCorrelation {
    /// Wraps externally produced samples (synthetic signals, tests).
    pub fn from_samples(grid: TimeGrid, part: Part, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("samples must be finite".into()));
        }
        Ok(Self {
            grid,
            part,
            samples,
            provenance: "external".into(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Complex samples of `C(t_j)` plus quadrature diagnostics.
#[derive(Debug, Clone)]
pub struct ComplexSamples {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
    pub refinement: usize,
    pub node_count: usize,
    pub estimated_error: f64,
}

impl ComplexSamples {
    pub fn part(&self, part: Part) -> SampledCorrelation {
        let samples = self
            .values
            .iter()
            .map(|c| match part {
                Part::Real => c.re,
                Part::Imag => c.im,
            })
            .collect();
        SampledCorrelation {
            grid: self.grid,
            part,
            samples,
            provenance: format!(
                "panel Gauss-Legendre, {} nodes, refinement {}, estimated abs error {:.2e}",
                self.node_count, self.refinement, self.estimated_error
            ),
        }
    }
}

/// Closed-form contribution evaluated next to the numerical nodes.
#[derive(Debug, Clone, Copy)]
enum Analytic {
    None,
    /// `(1/pi) int_{-inf}^0 e^{i w t} J_L(w) dw` for a Lorentzian.
    LorentzianGround { delta: f64, width: f64 },
}

impl Analytic {
    fn eval(self, t: f64) -> Complex64 {
        match self {
            Analytic::None => Complex64::new(0.0, 0.0),
            Analytic::LorentzianGround { delta, width } => {
                let x = width * t;
                Complex64::new(
                    0.5 * delta * width * (-x).exp(),
                    -delta * width / (2.0 * PI) * sine_lorentz_kernel(x),
                )
            }
        }
    }
}

struct Plan {
    analytic: Analytic,
    /// `(omega, weight)` with the `1/pi` prefactor folded into the weight.
    nodes: Vec<(f64, f64)>,
}

fn plan(
    density: &SpectralDensity,
    bath: &BathParameters,
    t_max: f64,
    quad: &QuadratureConfig,
    level: usize,
) -> Result<Plan> {
    let (density, bath) = bath.plus_form(density);
    let beta = bath.beta;
    let shrink = 0.5f64.powi(level as i32);
    let phase_width = quad.max_phase / t_max * shrink;
    let thermal_half = quad.thermal_extent / beta;
    let thermal_width = (quad.thermal_width / beta * shrink).min(phase_width);
    let rule = GaussLegendre::new(quad.order);
    let occupation = |w: f64| -> f64 {
        match bath.statistics {
            Statistics::Fermionic => fermi(beta * w),
            Statistics::Bosonic => bose(beta * w),
        }
    };
    let mut nodes = Vec::new();
    match density {
        SpectralDensity::Lorentzian { delta, width } => {
            if bath.statistics == Statistics::Bosonic {
                return Err(Error::Unsupported(
                    "bosonic sampling requires J(0) = 0; the Lorentzian has J(0) = delta".into(),
                ));
            }
            let mut raw = Vec::new();
            let bp = uniform_breakpoints(-thermal_half, 0.0, thermal_width);
            composite_nodes(&rule, &bp, &mut raw);
            let bp = uniform_breakpoints(0.0, thermal_half, thermal_width);
            composite_nodes(&rule, &bp, &mut raw);
            for (w, q) in raw {
                let step = if w < 0.0 { 1.0 } else { 0.0 };
                let j = density.value_unchecked(w);
                nodes.push((w, q * j * (occupation(w) - step) / PI));
            }
            Ok(Plan {
                analytic: Analytic::LorentzianGround { delta, width },
                nodes,
            })
        }
        SpectralDensity::Semicircle { delta, width } => {
            if bath.statistics == Statistics::Bosonic {
                return Err(Error::Unsupported(
                    "bosonic sampling requires J(0) = 0; the semicircle has J(0) = delta".into(),
                ));
            }
            // w = W sin(theta) removes the square-root edges
            let theta_phase = phase_width / width;
            let theta_thermal = thermal_width / width;
            let theta_edge = (thermal_half / width).min(1.0).asin();
            let half_pi = 0.5 * PI;
            let mut raw = Vec::new();
            for (a, b, h) in [
                (-half_pi, -theta_edge, theta_phase),
                (-theta_edge, 0.0, theta_thermal),
                (0.0, theta_edge, theta_thermal),
                (theta_edge, half_pi, theta_phase),
            ] {
                if b > a {
                    composite_nodes(&rule, &uniform_breakpoints(a, b, h), &mut raw);
                }
            }
            for (theta, q) in raw {
                let c = theta.cos();
                let w = width * theta.sin();
                nodes.push((w, q * delta * width * c * c * occupation(w) / PI));
            }
            Ok(Plan {
                analytic: Analytic::None,
                nodes,
            })
        }
        SpectralDensity::Tabulated(ref table) => {
            let (lo, hi) = (table.omega[0], table.omega[table.omega.len() - 1]);
            if bath.statistics == Statistics::Bosonic && lo < 0.0 && hi > 0.0 {
                let j0 = table.interpolate(0.0);
                if j0 != 0.0 {
                    return Err(Error::Unsupported(format!(
                        "bosonic sampling requires J(0) = 0, tabulated J(0) = {j0}"
                    )));
                }
            }
            let mut cuts: Vec<f64> = table.omega.clone();
            for extra in [0.0, -thermal_half, thermal_half] {
                if extra > lo && extra < hi {
                    cuts.push(extra);
                }
            }
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut raw = Vec::new();
            for seg in cuts.windows(2) {
                let (a, b) = (seg[0], seg[1]);
                let mid = 0.5 * (a + b);
                let h = if mid.abs() < thermal_half {
                    thermal_width
                } else {
                    phase_width
                };
                composite_nodes(&rule, &uniform_breakpoints(a, b, h), &mut raw);
            }
            for (w, q) in raw {
                nodes.push((w, q * table.interpolate(w) * occupation(w) / PI));
            }
            Ok(Plan {
                analytic: Analytic::None,
                nodes,
            })
        }
    }
}

impl BathParameters {
    /// Minus-sector bosons carry `1 + f^B(-w) = -f^B(w)`.
    fn plan_sign(&self) -> f64 {
        match (self.statistics, self.sector) {
            (Statistics::Bosonic, Sector::Minus) => -1.0,
            _ => 1.0,
        }
    }
}

const ROTATION_BLOCK: usize = 64;

fn transform(plan: &Plan, grid: &TimeGrid, sign: f64) -> Vec<Complex64> {
    let dt = grid.dt();
    let steps: Vec<Complex64> = plan
        .nodes
        .iter()
        .map(|&(w, _)| Complex64::from_polar(1.0, w * dt))
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    // Fixed block boundaries keep the rotation restarts, and hence the
    // rounding, independent of how rayon schedules the blocks.
    out.par_chunks_mut(ROTATION_BLOCK)
        .enumerate()
        .for_each(|(block, chunk)| {
            let j0 = block * ROTATION_BLOCK;
            for (&(w, q), step) in plan.nodes.iter().zip(&steps) {
                let mut rot = Complex64::from_polar(q, w * grid.time(j0));
                for slot in chunk.iter_mut() {
                    *slot += rot;
                    rot *= step;
                }
            }
            for (k, slot) in chunk.iter_mut().enumerate() {
                *slot = (*slot + plan.analytic.eval(grid.time(j0 + k))) * sign;
            }
        });
    out
}

/// Samples the complex correlation function on `grid`, refining the panels
/// until two successive levels agree to `quad.abs_tol` in every sample.
pub fn sample_complex(
    density: &SpectralDensity,
    bath: &BathParameters,
    grid: &TimeGrid,
    quad: &QuadratureConfig,
) -> Result<ComplexSamples> {
    if !(quad.abs_tol > 0.0) || quad.order == 0 || !(quad.max_phase > 0.0) {
        return Err(Error::InvalidInput("invalid quadrature configuration".into()));
    }
    let sign = bath.plan_sign();
    let t_max = grid.t_cut;
    let mut previous = transform(&plan(density, bath, t_max, quad, 0)?, grid, sign);
    let mut worst = f64::INFINITY;
    for level in 1..=quad.max_refinements {
        let p = plan(density, bath, t_max, quad, level)?;
        let current = transform(&p, grid, sign);
        worst = current
            .iter()
            .zip(&previous)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if worst <= quad.abs_tol {
            return Ok(ComplexSamples {
                grid: *grid,
                values: current,
                refinement: level,
                node_count: p.nodes.len(),
                estimated_error: worst,
            });
        }
        previous = current;
    }
    Err(Error::QuadratureNotConverged {
        worst,
        tol: quad.abs_tol,
        refinements: quad.max_refinements,
    })
}

/// Samples one part of `C(t)` on the grid.
pub fn sample_correlation(
    density: &SpectralDensity,
    bath: &BathParameters,
    grid: &TimeGrid,
    part: Part,
    quad: &QuadratureConfig,
) -> Result<SampledCorrelation> {
    Ok(sample_complex(density, bath, grid, quad)?.part(part))
}

/// One-term closed form `(delta W / 2) e^{-W t}` of the real part of the
/// fermionic correlation function for a Lorentzian density.
pub fn analytic_lorentzian_real_part(density: &SpectralDensity) -> Result<ExponentialSeries> {
    match *density {
        SpectralDensity::Lorentzian { delta, width } => {
            Ok(ExponentialSeries::new(vec![ExponentialTerm::new(
                Complex64::new(0.5 * delta * width, 0.0),
                Complex64::new(width, 0.0),
            )]))
        }
        _ => Err(Error::UnsupportedDensity(format!(
            "analytic real part exists only for the Lorentzian, got {}",
            density.name()
        ))),
    }
}
