//! Run configuration. Energies are in units of the coupling strength
//! `delta` and times in units of `1/delta`, so `delta = 1` throughout.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use prony_bath::analysis::{GridPolicy, Method};
use prony_bath::prony::{EigenSolver, FitPolicy};
use prony_bath::{BathParameters, QuadratureConfig, Sector, SpectralDensity, Statistics, TimeGrid};

use crate::failure::CliError;

pub const DEFAULT_K_IMAG: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub density: DensityConfig,
    pub bath: BathConfig,
    pub grid: GridConfig,
    pub fit: FitConfig,
    pub psd: PsdConfig,
    pub compare: CompareConfig,
    pub quadrature: QuadratureSettings,
    pub error_grid: ErrorGridSettings,
    pub output: OutputConfig,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            density: DensityConfig::Lorentzian { width: 10.0 },
            bath: BathConfig::default(),
            grid: GridConfig::default(),
            fit: FitConfig::default(),
            psd: PsdConfig::default(),
            compare: CompareConfig::default(),
            quadrature: QuadratureSettings::default(),
            error_grid: ErrorGridSettings::default(),
            output: OutputConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensityConfig {
    Lorentzian { width: f64 },
    Semicircle { width: f64 },
    Tabulated { omega: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatisticsName {
    Fermionic,
    Bosonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectorName {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathConfig {
    /// Inverse temperature, `beta * delta`.
    pub beta: f64,
    pub statistics: StatisticsName,
    pub sector: SectorName,
}

impl Default for BathConfig {
    fn default() -> Self {
        Self {
            beta: 10.0,
            statistics: StatisticsName::Fermionic,
            sector: SectorName::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub t_cut: f64,
    /// The grid has `2N + 1` points.
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { t_cut: 80.0, n: 1000 }
    }
}

/// Real-part budget: a term count or the closed-form Lorentzian term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RealBudget {
    Terms(usize),
    Named(AnalyticTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnalyticTag {
    Analytic,
}

/// Either explicit budgets (`k_r`, `k_i`) or a `target_error` on the
/// relative sample residual, searched up to `k_max` per part. Without
/// either, `k_i` is 4. A missing `k_r` means the analytic term for
/// fermionic Lorentzian baths; otherwise it is required with `k_i` and
/// searched in target mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub k_r: Option<RealBudget>,
    pub k_i: Option<usize>,
    pub target_error: Option<f64>,
    pub k_max: usize,
    pub solver: SolverName,
    pub prune_rel: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            k_r: None,
            k_i: None,
            target_error: None,
            k_max: 60,
            solver: SolverName::Auto,
            prune_rel: FitPolicy::default().prune_rel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverName {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsdConfig {
    /// Pole orders searched for the matched-accuracy comparison, inclusive.
    pub p_range: [usize; 2],
}

impl Default for PsdConfig {
    fn default() -> Self {
        Self { p_range: [1, 400] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareConfig {
    pub betas: Vec<f64>,
    /// Total term budgets tabulated for every method.
    pub k_range: Vec<usize>,
    pub methods: Vec<Method>,
    /// Fitted budget whose error sets the matched-accuracy target, one per beta.
    pub anchor_k: Vec<usize>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            betas: vec![10.0, 100.0, 1000.0],
            k_range: (2..=10).collect(),
            methods: vec![Method::Pfd, Method::Psd],
            anchor_k: vec![5, 8, 10],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub order: usize,
    pub max_phase: f64,
    pub thermal_width: f64,
    pub thermal_extent: f64,
    pub max_refinements: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        Self {
            abs_tol: q.abs_tol,
            order: q.order,
            max_phase: q.max_phase,
            thermal_width: q.thermal_width,
            thermal_extent: q.thermal_extent,
            max_refinements: q.max_refinements,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErrorGridSettings {
    pub omega_max: Option<f64>,
    pub log_points: usize,
    pub linear_points: usize,
    pub feature_points: usize,
    pub rel_tol: f64,
    pub abs_floor: f64,
    pub max_doublings: usize,
}

impl Default for ErrorGridSettings {
    fn default() -> Self {
        let g = GridPolicy::default();
        Self {
            omega_max: g.omega_max,
            log_points: g.log_points,
            linear_points: g.linear_points,
            feature_points: g.feature_points,
            rel_tol: g.rel_tol,
            abs_floor: g.abs_floor,
            max_doublings: g.max_doublings,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Output directory; `--out` takes precedence.
    pub dir: Option<PathBuf>,
    /// Also write the sampled correlation function from `fit`.
    pub samples_csv: bool,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.density()?;
        self.bath()?;
        self.grid()?;
        let f = &self.fit;
        if f.k_i.is_some() && f.target_error.is_some() {
            return Err(CliError::config("fit: give either k_i or target_error, not both"));
        }
        if f.k_i == Some(0) || f.k_r == Some(RealBudget::Terms(0)) {
            return Err(CliError::config("fit: term budgets must be positive"));
        }
        if let Some(t) = f.target_error {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::config(format!("fit: target_error must be positive, got {t}")));
            }
        }
        if f.k_max == 0 {
            return Err(CliError::config("fit: k_max must be positive"));
        }
        let [lo, hi] = self.psd.p_range;
        if lo == 0 || lo > hi {
            return Err(CliError::config(format!("psd: p_range [{lo}, {hi}] is invalid")));
        }
        let c = &self.compare;
        if c.betas.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(CliError::config("compare: betas must be positive"));
        }
        if c.k_range.iter().any(|&k| k < 2) {
            return Err(CliError::config("compare: every K in k_range must be at least 2"));
        }
        if !c.anchor_k.is_empty() && c.anchor_k.len() != c.betas.len() {
            return Err(CliError::config(format!(
                "compare: {} anchor_k entries for {} betas",
                c.anchor_k.len(),
                c.betas.len()
            )));
        }
        if c.anchor_k.iter().any(|&k| k < 2) {
            return Err(CliError::config("compare: every anchor_k must be at least 2"));
        }
        Ok(())
    }

    pub fn density(&self) -> Result<SpectralDensity, CliError> {
        match &self.density {
            DensityConfig::Lorentzian { width } => SpectralDensity::lorentzian(1.0, *width),
            DensityConfig::Semicircle { width } => SpectralDensity::semicircle(1.0, *width),
            DensityConfig::Tabulated { omega, values } => {
                SpectralDensity::tabulated(omega.clone(), values.clone())
            }
        }
        .map_err(|e| CliError::config(format!("density: {e}")))
    }

    pub fn bath(&self) -> Result<BathParameters, CliError> {
        self.bath_at(self.bath.beta)
    }

    pub fn bath_at(&self, beta: f64) -> Result<BathParameters, CliError> {
        let statistics = match self.bath.statistics {
            StatisticsName::Fermionic => Statistics::Fermionic,
            StatisticsName::Bosonic => Statistics::Bosonic,
        };
        let sector = match self.bath.sector {
            SectorName::Plus => Sector::Plus,
            SectorName::Minus => Sector::Minus,
        };
        BathParameters::new(beta, statistics, sector).map_err(|e| CliError::config(format!("bath: {e}")))
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        TimeGrid::new(self.grid.t_cut, self.grid.n).map_err(|e| CliError::config(format!("grid: {e}")))
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        let q = &self.quadrature;
        QuadratureConfig {
            abs_tol: q.abs_tol,
            order: q.order,
            max_phase: q.max_phase,
            thermal_width: q.thermal_width,
            thermal_extent: q.thermal_extent,
            max_refinements: q.max_refinements,
        }
    }

    pub fn error_grid(&self) -> GridPolicy {
        let g = &self.error_grid;
        GridPolicy {
            omega_max: g.omega_max,
            log_points: g.log_points,
            linear_points: g.linear_points,
            feature_points: g.feature_points,
            rel_tol: g.rel_tol,
            abs_floor: g.abs_floor,
            max_doublings: g.max_doublings,
        }
    }

    /// Imaginary-part budget, or `None` in target-error mode.
    pub fn k_imag(&self) -> Option<usize> {
        match (self.fit.k_i, self.fit.target_error) {
            (Some(k), _) => Some(k),
            (None, Some(_)) => None,
            (None, None) => Some(DEFAULT_K_IMAG),
        }
    }

    pub fn fit_policy(&self) -> FitPolicy {
        FitPolicy {
            prune_rel: self.fit.prune_rel,
            solver: match self.fit.solver {
                SolverName::Auto => EigenSolver::Auto,
                SolverName::Dense => EigenSolver::Dense,
                SolverName::Lanczos => EigenSolver::Lanczos,
            },
            ..FitPolicy::default()
        }
    }
}
