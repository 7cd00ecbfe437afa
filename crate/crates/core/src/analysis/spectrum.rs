use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::ExponentialSeries;
use crate::spectral::{BathParameters, Part, SpectralDensity};

/// `Re sum_k eta_k / (gamma_k + i w)`: the transform of the series extended
/// to negative times by `C(-t) = conj C(t)`.
pub fn series_spectrum(series: &ExponentialSeries, omega: f64) -> f64 {
    let iw = Complex64::new(0.0, omega);
    series
        .terms
        .iter()
        .map(|t| (t.eta / (t.gamma + iw)).re)
        .sum()
}

/// The same transform accumulated as `(1/2) sum [eta/(gamma+iw) + conj(eta)/(conj(gamma)-iw)]`
/// without discarding the imaginary part.
pub fn series_spectrum_hermitian(series: &ExponentialSeries, omega: f64) -> Complex64 {
    let iw = Complex64::new(0.0, omega);
    series
        .terms
        .iter()
        .map(|t| 0.5 * (t.eta / (t.gamma + iw) + t.eta.conj() / (t.gamma.conj() - iw)))
        .sum()
}

/// Exact spectrum of the correlation function: `J(w) f(w)` for the Plus
/// sector.
pub fn exact_spectrum(density: &SpectralDensity, bath: &BathParameters, omega: f64) -> Result<f64> {
    bath.spectral_weight(density, omega)
}

/// Spectrum of one part: the even (`Real`) or odd (`Imag`) component of the
/// exact spectrum. The odd component belongs to `i C^(i)(t)`.
pub fn exact_part_spectrum(
    density: &SpectralDensity,
    bath: &BathParameters,
    part: Part,
    omega: f64,
) -> Result<f64> {
    let a = bath.spectral_weight(density, omega)?;
    let b = bath.spectral_weight(density, -omega)?;
    Ok(match part {
        Part::Real => 0.5 * (a + b),
        Part::Imag => 0.5 * (a - b),
    })
}

/// Exact and fitted spectra on a common frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumCurve {
    pub omega: Vec<f64>,
    pub exact: Vec<f64>,
    pub fitted: Vec<f64>,
}

impl SpectrumCurve {
    pub fn evaluate(
        series: &ExponentialSeries,
        exact: &(dyn Fn(f64) -> Result<f64> + Sync),
        omega: Vec<f64>,
    ) -> Result<Self> {
        let pairs: Vec<Result<(f64, f64)>> = omega
            .par_iter()
            .map(|&w| Ok((exact(w)?, series_spectrum(series, w))))
            .collect();
        let mut ex = Vec::with_capacity(omega.len());
        let mut fit = Vec::with_capacity(omega.len());
        for p in pairs {
            let (a, b) = p?;
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::Domain("non-finite spectrum value".into()));
            }
            ex.push(a);
            fit.push(b);
        }
        Ok(Self {
            omega,
            exact: ex,
            fitted: fit,
        })
    }

    pub fn abs_diff(&self) -> Vec<f64> {
        self.exact
            .iter()
            .zip(&self.fitted)
            .map(|(a, b)| (a - b).abs())
            .collect()
    }

    /// Frequency where `|fitted - exact|` is largest (first one on ties).
    pub fn argmax_abs_diff(&self) -> Option<f64> {
        let d = self.abs_diff();
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in d.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| self.omega[i])
    }
}
