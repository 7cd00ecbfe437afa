//! Pade pole expansion of the Fermi and Bose functions in the `[P-1/P]`
//! form, and the resulting closed-form exponential series for a Lorentzian
//! density.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigenvalues;
use crate::series::{ExponentialSeries, ExponentialTerm};
use crate::spectral::{BathParameters, SpectralDensity, Statistics};

/// Poles `i xi_j` and weights `eta_j` of the order-`P` approximant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PadePoles {
    pub order: usize,
    /// Ascending, positive.
    pub xi: Vec<f64>,
    pub eta: Vec<f64>,
    #[serde(skip)]
    pub statistics: Statistics,
}

/// `b_m` for `m >= 1`.
fn base(statistics: Statistics, m: usize) -> f64 {
    match statistics {
        Statistics::Fermionic => (2 * m - 1) as f64,
        Statistics::Bosonic => (2 * m + 1) as f64,
    }
}

/// `2 / eps` for the `count` largest eigenvalues `eps` of the zero-diagonal
/// tridiagonal matrix with off-diagonal `1/sqrt(b_{m+shift} b_{m+shift+1})`,
/// returned ascending.
fn inverse_top_eigenvalues(
    statistics: Statistics,
    size: usize,
    shift: usize,
    count: usize,
) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let off: Vec<f64> = (1..size)
        .map(|m| 1.0 / (base(statistics, m + shift) * base(statistics, m + shift + 1)).sqrt())
        .collect();
    let ev = tridiagonal_eigenvalues(&vec![0.0; size], &off)?;
    let top = &ev[size - count..];
    if top[0] <= 0.0 {
        return Err(Error::EigenNotConverged(format!(
            "expected {count} positive eigenvalues, smallest kept is {}",
            top[0]
        )));
    }
    let mut out: Vec<f64> = top.iter().map(|e| 2.0 / e).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Builds the `[P-1/P]` pole set.
pub fn pade_poles(statistics: Statistics, order: usize) -> Result<PadePoles> {
    if order == 0 {
        return Err(Error::InvalidInput("Pade order must be at least 1".into()));
    }
    let p = order;
    let xi = inverse_top_eigenvalues(statistics, 2 * p, 0, p)?;
    let zeta = inverse_top_eigenvalues(statistics, 2 * p - 1, 1, p - 1)?;
    let log_prefactor = (p as f64 * base(statistics, p + 1) / 2.0).ln();
    let mut eta = Vec::with_capacity(p);
    for (j, &x) in xi.iter().enumerate() {
        // product formula evaluated in log space with explicit sign
        let x2 = x * x;
        let mut log = log_prefactor;
        let mut sign = 1.0;
        for &z in &zeta {
            let d = z * z - x2;
            log += d.abs().ln();
            sign *= d.signum();
        }
        for (k, &y) in xi.iter().enumerate() {
            if k != j {
                let d = y * y - x2;
                log -= d.abs().ln();
                sign *= d.signum();
            }
        }
        eta.push(sign * log.exp());
    }
    Ok(PadePoles {
        order: p,
        xi,
        eta,
        statistics,
    })
}

impl PadePoles {
    /// Pole sum `sum_j 2 eta_j x / (x^2 + xi_j^2)` for complex `x`.
    fn pole_sum(&self, x: Complex64) -> Complex64 {
        self.xi
            .iter()
            .zip(&self.eta)
            .map(|(&xi, &eta)| 2.0 * eta * x / (x * x + xi * xi))
            .sum()
    }

    /// Approximant of `1/(1+e^x)` or `1/(e^x-1)` at complex `x`.
    pub fn approximant_complex(&self, x: Complex64) -> Complex64 {
        match self.statistics {
            Statistics::Fermionic => 0.5 - self.pole_sum(x),
            Statistics::Bosonic => 1.0 / x - 0.5 + self.pole_sum(x),
        }
    }

    pub fn approximant(&self, x: f64) -> f64 {
        self.approximant_complex(Complex64::new(x, 0.0)).re
    }
}

/// `f_P(x)`: the order-`P` approximant of the occupation function.
pub fn approximant(poles: &PadePoles, x: f64) -> f64 {
    poles.approximant(x)
}

/// Closed-form `(P+1)`-term series of the fermionic correlation function of a
/// Lorentzian density with the occupation replaced by its order-`P`
/// approximant.
pub fn psd_correlation_series(
    density: &SpectralDensity,
    bath: &BathParameters,
    order: usize,
) -> Result<ExponentialSeries> {
    let (delta, width) = match *density {
        SpectralDensity::Lorentzian { delta, width } => (delta, width),
        _ => {
            return Err(Error::UnsupportedDensity(format!(
                "pole expansion needs a Lorentzian density, got {}",
                density.name()
            )))
        }
    };
    if bath.statistics != Statistics::Fermionic {
        return Err(Error::Unsupported(
            "pole-expansion series are built for fermionic baths only".into(),
        ));
    }
    let beta = bath.beta;
    let poles = pade_poles(Statistics::Fermionic, order)?;
    // J is even, so both sectors share this series
    let mut terms = Vec::with_capacity(order + 1);
    let eta0 = delta * width * poles.approximant_complex(Complex64::new(0.0, beta * width));
    terms.push(ExponentialTerm::new(eta0, Complex64::new(width, 0.0)));
    for (&xi, &eta) in poles.xi.iter().zip(&poles.eta) {
        let nu = xi / beta;
        let gap = width * width - nu * nu;
        if gap.abs() <= 1e-12 * width * width {
            return Err(Error::Pole);
        }
        let j_at_pole = delta * width * width / gap;
        terms.push(ExponentialTerm::new(
            Complex64::new(0.0, -2.0 * eta * j_at_pole / beta),
            Complex64::new(nu, 0.0),
        ));
    }
    Ok(ExponentialSeries::new(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{bose, fermi};

    #[test]
    fn first_order_closed_form() {
        let p = pade_poles(Statistics::Fermionic, 1).unwrap();
        assert!((p.xi[0] - 12f64.sqrt()).abs() < 1e-14);
        assert!((p.eta[0] - 1.5).abs() < 1e-14);
        for x in [-1.0, -0.3, 0.0, 0.5, 1.0] {
            assert!((p.approximant(x) - fermi(x)).abs() <= 1e-3);
        }
    }

    #[test]
    fn odd_symmetry_and_midpoint() {
        for order in [1, 3, 8, 25] {
            let p = pade_poles(Statistics::Fermionic, order).unwrap();
            assert_eq!(p.approximant(0.0), 0.5);
            for x in [0.1, 1.7, 9.0, 120.0] {
                assert!((p.approximant(x) + p.approximant(-x) - 1.0).abs() < 1e-14);
            }
            assert!(p.xi.windows(2).all(|w| w[0] < w[1]));
            assert!(p.eta.iter().all(|&e| e > 0.0));
        }
    }

    #[test]
    fn bose_approximant() {
        let p = pade_poles(Statistics::Bosonic, 10).unwrap();
        for x in [0.05, 0.5, 2.0, 8.0, -3.0] {
            let exact = bose(x);
            assert!((p.approximant(x) - exact).abs() < 1e-8 * exact.abs().max(1.0), "{x}");
        }
        assert!(p.xi.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn series_term_count_and_density_check() {
        let l = SpectralDensity::lorentzian(1.0, 10.0).unwrap();
        let bath = BathParameters::fermionic(10.0).unwrap();
        let s = psd_correlation_series(&l, &bath, 6).unwrap();
        assert_eq!(s.len(), 7);
        assert!(s.is_decaying());
        let sc = SpectralDensity::semicircle(1.0, 10.0).unwrap();
        assert!(matches!(
            psd_correlation_series(&sc, &bath, 6),
            Err(Error::UnsupportedDensity(_))
        ));
    }
}
