use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::takagi::HankelFactorization;
use crate::error::{Error, Result};
use crate::linalg::polynomial_roots;
use crate::spectral::{SampledCorrelation, TimeGrid};

/// Width of the band `1 - d <= |w| <= 1 + d` treated as the unit circle.
pub const BOUNDARY_DELTA: f64 = 1e-8;

/// Coefficients below this fraction of the vector norm are trimmed from the
/// top of the con-eigenpolynomial.
const TRIM_REL: f64 = 1e-14;

/// Minimum pairwise root separation accepted by the amplitude fit.
const MIN_SEPARATION: f64 = 1e-12;

/// Column-scaled Vandermonde condition number above which a warning is raised.
pub const CONDITION_WARNING: f64 = 1e12;

/// Roots of the con-eigenpolynomial sorted into regions of the plane.
#[derive(Debug, Clone)]
pub struct PronyRoots {
    pub all_roots: Vec<Complex64>,
    /// `|w| < 1 - delta`, excluding exact zeros.
    pub interior: Vec<Complex64>,
    pub boundary: Vec<Complex64>,
    pub exterior: Vec<Complex64>,
    /// Roots at `w = 0` (vanishing low-order coefficients).
    pub zero: usize,
    /// Roots sent to infinity by trimming negligible leading coefficients.
    pub at_infinity: usize,
}

impl PronyRoots {
    /// Splits `roots` with the given boundary half-width.
    pub fn classify(roots: Vec<Complex64>, zero: usize, at_infinity: usize, delta: f64) -> Self {
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        let mut exterior = Vec::new();
        for &w in &roots {
            let r = w.norm();
            if r < 1.0 - delta {
                interior.push(w);
            } else if r <= 1.0 + delta {
                boundary.push(w);
            } else {
                exterior.push(w);
            }
        }
        // stable, reproducible order: decreasing modulus, then argument
        interior.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
        Self {
            all_roots: roots,
            interior,
            boundary,
            exterior,
            zero,
            at_infinity,
        }
    }

    pub fn degree(&self) -> usize {
        self.all_roots.len() + self.zero + self.at_infinity
    }
}

/// Roots of `f(z) = sum_n u_{nK} z^n` for the con-eigenvector of index `k`.
pub fn candidate_roots(factorization: &HankelFactorization, k: usize) -> Result<PronyRoots> {
    candidate_roots_with(factorization, k, BOUNDARY_DELTA)
}

pub(crate) fn candidate_roots_with(
    factorization: &HankelFactorization,
    k: usize,
    delta: f64,
) -> Result<PronyRoots> {
    if k >= factorization.len() {
        return Err(Error::InvalidInput(format!(
            "con-eigenvector {k} requested but only {} computed",
            factorization.len()
        )));
    }
    // u = q or i q; the common phase does not move the roots
    let coeffs = &factorization.eigenvectors[k];
    let poly = polynomial_roots(coeffs, TRIM_REL)?;
    Ok(PronyRoots::classify(poly.roots, poly.zero_roots, poly.trimmed, delta))
}

/// `lambda = -(ln|w| + i arg w) / dt` with `arg w` in `(-pi, pi]`.
pub fn exponents_from_roots(roots: &[Complex64], grid: &TimeGrid) -> Result<Vec<Complex64>> {
    let dt = grid.dt();
    roots
        .iter()
        .map(|&w| {
            if w.norm() == 0.0 {
                return Err(Error::ZeroRoot);
            }
            let mut arg = w.im.atan2(w.re);
            if arg <= -std::f64::consts::PI {
                arg = std::f64::consts::PI;
            }
            Ok(-Complex64::new(w.norm().ln(), arg) / dt)
        })
        .collect()
}

/// Least-squares amplitudes `zeta_k` for `phi_j ~ sum_k zeta_k w_k^j`.
#[derive(Debug, Clone, Serialize)]
pub struct AmplitudeFit {
    pub amplitudes: Vec<Complex64>,
    /// `max_j |phi_j - sum_k zeta_k w_k^j|`.
    pub max_residual: f64,
    /// Condition number of the column-normalized Vandermonde matrix.
    pub condition: f64,
    pub ill_conditioned: bool,
}

/// `w^j` for `j = 0..len`, by repeated squaring per entry to avoid drift.
fn powers(w: Complex64, len: usize) -> Vec<Complex64> {
    (0..len).map(|j| w.powu(j as u32)).collect()
}

/// Solves the Vandermonde least-squares problem over all samples by SVD.
pub fn amplitudes_least_squares(
    samples: &SampledCorrelation,
    roots: &[Complex64],
) -> Result<AmplitudeFit> {
    amplitudes_for_values(&samples.samples, roots)
}

pub(crate) fn amplitudes_for_values(phi: &[f64], roots: &[Complex64]) -> Result<AmplitudeFit> {
    let m = phi.len();
    let k = roots.len();
    if k == 0 {
        return Ok(AmplitudeFit {
            amplitudes: Vec::new(),
            max_residual: phi.iter().map(|v| v.abs()).fold(0.0, f64::max),
            condition: 1.0,
            ill_conditioned: false,
        });
    }
    for (a, &wa) in roots.iter().enumerate() {
        if !(wa.norm() < 1.0) {
            return Err(Error::InvalidInput(format!("root {wa} is not inside the unit disk")));
        }
        for &wb in &roots[a + 1..] {
            let d = (wa - wb).norm();
            if d <= MIN_SEPARATION {
                return Err(Error::DuplicateRoots(d));
            }
        }
    }
    let columns: Vec<Vec<Complex64>> = roots.iter().map(|&w| powers(w, m)).collect();
    let scales: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let v = DMatrix::from_fn(m, k, |j, c| columns[c][j] / scales[c]);
    let rhs = DVector::from_iterator(m, phi.iter().map(|&x| Complex64::new(x, 0.0)));
    let svd = v.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let eps = smax * f64::EPSILON * m as f64;
    let y = svd
        .solve(&rhs, eps)
        .map_err(|e| Error::InvalidInput(format!("amplitude solve failed: {e}")))?;
    let amplitudes: Vec<Complex64> = y.iter().zip(&scales).map(|(z, s)| z / s).collect();
    let max_residual = residual(phi, &columns, &amplitudes);
    Ok(AmplitudeFit {
        amplitudes,
        max_residual,
        condition,
        ill_conditioned: condition > CONDITION_WARNING,
    })
}

fn residual(phi: &[f64], columns: &[Vec<Complex64>], amplitudes: &[Complex64]) -> f64 {
    (0..phi.len())
        .map(|j| {
            let model: Complex64 = columns.iter().zip(amplitudes).map(|(c, z)| c[j] * z).sum();
            (Complex64::new(phi[j], 0.0) - model).norm()
        })
        .fold(0.0, f64::max)
}

/// `max_j |phi_j - sum_k zeta_k w_k^j|` for given roots and amplitudes.
pub(crate) fn sample_residual(phi: &[f64], roots: &[Complex64], amplitudes: &[Complex64]) -> f64 {
    let columns: Vec<Vec<Complex64>> = roots.iter().map(|&w| powers(w, phi.len())).collect();
    residual(phi, &columns, amplitudes)
}

/// Euclidean norm of the sampled mode `w^j`, `j = 0..len`.
pub(crate) fn mode_norm(w: Complex64, len: usize) -> f64 {
    let r2 = w.norm_sqr();
    if (1.0 - r2).abs() < 1e-14 {
        return (len as f64).sqrt();
    }
    ((1.0 - r2.powi(len as i32)) / (1.0 - r2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exponent_examples() {
        let grid = TimeGrid::new(4.0, 2).unwrap();
        let e = (-1.0f64).exp();
        let l = exponents_from_roots(&[Complex64::new(e, 0.0), Complex64::new(0.0, e)], &grid).unwrap();
        assert!((l[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((l[1] - Complex64::new(1.0, -PI / 2.0)).norm() < 1e-15);
        let l = exponents_from_roots(&[Complex64::new(0.9, 0.0)], &grid).unwrap();
        assert!((l[0].re - 0.105_360_515_657_826_3).abs() < 1e-15);
        // arg = -pi maps to +pi
        let l = exponents_from_roots(&[Complex64::new(-0.5, -0.0)], &grid).unwrap();
        assert!((l[0].im + PI).abs() < 1e-15);
        assert!(matches!(
            exponents_from_roots(&[Complex64::new(0.0, 0.0)], &grid),
            Err(Error::ZeroRoot)
        ));
    }

    #[test]
    fn exact_single_amplitude() {
        let phi: Vec<f64> = (0..41).map(|j| 0.5 * 0.9f64.powi(j)).collect();
        let fit = amplitudes_for_values(&phi, &[Complex64::new(0.9, 0.0)]).unwrap();
        assert!((fit.amplitudes[0] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!(fit.max_residual <= 1e-12);
        let zero = amplitudes_for_values(&vec![0.0; 41], &[Complex64::new(0.9, 0.0), Complex64::new(0.3, 0.1)]).unwrap();
        assert!(zero.amplitudes.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn duplicate_roots_rejected() {
        let w = Complex64::new(0.5, 0.0);
        assert!(matches!(
            amplitudes_for_values(&[1.0, 0.5, 0.25], &[w, w]),
            Err(Error::DuplicateRoots(_))
        ));
    }

    #[test]
    fn classification_counts() {
        let roots = vec![
            Complex64::new(0.5, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::from_polar(1.0 + 1e-10, 0.3),
            Complex64::new(2.0, 0.0),
        ];
        let r = PronyRoots::classify(roots, 1, 2, BOUNDARY_DELTA);
        assert_eq!((r.interior.len(), r.boundary.len(), r.exterior.len()), (1, 2, 1));
        assert_eq!(r.degree(), 7);
    }

    #[test]
    fn mode_norm_matches_sum() {
        let w = Complex64::from_polar(0.97, 1.1);
        let direct = (0..301).map(|j| w.norm().powi(2 * j)).sum::<f64>().sqrt();
        assert!((mode_norm(w, 301) - direct).abs() < 1e-12 * direct);
    }
}
