//! Con-eigen (Takagi) factorization `H u = sigma conj(u)` of a real
//! symmetric Hankel matrix.
//!
//! For real symmetric `H` with eigenpairs `H q = lambda q`, the pair
//! `sigma = |lambda|`, `u = q` (lambda >= 0) or `u = i q` (lambda < 0)
//! satisfies the con-eigen equation exactly.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::hankel::Hankel;
use crate::error::{Error, Result};

/// Largest order handled by the dense eigensolver under [`EigenSolver::Auto`].
pub const DENSE_ORDER_LIMIT: usize = 4096;

/// Relative residual accepted for retained con-eigenpairs.
const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenSolver {
    /// Dense up to [`DENSE_ORDER_LIMIT`], Lanczos above.
    #[default]
    Auto,
    Dense,
    /// Lanczos with full reorthogonalization and FFT products (experimental).
    Lanczos,
}

/// Leading con-eigenpairs in descending `|sigma|`.
#[derive(Debug, Clone)]
pub struct HankelFactorization {
    pub order: usize,
    /// `sigma_m >= 0`.
    pub c_eigenvalues: Vec<f64>,
    /// Signed eigenvalues `lambda_m` of the symmetric matrix.
    pub eigenvalues: Vec<f64>,
    /// Real unit eigenvectors `q_m`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `||H u_m - sigma_m conj(u_m)|| / |sigma_0|`.
    pub residuals: Vec<f64>,
    pub solver: EigenSolver,
}

impl HankelFactorization {
    pub fn len(&self) -> usize {
        self.c_eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_eigenvalues.is_empty()
    }

    /// Con-eigenvector `u_m` with the phase fix applied.
    pub fn c_eigenvector(&self, m: usize) -> Vec<Complex64> {
        let phase = if self.eigenvalues[m] >= 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 1.0)
        };
        self.eigenvectors[m].iter().map(|&q| phase * q).collect()
    }

    /// `|sigma_m| / |sigma_0|`.
    pub fn sigma_ratio(&self, m: usize) -> f64 {
        if self.c_eigenvalues[0] == 0.0 {
            0.0
        } else {
            self.c_eigenvalues[m] / self.c_eigenvalues[0]
        }
    }
}

/// Returns the leading `num_pairs` con-eigenpairs of `h`.
pub fn takagi_factorize(
    h: &Hankel,
    num_pairs: usize,
    solver: EigenSolver,
) -> Result<HankelFactorization> {
    let n = h.order();
    if num_pairs == 0 || num_pairs > n {
        return Err(Error::InvalidInput(format!(
            "requested {num_pairs} con-eigenpairs of a matrix of order {n}"
        )));
    }
    let resolved = match solver {
        EigenSolver::Auto if n <= DENSE_ORDER_LIMIT => EigenSolver::Dense,
        EigenSolver::Auto => EigenSolver::Lanczos,
        other => other,
    };
    let (values, vectors) = match resolved {
        EigenSolver::Dense => dense_pairs(h, num_pairs),
        _ => lanczos_pairs(h, num_pairs)?,
    };
    let scale = values.first().map(|v| v.abs()).unwrap_or(0.0);
    let mut residuals = Vec::with_capacity(num_pairs);
    for (lambda, q) in values.iter().zip(&vectors) {
        let hq = h.matvec(q);
        let r = hq
            .iter()
            .zip(q)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        let rel = if scale > 0.0 { r / scale } else { r };
        if rel > RESIDUAL_TOL {
            return Err(Error::EigenNotConverged(format!(
                "con-eigenpair {} has relative residual {rel:.3e} (solver {resolved:?})",
                residuals.len()
            )));
        }
        residuals.push(rel);
    }
    Ok(HankelFactorization {
        order: n,
        c_eigenvalues: values.iter().map(|v| v.abs()).collect(),
        eigenvalues: values,
        eigenvectors: vectors,
        residuals,
        solver: resolved,
    })
}

/// Orders by descending modulus, ties by ascending index.
fn leading_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| {
        values[b]
            .abs()
            .total_cmp(&values[a].abs())
            .then(a.cmp(&b))
    });
    idx
}

/// Sign convention: the entry of largest modulus is positive.
fn normalize_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc })
        .0;
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn dense_pairs(h: &Hankel, num_pairs: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    // work on H / max|phi| with entries below eps^2 flushed to zero: this
    // perturbs H far below rounding, and the QR sweeps otherwise produce NaN
    // from underflow on rapidly decaying samples
    let scale = h.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut a = h.to_dense() / scale;
    a.iter_mut().for_each(|v| {
        if v.abs() < f64::EPSILON * f64::EPSILON {
            *v = 0.0;
        }
    });
    let mut eig = SymmetricEigen::new(a);
    eig.eigenvalues *= scale;
    let order = leading_order(eig.eigenvalues.as_slice());
    let mut values = Vec::with_capacity(num_pairs);
    let mut vectors = Vec::with_capacity(num_pairs);
    for &i in order.iter().take(num_pairs) {
        values.push(eig.eigenvalues[i]);
        let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        normalize_sign(&mut v);
        vectors.push(v);
    }
    (values, vectors)
}

fn lanczos_pairs(h: &Hankel, num_pairs: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = h.order();
    let op = h.fast();
    let mut steps = (2 * num_pairs + 30).min(n);
    loop {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
        let mut alpha = Vec::with_capacity(steps);
        let mut beta: Vec<f64> = Vec::with_capacity(steps);
        // deterministic, non-symmetric start vector
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_749_895).fract())
            .collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        let mut exhausted = false;
        for k in 0..steps {
            let mut w = op.matvec(&v);
            let a: f64 = w.iter().zip(&v).map(|(x, y)| x * y).sum();
            alpha.push(a);
            basis.push(v.clone());
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for b in &basis {
                    let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                    w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let bnorm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if k + 1 == steps {
                beta.push(bnorm);
                break;
            }
            if bnorm <= 1e-14 * alpha.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300) {
                exhausted = true;
                beta.push(0.0);
                break;
            }
            beta.push(bnorm);
            v = w.iter().map(|x| x / bnorm).collect();
        }
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let order = leading_order(eig.eigenvalues.as_slice());
        let wanted = num_pairs.min(m);
        let top = eig.eigenvalues[order[0]].abs();
        let tail = beta[m - 1];
        let converged = order.iter().take(wanted).all(|&i| {
            let s = eig.eigenvectors[(m - 1, i)];
            (tail * s).abs() <= 1e-13 * top.max(1e-300)
        });
        if (converged || exhausted || m == n) && wanted == num_pairs {
            let mut values = Vec::with_capacity(num_pairs);
            let mut vectors = Vec::with_capacity(num_pairs);
            for &i in order.iter().take(num_pairs) {
                values.push(eig.eigenvalues[i]);
                let mut y = vec![0.0; n];
                for (k, b) in basis.iter().enumerate() {
                    let c = eig.eigenvectors[(k, i)];
                    y.iter_mut().zip(b).for_each(|(acc, x)| *acc += c * x);
                }
                let norm = y.iter().map(|x| x * x).sum::<f64>().sqrt();
                y.iter_mut().for_each(|x| *x /= norm);
                normalize_sign(&mut y);
                vectors.push(y);
            }
            return Ok((values, vectors));
        }
        if steps >= n || exhausted {
            return Err(Error::EigenNotConverged(format!(
                "Lanczos: {m} steps gave {wanted} of {num_pairs} requested pairs"
            )));
        }
        steps = (2 * steps).min(n);
    }
}
