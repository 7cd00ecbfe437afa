//! Small dense kernels: symmetric tridiagonal eigenvalues and polynomial roots
//! through the balanced companion matrix.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `offdiag` (`offdiag[i]` couples rows `i` and `i + 1`), by
/// implicit QL iteration. Returned in ascending order.
pub fn tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if offdiag.len() + 1 != n {
        return Err(Error::InvalidInput(format!(
            "tridiagonal matrix of order {n} needs {} off-diagonal entries, got {}",
            n - 1,
            offdiag.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    const MAX_ITER: usize = 60;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_ITER {
                return Err(Error::EigenNotConverged(format!(
                    "tridiagonal QL: no convergence for eigenvalue {l} after {MAX_ITER} sweeps"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Row-major square matrix with 1-based indexing, used by the Hessenberg QR.
struct Square {
    n: usize,
    data: Vec<f64>,
}

impl Square {
    fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; (n + 1) * (n + 1)],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.n + 1) + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * (self.n + 1) + j]
    }
}

/// Diagonal similarity scaling that equalizes row and column norms
/// (powers of two, so no rounding is introduced).
fn balance(a: &mut Square) {
    const RADIX: f64 = 2.0;
    let n = a.n;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a.at(j, i).abs();
                    r += a.at(i, j).abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        *a.at_mut(i, j) *= g;
                    }
                    for j in 1..=n {
                        *a.at_mut(j, i) *= f;
                    }
                }
            }
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the Francis double-shift QR
/// iteration (eigenvalues only). The matrix is destroyed.
fn hessenberg_eigenvalues(a: &mut Square) -> Result<Vec<Complex64>> {
    const MAX_ITS: usize = 120;
    let n = a.n;
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in (i.max(2) - 1)..=n {
            anorm += a.at(i, j).abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a.at(l - 1, l - 1).abs() + a.at(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a.at(l, l - 1).abs() + s == s {
                    *a.at_mut(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a.at(nn, nn);
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a.at(nn - 1, nn - 1);
            let mut w = a.at(nn, nn - 1) * a.at(nn - 1, nn);
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != 0.0 {
                        wr[nn] = x - w / z;
                    }
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn = nn.saturating_sub(2);
                break;
            }
            if its == MAX_ITS {
                return Err(Error::RootsNotConverged {
                    iterations: its,
                    degree: n,
                });
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 1..=nn {
                    *a.at_mut(i, i) -= x;
                }
                let s = a.at(nn, nn - 1).abs() + a.at(nn - 1, nn - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut m = nn - 2;
            let (mut p, mut q, mut r);
            let mut z;
            loop {
                z = a.at(m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a.at(m + 1, m) + a.at(m, m + 1);
                q = a.at(m + 1, m + 1) - z - rr - ss;
                r = a.at(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a.at(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (a.at(m - 1, m - 1).abs() + z.abs() + a.at(m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                *a.at_mut(i, i - 2) = 0.0;
                if i != m + 2 {
                    *a.at_mut(i, i - 3) = 0.0;
                }
            }
            let mut k = m;
            while k + 1 <= nn {
                if k != m {
                    p = a.at(k, k - 1);
                    q = a.at(k + 1, k - 1);
                    r = 0.0;
                    if k != nn - 1 {
                        r = a.at(k + 2, k - 1);
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            *a.at_mut(k, k - 1) = -a.at(k, k - 1);
                        }
                    } else {
                        *a.at_mut(k, k - 1) = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = a.at(k, j) + q * a.at(k + 1, j);
                        if k != nn - 1 {
                            pp += r * a.at(k + 2, j);
                            *a.at_mut(k + 2, j) -= pp * z;
                        }
                        *a.at_mut(k + 1, j) -= pp * y;
                        *a.at_mut(k, j) -= pp * x;
                    }
                    let mmin = nn.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * a.at(i, k) + y * a.at(i, k + 1);
                        if k != nn - 1 {
                            pp += z * a.at(i, k + 2);
                            *a.at_mut(i, k + 2) -= pp * r;
                        }
                        *a.at_mut(i, k + 1) -= pp * q;
                        *a.at_mut(i, k) -= pp;
                    }
                }
                k += 1;
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// Roots of a real polynomial, split into exact zeros and the rest.
#[derive(Debug, Clone)]
pub struct PolynomialRoots {
    /// Roots of the deflated polynomial (nonzero constant term).
    pub roots: Vec<Complex64>,
    /// Multiplicity of the root at `z = 0` (vanishing low-order coefficients).
    pub zero_roots: usize,
    /// Number of high-order coefficients dropped as negligible.
    pub trimmed: usize,
}

/// Roots of `sum_k coeffs[k] z^k` as eigenvalues of the balanced companion
/// matrix. High-order coefficients below `trim_rel * ||coeffs||` are dropped
/// first.
pub fn polynomial_roots(coeffs: &[f64], trim_rel: f64) -> Result<PolynomialRoots> {
    let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    let threshold = trim_rel * norm;
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("non-finite polynomial coefficient".into()));
    }
    let top = coeffs
        .iter()
        .rposition(|c| c.abs() > threshold)
        .ok_or(Error::DegeneratePolynomial { threshold })?;
    let trimmed = coeffs.len() - 1 - top;
    let low = coeffs.iter().position(|&c| c != 0.0).unwrap_or(0);
    let c = &coeffs[low..=top];
    let degree = c.len() - 1;
    if degree == 0 {
        return Ok(PolynomialRoots {
            roots: Vec::new(),
            zero_roots: low,
            trimmed,
        });
    }
    let mut a = Square::zeros(degree);
    let lead = c[degree];
    for k in 1..=degree {
        *a.at_mut(1, k) = -c[degree - k] / lead;
    }
    for j in 2..=degree {
        *a.at_mut(j, j - 1) = 1.0;
    }
    balance(&mut a);
    let roots = hessenberg_eigenvalues(&mut a)?;
    Ok(PolynomialRoots {
        roots,
        zero_roots: low,
        trimmed,
    })
}
