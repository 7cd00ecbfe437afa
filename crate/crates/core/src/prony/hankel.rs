use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::spectral::SampledCorrelation;

/// Real symmetric Hankel matrix `H[j][k] = phi[j + k]`, stored through its
/// `2N + 1` defining values.
#[derive(Debug, Clone, PartialEq)]
pub struct Hankel {
    values: Vec<f64>,
    order: usize,
}

impl Hankel {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "a square Hankel matrix needs an odd number of values, got {}",
                values.len()
            )));
        }
        let order = values.len() / 2 + 1;
        Ok(Self { values, order })
    }

    /// `N + 1`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.values[row + col]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.order, self.order, |i, j| self.values[i + j])
    }

    /// Direct `O(n^2)` product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.order);
        (0..self.order)
            .map(|i| {
                self.values[i..i + self.order]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        // entry phi_s appears min(s, 2N - s) + 1 times
        let n2 = self.values.len() - 1;
        self.values
            .iter()
            .enumerate()
            .map(|(s, v)| (s.min(n2 - s) + 1) as f64 * v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn fast(&self) -> FastHankel {
        FastHankel::new(self)
    }
}

pub fn build_hankel(samples: &SampledCorrelation) -> Hankel {
    Hankel {
        values: samples.samples.clone(),
        order: samples.grid.n + 1,
    }
}

/// Hankel matrix–vector products through FFT convolution, `O(n log n)`.
pub struct FastHankel {
    order: usize,
    len: usize,
    spectrum: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FastHankel {
    fn new(h: &Hankel) -> Self {
        let n = h.order;
        let len = (3 * n - 2).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut spectrum: Vec<Complex64> = h
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
            .take(len)
            .collect();
        forward.process(&mut spectrum);
        Self {
            order: n,
            len,
            spectrum,
            forward,
            inverse,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.order;
        assert_eq!(x.len(), n);
        // y_i = sum_m phi_{i + n - 1 - m} x_{n - 1 - m}: a linear convolution
        let mut buf = vec![Complex64::new(0.0, 0.0); self.len];
        for (m, slot) in buf.iter_mut().take(n).enumerate() {
            *slot = Complex64::new(x[n - 1 - m], 0.0);
        }
        self.forward.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.spectrum) {
            *b *= s;
        }
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        (0..n).map(|i| buf[i + n - 1].re * scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Part, TimeGrid};

    #[test]
    fn entries_follow_definition() {
        let grid = TimeGrid::new(4.0, 2).unwrap();
        let s = SampledCorrelation::from_samples(grid, Part::Real, vec![1.0, 2.0, 3.0, 4.0, 5.0])
            .unwrap();
        let h = build_hankel(&s).to_dense();
        let want = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 3.0, 4.0, 3.0, 4.0, 5.0]);
        assert_eq!(h, want);
        let z = Hankel::new(vec![0.0; 5]).unwrap();
        assert_eq!(z.to_dense(), DMatrix::zeros(3, 3));
    }

    #[test]
    fn rejects_even_length() {
        assert!(Hankel::new(vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn fast_product_matches_direct() {
        let values: Vec<f64> = (0..61).map(|j| (0.3 * j as f64).sin() * 0.97f64.powi(j)).collect();
        let h = Hankel::new(values).unwrap();
        let x: Vec<f64> = (0..31).map(|i| (i as f64 * 0.7).cos()).collect();
        let slow = h.matvec(&x);
        let fast = h.fast().matvec(&x);
        for (a, b) in slow.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-12);
        }
        let dense = h.to_dense();
        assert!((h.frobenius_norm() - dense.norm()).abs() < 1e-12 * dense.norm());
    }
}
