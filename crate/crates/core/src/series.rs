use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// One term `eta * exp(-gamma * t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "TermRecord", into = "TermRecord")]
pub struct ExponentialTerm {
    pub eta: Complex64,
    pub gamma: Complex64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermRecord {
    eta_re: f64,
    eta_im: f64,
    gamma_re: f64,
    gamma_im: f64,
}

impl From<TermRecord> for ExponentialTerm {
    fn from(r: TermRecord) -> Self {
        Self {
            eta: Complex64::new(r.eta_re, r.eta_im),
            gamma: Complex64::new(r.gamma_re, r.gamma_im),
        }
    }
}

impl From<ExponentialTerm> for TermRecord {
    fn from(t: ExponentialTerm) -> Self {
        Self {
            eta_re: t.eta.re,
            eta_im: t.eta.im,
            gamma_re: t.gamma.re,
            gamma_im: t.gamma.im,
        }
    }
}

impl ExponentialTerm {
    pub fn new(eta: Complex64, gamma: Complex64) -> Self {
        Self { eta, gamma }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.eta * (-self.gamma * t).exp()
    }
}

/// `sum_k eta_k exp(-gamma_k t)` for `t >= 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentialSeries {
    pub terms: Vec<ExponentialTerm>,
}

impl ExponentialSeries {
    pub fn new(terms: Vec<ExponentialTerm>) -> Self {
        Self { terms }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    /// Appends the terms of `other`.
    pub fn extend(&mut self, other: &ExponentialSeries) {
        self.terms.extend_from_slice(&other.terms);
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::new(
            self.terms
                .iter()
                .map(|t| ExponentialTerm::new(t.eta * factor, t.gamma))
                .collect(),
        )
    }

    pub fn is_decaying(&self) -> bool {
        self.terms.iter().all(|t| t.gamma.re > 0.0)
    }

    /// Checks that the term set is closed under `(eta, gamma) -> (conj eta, conj gamma)`
    /// within `tol` (relative to the largest modulus involved). Such a series is
    /// real-valued for every real `t`.
    pub fn is_conjugate_closed(&self, tol: f64) -> bool {
        let scale_g = self
            .terms
            .iter()
            .map(|t| t.gamma.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let scale_e = self
            .terms
            .iter()
            .map(|t| t.eta.norm())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut used = vec![false; self.terms.len()];
        for i in 0..self.terms.len() {
            if used[i] {
                continue;
            }
            let a = self.terms[i];
            let partner = (0..self.terms.len()).find(|&j| {
                !used[j]
                    && (self.terms[j].gamma - a.gamma.conj()).norm() <= tol * scale_g
                    && (self.terms[j].eta - a.eta.conj()).norm() <= tol * scale_e
            });
            match partner {
                Some(j) => {
                    used[i] = true;
                    used[j] = true;
                }
                None => return false,
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_uses_flat_component_names() {
        let s = ExponentialSeries::new(vec![ExponentialTerm::new(
            Complex64::new(1.5, -0.25),
            Complex64::new(2.0, 3.0),
        )]);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"terms":[{"eta_re":1.5,"eta_im":-0.25,"gamma_re":2.0,"gamma_im":3.0}]}"#
        );
        let back: ExponentialSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = r#"{"terms":[{"eta_re":1,"eta_im":0,"gamma_re":1,"gamma_im":0,"x":1}]}"#;
        assert!(serde_json::from_str::<ExponentialSeries>(bad).is_err());
    }

    #[test]
    fn conjugate_pairs_give_real_values() {
        let a = ExponentialTerm::new(Complex64::new(0.3, 0.2), Complex64::new(1.0, 4.0));
        let b = ExponentialTerm::new(a.eta.conj(), a.gamma.conj());
        let s = ExponentialSeries::new(vec![a, b]);
        assert!(s.is_conjugate_closed(1e-12));
        for t in [0.0, 0.3, 2.5] {
            assert!(s.eval(t).im.abs() < 1e-15);
        }
        let lonely = ExponentialSeries::new(vec![a]);
        assert!(!lonely.is_conjugate_closed(1e-12));
    }
}
