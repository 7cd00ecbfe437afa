//! Hierarchy size `sum_{l=1}^{L} C(K~, l)` with `K~ = 2 N_alpha N_u K`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostEstimate {
    pub k: u64,
    pub n_alpha: u64,
    pub n_u: u64,
    pub l: u64,
    pub k_tilde: u64,
    #[serde(serialize_with = "as_decimal")]
    pub n_ado: BigUint,
}

fn as_decimal<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_str_radix(10))
}

/// `sum_{l=1}^{L} binomial(k_tilde, l)`, exact.
pub fn binomial_sum(k_tilde: u64, l: u64) -> BigUint {
    let mut total = BigUint::zero();
    let mut c = BigUint::one();
    for j in 1..=l.min(k_tilde) {
        // C(n, j) = C(n, j-1) (n - j + 1) / j, exact at every step
        c = c * BigUint::from(k_tilde - j + 1) / BigUint::from(j);
        total += &c;
    }
    total
}

pub fn ado_count(k: u64, n_alpha: u64, n_u: u64, l: u64) -> Result<CostEstimate> {
    if k == 0 || n_alpha == 0 || n_u == 0 || l == 0 {
        return Err(Error::InvalidInput(
            "K, N_alpha, N_u and L must all be positive".into(),
        ));
    }
    let k_tilde = 2u64
        .checked_mul(n_alpha)
        .and_then(|v| v.checked_mul(n_u))
        .and_then(|v| v.checked_mul(k))
        .ok_or_else(|| Error::InvalidInput("K~ exceeds 64 bits".into()))?;
    Ok(CostEstimate {
        k,
        n_alpha,
        n_u,
        l,
        k_tilde,
        n_ado: binomial_sum(k_tilde, l),
    })
}

/// Counts nonempty subsets of `k_tilde` labels with at most `l` members by
/// enumeration. Feasible for `k_tilde <= 25`.
pub fn ado_count_brute_force(k_tilde: u32, l: u32) -> u64 {
    assert!(k_tilde <= 25);
    (1u64..(1u64 << k_tilde))
        .filter(|m| m.count_ones() <= l)
        .count() as u64
}

/// Positive rational rounded to three significant digits, `mantissa * 10^(exponent - 2)`
/// with `100 <= mantissa <= 999`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rounded3 {
    pub mantissa: u32,
    pub exponent: i32,
}

impl Rounded3 {
    pub fn value(&self) -> f64 {
        self.mantissa as f64 * 10f64.powi(self.exponent - 2)
    }

    /// Base-10 exponent of the leading digit.
    pub fn order(&self) -> i32 {
        self.exponent
    }
}

impl std::fmt::Display for Rounded3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let m = self.mantissa;
        write!(f, "{}.{:02}e{}", m / 100, m % 100, self.exponent)
    }
}

impl Serialize for Rounded3 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Rounds `num / den` to three significant digits (half away from zero).
pub fn ratio_3sig(num: &BigUint, den: &BigUint) -> Result<Rounded3> {
    if den.is_zero() || num.is_zero() {
        return Err(Error::InvalidInput("ratio needs positive operands".into()));
    }
    let ten = BigUint::from(10u32);
    let digits = |v: &BigUint| v.to_str_radix(10).len() as i32;
    let mut exponent = digits(num) - digits(den);
    loop {
        // q = round(num / den * 10^(2 - exponent))
        let shift = 2 - exponent;
        let (n, d) = if shift >= 0 {
            (num * ten.pow(shift as u32), den.clone())
        } else {
            (num.clone(), den * ten.pow((-shift) as u32))
        };
        let (q, r) = n.div_rem(&d);
        let q = if &r * 2u32 >= d { q + 1u32 } else { q };
        let q = q.to_u32().unwrap_or(u32::MAX);
        if q >= 1000 {
            exponent += 1;
        } else if q < 100 {
            exponent -= 1;
        } else {
            return Ok(Rounded3 {
                mantissa: q,
                exponent,
            });
        }
    }
}

/// Cost comparison of two hierarchies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostComparison {
    pub first: CostEstimate,
    pub second: CostEstimate,
    /// `first.n_ado / second.n_ado`.
    pub ratio: Rounded3,
}

pub fn compare_costs(first: CostEstimate, second: CostEstimate) -> Result<CostComparison> {
    let ratio = ratio_3sig(&first.n_ado, &second.n_ado)?;
    Ok(CostComparison {
        first,
        second,
        ratio,
    })
}
