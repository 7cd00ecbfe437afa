//! Exponential integrals in exponentially scaled form.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^x E1(x)` for `x > 0`.
pub fn e1_scaled(x: f64) -> f64 {
    assert!(x > 0.0, "e1_scaled requires x > 0");
    if x <= 1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        (-EULER_GAMMA - x.ln() - sum) * x.exp()
    } else {
        // modified Lentz evaluation of the continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h
    }
}

/// `e^{-x} Ei(x)` for `x > 0`.
pub fn ei_scaled(x: f64) -> f64 {
    assert!(x > 0.0, "ei_scaled requires x > 0");
    if x < 40.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..500 {
            term *= x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add < 1e-17 * sum {
                break;
            }
        }
        (EULER_GAMMA + x.ln() + sum) * (-x).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let next = term * k as f64 / x;
            if next > term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / x
    }
}

/// `e^{-x} Ei(x) + e^{x} E1(x)`, continuous at `x = 0` where it vanishes.
///
/// `(1/(2b)) * g(a b)` equals `int_0^inf sin(a w) / (w^2 + b^2) dw`.
pub fn sine_lorentz_kernel(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    assert!(x > 0.0);
    ei_scaled(x) + e1_scaled(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reference_values() {
        // E1(1), Ei(1), E1(10), Ei(10), Ei(50)
        assert!(rel(e1_scaled(1.0) * (-1f64).exp(), 0.219_383_934_395_520_27) < 1e-14);
        assert!(rel(ei_scaled(1.0) * 1f64.exp(), 1.895_117_816_355_936_8) < 1e-14);
        assert!(rel(e1_scaled(10.0) * (-10f64).exp(), 4.156_968_929_685_324e-6) < 1e-13);
        assert!(rel(ei_scaled(10.0) * 10f64.exp(), 2_492.228_976_241_877_7) < 1e-13);
        assert!(rel(ei_scaled(50.0) * 50f64.exp(), 1.058_563_689_713_169_1e20) < 1e-13);
        assert!(rel(e1_scaled(0.1) * (-0.1f64).exp(), 1.822_923_958_419_390_7) < 1e-14);
    }

    #[test]
    fn branches_agree_at_switch_points() {
        assert!(rel(e1_scaled(1.0 - 1e-12), e1_scaled(1.0 + 1e-12)) < 1e-10);
        assert!(rel(ei_scaled(40.0 - 1e-12), ei_scaled(40.0 + 1e-12)) < 1e-13);
    }

    #[test]
    fn kernel_vanishes_at_origin() {
        assert!(sine_lorentz_kernel(1e-12).abs() < 1e-10);
        // large-x asymptote 2/x
        let x = 800.0;
        assert!(rel(sine_lorentz_kernel(x), 2.0 / x * (1.0 + 2.0 / (x * x))) < 1e-9);
    }
}
