use std::f64::consts::PI;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SERIES_START: f64 = 10.0;
const CF_START: f64 = 4.0;

/// Scaled complementary error function `exp(x²)·erfc(x)`.
///
/// Below `x = 4` the product is formed directly from a Chebyshev-fitted
/// `erfc`; above it the Laplace continued fraction is evaluated with the
/// modified Lentz method, so the result never overflows.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < CF_START {
        (x * x).exp() * puruspe::erfc(x)
    } else {
        continued_fraction(x)
    }
}

fn continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..2000 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / (PI.sqrt() * f)
}

/// Asymptotic series `Σ (-1)^n (2n-1)!!/2^n · c_n(order) · x^(-2n-1-order)`
/// for the function and its first two derivatives.
fn asymptotic(x: f64, order: u32) -> f64 {
    let inv_x2 = 1.0 / (x * x);
    let mut double_fact = 1.0; // (2n-1)!!, with (-1)!! = 1
    let mut pow = x.powi(-(1 + order as i32));
    let mut sum = 0.0;
    for n in 0..60u32 {
        let nf = n as f64;
        let coeff = match order {
            0 => 1.0,
            1 => -(2.0 * nf + 1.0),
            _ => (2.0 * nf + 1.0) * (2.0 * nf + 2.0),
        };
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * double_fact / 2f64.powi(n as i32) * coeff * pow;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        double_fact *= 2.0 * nf + 1.0;
        pow *= inv_x2;
    }
    sum / PI.sqrt()
}

/// `d/dx erfcx(x) = 2x·erfcx(x) − 2/√π`, free of cancellation for large x.
pub fn erfcx_deriv1(x: f64) -> f64 {
    if x >= SERIES_START {
        asymptotic(x, 1)
    } else {
        2.0 * x * erfcx(x) - FRAC_2_SQRT_PI
    }
}

/// `d²/dx² erfcx(x) = (2 + 4x²)·erfcx(x) − 4x/√π`.
pub fn erfcx_deriv2(x: f64) -> f64 {
    if x >= SERIES_START {
        asymptotic(x, 2)
    } else {
        (2.0 + 4.0 * x * x) * erfcx(x) - 2.0 * x * FRAC_2_SQRT_PI
    }
}

/// Lower edge of the elementary sandwich `2/(√π (x + √(x²+2)))`.
pub fn erfcx_lower_bound(x: f64) -> f64 {
    FRAC_2_SQRT_PI / (x + (x * x + 2.0).sqrt())
}

/// Upper edge of the elementary sandwich `2/(√π (x + √(x²+4/π)))`.
pub fn erfcx_upper_bound(x: f64) -> f64 {
    FRAC_2_SQRT_PI / (x + (x * x + 4.0 / PI).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_1d, Interval, QuadratureSpec};
    use approx::assert_relative_eq;

    /// erfcx by brute-force quadrature of `2/√π ∫_0^∞ exp(-(t² + 2xt)) dt`.
    fn erfcx_oracle(x: f64) -> f64 {
        let spec = QuadratureSpec::with_tolerances(1e-300, 1e-13);
        let est = integrate_1d(|t| (-(t * t + 2.0 * x * t)).exp(), Interval::semi_infinite(0.0), &spec).unwrap();
        FRAC_2_SQRT_PI * est.value
    }

    #[test]
    fn value_at_zero() {
        assert_eq!(erfcx(0.0), 1.0);
    }

    #[test]
    fn value_at_one() {
        assert_relative_eq!(erfcx(1.0), 0.427_583_576_155_807, max_relative = 1e-12);
        assert_relative_eq!(erfcx(1.0), erfcx_oracle(1.0), max_relative = 1e-12);
    }

    #[test]
    fn matches_oracle_across_branches() {
        for &x in &[1e-6, 0.3, 1.7, 3.999, 4.0, 4.001, 6.5, 9.99, 10.0, 25.0, 300.0] {
            assert_relative_eq!(erfcx(x), erfcx_oracle(x), max_relative = 1e-12);
        }
    }

    #[test]
    fn large_argument_asymptote() {
        for &x in &[1e3, 1e5, 1e8] {
            assert_relative_eq!(erfcx(x) * PI.sqrt() * x, 1.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn negative_arguments_reflect() {
        let x = -0.7;
        assert_relative_eq!(erfcx(x), (x * x).exp() * (2.0 - puruspe::erfc(0.7)), max_relative = 1e-13);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for &x in &[0.0, 0.5, 2.0, 3.9, 4.2, 9.5, 10.5, 50.0] {
            let h = 1e-5 * (1.0 + x);
            let fd1 = (erfcx(x + h) - erfcx(x - h)) / (2.0 * h);
            assert_relative_eq!(erfcx_deriv1(x), fd1, max_relative = 1e-6);
            let fd2 = (erfcx_deriv1(x + h) - erfcx_deriv1(x - h)) / (2.0 * h);
            assert_relative_eq!(erfcx_deriv2(x), fd2, max_relative = 1e-6);
        }
    }

    #[test]
    fn series_branch_is_continuous() {
        let below = 2.0 * 9.999_999 * erfcx(9.999_999) - FRAC_2_SQRT_PI;
        assert_relative_eq!(erfcx_deriv1(10.0), below, max_relative = 1e-6);
    }
}
