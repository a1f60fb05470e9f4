use super::Interval;
use crate::{Error, Result};

/// Bracketing root finder: Illinois-modified regula falsi with a bisection
/// fallback whenever the secant step fails to shrink the bracket.
pub fn find_root<F: Fn(f64) -> f64>(f: F, bracket: Interval, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("root bracket must be finite"));
    }
    let (mut fa, mut fb) = (f(a), f(b));
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    if fa * fb > 0.0 || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let mut side = 0i8;
    for _ in 0..500 {
        let width = b - a;
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc.abs() <= tol || width <= 4.0 * f64::EPSILON * (a.abs() + b.abs()) {
            return Ok(c);
        }
        if fc * fb > 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        // plain bisection when regula falsi stalls on one side
        if b - a > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm.abs() <= tol {
                return Ok(m);
            }
            if fm * fb > 0.0 {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
            side = 0;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear() {
        let x = find_root(|x| x - 1.0, Interval::finite(0.0, 2.0), 1e-14).unwrap();
        assert!((x - 1.0).abs() < 1e-13);
    }

    #[test]
    fn sine() {
        let x = find_root(|x| (PI * x).sin(), Interval::finite(0.5, 1.5), 1e-14).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn root_on_bracket_edge() {
        let f = |k: f64| -(2.0 * k / PI) * (PI / k).sin() + 4.0 / PI;
        let x = find_root(f, Interval::finite(1.0, 2.0), 1e-13).unwrap();
        assert!((x - 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_bracket() {
        let err = find_root(|x| x * x + 1.0, Interval::finite(-1.0, 1.0), 1e-12).unwrap_err();
        assert!(matches!(err, Error::NoBracket { .. }));
    }
}
