//! Gaussians times polynomials: `exp(−(x−m)²/(2s²))·Σ cⱼ (x−m)ʲ`.
//! Products of Hermite–Gaussian orbitals stay in this class, and so do
//! their overlaps and cross-correlations.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussHermite;
use once_cell::sync::Lazy;

// exact for polynomial degree ≤ 15, enough for products of four quadratics
static HERMITE_RULE: Lazy<GaussHermite> = Lazy::new(|| GaussHermite::new(NonZeroUsize::new(8).unwrap()));

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GaussPoly {
    pub center: f64,
    pub sigma: f64,
    pub coeffs: Vec<f64>,
}

impl GaussPoly {
    #[cfg(test)]
    pub fn gaussian(center: f64, sigma: f64, amplitude: f64) -> Self {
        Self {
            center,
            sigma,
            coeffs: vec![amplitude],
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = x - self.center;
        let envelope = (-0.5 * t * t / (self.sigma * self.sigma)).exp();
        envelope * horner(&self.coeffs, t)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            center: self.center,
            sigma: self.sigma,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// `∫ q(x) dx`.
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        let mut moment = (2.0 * PI).sqrt() * self.sigma; // ∫ e^{−t²/2s²} t^j, j = 0
        for (j, c) in self.coeffs.iter().enumerate() {
            if j % 2 == 0 {
                total += c * moment;
                moment *= (j as f64 + 1.0) * self.sigma * self.sigma;
            }
        }
        total
    }

    /// Product of two Gauss-polynomials.
    pub fn product(&self, other: &GaussPoly) -> GaussPoly {
        let (a1, a2) = (0.5 / self.sigma.powi(2), 0.5 / other.sigma.powi(2));
        let a = a1 + a2;
        let center = (a1 * self.center + a2 * other.center) / a;
        let d = self.center - other.center;
        let prefactor = (-a1 * a2 / a * d * d).exp();
        let p1 = shift_poly(&self.coeffs, center - self.center);
        let p2 = shift_poly(&other.coeffs, center - other.center);
        let coeffs = poly_mul(&p1, &p2).into_iter().map(|c| c * prefactor).collect();
        GaussPoly {
            center,
            sigma: (0.5 / a).sqrt(),
            coeffs,
        }
    }

    /// `∫ self(x)·other(x − u) dx`.
    pub fn correlate(&self, other: &GaussPoly, u: f64) -> f64 {
        let (a1, a2) = (0.5 / self.sigma.powi(2), 0.5 / other.sigma.powi(2));
        let a = a1 + a2;
        let c2 = other.center + u;
        let d = self.center - c2;
        let prefactor = (-a1 * a2 / a * d * d).exp();
        if prefactor == 0.0 {
            return 0.0;
        }
        let root = a.sqrt();
        if self.coeffs.len() == 1 && other.coeffs.len() == 1 {
            return self.coeffs[0] * other.coeffs[0] * prefactor * PI.sqrt() / root;
        }
        let x0 = (a1 * self.center + a2 * c2) / a;
        let (o1, o2) = (x0 - self.center, x0 - c2);
        let integral = HERMITE_RULE.integrate(|y| {
            let t = y / root;
            horner(&self.coeffs, o1 + t) * horner(&other.coeffs, o2 + t)
        });
        prefactor * integral / root
    }
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

pub(crate) fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Coefficients of `p(t + h)` in powers of `t`.
fn shift_poly(p: &[f64], h: f64) -> Vec<f64> {
    // Horner with polynomial accumulator: acc ← acc·(t + h) + c
    let mut acc: Vec<f64> = vec![0.0];
    for c in p.iter().rev() {
        let mut next = vec![0.0; acc.len() + 1];
        for (i, a) in acc.iter().enumerate() {
            next[i + 1] += a;
            next[i] += a * h;
        }
        next[0] += c;
        acc = next;
    }
    while acc.len() > 1 && *acc.last().unwrap() == 0.0 {
        acc.pop();
    }
    acc
}

/// Coefficients of the probabilists' Hermite polynomial `He_k`.
pub(crate) fn hermite_he(k: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for n in 1..k {
        let mut next = vec![0.0; n + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= n as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized Hermite–Gaussian orbital
/// `(2π)^(−1/4) (k!)^(−1/2) w^(−1/2) He_k(z) e^(−z²/4)`, `z = (x − μ)/w`.
/// Its square at `k = 0` is the normal density with standard deviation `w`.
pub(crate) fn orbital(order: usize, center: f64, width: f64) -> GaussPoly {
    let factorial: f64 = (1..=order).map(|i| i as f64).product();
    let norm = (2.0 * PI).powf(-0.25) / (factorial * width).sqrt();
    let he = hermite_he(order);
    let coeffs = he
        .iter()
        .enumerate()
        .map(|(j, c)| norm * c / width.powi(j as i32))
        .collect();
    GaussPoly {
        center,
        sigma: width * std::f64::consts::SQRT_2,
        coeffs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_1d, Interval, QuadratureSpec};
    use approx::assert_relative_eq;

    fn quad(f: impl Fn(f64) -> f64) -> f64 {
        integrate_1d(f, Interval::real_line(), &QuadratureSpec::tight()).unwrap().value
    }

    #[test]
    fn hermite_recurrence() {
        assert_eq!(hermite_he(2), vec![-1.0, 0.0, 1.0]);
        assert_eq!(hermite_he(3), vec![0.0, -3.0, 0.0, 1.0]);
    }

    #[test]
    fn orbitals_are_orthonormal() {
        for j in 0..4 {
            for k in 0..4 {
                let s = orbital(j, 0.3, 0.7).product(&orbital(k, 0.3, 0.7)).integral();
                let want = if j == k { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-13, "{j} {k} {s}");
            }
        }
    }

    #[test]
    fn ground_orbital_square_is_normal_density() {
        let q = orbital(0, 0.0, 1.0).product(&orbital(0, 0.0, 1.0));
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        for x in [-2.0, 0.0, 0.5, 3.0] {
            assert_relative_eq!(q.eval(x), pdf(x), max_relative = 1e-14);
        }
    }

    #[test]
    fn product_matches_pointwise() {
        let a = orbital(2, -0.4, 0.6);
        let b = orbital(1, 0.9, 1.3);
        let p = a.product(&b);
        for x in [-3.0, -0.2, 0.4, 2.5] {
            assert_relative_eq!(p.eval(x), a.eval(x) * b.eval(x), max_relative = 1e-12, epsilon = 1e-300);
        }
        assert_relative_eq!(p.integral(), quad(|x| a.eval(x) * b.eval(x)), max_relative = 1e-10);
    }

    #[test]
    fn correlation_matches_quadrature() {
        let p = orbital(1, 0.2, 0.8).product(&orbital(2, -0.5, 0.8));
        let q = orbital(0, 1.0, 0.5).product(&orbital(1, 0.0, 1.1));
        for u in [-1.5, 0.0, 0.7, 2.0] {
            let want = quad(|x| p.eval(x) * q.eval(x - u));
            assert!((p.correlate(&q, u) - want).abs() < 1e-12, "{u}");
        }
        let g1 = GaussPoly::gaussian(0.3, 0.5, 2.0);
        let g2 = GaussPoly::gaussian(-1.0, 1.5, 0.7);
        let want = quad(|x| g1.eval(x) * g2.eval(x - 0.4));
        assert_relative_eq!(g1.correlate(&g2, 0.4), want, max_relative = 1e-10);
    }
}
