//! Interaction energy `⟨ψ|Σ v(|xᵢ − xⱼ|)|ψ⟩`, Hartree term
//! `D(ρ,ρ) = ½∫∫ρρv` and the indirect energy `I_xc = ⟨V⟩ − D`.
//!
//! Both terms reduce to one radial integral: `⟨V⟩ = 2∫₀^∞ v f` with `f` the
//! pair-separation distribution, and `D = ∫₀^∞ v A` with `A` the density
//! autocorrelation.

use serde::{Deserialize, Serialize};

use crate::numerics::{integrate_1d, Estimate, Interval, QuadratureSpec};
use crate::potentials::Potential;
use crate::states::{DensityProfile, TrialState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub expectation_v: f64,
    pub hartree: f64,
    pub i_xc: f64,
    #[serde(rename = "err")]
    pub quadrature_error_estimate: f64,
}

impl EnergyBreakdown {
    fn from_parts(expectation: Estimate, hartree: Estimate) -> Self {
        Self {
            expectation_v: expectation.value,
            hartree: hartree.value,
            i_xc: expectation.value - hartree.value,
            quadrature_error_estimate: expectation.error + hartree.error,
        }
    }
}

fn radial_spec() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-15,
        rel_tol: 1e-10,
        max_subdivisions: 4000,
        truncation_threshold: 1e-14,
    }
}

/// `∫₀^∞ (v(r) − shift)·g(r) dr`, split at the features `(location, width)`
/// of `g` and at the kinks of `v`. `gross` bounds the terms summed into `g`
/// and sets the roundoff level below which no piece is refined.
fn radial_integral(
    p: &Potential,
    shift: f64,
    g: impl Fn(f64) -> f64,
    gross: impl Fn(f64) -> f64,
    features: &[(f64, f64)],
) -> Result<Estimate> {
    let spec = radial_spec();
    let mut points = Vec::new();
    let mut reach: f64 = 0.0;
    for &(loc, w) in features {
        for k in [-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0] {
            let b = loc + k * w;
            if b > 0.0 {
                points.push(b);
            }
        }
        reach = reach.max(loc + 12.0 * w);
    }
    let cutoff = match *p {
        Potential::ApproxContact { sigma } => Some(sigma),
        _ => None,
    };
    if let Some(sigma) = cutoff {
        points.retain(|&b| b < sigma);
        points.push(sigma);
    } else {
        points.push(p.natural_scale());
    }
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * *b);

    let integrand = |r: f64| (p.kernel(r) - shift) * g(r);
    let net = magnitude(&integrand, &points);
    let noise = magnitude(&|r: f64| (p.kernel(r) - shift) * gross(r), &points);
    let spec = QuadratureSpec {
        abs_tol: spec.abs_tol.max(1e-2 * spec.rel_tol * net).max(16.0 * f64::EPSILON * noise),
        ..spec
    };
    let mut total = Estimate::default();
    let mut lo = 0.0;
    for (i, &hi) in points.iter().enumerate() {
        let piece = if i == 0 {
            if let Potential::Homogeneous { epsilon } = *p {
                // s = r^ε removes the r^(ε−1) endpoint singularity
                let top = hi.powf(epsilon);
                integrate_1d(
                    |s: f64| {
                        let r = s.powf(1.0 / epsilon);
                        (1.0 - shift * r.powf(1.0 - epsilon)) * g(r) / epsilon
                    },
                    Interval::finite(0.0, top),
                    &spec,
                )?
            } else {
                integrate_1d(integrand, Interval::finite(lo, hi), &spec)?
            }
        } else {
            integrate_1d(integrand, Interval::finite(lo, hi), &spec)?
        };
        total = total + piece;
        lo = hi;
    }
    if cutoff.is_none() {
        let start = lo.max(reach);
        if start > lo {
            total = total + integrate_1d(integrand, Interval::finite(lo, start), &spec)?;
        }
        total = total + integrate_1d(integrand, Interval::semi_infinite(start), &spec)?;
    }
    Ok(total)
}

/// Rough `∫₀^∞ |f|`.
fn magnitude(f: &dyn Fn(f64) -> f64, points: &[f64]) -> f64 {
    let loose = QuadratureSpec::with_tolerances(1e-8, 1e-3);
    let mut lo = 0.0;
    let mut sum = 0.0;
    for &hi in points {
        sum += integrate_1d(|r| f(r).abs(), Interval::finite(lo, hi), &loose).map_or(0.0, |e| e.value);
        lo = hi;
    }
    sum + integrate_1d(|r| f(r).abs(), Interval::semi_infinite(lo), &loose).map_or(0.0, |e| e.value)
}

/// `⟨ψ|Σ_{i<j} v(|xᵢ − xⱼ|)|ψ⟩`; for the contact interaction the pair
/// distribution at zero separation.
pub fn expectation_v(s: &TrialState, p: &Potential) -> Result<Estimate> {
    shifted_expectation(s, p, 0.0)
}

fn shifted_expectation(s: &TrialState, p: &Potential, shift: f64) -> Result<Estimate> {
    if let Potential::Contact = p {
        return Ok(Estimate::new(s.pair_distribution(0.0), 0.0));
    }
    let est = radial_integral(p, shift, |r| s.pair_distribution(r), |r| s.pair_distribution_gross(r), &s.pair_features())?;
    Ok(est.scale(2.0))
}

/// `D(ρ,ρ)` from the closed-form density autocorrelation of `s`.
pub fn hartree_exact(s: &TrialState, p: &Potential) -> Result<Estimate> {
    shifted_hartree(s, p, 0.0)
}

fn shifted_hartree(s: &TrialState, p: &Potential, shift: f64) -> Result<Estimate> {
    if let Potential::Contact = p {
        return Ok(Estimate::new(0.5 * s.density_autocorrelation(0.0), 0.0));
    }
    radial_integral(
        p,
        shift,
        |r| s.density_autocorrelation(r),
        |r| s.density_autocorrelation_gross(r),
        &s.autocorrelation_features(),
    )
}

/// `D(ρ,ρ)` of a sampled density: the discrete autocorrelation on grid lags,
/// interpolated with 6-point Lagrange stencils and integrated against `v`.
pub fn hartree(d: &DensityProfile, p: &Potential) -> Result<f64> {
    if let Potential::Contact = p {
        return Ok(0.5 * d.power_integral(2.0)?);
    }
    if d.is_zero() {
        return Ok(0.0);
    }
    let rho = d.values();
    let n = rho.len();
    let dx = d.grid().dx;
    let mut weights = vec![dx; n];
    weights[0] *= 0.5;
    weights[n - 1] *= 0.5;
    let lags: Vec<f64> = (0..n)
        .map(|k| (0..n - k).map(|i| rho[i] * rho[i + k]).zip(&weights).map(|(a, w)| a * w).sum())
        .collect();
    let interp = |r: f64| -> f64 {
        let s = r / dx;
        if s >= (n - 1) as f64 {
            return 0.0;
        }
        let base = (s.floor() as isize - 2).clamp(0, n as isize - 6) as usize;
        let mut total = 0.0;
        for j in 0..6 {
            let mut l = 1.0;
            for m in 0..6 {
                if m != j {
                    l *= (s - (base + m) as f64) / ((j as f64) - (m as f64));
                }
            }
            total += l * lags[base + j];
        }
        total
    };
    let span = (n - 1) as f64 * dx;
    let features: Vec<(f64, f64)> = (0..8).map(|k| (span * k as f64 / 8.0, span / 96.0)).collect();
    Ok(radial_integral(p, 0.0, interp, |r| interp(r).abs(), &features)?.value)
}

/// Full breakdown `⟨V⟩`, `D`, `I_xc`.
pub fn i_xc(s: &TrialState, p: &Potential) -> Result<EnergyBreakdown> {
    Ok(EnergyBreakdown::from_parts(expectation_v(s, p)?, hartree_exact(s, p)?))
}

/// Breakdown for the shifted interaction `v − c`, integrated directly; the
/// result satisfies `I′_xc = I_xc + cN/2`.
pub fn i_xc_shifted(s: &TrialState, p: &Potential, c: f64) -> Result<EnergyBreakdown> {
    if let Potential::Contact = p {
        return Err(Error::ContactNotPointwise);
    }
    Ok(EnergyBreakdown::from_parts(
        shifted_expectation(s, p, c)?,
        shifted_hartree(s, p, c)?,
    ))
}

/// `α(r, z) = ∫_{z−r}^{z+r} ρ`, the window mass used in the Cauchy–Schwarz
/// step of the constant-cutoff bound.
pub fn alpha_profile(s: &TrialState, r: f64, z: f64) -> Result<f64> {
    s.alpha_profile(r, z)
}
