//! Centered Hardy–Littlewood maximal function of a sampled density.

use serde::{Deserialize, Serialize};

use super::profile::{trapezoid, DensityProfile};
use crate::numerics::{integrate_1d, Interval, QuadratureSpec};
use crate::{Error, Result};

/// `M_p = (2^p · 2p/(p − 1))^(1/p)`, the operator-norm bound on `L^p`.
pub fn maximal_constant(p: f64) -> f64 {
    (2f64.powf(p) * 2.0 * p / (p - 1.0)).powf(1.0 / p)
}

/// `(Mρ)(xᵢ) = sup_r (1/2r)∫_{xᵢ−r}^{xᵢ+r} ρ` at every grid node, exact for
/// the piecewise-linear interpolant.
///
/// Between consecutive grid radii the window mass is quadratic in `r`, so
/// the supremum is attained at a grid radius or at a root of a quadratic.
pub fn maximal_function(d: &DensityProfile) -> DensityProfile {
    let rho = d.values();
    let n = rho.len();
    let dx = d.grid().dx;
    let cumulative = cumulative_mass(rho, dx);
    let values: Vec<f64> = (0..n).map(|i| maximal_at_node(rho, &cumulative, dx, i)).collect();
    DensityProfile::from_values(*d.grid(), values).expect("maximal function of a valid profile is valid")
}

fn cumulative_mass(rho: &[f64], dx: f64) -> Vec<f64> {
    let mut c = Vec::with_capacity(rho.len());
    let mut acc = 0.0;
    c.push(0.0);
    for w in rho.windows(2) {
        acc += 0.5 * dx * (w[0] + w[1]);
        c.push(acc);
    }
    c
}

fn maximal_at_node(rho: &[f64], cumulative: &[f64], dx: f64, i: usize) -> f64 {
    let n = rho.len();
    let reach = i.max(n - 1 - i);
    let side = |j: isize| -> f64 {
        if j < 0 || j as usize >= n {
            0.0
        } else {
            rho[j as usize]
        }
    };
    let mut best = rho[i];
    for k in 0..reach {
        let r0 = k as f64 * dx;
        let lo = i.saturating_sub(k);
        let hi = (i + k).min(n - 1);
        let mass = cumulative[hi] - cumulative[lo];
        // edge values of ρ(xᵢ+t) + ρ(xᵢ−t) on this radial cell; zero once a side leaves the grid
        let (ii, kk) = (i as isize, k as isize);
        let right_in = ii + kk + 1 < n as isize;
        let left_in = ii - kk > 0;
        let g0 = if right_in { side(ii + kk) } else { 0.0 } + if left_in { side(ii - kk) } else { 0.0 };
        let g1 = if right_in { side(ii + kk + 1) } else { 0.0 } + if left_in { side(ii - kk - 1) } else { 0.0 };
        let c = (g1 - g0) / dx;
        let window = |t: f64| (mass + g0 * t + 0.5 * c * t * t) / (2.0 * (r0 + t));
        best = best.max(window(dx));
        if c != 0.0 {
            // stationary points of window(t): c t² + 2c r0 t + 2(g0 r0 − mass) = 0
            let disc = r0 * r0 - 2.0 * (g0 * r0 - mass) / c;
            if disc >= 0.0 {
                let s = disc.sqrt();
                for t in [-r0 + s, -r0 - s] {
                    if t > 0.0 && t < dx {
                        best = best.max(window(t));
                    }
                }
            }
        }
    }
    best
}

/// `(Mρ)(x)` for `x` beyond the last grid node: the best window reaches
/// back to some `y` in the support and ends past the grid.
fn exterior_right(rho: &[f64], tail: &[f64], dx: f64, x0: f64, x: f64) -> f64 {
    let n = rho.len();
    let mut best: f64 = 0.0;
    for j in 0..n {
        let y = x0 + j as f64 * dx;
        best = best.max(tail[j] / (2.0 * (x - y)));
        if j + 1 < n {
            // within the cell, stationarity reads ρ(y)(x − y) = T(y)
            let s = (rho[j + 1] - rho[j]) / dx;
            if s != 0.0 {
                let dist = x - y;
                // s h² − 2 s D h − 2(ρⱼ D − Tⱼ) = 0
                let disc = dist * dist + 2.0 * (rho[j] * dist - tail[j]) / s;
                if disc >= 0.0 {
                    let root = disc.sqrt();
                    for h in [dist - root, dist + root] {
                        if h > 0.0 && h < dx {
                            let t = tail[j] - (rho[j] * h + 0.5 * s * h * h);
                            best = best.max(t / (2.0 * (dist - h)));
                        }
                    }
                }
            }
        }
    }
    best
}

fn exterior_integral(rho: &[f64], dx: f64, p: f64) -> Result<f64> {
    let cumulative = cumulative_mass(rho, dx);
    let total = *cumulative.last().unwrap();
    let tail: Vec<f64> = cumulative.iter().map(|c| total - c).collect();
    let end = (rho.len() - 1) as f64 * dx;
    if total == 0.0 {
        return Ok(0.0);
    }
    let spec = QuadratureSpec::with_tolerances(1e-300, 1e-10);
    let est = integrate_1d(
        |x| exterior_right(rho, &tail, dx, 0.0, x).powf(p),
        Interval::semi_infinite(end),
        &spec,
    )?;
    Ok(est.value)
}

/// `∫ (Mρ)^p` over the whole line: grid nodes by trapezoid plus both
/// exterior tails, where `Mρ` decays like `N/(2|x|)`.
pub fn maximal_power_integral(d: &DensityProfile, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::invalid(format!("maximal norm needs p > 1, got {p}")));
    }
    let m = maximal_function(d);
    let mapped: Vec<f64> = m.values().iter().map(|v| v.powf(p)).collect();
    let interior = trapezoid(&mapped, d.grid().dx);
    let right = exterior_integral(d.values(), d.grid().dx, p)?;
    let reversed: Vec<f64> = d.values().iter().rev().cloned().collect();
    let left = exterior_integral(&reversed, d.grid().dx, p)?;
    Ok(interior + right + left)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpMaximalCheck {
    pub p: f64,
    /// `‖Mρ‖_p / ‖ρ‖_p`.
    pub ratio: f64,
    pub constant: f64,
    pub within_bound: bool,
}

/// Ratio `‖Mρ‖_p/‖ρ‖_p` against the bound `M_p`.
pub fn lp_maximal_constant_check(d: &DensityProfile, p: f64) -> Result<LpMaximalCheck> {
    let num = maximal_power_integral(d, p)?;
    let den = d.power_integral(p)?;
    if den == 0.0 {
        return Err(Error::invalid("maximal-function ratio of a zero density"));
    }
    let ratio = (num / den).powf(1.0 / p);
    let constant = maximal_constant(p);
    Ok(LpMaximalCheck {
        p,
        ratio,
        constant,
        within_bound: ratio <= constant,
    })
}
