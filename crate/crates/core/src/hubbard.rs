//! Bethe-ansatz interpolated energies of the homogeneous 1D Hubbard model and
//! the site-occupation lower bound on its exchange-correlation energy.

use std::f64::consts::PI;

use puruspe::Jn;
use serde::{Deserialize, Serialize};

use crate::numerics::{find_root, integrate_1d, Interval, QuadratureSpec};
use crate::{Error, Result};

/// Band filling `n`, hopping `t`, on-site repulsion `u` and interpolation
/// parameter `kappa = β(U/t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HubbardPoint {
    pub n: f64,
    pub t: f64,
    pub u: f64,
    pub kappa: f64,
}

impl HubbardPoint {
    pub fn new(n: f64, t: f64, u: f64, kappa: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&n) {
            return Err(Error::invalid(format!("filling must lie in [0, 2], got {n}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::invalid(format!("hopping must be positive, got {t}")));
        }
        if !(u >= 0.0 && u.is_finite()) {
            return Err(Error::invalid(format!("interaction must be nonnegative, got {u}")));
        }
        check_kappa(kappa)?;
        Ok(HubbardPoint { n, t, u, kappa })
    }

    /// Point with `kappa` taken from the Lieb–Wu matching `β(U/t)`.
    pub fn with_matched_kappa(n: f64, t: f64, u: f64) -> Result<Self> {
        let kappa = beta_of_u(u / t)?;
        HubbardPoint::new(n, t, u, kappa)
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&kappa) {
        return Err(Error::invalid(format!("kappa must lie in [1, 2], got {kappa}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationVector {
    pub sites: Vec<f64>,
}

impl OccupationVector {
    pub fn new(sites: Vec<f64>) -> Result<Self> {
        if let Some(bad) = sites.iter().find(|n| !(0.0..=2.0).contains(*n)) {
            return Err(Error::invalid(format!("site occupation must lie in [0, 2], got {bad}")));
        }
        Ok(OccupationVector { sites })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Energy per site, with the particle–hole reflection above half filling.
pub fn energy(pt: &HubbardPoint) -> f64 {
    if pt.n <= 1.0 {
        lower_branch(pt.n, pt.t, pt.kappa)
    } else {
        lower_branch(2.0 - pt.n, pt.t, pt.kappa) + pt.u * (pt.n - 1.0)
    }
}

fn lower_branch(n: f64, t: f64, kappa: f64) -> f64 {
    -(2.0 * t * kappa / PI) * (PI * n / kappa).sin()
}

/// `f_n(κ) = 2 sin(πn/2) − κ sin(πn/κ)`, so that
/// `e(n,t,U) − e(n,t,0) = (2t/π) f_n(κ)` for `n ≤ 1`.
pub fn f_n(n: f64, kappa: f64) -> f64 {
    2.0 * (PI * n / 2.0).sin() - kappa * (PI * n / kappa).sin()
}

/// Hartree energy per site `U n²/4`.
pub fn hartree(n: f64, u: f64) -> f64 {
    u * n * n / 4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XcDecomposition {
    pub e: f64,
    /// Noninteracting energy `e(n,t,0)`, evaluated with `κ = 2`.
    pub e_free: f64,
    pub e_hartree: f64,
    pub e_xc: f64,
    /// `(2t/π) f_m(κ)` with `m = min(n, 2 − n)`; never negative.
    pub kinetic_part: f64,
}

pub fn exchange_correlation(pt: &HubbardPoint) -> XcDecomposition {
    let e = energy(pt);
    let e_free = energy(&HubbardPoint { u: 0.0, kappa: 2.0, ..*pt });
    let e_hartree = hartree(pt.n, pt.u);
    let m = pt.n.min(2.0 - pt.n);
    XcDecomposition {
        e,
        e_free,
        e_hartree,
        e_xc: e - e_free - e_hartree,
        kinetic_part: 2.0 * pt.t / PI * f_n(m, pt.kappa),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub n_sites: usize,
    pub e_xc: f64,
    /// `−(U/4) Σ nᵢ²`.
    pub lower_bound: f64,
    pub slack: f64,
    /// Smallest per-site slack `e_xc(nᵢ) + U nᵢ²/4`.
    pub min_site_slack: f64,
    pub holds: bool,
}

/// Checks `Σᵢ e_xc(nᵢ) ≥ −(U/4) Σᵢ nᵢ²`.
pub fn verify_proposition(occ: &OccupationVector, t: f64, u: f64, kappa: f64) -> Result<PropositionReport> {
    let mut e_xc = 0.0;
    let mut bound = 0.0;
    let mut min_site = f64::INFINITY;
    for &n in &occ.sites {
        let pt = HubbardPoint::new(n, t, u, kappa)?;
        let x = exchange_correlation(&pt).e_xc;
        let b = -hartree(n, u);
        e_xc += x;
        bound += b;
        min_site = min_site.min(x - b);
    }
    let slack = e_xc - bound;
    let scale = bound.abs().max(t * occ.len() as f64).max(f64::MIN_POSITIVE);
    Ok(PropositionReport {
        n_sites: occ.len(),
        e_xc,
        lower_bound: bound,
        slack,
        min_site_slack: if occ.is_empty() { 0.0 } else { min_site },
        holds: slack >= -1e-12 * scale,
    })
}

/// Exact half-filling ground-state energy per site in units of `t`,
/// `−4∫₀^∞ J₀(x)J₁(x) / (x(1 + exp(xU/2t))) dx`.
pub fn lieb_wu_half_filling(u_over_t: f64) -> Result<f64> {
    if !(u_over_t >= 0.0) {
        return Err(Error::invalid(format!("U/t must be nonnegative, got {u_over_t}")));
    }
    if u_over_t == 0.0 {
        return Ok(-4.0 / PI);
    }
    let a = 0.5 * u_over_t;
    let integrand = |x: f64| {
        if x == 0.0 {
            // J₀J₁/x → 1/2
            return 0.5 / 2.0;
        }
        let weight = if a * x > 700.0 { 0.0 } else { 1.0 / (1.0 + (a * x).exp()) };
        Jn(0, x) * Jn(1, x) / x * weight
    };
    let spec = QuadratureSpec::with_tolerances(1e-16, 1e-12);
    // whole oscillation periods until the Fermi factor kills the remainder
    let cutoff = (40.0 / a).min(2.0e4);
    let mut total = 0.0;
    let mut lo = 0.0;
    while lo < cutoff {
        let hi = (lo + PI).min(cutoff);
        total += integrate_1d(integrand, Interval::finite(lo, hi), &spec)?.value;
        lo = hi;
    }
    Ok(-4.0 * total)
}

/// `β(U/t)`: the `κ ∈ [1, 2]` for which `−(2κ/π) sin(π/κ)` equals the exact
/// half-filling energy per site.
pub fn beta_of_u(u_over_t: f64) -> Result<f64> {
    let target = lieb_wu_half_filling(u_over_t)?;
    let g = |k: f64| lower_branch(1.0, 1.0, k) - target;
    let (g1, g2) = (g(1.0), g(2.0));
    // the truncated Bessel integral can overshoot the endpoints by roundoff
    const SLOP: f64 = 1e-8;
    if (0.0..=SLOP).contains(&g2) {
        return Ok(2.0);
    }
    if (-SLOP..=0.0).contains(&g1) {
        return Ok(1.0);
    }
    find_root(g, Interval::finite(1.0, 2.0), 1e-14)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn energy_examples() {
        let t = 1.3;
        let half = HubbardPoint::new(1.0, t, 0.0, 2.0).unwrap();
        assert_relative_eq!(energy(&half), -4.0 * t / PI, max_relative = 1e-14);
        assert_eq!(energy(&HubbardPoint::new(0.0, t, 3.0, 1.4).unwrap()), 0.0);
        let full = HubbardPoint::new(2.0, t, 3.0, 1.4).unwrap();
        assert_relative_eq!(energy(&full), 3.0, max_relative = 1e-14);
    }

    #[test]
    fn f_examples() {
        for n in [0.0, 0.2, 0.7, 1.0] {
            assert!(f_n(n, 2.0).abs() < 1e-15);
        }
        assert_eq!(f_n(0.0, 1.3), 0.0);
        // 2 sin(π/2) − sin(π)
        assert_relative_eq!(f_n(1.0, 1.0), 2.0, max_relative = 1e-15);
        for n in [0.1, 0.5, 0.9] {
            let s = (PI * n / 2.0).sin();
            assert_relative_eq!(f_n(n, 1.0), 2.0 * s * (1.0 - (PI * n / 2.0).cos()), max_relative = 1e-12);
        }
    }

    #[test]
    fn decomposition() {
        let pt = HubbardPoint::new(1.0, 1.0, 2.0, 1.5).unwrap();
        let x = exchange_correlation(&pt);
        assert_relative_eq!(x.e_hartree, 0.5, max_relative = 1e-15);
        assert_relative_eq!(x.e - x.e_free, x.kinetic_part, max_relative = 1e-12);
        assert!(x.e_xc >= -x.e_hartree);
        let free = exchange_correlation(&HubbardPoint::new(0.6, 1.0, 0.0, 2.0).unwrap());
        assert!(free.e_xc.abs() < 1e-15);
    }

    #[test]
    fn proposition_trivial_and_upper_branch() {
        let zeros = OccupationVector::new(vec![0.0; 5]).unwrap();
        let r = verify_proposition(&zeros, 1.0, 4.0, 1.2).unwrap();
        assert_eq!(r.slack, 0.0);
        assert!(r.holds);
        let upper = OccupationVector::new(vec![1.2, 1.9, 2.0, 0.4]).unwrap();
        assert!(verify_proposition(&upper, 1.0, 4.0, 1.2).unwrap().holds);
        assert!(OccupationVector::new(vec![2.1]).is_err());
    }

    #[test]
    fn lieb_wu_limits() {
        assert_relative_eq!(lieb_wu_half_filling(1e-3).unwrap(), -4.0 / PI, max_relative = 1e-3);
        // strong coupling: −4 ln 2 · t/U
        let u = 200.0;
        assert_relative_eq!(lieb_wu_half_filling(u).unwrap(), -4.0 * 2f64.ln() / u, max_relative = 1e-3);
        assert_eq!(beta_of_u(0.0).unwrap(), 2.0);
        let mut prev = 2.0;
        for u in [0.5, 1.0, 2.0, 4.0, 10.0, 40.0, 100.0] {
            let k = beta_of_u(u).unwrap();
            assert!((1.0..=2.0).contains(&k) && k < prev, "u={u} kappa={k}");
            prev = k;
        }
        assert!(beta_of_u(1e4).unwrap() < 1.01);
    }
}
