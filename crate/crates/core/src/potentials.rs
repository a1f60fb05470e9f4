//! Pair-interaction potentials on `r = |x − y| ≥ 0`, their derivatives,
//! moment integrals of `v''`, and grid certification of the moment
//! conditions (convexity, decay, logarithmic second moment, `1/γ` tail).

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::numerics::{self, erfcx, erfcx_deriv1, erfcx_deriv2, Interval, QuadratureSpec};
use crate::{Error, Result};

static LEGENDRE_RULE: Lazy<GaussLegendre> = Lazy::new(|| GaussLegendre::new(NonZeroUsize::new(24).unwrap()));

/// An interaction potential `v(r)`.
///
/// `Contact` is `δ(x − y)` with unit strength; it has no pointwise value and
/// is handled analytically by the energy code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialEntry", into = "PotentialEntry")]
pub enum Potential {
    Contact,
    /// `2/σ − 2r/σ²` on `[0, σ]`, zero beyond.
    ApproxContact { sigma: f64 },
    /// `1/√(r² + ε²)`.
    SoftCoulomb { epsilon: f64 },
    /// Soft Coulomb shifted by `ε/√2`, the smallest shift making it convex.
    ConvexSoftCoulomb { epsilon: f64 },
    /// `(√π/2β)·exp(r²/4β²)·erfc(r/2β)`, the thin-wire interaction.
    RegularizedCoulomb { beta: f64 },
    /// `r^(ε−1)` with `0 < ε < 1`.
    Homogeneous { epsilon: f64 },
}

/// Human-editable `{family, params}` form of a [`Potential`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialEntry {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl TryFrom<PotentialEntry> for Potential {
    type Error = Error;

    fn try_from(entry: PotentialEntry) -> Result<Self> {
        let param = |name: &str| {
            entry.params.get(name).copied().ok_or_else(|| {
                Error::invalid(format!("potential `{}` needs parameter `{name}`", entry.family))
            })
        };
        let p = match entry.family.as_str() {
            "contact" => Potential::Contact,
            "approx_contact" => Potential::ApproxContact { sigma: param("sigma")? },
            "soft_coulomb" => Potential::SoftCoulomb { epsilon: param("epsilon")? },
            "convex_soft_coulomb" => Potential::ConvexSoftCoulomb { epsilon: param("epsilon")? },
            "regularized_coulomb" => Potential::RegularizedCoulomb { beta: param("beta")? },
            "homogeneous" => Potential::Homogeneous { epsilon: param("epsilon")? },
            "coulomb" => return Err(Error::CoulombSingular),
            other => return Err(Error::invalid(format!("unknown potential family `{other}`"))),
        };
        p.validate()?;
        Ok(p)
    }
}

impl From<Potential> for PotentialEntry {
    fn from(p: Potential) -> Self {
        let mut params = BTreeMap::new();
        if let Some((name, value)) = p.parameter() {
            params.insert(name.to_string(), value);
        }
        PotentialEntry {
            family: p.family().to_string(),
            params,
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parameter() {
            Some((name, value)) => write!(f, "{}({name}={value})", self.family()),
            None => f.write_str(self.family()),
        }
    }
}

/// Constants `(c₁, c₂, c₃)` of the moment conditions
/// `∫₀^γ v''r² ≤ c₁ ln(1 + c₂γ)` and `∫_γ^∞ v''r ≤ c₃/γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl MomentConstants {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Result<Self> {
        if !(c1 > 0.0 && c2 > 0.0 && c3 > 0.0) || !(c1.is_finite() && c2.is_finite() && c3.is_finite()) {
            return Err(Error::invalid(format!("moment constants must be positive, got ({c1}, {c2}, {c3})")));
        }
        Ok(Self { c1, c2, c3 })
    }

    /// `A₁ = c₁(ln 2 + 3) + c₃`, the constant of the pointwise logarithmic bound.
    pub fn a1(&self) -> f64 {
        self.c1 * (2f64.ln() + 3.0) + self.c3
    }
}

/// Both moments of `v''` at one cutoff `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentValues {
    pub gamma: f64,
    pub second_moment: f64,
    pub first_moment_tail: f64,
}

/// Outcome of checking the moment conditions on a grid of cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub potential: String,
    pub constants: MomentConstants,
    pub n_points: usize,
    pub passed: bool,
    /// Largest `(lhs − bound)/bound` over both inequalities; negative when
    /// every point holds with margin.
    pub max_relative_violation: f64,
    pub offending_gammas: Vec<f64>,
    /// Smallest `c₁` that passes on this grid for the given `c₂`.
    pub smallest_c1: f64,
    /// Smallest `c₃` that passes on this grid.
    pub smallest_c3: f64,
}

/// Roundoff allowance when comparing a moment against its bound.
const CERTIFY_SLACK: f64 = 1e-12;

impl Potential {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Potential::Contact => true,
            Potential::ApproxContact { sigma: a }
            | Potential::SoftCoulomb { epsilon: a }
            | Potential::ConvexSoftCoulomb { epsilon: a }
            | Potential::RegularizedCoulomb { beta: a } => a > 0.0 && a.is_finite(),
            Potential::Homogeneous { epsilon } => epsilon > 0.0 && epsilon < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("parameter out of range for {self}")))
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Potential::Contact => "contact",
            Potential::ApproxContact { .. } => "approx_contact",
            Potential::SoftCoulomb { .. } => "soft_coulomb",
            Potential::ConvexSoftCoulomb { .. } => "convex_soft_coulomb",
            Potential::RegularizedCoulomb { .. } => "regularized_coulomb",
            Potential::Homogeneous { .. } => "homogeneous",
        }
    }

    pub fn parameter(&self) -> Option<(&'static str, f64)> {
        match *self {
            Potential::Contact => None,
            Potential::ApproxContact { sigma } => Some(("sigma", sigma)),
            Potential::SoftCoulomb { epsilon }
            | Potential::ConvexSoftCoulomb { epsilon }
            | Potential::Homogeneous { epsilon } => Some(("epsilon", epsilon)),
            Potential::RegularizedCoulomb { beta } => Some(("beta", beta)),
        }
    }

    /// Length scale on which the potential varies.
    pub fn natural_scale(&self) -> f64 {
        match *self {
            Potential::Contact | Potential::Homogeneous { .. } => 1.0,
            Potential::ApproxContact { sigma } => sigma,
            Potential::SoftCoulomb { epsilon } | Potential::ConvexSoftCoulomb { epsilon } => epsilon,
            Potential::RegularizedCoulomb { beta } => beta,
        }
    }

    /// Convex on `[0, ∞)` with `v(∞) = 0`, as the constant-cutoff bound requires.
    pub fn is_convex_decaying(&self) -> bool {
        !matches!(self, Potential::Contact | Potential::SoftCoulomb { .. })
    }

    /// Point-wise value without the contact check; used inside integrals.
    pub(crate) fn kernel(&self, r: f64) -> f64 {
        match *self {
            Potential::Contact => f64::NAN,
            Potential::ApproxContact { sigma } => {
                if r < sigma {
                    2.0 / sigma * (1.0 - r / sigma)
                } else {
                    0.0
                }
            }
            Potential::SoftCoulomb { epsilon } => 1.0 / r.hypot(epsilon),
            Potential::ConvexSoftCoulomb { epsilon } => 1.0 / (r + epsilon / SQRT_2).hypot(epsilon),
            Potential::RegularizedCoulomb { beta } => PI.sqrt() / (2.0 * beta) * erfcx(r / (2.0 * beta)),
            Potential::Homogeneous { epsilon } => r.powf(epsilon - 1.0),
        }
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(self.kernel(r))
    }

    pub fn deriv1(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(match *self {
            Potential::Contact => unreachable!(),
            Potential::ApproxContact { sigma } => {
                if r < sigma {
                    -2.0 / (sigma * sigma)
                } else {
                    0.0
                }
            }
            Potential::SoftCoulomb { epsilon } => -r / (r * r + epsilon * epsilon).powf(1.5),
            Potential::ConvexSoftCoulomb { epsilon } => {
                let s = r + epsilon / SQRT_2;
                -s / (s * s + epsilon * epsilon).powf(1.5)
            }
            Potential::RegularizedCoulomb { beta } => {
                PI.sqrt() / (4.0 * beta * beta) * erfcx_deriv1(r / (2.0 * beta))
            }
            Potential::Homogeneous { epsilon } => (epsilon - 1.0) * r.powf(epsilon - 2.0),
        })
    }

    pub fn deriv2(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        Ok(match *self {
            Potential::Contact => unreachable!(),
            Potential::ApproxContact { .. } => return Err(Error::DistributionalDerivative("approx_contact")),
            Potential::SoftCoulomb { epsilon } => {
                let e2 = epsilon * epsilon;
                (2.0 * r * r - e2) / (r * r + e2).powf(2.5)
            }
            Potential::ConvexSoftCoulomb { epsilon } => {
                let s = r + epsilon / SQRT_2;
                let e2 = epsilon * epsilon;
                (2.0 * s * s - e2) / (s * s + e2).powf(2.5)
            }
            Potential::RegularizedCoulomb { beta } => {
                PI.sqrt() / (8.0 * beta.powi(3)) * erfcx_deriv2(r / (2.0 * beta))
            }
            Potential::Homogeneous { epsilon } => (epsilon - 1.0) * (epsilon - 2.0) * r.powf(epsilon - 3.0),
        })
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if matches!(self, Potential::Contact) {
            return Err(Error::ContactNotPointwise);
        }
        if !(r >= 0.0) {
            return Err(Error::invalid(format!("radius must be nonnegative, got {r}")));
        }
        if r == 0.0 && matches!(self, Potential::Homogeneous { .. }) {
            return Err(Error::invalid("homogeneous potential is singular at r = 0"));
        }
        Ok(())
    }

    /// `∫₀^γ v(r) dr`.
    pub fn integral_up_to(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(Error::invalid(format!("cutoff must be nonnegative, got {gamma}")));
        }
        if gamma.is_infinite() {
            return self.integral_value();
        }
        Ok(match *self {
            Potential::Contact => return Err(Error::ContactNotPointwise),
            Potential::ApproxContact { sigma } => {
                let g = gamma.min(sigma);
                2.0 * g / sigma - g * g / (sigma * sigma)
            }
            Potential::SoftCoulomb { epsilon } => (gamma / epsilon).asinh(),
            Potential::ConvexSoftCoulomb { epsilon } => {
                let shift = 1.0 / SQRT_2;
                (gamma / epsilon + shift).asinh() - shift.asinh()
            }
            Potential::RegularizedCoulomb { beta } => PI.sqrt() * erfcx_integral(gamma / (2.0 * beta))?,
            Potential::Homogeneous { epsilon } => gamma.powf(epsilon) / epsilon,
        })
    }

    /// `∫₀^∞ v(r) dr` for the families where it is finite.
    ///
    /// For `Contact` this is `1/2`: half of the unit mass of `δ(x − y)` lies
    /// on `x − y ≥ 0`.
    pub fn integral_value(&self) -> Result<f64> {
        match self {
            Potential::ApproxContact { .. } => Ok(1.0),
            Potential::Contact => Ok(0.5),
            other => Err(Error::DivergentIntegral(other.to_string())),
        }
    }

    /// `∫₀^γ v''(r) r² dr`, evaluated through
    /// `v'(γ)γ² − 2γ v(γ) + 2∫₀^γ v`.
    pub fn second_moment(&self, gamma: f64) -> Result<f64> {
        if matches!(self, Potential::Contact) {
            return Err(Error::ContactNotPointwise);
        }
        if !(gamma >= 0.0) {
            return Err(Error::invalid(format!("cutoff must be nonnegative, got {gamma}")));
        }
        if gamma == 0.0 {
            return Ok(0.0);
        }
        Ok(match *self {
            Potential::Contact => unreachable!(),
            // v'' = 2δ(r − σ)/σ²; the closed interval [0, γ] keeps the atom at γ = σ
            Potential::ApproxContact { sigma } => {
                if gamma >= sigma {
                    2.0
                } else {
                    0.0
                }
            }
            Potential::Homogeneous { epsilon } => {
                (epsilon - 1.0) * (epsilon - 2.0) / epsilon * gamma.powf(epsilon)
            }
            _ if gamma.is_infinite() => f64::INFINITY,
            // the integration-by-parts form cancels to O(γ³) below the scale
            _ if gamma < 0.5 * self.natural_scale() => {
                let mut failed = None;
                let m = LEGENDRE_RULE.integrate(0.0, gamma, |r| match self.deriv2(r) {
                    Ok(d) => d * r * r,
                    Err(e) => {
                        failed = Some(e);
                        0.0
                    }
                });
                if let Some(e) = failed {
                    return Err(e);
                }
                m
            }
            _ => {
                let v = self.kernel(gamma);
                let dv = self.deriv1(gamma)?;
                dv * gamma * gamma - 2.0 * gamma * v + 2.0 * self.integral_up_to(gamma)?
            }
        })
    }

    /// `∫_γ^∞ v''(r) r dr = −γ v'(γ) + v(γ)`.
    pub fn first_moment_tail(&self, gamma: f64) -> Result<f64> {
        if matches!(self, Potential::Contact) {
            return Err(Error::ContactNotPointwise);
        }
        if !(gamma >= 0.0) {
            return Err(Error::invalid(format!("cutoff must be nonnegative, got {gamma}")));
        }
        if gamma.is_infinite() {
            return Ok(0.0);
        }
        Ok(match *self {
            Potential::Contact => unreachable!(),
            Potential::ApproxContact { sigma } => {
                if gamma < sigma {
                    2.0 / sigma
                } else {
                    0.0
                }
            }
            Potential::Homogeneous { epsilon } => {
                if gamma == 0.0 {
                    f64::INFINITY
                } else {
                    (2.0 - epsilon) * gamma.powf(epsilon - 1.0)
                }
            }
            _ => -gamma * self.deriv1(gamma)? + self.kernel(gamma),
        })
    }

    pub fn moments(&self, gamma: f64) -> Result<MomentValues> {
        Ok(MomentValues {
            gamma,
            second_moment: self.second_moment(gamma)?,
            first_moment_tail: self.first_moment_tail(gamma)?,
        })
    }

    /// Moment constants for which the logarithmic bounds are proven:
    /// `(2, √2/ε, 2)` for the convex soft Coulomb potential and
    /// `(4, √π/(4β), 4)` for the regularized one.
    pub fn proven_constants(&self) -> Option<MomentConstants> {
        match *self {
            Potential::ConvexSoftCoulomb { epsilon } => Some(MomentConstants {
                c1: 2.0,
                c2: SQRT_2 / epsilon,
                c3: 2.0,
            }),
            Potential::RegularizedCoulomb { beta } => Some(MomentConstants {
                c1: 4.0,
                c2: PI.sqrt() / (4.0 * beta),
                c3: 4.0,
            }),
            _ => None,
        }
    }

    /// `200` log-spaced cutoffs over `[10⁻⁴, 10⁴]` times the natural scale.
    pub fn default_gamma_grid(&self) -> Vec<f64> {
        let l = self.natural_scale();
        numerics::log_space(1e-4 * l, 1e4 * l, 200)
    }

    /// Evaluates both moment conditions on every grid point.
    pub fn assess_moment_conditions(
        &self,
        constants: &MomentConstants,
        gamma_grid: &[f64],
    ) -> Result<CertificationReport> {
        let mut max_violation = f64::NEG_INFINITY;
        let mut offending = Vec::new();
        let mut smallest_c1: f64 = 0.0;
        let mut smallest_c3: f64 = 0.0;
        for &gamma in gamma_grid {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::invalid(format!("certification grid needs finite positive cutoffs, got {gamma}")));
            }
            let m = self.moments(gamma)?;
            let log_term = (constants.c2 * gamma).ln_1p();
            let bound2 = constants.c1 * log_term;
            let bound1 = constants.c3 / gamma;
            let v2 = (m.second_moment - bound2) / bound2;
            let v1 = (m.first_moment_tail - bound1) / bound1;
            let worst = v1.max(v2);
            if worst.is_nan() {
                return Err(Error::invalid(format!("moment evaluation produced NaN at gamma = {gamma}")));
            }
            max_violation = max_violation.max(worst);
            if worst > CERTIFY_SLACK {
                offending.push(gamma);
            }
            smallest_c1 = smallest_c1.max(m.second_moment / log_term);
            smallest_c3 = smallest_c3.max(m.first_moment_tail * gamma);
        }
        Ok(CertificationReport {
            potential: self.to_string(),
            constants: *constants,
            n_points: gamma_grid.len(),
            passed: offending.is_empty(),
            max_relative_violation: max_violation,
            offending_gammas: offending,
            smallest_c1,
            smallest_c3,
        })
    }

    /// Like [`Potential::assess_moment_conditions`] but fails when any grid point
    /// violates the conditions.
    pub fn certify_moment_conditions(
        &self,
        constants: &MomentConstants,
        gamma_grid: &[f64],
    ) -> Result<CertificationReport> {
        let report = self.assess_moment_conditions(constants, gamma_grid)?;
        if report.passed {
            Ok(report)
        } else {
            Err(Error::CertificationFailed {
                potential: report.potential,
                offending: report.offending_gammas.len(),
                gammas: report.offending_gammas,
                max_violation: report.max_relative_violation,
            })
        }
    }
}

/// `∫₀^X erfcx(s) ds`; the part beyond `s = 1` is integrated in `ln s`.
fn erfcx_integral(x: f64) -> Result<f64> {
    let spec = QuadratureSpec::tight();
    if x <= 1.0 {
        return Ok(numerics::integrate_1d(erfcx, Interval::finite(0.0, x), &spec)?.value);
    }
    let head = numerics::integrate_1d(erfcx, Interval::finite(0.0, 1.0), &spec)?.value;
    let tail = numerics::integrate_1d(
        |t: f64| {
            let s = t.exp();
            erfcx(s) * s
        },
        Interval::finite(0.0, x.ln()),
        &spec,
    )?
    .value;
    Ok(head + tail)
}
