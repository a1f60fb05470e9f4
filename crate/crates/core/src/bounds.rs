//! Lower bounds on `I_xc` and the harness that checks `I_xc ≥ RHS`.

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energies::{self, EnergyBreakdown};
use crate::numerics;
use crate::potentials::{MomentConstants, Potential};
use crate::states::{self, DensityProfile, TrialState};
use crate::{Error, Result};

/// Relative slack tolerance used unless the caller overrides it.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-6;
/// `K₁ = 3/2 − 0.577` of the reference soft-Coulomb bound.
pub const RASANEN_K1: f64 = 1.5 - 0.577;
/// `K₂ = 2/π` of the reference soft-Coulomb bound.
pub const RASANEN_K2: f64 = 2.0 / PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoTermVariant {
    /// Printed coefficients `(1/ε + ε − 3, 1 − ε/2)`.
    Stated,
    /// The constant-cutoff bound at `γ = 1` with directly computed moments.
    Direct,
}

/// Which bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum BoundId {
    /// `−½∫ρ²`, contact interaction.
    ContactDirect,
    /// `−(∫₀^∞ v)·∫ρ²`.
    DirectCs,
    /// Sixteen times [`BoundId::DirectCs`].
    MaximalDirect,
    /// `−½∫ρ²·∫₀^γ v''r² − ½N∫_γ^∞ v''r` for a constant cutoff `γ ≥ 0`.
    MomentCutoff { gamma: f64 },
    /// Logarithmic bound `−8∫ρ²[A₁ + c₁ln(1 + c₂e⁻³/ρ)]`.
    LogDensity,
    /// `−½∫ρ²[Nc₃/α + c₁ln(1 + αc₂/∫ρ²)]`.
    LogSquare { alpha: f64 },
    /// Reference soft-Coulomb bound `−∫ρ²(K₁ + ln(K₂/(ερ)))`; not proven.
    Rasanen { k1: f64, k2: f64 },
    /// `−2^(2−ε)(2−ε)²/(ε(1−ε))·∫ρ^(2−ε)` for `r^(ε−1)`.
    Lundholm,
    /// Two-term bound for `r^(ε−1)`.
    HomogeneousTwoTerm { variant: TwoTermVariant },
    /// `−(c₁c₂c₃/2c)∫ρ² − cN/2`.
    LiftedLo { c: f64 },
    /// `−∫ρ²` for the approximate contact interaction.
    ApproxContactDirect,
}

impl BoundId {
    pub fn name(&self) -> &'static str {
        match self {
            BoundId::ContactDirect => "contact_direct",
            BoundId::DirectCs => "direct_cs",
            BoundId::MaximalDirect => "maximal_direct",
            BoundId::MomentCutoff { .. } => "moment_cutoff",
            BoundId::LogDensity => "log_density",
            BoundId::LogSquare { .. } => "log_square",
            BoundId::Rasanen { .. } => "rasanen",
            BoundId::Lundholm => "lundholm",
            BoundId::HomogeneousTwoTerm { variant: TwoTermVariant::Stated } => "homogeneous_two_term_stated",
            BoundId::HomogeneousTwoTerm { variant: TwoTermVariant::Direct } => "homogeneous_two_term",
            BoundId::LiftedLo { .. } => "lifted_lo",
            BoundId::ApproxContactDirect => "approx_contact_direct",
        }
    }

    /// Parameter string such as `gamma=0.5`; empty when there is none.
    pub fn params(&self) -> String {
        match *self {
            BoundId::MomentCutoff { gamma } => format!("gamma={gamma}"),
            BoundId::LogSquare { alpha } => format!("alpha={alpha}"),
            BoundId::Rasanen { k1, k2 } => format!("k1={k1};k2={k2}"),
            BoundId::LiftedLo { c } => format!("c={c}"),
            _ => String::new(),
        }
    }

    /// Whether the bound is proven (as opposed to a reference form).
    pub fn is_proven(&self) -> bool {
        !matches!(
            self,
            BoundId::Rasanen { .. } | BoundId::HomogeneousTwoTerm { variant: TwoTermVariant::Stated }
        )
    }

    fn needs_constants(&self) -> bool {
        matches!(self, BoundId::LogDensity | BoundId::LogSquare { .. } | BoundId::LiftedLo { .. })
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            f.write_str(self.name())
        } else {
            write!(f, "{}({params})", self.name())
        }
    }
}

/// A bound paired with the potential it is evaluated for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoundSpecEntry", into = "BoundSpecEntry")]
pub struct BoundSpec {
    id: BoundId,
    potential: Potential,
    constants: Option<MomentConstants>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundSpecEntry {
    #[serde(flatten)]
    pub id: BoundId,
    pub potential: Potential,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<MomentConstants>,
}

impl TryFrom<BoundSpecEntry> for BoundSpec {
    type Error = Error;
    fn try_from(e: BoundSpecEntry) -> Result<Self> {
        match e.constants {
            Some(c) => BoundSpec::with_constants(e.id, e.potential, c),
            None => BoundSpec::new(e.id, e.potential),
        }
    }
}

impl From<BoundSpec> for BoundSpecEntry {
    fn from(s: BoundSpec) -> Self {
        BoundSpecEntry {
            id: s.id,
            potential: s.potential,
            constants: s.constants,
        }
    }
}

impl BoundSpec {
    /// Checks that `id` applies to `potential`; moment constants default to
    /// the proven ones.
    pub fn new(id: BoundId, potential: Potential) -> Result<Self> {
        let constants = if id.needs_constants() { potential.proven_constants() } else { None };
        Self::build(id, potential, constants)
    }

    pub fn with_constants(id: BoundId, potential: Potential, constants: MomentConstants) -> Result<Self> {
        Self::build(id, potential, Some(constants))
    }

    fn build(id: BoundId, potential: Potential, constants: Option<MomentConstants>) -> Result<Self> {
        use Potential as P;
        let compatible = match id {
            BoundId::ContactDirect => matches!(potential, P::Contact),
            BoundId::DirectCs | BoundId::MaximalDirect => matches!(potential, P::Contact | P::ApproxContact { .. }),
            BoundId::MomentCutoff { gamma } => potential.is_convex_decaying() && gamma >= 0.0,
            BoundId::LogDensity => matches!(potential, P::ConvexSoftCoulomb { .. } | P::RegularizedCoulomb { .. }),
            BoundId::LogSquare { alpha } => {
                alpha > 0.0 && matches!(potential, P::ConvexSoftCoulomb { .. } | P::RegularizedCoulomb { .. })
            }
            BoundId::LiftedLo { c } => {
                c > 0.0 && matches!(potential, P::ConvexSoftCoulomb { .. } | P::RegularizedCoulomb { .. })
            }
            BoundId::Rasanen { k2, .. } => {
                k2 > 0.0 && matches!(potential, P::SoftCoulomb { .. } | P::ConvexSoftCoulomb { .. })
            }
            BoundId::Lundholm | BoundId::HomogeneousTwoTerm { .. } => matches!(potential, P::Homogeneous { .. }),
            BoundId::ApproxContactDirect => matches!(potential, P::ApproxContact { .. }),
        };
        if !compatible || (id.needs_constants() && constants.is_none()) {
            return Err(Error::IncompatibleSpec {
                bound: id.to_string(),
                potential: potential.to_string(),
            });
        }
        Ok(Self { id, potential, constants })
    }

    pub fn id(&self) -> BoundId {
        self.id
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn constants(&self) -> Option<MomentConstants> {
        self.constants
    }

    /// Right-hand side for a density with `N = d.n_particles()`.
    pub fn rhs(&self, d: &DensityProfile) -> Result<f64> {
        let n = d.n_particles();
        let p = &self.potential;
        let consts = || self.constants.expect("checked at construction");
        match self.id {
            BoundId::ContactDirect => rhs_contact_direct(d),
            BoundId::DirectCs => rhs_direct_cs(d, p),
            BoundId::MaximalDirect => rhs_maximal_direct(d, p),
            BoundId::MomentCutoff { gamma } => rhs_moment_cutoff(d, p, gamma),
            BoundId::LogDensity => rhs_log_density(d, &consts()),
            BoundId::LogSquare { alpha } => rhs_log_square(d, &consts(), alpha, n),
            BoundId::LiftedLo { c } => rhs_lifted_lo(d, &consts(), c, n),
            BoundId::Rasanen { k1, k2 } => rhs_rasanen(d, softening(p), k1, k2),
            BoundId::Lundholm => rhs_lundholm(d, homogeneous_exponent(p)),
            BoundId::HomogeneousTwoTerm { variant } => rhs_two_term(d, homogeneous_exponent(p), variant),
            BoundId::ApproxContactDirect => rhs_approx_contact_direct(d),
        }
    }
}

fn softening(p: &Potential) -> f64 {
    match *p {
        Potential::SoftCoulomb { epsilon } | Potential::ConvexSoftCoulomb { epsilon } => epsilon,
        _ => unreachable!("checked at construction"),
    }
}

fn homogeneous_exponent(p: &Potential) -> f64 {
    match *p {
        Potential::Homogeneous { epsilon } => epsilon,
        _ => unreachable!("checked at construction"),
    }
}

fn square_integral(d: &DensityProfile) -> Result<f64> {
    d.power_integral(2.0)
}

pub fn rhs_contact_direct(d: &DensityProfile) -> Result<f64> {
    Ok(-0.5 * square_integral(d)?)
}

pub fn rhs_direct_cs(d: &DensityProfile, p: &Potential) -> Result<f64> {
    Ok(-p.integral_value()? * square_integral(d)?)
}

pub fn rhs_maximal_direct(d: &DensityProfile, p: &Potential) -> Result<f64> {
    Ok(16.0 * rhs_direct_cs(d, p)?)
}

pub fn rhs_approx_contact_direct(d: &DensityProfile) -> Result<f64> {
    Ok(-square_integral(d)?)
}

/// Constant-cutoff bound; `γ = ∞` is allowed.
pub fn rhs_moment_cutoff(d: &DensityProfile, p: &Potential, gamma: f64) -> Result<f64> {
    let sq = square_integral(d)?;
    let n = d.n_particles();
    let m2 = p.second_moment(gamma)?;
    let tail = p.first_moment_tail(gamma)?;
    Ok(-0.5 * product_or_zero(sq, m2) - 0.5 * product_or_zero(n, tail))
}

/// `a·b` with `0·∞ = 0`.
fn product_or_zero(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

pub fn rhs_log_density(d: &DensityProfile, c: &MomentConstants) -> Result<f64> {
    let a1 = c.a1();
    let shift = c.c2 * (-3.0f64).exp();
    Ok(-8.0 * d.integral_of(|r| r * r * (a1 + c.c1 * (shift / r).ln_1p())))
}

pub fn rhs_log_square(d: &DensityProfile, c: &MomentConstants, alpha: f64, n_particles: f64) -> Result<f64> {
    let sq = square_integral(d)?;
    if sq == 0.0 {
        return Ok(0.0);
    }
    Ok(-0.5 * sq * (n_particles * c.c3 / alpha + c.c1 * (alpha * c.c2 / sq).ln_1p()))
}

pub fn rhs_lifted_lo(d: &DensityProfile, c: &MomentConstants, shift: f64, n_particles: f64) -> Result<f64> {
    let sq = square_integral(d)?;
    Ok(-(c.c1 * c.c2 * c.c3 / (2.0 * shift)) * sq - 0.5 * shift * n_particles)
}

/// Pointwise integrand of the reference soft-Coulomb bound, `ρ²(K₁ + ln(K₂/(ερ)))`.
pub fn rasanen_integrand(rho: f64, epsilon: f64, k1: f64, k2: f64) -> f64 {
    if rho == 0.0 {
        0.0
    } else {
        rho * rho * (k1 + (k2 / (epsilon * rho)).ln())
    }
}

pub fn rhs_rasanen(d: &DensityProfile, epsilon: f64, k1: f64, k2: f64) -> Result<f64> {
    Ok(-d.integral_of(|r| rasanen_integrand(r, epsilon, k1, k2)))
}

/// `2^(2−ε)(2−ε)²/(ε(1−ε))`.
pub fn lundholm_coefficient(epsilon: f64) -> f64 {
    2f64.powf(2.0 - epsilon) * (2.0 - epsilon).powi(2) / (epsilon * (1.0 - epsilon))
}

pub fn rhs_lundholm(d: &DensityProfile, epsilon: f64) -> Result<f64> {
    Ok(-lundholm_coefficient(epsilon) * d.power_integral(2.0 - epsilon)?)
}

/// Per-unit coefficients `(a, b)` of `−a∫ρ² − bN` for the two-term
/// homogeneous bound.
pub fn two_term_coefficients(epsilon: f64, variant: TwoTermVariant) -> (f64, f64) {
    match variant {
        TwoTermVariant::Stated => (1.0 / epsilon + epsilon - 3.0, 1.0 - 0.5 * epsilon),
        TwoTermVariant::Direct => {
            let m = (epsilon - 1.0) * (epsilon - 2.0) / epsilon;
            (0.5 * m, 0.5 * (2.0 - epsilon))
        }
    }
}

pub fn rhs_two_term(d: &DensityProfile, epsilon: f64, variant: TwoTermVariant) -> Result<f64> {
    match variant {
        TwoTermVariant::Direct => rhs_moment_cutoff(d, &Potential::Homogeneous { epsilon }, 1.0),
        TwoTermVariant::Stated => {
            let (a, b) = two_term_coefficients(epsilon, variant);
            Ok(-a * square_integral(d)? - b * d.n_particles())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Holds,
    ViolatedBeyondTolerance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub state_id: String,
    pub bound_id: String,
    pub params: String,
    pub potential: String,
    pub proven: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub status: Status,
}

/// `I_xc ≥ RHS` up to `relative_tolerance·max(|LHS|, |RHS|, N)`.
pub fn assess(
    state_id: &str,
    energy: &EnergyBreakdown,
    d: &DensityProfile,
    spec: &BoundSpec,
    relative_tolerance: f64,
) -> Result<BoundReport> {
    let lhs = energy.i_xc;
    let rhs = spec.rhs(d)?;
    let slack = lhs - rhs;
    let scale = [lhs.abs(), rhs.abs(), d.n_particles()]
        .into_iter()
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max);
    let tolerance = relative_tolerance * scale;
    let status = if slack >= -tolerance {
        Status::Holds
    } else {
        Status::ViolatedBeyondTolerance
    };
    Ok(BoundReport {
        state_id: state_id.to_string(),
        bound_id: spec.id.name().to_string(),
        params: spec.id.params(),
        potential: spec.potential.to_string(),
        proven: spec.id.is_proven(),
        lhs,
        rhs,
        slack,
        tolerance,
        status,
    })
}

/// Evaluates one (state, bound) pair from scratch.
pub fn verify(state_id: &str, s: &TrialState, spec: &BoundSpec) -> Result<BoundReport> {
    let d = s.density_profile()?;
    let e = energies::i_xc(s, &spec.potential)?;
    assess(state_id, &e, &d, spec, DEFAULT_RELATIVE_TOLERANCE)
}

/// One state and the bounds to check on it.
#[derive(Debug, Clone)]
pub struct VerifyCase {
    pub state_id: String,
    pub state: TrialState,
    pub specs: Vec<BoundSpec>,
}

/// Runs every case concurrently; each distinct potential's energy is computed
/// once per state. Output order follows the input order.
pub fn verify_batch(cases: &[VerifyCase], relative_tolerance: f64) -> Result<Vec<BoundReport>> {
    let per_case: Vec<Result<Vec<BoundReport>>> = cases
        .par_iter()
        .map(|case| {
            let d = case.state.density_profile()?;
            let mut cache: Vec<(Potential, EnergyBreakdown)> = Vec::new();
            let mut out = Vec::with_capacity(case.specs.len());
            for spec in &case.specs {
                let energy = match cache.iter().find(|(p, _)| p == spec.potential()) {
                    Some((_, e)) => *e,
                    None => {
                        let e = energies::i_xc(&case.state, spec.potential())?;
                        cache.push((*spec.potential(), e));
                        e
                    }
                };
                out.push(assess(&case.state_id, &energy, &d, spec, relative_tolerance)?);
            }
            Ok(out)
        })
        .collect();
    let mut reports = Vec::new();
    for r in per_case {
        reports.extend(r?);
    }
    Ok(reports)
}

/// Cutoffs `0`, 18 log-spaced values over `[10⁻³, 10³]·scale`, and `∞`.
pub fn cutoff_grid(scale: f64) -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(numerics::log_space(1e-3 * scale, 1e3 * scale, 18));
    g.push(f64::INFINITY);
    g
}

/// Every proven bound applicable to `p`, with `n` the particle number for
/// the `α = N` member of the logarithmic family.
pub fn proven_specs_for(p: &Potential, n: usize) -> Result<Vec<BoundSpec>> {
    let mut ids = Vec::new();
    match p {
        Potential::Contact => {
            ids.push(BoundId::ContactDirect);
            ids.push(BoundId::DirectCs);
            ids.push(BoundId::MaximalDirect);
        }
        Potential::ApproxContact { .. } => {
            ids.push(BoundId::ApproxContactDirect);
            ids.push(BoundId::DirectCs);
            ids.push(BoundId::MaximalDirect);
        }
        Potential::ConvexSoftCoulomb { .. } | Potential::RegularizedCoulomb { .. } => {
            ids.push(BoundId::LogDensity);
            for alpha in [0.1, 1.0, 10.0, n as f64] {
                ids.push(BoundId::LogSquare { alpha });
            }
            for c in [p.kernel(0.0), 1.0] {
                ids.push(BoundId::LiftedLo { c });
            }
        }
        Potential::Homogeneous { .. } => {
            ids.push(BoundId::Lundholm);
            ids.push(BoundId::HomogeneousTwoTerm { variant: TwoTermVariant::Direct });
        }
        Potential::SoftCoulomb { .. } => {}
    }
    if p.is_convex_decaying() {
        for gamma in cutoff_grid(p.natural_scale()) {
            ids.push(BoundId::MomentCutoff { gamma });
        }
    }
    ids.into_iter().map(|id| BoundSpec::new(id, *p)).collect()
}

/// Reference (unproven) bounds reported alongside the proven ones.
pub fn reference_specs_for(p: &Potential) -> Result<Vec<BoundSpec>> {
    match p {
        // the reference form is stated for the unshifted soft Coulomb potential
        Potential::ConvexSoftCoulomb { epsilon } | Potential::SoftCoulomb { epsilon } => Ok(vec![BoundSpec::new(
            BoundId::Rasanen {
                k1: RASANEN_K1,
                k2: RASANEN_K2,
            },
            Potential::SoftCoulomb { epsilon: *epsilon },
        )?]),
        Potential::Homogeneous { .. } => Ok(vec![BoundSpec::new(
            BoundId::HomogeneousTwoTerm {
                variant: TwoTermVariant::Stated,
            },
            *p,
        )?]),
        _ => Ok(Vec::new()),
    }
}

/// Potentials attached to one randomized suite member: contact, an
/// approximate contact, both Coulomb-like regularizations and three
/// homogeneous exponents, with log-uniform length parameters.
pub fn random_potentials<R: Rng>(rng: &mut R, width: f64) -> Vec<Potential> {
    vec![
        Potential::Contact,
        Potential::ApproxContact {
            sigma: numerics::log_uniform(rng, 0.05, 5.0) * width,
        },
        Potential::ConvexSoftCoulomb {
            epsilon: numerics::log_uniform(rng, 0.05, 10.0) * width,
        },
        Potential::RegularizedCoulomb {
            beta: numerics::log_uniform(rng, 0.05, 10.0) * width,
        },
        Potential::Homogeneous { epsilon: 0.1 },
        Potential::Homogeneous { epsilon: 0.5 },
        Potential::Homogeneous { epsilon: 0.9 },
    ]
}

/// Randomized soundness suite: `count` states, each paired with its own
/// random potentials and every proven bound (plus reference bounds when
/// `with_reference` is set).
pub fn soundness_suite(count: usize, seed: u64, with_reference: bool) -> Result<Vec<VerifyCase>> {
    let state_list = states::random_suite(count, seed)?;
    let mut rng = numerics::stream(seed, 1);
    state_list
        .into_iter()
        .enumerate()
        .map(|(i, state)| {
            let (_, _, width) = state.extent();
            let mut specs = Vec::new();
            for p in random_potentials(&mut rng, width) {
                specs.extend(proven_specs_for(&p, state.n_particles())?);
                if with_reference {
                    specs.extend(reference_specs_for(&p)?);
                }
            }
            Ok(VerifyCase {
                state_id: format!("s{i:04}"),
                state,
                specs,
            })
        })
        .collect()
}

/// A coefficient or constant whose printed value disagrees with the one
/// recomputed here, together with what was checked about each alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub id: String,
    pub potential: String,
    pub quantity: String,
    pub stated: f64,
    pub computed: f64,
    /// Independent recomputation of `computed` by quadrature, where one exists.
    pub computed_by_quadrature: Option<f64>,
    pub stated_certified: bool,
    pub computed_certified: bool,
    pub note: String,
}

/// The two-term homogeneous coefficient and the `c₂` alternatives for the
/// convex soft Coulomb potential.
pub fn discrepancies() -> Result<Vec<Discrepancy>> {
    let mut out = Vec::new();
    for epsilon in [0.1, 0.5, 0.9] {
        let p = Potential::Homogeneous { epsilon };
        let (stated, _) = two_term_coefficients(epsilon, TwoTermVariant::Stated);
        let (computed, _) = two_term_coefficients(epsilon, TwoTermVariant::Direct);
        // ½∫₀¹ v''r² dr with r = s^(1/ε) to remove the endpoint singularity
        let spec = numerics::QuadratureSpec::with_tolerances(1e-14, 1e-12);
        let moment = numerics::integrate_1d(
            |s: f64| {
                if s == 0.0 {
                    return (epsilon - 1.0) * (epsilon - 2.0) / epsilon;
                }
                let r = s.powf(1.0 / epsilon);
                p.deriv2(r).unwrap_or(f64::NAN) * r * r * r / (epsilon * s)
            },
            numerics::Interval::finite(0.0, 1.0),
            &spec,
        )?;
        out.push(Discrepancy {
            id: "homogeneous_two_term_coefficient".into(),
            potential: p.to_string(),
            quantity: "coefficient of int rho^2".into(),
            stated,
            computed,
            computed_by_quadrature: Some(0.5 * moment.value),
            // a smaller coefficient is a stronger claim, not implied by the computed one
            stated_certified: stated >= computed,
            computed_certified: (0.5 * p.second_moment(1.0)? - computed).abs() <= 1e-12 * computed.abs(),
            note: "stated 1/eps+eps-3, recomputed 1/eps+(eps-3)/2 from the gamma=1 moments".into(),
        });
    }
    for epsilon in [0.1, 1.0, 10.0] {
        let p = Potential::ConvexSoftCoulomb { epsilon };
        let grid = p.default_gamma_grid();
        let with = |c2: f64| -> Result<bool> {
            Ok(p.assess_moment_conditions(&MomentConstants::new(2.0, c2, 2.0)?, &grid)?.passed)
        };
        let (stated, alternate) = (std::f64::consts::SQRT_2 / epsilon, 2.0 / epsilon);
        out.push(Discrepancy {
            id: "convex_soft_coulomb_c2".into(),
            potential: p.to_string(),
            quantity: "c2".into(),
            stated,
            computed: alternate,
            computed_by_quadrature: None,
            stated_certified: with(stated)?,
            computed_certified: with(alternate)?,
            note: "both sqrt(2)/eps and 2/eps appear; sqrt(2)/eps is used for the bounds".into(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{Grid, Symmetry};
    use approx::assert_relative_eq;

    fn uniform_two() -> DensityProfile {
        let grid = Grid::spanning(0.0, 1.0, 101).unwrap();
        DensityProfile::new(grid, vec![2.0; 101], 2.0).unwrap()
    }

    fn zero() -> DensityProfile {
        DensityProfile::zeros(Grid::spanning(0.0, 1.0, 11).unwrap())
    }

    #[test]
    fn contact_direct_examples() {
        assert_relative_eq!(rhs_contact_direct(&uniform_two()).unwrap(), -2.0, max_relative = 1e-14);
        assert_eq!(rhs_contact_direct(&zero()).unwrap(), 0.0);
        let s = TrialState::gaussian_pair(0.0, 1.0, Symmetry::Symmetric).unwrap();
        let d = s.density_profile().unwrap();
        assert_relative_eq!(rhs_contact_direct(&d).unwrap(), -1.0 / PI.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn direct_cs_and_hs_ratio() {
        let p = Potential::ApproxContact { sigma: 0.2 };
        let d = uniform_two();
        assert_relative_eq!(rhs_direct_cs(&d, &p).unwrap(), -4.0, max_relative = 1e-14);
        assert_eq!(rhs_maximal_direct(&d, &p).unwrap(), 16.0 * rhs_direct_cs(&d, &p).unwrap());
        assert!(matches!(
            rhs_direct_cs(&d, &Potential::ConvexSoftCoulomb { epsilon: 1.0 }),
            Err(Error::DivergentIntegral(_))
        ));
    }

    #[test]
    fn moment_cutoff_examples() {
        let d = uniform_two();
        let sigma = 0.4;
        let p = Potential::ApproxContact { sigma };
        assert_relative_eq!(rhs_moment_cutoff(&d, &p, 0.0).unwrap(), -0.5 * 2.0 * 2.0 / sigma, max_relative = 1e-14);
        assert_relative_eq!(rhs_moment_cutoff(&d, &p, f64::INFINITY).unwrap(), -4.0, max_relative = 1e-14);
        let h = Potential::Homogeneous { epsilon: 0.5 };
        assert_relative_eq!(rhs_moment_cutoff(&d, &h, 1.0).unwrap(), -4.5, max_relative = 1e-14);
    }

    #[test]
    fn logarithmic_bound_constants() {
        let csc = Potential::ConvexSoftCoulomb { epsilon: 1.0 }.proven_constants().unwrap();
        assert_relative_eq!(csc.a1(), 2.0 * (2f64.ln() + 4.0), max_relative = 1e-15);
        let reg = Potential::RegularizedCoulomb { beta: 1.0 }.proven_constants().unwrap();
        assert_relative_eq!(reg.a1(), 4.0 * (2f64.ln() + 4.0), max_relative = 1e-15);
        assert_eq!(rhs_log_density(&zero(), &csc).unwrap(), 0.0);
    }

    #[test]
    fn log_square_formula_and_lifted_form() {
        // profile with ∫ρ² = 1 and N = 2: ρ = 1 on [0, 1] carries N = 1, so rescale
        let grid = Grid::spanning(0.0, 4.0, 401).unwrap();
        let d = DensityProfile::new(grid, vec![0.5; 401], 2.0).unwrap();
        assert_relative_eq!(d.power_integral(2.0).unwrap(), 1.0, max_relative = 1e-14);
        let c = Potential::ConvexSoftCoulomb { epsilon: 1.0 }.proven_constants().unwrap();
        let want = -0.5 * (4.0 + 2.0 * (1.0 + 2f64.sqrt()).ln());
        assert_relative_eq!(rhs_log_square(&d, &c, 1.0, 2.0).unwrap(), want, max_relative = 1e-14);
        assert_relative_eq!(want, -2.8814, max_relative = 1e-4);
        // α = cN/(c₁c₂) with ln(1+x) ≤ x turns the logarithmic form into the lifted one
        let shift = 0.7;
        let alpha = shift * 2.0 / (c.c1 * c.c2);
        let lifted = rhs_lifted_lo(&d, &c, shift, 2.0).unwrap();
        assert!(rhs_log_square(&d, &c, alpha, 2.0).unwrap() >= lifted);
        let linear = -0.5 * (2.0 * c.c3 / alpha + c.c1 * alpha * c.c2);
        assert_relative_eq!(linear, lifted, max_relative = 1e-14);
    }

    #[test]
    fn rasanen_defaults_and_zero() {
        assert_relative_eq!(RASANEN_K1, 0.923, max_relative = 1e-14);
        let eps = 0.5;
        let rho0 = RASANEN_K2 * RASANEN_K1.exp() / eps;
        assert!(rasanen_integrand(rho0, eps, RASANEN_K1, RASANEN_K2).abs() < 1e-13 * rho0 * rho0);
        assert_eq!(rhs_rasanen(&zero(), eps, RASANEN_K1, RASANEN_K2).unwrap(), 0.0);
    }

    #[test]
    fn lundholm_coefficient_values() {
        assert_relative_eq!(lundholm_coefficient(0.5), 9.0 * 2f64.powf(1.5), max_relative = 1e-14);
        assert!(lundholm_coefficient(1e-9) > 1e9);
        assert_eq!(rhs_lundholm(&zero(), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn two_term_variants_differ() {
        let (a, b) = two_term_coefficients(0.5, TwoTermVariant::Stated);
        assert_relative_eq!(a, -0.5, max_relative = 1e-15);
        assert_relative_eq!(b, 0.75, max_relative = 1e-15);
        let (a, b) = two_term_coefficients(0.5, TwoTermVariant::Direct);
        assert_relative_eq!(a, 0.75, max_relative = 1e-15);
        assert_relative_eq!(b, 0.75, max_relative = 1e-15);
        let d = uniform_two();
        let via_cutoff = rhs_moment_cutoff(&d, &Potential::Homogeneous { epsilon: 0.5 }, 1.0).unwrap();
        assert_relative_eq!(rhs_two_term(&d, 0.5, TwoTermVariant::Direct).unwrap(), via_cutoff);
    }

    #[test]
    fn compatibility_is_enforced() {
        assert!(BoundSpec::new(BoundId::LogDensity, Potential::Homogeneous { epsilon: 0.5 }).is_err());
        assert!(BoundSpec::new(BoundId::Lundholm, Potential::Contact).is_err());
        assert!(BoundSpec::new(BoundId::MomentCutoff { gamma: 1.0 }, Potential::SoftCoulomb { epsilon: 1.0 }).is_err());
        assert!(BoundSpec::new(BoundId::LogDensity, Potential::RegularizedCoulomb { beta: 1.0 }).is_ok());
    }

    #[test]
    fn verify_examples() {
        let sym = TrialState::gaussian_pair(0.0, 1.0, Symmetry::Symmetric).unwrap();
        let spec = BoundSpec::new(BoundId::ContactDirect, Potential::Contact).unwrap();
        let r = verify("a", &sym, &spec).unwrap();
        assert_relative_eq!(r.slack, 1.0 / (2.0 * PI.sqrt()), max_relative = 1e-9);
        assert_eq!(r.status, Status::Holds);
        let anti = TrialState::gaussian_pair(1.0, 1.0, Symmetry::Antisymmetric).unwrap();
        let r = verify("b", &anti, &spec).unwrap();
        assert!(r.slack.abs() < 1e-10);
        assert_eq!(r.status, Status::Holds);
    }

    #[test]
    fn regularized_log_density_on_random_pairs() {
        let spec = BoundSpec::new(BoundId::LogDensity, Potential::RegularizedCoulomb { beta: 1.0 }).unwrap();
        let mut rng = numerics::stream(3, 0);
        let cases: Vec<VerifyCase> = (0..50)
            .map(|i| {
                let sym = if i % 2 == 0 { Symmetry::Symmetric } else { Symmetry::Antisymmetric };
                let sep = numerics::log_uniform(&mut rng, 0.3, 6.0);
                let w = numerics::log_uniform(&mut rng, 0.2, 3.0);
                VerifyCase {
                    state_id: format!("p{i}"),
                    state: TrialState::gaussian_pair(sep, w, sym).unwrap(),
                    specs: vec![spec],
                }
            })
            .collect();
        let reports = verify_batch(&cases, DEFAULT_RELATIVE_TOLERANCE).unwrap();
        assert!(reports.iter().all(|r| r.status == Status::Holds));
    }

    #[test]
    fn spec_entry_round_trip() {
        let spec = BoundSpec::new(BoundId::MomentCutoff { gamma: 0.5 }, Potential::ApproxContact { sigma: 1.0 }).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"id":"moment_cutoff","gamma":0.5,"potential":{"family":"approx_contact","params":{"sigma":1.0}}}"#);
        let back: BoundSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn discrepancy_records() {
        let d = discrepancies().unwrap();
        let half = d.iter().find(|r| r.potential == "homogeneous(epsilon=0.5)").unwrap();
        assert_relative_eq!(half.stated, -0.5, max_relative = 1e-15);
        assert_relative_eq!(half.computed, 0.75, max_relative = 1e-15);
        assert_relative_eq!(half.computed_by_quadrature.unwrap(), 0.75, max_relative = 1e-10);
        assert!(half.computed_certified && !half.stated_certified);
        for r in d.iter().filter(|r| r.quantity == "c2") {
            assert!(r.stated_certified && r.computed_certified, "{r:?}");
        }
    }
}
