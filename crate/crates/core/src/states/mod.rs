//! Few-particle trial wavefunctions (`N ∈ {2, 3}`), their one-body densities,
//! pair-separation distributions and density autocorrelations.
//!
//! Every family has a density and a pair distribution that are finite sums
//! of Gaussians times polynomials, so all of them are evaluated in closed
//! form.

mod gausspoly;
mod maximal;
mod profile;

use std::f64::consts::PI;

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numerics::{self, integrate_1d, Interval, QuadratureSpec};
use crate::{Error, Result};
use gausspoly::{orbital, GaussPoly};

pub use maximal::{lp_maximal_constant_check, maximal_constant, maximal_function, maximal_power_integral, LpMaximalCheck};
pub use profile::{DensityProfile, Grid, MASS_TOLERANCE, SUPPORT_TRUNCATION};

/// Exchange symmetry of the spatial wavefunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
}

impl Symmetry {
    pub fn as_str(&self) -> &'static str {
        match self {
            Symmetry::Symmetric => "symmetric",
            Symmetry::Antisymmetric => "antisymmetric",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum StateFamily {
    /// Ground-state Gaussian orbitals `φ₀` of common width at the given
    /// centers, (anti)symmetrized.
    GaussianProduct { centers: Vec<f64>, width: f64 },
    /// Hermite–Gaussian orbitals of orders `0..n_orbitals` sharing one
    /// center and width, (anti)symmetrized.
    HermiteSlater {
        n_orbitals: usize,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// Correlated two-particle state
    /// `ψ ∝ √g(R)·u^m e^(−u²/4s²)(1 − a e^(−u²/2ε²))` in centre-of-mass
    /// `R` and separation `u`, with `m = 0` (symmetric) or `1` (antisymmetric).
    /// The factor in `ε` carves a correlation hole on the softening scale.
    SoftCoulombGroundPair {
        epsilon: f64,
        cm_width: f64,
        rel_width: f64,
        #[serde(default)]
        hole_depth: f64,
    },
}

impl StateFamily {
    pub fn name(&self) -> &'static str {
        match self {
            StateFamily::GaussianProduct { .. } => "gaussian_product",
            StateFamily::HermiteSlater { .. } => "hermite_slater",
            StateFamily::SoftCoulombGroundPair { .. } => "soft_coulomb_ground_pair",
        }
    }

    fn particle_count(&self) -> usize {
        match self {
            StateFamily::GaussianProduct { centers, .. } => centers.len(),
            StateFamily::HermiteSlater { n_orbitals, .. } => *n_orbitals,
            StateFamily::SoftCoulombGroundPair { .. } => 2,
        }
    }
}

/// Structured config form `{n_particles, symmetry, family, params}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStateEntry {
    pub n_particles: usize,
    pub symmetry: Symmetry,
    #[serde(flatten)]
    pub family: StateFamily,
}

/// Pair-separation distribution `f(u) = Σ_{i<j} ⟨δ(u − (xᵢ − xⱼ))⟩`, stored
/// either directly or as cross-correlations of density-like terms.
#[derive(Debug, Clone, Default)]
struct PairTerms {
    direct: Vec<GaussPoly>,
    correlated: Vec<(GaussPoly, GaussPoly)>,
}

impl PairTerms {
    fn eval(&self, u: f64) -> f64 {
        let d: f64 = self.direct.iter().map(|g| g.eval(u)).sum();
        let c: f64 = self.correlated.iter().map(|(p, q)| p.correlate(q, u)).sum();
        d + c
    }

    fn gross(&self, u: f64) -> f64 {
        let d: f64 = self.direct.iter().map(|g| g.eval(u).abs()).sum();
        let c: f64 = self.correlated.iter().map(|(p, q)| p.correlate(q, u).abs()).sum();
        d + c
    }

    fn features(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.direct.iter().map(|g| (g.center, g.sigma)).collect();
        for (p, q) in &self.correlated {
            out.push((p.center - q.center, p.sigma.hypot(q.sigma)));
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Model {
    Orbitals {
        orbitals: Vec<GaussPoly>,
        norm: f64,
    },
    Correlated {
        cm_width: f64,
        rel_width: f64,
        epsilon: f64,
        hole_depth: f64,
        power: i32,
        norm: f64,
    },
}

/// A normalized trial state with its density and pair terms precomputed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "TrialStateEntry", into = "TrialStateEntry")]
pub struct TrialState {
    n_particles: usize,
    symmetry: Symmetry,
    family: StateFamily,
    #[serde(skip)]
    model: Model,
    #[serde(skip)]
    density: Vec<GaussPoly>,
    #[serde(skip)]
    pair: PairTerms,
}

impl PartialEq for TrialState {
    fn eq(&self, other: &Self) -> bool {
        self.n_particles == other.n_particles && self.symmetry == other.symmetry && self.family == other.family
    }
}

impl TryFrom<TrialStateEntry> for TrialState {
    type Error = Error;
    fn try_from(e: TrialStateEntry) -> Result<Self> {
        TrialState::new(e.n_particles, e.symmetry, e.family)
    }
}

impl From<TrialState> for TrialStateEntry {
    fn from(s: TrialState) -> Self {
        TrialStateEntry {
            n_particles: s.n_particles,
            symmetry: s.symmetry,
            family: s.family,
        }
    }
}

/// Signed permutations of `0..n` (sign +1 for symmetric states).
fn signed_permutations(n: usize, symmetry: Symmetry) -> Vec<(Vec<usize>, f64)> {
    (0..n)
        .permutations(n)
        .map(|p| {
            let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let sign = match symmetry {
                Symmetry::Symmetric => 1.0,
                Symmetry::Antisymmetric => {
                    if inversions % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            };
            (p, sign)
        })
        .collect()
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {value}")))
    }
}

impl TrialState {
    pub fn new(n_particles: usize, symmetry: Symmetry, family: StateFamily) -> Result<Self> {
        if !(2..=3).contains(&n_particles) {
            return Err(Error::invalid(format!("only N = 2 or 3 is supported, got {n_particles}")));
        }
        if family.particle_count() != n_particles {
            return Err(Error::invalid(format!(
                "{} describes {} particles but n_particles = {n_particles}",
                family.name(),
                family.particle_count()
            )));
        }
        let (model, density, pair) = match &family {
            StateFamily::GaussianProduct { centers, width } => {
                check_positive("width", *width)?;
                if centers.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid("orbital centers must be finite"));
                }
                let orbitals = centers.iter().map(|&c| orbital(0, c, *width)).collect();
                build_orbital_model(orbitals, symmetry)?
            }
            StateFamily::HermiteSlater {
                n_orbitals,
                width,
                center,
            } => {
                check_positive("width", *width)?;
                let orbitals = (0..*n_orbitals).map(|k| orbital(k, *center, *width)).collect();
                build_orbital_model(orbitals, symmetry)?
            }
            &StateFamily::SoftCoulombGroundPair {
                epsilon,
                cm_width,
                rel_width,
                hole_depth,
            } => {
                check_positive("epsilon", epsilon)?;
                check_positive("cm_width", cm_width)?;
                check_positive("rel_width", rel_width)?;
                if !(0.0..=1.0).contains(&hole_depth) {
                    return Err(Error::invalid(format!("hole_depth must lie in [0, 1], got {hole_depth}")));
                }
                build_correlated_model(epsilon, cm_width, rel_width, hole_depth, symmetry)
            }
        };
        Ok(Self {
            n_particles,
            symmetry,
            family,
            model,
            density,
            pair,
        })
    }

    pub fn gaussian_pair(separation: f64, width: f64, symmetry: Symmetry) -> Result<Self> {
        Self::new(
            2,
            symmetry,
            StateFamily::GaussianProduct {
                centers: vec![-0.5 * separation, 0.5 * separation],
                width,
            },
        )
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn family(&self) -> &StateFamily {
        &self.family
    }

    /// Compact identifier listing family, symmetry and parameters.
    pub fn label(&self) -> String {
        let params = match &self.family {
            StateFamily::GaussianProduct { centers, width } => {
                let c = centers.iter().map(|c| format!("{c:.6}")).join(";");
                format!("centers=[{c}] width={width:.6}")
            }
            StateFamily::HermiteSlater {
                n_orbitals,
                width,
                center,
            } => format!("n={n_orbitals} width={width:.6} center={center:.6}"),
            StateFamily::SoftCoulombGroundPair {
                epsilon,
                cm_width,
                rel_width,
                hole_depth,
            } => format!("eps={epsilon:.6} cm={cm_width:.6} rel={rel_width:.6} hole={hole_depth:.6}"),
        };
        format!("{}/{}/N{} {}", self.family.name(), self.symmetry.as_str(), self.n_particles, params)
    }

    /// `ψ(x₁, …, x_N)`.
    pub fn amplitude(&self, xs: &[f64]) -> Result<f64> {
        if xs.len() != self.n_particles {
            return Err(Error::invalid(format!("expected {} coordinates, got {}", self.n_particles, xs.len())));
        }
        Ok(match &self.model {
            Model::Orbitals { orbitals, norm } => {
                let perms = signed_permutations(orbitals.len(), self.symmetry);
                let sum: f64 = perms
                    .iter()
                    .map(|(p, s)| s * p.iter().zip(xs).map(|(&k, &x)| orbitals[k].eval(x)).product::<f64>())
                    .sum();
                norm * sum
            }
            &Model::Correlated {
                cm_width,
                rel_width,
                epsilon,
                hole_depth,
                power,
                norm,
            } => {
                let r = 0.5 * (xs[0] + xs[1]);
                let u = xs[0] - xs[1];
                let cm = (-0.25 * r * r / (cm_width * cm_width)).exp() / (2.0 * PI * cm_width * cm_width).powf(0.25);
                let rel = u.powi(power)
                    * (-0.25 * u * u / (rel_width * rel_width)).exp()
                    * (1.0 - hole_depth * (-0.5 * u * u / (epsilon * epsilon)).exp());
                norm * cm * rel
            }
        })
    }

    /// `ρ(x) = N ∫|ψ(x, x₂, …)|² dx₂…`.
    pub fn density_at(&self, x: f64) -> f64 {
        self.density.iter().map(|g| g.eval(x)).sum::<f64>().max(0.0)
    }

    /// Distribution of pair separations, `f(u) = Σ_{i<j}⟨δ(u − (xᵢ − xⱼ))⟩`;
    /// even in `u` with total mass `N(N − 1)/2`.
    pub fn pair_distribution(&self, u: f64) -> f64 {
        self.pair.eval(u)
    }

    /// Sum of the magnitudes of the terms of the pair distribution; its
    /// ratio to `pair_distribution` measures the cancellation.
    pub fn pair_distribution_gross(&self, u: f64) -> f64 {
        self.pair.gross(u)
    }

    /// Sum of the magnitudes of the terms of the autocorrelation.
    pub fn density_autocorrelation_gross(&self, u: f64) -> f64 {
        let mut total = 0.0;
        for (i, p) in self.density.iter().enumerate() {
            total += p.correlate(p, u).abs();
            for q in &self.density[i + 1..] {
                total += p.correlate(q, u).abs() + p.correlate(q, -u).abs();
            }
        }
        total
    }

    /// `A(u) = ∫ρ(x)ρ(x − u) dx`; `A(0) = ∫ρ²`.
    pub fn density_autocorrelation(&self, u: f64) -> f64 {
        let mut total = 0.0;
        for (i, p) in self.density.iter().enumerate() {
            total += p.correlate(p, u);
            for q in &self.density[i + 1..] {
                total += p.correlate(q, u) + p.correlate(q, -u);
            }
        }
        total
    }

    /// Locations `|u|` and widths of the features of the pair distribution.
    pub fn pair_features(&self) -> Vec<(f64, f64)> {
        dedup_features(self.pair.features())
    }

    /// Locations `|u|` and widths of the features of the autocorrelation.
    pub fn autocorrelation_features(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for p in &self.density {
            for q in &self.density {
                out.push((p.center - q.center, p.sigma.hypot(q.sigma)));
            }
        }
        dedup_features(out)
    }

    /// `(lo, hi, smallest width)` over the density's Gaussian terms.
    pub fn extent(&self) -> (f64, f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut w = f64::INFINITY;
        for g in &self.density {
            lo = lo.min(g.center - 12.0 * g.sigma);
            hi = hi.max(g.center + 12.0 * g.sigma);
            w = w.min(g.sigma);
        }
        (lo, hi, w)
    }

    /// At least 4097 points (4096 cells) over the support ±12 widths, with
    /// spacing no larger than a tenth of the narrowest density width.
    pub fn default_grid(&self) -> Grid {
        let (lo, hi, w) = self.extent();
        let cells = (((hi - lo) / (0.1 * w)).ceil() as usize).max(4096);
        let cells = cells + cells % 2;
        Grid::spanning(lo, hi, cells + 1).expect("state extent is a nonempty interval")
    }

    /// Samples the exact density on `grid`.
    pub fn density(&self, grid: &Grid) -> Result<DensityProfile> {
        let values = grid.points().map(|x| self.density_at(x)).collect();
        DensityProfile::new(*grid, values, self.n_particles as f64)
    }

    pub fn density_profile(&self) -> Result<DensityProfile> {
        self.density(&self.default_grid())
    }

    /// Density mass inside the window `[z − r, z + r]`.
    pub fn alpha_profile(&self, r: f64, z: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::invalid(format!("window radius must be nonnegative, got {r}")));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        if r.is_infinite() {
            return Ok(self.n_particles as f64);
        }
        let (lo, hi, _) = self.extent();
        let a = (z - r).max(lo);
        let b = (z + r).min(hi);
        if a >= b {
            return Ok(0.0);
        }
        let spec = QuadratureSpec::with_tolerances(1e-13, 1e-11);
        Ok(integrate_1d(|x| self.density_at(x), Interval::finite(a, b), &spec)?.value)
    }

    /// All coordinates shifted by `delta`.
    pub fn translated(&self, delta: f64) -> Result<Self> {
        let family = match &self.family {
            StateFamily::GaussianProduct { centers, width } => StateFamily::GaussianProduct {
                centers: centers.iter().map(|c| c + delta).collect(),
                width: *width,
            },
            StateFamily::HermiteSlater {
                n_orbitals,
                width,
                center,
            } => StateFamily::HermiteSlater {
                n_orbitals: *n_orbitals,
                width: *width,
                center: center + delta,
            },
            StateFamily::SoftCoulombGroundPair { .. } => {
                return Err(Error::invalid("the correlated pair is centred at the origin"));
            }
        };
        Self::new(self.n_particles, self.symmetry, family)
    }

    /// The state with every length divided by `lambda`, so its density is
    /// `λρ(λx)`.
    pub fn dilated(&self, lambda: f64) -> Result<Self> {
        check_positive("dilation", lambda)?;
        let family = match &self.family {
            StateFamily::GaussianProduct { centers, width } => StateFamily::GaussianProduct {
                centers: centers.iter().map(|c| c / lambda).collect(),
                width: width / lambda,
            },
            StateFamily::HermiteSlater {
                n_orbitals,
                width,
                center,
            } => StateFamily::HermiteSlater {
                n_orbitals: *n_orbitals,
                width: width / lambda,
                center: center / lambda,
            },
            StateFamily::SoftCoulombGroundPair {
                epsilon,
                cm_width,
                rel_width,
                hole_depth,
            } => StateFamily::SoftCoulombGroundPair {
                epsilon: epsilon / lambda,
                cm_width: cm_width / lambda,
                rel_width: rel_width / lambda,
                hole_depth: *hole_depth,
            },
        };
        Self::new(self.n_particles, self.symmetry, family)
    }
}

fn dedup_features(mut features: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    for f in features.iter_mut() {
        f.0 = f.0.abs();
    }
    features.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    features.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-12 * (1.0 + b.0) && (a.1 - b.1).abs() <= 1e-12 * b.1);
    features
}

type Built = (Model, Vec<GaussPoly>, PairTerms);

fn build_orbital_model(orbitals: Vec<GaussPoly>, symmetry: Symmetry) -> Result<Built> {
    let n = orbitals.len();
    let products: Vec<Vec<GaussPoly>> =
        orbitals.iter().map(|a| orbitals.iter().map(|b| a.product(b)).collect()).collect();
    let overlap: Vec<Vec<f64>> = products.iter().map(|row| row.iter().map(|q| q.integral()).collect()).collect();
    let perms = signed_permutations(n, symmetry);

    let mut norm_inv = 0.0;
    let mut dens = vec![vec![0.0; n]; n];
    let mut pair = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for (sp, ss) in &perms {
        for (tp, ts) in &perms {
            let sign = ss * ts;
            let s: Vec<f64> = (0..n).map(|i| overlap[sp[i]][tp[i]]).collect();
            norm_inv += sign * s.iter().product::<f64>();
            dens[sp[0]][tp[0]] += sign * s[1..].iter().product::<f64>();
            pair[sp[0]][tp[0]][sp[1]][tp[1]] += sign * s[2..].iter().product::<f64>();
        }
    }
    let factorial: f64 = (1..=n).map(|i| i as f64).product();
    if !(norm_inv > 1e-10 * factorial * factorial) {
        return Err(Error::invalid(
            "orbitals are too close to linearly dependent for this symmetry; the state vanishes",
        ));
    }
    let c2 = 1.0 / norm_inv;
    let n_f = n as f64;
    let mut density = Vec::new();
    for a in 0..n {
        for b in a..n {
            let weight = if a == b { dens[a][a] } else { dens[a][b] + dens[b][a] };
            let coef = n_f * c2 * weight;
            if coef != 0.0 {
                density.push(products[a][b].scaled(coef));
            }
        }
    }
    let pairs_count = 0.5 * n_f * (n_f - 1.0);
    let mut correlated = Vec::new();
    for a in 0..n {
        for b in a..n {
            for c in 0..n {
                for d in c..n {
                    let mut w = 0.0;
                    for &(x, y) in &[(a, b), (b, a)][..if a == b { 1 } else { 2 }] {
                        for &(z, t) in &[(c, d), (d, c)][..if c == d { 1 } else { 2 }] {
                            w += pair[x][y][z][t];
                        }
                    }
                    let coef = pairs_count * c2 * w;
                    if coef.abs() > 1e-15 * pairs_count * c2 {
                        correlated.push((products[a][b].scaled(coef), products[c][d].clone()));
                    }
                }
            }
        }
    }
    let model = Model::Orbitals {
        orbitals,
        norm: c2.sqrt(),
    };
    Ok((
        model,
        density,
        PairTerms {
            direct: Vec::new(),
            correlated,
        },
    ))
}

fn build_correlated_model(epsilon: f64, cm_width: f64, rel_width: f64, hole_depth: f64, symmetry: Symmetry) -> Built {
    let power = match symmetry {
        Symmetry::Symmetric => 0,
        Symmetry::Antisymmetric => 1,
    };
    // (1 − a e^{−u²/2ε²})² = Σ_j c_j e^{−j u²/2ε²}
    let coefs = [1.0, -2.0 * hole_depth, hole_depth * hole_depth];
    let taus: Vec<f64> = (0..3)
        .map(|j| 1.0 / (1.0 / (rel_width * rel_width) + j as f64 / (epsilon * epsilon)).sqrt())
        .collect();
    let moment = |tau: f64| if power == 0 { 1.0 } else { tau * tau };
    let z: f64 = coefs
        .iter()
        .zip(&taus)
        .map(|(c, &t)| c * (2.0 * PI).sqrt() * t * moment(t))
        .sum();
    let mut direct = Vec::new();
    let mut density = Vec::new();
    let s2 = cm_width * cm_width;
    for (&c, &tau) in coefs.iter().zip(&taus) {
        if c == 0.0 {
            continue;
        }
        let amp = c / z;
        direct.push(GaussPoly {
            center: 0.0,
            sigma: tau,
            coeffs: if power == 0 { vec![amp] } else { vec![0.0, 0.0, amp] },
        });
        // x = R + u/2 with R ~ N(0, s²) and u weighted by u^{2m} N(0, τ²)
        let t2 = tau * tau;
        let var_x = s2 + 0.25 * t2;
        let weight = 2.0 * c * tau / (z * var_x.sqrt());
        let coeffs = if power == 0 {
            vec![weight]
        } else {
            let k = 0.5 * t2 / var_x;
            let v = t2 - 0.25 * t2 * t2 / var_x;
            vec![weight * v, 0.0, weight * k * k]
        };
        density.push(GaussPoly {
            center: 0.0,
            sigma: var_x.sqrt(),
            coeffs,
        });
    }
    let model = Model::Correlated {
        cm_width,
        rel_width,
        epsilon,
        hole_depth,
        power,
        norm: 1.0 / z.sqrt(),
    };
    (
        model,
        density,
        PairTerms {
            direct,
            correlated: Vec::new(),
        },
    )
}

/// Draws one member of the randomized verification suite. `index` cycles
/// through N = 2 and N = 3 product states of both symmetries, Hermite
/// determinants/permanents and correlated pairs; widths and separations are
/// log-uniform.
pub fn random_state<R: Rng>(rng: &mut R, index: usize) -> Result<TrialState> {
    let symmetry = if index.is_multiple_of(2) {
        Symmetry::Symmetric
    } else {
        Symmetry::Antisymmetric
    };
    let width = numerics::log_uniform(rng, 0.2, 5.0);
    let family = match (index / 2) % 4 {
        0 | 1 => {
            let n = if (index / 2).is_multiple_of(4) { 2 } else { 3 };
            let mut centers = vec![rng.gen_range(-2.0..2.0) * width];
            for _ in 1..n {
                let gap = numerics::log_uniform(rng, 0.5, 8.0) * width;
                centers.push(centers.last().unwrap() + gap);
            }
            StateFamily::GaussianProduct { centers, width }
        }
        2 => StateFamily::HermiteSlater {
            n_orbitals: rng.gen_range(2..=3),
            width,
            center: rng.gen_range(-1.0..1.0) * width,
        },
        _ => StateFamily::SoftCoulombGroundPair {
            epsilon: numerics::log_uniform(rng, 0.1, 3.0),
            cm_width: width,
            rel_width: numerics::log_uniform(rng, 0.3, 6.0) * width,
            hole_depth: rng.gen_range(0.0..1.0),
        },
    };
    TrialState::new(family.particle_count(), symmetry, family)
}

/// `count` states from [`random_state`] drawn from one seeded stream.
pub fn random_suite(count: usize, seed: u64) -> Result<Vec<TrialState>> {
    let mut rng = numerics::stream(seed, 0);
    (0..count).map(|i| random_state(&mut rng, i)).collect()
}
