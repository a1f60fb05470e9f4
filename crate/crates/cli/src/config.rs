use std::path::{Path, PathBuf};

use lo1d_core::bounds::{BoundId, TwoTermVariant};
use lo1d_core::explore::FamilyTemplate;
use lo1d_core::potentials::Potential;
use lo1d_core::states::{Symmetry, TrialState};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub tolerance: f64,
    pub out: PathBuf,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub verify: VerifyConfig,
    pub moments: MomentsConfig,
    pub optimize: OptimizeConfig,
    pub hubbard: HubbardConfig,
    pub maximal: MaximalConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 20240601,
            tolerance: lo1d_core::bounds::DEFAULT_RELATIVE_TOLERANCE,
            out: PathBuf::from("out"),
            jobs: 0,
            verify: VerifyConfig::default(),
            moments: MomentsConfig::default(),
            optimize: OptimizeConfig::default(),
            hubbard: HubbardConfig::default(),
            maximal: MaximalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Size of the randomized suite; each state gets its own random potentials.
    pub random_states: usize,
    /// Explicit states, checked against `potentials`.
    pub states: Vec<TrialState>,
    pub potentials: Vec<Potential>,
    /// Restricts the proven bounds by name; empty keeps all of them.
    pub bounds: Vec<String>,
    /// Also evaluate the unproven reference forms (reported, never failing).
    pub reference: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            random_states: 200,
            states: Vec::new(),
            potentials: vec![
                Potential::Contact,
                Potential::ApproxContact { sigma: 0.5 },
                Potential::ConvexSoftCoulomb { epsilon: 1.0 },
                Potential::RegularizedCoulomb { beta: 1.0 },
                Potential::Homogeneous { epsilon: 0.5 },
            ],
            bounds: Vec::new(),
            reference: false,
        }
    }
}

/// Names accepted in `verify.bounds`.
pub const PROVEN_BOUND_NAMES: &[&str] = &[
    "contact_direct",
    "direct_cs",
    "maximal_direct",
    "approx_contact_direct",
    "moment_cutoff",
    "log_density",
    "log_square",
    "lifted_lo",
    "lundholm",
    "homogeneous_two_term",
];

fn unproven_names() -> [&'static str; 2] {
    [
        BoundId::Rasanen { k1: 0.0, k2: 0.0 }.name(),
        BoundId::HomogeneousTwoTerm {
            variant: TwoTermVariant::Stated,
        }
        .name(),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentsConfig {
    pub potentials: Vec<Potential>,
    /// Points of the log-spaced cutoff grid used for the moment table.
    pub table_points: usize,
}

impl Default for MomentsConfig {
    fn default() -> Self {
        let mut potentials = Vec::new();
        for x in [0.1, 1.0, 10.0] {
            potentials.push(Potential::ConvexSoftCoulomb { epsilon: x });
            potentials.push(Potential::RegularizedCoulomb { beta: x });
        }
        for epsilon in [0.1, 0.5, 0.9] {
            potentials.push(Potential::Homogeneous { epsilon });
        }
        potentials.push(Potential::ApproxContact { sigma: 1.0 });
        MomentsConfig {
            potentials,
            table_points: 41,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub potentials: Vec<Potential>,
    pub families: Vec<FamilyTemplate>,
    pub budget: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            potentials: vec![
                Potential::Contact,
                Potential::ConvexSoftCoulomb { epsilon: 1.0 },
                Potential::RegularizedCoulomb { beta: 1.0 },
            ],
            families: vec![
                FamilyTemplate::GaussianPair {
                    symmetry: Symmetry::Symmetric,
                },
                FamilyTemplate::GaussianPair {
                    symmetry: Symmetry::Antisymmetric,
                },
                FamilyTemplate::GaussianTriple {
                    symmetry: Symmetry::Symmetric,
                },
                FamilyTemplate::HermitePair {
                    symmetry: Symmetry::Antisymmetric,
                },
            ],
            budget: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HubbardConfig {
    pub t: f64,
    pub u_values: Vec<f64>,
    pub filling_points: usize,
    pub kappa_points: usize,
    pub random_vectors: usize,
    pub max_sites: usize,
    /// `U/t` values at which `β(U/t)` is tabulated.
    pub beta_points: Vec<f64>,
}

impl Default for HubbardConfig {
    fn default() -> Self {
        HubbardConfig {
            t: 1.0,
            u_values: vec![1.0, 4.0],
            filling_points: 200,
            kappa_points: 200,
            random_vectors: 10_000,
            max_sites: 32,
            beta_points: vec![0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 100.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximalConfig {
    pub exponents: Vec<f64>,
    pub random_profiles: usize,
    pub grid_points: usize,
}

impl Default for MaximalConfig {
    fn default() -> Self {
        MaximalConfig {
            exponents: vec![2.0],
            random_profiles: 100,
            grid_points: 401,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.tolerance >= 0.0 && self.tolerance.is_finite()) {
            return bad(format!("tolerance must be a nonnegative number, got {}", self.tolerance));
        }
        for name in &self.verify.bounds {
            if unproven_names().contains(&name.as_str()) {
                return bad(format!(
                    "bound `{name}` is not proven and cannot be part of the verified set; \
                     enable `verify.reference` to evaluate it"
                ));
            }
            if !PROVEN_BOUND_NAMES.contains(&name.as_str()) {
                return bad(format!("unknown bound `{name}`"));
            }
        }
        if !self.verify.states.is_empty() && self.verify.potentials.is_empty() {
            return bad("verify.states needs at least one entry in verify.potentials".into());
        }
        if self.moments.table_points < 2 {
            return bad("moments.table_points must be at least 2".into());
        }
        if self.optimize.budget < 50 {
            return bad(format!("optimize.budget must be at least 50, got {}", self.optimize.budget));
        }
        let h = &self.hubbard;
        if !(h.t > 0.0 && h.t.is_finite()) {
            return bad(format!("hubbard.t must be positive, got {}", h.t));
        }
        if let Some(u) = h.u_values.iter().chain(&h.beta_points).find(|u| !(**u >= 0.0 && u.is_finite())) {
            return bad(format!("hubbard interaction values must be nonnegative, got {u}"));
        }
        if h.filling_points < 2 || h.kappa_points < 2 || h.max_sites == 0 {
            return bad("hubbard grids need at least 2 points and max_sites at least 1".into());
        }
        if let Some(p) = self.maximal.exponents.iter().find(|p| !(**p > 1.0 && p.is_finite())) {
            return bad(format!("maximal exponents must exceed 1, got {p}"));
        }
        if self.maximal.grid_points < 3 {
            return bad("maximal.grid_points must be at least 3".into());
        }
        Ok(())
    }
}
