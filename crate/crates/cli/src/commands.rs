use std::path::{Path, PathBuf};

use lo1d_core::bounds::{self, BoundReport, BoundSpec, Status, VerifyCase};
use lo1d_core::explore::{self, SearchProblem};
use lo1d_core::hubbard::{self, HubbardPoint, OccupationVector};
use lo1d_core::numerics;
use lo1d_core::potentials::{MomentConstants, Potential};
use lo1d_core::report::{self, Format, RunManifest};
use lo1d_core::states::{self, DensityProfile, Grid};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{CliError, Command, Config, EXIT_PASS, EXIT_VIOLATION};

pub fn dispatch(command: Command, config: &Config) -> Result<i32, CliError> {
    let dir = config.out.join(command.name());
    std::fs::create_dir_all(&dir)?;
    let code = match command {
        Command::Verify => cmd_verify(config, &dir)?,
        Command::Moments => cmd_moments(config, &dir)?,
        Command::Optimize => cmd_optimize(config, &dir)?,
        Command::Hubbard => cmd_hubbard(config, &dir)?,
        Command::Maximal => cmd_maximal(config, &dir)?,
    };
    // where the reports go and how many threads wrote them do not change them
    let digested = Config { out: PathBuf::new(), jobs: 0, ..config.clone() };
    RunManifest::new(&digested, config.seed, &[command.name()])?.write(&dir)?;
    Ok(code)
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(lo1d_core::Error::from)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn write_both<T: Serialize>(records: &[T], dir: &Path, stem: &str, header: &[&str]) -> Result<(), CliError> {
    report::write_reports_with_header(records, Format::Csv, &dir.join(format!("{stem}.csv")), header)?;
    report::write_reports(records, Format::Jsonl, &dir.join(format!("{stem}.jsonl")))?;
    Ok(())
}

const BOUND_REPORT_COLUMNS: &[&str] = &[
    "state_id", "bound_id", "params", "potential", "proven", "lhs", "rhs", "slack", "tolerance", "status",
];

#[derive(Debug, Serialize)]
struct VerifySummary {
    states: usize,
    checks: usize,
    proven_checks: usize,
    proven_violations: usize,
    reference_checks: usize,
    reference_violations: usize,
    worst_proven_slack: Option<f64>,
}

pub fn verify_cases(config: &Config) -> Result<Vec<VerifyCase>, CliError> {
    let v = &config.verify;
    let mut cases = bounds::soundness_suite(v.random_states, config.seed, v.reference)?;
    for (i, state) in v.states.iter().enumerate() {
        let mut specs = Vec::new();
        for p in &v.potentials {
            specs.extend(bounds::proven_specs_for(p, state.n_particles())?);
            if v.reference {
                specs.extend(bounds::reference_specs_for(p)?);
            }
        }
        cases.push(VerifyCase {
            state_id: format!("c{i:04}"),
            state: state.clone(),
            specs,
        });
    }
    if !v.bounds.is_empty() {
        let keep = |s: &BoundSpec| !s.id().is_proven() || v.bounds.iter().any(|b| b == s.id().name());
        for case in &mut cases {
            case.specs.retain(keep);
        }
    }
    Ok(cases)
}

fn cmd_verify(config: &Config, dir: &Path) -> Result<i32, CliError> {
    let cases = verify_cases(config)?;
    let reports = bounds::verify_batch(&cases, config.tolerance)?;
    write_both(&reports, dir, "bound_reports", BOUND_REPORT_COLUMNS)?;
    let violated = |r: &&&BoundReport| r.status == Status::ViolatedBeyondTolerance;
    let (proven, reference): (Vec<&BoundReport>, Vec<&BoundReport>) = reports.iter().partition(|r| r.proven);
    let summary = VerifySummary {
        states: cases.len(),
        checks: reports.len(),
        proven_checks: proven.len(),
        proven_violations: proven.iter().filter(violated).count(),
        reference_checks: reference.len(),
        reference_violations: reference.iter().filter(violated).count(),
        worst_proven_slack: proven.iter().map(|r| r.slack).min_by(f64::total_cmp),
    };
    write_json(&summary, &dir.join("summary.json"))?;
    println!(
        "verify: {} checks on {} states, {} proven violations, {} reference violations",
        summary.checks, summary.states, summary.proven_violations, summary.reference_violations
    );
    Ok(if summary.proven_violations == 0 { EXIT_PASS } else { EXIT_VIOLATION })
}

#[derive(Debug, Serialize)]
struct MomentRow {
    potential: String,
    gamma: f64,
    second_moment: f64,
    first_moment_tail: f64,
}

#[derive(Debug, Serialize)]
pub struct CertificationRow {
    pub potential: String,
    pub constants_set: String,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub n_points: usize,
    pub passed: bool,
    pub max_relative_violation: f64,
    pub smallest_c1: f64,
    pub smallest_c3: f64,
}

/// Constant sets to certify: the proven ones, `c₃ = 3` for the regularized
/// potential and `c₂ = 2/ε` for the convex soft Coulomb one.
pub fn certification_sets(p: &Potential) -> Result<Vec<(&'static str, MomentConstants)>, CliError> {
    let Some(c) = p.proven_constants() else {
        return Ok(Vec::new());
    };
    let mut sets = vec![("proven", c)];
    match *p {
        Potential::RegularizedCoulomb { .. } => sets.push(("tight_c3", MomentConstants::new(c.c1, c.c2, 3.0)?)),
        Potential::ConvexSoftCoulomb { epsilon } => {
            sets.push(("alternate_c2", MomentConstants::new(c.c1, 2.0 / epsilon, c.c3)?))
        }
        _ => {}
    }
    Ok(sets)
}

fn cmd_moments(config: &Config, dir: &Path) -> Result<i32, CliError> {
    let m = &config.moments;
    if m.potentials.iter().any(|p| matches!(p, Potential::Contact)) {
        return Err(CliError::Config("the contact interaction has no pointwise moments".into()));
    }
    let mut table = Vec::new();
    for p in &m.potentials {
        let l = p.natural_scale();
        for gamma in numerics::log_space(1e-4 * l, 1e4 * l, m.table_points) {
            let mv = p.moments(gamma)?;
            table.push(MomentRow {
                potential: p.to_string(),
                gamma,
                second_moment: mv.second_moment,
                first_moment_tail: mv.first_moment_tail,
            });
        }
    }
    write_both(&table, dir, "moments", &["potential", "gamma", "second_moment", "first_moment_tail"])?;

    let jobs: Vec<(Potential, &'static str, MomentConstants)> = m
        .potentials
        .iter()
        .map(|p| Ok(certification_sets(p)?.into_iter().map(|(n, c)| (*p, n, c)).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, CliError>>()?
        .into_iter()
        .flatten()
        .collect();
    let certs: Vec<CertificationRow> = jobs
        .par_iter()
        .map(|(p, name, c)| {
            let r = p.assess_moment_conditions(c, &p.default_gamma_grid())?;
            Ok(CertificationRow {
                potential: p.to_string(),
                constants_set: name.to_string(),
                c1: c.c1,
                c2: c.c2,
                c3: c.c3,
                n_points: r.n_points,
                passed: r.passed,
                max_relative_violation: r.max_relative_violation,
                smallest_c1: r.smallest_c1,
                smallest_c3: r.smallest_c3,
            })
        })
        .collect::<Result<_, lo1d_core::Error>>()?;
    write_both(
        &certs,
        dir,
        "certification",
        &[
            "potential", "constants_set", "c1", "c2", "c3", "n_points", "passed",
            "max_relative_violation", "smallest_c1", "smallest_c3",
        ],
    )?;
    let discrepancies = bounds::discrepancies()?;
    report::write_reports(&discrepancies, Format::Jsonl, &dir.join("discrepancies.jsonl"))?;
    let failed = certs.iter().filter(|c| !c.passed).count();
    println!(
        "moments: {} table rows, {} certifications ({} failed), {} discrepancy records",
        table.len(),
        certs.len(),
        failed,
        discrepancies.len()
    );
    Ok(if failed == 0 { EXIT_PASS } else { EXIT_VIOLATION })
}

#[derive(Debug, Serialize)]
struct OptimizeRow {
    potential: String,
    family: String,
    best_ratio: f64,
    best_theta: Vec<f64>,
    log_density_fraction: Option<f64>,
    evaluations_used: usize,
    /// Smallest `−RHS − λ∫ρ²` over the proven bounds at the best state.
    soundness_margin: f64,
}

fn cmd_optimize(config: &Config, dir: &Path) -> Result<i32, CliError> {
    let o = &config.optimize;
    let rows = explore::constant_table(&o.potentials, &o.families, o.budget, config.seed)?;
    let mut out = Vec::with_capacity(rows.len());
    let mut unsound = 0;
    for row in rows {
        let p = *o
            .potentials
            .iter()
            .find(|p| p.to_string() == row.potential)
            .expect("row comes from the configured potentials");
        let f = *o
            .families
            .iter()
            .find(|f| f.to_string() == row.family)
            .expect("row comes from the configured families");
        let problem = SearchProblem {
            potential: p,
            family: f,
            budget: o.budget,
        };
        let margin = explore::soundness_margin(&problem, &row.best_theta)?;
        let scale = f.build(&row.best_theta)?.density_autocorrelation(0.0);
        if margin < -config.tolerance * (1.0 + scale) {
            unsound += 1;
        }
        out.push(OptimizeRow {
            potential: row.potential,
            family: row.family,
            best_ratio: row.best_ratio,
            best_theta: row.best_theta,
            log_density_fraction: row.log_density_fraction,
            evaluations_used: row.evaluations_used,
            soundness_margin: margin,
        });
    }
    write_both(
        &out,
        dir,
        "constants",
        &[
            "potential", "family", "best_ratio", "best_theta", "log_density_fraction", "evaluations_used",
            "soundness_margin",
        ],
    )?;
    for r in &out {
        println!("optimize: {} / {}: best ratio {:.6}", r.potential, r.family, r.best_ratio);
    }
    Ok(if unsound == 0 { EXIT_PASS } else { EXIT_VIOLATION })
}

#[derive(Debug, Serialize)]
struct HubbardRow {
    u: f64,
    n: f64,
    kappa: f64,
    f: f64,
    e: f64,
    e_xc: f64,
    slack: f64,
}

#[derive(Debug, Serialize)]
struct BetaRow {
    u_over_t: f64,
    e_half_filling: f64,
    kappa: f64,
}

#[derive(Debug, Serialize)]
struct PropositionRow {
    vector_id: usize,
    n_sites: usize,
    u: f64,
    kappa: f64,
    e_xc: f64,
    lower_bound: f64,
    slack: f64,
    holds: bool,
}

#[derive(Debug, Serialize)]
struct HubbardSummary {
    min_f: f64,
    min_site_slack: f64,
    propositions: usize,
    proposition_failures: usize,
    min_proposition_slack: f64,
}

fn cmd_hubbard(config: &Config, dir: &Path) -> Result<i32, CliError> {
    let h = &config.hubbard;
    let fillings = numerics::lin_space(0.0, 2.0, h.filling_points);
    let kappas = numerics::lin_space(1.0, 2.0, h.kappa_points);
    let mut grid = Vec::with_capacity(h.u_values.len() * fillings.len() * kappas.len());
    for &u in &h.u_values {
        for &kappa in &kappas {
            for &n in &fillings {
                let pt = HubbardPoint::new(n, h.t, u, kappa)?;
                let x = hubbard::exchange_correlation(&pt);
                grid.push(HubbardRow {
                    u,
                    n,
                    kappa,
                    f: hubbard::f_n(n.min(2.0 - n), kappa),
                    e: x.e,
                    e_xc: x.e_xc,
                    slack: x.e_xc + x.e_hartree,
                });
            }
        }
    }
    report::write_reports_with_header(&grid, Format::Csv, &dir.join("grid.csv"), &["u", "n", "kappa", "f", "e", "e_xc", "slack"])?;

    let betas: Vec<BetaRow> = h
        .beta_points
        .par_iter()
        .map(|&u| {
            Ok(BetaRow {
                u_over_t: u,
                e_half_filling: hubbard::lieb_wu_half_filling(u)?,
                kappa: hubbard::beta_of_u(u)?,
            })
        })
        .collect::<Result<_, lo1d_core::Error>>()?;
    write_both(&betas, dir, "beta", &["u_over_t", "e_half_filling", "kappa"])?;

    let mut rng = numerics::stream(config.seed, 7);
    let mut props = Vec::with_capacity(h.random_vectors);
    for vector_id in 0..h.random_vectors {
        let len = rng.gen_range(1..=h.max_sites);
        let occ = OccupationVector::new((0..len).map(|_| rng.gen_range(0.0..=2.0)).collect())?;
        let u = rng.gen_range(0.0..=10.0) * h.t;
        let kappa = rng.gen_range(1.0..=2.0);
        let r = hubbard::verify_proposition(&occ, h.t, u, kappa)?;
        props.push(PropositionRow {
            vector_id,
            n_sites: r.n_sites,
            u,
            kappa,
            e_xc: r.e_xc,
            lower_bound: r.lower_bound,
            slack: r.slack,
            holds: r.holds,
        });
    }
    write_both(
        &props,
        dir,
        "proposition",
        &["vector_id", "n_sites", "u", "kappa", "e_xc", "lower_bound", "slack", "holds"],
    )?;

    let summary = HubbardSummary {
        min_f: grid.iter().map(|r| r.f).fold(f64::INFINITY, f64::min),
        min_site_slack: grid.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
        propositions: props.len(),
        proposition_failures: props.iter().filter(|r| !r.holds).count(),
        min_proposition_slack: props.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
    };
    write_json(&summary, &dir.join("summary.json"))?;
    println!(
        "hubbard: min f = {:e}, {} of {} random occupation vectors violate",
        summary.min_f, summary.proposition_failures, summary.propositions
    );
    let ok = summary.min_f >= -1e-12 && summary.min_site_slack >= -1e-12 && summary.proposition_failures == 0;
    Ok(if ok { EXIT_PASS } else { EXIT_VIOLATION })
}

#[derive(Debug, Serialize)]
struct MaximalRow {
    profile_id: usize,
    kind: String,
    p: f64,
    ratio: f64,
    constant: f64,
    within_bound: bool,
}

/// Profile `0` is the indicator of `[−1, 1]`; odd ids are random step
/// profiles, even ids densities of random trial states.
pub fn maximal_profiles(count: usize, points: usize, seed: u64) -> Result<Vec<(String, DensityProfile)>, CliError> {
    let mut rng = numerics::stream(seed, 5);
    let grid = Grid::spanning(-10.0, 10.0, points)?;
    let mut out = Vec::with_capacity(count);
    for id in 0..count {
        let entry = if id == 0 {
            let values = grid.points().map(|x| if x.abs() <= 1.0 { 1.0 } else { 0.0 }).collect();
            ("indicator".to_string(), DensityProfile::from_values(grid, values)?)
        } else if id % 2 == 1 {
            let (a, b) = (rng.gen_range(-9.0..0.0), rng.gen_range(0.5..9.0));
            let values = grid
                .points()
                .map(|x| if (a..=b).contains(&x) { rng.gen_range(0.0..1.0) } else { 0.0 })
                .collect();
            ("random_steps".to_string(), DensityProfile::from_values(grid, values)?)
        } else {
            let s = states::random_state(&mut rng, id / 2)?;
            let (lo, hi, _) = s.extent();
            let g = Grid::spanning(lo, hi, points)?;
            (s.label(), DensityProfile::from_values(g, s.density(&g)?.values().to_vec())?)
        };
        out.push(entry);
    }
    Ok(out)
}

fn cmd_maximal(config: &Config, dir: &Path) -> Result<i32, CliError> {
    let m = &config.maximal;
    let profiles = maximal_profiles(m.random_profiles, m.grid_points, config.seed)?;
    let jobs: Vec<(usize, f64)> = (0..profiles.len())
        .flat_map(|i| m.exponents.iter().map(move |&p| (i, p)))
        .collect();
    let rows: Vec<MaximalRow> = jobs
        .par_iter()
        .map(|&(i, p)| {
            let (kind, d) = &profiles[i];
            let c = states::lp_maximal_constant_check(d, p)?;
            Ok(MaximalRow {
                profile_id: i,
                kind: kind.clone(),
                p,
                ratio: c.ratio,
                constant: c.constant,
                within_bound: c.within_bound,
            })
        })
        .collect::<Result<_, lo1d_core::Error>>()?;
    write_both(&rows, dir, "maximal", &["profile_id", "kind", "p", "ratio", "constant", "within_bound"])?;
    let failed = rows.iter().filter(|r| !r.within_bound).count();
    let worst = rows.iter().map(|r| r.ratio / r.constant).fold(0.0, f64::max);
    println!("maximal: {} ratios, largest fraction of the bound {worst:.4}, {failed} above it", rows.len());
    Ok(if failed == 0 { EXIT_PASS } else { EXIT_VIOLATION })
}

/// Output directory of a subcommand.
pub fn output_dir(config: &Config, command: Command) -> PathBuf {
    config.out.join(command.name())
}

