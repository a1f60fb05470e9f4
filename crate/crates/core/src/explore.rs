//! Derivative-free search for trial states maximizing `λ(θ) = −I_xc/∫ρ²`,
//! the empirical constant of a bound of the form `I_xc ≥ −C∫ρ²`.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundId, BoundSpec};
use crate::energies;
use crate::numerics;
use crate::potentials::Potential;
use crate::states::{StateFamily, Symmetry, TrialState};
use crate::{Error, Result};

/// Evaluations per Nelder–Mead restart.
pub const EVALUATIONS_PER_RESTART: usize = 200;

/// Parametric state family searched over, with its box of parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "snake_case")]
pub enum FamilyTemplate {
    /// `θ = (separation, width)`.
    GaussianPair { symmetry: Symmetry },
    /// `θ = (gap₁, gap₂, width)`.
    GaussianTriple { symmetry: Symmetry },
    /// `θ = (width)`, orbitals `h₀, h₁`.
    HermitePair { symmetry: Symmetry },
    /// `θ = (cm_width, rel_width, hole_depth)` with a fixed hole scale.
    CorrelatedPair { symmetry: Symmetry, epsilon: f64 },
}

impl fmt::Display for FamilyTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyTemplate::GaussianPair { symmetry } => write!(f, "gaussian_pair/{}", symmetry.as_str()),
            FamilyTemplate::GaussianTriple { symmetry } => write!(f, "gaussian_triple/{}", symmetry.as_str()),
            FamilyTemplate::HermitePair { symmetry } => write!(f, "hermite_pair/{}", symmetry.as_str()),
            FamilyTemplate::CorrelatedPair { symmetry, epsilon } => {
                write!(f, "correlated_pair/{}(epsilon={epsilon})", symmetry.as_str())
            }
        }
    }
}

impl FamilyTemplate {
    /// Lower and upper corners of the parameter box.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        // antisymmetric orbitals need some separation to stay normalizable
        let gap_min = |s: &Symmetry| if *s == Symmetry::Antisymmetric { 0.3 } else { 0.0 };
        match self {
            FamilyTemplate::GaussianPair { symmetry } => (vec![gap_min(symmetry), 0.25], vec![8.0, 2.0]),
            FamilyTemplate::GaussianTriple { symmetry } => {
                (vec![gap_min(symmetry), gap_min(symmetry), 0.25], vec![6.0, 6.0, 2.0])
            }
            FamilyTemplate::HermitePair { .. } => (vec![0.25], vec![4.0]),
            FamilyTemplate::CorrelatedPair { .. } => (vec![0.25, 0.25, 0.0], vec![4.0, 8.0, 1.0]),
        }
    }

    pub fn build(&self, theta: &[f64]) -> Result<TrialState> {
        match *self {
            FamilyTemplate::GaussianPair { symmetry } => TrialState::gaussian_pair(theta[0], theta[1], symmetry),
            FamilyTemplate::GaussianTriple { symmetry } => TrialState::new(
                3,
                symmetry,
                StateFamily::GaussianProduct {
                    centers: vec![-theta[0], 0.0, theta[1]],
                    width: theta[2],
                },
            ),
            FamilyTemplate::HermitePair { symmetry } => TrialState::new(
                2,
                symmetry,
                StateFamily::HermiteSlater {
                    n_orbitals: 2,
                    width: theta[0],
                    center: 0.0,
                },
            ),
            FamilyTemplate::CorrelatedPair { symmetry, epsilon } => TrialState::new(
                2,
                symmetry,
                StateFamily::SoftCoulombGroundPair {
                    epsilon,
                    cm_width: theta[0],
                    rel_width: theta[1],
                    hole_depth: theta[2],
                },
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchProblem {
    pub potential: Potential,
    pub family: FamilyTemplate,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub theta: Vec<f64>,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best_theta: Vec<f64>,
    pub best_ratio: f64,
    pub evaluations_used: usize,
    /// Successive incumbents; ratios strictly increase along the trace.
    pub trace: Vec<TracePoint>,
}

/// `λ = −I_xc/∫ρ²` of a state.
pub fn ratio(s: &TrialState, p: &Potential) -> Result<f64> {
    let e = energies::i_xc(s, p)?;
    Ok(-e.i_xc / s.density_autocorrelation(0.0))
}

impl SearchProblem {
    pub fn objective(&self, theta: &[f64]) -> Result<f64> {
        let wrap = |source: Error| Error::ObjectiveEvaluationFailed {
            theta: theta.to_vec(),
            source: Box::new(source),
        };
        let s = self.family.build(theta).map_err(wrap)?;
        let r = ratio(&s, &self.potential).map_err(wrap)?;
        if !r.is_finite() {
            return Err(wrap(Error::invalid("objective is not finite")));
        }
        Ok(r)
    }
}

/// Nelder–Mead on `−λ` with `max(1, budget/200)` random restarts run
/// concurrently; restart `k` draws its start from stream `k + 1` of `seed`.
pub fn optimize(problem: &SearchProblem, seed: u64) -> Result<SearchResult> {
    if problem.budget < 50 {
        return Err(Error::invalid(format!("search budget must be at least 50, got {}", problem.budget)));
    }
    let restarts = (problem.budget / EVALUATIONS_PER_RESTART).max(1);
    let share = problem.budget / restarts;
    let extra = problem.budget - share * restarts;
    let runs: Vec<Result<SearchResult>> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = numerics::stream(seed, k as u64 + 1);
            let budget = share + if k == 0 { extra } else { 0 };
            nelder_mead(problem, &mut rng, budget)
        })
        .collect();
    let mut merged: Option<SearchResult> = None;
    let mut used = 0;
    let mut trace = Vec::new();
    for run in runs {
        let run = run?;
        used += run.evaluations_used;
        for point in run.trace {
            if trace.last().is_none_or(|t: &TracePoint| point.ratio > t.ratio) {
                trace.push(point);
            }
        }
        match &merged {
            Some(best) if run.best_ratio <= best.best_ratio => {}
            _ => {
                merged = Some(SearchResult {
                    best_theta: run.best_theta,
                    best_ratio: run.best_ratio,
                    evaluations_used: 0,
                    trace: Vec::new(),
                })
            }
        }
    }
    let mut result = merged.expect("at least one restart");
    result.evaluations_used = used;
    result.trace = trace;
    Ok(result)
}

fn clamp(theta: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((t, l), h) in theta.iter_mut().zip(lo).zip(hi) {
        *t = t.clamp(*l, *h);
    }
}

/// One Nelder–Mead run (reflection 1, expansion 2, contraction ½, shrink ½)
/// maximizing the objective within `budget` evaluations.
fn nelder_mead<R: Rng>(problem: &SearchProblem, rng: &mut R, budget: usize) -> Result<SearchResult> {
    let (lo, hi) = problem.family.bounds();
    let dim = lo.len();
    let mut evals = 0;
    let mut trace: Vec<TracePoint> = Vec::new();
    let eval = |theta: &[f64], evals: &mut usize, trace: &mut Vec<TracePoint>| -> Result<f64> {
        *evals += 1;
        let r = problem.objective(theta)?;
        if trace.last().is_none_or(|t| r > t.ratio) {
            trace.push(TracePoint {
                theta: theta.to_vec(),
                ratio: r,
            });
        }
        // minimize the negated ratio
        Ok(-r)
    };

    let start: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| rng.gen_range(*l..=*h)).collect();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(&start, &mut evals, &mut trace)?;
    simplex.push((start.clone(), f0));
    for i in 0..dim {
        let mut v = start.clone();
        let step = 0.05 * (hi[i] - lo[i]);
        v[i] = if v[i] + step <= hi[i] { v[i] + step } else { v[i] - step };
        let f = eval(&v, &mut evals, &mut trace)?;
        simplex.push((v, f));
    }

    while evals < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best_f = simplex[0].1;
        let worst_f = simplex[dim].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if (worst_f - best_f).abs() <= 1e-13 * best_f.abs().max(1e-300) && size <= 1e-9 {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(v, _)| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].0.clone();
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect();
            clamp(&mut p, &lo, &hi);
            p
        };
        let reflected = along(1.0);
        let fr = eval(&reflected, &mut evals, &mut trace)?;
        if fr < simplex[0].1 {
            if evals >= budget {
                simplex[dim] = (reflected, fr);
                break;
            }
            let expanded = along(2.0);
            let fe = eval(&expanded, &mut evals, &mut trace)?;
            simplex[dim] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflected, fr);
            continue;
        }
        if evals >= budget {
            break;
        }
        let (contracted, fc) = if fr < worst_f {
            let c = along(0.5);
            let f = eval(&c, &mut evals, &mut trace)?;
            (c, f)
        } else {
            let c = along(-0.5);
            let f = eval(&c, &mut evals, &mut trace)?;
            (c, f)
        };
        if fc < worst_f.min(fr) {
            simplex[dim] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            if evals >= budget {
                break;
            }
            let mut v: Vec<f64> = anchor.iter().zip(&entry.0).map(|(a, x)| a + 0.5 * (x - a)).collect();
            clamp(&mut v, &lo, &hi);
            let f = eval(&v, &mut evals, &mut trace)?;
            *entry = (v, f);
        }
    }
    let best = trace.last().expect("at least one evaluation").clone();
    Ok(SearchResult {
        best_theta: best.theta,
        best_ratio: best.ratio,
        evaluations_used: evals,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantRow {
    pub potential: String,
    pub family: String,
    pub best_ratio: f64,
    pub best_theta: Vec<f64>,
    /// `I_xc/RHS` of the logarithmic bound at the best state, where that
    /// bound applies.
    pub log_density_fraction: Option<f64>,
    pub evaluations_used: usize,
}

/// Best ratio for every (potential, family) pair.
pub fn constant_table(
    potentials: &[Potential],
    families: &[FamilyTemplate],
    budget: usize,
    seed: u64,
) -> Result<Vec<ConstantRow>> {
    let mut rows = Vec::new();
    for p in potentials {
        for f in families {
            let problem = SearchProblem {
                potential: *p,
                family: *f,
                budget,
            };
            let result = optimize(&problem, seed)?;
            let log_density_fraction = match BoundSpec::new(BoundId::LogDensity, *p) {
                Ok(spec) => {
                    let s = f.build(&result.best_theta)?;
                    let rhs = spec.rhs(&s.density_profile()?)?;
                    let lhs = energies::i_xc(&s, p)?.i_xc;
                    Some(lhs / rhs)
                }
                Err(_) => None,
            };
            rows.push(ConstantRow {
                potential: p.to_string(),
                family: f.to_string(),
                best_ratio: result.best_ratio,
                best_theta: result.best_theta,
                log_density_fraction,
                evaluations_used: result.evaluations_used,
            });
        }
    }
    Ok(rows)
}

/// Checks `λ·∫ρ² ≤ −RHS` for every proven bound applicable to the problem's
/// potential at `theta`; returns the smallest margin `−RHS − λ∫ρ²`.
pub fn soundness_margin(problem: &SearchProblem, theta: &[f64]) -> Result<f64> {
    let s = problem.family.build(theta)?;
    let d = s.density_profile()?;
    let lambda = ratio(&s, &problem.potential)?;
    let scaled = lambda * s.density_autocorrelation(0.0);
    let mut margin = f64::INFINITY;
    for spec in bounds::proven_specs_for(&problem.potential, s.n_particles())? {
        let rhs = spec.rhs(&d)?;
        margin = margin.min(-rhs - scaled);
    }
    Ok(margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn antisymmetric_contact_is_flat_half() {
        let problem = SearchProblem {
            potential: Potential::Contact,
            family: FamilyTemplate::GaussianPair {
                symmetry: Symmetry::Antisymmetric,
            },
            budget: 100,
        };
        for theta in [[0.5, 0.3], [3.0, 1.7]] {
            assert_relative_eq!(problem.objective(&theta).unwrap(), 0.5, max_relative = 1e-9);
        }
        let r = optimize(&problem, 1).unwrap();
        assert_relative_eq!(r.best_ratio, 0.5, max_relative = 1e-9);
    }

    #[test]
    fn symmetric_contact_quarter_at_coincidence() {
        let problem = SearchProblem {
            potential: Potential::Contact,
            family: FamilyTemplate::GaussianPair {
                symmetry: Symmetry::Symmetric,
            },
            budget: 100,
        };
        assert_relative_eq!(problem.objective(&[0.0, 1.0]).unwrap(), 0.25, max_relative = 1e-12);
        let near = problem.objective(&[1.0, 1.0]).unwrap();
        let far = problem.objective(&[6.0, 1.0]).unwrap();
        assert!(0.25 < near && near < far && far < 0.5);
    }

    #[test]
    fn trace_is_monotone_and_deterministic() {
        let problem = SearchProblem {
            potential: Potential::Contact,
            family: FamilyTemplate::GaussianPair {
                symmetry: Symmetry::Symmetric,
            },
            budget: 400,
        };
        let a = optimize(&problem, 42).unwrap();
        let b = optimize(&problem, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.windows(2).all(|w| w[0].ratio < w[1].ratio));
        assert_eq!(a.best_ratio, a.trace.last().unwrap().ratio);
        assert!(a.evaluations_used <= 400);
    }

    #[test]
    fn failures_carry_theta() {
        let problem = SearchProblem {
            potential: Potential::Contact,
            family: FamilyTemplate::GaussianPair {
                symmetry: Symmetry::Antisymmetric,
            },
            budget: 100,
        };
        match problem.objective(&[0.0, 1.0]) {
            Err(Error::ObjectiveEvaluationFailed { theta, .. }) => assert_eq!(theta, vec![0.0, 1.0]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_table() {
        assert!(constant_table(&[Potential::Contact], &[], 100, 0).unwrap().is_empty());
    }

    #[test]
    fn incumbents_respect_proven_bounds() {
        let problem = SearchProblem {
            potential: Potential::RegularizedCoulomb { beta: 1.0 },
            family: FamilyTemplate::GaussianPair {
                symmetry: Symmetry::Symmetric,
            },
            budget: 200,
        };
        let r = optimize(&problem, 5).unwrap();
        for point in r.trace.iter().step_by(3) {
            assert!(soundness_margin(&problem, &point.theta).unwrap() >= -1e-6);
        }
    }
}
