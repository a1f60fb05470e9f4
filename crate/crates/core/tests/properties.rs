use std::f64::consts::PI;

use approx::assert_relative_eq;
use lo1d_core::bounds::{self, BoundId, BoundReport, BoundSpec, Status};
use lo1d_core::energies;
use lo1d_core::explore::{self, FamilyTemplate, SearchProblem};
use lo1d_core::hubbard::{self, HubbardPoint, OccupationVector};
use lo1d_core::numerics::{self, integrate_1d, Interval, QuadratureSpec};
use lo1d_core::potentials::Potential;
use lo1d_core::report;
use lo1d_core::states::{self, DensityProfile, Grid, StateFamily, Symmetry, TrialState};
use proptest::prelude::*;
use rand::Rng;

fn smooth_potential() -> impl Strategy<Value = Potential> {
    prop_oneof![
        (0.05f64..10.0).prop_map(|epsilon| Potential::ConvexSoftCoulomb { epsilon }),
        (0.05f64..10.0).prop_map(|beta| Potential::RegularizedCoulomb { beta }),
        (0.05f64..0.95).prop_map(|epsilon| Potential::Homogeneous { epsilon }),
    ]
}

fn state() -> impl Strategy<Value = TrialState> {
    (any::<u64>(), 0usize..8).prop_map(|(seed, index)| {
        let mut rng = numerics::stream(seed, 9);
        states::random_state(&mut rng, index).unwrap()
    })
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// `∫₀^γ v''r²` by quadrature; the homogeneous family uses `r = γ s^(1/ε)`.
fn second_moment_by_quadrature(p: &Potential, gamma: f64) -> f64 {
    let spec = QuadratureSpec::with_tolerances(1e-15, 1e-12);
    match *p {
        Potential::Homogeneous { epsilon } => integrate_1d(
            |s: f64| {
                let r = gamma * s.powf(1.0 / epsilon);
                let dr = gamma / epsilon * s.powf(1.0 / epsilon - 1.0);
                if s == 0.0 { 0.0 } else { p.deriv2(r).unwrap() * r * r * dr }
            },
            Interval::finite(0.0, 1.0),
            &spec,
        ),
        _ => integrate_1d(|r: f64| p.deriv2(r).unwrap() * r * r, Interval::finite(0.0, gamma), &spec),
    }
    .unwrap()
    .value
}

/// `∫_γ^∞ v''r` by quadrature; the homogeneous family uses `r = γ s^(−1/(1−ε))`.
fn tail_moment_by_quadrature(p: &Potential, gamma: f64) -> f64 {
    let spec = QuadratureSpec::with_tolerances(1e-15, 1e-12);
    match *p {
        Potential::Homogeneous { epsilon } => {
            let k = 1.0 / (1.0 - epsilon);
            integrate_1d(
                |s: f64| {
                    if s == 0.0 {
                        return 0.0;
                    }
                    let r = gamma * s.powf(-k);
                    let dr = gamma * k * s.powf(-k - 1.0);
                    p.deriv2(r).unwrap() * r * dr
                },
                Interval::finite(0.0, 1.0),
                &spec,
            )
        }
        _ => integrate_1d(|r: f64| p.deriv2(r).unwrap() * r, Interval::semi_infinite(gamma), &spec),
    }
    .unwrap()
    .value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integration_is_linear(
        f in prop::collection::vec(-3.0f64..3.0, 1..8),
        g in prop::collection::vec(-3.0f64..3.0, 1..8),
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        lo in -2.0f64..0.0,
        width in 0.1f64..4.0,
    ) {
        let spec = QuadratureSpec::default();
        let dom = Interval::finite(lo, lo + width);
        let i_f = integrate_1d(|x| poly(&f, x), dom, &spec).unwrap();
        let i_g = integrate_1d(|x| poly(&g, x), dom, &spec).unwrap();
        let i_c = integrate_1d(|x| a * poly(&f, x) + b * poly(&g, x), dom, &spec).unwrap();
        let combined = i_c.error + a.abs() * i_f.error + b.abs() * i_g.error;
        let tol = spec.abs_tol + spec.rel_tol * (i_c.value.abs() + (a * i_f.value).abs() + (b * i_g.value).abs());
        prop_assert!((i_c.value - a * i_f.value - b * i_g.value).abs() <= combined + tol);
    }

    #[test]
    fn moments_match_quadrature(p in smooth_potential(), log_gamma in -3.0f64..3.0) {
        let gamma = 10f64.powf(log_gamma) * p.natural_scale();
        let m2 = p.second_moment(gamma).unwrap();
        let tail = p.first_moment_tail(gamma).unwrap();
        prop_assert!((m2 - second_moment_by_quadrature(&p, gamma)).abs() <= 1e-8 * m2.abs());
        prop_assert!((tail - tail_moment_by_quadrature(&p, gamma)).abs() <= 1e-8 * tail.abs());
    }

    #[test]
    fn moments_are_monotone(p in smooth_potential(), log_gamma in -3.0f64..3.0, factor in 1.0f64..10.0) {
        let g = 10f64.powf(log_gamma) * p.natural_scale();
        let (a, b) = (p.moments(g).unwrap(), p.moments(g * factor).unwrap());
        prop_assert!(b.second_moment >= a.second_moment * (1.0 - 1e-14));
        prop_assert!(b.first_moment_tail <= a.first_moment_tail * (1.0 + 1e-14));
    }

    #[test]
    fn smooth_potentials_are_convex(p in smooth_potential(), log_r in -4.0f64..4.0) {
        let r = 10f64.powf(log_r) * p.natural_scale();
        prop_assert!(p.deriv2(r).unwrap() >= 0.0);
        prop_assert!(p.deriv1(r).unwrap() <= 0.0);
    }

    #[test]
    fn regularized_coulomb_below_elementary_bound(beta in 0.01f64..10.0, r in 0.0f64..100.0) {
        let v = Potential::RegularizedCoulomb { beta }.value(r).unwrap();
        let bound = 2.0 / (r + (r * r + 4.0 * beta * beta / PI).sqrt());
        prop_assert!(v <= bound * (1.0 + 1e-13));
    }

    #[test]
    fn densities_are_nonnegative_with_mass_n(s in state()) {
        let d = s.density_profile().unwrap();
        prop_assert!(d.values().iter().all(|&v| v >= 0.0));
        prop_assert!((d.mass() - s.n_particles() as f64).abs() <= 1e-8 * s.n_particles() as f64);
    }

    #[test]
    fn maximal_function_dominates_and_is_homogeneous(
        values in prop::collection::vec(0.0f64..3.0, 3..60),
        c in 0.1f64..10.0,
    ) {
        let grid = Grid::new(-1.0, 0.05, values.len()).unwrap();
        prop_assume!(values.iter().any(|&v| v > 0.0));
        let d = DensityProfile::from_values(grid, values.clone()).unwrap();
        let m = states::maximal_function(&d);
        for (mv, v) in m.values().iter().zip(d.values()) {
            prop_assert!(*mv >= *v * (1.0 - 1e-12));
        }
        let scaled = DensityProfile::from_values(grid, values.iter().map(|v| c * v).collect()).unwrap();
        let ms = states::maximal_function(&scaled);
        for (a, b) in ms.values().iter().zip(m.values()) {
            prop_assert!((a - c * b).abs() <= 1e-12 * (c * b).abs().max(1e-300));
        }
    }

    #[test]
    fn square_integral_scales_with_dilation(s in state(), lambda in 0.1f64..10.0) {
        let d = s.density_profile().unwrap();
        let dl = d.dilated(lambda).unwrap();
        let (a, b) = (d.power_integral(2.0).unwrap(), dl.power_integral(2.0).unwrap());
        prop_assert!((b - lambda * a).abs() <= 1e-8 * lambda * a);
        let exact = s.dilated(lambda).unwrap().density_autocorrelation(0.0);
        let roundoff = 64.0 * f64::EPSILON * lambda * s.density_autocorrelation_gross(0.0);
        prop_assert!((exact - lambda * s.density_autocorrelation(0.0)).abs() <= 1e-12 * exact + roundoff);
    }

    #[test]
    fn direct_bound_dominates_maximal_bound(s in state(), sigma in prop::option::of(0.01f64..5.0)) {
        let p = sigma.map_or(Potential::Contact, |sigma| Potential::ApproxContact { sigma });
        let d = s.density_profile().unwrap();
        let cs = bounds::rhs_direct_cs(&d, &p).unwrap();
        let hs = bounds::rhs_maximal_direct(&d, &p).unwrap();
        prop_assert!(cs >= hs);
        prop_assert!((hs / cs - 16.0).abs() <= 1e-12);
    }

    #[test]
    fn energy_identity_and_positive_hartree(s in state(), p in smooth_potential()) {
        let e = energies::i_xc(&s, &p).unwrap();
        prop_assert!(e.hartree > 0.0);
        let scale = e.expectation_v.abs() + e.hartree.abs();
        prop_assert!((e.i_xc - (e.expectation_v - e.hartree)).abs() <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn energies_are_translation_invariant(s in state(), p in smooth_potential(), delta in -20.0f64..20.0) {
        prop_assume!(!matches!(s.family(), StateFamily::SoftCoulombGroundPair { .. }));
        let t = s.translated(delta).unwrap();
        let (a, b) = (energies::i_xc(&s, &p).unwrap(), energies::i_xc(&t, &p).unwrap());
        prop_assert!((a.expectation_v - b.expectation_v).abs() <= 1e-8 * a.expectation_v.abs());
        prop_assert!((a.hartree - b.hartree).abs() <= 1e-8 * a.hartree.abs());
    }

    #[test]
    fn reports_round_trip(lhs in -1e6f64..1e6, rhs in -1e6f64..1e6, id in "[a-z0-9_]{1,12}", proven: bool) {
        let r = BoundReport {
            state_id: id.clone(),
            bound_id: "log_density".into(),
            params: format!("note=\"{id}\", x"),
            potential: "convex_soft_coulomb(epsilon=1)".into(),
            proven,
            lhs,
            rhs,
            slack: lhs - rhs,
            tolerance: 1e-6,
            status: if lhs >= rhs { Status::Holds } else { Status::ViolatedBeyondTolerance },
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        report::write_reports(std::slice::from_ref(&r), report::Format::Jsonl, &path).unwrap();
        prop_assert_eq!(report::read_jsonl(&path).unwrap(), vec![report::to_record(&r).unwrap()]);
    }
}

#[test]
fn erfcx_sandwich_on_log_grid() {
    let mut xs = vec![0.0];
    xs.extend(numerics::log_space(1e-6, 50.0, 499));
    for x in xs {
        let (lo, v, hi) = (numerics::erfcx_lower_bound(x), numerics::erfcx(x), numerics::erfcx_upper_bound(x));
        assert!(lo < v, "lower bound fails at {x}");
        if x == 0.0 {
            assert!((hi - v).abs() <= 1e-12);
        } else {
            assert!(v < hi, "upper bound fails at {x}");
        }
    }
}

#[test]
fn erfcx_derivative_identity() {
    for x in numerics::lin_space(0.0, 10.0, 201) {
        let h = 1e-5 * (1.0 + x);
        let fd = (numerics::erfcx(x + h) - numerics::erfcx(x - h)) / (2.0 * h);
        let exact = 2.0 * x * numerics::erfcx(x) - 2.0 / PI.sqrt();
        assert!((fd - exact).abs() <= 1e-6 * exact.abs(), "x = {x}");
    }
}

#[test]
fn decay_of_coulomb_like_potentials() {
    for p in [Potential::ConvexSoftCoulomb { epsilon: 0.7 }, Potential::RegularizedCoulomb { beta: 0.7 }] {
        let mut prev = f64::INFINITY;
        for r in numerics::log_space(1e2, 1e8, 25) {
            let rv = r * p.value(r).unwrap();
            assert!(rv.is_finite() && (rv - 1.0).abs() < 0.05, "{p}: r v = {rv} at {r}");
            let rd = (r * p.deriv1(r).unwrap()).abs();
            assert!(rd <= prev * (1.0 + 1e-12));
            prev = rd;
        }
        assert!(prev < 1e-6);
    }
}

#[test]
fn antisymmetric_pairs_vanish_on_diagonal() {
    let mut rng = numerics::stream(17, 0);
    for index in (1..8).step_by(2) {
        let s = states::random_state(&mut rng, index).unwrap();
        if s.n_particles() != 2 {
            continue;
        }
        assert_eq!(s.symmetry(), Symmetry::Antisymmetric);
        for x in numerics::lin_space(-6.0, 6.0, 100) {
            assert!(s.amplitude(&[x, x]).unwrap().abs() <= 1e-12);
        }
    }
}

#[test]
fn expectation_is_symmetric_under_relabeling() {
    let p = Potential::RegularizedCoulomb { beta: 0.4 };
    let a = TrialState::new(
        2,
        Symmetry::Symmetric,
        StateFamily::GaussianProduct { centers: vec![-0.3, 1.2], width: 0.8 },
    )
    .unwrap();
    let b = TrialState::new(
        2,
        Symmetry::Symmetric,
        StateFamily::GaussianProduct { centers: vec![1.2, -0.3], width: 0.8 },
    )
    .unwrap();
    let (ea, eb) = (energies::expectation_v(&a, &p).unwrap(), energies::expectation_v(&b, &p).unwrap());
    assert!((ea.value - eb.value).abs() < 1e-10);
}

#[test]
fn cutoff_grid_maximum_dominates_infinite_cutoff() {
    let p = Potential::ApproxContact { sigma: 0.3 };
    for s in states::random_suite(8, 4).unwrap() {
        let d = s.density_profile().unwrap();
        let grid = bounds::cutoff_grid(0.3);
        let best = grid
            .iter()
            .map(|&g| bounds::rhs_moment_cutoff(&d, &p, g).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(best >= bounds::rhs_moment_cutoff(&d, &p, f64::INFINITY).unwrap());
    }
}

#[test]
fn contact_saturation_and_scaling() {
    for (sep, w) in [(0.5, 0.3), (2.0, 1.0), (4.0, 0.7)] {
        let s = TrialState::gaussian_pair(sep, w, Symmetry::Antisymmetric).unwrap();
        let r = bounds::verify("a", &s, &BoundSpec::new(BoundId::ContactDirect, Potential::Contact).unwrap()).unwrap();
        assert_eq!(r.status, Status::Holds);
        assert!(r.slack.abs() <= r.tolerance);
    }
    let s = TrialState::gaussian_pair(1.3, 0.6, Symmetry::Symmetric).unwrap();
    let base_lhs = energies::i_xc(&s, &Potential::Contact).unwrap().i_xc;
    let base_rhs = bounds::rhs_contact_direct(&s.density_profile().unwrap()).unwrap();
    for lambda in [0.5, 2.0] {
        let t = s.dilated(lambda).unwrap();
        let lhs = energies::i_xc(&t, &Potential::Contact).unwrap().i_xc;
        let rhs = bounds::rhs_contact_direct(&t.density_profile().unwrap()).unwrap();
        assert_relative_eq!(lhs, lambda * base_lhs, max_relative = 1e-10);
        assert_relative_eq!(rhs, lambda * base_rhs, max_relative = 1e-8);
    }
}

#[test]
fn search_is_deterministic_and_sound() {
    let problem = SearchProblem {
        potential: Potential::ConvexSoftCoulomb { epsilon: 1.0 },
        family: FamilyTemplate::GaussianPair { symmetry: Symmetry::Antisymmetric },
        budget: 300,
    };
    let a = explore::optimize(&problem, 11).unwrap();
    assert_eq!(a, explore::optimize(&problem, 11).unwrap());
    assert!(a.trace.windows(2).all(|w| w[0].ratio <= w[1].ratio));
    for point in &a.trace {
        assert!(explore::soundness_margin(&problem, &point.theta).unwrap() >= -1e-6);
    }
}

#[test]
fn hubbard_f_is_nonnegative_and_decreasing() {
    let ns = numerics::lin_space(0.0, 1.0, 200);
    let ks = numerics::lin_space(1.0, 2.0, 200);
    let mut min = f64::INFINITY;
    for &n in &ns {
        for &k in &ks {
            let f = hubbard::f_n(n, k);
            min = min.min(f);
            let h = 1e-6;
            let (a, b) = ((k - h).max(1.0), (k + h).min(2.0));
            let slope = (hubbard::f_n(n, b) - hubbard::f_n(n, a)) / (b - a);
            assert!(slope <= 1e-8, "df/dkappa = {slope} at n={n} kappa={k}");
        }
        let s = (PI * n / 2.0).sin();
        let at_one = 2.0 * s - (PI * n).sin();
        assert!((hubbard::f_n(n, 1.0) - at_one).abs() <= 1e-14 && at_one >= 0.0);
        assert_eq!(hubbard::f_n(n, 2.0), 0.0);
    }
    assert!(min >= -1e-12);
}

#[test]
fn hubbard_particle_hole_and_interaction_raise_energy() {
    for t in [0.5, 1.0, 2.0] {
        for u in [0.0, 0.7, 4.0] {
            for k in numerics::lin_space(1.0, 2.0, 11) {
                for n in numerics::lin_space(0.0, 2.0, 41) {
                    let e = |n: f64, u: f64, k: f64| hubbard::energy(&HubbardPoint::new(n, t, u, k).unwrap());
                    if n > 1.0 {
                        assert!((e(n, u, k) - e(2.0 - n, u, k) - u * (n - 1.0)).abs() <= 1e-12 * (1.0 + u));
                    }
                    if n <= 1.0 {
                        assert!(e(n, u, k) >= e(n, 0.0, 2.0) - 1e-12);
                    }
                }
            }
        }
    }
    let mut rng = numerics::stream(3, 0);
    for _ in 0..200 {
        let occ = OccupationVector::new((0..rng.gen_range(1..20)).map(|_| rng.gen_range(0.0..=2.0)).collect()).unwrap();
        let r = hubbard::verify_proposition(&occ, rng.gen_range(0.1..3.0), rng.gen_range(0.0..10.0), rng.gen_range(1.0..=2.0)).unwrap();
        assert!(r.holds && r.slack >= -1e-10);
    }
}
