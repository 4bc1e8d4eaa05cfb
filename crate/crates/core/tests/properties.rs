use std::sync::OnceLock;

use num_rational::Rational64;
use proptest::prelude::*;

use blowup_lab::evolver::{init, run, EvolutionGrid, EvolverConfig, InitialData, RunStatus};
use blowup_lab::grid::{uniform_grid, GridSpec, RadialFunction};
use blowup_lab::ground_state::{
    build_gamma, solve_inhomogeneous, GroundStateModel, SecondSolution, GAMMA_ANCHOR,
};
use blowup_lab::profile::{BlowupProfile, Instant};
use blowup_lab::selfsimilar::{apply_az, build_basis, SPoly};

fn gamma() -> &'static (GroundStateModel, SecondSolution) {
    static G: OnceLock<(GroundStateModel, SecondSolution)> = OnceLock::new();
    G.get_or_init(|| {
        let model = GroundStateModel::default();
        let g = build_gamma(&model, GAMMA_ANCHOR, &GridSpec::default()).unwrap();
        (model, g)
    })
}

fn profile() -> &'static BlowupProfile {
    static P: OnceLock<BlowupProfile> = OnceLock::new();
    P.get_or_init(|| BlowupProfile::standard(1.0).unwrap())
}

fn source(k: f64) -> RadialFunction {
    let grid = gamma().1.representation.grid().to_vec();
    RadialFunction::from_fn(grid, |r| (1.0 + r * r / k).powi(-4)).unwrap()
}

fn spoly() -> impl Strategy<Value = SPoly> {
    prop::collection::vec((-50i64..50, 1i64..20), 0..6)
        .prop_map(|c| SPoly(c.into_iter().map(|(p, q)| Rational64::new(p, q)).collect()))
}

#[test]
fn gram_matrix_is_identity() {
    let b = build_basis().unwrap();
    for g in [b.gram().unwrap(), b.gram_quadrature().unwrap()] {
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-8, "G[{i}][{j}] = {v}");
            }
        }
    }
}

#[test]
fn constant_data_converges_under_refinement() {
    let err = |cells: usize| {
        let cfg = EvolverConfig::default();
        let mut st = init(
            &InitialData::Constant(1.0),
            &EvolutionGrid::uniform(12.0, cells),
            &cfg,
        )
        .unwrap();
        run(&mut st, &cfg, 0.99);
        st.history
            .iter()
            .map(|h| (h.u_center - 1.0 / (1.0 - h.t)).abs() * (1.0 - h.t))
            .fold(0.0f64, f64::max)
    };
    let (coarse, fine) = (err(300), err(600));
    assert!(coarse / fine >= 3.0, "coarse {coarse:e} fine {fine:e}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn inhomogeneous_solve_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, k1 in 1.0f64..20.0, k2 in 1.0f64..20.0) {
        let (model, gam) = gamma();
        let (g1, g2) = (source(k1), source(k2));
        let t1 = solve_inhomogeneous(model, gam, &g1).unwrap();
        let t2 = solve_inhomogeneous(model, gam, &g2).unwrap();
        let t = solve_inhomogeneous(model, gam, &g1.combine(a, &g2, b).unwrap()).unwrap();
        let scale = t1.max_abs().max(t2.max_abs()) * (a.abs() + b.abs() + 1.0);
        for ((x, y), z) in t.values().iter().zip(t1.values()).zip(t2.values()) {
            prop_assert!((x - (a * y + b * z)).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn az_is_linear(f in spoly(), g in spoly(), a in -9i64..9, b in 1i64..9) {
        let k = Rational64::new(a, b);
        let lhs = apply_az(&(&f.scale(k) + &g), 6);
        let rhs = &apply_az(&f, 6).scale(k) + &apply_az(&g, 6);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn cutoffs_partition_unity(z in 0.0f64..30.0, tau in 10.0f64..45.0) {
        let at = Instant::from_tau(tau).unwrap();
        let c = profile().cutoffs(z * at.s.sqrt(), &at).unwrap();
        prop_assert_eq!(c.chi1 + c.chi2, 1.0);
        prop_assert!((0.0..=1.0).contains(&c.chi1));
    }

    #[test]
    fn closed_form_mu_matches_differences(z in 1e-3f64..5.0, tau in 10.0f64..40.0) {
        let at = Instant::from_tau(tau).unwrap();
        let x = z * at.s.sqrt();
        let mu = profile().theta_residual_mu(x, &at).unwrap();
        let fd = profile().theta_residual_fd(x, &at).unwrap();
        prop_assert!(((fd - mu) / mu).abs() <= 1e-6, "mu {} fd {}", mu, fd);
    }

    #[test]
    fn u_app_sign_structure(tau in 10.0f64..45.0) {
        let at = Instant::from_tau(tau).unwrap();
        prop_assert!(profile().u_app(0.0, &at).unwrap() > 0.0);
        prop_assert!(profile().u_app(at.s.sqrt(), &at).unwrap() < 0.0);
    }

    #[test]
    fn comparison_principle(a in 0.0f64..2.0, gap in 0.0f64..1.0, width in 0.5f64..3.0) {
        let spec = EvolutionGrid::uniform(6.0, 120);
        let grid = uniform_grid(0.0, 6.0, 601);
        let bump = |amp: f64| RadialFunction::from_fn(grid.clone(), move |r| amp * (-(r / width).powi(2)).exp()).unwrap();
        let cfg = EvolverConfig::default();
        let mut lo = init(&InitialData::Sampled(bump(a)), &spec, &cfg).unwrap();
        let mut hi = init(&InitialData::Sampled(bump(a + gap)), &spec, &cfg).unwrap();
        for _ in 0..400 {
            let dt = lo.stable_dt(&cfg).min(hi.stable_dt(&cfg));
            lo.step_with_dt(dt);
            hi.step_with_dt(dt);
            for (u, v) in lo.u.iter().zip(&hi.u) {
                prop_assert!(u <= v, "order lost at t = {}", lo.t);
            }
        }
    }

    #[test]
    fn runs_end_in_a_known_state(a in -3.0f64..3.0) {
        let cfg = EvolverConfig { max_steps: 200_000, ..Default::default() };
        let scale = if a.abs() > 0.0 { a.abs().sqrt().recip().min(1.0) } else { 1.0 };
        let mut st = init(&InitialData::Constant(a), &EvolutionGrid::uniform(12.0 * scale, 200), &cfg).unwrap();
        let status = run(&mut st, &cfg, 1.0);
        let done = matches!(status, RunStatus::Completed { .. } | RunStatus::BlownUp { .. } | RunStatus::Unstable { .. });
        prop_assert!(done, "{:?}", status);
        prop_assert!(st.history.iter().all(|h| h.u_center.is_finite() && h.sup_abs.is_finite() && h.dt.is_finite()));
    }
}
