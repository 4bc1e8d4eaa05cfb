//! The identity suite behind `blowup-lab verify`.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::grid::GridSpec;
use crate::ground_state::{
    build_gamma, build_t1_unchecked, integral_lambda_q_squared, reduced_integral_exact, Corrector,
    GroundStateModel, GAMMA_ANCHOR, T1_ROUTE_TOLERANCE,
};
use crate::profile::{log_lambda0, BlowupProfile, Instant};
use crate::selfsimilar::{apply_az, build_basis, rho_inner_product_fn};
use crate::spectral::solve_dirichlet_eigen;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Observed deviation (or value, for sign checks).
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Check {
    fn within(name: &str, deviation: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            pass: deviation <= tolerance,
            value: deviation,
            tolerance,
            detail,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

impl VerifyReport {
    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySettings {
    pub gamma_grid: GridSpec,
    /// Multiplies α before the α-dependent checks.
    pub alpha_scale: f64,
    /// Relative tolerance of the μ and rate checks.
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
    pub radii: Vec<f64>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            gamma_grid: GridSpec::default(),
            alpha_scale: 1.0,
            tol: 1e-6,
            samples: 100,
            seed: 7,
            radii: vec![10.0, 20.0, 40.0],
        }
    }
}

pub fn run_suite(cfg: &VerifySettings) -> Result<VerifyReport> {
    let model = GroundStateModel::default();
    let mut checks = Vec::new();

    let integral = integral_lambda_q_squared(&model)?;
    let exact = reduced_integral_exact();
    let two_fifteenths = 2.0 / 15.0;
    let dev = (integral.value / two_fifteenths - 1.0).abs();
    checks.push(Check {
        pass: dev <= 1e-8 && exact == Rational64::new(2, 15),
        ..Check::within(
            "lambda_q_integral",
            dev,
            1e-8,
            format!("quadrature {} exact {exact}", integral.value),
        )
    });

    let gamma = build_gamma(&model, GAMMA_ANCHOR, &cfg.gamma_grid)?;
    let wr = gamma
        .wronskian_samples(&model)
        .into_iter()
        .filter(|(r, _)| (0.1..=50.0).contains(r))
        .fold(0.0f64, |m, (_, w)| m.max((w - 1.0).abs()));
    checks.push(Check::within(
        "wronskian",
        wr,
        1e-6,
        "max |W − 1| on [0.1, 50]".into(),
    ));

    let t1 = build_t1_unchecked(&model, &gamma)?;
    checks.push(Check::within(
        "t1_routes",
        t1.deviation,
        T1_ROUTE_TOLERANCE,
        "variation of parameters vs boundary-value solve".into(),
    ));
    let corrector = Corrector::new(model, t1.t1);
    let lim = corrector.limit();
    checks.push(Check::within(
        "t1_limit",
        (lim - 0.8).abs(),
        1e-4,
        format!("extrapolated T1(∞) = {lim}"),
    ));

    let mut basis = build_basis()?;
    let az_ok = basis
        .poly
        .iter()
        .enumerate()
        .all(|(i, p)| apply_az(p, basis.n) == p.scale(Rational64::from(-(i as i64))));
    checks.push(Check {
        name: "az_eigenfunctions".into(),
        pass: az_ok,
        value: if az_ok { 0.0 } else { 1.0 },
        tolerance: 0.0,
        detail: "A_z e_i = −i e_i in exact arithmetic".into(),
    });
    let c1 = basis.c[1];
    let e1c = rho_inner_product_fn(|z| basis.e(1, z).powi(2), |z| basis.e(1, z), basis.n)?;
    let g1 = rho_inner_product_fn(|z| basis.grad_e1_sq(z), |z| basis.e(1, z), basis.n)?;
    checks.push(Check::within(
        "e1_cubed_moment",
        (e1c / (8.0 * c1) - 1.0).abs(),
        1e-8,
        format!("(e1², e1) = {e1c}"),
    ));
    checks.push(Check::within(
        "grad_e1_moment",
        (g1 / (4.0 * c1) - 1.0).abs(),
        1e-8,
        format!("(|∇e1|², e1) = {g1}"),
    ));

    basis.alpha *= cfg.alpha_scale;
    let alpha = basis.alpha;
    let ident = (alpha - 2.0 * alpha * alpha * g1).abs();
    checks.push(Check::within(
        "alpha_identity",
        ident,
        1e-10,
        format!("α = {alpha}"),
    ));

    let profile = BlowupProfile::new(1.0, basis, corrector)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = 0.0f64;
    for _ in 0..cfg.samples {
        let z: f64 = rng.gen_range(0.0..5.0);
        let tau: f64 = rng.gen_range(10.0..40.0);
        let at = Instant::from_tau(tau)?;
        let x = z.max(1e-9) * at.s.sqrt();
        let mu = profile.theta_residual_mu(x, &at)?;
        let fd = profile.theta_residual_fd(x, &at)?;
        worst = worst.max(((fd - mu) / mu).abs());
    }
    checks.push(Check::within(
        "theta_residual",
        worst,
        cfg.tol,
        format!("{} samples, seed {}", cfg.samples, cfg.seed),
    ));

    let mut rate = 0.0f64;
    for k in 0..=30 {
        let tau = 10.0 + k as f64;
        let s = (-tau).exp();
        let h = 1e-5 * s;
        let fd = (log_lambda0(s - h) - log_lambda0(s + h)) / (2.0 * h);
        let exact = -1.25 * (1.0 + 1.5 / tau) / s;
        rate = rate.max((fd / exact - 1.0).abs());
    }
    checks.push(Check::within(
        "rate_identity",
        rate,
        cfg.tol,
        "d log λ0/dt on τ ∈ [10, 40]".into(),
    ));

    let mut barrier = 0.0f64;
    for tau in [15.0, 25.0, 35.0] {
        let at = Instant::from_tau(tau)?;
        for z in [0.5, 2.0, 4.0, 8.0] {
            let x = z * at.s.sqrt();
            let a = profile.barrier_mu_bar(x, &at);
            let b = profile.barrier_mu_bar_factored(x, &at);
            barrier = barrier.max((a - b).abs() / a.abs());
        }
    }
    checks.push(Check::within(
        "barrier_identity",
        barrier,
        1e-10,
        "factored and unfactored barrier residual".into(),
    ));

    let mut worst_mu1 = f64::NEG_INFINITY;
    for &r in &cfg.radii {
        worst_mu1 = worst_mu1.max(solve_dirichlet_eigen(r, 1)?.mu);
    }
    checks.push(Check {
        name: "mu1_negative".into(),
        pass: worst_mu1 < 0.0,
        value: worst_mu1,
        tolerance: 0.0,
        detail: format!("largest μ1 over R = {:?}", cfg.radii),
    });

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { checks, all_pass })
}
