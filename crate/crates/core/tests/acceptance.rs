//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 3, 10 and 11 are out of reach with the present methods (see the
//! README); they are still evaluated in full and reported as FAIL. The target
//! exits non-zero if any criterion's outcome differs from that expectation,
//! so a regression or an unexpected fix both show up.

use std::time::Instant as Clock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blowup_lab::energy::{local_energy, theta_scaling_integrals, u_app_energy};
use blowup_lab::evolver::{
    estimate_blowup_time, extract_lambda, fit_type2_rate, init, run, run_observed, EvolutionGrid,
    EvolverConfig, InitialData, RateModel, RunStatus,
};
use blowup_lab::grid::{uniform_grid, GridSpec, RadialFunction};
use blowup_lab::ground_state::{
    build_gamma, build_t1_unchecked, integral_lambda_q_squared, Corrector, GroundStateModel,
    GAMMA_ANCHOR,
};
use blowup_lab::profile::{log_lambda0, rates, BlowupProfile, Instant};
use blowup_lab::selfsimilar::{apply_az, build_basis, rho_inner_product_fn};
use blowup_lab::spectral::{gap_scaling_check, solve_dirichlet_eigen, solve_pm};

const EXPECTED_FAIL: [usize; 3] = [3, 10, 11];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Res = Result<Outcome, Box<dyn std::error::Error>>;

fn c1_integral() -> Res {
    let clock = Clock::now();
    let model = GroundStateModel::default();
    let v = integral_lambda_q_squared(&model)?.value;
    let secs = clock.elapsed().as_secs_f64();
    let rel = (v / (2.0 / 15.0) - 1.0).abs();
    Ok(outcome(
        rel <= 1e-8 && secs < 1.0,
        format!("integral {v:.15}, rel err {rel:.2e}, {secs:.3} s"),
    ))
}

fn c2_wronskian() -> Res {
    let model = GroundStateModel::default();
    let gamma = build_gamma(&model, GAMMA_ANCHOR, &GridSpec::default())?;
    let (mut worst, mut nodes) = (0.0f64, 0);
    for (r, w) in gamma.wronskian_samples(&model) {
        if (0.1..=50.0).contains(&r) {
            worst = worst.max((w - 1.0).abs());
            nodes += 1;
        }
    }
    Ok(outcome(
        worst <= 1e-6,
        format!("max |W - 1| = {worst:.2e} over {nodes} nodes"),
    ))
}

fn c3_corrector() -> Res {
    let model = GroundStateModel::default();
    let gamma = build_gamma(&model, GAMMA_ANCHOR, &GridSpec::default())?;
    let sol = build_t1_unchecked(&model, &gamma)?;
    let corr = Corrector::new(model, sol.t1.clone());
    let t50 = corr.eval(50.0).0;
    // |T₁ − 4/5|r² over [10, 50]; the r⁻² coefficient is about 58.
    let scaled = (0..=400)
        .map(|k| 10.0 + 0.1 * k as f64)
        .map(|r| (corr.eval(r).0 - 0.8).abs() * r * r)
        .fold(0.0f64, f64::max);
    let value_ok = (t50 - 0.8).abs() <= 1e-2;
    let bounded = scaled <= 100.0;
    let routes = sol.deviation <= 1e-4;
    Ok(outcome(
        value_ok && bounded && routes,
        format!(
            "T1(50) = {t50:.6} (|T1(50) - 0.8| = {:.4}, needs <= 0.01); max |T1 - 0.8| r^2 = {scaled:.2}; route deviation {:.2e}",
            (t50 - 0.8).abs(),
            sol.deviation
        ),
    ))
}

fn c4_selfsimilar() -> Res {
    let basis = build_basis()?;
    let exact = (0..3)
        .all(|i| apply_az(&basis.poly[i], basis.n) == basis.poly[i].scale((-(i as i64)).into()));
    let c1 = basis.c[1];
    let e1c = rho_inner_product_fn(|z| basis.e(1, z).powi(2), |z| basis.e(1, z), basis.n)?;
    let g1 = rho_inner_product_fn(|z| basis.grad_e1_sq(z), |z| basis.e(1, z), basis.n)?;
    let (m1, m2) = (
        (e1c / (8.0 * c1) - 1.0).abs(),
        (g1 / (4.0 * c1) - 1.0).abs(),
    );
    let alpha = basis.alpha;
    let ident = (alpha - 2.0 * alpha * alpha * g1).abs();
    Ok(outcome(
        exact && m1 <= 1e-8 && m2 <= 1e-8 && ident <= 1e-10,
        format!("A_z exact: {exact}; moment errs {m1:.1e}, {m2:.1e}; alpha identity {ident:.1e}"),
    ))
}

fn c5_spectrum() -> Res {
    let clock = Clock::now();
    let radii = [10.0, 20.0, 40.0];
    let mut pass = true;
    let mut parts = Vec::new();
    for &r in &radii {
        let e: Vec<_> = (1..=3)
            .map(|i| solve_dirichlet_eigen(r, i))
            .collect::<Result<_, _>>()?;
        let sturm =
            e.windows(2).all(|w| w[0].mu < w[1].mu) && e.iter().all(|x| x.zeros == x.index - 1);
        pass &= e[0].mu < 0.0 && e[0].residual <= 1e-6 && e[1].mu > 0.0 && sturm;
        parts.push(format!(
            "R={r}: mu1 {:.6} mu2 {:.3e} res {:.1e}",
            e[0].mu, e[1].mu, e[0].residual
        ));
    }
    let gap = gap_scaling_check(&radii)?;
    pass &= gap.pass && gap.min_scaled > 0.0;
    let secs = clock.elapsed().as_secs_f64();
    pass &= secs < 30.0;
    Ok(outcome(
        pass,
        format!(
            "{}; min mu2 R^4 {:.3}; {secs:.2} s",
            parts.join("; "),
            gap.min_scaled
        ),
    ))
}

fn c6_pm() -> Res {
    let p = solve_pm(20.0, 400.0)?;
    Ok(outcome(
        p.lower_bound > 0.0 && p.max_value <= 1.0,
        format!(
            "min p_M = {:.6}, max p_M = {:.6}",
            p.lower_bound, p.max_value
        ),
    ))
}

fn c7_theta_and_rate() -> Res {
    let p = BlowupProfile::standard(1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let z: f64 = rng.gen_range(1e-6..5.0);
        let tau: f64 = rng.gen_range(10.0..40.0);
        let at = Instant::from_tau(tau)?;
        let x = z * at.s.sqrt();
        let mu = p.theta_residual_mu(x, &at)?;
        let fd = p.theta_residual_fd(x, &at)?;
        worst = worst.max(((fd - mu) / mu).abs());
    }
    let mut rate = 0.0f64;
    for k in 0..=60 {
        let tau = 10.0 + 0.5 * k as f64;
        let s = (-tau).exp();
        let h = 1e-5 * s;
        let fd = (log_lambda0(s - h) - log_lambda0(s + h)) / (2.0 * h);
        let exact = -1.25 * (1.0 + 1.5 / tau) / s;
        rate = rate.max((fd / exact - 1.0).abs());
    }
    Ok(outcome(
        worst <= 1e-6 && rate <= 1e-6,
        format!("mu rel err {worst:.2e}, rate rel err {rate:.2e}"),
    ))
}

fn c8_profile() -> Res {
    let p = BlowupProfile::standard(1.0)?;
    let mut scaled = Vec::new();
    let mut signs = true;
    for tau in [15.0, 25.0, 35.0] {
        let at = Instant::from_tau(tau)?;
        let lam = rates(&at).lambda0;
        let rs = at.s.sqrt();
        let mut sup = 0.0f64;
        for k in 0..=400 {
            let x = lam * 1e-3 * 10f64.powf(k as f64 / 400.0 * 4.0);
            sup = sup.max(p.u_app(x, &at)?.abs());
        }
        for k in 0..=200 {
            sup = sup.max(p.u_app(rs * 5.0 * k as f64 / 200.0, &at)?.abs());
        }
        sup = sup.max(p.u_app(0.0, &at)?.abs());
        scaled.push(sup * at.s.powf(2.5) * tau.powf(-3.75));
        signs &= p.u_app(0.0, &at)? > 0.0 && p.u_app(rs, &at)? < 0.0;
    }
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().cloned().fold(0.0, f64::max);
    Ok(outcome(
        lo >= 0.5 && hi <= 2.0 && signs,
        format!(
            "sup|u_app| (T-t)^(5/2) tau^(-15/4) = {scaled:.6?} (band [0.5, 2]); signs ok: {signs}"
        ),
    ))
}

fn c9_evolver() -> Res {
    let clock = Clock::now();
    let cfg = EvolverConfig::default();
    let mut st = init(
        &InitialData::Constant(1.0),
        &EvolutionGrid::uniform(12.0, 600),
        &cfg,
    )?;
    let status = run(&mut st, &cfg, 2.0);
    let hist = st.history.make_contiguous().to_vec();
    let est = estimate_blowup_time(&hist)?;
    let traj = hist
        .iter()
        .filter(|h| 1.0 - h.t >= 1e-3)
        .map(|h| (h.u_center * (1.0 - h.t) - 1.0).abs())
        .fold(0.0f64, f64::max);

    let model = GroundStateModel::default();
    let radius = 40.0;
    let q = RadialFunction::from_fn(uniform_grid(0.0, radius, 40_001), |r| model.q(r))?;
    let qcfg = EvolverConfig {
        record_every: 100,
        ..Default::default()
    };
    let spec = EvolutionGrid {
        radius,
        h0: 0.02,
        ratio: 1.01,
        h_max: 0.5,
    };
    let mut qs = init(&InitialData::Sampled(q), &spec, &qcfg)?;
    let qstatus = run(&mut qs, &qcfg, 1.0);
    let drift = qs
        .grid
        .iter()
        .zip(&qs.u)
        .map(|(&r, &u)| (u - model.q(r)).abs())
        .fold(0.0f64, f64::max);
    let secs = clock.elapsed().as_secs_f64();
    let pass = matches!(status, RunStatus::BlownUp { .. })
        && (est.t_est - 1.0).abs() <= 1e-2
        && traj <= 1e-3
        && matches!(qstatus, RunStatus::Completed { .. })
        && drift <= 1e-2
        && secs < 60.0;
    Ok(outcome(
        pass,
        format!(
            "T_est = {:.9}; max |u(1-t) - 1| = {traj:.2e}; Q drift {drift:.2e} per unit time; {secs:.2} s",
            est.t_est
        ),
    ))
}

fn c10_tracking() -> Res {
    // The synthetic law must be recovered exactly.
    let synth: Vec<(f64, f64)> = (0..200)
        .map(|k| {
            let tau = 10.0 + 0.25 * k as f64;
            let s = (-tau).exp();
            (-s, (1.25 * s.ln() - 1.875 * tau.ln()).exp())
        })
        .collect();
    // Times are measured from the blowup time so that T − t keeps full precision.
    let sf = fit_type2_rate(&synth, 0.0, RateModel::Free)?;
    let synth_ok = (sf.a - 1.25).abs() <= 0.01 && (sf.b + 1.875).abs() <= 0.05;

    let tau0 = 12.0;
    let profile = BlowupProfile::standard(1.0)?;
    let at0 = Instant::from_tau(tau0)?;
    let s0 = at0.s;
    let lam0 = rates(&at0).lambda0;
    let rs = s0.sqrt();
    let spec = EvolutionGrid {
        radius: 4.0 * rs,
        h0: lam0 / 20.0,
        ratio: 1.03,
        h_max: rs / 20.0,
    };
    let step_cap = 200_000;
    let cfg = EvolverConfig {
        blowup_threshold: 1e3 / (lam0 * lam0),
        max_steps: step_cap,
        record_every: 1000,
        ..Default::default()
    };
    let mut st = init(
        &InitialData::Profile {
            profile: Box::new(profile.clone()),
            tau0,
        },
        &spec,
        &cfg,
    )?;
    let mut deviation = 0.0f64;
    // (elapsed, λ) pairs; remaining time is s0 − elapsed.
    let mut lambdas = Vec::new();
    let mut failure = None;
    let status = run_observed(&mut st, &cfg, f64::INFINITY, |st| {
        if st.step_count % 1000 != 0 {
            return true;
        }
        let at = match Instant::from_remaining(s0 - st.elapsed) {
            Ok(a) => a,
            Err(e) => {
                failure = Some(e.to_string());
                return false;
            }
        };
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for (&x, &u) in st.grid.iter().zip(&st.u) {
            let ua = profile.u_app(x, &at).unwrap_or(f64::NAN);
            num = num.max((u - ua).abs());
            den = den.max(ua.abs());
        }
        deviation = deviation.max(num / den);
        if let Ok(l) = extract_lambda(st) {
            lambdas.push((st.elapsed, l));
        }
        st.elapsed < 0.5 * s0
    });
    let coverage = st.elapsed / (0.5 * s0);
    let fit = fit_type2_rate(&lambdas, s0, RateModel::Free);
    let a = fit.as_ref().map(|f| f.a).unwrap_or(f64::NAN);
    let covered = coverage >= 1.0;
    let pass =
        synth_ok && covered && deviation < 0.1 && (1.0..=1.5).contains(&a) && failure.is_none();
    Ok(outcome(
        pass,
        format!(
            "synthetic fit a = {:.4}, b = {:.4} ({}); u_app run from tau0 = 12: {status:?} after {} steps, \
             covered {:.2e} of the halving of T-t, max rel deviation {deviation:.2e}, fitted a = {a:.3}",
            sf.a,
            sf.b,
            if synth_ok { "ok" } else { "bad" },
            st.step_count,
            coverage
        ),
    ))
}

fn sci(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.4e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn c11_energy() -> Res {
    let clock = Clock::now();
    let model = GroundStateModel::default();
    let lam = 0.1;
    let q = RadialFunction::from_fn_with_derivative(
        uniform_grid(0.0, 1.0, 4001),
        |r| model.q(r / lam) / (lam * lam),
        |r| model.q_prime(r / lam) / (lam * lam * lam),
    )?;
    let eq = local_energy(&q, 0.0)?.e_loc;

    let p = BlowupProfile::standard(1.0)?;
    let taus = [15.0, 20.0, 25.0, 30.0, 35.0];
    let e: Vec<f64> = taus
        .iter()
        .map(|&t| u_app_energy(&p, t).map(|r| r.e_loc))
        .collect::<Result<_, _>>()?;
    let decreasing = e.windows(2).all(|w| w[1] < w[0]);
    let negative = taus
        .iter()
        .zip(&e)
        .filter(|(t, _)| **t >= 25.0)
        .all(|(_, v)| *v < 0.0);

    let ac1 = p.alpha * p.basis.c[1];
    let sc: Vec<_> = [50.0, 100.0, 200.0]
        .iter()
        .map(|&t| theta_scaling_integrals(ac1, t))
        .collect::<Result<_, _>>()?;
    let band = |v: Vec<f64>| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(0.0, f64::max);
        (lo > 0.0 && hi / lo <= 2.0, hi / lo)
    };
    let (i3_ok, i3_spread) = band(sc.iter().map(|s| s.i3_over_tau3logtau).collect());
    let (ig_ok, ig_spread) = band(sc.iter().map(|s| s.igrad_over_tau2logtau).collect());
    let secs = clock.elapsed().as_secs_f64();
    let pass = eq > 0.0 && decreasing && negative && i3_ok && ig_ok && secs < 30.0;
    Ok(outcome(
        pass,
        format!(
            "E_loc(Q_0.1) = {eq:.2}; E_loc(u_app) = [{}] (decreasing {decreasing}, negative {negative}); \
             I3/(tau^3 log tau) spread {i3_spread:.3}; Igrad/(tau^2 log tau) = [{}] spread {ig_spread:.3} \
             (needs <= 2); {secs:.2} s",
            sci(&e),
            sci(&sc.iter().map(|s| s.igrad_over_tau2logtau).collect::<Vec<_>>()),
        ),
    ))
}

fn main() {
    let criteria: [(usize, fn() -> Res); 11] = [
        (1, c1_integral),
        (2, c2_wronskian),
        (3, c3_corrector),
        (4, c4_selfsimilar),
        (5, c5_spectrum),
        (6, c6_pm),
        (7, c7_theta_and_rate),
        (8, c8_profile),
        (9, c9_evolver),
        (10, c10_tracking),
        (11, c11_energy),
    ];
    let mut surprises = Vec::new();
    for (n, f) in criteria {
        let o = f().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        println!(
            "criterion {n:2}: {} | {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if o.pass == EXPECTED_FAIL.contains(&n) {
            surprises.push(n);
        }
    }
    if !surprises.is_empty() {
        eprintln!("criteria with unexpected outcome: {surprises:?}");
        std::process::exit(1);
    }
    println!("acceptance: outcomes as expected (known failures: {EXPECTED_FAIL:?})");
}
