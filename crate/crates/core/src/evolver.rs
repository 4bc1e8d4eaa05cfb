//! Method-of-lines solver for radial solutions of u_t = Δu + |u|u in ℝ⁶,
//! with blowup detection, λ(t) extraction and rate fitting.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::RadialFunction;
use crate::numerics::fd::{fornberg, stencil_start};
use crate::profile::{BlowupProfile, Instant};

const DIM: f64 = 6.0;

/// Evolution grid: r₀ = 0, spacing h₀ growing geometrically by `ratio`
/// up to `h_max`, last node exactly at `radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolutionGrid {
    pub radius: f64,
    pub h0: f64,
    pub ratio: f64,
    pub h_max: f64,
}

impl EvolutionGrid {
    pub fn uniform(radius: f64, cells: usize) -> Self {
        let h = radius / cells as f64;
        Self {
            radius,
            h0: h,
            ratio: 1.0,
            h_max: h,
        }
    }

    pub fn nodes(&self) -> Result<Vec<f64>> {
        if !(self.radius > 0.0 && self.h0 > 0.0 && self.ratio >= 1.0 && self.h_max >= self.h0) {
            return Err(invalid(format!("bad evolution grid {self:?}")));
        }
        let mut r = vec![0.0];
        let mut h = self.h0;
        while r[r.len() - 1] + 0.5 * h < self.radius {
            r.push(r[r.len() - 1] + h);
            h = (h * self.ratio).min(self.h_max);
            if r.len() > 5_000_000 {
                return Err(invalid("evolution grid exceeds 5e6 nodes"));
            }
        }
        let last = r.len() - 1;
        r[last] = self.radius;
        if r.len() < 4 {
            return Err(invalid("evolution grid needs at least four nodes"));
        }
        Ok(r)
    }
}

/// Initial data.
#[derive(Debug, Clone)]
pub enum InitialData {
    Constant(f64),
    /// u_app at τ₀ of the given profile; the evolution starts at t = T − e^{−τ₀}.
    Profile {
        profile: Box<BlowupProfile>,
        tau0: f64,
    },
    Sampled(RadialFunction),
}

/// Conservative finite-volume radial Laplacian u'' + (5/r)u' with the
/// Dirichlet node at the end left out of the update.
#[derive(Debug, Clone)]
pub struct RadialLaplacian {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl RadialLaplacian {
    pub fn new(r: &[f64]) -> Self {
        let n = r.len();
        let half: Vec<f64> = r.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let flux: Vec<f64> = (0..n - 1)
            .map(|i| half[i].powi(5) / (r[i + 1] - r[i]))
            .collect();
        let (mut lower, mut diag, mut upper) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in 0..n - 1 {
            let inner = if i == 0 { 0.0 } else { half[i - 1].powi(6) };
            let vol = (half[i].powi(6) - inner) / DIM;
            upper[i] = flux[i] / vol;
            diag[i] = -flux[i] / vol;
            if i > 0 {
                lower[i] = flux[i - 1] / vol;
                diag[i] -= flux[i - 1] / vol;
            }
        }
        Self { lower, diag, upper }
    }

    pub fn max_diag(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let n = u.len();
        for i in 0..n - 1 {
            let left = if i > 0 { self.lower[i] * u[i - 1] } else { 0.0 };
            out[i] = left + self.diag[i] * u[i] + self.upper[i] * u[i + 1];
        }
        out[n - 1] = 0.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistoryRow {
    pub step: u64,
    pub t: f64,
    pub dt: f64,
    pub u_center: f64,
    pub sup_abs: f64,
    pub min_u: f64,
}

impl HistoryRow {
    /// u(0)^{-1/2} when the centre is positive.
    pub fn lambda_est(&self) -> Option<f64> {
        (self.u_center > 0.0).then(|| self.u_center.powf(-0.5))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolverConfig {
    /// dt ≤ diffusion_factor / max|diag(Δ_h)|.
    pub diffusion_factor: f64,
    /// dt ≤ reaction_factor / sup|u|.
    pub reaction_factor: f64,
    /// sup|u| above this ends the run as blown up.
    pub blowup_threshold: f64,
    pub max_steps: u64,
    pub record_every: u64,
    pub max_history: usize,
    /// Relative interpolation error allowed when sampling initial data.
    pub resolve_tolerance: f64,
    /// One-shot refinement once λ falls below 10 h₀.
    pub auto_regrid: bool,
}

impl Default for EvolverConfig {
    fn default() -> Self {
        Self {
            diffusion_factor: 0.9,
            reaction_factor: 0.1,
            blowup_threshold: 1e12,
            max_steps: 10_000_000,
            record_every: 1,
            max_history: 1_000_000,
            resolve_tolerance: 1e-3,
            auto_regrid: false,
        }
    }
}

impl EvolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion_factor > 0.0 && self.diffusion_factor <= 1.0) {
            return Err(invalid("diffusion_factor must lie in (0, 1]"));
        }
        if !(self.reaction_factor > 0.0)
            || !(self.blowup_threshold > 0.0)
            || !(self.resolve_tolerance > 0.0)
        {
            return Err(invalid("evolver factors and thresholds must be positive"));
        }
        if self.record_every == 0 || self.max_history == 0 {
            return Err(invalid("history settings must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub t: f64,
    /// Time advanced since init. Unlike t it keeps full precision when the
    /// steps are far below the spacing of floats near t.
    pub elapsed: f64,
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub dt: f64,
    pub step_count: u64,
    pub history: VecDeque<HistoryRow>,
    pub spec: EvolutionGrid,
    op: RadialLaplacian,
    regridded: bool,
}

fn interpolation_defect(r: &[f64], u: &[f64], f: &dyn Fn(f64) -> f64) -> f64 {
    let sup = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if sup == 0.0 {
        return 0.0;
    }
    let n = r.len();
    let mut worst = 0.0f64;
    for i in 0..n - 1 {
        let mid = 0.5 * (r[i] + r[i + 1]);
        let s = stencil_start(i + 1, n, 4);
        let w = fornberg(mid, &r[s..s + 4], 0);
        let approx: f64 = w[0].iter().zip(&u[s..s + 4]).map(|(a, b)| a * b).sum();
        worst = worst.max((approx - f(mid)).abs());
    }
    worst / sup
}

fn summary_row(step: u64, t: f64, dt: f64, u: &[f64]) -> HistoryRow {
    let sup_abs = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min_u = u.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    HistoryRow {
        step,
        t,
        dt,
        u_center: u[0],
        sup_abs,
        min_u,
    }
}

/// Samples the data on the evolution grid; Dirichlet at the last node.
pub fn init(
    data: &InitialData,
    spec: &EvolutionGrid,
    config: &EvolverConfig,
) -> Result<EvolutionState> {
    config.validate()?;
    let r = spec.nodes()?;
    let (t0, f): (f64, Box<dyn Fn(f64) -> f64 + '_>) = match data {
        InitialData::Constant(a) => {
            if !a.is_finite() {
                return Err(invalid("constant data must be finite"));
            }
            let a = *a;
            (0.0, Box::new(move |_| a))
        }
        InitialData::Profile { profile, tau0 } => {
            let at = Instant::from_tau(*tau0)?;
            profile.u_app(0.0, &at)?;
            (
                profile.t_blow - at.s,
                Box::new(move |x| profile.u_app(x, &at).unwrap_or(f64::NAN)),
            )
        }
        InitialData::Sampled(g) => {
            if g.r_min() > 0.0 || g.r_max() < spec.radius {
                return Err(invalid(format!(
                    "sampled data covers [{}, {}] but the domain is [0, {}]",
                    g.r_min(),
                    g.r_max(),
                    spec.radius
                )));
            }
            (0.0, Box::new(move |x| g.eval(x).unwrap_or(f64::NAN)))
        }
    };
    let mut u: Vec<f64> = r.iter().map(|&x| f(x)).collect();
    if let Some(i) = u.iter().position(|v| !v.is_finite()) {
        return Err(invalid(format!("initial data not finite at r = {}", r[i])));
    }
    let defect = interpolation_defect(&r, &u, &*f);
    if !(defect <= config.resolve_tolerance) {
        return Err(Error::NotResolved(defect));
    }
    let n = u.len();
    u[n - 1] = 0.0;
    let op = RadialLaplacian::new(&r);
    let mut history = VecDeque::new();
    history.push_back(summary_row(0, t0, 0.0, &u));
    Ok(EvolutionState {
        t: t0,
        elapsed: 0.0,
        grid: r,
        u,
        dt: 0.0,
        step_count: 0,
        history,
        spec: *spec,
        op,
        regridded: false,
    })
}

impl EvolutionState {
    pub fn sup_abs(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest step allowed by both the diffusive and the reaction bound.
    pub fn stable_dt(&self, config: &EvolverConfig) -> f64 {
        let diff = config.diffusion_factor / self.op.max_diag();
        let sup = self.sup_abs();
        if sup > 0.0 {
            diff.min(config.reaction_factor / sup)
        } else {
            diff
        }
    }

    pub fn operator(&self) -> &RadialLaplacian {
        &self.op
    }

    fn rhs(&self, u: &[f64], out: &mut [f64]) {
        self.op.apply(u, out);
        let n = u.len();
        for i in 0..n - 1 {
            out[i] += u[i].abs() * u[i];
        }
    }

    /// One SSP-RK3 step of size dt. Returns the new values without
    /// committing them.
    pub fn trial_step(&self, dt: f64) -> Vec<f64> {
        let n = self.u.len();
        let u = &self.u;
        let mut k = vec![0.0; n];
        self.rhs(u, &mut k);
        let u1: Vec<f64> = (0..n).map(|i| u[i] + dt * k[i]).collect();
        self.rhs(&u1, &mut k);
        let u2: Vec<f64> = (0..n)
            .map(|i| 0.75 * u[i] + 0.25 * (u1[i] + dt * k[i]))
            .collect();
        self.rhs(&u2, &mut k);
        (0..n)
            .map(|i| u[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * k[i]))
            .collect()
    }

    /// Advances by exactly dt (the caller is responsible for stability).
    pub fn step_with_dt(&mut self, dt: f64) {
        self.u = self.trial_step(dt);
        self.t += dt;
        self.elapsed += dt;
        self.dt = dt;
        self.step_count += 1;
    }

    /// Interpolates the solution onto a grid with core spacing h₀.
    pub fn regrid(&mut self, h0: f64) -> Result<()> {
        let spec = EvolutionGrid {
            h0,
            h_max: self.spec.h_max.max(h0),
            ..self.spec
        };
        let r = spec.nodes()?;
        let old = RadialFunction::new(self.grid.clone(), self.u.clone())?;
        let mut u = r.iter().map(|&x| old.eval(x)).collect::<Result<Vec<_>>>()?;
        let n = u.len();
        u[n - 1] = 0.0;
        self.op = RadialLaplacian::new(&r);
        self.grid = r;
        self.u = u;
        self.spec = spec;
        self.regridded = true;
        Ok(())
    }

    pub fn solution(&self) -> Result<RadialFunction> {
        RadialFunction::new(self.grid.clone(), self.u.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StepOutcome {
    Advanced,
    BlownUp { t: f64 },
    Unstable { t: f64 },
}

/// Takes one adaptive step. On overflow, non-finite values or a jump that
/// the reaction bound cannot produce, the state is left at the previous step.
pub fn step(state: &mut EvolutionState, config: &EvolverConfig) -> StepOutcome {
    let dt = state.stable_dt(config);
    let sup_old = state.sup_abs();
    let next = state.trial_step(dt);
    let sup_new = next.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !sup_new.is_finite()
        || next.iter().any(|v| !v.is_finite())
        || sup_new > config.blowup_threshold
    {
        return StepOutcome::BlownUp { t: state.t };
    }
    // Within one step the reaction can raise sup|u| by about reaction_factor
    // and diffusion cannot raise it at all.
    if sup_old > 0.0 && sup_new > sup_old * (1.0 + 10.0 * config.reaction_factor.max(0.05)) {
        return StepOutcome::Unstable { t: state.t };
    }
    state.u = next;
    state.t += dt;
    state.elapsed += dt;
    state.dt = dt;
    state.step_count += 1;
    if state.step_count.is_multiple_of(config.record_every) {
        if state.history.len() == config.max_history {
            state.history.pop_front();
        }
        state
            .history
            .push_back(summary_row(state.step_count, state.t, dt, &state.u));
    }
    StepOutcome::Advanced
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed { t: f64 },
    BlownUp { t: f64 },
    Unstable { t: f64 },
    StepLimit { t: f64 },
}

/// Steps until t_end, blowup, instability or the step limit. The observer
/// sees the state after every step and may stop the run by returning false.
pub fn run_observed(
    state: &mut EvolutionState,
    config: &EvolverConfig,
    t_end: f64,
    mut observe: impl FnMut(&EvolutionState) -> bool,
) -> RunStatus {
    let start = state.step_count;
    loop {
        if state.t >= t_end {
            return RunStatus::Completed { t: state.t };
        }
        if state.step_count - start >= config.max_steps {
            return RunStatus::StepLimit { t: state.t };
        }
        if config.auto_regrid && !state.regridded && state.u[0] > 0.0 {
            let lambda = state.u[0].powf(-0.5);
            if lambda < 10.0 * state.spec.h0 && state.regrid(lambda / 20.0).is_err() {
                return RunStatus::Unstable { t: state.t };
            }
        }
        let remaining = t_end - state.t;
        let outcome = if state.stable_dt(config) >= remaining {
            state.step_with_dt(remaining);
            state.t = t_end;
            if state.history.len() == config.max_history {
                state.history.pop_front();
            }
            state
                .history
                .push_back(summary_row(state.step_count, state.t, remaining, &state.u));
            StepOutcome::Advanced
        } else {
            step(state, config)
        };
        match outcome {
            StepOutcome::Advanced => {}
            StepOutcome::BlownUp { t } => return RunStatus::BlownUp { t },
            StepOutcome::Unstable { t } => return RunStatus::Unstable { t },
        }
        if !observe(state) {
            return RunStatus::Completed { t: state.t };
        }
    }
}

pub fn run(state: &mut EvolutionState, config: &EvolverConfig, t_end: f64) -> RunStatus {
    run_observed(state, config, t_end, |_| true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowupEstimate {
    #[serde(rename = "T_est")]
    pub t_est: f64,
    /// One standard error of the extrapolated zero crossing.
    pub width: f64,
    pub samples: usize,
}

/// Fits 1/sup|u| linearly in t over the later half of the history (at
/// least 20 rows) and extrapolates its zero.
pub fn estimate_blowup_time(history: &[HistoryRow]) -> Result<BlowupEstimate> {
    if history.len() < 20 {
        return Err(Error::Fit(format!(
            "{} history rows, need at least 20",
            history.len()
        )));
    }
    let take = (history.len() / 2).max(20);
    let rows = &history[history.len() - take..];
    if rows.windows(2).any(|w| !(w[1].sup_abs > w[0].sup_abs)) || rows[0].sup_abs <= 0.0 {
        return Err(Error::Fit("sup-norm is not growing".into()));
    }
    let n = rows.len() as f64;
    let (mt, my) = rows.iter().fold((0.0, 0.0), |(a, b), r| {
        (a + r.t / n, b + 1.0 / r.sup_abs / n)
    });
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for r in rows {
        sxx += (r.t - mt).powi(2);
        sxy += (r.t - mt) * (1.0 / r.sup_abs - my);
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return Err(Error::Fit("1/sup|u| is not decreasing".into()));
    }
    let icept = my - slope * mt;
    let rss: f64 = rows
        .iter()
        .map(|r| (1.0 / r.sup_abs - icept - slope * r.t).powi(2))
        .sum();
    let sigma2 = rss / (n - 2.0);
    let var_slope = sigma2 / sxx;
    let var_icept = sigma2 * (1.0 / n + mt * mt / sxx);
    let cov = -mt * sigma2 / sxx;
    let t_est = -icept / slope;
    // Delta method for −a/b.
    let (ga, gb) = (-1.0 / slope, icept / (slope * slope));
    let var = ga * ga * var_icept + gb * gb * var_slope + 2.0 * ga * gb * cov;
    Ok(BlowupEstimate {
        t_est,
        width: var.max(0.0).sqrt(),
        samples: rows.len(),
    })
}

/// λ(t) = u(0, t)^{-1/2}.
pub fn extract_lambda(state: &EvolutionState) -> Result<f64> {
    let c = state.u[0];
    if !(c > 0.0) {
        return Err(invalid(format!(
            "centre value {c} is not positive: inner bubble lost"
        )));
    }
    Ok(c.powf(-0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RateModel {
    /// Fit a, b and c.
    Free,
    /// Hold b fixed and fit a and c.
    FixedLog(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    #[serde(rename = "T_est")]
    pub t_est: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Covariance of the fitted parameters, in the order (a, b, c) or (a, c).
    pub covariance: Vec<Vec<f64>>,
    pub residual: f64,
    pub window: (f64, f64),
    /// Decades spanned by T_est − t.
    pub decades: f64,
    /// False when fewer than two decades are covered.
    pub reliable: bool,
}

/// Least squares for log λ = a log(T−t) + b log|log(T−t)| + c.
pub fn fit_type2_rate(trajectory: &[(f64, f64)], t_est: f64, model: RateModel) -> Result<RateFit> {
    let mut rows = Vec::with_capacity(trajectory.len());
    for &(t, lam) in trajectory {
        let s = t_est - t;
        if !(s > 0.0 && s < 1.0 && lam > 0.0) {
            return Err(Error::Fit(format!(
                "sample (t = {t}, λ = {lam}) outside 0 < T − t < 1, λ > 0"
            )));
        }
        rows.push((s.ln(), (-s.ln()).ln(), lam.ln(), t));
    }
    let p = match model {
        RateModel::Free => 3,
        RateModel::FixedLog(_) => 2,
    };
    if rows.len() < p + 1 {
        return Err(Error::Fit(format!(
            "{} samples for {p} parameters",
            rows.len()
        )));
    }
    let n = rows.len();
    let x = DMatrix::from_fn(n, p, |i, j| match (model, j) {
        (_, 0) => rows[i].0,
        (RateModel::Free, 1) => rows[i].1,
        _ => 1.0,
    });
    let y = DVector::from_fn(n, |i, _| match model {
        RateModel::Free => rows[i].2,
        RateModel::FixedLog(b) => rows[i].2 - b * rows[i].1,
    });
    let xtx = x.transpose() * &x;
    let inv = xtx
        .try_inverse()
        .ok_or_else(|| Error::Fit("degenerate design matrix".into()))?;
    let beta = &inv * x.transpose() * &y;
    let res = &y - &x * &beta;
    let rss = res.norm_squared();
    let dof = (n - p).max(1) as f64;
    let cov = inv * (rss / dof);
    let covariance = (0..p)
        .map(|i| (0..p).map(|j| cov[(i, j)]).collect())
        .collect();
    let (a, b, c) = match model {
        RateModel::Free => (beta[0], beta[1], beta[2]),
        RateModel::FixedLog(b) => (beta[0], b, beta[1]),
    };
    let smin = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let smax = rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let decades = (smax - smin) / std::f64::consts::LN_10;
    let tlo = rows.iter().map(|r| r.3).fold(f64::INFINITY, f64::min);
    let thi = rows.iter().map(|r| r.3).fold(f64::NEG_INFINITY, f64::max);
    Ok(RateFit {
        t_est,
        a,
        b,
        c,
        covariance,
        residual: (rss / n as f64).sqrt(),
        window: (tlo, thi),
        decades,
        reliable: decades >= 2.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub outcome: RunStatus,
    pub steps: u64,
    pub nodes: usize,
    pub blowup: Option<BlowupEstimate>,
    pub blowup_error: Option<String>,
    pub rate_fit: Option<RateFit>,
    pub rate_fit_error: Option<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_is_exact_on_quadratics() {
        let spec = EvolutionGrid {
            radius: 3.0,
            h0: 0.01,
            ratio: 1.02,
            h_max: 0.05,
        };
        let r = spec.nodes().unwrap();
        let op = RadialLaplacian::new(&r);
        let u: Vec<f64> = r.iter().map(|x| x * x).collect();
        let mut out = vec![0.0; r.len()];
        op.apply(&u, &mut out);
        // Δ|x|² = 12; the conservative stencil is exact at the origin and
        // first order in the spacing ratio elsewhere.
        assert!((out[0] - 12.0).abs() < 1e-9);
        for v in &out[1..r.len() - 1] {
            assert!((v - 12.0).abs() < 0.05, "{v}");
        }
    }

    #[test]
    fn zero_stays_zero() {
        let cfg = EvolverConfig::default();
        let mut st = init(
            &InitialData::Constant(0.0),
            &EvolutionGrid::uniform(2.0, 50),
            &cfg,
        )
        .unwrap();
        for _ in 0..100 {
            assert_eq!(step(&mut st, &cfg), StepOutcome::Advanced);
        }
        assert!(st.u.iter().all(|v| *v == 0.0));
        assert!(estimate_blowup_time(st.history.make_contiguous()).is_err());
    }

    #[test]
    fn unresolved_data_rejected() {
        let g = crate::grid::uniform_grid(0.0, 1.0, 2001);
        let f = RadialFunction::from_fn(g, |r| (200.0 * r).sin()).unwrap();
        let cfg = EvolverConfig::default();
        let err = init(
            &InitialData::Sampled(f),
            &EvolutionGrid::uniform(1.0, 40),
            &cfg,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotResolved(_)));
    }

    #[test]
    fn lambda_of_scaled_bubble() {
        let lam: f64 = 0.1;
        let g = crate::grid::uniform_grid(0.0, 5.0, 5001);
        let model = crate::ground_state::GroundStateModel::default();
        let f = RadialFunction::from_fn(g, |r| model.q(r / lam) / (lam * lam)).unwrap();
        let cfg = EvolverConfig::default();
        let st = init(
            &InitialData::Sampled(f),
            &EvolutionGrid::uniform(5.0, 2000),
            &cfg,
        )
        .unwrap();
        assert!((extract_lambda(&st).unwrap() - 0.1).abs() < 1e-14);
    }

    #[test]
    fn synthetic_rates_recovered() {
        let law = |s: f64| s.powf(1.25) * (-s.ln()).powf(-1.875);
        let traj: Vec<(f64, f64)> = (0..60)
            .map(|k| 10f64.powf(-2.0 - 0.1 * k as f64))
            .map(|s| (1.0 - s, law(s)))
            .collect();
        let fit = fit_type2_rate(&traj, 1.0, RateModel::Free).unwrap();
        assert!(
            (fit.a - 1.25).abs() < 0.01 && (fit.b + 1.875).abs() < 0.05,
            "{fit:?}"
        );
        assert!(fit.reliable);
        let traj1: Vec<(f64, f64)> = traj.iter().map(|(t, _)| (*t, (1.0 - t).sqrt())).collect();
        let fit = fit_type2_rate(&traj1, 1.0, RateModel::Free).unwrap();
        assert!((fit.a - 0.5).abs() < 1e-8);
        let fit = fit_type2_rate(&traj[..5], 1.0, RateModel::FixedLog(-1.875)).unwrap();
        assert!((fit.a - 1.25).abs() < 1e-8);
        assert!(!fit.reliable);
    }
}
