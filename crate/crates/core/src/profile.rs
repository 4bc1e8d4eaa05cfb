//! Rate functions, the selfsimilar profile Θ and its residual μ, cutoffs,
//! the glued approximate solution u_app and its PDE residual, and the
//! inner/outer matching check.
//!
//! Every evaluator is parametrized by the remaining time s = T − t (see
//! [`Instant`]); near blowup t itself carries no usable digits.

use rayon::prelude::*;
use serde::Serialize;

use crate::cutoff::{eta, eta_prime, eta_second};
use crate::error::{invalid, Error, Result};
use crate::ground_state::{Corrector, GroundStateModel};
use crate::selfsimilar::{build_basis, HermiteBasis};

/// A time before blowup, stored as s = T − t together with τ = −log s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Instant {
    pub s: f64,
    pub tau: f64,
}

impl Instant {
    pub fn from_tau(tau: f64) -> Result<Self> {
        if !(tau > 1.0) || !tau.is_finite() {
            return Err(Error::TimeWindow(format!("τ = {tau} must exceed 1")));
        }
        Ok(Self {
            s: (-tau).exp(),
            tau,
        })
    }

    pub fn from_remaining(s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::TimeWindow(format!("T − t = {s} must be positive")));
        }
        let tau = -s.ln();
        if !(tau > 1.0) {
            return Err(Error::TimeWindow(format!(
                "T − t = {s} gives τ = {tau} ≤ 1"
            )));
        }
        Ok(Self { s, tau })
    }
}

/// λ₀, σ, τ and the derived ratios at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rates {
    pub lambda0: f64,
    pub sigma: f64,
    pub tau: f64,
    /// σ/λ₀² = λ̇₀/λ₀ = −(5/4 + 15/(8τ))/s.
    pub coeff: f64,
}

pub fn rates(at: &Instant) -> Rates {
    let (s, tau) = (at.s, at.tau);
    let a = 1.25 + 15.0 / (8.0 * tau);
    Rates {
        lambda0: s.powf(1.25) * tau.powf(-15.0 / 8.0),
        sigma: -a * s.powf(1.5) * tau.powf(-3.75),
        tau,
        coeff: -a / s,
    }
}

/// log λ₀ = (5/4) log s − (15/8) log τ.
pub fn log_lambda0(s: f64) -> f64 {
    1.25 * s.ln() - 15.0 / 8.0 * (-s.ln()).ln()
}

/// (λ₀, σ, τ) at time t for blowup time T.
pub fn eval_rate_functions(t: f64, t_blow: f64) -> Result<(f64, f64, f64)> {
    if !(t > 0.0 && t < t_blow) {
        return Err(Error::TimeWindow(format!("t = {t} outside (0, {t_blow})")));
    }
    let r = rates(&Instant::from_remaining(t_blow - t)?);
    Ok((r.lambda0, r.sigma, r.tau))
}

/// χ₁ = η(τ|z|), χ₂ = 1 − χ₁, χ_in = η(|y|/R).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cutoffs {
    pub chi1: f64,
    pub chi2: f64,
    pub chi_in: f64,
}

/// Pieces of u_app at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UappParts {
    pub q_term: f64,
    pub t1_term: f64,
    /// −Θ(1 − χ₁).
    pub theta_term: f64,
    pub theta: f64,
    pub chi1: f64,
    pub u: f64,
}

/// The approximate blowup solution and its building blocks.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupProfile {
    #[serde(rename = "T")]
    pub t_blow: f64,
    pub alpha: f64,
    /// R in χ_in = η(|y|/R).
    pub inner_radius: f64,
    #[serde(skip)]
    pub basis: HermiteBasis,
    #[serde(skip)]
    pub corrector: Corrector,
    #[serde(skip)]
    pub model: GroundStateModel,
}

impl BlowupProfile {
    pub fn new(t_blow: f64, basis: HermiteBasis, corrector: Corrector) -> Result<Self> {
        if !(t_blow > 0.0) || !t_blow.is_finite() {
            return Err(invalid(format!(
                "blowup time must be positive, got {t_blow}"
            )));
        }
        let alpha = basis.alpha;
        Ok(Self {
            t_blow,
            alpha,
            inner_radius: 20.0,
            basis,
            corrector,
            model: GroundStateModel::default(),
        })
    }

    /// Profile with the default basis and T₁ built on the default grid.
    pub fn standard(t_blow: f64) -> Result<Self> {
        Self::new(t_blow, build_basis()?, Corrector::standard()?)
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(invalid("α must be positive"));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn instant(&self, t: f64) -> Result<Instant> {
        if !(t < self.t_blow) {
            return Err(Error::TimeWindow(format!(
                "t = {t} is not before T = {}",
                self.t_blow
            )));
        }
        Instant::from_remaining(self.t_blow - t)
    }

    /// αc₁/τ, so that 1 + (α/τ)e₁(z) = 1 + a(|z|² − 12).
    fn a(&self, tau: f64) -> f64 {
        self.alpha * self.basis.c[1] / tau
    }

    fn base(&self, x: f64, s: f64, tau: f64) -> Result<f64> {
        let b = 1.0 + self.a(tau) * (x * x / s - 2.0 * self.basis.n as f64);
        if !(b > 0.0) {
            return Err(Error::TimeWindow(format!(
                "1 + (α/τ)e₁ = {b} is not positive at τ = {tau}"
            )));
        }
        Ok(b)
    }

    /// Θ = s⁻¹(1 + (α/τ)e₁(z))⁻¹.
    pub fn theta(&self, x: f64, at: &Instant) -> Result<f64> {
        Ok(1.0 / (at.s * self.base(x, at.s, at.tau)?))
    }

    /// (Θ, ∂_xΘ, ΔΘ) in closed form.
    pub fn theta_derivatives(&self, x: f64, at: &Instant) -> Result<(f64, f64, f64)> {
        let s = at.s;
        let a = self.a(at.tau);
        let b = self.base(x, s, at.tau)?;
        let th = 1.0 / (s * b);
        let dth = -2.0 * a * x / (s * s * b * b);
        let lap = -2.0 * a * self.basis.n as f64 / (s * s * b * b)
            + 8.0 * a * a * x * x / (s * s * s * b * b * b);
        Ok((th, dth, lap))
    }

    /// Closed-form μ = ∂_tΘ − ΔΘ − Θ²:
    /// α s⁻²B⁻² e₁/τ² − 2α² s⁻²B⁻³ |∇_z e₁|²/τ², B = 1 + (α/τ)e₁.
    pub fn theta_residual_mu(&self, x: f64, at: &Instant) -> Result<f64> {
        let (s, tau) = (at.s, at.tau);
        let z = x / s.sqrt();
        let b = self.base(x, s, tau)?;
        let e1 = self.basis.e(1, z);
        let g = self.basis.grad_e1_sq(z);
        let al = self.alpha;
        Ok(al * e1 / (s * s * b * b * tau * tau)
            - 2.0 * al * al * g / (s * s * b * b * b * tau * tau))
    }

    /// ∂_tΘ − ΔΘ − Θ² by fourth-order central differences of Θ in t and x.
    pub fn theta_residual_fd(&self, x: f64, at: &Instant) -> Result<f64> {
        let s = at.s;
        let th =
            |x: f64, s: f64| -> Result<f64> { self.theta(x.abs(), &Instant::from_remaining(s)?) };
        let hs = 1e-3 * s;
        let ds = (-th(x, s + 2.0 * hs)? + 8.0 * th(x, s + hs)? - 8.0 * th(x, s - hs)?
            + th(x, s - 2.0 * hs)?)
            / (12.0 * hs);
        let hx = 2e-3 * s.sqrt();
        let lap = fd_laplacian(|y| th(y, s), x, hx)?;
        let v = th(x, s)?;
        Ok(-ds - lap - v * v)
    }

    /// Comparison function ū = s⁻¹(1 + (α/(2τ))e₁)⁻¹.
    pub fn barrier(&self, x: f64, at: &Instant) -> f64 {
        let z = x / at.s.sqrt();
        1.0 / (at.s * (1.0 + self.alpha / (2.0 * at.tau) * self.basis.e(1, z)))
    }

    /// μ̄ = ∂_tū − Δū − ū² in the unfactored form.
    pub fn barrier_mu_bar(&self, x: f64, at: &Instant) -> f64 {
        let (s, tau) = (at.s, at.tau);
        let z = x / s.sqrt();
        let e1 = self.basis.e(1, z);
        let b = 1.0 + self.alpha / (2.0 * tau) * e1;
        let al = self.alpha;
        al / 2.0 * e1 / (tau * tau * s * s * b * b)
            - al * al / 2.0 * self.basis.grad_e1_sq(z) / (tau * tau * s * s * b * b * b)
    }

    /// μ̄ after substituting |∇e₁|² = 4c₁e₁ + 8nc₁²:
    /// (α/(2τ²)) s⁻² b⁻³ (e₁(1 + (α/(2τ))e₁ − 4αc₁) − 8nαc₁²).
    pub fn barrier_mu_bar_factored(&self, x: f64, at: &Instant) -> f64 {
        let (s, tau) = (at.s, at.tau);
        let z = x / s.sqrt();
        let e1 = self.basis.e(1, z);
        let b = 1.0 + self.alpha / (2.0 * tau) * e1;
        let (al, c1, n) = (self.alpha, self.basis.c[1], self.basis.n as f64);
        al / (2.0 * tau * tau) / (s * s * b * b * b)
            * (e1 * (1.0 + al / (2.0 * tau) * e1 - 4.0 * al * c1) - 8.0 * n * al * c1 * c1)
    }

    /// Positive |z| at which the bracket of the factored μ̄ vanishes.
    pub fn barrier_zero(&self, tau: f64) -> Option<f64> {
        let (al, c1, n) = (self.alpha, self.basis.c[1], self.basis.n as f64);
        // Quadratic in e₁: (α/2τ)e₁² + (1 − 4αc₁)e₁ − 8nαc₁² = 0.
        let (qa, qb, qc) = (
            al / (2.0 * tau),
            1.0 - 4.0 * al * c1,
            -8.0 * n * al * c1 * c1,
        );
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return None;
        }
        let e1 = (-qb + disc.sqrt()) / (2.0 * qa);
        let z2 = e1 / c1 + 2.0 * n;
        (z2 > 0.0).then(|| z2.sqrt())
    }

    pub fn cutoffs(&self, x: f64, at: &Instant) -> Result<Cutoffs> {
        if !(at.tau > 1.0) {
            return Err(Error::TimeWindow("cutoffs need τ > 1".into()));
        }
        let r = rates(at);
        let chi1 = eta(at.tau * x / at.s.sqrt());
        Ok(Cutoffs {
            chi1,
            chi2: 1.0 - chi1,
            chi_in: eta(x / r.lambda0 / self.inner_radius),
        })
    }

    pub fn u_app_parts(&self, x: f64, at: &Instant) -> Result<UappParts> {
        let r = rates(at);
        let lam = r.lambda0;
        let y = x / lam;
        let chi1 = eta(at.tau * x / at.s.sqrt());
        let q_term = self.model.q(y) / (lam * lam);
        let t1_term = if chi1 > 0.0 {
            r.coeff * self.corrector.eval(y).0 * chi1
        } else {
            0.0
        };
        let theta = self.theta(x, at)?;
        let theta_term = -theta * (1.0 - chi1);
        Ok(UappParts {
            q_term,
            t1_term,
            theta_term,
            theta,
            chi1,
            u: q_term + t1_term + theta_term,
        })
    }

    /// u_app = Q_λ₀ + (σ/λ₀²)T₁(x/λ₀)χ₁ − Θ(1 − χ₁).
    pub fn u_app(&self, x: f64, at: &Instant) -> Result<f64> {
        Ok(self.u_app_parts(x, at)?.u)
    }

    /// ∂_x u_app by differentiating every piece in closed form.
    pub fn u_app_grad(&self, x: f64, at: &Instant) -> Result<f64> {
        let r = rates(at);
        let lam = r.lambda0;
        let y = x / lam;
        let k = at.tau / at.s.sqrt();
        let chi1 = eta(k * x);
        let dchi1 = eta_prime(k * x) * k;
        let (t1, dt1) = self.corrector.eval(y);
        let (th, dth, _) = self.theta_derivatives(x, at)?;
        let dq = self.model.q_prime(y) / (lam * lam * lam);
        let da = r.coeff * (dt1 * chi1 / lam + t1 * dchi1);
        let db = -dth * (1.0 - chi1) + th * dchi1;
        Ok(dq + da + db)
    }

    /// Time-dependent part A + B = (σ/λ₀²)T₁χ₁ − Θχ₂ at fixed x.
    fn dynamic_part(&self, x: f64, s: f64) -> Result<(f64, f64)> {
        let at = Instant::from_remaining(s)?;
        let p = self.u_app_parts(x, &at)?;
        Ok((p.t1_term, p.theta_term))
    }

    fn theta_term_at(&self, x: f64, at: &Instant) -> Result<f64> {
        let chi1 = eta(at.tau * x / at.s.sqrt());
        Ok(-self.theta(x, at)? * (1.0 - chi1))
    }

    /// ∂_tu − Δu − |u|u for u = u_app at one point, with the Richardson gap
    /// of the time difference. The bubble and T₁ pieces are combined in
    /// closed form (using ΔQ = −Q² and H T₁ = −ΛQ) so that their large
    /// mutual cancellation is exact; finite differences act only on the
    /// remaining smooth parts.
    pub fn residual_at(&self, x: f64, at: &Instant, time_step: f64) -> Result<(f64, f64)> {
        let r = rates(at);
        let (lam, c, s, tau) = (r.lambda0, r.coeff, at.s, at.tau);
        let y = x / lam;
        let k = tau / s.sqrt();
        let (chi1, dchi1, ddchi1) = (eta(k * x), eta_prime(k * x) * k, eta_second(k * x) * k * k);
        let (t1, dt1) = self.corrector.eval(y);
        let q = self.model.q(y) / (lam * lam);
        let lapchi = if x > 0.0 {
            ddchi1 + 5.0 * dchi1 / x
        } else {
            6.0 * ddchi1
        };
        let kterm = -c / (lam * lam) * self.model.lambda_q(y) * (1.0 - chi1)
            - c * (2.0 * dt1 * dchi1 / lam + t1 * lapchi);

        let a = c * t1 * chi1;
        let bth = self.theta_term_at(x, at)?;
        let p = a + bth;
        let u = q + p;
        let m = if u >= 0.0 {
            p * p + 2.0 * q * bth
        } else {
            -u * u - q * q - 2.0 * q * a
        };

        let dt = |h: f64| -> Result<f64> {
            let (a1, b1) = self.dynamic_part(x, s - h)?;
            let (a0, b0) = self.dynamic_part(x, s + h)?;
            // t increases as s decreases.
            Ok(((a1 + b1) - (a0 + b0)) / (2.0 * h))
        };
        let h = time_step * s;
        let (d1, d2) = (dt(h)?, dt(0.5 * h)?);
        let d_t = (4.0 * d2 - d1) / 3.0;
        let gap = (d2 - d1).abs() / d_t.abs().max(f64::MIN_POSITIVE);

        let lap_b = if bth == 0.0 && eta(k * (x + 4e-3 * x.max(1.0 / k))) == 1.0 {
            0.0
        } else {
            let hx = 1e-3 * x.max(s.sqrt() / tau);
            fd_laplacian(|xx| self.theta_term_at(xx.abs(), at), x, hx)?
        };
        Ok((kterm + d_t - lap_b - m, gap))
    }

    /// Residual samples over the requested instants and radii.
    pub fn pde_residual(&self, spec: &ResidualSpec) -> Result<ResidualField> {
        let mut jobs = Vec::new();
        for &tau in &spec.taus {
            let at = Instant::from_tau(tau)?;
            let lam = rates(&at).lambda0;
            for &y in &spec.y_values {
                jobs.push((at, y * lam));
            }
            for &z in &spec.z_values {
                jobs.push((at, z * at.s.sqrt()));
            }
        }
        let samples: Vec<ResidualSample> = jobs
            .par_iter()
            .map(|(at, x)| {
                let (res, gap) = self.residual_at(*x, at, spec.time_step)?;
                let lam = rates(at).lambda0;
                let region = if x / lam <= spec.inner_y_max {
                    Region::Inner
                } else {
                    Region::Selfsimilar
                };
                let normalized = match region {
                    Region::Inner => res * at.s * at.s,
                    Region::Selfsimilar => res * at.s * at.s * at.tau * at.tau,
                };
                if !res.is_finite() {
                    return Err(Error::TimeWindow(format!(
                        "non-finite residual at x = {x}, τ = {}",
                        at.tau
                    )));
                }
                Ok(ResidualSample {
                    t: self.t_blow - at.s,
                    tau: at.tau,
                    x: *x,
                    region,
                    residual: res,
                    normalized,
                    richardson_gap: gap,
                })
            })
            .collect::<Result<_>>()?;
        let max_of = |reg: Region| {
            samples
                .iter()
                .filter(|s| s.region == reg)
                .fold(0.0f64, |m, s| m.max(s.normalized.abs()))
        };
        let flagged = samples
            .iter()
            .filter(|s| s.richardson_gap > spec.richardson_tolerance)
            .count();
        Ok(ResidualField {
            inner_max: max_of(Region::Inner),
            selfsimilar_max: max_of(Region::Selfsimilar),
            flagged,
            samples,
        })
    }

    /// Inner expansion λ₀⁻²Q(y) + (σ/λ₀²)T₁(y) against the outer −Θ at the
    /// intermediate radii |x| = s^{1/2+δ}. Mismatch is reported in units of 1/s.
    pub fn matching_residual(&self, taus: &[f64], deltas: &[f64]) -> Result<MatchingReport> {
        if taus.iter().any(|t| *t < 10.0) {
            return Err(invalid("matching is evaluated for τ ≥ 10"));
        }
        let mut rows = Vec::new();
        for &delta in deltas {
            for &tau in taus {
                let at = Instant::from_tau(tau)?;
                let r = rates(&at);
                let x = at.s.powf(0.5 + delta);
                let y = x / r.lambda0;
                let inner =
                    self.model.q(y) / (r.lambda0 * r.lambda0) + r.coeff * self.corrector.eval(y).0;
                let outer = -self.theta(x, &at)?;
                rows.push(MatchingRow {
                    tau,
                    delta,
                    x,
                    y,
                    z: x / at.s.sqrt(),
                    inner,
                    outer,
                    mismatch: (inner - outer).abs() * at.s,
                });
            }
        }
        let shrinking = deltas.iter().all(|&d| {
            let seq: Vec<f64> = rows
                .iter()
                .filter(|r| r.delta == d)
                .map(|r| r.mismatch)
                .collect();
            seq.windows(2).all(|w| w[1] < w[0])
        });
        Ok(MatchingReport {
            leading_coefficient: self.corrector.limit() * 1.25,
            t1_limit: self.corrector.limit(),
            shrinking,
            rows,
        })
    }
}

/// Five-point Laplacian f'' + 5f'/x of an even radial function.
fn fd_laplacian(f: impl Fn(f64) -> Result<f64>, x: f64, h: f64) -> Result<f64> {
    let (fm2, fm1, f0, fp1, fp2) = (
        f(x - 2.0 * h)?,
        f(x - h)?,
        f(x)?,
        f(x + h)?,
        f(x + 2.0 * h)?,
    );
    let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    if x == 0.0 {
        return Ok(6.0 * d2);
    }
    let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    Ok(d2 + 5.0 * d1 / x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Inner,
    Selfsimilar,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Inner => "inner",
            Region::Selfsimilar => "selfsimilar",
        }
    }
}

/// Where to sample the residual.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualSpec {
    pub taus: Vec<f64>,
    /// Inner radii in units of λ₀.
    pub y_values: Vec<f64>,
    /// Selfsimilar radii in units of √s.
    pub z_values: Vec<f64>,
    /// Samples with |y| at most this are tagged inner.
    pub inner_y_max: f64,
    /// Relative time step of the central difference.
    pub time_step: f64,
    pub richardson_tolerance: f64,
}

impl Default for ResidualSpec {
    fn default() -> Self {
        Self {
            taus: vec![15.0, 25.0, 35.0],
            y_values: vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0],
            z_values: vec![0.5, 1.0, 2.0, 3.0, 5.0],
            inner_y_max: 20.0,
            time_step: 1e-3,
            richardson_tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualSample {
    pub t: f64,
    pub tau: f64,
    pub x: f64,
    pub region: Region,
    pub residual: f64,
    /// residual·s² (inner) or residual·s²τ² (selfsimilar).
    pub normalized: f64,
    /// Relative change of the time derivative when its step is halved.
    pub richardson_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualField {
    pub samples: Vec<ResidualSample>,
    pub inner_max: f64,
    pub selfsimilar_max: f64,
    /// Samples whose Richardson gap exceeds the tolerance.
    pub flagged: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MatchingRow {
    pub tau: f64,
    pub delta: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub inner: f64,
    pub outer: f64,
    /// |inner − outer|·s.
    pub mismatch: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchingReport {
    pub rows: Vec<MatchingRow>,
    /// T₁(∞)·(5/4), which balances the leading constant of Θ when it is 1.
    pub leading_coefficient: f64,
    pub t1_limit: f64,
    /// Mismatch strictly decreasing in τ for every δ.
    pub shrinking: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn profile() -> &'static BlowupProfile {
        static P: OnceLock<BlowupProfile> = OnceLock::new();
        P.get_or_init(|| BlowupProfile::standard(1.0).unwrap())
    }

    #[test]
    fn rate_substitution() {
        let at = Instant::from_tau(10.0).unwrap();
        let r = rates(&at);
        assert!((r.lambda0 / ((-12.5f64).exp() * 10f64.powf(-15.0 / 8.0)) - 1.0).abs() < 1e-13);
        assert!((r.sigma / (r.lambda0 * r.lambda0) / r.coeff - 1.0).abs() < 1e-13);
        assert!(Instant::from_tau(0.5).is_err());
        assert!(eval_rate_functions(1.5, 1.0).is_err());
        assert!(eval_rate_functions(0.5, 1.0).is_err());
    }

    #[test]
    fn theta_special_points() {
        let p = profile();
        let at = Instant::from_tau(20.0).unwrap();
        let x = 12f64.sqrt() * at.s.sqrt();
        assert!((p.theta(x, &at).unwrap() * at.s - 1.0).abs() < 1e-14);
        let big = Instant::from_tau(500.0).unwrap();
        let small = p.theta(0.0, &big).unwrap() * big.s;
        assert!((small - 1.0 / (1.0 - 1.5 / 500.0)).abs() < 1e-12);
        // Far field Θ ≈ τ/(αc₁|x|²).
        let at = Instant::from_tau(20.0).unwrap();
        let x = 200.0 * at.s.sqrt();
        let far = 20.0 / (p.alpha * p.basis.c[1] * x * x);
        assert!((p.theta(x, &at).unwrap() / far - 1.0).abs() < 0.01);
    }

    #[test]
    fn theta_closed_form_derivatives() {
        let p = profile();
        let at = Instant::from_tau(12.0).unwrap();
        let x = 1.3 * at.s.sqrt();
        let (_, d, lap) = p.theta_derivatives(x, &at).unwrap();
        let h = 1e-3 * at.s.sqrt();
        let f = |x: f64| p.theta(x, &at).unwrap();
        let fd = (f(x + h) - f(x - h)) / (2.0 * h);
        assert!((fd / d - 1.0).abs() < 1e-5);
        let lap_fd = fd_laplacian(|y| Ok(f(y.abs())), x, h).unwrap();
        assert!((lap_fd / lap - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fd_laplacian_is_fourth_order() {
        let p = profile();
        let at = Instant::from_tau(12.0).unwrap();
        let x = 1.3 * at.s.sqrt();
        let (_, _, lap) = p.theta_derivatives(x, &at).unwrap();
        let f = |y: f64| p.theta(y.abs(), &at);
        let err = |h: f64| (fd_laplacian(f, x, h).unwrap() - lap).abs();
        let h = 0.2 * at.s.sqrt();
        let ratio = err(h) / err(0.5 * h);
        assert!(ratio > 12.0 && ratio < 20.0, "{ratio}");
    }

    #[test]
    fn cutoff_plateaus() {
        let p = profile();
        let at = Instant::from_tau(20.0).unwrap();
        let c = p.cutoffs(0.5 / 20.0 * at.s.sqrt(), &at).unwrap();
        assert_eq!((c.chi1, c.chi2), (1.0, 0.0));
        let c = p.cutoffs(3.0 / 20.0 * at.s.sqrt(), &at).unwrap();
        assert_eq!((c.chi1, c.chi2), (0.0, 1.0));
        let c = p.cutoffs(1.5 / 20.0 * at.s.sqrt(), &at).unwrap();
        assert_eq!(c.chi1 + c.chi2, 1.0);
    }

    #[test]
    fn u_app_origin_and_sign() {
        let p = profile();
        for tau in [15.0, 25.0, 35.0] {
            let at = Instant::from_tau(tau).unwrap();
            let lam = rates(&at).lambda0;
            assert!((p.u_app(0.0, &at).unwrap() * lam * lam - 1.0).abs() < 1e-12);
            let x = 0.5 * at.s.sqrt();
            let v = p.u_app(x, &at).unwrap();
            assert!(v < 0.0);
            assert!((v / -p.theta(x, &at).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn gradient_matches_differences() {
        let p = profile();
        let at = Instant::from_tau(15.0).unwrap();
        let lam = rates(&at).lambda0;
        for x in [
            3.0 * lam,
            50.0 * lam,
            1.5 / 15.0 * at.s.sqrt(),
            0.7 * at.s.sqrt(),
        ] {
            let h = 1e-5 * x;
            let fd = (p.u_app(x + h, &at).unwrap() - p.u_app(x - h, &at).unwrap()) / (2.0 * h);
            let g = p.u_app_grad(x, &at).unwrap();
            assert!(
                (fd - g).abs() <= 1e-5 * g.abs().max(1.0 / (at.s * x)),
                "x = {x}: {fd} vs {g}"
            );
        }
    }

    #[test]
    fn barrier_residual_forms_agree_and_vanish() {
        let p = profile();
        let at = Instant::from_tau(20.0).unwrap();
        for z in [0.3, 2.0, 7.0] {
            let x = z * at.s.sqrt();
            let a = p.barrier_mu_bar(x, &at);
            let b = p.barrier_mu_bar_factored(x, &at);
            assert!((a - b).abs() < 1e-10 * a.abs());
        }
        let z0 = p.barrier_zero(20.0).unwrap();
        let x0 = z0 * at.s.sqrt();
        let scale = p.barrier(x0, &at).powi(2) / (20.0 * 20.0);
        assert!(p.barrier_mu_bar(x0, &at).abs() < 1e-10 * scale);
    }
}
