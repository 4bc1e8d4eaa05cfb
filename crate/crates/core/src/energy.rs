//! Local energy on the unit ball and the Θ scaling integrals.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::RadialFunction;
use crate::numerics::quadrature::{gk15, integrate_with_breaks, Tolerance};
use crate::profile::{rates, BlowupProfile, Instant};

/// |S⁵| = π³.
pub const SPHERE_AREA: f64 = PI * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub tau: Option<f64>,
    /// ½∫_{|x|<1}|∇u|².
    pub grad_term: f64,
    /// ⅓∫_{|x|<1}|u|³.
    pub cubic_term: f64,
    pub e_loc: f64,
    pub grad_error: f64,
    pub cubic_error: f64,
}

impl EnergyReport {
    fn new(t: f64, tau: Option<f64>, grad: (f64, f64), cubic: (f64, f64)) -> Self {
        let grad_term = 0.5 * SPHERE_AREA * grad.0;
        let cubic_term = SPHERE_AREA / 3.0 * cubic.0;
        Self {
            t,
            tau,
            grad_term,
            cubic_term,
            e_loc: grad_term - cubic_term,
            grad_error: 0.5 * SPHERE_AREA * grad.1,
            cubic_error: SPHERE_AREA / 3.0 * cubic.1,
        }
    }
}

/// E_loc of sampled radial data. Derivative samples are used when present,
/// otherwise computed by finite differences of the samples.
pub fn local_energy(u: &RadialFunction, t: f64) -> Result<EnergyReport> {
    if u.r_min() > 0.0 || u.r_max() < 1.0 {
        return Err(invalid(format!(
            "samples cover [{}, {}], need [0, 1]",
            u.r_min(),
            u.r_max()
        )));
    }
    let owned;
    let u = if u.deriv().is_some() {
        u
    } else {
        if u.len() < 5 {
            return Err(Error::MissingDerivative(format!(
                "{} samples are too few to differentiate",
                u.len()
            )));
        }
        owned = u.clone().with_computed_derivative();
        &owned
    };
    let grid = u.grid();
    let (mut g, mut c) = ((0.0, 0.0), (0.0, 0.0));
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1].min(1.0));
        if a >= 1.0 {
            break;
        }
        let dg = |r: f64| {
            u.eval_deriv(r)
                .map(|d| d * d * r.powi(5))
                .unwrap_or(f64::NAN)
        };
        let dc = |r: f64| {
            u.eval(r)
                .map(|v| v.abs().powi(3) * r.powi(5))
                .unwrap_or(f64::NAN)
        };
        let (vg, eg) = gk15(&dg, a, b);
        let (vc, ec) = gk15(&dc, a, b);
        g = (g.0 + vg, g.1 + eg);
        c = (c.0 + vc, c.1 + ec);
    }
    if !(g.0.is_finite() && c.0.is_finite()) {
        return Err(invalid("energy integrand is not finite"));
    }
    Ok(EnergyReport::new(t, None, g, c))
}

/// E_loc of u_app at τ, integrating the closed-form pieces in log r.
pub fn u_app_energy(profile: &BlowupProfile, tau: f64) -> Result<EnergyReport> {
    let at = Instant::from_tau(tau)?;
    let lam = rates(&at).lambda0;
    let rs = at.s.sqrt();
    let lo = (1e-6 * lam).ln();
    let mut breaks = vec![lo, lam.ln(), (10.0 * lam).ln(), (100.0 * lam).ln()];
    for x in [rs / tau, 2.0 * rs / tau, rs, 10.0 * rs, 100.0 * rs] {
        if x < 1.0 {
            breaks.push(x.ln());
        }
    }
    breaks.push(0.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-10,
        max_panels: 20_000,
    };
    let grad = integrate_with_breaks(
        |l| {
            let x = l.exp();
            let d = profile.u_app_grad(x, &at).unwrap_or(f64::NAN);
            d * d * x.powi(6)
        },
        &breaks,
        tol,
    )?;
    let cubic = integrate_with_breaks(
        |l| {
            let x = l.exp();
            profile.u_app(x, &at).unwrap_or(f64::NAN).abs().powi(3) * x.powi(6)
        },
        &breaks,
        tol,
    )?;
    Ok(EnergyReport::new(
        profile.t_blow - at.s,
        Some(tau),
        (grad.value, grad.error),
        (cubic.value, cubic.error),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingIntegrals {
    pub tau: f64,
    /// ∫_{|z|<τ^{19/30}} (1 + (αc₁/τ)(|z|² − 12))⁻³ dz.
    pub i3: f64,
    /// Same with the floor integrand (1 + (αc₁/τ)|z|²)⁻³.
    pub i3_floor: f64,
    /// ∫_{|x|<1} |∇Θ|² dx at T − t = e^{−τ}.
    pub i_grad: f64,
    pub i3_over_tau3logtau: f64,
    pub igrad_over_tau2logtau: f64,
}

/// I₃ and I_grad for Θ with constant αc₁.
pub fn theta_scaling_integrals(alpha_c1: f64, tau: f64) -> Result<ScalingIntegrals> {
    if !(tau >= 10.0) {
        return Err(invalid(format!("scaling integrals need τ ≥ 10, got {tau}")));
    }
    let a = alpha_c1 / tau;
    let zmax = tau.powf(19.0 / 30.0);
    let tol = Tolerance {
        abs: 0.0,
        rel: 1e-11,
        max_panels: 20_000,
    };
    let brk = [0.0, (1.0 / a).sqrt().min(zmax), zmax];
    let i3 = integrate_with_breaks(
        |z| (1.0 + a * (z * z - 12.0)).powi(-3) * z.powi(5),
        &brk,
        tol,
    )?;
    let floor = integrate_with_breaks(|z| (1.0 + a * z * z).powi(-3) * z.powi(5), &brk, tol)?;
    // |∇Θ|²dx = 4a²|z|² B⁻⁴ dz with B = 1 + a(|z|² − 12), over |z| < e^{τ/2}.
    // In l = log|z| the integrand is smooth over the whole range.
    let lmax = 0.5 * tau;
    let lbrk = [-12.0, 0.0, (-a.ln()) * 0.5, lmax];
    let grad = integrate_with_breaks(
        |l| {
            let z2 = (2.0 * l).exp();
            4.0 * a * a * (z2 / (1.0 + a * (z2 - 12.0))).powi(4)
        },
        &lbrk,
        tol,
    )?;
    let i3 = SPHERE_AREA * i3.value;
    let i_grad = SPHERE_AREA * grad.value;
    Ok(ScalingIntegrals {
        tau,
        i3,
        i3_floor: SPHERE_AREA * floor.value,
        i_grad,
        i3_over_tau3logtau: i3 / (tau.powi(3) * tau.ln()),
        igrad_over_tau2logtau: i_grad / (tau * tau * tau.ln()),
    })
}
