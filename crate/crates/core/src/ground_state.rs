//! The n = 6 ground state Q, its scaling generator ΛQ, the linearized
//! operator H = Δ + V with V = 2Q, its second homogeneous solution Γ and
//! the inner corrector T₁ solving H T₁ = −ΛQ.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridSpec, RadialFunction};
use crate::numerics::fd::{fornberg, solve_tridiagonal};
use crate::numerics::quadrature::{integrate_with_breaks, Tolerance};
use crate::numerics::Dopri5;

/// Default anchor radius for Γ (must exceed √24, the zero of ΛQ).
pub const GAMMA_ANCHOR: f64 = 6.0;

/// Minimum distance between the Γ anchor and the zero of ΛQ.
const ANCHOR_GAP: f64 = 0.25;

/// Closed-form ground-state quantities for n = 6, p = 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundStateModel {
    pub n: usize,
    pub p: f64,
    pub kappa: f64,
}

impl Default for GroundStateModel {
    fn default() -> Self {
        let n = 6.0f64;
        Self {
            n: 6,
            p: (n + 2.0) / (n - 2.0),
            kappa: (n * (n - 2.0)).powf(n / 2.0) / (2.0 * n),
        }
    }
}

impl GroundStateModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// n(n−2) = 24.
    pub fn scale_sq(&self) -> f64 {
        (self.n * (self.n - 2)) as f64
    }

    /// Q(r) at unit scale.
    pub fn q(&self, r: f64) -> f64 {
        let b = 1.0 + r * r / self.scale_sq();
        1.0 / (b * b)
    }

    pub fn q_prime(&self, r: f64) -> f64 {
        let b = 1.0 + r * r / self.scale_sq();
        -(r / 6.0) / (b * b * b)
    }

    /// Q_λ(r) = λ⁻²Q(r/λ).
    pub fn eval_q(&self, r: f64, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid(format!("scale must be positive, got {lambda}")));
        }
        if !(r >= 0.0) {
            return Err(invalid(format!("radius must be non-negative, got {r}")));
        }
        Ok(self.q(r / lambda) / (lambda * lambda))
    }

    /// ΛQ = (2 + r∂_r)Q = 2(1 − s)(1 + s)⁻³, s = r²/24.
    pub fn lambda_q(&self, r: f64) -> f64 {
        let s = r * r / self.scale_sq();
        let b = 1.0 + s;
        2.0 * (1.0 - s) / (b * b * b)
    }

    pub fn lambda_q_prime(&self, r: f64) -> f64 {
        let s = r * r / self.scale_sq();
        let b = 1.0 + s;
        (r / 3.0) * (s - 2.0) / (b * b * b * b)
    }

    /// V = pQ^{p−1} = 2Q.
    pub fn v(&self, r: f64) -> f64 {
        self.p * self.q(r)
    }

    /// lim r⁴V(r) = 2·24² = 1152.
    pub fn v_far(&self) -> f64 {
        self.p * self.scale_sq() * self.scale_sq()
    }

    /// Zero of ΛQ, √24.
    pub fn lambda_q_zero(&self) -> f64 {
        self.scale_sq().sqrt()
    }

    /// lim Γ = −κ⁻¹/(n−2) = −1/4608.
    pub fn gamma_tail_constant(&self) -> f64 {
        -1.0 / (self.kappa * (self.n - 2) as f64)
    }

    /// H f = 0 written as a first-order system in (f, f').
    fn homogeneous_system(&self) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
        let m = *self;
        move |r: f64, y: &[f64; 2]| [y[1], -5.0 / r * y[1] - m.v(r) * y[0]]
    }
}

pub fn eval_q(r: f64, lambda: f64) -> Result<f64> {
    GroundStateModel::default().eval_q(r, lambda)
}

pub fn eval_lambda_q(r: f64) -> f64 {
    GroundStateModel::default().lambda_q(r)
}

pub fn eval_v(r: f64) -> f64 {
    GroundStateModel::default().v(r)
}

/// Applies the three-point nonuniform stencil of Δ + V at interior nodes.
/// A node at r = 0 uses Δf(0) = 6 f''(0) with a mirrored ghost value.
/// Endpoint entries of the result are `NaN` unless the origin rule applies.
pub fn apply_h_discrete(model: &GroundStateModel, grid: &[f64], f: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut out = vec![f64::NAN; n];
    if grid[0] == 0.0 && n > 1 {
        let h = grid[1];
        out[0] = 12.0 * (f[1] - f[0]) / (h * h) + model.v(0.0) * f[0];
    }
    for i in 1..n - 1 {
        let r = grid[i];
        let w = fornberg(r, &grid[i - 1..=i + 1], 2);
        let d2: f64 = (0..3).map(|k| w[2][k] * f[i - 1 + k]).sum();
        let d1: f64 = (0..3).map(|k| w[1][k] * f[i - 1 + k]).sum();
        out[i] = d2 + 5.0 / r * d1 + model.v(r) * f[i];
    }
    out
}

/// Second homogeneous solution Γ of H Γ = 0, Wronskian-normalized against ΛQ.
#[derive(Debug, Clone, Serialize)]
pub struct SecondSolution {
    pub representation: RadialFunction,
    pub tail_constant: f64,
    pub anchor_radius: f64,
    /// Largest |W − 1| over the grid.
    pub wronskian_drift: f64,
}

impl SecondSolution {
    pub fn eval(&self, r: f64) -> Result<f64> {
        self.representation.eval(r)
    }

    /// (Γ'ΛQ − ΓΛQ')r⁵ at node `i`.
    pub fn wronskian_at_node(&self, model: &GroundStateModel, i: usize) -> f64 {
        let r = self.representation.grid()[i];
        let g = self.representation.values()[i];
        let dg = self
            .representation
            .deriv()
            .expect("Γ carries derivative samples")[i];
        (dg * model.lambda_q(r) - g * model.lambda_q_prime(r)) * r.powi(5)
    }

    pub fn wronskian_samples(&self, model: &GroundStateModel) -> Vec<(f64, f64)> {
        (0..self.representation.len())
            .map(|i| {
                (
                    self.representation.grid()[i],
                    self.wronskian_at_node(model, i),
                )
            })
            .collect()
    }

    /// Estimates lim Γ by continuing the ODE far past the grid and removing
    /// the r⁻² correction with two-point extrapolation.
    pub fn limit_estimate(&self, model: &GroundStateModel) -> Result<f64> {
        let rep = &self.representation;
        let last = rep.len() - 1;
        let r0 = rep.grid()[last];
        let y0 = [
            rep.values()[last],
            rep.deriv().expect("Γ carries derivative samples")[last],
        ];
        let ode = Dopri5::with_tolerances(1e-12, 1e-18);
        let (r1, r2) = (1e4, 2e4);
        let ys = ode.integrate_through(model.homogeneous_system(), &[r0, r1, r2], y0)?;
        let (g1, g2) = (ys[1][0], ys[2][0]);
        Ok((r2 * r2 * g2 - r1 * r1 * g1) / (r2 * r2 - r1 * r1))
    }
}

/// Γ at `r > √24` from the reduction-of-order integral
/// ΛQ(r)∫_R^r ds/(ΛQ(s)² s⁵), for cross-checking the ODE route.
pub fn gamma_integral_representation(model: &GroundStateModel, anchor: f64, r: f64) -> Result<f64> {
    let z = model.lambda_q_zero();
    if anchor <= z + ANCHOR_GAP || r <= z {
        return Err(invalid(
            "integral representation needs both radii beyond the zero of ΛQ",
        ));
    }
    let f = |s: f64| {
        let l = model.lambda_q(s);
        1.0 / (l * l * s.powi(5))
    };
    let (a, b, sign) = if r >= anchor {
        (anchor, r, 1.0)
    } else {
        (r, anchor, -1.0)
    };
    let est = integrate_with_breaks(f, &[a, b], Tolerance::new(0.0, 1e-13))?;
    Ok(model.lambda_q(r) * sign * est.value)
}

/// Builds Γ on the grid: seeded at the anchor by Γ(R) = 0,
/// Γ'(R) = 1/(ΛQ(R)R⁵), then integrated outward and inward through every node.
pub fn build_gamma(
    model: &GroundStateModel,
    anchor_radius: f64,
    spec: &GridSpec,
) -> Result<SecondSolution> {
    let z = model.lambda_q_zero();
    if !(anchor_radius > z + ANCHOR_GAP) {
        return Err(invalid(format!(
            "anchor radius {anchor_radius} too close to the zero of ΛQ at {z:.6} (need > {:.6})",
            z + ANCHOR_GAP
        )));
    }
    let grid = spec.geometric()?;
    if spec.r_min > 0.05 || spec.r_max < 50.0 {
        return Err(invalid("Γ grid must cover (0.05, 50) at least"));
    }
    if anchor_radius >= spec.r_max {
        return Err(invalid("anchor radius beyond the grid"));
    }
    let ode = Dopri5::with_tolerances(1e-12, 1e-22);
    let rhs = model.homogeneous_system();
    let seed = [
        0.0,
        1.0 / (model.lambda_q(anchor_radius) * anchor_radius.powi(5)),
    ];

    let split = grid.partition_point(|&r| r < anchor_radius);
    let mut outward = vec![anchor_radius];
    outward.extend_from_slice(&grid[split..]);
    let mut inward = vec![anchor_radius];
    inward.extend(grid[..split].iter().rev());

    let out = ode.integrate_through(&rhs, &outward, seed)?;
    let inn = ode.integrate_through(&rhs, &inward, seed)?;

    let mut values = Vec::with_capacity(grid.len());
    let mut deriv = Vec::with_capacity(grid.len());
    for y in inn[1..].iter().rev().chain(out[1..].iter()) {
        values.push(y[0]);
        deriv.push(y[1]);
    }
    let representation = RadialFunction::with_derivative(grid, values, deriv)?;
    let mut sol = SecondSolution {
        representation,
        tail_constant: model.gamma_tail_constant(),
        anchor_radius,
        wronskian_drift: 0.0,
    };
    let mut worst = (0.0f64, 0.0);
    for (r, w) in sol.wronskian_samples(model) {
        let d = (w - 1.0).abs();
        if d > worst.0 {
            worst = (d, r);
        }
    }
    sol.wronskian_drift = worst.0;
    if worst.0 > 1e-6 {
        return Err(Error::WronskianDrift {
            deviation: worst.0,
            at: worst.1,
        });
    }
    Ok(sol)
}

/// The two running integrals ∫₀^r ΛQ g s⁵ and ∫₀^r Γ g s⁵ on Γ's grid.
fn green_integrals(
    model: &GroundStateModel,
    gamma: &SecondSolution,
    g: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = gamma.representation.grid();
    let gv = gamma.representation.values();
    let a: Vec<f64> = grid
        .iter()
        .zip(g)
        .map(|(&r, &gi)| model.lambda_q(r) * gi * r.powi(5))
        .collect();
    let b: Vec<f64> = grid
        .iter()
        .zip(g)
        .zip(gv)
        .map(|((&r, &gi), &ga)| ga * gi * r.powi(5))
        .collect();
    let mut i1 = RadialFunction::new(grid.to_vec(), a)?.cumulative_integral();
    let mut i2 = RadialFunction::new(grid.to_vec(), b)?.cumulative_integral();
    // Pieces on (0, r₀): ΛQ g ≈ const and Γ ≈ Γ(r₀)(r₀/s)⁴ there.
    let r0 = grid[0];
    let head1 = model.lambda_q(r0) * g[0] * r0.powi(6) / 6.0;
    let head2 = gv[0] * g[0] * r0.powi(6) / 2.0;
    for v in i1.iter_mut() {
        *v += head1;
    }
    for v in i2.iter_mut() {
        *v += head2;
    }
    Ok((i1, i2))
}

/// Least-squares slope of log(r⁴|g|) against log r over the outer decade.
fn tail_slope(grid: &[f64], g: &[f64]) -> Option<f64> {
    let r_max = grid[grid.len() - 1];
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .zip(g)
        .filter(|(r, v)| **r >= r_max / 10.0 && v.abs() > 0.0)
        .map(|(r, v)| (r.ln(), (r.powi(4) * v.abs()).ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / m, sy / m);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(n, d), (x, y)| {
        (n + (x - mx) * (y - my), d + (x - mx) * (x - mx))
    });
    Some(num / den)
}

/// Largest relative pointwise residual of H T = g, with T'' obtained by
/// differentiating the stored T' samples.
pub fn h_residual(model: &GroundStateModel, t: &RadialFunction, g: &[f64]) -> f64 {
    let grid = t.grid();
    let dt = t.derivative_samples();
    let d2 = crate::numerics::fd::differentiate(grid, &dt, 1, 5);
    let mut worst = 0.0f64;
    for i in 2..grid.len().saturating_sub(2) {
        let r = grid[i];
        let terms = [d2[i], 5.0 / r * dt[i], model.v(r) * t.values()[i], -g[i]];
        let res: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|x| x.abs()).sum();
        if scale > 0.0 {
            worst = worst.max(res.abs() / scale);
        }
    }
    worst
}

/// Regular solution of H T = g by variation of parameters:
/// T = Γ∫₀^r ΛQ g s⁵ ds − ΛQ∫₀^r Γ g s⁵ ds.
pub fn solve_inhomogeneous(
    model: &GroundStateModel,
    gamma: &SecondSolution,
    g: &RadialFunction,
) -> Result<RadialFunction> {
    let grid = gamma.representation.grid().to_vec();
    let gs: Vec<f64> = if g.grid() == grid.as_slice() {
        g.values().to_vec()
    } else {
        g.resample(grid.clone())?.values().to_vec()
    };
    if let Some(slope) = tail_slope(&grid, &gs) {
        if slope > 0.5 {
            return Err(Error::NonIntegrableSource { slope });
        }
    }
    let (i1, i2) = green_integrals(model, gamma, &gs)?;
    let gv = gamma.representation.values();
    let gd = gamma
        .representation
        .deriv()
        .expect("Γ carries derivative samples");
    let mut values = Vec::with_capacity(grid.len());
    let mut deriv = Vec::with_capacity(grid.len());
    for (i, &r) in grid.iter().enumerate() {
        values.push(gv[i] * i1[i] - model.lambda_q(r) * i2[i]);
        deriv.push(gd[i] * i1[i] - model.lambda_q_prime(r) * i2[i]);
    }
    let t = RadialFunction::with_derivative(grid, values, deriv)?;
    let residual = h_residual(model, &t, &gs);
    let tolerance = 1e-6;
    if residual > tolerance {
        return Err(Error::ResidualTooLarge {
            residual,
            tolerance,
        });
    }
    Ok(t)
}

/// Regular solution of H T = g on `grid` from a second-order finite-difference
/// boundary-value solve. The inner row imposes T'(r₀) = r₀(g(0) − V(0)T(r₀))/6,
/// the outer row the far-field relation v∞T + (2R³ + v∞R/2)T' = g∞ where
/// g∞ = lim r⁴g. The result is shifted by a multiple of ΛQ so that T(0) = 0.
pub fn solve_bvp(
    model: &GroundStateModel,
    grid: &[f64],
    g: &[f64],
    g_far: f64,
) -> Result<RadialFunction> {
    let n = grid.len();
    if n < 5 || g.len() != n {
        return Err(invalid(
            "boundary-value solve needs at least 5 nodes and matching source samples",
        ));
    }
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = g.to_vec();
    for i in 1..n - 1 {
        let r = grid[i];
        let w = fornberg(r, &grid[i - 1..=i + 1], 2);
        lower[i] = w[2][0] + 5.0 / r * w[1][0];
        diag[i] = w[2][1] + 5.0 / r * w[1][1] + model.v(r);
        upper[i] = w[2][2] + 5.0 / r * w[1][2];
    }

    // Inner row: a0 T0 + a1 T1 + a2 T2 = b; eliminate T2 with row 1.
    let r0 = grid[0];
    let w0 = fornberg(r0, &grid[0..3], 1);
    let (mut a0, mut a1, a2) = (w0[1][0], w0[1][1], w0[1][2]);
    a0 += r0 * model.v(0.0) / 6.0;
    let mut b0 = r0 * g[0] / 6.0;
    let f = a2 / upper[1];
    a0 -= f * lower[1];
    a1 -= f * diag[1];
    b0 -= f * rhs[1];
    diag[0] = a0;
    upper[0] = a1;
    rhs[0] = b0;

    // Outer row: v∞T + c T' = g∞ with T' from the last three nodes.
    let rn = grid[n - 1];
    let vf = model.v_far();
    let c = 2.0 * rn.powi(3) + vf * rn / 2.0;
    let wn = fornberg(rn, &grid[n - 3..n], 1);
    let mut e = [c * wn[1][0], c * wn[1][1], c * wn[1][2] + vf];
    let mut bn = g_far;
    let f = e[0] / lower[n - 2];
    e[1] -= f * diag[n - 2];
    e[2] -= f * upper[n - 2];
    bn -= f * rhs[n - 2];
    lower[n - 1] = e[1];
    diag[n - 1] = e[2];
    rhs[n - 1] = bn;

    let mut t =
        solve_tridiagonal(&lower, &diag, &upper, &rhs).ok_or_else(|| Error::Integration {
            at: r0,
            reason: "singular boundary-value system".into(),
        })?;
    let dt0 = r0 * (g[0] - model.v(0.0) * t[0]) / 6.0;
    let t_origin = t[0] - 0.5 * r0 * dt0;
    let shift = t_origin / model.lambda_q(0.0);
    for (ti, &r) in t.iter_mut().zip(grid) {
        *ti -= shift * model.lambda_q(r);
    }
    Ok(RadialFunction::new(grid.to_vec(), t)?.with_computed_derivative())
}

/// T₁ from both routes with its two variation-of-parameters pieces.
#[derive(Debug, Clone, Serialize)]
pub struct T1Solution {
    pub t1: RadialFunction,
    /// −Γ∫₀^r (ΛQ)² s⁵ ds.
    pub gamma_part: RadialFunction,
    /// ΛQ∫₀^r ΓΛQ s⁵ ds.
    pub lambda_q_part: RadialFunction,
    pub bvp: RadialFunction,
    /// max|T₁ − T₁^bvp| / max|T₁| on the comparison range.
    pub deviation: f64,
}

/// Radius up to which the two T₁ routes are compared.
pub const T1_COMPARE_RADIUS: f64 = 50.0;

/// Relative agreement demanded between the two T₁ routes.
pub const T1_ROUTE_TOLERANCE: f64 = 1e-4;

pub fn build_t1(model: &GroundStateModel, gamma: &SecondSolution) -> Result<T1Solution> {
    let sol = build_t1_unchecked(model, gamma)?;
    if !(sol.deviation <= T1_ROUTE_TOLERANCE) {
        return Err(Error::CrossValidation {
            what: "T1 variation of parameters vs boundary-value solve".into(),
            deviation: sol.deviation,
            tolerance: T1_ROUTE_TOLERANCE,
        });
    }
    Ok(sol)
}

/// Both routes and their deviation, without enforcing the tolerance.
pub fn build_t1_unchecked(model: &GroundStateModel, gamma: &SecondSolution) -> Result<T1Solution> {
    let grid = gamma.representation.grid().to_vec();
    let g: Vec<f64> = grid.iter().map(|&r| -model.lambda_q(r)).collect();
    let g_fn = RadialFunction::new(grid.clone(), g.clone())?;
    let t1 = solve_inhomogeneous(model, gamma, &g_fn)?;

    let (i1, i2) = green_integrals(model, gamma, &g)?;
    let gv = gamma.representation.values();
    let gd = gamma
        .representation
        .deriv()
        .expect("Γ carries derivative samples");
    let gamma_part = RadialFunction::with_derivative(
        grid.clone(),
        (0..grid.len()).map(|i| gv[i] * i1[i]).collect(),
        (0..grid.len()).map(|i| gd[i] * i1[i]).collect(),
    )?;
    let lambda_q_part = RadialFunction::with_derivative(
        grid.clone(),
        grid.iter()
            .zip(&i2)
            .map(|(&r, &v)| -model.lambda_q(r) * v)
            .collect(),
        grid.iter()
            .zip(&i2)
            .map(|(&r, &v)| -model.lambda_q_prime(r) * v)
            .collect(),
    )?;

    // lim r⁴(−ΛQ) = κ.
    let bvp = solve_bvp(model, &grid, &g, model.kappa)?;
    let mut diff: f64 = 0.0;
    let mut size: f64 = 0.0;
    for ((r, a), b) in grid.iter().zip(t1.values()).zip(bvp.values()) {
        if *r <= T1_COMPARE_RADIUS {
            diff = diff.max((a - b).abs());
            size = size.max(a.abs());
        }
    }
    Ok(T1Solution {
        t1,
        gamma_part,
        lambda_q_part,
        bvp,
        deviation: diff / size,
    })
}

/// T₁ evaluable on all of [0, ∞): tabulated values inside the grid, the
/// origin series T₁ ≈ −r²/6 below it and T∞ + a r⁻² beyond it.
#[derive(Debug, Clone, Serialize)]
pub struct Corrector {
    table: RadialFunction,
    model: GroundStateModel,
    far_limit: f64,
    far_coeff: f64,
}

impl Corrector {
    pub fn new(model: GroundStateModel, t1: RadialFunction) -> Self {
        let t1 = t1.with_computed_derivative();
        let last = t1.len() - 1;
        let rn = t1.grid()[last];
        let dn = t1.deriv().expect("derivative attached")[last];
        let far_coeff = -0.5 * rn.powi(3) * dn;
        let far_limit = t1.values()[last] - far_coeff / (rn * rn);
        Self {
            table: t1,
            model,
            far_limit,
            far_coeff,
        }
    }

    /// Builds Γ and T₁ on the default grid.
    pub fn standard() -> Result<Self> {
        let model = GroundStateModel::default();
        let gamma = build_gamma(&model, GAMMA_ANCHOR, &GridSpec::default())?;
        let t1 = build_t1(&model, &gamma)?;
        Ok(Self::new(model, t1.t1))
    }

    /// Adds a constant to the far-field limit (used for sensitivity tests).
    pub fn with_limit_shift(mut self, shift: f64) -> Self {
        self.far_limit += shift;
        let vals: Vec<f64> = self.table.values().iter().map(|v| v + shift).collect();
        let deriv = self.table.deriv().map(|d| d.to_vec()).unwrap_or_default();
        self.table = RadialFunction::with_derivative(self.table.grid().to_vec(), vals, deriv)
            .expect("shifted table stays valid");
        self
    }

    pub fn table(&self) -> &RadialFunction {
        &self.table
    }

    /// Far-field limit T₁(∞) read off the outermost node.
    pub fn limit(&self) -> f64 {
        self.far_limit
    }

    /// (T₁(y), T₁'(y)).
    pub fn eval(&self, y: f64) -> (f64, f64) {
        let y = y.abs();
        if y < self.table.r_min() {
            let a = -self.model.lambda_q(0.0) / 12.0;
            (a * y * y, 2.0 * a * y)
        } else if y > self.table.r_max() {
            (
                self.far_limit + self.far_coeff / (y * y),
                -2.0 * self.far_coeff / (y * y * y),
            )
        } else {
            self.table.eval_both(y).expect("inside table")
        }
    }

    /// ΔT₁ = −ΛQ − V T₁.
    pub fn laplacian(&self, y: f64) -> f64 {
        -self.model.lambda_q(y) - self.model.v(y) * self.eval(y).0
    }
}

/// Value of ∫₀^∞(ΛQ)²r⁵dr and its normalized form.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LambdaQIntegral {
    /// ∫₀^∞(1−s)²s²/(1+s)⁶ds, which equals 2/15.
    pub value: f64,
    pub error: f64,
    /// The integral in r itself, 27648·value = 3686.4.
    pub raw: f64,
    /// Factor between `raw` and `value`: ((n−2)/2)²{n(n−2)}^{n/2}/2.
    pub prefactor: f64,
}

fn lq_sq_r5(model: &GroundStateModel, r: f64) -> f64 {
    let l = model.lambda_q(r);
    l * l * r.powi(5)
}

/// Adaptive quadrature of (ΛQ)²r⁵ over (0, ∞). The tail beyond r = 50 is
/// mapped to (0, 1] by r = 50/u, where the integrand is smooth.
pub fn integral_lambda_q_squared(model: &GroundStateModel) -> Result<LambdaQIntegral> {
    let tol = Tolerance {
        abs: 1e-10,
        rel: 1e-14,
        max_panels: 10_000,
    };
    let rc = 50.0;
    let core = integrate_with_breaks(
        |r| lq_sq_r5(model, r),
        &[0.0, 2.0, model.lambda_q_zero(), 10.0, 20.0, rc],
        tol,
    )?;
    let tail = integrate_with_breaks(
        |u: f64| {
            if u == 0.0 {
                0.0
            } else {
                lq_sq_r5(model, rc / u) * rc / (u * u)
            }
        },
        &[0.0, 0.5, 1.0],
        tol,
    )?;
    let h = (model.n - 2) as f64 / 2.0;
    let prefactor = h * h * model.scale_sq().powf(model.n as f64 / 2.0) / 2.0;
    let raw = core.value + tail.value;
    Ok(LambdaQIntegral {
        value: raw / prefactor,
        error: (core.error + tail.error) / prefactor,
        raw,
        prefactor,
    })
}

/// ∫₀^{r_max}(ΛQ)²r⁵dr without any tail, in raw units.
pub fn truncated_lambda_q_squared(model: &GroundStateModel, r_max: f64) -> Result<f64> {
    let tol = Tolerance {
        abs: 1e-10,
        rel: 1e-14,
        max_panels: 10_000,
    };
    let mut breaks = vec![0.0];
    breaks.extend(
        [2.0, model.lambda_q_zero(), 10.0, 20.0]
            .into_iter()
            .filter(|&b| b < r_max),
    );
    breaks.push(r_max);
    Ok(integrate_with_breaks(|r| lq_sq_r5(model, r), &breaks, tol)?.value)
}

/// Exact value of ∫₀^∞(1−s)²s²/(1+s)⁶ds by partial fractions in t = 1 + s:
/// the integrand becomes Σ c_k t^{−k} with ∫₁^∞ t^{−k}dt = 1/(k−1).
pub fn reduced_integral_exact() -> Rational64 {
    // (2 − t)(t − 1) = −t² + 3t − 2, coefficients by ascending power.
    let base = [
        Rational64::from(-2),
        Rational64::from(3),
        Rational64::from(-1),
    ];
    let mut sq = [Rational64::from(0); 5];
    for (i, a) in base.iter().enumerate() {
        for (j, b) in base.iter().enumerate() {
            sq[i + j] += a * b;
        }
    }
    // t^j / t⁶ = t^{−(6−j)}.
    sq.iter()
        .enumerate()
        .map(|(j, c)| {
            let k = 6 - j as i64;
            c / Rational64::from(k - 1)
        })
        .sum()
}
