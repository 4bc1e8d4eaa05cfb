//! Radial Dirichlet eigenproblems −(Δ + V)ψ = μψ on balls B_R and the
//! bounded solution p_M of Δp + (1 − χ_M)Vp = 0.

use rayon::prelude::*;
use serde::Serialize;

use crate::cutoff::eta;
use crate::error::{invalid, Error, Result};
use crate::grid::{geometric_grid, uniform_grid, RadialFunction};
use crate::ground_state::GroundStateModel;
use crate::numerics::fd::differentiate;
use crate::numerics::Dopri5;

/// Potential in the radial operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Potential {
    /// V = 2Q.
    GroundState,
    /// V ≡ 0, the plain Laplacian.
    Zero,
}

impl Potential {
    pub fn at(&self, r: f64) -> f64 {
        match self {
            Potential::GroundState => GroundStateModel::default().v(r),
            Potential::Zero => 0.0,
        }
    }
}

/// Shooting and bracketing settings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShootingConfig {
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub mu_step: f64,
    pub mu_tol: f64,
    /// Spacing of the uniform grid ψ is reported on.
    pub sample_step: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            mu_lo: -5.0,
            mu_hi: 5.0,
            mu_step: 0.05,
            mu_tol: 1e-11,
            sample_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    #[serde(rename = "R")]
    pub radius: f64,
    pub index: usize,
    pub mu: f64,
    /// Normalized so that ψ(0) = 1.
    #[serde(skip)]
    pub psi: RadialFunction,
    pub zeros: usize,
    /// max|Hψ + μψ| / max|ψ| on interior nodes, fourth-order differences.
    pub residual: f64,
}

const R_START: f64 = 1e-3;

fn shooting_ode() -> Dopri5 {
    Dopri5 {
        rtol: 1e-12,
        atol: 1e-14,
        h_max: 0.1,
        ..Dopri5::default()
    }
}

fn rhs(pot: Potential, mu: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    move |r: f64, y: &[f64; 2]| [y[1], -5.0 / r * y[1] - (pot.at(r) + mu) * y[0]]
}

/// Series start ψ ≈ 1 − (V(0) + μ)r²/12 off the origin.
fn origin_state(pot: Potential, mu: f64, r: f64) -> [f64; 2] {
    let k = pot.at(0.0) + mu;
    [1.0 - k * r * r / 12.0, -k * r / 6.0]
}

/// Number of sign changes of the shooting solution on (0, R].
fn count_sign_changes(pot: Potential, mu: f64, radius: f64) -> Result<usize> {
    let mut last = 1.0f64;
    let mut count = 0usize;
    shooting_ode().integrate_observed(
        rhs(pot, mu),
        R_START,
        origin_state(pot, mu, R_START),
        radius,
        &mut |_r: f64, y: &[f64; 2]| {
            if y[0] != 0.0 {
                if y[0].signum() != last.signum() {
                    count += 1;
                }
                last = y[0];
            }
            true
        },
    )?;
    Ok(count)
}

/// The `index`-th Dirichlet eigenvalue on B_R (index ≥ 1) by zero counting
/// and bisection: μ_k = inf{μ : ψ(·; μ) has at least k sign changes on (0, R]}.
pub fn find_eigenvalue(
    pot: Potential,
    radius: f64,
    index: usize,
    cfg: &ShootingConfig,
) -> Result<f64> {
    let steps = ((cfg.mu_hi - cfg.mu_lo) / cfg.mu_step).round() as usize;
    if count_sign_changes(pot, cfg.mu_lo, radius)? >= index {
        return Err(Error::BracketNotFound {
            index,
            lo: cfg.mu_lo,
            hi: cfg.mu_hi,
        });
    }
    let mut lo = cfg.mu_lo;
    let mut hi = None;
    for k in 1..=steps {
        let mu = cfg.mu_lo + k as f64 * cfg.mu_step;
        if count_sign_changes(pot, mu, radius)? >= index {
            hi = Some(mu);
            break;
        }
        lo = mu;
    }
    let mut hi = hi.ok_or(Error::BracketNotFound {
        index,
        lo: cfg.mu_lo,
        hi: cfg.mu_hi,
    })?;
    while hi - lo > cfg.mu_tol {
        let mid = 0.5 * (lo + hi);
        if count_sign_changes(pot, mid, radius)? >= index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Eigenfunction for a converged μ by shooting inward from R and outward
/// from 0, matched in value at an interior radius.
fn eigenfunction(
    pot: Potential,
    mu: f64,
    radius: f64,
    cfg: &ShootingConfig,
) -> Result<RadialFunction> {
    let nodes = (radius / cfg.sample_step).round() as usize + 1;
    let grid = uniform_grid(0.0, radius, nodes);
    let r_match = (0.5 * radius).min(8.0);
    let m = grid.partition_point(|&r| r < r_match);
    let ode = shooting_ode();

    let mut fwd_pts = vec![R_START];
    fwd_pts.extend_from_slice(&grid[1..=m]);
    let fwd = ode.integrate_through(rhs(pot, mu), &fwd_pts, origin_state(pot, mu, R_START))?;
    let mut bwd_pts: Vec<f64> = grid[m..].iter().rev().copied().collect();
    bwd_pts.dedup();
    let bwd = ode.integrate_through(rhs(pot, mu), &bwd_pts, [0.0, -1.0])?;

    let scale = fwd[m][0] / bwd[bwd.len() - 1][0];
    let mut values = vec![0.0; nodes];
    let mut deriv = vec![0.0; nodes];
    values[0] = 1.0;
    for i in 1..=m {
        values[i] = fwd[i][0];
        deriv[i] = fwd[i][1];
    }
    for (k, y) in bwd.iter().enumerate() {
        let i = nodes - 1 - k;
        if i > m {
            values[i] = scale * y[0];
            deriv[i] = scale * y[1];
        }
    }
    values[nodes - 1] = 0.0;
    RadialFunction::with_derivative(grid, values, deriv)
}

/// Interior sign changes of sampled ψ, ignoring values at round-off level.
fn interior_zeros(psi: &RadialFunction) -> usize {
    let floor = 1e-9 * psi.max_abs();
    let vals = psi.values();
    let mut last = 0.0f64;
    let mut count = 0;
    for &v in &vals[..vals.len() - 1] {
        if v.abs() <= floor {
            continue;
        }
        if last != 0.0 && v.signum() != last.signum() {
            count += 1;
        }
        last = v;
    }
    count
}

/// max|ψ'' + 5ψ'/r + (V + μ)ψ| / max|ψ| with five-point differences.
fn eigen_residual(pot: Potential, mu: f64, psi: &RadialFunction) -> f64 {
    let grid = psi.grid();
    let v = psi.values();
    let d1 = differentiate(grid, v, 1, 5);
    let d2 = differentiate(grid, v, 2, 5);
    let mut worst = 0.0f64;
    for i in 2..grid.len() - 2 {
        let r = grid[i];
        let res = d2[i] + 5.0 / r * d1[i] + (pot.at(r) + mu) * v[i];
        worst = worst.max(res.abs());
    }
    worst / psi.max_abs()
}

pub fn solve_dirichlet_eigen(radius: f64, index: usize) -> Result<EigenResult> {
    solve_dirichlet_eigen_with(
        Potential::GroundState,
        radius,
        index,
        &ShootingConfig::default(),
    )
}

pub fn solve_dirichlet_eigen_with(
    pot: Potential,
    radius: f64,
    index: usize,
    cfg: &ShootingConfig,
) -> Result<EigenResult> {
    if !(radius >= 5.0) || !radius.is_finite() {
        return Err(invalid(format!("ball radius must be ≥ 5, got {radius}")));
    }
    if !(1..=3).contains(&index) {
        return Err(invalid(format!(
            "eigenvalue index must be 1, 2 or 3, got {index}"
        )));
    }
    let mu = find_eigenvalue(pot, radius, index, cfg)?;
    let psi = eigenfunction(pot, mu, radius, cfg)?;
    let zeros = interior_zeros(&psi);
    if zeros != index - 1 {
        return Err(Error::ZeroCountMismatch {
            expected: index - 1,
            found: zeros,
        });
    }
    let residual = eigen_residual(pot, mu, &psi);
    Ok(EigenResult {
        radius,
        index,
        mu,
        psi,
        zeros,
        residual,
    })
}

/// μ₁^{(R)} over several radii with a monotonicity report.
#[derive(Debug, Clone, Serialize)]
pub struct Mu1Estimate {
    pub radii: Vec<f64>,
    pub mu1: Vec<f64>,
    /// Aitken extrapolation of the last three values (last value if degenerate).
    pub limit: f64,
    /// μ₁ non-increasing in R up to 1e-9.
    pub monotone: bool,
    /// |μ₁(R_{k+1}) − μ₁(R_k)|.
    pub spreads: Vec<f64>,
}

pub fn estimate_mu1_infinity(radii: &[f64]) -> Result<Mu1Estimate> {
    if radii.len() < 3 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("need at least three increasing radii"));
    }
    let mu1: Vec<f64> = radii
        .par_iter()
        .map(|&r| solve_dirichlet_eigen(r, 1).map(|e| e.mu))
        .collect::<Result<_>>()?;
    let monotone = mu1.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let spreads: Vec<f64> = mu1.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let k = mu1.len();
    let (a, b, c) = (mu1[k - 3], mu1[k - 2], mu1[k - 1]);
    let den = (c - b) - (b - a);
    let limit = if den.abs() > 1e-14 && ((c - b) / (b - a)).abs() < 1.0 {
        c - (c - b) * (c - b) / den
    } else {
        c
    };
    Ok(Mu1Estimate {
        radii: radii.to_vec(),
        mu1,
        limit,
        monotone,
        spreads,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayReport {
    pub positive: bool,
    /// sup over (0, 0.9R) of ψ(1 + r)^{5/2}e^{√|μ|r}.
    pub bound: f64,
    pub psi_at_origin: f64,
}

pub fn decay_check(result: &EigenResult) -> Result<DecayReport> {
    if result.index != 1 {
        return Err(invalid("decay check applies to the first eigenfunction"));
    }
    let k = result.mu.abs().sqrt();
    let grid = result.psi.grid();
    let vals = result.psi.values();
    let mut bound = 0.0f64;
    for (i, (&r, &v)) in grid.iter().zip(vals).enumerate() {
        if i + 1 < grid.len() && !(v > 0.0) {
            return Err(Error::SignChange { at: r });
        }
        if r < 0.9 * result.radius {
            bound = bound.max(v * (1.0 + r).powf(2.5) * (k * r).exp());
        }
    }
    Ok(DecayReport {
        positive: true,
        bound,
        psi_at_origin: vals[0],
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub radii: Vec<f64>,
    pub mu2: Vec<f64>,
    /// μ₂R⁴.
    pub scaled: Vec<f64>,
    /// μ₂R².
    pub scaled_laplace: Vec<f64>,
    pub min_scaled: f64,
    /// max/min of μ₂R⁴.
    pub band_ratio: f64,
    pub pass: bool,
}

pub fn gap_scaling_check(radii: &[f64]) -> Result<GapReport> {
    gap_scaling_check_with(Potential::GroundState, radii)
}

pub fn gap_scaling_check_with(pot: Potential, radii: &[f64]) -> Result<GapReport> {
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("radii must be increasing"));
    }
    let cfg = ShootingConfig::default();
    let mu2: Vec<f64> = radii
        .par_iter()
        .map(|&r| solve_dirichlet_eigen_with(pot, r, 2, &cfg).map(|e| e.mu))
        .collect::<Result<_>>()?;
    if let Some(bad) = mu2.iter().find(|m| **m <= 0.0) {
        return Err(invalid(format!("second eigenvalue {bad} is not positive")));
    }
    let scaled: Vec<f64> = radii.iter().zip(&mu2).map(|(r, m)| m * r.powi(4)).collect();
    let scaled_laplace: Vec<f64> = radii.iter().zip(&mu2).map(|(r, m)| m * r * r).collect();
    let min_scaled = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_scaled = scaled.iter().cloned().fold(0.0, f64::max);
    let band_ratio = max_scaled / min_scaled;
    Ok(GapReport {
        radii: radii.to_vec(),
        mu2,
        scaled,
        scaled_laplace,
        min_scaled,
        band_ratio,
        pass: min_scaled > 0.0 && band_ratio <= 4.0,
    })
}

/// Eigenvalues of the second-order finite-volume discretization on a uniform
/// grid of `cells` cells, found by Sturm-sequence bisection. Independent of
/// the shooting route.
pub fn fd_eigenvalues(pot: Potential, radius: f64, cells: usize, count: usize) -> Vec<f64> {
    let h = radius / cells as f64;
    // Unknowns ψ_0..ψ_{cells−1}; ψ_cells = 0.
    let n = cells;
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let r = i as f64 * h;
        let rl = if i == 0 { 0.0 } else { r - 0.5 * h };
        let rr = r + 0.5 * h;
        w[i] = (rr.powi(6) - rl.powi(6)) / 6.0;
        let fl = rl.powi(5) / h;
        let fr = rr.powi(5) / h;
        diag[i] = fl + fr - w[i] * pot.at(r);
        if i + 1 < n {
            off[i] = -fr;
        }
    }
    if n > 0 {
        // Node 0 has no left flux.
        diag[0] = (0.5 * h).powi(5) / h - w[0] * pot.at(0.0);
    }
    // Symmetric standard form W^{-1/2} K W^{-1/2}.
    let a: Vec<f64> = (0..n).map(|i| diag[i] / w[i]).collect();
    let b: Vec<f64> = (0..n.saturating_sub(1))
        .map(|i| off[i] / (w[i] * w[i + 1]).sqrt())
        .collect();
    let count_below = |x: f64| {
        let mut c = 0;
        let mut d = a[0] - x;
        if d < 0.0 {
            c += 1;
        }
        for i in 1..n {
            let prev = if d == 0.0 { 1e-300 } else { d };
            d = a[i] - x - b[i - 1] * b[i - 1] / prev;
            if d < 0.0 {
                c += 1;
            }
        }
        c
    };
    let gersh = (0..n)
        .map(|i| {
            let l = if i > 0 { b[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { b[i].abs() } else { 0.0 };
            (a[i] - l - r, a[i] + l + r)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (l, r)| {
            (lo.min(l), hi.max(r))
        });
    (1..=count)
        .map(|k| {
            let (mut lo, mut hi) = gersh;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(mid) >= k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// The bounded solution p_M of Δp + (1 − η(r/M))Vp = 0 with p = 1 on [0, M].
#[derive(Debug, Clone, Serialize)]
pub struct PerturbedSolution {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(skip)]
    pub pm: RadialFunction,
    /// min p_M on (M, r_max).
    pub lower_bound: f64,
    pub max_value: f64,
    /// 0 < p_M ≤ 1 on the computed range.
    pub within_bounds: bool,
}

pub fn solve_pm(m: f64, r_max: f64) -> Result<PerturbedSolution> {
    solve_pm_with(Potential::GroundState, m, r_max)
}

pub fn solve_pm_with(pot: Potential, m: f64, r_max: f64) -> Result<PerturbedSolution> {
    if !(m > 0.0) || !(r_max >= 10.0 * m) {
        return Err(invalid(format!(
            "need M > 0 and r_max ≥ 10M, got M = {m}, r_max = {r_max}"
        )));
    }
    let inner = uniform_grid(0.0, m, 41);
    let outer = geometric_grid(m, r_max, 2001);
    let ode = Dopri5 {
        rtol: 1e-12,
        atol: 1e-14,
        h_max: 0.5 * m,
        ..Dopri5::default()
    };
    let f = move |r: f64, y: &[f64; 2]| {
        [
            y[1],
            -5.0 / r * y[1] - (1.0 - eta(r / m)) * pot.at(r) * y[0],
        ]
    };
    let ys = ode.integrate_through(f, &outer, [1.0, 0.0])?;
    let mut grid = inner.clone();
    let mut values = vec![1.0; inner.len()];
    let mut deriv = vec![0.0; inner.len()];
    for (r, y) in outer.iter().zip(&ys).skip(1) {
        grid.push(*r);
        values.push(y[0]);
        deriv.push(y[1]);
    }
    let (lower_bound, max_value) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
            (lo.min(y[0]), hi.max(y[0]))
        });
    let pm = RadialFunction::with_derivative(grid, values, deriv)?;
    Ok(PerturbedSolution {
        m,
        pm,
        lower_bound,
        max_value,
        within_bounds: lower_bound > 0.0 && max_value <= 1.0,
    })
}

/// Smallest M on the scan M = start, start + step, … (up to `m_max`) for which
/// 0 < p_M ≤ 1 holds on (M, 10M).
pub fn smallest_admissible_m(start: f64, step: f64, m_max: f64) -> Result<Option<f64>> {
    let mut m = start;
    while m <= m_max + 1e-12 {
        if solve_pm(m, 10.0 * m)?.within_bounds {
            return Ok(Some(m));
        }
        m += step;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    const J2: [f64; 3] = [
        5.135_622_301_840_683,
        8.417_244_140_399_865,
        11.619_841_172_149_06,
    ];

    #[test]
    fn laplacian_control_matches_bessel_zeros() {
        let cfg = ShootingConfig::default();
        for (k, j) in J2.iter().enumerate() {
            let e = solve_dirichlet_eigen_with(Potential::Zero, 10.0, k + 1, &cfg).unwrap();
            assert!(
                (e.mu - j * j / 100.0).abs() < 1e-9,
                "{} vs {}",
                e.mu,
                j * j / 100.0
            );
            assert_eq!(e.zeros, k);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_dirichlet_eigen(4.0, 1).is_err());
        assert!(solve_dirichlet_eigen(10.0, 4).is_err());
        assert!(solve_pm(20.0, 100.0).is_err());
    }

    #[test]
    fn fd_route_converges_at_second_order() {
        let mu = |cells| fd_eigenvalues(Potential::GroundState, 10.0, cells, 1)[0];
        let (a, b, c) = (mu(250), mu(500), mu(1000));
        let ratio = (a - b) / (b - c);
        assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
        let shoot = solve_dirichlet_eigen(10.0, 1).unwrap().mu;
        assert!((c - shoot).abs() < 1e-4, "{c} vs {shoot}");
    }

    #[test]
    fn pm_is_one_inside_and_harmonic_without_potential() {
        let s = solve_pm(20.0, 400.0).unwrap();
        for (&r, &v) in s.pm.grid().iter().zip(s.pm.values()) {
            if r <= 20.0 {
                assert_eq!(v, 1.0);
            }
        }
        let z = solve_pm_with(Potential::Zero, 20.0, 400.0).unwrap();
        assert!(z.pm.values().iter().all(|v| *v == 1.0));
    }
}
