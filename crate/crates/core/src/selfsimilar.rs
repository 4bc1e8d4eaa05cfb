//! Gaussian-weighted space L²_ρ(ℝ⁶), ρ = e^{−|z|²/4}, the operator
//! A_z = Δ − (z/2)·∇ on radial polynomials, and its eigenfunctions e₀, e₁, e₂.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numerics::quadrature::{integrate_with_breaks, Tolerance};

/// Polynomial in s = |z|² with exact rational coefficients (ascending powers).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SPoly(pub Vec<Rational64>);

fn r(v: i64) -> Rational64 {
    Rational64::from(v)
}

impl SPoly {
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self(coeffs.iter().map(|&c| r(c)).collect()).trimmed()
    }

    pub fn zero() -> Self {
        Self(Vec::new())
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| *c == r(0)) {
            self.0.pop();
        }
        self
    }

    pub fn degree(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn scale(&self, k: Rational64) -> Self {
        Self(self.0.iter().map(|c| c * k).collect()).trimmed()
    }

    pub fn derivative(&self) -> Self {
        Self(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * r(k as i64))
                .collect(),
        )
        .trimmed()
    }

    /// Value at s = |z|².
    pub fn eval(&self, s: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * s + to_f64(*c))
    }

    pub fn coeff_f64(&self) -> Vec<f64> {
        self.0.iter().map(|c| to_f64(*c)).collect()
    }
}

fn to_f64(c: Rational64) -> f64 {
    *c.numer() as f64 / *c.denom() as f64
}

impl Add for &SPoly {
    type Output = SPoly;
    fn add(self, rhs: &SPoly) -> SPoly {
        let n = self.0.len().max(rhs.0.len());
        let get = |p: &SPoly, i: usize| p.0.get(i).copied().unwrap_or(r(0));
        SPoly((0..n).map(|i| get(self, i) + get(rhs, i)).collect()).trimmed()
    }
}

impl Mul for &SPoly {
    type Output = SPoly;
    fn mul(self, rhs: &SPoly) -> SPoly {
        if self.0.is_empty() || rhs.0.is_empty() {
            return SPoly::zero();
        }
        let mut out = vec![r(0); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in rhs.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        SPoly(out).trimmed()
    }
}

/// A_z on a radial polynomial f(s): 4s f'' + (2n − s) f'.
pub fn apply_az(f: &SPoly, n: usize) -> SPoly {
    let d1 = f.derivative();
    let d2 = d1.derivative();
    let four_s_d2 = &SPoly::from_ints(&[0, 4]) * &d2;
    let lin = &SPoly::from_ints(&[2 * n as i64, -1]) * &d1;
    &four_s_d2 + &lin
}

/// Total ρ-mass ∫_{ℝⁿ}e^{−|z|²/4}dz = (4π)^{n/2}.
pub fn rho_mass(n: usize) -> f64 {
    (4.0 * PI).powf(n as f64 / 2.0)
}

/// Surface area of S^{n−1}; π³ for n = 6.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

// Γ(n/2) for integer n.
fn gamma_half(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < n as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// ρ-moment of s^k relative to the total mass, exact: 4^k Γ(n/2 + k)/Γ(n/2).
pub fn normalized_moment(k: usize, n: usize) -> Result<Rational64> {
    if !n.is_multiple_of(2) || k > 8 {
        return Err(invalid(
            "exact moments are available for even n and degree ≤ 8",
        ));
    }
    let h = n as i64 / 2;
    let mut m = r(1);
    for j in 0..k as i64 {
        m *= r(4 * (h + j));
    }
    Ok(m)
}

/// Closed-form (f, g)_ρ for radial polynomials, full ℝⁿ integral.
pub fn rho_inner_product(f: &SPoly, g: &SPoly, n: usize) -> Result<f64> {
    Ok(rho_mass(n) * to_f64(normalized_expectation(&(f * g), n)?))
}

/// ∫ f ρ / ∫ ρ exactly.
pub fn normalized_expectation(f: &SPoly, n: usize) -> Result<Rational64> {
    let mut acc = r(0);
    for (k, c) in f.0.iter().enumerate() {
        acc += c * normalized_moment(k, n)?;
    }
    Ok(acc)
}

/// (f, g)_ρ for arbitrary radial functions of |z| by adaptive quadrature,
/// |S⁵|∫₀^∞ f g e^{−r²/4} r⁵ dr.
pub fn rho_inner_product_fn(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    n: usize,
) -> Result<f64> {
    let h = |x: f64| f(x) * g(x) * (-x * x / 4.0).exp() * x.powi(n as i32 - 1);
    // The weighted integrand must have died out well before the cut.
    let peak = [2.0, 4.0, 6.0, 10.0]
        .iter()
        .fold(0.0f64, |m, &x| m.max(h(x).abs()));
    let edge = h(60.0).abs().max(h(80.0).abs());
    if !edge.is_finite() || edge > 1e-14 * peak.max(f64::MIN_POSITIVE) {
        return Err(invalid(
            "integrand grows too fast to be integrable against ρ",
        ));
    }
    let tol = Tolerance {
        abs: 1e-14,
        rel: 1e-13,
        max_panels: 10_000,
    };
    let est = integrate_with_breaks(h, &[0.0, 2.0, 4.0, 6.0, 8.0, 12.0, 20.0, 80.0], tol)?;
    Ok(sphere_area(n) * est.value)
}

/// Normalized eigenfunctions e₀, e₁, e₂ of −A_z and the constant α.
#[derive(Debug, Clone, Serialize)]
pub struct HermiteBasis {
    pub n: usize,
    pub p: f64,
    /// Unnormalized polynomials in s (leading coefficient 1).
    #[serde(skip)]
    pub poly: [SPoly; 3],
    pub c: [f64; 3],
    pub alpha: f64,
}

impl HermiteBasis {
    /// e_i(|z|).
    pub fn e(&self, i: usize, z: f64) -> f64 {
        self.c[i] * self.poly[i].eval(z * z)
    }

    /// Radial derivative ∂_{|z|} e_i = 2|z| c_i P_i'(s).
    pub fn e_radial_deriv(&self, i: usize, z: f64) -> f64 {
        2.0 * z * self.c[i] * self.poly[i].derivative().eval(z * z)
    }

    /// |∇e₁|² = 4c₁²|z|².
    pub fn grad_e1_sq(&self, z: f64) -> f64 {
        let d = self.e_radial_deriv(1, z);
        d * d
    }

    /// Gram matrix by closed-form moments.
    pub fn gram(&self) -> Result<[[f64; 3]; 3]> {
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = self.c[i]
                    * self.c[j]
                    * rho_inner_product(&self.poly[i], &self.poly[j], self.n)?;
            }
        }
        Ok(g)
    }

    /// Gram matrix by quadrature.
    pub fn gram_quadrature(&self) -> Result<[[f64; 3]; 3]> {
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = rho_inner_product_fn(|z| self.e(i, z), |z| self.e(j, z), self.n)?;
            }
        }
        Ok(g)
    }
}

/// e₀ = c₀, e₁ = c₁(s − 2n), e₂ = c₂(s² − (4n+8)s + 4n² + 8n), normalized in L²_ρ.
pub fn build_basis() -> Result<HermiteBasis> {
    build_basis_with(6, 2.0)
}

pub fn build_basis_with(n: usize, p: f64) -> Result<HermiteBasis> {
    if !n.is_multiple_of(2) || n < 2 {
        return Err(invalid("the basis is implemented for even dimensions"));
    }
    let ni = n as i64;
    let poly = [
        SPoly::from_ints(&[1]),
        SPoly::from_ints(&[-2 * ni, 1]),
        SPoly::from_ints(&[4 * ni * ni + 8 * ni, -(4 * ni + 8), 1]),
    ];
    let mut c = [0.0; 3];
    for i in 0..3 {
        c[i] = 1.0 / rho_inner_product(&poly[i], &poly[i], n)?.sqrt();
    }
    let mut basis = HermiteBasis {
        n,
        p,
        poly,
        c,
        alpha: 0.0,
    };
    basis.alpha = compute_alpha(&basis)?;
    Ok(basis)
}

/// ((e₁², e₁)_ρ, (|∇e₁|², e₁)_ρ).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CubicMoments {
    pub e1_cubed: f64,
    pub grad_sq_e1: f64,
    /// max_z |(|∇e₁|² − 4c₁e₁ − 8nc₁²)| / (4c₁²(1 + |z|²)) over a sample of radii.
    pub pointwise_identity_defect: f64,
}

/// Tolerance used when asserting the cubic-moment identities.
pub const MOMENT_TOLERANCE: f64 = 1e-8;

/// Both cubic moments by quadrature, checked against 8c₁ and 4c₁ and the
/// pointwise identity |∇e₁|² = 4c₁e₁ + 8nc₁².
pub fn cubic_moments(basis: &HermiteBasis) -> Result<CubicMoments> {
    let n = basis.n;
    let c1 = basis.c[1];
    let e1_cubed = rho_inner_product_fn(|z| basis.e(1, z).powi(2), |z| basis.e(1, z), n)?;
    let grad_sq_e1 = rho_inner_product_fn(|z| basis.grad_e1_sq(z), |z| basis.e(1, z), n)?;
    let mut defect = 0.0f64;
    for k in 0..=200 {
        let z = 0.05 * k as f64;
        let lhs = basis.grad_e1_sq(z);
        let rhs = 4.0 * c1 * basis.e(1, z) + 8.0 * n as f64 * c1 * c1;
        defect = defect.max((lhs - rhs).abs() / (4.0 * c1 * c1 * (1.0 + z * z)));
    }
    let checks = [
        ("(e1^2, e1) = 8 c1", e1_cubed, 8.0 * c1),
        ("(|grad e1|^2, e1) = 4 c1", grad_sq_e1, 4.0 * c1),
    ];
    for (what, got, want) in checks {
        let dev = (got / want - 1.0).abs();
        if !(dev <= MOMENT_TOLERANCE) {
            return Err(Error::CrossValidation {
                what: what.into(),
                deviation: dev,
                tolerance: MOMENT_TOLERANCE,
            });
        }
    }
    if defect > 1e-12 {
        return Err(Error::CrossValidation {
            what: "|grad e1|^2 = 4 c1 e1 + 8 n c1^2".into(),
            deviation: defect,
            tolerance: 1e-12,
        });
    }
    Ok(CubicMoments {
        e1_cubed,
        grad_sq_e1,
        pointwise_identity_defect: defect,
    })
}

/// α = 2(p−1)²/p · 1/(e₁², e₁)_ρ, with the cubic moment taken in closed form.
pub fn compute_alpha(basis: &HermiteBasis) -> Result<f64> {
    let p = basis.p;
    let e1 = basis.poly[1].clone();
    let cube = &(&e1 * &e1) * &e1;
    let m3 =
        basis.c[1].powi(3) * rho_mass(basis.n) * to_f64(normalized_expectation(&cube, basis.n)?);
    let alpha = 2.0 * (p - 1.0) * (p - 1.0) / p / m3;
    if !(alpha > 0.0) {
        return Err(invalid("α must be positive"));
    }
    Ok(alpha)
}
