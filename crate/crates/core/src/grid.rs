//! Sampled radial functions on strictly increasing nonuniform grids.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::fd::{differentiate, fornberg, stencil_start};
use crate::numerics::quadrature::gauss2;

/// Node layout for a radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r_min: 1e-3,
            r_max: 100.0,
            nodes: 4000,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_max > self.r_min && self.r_max.is_finite()) {
            return Err(invalid(format!(
                "grid range ({}, {}) is not an increasing positive interval",
                self.r_min, self.r_max
            )));
        }
        if self.nodes < 8 {
            return Err(invalid(format!(
                "grid needs at least 8 nodes, got {}",
                self.nodes
            )));
        }
        Ok(())
    }

    /// Geometrically spaced nodes from `r_min` to `r_max` inclusive.
    pub fn geometric(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(geometric_grid(self.r_min, self.r_max, self.nodes))
    }
}

pub fn geometric_grid(r_min: f64, r_max: f64, nodes: usize) -> Vec<f64> {
    let ratio = (r_max / r_min).ln() / (nodes - 1) as f64;
    let mut g: Vec<f64> = (0..nodes)
        .map(|i| r_min * (ratio * i as f64).exp())
        .collect();
    g[nodes - 1] = r_max;
    g
}

pub fn uniform_grid(a: f64, b: f64, nodes: usize) -> Vec<f64> {
    let h = (b - a) / (nodes - 1) as f64;
    let mut g: Vec<f64> = (0..nodes).map(|i| a + h * i as f64).collect();
    g[nodes - 1] = b;
    g
}

/// Samples of a radial function, optionally with derivative samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    deriv: Option<Vec<f64>>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(invalid("radial grid needs at least two nodes"));
    }
    if grid.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(invalid("radial grid has a negative or non-finite node"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("radial grid is not strictly increasing"));
    }
    Ok(())
}

impl RadialFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() {
            return Err(invalid(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite value at r = {}", grid[i])));
        }
        Ok(Self {
            grid,
            values,
            deriv: None,
        })
    }

    pub fn with_derivative(grid: Vec<f64>, values: Vec<f64>, deriv: Vec<f64>) -> Result<Self> {
        let mut f = Self::new(grid, values)?;
        if deriv.len() != f.grid.len() || deriv.iter().any(|d| !d.is_finite()) {
            return Err(invalid("derivative samples do not match the grid"));
        }
        f.deriv = Some(deriv);
        Ok(f)
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn from_fn_with_derivative(
        grid: Vec<f64>,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = grid.iter().map(|&r| f(r)).collect();
        let deriv = grid.iter().map(|&r| df(r)).collect();
        Self::with_derivative(grid, values, deriv)
    }

    pub fn zeros(grid: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        Self::with_derivative(grid, vec![0.0; n], vec![0.0; n])
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn deriv(&self) -> Option<&[f64]> {
        self.deriv.as_deref()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn r_max(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Derivative samples: stored ones if present, else 5-point differences.
    pub fn derivative_samples(&self) -> Vec<f64> {
        match &self.deriv {
            Some(d) => d.clone(),
            None => differentiate(&self.grid, &self.values, 1, 5),
        }
    }

    /// Returns a copy carrying derivative samples.
    pub fn with_computed_derivative(mut self) -> Self {
        if self.deriv.is_none() {
            self.deriv = Some(differentiate(&self.grid, &self.values, 1, 5));
        }
        self
    }

    fn interval(&self, r: f64) -> Result<usize> {
        let (lo, hi) = (self.r_min(), self.r_max());
        if !(r >= lo && r <= hi) {
            return Err(Error::OutOfRange { r, lo, hi });
        }
        let i = self.grid.partition_point(|&g| g <= r);
        Ok(i.saturating_sub(1).min(self.grid.len() - 2))
    }

    /// Interpolated value: cubic Hermite when derivative samples exist,
    /// otherwise a local 4-point Lagrange cubic.
    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(self.eval_both(r)?.0)
    }

    /// Interpolated first derivative (same interpolant as [`eval`](Self::eval)).
    pub fn eval_deriv(&self, r: f64) -> Result<f64> {
        Ok(self.eval_both(r)?.1)
    }

    pub fn eval_both(&self, r: f64) -> Result<(f64, f64)> {
        let i = self.interval(r)?;
        match &self.deriv {
            Some(d) => {
                let (x0, x1) = (self.grid[i], self.grid[i + 1]);
                Ok(hermite(
                    x0,
                    x1,
                    self.values[i],
                    self.values[i + 1],
                    d[i],
                    d[i + 1],
                    r,
                ))
            }
            None => {
                let n = self.grid.len();
                let s = stencil_start(i + 1, n, 4.min(n));
                let e = (s + 4).min(n);
                let w = fornberg(r, &self.grid[s..e], 1);
                let v = w[0]
                    .iter()
                    .zip(&self.values[s..e])
                    .map(|(a, b)| a * b)
                    .sum();
                let dv = w[1]
                    .iter()
                    .zip(&self.values[s..e])
                    .map(|(a, b)| a * b)
                    .sum();
                Ok((v, dv))
            }
        }
    }

    /// Running integral `∫_{r_0}^{r_i} f dr` at every node, fourth order.
    pub fn cumulative_integral(&self) -> Vec<f64> {
        let n = self.grid.len();
        let mut out = vec![0.0; n];
        for i in 0..n - 1 {
            let (x0, x1) = (self.grid[i], self.grid[i + 1]);
            let piece = match &self.deriv {
                Some(d) => {
                    let h = x1 - x0;
                    0.5 * h * (self.values[i] + self.values[i + 1])
                        + h * h / 12.0 * (d[i] - d[i + 1])
                }
                None => {
                    let s = stencil_start(i + 1, n, 4.min(n));
                    let e = (s + 4).min(n);
                    let xs = &self.grid[s..e];
                    let ys = &self.values[s..e];
                    gauss2(
                        |x| {
                            let w = fornberg(x, xs, 0);
                            w[0].iter().zip(ys).map(|(a, b)| a * b).sum()
                        },
                        x0,
                        x1,
                    )
                }
            };
            out[i + 1] = out[i] + piece;
        }
        out
    }

    /// Interpolates onto `grid`, which must lie inside the current range.
    pub fn resample(&self, grid: Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        let mut deriv = Vec::with_capacity(grid.len());
        for &r in &grid {
            let (v, d) = self.eval_both(r)?;
            values.push(v);
            deriv.push(d);
        }
        if self.deriv.is_some() {
            Self::with_derivative(grid, values, deriv)
        } else {
            Self::new(grid, values)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Pointwise linear combination `a·self + b·other` on a shared grid.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(invalid("radial functions live on different grids"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        let deriv = match (&self.deriv, &other.deriv) {
            (Some(d1), Some(d2)) => Some(d1.iter().zip(d2).map(|(x, y)| a * x + b * y).collect()),
            _ => None,
        };
        Ok(Self {
            grid: self.grid.clone(),
            values,
            deriv,
        })
    }
}

/// Cubic Hermite interpolant on `[x0, x1]` and its derivative at `x`.
pub fn hermite(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let v = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
    let dh00 = 6.0 * t2 - 6.0 * t;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = -dh00;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let dv = (dh00 * f0 + dh01 * f1) / h + dh10 * d0 + dh11 * d1;
    (v, dv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(RadialFunction::new(vec![0.0, 1.0, 1.0], vec![0.0; 3]).is_err());
        assert!(RadialFunction::new(vec![-1.0, 1.0], vec![0.0; 2]).is_err());
        assert!(RadialFunction::new(vec![0.0, 1.0], vec![0.0, f64::NAN]).is_err());
        assert!(GridSpec {
            r_min: 1.0,
            r_max: 0.5,
            nodes: 100
        }
        .geometric()
        .is_err());
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = GridSpec::default().geometric().unwrap();
        assert_eq!(g.len(), 4000);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[3999], 100.0);
    }

    #[test]
    fn interpolation_of_smooth_function() {
        let g = geometric_grid(0.01, 10.0, 400);
        let f = RadialFunction::from_fn(g.clone(), |r| (-r).exp()).unwrap();
        let fh =
            RadialFunction::from_fn_with_derivative(g, |r| (-r).exp(), |r| -(-r).exp()).unwrap();
        for r in [0.013, 0.5, 3.3, 9.99] {
            assert!((f.eval(r).unwrap() - (-r).exp()).abs() < 1e-8);
            assert!((fh.eval(r).unwrap() - (-r).exp()).abs() < 1e-8);
            assert!((fh.eval_deriv(r).unwrap() + (-r).exp()).abs() < 1e-6);
        }
        assert!(matches!(f.eval(11.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn cumulative_integral_is_fourth_order() {
        let err = |n: usize| {
            let g = uniform_grid(0.0, 2.0, n);
            let f = RadialFunction::from_fn(g, |r| r.cos()).unwrap();
            (f.cumulative_integral()[n - 1] - 2f64.sin()).abs()
        };
        let (e1, e2) = (err(21), err(41));
        assert!(e1 / e2 > 12.0, "{e1} {e2}");
    }
}
