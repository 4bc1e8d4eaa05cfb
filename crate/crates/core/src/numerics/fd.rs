//! Finite-difference weights on arbitrary nodes and a tridiagonal solver.

/// Fornberg's recursion: weights `w[m][j]` such that
/// `f^(m)(x0) ≈ Σ_j w[m][j] f(xs[j])` for `m = 0..=order`.
pub fn fornberg(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Start index of a `width`-point stencil centred on `i` and clipped to `0..n`.
pub fn stencil_start(i: usize, n: usize, width: usize) -> usize {
    let half = width / 2;
    i.saturating_sub(half).min(n.saturating_sub(width))
}

/// `m`-th derivative of sampled data at every node using `width`-point
/// stencils (one-sided near the ends).
pub fn differentiate(xs: &[f64], ys: &[f64], m: usize, width: usize) -> Vec<f64> {
    let n = xs.len();
    let width = width.min(n);
    (0..n)
        .map(|i| {
            let s = stencil_start(i, n, width);
            let w = fornberg(xs[i], &xs[s..s + width], m);
            w[m].iter().zip(&ys[s..s + width]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Solves a tridiagonal system in place (Thomas algorithm). `lower[0]` and
/// `upper[n-1]` are ignored. Returns `None` on a zero pivot.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return None;
    }
    c[0] = upper[0] / beta;
    d[0] = rhs[0] / beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { upper[i] / beta } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_second_derivative_weights() {
        let w = fornberg(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
    }

    #[test]
    fn nonuniform_five_point_is_fourth_order() {
        let xs: Vec<f64> = (0..40).map(|i| 0.1 * 1.07f64.powi(i)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let d = differentiate(&xs, &ys, 1, 5);
        for (x, di) in xs.iter().zip(&d).skip(2).take(30) {
            assert!((di - x.cos()).abs() < 1e-4, "{x} {di}");
        }
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let lower = [0.0, 1.0, 2.0, -1.0];
        let diag = [4.0, 5.0, 6.0, 7.0];
        let upper = [1.0, -2.0, 1.0, 0.0];
        let x = [1.0, 2.0, -3.0, 0.5];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i] * x[i - 1];
                }
                if i < 3 {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect();
        let sol = solve_tridiagonal(&lower, &diag, &upper, &rhs).unwrap();
        for (a, b) in sol.iter().zip(&x) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
