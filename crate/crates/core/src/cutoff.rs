//! Quintic smoothstep cutoff: η = 1 on [0, 1], 0 on [2, ∞), C² in between.

/// η(ξ) = 1 − t³(10 − 15t + 6t²), t = clamp(ξ − 1, 0, 1).
pub fn eta(xi: f64) -> f64 {
    let t = (xi - 1.0).clamp(0.0, 1.0);
    1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// η'(ξ).
pub fn eta_prime(xi: f64) -> f64 {
    if !(1.0..=2.0).contains(&xi) {
        return 0.0;
    }
    let t = xi - 1.0;
    -30.0 * t * t * (1.0 - t) * (1.0 - t)
}

/// η''(ξ).
pub fn eta_second(xi: f64) -> f64 {
    if !(1.0..=2.0).contains(&xi) {
        return 0.0;
    }
    let t = xi - 1.0;
    -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateaus() {
        assert_eq!(eta(0.0), 1.0);
        assert_eq!(eta(1.0), 1.0);
        assert_eq!(eta(2.0), 0.0);
        assert_eq!(eta(7.0), 0.0);
        assert!((eta(1.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_differences() {
        for xi in [1.1, 1.37, 1.5, 1.93] {
            let h = 1e-6;
            assert!(((eta(xi + h) - eta(xi - h)) / (2.0 * h) - eta_prime(xi)).abs() < 1e-8);
            assert!(
                ((eta_prime(xi + h) - eta_prime(xi - h)) / (2.0 * h) - eta_second(xi)).abs() < 1e-7
            );
        }
    }
}
