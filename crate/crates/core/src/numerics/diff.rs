//! Central finite differences.

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    First,
    Second,
}

/// Step used for the given order at `x`: `eps^{1/3}` or `eps^{1/4}`, times `max(1, |x|)`,
/// rounded so that `x ± h` is exact.
pub fn step<F: Real>(x: F, order: DiffOrder) -> F {
    let base = match order {
        DiffOrder::First => F::epsilon().cbrt(),
        DiffOrder::Second => F::epsilon().sqrt().sqrt(),
    };
    let h = base * x.abs().max(F::one());
    (x + h) - x
}

/// Central-difference estimate of `f'(x)` or `f''(x)`.
pub fn derivative<F: Real, G: Fn(F) -> F>(f: G, x: F, order: DiffOrder) -> F {
    let h = step(x, order);
    match order {
        DiffOrder::First => (f(x + h) - f(x - h)) / (F::lit(2.0) * h),
        DiffOrder::Second => (f(x + h) - F::lit(2.0) * f(x) + f(x - h)) / (h * h),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_at_three() {
        assert!((derivative(|x: f64| x * x, 3.0, DiffOrder::First) - 6.0).abs() < 1e-6);
    }

    #[test]
    fn sine_curvature_at_origin() {
        assert!(derivative(|x: f64| x.sin(), 0.0, DiffOrder::Second).abs() < 1e-5);
        assert!((derivative(|x: f64| x.sin(), 1.0, DiffOrder::Second) + 1f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn step_scales_with_argument() {
        let h1 = step(1.0f64, DiffOrder::First);
        let h2 = step(1000.0f64, DiffOrder::First);
        assert!((h2 / h1 - 1000.0).abs() < 1.0);
        assert_eq!((1000.0 + h2) - 1000.0, h2);
    }
}
