//! Finite-difference helpers used by the proof-step sweeps and the tests.

/// Step for first differences: `1e-6 * max(1, |x|)`.
pub fn first_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// Step for second differences: `1e-4 * max(1, |x|)`.
pub fn second_step(x: f64) -> f64 {
    1e-4 * x.abs().max(1.0)
}

pub fn central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn forward<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x)) / h
}

pub fn backward<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x) - f(x - h)) / h
}

/// `(f(x+h) - 2f(x) + f(x-h)) / h^2`
pub fn second<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        let f = |x: f64| x * x * x;
        assert!((central(f, 2.0, first_step(2.0)) - 12.0).abs() < 1e-6);
        assert!((forward(f, 2.0, 1e-7) - 12.0).abs() < 1e-5);
        assert!((backward(f, 2.0, 1e-7) - 12.0).abs() < 1e-5);
        assert!((second(f, 2.0, second_step(2.0)) - 12.0).abs() < 1e-4);
    }
}
