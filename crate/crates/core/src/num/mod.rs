//! Scalar kinds used by every evaluator: plain reals, truncated Taylor
//! series in one time variable, and first-order perturbations (ε² = 0).
//!
//! Kinds nest. `Perturbed<Taylor<f64>>` carries ∂/∂u of each Taylor
//! coefficient; `Taylor<Perturbed<f64>>` is the same object arranged the
//! other way round.

mod perturbed;
mod scalar;
mod taylor;

pub use perturbed::{perturb_derivative, Perturbed};
pub use scalar::{Elementary, NumError, NumResult, Scalar};
pub use taylor::Taylor;

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}
