//! Nonlinear least-squares machinery and the three model fits the analysis
//! pipeline relies on: saturation curve, IRF-convolved lifetime decay, and
//! Gaussian spectral peak.
//!
//! The optimizer is a damped Gauss-Newton (Levenberg-Marquardt damping
//! schedule) over analytic Jacobians. Problems here are small and dense, so
//! the normal equations are solved directly; no linear-algebra dependency is
//! required. All numerics are generic over the scalar type via `num-traits`;
//! [`Real`] is the concrete default used by the rest of the workbench.

mod gaussian;
mod least_squares;
mod lifetime;
mod saturation;
mod special;

pub use gaussian::fit_gaussian_peak;
pub use least_squares::{fit_curve, CurveModel, FitOptions, Transform};
pub use lifetime::{fit_lifetime, DecayModel, LifetimeMode};
pub use saturation::{fit_saturation, saturation_rate, SaturationParams};
pub use special::erfcx;

use serde::Serialize;
use thiserror::Error;

/// Concrete scalar type used by the workbench.
pub type Real = f64;

/// Scalar types the fitting core can run on.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + std::iter::Sum + std::fmt::Debug + 'static
{
    /// Shorthand for converting an `f64` literal into the scalar type.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal must convert into scalar type")
    }
}

impl<T> Scalar for T where
    T: num_traits::Float + num_traits::FromPrimitive + std::iter::Sum + std::fmt::Debug + 'static
{
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("not enough data to constrain the model: {0}")]
    Underdetermined(String),
    #[error("decay histogram contains no counts")]
    EmptyData,
    #[error("spectrum is monotone; no interior peak to fit")]
    NoPeak,
    #[error("inputs have mismatched lengths: {0}")]
    ShapeMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// One fitted parameter: point estimate and 1-sigma uncertainty from the
/// Jacobian at the optimum, both in natural (untransformed) units.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Param<F = Real> {
    pub name: &'static str,
    pub value: F,
    pub sigma: F,
}

/// Outcome of a nonlinear least-squares fit.
///
/// Non-convergence is reported through [`FitResult::converged`], never as an
/// error; callers decide whether a non-converged optimum is usable.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult<F = Real> {
    pub params: Vec<Param<F>>,
    pub reduced_chi2: F,
    pub n_iterations: usize,
    pub converged: bool,
}

impl<F: Scalar> FitResult<F> {
    pub fn value(&self, name: &str) -> Option<F> {
        self.params.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn sigma(&self, name: &str) -> Option<F> {
        self.params.iter().find(|p| p.name == name).map(|p| p.sigma)
    }

    /// Value lookup that panics with the parameter name; for pipeline code
    /// where the parameter set is fixed by construction.
    pub fn expect_value(&self, name: &str) -> F {
        self.value(name)
            .unwrap_or_else(|| panic!("fit result has no parameter named {name}"))
    }
}
