use crate::atoms::{alignment_residual, AtomicSet};
use crate::element::{Element, Extended};
use crate::error::{Error, Result};

/// `g(x) = α* σ(z) − ⟨x, z⟩`, an upper bound on `f(x) − f(x*)` when `z = −∇f(x)`.
pub fn duality_gap(set: &AtomicSet, x: &Element, z: &Element, alpha_star: f64) -> Result<f64> {
    match set.support(z)? {
        Extended::Finite(s) => Ok(alpha_star * s - x.dot(z)),
        Extended::Infinite => Err(Error::UnboundedSupport),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemForm {
    /// `min f(x) + ρ γ(x)`.
    Unconstrained { rho: f64 },
    /// `min f(x)` subject to `γ(x) ≤ α`.
    GaugeConstrained { alpha: f64 },
    /// `min γ(x)` subject to `f(x) ≤ τ`; strict feasibility is not verified.
    LevelConstrained { tau: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    /// Alignment residual of `(x, −∇f(x))`.
    pub residual: f64,
    /// `1 + γ(x) σ(z)`, the scale the residual is compared against.
    pub scale: f64,
    pub aligned: bool,
    /// Form-specific condition: the dual bound for the unconstrained form,
    /// complementary slackness for the gauge-constrained form.
    pub condition: bool,
    pub passed: bool,
}

/// Tests the optimality conditions at `x` given `∇f(x)`.
pub fn check_optimality(
    set: &AtomicSet,
    x: &Element,
    grad: &Element,
    form: ProblemForm,
    tol: f64,
) -> Result<OptimalityReport> {
    let z = -grad;
    let residual = alignment_residual(set, x, &z)?;
    let gauge = set.gauge(x)?.to_f64();
    let support = set.support(&z)?;
    let s = support.finite().unwrap_or(f64::INFINITY);
    let scale = 1.0 + if gauge > 0.0 { gauge * s } else { 0.0 };
    let aligned = residual <= tol * scale;
    let condition = match form {
        ProblemForm::Unconstrained { rho } => {
            let bounded = s <= rho * (1.0 + tol);
            let tight = gauge == 0.0 || (s - rho).abs() <= tol * rho.max(1.0);
            bounded && tight
        }
        ProblemForm::GaugeConstrained { alpha } => {
            let feasible = gauge <= alpha * (1.0 + tol);
            let slack = (alpha - gauge).max(0.0) * if s.is_finite() { s } else { 0.0 };
            feasible && s.is_finite() && slack <= tol * (1.0 + alpha * s)
        }
        ProblemForm::LevelConstrained { .. } => true,
    };
    Ok(OptimalityReport {
        residual,
        scale,
        aligned,
        condition,
        passed: aligned && condition,
    })
}

/// True when `x ∈ D`, `z ∈ D′`, `⟨x, z⟩ = 1` and the pair is aligned, all within `tol`.
pub fn check_gauge_duality(
    set: &AtomicSet,
    x: &Element,
    z: &Element,
    in_d: &dyn Fn(&Element) -> bool,
    in_d_prime: &dyn Fn(&Element) -> bool,
    tol: f64,
) -> bool {
    if !in_d(x) || !in_d_prime(z) || (x.dot(z) - 1.0).abs() > tol {
        return false;
    }
    matches!(alignment_residual(set, x, z), Ok(r) if r <= tol)
}
