//! Bregman structure of `Ψ_γ`.
//!
//! The generalised Bregman deviation pairs a primal point `x ∈ L_{1/γ}` with a
//! dual point `y ∈ L_{1/(1−γ)}`:
//!
//! ```text
//! D_Ψ(x, y) = Ψ_γ(x) + Ψ_γ*(y) − Re⟨x, y⟩,     Ψ_γ* = Ψ_{1−γ}
//! ```
//!
//! so that `D_Ψ(ℓ_γ(ω), ℓ_{1−γ}(φ)) = D_γ(ω, φ)`. The standard form keeps both
//! arguments in `L_{1/γ}` and routes the second one through the dualiser:
//!
//! ```text
//! D̄(x, y) = D_Ψ(x, f(y)) = Ψ_γ(x) − Ψ_γ(y) − Re⟨x − y, f(y)⟩
//! ```
//!
//! At `γ = 1/2` the dualiser is the identity and `D̄(x, y) = ½‖x − y‖₂²`.

use crate::algebra::HermitianElement;
use crate::embeddings::{
    check_gamma_open, complementary, dualiser, gradient_of, psi_of, GammaVector,
};
use crate::error::{Error, Result};

/// `Ψ_γ(x) + Ψ_{1−γ}(y) − Re⟨x, y⟩` for `x ∈ L_{1/γ}`, `y ∈ L_{1/(1−γ)}`.
pub fn generalized_bregman(x: &GammaVector, y: &GammaVector) -> Result<f64> {
    complementary(x, y)?;
    check_gamma_open(x.gamma())?;
    Ok(generalized_unchecked(x.element(), y.element(), x.gamma()))
}

fn generalized_unchecked(x: &HermitianElement, y: &HermitianElement, gamma: f64) -> f64 {
    psi_of(x, gamma) + psi_of(y, 1.0 - gamma) - x.inner_unchecked(y)
}

/// `D̄_{Ψ_γ}(x, y) = Ψ_γ(x) − Ψ_γ(y) − Re⟨x − y, f_{Ψ_γ}(y)⟩`; `y` must be
/// positive (the dualiser's domain).
pub fn standard_bregman(x: &GammaVector, y: &GammaVector) -> Result<f64> {
    let fy = dualiser(y)?;
    let gamma = x.gamma();
    let diff = x.sub(y)?;
    Ok(psi_of(x.element(), gamma) - psi_of(y.element(), gamma)
        - diff.element().inner_unchecked(fy.element()))
}

/// Young–Fenchel gap `Ψ_γ(x) + Ψ_γ*(y) − Re⟨x, y⟩ >= 0`, zero exactly when
/// `y = f_{Ψ_γ}(x)`.
pub fn young_fenchel_residual(x: &GammaVector, y: &GammaVector) -> Result<f64> {
    complementary(x, y)?;
    check_gamma_open(x.gamma())?;
    y.ensure_psd()?;
    Ok(generalized_unchecked(x.element(), y.element(), x.gamma()))
}

/// `D̄_{Ψ_γ}(y, x) − D̄_{Ψ_{1−γ}}(f(x), f(y))` for positive `x, y ∈ L_{1/γ}`.
pub fn representation_index_duality_residual(x: &GammaVector, y: &GammaVector) -> Result<f64> {
    let lhs = standard_bregman(y, x)?;
    let rhs = standard_bregman(&dualiser(x)?, &dualiser(y)?)?;
    Ok(lhs - rhs)
}

/// `D̄(r₁,r₂) + D̄(r₂,r₃) − D̄(r₁,r₃) − Re⟨r₁ − r₂, f(r₃) − f(r₂)⟩`.
pub fn standard_cosine_residual(
    r1: &GammaVector,
    r2: &GammaVector,
    r3: &GammaVector,
) -> Result<f64> {
    let lhs = standard_bregman(r1, r2)? + standard_bregman(r2, r3)? - standard_bregman(r1, r3)?;
    let rhs = r1
        .sub(r2)?
        .element()
        .inner_unchecked(dualiser(r3)?.sub(&dualiser(r2)?)?.element());
    Ok(lhs - rhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FenchelOptions {
    /// Stop once `‖y − ∇Ψ_γ(x)‖_F <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Start from the stationary point `∇Ψ_γ⁻¹(y)` instead of `x = 0`.
    pub warm_start: bool,
}

impl Default for FenchelOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            warm_start: true,
        }
    }
}

/// Lower estimate of `Ψ_γ*(y)` with the final ascent gradient norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FenchelEstimate {
    pub value: f64,
    pub iterations: usize,
    pub gradient_residual: f64,
}

/// `Ψ_γ*(y) = sup_x {Re⟨x, y⟩ − Ψ_γ(x)}` over Hermitian `x`, by gradient ascent
/// with backtracking. `y` lives in `L_{1/(1−γ)}`, so `γ = 1 − y.gamma()`.
///
/// Every iterate gives a valid lower bound; the returned value is the best one
/// seen. Returns [`Error::FenchelMaxIterations`] carrying that estimate when the
/// gradient tolerance is not met.
pub fn fenchel_dual_estimate(y: &GammaVector, opts: &FenchelOptions) -> Result<FenchelEstimate> {
    let gamma = 1.0 - y.gamma();
    check_gamma_open(gamma)?;
    let y = y.element();
    let objective = |x: &HermitianElement| x.inner_unchecked(y) - psi_of(x, gamma);

    let mut x = if opts.warm_start {
        gradient_of(y, 1.0 - gamma)
    } else {
        HermitianElement::zeros(y.shape())
    };
    let mut value = objective(&x);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut residual;
    loop {
        let grad = y.lin_comb_unchecked(1.0, &gradient_of(&x, gamma), -1.0);
        residual = grad.frobenius_norm();
        if residual <= opts.tol || iterations >= opts.max_iter {
            break;
        }
        iterations += 1;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = x.lin_comb_unchecked(1.0, &grad, step);
            let trial_value = objective(&trial);
            if trial_value >= value + 1e-4 * step * residual * residual {
                x = trial;
                value = trial_value;
                accepted = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // no ascent possible at working precision
            break;
        }
    }
    let estimate = FenchelEstimate {
        value,
        iterations,
        gradient_residual: residual,
    };
    if residual <= opts.tol {
        Ok(estimate)
    } else {
        Err(Error::FenchelMaxIterations(estimate))
    }
}
