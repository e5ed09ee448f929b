//! γ-embeddings `ℓ_γ(ω) = ρ_ω^γ / γ` into the `L_{1/γ}` coordinate space, the
//! convex potential
//!
//! ```text
//! Ψ_γ(x) = ‖γx‖_{1/γ}^{1/γ} / (1 − γ)
//! ```
//!
//! and its dualiser `f_γ = ℓ_{1−γ} ∘ ℓ_γ⁻¹`, which maps `L_{1/γ}` to
//! `L_{1/(1−γ)}` and is the gradient of `Ψ_γ` on the positive cone.
//!
//! On a general Hermitian `x`, `Ψ_γ` is evaluated with `|λ|` so that the
//! Legendre–Fenchel supremum can range over the whole space.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::json::MatrixJson;
use crate::algebra::{HermitianElement, State};
use crate::error::{Error, Result};
use crate::tol;

/// Tolerance for `γ_x + γ_y = 1` in dual pairings.
pub const GAMMA_MATCH: f64 = 1e-12;

/// Hermitian element of `L_{1/γ}` tagged with its index `γ ∈ (0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaVector {
    gamma: f64,
    element: HermitianElement,
}

impl GammaVector {
    pub fn new(gamma: f64, element: HermitianElement) -> Result<Self> {
        check_gamma_half_open(gamma)?;
        Ok(Self { gamma, element })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn element(&self) -> &HermitianElement {
        &self.element
    }

    pub fn into_element(self) -> HermitianElement {
        self.element
    }

    /// Same index, new coordinates.
    pub fn with_element(&self, element: HermitianElement) -> Result<Self> {
        self.element.shape().ensure_eq(element.shape())?;
        Ok(Self {
            gamma: self.gamma,
            element,
        })
    }

    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        same_gamma(self, other)?;
        self.with_element(self.element.lin_comb(a, &other.element, b)?)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub(crate) fn ensure_psd(&self) -> Result<()> {
        let min = self.element.spectral().min_eigenvalue();
        if min < -tol::psd() {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }
}

impl Serialize for GammaVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_element(&self.element, Some(self.gamma)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GammaVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let gamma = raw
            .gamma
            .ok_or_else(|| D::Error::custom("missing field `gamma`"))?;
        let element = raw.to_element().map_err(D::Error::custom)?;
        GammaVector::new(gamma, element).map_err(D::Error::custom)
    }
}

pub(crate) fn check_gamma_open(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma, "(0, 1)"))
    }
}

pub(crate) fn check_gamma_half_open(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma, "(0, 1]"))
    }
}

fn same_gamma(x: &GammaVector, y: &GammaVector) -> Result<()> {
    if (x.gamma - y.gamma).abs() > GAMMA_MATCH {
        return Err(Error::GammaMismatch {
            expected: x.gamma,
            actual: y.gamma,
        });
    }
    Ok(())
}

pub(crate) fn complementary(x: &GammaVector, y: &GammaVector) -> Result<()> {
    if (x.gamma + y.gamma - 1.0).abs() > GAMMA_MATCH {
        return Err(Error::GammaMismatch {
            expected: 1.0 - x.gamma,
            actual: y.gamma,
        });
    }
    x.element.shape().ensure_eq(y.element.shape())
}

/// `ℓ_γ(ω) = ρ_ω^γ / γ`.
pub fn ell_gamma(omega: &State, gamma: f64) -> Result<GammaVector> {
    check_gamma_half_open(gamma)?;
    let element = if gamma == 1.0 {
        omega.element().clone()
    } else {
        omega.power_element(gamma).scale(1.0 / gamma)
    };
    Ok(GammaVector { gamma, element })
}

/// `ℓ_γ⁻¹(x) = (γx)^{1/γ}`.
pub fn ell_gamma_inverse(x: &GammaVector) -> Result<State> {
    let gamma = x.gamma;
    if gamma == 1.0 {
        return State::from_element(x.element.clone());
    }
    x.ensure_psd()?;
    let rho = x
        .element
        .map_spectrum(|l| (gamma * l.max(0.0)).powf(1.0 / gamma));
    State::from_element(rho)
}

/// Schatten `p`-norm `(Σ |λ_i|^p)^{1/p}` over all blocks.
pub fn schatten_norm(x: &HermitianElement, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "Schatten index must be >= 1, got {p}"
        )));
    }
    let s = x.spectral();
    if p.is_infinite() {
        return Ok(s.eigenvalues().map(f64::abs).fold(0.0, f64::max));
    }
    Ok(s.eigenvalues()
        .map(|l| l.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p))
}

/// `Ψ_γ(x) = ‖γx‖_{1/γ}^{1/γ} / (1 − γ)`, for `γ ∈ (0, 1)`.
pub fn psi_gamma(x: &GammaVector) -> Result<f64> {
    check_gamma_open(x.gamma)?;
    Ok(psi_of(&x.element, x.gamma))
}

pub(crate) fn psi_of(x: &HermitianElement, gamma: f64) -> f64 {
    let p = 1.0 / gamma;
    x.spectral()
        .eigenvalues()
        .map(|l| (gamma * l.abs()).powf(p))
        .sum::<f64>()
        / (1.0 - gamma)
}

/// Fréchet derivative of `Ψ_γ` at `x`, as an element of `L_{1/(1−γ)}`:
/// `D Ψ_γ(x)(h) = Re⟨h, ∇Ψ_γ(x)⟩`. On the positive cone it coincides with
/// [`dualiser`]; elsewhere it is the odd extension `sgn(λ)|γλ|^{(1−γ)/γ}/(1−γ)`.
pub fn psi_gamma_gradient(x: &GammaVector) -> Result<GammaVector> {
    check_gamma_open(x.gamma)?;
    Ok(GammaVector {
        gamma: 1.0 - x.gamma,
        element: gradient_of(&x.element, x.gamma),
    })
}

pub(crate) fn gradient_of(x: &HermitianElement, gamma: f64) -> HermitianElement {
    let q = (1.0 - gamma) / gamma;
    x.map_spectrum(|l| l.signum() * (gamma * l.abs()).powf(q) / (1.0 - gamma))
}

/// `Re⟨x, y⟩` between `L_{1/γ}` and `L_{1/(1−γ)}`.
pub fn pairing(x: &GammaVector, y: &GammaVector) -> Result<f64> {
    complementary(x, y)?;
    Ok(x.element.inner_unchecked(&y.element))
}

/// Dualiser `f_{Ψ_γ}(x) = ℓ_{1−γ}(ℓ_γ⁻¹(x)) = (γx)^{(1−γ)/γ} / (1 − γ)`.
pub fn dualiser(x: &GammaVector) -> Result<GammaVector> {
    check_gamma_open(x.gamma)?;
    x.ensure_psd()?;
    let gamma = x.gamma;
    if gamma == 0.5 {
        return Ok(GammaVector {
            gamma,
            element: x.element.clone(),
        });
    }
    let q = (1.0 - gamma) / gamma;
    let element = x
        .element
        .map_spectrum(|l| (gamma * l.max(0.0)).powf(q) / (1.0 - gamma));
    Ok(GammaVector {
        gamma: 1.0 - gamma,
        element,
    })
}
