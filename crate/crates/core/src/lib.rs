//! Quantum γ-divergences on finite-dimensional block-diagonal algebras.
//!
//! States live on `⊕_b M_{d_b}(ℂ)`; the embeddings `ℓ_γ(ω) = ρ_ω^γ/γ` map them
//! into non-commutative `L_{1/γ}` spaces, where
//!
//! `D_γ(ω, φ) = (γ tr ω + (1−γ) tr φ − tr(ρ_ω^γ ρ_φ^{1−γ})) / (γ(1−γ))`
//!
//! is a Bregman divergence of `Ψ_γ(x) = ‖γx‖_{1/γ}^{1/γ}/(1−γ)`. The crate
//! covers the divergence family and its endpoints, the Bregman and Fenchel
//! structure, channels and monotonicity audits, the quasi-entropy form and
//! Bregman projections onto affine constraint sets.

#![forbid(unsafe_code)]

pub mod acceptance;
pub mod algebra;
pub mod audit;
pub mod bregman;
pub mod channels;
pub mod divergence;
pub mod embeddings;
pub mod error;
pub mod format;
pub mod projection;
pub mod quasientropy;
pub mod tol;

pub use algebra::{AlgebraShape, HermitianElement, State};
pub use divergence::{divergence, gamma_divergence, DivergenceValue};
pub use embeddings::GammaVector;
pub use error::{Error, Result};
