//! Quasi-entropies through the spectral form of the relative modular operator.
//!
//! With `ρ_ω = Σ α_i |a_i⟩⟨a_i|` and `ρ_φ = Σ β_j |b_j⟩⟨b_j|`, the operator
//! `Δ_{ω,φ}(X) = ρ_ω X ρ_φ^{-1}` has eigenvalues `α_i / β_j` on `|a_i⟩⟨b_j|`, and
//! the vector representative `ξ_φ = ρ_φ^{1/2}` has weight `β_j O_ij` there, with
//! `O_ij = |⟨a_i|b_j⟩|²`. Hence
//!
//! | quantity                 | spectral sum                          |
//! |--------------------------|---------------------------------------|
//! | `⟨ξ_φ, Δ^γ ξ_φ⟩`         | `Σ (α_i/β_j)^γ β_j O_ij`              |
//! | `⟨ξ_φ, f(Δ) ξ_φ⟩`        | `Σ f(α_i/β_j) β_j O_ij`               |
//!
//! and `f_γ(t) = 1/γ + t/(1−γ) − t^γ/(γ(1−γ))` reproduces `D_γ(ω, φ)`.
//! `Δ` itself is never formed; blocks are flattened into one index range with
//! zero overlap across different blocks.

use crate::algebra::{Block, State};
use crate::embeddings::check_gamma_open;
use crate::error::{Error, Result};
use crate::tol;

/// Eigenvalues of `ρ_ω`, `ρ_φ` and the overlap `|⟨a_i|b_j⟩|²` of their
/// eigenbases, flattened over blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeModularData {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Row-major `alphas.len() × betas.len()`.
    pub overlap: Vec<f64>,
}

impl RelativeModularData {
    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    pub fn overlap_at(&self, i: usize, j: usize) -> f64 {
        self.overlap[i * self.dim() + j]
    }

    /// `Σ_ij g(α_i, β_j) O_ij`, skipping zero overlaps.
    pub fn double_sum(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        let n = self.dim();
        let mut total = 0.0;
        for (i, &a) in self.alphas.iter().enumerate() {
            for (j, &b) in self.betas.iter().enumerate() {
                let o = self.overlap[i * n + j];
                if o != 0.0 {
                    total += g(a, b) * o;
                }
            }
        }
        total
    }

    /// Largest deviation of a row or column sum of the overlap from 1.
    pub fn stochasticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for k in 0..n {
            let row: f64 = (0..n).map(|j| self.overlap[k * n + j]).sum();
            let col: f64 = (0..n).map(|i| self.overlap[i * n + k]).sum();
            worst = worst.max((row - 1.0).abs()).max((col - 1.0).abs());
        }
        worst
    }
}

pub fn relative_modular_data(omega: &State, phi: &State) -> Result<RelativeModularData> {
    omega.shape().ensure_eq(phi.shape())?;
    let n = omega.shape().hilbert_dim();
    let mut alphas = Vec::with_capacity(n);
    let mut betas = Vec::with_capacity(n);
    let mut overlap = vec![0.0; n * n];
    let mut off = 0;
    for (sw, sp) in omega.spectrum().blocks().iter().zip(phi.spectrum().blocks()) {
        let d = sw.values.len();
        alphas.extend(sw.values.iter().map(|&a| a.max(0.0)));
        betas.extend(sp.values.iter().map(|&b| b.max(0.0)));
        let inner: Block = sw.vectors.adjoint() * &sp.vectors;
        for i in 0..d {
            for j in 0..d {
                overlap[(off + i) * n + off + j] = inner[(i, j)].norm_sqr();
            }
        }
        off += d;
    }
    Ok(RelativeModularData {
        alphas,
        betas,
        overlap,
    })
}

/// `f_γ(t) = 1/γ + t/(1−γ) − t^γ/(γ(1−γ))`.
pub fn f_gamma(t: f64, gamma: f64) -> Result<f64> {
    check_gamma_open(gamma)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("f_gamma needs t >= 0, got {t}")));
    }
    Ok(1.0 / gamma + t / (1.0 - gamma) - t.powf(gamma) / (gamma * (1.0 - gamma)))
}

/// `f_γ(α/β)·β`, extended by its limits `α/(1−γ)` at `β = 0` and `β/γ` at `α = 0`.
fn perspective(alpha: f64, beta: f64, gamma: f64, eps: f64) -> f64 {
    if beta <= eps {
        return alpha / (1.0 - gamma);
    }
    if alpha <= eps {
        return beta / gamma;
    }
    beta / gamma + alpha / (1.0 - gamma)
        - alpha.powf(gamma) * beta.powf(1.0 - gamma) / (gamma * (1.0 - gamma))
}

/// `Σ_ij f_γ(α_i/β_j) β_j O_ij`, which equals `D_γ(ω, φ)`.
pub fn quasi_entropy_gamma(omega: &State, phi: &State, gamma: f64) -> Result<f64> {
    check_gamma_open(gamma)?;
    let data = relative_modular_data(omega, phi)?;
    let eps = tol::psd();
    Ok(data.double_sum(|a, b| perspective(a, b, gamma, eps)))
}

/// `Σ_ij f(α_i/β_j) β_j O_ij` for a user-supplied `f`; `φ` must be faithful.
pub fn quasi_entropy(omega: &State, phi: &State, f: impl Fn(f64) -> f64) -> Result<f64> {
    let data = relative_modular_data(omega, phi)?;
    let eps = tol::psd();
    if let Some(&b) = data.betas.iter().find(|&&b| b <= eps) {
        return Err(Error::NotPositive(b));
    }
    Ok(data.double_sum(|a, b| f(a / b) * b))
}

/// `Σ_ij (α_i/β_j)^γ β_j O_ij`, i.e. `⟨ξ_φ, Δ^γ ξ_φ⟩`.
pub fn modular_moment(data: &RelativeModularData, gamma: f64) -> f64 {
    data.double_sum(|a, b| {
        if a == 0.0 || b == 0.0 {
            0.0
        } else {
            a.powf(gamma) * b.powf(1.0 - gamma)
        }
    })
}
