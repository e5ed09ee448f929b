//! The γ-family of relative entropies on block-diagonal algebras.
//!
//! | Function | Formula |
//! |----------|---------|
//! | [`gamma_divergence`] | `D_γ(ω,φ) = tr[γρ_ω + (1−γ)ρ_φ − ρ_ω^γ ρ_φ^{1−γ}] / (γ(1−γ))`, `γ ∈ (0,1)` |
//! | [`relative_entropy_0`] | `D_0(ω,φ) = tr ρ_ω − tr ρ_φ + tr ρ_φ(log ρ_φ − log ρ_ω)`, `+∞` unless `supp φ ≤ supp ω` |
//! | [`relative_entropy_1`] | `D_1(ω,φ) = D_0(φ,ω)` |
//! | [`classical_gamma_divergence`] | `Σ_i (γp_i + (1−γ)q_i − p_i^γ q_i^{1−γ}) / (γ(1−γ))` |
//!
//! States need not be normalized. For unit-trace states `D_0` is the Umegaki
//! relative entropy `tr ρ_φ(log ρ_φ − log ρ_ω)` (note the argument order: the
//! second argument plays the role of the "true" state).
//!
//! The overlap term is evaluated as `tr(ρ_φ^{(1−γ)/2} ρ_ω^γ ρ_φ^{(1−γ)/2})`,
//! which is real and non-negative in floating point.

use std::io::Write;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::algebra::State;
use crate::embeddings::{check_gamma_open, ell_gamma};
use crate::error::{Error, Result};
use crate::format::g9;
use crate::tol;

/// A divergence value in `[0, ∞]` together with the index it was computed at.
///
/// Values within [`tol::DIVERGENCE`] of zero are reported as exactly 0;
/// `+∞` is represented by `f64::INFINITY` and printed as `inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergenceValue {
    pub value: f64,
    pub gamma: f64,
}

impl DivergenceValue {
    pub fn new(raw: f64, gamma: f64) -> Self {
        let value = if raw.abs() <= tol::DIVERGENCE { 0.0 } else { raw };
        Self { value, gamma }
    }

    pub fn infinite(gamma: f64) -> Self {
        Self {
            value: f64::INFINITY,
            gamma,
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

impl std::fmt::Display for DivergenceValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&g9(self.value))
    }
}

impl Serialize for DivergenceValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.value.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.value)
        }
    }
}

/// Finite positive measure on `n` points.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalWeightVector(Vec<f64>);

impl ClassicalWeightVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::NotPositive(bad));
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// State on the commutative algebra `[1; n]`.
    pub fn to_state(&self) -> Result<State> {
        State::classical(&self.0)
    }

    /// Inverse of [`to_state`](Self::to_state); requires an all-1×1 shape.
    pub fn from_state(state: &State) -> Result<Self> {
        if !state.shape().is_commutative() {
            return Err(Error::InvalidShape(format!(
                "shape {:?} is not commutative",
                state.shape().blocks()
            )));
        }
        Self::new(state.blocks().iter().map(|b| b[(0, 0)].re).collect())
    }
}

/// `Σ_b tr(ρ_φ^{(1−γ)/2} ρ_ω^γ ρ_φ^{(1−γ)/2})`.
pub(crate) fn overlap(omega: &State, phi: &State, gamma: f64) -> f64 {
    let a = omega.power_element(gamma);
    let h = phi.power_element((1.0 - gamma) / 2.0);
    a.blocks()
        .iter()
        .zip(h.blocks())
        .map(|(a, h)| (h * a * h).trace().re)
        .sum()
}

/// Unclamped `D_γ` for `γ ∈ (0, 1)`; callers have checked shapes and `γ`.
pub(crate) fn gamma_divergence_raw(omega: &State, phi: &State, gamma: f64) -> f64 {
    let mixed = gamma * omega.trace() + (1.0 - gamma) * phi.trace();
    (mixed - overlap(omega, phi, gamma)) / (gamma * (1.0 - gamma))
}

/// `D_γ(ω, φ)` for `γ ∈ (0, 1)`. Use [`relative_entropy_0`] /
/// [`relative_entropy_1`] or [`divergence`] for the endpoints.
pub fn gamma_divergence(omega: &State, phi: &State, gamma: f64) -> Result<DivergenceValue> {
    omega.shape().ensure_eq(phi.shape())?;
    check_gamma_open(gamma)?;
    Ok(DivergenceValue::new(
        gamma_divergence_raw(omega, phi, gamma),
        gamma,
    ))
}

/// Unclamped `D_0`, `+∞` on support violation.
pub(crate) fn relative_entropy_0_raw(omega: &State, phi: &State) -> f64 {
    let eps = tol::psd();
    let support = omega.support_projection();
    let leak = phi.trace() - support.inner_unchecked(phi.element());
    if leak > eps {
        return f64::INFINITY;
    }
    let phi_log_phi: f64 = phi
        .spectrum()
        .eigenvalues()
        .filter(|&b| b > eps)
        .map(|b| b * b.ln())
        .sum();
    let phi_log_omega = omega.log_support().inner_unchecked(phi.element());
    omega.trace() - phi.trace() + phi_log_phi - phi_log_omega
}

/// `D_0(ω, φ) = tr ρ_ω − tr ρ_φ + tr ρ_φ(log ρ_φ − log ρ_ω)`, or `+∞` when
/// the support of `φ` is not contained in the support of `ω`.
pub fn relative_entropy_0(omega: &State, phi: &State) -> Result<DivergenceValue> {
    omega.shape().ensure_eq(phi.shape())?;
    let raw = relative_entropy_0_raw(omega, phi);
    Ok(if raw.is_infinite() {
        DivergenceValue::infinite(0.0)
    } else {
        DivergenceValue::new(raw, 0.0)
    })
}

/// `D_1(ω, φ) = D_0(φ, ω)`.
pub fn relative_entropy_1(omega: &State, phi: &State) -> Result<DivergenceValue> {
    let d = relative_entropy_0(phi, omega)?;
    Ok(DivergenceValue { gamma: 1.0, ..d })
}

/// `D_γ` for `γ ∈ [0, 1]`, endpoints through the closed forms.
pub fn divergence(omega: &State, phi: &State, gamma: f64) -> Result<DivergenceValue> {
    if gamma == 0.0 {
        relative_entropy_0(omega, phi)
    } else if gamma == 1.0 {
        relative_entropy_1(omega, phi)
    } else {
        gamma_divergence(omega, phi, gamma)
    }
}

/// Commutative `D_γ` on weight vectors, `γ ∈ [0, 1]`.
pub fn classical_gamma_divergence(
    p: &ClassicalWeightVector,
    q: &ClassicalWeightVector,
    gamma: f64,
) -> Result<DivergenceValue> {
    if p.0.len() != q.0.len() {
        return Err(Error::LengthMismatch(p.0.len(), q.0.len()));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange(gamma, "[0, 1]"));
    }
    let kl = |p: &[f64], q: &[f64]| -> f64 {
        // Σ p − q + q ln(q/p)
        let mut acc = 0.0;
        for (&pi, &qi) in p.iter().zip(q) {
            if qi > 0.0 && pi == 0.0 {
                return f64::INFINITY;
            }
            acc += pi - qi;
            if qi > 0.0 {
                acc += qi * (qi / pi).ln();
            }
        }
        acc
    };
    let raw = if gamma == 0.0 {
        kl(&p.0, &q.0)
    } else if gamma == 1.0 {
        kl(&q.0, &p.0)
    } else {
        p.0.iter()
            .zip(&q.0)
            .map(|(&pi, &qi)| {
                gamma * pi + (1.0 - gamma) * qi - pi.powf(gamma) * qi.powf(1.0 - gamma)
            })
            .sum::<f64>()
            / (gamma * (1.0 - gamma))
    };
    Ok(if raw.is_infinite() {
        DivergenceValue::infinite(gamma)
    } else {
        DivergenceValue::new(raw, gamma)
    })
}

/// `D_γ(ω,φ) + D_γ(φ,ψ) − D_γ(ω,ψ) − Re⟨ℓ_γ(ω) − ℓ_γ(φ), ℓ_{1−γ}(ψ) − ℓ_{1−γ}(φ)⟩`,
/// which vanishes identically.
pub fn cosine_residual(omega: &State, phi: &State, psi: &State, gamma: f64) -> Result<f64> {
    omega.shape().ensure_eq(phi.shape())?;
    omega.shape().ensure_eq(psi.shape())?;
    check_gamma_open(gamma)?;
    let lhs = gamma_divergence_raw(omega, phi, gamma) + gamma_divergence_raw(phi, psi, gamma)
        - gamma_divergence_raw(omega, psi, gamma);
    let dx = ell_gamma(omega, gamma)?
        .element()
        .sub(ell_gamma(phi, gamma)?.element())?;
    let dy = ell_gamma(psi, 1.0 - gamma)?
        .element()
        .sub(ell_gamma(phi, 1.0 - gamma)?.element())?;
    Ok(lhs - dx.inner(&dy)?)
}

/// Trace-density form `Re tr(ρ_ω − ρ_ω^γ ρ_φ^{1−γ}) / (γ(1−γ))` with the
/// unsymmetrised product. Equals `D_γ` for unit-trace states.
pub fn hasegawa_form(omega: &State, phi: &State, gamma: f64) -> Result<f64> {
    omega.shape().ensure_eq(phi.shape())?;
    check_gamma_open(gamma)?;
    let a = omega.power_element(gamma);
    let b = phi.power_element(1.0 - gamma);
    let cross: f64 = a
        .blocks()
        .iter()
        .zip(b.blocks())
        .map(|(a, b)| (a * b).trace().re)
        .sum();
    Ok((omega.trace() - cross) / (gamma * (1.0 - gamma)))
}

/// Inclusive grid `a, a + step, ...` up to `b`, parsed from `"a:b:step"`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaGrid {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl GammaGrid {
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self> {
        let ok = (0.0..=1.0).contains(&start)
            && (0.0..=1.0).contains(&end)
            && start <= end
            && (start == end || step > 0.0);
        if !ok || !step.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad gamma range {start}:{end}:{step} (need 0 <= a <= b <= 1, step > 0)"
            )));
        }
        Ok(Self { start, end, step })
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::InvalidArgument(format!("expected a:b:step, got {spec:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums = parts
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(nums[0], nums[1], nums[2])
    }

    pub fn points(&self) -> Vec<f64> {
        if self.start == self.end {
            return vec![self.start];
        }
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| {
                let g = self.start + k as f64 * self.step;
                if (g - self.end).abs() < 1e-9 {
                    self.end
                } else {
                    g
                }
            })
            .collect()
    }
}

/// `D_γ(ω, φ)` at every grid point, in grid order.
pub fn sweep(omega: &State, phi: &State, grid: &GammaGrid) -> Result<Vec<DivergenceValue>> {
    omega.shape().ensure_eq(phi.shape())?;
    grid.points()
        .into_par_iter()
        .map(|g| divergence(omega, phi, g))
        .collect()
}

/// CSV with header `gamma,divergence`.
pub fn write_sweep_csv<W: Write>(out: &mut W, rows: &[DivergenceValue]) -> std::io::Result<()> {
    writeln!(out, "gamma,divergence")?;
    for r in rows {
        writeln!(out, "{},{}", g9(r.gamma), r)?;
    }
    Ok(())
}
