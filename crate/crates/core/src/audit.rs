//! Randomised audits of the identities and inequalities of the crate.
//!
//! | kind         | per-trial score (pass iff `score <= tolerance`)                     | tol    |
//! |--------------|---------------------------------------------------------------------|--------|
//! | `monotone`   | `D_γ(T*ω, T*φ) − D_γ(ω, φ)`                                         | 1e-9   |
//! | `convexity`  | `D_γ(Σλω, Σλφ) − Σλ D_γ(ω, φ)` over two pairs                       | 1e-9   |
//! | `duality`    | `|⟨T(x), ρ⟩ − ⟨x, T*(ρ)⟩|`                                          | 1e-10  |
//! | `cosine`     | generalised cosine identity residual                                | 1e-9   |
//! | `quasi`      | `|quasi-entropy − D_γ|`, half of the pairs rank-deficient           | 1e-9   |
//! | `pythagoras` | `|D_γ(σ, x̄) + D_γ(x̄, ψ) − D_γ(σ, ψ)|`, `x̄` the projection of `ψ` | 1e-6   |
//!
//! For `pythagoras` the constraint set is affine in `ℓ_γ` coordinates and
//! contains a random full-rank `σ`. When the projection is rank-deficient the
//! positivity constraint is active and only the inequality (signed score)
//! is checked.
//!
//! Trial `t` draws everything from `trial_rng(seed, t)`, so results do not
//! depend on thread scheduling and any trial can be replayed on its own.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{sample_hermitian, sample_state, trial_rng, AlgebraShape, State};
use crate::channels::{duality_residual, monotonicity_gap, sample_channel};
use crate::divergence::{cosine_residual, gamma_divergence_raw};
use crate::embeddings::ell_gamma;
use crate::error::{Error, Result};
use crate::projection::{bregman_project, pythagorean_residual, Constraint, ConstraintSet, ProjectionOptions};
use crate::quasientropy::quasi_entropy_gamma;

/// Smallest eigenvalue for which a projection counts as interior.
const BOUNDARY_EIGENVALUE: f64 = 1e-9;

/// γ values drawn when no fixed γ is requested.
pub const GAMMA_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AuditKind {
    Monotone,
    Convexity,
    Duality,
    Cosine,
    Quasi,
    Pythagoras,
}

impl AuditKind {
    pub const ALL: [AuditKind; 6] = [
        AuditKind::Monotone,
        AuditKind::Convexity,
        AuditKind::Duality,
        AuditKind::Cosine,
        AuditKind::Quasi,
        AuditKind::Pythagoras,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AuditKind::Monotone => "monotone",
            AuditKind::Convexity => "convexity",
            AuditKind::Duality => "duality",
            AuditKind::Cosine => "cosine",
            AuditKind::Quasi => "quasi",
            AuditKind::Pythagoras => "pythagoras",
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            AuditKind::Duality => 1e-10,
            AuditKind::Pythagoras => 1e-6,
            _ => 1e-9,
        }
    }
}

impl fmt::Display for AuditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AuditKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AuditKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown audit kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub kind: AuditKind,
    pub trials: usize,
    /// Hilbert-space dimension of the sampled algebras.
    pub dim: usize,
    pub seed: u64,
    /// Fixed γ, or a draw from [`GAMMA_GRID`] per trial.
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditOutcome {
    pub kind: AuditKind,
    pub trials: usize,
    pub seed: u64,
    /// Largest score over all trials.
    pub worst: f64,
    pub worst_trial: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Random block structure with `dim` total Hilbert dimension: full, classical
/// or a random composition, with equal odds.
pub fn random_shape(rng: &mut ChaCha8Rng, dim: usize) -> AlgebraShape {
    match rng.random_range(0..3) {
        0 => AlgebraShape::full(dim),
        1 => AlgebraShape::classical(dim),
        _ => {
            let mut blocks = Vec::new();
            let mut left = dim;
            while left > 0 {
                let d = rng.random_range(1..=left);
                blocks.push(d);
                left -= d;
            }
            AlgebraShape::new(blocks).expect("positive blocks")
        }
    }
}

fn pick_gamma(rng: &mut ChaCha8Rng, fixed: Option<f64>) -> f64 {
    fixed.unwrap_or_else(|| *GAMMA_GRID.choose(rng).expect("non-empty grid"))
}

fn state(rng: &mut ChaCha8Rng, shape: &AlgebraShape) -> State {
    sample_state(rng, shape, None, true)
}

fn trial_score(cfg: &AuditConfig, trial: usize) -> Result<f64> {
    let mut rng = trial_rng(cfg.seed, trial as u64);
    let rng = &mut rng;
    let shape = random_shape(rng, cfg.dim);
    let gamma = pick_gamma(rng, cfg.gamma);
    match cfg.kind {
        AuditKind::Monotone => {
            let (w, p) = (state(rng, &shape), state(rng, &shape));
            let out = {
                let dim = rng.random_range(1..=cfg.dim);
                random_shape(rng, dim)
            };
            let min_k = shape.hilbert_dim().div_ceil(out.hilbert_dim());
            let k = rng.random_range(min_k..=min_k + 3);
            let ch = sample_channel(rng, &shape, &out, k)?;
            Ok(-monotonicity_gap(&w, &p, &ch, gamma)?)
        }
        AuditKind::Convexity => {
            let (w1, p1) = (state(rng, &shape), state(rng, &shape));
            let (w2, p2) = (state(rng, &shape), state(rng, &shape));
            let lambda = rng.random_range(0.0..1.0);
            let w = w1.mix(lambda, &w2)?;
            let p = p1.mix(lambda, &p2)?;
            let lhs = gamma_divergence_raw(&w, &p, gamma);
            let rhs = lambda * gamma_divergence_raw(&w1, &p1, gamma)
                + (1.0 - lambda) * gamma_divergence_raw(&w2, &p2, gamma);
            Ok(lhs - rhs)
        }
        AuditKind::Duality => {
            let out = {
                let dim = rng.random_range(1..=cfg.dim);
                random_shape(rng, dim)
            };
            let min_k = shape.hilbert_dim().div_ceil(out.hilbert_dim());
            let k = rng.random_range(min_k..=min_k + 3);
            let ch = sample_channel(rng, &shape, &out, k)?;
            let rho = state(rng, &shape);
            let x = sample_hermitian(rng, &out);
            duality_residual(&ch, &x, &rho)
        }
        AuditKind::Cosine => {
            let (a, b, c) = (state(rng, &shape), state(rng, &shape), state(rng, &shape));
            Ok(cosine_residual(&a, &b, &c, gamma)?.abs())
        }
        AuditKind::Quasi => {
            let deficient = trial % 2 == 1;
            let draw = |rng: &mut ChaCha8Rng| {
                let rank = if deficient {
                    Some(rng.random_range(1..=cfg.dim))
                } else {
                    None
                };
                sample_state(rng, &shape, rank, true)
            };
            let (w, p) = (draw(rng), draw(rng));
            Ok((quasi_entropy_gamma(&w, &p, gamma)? - gamma_divergence_raw(&w, &p, gamma)).abs())
        }
        AuditKind::Pythagoras => {
            let psi = state(rng, &shape);
            let sigma = state(rng, &shape);
            let x_sigma = ell_gamma(&sigma, gamma)?.into_element();
            let constraints = (0..rng.random_range(1..=2))
                .map(|_| {
                    let a = sample_hermitian(rng, &shape);
                    let c = x_sigma.inner_unchecked(&a);
                    Constraint { a, c }
                })
                .collect();
            let set = ConstraintSet::new(gamma, constraints)?;
            match bregman_project(&psi, &set, &ProjectionOptions::default()) {
                Ok(res) => {
                    let r = pythagorean_residual(&sigma, &res.projected, &psi, gamma)?;
                    // a rank-deficient projection sits on the boundary of the
                    // cone, where only `D(σ,x̄) + D(x̄,ψ) <= D(σ,ψ)` survives
                    let interior = res.projected.spectrum().min_eigenvalue() > BOUNDARY_EIGENVALUE;
                    Ok(if interior { r.abs() } else { r })
                }
                Err(Error::ProjectionMaxIterations(_)) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        }
    }
}

/// Run `cfg.trials` independent trials in parallel and report the worst one.
pub fn run_audit(cfg: &AuditConfig) -> Result<AuditOutcome> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    if cfg.dim == 0 {
        return Err(Error::InvalidArgument("dim must be >= 1".into()));
    }
    if let Some(g) = cfg.gamma {
        crate::embeddings::check_gamma_open(g)?;
    }
    let scores = (0..cfg.trials)
        .into_par_iter()
        .map(|t| trial_score(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let (worst_trial, worst) = scores
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (t, s)| {
            // NaN counts as the worst possible outcome
            if s.is_nan() || (!acc.1.is_nan() && s > acc.1) {
                (t, s)
            } else {
                acc
            }
        });
    let tolerance = cfg.kind.tolerance();
    Ok(AuditOutcome {
        kind: cfg.kind,
        trials: cfg.trials,
        seed: cfg.seed,
        worst,
        worst_trial,
        tolerance,
        passed: worst <= tolerance,
    })
}
