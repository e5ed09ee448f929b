//! Bregman projection of a state onto sets that are affine in `ℓ_γ` coordinates.
//!
//! With `x = ℓ_γ(ω)` and `y = ℓ_{1−γ}(ψ)`, the objective
//!
//! `F(x) = Ψ_γ(x) − ⟨x, y⟩ + Ψ_{1−γ}(y) = D_γ(ω, ψ)`
//!
//! is convex with gradient `∇F(x) = f_{Ψ_γ}(x) − y`. The feasible set is
//! `{x ≥ 0 : Re⟨x, a_k⟩ = c_k}`. We run projected gradient descent with
//! Barzilai–Borwein trial steps and Armijo backtracking. Each step is
//! projected exactly onto the feasible set through its dual in the constraint
//! multipliers, so the fixed points of the iteration are the minimisers.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::json::MatrixJson;
use crate::algebra::{
    random_unitary, sample_hermitian, trial_rng, AlgebraShape, Block, HermitianElement, State,
    SpectralDecomposition, C64,
};
use crate::divergence::{gamma_divergence, gamma_divergence_raw};
use crate::embeddings::{check_gamma_open, ell_gamma, gradient_of, psi_of};
use crate::error::{Error, Result};
use crate::tol;

/// Residual below which an affine system counts as consistent.
pub const AFFINE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub a: HermitianElement,
    pub c: f64,
}

/// Constraints `Re⟨x, a_k⟩ = c_k` on `x = ℓ_γ(ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    gamma: f64,
    constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(gamma: f64, constraints: Vec<Constraint>) -> Result<Self> {
        check_gamma_open(gamma)?;
        if let Some(first) = constraints.first() {
            for k in &constraints[1..] {
                first.a.shape().ensure_eq(k.a.shape())?;
            }
        }
        if let Some(k) = constraints.iter().find(|k| !k.c.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite constraint value {}", k.c)));
        }
        Ok(Self { gamma, constraints })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// `max_k |Re⟨x, a_k⟩ − c_k|`.
    pub fn residual(&self, x: &HermitianElement) -> f64 {
        self.constraints
            .iter()
            .map(|k| (x.inner_unchecked(&k.a) - k.c).abs())
            .fold(0.0, f64::max)
    }

    /// Whether `ω` satisfies the constraints in `ℓ_γ` coordinates within `tol`.
    pub fn contains(&self, omega: &State, tol: f64) -> Result<bool> {
        let x = ell_gamma(omega, self.gamma)?;
        self.check_shape(omega.shape())?;
        Ok(self.residual(x.element()) <= tol)
    }

    fn check_shape(&self, shape: &AlgebraShape) -> Result<()> {
        match self.constraints.first() {
            Some(k) => k.a.shape().ensure_eq(shape),
            None => Ok(()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ConstraintJson {
    a: MatrixJson,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct ConstraintSetJson {
    gamma: f64,
    constraints: Vec<ConstraintJson>,
}

impl Serialize for ConstraintSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConstraintSetJson {
            gamma: self.gamma,
            constraints: self
                .constraints
                .iter()
                .map(|k| ConstraintJson {
                    a: MatrixJson::from_element(&k.a, None),
                    c: k.c,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConstraintSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ConstraintSetJson::deserialize(d)?;
        let build = || -> Result<ConstraintSet> {
            let constraints = raw
                .constraints
                .iter()
                .map(|k| Ok(Constraint { a: k.a.to_element()?, c: k.c }))
                .collect::<Result<Vec<_>>>()?;
            ConstraintSet::new(raw.gamma, constraints)
        };
        build().map_err(D::Error::custom)
    }
}

/// Starting point of the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Start {
    /// `ℓ_γ(ψ)` pushed onto the feasible set.
    #[default]
    Psi,
    /// `ℓ_γ` of a random state with the same trace as `ψ`.
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOptions {
    /// Stop when the gradient-mapping norm drops to this value.
    pub tol: f64,
    pub max_iter: usize,
    /// Newton iterations per projection onto the feasible set.
    pub inner_iterations: usize,
    pub start: Start,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            inner_iterations: 100,
            start: Start::Psi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub projected: State,
    /// `D_γ(projected, ψ)`.
    pub divergence: f64,
    pub iterations: usize,
    /// Gradient-mapping norm `‖x − P(x − ∇F(x))‖` at the returned iterate.
    pub kkt_residual: f64,
    pub feasibility_residual: f64,
    pub converged: bool,
    /// `F(x_k)` for every accepted iterate, starting with `x_0`.
    pub objective_trace: Vec<f64>,
}

/// Orthonormalised constraint system `⟨x, q_k⟩ = d_k`.
struct Affine {
    q: Vec<HermitianElement>,
    d: Vec<f64>,
}

impl Affine {
    fn new(set: &ConstraintSet) -> Result<Self> {
        let mut q: Vec<HermitianElement> = Vec::new();
        let mut d = Vec::new();
        for (idx, k) in set.constraints.iter().enumerate() {
            let mut v = k.a.clone();
            let mut c = k.c;
            // two Gram–Schmidt passes for stability
            for _ in 0..2 {
                for (qj, dj) in q.iter().zip(&d) {
                    let p = v.inner_unchecked(qj);
                    v = v.lin_comb_unchecked(1.0, qj, -p);
                    c -= p * dj;
                }
            }
            let norm = v.frobenius_norm();
            let scale = k.a.frobenius_norm().max(1.0);
            if norm <= 1e-12 * scale {
                if c.abs() > AFFINE_TOL * (1.0 + k.c.abs()) {
                    return Err(Error::Infeasible(format!(
                        "constraint {idx} contradicts the previous ones (residual {c:.3e})"
                    )));
                }
                continue;
            }
            q.push(v.scale(1.0 / norm));
            d.push(c / norm);
        }
        Ok(Self { q, d })
    }

    fn project(&self, x: &HermitianElement) -> HermitianElement {
        let mut out = x.clone();
        for (q, d) in self.q.iter().zip(&self.d) {
            let r = out.inner_unchecked(q) - d;
            out = out.lin_comb_unchecked(1.0, q, -r);
        }
        out
    }
}

/// Exact Euclidean projection onto `{x ≥ 0 : ⟨x, q_k⟩ = d_k}`.
///
/// The minimiser is `(z + Σ μ_k q_k)_+` where `μ` maximises the concave dual
/// `θ(μ) = ⟨μ, d⟩ − ½‖(z + Σ μ_k q_k)_+‖²`. We run semismooth Newton on `θ`
/// with the generalised Jacobian of the clipping map and backtracking; an
/// unbounded dual shows up as a residual that never closes.
struct Feasible<'a> {
    affine: &'a Affine,
    max_newton: usize,
}

impl Feasible<'_> {
    fn combine(&self, z: &HermitianElement, mu: &[f64]) -> HermitianElement {
        mu.iter()
            .zip(&self.affine.q)
            .fold(z.clone(), |acc, (&m, q)| acc.lin_comb_unchecked(1.0, q, m))
    }

    fn project(&self, z: &HermitianElement) -> HermitianElement {
        let (q, d) = (&self.affine.q, &self.affine.d);
        let m = q.len();
        let mut mu: Vec<f64> = (0..m).map(|k| d[k] - z.inner_unchecked(&q[k])).collect();
        let mut spec = self.combine(z, &mu).spectral();
        let mut xp = spec.map(|l| l.max(0.0));
        if m == 0 {
            return xp;
        }
        let theta = |mu: &[f64], xp: &HermitianElement| {
            mu.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() - 0.5 * xp.inner_unchecked(xp)
        };
        let d_norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut value = theta(&mu, &xp);
        for _ in 0..self.max_newton {
            let g: Vec<f64> = (0..m).map(|k| d[k] - xp.inner_unchecked(&q[k])).collect();
            let g_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if g_norm <= 1e-14 * (1.0 + d_norm) {
                break;
            }
            let jac = clip_jacobian(&spec, q);
            let reg = 1e-12 * (1.0 + jac.trace());
            let lhs = jac + DMatrix::<f64>::identity(m, m) * reg;
            let Some(step) = lhs.lu().solve(&DVector::from_vec(g.clone())) else {
                break;
            };
            let slope: f64 = step.iter().zip(&g).map(|(a, b)| a * b).sum();
            let mut s = 1.0;
            let mut accepted = false;
            for _ in 0..80 {
                let trial: Vec<f64> = mu.iter().zip(step.iter()).map(|(a, b)| a + s * b).collect();
                if trial.iter().all(|v| v.is_finite()) {
                    let tspec = self.combine(z, &trial).spectral();
                    let txp = tspec.map(|l| l.max(0.0));
                    let tval = theta(&trial, &txp);
                    let t_norm = (0..m)
                        .map(|k| (d[k] - txp.inner_unchecked(&q[k])).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    // θ differences drown in rounding near the optimum, so a
                    // shrinking dual residual also counts as progress
                    let ascent = tval > value && tval >= value + 1e-4 * s * slope;
                    if ascent || t_norm <= (1.0 - 1e-4 * s) * g_norm {
                        mu = trial;
                        spec = tspec;
                        xp = txp;
                        value = tval;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        xp
    }
}

/// `J_kl = ⟨Π'(w)[q_l], q_k⟩` for the clipping map `Π(w) = w_+`, evaluated in
/// the eigenbasis of `w` through the divided differences of `max(λ, 0)`.
fn clip_jacobian(spec: &SpectralDecomposition, q: &[HermitianElement]) -> DMatrix<f64> {
    let m = q.len();
    let mut jac = DMatrix::<f64>::zeros(m, m);
    for (b, bs) in spec.blocks().iter().enumerate() {
        let lam = &bs.values;
        let n = lam.len();
        let omega = DMatrix::<f64>::from_fn(n, n, |i, j| {
            let (a, c) = (lam[i], lam[j]);
            match (a > 0.0, c > 0.0) {
                (true, true) => 1.0,
                (false, false) => 0.0,
                _ => (a.max(0.0) - c.max(0.0)) / (a - c),
            }
        });
        let rotated: Vec<Block> = q
            .iter()
            .map(|qk| bs.vectors.adjoint() * &qk.blocks()[b] * &bs.vectors)
            .collect();
        for k in 0..m {
            for l in k..m {
                let mut v = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        v += omega[(i, j)] * (rotated[l][(i, j)] * rotated[k][(i, j)].conj()).re;
                    }
                }
                jac[(k, l)] += v;
                if l != k {
                    jac[(l, k)] += v;
                }
            }
        }
    }
    jac
}

struct Objective {
    gamma: f64,
    y: HermitianElement,
    constant: f64,
}

impl Objective {
    fn value(&self, x: &HermitianElement) -> f64 {
        psi_of(x, self.gamma) - x.inner_unchecked(&self.y) + self.constant
    }

    fn gradient(&self, x: &HermitianElement) -> HermitianElement {
        gradient_of(x, self.gamma).lin_comb_unchecked(1.0, &self.y, -1.0)
    }
}

fn start_point(psi: &State, gamma: f64, start: Start) -> Result<HermitianElement> {
    let omega = match start {
        Start::Psi => psi.clone(),
        Start::Seeded(seed) => {
            let mut rng = trial_rng(seed, 0);
            let shape = psi.shape();
            let weights: Vec<f64> = (0..shape.hilbert_dim()).map(|_| rng.random_range(0.1..1.0)).collect();
            let mut blocks = Vec::with_capacity(shape.num_blocks());
            let mut off = 0;
            for &d in shape.blocks() {
                let u = random_unitary(&mut rng, d);
                let diag = Block::from_diagonal(
                    &nalgebra::DVector::from_iterator(
                        d,
                        weights[off..off + d].iter().map(|&w| C64::new(w, 0.0)),
                    ),
                );
                blocks.push(&u * diag * u.adjoint());
                off += d;
            }
            let st = State::new(shape.clone(), blocks)?.normalized();
            st.scale(psi.trace().max(f64::MIN_POSITIVE))?
        }
    };
    Ok(ell_gamma(&omega, gamma)?.into_element())
}

/// Minimise `D_γ(ω, ψ)` over `ω ≥ 0` with `ℓ_γ(ω)` in the affine set `C`.
pub fn bregman_project(
    psi: &State,
    set: &ConstraintSet,
    opts: &ProjectionOptions,
) -> Result<ProjectionResult> {
    set.check_shape(psi.shape())?;
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::InvalidArgument("solver needs tol > 0 and max_iter >= 1".into()));
    }
    let gamma = set.gamma;
    let affine = Affine::new(set)?;
    let feas = Feasible {
        affine: &affine,
        max_newton: opts.inner_iterations,
    };
    let y = ell_gamma(psi, 1.0 - gamma)?.into_element();
    let objective = Objective {
        gamma,
        constant: psi_of(&y, 1.0 - gamma),
        y,
    };

    let mut x = feas.project(&start_point(psi, gamma, opts.start)?);
    let res0 = set.residual(&x);
    if res0 > AFFINE_TOL * (1.0 + x.frobenius_norm()) {
        return Err(Error::Infeasible(format!(
            "no positive element satisfies the constraints (residual {res0:.3e})"
        )));
    }

    let gradient_map = |x: &HermitianElement, g: &HermitianElement| {
        let p = feas.project(&x.lin_comb_unchecked(1.0, g, -1.0));
        x.lin_comb_unchecked(1.0, &p, -1.0).frobenius_norm()
    };

    let mut fx = objective.value(&x);
    let mut g = objective.gradient(&x);
    let mut trace = vec![fx];
    let mut step = 1.0;
    let mut kkt = gradient_map(&x, &g);
    let mut iterations = 0;
    while kkt > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let slack = 1e-14 * (1.0 + fx.abs());
        let mut t = step;
        let accepted = loop {
            let xn = feas.project(&x.lin_comb_unchecked(1.0, &g, -t));
            let dx = xn.lin_comb_unchecked(1.0, &x, -1.0);
            let fxn = objective.value(&xn);
            let model = fx + g.inner_unchecked(&dx) + dx.inner_unchecked(&dx) / (2.0 * t);
            if fxn <= model + slack && fxn <= fx + slack {
                break Some((xn, dx, fxn));
            }
            t *= 0.5;
            if t < 1e-20 {
                break None;
            }
        };
        let Some((xn, dx, fxn)) = accepted else {
            break;
        };
        let gn = objective.gradient(&xn);
        let dg = gn.lin_comb_unchecked(1.0, &g, -1.0);
        let sy = dx.inner_unchecked(&dg);
        step = if sy > 0.0 {
            (dx.inner_unchecked(&dx) / sy).clamp(1e-10, 1e10)
        } else {
            (t * 2.0).min(1e10)
        };
        x = xn;
        g = gn;
        fx = fxn;
        trace.push(fx);
        kkt = gradient_map(&x, &g);
    }

    let projected = State::from_element(x.map_spectrum(|l| (gamma * l.max(0.0)).powf(1.0 / gamma)))?;
    let result = ProjectionResult {
        divergence: gamma_divergence(&projected, psi, gamma)?.value,
        projected,
        iterations,
        kkt_residual: kkt,
        feasibility_residual: set.residual(&x),
        converged: kkt <= opts.tol,
        objective_trace: trace,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(Error::ProjectionMaxIterations(Box::new(result)))
    }
}

/// `D_γ(r, x̄) + D_γ(x̄, y) − D_γ(r, y)`; equals
/// `Re⟨ℓ_γ(r) − ℓ_γ(x̄), ℓ_{1−γ}(y) − ℓ_{1−γ}(x̄)⟩` and vanishes when `x̄` is
/// the projection of `y` onto an affine set containing `r`.
pub fn pythagorean_residual(r: &State, xbar: &State, y: &State, gamma: f64) -> Result<f64> {
    r.shape().ensure_eq(xbar.shape())?;
    r.shape().ensure_eq(y.shape())?;
    check_gamma_open(gamma)?;
    let d = |a: &State, b: &State| gamma_divergence_raw(a, b, gamma);
    Ok(d(r, xbar) + d(xbar, y) - d(r, y))
}

/// `Re⟨ℓ_γ(r) − ℓ_γ(x̄), ℓ_{1−γ}(y) − ℓ_{1−γ}(x̄)⟩`.
pub fn pythagorean_pairing(r: &State, xbar: &State, y: &State, gamma: f64) -> Result<f64> {
    let lr = ell_gamma(r, gamma)?.into_element();
    let lx = ell_gamma(xbar, gamma)?.into_element();
    let my = ell_gamma(y, 1.0 - gamma)?.into_element();
    let mx = ell_gamma(xbar, 1.0 - gamma)?.into_element();
    lr.sub(&lx)?.inner(&my.sub(&mx)?)
}

/// `D_γ(ω,ψ) − D_γ(φ̄,ψ) − D_{1−γ}(φ̄,ω)` for sampled feasible `ω`; all
/// entries are nonnegative (up to solver error) at the true projection `φ̄`.
///
/// Samples move from `φ̄` along random directions tangent to the affine set,
/// shortened until positivity holds.
pub fn optimality_residuals(
    result: &ProjectionResult,
    psi: &State,
    set: &ConstraintSet,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let gamma = set.gamma;
    let phi = &result.projected;
    set.check_shape(psi.shape())?;
    phi.shape().ensure_eq(psi.shape())?;
    let affine = Affine::new(set)?;
    let xbar = ell_gamma(phi, gamma)?.into_element();
    let base = gamma_divergence_raw(phi, psi, gamma);
    let scale = xbar.frobenius_norm().max(1e-3);
    let eps = tol::psd();
    let mut rng = trial_rng(seed, 0);
    let mut out = Vec::with_capacity(samples);
    let attempts = samples.saturating_mul(4).max(1);
    for _ in 0..attempts {
        if out.len() == samples {
            break;
        }
        let raw = sample_hermitian(&mut rng, phi.shape());
        // tangent direction: remove the constraint components
        let offset = affine.project(&HermitianElement::zeros(phi.shape()));
        let dir = affine.project(&raw).lin_comb_unchecked(1.0, &offset, -1.0);
        let norm = dir.frobenius_norm();
        if norm == 0.0 {
            continue;
        }
        let mut s = scale * rng.random_range(0.05..1.0) / norm;
        let mut accepted = None;
        for _ in 0..40 {
            let x = xbar.lin_comb_unchecked(1.0, &dir, s);
            if x.spectral().min_eigenvalue() >= -eps {
                accepted = Some(x);
                break;
            }
            s *= 0.5;
        }
        let Some(x) = accepted else {
            continue;
        };
        let omega = State::from_element(x.map_spectrum(|l| (gamma * l.max(0.0)).powf(1.0 / gamma)))?;
        let r = gamma_divergence_raw(&omega, psi, gamma)
            - base
            - gamma_divergence_raw(phi, &omega, 1.0 - gamma);
        out.push(r);
    }
    if out.is_empty() && samples > 0 {
        return Err(Error::SamplingFailed(attempts));
    }
    Ok(out)
}
