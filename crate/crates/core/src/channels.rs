//! Markov maps and their dual coarse-grainings in Kraus form.
//!
//! A channel with Kraus operators `K_i : ℂ^{n_in} → ℂ^{n_out}` acts
//!
//! - on observables (Heisenberg picture): `T(x) = Σ K_i† x K_i`, out → in,
//! - on states (Schrödinger picture): `T*(ρ) = Σ K_i ρ K_i†`, in → out,
//!
//! so that `⟨T(x), ρ⟩ = ⟨x, T*(ρ)⟩`. `T` is unital iff `Σ K_i†K_i = 𝟙` iff `T*`
//! preserves the trace. Kraus matrices act on the full direct-sum Hilbert
//! space; results are projected onto the block-diagonal of the target algebra,
//! which is itself a unital CP map, so the pair stays adjoint.

use rand::Rng;
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::json::{block_to_rows, rows_to_block, MatrixRows};
use crate::algebra::{
    ginibre, hermitize, random_unitary, trial_rng, AlgebraShape, Block, HermitianElement, State,
    C64,
};
use crate::divergence::divergence;
use crate::error::{Error, Result};

/// Tolerance on `Σ K_i†K_i = 𝟙` and on trace preservation.
pub const CHANNEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    in_shape: AlgebraShape,
    out_shape: AlgebraShape,
    kraus: Vec<Block>,
    unital: bool,
    trace_preserving: bool,
}

impl Channel {
    /// Kraus matrices must be `out.hilbert_dim() × in.hilbert_dim()`. The
    /// unital and trace-preserving flags are computed, not trusted.
    pub fn new(in_shape: AlgebraShape, out_shape: AlgebraShape, kraus: Vec<Block>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one Kraus operator".into()));
        }
        let (n_in, n_out) = (in_shape.hilbert_dim(), out_shape.hilbert_dim());
        if let Some(k) = kraus.iter().find(|k| k.nrows() != n_out || k.ncols() != n_in) {
            return Err(Error::InvalidShape(format!(
                "Kraus operator is {}x{}, expected {n_out}x{n_in}",
                k.nrows(),
                k.ncols()
            )));
        }
        let mut ch = Self {
            in_shape,
            out_shape,
            kraus,
            unital: false,
            trace_preserving: false,
        };
        ch.unital = ch.unitality_error() <= CHANNEL_TOL;
        ch.trace_preserving = ch.trace_preservation_error() <= CHANNEL_TOL;
        Ok(ch)
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let n = shape.hilbert_dim();
        Self::new(shape.clone(), shape.clone(), vec![Block::identity(n, n)])
            .expect("identity is a channel")
    }

    /// `ρ ↦ U ρ U†` on `shape`.
    pub fn unitary(shape: &AlgebraShape, u: Block) -> Result<Self> {
        Self::new(shape.clone(), shape.clone(), vec![u])
    }

    pub fn in_shape(&self) -> &AlgebraShape {
        &self.in_shape
    }

    pub fn out_shape(&self) -> &AlgebraShape {
        &self.out_shape
    }

    pub fn kraus(&self) -> &[Block] {
        &self.kraus
    }

    /// `T(𝟙) = 𝟙`.
    pub fn is_unital(&self) -> bool {
        self.unital
    }

    /// `tr T*(ρ) = tr ρ` for all `ρ`.
    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// `‖T(𝟙) − 𝟙‖_max`, evaluated through the Heisenberg action.
    pub fn unitality_error(&self) -> f64 {
        let one = HermitianElement::identity(&self.out_shape);
        let t1 = self.heisenberg(&one);
        t1.max_abs_diff(&HermitianElement::identity(&self.in_shape))
    }

    /// `max_{ij} |tr T*(E_ij) − δ_ij|` over matrix units of the input algebra,
    /// evaluated through the Schrödinger action.
    pub fn trace_preservation_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (&d, off) in self.in_shape.blocks().iter().zip(self.in_shape.offsets()) {
            for i in 0..d {
                for j in 0..d {
                    let tr: C64 = self
                        .kraus
                        .iter()
                        .map(|k| {
                            // tr(K E_ij K†) = Σ_r K_{r,i} conj(K_{r,j})
                            (0..k.nrows())
                                .map(|r| k[(r, off + i)] * k[(r, off + j)].conj())
                                .sum::<C64>()
                        })
                        .sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((tr - C64::new(target, 0.0)).norm());
                }
            }
        }
        worst
    }

    fn heisenberg(&self, x: &HermitianElement) -> HermitianElement {
        let dense = x.to_dense();
        let n = self.in_shape.hilbert_dim();
        let sum = self
            .kraus
            .iter()
            .fold(Block::zeros(n, n), |acc, k| acc + k.adjoint() * &dense * k);
        HermitianElement::from_dense_projected(&self.in_shape, &sum).expect("dimensions checked")
    }

    fn schrodinger_dense(&self, rho: &Block) -> Block {
        let n = self.out_shape.hilbert_dim();
        self.kraus
            .iter()
            .fold(Block::zeros(n, n), |acc, k| acc + k * rho * k.adjoint())
    }

    /// Sequential composition: first `self`, then `next` (on states).
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        self.out_shape.ensure_eq(&next.in_shape)?;
        // the block projection between the two maps is Σ_b P_b · P_b
        let projectors = block_projectors(&self.out_shape);
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len() * projectors.len());
        for l in &next.kraus {
            for p in &projectors {
                for k in &self.kraus {
                    kraus.push(l * p * k);
                }
            }
        }
        Channel::new(self.in_shape.clone(), next.out_shape.clone(), kraus)
    }
}

fn block_projectors(shape: &AlgebraShape) -> Vec<Block> {
    let n = shape.hilbert_dim();
    if shape.num_blocks() == 1 {
        return vec![Block::identity(n, n)];
    }
    shape
        .blocks()
        .iter()
        .zip(shape.offsets())
        .map(|(&d, off)| {
            Block::from_fn(n, n, |r, c| {
                if r == c && r >= off && r < off + d {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        })
        .collect()
}

/// Heisenberg action `T(x) = Σ K_i† x K_i`; `x` lives on the output algebra.
pub fn apply_markov(t: &Channel, x: &HermitianElement) -> Result<HermitianElement> {
    t.out_shape.ensure_eq(x.shape())?;
    Ok(t.heisenberg(x))
}

/// Schrödinger action `T*(ρ) = Σ K_i ρ K_i†`; `ρ` lives on the input algebra.
pub fn apply_coarse_graining(t: &Channel, rho: &State) -> Result<State> {
    t.in_shape.ensure_eq(rho.shape())?;
    let out = t.schrodinger_dense(&rho.element().to_dense());
    State::from_element(HermitianElement::from_dense_projected(&t.out_shape, &out)?)
}

/// `|⟨T(x), ρ⟩ − ⟨x, T*(ρ)⟩|`.
pub fn duality_residual(t: &Channel, x: &HermitianElement, rho: &State) -> Result<f64> {
    let lhs = apply_markov(t, x)?.inner(rho.element())?;
    let rhs = x.inner(apply_coarse_graining(t, rho)?.element())?;
    Ok((lhs - rhs).abs())
}

/// Choi matrix `Σ_ij E_ij ⊗ T*(E_ij)` over the input Hilbert space.
pub fn choi_matrix(t: &Channel) -> Block {
    let n_in = t.in_shape.hilbert_dim();
    let n_out = t.out_shape.hilbert_dim();
    let projectors = block_projectors(&t.out_shape);
    let mut choi = Block::zeros(n_in * n_out, n_in * n_out);
    for i in 0..n_in {
        for j in 0..n_in {
            let mut e = Block::zeros(n_in, n_in);
            e[(i, j)] = C64::new(1.0, 0.0);
            let img = t.schrodinger_dense(&e);
            let img = projectors
                .iter()
                .fold(Block::zeros(n_out, n_out), |acc, p| acc + p * &img * p);
            choi.view_mut((i * n_out, j * n_out), (n_out, n_out))
                .copy_from(&img);
        }
    }
    choi
}

/// Smallest eigenvalue of the (Hermitian) Choi matrix.
pub fn choi_min_eigenvalue(t: &Channel) -> f64 {
    let c = hermitize(&choi_matrix(t));
    c.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn sample_channel<R: Rng + ?Sized>(
    rng: &mut R,
    in_shape: &AlgebraShape,
    out_shape: &AlgebraShape,
    kraus_count: usize,
) -> Result<Channel> {
    let (n_in, n_out) = (in_shape.hilbert_dim(), out_shape.hilbert_dim());
    if kraus_count == 0 {
        return Err(Error::InvalidArgument("kraus_count must be >= 1".into()));
    }
    if kraus_count * n_out < n_in {
        return Err(Error::InvalidArgument(format!(
            "{kraus_count} Kraus operators of size {n_out}x{n_in} cannot form an isometry"
        )));
    }
    let m = kraus_count * n_out;
    let v = if m == n_in {
        random_unitary(rng, n_in)
    } else {
        // Stinespring isometry V: ℂ^{n_in} → ℂ^{k·n_out}, V†V = 𝟙
        ginibre(rng, m, n_in).qr().q()
    };
    let kraus = (0..kraus_count)
        .map(|i| v.view((i * n_out, 0), (n_out, n_in)).into_owned())
        .collect();
    Channel::new(in_shape.clone(), out_shape.clone(), kraus)
}

/// Random trace-preserving channel `M_{in_dim} → M_{out_dim}` from a Haar-like
/// Stinespring isometry cut into `kraus_count` blocks.
pub fn random_channel(in_dim: usize, out_dim: usize, kraus_count: usize, seed: u64) -> Result<Channel> {
    if in_dim == 0 || out_dim == 0 {
        return Err(Error::InvalidArgument("dimensions must be >= 1".into()));
    }
    sample_channel(
        &mut trial_rng(seed, 0),
        &AlgebraShape::full(in_dim),
        &AlgebraShape::full(out_dim),
        kraus_count,
    )
}

/// Pinching `ρ ↦ Σ_b P_b ρ P_b` onto the blocks of `shape`, acting on the full
/// matrix algebra `M_n` with `n = shape.hilbert_dim()`. `[1; n]` gives the
/// dephasing onto the diagonal.
pub fn pinching_channel(shape: &AlgebraShape) -> Channel {
    let full = AlgebraShape::full(shape.hilbert_dim());
    Channel::new(full.clone(), full, block_projectors_all(shape)).expect("projectors sum to 1")
}

/// Conditional expectation `M_n → ⊕_b M_{d_b}` keeping the diagonal blocks,
/// with the block algebra as output.
pub fn block_restriction(shape: &AlgebraShape) -> Channel {
    let full = AlgebraShape::full(shape.hilbert_dim());
    Channel::new(full, shape.clone(), block_projectors_all(shape)).expect("projectors sum to 1")
}

fn block_projectors_all(shape: &AlgebraShape) -> Vec<Block> {
    if shape.num_blocks() == 1 {
        let n = shape.hilbert_dim();
        return vec![Block::identity(n, n)];
    }
    block_projectors(shape)
}

/// How [`monotonicity_audit`] draws channels: output algebra (defaults to the
/// input shape), Kraus rank range and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSampler {
    pub out_shape: Option<AlgebraShape>,
    pub max_kraus: usize,
    pub seed: u64,
}

impl Default for ChannelSampler {
    fn default() -> Self {
        Self {
            out_shape: None,
            max_kraus: 4,
            seed: 0,
        }
    }
}

impl ChannelSampler {
    /// Channel for trial `trial`; independent of evaluation order.
    pub fn sample(&self, in_shape: &AlgebraShape, trial: u64) -> Result<Channel> {
        let out = self.out_shape.clone().unwrap_or_else(|| in_shape.clone());
        let min_k = in_shape.hilbert_dim().div_ceil(out.hilbert_dim());
        let max_k = self.max_kraus.max(min_k);
        let mut rng = trial_rng(self.seed, trial);
        let k = rng.random_range(min_k..=max_k);
        sample_channel(&mut rng, in_shape, &out, k)
    }
}

/// Minimum of `D_γ(ω,φ) − D_γ(T*ω, T*φ)` over sampled channels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub trials: usize,
    pub min_gap: f64,
    pub worst_trial: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Gap below which monotonicity counts as violated.
pub const MONOTONICITY_TOL: f64 = 1e-9;

/// `D(ω,φ) − D(T*ω, T*φ)`; `+∞` when the input divergence is infinite.
pub fn monotonicity_gap(omega: &State, phi: &State, t: &Channel, gamma: f64) -> Result<f64> {
    let before = divergence(omega, phi, gamma)?.value;
    if before.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let after = divergence(
        &apply_coarse_graining(t, omega)?,
        &apply_coarse_graining(t, phi)?,
        gamma,
    )?
    .value;
    Ok(before - after)
}

/// Audit `D_γ(ω,φ) >= D_γ(T*ω, T*φ)` over `trials` channels drawn by `sampler`.
/// Trials run in parallel; the report is independent of scheduling.
pub fn monotonicity_audit(
    omega: &State,
    phi: &State,
    gamma: f64,
    sampler: &ChannelSampler,
    trials: usize,
) -> Result<AuditReport> {
    omega.shape().ensure_eq(phi.shape())?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let gaps = (0..trials)
        .into_par_iter()
        .map(|t| {
            let ch = sampler.sample(omega.shape(), t as u64)?;
            monotonicity_gap(omega, phi, &ch, gamma).map(|g| (g, t))
        })
        .collect::<Result<Vec<_>>>()?;
    let (min_gap, worst_trial) = gaps
        .into_iter()
        .fold((f64::INFINITY, 0), |acc, (g, t)| if g < acc.0 { (g, t) } else { acc });
    Ok(AuditReport {
        trials,
        min_gap,
        worst_trial,
        tolerance: MONOTONICITY_TOL,
        passed: min_gap >= -MONOTONICITY_TOL,
    })
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    in_shape: Vec<usize>,
    out_shape: Vec<usize>,
    kraus: Vec<MatrixRows>,
}

impl Serialize for Channel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelJson {
            in_shape: self.in_shape.blocks().to_vec(),
            out_shape: self.out_shape.blocks().to_vec(),
            kraus: self.kraus.iter().map(block_to_rows).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ChannelJson::deserialize(d)?;
        let build = || -> Result<Channel> {
            let kraus = raw.kraus.iter().map(rows_to_block).collect::<Result<Vec<_>>>()?;
            Channel::new(
                AlgebraShape::new(raw.in_shape.clone())?,
                AlgebraShape::new(raw.out_shape.clone())?,
                kraus,
            )
        };
        build().map_err(D::Error::custom)
    }
}
