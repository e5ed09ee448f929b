//! Finite-dimensional *-algebras as direct sums of full matrix blocks.
//!
//! An [`AlgebraShape`] `[d1, d2, ...]` stands for `M_{d1} ⊕ M_{d2} ⊕ ...`.
//! Elements are stored block by block; the commutative algebra `ℂⁿ` is the
//! shape `[1; n]` and a full matrix algebra is `[d]`, so both go through the
//! same code.
//!
//! Every matrix function in the crate (powers, logarithms, support
//! projections) is evaluated through one primitive, the Hermitian
//! eigendecomposition in [`spectral`].
//!
//! Conventions on the kernel of a positive element (eigenvalues `<= tol::psd()`):
//! `0^p = 0` for `p > 0` and `log 0 := 0`. Callers that need the support
//! explicitly use [`support_projection`].

pub(crate) mod json;
mod random;
mod spectral;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::tol;

pub use random::{
    ginibre, random_hermitian, random_state, random_state_with_rank, random_unitary, trial_rng,
};
pub use spectral::{spectral, BlockSpectrum, SpectralDecomposition};
pub(crate) use random::{sample_hermitian, sample_state};
pub(crate) use spectral::hermitize;

pub type C64 = Complex<f64>;
pub type Block = DMatrix<C64>;

/// Block dimensions of a finite-dimensional *-algebra.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgebraShape(Vec<usize>);

impl AlgebraShape {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidShape("no blocks".into()));
        }
        if let Some(pos) = blocks.iter().position(|&d| d == 0) {
            return Err(Error::InvalidShape(format!("block {pos} has dimension 0")));
        }
        Ok(Self(blocks))
    }

    /// The full matrix algebra `M_d`.
    pub fn full(d: usize) -> Self {
        Self(vec![d.max(1)])
    }

    /// The commutative algebra `ℂⁿ`.
    pub fn classical(n: usize) -> Self {
        Self(vec![1; n.max(1)])
    }

    pub fn blocks(&self) -> &[usize] {
        &self.0
    }

    pub fn num_blocks(&self) -> usize {
        self.0.len()
    }

    /// Dimension of the underlying Hilbert space, `Σ d_i`.
    pub fn hilbert_dim(&self) -> usize {
        self.0.iter().sum()
    }

    /// Dimension of the algebra, `Σ d_i²`.
    pub fn algebra_dim(&self) -> usize {
        self.0.iter().map(|d| d * d).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.0.iter().all(|&d| d == 1)
    }

    /// Offsets of each block inside the direct-sum Hilbert space.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.0
            .iter()
            .map(|d| {
                let o = acc;
                acc += d;
                o
            })
            .collect()
    }

    pub(crate) fn ensure_eq(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch(self.0.clone(), other.0.clone()));
        }
        Ok(())
    }
}

/// Self-adjoint element of a block-diagonal algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianElement {
    shape: AlgebraShape,
    blocks: Vec<Block>,
}

impl HermitianElement {
    /// Validates block sizes and Hermiticity (relative tolerance
    /// [`tol::HERMITIAN`]); the stored blocks are exactly Hermitian.
    pub fn new(shape: AlgebraShape, blocks: Vec<Block>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() {
            return Err(Error::InvalidShape(format!(
                "{} blocks given for shape {:?}",
                blocks.len(),
                shape.blocks()
            )));
        }
        for (i, (b, &d)) in blocks.iter().zip(shape.blocks()).enumerate() {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::InvalidShape(format!(
                    "block {i} is {}x{}, expected {d}x{d}",
                    b.nrows(),
                    b.ncols()
                )));
            }
        }
        let mut asym = 0.0f64;
        let mut norm = 0.0f64;
        for b in &blocks {
            asym += (b - b.adjoint()).norm_squared();
            norm += b.norm_squared();
        }
        let (asym, norm) = (asym.sqrt(), norm.sqrt());
        if !asym.is_finite() || !norm.is_finite() {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        if asym > tol::HERMITIAN * norm {
            return Err(Error::NonHermitian(asym / norm));
        }
        let blocks = blocks.iter().map(hermitize).collect();
        Ok(Self { shape, blocks })
    }

    pub(crate) fn from_parts(shape: AlgebraShape, blocks: Vec<Block>) -> Self {
        Self { shape, blocks }
    }

    pub fn zeros(shape: &AlgebraShape) -> Self {
        let blocks = shape.blocks().iter().map(|&d| Block::zeros(d, d)).collect();
        Self::from_parts(shape.clone(), blocks)
    }

    pub fn identity(shape: &AlgebraShape) -> Self {
        let blocks = shape
            .blocks()
            .iter()
            .map(|&d| Block::identity(d, d))
            .collect();
        Self::from_parts(shape.clone(), blocks)
    }

    /// Element of the commutative algebra `ℂⁿ` with the given entries.
    pub fn classical(entries: &[f64]) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidShape("no entries".into()));
        }
        let blocks = entries
            .iter()
            .map(|&v| Block::from_element(1, 1, C64::new(v, 0.0)))
            .collect();
        Self::new(AlgebraShape::classical(entries.len()), blocks)
    }

    /// `diag(entries)` as a single full block.
    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        let m = Block::from_fn(n, n, |r, c| {
            C64::new(if r == c { entries[r] } else { 0.0 }, 0.0)
        });
        Self::new(AlgebraShape::full(n), vec![m])
    }

    /// Single full block from real row-major entries.
    pub fn real_matrix(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidShape("matrix is not square".into()));
        }
        let m = Block::from_fn(n, n, |r, c| C64::new(rows[r][c], 0.0));
        Self::new(AlgebraShape::full(n), vec![m])
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn spectral(&self) -> SpectralDecomposition {
        spectral(self)
    }

    /// `f(A)` through the eigendecomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        self.spectral().map(f)
    }

    /// Real trace pairing `Re Σ_b tr(x_b y_b)`.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.shape.ensure_eq(&other.shape)?;
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &Self) -> f64 {
        // tr(xy) = Σ_ij x_ij y_ji = Σ_ij x_ij conj(y_ij) for Hermitian y
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(x, y)| {
                x.iter()
                    .zip(y.iter())
                    .map(|(a, b)| (a * b.conj()).re)
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(|b| b.trace().re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// `a·self + b·other`.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.shape.ensure_eq(&other.shape)?;
        Ok(self.lin_comb_unchecked(a, other, b))
    }

    pub(crate) fn lin_comb_unchecked(&self, a: f64, other: &Self, b: f64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(x, y)| x * C64::new(a, 0.0) + y * C64::new(b, 0.0))
            .collect();
        Self::from_parts(self.shape.clone(), blocks)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Self {
        let blocks = self.blocks.iter().map(|x| x * C64::new(a, 0.0)).collect();
        Self::from_parts(self.shape.clone(), blocks)
    }

    /// Embed into the full `n×n` matrix on the direct-sum Hilbert space.
    pub fn to_dense(&self) -> Block {
        let n = self.shape.hilbert_dim();
        let mut out = Block::zeros(n, n);
        for (b, off) in self.blocks.iter().zip(self.shape.offsets()) {
            out.view_mut((off, off), (b.nrows(), b.ncols())).copy_from(b);
        }
        out
    }

    /// Keep the diagonal blocks of a dense matrix (conditional expectation
    /// onto the block-diagonal algebra), then Hermitize.
    pub fn from_dense_projected(shape: &AlgebraShape, dense: &Block) -> Result<Self> {
        let n = shape.hilbert_dim();
        if dense.nrows() != n || dense.ncols() != n {
            return Err(Error::InvalidShape(format!(
                "dense matrix is {}x{}, shape needs {n}x{n}",
                dense.nrows(),
                dense.ncols()
            )));
        }
        let blocks = shape
            .blocks()
            .iter()
            .zip(shape.offsets())
            .map(|(&d, off)| hermitize(&dense.view((off, off), (d, d)).into_owned()))
            .collect();
        Ok(Self::from_parts(shape.clone(), blocks))
    }

    /// Largest `‖A_b − B_b‖_max` entry difference; `inf` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape != other.shape {
            return f64::INFINITY;
        }
        self.blocks
            .iter()
            .zip(&other.blocks)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }
}

/// Positive element `ρ_ω` of the algebra, the density of a positive normal
/// functional `ω(x) = Σ_b tr(ρ_b x_b)`. The trace need not be 1.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    element: HermitianElement,
    spectrum: SpectralDecomposition,
    trace: f64,
}

impl State {
    pub fn new(shape: AlgebraShape, blocks: Vec<Block>) -> Result<Self> {
        Self::from_element(HermitianElement::new(shape, blocks)?)
    }

    /// Eigenvalues in `[-tol::psd(), 0)` are clipped to zero; anything more
    /// negative is rejected.
    pub fn from_element(element: HermitianElement) -> Result<Self> {
        let spectrum = element.spectral();
        let min = spectrum.min_eigenvalue();
        let eps = tol::psd();
        if min < -eps {
            return Err(Error::NotPositive(min));
        }
        if min < 0.0 {
            let clipped = SpectralDecomposition::from_parts(
                spectrum.shape().clone(),
                spectrum
                    .blocks()
                    .iter()
                    .map(|b| BlockSpectrum {
                        values: b.values.iter().map(|&v| v.max(0.0)).collect(),
                        vectors: b.vectors.clone(),
                    })
                    .collect(),
            );
            return Ok(Self::from_spectrum(clipped));
        }
        let trace = element.trace();
        Ok(Self {
            element,
            spectrum,
            trace,
        })
    }

    /// Build from eigenpairs whose eigenvalues are already non-negative.
    pub(crate) fn from_spectrum(spectrum: SpectralDecomposition) -> Self {
        let element = spectrum.reconstruct();
        let trace = spectrum.eigenvalues().sum();
        Self {
            element,
            spectrum,
            trace,
        }
    }

    /// Classical weight vector as a state on `ℂⁿ`.
    pub fn classical(weights: &[f64]) -> Result<Self> {
        Self::from_element(HermitianElement::classical(weights)?)
    }

    /// `diag(weights)` as one full block.
    pub fn diagonal(weights: &[f64]) -> Result<Self> {
        Self::from_element(HermitianElement::diagonal(weights)?)
    }

    pub fn real_matrix(rows: &[&[f64]]) -> Result<Self> {
        Self::from_element(HermitianElement::real_matrix(rows)?)
    }

    pub fn zeros(shape: &AlgebraShape) -> Self {
        Self::from_spectrum(HermitianElement::zeros(shape).spectral())
    }

    pub fn shape(&self) -> &AlgebraShape {
        self.element.shape()
    }

    pub fn blocks(&self) -> &[Block] {
        self.element.blocks()
    }

    pub fn element(&self) -> &HermitianElement {
        &self.element
    }

    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// `ω(𝟙)`.
    pub fn trace(&self) -> f64 {
        self.trace
    }

    /// `ρ^p` with `0^p = 0` on the kernel.
    pub fn power(&self, p: f64) -> Self {
        let eps = tol::psd();
        let spectrum = map_values(&self.spectrum, |l| if l > eps { l.powf(p) } else { 0.0 });
        Self::from_spectrum(spectrum)
    }

    /// `ρ^p` as a plain Hermitian element, without re-diagonalising.
    pub(crate) fn power_element(&self, p: f64) -> HermitianElement {
        let eps = tol::psd();
        self.spectrum
            .map(|l| if l > eps { l.powf(p) } else { 0.0 })
    }

    pub fn log_support(&self) -> HermitianElement {
        let eps = tol::psd();
        self.spectrum.map(|l| if l > eps { l.ln() } else { 0.0 })
    }

    pub fn support_projection(&self) -> HermitianElement {
        let eps = tol::psd();
        self.spectrum.map(|l| if l > eps { 1.0 } else { 0.0 })
    }

    /// Number of eigenvalues above the PSD threshold.
    pub fn rank(&self) -> usize {
        let eps = tol::psd();
        self.spectrum.eigenvalues().filter(|&l| l > eps).count()
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) {
            return Err(Error::InvalidArgument(format!("negative scale {c}")));
        }
        Ok(Self::from_spectrum(map_values(&self.spectrum, |l| l * c)))
    }

    /// `ρ / tr ρ`; the zero state is returned unchanged.
    pub fn normalized(&self) -> Self {
        if self.trace > 0.0 {
            Self::from_spectrum(map_values(&self.spectrum, |l| l / self.trace))
        } else {
            self.clone()
        }
    }

    /// `λ·self + (1 − λ)·other` for `λ ∈ [0, 1]`.
    pub fn mix(&self, lambda: f64, other: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!(
                "mixing weight {lambda} outside [0, 1]"
            )));
        }
        Self::from_element(self.element.lin_comb(lambda, &other.element, 1.0 - lambda)?)
    }

    /// Trace norm `‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        let d = self.element.sub(&other.element)?;
        Ok(d.spectral().eigenvalues().map(f64::abs).sum())
    }
}

fn map_values(s: &SpectralDecomposition, f: impl Fn(f64) -> f64) -> SpectralDecomposition {
    SpectralDecomposition::from_parts(
        s.shape().clone(),
        s.blocks()
            .iter()
            .map(|b| BlockSpectrum {
                values: b.values.iter().map(|&v| f(v)).collect(),
                vectors: b.vectors.clone(),
            })
            .collect(),
    )
}

/// `ρ^p` for `p > 0`, with `0^p = 0`.
pub fn matrix_power(rho: &State, p: f64) -> Result<State> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("power must be > 0, got {p}")));
    }
    Ok(rho.power(p))
}

/// `log ρ` on the support, `0` on the kernel.
pub fn matrix_log_support(rho: &State) -> HermitianElement {
    rho.log_support()
}

pub fn support_projection(rho: &State) -> HermitianElement {
    rho.support_projection()
}

/// `Σ_b tr(x_b ρ_b)`, i.e. `ω(x)`.
pub fn trace_pairing(x: &HermitianElement, rho: &State) -> Result<f64> {
    x.inner(rho.element())
}
