use nalgebra::DMatrix;

use super::{AlgebraShape, Block, HermitianElement, C64};

/// Eigenpairs of one Hermitian block, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSpectrum {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: Block,
}

impl BlockSpectrum {
    pub fn of(block: &Block) -> Self {
        let n = block.nrows();
        if n == 1 {
            return Self {
                values: vec![block[(0, 0)].re],
                vectors: DMatrix::identity(1, 1),
            };
        }
        let eig = block.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Block {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for r in 0..n {
                scaled[(r, c)] *= w;
            }
        }
        let out = &scaled * self.vectors.adjoint();
        hermitize(&out)
    }
}

/// Per-block spectral decomposition of a block-diagonal Hermitian element.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    shape: AlgebraShape,
    blocks: Vec<BlockSpectrum>,
}

impl SpectralDecomposition {
    pub(crate) fn compute(shape: &AlgebraShape, blocks: &[Block]) -> Self {
        Self {
            shape: shape.clone(),
            blocks: blocks.iter().map(BlockSpectrum::of).collect(),
        }
    }

    pub(crate) fn from_parts(shape: AlgebraShape, blocks: Vec<BlockSpectrum>) -> Self {
        Self { shape, blocks }
    }

    pub fn shape(&self) -> &AlgebraShape {
        &self.shape
    }

    pub fn blocks(&self) -> &[BlockSpectrum] {
        &self.blocks
    }

    /// All eigenvalues, block by block.
    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flat_map(|b| b.values.iter().copied())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().fold(f64::INFINITY, f64::min)
    }

    /// Apply a real function to the spectrum: `Σ_b V_b f(Λ_b) V_b†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianElement {
        let blocks = self.blocks.iter().map(|b| b.map(&f)).collect();
        HermitianElement::from_parts(self.shape.clone(), blocks)
    }

    pub fn reconstruct(&self) -> HermitianElement {
        self.map(|x| x)
    }

    /// Largest `‖V†V − 1‖_max` over blocks.
    pub fn orthonormality_error(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let n = b.values.len();
                let g = b.vectors.adjoint() * &b.vectors;
                let mut worst = 0.0f64;
                for r in 0..n {
                    for c in 0..n {
                        let target = if r == c { 1.0 } else { 0.0 };
                        worst = worst.max((g[(r, c)] - C64::new(target, 0.0)).norm());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }
}

/// `(A + A†)/2`.
pub(crate) fn hermitize(m: &Block) -> Block {
    let adj = m.adjoint();
    (m + adj).map(|z| z * 0.5)
}

/// Eigendecomposition of a Hermitian element.
pub fn spectral(a: &HermitianElement) -> SpectralDecomposition {
    SpectralDecomposition::compute(a.shape(), a.blocks())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{AlgebraShape, HermitianElement};

    fn real_block(rows: &[&[f64]]) -> HermitianElement {
        let n = rows.len();
        let m = DMatrix::from_fn(n, n, |r, c| C64::new(rows[r][c], 0.0));
        HermitianElement::new(AlgebraShape::full(n), vec![m]).unwrap()
    }

    #[test]
    fn pauli_x() {
        let s = spectral(&real_block(&[&[0.0, 1.0], &[1.0, 0.0]]));
        let v: Vec<f64> = s.eigenvalues().collect();
        assert!((v[0] + 1.0).abs() < 1e-14 && (v[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_is_untouched() {
        let s = spectral(&real_block(&[&[3.0, 0.0], &[0.0, 7.0]]));
        assert_eq!(s.eigenvalues().collect::<Vec<_>>(), vec![3.0, 7.0]);
        let v = &s.blocks()[0].vectors;
        for r in 0..2 {
            for c in 0..2 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((v[(r, c)].norm() - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn two_one_one_two() {
        // characteristic polynomial (2-λ)² - 1 = 0 → λ ∈ {1, 3}
        let s = spectral(&real_block(&[&[2.0, 1.0], &[1.0, 2.0]]));
        let v: Vec<f64> = s.eigenvalues().collect();
        assert!((v[0] - 1.0).abs() < 1e-13 && (v[1] - 3.0).abs() < 1e-13);
    }
}
