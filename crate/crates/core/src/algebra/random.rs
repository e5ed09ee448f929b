//! Deterministic random generators (ChaCha8, seeded).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{hermitize, AlgebraShape, Block, HermitianElement, State, C64};

/// Generator for trial `stream` of a run seeded with `seed`. Trials drawn this
/// way are independent of evaluation order.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `rows × cols` matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Block {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Block::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Block {
    let qr = ginibre(rng, d, d).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for c in 0..d {
        let diag = r[(c, c)];
        let phase = if diag.norm() > 0.0 {
            diag / diag.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for row in 0..d {
            u[(row, c)] *= phase;
        }
    }
    u
}

pub(crate) fn sample_state<R: Rng + ?Sized>(
    rng: &mut R,
    shape: &AlgebraShape,
    rank: Option<usize>,
    normalized: bool,
) -> State {
    let blocks: Vec<Block> = shape
        .blocks()
        .iter()
        .map(|&d| {
            let r = rank.map_or(d, |r| r.clamp(1, d));
            let g = ginibre(rng, d, r);
            hermitize(&(&g * g.adjoint()))
        })
        .collect();
    let element = HermitianElement::from_parts(shape.clone(), blocks);
    let state = State::from_element(element).expect("G G† is positive");
    if normalized {
        state.normalized()
    } else {
        state
    }
}

pub(crate) fn sample_hermitian<R: Rng + ?Sized>(rng: &mut R, shape: &AlgebraShape) -> HermitianElement {
    let blocks = shape
        .blocks()
        .iter()
        .map(|&d| hermitize(&ginibre(rng, d, d)))
        .collect();
    HermitianElement::from_parts(shape.clone(), blocks)
}

/// Ginibre state `G G†` per block; full rank with probability one.
pub fn random_state(shape: &AlgebraShape, seed: u64, normalized: bool) -> State {
    sample_state(&mut trial_rng(seed, 0), shape, None, normalized)
}

/// Like [`random_state`] but every block has rank `min(rank, d_b)`.
pub fn random_state_with_rank(
    shape: &AlgebraShape,
    rank: usize,
    seed: u64,
    normalized: bool,
) -> State {
    sample_state(&mut trial_rng(seed, 0), shape, Some(rank), normalized)
}

/// Hermitian part of a Ginibre matrix in each block.
pub fn random_hermitian(shape: &AlgebraShape, seed: u64) -> HermitianElement {
    sample_hermitian(&mut trial_rng(seed, 0), shape)
}
