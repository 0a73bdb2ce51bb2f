//! Seeded samplers. Every random stream is derived from a master seed and
//! a counter, so results do not depend on evaluation order or thread count.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{Algebra, Element, C64};

pub type SeededRng = ChaCha8Rng;

/// splitmix64 mix of `(master, counter)`.
pub fn derive_seed(master: u64, counter: u64) -> u64 {
    let mut z = master ^ counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(master: u64, counter: u64) -> SeededRng {
    seeded(derive_seed(master, counter))
}

/// Standard complex normal: real and imaginary parts are N(0, 1/2).
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    // Fill row-major so the draw order is independent of storage layout.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<C64> {
    DVector::from_fn(len, |_, _| complex_normal(rng))
}

fn blockwise<R: Rng + ?Sized>(
    algebra: &Arc<Algebra>,
    rng: &mut R,
    mut f: impl FnMut(&mut R, usize) -> DMatrix<C64>,
) -> Element {
    let blocks = algebra.dims().iter().map(|&d| f(rng, d)).collect();
    Element::new(algebra, blocks).expect("block shapes match the algebra")
}

/// Element with independent standard complex normal entries.
pub fn gaussian_element<R: Rng + ?Sized>(algebra: &Arc<Algebra>, rng: &mut R) -> Element {
    blockwise(algebra, rng, |r, d| complex_gaussian_matrix(r, d, d))
}

/// GUE-distributed hermitian element, `(G + G*)/2` per block.
pub fn hermitian<R: Rng + ?Sized>(algebra: &Arc<Algebra>, rng: &mut R) -> Element {
    blockwise(algebra, rng, |r, d| {
        let g = complex_gaussian_matrix(r, d, d);
        (&g + g.adjoint()).scale(0.5)
    })
}

/// Full-rank positive element `G G*` per block (Wishart).
pub fn positive<R: Rng + ?Sized>(algebra: &Arc<Algebra>, rng: &mut R) -> Element {
    blockwise(algebra, rng, |r, d| {
        let g = complex_gaussian_matrix(r, d, d);
        &g * g.adjoint()
    })
}

/// Positive element of unit trace.
pub fn state<R: Rng + ?Sized>(algebra: &Arc<Algebra>, rng: &mut R) -> Element {
    let p = positive(algebra, rng);
    let t = p.trace().re;
    p.scale(1.0 / t)
}

/// Rank-one positive `v v*` supported in one block; the block is drawn
/// uniformly unless given.
pub fn pure<R: Rng + ?Sized>(algebra: &Arc<Algebra>, rng: &mut R, block: Option<usize>) -> Element {
    let b = block.unwrap_or_else(|| rng.random_range(0..algebra.num_blocks()));
    let v = complex_gaussian_vector(rng, algebra.dims()[b]);
    let mut blocks: Vec<DMatrix<C64>> = algebra.dims().iter().map(|&d| DMatrix::zeros(d, d)).collect();
    blocks[b] = &v * v.adjoint();
    Element::new(algebra, blocks).expect("block shapes match the algebra")
}

/// Haar-random unitary per block: QR of a Ginibre matrix with the phases of
/// `diag(R)` divided out.
pub fn unitary<R: Rng + ?Sized>(algebra: &Arc<Algebra>, rng: &mut R) -> Element {
    blockwise(algebra, rng, |r, d| haar_unitary(r, d))
}

pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DMatrix<C64> {
    let g = complex_gaussian_matrix(rng, d, d);
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}
