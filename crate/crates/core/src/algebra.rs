//! Finite von Neumann algebras realized as weighted direct sums of full
//! matrix blocks, `M = ⊕_b Mat(d_b)` with trace `τ(x) = Σ_b w_b tr(x_b)`.
//!
//! Elements are stored blockwise. The coordinate space used by
//! [`crate::superop::SuperOp`] is the orthonormal basis of the trace inner
//! product `⟨a, b⟩ = τ(a* b)`: the coordinate of entry `(i, j)` of block `b`
//! is `sqrt(w_b) · x_ij`, laid out block after block in row-major order.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Eigenvalues closer than this are merged into one eigenprojection.
pub const DEGENERACY_GAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Algebra {
    dims: Vec<usize>,
    weights: Vec<f64>,
    offsets: Vec<usize>,
}

impl Algebra {
    /// Builds `⊕_b Mat(dims[b])` with trace weights `weights[b]`. With
    /// `normalize` set the weights are rescaled so that `τ(1) = 1`.
    pub fn new(dims: &[usize], weights: &[f64], normalize: bool) -> Result<Arc<Algebra>> {
        if dims.is_empty() || weights.is_empty() {
            return Err(Error::EmptyAlgebra);
        }
        if dims.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "weights",
                expected: dims.len(),
                found: weights.len(),
            });
        }
        if let Some(block) = dims.iter().position(|&d| d == 0) {
            return Err(Error::DimensionZero { block });
        }
        if let Some(block) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::NonPositiveWeight {
                block,
                weight: weights[block],
            });
        }
        let mut weights = weights.to_vec();
        if normalize {
            let total: f64 = dims.iter().zip(&weights).map(|(&d, &w)| d as f64 * w).sum();
            weights.iter_mut().for_each(|w| *w /= total);
        }
        let mut offsets = Vec::with_capacity(dims.len());
        let mut acc = 0;
        for &d in dims {
            offsets.push(acc);
            acc += d * d;
        }
        Ok(Arc::new(Algebra {
            dims: dims.to_vec(),
            weights,
            offsets,
        }))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    /// `N = Σ_b d_b²`, the complex dimension of the algebra.
    pub fn coord_dim(&self) -> usize {
        self.dims.iter().map(|d| d * d).sum()
    }

    /// Offset of block `b` in the coordinate vector.
    pub fn block_offset(&self, b: usize) -> usize {
        self.offsets[b]
    }

    /// `τ(1) = Σ_b w_b d_b`.
    pub fn unit_trace(&self) -> f64 {
        self.dims.iter().zip(&self.weights).map(|(&d, &w)| d as f64 * w).sum()
    }

    /// Smallest trace a nonzero projection can have.
    pub fn min_weight(&self) -> f64 {
        self.weights.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Total number of rank-one eigenprojections of a generic element.
    pub fn total_rank(&self) -> usize {
        self.dims.iter().sum()
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{dims:{:?}, weights:{:?}}}", self.dims, self.weights)
    }
}

/// A block-diagonal element of an [`Algebra`].
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    algebra: Arc<Algebra>,
    blocks: Vec<DMatrix<C64>>,
}

impl Element {
    pub fn new(algebra: &Arc<Algebra>, blocks: Vec<DMatrix<C64>>) -> Result<Element> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::LengthMismatch {
                what: "blocks",
                expected: algebra.num_blocks(),
                found: blocks.len(),
            });
        }
        for (b, (m, &d)) in blocks.iter().zip(algebra.dims()).enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::ShapeMismatch(format!(
                    "block {b} is {}x{}, expected {d}x{d}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Element {
            algebra: Arc::clone(algebra),
            blocks,
        })
    }

    pub fn zeros(algebra: &Arc<Algebra>) -> Element {
        let blocks = algebra.dims().iter().map(|&d| DMatrix::zeros(d, d)).collect();
        Element {
            algebra: Arc::clone(algebra),
            blocks,
        }
    }

    pub fn identity(algebra: &Arc<Algebra>) -> Element {
        let blocks = algebra.dims().iter().map(|&d| DMatrix::identity(d, d)).collect();
        Element {
            algebra: Arc::clone(algebra),
            blocks,
        }
    }

    /// Matrix unit `e_ij` of block `b` (zero-based indices).
    pub fn matrix_unit(algebra: &Arc<Algebra>, b: usize, i: usize, j: usize) -> Element {
        let mut x = Element::zeros(algebra);
        x.blocks[b][(i, j)] = C64::new(1.0, 0.0);
        x
    }

    /// Diagonal element; `values` lists the diagonal entries of all blocks
    /// concatenated in block order.
    pub fn diagonal(algebra: &Arc<Algebra>, values: &[f64]) -> Result<Element> {
        if values.len() != algebra.total_rank() {
            return Err(Error::LengthMismatch {
                what: "diagonal",
                expected: algebra.total_rank(),
                found: values.len(),
            });
        }
        let mut x = Element::zeros(algebra);
        let mut k = 0;
        for (b, &d) in algebra.dims().iter().enumerate() {
            for i in 0..d {
                x.blocks[b][(i, i)] = C64::new(values[k], 0.0);
                k += 1;
            }
        }
        Ok(x)
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn blocks(&self) -> &[DMatrix<C64>] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &DMatrix<C64> {
        &self.blocks[b]
    }

    pub fn into_blocks(self) -> Vec<DMatrix<C64>> {
        self.blocks
    }

    fn map_blocks(&self, f: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> Element {
        Element {
            algebra: Arc::clone(&self.algebra),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn zip_blocks(&self, other: &Element, f: impl Fn(&DMatrix<C64>, &DMatrix<C64>) -> DMatrix<C64>) -> Element {
        assert_eq!(
            self.algebra.dims(),
            other.algebra.dims(),
            "elements belong to different algebras"
        );
        Element {
            algebra: Arc::clone(&self.algebra),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn adjoint(&self) -> Element {
        self.map_blocks(|m| m.adjoint())
    }

    /// Entrywise transpose in each block (not the adjoint).
    pub fn transpose(&self) -> Element {
        self.map_blocks(|m| m.transpose())
    }

    pub fn hermitian_part(&self) -> Element {
        self.map_blocks(|m| (m + m.adjoint()).scale(0.5))
    }

    /// Operator product `x·y`.
    pub fn product(&self, other: &Element) -> Element {
        self.zip_blocks(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Element {
        self.map_blocks(|m| m.scale(c))
    }

    pub fn scale_complex(&self, c: C64) -> Element {
        self.map_blocks(|m| m * c)
    }

    /// Max entrywise deviation `max |x − x*|`.
    pub fn hermitian_deviation(&self) -> f64 {
        self.blocks
            .iter()
            .map(|m| {
                let d = m.nrows();
                let mut worst = 0.0f64;
                for i in 0..d {
                    for j in i..d {
                        worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|m| m.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `τ(x) = Σ_b w_b tr(x_b)`.
    pub fn trace(&self) -> C64 {
        self.blocks
            .iter()
            .zip(self.algebra.weights())
            .map(|(m, &w)| m.trace() * w)
            .sum()
    }

    /// Coordinates in the trace-orthonormal basis.
    pub fn to_coords(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.algebra.coord_dim());
        let mut k = 0;
        for (m, &w) in self.blocks.iter().zip(self.algebra.weights()) {
            let s = w.sqrt();
            let d = m.nrows();
            for i in 0..d {
                for j in 0..d {
                    v[k] = m[(i, j)] * s;
                    k += 1;
                }
            }
        }
        v
    }

    pub fn from_coords(algebra: &Arc<Algebra>, v: &DVector<C64>) -> Element {
        assert_eq!(v.len(), algebra.coord_dim(), "coordinate length");
        let mut x = Element::zeros(algebra);
        let mut k = 0;
        for (b, &w) in algebra.weights().iter().enumerate() {
            let s = 1.0 / w.sqrt();
            let d = algebra.dims()[b];
            for i in 0..d {
                for j in 0..d {
                    x.blocks[b][(i, j)] = v[k] * s;
                    k += 1;
                }
            }
        }
        x
    }
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.map_blocks(|m| -m)
    }
}

impl Mul<f64> for &Element {
    type Output = Element;
    fn mul(self, c: f64) -> Element {
        self.scale(c)
    }
}

/// One eigenprojection of a hermitian element, living in a single block.
#[derive(Debug, Clone)]
pub struct SpectralEntry {
    pub block: usize,
    pub eigenvalue: f64,
    pub rank: usize,
    /// Projection matrix on block `block`.
    pub projection: DMatrix<C64>,
}

/// Spectral resolution `x = Σ λ p` of a hermitian element.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub entries: Vec<SpectralEntry>,
    pub source: Element,
}

impl SpectralData {
    pub fn reconstruct(&self) -> Element {
        let mut x = Element::zeros(self.source.algebra());
        for e in &self.entries {
            x.blocks[e.block] += &e.projection * C64::new(e.eigenvalue, 0.0);
        }
        x
    }

    /// The eigenprojection of `entry` as an element of the whole algebra.
    pub fn projection_element(&self, entry: usize) -> Element {
        let e = &self.entries[entry];
        let mut p = Element::zeros(self.source.algebra());
        p.blocks[e.block] = e.projection.clone();
        p
    }
}

/// Eigenvalues (descending) and matching eigenvector columns of a hermitian
/// block. Ties keep their original order.
pub(crate) fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let h = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Resolves a hermitian element into eigenvalues and eigenprojections,
/// sorted descending per block; eigenvalues within [`DEGENERACY_GAP`] of
/// their neighbour share one projection.
pub fn spectral_decompose(x: &Element, tol: f64) -> Result<SpectralData> {
    let deviation = x.hermitian_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let mut entries = Vec::new();
    for (b, m) in x.blocks().iter().enumerate() {
        let (values, vectors) = hermitian_eigen(m);
        let d = values.len();
        let mut start = 0;
        while start < d {
            let mut end = start + 1;
            while end < d && values[end - 1] - values[end] < DEGENERACY_GAP {
                end += 1;
            }
            let cols = vectors.columns(start, end - start);
            let projection = cols * cols.adjoint();
            let eigenvalue = values[start..end].iter().sum::<f64>() / (end - start) as f64;
            entries.push(SpectralEntry {
                block: b,
                eigenvalue,
                rank: end - start,
                projection,
            });
            start = end;
        }
    }
    Ok(SpectralData {
        entries,
        source: x.clone(),
    })
}

/// `|x| = (x* x)^{1/2}`, computed blockwise from the singular value
/// decomposition `x = U Σ V*` as `V Σ V*`.
pub fn abs(x: &Element) -> Element {
    x.map_blocks(|m| {
        let svd = SVD::new(m.clone(), false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let sigma = DMatrix::from_diagonal(&svd.singular_values.map(|s| C64::new(s, 0.0)));
        v_t.adjoint() * sigma * v_t
    })
}

/// `‖x‖₁` through the spectral resolution: `Σ_b w_b Σ_i |λ_{b,i}|`.
pub fn l1_norm_spectral(x: &Element, tol: f64) -> Result<f64> {
    let deviation = x.hermitian_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(x.blocks()
        .iter()
        .zip(x.algebra().weights())
        .map(|(m, &w)| w * hermitian_eigen(m).0.iter().map(|l| l.abs()).sum::<f64>())
        .sum())
}

/// `‖x‖₁ = τ(|x|)` through singular values, valid for any element.
pub fn l1_norm_singular(x: &Element) -> f64 {
    x.blocks()
        .iter()
        .zip(x.algebra().weights())
        .map(|(m, &w)| w * m.singular_values().iter().sum::<f64>())
        .sum()
}

/// Trace norm. Exactly hermitian elements take the spectral path, all
/// others the singular-value path.
pub fn l1_norm(x: &Element) -> f64 {
    if x.hermitian_deviation() == 0.0 {
        l1_norm_spectral(x, 0.0).expect("exactly hermitian")
    } else {
        l1_norm_singular(x)
    }
}

/// The offending eigenpair of a failed positivity test.
#[derive(Debug, Clone)]
pub struct EigenWitness {
    pub block: usize,
    pub eigenvalue: f64,
    pub vector: DVector<C64>,
}

#[derive(Debug, Clone)]
pub struct Positivity {
    pub positive: bool,
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub witness: Option<EigenWitness>,
}

/// `x ≥ 0` up to `tol`: hermitian within `tol` and every eigenvalue at
/// least `−tol`. The witness is the most negative eigenpair.
pub fn is_positive(x: &Element, tol: f64) -> Positivity {
    let hermitian_deviation = x.hermitian_deviation();
    let mut min_eigenvalue = f64::INFINITY;
    let mut worst: Option<EigenWitness> = None;
    for (b, m) in x.blocks().iter().enumerate() {
        let (values, vectors) = hermitian_eigen(m);
        let last = values.len() - 1;
        if values[last] < min_eigenvalue {
            min_eigenvalue = values[last];
            worst = Some(EigenWitness {
                block: b,
                eigenvalue: values[last],
                vector: vectors.column(last).into_owned(),
            });
        }
    }
    let positive = hermitian_deviation <= tol && min_eigenvalue >= -tol;
    Positivity {
        positive,
        hermitian_deviation,
        min_eigenvalue,
        witness: if min_eigenvalue < -tol { worst } else { None },
    }
}

/// Positivity through the trace pairing: `τ(x p) ≥ −tol·τ(p)` for every
/// spectral projection `p` of `x`. Equivalent to [`is_positive`] since the
/// spectral projection below zero is the worst test projection.
pub fn dual_positivity_check(x: &Element, tol: f64) -> Result<bool> {
    let spectral = spectral_decompose(x, tol)?;
    let worst = (0..spectral.entries.len())
        .map(|k| {
            let p = spectral.projection_element(k);
            x.product(&p).trace().re / p.trace().re
        })
        .fold(f64::INFINITY, f64::min);
    Ok(worst >= -tol)
}

/// A self-adjoint idempotent element.
#[derive(Debug, Clone)]
pub struct Projection(Element);

impl Projection {
    pub fn new(p: Element, tol: f64) -> Result<Projection> {
        let idem = (&p.product(&p) - &p).max_abs_entry();
        let deviation = idem.max(p.hermitian_deviation());
        if deviation > tol {
            return Err(Error::NotProjection { deviation });
        }
        Ok(Projection(p))
    }

    pub(crate) fn new_unchecked(p: Element) -> Projection {
        Projection(p)
    }

    pub fn element(&self) -> &Element {
        &self.0
    }

    /// `τ(p)`.
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }
}
