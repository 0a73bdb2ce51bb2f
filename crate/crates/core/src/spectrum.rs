//! Spectra of superoperator matrices and spectral projectors onto the
//! peripheral part.
//!
//! Eigenvalues are computed after a symmetric permutation to block
//! triangular form (strongly connected components of the sparsity graph),
//! so exactly reducible maps such as shifts get exact eigenvalues and only
//! the irreducible diagonal blocks go through a dense QR iteration.
//! Projectors are built from right and left null spaces,
//! `P_μ = V (W* V)⁻¹ W*`, which is the Riesz projector whenever `μ` is
//! semisimple.

use faer::Mat;
use nalgebra::{DMatrix, SVD};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::algebra::C64;

/// Eigenvalues closer than this are reported as one multiple eigenvalue.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    pub value: C64,
    pub multiplicity: usize,
}

/// One peripheral eigenvalue with its spectral projector.
#[derive(Debug, Clone)]
pub struct PeripheralComponent {
    pub value: C64,
    pub algebraic: usize,
    pub geometric: usize,
    pub projector: DMatrix<C64>,
}

impl PeripheralComponent {
    pub fn is_semisimple(&self) -> bool {
        self.geometric >= self.algebraic
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// All eigenvalues, by decreasing modulus then increasing argument.
    pub eigenvalues: Vec<C64>,
    pub clusters: Vec<EigenCluster>,
    pub spectral_radius: f64,
    pub peripheral: Vec<PeripheralComponent>,
    /// Sum of the peripheral projectors.
    pub peripheral_projector: DMatrix<C64>,
}

impl Spectrum {
    pub fn is_peripheral_semisimple(&self) -> bool {
        self.peripheral.iter().all(PeripheralComponent::is_semisimple)
    }

    /// Projector onto the eigenvalue-1 eigenspace (zero if 1 is not an
    /// eigenvalue).
    pub fn fixed_space_projector(&self) -> DMatrix<C64> {
        let n = self.peripheral_projector.nrows();
        self.peripheral
            .iter()
            .filter(|c| (c.value - C64::new(1.0, 0.0)).norm() <= CLUSTER_TOL)
            .fold(DMatrix::zeros(n, n), |acc, c| acc + &c.projector)
    }

    pub fn fixed_space_dimension(&self) -> usize {
        self.peripheral
            .iter()
            .filter(|c| (c.value - C64::new(1.0, 0.0)).norm() <= CLUSTER_TOL)
            .map(|c| c.geometric)
            .sum()
    }
}

/// Eigenvalues of a square complex matrix.
pub fn eigenvalues(m: &DMatrix<C64>) -> Vec<C64> {
    let n = m.nrows();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != C64::new(0.0, 0.0) {
                graph.add_edge(nodes[j], nodes[i], ());
            }
        }
    }
    let mut values = Vec::with_capacity(n);
    for component in tarjan_scc(&graph) {
        if component.len() == 1 {
            let i = component[0].index();
            values.push(m[(i, i)]);
            continue;
        }
        let mut idx: Vec<usize> = component.iter().map(|v| v.index()).collect();
        idx.sort_unstable();
        let sub: Mat<C64> = Mat::from_fn(idx.len(), idx.len(), |r, c| m[(idx[r], idx[c])]);
        let ev = sub.eigenvalues().expect("QR iteration on a finite matrix converges");
        values.extend(ev);
    }
    sort_eigenvalues(&mut values);
    values
}

fn sort_eigenvalues(values: &mut [C64]) {
    values.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
}

/// Groups eigenvalues within [`CLUSTER_TOL`] of a cluster's first member.
pub fn cluster(values: &[C64]) -> Vec<EigenCluster> {
    let mut clusters: Vec<(C64, Vec<C64>)> = Vec::new();
    for &v in values {
        match clusters.iter_mut().find(|(head, _)| (head - v).norm() <= CLUSTER_TOL) {
            Some((_, members)) => members.push(v),
            None => clusters.push((v, vec![v])),
        }
    }
    clusters
        .into_iter()
        .map(|(_, members)| EigenCluster {
            value: members.iter().sum::<C64>() / members.len() as f64,
            multiplicity: members.len(),
        })
        .collect()
}

/// Spectral projector for the eigenvalue `value` of algebraic
/// multiplicity `multiplicity`. Returns the projector and the geometric
/// multiplicity (singular values of `m − value` at most `null_tol`).
pub fn spectral_projector(m: &DMatrix<C64>, value: C64, multiplicity: usize, null_tol: f64) -> (DMatrix<C64>, usize) {
    let n = m.nrows();
    let shifted = m - DMatrix::<C64>::identity(n, n) * value;
    let svd = SVD::new(shifted, true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let geometric = order
        .iter()
        .take_while(|&&k| svd.singular_values[k] <= null_tol)
        .count();
    let k = multiplicity.min(n);
    let right = DMatrix::from_fn(n, k, |r, c| v_t[(order[c], r)].conj());
    let left = DMatrix::from_fn(n, k, |r, c| u[(r, order[c])]);
    let gram = left.adjoint() * &right;
    let inv = gram
        .clone()
        .try_inverse()
        .unwrap_or_else(|| gram.pseudo_inverse(1e-12).expect("pseudo-inverse with positive eps"));
    (right * inv * left.adjoint(), geometric)
}

/// Full spectral analysis; eigenvalues with `|λ| ≥ 1 − peripheral_tol`
/// are peripheral.
pub fn analyze(m: &DMatrix<C64>, peripheral_tol: f64) -> Spectrum {
    let n = m.nrows();
    let eigenvalues = eigenvalues(m);
    let clusters = cluster(&eigenvalues);
    let spectral_radius = eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let null_tol = 1e-7 * scale * (n as f64).sqrt();
    let peripheral: Vec<PeripheralComponent> = clusters
        .iter()
        .filter(|c| c.value.norm() >= 1.0 - peripheral_tol)
        .map(|c| {
            let (projector, geometric) = spectral_projector(m, c.value, c.multiplicity, null_tol);
            PeripheralComponent {
                value: c.value,
                algebraic: c.multiplicity,
                geometric,
                projector,
            }
        })
        .collect();
    let peripheral_projector = peripheral
        .iter()
        .fold(DMatrix::zeros(n, n), |acc, c| acc + &c.projector);
    Spectrum {
        eigenvalues,
        clusters,
        spectral_radius,
        peripheral,
        peripheral_projector,
    }
}
