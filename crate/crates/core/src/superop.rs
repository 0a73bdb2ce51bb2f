//! Linear maps on the algebra, represented as dense `N × N` matrices in the
//! trace-orthonormal coordinates of [`Element::to_coords`]. In those
//! coordinates the adjoint with respect to `⟨a, b⟩ = τ(a* b)` is the
//! conjugate transpose, whatever the block weights are.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::algebra::{abs, is_positive, l1_norm, Algebra, EigenWitness, Element, C64};
use crate::error::{Error, Result};
use crate::random;
use crate::spectrum::{self, Spectrum};

/// A Kraus operator from block `source` to block `target`, acting as
/// `x ↦ K x_source K*` with `K` of shape `d_target × d_source`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausOp {
    pub source: usize,
    pub target: usize,
    pub matrix: DMatrix<C64>,
}

/// How positivity of a map is known.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// `T(x) = Σ K_i x K_i*`; completely positive by construction.
    Kraus(Vec<KrausOp>),
    /// Passed [`SuperOp::check_positive`] on this many probes.
    SampledPositive { samples: usize, tol: f64 },
    /// Nothing is known.
    Declared,
}

#[derive(Debug, Clone)]
pub struct SuperOp {
    algebra: Arc<Algebra>,
    matrix: DMatrix<C64>,
    certificate: Certificate,
    /// Row-compressed copy of `matrix`, built on first use when at most a
    /// quarter of the entries are nonzero.
    sparse: OnceLock<Option<Arc<SparseRows>>>,
}

#[derive(Debug)]
struct SparseRows {
    offsets: Vec<usize>,
    columns: Vec<usize>,
    values: Vec<C64>,
}

impl SparseRows {
    fn from_dense(m: &DMatrix<C64>) -> Option<SparseRows> {
        let zero = C64::new(0.0, 0.0);
        let nnz = m.iter().filter(|&&z| z != zero).count();
        if 4 * nnz > m.len() {
            return None;
        }
        let mut offsets = Vec::with_capacity(m.nrows() + 1);
        let mut columns = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        offsets.push(0);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != zero {
                    columns.push(j);
                    values.push(m[(i, j)]);
                }
            }
            offsets.push(columns.len());
        }
        Some(SparseRows {
            offsets,
            columns,
            values,
        })
    }

    fn mul(&self, v: &DVector<C64>) -> DVector<C64> {
        DVector::from_fn(self.offsets.len() - 1, |i, _| {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.offsets[i]..self.offsets[i + 1] {
                acc += self.values[k] * v[self.columns[k]];
            }
            acc
        })
    }
}

/// Outcome of [`SuperOp::check_positive`].
#[derive(Debug, Clone)]
pub struct PositivityCheck {
    pub positive: bool,
    pub probes: usize,
    /// Input whose image failed, with the negative eigenpair of the image.
    pub violation: Option<(Element, EigenWitness)>,
}

/// Outcome of [`SuperOp::check_l1_contraction`].
#[derive(Debug, Clone)]
pub struct ContractionCheck {
    pub contraction: bool,
    /// `‖T*(1)‖_∞`, which equals `‖T‖_{1→1}` for positive maps.
    pub norm: f64,
    pub adjoint_unit: Element,
    pub witness: Option<EigenWitness>,
}

/// Outcome of [`SuperOp::sample_l1_contraction`].
#[derive(Debug, Clone)]
pub struct SampledContraction {
    pub contraction: bool,
    pub probes: usize,
    pub worst_ratio: f64,
    pub witness: Option<Element>,
}

/// Outcome of [`SuperOp::check_abs_domination`].
#[derive(Debug, Clone)]
pub struct DominationCheck {
    pub holds: bool,
    pub samples: usize,
    /// Most negative eigenvalue of `T(|x|) − |T(x)|`, relative to `‖x‖₁`.
    pub worst_margin: f64,
    /// Largest `‖T(|x|) − |T(x)|‖₁ / ‖x‖₁`; zero means equality.
    pub max_gap: f64,
    pub witness: Option<Element>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationParams {
    pub n_max: usize,
    /// Plateau threshold, relative to `‖x‖₁`.
    pub stop_tol: f64,
    /// Consecutive quiet steps needed to stop early.
    pub window: usize,
}

impl Default for IterationParams {
    fn default() -> Self {
        IterationParams {
            n_max: 2000,
            stop_tol: 1e-13,
            window: 10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub element: Element,
    pub norm: f64,
}

/// The orbit `x, Tx, T²x, …` with trace norms.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub initial: Element,
    pub points: Vec<TrajectoryPoint>,
    /// The plateau rule fired before `n_max`.
    pub converged: bool,
}

impl Trajectory {
    pub fn norms(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.norm).collect()
    }

    pub fn final_norm(&self) -> f64 {
        self.points.last().map(|p| p.norm).unwrap_or(0.0)
    }

    pub fn last(&self) -> &Element {
        &self.points.last().expect("trajectory has its initial point").element
    }

    /// First step whose norm is at most `threshold`.
    pub fn escape_step(&self, threshold: f64) -> Option<usize> {
        self.points.iter().find(|p| p.norm <= threshold).map(|p| p.step)
    }

    /// Largest increase `‖T^{n+1}x‖₁ − ‖Tⁿx‖₁` along the orbit.
    pub fn max_norm_increase(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1].norm - w[0].norm)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointParams {
    /// Number of terms in the Cesàro average.
    pub n_avg: usize,
    /// Residual, positivity and nonvanishing threshold, relative to the
    /// seed's trace norm.
    pub tol: f64,
}

impl Default for FixedPointParams {
    fn default() -> Self {
        FixedPointParams { n_avg: 1024, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixedPointSource {
    /// The Cesàro average already met the residual bound.
    Cesaro,
    /// The Cesàro average projected onto the eigenvalue-1 eigenspace.
    Projected,
}

#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub element: Element,
    /// `‖T z − z‖₁`.
    pub residual: f64,
    pub min_eigenvalue: f64,
    /// `‖T A_N − A_N‖₁` of the raw Cesàro average.
    pub cesaro_residual: f64,
    /// `‖P₁ A_N − A_N‖₁`: distance from the Cesàro average to its
    /// projection on the fixed space.
    pub cesaro_gap: f64,
    pub source: FixedPointSource,
}

impl SuperOp {
    fn assemble(algebra: Arc<Algebra>, matrix: DMatrix<C64>, certificate: Certificate) -> SuperOp {
        SuperOp {
            algebra,
            matrix,
            certificate,
            sparse: OnceLock::new(),
        }
    }

    /// `M v` in coordinates.
    fn mul_coords(&self, v: &DVector<C64>) -> DVector<C64> {
        match self
            .sparse
            .get_or_init(|| SparseRows::from_dense(&self.matrix).map(Arc::new))
        {
            Some(rows) => rows.mul(v),
            None => &self.matrix * v,
        }
    }

    /// `x ↦ scale · Σ K_i x K_i*` for block-diagonal Kraus elements.
    pub fn from_kraus(algebra: &Arc<Algebra>, operators: &[Element], scale: f64) -> Result<SuperOp> {
        let mut ops = Vec::new();
        for k in operators {
            if k.algebra().dims() != algebra.dims() {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator on {:?}, algebra has {:?}",
                    k.algebra().dims(),
                    algebra.dims()
                )));
            }
            for (b, m) in k.blocks().iter().enumerate() {
                if m.iter().any(|z| *z != C64::new(0.0, 0.0)) {
                    ops.push(KrausOp {
                        source: b,
                        target: b,
                        matrix: m.clone(),
                    });
                }
            }
        }
        SuperOp::from_kraus_ops(algebra, ops, scale)
    }

    /// Kraus map with operators that may move mass between blocks.
    pub fn from_kraus_ops(algebra: &Arc<Algebra>, ops: Vec<KrausOp>, scale: f64) -> Result<SuperOp> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::BadParam {
                name: "scale".into(),
                reason: format!("{scale} is not in (0, 1]"),
            });
        }
        SuperOp::kraus_unchecked_scale(algebra, ops, scale)
    }

    fn kraus_unchecked_scale(algebra: &Arc<Algebra>, ops: Vec<KrausOp>, scale: f64) -> Result<SuperOp> {
        let nb = algebra.num_blocks();
        for op in &ops {
            if op.source >= nb || op.target >= nb {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator {} -> {} outside {nb} blocks",
                    op.source, op.target
                )));
            }
            let (dt, ds) = (algebra.dims()[op.target], algebra.dims()[op.source]);
            if op.matrix.shape() != (dt, ds) {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator {} -> {} is {:?}, expected ({dt}, {ds})",
                    op.source,
                    op.target,
                    op.matrix.shape()
                )));
            }
        }
        let s = scale.sqrt();
        let ops: Vec<KrausOp> = ops
            .into_iter()
            .map(|op| KrausOp {
                matrix: op.matrix.scale(s),
                ..op
            })
            .collect();
        let matrix = kraus_matrix(algebra, &ops);
        Ok(SuperOp::assemble(Arc::clone(algebra), matrix, Certificate::Kraus(ops)))
    }

    /// A raw coordinate matrix with no positivity certificate. The map
    /// must send hermitian elements to hermitian elements within `tol`.
    pub fn from_matrix(algebra: &Arc<Algebra>, matrix: DMatrix<C64>, tol: f64) -> Result<SuperOp> {
        let n = algebra.coord_dim();
        if matrix.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!(
                "superoperator matrix is {:?}, expected ({n}, {n})",
                matrix.shape()
            )));
        }
        let op = SuperOp::assemble(Arc::clone(algebra), matrix, Certificate::Declared);
        let deviation = op.hermiticity_deviation();
        if deviation > tol {
            return Err(Error::NotHermitianPreserving { deviation });
        }
        Ok(op)
    }

    /// Tabulates a linear map given as a function on elements.
    pub fn from_linear_map(
        algebra: &Arc<Algebra>,
        certificate: Certificate,
        f: impl Fn(&Element) -> Element,
    ) -> SuperOp {
        let n = algebra.coord_dim();
        let mut matrix = DMatrix::zeros(n, n);
        for k in 0..n {
            let mut e = DVector::zeros(n);
            e[k] = C64::new(1.0, 0.0);
            let image = f(&Element::from_coords(algebra, &e)).to_coords();
            matrix.set_column(k, &image);
        }
        SuperOp::assemble(Arc::clone(algebra), matrix, certificate)
    }

    pub fn identity(algebra: &Arc<Algebra>) -> SuperOp {
        let ops = (0..algebra.num_blocks())
            .map(|b| KrausOp {
                source: b,
                target: b,
                matrix: DMatrix::identity(algebra.dims()[b], algebra.dims()[b]),
            })
            .collect();
        SuperOp::kraus_unchecked_scale(algebra, ops, 1.0).expect("identity Kraus operators fit")
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn is_certified_positive(&self) -> bool {
        !matches!(self.certificate, Certificate::Declared)
    }

    pub fn with_certificate(mut self, certificate: Certificate) -> SuperOp {
        self.certificate = certificate;
        self
    }

    pub fn apply(&self, x: &Element) -> Element {
        Element::from_coords(&self.algebra, &self.mul_coords(&x.to_coords()))
    }

    pub fn power_apply(&self, x: &Element, n: usize) -> Element {
        let mut v = x.to_coords();
        for _ in 0..n {
            v = self.mul_coords(&v);
        }
        Element::from_coords(&self.algebra, &v)
    }

    /// `c · T` for `c ≥ 0`; certificates survive.
    pub fn scaled(&self, c: f64) -> SuperOp {
        assert!(c >= 0.0, "negative scaling destroys positivity");
        let certificate = match &self.certificate {
            Certificate::Kraus(ops) => Certificate::Kraus(
                ops.iter()
                    .map(|op| KrausOp {
                        matrix: op.matrix.scale(c.sqrt()),
                        ..op.clone()
                    })
                    .collect(),
            ),
            other => other.clone(),
        };
        SuperOp::assemble(Arc::clone(&self.algebra), self.matrix.scale(c), certificate)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SuperOp) -> SuperOp {
        assert_eq!(self.algebra.dims(), other.algebra.dims(), "maps on different algebras");
        let certificate = match (&self.certificate, &other.certificate) {
            (Certificate::Kraus(outer), Certificate::Kraus(inner)) => {
                let mut ops = Vec::new();
                for a in outer {
                    for b in inner.iter().filter(|b| b.target == a.source) {
                        ops.push(KrausOp {
                            source: b.source,
                            target: a.target,
                            matrix: &a.matrix * &b.matrix,
                        });
                    }
                }
                Certificate::Kraus(ops)
            }
            (Certificate::Declared, _) | (_, Certificate::Declared) => Certificate::Declared,
            (a, b) => {
                let samples = |c: &Certificate| match c {
                    Certificate::SampledPositive { samples, .. } => *samples,
                    _ => usize::MAX,
                };
                let tols = |c: &Certificate| match c {
                    Certificate::SampledPositive { tol, .. } => *tol,
                    _ => 0.0,
                };
                Certificate::SampledPositive {
                    samples: samples(a).min(samples(b)),
                    tol: tols(a).max(tols(b)),
                }
            }
        };
        SuperOp::assemble(Arc::clone(&self.algebra), &self.matrix * &other.matrix, certificate)
    }

    /// `T*` with `τ((T* y)* x) = τ(y* T x)`.
    pub fn adjoint(&self) -> SuperOp {
        let certificate = match &self.certificate {
            Certificate::Kraus(ops) => {
                let w = self.algebra.weights();
                Certificate::Kraus(
                    ops.iter()
                        .map(|op| KrausOp {
                            source: op.target,
                            target: op.source,
                            matrix: op.matrix.adjoint().scale((w[op.target] / w[op.source]).sqrt()),
                        })
                        .collect(),
                )
            }
            other => other.clone(),
        };
        SuperOp::assemble(Arc::clone(&self.algebra), self.matrix.adjoint(), certificate)
    }

    /// `T*(1)`.
    pub fn adjoint_unit(&self) -> Element {
        let one = Element::identity(&self.algebra).to_coords();
        Element::from_coords(&self.algebra, &self.matrix.ad_mul(&one))
    }

    /// Largest hermiticity defect of `T(h)` over a real basis of the
    /// hermitian elements.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermitian_basis(&self.algebra)
            .iter()
            .map(|h| self.apply(h).hermitian_deviation())
            .fold(0.0, f64::max)
    }

    /// Positivity test. Kraus maps pass immediately. Other maps are probed
    /// on the identity, on the rank-one projections onto `e_i`, `e_i + e_j`
    /// and `e_i + i e_j`, and on `n_samples` random rank-one positives.
    pub fn check_positive(&self, n_samples: usize, seed: u64, tol: f64) -> PositivityCheck {
        if let Certificate::Kraus(_) = self.certificate {
            return PositivityCheck {
                positive: true,
                probes: 0,
                violation: None,
            };
        }
        let algebra = &self.algebra;
        let mut probes = vec![Element::identity(algebra)];
        for (b, &d) in algebra.dims().iter().enumerate() {
            for i in 0..d {
                probes.push(Element::matrix_unit(algebra, b, i, i));
                for j in i + 1..d {
                    for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                        let mut v = DVector::zeros(d);
                        v[i] = C64::new(1.0, 0.0);
                        v[j] = phase;
                        let mut blocks: Vec<DMatrix<C64>> =
                            algebra.dims().iter().map(|&e| DMatrix::zeros(e, e)).collect();
                        blocks[b] = &v * v.adjoint();
                        probes.push(Element::new(algebra, blocks).expect("shapes match"));
                    }
                }
            }
        }
        let structured = probes.len();
        for k in 0..n_samples {
            probes.push(random::pure(algebra, &mut random::stream(seed, k as u64), None));
        }
        for (count, x) in probes.iter().enumerate() {
            let scale = l1_norm(x).max(f64::MIN_POSITIVE);
            let image = self.apply(x).scale(1.0 / scale);
            let verdict = is_positive(&image, tol);
            if !verdict.positive {
                let witness = verdict.witness.unwrap_or(EigenWitness {
                    block: 0,
                    eigenvalue: verdict.min_eigenvalue,
                    vector: DVector::zeros(algebra.dims()[0]),
                });
                return PositivityCheck {
                    positive: false,
                    probes: count + 1,
                    violation: Some((x.clone(), witness)),
                };
            }
        }
        PositivityCheck {
            positive: true,
            probes: structured + n_samples,
            violation: None,
        }
    }

    /// Runs [`check_positive`](Self::check_positive) and, on success,
    /// attaches a `SampledPositive` certificate. Kraus certificates are
    /// kept as they are.
    pub fn certify_positive(
        self,
        n_samples: usize,
        seed: u64,
        tol: f64,
    ) -> std::result::Result<SuperOp, PositivityCheck> {
        if matches!(self.certificate, Certificate::Kraus(_)) {
            return Ok(self);
        }
        let check = self.check_positive(n_samples, seed, tol);
        if check.positive {
            let samples = check.probes;
            Ok(self.with_certificate(Certificate::SampledPositive { samples, tol }))
        } else {
            Err(check)
        }
    }

    /// `‖T‖_{1→1} = ‖T*(1)‖_∞` for positive `T`; contraction iff
    /// `T*(1) ≤ (1 + tol)·1`.
    pub fn check_l1_contraction(&self, tol: f64) -> Result<ContractionCheck> {
        if !self.is_certified_positive() {
            return Err(Error::NotCertifiedPositive);
        }
        let adjoint_unit = self.adjoint_unit().hermitian_part();
        let mut norm = 0.0f64;
        let mut witness = None;
        for (b, m) in adjoint_unit.blocks().iter().enumerate() {
            let (values, vectors) = crate::algebra::hermitian_eigen(m);
            if values[0].abs() > norm {
                norm = values[0].abs();
                witness = Some(EigenWitness {
                    block: b,
                    eigenvalue: values[0],
                    vector: vectors.column(0).into_owned(),
                });
            }
        }
        let contraction = norm <= 1.0 + tol;
        Ok(ContractionCheck {
            contraction,
            norm,
            adjoint_unit,
            witness: if contraction { None } else { witness },
        })
    }

    /// Probes `‖T x‖₁ ≤ (1 + tol) ‖x‖₁` on `probes` random inputs,
    /// alternating rank-one positives and gaussian elements.
    pub fn sample_l1_contraction(&self, probes: usize, seed: u64, tol: f64) -> SampledContraction {
        let mut worst_ratio = 0.0f64;
        let mut witness = None;
        for k in 0..probes {
            let mut rng = random::stream(seed, k as u64);
            let x = if k % 2 == 0 {
                random::pure(&self.algebra, &mut rng, None)
            } else {
                random::gaussian_element(&self.algebra, &mut rng)
            };
            let ratio = l1_norm(&self.apply(&x)) / l1_norm(&x);
            if ratio > worst_ratio {
                worst_ratio = ratio;
                if ratio > 1.0 + tol {
                    witness = Some(x);
                }
            }
        }
        SampledContraction {
            contraction: worst_ratio <= 1.0 + tol,
            probes,
            worst_ratio,
            witness,
        }
    }

    /// Errors unless `T` is certified positive and an L¹-contraction.
    pub fn ensure_positive_contraction(&self, tol: f64) -> Result<ContractionCheck> {
        if !self.is_certified_positive() {
            return Err(Error::NotCertified("no positivity certificate".into()));
        }
        let check = self.check_l1_contraction(tol)?;
        if !check.contraction {
            return Err(Error::NotCertified(format!("‖T*(1)‖ = {} > 1", check.norm)));
        }
        Ok(check)
    }

    /// Orbit of `x` for `n = 0..=n_max`. Stops early once both the norm
    /// and the element itself moved by less than `stop_tol · ‖x‖₁` for
    /// `window` consecutive steps.
    pub fn iterate(&self, x: &Element, params: IterationParams) -> Trajectory {
        let scale = l1_norm(x);
        let threshold = params.stop_tol * if scale > 0.0 { scale } else { 1.0 };
        let mut v = x.to_coords();
        let mut points = vec![TrajectoryPoint {
            step: 0,
            element: x.clone(),
            norm: scale,
        }];
        let mut quiet = 0;
        let mut converged = false;
        for step in 1..=params.n_max {
            let next = self.mul_coords(&v);
            let element = Element::from_coords(&self.algebra, &next);
            let norm = l1_norm(&element);
            let prev = points.last().expect("nonempty");
            let moved = if (norm - prev.norm).abs() < threshold {
                l1_norm(&(&element - &prev.element))
            } else {
                f64::INFINITY
            };
            quiet = if moved < threshold { quiet + 1 } else { 0 };
            points.push(TrajectoryPoint { step, element, norm });
            v = next;
            if quiet >= params.window {
                converged = true;
                break;
            }
        }
        Trajectory {
            initial: x.clone(),
            points,
            converged,
        }
    }

    /// Eigenvalues and peripheral projector. Under a contraction
    /// certificate an eigenvalue of modulus above `1 + tol` is an error.
    pub fn spectrum(&self, tol: f64) -> Result<Spectrum> {
        let spectrum = spectrum::analyze(&self.matrix, tol);
        if self.is_certified_positive() && spectrum.spectral_radius > 1.0 + tol {
            let check = self.check_l1_contraction(tol)?;
            if check.contraction {
                return Err(Error::SpuriousExpansion {
                    modulus: spectrum.spectral_radius,
                });
            }
        }
        Ok(spectrum)
    }

    /// Positive fixed point from the Cesàro averages of `seed`.
    ///
    /// `A_N = (1/N) Σ_{k<N} T^k(seed)` is accepted directly when its
    /// residual is within tolerance; otherwise it is projected onto the
    /// eigenvalue-1 eigenspace, which leaves the Cesàro limit unchanged.
    /// The candidate is returned only if it is positive, nonzero and
    /// fixed, all relative to `‖seed‖₁`.
    pub fn positive_fixed_point(&self, seed: &Element, params: FixedPointParams) -> Result<Option<FixedPoint>> {
        self.ensure_positive_contraction(params.tol)?;
        let scale = l1_norm(seed);
        let pos = is_positive(seed, params.tol * scale.max(f64::MIN_POSITIVE));
        if !pos.positive || scale == 0.0 {
            return Err(Error::NotPositive {
                block: pos.witness.as_ref().map_or(0, |w| w.block),
                eigenvalue: pos.min_eigenvalue,
            });
        }
        let tol = params.tol * scale;
        let n_avg = params.n_avg.max(1);
        let mut v = seed.to_coords();
        let mut sum = DVector::zeros(v.len());
        for _ in 0..n_avg {
            sum += &v;
            v = self.mul_coords(&v);
        }
        let average = sum.unscale(n_avg as f64);
        let residual_of = |z: &DVector<C64>| l1_norm(&Element::from_coords(&self.algebra, &(self.mul_coords(z) - z)));
        let cesaro_residual = residual_of(&average);
        let spectrum = self.spectrum(params.tol)?;
        let projected = spectrum.fixed_space_projector() * &average;
        let cesaro_gap = l1_norm(&Element::from_coords(&self.algebra, &(&projected - &average)));
        let (candidate, source) = if cesaro_residual <= tol {
            (average, FixedPointSource::Cesaro)
        } else {
            (projected, FixedPointSource::Projected)
        };
        let element = Element::from_coords(&self.algebra, &candidate).hermitian_part();
        let residual = l1_norm(&(&self.apply(&element) - &element));
        let pos = is_positive(&element, tol);
        if l1_norm(&element) > tol && residual <= tol && pos.positive {
            Ok(Some(FixedPoint {
                element,
                residual,
                min_eigenvalue: pos.min_eigenvalue,
                cesaro_residual,
                cesaro_gap,
                source,
            }))
        } else {
            Ok(None)
        }
    }

    /// Samples hermitian `x` and checks `|T(x)| ≤ T(|x|)` up to
    /// `tol · ‖x‖₁`.
    pub fn check_abs_domination(&self, n_samples: usize, seed: u64, tol: f64) -> Result<DominationCheck> {
        if !self.is_certified_positive() {
            return Err(Error::NotCertifiedPositive);
        }
        let mut worst_margin = f64::INFINITY;
        let mut max_gap = 0.0f64;
        let mut witness = None;
        for k in 0..n_samples {
            let x = random::hermitian(&self.algebra, &mut random::stream(seed, k as u64));
            let scale = l1_norm(&x);
            let diff = &self.apply(&abs(&x)) - &abs(&self.apply(&x));
            let diff = diff.hermitian_part().scale(1.0 / scale);
            max_gap = max_gap.max(l1_norm(&diff));
            let margin = is_positive(&diff, tol).min_eigenvalue;
            if margin < worst_margin {
                worst_margin = margin;
                if margin < -tol {
                    witness = Some(x);
                }
            }
        }
        Ok(DominationCheck {
            holds: worst_margin >= -tol,
            samples: n_samples,
            worst_margin,
            max_gap,
            witness,
        })
    }
}

/// Coordinate matrix of `x ↦ Σ K x_source K*`.
fn kraus_matrix(algebra: &Arc<Algebra>, ops: &[KrausOp]) -> DMatrix<C64> {
    let n = algebra.coord_dim();
    let w = algebra.weights();
    let dims = algebra.dims();
    let mut matrix = DMatrix::zeros(n, n);
    // column (s, i, j) maps to sqrt(w_t/w_s) · K[:, i] K[:, j]^*
    for op in ops {
        let (s, t) = (op.source, op.target);
        let (ds, dt) = (dims[s], dims[t]);
        let ratio = (w[t] / w[s]).sqrt();
        let (os, ot) = (algebra.block_offset(s), algebra.block_offset(t));
        for i in 0..ds {
            for j in 0..ds {
                let col = os + i * ds + j;
                for k in 0..dt {
                    let a = op.matrix[(k, i)] * ratio;
                    if a == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for l in 0..dt {
                        matrix[(ot + k * dt + l, col)] += a * op.matrix[(l, j)].conj();
                    }
                }
            }
        }
    }
    matrix
}

/// Real basis of the hermitian elements: `e_ii`, `e_ij + e_ji` and
/// `i(e_ij − e_ji)` per block.
pub fn hermitian_basis(algebra: &Arc<Algebra>) -> Vec<Element> {
    let mut basis = Vec::with_capacity(algebra.coord_dim());
    for (b, &d) in algebra.dims().iter().enumerate() {
        for i in 0..d {
            basis.push(Element::matrix_unit(algebra, b, i, i));
            for j in i + 1..d {
                let eij = Element::matrix_unit(algebra, b, i, j);
                let eji = Element::matrix_unit(algebra, b, j, i);
                basis.push(&eij + &eji);
                basis.push((&eij - &eji).scale_complex(C64::new(0.0, 1.0)));
            }
        }
    }
    basis
}
