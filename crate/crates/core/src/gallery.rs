//! Named maps: the truncated shift family and its building blocks, Jordan
//! automorphisms, depolarizing maps and seeded random positive
//! contractions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebra::{hermitian_eigen, Algebra, Element, C64};
use crate::error::{Error, Result};
use crate::random;
use crate::superop::{KrausOp, SuperOp};

/// Unitarity tolerance for [`jordan_automorphism`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Pinching followed by the down-shift `e_kk ↦ e_{k+1,k+1}` on `Mat(n)`
/// with unit weight; the last diagonal slot is absorbed. Kraus operators
/// are `e_{k+1,k}`.
pub fn truncated_shift(n: usize) -> Result<(Arc<Algebra>, SuperOp)> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { found: n, min: 2 });
    }
    let algebra = Algebra::new(&[n], &[1.0], false)?;
    let ops = (0..n - 1)
        .map(|k| {
            let mut m = DMatrix::zeros(n, n);
            m[(k + 1, k)] = C64::new(1.0, 0.0);
            KrausOp {
                source: 0,
                target: 0,
                matrix: m,
            }
        })
        .collect();
    let map = SuperOp::from_kraus_ops(&algebra, ops, 1.0)?;
    Ok((algebra, map))
}

/// The conditional expectation `x ↦ diag(x)` on `Mat(n)` with unit weight.
pub fn diagonal_expectation(n: usize) -> Result<SuperOp> {
    if n < 1 {
        return Err(Error::DimensionTooSmall { found: n, min: 1 });
    }
    let algebra = Algebra::new(&[n], &[1.0], false)?;
    pinching(&algebra)
}

/// Blockwise diagonal pinching on any algebra.
pub fn pinching(algebra: &Arc<Algebra>) -> Result<SuperOp> {
    let ops = algebra
        .dims()
        .iter()
        .enumerate()
        .flat_map(|(b, &d)| {
            (0..d).map(move |i| {
                let mut m = DMatrix::zeros(d, d);
                m[(i, i)] = C64::new(1.0, 0.0);
                KrausOp {
                    source: b,
                    target: b,
                    matrix: m,
                }
            })
        })
        .collect();
    SuperOp::from_kraus_ops(algebra, ops, 1.0)
}

/// `x ↦ u x u*`, or `x ↦ u xᵀ u*` with `transpose` set. The transposed
/// form is positive but not completely positive and is certified by
/// sampling.
pub fn jordan_automorphism(u: &Element, transpose: bool) -> Result<SuperOp> {
    let algebra = u.algebra();
    let deviation = (&u.product(&u.adjoint()) - &Element::identity(algebra)).max_abs_entry();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    if !transpose {
        return SuperOp::from_kraus(algebra, std::slice::from_ref(u), 1.0);
    }
    let map = SuperOp::from_linear_map(algebra, crate::superop::Certificate::Declared, |x| {
        u.product(&x.transpose()).product(&u.adjoint())
    });
    map.certify_positive(64, 0, 1e-10).map_err(|check| {
        Error::NotCertified(format!(
            "transpose automorphism failed positivity after {} probes",
            check.probes
        ))
    })
}

/// `x ↦ (1 − p) x + p τ(x) 1 / τ(1)`.
pub fn depolarizing(algebra: &Arc<Algebra>, p: f64) -> Result<SuperOp> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability(p));
    }
    let dims = algebra.dims();
    let w = algebra.weights();
    let unit = algebra.unit_trace();
    let mut ops = Vec::new();
    if p < 1.0 {
        for (b, &d) in dims.iter().enumerate() {
            ops.push(KrausOp {
                source: b,
                target: b,
                matrix: DMatrix::identity(d, d).scale((1.0 - p).sqrt()),
            });
        }
    }
    if p > 0.0 {
        // √(p w_s / τ(1)) |j_t⟩⟨i_s| summed over i, j gives p τ(x_s) 1_t / τ(1)
        for (s, &ds) in dims.iter().enumerate() {
            for (t, &dt) in dims.iter().enumerate() {
                let c = (p * w[s] / unit).sqrt();
                for i in 0..ds {
                    for j in 0..dt {
                        let mut m = DMatrix::zeros(dt, ds);
                        m[(j, i)] = C64::new(c, 0.0);
                        ops.push(KrausOp {
                            source: s,
                            target: t,
                            matrix: m,
                        });
                    }
                }
            }
        }
    }
    SuperOp::from_kraus_ops(algebra, ops, 1.0)
}

/// `G^{-1/2}` for a positive definite block.
fn inverse_sqrt(g: &DMatrix<C64>) -> DMatrix<C64> {
    let (values, vectors) = hermitian_eigen(g);
    let scale = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&l| C64::new(1.0 / l.sqrt(), 0.0)),
    ));
    &vectors * scale * vectors.adjoint()
}

/// Rescales Kraus operators so that `T*(1) = (1 − leak) · 1`.
fn normalize_kraus(algebra: &Arc<Algebra>, ops: &mut [KrausOp], leak: f64) {
    let w = algebra.weights();
    for (s, &ds) in algebra.dims().iter().enumerate() {
        let mut g = DMatrix::<C64>::zeros(ds, ds);
        for op in ops.iter().filter(|op| op.source == s) {
            g += op.matrix.adjoint() * &op.matrix * C64::new(w[op.target] / w[s], 0.0);
        }
        let fix = inverse_sqrt(&g) * C64::new((1.0 - leak).sqrt(), 0.0);
        for op in ops.iter_mut().filter(|op| op.source == s) {
            op.matrix = &op.matrix * &fix;
        }
    }
}

fn check_random_params(kraus_count: usize, leak: f64) -> Result<()> {
    if kraus_count < 1 {
        return Err(Error::BadParam {
            name: "kraus_count".into(),
            reason: "must be at least 1".into(),
        });
    }
    if !(0.0..1.0).contains(&leak) {
        return Err(Error::BadParam {
            name: "leak".into(),
            reason: format!("{leak} is not in [0, 1)"),
        });
    }
    Ok(())
}

/// Block-preserving Kraus map with `kraus_count` gaussian operators,
/// normalized to `T*(1) = (1 − leak) · 1`; trace preserving at `leak = 0`.
pub fn random_positive_contraction(
    algebra: &Arc<Algebra>,
    seed: u64,
    kraus_count: usize,
    leak: f64,
) -> Result<SuperOp> {
    check_random_params(kraus_count, leak)?;
    let mut rng = random::seeded(seed);
    let mut ops = Vec::new();
    for _ in 0..kraus_count {
        for (b, &d) in algebra.dims().iter().enumerate() {
            ops.push(KrausOp {
                source: b,
                target: b,
                matrix: random::complex_gaussian_matrix(&mut rng, d, d),
            });
        }
    }
    normalize_kraus(algebra, &mut ops, leak);
    SuperOp::from_kraus_ops(algebra, ops, 1.0)
}

/// Like [`random_positive_contraction`] but every block also sends
/// `kraus_count` operators to uniformly drawn target blocks, so mass moves
/// between blocks.
pub fn random_coupled_contraction(algebra: &Arc<Algebra>, seed: u64, kraus_count: usize, leak: f64) -> Result<SuperOp> {
    use rand::Rng;
    check_random_params(kraus_count, leak)?;
    let mut rng = random::seeded(seed);
    let dims = algebra.dims();
    let mut ops = Vec::new();
    for (s, &ds) in dims.iter().enumerate() {
        for _ in 0..kraus_count {
            ops.push(KrausOp {
                source: s,
                target: s,
                matrix: random::complex_gaussian_matrix(&mut rng, ds, ds),
            });
            let t = rng.random_range(0..dims.len());
            ops.push(KrausOp {
                source: s,
                target: t,
                matrix: random::complex_gaussian_matrix(&mut rng, dims[t], ds),
            });
        }
    }
    normalize_kraus(algebra, &mut ops, leak);
    SuperOp::from_kraus_ops(algebra, ops, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Float(v) => write!(f, "{v:?}"),
            ParamValue::Bool(v) => write!(f, "{v}"),
        }
    }
}

/// Registered gallery constructions.
pub const GALLERY_NAMES: &[&str] = &[
    "identity",
    "truncated_shift",
    "diagonal_expectation",
    "pinching",
    "jordan_automorphism",
    "depolarizing",
    "random_positive_contraction",
];

/// A gallery construction addressed by name, e.g. from a scenario file.
///
/// Every construction accepts an optional `scale` in `(0, 1]` multiplying
/// the map. Others:
/// - `truncated_shift`, `diagonal_expectation`: `n` (defines the algebra)
/// - `jordan_automorphism`: `unitary_seed` (absent: identity), `transpose`
/// - `depolarizing`: `p`
/// - `random_positive_contraction`: `seed`, `kraus_count`, `leak`, `coupled`
#[derive(Debug, Clone, PartialEq)]
pub struct GallerySpec {
    pub name: String,
    pub params: BTreeMap<String, ParamValue>,
}

impl GallerySpec {
    pub fn new(name: &str) -> GallerySpec {
        GallerySpec {
            name: name.to_string(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: ParamValue) -> GallerySpec {
        self.params.insert(key.to_string(), value);
        self
    }

    fn allowed(&self) -> Result<&'static [&'static str]> {
        Ok(match self.name.as_str() {
            "identity" | "pinching" => &["scale"],
            "truncated_shift" | "diagonal_expectation" => &["n", "scale"],
            "jordan_automorphism" => &["unitary_seed", "transpose", "scale"],
            "depolarizing" => &["p", "scale"],
            "random_positive_contraction" => &["seed", "kraus_count", "leak", "coupled", "scale"],
            other => return Err(Error::UnknownGallery(other.to_string())),
        })
    }

    fn bad(name: &str, reason: impl Into<String>) -> Error {
        Error::BadParam {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub fn int(&self, key: &str) -> Result<Option<i64>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(ParamValue::Int(v)) => Ok(Some(*v)),
            Some(other) => Err(Self::bad(key, format!("expected an integer, got {other}"))),
        }
    }

    pub fn float(&self, key: &str) -> Result<Option<f64>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(ParamValue::Float(v)) => Ok(Some(*v)),
            Some(ParamValue::Int(v)) => Ok(Some(*v as f64)),
            Some(other) => Err(Self::bad(key, format!("expected a number, got {other}"))),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.params.get(key) {
            None => Ok(false),
            Some(ParamValue::Bool(v)) => Ok(*v),
            Some(other) => Err(Self::bad(key, format!("expected a boolean, got {other}"))),
        }
    }

    fn required_int(&self, key: &str) -> Result<i64> {
        self.int(key)?.ok_or_else(|| Self::bad(key, "missing"))
    }

    fn dimension(&self) -> Result<usize> {
        let n = self.required_int("n")?;
        usize::try_from(n).map_err(|_| Self::bad("n", format!("{n} is negative")))
    }

    /// Checks the name and parameter names and types.
    pub fn validate(&self) -> Result<()> {
        let allowed = self.allowed()?;
        if let Some(key) = self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Self::bad(key, format!("not a parameter of {}", self.name)));
        }
        if let Some(s) = self.float("scale")? {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Self::bad("scale", format!("{s} is not in (0, 1]")));
            }
        }
        match self.name.as_str() {
            "truncated_shift" | "diagonal_expectation" => {
                self.dimension()?;
            }
            "jordan_automorphism" => {
                self.int("unitary_seed")?;
                self.flag("transpose")?;
            }
            "depolarizing" => {
                self.float("p")?.ok_or_else(|| Self::bad("p", "missing"))?;
            }
            "random_positive_contraction" => {
                self.int("seed")?;
                self.int("kraus_count")?;
                self.float("leak")?;
                self.flag("coupled")?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Whether the construction fixes its own algebra.
    pub fn defines_algebra(&self) -> bool {
        matches!(self.name.as_str(), "truncated_shift" | "diagonal_expectation")
    }

    /// Builds the map. Constructions that do not define their own algebra
    /// act on `algebra`.
    pub fn build(&self, algebra: &Arc<Algebra>) -> Result<SuperOp> {
        self.validate()?;
        let map = match self.name.as_str() {
            "identity" => SuperOp::identity(algebra),
            "pinching" => pinching(algebra)?,
            "truncated_shift" => truncated_shift(self.dimension()?)?.1,
            "diagonal_expectation" => diagonal_expectation(self.dimension()?)?,
            "jordan_automorphism" => {
                let u = match self.int("unitary_seed")? {
                    Some(seed) => random::unitary(algebra, &mut random::seeded(seed as u64)),
                    None => Element::identity(algebra),
                };
                jordan_automorphism(&u, self.flag("transpose")?)?
            }
            "depolarizing" => depolarizing(algebra, self.float("p")?.expect("validated"))?,
            "random_positive_contraction" => {
                let seed = self.int("seed")?.unwrap_or(0) as u64;
                let count = self.int("kraus_count")?.unwrap_or(2);
                let count = usize::try_from(count).map_err(|_| Self::bad("kraus_count", "negative"))?;
                let leak = self.float("leak")?.unwrap_or(0.0);
                if self.flag("coupled")? {
                    random_coupled_contraction(algebra, seed, count, leak)?
                } else {
                    random_positive_contraction(algebra, seed, count, leak)?
                }
            }
            other => return Err(Error::UnknownGallery(other.to_string())),
        };
        Ok(match self.float("scale")? {
            Some(s) if s != 1.0 => map.scaled(s),
            _ => map,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::l1_norm;
    use crate::superop::{FixedPointParams, IterationParams};

    #[test]
    fn shift_matrix_unit_action() {
        let (a, t) = truncated_shift(2).unwrap();
        let e = |i, j| Element::matrix_unit(&a, 0, i, j);
        assert_eq!(t.apply(&e(0, 0)), e(1, 1));
        assert_eq!(t.apply(&e(1, 1)), Element::zeros(&a));
        assert_eq!(t.apply(&e(0, 1)), Element::zeros(&a));
        assert_eq!(
            truncated_shift(1).unwrap_err(),
            Error::DimensionTooSmall { found: 1, min: 2 }
        );
    }

    #[test]
    fn shift_is_subtracial_and_escapes_at_n() {
        for n in [2, 5, 9] {
            let (a, t) = truncated_shift(n).unwrap();
            let tr = t.iterate(&Element::matrix_unit(&a, 0, 0, 0), IterationParams::default());
            let norms = tr.norms();
            for (k, &norm) in norms.iter().enumerate().take(n + 1) {
                assert_eq!(norm, if k < n { 1.0 } else { 0.0 }, "n={n} k={k}");
            }
            assert_eq!(tr.escape_step(0.0), Some(n));
            let x = random::positive(&a, &mut random::seeded(n as u64));
            assert!(t.apply(&x).trace().re <= x.trace().re + 1e-12);
            let spec = t.spectrum(1e-8).unwrap();
            assert_eq!(spec.spectral_radius, 0.0);
            let fp = t.positive_fixed_point(&Element::matrix_unit(&a, 0, 0, 0), FixedPointParams::default());
            assert!(fp.unwrap().is_none());
        }
    }

    #[test]
    fn diagonal_expectation_properties() {
        let e = diagonal_expectation(4).unwrap();
        let ee = e.compose(&e);
        assert!((ee.matrix() - e.matrix()).camax() < 1e-12);
        let a = e.algebra().clone();
        let x = random::gaussian_element(&a, &mut random::seeded(3));
        assert!((e.apply(&x).trace() - x.trace()).norm() < 1e-12);
        assert!(e.check_abs_domination(100, 5, 1e-9).unwrap().holds);
        assert!(diagonal_expectation(0).is_err());
    }

    #[test]
    fn jordan_examples() {
        let a = Algebra::new(&[3, 2], &[0.5, 1.0], false).unwrap();
        let id = jordan_automorphism(&Element::identity(&a), false).unwrap();
        assert!((id.matrix() - SuperOp::identity(&a).matrix()).camax() < 1e-15);
        let tr = jordan_automorphism(&Element::identity(&a), true).unwrap();
        assert!(tr.is_certified_positive());
        let x = random::hermitian(&a, &mut random::seeded(4));
        assert!((l1_norm(&tr.apply(&x)) - l1_norm(&x)).abs() < 1e-10);
        let not_unitary = Element::identity(&a).scale(1.1);
        assert!(matches!(
            jordan_automorphism(&not_unitary, false),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn depolarizing_examples() {
        let a = Algebra::new(&[3], &[1.0], false).unwrap();
        let d0 = depolarizing(&a, 0.0).unwrap();
        assert!((d0.matrix() - SuperOp::identity(&a).matrix()).camax() < 1e-15);
        let d1 = depolarizing(&a, 1.0).unwrap();
        let x = random::state(&a, &mut random::seeded(2));
        let expect = Element::identity(&a).scale(1.0 / 3.0);
        assert!((&d1.apply(&x) - &expect).max_abs_entry() < 1e-14);
        assert_eq!(depolarizing(&a, 1.5).unwrap_err(), Error::BadProbability(1.5));
        // multi-block form still matches the formula
        let a = Algebra::new(&[2, 1], &[0.3, 2.0], false).unwrap();
        let d = depolarizing(&a, 0.35).unwrap();
        let x = random::gaussian_element(&a, &mut random::seeded(6));
        let expect = &x.scale(0.65) + &Element::identity(&a).scale_complex(x.trace() * (0.35 / a.unit_trace()));
        assert!((&d.apply(&x) - &expect).max_abs_entry() < 1e-12);
        let check = d.check_l1_contraction(1e-12).unwrap();
        assert!((&check.adjoint_unit - &Element::identity(&a)).max_abs_entry() < 1e-12);
    }

    #[test]
    fn random_contraction_normalization_and_determinism() {
        let a = Algebra::new(&[3, 2], &[0.4, 1.3], false).unwrap();
        for leak in [0.0, 0.2] {
            for coupled in [false, true] {
                let t = if coupled {
                    random_coupled_contraction(&a, 17, 2, leak).unwrap()
                } else {
                    random_positive_contraction(&a, 17, 2, leak).unwrap()
                };
                let check = t.check_l1_contraction(1e-10).unwrap();
                let target = Element::identity(&a).scale(1.0 - leak);
                assert!((&check.adjoint_unit - &target).max_abs_entry() < 1e-10);
                let x = random::positive(&a, &mut random::seeded(1));
                let ratio = t.apply(&x).trace().re / x.trace().re;
                assert!((ratio - (1.0 - leak)).abs() < 1e-10);
            }
        }
        let t1 = random_positive_contraction(&a, 5, 3, 0.1).unwrap();
        let t2 = random_positive_contraction(&a, 5, 3, 0.1).unwrap();
        assert_eq!(t1.matrix(), t2.matrix());
        assert!(random_positive_contraction(&a, 5, 0, 0.1).is_err());
        assert!(random_positive_contraction(&a, 5, 1, 1.0).is_err());
    }

    #[test]
    fn gallery_spec_validation() {
        let a = Algebra::new(&[2], &[1.0], false).unwrap();
        let spec = GallerySpec::new("depolarizing").with("p", ParamValue::Float(0.3));
        assert!(spec.build(&a).is_ok());
        let spec = GallerySpec::new("nope");
        assert_eq!(spec.build(&a).unwrap_err(), Error::UnknownGallery("nope".into()));
        let spec = GallerySpec::new("depolarizing").with("q", ParamValue::Float(0.3));
        assert!(matches!(spec.build(&a), Err(Error::BadParam { .. })));
        let spec = GallerySpec::new("truncated_shift").with("n", ParamValue::Int(4));
        assert_eq!(spec.build(&a).unwrap().algebra().dims(), &[4]);
        let spec = GallerySpec::new("jordan_automorphism")
            .with("transpose", ParamValue::Bool(true))
            .with("scale", ParamValue::Float(0.5));
        let t = spec.build(&a).unwrap();
        assert!((t.check_l1_contraction(1e-12).unwrap().norm - 0.5).abs() < 1e-12);
        let spec = GallerySpec::new("identity").with("scale", ParamValue::Float(2.0));
        assert!(spec.build(&a).is_err());
    }
}
