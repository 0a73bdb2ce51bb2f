//! Scenario files: TOML with complex entries written as strings `a+bi`.
//!
//! ```toml
//! seed = 7
//! analyses = ["spectrum", { kind = "dichotomy", input = "e11" }]
//!
//! [map.gallery]
//! name = "truncated_shift"
//! params = { n = 8 }
//!
//! [[initial_elements]]
//! name = "e11"
//! matrix_unit = [0, 0, 0]
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use tracemix::dynamics::RhoMethod;
use tracemix::gallery::{GallerySpec, ParamValue};
use tracemix::random;
use tracemix::superop::{FixedPointParams, IterationParams};
use tracemix::{Algebra, AnalysisParams, Element, SuperOp, C64};

use crate::RunError;

/// Hermiticity slack for raw superoperator matrices.
pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-10;

/// A complex number, written `a+bi`, `a-bi`, `a`, or `bi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex(pub C64);

pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{}{:?}i", z.re, sign, z.im.abs())
}

fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

pub fn parse_complex(text: &str) -> Result<C64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty complex number".into());
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(parse_real(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imaginary = |t: &str| match t {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        t => parse_real(t),
    };
    match split {
        Some(k) => Ok(C64::new(parse_real(&body[..k])?, imaginary(&body[k..])?)),
        None => Ok(C64::new(0.0, imaginary(body)?)),
    }
    .map_err(|e: String| format!("in `{text}`: {e}"))
}

impl Serialize for Complex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_complex(self.0))
    }
}

impl<'de> Deserialize<'de> for Complex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Complex;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a complex number such as \"1.5-2i\" or a real number")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Complex, E> {
                parse_complex(v).map(Complex).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Complex, E> {
                Ok(Complex(C64::new(v as f64, 0.0)))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Complex, E> {
                Ok(Complex(C64::new(v, 0.0)))
            }
        }
        d.deserialize_any(V)
    }
}

/// A real number that may be written as a TOML integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                Ok(Real(v))
            }
        }
        d.deserialize_any(V)
    }
}

/// 64-bit seed; values above `i64::MAX` are written as strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(self.0) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Seed;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an unsigned 64-bit integer")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Seed, E> {
                u64::try_from(v)
                    .map(Seed)
                    .map_err(|_| E::custom(format!("seed {v} is negative")))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Seed, E> {
                Ok(Seed(v))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Seed, E> {
                v.parse()
                    .map(Seed)
                    .map_err(|_| E::custom(format!("`{v}` is not a seed")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub dims: Vec<usize>,
    pub weights: Vec<Real>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
}

/// Per block, rows of complex entries.
pub type BlocksSpec = Vec<Vec<Vec<Complex>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamRepr {
    Bool(bool),
    Int(i64),
    Float(f64),
}

impl From<&ParamRepr> for ParamValue {
    fn from(p: &ParamRepr) -> ParamValue {
        match *p {
            ParamRepr::Bool(b) => ParamValue::Bool(b),
            ParamRepr::Int(i) => ParamValue::Int(i),
            ParamRepr::Float(f) => ParamValue::Float(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GalleryTable {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, ParamRepr>,
}

impl GalleryTable {
    pub fn to_spec(&self) -> GallerySpec {
        self.params
            .iter()
            .fold(GallerySpec::new(&self.name), |g, (k, v)| g.with(k, v.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrausTable {
    /// Block-diagonal Kraus operators.
    pub operators: Vec<BlocksSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Kraus(KrausTable),
    /// `N × N` matrix in trace-orthonormal coordinates, row-major.
    Matrix(Vec<Vec<Complex>>),
    Gallery(GalleryTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedElement {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlocksSpec>,
    /// Concatenated diagonal across blocks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<Vec<Real>>,
    /// `[block, row, column]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_unit: Option<[usize; 3]>,
    /// A random state drawn from the scenario seed.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub random_state: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisKind {
    ClassifyMixing,
    ClassifyCompletelyMixing,
    RhoBar,
    SmoothingProfile,
    Dichotomy,
    VerifyKsn,
    Spectrum,
}

impl AnalysisKind {
    pub fn name(self) -> &'static str {
        match self {
            AnalysisKind::ClassifyMixing => "classify_mixing",
            AnalysisKind::ClassifyCompletelyMixing => "classify_completely_mixing",
            AnalysisKind::RhoBar => "rho_bar",
            AnalysisKind::SmoothingProfile => "smoothing_profile",
            AnalysisKind::Dichotomy => "dichotomy",
            AnalysisKind::VerifyKsn => "verify_ksn",
            AnalysisKind::Spectrum => "spectrum",
        }
    }

    pub fn is_randomized(self) -> bool {
        matches!(
            self,
            AnalysisKind::ClassifyCompletelyMixing | AnalysisKind::RhoBar | AnalysisKind::VerifyKsn
        )
    }

    fn takes_input(self) -> bool {
        matches!(
            self,
            AnalysisKind::SmoothingProfile | AnalysisKind::Dichotomy | AnalysisKind::VerifyKsn
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoMethodSpec {
    Spectral,
    Search,
}

impl From<RhoMethodSpec> for RhoMethod {
    fn from(m: RhoMethodSpec) -> RhoMethod {
        match m {
            RhoMethodSpec::Spectral => RhoMethod::Spectral,
            RhoMethodSpec::Search => RhoMethod::Search,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisTable {
    pub kind: AnalysisKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<Real>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<RhoMethodSpec>,
}

impl AnalysisTable {
    pub fn new(kind: AnalysisKind) -> AnalysisTable {
        AnalysisTable {
            kind,
            input: None,
            deltas: None,
            n_max: None,
            method: None,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnalysisRepr {
    Name(AnalysisKind),
    Table(AnalysisTable),
}

/// An analysis request: a bare name or a table with options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "AnalysisRepr")]
pub struct Analysis(pub AnalysisTable);

impl From<AnalysisRepr> for Analysis {
    fn from(r: AnalysisRepr) -> Analysis {
        match r {
            AnalysisRepr::Name(kind) => Analysis(AnalysisTable::new(kind)),
            AnalysisRepr::Table(t) => Analysis(t),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

impl OutputSpec {
    fn is_empty(&self) -> bool {
        self.prefix.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<Seed>,
    pub analyses: Vec<Analysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraSpec>,
    pub map: MapSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial_elements: Vec<NamedElement>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, Real>,
    #[serde(default, skip_serializing_if = "OutputSpec::is_empty")]
    pub outputs: OutputSpec,
}

/// Tolerance and budget names accepted in `[tolerances]` and `--tol`.
pub const TOLERANCE_NAMES: &[&str] = &[
    "budget_margin",
    "contraction_tol",
    "decay_tol",
    "domination_samples",
    "fixed_point_tol",
    "hermitian_tol",
    "n_avg",
    "n_max",
    "positivity_tol",
    "rho_ascent_steps",
    "rho_samples",
    "rho_starts",
    "stop_tol",
    "tol",
    "window",
];

impl ScenarioSpec {
    pub fn parse(text: &str) -> Result<ScenarioSpec, RunError> {
        toml::from_str(text).map_err(|e| RunError::Parse(e.to_string()))
    }

    /// Canonical text form.
    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("scenario specs always serialize")
    }

    pub fn has_randomized_analysis(&self) -> bool {
        self.analyses.iter().any(|a| a.0.kind.is_randomized()) || self.initial_elements.iter().any(|e| e.random_state)
    }

    /// Resolves the algebra, map, elements and parameters, checking every
    /// cross reference.
    pub fn resolve(&self) -> Result<Resolved, RunError> {
        let seed = match self.seed {
            Some(s) => s.0,
            None if self.has_randomized_analysis() => {
                return Err(RunError::Validation(
                    "a seed is required when randomized analyses or random elements are requested".into(),
                ))
            }
            None => 0,
        };
        let params = self.params(seed)?;
        let hermitian_tol = self.tolerance("hermitian_tol").unwrap_or(DEFAULT_HERMITIAN_TOL);

        let (algebra, map) = self.build_map(hermitian_tol)?;

        let mut elements = BTreeMap::new();
        for (k, spec) in self.initial_elements.iter().enumerate() {
            if elements.contains_key(&spec.name) {
                return Err(RunError::Validation(format!("element `{}` defined twice", spec.name)));
            }
            let x = build_element(&algebra, spec, seed, k as u64)?;
            elements.insert(spec.name.clone(), x);
        }

        let mut seen = BTreeSet::new();
        for a in &self.analyses {
            let t = &a.0;
            if !seen.insert(t.kind) {
                return Err(RunError::Validation(format!(
                    "analysis `{}` requested twice",
                    t.kind.name()
                )));
            }
            if let Some(input) = &t.input {
                if !t.kind.takes_input() {
                    return Err(RunError::Validation(format!("`{}` takes no input", t.kind.name())));
                }
                if !elements.contains_key(input) {
                    return Err(RunError::Validation(format!("unknown element `{input}`")));
                }
            }
            if t.deltas.is_some() && t.kind != AnalysisKind::SmoothingProfile {
                return Err(RunError::Validation(format!("`{}` takes no deltas", t.kind.name())));
            }
            if let Some(d) = t.deltas.iter().flatten().find(|d| !(d.0.is_finite() && d.0 >= 0.0)) {
                return Err(RunError::Validation(format!(
                    "budget {} is not a nonnegative number",
                    d.0
                )));
            }
            if t.method.is_some() && t.kind != AnalysisKind::RhoBar {
                return Err(RunError::Validation(format!("`{}` takes no method", t.kind.name())));
            }
        }
        Ok(Resolved {
            algebra,
            map,
            elements,
            params,
            seed,
        })
    }

    fn tolerance(&self, name: &str) -> Option<f64> {
        self.tolerances.get(name).map(|r| r.0)
    }

    fn params(&self, seed: u64) -> Result<AnalysisParams, RunError> {
        let mut p = AnalysisParams {
            seed,
            ..AnalysisParams::default()
        };
        for (name, value) in &self.tolerances {
            let v = value.0;
            if !(v.is_finite() && v > 0.0) {
                return Err(RunError::Validation(format!(
                    "tolerance `{name}` = {v} is not a positive number"
                )));
            }
            let count = || -> Result<usize, RunError> {
                if v.fract() != 0.0 {
                    return Err(RunError::Validation(format!("`{name}` = {v} must be an integer")));
                }
                Ok(v as usize)
            };
            match name.as_str() {
                "tol" => p.tol = v,
                "decay_tol" => p.decay_tol = v,
                "contraction_tol" => p.contraction_tol = v,
                "positivity_tol" => p.positivity_tol = v,
                "budget_margin" => p.budget_margin = v,
                "fixed_point_tol" => p.fixed_point.tol = v,
                "stop_tol" => p.iteration.stop_tol = v,
                "hermitian_tol" => {}
                "n_max" => p.iteration.n_max = count()?,
                "window" => p.iteration.window = count()?,
                "n_avg" => p.fixed_point.n_avg = count()?,
                "rho_starts" => p.rho_starts = count()?,
                "rho_ascent_steps" => p.rho_ascent_steps = count()?,
                "rho_samples" => p.rho_samples = count()?,
                "domination_samples" => p.domination_samples = count()?,
                other => return Err(RunError::Validation(format!("unknown tolerance `{other}`"))),
            }
        }
        Ok(p)
    }

    fn build_map(&self, hermitian_tol: f64) -> Result<(Arc<Algebra>, SuperOp), RunError> {
        let declared = match &self.algebra {
            Some(a) => {
                let weights: Vec<f64> = a.weights.iter().map(|w| w.0).collect();
                Some(Algebra::new(&a.dims, &weights, a.normalize).map_err(RunError::from_validation)?)
            }
            None => None,
        };
        match &self.map {
            MapSpec::Gallery(g) => {
                let spec = g.to_spec();
                spec.validate().map_err(RunError::from_validation)?;
                let algebra = if spec.defines_algebra() {
                    let n = spec.int("n").map_err(RunError::from_validation)?.unwrap_or(0);
                    let own = Algebra::new(&[n.max(0) as usize], &[1.0], false).map_err(RunError::from_validation)?;
                    if let Some(a) = &declared {
                        if a.dims() != own.dims() || a.weights() != own.weights() {
                            return Err(RunError::Validation(format!(
                                "algebra {a} does not match the algebra {own} of `{}`",
                                g.name
                            )));
                        }
                    }
                    own
                } else {
                    declared.ok_or_else(|| RunError::Validation(format!("`{}` needs an [algebra] table", g.name)))?
                };
                let map = spec.build(&algebra).map_err(RunError::from_validation)?;
                Ok((map.algebra().clone(), map))
            }
            MapSpec::Kraus(k) => {
                let algebra =
                    declared.ok_or_else(|| RunError::Validation("kraus maps need an [algebra] table".into()))?;
                let ops = k
                    .operators
                    .iter()
                    .map(|b| blocks_to_element(&algebra, b))
                    .collect::<Result<Vec<_>, _>>()?;
                let scale = k.scale.map_or(1.0, |s| s.0);
                let map = SuperOp::from_kraus(&algebra, &ops, scale).map_err(RunError::from_validation)?;
                Ok((algebra, map))
            }
            MapSpec::Matrix(rows) => {
                let algebra =
                    declared.ok_or_else(|| RunError::Validation("matrix maps need an [algebra] table".into()))?;
                let n = algebra.coord_dim();
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(RunError::Validation(format!(
                        "map matrix must be {n} x {n} for algebra {algebra}"
                    )));
                }
                let m = DMatrix::from_fn(n, n, |i, j| rows[i][j].0);
                let map = SuperOp::from_matrix(&algebra, m, hermitian_tol).map_err(RunError::from_validation)?;
                Ok((algebra, map))
            }
        }
    }
}

fn blocks_to_element(algebra: &Arc<Algebra>, spec: &BlocksSpec) -> Result<Element, RunError> {
    let dims = algebra.dims();
    if spec.len() != dims.len() {
        return Err(RunError::Validation(format!(
            "element has {} blocks, algebra {algebra} has {}",
            spec.len(),
            dims.len()
        )));
    }
    let mut blocks = Vec::with_capacity(dims.len());
    for (b, (rows, &d)) in spec.iter().zip(dims).enumerate() {
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(RunError::Validation(format!("block {b} must be {d} x {d}")));
        }
        blocks.push(DMatrix::from_fn(d, d, |i, j| rows[i][j].0));
    }
    Element::new(algebra, blocks).map_err(RunError::from_validation)
}

fn build_element(algebra: &Arc<Algebra>, spec: &NamedElement, seed: u64, index: u64) -> Result<Element, RunError> {
    let given = [
        spec.blocks.is_some(),
        spec.diagonal.is_some(),
        spec.matrix_unit.is_some(),
        spec.random_state,
    ];
    if given.iter().filter(|&&g| g).count() != 1 {
        return Err(RunError::Validation(format!(
            "element `{}` needs exactly one of blocks, diagonal, matrix_unit, random_state",
            spec.name
        )));
    }
    if let Some(b) = &spec.blocks {
        return blocks_to_element(algebra, b);
    }
    if let Some(d) = &spec.diagonal {
        let values: Vec<f64> = d.iter().map(|r| r.0).collect();
        return Element::diagonal(algebra, &values).map_err(RunError::from_validation);
    }
    if let Some([b, i, j]) = spec.matrix_unit {
        if b >= algebra.num_blocks() || i >= algebra.dims()[b] || j >= algebra.dims()[b] {
            return Err(RunError::Validation(format!(
                "matrix unit [{b}, {i}, {j}] is outside algebra {algebra}"
            )));
        }
        return Ok(Element::matrix_unit(algebra, b, i, j));
    }
    Ok(random::state(algebra, &mut random::stream(seed ^ 0xe1e5, index)))
}

/// A validated scenario ready to run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub algebra: Arc<Algebra>,
    pub map: SuperOp,
    pub elements: BTreeMap<String, Element>,
    pub params: AnalysisParams,
    pub seed: u64,
}

impl Resolved {
    /// The named input, else the first element, else the unit state.
    pub fn input(&self, spec: &ScenarioSpec, name: Option<&str>) -> (String, Element) {
        let name = name
            .map(str::to_string)
            .or_else(|| spec.initial_elements.first().map(|e| e.name.clone()));
        match name {
            Some(n) => {
                let x = self.elements[&n].clone();
                (n, x)
            }
            None => (
                "unit_state".into(),
                Element::identity(&self.algebra).scale(1.0 / self.algebra.unit_trace()),
            ),
        }
    }
}

/// `--tol name=value` override.
pub fn parse_tolerance_override(text: &str) -> Result<(String, f64), String> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| format!("`{text}` is not of the form name=value"))?;
    let name = name.trim();
    if !TOLERANCE_NAMES.contains(&name) {
        return Err(format!("unknown tolerance `{name}`"));
    }
    Ok((name.to_string(), parse_real(value.trim())?))
}

/// Every tolerance with its resolved value, for the report echo.
pub fn resolved_tolerances(p: &AnalysisParams, hermitian_tol: f64) -> BTreeMap<String, Real> {
    let IterationParams {
        n_max,
        stop_tol,
        window,
    } = p.iteration;
    let FixedPointParams {
        n_avg,
        tol: fixed_point_tol,
    } = p.fixed_point;
    [
        ("budget_margin", p.budget_margin),
        ("contraction_tol", p.contraction_tol),
        ("decay_tol", p.decay_tol),
        ("domination_samples", p.domination_samples as f64),
        ("fixed_point_tol", fixed_point_tol),
        ("hermitian_tol", hermitian_tol),
        ("n_avg", n_avg as f64),
        ("n_max", n_max as f64),
        ("positivity_tol", p.positivity_tol),
        ("rho_ascent_steps", p.rho_ascent_steps as f64),
        ("rho_samples", p.rho_samples as f64),
        ("rho_starts", p.rho_starts as f64),
        ("stop_tol", stop_tol),
        ("tol", p.tol),
        ("window", window as f64),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), Real(v)))
    .collect()
}
