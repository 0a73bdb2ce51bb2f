//! Long-run behaviour of positive L¹-contractions: mixing and complete
//! mixing, the coefficient ρ̄, smoothing profiles, the decay-or-fixed-point
//! dichotomy and the "mixing implies completely mixing" verifier.
//!
//! Everything here is finite dimensional, so weak and norm convergence
//! coincide and the peripheral spectrum of the superoperator decides the
//! asymptotics. For a contraction the peripheral eigenvalues are
//! semisimple and `T` acts isometrically on the peripheral subspace, so
//! `lim ‖Tⁿ w‖₁ = ‖P w‖₁` where `P` is the peripheral projector. That
//! identity is what the spectral estimators use; the search estimators
//! iterate `T` instead and serve as an independent check.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::algebra::{is_positive, l1_norm, Algebra, Element, C64};
use crate::error::{Error, Result};
use crate::mass::{max_projection_mass, MassMode};
use crate::random;
use crate::spectrum::Spectrum;
use crate::superop::{FixedPoint, FixedPointParams, IterationParams, SuperOp, Trajectory};

/// Tolerances and budgets shared by the analyses.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisParams {
    /// Peripheral modulus cutoff and mixing threshold.
    pub tol: f64,
    /// `‖Tⁿ y‖₁ / ‖y‖₁` below this counts as decay.
    pub decay_tol: f64,
    /// Slack in `T*(1) ≤ 1`.
    pub contraction_tol: f64,
    /// Positivity slack, relative to the trace norm of the input.
    pub positivity_tol: f64,
    /// Strict-to-closed budget margin: budgets `δ` become `δ − η`.
    pub budget_margin: f64,
    pub iteration: IterationParams,
    pub fixed_point: FixedPointParams,
    /// Multi-start count for the spectral ρ̄ ascent.
    pub rho_starts: usize,
    pub rho_ascent_steps: usize,
    /// Sample count for the search ρ̄ estimator.
    pub rho_samples: usize,
    /// Sample count for `|T x| ≤ T|x|` checks.
    pub domination_samples: usize,
    pub seed: u64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            tol: 1e-8,
            decay_tol: 1e-9,
            contraction_tol: 1e-10,
            positivity_tol: 1e-8,
            budget_margin: 1e-12,
            iteration: IterationParams::default(),
            fixed_point: FixedPointParams::default(),
            rho_starts: 32,
            rho_ascent_steps: 120,
            rho_samples: 400,
            domination_samples: 200,
            seed: 0,
        }
    }
}

/// Real basis of `X = { x = x* : τ(x) = 0 }`: off-diagonal hermitian
/// matrix units, plus `e_k / w(k) − e_{k+1} / w(k+1)` along the
/// concatenated diagonal.
pub fn trace_zero_basis(algebra: &Arc<Algebra>) -> Vec<Element> {
    let mut basis = Vec::with_capacity(algebra.coord_dim().saturating_sub(1));
    let mut diagonal = Vec::new();
    for (b, &d) in algebra.dims().iter().enumerate() {
        let w = algebra.weights()[b];
        for i in 0..d {
            diagonal.push(Element::matrix_unit(algebra, b, i, i).scale(1.0 / w));
            for j in i + 1..d {
                let eij = Element::matrix_unit(algebra, b, i, j);
                let eji = Element::matrix_unit(algebra, b, j, i);
                basis.push(&eij + &eji);
                basis.push((&eij - &eji).scale_complex(C64::new(0.0, 1.0)));
            }
        }
    }
    for pair in diagonal.windows(2) {
        basis.push(&pair[0] - &pair[1]);
    }
    basis
}

fn apply_matrix(algebra: &Arc<Algebra>, m: &DMatrix<C64>, x: &Element) -> Element {
    Element::from_coords(algebra, &(m * x.to_coords()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingVerdict {
    Mixing,
    NotMixing,
}

#[derive(Debug, Clone)]
pub struct MixingReport {
    pub verdict: MixingVerdict,
    /// `max ‖P x‖₁ / ‖x‖₁` over the basis of `X`.
    pub peripheral_overlap: f64,
    pub witness: Option<Element>,
    pub witness_trajectory: Option<Trajectory>,
    pub spectrum: Spectrum,
    /// Positive fixed point grown from the normalized identity, if any.
    pub fixed_point: Option<FixedPoint>,
}

/// Mixing iff the peripheral projector annihilates `X`.
/// Largest `‖P x‖₁ / ‖x‖₁` over the trace-zero basis, with its maximizer.
fn max_basis_overlap(algebra: &Arc<Algebra>, spectrum: &Spectrum) -> (f64, Option<Element>) {
    if spectrum.peripheral.is_empty() {
        return (0.0, None);
    }
    let p = &spectrum.peripheral_projector;
    let mut best = 0.0f64;
    let mut best_x = None;
    for x in trace_zero_basis(algebra) {
        let ratio = l1_norm(&apply_matrix(algebra, p, &x)) / l1_norm(&x);
        if ratio > best {
            best = ratio;
            best_x = Some(x);
        }
    }
    (best, best_x)
}

pub fn classify_mixing(map: &SuperOp, params: &AnalysisParams) -> Result<MixingReport> {
    map.ensure_positive_contraction(params.contraction_tol)?;
    let algebra = map.algebra();
    let spectrum = map.spectrum(params.tol)?;
    let (peripheral_overlap, worst) = max_basis_overlap(algebra, &spectrum);
    let verdict = if peripheral_overlap <= params.tol {
        MixingVerdict::Mixing
    } else {
        MixingVerdict::NotMixing
    };
    let (witness, witness_trajectory) = match verdict {
        MixingVerdict::Mixing => (None, None),
        MixingVerdict::NotMixing => {
            let w = worst.expect("overlap > 0 has a maximizer");
            let tr = map.iterate(&w, params.iteration);
            (Some(w), Some(tr))
        }
    };
    let unit_state = Element::identity(algebra).scale(1.0 / algebra.unit_trace());
    let fixed_point = map.positive_fixed_point(&unit_state, params.fixed_point)?;
    Ok(MixingReport {
        verdict,
        peripheral_overlap,
        witness,
        witness_trajectory,
        spectrum,
        fixed_point,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhoMethod {
    /// Peripheral projector plus multi-start ascent.
    Spectral,
    /// Random pure-state pairs, limits taken by iterating the map.
    Search,
}

#[derive(Debug, Clone)]
pub struct RhoEstimate {
    pub value: f64,
    pub method: RhoMethod,
    /// A direction `ρ − σ` (difference of normalized pure states)
    /// attaining `value`, when `value > 0`.
    pub witness: Option<Element>,
}

/// A pure state `ψψ* / τ(ψψ*)` in block `b`.
fn pure_state(algebra: &Arc<Algebra>, b: usize, psi: &[C64]) -> Element {
    let d = algebra.dims()[b];
    let v = nalgebra::DVector::from_column_slice(psi);
    let mut blocks: Vec<DMatrix<C64>> = algebra.dims().iter().map(|&e| DMatrix::zeros(e, e)).collect();
    blocks[b] = &v * v.adjoint();
    debug_assert_eq!(blocks[b].nrows(), d);
    let x = Element::new(algebra, blocks).expect("shapes match");
    let t = x.trace().re;
    x.scale(1.0 / t)
}

/// `ρ − σ` for pure states in blocks `ba` and `bb`; `None` when the two
/// coincide numerically.
fn pure_difference(algebra: &Arc<Algebra>, ba: usize, psi: &[C64], bb: usize, phi: &[C64]) -> Option<Element> {
    let w = &pure_state(algebra, ba, psi) - &pure_state(algebra, bb, phi);
    (l1_norm(&w) > 1e-6).then_some(w)
}

fn random_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<C64> {
    (0..d).map(|_| random::complex_normal(rng)).collect()
}

fn block_pairs(algebra: &Arc<Algebra>) -> Vec<(usize, usize)> {
    let nb = algebra.num_blocks();
    let mut pairs: Vec<(usize, usize)> = (0..nb)
        .flat_map(|a| (0..nb).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b || algebra.dims()[a] > 1)
        .collect();
    // cross-block pairs first
    pairs.sort_by_key(|&(a, b)| (a == b, a, b));
    pairs
}

/// Estimates `ρ̄(T) = sup_{w ∈ X} lim ‖Tⁿ w‖₁ / ‖w‖₁`. The supremum over
/// `X` equals the supremum over differences of two pure states of unit
/// trace, which is what both methods explore.
pub fn rho_bar(map: &SuperOp, method: RhoMethod, params: &AnalysisParams) -> Result<RhoEstimate> {
    map.ensure_positive_contraction(params.contraction_tol)?;
    let algebra = map.algebra();
    let pairs = block_pairs(algebra);
    if pairs.is_empty() {
        // one block of dimension one: X = {0}
        return Ok(RhoEstimate {
            value: 0.0,
            method,
            witness: None,
        });
    }
    let (value, witness) = match method {
        RhoMethod::Spectral => rho_spectral(map, &pairs, params)?,
        RhoMethod::Search => rho_search(map, &pairs, params),
    };
    Ok(RhoEstimate {
        value: value.clamp(0.0, 1.0),
        method,
        witness,
    })
}

fn rho_spectral(map: &SuperOp, pairs: &[(usize, usize)], params: &AnalysisParams) -> Result<(f64, Option<Element>)> {
    let algebra = map.algebra();
    let spectrum = map.spectrum(params.tol)?;
    let p = &spectrum.peripheral_projector;
    let objective = |w: &Element| l1_norm(&apply_matrix(algebra, p, w)) / l1_norm(w);
    let (mut best, mut best_w) = max_basis_overlap(algebra, &spectrum);
    if best <= params.tol {
        return Ok((0.0, None));
    }
    let dims = algebra.dims();
    for start in 0..params.rho_starts {
        let mut rng = random::stream(params.seed ^ 0x5eed_0001, start as u64);
        let (ba, bb) = pairs[start % pairs.len()];
        let mut psi = random_vector(&mut rng, dims[ba]);
        let mut phi = random_vector(&mut rng, dims[bb]);
        let Some(w) = pure_difference(algebra, ba, &psi, bb, &phi) else {
            continue;
        };
        let mut current = objective(&w);
        let mut current_w = w;
        let mut step = 0.5;
        for _ in 0..params.rho_ascent_steps {
            let psi_try: Vec<C64> = psi
                .iter()
                .map(|z| z + random::complex_normal(&mut rng) * step)
                .collect();
            let phi_try: Vec<C64> = phi
                .iter()
                .map(|z| z + random::complex_normal(&mut rng) * step)
                .collect();
            match pure_difference(algebra, ba, &psi_try, bb, &phi_try) {
                Some(w) => {
                    let value = objective(&w);
                    if value > current {
                        current = value;
                        current_w = w;
                        psi = psi_try;
                        phi = phi_try;
                    } else {
                        step *= 0.9;
                    }
                }
                None => step *= 0.9,
            }
        }
        if current > best {
            best = current;
            best_w = Some(current_w);
        }
    }
    Ok((best, best_w))
}

fn rho_search(map: &SuperOp, pairs: &[(usize, usize)], params: &AnalysisParams) -> (f64, Option<Element>) {
    let algebra = map.algebra();
    let dims = algebra.dims();
    let mut best = 0.0f64;
    let mut best_w = None;
    for k in 0..params.rho_samples {
        let mut rng = random::stream(params.seed ^ 0x5eed_0002, k as u64);
        let (ba, bb) = pairs[k % pairs.len()];
        let psi = random_vector(&mut rng, dims[ba]);
        let phi = random_vector(&mut rng, dims[bb]);
        let Some(w) = pure_difference(algebra, ba, &psi, bb, &phi) else {
            continue;
        };
        let tr = map.iterate(&w, params.iteration);
        let ratio = tr.final_norm() / tr.points[0].norm;
        if ratio > best {
            best = ratio;
            best_w = Some(w);
        }
    }
    (best, best_w)
}

#[derive(Debug, Clone)]
pub struct CompleteMixingReport {
    pub completely_mixing: bool,
    pub rho_bar: f64,
    pub witness: Option<Element>,
}

/// Completely mixing iff `ρ̄(T) ≤ tol`, using the spectral estimator.
pub fn classify_completely_mixing(map: &SuperOp, params: &AnalysisParams) -> Result<CompleteMixingReport> {
    let estimate = rho_bar(map, RhoMethod::Spectral, params)?;
    let completely_mixing = estimate.value <= params.tol;
    Ok(CompleteMixingReport {
        completely_mixing,
        rho_bar: estimate.value,
        witness: if completely_mixing { None } else { estimate.witness },
    })
}

/// `S(n, δ) = max { τ(p Tⁿx) : τ(p) ≤ δ − η }` on a grid.
#[derive(Debug, Clone)]
pub struct SmoothingProfile {
    pub x: Element,
    pub deltas: Vec<f64>,
    pub steps: Vec<usize>,
    /// `values[n][k] = S(steps[n], deltas[k])`.
    pub values: Vec<Vec<f64>>,
    /// `‖Tⁿ x‖₁` per step.
    pub norms: Vec<f64>,
    /// `min_b w_b`: below this budget only `p = 0` fits and the profile is
    /// identically zero.
    pub min_projection_trace: f64,
}

impl SmoothingProfile {
    pub fn is_vacuous(&self, delta: f64) -> bool {
        delta < self.min_projection_trace
    }
}

fn ensure_positive_input(x: &Element, tol: f64) -> Result<f64> {
    let scale = l1_norm(x);
    let pos = is_positive(x, tol * scale.max(f64::MIN_POSITIVE));
    if !pos.positive || scale == 0.0 {
        return Err(Error::NotPositive {
            block: pos.witness.as_ref().map_or(0, |w| w.block),
            eigenvalue: pos.min_eigenvalue,
        });
    }
    Ok(scale)
}

/// Fills `S(n, δ)` for `n = 0..=n_max`.
pub fn smoothing_profile(
    map: &SuperOp,
    x: &Element,
    deltas: &[f64],
    n_max: usize,
    params: &AnalysisParams,
) -> Result<SmoothingProfile> {
    map.ensure_positive_contraction(params.contraction_tol)?;
    let scale = ensure_positive_input(x, params.positivity_tol)?;
    if let Some(&d) = deltas.iter().find(|&&d| d < 0.0) {
        return Err(Error::NegativeBudget(d));
    }
    let mut values = Vec::with_capacity(n_max + 1);
    let mut norms = Vec::with_capacity(n_max + 1);
    let mut y = x.clone();
    for n in 0..=n_max {
        if n > 0 {
            y = map.apply(&y).hermitian_part();
        }
        norms.push(l1_norm(&y));
        let row = deltas
            .iter()
            .map(|&delta| {
                let budget = (delta - params.budget_margin).max(0.0);
                max_projection_mass(&y, budget, MassMode::Exact, params.positivity_tol * scale).map(|m| m.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        values.push(row);
    }
    Ok(SmoothingProfile {
        x: x.clone(),
        deltas: deltas.to_vec(),
        steps: (0..=n_max).collect(),
        values,
        norms,
        min_projection_trace: x.algebra().min_weight(),
    })
}

#[derive(Debug, Clone)]
pub struct SmoothingCheck {
    pub holds: bool,
    /// Whether the orbit of `x` converged; without convergence the
    /// implication is vacuous.
    pub converged: bool,
    /// `(ε, δ, n₀)` certificates, one per ε.
    pub certificates: Vec<(f64, f64, usize)>,
    /// `(ε, n)` where no grid budget worked.
    pub violation: Option<(f64, usize)>,
    pub profile: Option<SmoothingProfile>,
}

/// For a convergent orbit, checks that for every `ε` some positive budget
/// `δ` on the grid and some `n₀` give `S(n, δ) < ε` for all tested
/// `n ≥ n₀`.
pub fn check_weak_convergence_smoothing(
    map: &SuperOp,
    x: &Element,
    epsilons: &[f64],
    deltas: &[f64],
    params: &AnalysisParams,
) -> Result<SmoothingCheck> {
    map.ensure_positive_contraction(params.contraction_tol)?;
    ensure_positive_input(x, params.positivity_tol)?;
    let tr = map.iterate(x, params.iteration);
    if !tr.converged {
        return Ok(SmoothingCheck {
            holds: true,
            converged: false,
            certificates: Vec::new(),
            violation: None,
            profile: None,
        });
    }
    let n_end = tr.points.len() - 1;
    let mut grid: Vec<f64> = deltas.iter().cloned().filter(|&d| d > 0.0).collect();
    grid.sort_by(f64::total_cmp);
    let profile = smoothing_profile(map, x, &grid, n_end, params)?;
    let mut certificates = Vec::new();
    let mut violation = None;
    for &eps in epsilons {
        let found = grid.iter().enumerate().find_map(|(k, &delta)| {
            let last_bad = profile.values.iter().rposition(|row| row[k] >= eps);
            let n0 = last_bad.map_or(0, |n| n + 1);
            (n0 <= n_end).then_some((eps, delta, n0))
        });
        match found {
            Some(c) => certificates.push(c),
            None => {
                violation = Some((eps, n_end));
                break;
            }
        }
    }
    Ok(SmoothingCheck {
        holds: violation.is_none(),
        converged: true,
        certificates,
        violation,
        profile: Some(profile),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DichotomyVerdict {
    Decay,
    FixedPoint,
}

#[derive(Debug, Clone)]
pub struct DichotomyResult {
    pub verdict: DichotomyVerdict,
    /// `lim ‖Tⁿ y‖₁`, read off the plateau of the orbit.
    pub alpha_estimate: f64,
    pub fixed_point: Option<FixedPoint>,
    pub trajectory: Trajectory,
    /// `max |τ((Tz − z) e)|` over matrix units `e`.
    pub pairing_defect: Option<f64>,
    /// In finite dimension every positive contraction is smoothing with
    /// respect to every positive element.
    pub smoothing_automatic: bool,
}

/// Decay of `‖Tⁿ y‖₁` to zero, or a nonzero positive `z = Tz`.
pub fn dichotomy(map: &SuperOp, y: &Element, params: &AnalysisParams) -> Result<DichotomyResult> {
    map.ensure_positive_contraction(params.contraction_tol)?;
    let scale = ensure_positive_input(y, params.positivity_tol)?;
    let trajectory = map.iterate(y, params.iteration);
    let alpha_estimate = trajectory.final_norm();
    if alpha_estimate <= params.decay_tol * scale {
        return Ok(DichotomyResult {
            verdict: DichotomyVerdict::Decay,
            alpha_estimate,
            fixed_point: None,
            trajectory,
            pairing_defect: None,
            smoothing_automatic: true,
        });
    }
    match map.positive_fixed_point(y, params.fixed_point)? {
        Some(fp) => {
            let algebra = map.algebra();
            let defect = &map.apply(&fp.element) - &fp.element;
            let pairing_defect = algebra
                .dims()
                .iter()
                .enumerate()
                .flat_map(|(b, &d)| (0..d * d).map(move |k| (b, k / d, k % d)))
                .map(|(b, i, j)| defect.product(&Element::matrix_unit(algebra, b, i, j)).trace().norm())
                .fold(0.0, f64::max);
            Ok(DichotomyResult {
                verdict: DichotomyVerdict::FixedPoint,
                alpha_estimate,
                fixed_point: Some(fp),
                trajectory,
                pairing_defect: Some(pairing_defect),
                smoothing_automatic: true,
            })
        }
        None => Err(Error::DichotomyFailure { alpha: alpha_estimate }),
    }
}

/// Hypotheses and conclusion of "no positive fixed point + domination +
/// convergence ⇒ decay".
#[derive(Debug, Clone)]
pub struct KsnReport {
    pub positive_contraction: bool,
    /// `|T x| ≤ T|x|` on sampled hermitian `x`.
    pub domination: Option<bool>,
    pub domination_gap: Option<f64>,
    /// No nonzero positive fixed point.
    pub no_positive_fixed_point: Option<bool>,
    /// The orbit of `z` converged.
    pub converges: Option<bool>,
    pub final_norm: Option<f64>,
    pub decay_confirmed: Option<bool>,
    /// `(mixing, completely mixing)` verdicts.
    pub mixing: Option<(bool, bool)>,
    /// `Some` when every hypothesis held; then it states whether decay and
    /// the implication mixing ⇒ completely mixing both held.
    pub conclusion_holds: Option<bool>,
    pub failed: Vec<&'static str>,
}

pub fn verify_ksn(map: &SuperOp, z: &Element, params: &AnalysisParams) -> Result<KsnReport> {
    let mut report = KsnReport {
        positive_contraction: false,
        domination: None,
        domination_gap: None,
        no_positive_fixed_point: None,
        converges: None,
        final_norm: None,
        decay_confirmed: None,
        mixing: None,
        conclusion_holds: None,
        failed: Vec::new(),
    };
    if map.ensure_positive_contraction(params.contraction_tol).is_err() {
        report.failed.push("positive_contraction");
        return Ok(report);
    }
    report.positive_contraction = true;
    let algebra = map.algebra();

    let dom = map.check_abs_domination(params.domination_samples, params.seed, params.positivity_tol)?;
    report.domination = Some(dom.holds);
    report.domination_gap = Some(dom.max_gap);
    if !dom.holds {
        report.failed.push("domination");
    }

    // A positive fixed point z ≤ ‖z‖∞·1 forces P₁(1) ≥ z/‖z‖∞ ≠ 0.
    let spectrum = map.spectrum(params.tol)?;
    let unit = Element::identity(algebra);
    let fixed_unit = apply_matrix(algebra, &spectrum.fixed_space_projector(), &unit);
    let unit_state = unit.scale(1.0 / algebra.unit_trace());
    let no_fixed = l1_norm(&fixed_unit) <= params.tol * algebra.unit_trace()
        && map.positive_fixed_point(&unit_state, params.fixed_point)?.is_none();
    report.no_positive_fixed_point = Some(no_fixed);
    if !no_fixed {
        report.failed.push("no_positive_fixed_point");
    }

    let tr = map.iterate(z, params.iteration);
    report.converges = Some(tr.converged);
    report.final_norm = Some(tr.final_norm());
    if !tr.converged {
        report.failed.push("convergence");
    }

    let mixing = classify_mixing(map, params)?.verdict == MixingVerdict::Mixing;
    let complete = classify_completely_mixing(map, params)?.completely_mixing;
    report.mixing = Some((mixing, complete));

    if report.failed.is_empty() {
        let scale = l1_norm(z);
        let decay = tr.final_norm() <= params.decay_tol * scale.max(f64::MIN_POSITIVE);
        report.decay_confirmed = Some(decay);
        report.conclusion_holds = Some(decay && (!mixing || complete));
    }
    Ok(report)
}
