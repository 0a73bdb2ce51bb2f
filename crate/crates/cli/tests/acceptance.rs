//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs as a plain binary (`harness = false`).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use tracemix::algebra::{
    abs, dual_positivity_check, is_positive, l1_norm, l1_norm_singular, l1_norm_spectral, spectral_decompose,
};
use tracemix::dynamics::{self, AnalysisParams, DichotomyVerdict, MixingVerdict, RhoMethod};
use tracemix::gallery;
use tracemix::mass::{max_projection_mass, selection_cost};
use tracemix::random::{self, SeededRng};
use tracemix::superop::{FixedPointParams, IterationParams};
use tracemix::{Algebra, Element, MassMode, SuperOp};
use tracemix_cli::run::{self, Overrides};
use tracemix_cli::sweep;

const MASTER: u64 = 0x7ace_5eed;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_algebra(rng: &mut SeededRng, max_blocks: usize, max_dim: usize) -> Arc<Algebra> {
    let nb = rng.random_range(1..=max_blocks);
    let dims: Vec<usize> = (0..nb).map(|_| rng.random_range(1..=max_dim)).collect();
    let weights: Vec<f64> = (0..nb).map(|_| rng.random_range(0.2..2.0)).collect();
    Algebra::new(&dims, &weights, false).expect("valid random algebra")
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let mut rng = random::stream(MASTER ^ 1, k);
        let a = random_algebra(&mut rng, 3, 6);
        let x = random::hermitian(&a, &mut rng);
        let spectral = l1_norm_spectral(&x, 1e-10).expect("hermitian sample");
        worst = worst.max((spectral - l1_norm_singular(&x)).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-10 && elapsed < Duration::from_secs(10),
        format!("spectral vs singular-value trace norm on 1000 elements: max |diff| = {worst:.2e}, {elapsed:.2?}"),
    )
}

fn criterion_2() -> Outcome {
    let offsets = [1e-3, -1e-3, 1e-6, -1e-6, 0.5, -0.5];
    let mut disagreements = 0;
    let mut positives = 0;
    for k in 0..500u64 {
        let mut rng = random::stream(MASTER ^ 2, k);
        let a = random_algebra(&mut rng, 3, 4);
        let h = random::hermitian(&a, &mut rng);
        let x = if k % 7 == 6 {
            h
        } else {
            let lmin = is_positive(&h, 0.0).min_eigenvalue;
            let shift = -lmin + offsets[k as usize % offsets.len()];
            &h + &Element::identity(&a).scale(shift)
        };
        let eig = is_positive(&x, 1e-8).positive;
        let dual = dual_positivity_check(&x, 1e-8).expect("hermitian sample");
        positives += eig as usize;
        disagreements += (eig != dual) as usize;
    }
    outcome(
        disagreements == 0,
        format!("dual pairing vs eigenvalue positivity on 500 elements ({positives} positive): {disagreements} disagreements"),
    )
}

/// Best `τ(p y)` over every set of rank-one eigenprojections with
/// `τ(p) ≤ δ`, summed block by block in eigenvalue order.
fn knapsack_oracle(y: &Element, delta: f64) -> f64 {
    let a = y.algebra();
    let spectral = spectral_decompose(y, 1e-8).expect("hermitian");
    let mut items: Vec<(usize, f64)> = Vec::new();
    for e in &spectral.entries {
        for _ in 0..e.rank {
            items.push((e.block, e.eigenvalue));
        }
    }
    let nb = a.num_blocks();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << items.len()) {
        let mut counts = vec![0usize; nb];
        let mut sums = vec![0.0f64; nb];
        for (k, &(b, l)) in items.iter().enumerate() {
            if mask >> k & 1 == 1 {
                counts[b] += 1;
                sums[b] += l;
            }
        }
        if selection_cost(a.weights(), &counts) > delta {
            continue;
        }
        let mut value = 0.0;
        for (w, s) in a.weights().iter().zip(&sums) {
            value += w * s;
        }
        best = best.max(value);
    }
    best
}

fn criterion_3() -> Outcome {
    let mut mismatches = 0;
    let mut worst_projection = 0.0f64;
    for k in 0..200u64 {
        let mut rng = random::stream(MASTER ^ 3, k);
        let a = loop {
            let a = random_algebra(&mut rng, 3, 6);
            if a.total_rank() <= 12 {
                break a;
            }
        };
        let y = random::positive(&a, &mut rng);
        let delta = rng.random_range(0.0..1.1 * a.unit_trace());
        let exact = max_projection_mass(&y, delta, MassMode::Exact, 1e-8).expect("positive sample");
        if exact.value != knapsack_oracle(&y, delta) {
            mismatches += 1;
        }
        let p = exact.projection.element();
        worst_projection = worst_projection.max((y.product(p).trace().re - exact.value).abs());
        if p.trace().re > delta + 1e-12 {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!(
            "exact projection mass vs exhaustive enumeration on 200 instances: {mismatches} mismatches (attaining projection error {worst_projection:.1e})"
        ),
    )
}

/// The shared random suite: leak in {0, 0.1, 0.3}, dims at most 4, one or
/// two blocks, with a random state as seed.
fn random_suite(count: u64) -> Vec<(SuperOp, Element)> {
    (0..count)
        .map(|k| {
            let mut rng = random::stream(MASTER ^ 4, k);
            let a = random_algebra(&mut rng, 2, 4);
            let leak = [0.0, 0.1, 0.3][k as usize % 3];
            let kraus = rng.random_range(1..=3);
            let seed = random::derive_seed(MASTER, k);
            let t = if k % 2 == 0 {
                gallery::random_positive_contraction(&a, seed, kraus, leak)
            } else {
                gallery::random_coupled_contraction(&a, seed, kraus, leak)
            }
            .expect("valid generator parameters");
            let y = random::state(&a, &mut rng);
            (t, y)
        })
        .collect()
}

fn criterion_4(suite: &[(SuperOp, Element)]) -> Outcome {
    let start = Instant::now();
    let params = AnalysisParams::default();
    let results: Vec<Result<(DichotomyVerdict, f64, f64), String>> = suite
        .par_iter()
        .map(|(t, y)| {
            let r = dynamics::dichotomy(t, y, &params).map_err(|e| e.to_string())?;
            Ok(match &r.fixed_point {
                Some(fp) => (r.verdict, fp.min_eigenvalue, fp.residual),
                None => (r.verdict, 0.0, 0.0),
            })
        })
        .collect();
    let elapsed = start.elapsed();
    let failures = results.iter().filter(|r| r.is_err()).count();
    let ok: Vec<_> = results.iter().flatten().collect();
    let decay = ok.iter().filter(|r| r.0 == DichotomyVerdict::Decay).count();
    let fixed: Vec<_> = ok.iter().filter(|r| r.0 == DichotomyVerdict::FixedPoint).collect();
    let worst_margin = fixed.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let worst_residual = fixed.iter().map(|r| r.2).fold(0.0, f64::max);
    let pass = failures == 0 && fixed.iter().all(|r| r.1 >= -1e-8 && r.2 <= 1e-8) && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "dichotomy on 500 random contractions: {decay} decay, {} fixed point, {failures} failures; min margin {worst_margin:.1e}, max residual {worst_residual:.1e}, {elapsed:.2?}",
            fixed.len()
        ),
    )
}

fn gallery_suite() -> Vec<(String, SuperOp)> {
    let mut out = Vec::new();
    for n in 2..=11 {
        out.push((format!("truncated_shift n={n}"), gallery::truncated_shift(n).unwrap().1));
    }
    for n in 2..=6 {
        out.push((
            format!("diagonal_expectation n={n}"),
            gallery::diagonal_expectation(n).unwrap(),
        ));
    }
    let algebras = [
        Algebra::new(&[2], &[1.0], false).unwrap(),
        Algebra::new(&[3], &[0.5], false).unwrap(),
        Algebra::new(&[1, 2], &[0.3, 0.7], false).unwrap(),
        Algebra::new(&[2, 2], &[1.0, 2.0], false).unwrap(),
        Algebra::new(&[1, 1, 2], &[0.2, 0.5, 1.5], false).unwrap(),
    ];
    for (i, a) in algebras.iter().enumerate() {
        let mut rng = random::stream(MASTER ^ 5, i as u64);
        let u = random::unitary(a, &mut rng);
        out.push((format!("identity {a}"), SuperOp::identity(a)));
        out.push((format!("pinching {a}"), gallery::pinching(a).unwrap()));
        out.push((
            format!("depolarizing p=0.3 {a}"),
            gallery::depolarizing(a, 0.3).unwrap(),
        ));
        out.push((format!("depolarizing p=1 {a}"), gallery::depolarizing(a, 1.0).unwrap()));
        out.push((
            format!("unitary automorphism {a}"),
            gallery::jordan_automorphism(&u, false).unwrap(),
        ));
        out.push((
            format!("transpose automorphism {a}"),
            gallery::jordan_automorphism(&u, true).unwrap(),
        ));
        out.push((
            format!("half transpose automorphism {a}"),
            gallery::jordan_automorphism(&u, true).unwrap().scaled(0.5),
        ));
    }
    out
}

fn criterion_5(suite: &[(SuperOp, Element)], gallery_maps: &[(String, SuperOp)]) -> Outcome {
    let params = AnalysisParams::default();
    let maps: Vec<&SuperOp> = suite
        .iter()
        .map(|(t, _)| t)
        .chain(gallery_maps.iter().map(|(_, t)| t))
        .collect();
    let verdicts: Vec<Result<(bool, bool), String>> = maps
        .par_iter()
        .map(|t| {
            let m = dynamics::classify_mixing(t, &params).map_err(|e| e.to_string())?;
            let c = dynamics::classify_completely_mixing(t, &params).map_err(|e| e.to_string())?;
            Ok((m.verdict == MixingVerdict::Mixing, c.completely_mixing))
        })
        .collect();
    let errors = verdicts.iter().filter(|v| v.is_err()).count();
    let ok: Vec<_> = verdicts.iter().flatten().collect();
    let bad = ok.iter().filter(|&&&(m, c)| m && !c).count();
    let disagree = ok.iter().filter(|&&&(m, c)| m != c).count();
    let mixing = ok.iter().filter(|&&&(m, _)| m).count();
    outcome(
        errors == 0 && bad == 0 && disagree == 0,
        format!(
            "{} instances ({mixing} mixing): {bad} mixing but not completely mixing, {disagree} classifier disagreements, {errors} errors",
            maps.len()
        ),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut problems = Vec::new();
    let mut escapes = Vec::new();
    for n in 2..=32usize {
        let (a, t) = gallery::truncated_shift(n).unwrap();
        let e11 = Element::matrix_unit(&a, 0, 0, 0);
        let tr = t.iterate(&e11, IterationParams::default());
        let norms = tr.norms();
        if norms.len() <= n + 1 {
            problems.push(format!("n={n}: orbit too short"));
        }
        for (k, &norm) in norms.iter().enumerate() {
            let expect = if k < n { 1.0 } else { 0.0 };
            if norm != expect {
                problems.push(format!("n={n} k={k}: norm {norm}"));
            }
        }
        match t.positive_fixed_point(&e11, FixedPointParams::default()) {
            Ok(None) => {}
            other => problems.push(format!("n={n}: fixed point search gave {other:?}")),
        }
        escapes.push((n, tr.escape_step(0.0)));
    }
    let linear = escapes.iter().all(|&(n, e)| e == Some(n));
    let elapsed = start.elapsed();
    outcome(
        problems.is_empty() && linear && elapsed < Duration::from_secs(30),
        format!(
            "truncated shifts n=2..32: {} norm/fixed-point problems{}, escape step = n for all n: {linear}, {elapsed:.2?}",
            problems.len(),
            problems.first().map_or(String::new(), |p| format!(" (first: {p})"))
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..200u64 {
        let mut rng = random::stream(MASTER ^ 7, k);
        let a = random_algebra(&mut rng, 2, 4);
        let u = random::unitary(&a, &mut rng);
        let alpha = gallery::jordan_automorphism(&u, k % 2 == 1).expect("unitary sample");
        let x = random::hermitian(&a, &mut rng);
        let lhs = abs(&alpha.apply(&x));
        let rhs = alpha.apply(&abs(&x));
        worst = worst.max(l1_norm(&(&lhs - &rhs)));
    }
    outcome(
        worst <= 1e-9,
        format!("|a(x)| vs a(|x|) for 200 unitary and transpose automorphisms: max trace-norm gap {worst:.2e}"),
    )
}

fn criterion_8() -> Outcome {
    let targets = [0.3, 0.5, 0.7, 0.9, 1.5, 2.0, 3.0];
    let results: Vec<(bool, bool, f64)> = (0..300u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = random::stream(MASTER ^ 8, k);
            let a = random_algebra(&mut rng, 2, 3);
            let count = rng.random_range(1..=3);
            let ops: Vec<Element> = (0..count).map(|_| random::gaussian_element(&a, &mut rng)).collect();
            let raw = SuperOp::from_kraus(&a, &ops, 1.0).expect("Kraus operators");
            let norm = raw.check_l1_contraction(0.0).expect("Kraus certificate").norm;
            let target = targets[k as usize % targets.len()];
            let t = raw.scaled(target / norm);
            let adjoint = t.check_l1_contraction(1e-10).expect("Kraus certificate");
            let sampled = t.sample_l1_contraction(1000, random::derive_seed(MASTER, k), 1e-10);
            (adjoint.contraction, sampled.contraction, adjoint.norm)
        })
        .collect();
    let contradictions = results.iter().filter(|r| r.0 != r.1).count();
    let contractions = results.iter().filter(|r| r.0).count();
    outcome(
        contradictions == 0,
        format!(
            "T*(1) verdict vs 1000 sampled probes on 300 positive maps ({contractions} contractions): {contradictions} contradictions"
        ),
    )
}

fn criterion_9() -> Outcome {
    let params = AnalysisParams::default();
    let instances: Vec<SuperOp> = (0..100u64)
        .map(|k| {
            let mut rng = random::stream(MASTER ^ 9, k);
            let a = random_algebra(&mut rng, 2, 3);
            let leak = if k % 4 == 3 { 0.1 } else { 0.0 };
            let kraus = rng.random_range(1..=3);
            let seed = random::derive_seed(MASTER ^ 9, k);
            if k % 2 == 0 {
                gallery::random_positive_contraction(&a, seed, kraus, leak)
            } else {
                gallery::random_coupled_contraction(&a, seed, kraus, leak)
            }
            .expect("valid generator parameters")
        })
        .collect();
    let rows: Vec<Result<(f64, f64, bool), String>> = instances
        .par_iter()
        .map(|t| {
            let spectral = dynamics::rho_bar(t, RhoMethod::Spectral, &params).map_err(|e| e.to_string())?;
            let search = dynamics::rho_bar(t, RhoMethod::Search, &params).map_err(|e| e.to_string())?;
            let mixing = dynamics::classify_mixing(t, &params)
                .map_err(|e| e.to_string())?
                .verdict
                == MixingVerdict::Mixing;
            Ok((spectral.value, search.value, mixing))
        })
        .collect();
    let errors = rows.iter().filter(|r| r.is_err()).count();
    let ok: Vec<_> = rows.iter().flatten().collect();
    let worst_gap = ok.iter().map(|r| (r.0 - r.1).abs()).fold(0.0, f64::max);
    let zero_mismatch = ok.iter().filter(|r| (r.0 == 0.0) != r.2).count();
    let nonzero = ok.iter().filter(|r| r.0 > 0.0).count();

    let mut isometric = Vec::new();
    for (i, dims) in [vec![2], vec![3], vec![1, 2], vec![2, 2], vec![1, 1, 1]]
        .iter()
        .enumerate()
    {
        let weights: Vec<f64> = (0..dims.len()).map(|b| 0.5 + b as f64).collect();
        let a = Algebra::new(dims, &weights, false).unwrap();
        let u = random::unitary(&a, &mut random::stream(MASTER ^ 10, i as u64));
        isometric.push(SuperOp::identity(&a));
        isometric.push(gallery::jordan_automorphism(&u, false).unwrap());
        isometric.push(gallery::jordan_automorphism(&u, true).unwrap());
    }
    let quick = AnalysisParams {
        rho_samples: 64,
        ..AnalysisParams::default()
    };
    let iso: Vec<(f64, f64)> = isometric
        .par_iter()
        .map(|t| {
            (
                dynamics::rho_bar(t, RhoMethod::Spectral, &params).map_or(f64::NAN, |r| r.value),
                dynamics::rho_bar(t, RhoMethod::Search, &quick).map_or(f64::NAN, |r| r.value),
            )
        })
        .collect();
    let iso_worst = iso
        .iter()
        .map(|&(s, q)| (s - 1.0).abs().max((q - 1.0).abs()))
        .fold(0.0, f64::max);
    let iso_ok = iso
        .iter()
        .all(|&(s, q)| (s - 1.0).abs() <= 1e-6 && (q - 1.0).abs() <= 1e-6);
    outcome(
        errors == 0 && worst_gap <= 0.05 && zero_mismatch == 0 && iso_ok,
        format!(
            "100 random instances ({nonzero} with rho > 0): max spectral/search gap {worst_gap:.2e}, {zero_mismatch} zero/mixing mismatches, {errors} errors; {} isometries: max |rho - 1| = {iso_worst:.1e}",
            iso.len()
        ),
    )
}

const SUITE_SCENARIOS: &[(&str, &str)] = &[
    (
        "shift.toml",
        r#"
analyses = ["dichotomy", "spectrum", "smoothing_profile"]
[map.gallery]
name = "truncated_shift"
params = { n = 8 }
[[initial_elements]]
name = "e11"
matrix_unit = [0, 0, 0]
"#,
    ),
    (
        "depolarizing.toml",
        r#"
seed = 5
analyses = ["classify_mixing", "classify_completely_mixing", "dichotomy", "smoothing_profile"]
[algebra]
dims = [2, 1]
weights = [0.25, 0.5]
[map.gallery]
name = "depolarizing"
params = { p = 0.4 }
[[initial_elements]]
name = "y"
random_state = true
"#,
    ),
    (
        "coupled.toml",
        r#"
seed = 21
analyses = ["spectrum", "rho_bar", "classify_mixing", "classify_completely_mixing", "verify_ksn", "dichotomy"]
[algebra]
dims = [3, 2]
weights = [1, 0.5]
[map.gallery]
name = "random_positive_contraction"
params = { seed = 4, kraus_count = 2, leak = 0.0, coupled = true }
[[initial_elements]]
name = "y"
random_state = true
"#,
    ),
];

const SUITE_SWEEP: &str = r#"
prefix = "random"
[grid]
seed = { start = 1, end = 24 }
leak = [0.0, 0.1]
[scenario]
seed = 77
analyses = ["classify_mixing", "classify_completely_mixing", "dichotomy"]
[scenario.algebra]
dims = [2, 2]
weights = [0.5, 1]
[scenario.map.gallery]
name = "random_positive_contraction"
params = { coupled = true }
[[scenario.initial_elements]]
name = "y"
random_state = true
"#;

fn run_suite(dir: &Path, jobs: usize) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let inputs = dir.join("inputs");
    let outputs = dir.join("outputs");
    fs::create_dir_all(&inputs).map_err(|e| e.to_string())?;
    for (name, body) in SUITE_SCENARIOS {
        let path = inputs.join(name);
        fs::write(&path, body).map_err(|e| e.to_string())?;
        let (report, _) = run::run_scenario(&path, &outputs, &Overrides::default()).map_err(|e| e.to_string())?;
        if report.failed() {
            return Err(format!("{name} failed:\n{}", report.render()));
        }
    }
    let sweep_path = inputs.join("sweep.toml");
    fs::write(&sweep_path, SUITE_SWEEP).map_err(|e| e.to_string())?;
    sweep::sweep_file(&sweep_path, &outputs, &Overrides::default(), Some(jobs)).map_err(|e| e.to_string())?;
    let mut payloads = BTreeMap::new();
    for entry in fs::read_dir(&outputs).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            payloads.insert(name, fs::read(&path).map_err(|e| e.to_string())?);
        }
    }
    Ok(payloads)
}

fn criterion_10() -> Outcome {
    let first = tempfile::tempdir().expect("temp dir");
    let second = tempfile::tempdir().expect("temp dir");
    match (run_suite(first.path(), 1), run_suite(second.path(), 4)) {
        (Ok(a), Ok(b)) => {
            let identical = a == b;
            let bytes: usize = a.values().map(Vec::len).sum();
            outcome(
                identical && a.len() >= 8,
                format!(
                    "two suite runs (1 and 4 threads): {} CSV files, {bytes} bytes, byte-identical: {identical}",
                    a.len()
                ),
            )
        }
        (Err(e), _) | (_, Err(e)) => outcome(false, format!("suite run failed: {e}")),
    }
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let start = Instant::now();
    let suite = random_suite(500);
    let gallery_maps = gallery_suite();
    let criteria: Vec<(&str, Check)> = vec![
        ("trace-norm correctness", Box::new(criterion_1)),
        ("dual positivity equivalence", Box::new(criterion_2)),
        ("knapsack oracle equivalence", Box::new(criterion_3)),
        ("dichotomy totality", Box::new(|| criterion_4(&suite))),
        (
            "mixing implies completely mixing",
            Box::new(|| criterion_5(&suite, &gallery_maps)),
        ),
        ("truncated-shift family", Box::new(criterion_6)),
        ("Jordan automorphism equality", Box::new(criterion_7)),
        ("contraction characterization", Box::new(criterion_8)),
        ("rho-bar estimator coherence", Box::new(criterion_9)),
        ("determinism", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let o = check();
        failed += (!o.pass) as usize;
        println!(
            "criterion {:>2} {} {name}: {} [{:.2?}]",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t0.elapsed()
        );
    }
    println!(
        "acceptance: {}/{} criteria passed in {:.2?}",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
