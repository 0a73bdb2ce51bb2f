//! Executes a scenario and renders its report and CSV exports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use tracemix::dynamics::{self, DichotomyVerdict, MixingVerdict, RhoMethod, SmoothingProfile};
use tracemix::export::{self, float};
use tracemix::spectrum::Spectrum;
use tracemix::superop::{FixedPoint, Trajectory};
use tracemix::{Element, Error};

use crate::scenario::{
    format_complex, resolved_tolerances, AnalysisKind, AnalysisTable, Real, Resolved, ScenarioSpec, Seed,
    DEFAULT_HERMITIAN_TOL,
};
use crate::RunError;

/// Default smoothing horizon.
pub const DEFAULT_SMOOTHING_STEPS: usize = 32;

/// Command-line overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tolerances: Vec<(String, f64)>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut ScenarioSpec) {
        if let Some(s) = self.seed {
            spec.seed = Some(Seed(s));
        }
        for (k, v) in &self.tolerances {
            spec.tolerances.insert(k.clone(), Real(*v));
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisRecord {
    pub kind: AnalysisKind,
    /// `None` on success, otherwise the error.
    pub error: Option<Error>,
    pub fields: Vec<(String, String)>,
    pub elapsed: Duration,
}

/// Key numbers collected for sweeps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub mixing: Option<bool>,
    pub completely_mixing: Option<bool>,
    pub dichotomy: Option<DichotomyVerdict>,
    pub alpha: Option<f64>,
    pub rho_bar: Option<f64>,
    pub escape_step: Option<usize>,
    pub peripheral_overlap: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct Exports {
    pub trajectory: Option<Trajectory>,
    pub spectrum: Option<Spectrum>,
    pub smoothing: Option<SmoothingProfile>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    /// Canonical scenario text with resolved seed and tolerances.
    pub echo: String,
    pub seed: u64,
    pub records: Vec<AnalysisRecord>,
    pub metrics: Metrics,
    pub exports: Exports,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn failed(&self) -> bool {
        self.records.iter().any(|r| r.error.is_some())
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed() {
            3
        } else {
            0
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tracemix {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "seed: {}", self.seed);
        let _ = writeln!(out, "status: {}", if self.failed() { "analysis_failed" } else { "ok" });
        let _ = writeln!(out, "\n== scenario ==\n{}", self.echo.trim_end());
        for (k, r) in self.records.iter().enumerate() {
            let _ = writeln!(out, "\n== analysis {}: {} ==", k + 1, r.kind.name());
            match &r.error {
                None => {
                    let _ = writeln!(out, "status: ok");
                }
                Some(e) => {
                    let _ = writeln!(out, "status: failed\nerror: {}\nmessage: {e}", e.kind());
                }
            }
            for (key, value) in &r.fields {
                let _ = writeln!(out, "{key}: {value}");
            }
            let _ = writeln!(out, "elapsed_ms: {:.3}", r.elapsed.as_secs_f64() * 1e3);
        }
        let _ = writeln!(
            out,
            "\n== total ==\nelapsed_ms: {:.3}",
            self.elapsed.as_secs_f64() * 1e3
        );
        out
    }

    pub fn trajectory_csv(&self) -> Option<String> {
        self.exports
            .trajectory
            .as_ref()
            .map(|t| csv(|w| export::write_trajectory(w, t)))
    }

    pub fn spectrum_csv(&self) -> Option<String> {
        self.exports
            .spectrum
            .as_ref()
            .map(|s| csv(|w| export::write_spectrum(w, s)))
    }

    pub fn smoothing_csv(&self) -> Option<String> {
        self.exports
            .smoothing
            .as_ref()
            .map(|s| csv(|w| export::write_smoothing(w, s)))
    }

    /// Writes `<prefix>.report.txt` and the CSV exports present.
    pub fn write_files(&self, out_dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, RunError> {
        fs::create_dir_all(out_dir)?;
        let mut written = Vec::new();
        let mut put = |suffix: &str, body: &str| -> Result<(), RunError> {
            let path = out_dir.join(format!("{prefix}.{suffix}"));
            fs::write(&path, body)?;
            written.push(path);
            Ok(())
        };
        put("report.txt", &self.render())?;
        if let Some(body) = self.trajectory_csv() {
            put("trajectory.csv", &body)?;
        }
        if let Some(body) = self.smoothing_csv() {
            put("smoothing.csv", &body)?;
        }
        if let Some(body) = self.spectrum_csv() {
            put("spectrum.csv", &body)?;
        }
        Ok(written)
    }
}

fn csv(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> String {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is ASCII")
}

pub fn format_element(x: &Element) -> String {
    x.blocks()
        .iter()
        .map(|m| {
            let rows: Vec<String> = (0..m.nrows())
                .map(|i| {
                    let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
                    format!("[{}]", row.join(", "))
                })
                .collect();
            format!("[{}]", rows.join(", "))
        })
        .collect::<Vec<_>>()
        .join(" (+) ")
}

fn fixed_point_fields(fields: &mut Vec<(String, String)>, fp: &FixedPoint) {
    fields.push(("fixed_point".into(), format_element(&fp.element)));
    fields.push(("fixed_point_source".into(), format!("{:?}", fp.source).to_lowercase()));
    fields.push(("fixed_point_residual".into(), float(fp.residual)));
    fields.push(("fixed_point_min_eigenvalue".into(), float(fp.min_eigenvalue)));
    fields.push(("cesaro_residual".into(), float(fp.cesaro_residual)));
    fields.push(("cesaro_gap".into(), float(fp.cesaro_gap)));
}

fn opt_bool(v: Option<bool>) -> String {
    v.map_or_else(|| "not_evaluated".into(), |b| b.to_string())
}

struct Runner<'a> {
    spec: &'a ScenarioSpec,
    resolved: &'a Resolved,
    metrics: Metrics,
    exports: Exports,
}

impl Runner<'_> {
    fn run(&mut self, t: &AnalysisTable, fields: &mut Vec<(String, String)>) -> Result<(), Error> {
        let map = &self.resolved.map;
        let params = &self.resolved.params;
        match t.kind {
            AnalysisKind::ClassifyMixing => {
                let r = dynamics::classify_mixing(map, params)?;
                let mixing = r.verdict == MixingVerdict::Mixing;
                fields.push(("verdict".into(), if mixing { "mixing" } else { "not_mixing" }.into()));
                fields.push(("peripheral_overlap".into(), float(r.peripheral_overlap)));
                fields.push(("spectral_radius".into(), float(r.spectrum.spectral_radius)));
                match &r.fixed_point {
                    Some(fp) => fixed_point_fields(fields, fp),
                    None => fields.push(("fixed_point".into(), "absent".into())),
                }
                if let Some(w) = &r.witness {
                    fields.push(("witness".into(), format_element(w)));
                }
                if let Some(tr) = &r.witness_trajectory {
                    fields.push(("witness_final_norm".into(), float(tr.final_norm())));
                    self.exports.trajectory.get_or_insert_with(|| tr.clone());
                }
                self.exports.spectrum.get_or_insert(r.spectrum);
                self.metrics.mixing = Some(mixing);
                self.metrics.peripheral_overlap = Some(r.peripheral_overlap);
            }
            AnalysisKind::ClassifyCompletelyMixing => {
                let r = dynamics::classify_completely_mixing(map, params)?;
                fields.push((
                    "verdict".into(),
                    if r.completely_mixing {
                        "completely_mixing"
                    } else {
                        "not_completely_mixing"
                    }
                    .into(),
                ));
                fields.push(("rho_bar".into(), float(r.rho_bar)));
                if let Some(w) = &r.witness {
                    fields.push(("witness".into(), format_element(w)));
                }
                self.metrics.completely_mixing = Some(r.completely_mixing);
                self.metrics.rho_bar.get_or_insert(r.rho_bar);
            }
            AnalysisKind::RhoBar => {
                let method = t.method.map_or(RhoMethod::Spectral, Into::into);
                let r = dynamics::rho_bar(map, method, params)?;
                fields.push(("method".into(), format!("{method:?}").to_lowercase()));
                fields.push(("value".into(), float(r.value)));
                if let Some(w) = &r.witness {
                    fields.push(("witness".into(), format_element(w)));
                }
                self.metrics.rho_bar = Some(r.value);
            }
            AnalysisKind::SmoothingProfile => {
                let (name, x) = self.resolved.input(self.spec, t.input.as_deref());
                let min_w = self.resolved.algebra.min_weight();
                let deltas: Vec<f64> = match &t.deltas {
                    Some(d) => d.iter().map(|r| r.0).collect(),
                    None => [0.5, 1.0, 2.0, 4.0].iter().map(|k| k * min_w).collect(),
                };
                let n_max = t.n_max.unwrap_or(DEFAULT_SMOOTHING_STEPS);
                let profile = dynamics::smoothing_profile(map, &x, &deltas, n_max, params)?;
                fields.push(("input".into(), name));
                fields.push((
                    "deltas".into(),
                    deltas.iter().map(|&d| float(d)).collect::<Vec<_>>().join(", "),
                ));
                fields.push(("n_max".into(), n_max.to_string()));
                fields.push(("min_projection_trace".into(), float(profile.min_projection_trace)));
                let vacuous: Vec<String> = deltas
                    .iter()
                    .filter(|&&d| profile.is_vacuous(d))
                    .map(|&d| float(d))
                    .collect();
                fields.push(("vacuous_deltas".into(), vacuous.join(", ")));
                let last = profile.values.last().expect("n_max + 1 rows");
                fields.push((
                    "final_row".into(),
                    last.iter().map(|&s| float(s)).collect::<Vec<_>>().join(", "),
                ));
                self.exports.smoothing = Some(profile);
            }
            AnalysisKind::Dichotomy => {
                let (name, y) = self.resolved.input(self.spec, t.input.as_deref());
                fields.push(("input".into(), name));
                let r = match dynamics::dichotomy(map, &y, params) {
                    Ok(r) => r,
                    Err(e) => {
                        if let Error::DichotomyFailure { alpha } = e {
                            fields.push(("alpha".into(), float(alpha)));
                            self.metrics.alpha = Some(alpha);
                            let tr = map.iterate(&y, params.iteration);
                            fields.push(("trajectory_steps".into(), (tr.points.len() - 1).to_string()));
                            self.exports.trajectory = Some(tr);
                        }
                        return Err(e);
                    }
                };
                let verdict = match r.verdict {
                    DichotomyVerdict::Decay => "decay",
                    DichotomyVerdict::FixedPoint => "fixed_point",
                };
                let scale = r.trajectory.points[0].norm;
                let escape = r.trajectory.escape_step(params.decay_tol * scale);
                fields.push(("verdict".into(), verdict.into()));
                fields.push(("alpha".into(), float(r.alpha_estimate)));
                fields.push(("alpha_relative".into(), float(r.alpha_estimate / scale)));
                fields.push(("trajectory_steps".into(), (r.trajectory.points.len() - 1).to_string()));
                fields.push(("trajectory_converged".into(), r.trajectory.converged.to_string()));
                fields.push((
                    "escape_step".into(),
                    escape.map_or_else(|| "none".into(), |n| n.to_string()),
                ));
                fields.push((
                    "max_norm_increase".into(),
                    float(r.trajectory.max_norm_increase().max(0.0)),
                ));
                if let Some(fp) = &r.fixed_point {
                    fixed_point_fields(fields, fp);
                }
                if let Some(d) = r.pairing_defect {
                    fields.push(("pairing_defect".into(), float(d)));
                }
                fields.push(("smoothing_automatic".into(), r.smoothing_automatic.to_string()));
                fields.push(("singular_part".into(), "zero (finite dimension)".into()));
                self.metrics.dichotomy = Some(r.verdict);
                self.metrics.alpha = Some(r.alpha_estimate);
                self.metrics.escape_step = escape;
                self.exports.trajectory = Some(r.trajectory);
            }
            AnalysisKind::VerifyKsn => {
                let (name, z) = self.resolved.input(self.spec, t.input.as_deref());
                let r = dynamics::verify_ksn(map, &z, params)?;
                fields.push(("input".into(), name));
                fields.push(("positive_contraction".into(), r.positive_contraction.to_string()));
                fields.push(("domination".into(), opt_bool(r.domination)));
                if let Some(g) = r.domination_gap {
                    fields.push(("domination_gap".into(), float(g)));
                }
                fields.push(("no_positive_fixed_point".into(), opt_bool(r.no_positive_fixed_point)));
                fields.push(("converges".into(), opt_bool(r.converges)));
                if let Some(n) = r.final_norm {
                    fields.push(("final_norm".into(), float(n)));
                }
                if let Some((m, c)) = r.mixing {
                    fields.push(("mixing".into(), m.to_string()));
                    fields.push(("completely_mixing".into(), c.to_string()));
                }
                fields.push(("decay_confirmed".into(), opt_bool(r.decay_confirmed)));
                fields.push((
                    "conclusion".into(),
                    match r.conclusion_holds {
                        Some(true) => "holds".into(),
                        Some(false) => "violated".into(),
                        None => format!("not_applicable (failed: {})", r.failed.join(", ")),
                    },
                ));
            }
            AnalysisKind::Spectrum => {
                let s = map.spectrum(params.tol)?;
                fields.push(("spectral_radius".into(), float(s.spectral_radius)));
                fields.push(("eigenvalue_count".into(), s.eigenvalues.len().to_string()));
                fields.push(("peripheral_count".into(), s.peripheral.len().to_string()));
                fields.push(("peripheral_semisimple".into(), s.is_peripheral_semisimple().to_string()));
                fields.push(("fixed_space_dimension".into(), s.fixed_space_dimension().to_string()));
                for c in &s.clusters {
                    fields.push((
                        "eigenvalue".into(),
                        format!("{} x{}", format_complex(c.value), c.multiplicity),
                    ));
                }
                self.exports.spectrum = Some(s);
            }
        }
        Ok(())
    }
}

/// Runs every analysis in order. Validation failures are returned as
/// errors; analysis failures are recorded in the report.
pub fn execute(spec: &ScenarioSpec) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let mut resolved = spec.resolve()?;
    if !resolved.map.is_certified_positive() {
        // raw matrices: certify by sampling before any analysis
        match resolved
            .map
            .clone()
            .certify_positive(256, resolved.seed, resolved.params.positivity_tol)
        {
            Ok(m) => resolved.map = m,
            Err(check) => {
                let mut fields = vec![("positivity_probes".into(), check.probes.to_string())];
                if let Some((x, w)) = &check.violation {
                    fields.push(("violating_input".into(), format_element(x)));
                    fields.push(("violating_eigenvalue".into(), float(w.eigenvalue)));
                }
                let records = spec
                    .analyses
                    .iter()
                    .map(|a| AnalysisRecord {
                        kind: a.0.kind,
                        error: Some(Error::NotCertifiedPositive),
                        fields: fields.clone(),
                        elapsed: Duration::ZERO,
                    })
                    .collect();
                return Ok(report(
                    spec,
                    &resolved,
                    records,
                    Metrics::default(),
                    Exports::default(),
                    start,
                ));
            }
        }
    }
    let mut runner = Runner {
        spec,
        resolved: &resolved,
        metrics: Metrics::default(),
        exports: Exports::default(),
    };
    let mut records = Vec::with_capacity(spec.analyses.len());
    for a in &spec.analyses {
        let t0 = Instant::now();
        let mut fields = Vec::new();
        let error = runner.run(&a.0, &mut fields).err();
        records.push(AnalysisRecord {
            kind: a.0.kind,
            error,
            fields,
            elapsed: t0.elapsed(),
        });
    }
    let (metrics, exports) = (runner.metrics, runner.exports);
    Ok(report(spec, &resolved, records, metrics, exports, start))
}

fn report(
    spec: &ScenarioSpec,
    resolved: &Resolved,
    records: Vec<AnalysisRecord>,
    metrics: Metrics,
    exports: Exports,
    start: Instant,
) -> RunReport {
    let mut echo = spec.clone();
    echo.seed = Some(Seed(resolved.seed));
    let hermitian_tol = spec
        .tolerances
        .get("hermitian_tol")
        .map_or(DEFAULT_HERMITIAN_TOL, |r| r.0);
    echo.tolerances = resolved_tolerances(&resolved.params, hermitian_tol);
    RunReport {
        echo: echo.to_canonical(),
        seed: resolved.seed,
        records,
        metrics,
        exports,
        elapsed: start.elapsed(),
    }
}

/// Output prefix: the scenario's own, else the file stem.
pub fn output_prefix(spec: &ScenarioSpec, path: &Path) -> String {
    spec.outputs.prefix.clone().unwrap_or_else(|| {
        path.file_stem()
            .map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned())
    })
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<ScenarioSpec, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    let mut spec = ScenarioSpec::parse(&text).map_err(|e| match e {
        RunError::Parse(m) => RunError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })?;
    overrides.apply(&mut spec);
    Ok(spec)
}

/// Loads, runs and writes the outputs of one scenario file.
pub fn run_scenario(path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<(RunReport, Vec<PathBuf>), RunError> {
    let spec = load(path, overrides)?;
    let report = execute(&spec)?;
    let files = report.write_files(out_dir, &output_prefix(&spec, path))?;
    Ok((report, files))
}
