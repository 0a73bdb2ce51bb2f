//! Parameter sweeps over gallery constructions.
//!
//! ```toml
//! prefix = "shift"
//! [grid]
//! n = { start = 2, end = 32 }
//! [scenario]
//! analyses = ["dichotomy"]
//! [scenario.map.gallery]
//! name = "truncated_shift"
//! ```
//!
//! Grid axes name gallery parameters; points are the cartesian product in
//! key order with the last key varying fastest. Point `k` runs with seed
//! `derive_seed(scenario seed, k)`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tracemix::dynamics::DichotomyVerdict;
use tracemix::export::float;
use tracemix::random::derive_seed;
use tracemix::Error;

use crate::run::{execute, Overrides, RunReport};
use crate::scenario::{MapSpec, ParamRepr, ScenarioSpec, Seed};
use crate::RunError;

/// Gallery parameter values set by one grid point.
pub type GridParams = Vec<(String, ParamRepr)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridAxis {
    /// Inclusive integer range.
    Range {
        start: i64,
        end: i64,
    },
    Values(Vec<ParamRepr>),
}

impl GridAxis {
    fn values(&self) -> Vec<ParamRepr> {
        match self {
            GridAxis::Range { start, end } => (*start..=*end).map(ParamRepr::Int).collect(),
            GridAxis::Values(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
    pub grid: BTreeMap<String, GridAxis>,
    pub scenario: ScenarioSpec,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<SweepSpec, RunError> {
        toml::from_str(text).map_err(|e| RunError::Parse(e.to_string()))
    }

    /// Every grid point as `(gallery params, scenario)`.
    pub fn points(&self) -> Result<Vec<(GridParams, ScenarioSpec)>, RunError> {
        let MapSpec::Gallery(_) = &self.scenario.map else {
            return Err(RunError::Validation("sweeps need a gallery map".into()));
        };
        if self.grid.is_empty() {
            return Err(RunError::Validation("sweep grid is empty".into()));
        }
        let axes: Vec<(String, Vec<ParamRepr>)> = self.grid.iter().map(|(k, a)| (k.clone(), a.values())).collect();
        if let Some((k, _)) = axes.iter().find(|(_, v)| v.is_empty()) {
            return Err(RunError::Validation(format!("grid axis `{k}` is empty")));
        }
        let mut combos: Vec<GridParams> = vec![Vec::new()];
        for (key, values) in &axes {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut c = prefix.clone();
                        c.push((key.clone(), v.clone()));
                        c
                    })
                })
                .collect();
        }
        let base_seed = self.scenario.seed.map_or(0, |s| s.0);
        Ok(combos
            .into_iter()
            .enumerate()
            .map(|(k, params)| {
                let mut spec = self.scenario.clone();
                if let MapSpec::Gallery(g) = &mut spec.map {
                    for (key, v) in &params {
                        g.params.insert(key.clone(), v.clone());
                    }
                }
                spec.seed = Some(Seed(derive_seed(base_seed, k as u64)));
                (params, spec)
            })
            .collect())
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub index: usize,
    pub params: GridParams,
    pub seed: u64,
    pub outcome: Result<RunReport, RunError>,
}

impl SweepPoint {
    /// Suite-invariant violations at this point.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match &self.outcome {
            Err(e) => out.push(e.to_string()),
            Ok(r) => {
                for rec in &r.records {
                    match &rec.error {
                        Some(e @ Error::DichotomyFailure { .. }) => out.push(format!("dichotomy totality: {e}")),
                        Some(e) => out.push(format!("{}: {}: {e}", rec.kind.name(), e.kind())),
                        None => {}
                    }
                }
                if let (Some(m), Some(c)) = (r.metrics.mixing, r.metrics.completely_mixing) {
                    if m != c {
                        out.push(format!("classifier coincidence: mixing = {m}, completely mixing = {c}"));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub axes: Vec<String>,
    pub points: Vec<SweepPoint>,
}

fn param_text(p: &ParamRepr) -> String {
    match p {
        ParamRepr::Bool(b) => b.to_string(),
        ParamRepr::Int(i) => i.to_string(),
        ParamRepr::Float(f) => float(*f),
    }
}

impl SweepReport {
    pub fn violations(&self) -> Vec<String> {
        self.points
            .iter()
            .flat_map(|p| {
                let label = self.label(p);
                p.violations().into_iter().map(move |v| format!("{label}: {v}"))
            })
            .collect()
    }

    fn label(&self, p: &SweepPoint) -> String {
        let params: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={}", param_text(v))).collect();
        format!("point {} ({})", p.index, params.join(", "))
    }

    /// `point, <axes>, seed, status, mixing, completely_mixing, dichotomy,
    /// alpha, rho_bar, escape_step, peripheral_overlap`.
    pub fn csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "point,{},run_seed,status,mixing,completely_mixing,dichotomy,alpha,rho_bar,escape_step,peripheral_overlap",
            self.axes.join(",")
        );
        for p in &self.points {
            let mut cells = vec![p.index.to_string()];
            cells.extend(p.params.iter().map(|(_, v)| param_text(v)));
            cells.push(p.seed.to_string());
            match &p.outcome {
                Err(e) => {
                    cells.push(format!("error_{}", e.exit_code()));
                    cells.extend(std::iter::repeat_n(String::new(), 7));
                }
                Ok(r) => {
                    let m = &r.metrics;
                    let b = |v: Option<bool>| v.map_or(String::new(), |b| b.to_string());
                    let f = |v: Option<f64>| v.map_or(String::new(), float);
                    cells.push(if r.failed() { "analysis_failed" } else { "ok" }.into());
                    cells.push(b(m.mixing));
                    cells.push(b(m.completely_mixing));
                    cells.push(match m.dichotomy {
                        Some(DichotomyVerdict::Decay) => "decay".into(),
                        Some(DichotomyVerdict::FixedPoint) => "fixed_point".into(),
                        None => String::new(),
                    });
                    cells.push(f(m.alpha));
                    cells.push(f(m.rho_bar));
                    cells.push(m.escape_step.map_or(String::new(), |n| n.to_string()));
                    cells.push(f(m.peripheral_overlap));
                }
            }
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Verdict counts and the violation list.
    pub fn summary(&self) -> String {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for p in &self.points {
            let mut bump = |k: &str| *counts.entry(k.to_string()).or_default() += 1;
            match &p.outcome {
                Err(_) => bump("invalid"),
                Ok(r) => {
                    if r.failed() {
                        bump("analysis_failed");
                    }
                    match r.metrics.mixing {
                        Some(true) => bump("mixing"),
                        Some(false) => bump("not_mixing"),
                        None => {}
                    }
                    match r.metrics.completely_mixing {
                        Some(true) => bump("completely_mixing"),
                        Some(false) => bump("not_completely_mixing"),
                        None => {}
                    }
                    match r.metrics.dichotomy {
                        Some(DichotomyVerdict::Decay) => bump("decay"),
                        Some(DichotomyVerdict::FixedPoint) => bump("fixed_point"),
                        None => {}
                    }
                }
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "tracemix {} sweep", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "points: {}", self.points.len());
        for (k, v) in &counts {
            let _ = writeln!(out, "{k}: {v}");
        }
        let violations = self.violations();
        let _ = writeln!(out, "violations: {}", violations.len());
        for v in violations {
            let _ = writeln!(out, "  {v}");
        }
        out
    }

    /// Writes `<prefix>.sweep.csv` and `<prefix>.report.txt`.
    pub fn write_files(&self, out_dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, RunError> {
        fs::create_dir_all(out_dir)?;
        let csv_path = out_dir.join(format!("{prefix}.sweep.csv"));
        let report_path = out_dir.join(format!("{prefix}.report.txt"));
        fs::write(&csv_path, self.csv())?;
        fs::write(&report_path, self.summary())?;
        Ok(vec![csv_path, report_path])
    }

    pub fn check(&self) -> Result<(), RunError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(RunError::SuiteInvariantViolation(v))
        }
    }
}

/// Runs every grid point, on `jobs` threads when given.
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<SweepReport, RunError> {
    let points = spec.points()?;
    let work = || {
        points
            .into_par_iter()
            .enumerate()
            .map(|(index, (params, scenario))| SweepPoint {
                index,
                params,
                seed: scenario.seed.map_or(0, |s| s.0),
                outcome: execute(&scenario),
            })
            .collect::<Vec<_>>()
    };
    let points = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| RunError::Io(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(SweepReport {
        axes: spec.grid.keys().cloned().collect(),
        points,
    })
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<SweepSpec, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    let mut spec = SweepSpec::parse(&text).map_err(|e| match e {
        RunError::Parse(m) => RunError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })?;
    overrides.apply(&mut spec.scenario);
    Ok(spec)
}

/// Loads and runs a sweep, writes its outputs, then checks the suite
/// invariants.
pub fn sweep_file(
    path: &Path,
    out_dir: &Path,
    overrides: &Overrides,
    jobs: Option<usize>,
) -> Result<(SweepReport, Vec<PathBuf>), RunError> {
    let spec = load(path, overrides)?;
    let report = run_sweep(&spec, jobs)?;
    let prefix = spec.prefix.clone().unwrap_or_else(|| {
        path.file_stem()
            .map_or_else(|| "sweep".into(), |s| s.to_string_lossy().into_owned())
    });
    let files = report.write_files(out_dir, &prefix)?;
    report.check()?;
    Ok((report, files))
}
