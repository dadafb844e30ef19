// SPDX-License-Identifier: Apache-2.0

//! Run orchestration behind the command-line tool: JSON configs, initial
//! data, incremental outputs and the replayed invariant checks.
//!
//! Relative paths inside a config resolve against the config file's directory.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsOptions, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::evolution_curve::{self, CurveState};
use crate::evolution_graph::{self, GraphState, SchemeParams};
use crate::geometry::{self, GraphInterface, ParamCurve};
use crate::ode::IntegratorParams;
use crate::par;
use crate::quadrature::LogCellVariant;
use crate::snapshot::{self, DiagnosticsWriter};
use crate::trajectory::{Snapshot, Trajectory};
use crate::turning::{self, TurningFamilyParams};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARTIAL: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Slack on the energy monotonicity check.
pub const ENERGY_SLACK: f64 = 1e-8;
/// Bound on symmetry errors for runs that start symmetric.
pub const SYMMETRY_TOL: f64 = 1e-8;
/// Initial symmetry error below which a run counts as symmetric.
pub const SYMMETRIC_START: f64 = 1e-12;
/// Slack on `max{M, m} ≥ √E / (2√π)`.
pub const HEIGHT_BOUND_SLACK: f64 = 1e-8;
/// Relative tolerance between `δ` and the centred `dE/dt`.
pub const DELTA_REL_TOL: f64 = 0.05;
/// Smallest `|dE/dt|` at which the `δ` comparison is made.
pub const DELTA_MIN_RATE: f64 = 1e-6;

/// Third branch of the polygonal preset on `(π − 1, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F1Reading {
    /// `π − α`, continuous at both junctions.
    #[default]
    Corrected,
    /// `−α − π`.
    Printed,
}

/// Sign on the second half-period of the cubic preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum F2Reading {
    /// `sin³ α` throughout.
    #[default]
    Odd,
    /// `−sin³ α` on `(π, 2π]`, i.e. `|sin α|³`.
    Printed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    PresetF1 {
        #[serde(default)]
        f1_reading: F1Reading,
    },
    PresetF2 {
        #[serde(default)]
        f2_reading: F2Reading,
    },
    /// `h = Σ a sin(kα)` from `[k, a]` pairs.
    Fourier { coefficients: Vec<Vec<f64>> },
    SnapshotFile { path: PathBuf },
    TurningFamily { params: TurningFamilyParams },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    #[default]
    Graph,
    Curve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    Times(Vec<f64>),
    /// Every `dt` from `t = 0` through `t_end`.
    Dt(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub diagnostics_csv: PathBuf,
    #[serde(default)]
    pub snapshots_dir: Option<PathBuf>,
    /// Write a snapshot every this many samples (and at the last one); 0 disables.
    #[serde(default)]
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub initial: InitialData,
    pub formulation: Formulation,
    pub m: usize,
    pub viscosity: f64,
    /// `(ρ⁻ − ρ⁺)/(8π)`; curve runs use `ρ⁻ − ρ⁺ = 8π · sign_factor`.
    pub sign_factor: f64,
    pub singular_cell_variant: LogCellVariant,
    #[serde(default = "default_true")]
    pub log_subtraction: bool,
    pub integrator: IntegratorParams,
    pub samples: Sampling,
    pub outputs: Outputs,
    #[serde(default)]
    pub diagnostics: DiagnosticsOptions,
    /// Worker count; `Some(1)` runs everything on one thread.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_true() -> bool {
    true
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config and resolves its relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => config_err(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.outputs.diagnostics_csv);
        if let Some(dir) = self.outputs.snapshots_dir.as_mut() {
            fix(dir);
        }
        if let InitialData::SnapshotFile { path } = &mut self.initial {
            fix(path);
        }
    }

    pub fn scheme(&self) -> SchemeParams {
        SchemeParams {
            sign_factor: self.sign_factor,
            viscosity: self.viscosity,
            log_cell: self.singular_cell_variant,
            log_subtraction: self.log_subtraction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let wrap = |e: Error| match e {
            Error::Config(_) => e,
            other => config_err(other.to_string()),
        };
        geometry::check_grid(self.m).map_err(wrap)?;
        self.scheme().validate().map_err(wrap)?;
        self.integrator.validate().map_err(wrap)?;
        self.diagnostics.validate().map_err(wrap)?;
        if matches!(self.initial, InitialData::TurningFamily { .. })
            && self.formulation != Formulation::Curve
        {
            return Err(config_err("turning_family needs the curve formulation"));
        }
        if let InitialData::Fourier { coefficients } = &self.initial {
            fourier_modes(coefficients)?;
        }
        if self.threads == Some(0) {
            return Err(config_err("threads must be at least 1"));
        }
        self.sample_times()?;
        Ok(())
    }

    pub fn sample_times(&self) -> Result<Vec<f64>> {
        let t_end = self.integrator.t_end;
        let times = match &self.samples {
            Sampling::Times(t) => t.clone(),
            Sampling::Dt(dt) => {
                if !(dt.is_finite() && *dt > 0.0) {
                    return Err(config_err(format!("sample dt must be positive, got {dt}")));
                }
                let n = (t_end / dt * (1.0 + 1e-12)).floor() as usize;
                (0..=n).map(|k| (k as f64 * dt).min(t_end)).collect()
            }
        };
        if times.is_empty() {
            return Err(config_err("no sample times"));
        }
        let mut prev = 0.0;
        for &s in &times {
            if !s.is_finite() || s < prev || s > t_end {
                return Err(config_err(format!(
                    "sample time {s} outside [0, {t_end}] or out of order"
                )));
            }
            prev = s;
        }
        Ok(times)
    }
}

fn fourier_modes(coefficients: &[Vec<f64>]) -> Result<Vec<(u32, f64)>> {
    coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| match c.as_slice() {
            [k, a] if k.fract() == 0.0 && *k >= 1.0 && *k <= 1e6 && a.is_finite() => {
                Ok((*k as u32, *a))
            }
            _ => Err(config_err(format!(
                "fourier coefficient {i} must be [k, a] with integer k >= 1 and finite a, got {c:?}"
            ))),
        })
        .collect()
}

/// Polygonal preset: `α` on `[0, 1]`, `1` on `(1, π − 1]`, third branch per
/// `reading`, extended oddly.
pub fn preset_f1(alpha: f64, reading: F1Reading) -> f64 {
    let a = alpha.abs();
    let v = if a <= 1.0 {
        a
    } else if a <= PI - 1.0 {
        1.0
    } else {
        match reading {
            F1Reading::Corrected => PI - a,
            F1Reading::Printed => -a - PI,
        }
    };
    alpha.signum() * v
}

/// Cubic preset on `(0, 2π]` shifted to the `[−π, π)` grid.
pub fn preset_f2(alpha: f64, reading: F2Reading) -> f64 {
    let x = if alpha <= 0.0 { alpha + 2.0 * PI } else { alpha };
    let s = x.sin().powi(3);
    match reading {
        F2Reading::Odd => s,
        F2Reading::Printed if x > PI => -s,
        F2Reading::Printed => s,
    }
}

/// Initial state of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Graph(GraphState),
    Curve(CurveState),
}

pub fn build_initial(config: &RunConfig) -> Result<InitialState> {
    let m = config.m;
    let graph = |f: &dyn Fn(f64) -> f64| GraphInterface::from_fn(m, f);
    let snapshot = match &config.initial {
        InitialData::PresetF1 { f1_reading } => {
            Snapshot::Graph(graph(&|a| preset_f1(a, *f1_reading))?)
        }
        InitialData::PresetF2 { f2_reading } => {
            Snapshot::Graph(graph(&|a| preset_f2(a, *f2_reading))?)
        }
        InitialData::Fourier { coefficients } => {
            let modes = fourier_modes(coefficients)?;
            Snapshot::Graph(graph(&|a| {
                modes.iter().map(|(k, c)| c * (*k as f64 * a).sin()).sum()
            })?)
        }
        InitialData::SnapshotFile { path } => {
            let s = snapshot::read_snapshot(path)?;
            if s.m() != m {
                return Err(config_err(format!(
                    "{} has {} nodes but the config asks for m = {m}",
                    path.display(),
                    s.m()
                )));
            }
            s
        }
        InitialData::TurningFamily { params } => {
            Snapshot::Curve(turning::build_turning_family(*params, m)?)
        }
    };
    Ok(match (config.formulation, snapshot) {
        (Formulation::Graph, Snapshot::Graph(interface)) => {
            InitialState::Graph(GraphState { t: 0.0, interface })
        }
        (Formulation::Graph, Snapshot::Curve(_)) => {
            return Err(config_err("a curve snapshot needs the curve formulation"))
        }
        (Formulation::Curve, s) => {
            let curve = match s {
                Snapshot::Graph(g) => g.to_curve(),
                Snapshot::Curve(c) => c,
            };
            InitialState::Curve(CurveState {
                t: 0.0,
                curve,
                delta_rho: 8.0 * PI * config.sign_factor,
            })
        }
    })
}

/// What `run` reached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStatus {
    pub complete: bool,
    pub samples: usize,
    pub t_reached: Option<f64>,
    /// Error that stopped the run early.
    pub failure: Option<String>,
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        if self.complete {
            EXIT_OK
        } else {
            EXIT_PARTIAL
        }
    }
}

/// Path of the status record written next to the diagnostics table.
pub fn status_path(config: &RunConfig) -> PathBuf {
    config.outputs.diagnostics_csv.with_extension("status.json")
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

/// Executes a run, streaming diagnostics rows and snapshots as samples are
/// reached. Runtime breakdowns end the run early with `complete = false`;
/// configuration and I/O problems are returned as errors.
pub fn run(config: &RunConfig) -> Result<RunStatus> {
    config.validate()?;
    let times = config.sample_times()?;
    let initial = build_initial(config)?;
    let outputs = &config.outputs;
    ensure_parent(&outputs.diagnostics_csv)?;
    if let Some(dir) = &outputs.snapshots_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut writer = DiagnosticsWriter::create(&outputs.diagnostics_csv)?;
    let last = times.len() - 1;
    let mut index = 0usize;
    let mut io_error = None;
    let mut on_sample = |s: &crate::trajectory::Sample| -> Result<()> {
        let res = (|| -> Result<()> {
            writer.write(&s.record)?;
            if let Some(dir) = &outputs.snapshots_dir {
                let every = outputs.snapshot_every;
                if every > 0 && (index % every == 0 || index == last) {
                    snapshot::write_snapshot(&dir.join(format!("snap_{index:05}.csv")), &s.snapshot)?;
                }
            }
            Ok(())
        })();
        index += 1;
        if let Err(e) = &res {
            io_error = Some(e.to_string());
        }
        res
    };
    let traj: Trajectory = par::with_threads(config.threads, || match &initial {
        InitialState::Graph(st) => evolution_graph::evolve_with(
            st,
            &config.scheme(),
            &config.integrator,
            &times,
            &config.diagnostics,
            &mut on_sample,
        ),
        InitialState::Curve(st) => {
            evolution_curve::evolve_curve_with(st, &config.integrator, &times, &mut on_sample)
        }
    })?;
    if let Some(msg) = io_error {
        return Err(config_err(format!("output failed: {msg}")));
    }
    let status = RunStatus {
        complete: traj.is_complete(),
        samples: traj.samples.len(),
        t_reached: traj.last().map(|s| s.t),
        failure: traj.failure.as_ref().map(|e| e.to_string()),
    };
    let path = status_path(config);
    let json = serde_json::to_string_pretty(&status).expect("status serialises");
    snapshot::write_text(&path, &json)?;
    Ok(status)
}

/// One replayed invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Smallest distance to the tolerance boundary (negative when violated).
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_VERIFY
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<20} margin {:+.3e}  {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.margin,
                c.detail
            ));
        }
        out
    }
}

/// Replays the invariant suite on the diagnostics table a run wrote.
pub fn verify(config: &RunConfig) -> Result<VerifyReport> {
    let path = &config.outputs.diagnostics_csv;
    if !path.exists() {
        return Err(Error::InvalidInput(format!(
            "{}: no diagnostics table; run the config first",
            path.display()
        )));
    }
    let records = snapshot::read_diagnostics(path)?;
    if records.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no samples", path.display())));
    }
    Ok(verify_records(&records, config.sign_factor))
}

/// Invariant suite on a sequence of records; `sign_factor < 0` means the
/// energy must not decrease.
pub fn verify_records(records: &[DiagnosticsRecord], sign_factor: f64) -> VerifyReport {
    let mut checks = vec![energy_check(records, sign_factor)];
    checks.push(symmetry_check("central-symmetry", records, |r| r.central_sym_err));
    checks.push(symmetry_check("even-symmetry", records, |r| r.even_sym_err));
    checks.push(height_bound_check(records));
    checks.push(delta_check(records));
    VerifyReport { checks }
}

fn energy_check(records: &[DiagnosticsRecord], sign_factor: f64) -> Check {
    let orient = if sign_factor < 0.0 { 1.0 } else { -1.0 };
    let mut margin = f64::INFINITY;
    let mut at = 0.0;
    for w in records.windows(2) {
        let step = orient * (w[1].energy - w[0].energy) + ENERGY_SLACK;
        if step < margin {
            margin = step;
            at = w[1].t;
        }
    }
    if records.len() < 2 {
        margin = ENERGY_SLACK;
    }
    Check {
        name: "energy-monotone",
        passed: margin >= 0.0,
        margin,
        detail: format!(
            "E {} across {} samples (worst at t = {at})",
            if orient > 0.0 { "non-decreasing" } else { "non-increasing" },
            records.len()
        ),
    }
}

fn symmetry_check(
    name: &'static str,
    records: &[DiagnosticsRecord],
    get: impl Fn(&DiagnosticsRecord) -> Option<f64>,
) -> Check {
    let first = get(&records[0]);
    match first {
        Some(e0) if e0 <= SYMMETRIC_START => {
            let worst = records.iter().filter_map(&get).fold(0.0, f64::max);
            Check {
                name,
                passed: worst <= SYMMETRY_TOL,
                margin: SYMMETRY_TOL - worst,
                detail: format!("worst error {worst:.3e}"),
            }
        }
        _ => Check {
            name,
            passed: true,
            margin: 0.0,
            detail: "not applicable: initial data not symmetric".into(),
        },
    }
}

fn height_bound_check(records: &[DiagnosticsRecord]) -> Check {
    let mut margin = f64::INFINITY;
    for r in records {
        let bound = r.energy.max(0.0).sqrt() / (2.0 * PI.sqrt());
        margin = margin.min(r.max_height.max(r.min_height) - bound + HEIGHT_BOUND_SLACK);
    }
    Check {
        name: "height-lower-bound",
        passed: margin >= 0.0,
        margin,
        detail: "max{M, m} >= sqrt(E)/(2 sqrt(pi))".into(),
    }
}

fn delta_check(records: &[DiagnosticsRecord]) -> Check {
    let name = "delta-vs-dEdt";
    if records.iter().any(|r| r.delta.is_none()) || records.len() < 3 {
        return Check {
            name,
            passed: true,
            margin: 0.0,
            detail: "not applicable: no delta column".into(),
        };
    }
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let energies: Vec<f64> = records.iter().map(|r| r.energy).collect();
    let rates = match diagnostics::de_dt_fd(&times, &energies) {
        Ok(r) => r,
        Err(e) => {
            return Check {
                name,
                passed: false,
                margin: f64::NEG_INFINITY,
                detail: e.to_string(),
            }
        }
    };
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for k in 1..records.len() - 1 {
        let rate = rates[k];
        if rate.abs() < DELTA_MIN_RATE {
            continue;
        }
        let delta = records[k].delta.unwrap_or(0.0);
        worst = worst.max((delta - rate).abs() / rate.abs());
        used += 1;
    }
    Check {
        name,
        passed: worst <= DELTA_REL_TOL,
        margin: DELTA_REL_TOL - worst,
        detail: format!("worst relative gap {worst:.3e} over {used} interior samples"),
    }
}

/// Named presets for `preset-dump`.
pub const PRESET_NAMES: [&str; 6] = [
    "f1",
    "f1-printed",
    "f2",
    "f2-printed",
    "turning",
    "turning-even",
];

pub fn preset_snapshot(name: &str, m: usize) -> Result<Snapshot> {
    let graph = |f: &dyn Fn(f64) -> f64| GraphInterface::from_fn(m, f).map(Snapshot::Graph);
    match name {
        "f1" => graph(&|a| preset_f1(a, F1Reading::Corrected)),
        "f1-printed" => graph(&|a| preset_f1(a, F1Reading::Printed)),
        "f2" => graph(&|a| preset_f2(a, F2Reading::Odd)),
        "f2-printed" => graph(&|a| preset_f2(a, F2Reading::Printed)),
        "turning" => turning::build_turning_family(TurningFamilyParams::default(), m).map(Snapshot::Curve),
        "turning-even" => {
            turning::build_turning_family(TurningFamilyParams::even_default(), m).map(Snapshot::Curve)
        }
        other => Err(config_err(format!(
            "unknown preset {other:?}; expected one of {PRESET_NAMES:?}"
        ))),
    }
}

/// Maps a library error to the tool's exit status.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::NumericalBlowup { .. }
        | Error::StepFailure { .. }
        | Error::SelfIntersection { .. }
        | Error::DegenerateParametrization { .. } => EXIT_PARTIAL,
        _ => EXIT_CONFIG,
    }
}

/// Samples the initial curve of a config, for checks that need geometry
/// rather than the diagnostics table.
pub fn initial_curve(config: &RunConfig) -> Result<ParamCurve> {
    Ok(match build_initial(config)? {
        InitialState::Graph(g) => g.interface.to_curve(),
        InitialState::Curve(c) => c.curve,
    })
}
