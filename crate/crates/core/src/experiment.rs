//! Experiment orchestration: data generation, runs, calibration and output.
//!
//! Seeds: generated run `m` draws component `j` (0 = b₀, 1 = q₀, 2 = f,
//! 3 = h) from `trial_seed(trial_seed(seed, m), j)`; run 0 is the configured
//! run and runs 1.. complete the calibration ensemble. Lemma trial `t` uses
//! `trial_seed(seed, t)`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DataSpec, ExperimentConfig, LemmaKind, Mode, RayConfig};
use crate::dynamics::{TqgDataSet, TqgState};
use crate::error::{Result, TqgError};
use crate::export::{
    write_json, write_lattice, write_radius_trace, write_region_map, write_trajectory, TrajectoryRow,
};
use crate::field::{random_gevrey_field_banded, FieldSnapshot, SpectralField, VectorSpectralField};
use crate::grid::SpectralGrid;
use crate::integrator::{integrate_ray, Trajectory};
use crate::lemmas::{
    lattice_sum, split_report, trial_seed, verify_algebraic, verify_convest, verify_veltovor, LemmaReport,
    DEFAULT_RADII,
};
use crate::norms::{estimate_radius, RadiusFit};
use crate::tracker::{bound_monitor, calibrate_c, calibrate_c_with, Calibration, MonitorReport, RunRecord};

/// A module error tagged with the orchestration step that raised it.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentError {
    pub operation: String,
    pub error: TqgError,
}

impl std::fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.operation, self.error)
    }
}

impl std::error::Error for ExperimentError {}

impl ExperimentError {
    pub fn new(operation: &str, error: TqgError) -> Self {
        Self {
            operation: operation.to_string(),
            error,
        }
    }

    pub fn is_configuration(&self) -> bool {
        self.error.is_configuration()
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            module: self.error.module().to_string(),
            operation: self.operation.clone(),
            message: self.error.to_string(),
        }
    }
}

/// Machine-readable error record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub module: String,
    pub operation: String,
    pub message: String,
}

pub trait Context<T> {
    fn op(self, operation: &str) -> std::result::Result<T, ExperimentError>;
}

impl<T> Context<T> for Result<T> {
    fn op(self, operation: &str) -> std::result::Result<T, ExperimentError> {
        self.map_err(|e| ExperimentError::new(operation, e))
    }
}

type Outcome<T> = std::result::Result<T, ExperimentError>;

/// What a successful experiment produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub files: Vec<PathBuf>,
    /// Monitor or lemma violations; nonfatal unless the caller is strict.
    pub violations: usize,
    pub c: Option<f64>,
}

/// Final state of a simulate run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub s: f64,
    pub theta: f64,
    pub b: FieldSnapshot,
    pub q: FieldSnapshot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusFitRecord {
    pub s: f64,
    /// None when the field has too few nonzero shells in range.
    pub b: Option<RadiusFit>,
    pub q: Option<RadiusFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusFits {
    pub shells: [f64; 2],
    pub fits: Vec<RadiusFitRecord>,
}

/// Seed of component `component` of generated run `member`.
pub fn component_seed(seed: u64, member: u64, component: u64) -> u64 {
    trial_seed(trial_seed(seed, member), component)
}

fn load_field(path: &Path, grid: &SpectralGrid) -> Result<SpectralField> {
    let snap: FieldSnapshot = crate::export::read_json(path)
        .map_err(|e| TqgError::Parse(format!("{}: {e}", path.display())))?;
    let field = SpectralField::from_snapshot(&snap)?;
    if field.grid().n() != grid.n() {
        return Err(TqgError::GridMismatch(grid.n(), field.grid().n()));
    }
    Ok(field)
}

/// Builds the data set of generated run `member`; file and steady data
/// ignore `member`.
pub fn build_data(config: &ExperimentConfig, member: u64) -> Result<TqgDataSet> {
    let grid = SpectralGrid::new(config.n)?;
    let phi0 = config
        .phi0
        .ok_or_else(|| TqgError::Config("missing required key `phi0`".into()))?;
    let spec = config
        .data
        .as_ref()
        .ok_or_else(|| TqgError::Config("missing required key `data`".into()))?;
    match spec {
        DataSpec::Generator {
            amplitude,
            forcing,
            bathymetry,
            phi_star,
            p,
            band,
        } => {
            let draw = |component: u64, amp: f64| {
                if amp == 0.0 {
                    return SpectralField::zeros(&grid);
                }
                let seed = component_seed(config.seed, member, component);
                random_gevrey_field_banded(&grid, seed, *phi_star, *p, amp, true, *band)
            };
            TqgDataSet::from_bathymetry(
                &draw(3, *bathymetry),
                draw(2, *forcing),
                draw(0, *amplitude),
                draw(1, *amplitude),
                phi0,
            )
        }
        DataSpec::Steady { mode, amplitude } => {
            let amp = num_complex::Complex64::new(*amplitude, 0.0);
            let q0 = SpectralField::from_modes(&grid, &[(*mode, amp)], true)?;
            TqgDataSet::new(
                VectorSpectralField::zeros(&grid),
                SpectralField::zeros(&grid),
                SpectralField::zeros(&grid),
                q0,
                phi0,
            )
        }
        DataSpec::Files { b0, q0, f, u_h, h } => {
            let b0 = load_field(b0, &grid)?;
            let q0 = load_field(q0, &grid)?;
            let f = match f {
                Some(p) => load_field(p, &grid)?,
                None => SpectralField::zeros(&grid),
            };
            match (u_h, h) {
                (_, Some(h)) => TqgDataSet::from_bathymetry(&load_field(h, &grid)?, f, b0, q0, phi0),
                (Some([x1, x2]), None) => {
                    let u = VectorSpectralField::new(load_field(x1, &grid)?, load_field(x2, &grid)?)?;
                    TqgDataSet::new(u, f, b0, q0, phi0)
                }
                (None, None) => TqgDataSet::new(VectorSpectralField::zeros(&grid), f, b0, q0, phi0),
            }
        }
    }
}

/// Integrates one ray, recording every step for the tracker.
pub fn run_ray(
    config: &ExperimentConfig,
    data: &TqgDataSet,
    ray: &RayConfig,
    theta: f64,
    run_id: &str,
) -> Outcome<(RunRecord, Trajectory)> {
    let spec = config.ray_spec(theta, ray).op("parse_config")?;
    let mut record = RunRecord::new(run_id, theta, data).op("radius_trace")?;
    let traj = integrate_ray(data, &spec, config.stride, |s, state: &TqgState| record.observe(s, state))
        .op("integrate_ray")?;
    Ok((record, traj))
}

fn failure(traj: &Trajectory) -> Option<ExperimentError> {
    traj.failure.clone().map(|e| ExperimentError::new("integrate_ray", e))
}

fn is_generated(config: &ExperimentConfig) -> bool {
    matches!(config.data, Some(DataSpec::Generator { .. }))
}

/// Calibrates c over the configured run plus `ensemble − 1` generated
/// companions; deterministic data calibrate on the single run.
fn calibrate_ensemble(config: &ExperimentConfig, ray: &RayConfig, first: &RunRecord) -> Outcome<Calibration> {
    if !is_generated(config) {
        return calibrate_c_with(std::slice::from_ref(first), 1).op("calibrate_c");
    }
    let others: Vec<RunRecord> = (1..config.ensemble as u64)
        .into_par_iter()
        .map(|m| {
            let data = build_data(config, m).op("build_data")?;
            let (record, traj) = run_ray(config, &data, ray, ray.theta, &format!("run{m}"))?;
            match failure(&traj) {
                Some(e) => Err(e),
                None => Ok(record),
            }
        })
        .collect::<Outcome<_>>()?;
    let mut runs = Vec::with_capacity(others.len() + 1);
    runs.push(first.clone());
    runs.extend(others);
    calibrate_c(&runs).op("calibrate_c")
}

fn emit_json<T: Serialize + ?Sized>(out: &Path, name: &str, value: &T, files: &mut Vec<PathBuf>) -> Outcome<()> {
    let path = out.join(name);
    write_json(&path, value).op("write_output")?;
    files.push(path);
    Ok(())
}

fn simulate(config: &ExperimentConfig, out: &Path) -> Outcome<Summary> {
    let ray = config.ray.clone().expect("checked by require");
    let data = build_data(config, 0).op("build_data")?;
    let (record, traj) = run_ray(config, &data, &ray, ray.theta, "run0")?;
    let mut files = Vec::new();
    let (c, calibration) = match config.c {
        Some(c) => (c, None),
        None => {
            if let Some(e) = failure(&traj) {
                return Err(e);
            }
            let cal = calibrate_ensemble(config, &ray, &record)?;
            (cal.c, Some(cal))
        }
    };
    let trace = record.trace(c, config.gamma).op("radius_trace")?;
    let monitor = bound_monitor(&trace);

    let last = record.len().saturating_sub(1);
    let rows = (0..record.len())
        .filter(|&n| n % config.stride == 0 || n == last)
        .map(|n| {
            let (b_h4, q_h3) = record.sobolev_sizes(n)?;
            let x = &trace.samples[n];
            Ok(TrajectoryRow {
                s: x.s,
                b_h4,
                q_h3,
                g: x.g,
                phi: x.phi,
            })
        })
        .collect::<Result<Vec<_>>>()
        .op("radius_trace")?;
    let path = out.join("trajectory.csv");
    write_trajectory(&path, &rows).op("write_output")?;
    files.push(path);
    let path = out.join("radius_trace.csv");
    write_radius_trace(&path, &trace).op("write_output")?;
    files.push(path);
    emit_json(out, "monitor.json", &monitor, &mut files)?;
    if let Some(cal) = &calibration {
        emit_json(out, "calibration.json", cal, &mut files)?;
    }
    let (s, state) = &traj.last;
    let final_state = StateSnapshot {
        s: *s,
        theta: ray.theta,
        b: state.b.to_snapshot(),
        q: state.q.to_snapshot(),
    };
    emit_json(out, "final_state.json", &final_state, &mut files)?;
    if let Some(e) = failure(&traj) {
        return Err(e);
    }
    Ok(Summary {
        files,
        violations: monitor.violations.len(),
        c: Some(c),
    })
}

fn fit_or_none(field: &SpectralField, lo: f64, hi: f64) -> Result<Option<RadiusFit>> {
    match estimate_radius(field, lo, hi) {
        Ok(fit) => Ok(Some(fit)),
        Err(TqgError::TooFewShells(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn radius(config: &ExperimentConfig, out: &Path) -> Outcome<Summary> {
    let ray = config.ray.clone().expect("checked by require");
    let data = build_data(config, 0).op("build_data")?;
    let (_, traj) = run_ray(config, &data, &ray, ray.theta, "run0")?;
    let (lo, hi) = config.shell_range();
    let fits = traj
        .snapshots
        .iter()
        .map(|(s, state)| {
            Ok(RadiusFitRecord {
                s: *s,
                b: fit_or_none(&state.b, lo, hi)?,
                q: fit_or_none(&state.q, lo, hi)?,
            })
        })
        .collect::<Result<Vec<_>>>()
        .op("estimate_radius")?;
    let mut files = Vec::new();
    emit_json(out, "radius_fits.json", &RadiusFits { shells: [lo, hi], fits }, &mut files)?;
    if let Some(e) = failure(&traj) {
        return Err(e);
    }
    Ok(Summary {
        files,
        ..Default::default()
    })
}

/// Largest sampled s before the first violation.
pub fn s_star(trace_s: &[f64], report: &MonitorReport) -> Option<f64> {
    let cutoff = report.first().map(|v| v.s).unwrap_or(f64::INFINITY);
    trace_s.iter().copied().take_while(|&s| s < cutoff).last()
}

fn sweep(config: &ExperimentConfig, out: &Path) -> Outcome<Summary> {
    let ray = config.ray.clone().expect("checked by require");
    let thetas = config.thetas.clone().expect("checked by require");
    let data = build_data(config, 0).op("build_data")?;
    let records: Vec<RunRecord> = thetas
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let (record, traj) = run_ray(config, &data, &ray, theta, &format!("theta{i}"))?;
            if let Some(e) = &traj.failure {
                log::warn!("sweep ray theta = {theta} ended early: {e}");
            }
            Ok(record)
        })
        .collect::<Outcome<_>>()?;
    let (c, calibration) = match config.c {
        Some(c) => (c, None),
        None => {
            let cal = calibrate_c_with(&records, 1).op("calibrate_c")?;
            (cal.c, Some(cal))
        }
    };
    let monitors: Vec<MonitorReport> = records
        .par_iter()
        .map(|r| r.monitor(c))
        .collect::<Result<_>>()
        .op("bound_monitor")?;
    let map: Vec<(f64, Option<f64>)> = records
        .iter()
        .zip(&monitors)
        .map(|(r, m)| (r.theta, s_star(&r.s, m)))
        .collect();
    let mut files = Vec::new();
    let path = out.join("region_map.csv");
    write_region_map(&path, &map).op("write_output")?;
    files.push(path);
    emit_json(out, "monitors.json", &monitors, &mut files)?;
    if let Some(cal) = &calibration {
        emit_json(out, "calibration.json", cal, &mut files)?;
    }
    Ok(Summary {
        files,
        violations: monitors.iter().map(|m| m.violations.len()).sum(),
        c: Some(c),
    })
}

/// ξ/η grid 0, step, 2·step, … up to `max` inclusive.
pub fn scan_grid(max: f64, step: f64) -> Vec<f64> {
    let count = (max / step + 1e-9).floor() as usize;
    (0..=count).map(|i| i as f64 * step).collect()
}

fn verify(config: &ExperimentConfig, out: &Path) -> Outcome<Summary> {
    let lemma = config.lemma.expect("checked by require");
    let op = format!("verify_{}", lemma.name());
    let grid = SpectralGrid::new(config.n).op("parse_config")?;
    let phi = config.phi.unwrap_or(0.0);
    let mut files = Vec::new();
    let report: LemmaReport = match lemma {
        LemmaKind::Convest => {
            verify_convest(&grid, config.r.unwrap_or(3.0), phi, config.trials, config.seed).op(&op)?
        }
        LemmaKind::Veltovor => {
            verify_veltovor(&grid, config.r.unwrap_or(1.0), config.trials, config.seed).op(&op)?
        }
        LemmaKind::Algebraic => {
            let xs = scan_grid(config.xi_max.unwrap_or(10.0), config.xi_step.unwrap_or(0.1));
            let phis = config.phi_grid.clone().unwrap_or_else(|| vec![0.0, 0.1, 0.5, 1.0]);
            verify_algebraic(config.r.unwrap_or(3.0), &phis, &xs, &xs).op(&op)?
        }
        LemmaKind::Lattice => {
            let radii = config.radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec());
            let table = lattice_sum(config.r.unwrap_or(3.0), &radii).op("lattice_sum")?;
            let path = out.join("lattice.csv");
            write_lattice(&path, &table).op("write_output")?;
            files.push(path);
            emit_json(out, "lattice_report.json", &table, &mut files)?;
            return Ok(Summary {
                files,
                ..Default::default()
            });
        }
        LemmaKind::Split => {
            let (report, records) =
                split_report(&grid, config.r.unwrap_or(3.0), phi, config.trials, config.seed).op(&op)?;
            emit_json(out, "split_trials.json", &records, &mut files)?;
            report
        }
    };
    emit_json(out, &format!("{}_report.json", lemma.name()), &report, &mut files)?;
    Ok(Summary {
        files,
        violations: report.violations,
        c: None,
    })
}

/// Runs `mode` (falling back to the config's own mode), writing outputs
/// under the configured output directory.
pub fn run_experiment(config: &ExperimentConfig, mode: Option<Mode>) -> Outcome<Summary> {
    let mode = match (mode, config.mode) {
        (Some(m), Some(c)) if m != c => {
            return Err(ExperimentError::new(
                "parse_config",
                TqgError::Config(format!("config mode {c} does not match command {m}")),
            ))
        }
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => {
            return Err(ExperimentError::new(
                "parse_config",
                TqgError::Config("missing required key `mode`".into()),
            ))
        }
    };
    config.validate().op("parse_config")?;
    config.require(mode).op("parse_config")?;
    let out = config.out_dir();
    std::fs::create_dir_all(&out)
        .map_err(TqgError::from)
        .op("write_output")?;
    log::info!("running {mode} into {}", out.display());
    match mode {
        Mode::Simulate => simulate(config, &out),
        Mode::Radius => radius(config, &out),
        Mode::Sweep => sweep(config, &out),
        Mode::Verify => verify(config, &out),
    }
}

/// Writes `error.json` into `out` (best effort: the directory may be the
/// cause of the failure).
pub fn write_error_report(out: &Path, error: &ExperimentError) -> Result<PathBuf> {
    std::fs::create_dir_all(out)?;
    let path = out.join("error.json");
    write_json(&path, &error.report())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config_str;
    use crate::export::{read_json, read_lattice, read_radius_trace, read_region_map, read_trajectory};
    use crate::lemmas::lattice_sum;
    use crate::tracker::{Violation, ViolationKind};

    fn config(text: &str, out: &Path) -> ExperimentConfig {
        let mut c = parse_config_str(text).unwrap();
        c.out = Some(out.to_path_buf());
        c
    }

    #[test]
    fn steady_simulate_has_constant_norms() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"mode": "simulate", "N": 16, "ray": {"theta": 0.4, "s_max": 0.05},
                "data": {"kind": "steady", "mode": [1, 2], "amplitude": 0.01},
                "phi0": 0.5, "stride": 5}"#,
            dir.path(),
        );
        let summary = run_experiment(&c, None).unwrap();
        assert_eq!(summary.violations, 0);
        let rows = read_trajectory(&dir.path().join("trajectory.csv")).unwrap();
        assert_eq!(rows.len(), 11);
        for r in &rows {
            assert!((r.b_h4).abs() < 1e-14);
            assert!((r.q_h3 - rows[0].q_h3).abs() <= 1e-12 * rows[0].q_h3);
        }
        let trace = read_radius_trace(&dir.path().join("radius_trace.csv")).unwrap();
        assert_eq!(trace.samples.len(), 51);
        let monitor: MonitorReport = read_json(&dir.path().join("monitor.json")).unwrap();
        assert!(monitor.passed());
        assert_eq!(summary.c, Some(2f64.powi(-4)));
        let cal: Calibration = read_json(&dir.path().join("calibration.json")).unwrap();
        assert_eq!(cal.runs, 1);
        let last: StateSnapshot = read_json(&dir.path().join("final_state.json")).unwrap();
        let q = SpectralField::from_snapshot(&last.q).unwrap();
        assert!((q.coeff((1, 2)).re - 0.01).abs() < 1e-12);
    }

    #[test]
    fn lattice_verify_matches_delegate() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(r#"{"lemma": "lattice", "r": 3, "radii": [20, 40, 80]}"#, dir.path());
        run_experiment(&c, Some(Mode::Verify)).unwrap();
        let rows = read_lattice(&dir.path().join("lattice.csv")).unwrap();
        assert_eq!(rows, lattice_sum(3.0, &[20.0, 40.0, 80.0]).unwrap().rows);
    }

    #[test]
    fn generated_data_uses_derived_seeds() {
        let c = parse_config_str(
            r#"{"N": 16, "data": {"kind": "generator", "amplitude": 1e-3, "forcing": 1e-4, "bathymetry": 1e-4},
                "phi0": 0.5, "seed": 3}"#,
        )
        .unwrap();
        let a = build_data(&c, 0).unwrap();
        let b = build_data(&c, 0).unwrap();
        let other = build_data(&c, 1).unwrap();
        assert_eq!(a.b0.coeffs(), b.b0.coeffs());
        assert_ne!(a.b0.coeffs(), a.q0.coeffs());
        assert_ne!(a.b0.coeffs(), other.b0.coeffs());
        assert!(a.b0.is_real() && a.f.is_real() && a.u_h.is_real());
        assert!(!a.u_h.is_zero());
    }

    #[test]
    fn files_data_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let grid = SpectralGrid::new(8).unwrap();
        let b = random_gevrey_field_banded(&grid, 1, 0.5, 2.0, 1e-2, true, None);
        let q = random_gevrey_field_banded(&grid, 2, 0.5, 2.0, 1e-2, true, None);
        write_json(&dir.path().join("b.json"), &b.to_snapshot()).unwrap();
        write_json(&dir.path().join("q.json"), &q.to_snapshot()).unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"N": 8, "phi0": 0.5, "data": {"kind": "files", "b0": "b.json", "q0": "q.json"}}"#,
        )
        .unwrap();
        let c = crate::config::parse_config(&path).unwrap();
        let data = build_data(&c, 0).unwrap();
        assert_eq!(data.b0.coeffs(), b.coeffs());
        assert_eq!(data.q0.coeffs(), q.coeffs());

        let c16 = ExperimentConfig { n: 16, ..c };
        assert!(matches!(build_data(&c16, 0), Err(TqgError::GridMismatch(16, 8))));
    }

    #[test]
    fn sweep_writes_region_map() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"mode": "sweep", "N": 16, "ray": {"theta": 0, "s_max": 0.02},
                "data": {"kind": "generator", "amplitude": 1e-3}, "phi0": 0.5,
                "thetas": [0.0, 0.5, 1.0], "c": 1.0}"#,
            dir.path(),
        );
        run_experiment(&c, Some(Mode::Sweep)).unwrap();
        let map = read_region_map(&dir.path().join("region_map.csv")).unwrap();
        assert_eq!(map.iter().map(|r| r.0).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        assert!(map.iter().all(|r| r.1 == Some(0.02)));
    }

    #[test]
    fn s_star_stops_before_first_violation() {
        let s = [0.0, 0.1, 0.2, 0.3];
        let mut report = MonitorReport {
            run_id: "x".into(),
            violations: vec![],
        };
        assert_eq!(s_star(&s, &report), Some(0.3));
        report.violations.push(Violation {
            s: 0.2,
            kind: ViolationKind::Region,
            lhs: 2.0,
            rhs: 1.0,
        });
        assert_eq!(s_star(&s, &report), Some(0.1));
        report.violations[0].s = 0.0;
        assert_eq!(s_star(&s, &report), None);
    }

    #[test]
    fn mode_conflicts_and_missing_keys() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(r#"{"mode": "verify", "lemma": "lattice"}"#, dir.path());
        let e = run_experiment(&c, Some(Mode::Simulate)).unwrap_err();
        assert!(e.is_configuration());
        let c = config(r#"{"phi0": 1}"#, dir.path());
        let e = run_experiment(&c, Some(Mode::Radius)).unwrap_err();
        assert_eq!(e.report().operation, "parse_config");
        assert_eq!(e.report().module, "cli_io");
    }

    #[test]
    fn scan_grid_inclusive() {
        let g = scan_grid(10.0, 0.1);
        assert_eq!(g.len(), 101);
        assert_eq!(g[100], 10.0);
    }

    #[test]
    fn radius_mode_fits_snapshots() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(
            r#"{"mode": "radius", "N": 32, "ray": {"theta": 0, "s_max": 0},
                "data": {"kind": "generator", "amplitude": 1e-3, "phi_star": 0.5, "p": 1.5}, "phi0": 0.5}"#,
            dir.path(),
        );
        run_experiment(&c, None).unwrap();
        let fits: RadiusFits = read_json(&dir.path().join("radius_fits.json")).unwrap();
        assert_eq!(fits.shells, [1.0, 15.0]);
        assert_eq!(fits.fits.len(), 1);
        let b = fits.fits[0].b.unwrap();
        assert!((b.phi_est - 0.5).abs() < 0.05, "{b:?}");
    }
}
