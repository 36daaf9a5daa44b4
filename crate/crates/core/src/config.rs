//! Experiment configuration: a strict JSON document, validated on load.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TqgError};
use crate::grid::SpectralGrid;
use crate::integrator::RaySpec;

pub const DEFAULT_N: usize = 64;
pub const DEFAULT_DS: f64 = 1e-3;
pub const DEFAULT_STRIDE: usize = 10;
pub const DEFAULT_ENSEMBLE: usize = 5;
pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Verify,
    Radius,
    Sweep,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Verify => "verify",
            Mode::Radius => "radius",
            Mode::Sweep => "sweep",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaKind {
    Convest,
    Veltovor,
    Algebraic,
    Lattice,
    Split,
}

impl LemmaKind {
    pub fn name(self) -> &'static str {
        match self {
            LemmaKind::Convest => "convest",
            LemmaKind::Veltovor => "veltovor",
            LemmaKind::Algebraic => "algebraic",
            LemmaKind::Lattice => "lattice",
            LemmaKind::Split => "split",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayConfig {
    pub theta: f64,
    pub s_max: f64,
    #[serde(default = "default_ds")]
    pub ds: f64,
}

/// Initial data and forcing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DataSpec {
    /// Random real Gevrey fields; b₀ and q₀ at `amplitude`, f and h at their
    /// own amplitudes (zero by default).
    Generator {
        amplitude: f64,
        #[serde(default)]
        forcing: f64,
        #[serde(default)]
        bathymetry: f64,
        #[serde(default = "default_phi_star")]
        phi_star: f64,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default)]
        band: Option<i64>,
    },
    /// b₀ = 0, f = 0, u_h = 0, q₀ a single real mode pair.
    Steady {
        mode: (i64, i64),
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// Field snapshots on disk; paths are relative to the config file.
    Files {
        b0: PathBuf,
        q0: PathBuf,
        #[serde(default)]
        f: Option<PathBuf>,
        #[serde(default)]
        u_h: Option<[PathBuf; 2]>,
        #[serde(default)]
        h: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub ray: Option<RayConfig>,
    #[serde(default)]
    pub data: Option<DataSpec>,
    #[serde(default)]
    pub phi0: Option<f64>,
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Runs used to calibrate c when it is absent.
    #[serde(default = "default_ensemble")]
    pub ensemble: usize,
    /// Emit the Γ column in the radius trace.
    #[serde(default)]
    pub gamma: bool,
    /// Shell range [min, max] for radius fits; defaults to [1, N/2 − 1].
    #[serde(default)]
    pub shells: Option<[f64; 2]>,
    /// θ values for sweeps.
    #[serde(default)]
    pub thetas: Option<Vec<f64>>,
    #[serde(default)]
    pub lemma: Option<LemmaKind>,
    #[serde(default)]
    pub r: Option<f64>,
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    /// Algebraic scan: φ values, ξ/η upper limit and step.
    #[serde(default)]
    pub phi_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub xi_max: Option<f64>,
    #[serde(default)]
    pub xi_step: Option<f64>,
}

fn default_n() -> usize {
    DEFAULT_N
}
fn default_ds() -> f64 {
    DEFAULT_DS
}
fn default_stride() -> usize {
    DEFAULT_STRIDE
}
fn default_ensemble() -> usize {
    DEFAULT_ENSEMBLE
}
fn default_trials() -> usize {
    DEFAULT_TRIALS
}
fn default_phi_star() -> f64 {
    1.0
}
fn default_p() -> f64 {
    2.0
}
fn default_amplitude() -> f64 {
    1.0
}

fn config_err(msg: impl Into<String>) -> TqgError {
    TqgError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be > 0, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be >= 0, got {v}")))
    }
}

/// Reads, parses and validates a config. Relative data paths are resolved
/// against the config file's directory.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| TqgError::Io(format!("{}: {e}", path.display())))?;
    let mut config = parse_config_str(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    config.resolve_paths(base);
    config.validate()?;
    Ok(config)
}

/// Parses without touching the filesystem; paths stay as written.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| TqgError::Parse(format!("malformed JSON: {e}")))?;
    if !value.is_object() {
        return Err(TqgError::Parse("config must be a JSON object".into()));
    }
    serde_json::from_value(value).map_err(|e| config_err(e.to_string()))
}

impl ExperimentConfig {
    fn resolve_paths(&mut self, base: &Path) {
        if let Some(DataSpec::Files { b0, q0, f, u_h, h }) = &mut self.data {
            let join = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            };
            join(b0);
            join(q0);
            f.iter_mut().for_each(join);
            h.iter_mut().for_each(join);
            if let Some(pair) = u_h {
                pair.iter_mut().for_each(join);
            }
        }
    }

    /// Range checks and input-file existence; mode-specific required keys
    /// are checked by [`ExperimentConfig::require`].
    pub fn validate(&self) -> Result<()> {
        SpectralGrid::new(self.n)?;
        if self.stride == 0 {
            return Err(config_err("stride must be >= 1"));
        }
        if self.ensemble == 0 {
            return Err(config_err("ensemble must be >= 1"));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be >= 1"));
        }
        if let Some(ray) = &self.ray {
            self.ray_spec(ray.theta, ray)?;
        }
        if let Some(phi0) = self.phi0 {
            positive("phi0", phi0)?;
        }
        if let Some(c) = self.c {
            positive("c", c)?;
        }
        if let Some(phi) = self.phi {
            non_negative("phi", phi)?;
        }
        if let Some(r) = self.r {
            non_negative("r", r)?;
        }
        if let Some([lo, hi]) = self.shells {
            non_negative("shells[0]", lo)?;
            if !(hi > lo && hi.is_finite()) {
                return Err(config_err(format!("shells must satisfy min < max, got [{lo}, {hi}]")));
            }
        }
        if let Some(thetas) = &self.thetas {
            if thetas.is_empty() {
                return Err(config_err("thetas must not be empty"));
            }
            for &t in thetas {
                if !(t.abs() < FRAC_PI_2) {
                    return Err(config_err(format!("thetas: |theta| must be < pi/2, got {t}")));
                }
            }
        }
        if let Some(radii) = &self.radii {
            if radii.is_empty() {
                return Err(config_err("radii must not be empty"));
            }
            for &r in radii {
                positive("radii", r)?;
            }
        }
        if let Some(grid) = &self.phi_grid {
            for &p in grid {
                non_negative("phi_grid", p)?;
            }
        }
        if let Some(x) = self.xi_max {
            positive("xi_max", x)?;
        }
        if let Some(x) = self.xi_step {
            positive("xi_step", x)?;
        }
        if let Some(data) = &self.data {
            self.validate_data(data)?;
        }
        Ok(())
    }

    fn validate_data(&self, data: &DataSpec) -> Result<()> {
        match data {
            DataSpec::Generator {
                amplitude,
                forcing,
                bathymetry,
                phi_star,
                p,
                band,
            } => {
                non_negative("data.amplitude", *amplitude)?;
                non_negative("data.forcing", *forcing)?;
                non_negative("data.bathymetry", *bathymetry)?;
                non_negative("data.phi_star", *phi_star)?;
                if !p.is_finite() {
                    return Err(config_err("data.p must be finite"));
                }
                if let Some(b) = band {
                    if *b < 1 {
                        return Err(config_err(format!("data.band must be >= 1, got {b}")));
                    }
                }
            }
            DataSpec::Steady { mode, amplitude } => {
                if *mode == (0, 0) {
                    return Err(TqgError::MeanMode);
                }
                let grid = SpectralGrid::new(self.n)?;
                if !grid.in_symmetric_range(*mode) {
                    return Err(TqgError::WavevectorOutOfRange(mode.0, mode.1));
                }
                if !amplitude.is_finite() {
                    return Err(config_err("data.amplitude must be finite"));
                }
            }
            DataSpec::Files { b0, q0, f, u_h, h } => {
                if u_h.is_some() && h.is_some() {
                    return Err(config_err("data: give at most one of u_h and h"));
                }
                let mut paths = vec![b0, q0];
                paths.extend(f.iter());
                paths.extend(h.iter());
                if let Some(pair) = u_h {
                    paths.extend(pair.iter());
                }
                for p in paths {
                    if !p.is_file() {
                        return Err(TqgError::Io(format!("input file not found: {}", p.display())));
                    }
                }
            }
        }
        Ok(())
    }

    /// Errors naming the first key required by `mode` that is absent.
    pub fn require(&self, mode: Mode) -> Result<()> {
        let missing = |key: &str| Err(config_err(format!("missing required key `{key}` for mode {mode}")));
        match mode {
            Mode::Simulate | Mode::Radius => {
                if self.ray.is_none() {
                    return missing("ray");
                }
                if self.data.is_none() {
                    return missing("data");
                }
                if self.phi0.is_none() {
                    return missing("phi0");
                }
            }
            Mode::Sweep => {
                if self.ray.is_none() {
                    return missing("ray");
                }
                if self.data.is_none() {
                    return missing("data");
                }
                if self.phi0.is_none() {
                    return missing("phi0");
                }
                if self.thetas.is_none() {
                    return missing("thetas");
                }
            }
            Mode::Verify => {
                if self.lemma.is_none() {
                    return missing("lemma");
                }
            }
        }
        Ok(())
    }

    /// Ray along θ using the configured s_max and ds.
    pub fn ray_spec(&self, theta: f64, ray: &RayConfig) -> Result<RaySpec> {
        RaySpec::new(theta, ray.s_max, ray.ds).map_err(|e| config_err(format!("ray: {e}")))
    }

    pub fn shell_range(&self) -> (f64, f64) {
        match self.shells {
            Some([lo, hi]) => (lo, hi),
            None => (1.0, (self.n / 2) as f64 - 1.0),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
