//! Radius-of-analyticity bookkeeping along a complex-time ray: the Θ and D
//! functionals, the φ ODE, the analyticity region and the energy monitors.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{TqgDataSet, TqgState};
use crate::error::{Result, TqgError};
use crate::norms::{product_norm_sq, ShellSpectrum};

/// Calibration grid c = 2^m, m = C_MIN_EXP..=C_MAX_EXP.
pub const C_MIN_EXP: i32 = -4;
pub const C_MAX_EXP: i32 = 10;
/// Smallest ensemble accepted by [`calibrate_c`].
pub const MIN_ENSEMBLE: usize = 5;

fn monitor_tol(d: f64) -> f64 {
    1e-9 * (1.0 + d)
}

/// ‖e^{φ₀Λ^{1/2}}u_h‖²_{H^r} + ‖e^{φ₀Λ^{1/2}}f‖²_{H^r}.
fn data_part_sq(data: &TqgDataSet, r: f64) -> Result<f64> {
    let phi0 = data.phi0;
    let u = ShellSpectrum::of_vector(&data.u_h).norm_sq(r, phi0)?;
    let f = ShellSpectrum::of(&data.f).norm_sq(r, phi0)?;
    Ok(u + f)
}

/// ‖(e^{φΛ^{1/2}}b, e^{φΛ^{1/2}}q)‖_{H⁴×H³} + ‖(e^{φ₀Λ^{1/2}}u_h, e^{φ₀Λ^{1/2}}f)‖_{H³×H³}.
pub fn theta_functional(state: &TqgState, data: &TqgDataSet, phi: f64) -> Result<f64> {
    let state_part = product_norm_sq(&state.b, 4.0, &state.q, 3.0, phi)?.sqrt();
    Ok(state_part + data_part_sq(data, 3.0)?.sqrt())
}

/// ‖(e^{φ₀Λ^{1/2}}b₀, e^{φ₀Λ^{1/2}}q₀)‖²_{H⁴×H³} + ‖(e^{φ₀Λ^{1/2}}u_h, e^{φ₀Λ^{1/2}}f)‖²_{H^{7/2}×H^{7/2}}.
pub fn data_functional(data: &TqgDataSet) -> Result<f64> {
    Ok(product_norm_sq(&data.b0, 4.0, &data.q0, 3.0, data.phi0)? + data_part_sq(data, 3.5)?)
}

/// ‖(e^{φΛ^{1/2}}b, e^{φΛ^{1/2}}q)‖²_{H^{9/2}×H^{7/2}} + the data part at order 7/2.
pub fn gamma_functional(state: &TqgState, data: &TqgDataSet, phi: f64) -> Result<f64> {
    Ok(product_norm_sq(&state.b, 4.5, &state.q, 3.5, phi)? + data_part_sq(data, 3.5)?)
}

/// ‖(e^{φΛ^{1/2}}b, e^{φΛ^{1/2}}q)‖²_{H⁴×H³}.
pub fn gevrey_energy(state: &TqgState, phi: f64) -> Result<f64> {
    product_norm_sq(&state.b, 4.0, &state.q, 3.0, phi)
}

/// 0 < s·√D < 1/(c·cosθ).
pub fn region_predicate(s: f64, theta: f64, c: f64, d_data: f64) -> bool {
    let x = s * d_data.sqrt();
    0.0 < x && x * c * theta.cos() < 1.0
}

/// φ(s) = φ₀·exp(−c·∫₀ˢΘ) with the integral accumulated by the trapezoid rule.
#[derive(Clone, Debug)]
pub struct PhiEvolution {
    phi0: f64,
    c: f64,
    integral: f64,
    last_theta: Option<f64>,
}

impl PhiEvolution {
    pub fn new(phi0: f64, c: f64) -> Self {
        Self {
            phi0,
            c,
            integral: 0.0,
            last_theta: None,
        }
    }

    /// Registers Θ(0); φ(0) = φ₀.
    pub fn start(&mut self, theta0: f64) -> f64 {
        self.integral = 0.0;
        self.last_theta = Some(theta0);
        self.phi0
    }

    /// φ at the next sample, a step ds after the previous one.
    pub fn advance(&mut self, theta_new: f64, ds: f64) -> f64 {
        let prev = self.last_theta.unwrap_or(theta_new);
        self.integral += 0.5 * ds * (prev + theta_new);
        self.last_theta = Some(theta_new);
        self.phi()
    }

    pub fn phi(&self) -> f64 {
        self.phi0 * (-self.c * self.integral).exp()
    }
}

/// φ at the sample following `samples`, given its Θ and the spacing ds.
pub fn evolve_phi(samples: &[RadiusSample], phi0: f64, theta_new: f64, ds: f64, c: f64) -> f64 {
    let mut evo = PhiEvolution::new(phi0, c);
    if let Some((first, rest)) = samples.split_first() {
        evo.start(first.theta_value);
        let mut s_prev = first.s;
        for smp in rest {
            evo.advance(smp.theta_value, smp.s - s_prev);
            s_prev = smp.s;
        }
    } else {
        return phi0;
    }
    evo.advance(theta_new, ds)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSample {
    pub s: f64,
    #[serde(rename = "Theta")]
    pub theta_value: f64,
    pub phi: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "Gamma", skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusTrace {
    pub run_id: String,
    pub c: f64,
    pub theta: f64,
    pub d_data: f64,
    pub samples: Vec<RadiusSample>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// G(s) > G(0) + c·s·cosθ·D^{3/2}.
    Growth,
    /// G(s) > D inside the analyticity region.
    Region,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub s: f64,
    pub kind: ViolationKind,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub run_id: String,
    /// All violations in order of s.
    pub violations: Vec<Violation>,
}

impl MonitorReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }

    /// Largest lhs − rhs over the violations, 0 when clean.
    pub fn worst_excess(&self) -> f64 {
        self.violations.iter().map(|v| v.lhs - v.rhs).fold(0.0, f64::max)
    }
}

pub fn bound_monitor(trace: &RadiusTrace) -> MonitorReport {
    let mut violations = Vec::new();
    let Some(first) = trace.samples.first() else {
        return MonitorReport {
            run_id: trace.run_id.clone(),
            violations,
        };
    };
    let d = trace.d_data;
    let tol = monitor_tol(d);
    let slope = trace.c * trace.theta.cos() * d.powf(1.5);
    for smp in &trace.samples {
        let growth = first.g + slope * smp.s;
        if smp.g > growth + tol {
            violations.push(Violation {
                s: smp.s,
                kind: ViolationKind::Growth,
                lhs: smp.g,
                rhs: growth + tol,
            });
        }
        if region_predicate(smp.s, trace.theta, trace.c, d) && smp.g > d + tol {
            violations.push(Violation {
                s: smp.s,
                kind: ViolationKind::Region,
                lhs: smp.g,
                rhs: d + tol,
            });
        }
    }
    MonitorReport {
        run_id: trace.run_id.clone(),
        violations,
    }
}

/// Per-step shell spectra of one run; enough to rebuild its radius trace
/// for any c without re-integrating.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub run_id: String,
    pub theta: f64,
    pub phi0: f64,
    pub d_data: f64,
    data_theta_part: f64,
    data_gamma_part: f64,
    pub s: Vec<f64>,
    pub b_spectra: Vec<ShellSpectrum>,
    pub q_spectra: Vec<ShellSpectrum>,
}

impl RunRecord {
    pub fn new(run_id: impl Into<String>, theta: f64, data: &TqgDataSet) -> Result<Self> {
        if !(theta.abs() < FRAC_PI_2) {
            return Err(TqgError::InvalidRay(format!("|theta| must be < pi/2, got {theta}")));
        }
        Ok(Self {
            run_id: run_id.into(),
            theta,
            phi0: data.phi0,
            d_data: data_functional(data)?,
            data_theta_part: data_part_sq(data, 3.0)?.sqrt(),
            data_gamma_part: data_part_sq(data, 3.5)?,
            s: Vec::new(),
            b_spectra: Vec::new(),
            q_spectra: Vec::new(),
        })
    }

    /// Observer hook: call with s = 0 and after every integrator step.
    pub fn observe(&mut self, s: f64, state: &TqgState) -> Result<()> {
        if let Some(&last) = self.s.last() {
            if !(s > last) {
                return Err(TqgError::InvalidArgument(format!(
                    "samples must increase in s ({s} after {last})"
                )));
            }
        }
        self.s.push(s);
        self.b_spectra.push(ShellSpectrum::of(&state.b));
        self.q_spectra.push(ShellSpectrum::of(&state.q));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    fn state_sq(&self, n: usize, rb: f64, rq: f64, phi: f64) -> Result<f64> {
        Ok(self.b_spectra[n].norm_sq(rb, phi)? + self.q_spectra[n].norm_sq(rq, phi)?)
    }

    /// (‖b‖_{H⁴}, ‖q‖_{H³}) at sample n.
    pub fn sobolev_sizes(&self, n: usize) -> Result<(f64, f64)> {
        Ok((
            self.b_spectra[n].norm_sq(4.0, 0.0)?.sqrt(),
            self.q_spectra[n].norm_sq(3.0, 0.0)?.sqrt(),
        ))
    }

    /// Radius trace for calibration constant c. At each step Θ is evaluated
    /// with the previous φ, then φ is advanced and G uses the new φ.
    pub fn trace(&self, c: f64, with_gamma: bool) -> Result<RadiusTrace> {
        let mut samples = Vec::with_capacity(self.len());
        let mut evo = PhiEvolution::new(self.phi0, c);
        let mut phi = self.phi0;
        for n in 0..self.len() {
            let theta_value = self.state_sq(n, 4.0, 3.0, phi)?.sqrt() + self.data_theta_part;
            phi = if n == 0 {
                evo.start(theta_value)
            } else {
                evo.advance(theta_value, self.s[n] - self.s[n - 1])
            };
            let g = self.state_sq(n, 4.0, 3.0, phi)?;
            let gamma = if with_gamma {
                Some(self.state_sq(n, 4.5, 3.5, phi)? + self.data_gamma_part)
            } else {
                None
            };
            samples.push(RadiusSample {
                s: self.s[n],
                theta_value,
                phi,
                g,
                gamma,
            });
        }
        Ok(RadiusTrace {
            run_id: self.run_id.clone(),
            c,
            theta: self.theta,
            d_data: self.d_data,
            samples,
        })
    }

    pub fn monitor(&self, c: f64) -> Result<MonitorReport> {
        Ok(bound_monitor(&self.trace(c, false)?))
    }
}

pub fn c_grid() -> impl Iterator<Item = f64> {
    (C_MIN_EXP..=C_MAX_EXP).map(|m| 2f64.powi(m))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub c: f64,
    pub exponent: i32,
    pub runs: usize,
    pub run_ids: Vec<String>,
}

/// Smallest c = 2^m on the calibration grid for which every run passes its
/// monitors; needs at least [`MIN_ENSEMBLE`] runs.
pub fn calibrate_c(runs: &[RunRecord]) -> Result<Calibration> {
    calibrate_c_with(runs, MIN_ENSEMBLE)
}

pub fn calibrate_c_with(runs: &[RunRecord], min_runs: usize) -> Result<Calibration> {
    if runs.len() < min_runs.max(1) {
        return Err(TqgError::EnsembleTooSmall {
            needed: min_runs.max(1),
            got: runs.len(),
        });
    }
    for m in C_MIN_EXP..=C_MAX_EXP {
        let c = 2f64.powi(m);
        let reports: Vec<MonitorReport> = runs.par_iter().map(|r| r.monitor(c)).collect::<Result<_>>()?;
        if reports.iter().all(MonitorReport::passed) {
            log::info!("calibrated c = 2^{m} over {} runs", runs.len());
            return Ok(Calibration {
                c,
                exponent: m,
                runs: runs.len(),
                run_ids: runs.iter().map(|r| r.run_id.clone()).collect(),
            });
        }
    }
    let c = 2f64.powi(C_MAX_EXP);
    let reports: Vec<MonitorReport> = runs.par_iter().map(|r| r.monitor(c)).collect::<Result<_>>()?;
    let worst = reports
        .iter()
        .max_by(|a, b| a.worst_excess().total_cmp(&b.worst_excess()))
        .map(|r| r.run_id.clone())
        .unwrap_or_default();
    Err(TqgError::CalibrationFailed { run_id: worst })
}
