//! Fixed-step RK4 for the complexified system along rays ζ = s·e^{iθ} and
//! polylines in the complex time plane.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::dynamics::{solve_streamfunction, tqg_rhs, velocity, TqgDataSet, TqgState};
use crate::error::{Result, TqgError};
use crate::norms::{product_norm_sq, sobolev_norm};

/// Ratio between the Sobolev size of the state and its initial value that is
/// treated as blow-up.
pub const BLOW_UP_GROWTH: f64 = 1e6;
/// Steps between re-checks of the step-size bound.
pub const STEP_BOUND_INTERVAL: usize = 100;
/// Safety factor in ds ≤ CFL / (N · max|u|).
pub const CFL: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RaySpec {
    pub theta: f64,
    pub s_max: f64,
    pub ds: f64,
}

impl RaySpec {
    pub fn new(theta: f64, s_max: f64, ds: f64) -> Result<Self> {
        if !(theta.abs() < FRAC_PI_2) {
            return Err(TqgError::InvalidRay(format!("|theta| must be < pi/2, got {theta}")));
        }
        if !(ds > 0.0 && ds.is_finite()) {
            return Err(TqgError::InvalidRay(format!("ds must be > 0, got {ds}")));
        }
        if !(s_max >= 0.0 && s_max.is_finite()) {
            return Err(TqgError::InvalidRay(format!("s_max must be >= 0, got {s_max}")));
        }
        if s_max > 0.0 {
            if ds > s_max {
                return Err(TqgError::InvalidRay(format!("ds = {ds} exceeds s_max = {s_max}")));
            }
            let ratio = s_max / ds;
            if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
                return Err(TqgError::InvalidRay(format!(
                    "s_max / ds = {ratio} is not an integer"
                )));
            }
        }
        Ok(Self { theta, s_max, ds })
    }

    pub fn steps(&self) -> usize {
        (self.s_max / self.ds).round() as usize
    }

    pub fn direction(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub theta: f64,
    pub ds: f64,
    pub stride: usize,
    /// (s, state) every `stride` steps, starting with the initial state.
    pub snapshots: Vec<(f64, TqgState)>,
    /// Last state reached, whether or not it falls on the stride.
    pub last: (f64, TqgState),
    /// Error that stopped the run early, if any.
    pub failure: Option<TqgError>,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Largest admissible step for the current state.
pub fn step_bound(state: &TqgState, data: &TqgDataSet) -> Result<f64> {
    let psi = solve_streamfunction(&state.q, &data.f)?;
    let speed = velocity(&psi).max_physical_magnitude() + data.u_h.max_physical_magnitude();
    if speed == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(CFL / (state.grid().n() as f64 * speed))
}

fn rk4(state: &TqgState, data: &TqgDataSet, direction: Complex64, ds: f64) -> Result<TqgState> {
    let h = direction * ds;
    let stage = |x: &TqgState| -> Result<TqgState> {
        let (db, dq) = tqg_rhs(x, data)?;
        Ok(TqgState { b: db, q: dq })
    };
    let k1 = stage(state)?;
    let k2 = stage(&state.axpy(h * 0.5, &k1)?)?;
    let k3 = stage(&state.axpy(h * 0.5, &k2)?)?;
    let k4 = stage(&state.axpy(h, &k3)?)?;
    state
        .axpy(h / 6.0, &k1)?
        .axpy(h / 3.0, &k2)?
        .axpy(h / 3.0, &k3)?
        .axpy(h / 6.0, &k4)
}

/// One RK4 step of dX/ds = direction · RHS(X).
pub fn step_rk4(state: &TqgState, data: &TqgDataSet, direction: Complex64, ds: f64) -> Result<TqgState> {
    check_direction(direction)?;
    if !(ds > 0.0) {
        return Err(TqgError::InvalidRay(format!("ds must be > 0, got {ds}")));
    }
    let next = rk4(state, data, direction, ds)?;
    if !next.is_finite() {
        return Err(TqgError::BlowUp {
            s: ds,
            reason: "non-finite coefficients".into(),
        });
    }
    Ok(next)
}

fn check_direction(direction: Complex64) -> Result<()> {
    if (direction.norm() - 1.0).abs() > 1e-12 {
        return Err(TqgError::InvalidRay(format!(
            "direction must have unit modulus, got {}",
            direction.norm()
        )));
    }
    Ok(())
}

fn size(state: &TqgState) -> f64 {
    product_norm_sq(&state.b, 4.0, &state.q, 3.0, 0.0)
        .map(f64::sqrt)
        .unwrap_or(f64::INFINITY)
}

/// Tracks the blow-up criteria along one run.
struct Guard {
    initial: f64,
}

impl Guard {
    fn new(state: &TqgState) -> Self {
        Self { initial: size(state) }
    }

    fn check(&self, state: &TqgState, s: f64) -> Result<()> {
        if !state.is_finite() {
            return Err(TqgError::BlowUp {
                s,
                reason: "non-finite coefficients".into(),
            });
        }
        let now = size(state);
        if self.initial > 0.0 && now > BLOW_UP_GROWTH * self.initial {
            return Err(TqgError::BlowUp {
                s,
                reason: format!("norm grew from {:e} to {:e}", self.initial, now),
            });
        }
        Ok(())
    }
}

/// Integrates along the ray, calling `observer(s, state)` at s = 0 and after
/// every step. Numerical failures (and observer errors) end the run early and
/// are recorded in the trajectory.
pub fn integrate_ray<F>(
    data: &TqgDataSet,
    ray: &RaySpec,
    stride: usize,
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(f64, &TqgState) -> Result<()>,
{
    if stride == 0 {
        return Err(TqgError::InvalidArgument("snapshot stride must be >= 1".into()));
    }
    let initial = data.initial_state();
    let direction = ray.direction();
    let steps = ray.steps();
    if steps > 0 {
        let bound = step_bound(&initial, data)?;
        if ray.ds > bound {
            return Err(TqgError::StepTooLarge { ds: ray.ds, bound, s: 0.0 });
        }
    }
    let guard = Guard::new(&initial);
    let mut traj = Trajectory {
        theta: ray.theta,
        ds: ray.ds,
        stride,
        snapshots: vec![(0.0, initial.clone())],
        last: (0.0, initial.clone()),
        failure: None,
    };
    if let Err(e) = observer(0.0, &initial) {
        traj.failure = Some(e);
        return Ok(traj);
    }
    let mut state = initial;
    for n in 1..=steps {
        let s = n as f64 * ray.ds;
        let outcome = rk4(&state, data, direction, ray.ds).and_then(|next| {
            guard.check(&next, s)?;
            if n % STEP_BOUND_INTERVAL == 0 {
                let bound = step_bound(&next, data)?;
                if ray.ds > bound {
                    return Err(TqgError::StepTooLarge { ds: ray.ds, bound, s });
                }
            }
            observer(s, &next)?;
            Ok(next)
        });
        match outcome {
            Ok(next) => state = next,
            Err(e) => {
                log::warn!("ray theta = {} stopped: {e}", ray.theta);
                traj.failure = Some(e);
                return Ok(traj);
            }
        }
        if n % stride == 0 {
            traj.snapshots.push((s, state.clone()));
        }
        traj.last = (s, state.clone());
    }
    Ok(traj)
}

/// Integrates the straight segment a → b in ⌈|b − a|/ds⌉ equal steps.
pub fn integrate_segment(
    state: &TqgState,
    data: &TqgDataSet,
    a: Complex64,
    b: Complex64,
    ds: f64,
) -> Result<TqgState> {
    if !(ds > 0.0) {
        return Err(TqgError::InvalidRay(format!("ds must be > 0, got {ds}")));
    }
    let len = (b - a).norm();
    if len == 0.0 {
        return Ok(state.clone());
    }
    let steps = (len / ds - 1e-9).ceil().max(1.0) as usize;
    let h = len / steps as f64;
    let direction = (b - a) / len;
    let guard = Guard::new(state);
    let mut x = state.clone();
    for n in 1..=steps {
        x = rk4(&x, data, direction, h)?;
        guard.check(&x, n as f64 * h)?;
    }
    Ok(x)
}

/// Integrates from ζ = 0 through the given vertices in order.
pub fn integrate_path(data: &TqgDataSet, vertices: &[Complex64], ds: f64) -> Result<TqgState> {
    let mut state = data.initial_state();
    let mut at = Complex64::new(0.0, 0.0);
    for &v in vertices {
        state = integrate_segment(&state, data, at, v, ds)?;
        at = v;
    }
    Ok(state)
}

/// ‖D_x b + i·D_y b‖_{H¹} + ‖D_x q + i·D_y q‖_{H¹} with centered differences
/// of half-width h around ζ_c = s_center·e^{iθ}; zero for holomorphic
/// solutions up to O(h²).
pub fn cr_residual(data: &TqgDataSet, s_center: f64, theta: f64, h: f64, ds: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(TqgError::NonPositiveH);
    }
    if !(theta.abs() < FRAC_PI_2) {
        return Err(TqgError::InvalidRay(format!("|theta| must be < pi/2, got {theta}")));
    }
    let center = Complex64::from_polar(s_center, theta);
    let at_center = integrate_path(data, &[center], ds)?;
    let probe = |offset: Complex64| integrate_segment(&at_center, data, center, center + offset, ds);
    let i = Complex64::new(0.0, 1.0);
    let xp = probe(Complex64::new(h, 0.0))?;
    let xm = probe(Complex64::new(-h, 0.0))?;
    let yp = probe(Complex64::new(0.0, h))?;
    let ym = probe(Complex64::new(0.0, -h))?;
    let inv = Complex64::new(1.0 / (2.0 * h), 0.0);
    let residual = |fxp: &crate::SpectralField, fxm: &crate::SpectralField, fyp: &crate::SpectralField, fym: &crate::SpectralField| -> Result<f64> {
        let dx = fxp.minus(fxm)?.scaled(inv);
        let dy = fyp.minus(fym)?.scaled(inv);
        Ok(sobolev_norm(&dx.axpy(i, &dy)?, 1.0))
    };
    Ok(residual(&xp.b, &xm.b, &yp.b, &ym.b)? + residual(&xp.q, &xm.q, &yp.q, &ym.q)?)
}
