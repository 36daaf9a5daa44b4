//! Constraint solve, velocities, (complexified) advection and the TQG
//! right-hand side.
//!
//! Advection has two evaluation paths: a dealiased pseudospectral product on
//! a 3N/2 collocation grid, and the exact truncated convolution sum used as
//! the oracle. Both return only the conjugate-symmetric part of the grid
//! (Nyquist modes are dropped) so Galerkin truncation commutes with taking
//! real parts.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TqgError};
use crate::field::{perp_gradient, Axis, SpectralField, VectorSpectralField};
use crate::grid::SpectralGrid;
use crate::norms::pairwise_sum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AdvectionMethod {
    #[default]
    Pseudospectral,
    Convolution,
}

/// Evolved unknowns (b, q), both complex-valued in general.
#[derive(Clone, Debug)]
pub struct TqgState {
    pub b: SpectralField,
    pub q: SpectralField,
}

impl TqgState {
    pub fn new(b: SpectralField, q: SpectralField) -> Result<Self> {
        if b.grid() != q.grid() {
            return Err(TqgError::GridMismatch(b.grid().n(), q.grid().n()));
        }
        Ok(Self { b, q })
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self {
            b: SpectralField::zeros(grid),
            q: SpectralField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.b.grid()
    }

    pub fn is_real(&self) -> bool {
        self.b.is_real() && self.q.is_real()
    }

    pub fn is_finite(&self) -> bool {
        self.b.is_finite() && self.q.is_finite()
    }

    /// self + a·other, componentwise.
    pub fn axpy(&self, a: Complex64, other: &Self) -> Result<Self> {
        Ok(Self {
            b: self.b.axpy(a, &other.b)?,
            q: self.q.axpy(a, &other.q)?,
        })
    }

    pub fn conj(&self) -> Self {
        Self {
            b: self.b.conj(),
            q: self.q.conj(),
        }
    }

    /// Largest coefficient difference over both components.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let d = |x: &SpectralField, y: &SpectralField| {
            x.coeffs()
                .iter()
                .zip(y.coeffs().iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        };
        d(&self.b, &other.b).max(d(&self.q, &other.q))
    }

    pub fn max_abs(&self) -> f64 {
        self.b.max_abs().max(self.q.max_abs())
    }
}

/// Fixed data (u_h, f, b₀, q₀, φ₀).
#[derive(Debug)]
pub struct TqgDataSet {
    pub u_h: VectorSpectralField,
    pub f: SpectralField,
    pub b0: SpectralField,
    pub q0: SpectralField,
    pub phi0: f64,
    padded_u_h: OnceLock<[Array2<Complex64>; 2]>,
}

impl Clone for TqgDataSet {
    fn clone(&self) -> Self {
        Self {
            u_h: self.u_h.clone(),
            f: self.f.clone(),
            b0: self.b0.clone(),
            q0: self.q0.clone(),
            phi0: self.phi0,
            padded_u_h: OnceLock::new(),
        }
    }
}

impl TqgDataSet {
    pub fn new(
        u_h: VectorSpectralField,
        f: SpectralField,
        b0: SpectralField,
        q0: SpectralField,
        phi0: f64,
    ) -> Result<Self> {
        let n = b0.grid().n();
        for g in [u_h.grid(), f.grid(), q0.grid()] {
            if g.n() != n {
                return Err(TqgError::GridMismatch(n, g.n()));
            }
        }
        if !(phi0 > 0.0 && phi0.is_finite()) {
            return Err(TqgError::InvalidArgument(format!("phi0 must be > 0, got {phi0}")));
        }
        let scale = u_h.x1.max_abs().max(u_h.x2.max_abs()) * n as f64;
        if u_h.divergence_defect() > 1e-13 * scale.max(1.0) {
            return Err(TqgError::InvalidArgument(
                "u_h must be divergence-free".into(),
            ));
        }
        Ok(Self {
            u_h,
            f,
            b0,
            q0,
            phi0,
            padded_u_h: OnceLock::new(),
        })
    }

    /// Data with u_h = ½∇⊥h.
    pub fn from_bathymetry(
        h: &SpectralField,
        f: SpectralField,
        b0: SpectralField,
        q0: SpectralField,
        phi0: f64,
    ) -> Result<Self> {
        Self::new(bathymetry_velocity(h), f, b0, q0, phi0)
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.b0.grid()
    }

    pub fn initial_state(&self) -> TqgState {
        TqgState {
            b: self.b0.clone(),
            q: self.q0.clone(),
        }
    }

    fn padded_u_h(&self) -> &[Array2<Complex64>; 2] {
        self.padded_u_h
            .get_or_init(|| [to_padded_physical(&self.u_h.x1), to_padded_physical(&self.u_h.x2)])
    }
}

/// ψ with q = (Δ − 1)ψ + f, i.e. ψ̂_k = (q̂_k − f̂_k)/(−|k|² − 1).
pub fn solve_streamfunction(q: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    let rhs = q.minus(f)?;
    Ok(rhs.map_symbol(
        |k| Complex64::new(-1.0 / ((k.0 * k.0 + k.1 * k.1) as f64 + 1.0), 0.0),
        true,
    ))
}

/// (Δ − 1)ψ.
pub fn helmholtz(psi: &SpectralField) -> SpectralField {
    psi.map_symbol(
        |k| Complex64::new(-((k.0 * k.0 + k.1 * k.1) as f64) - 1.0, 0.0),
        true,
    )
}

pub fn velocity(psi: &SpectralField) -> VectorSpectralField {
    perp_gradient(psi)
}

/// u_h = ½∇⊥h.
pub fn bathymetry_velocity(h: &SpectralField) -> VectorSpectralField {
    perp_gradient(h).scaled(Complex64::new(0.5, 0.0))
}

fn to_padded_physical(field: &SpectralField) -> Array2<Complex64> {
    let grid = field.grid();
    let m = grid.padded_n();
    let mut padded = Array2::<Complex64>::zeros((m, m));
    for ((i1, i2), k) in grid.wavevectors() {
        let c = field.coeffs()[[i1, i2]];
        if c != ZERO {
            padded[[k.0.rem_euclid(m as i64) as usize, k.1.rem_euclid(m as i64) as usize]] = c;
        }
    }
    grid.padded_fft2_inverse(&mut padded);
    padded
}

fn from_padded_physical(grid: &SpectralGrid, mut values: Array2<Complex64>, real: bool) -> SpectralField {
    let m = grid.padded_n();
    grid.padded_fft2_forward(&mut values);
    let scale = 1.0 / (m * m) as f64;
    let n = grid.n();
    let mut coeffs = Array2::<Complex64>::zeros((n, n));
    for ((i1, i2), k) in grid.wavevectors() {
        if grid.in_symmetric_range(k) {
            coeffs[[i1, i2]] =
                values[[k.0.rem_euclid(m as i64) as usize, k.1.rem_euclid(m as i64) as usize]] * scale;
        }
    }
    let mut out = SpectralField::from_coeffs(grid, coeffs, false);
    if real {
        out.symmetrize();
    }
    out
}

/// Σ_i (u_i·∇)g_i on the dealiased grid with a single forward transform.
/// Padded physical velocities may be supplied to skip their transforms.
fn advect_sum_pseudospectral(
    grid: &SpectralGrid,
    terms: &[(VelocityRef<'_>, &SpectralField)],
) -> SpectralField {
    let m = grid.padded_n();
    let mut acc = Array2::<Complex64>::zeros((m, m));
    let mut real = true;
    for (u, g) in terms {
        let owned;
        let [u1, u2] = match u {
            VelocityRef::Spectral(v) => {
                real &= v.is_real();
                owned = [to_padded_physical(&v.x1), to_padded_physical(&v.x2)];
                &owned
            }
            VelocityRef::Padded(p, is_real) => {
                real &= *is_real;
                *p
            }
        };
        real &= g.is_real();
        let g1 = to_padded_physical(&g.derivative(Axis::X1));
        let g2 = to_padded_physical(&g.derivative(Axis::X2));
        Zip::from(&mut acc)
            .and(u1)
            .and(&g1)
            .and(u2)
            .and(&g2)
            .for_each(|a, &a1, &b1, &a2, &b2| *a += a1 * b1 + a2 * b2);
    }
    from_padded_physical(grid, acc, real)
}

enum VelocityRef<'a> {
    Spectral(&'a VectorSpectralField),
    Padded(&'a [Array2<Complex64>; 2], bool),
}

/// Exact Σ_{j+k=ℓ} û_j·(ik) ĝ_k for every ℓ in the symmetric grid range.
fn advect_convolution(u: &VectorSpectralField, g: &SpectralField) -> SpectralField {
    let grid = g.grid();
    let n = grid.n();
    let nonzero = |f: &SpectralField| -> Vec<((i64, i64), Complex64)> {
        grid.wavevectors()
            .filter_map(|((i1, i2), k)| {
                let c = f.coeffs()[[i1, i2]];
                (c != ZERO).then_some((k, c))
            })
            .collect()
    };
    let us: Vec<((i64, i64), Complex64, Complex64)> = grid
        .wavevectors()
        .filter_map(|((i1, i2), k)| {
            let a = u.x1.coeffs()[[i1, i2]];
            let b = u.x2.coeffs()[[i1, i2]];
            (a != ZERO || b != ZERO).then_some((k, a, b))
        })
        .collect();
    let gs = nonzero(g);
    let i = Complex64::new(0.0, 1.0);
    let mut coeffs = Array2::<Complex64>::zeros((n, n));
    for &(j, a, b) in &us {
        for &(k, gk) in &gs {
            let l = (j.0 + k.0, j.1 + k.1);
            if l == (0, 0) || !grid.contains(l) || !grid.in_symmetric_range(l) {
                continue;
            }
            let (l1, l2) = (grid.index_of(l.0), grid.index_of(l.1));
            coeffs[[l1, l2]] += (a * (i * k.0 as f64) + b * (i * k.1 as f64)) * gk;
        }
    }
    let mut out = SpectralField::from_coeffs(grid, coeffs, false);
    if u.is_real() && g.is_real() {
        out.symmetrize();
    }
    out
}

/// B(u, g) = (u·∇)g for complex (complexified) fields.
pub fn advect(u: &VectorSpectralField, g: &SpectralField, method: AdvectionMethod) -> Result<SpectralField> {
    if u.grid() != g.grid() {
        return Err(TqgError::GridMismatch(u.grid().n(), g.grid().n()));
    }
    Ok(match method {
        AdvectionMethod::Pseudospectral => {
            advect_sum_pseudospectral(g.grid(), &[(VelocityRef::Spectral(u), g)])
        }
        AdvectionMethod::Convolution => advect_convolution(u, g),
    })
}

/// B(f, g)_ℂ assembled from real parts:
/// B(f₁,g₁) − B(f₂,g₂) + i[B(f₂,g₁) + B(f₁,g₂)].
pub fn advect_by_real_parts(
    u: &VectorSpectralField,
    g: &SpectralField,
    method: AdvectionMethod,
) -> Result<SpectralField> {
    let (u1, u2) = (u.real_part(), u.imag_part());
    let (g1, g2) = (g.real_part(), g.imag_part());
    let i = Complex64::new(0.0, 1.0);
    let re = advect(&u1, &g1, method)?.minus(&advect(&u2, &g2, method)?)?;
    let im = advect(&u2, &g1, method)?.plus(&advect(&u1, &g2, method)?)?;
    re.axpy(i, &im)
}

/// (db/dζ, dq/dζ) = (−B(u,b), −B(u, q−b) − B(u_h, b)) with u = ∇⊥ψ.
pub fn tqg_rhs(state: &TqgState, data: &TqgDataSet) -> Result<(SpectralField, SpectralField)> {
    tqg_rhs_with(state, data, AdvectionMethod::Pseudospectral)
}

pub fn tqg_rhs_with(
    state: &TqgState,
    data: &TqgDataSet,
    method: AdvectionMethod,
) -> Result<(SpectralField, SpectralField)> {
    if state.grid() != data.grid() {
        return Err(TqgError::GridMismatch(state.grid().n(), data.grid().n()));
    }
    let psi = solve_streamfunction(&state.q, &data.f)?;
    let u = velocity(&psi);
    let q_minus_b = state.q.minus(&state.b)?;
    let minus_one = Complex64::new(-1.0, 0.0);
    match method {
        AdvectionMethod::Pseudospectral => {
            let grid = state.grid();
            let padded_u = [to_padded_physical(&u.x1), to_padded_physical(&u.x2)];
            let u_ref = VelocityRef::Padded(&padded_u, u.is_real());
            let db = advect_sum_pseudospectral(grid, &[(u_ref, &state.b)]);
            let u_ref = VelocityRef::Padded(&padded_u, u.is_real());
            let uh_ref = VelocityRef::Padded(data.padded_u_h(), data.u_h.is_real());
            let dq = advect_sum_pseudospectral(grid, &[(u_ref, &q_minus_b), (uh_ref, &state.b)]);
            Ok((db.scaled(minus_one), dq.scaled(minus_one)))
        }
        AdvectionMethod::Convolution => {
            let db = advect_convolution(&u, &state.b);
            let dq = advect_convolution(&u, &q_minus_b).plus(&advect_convolution(&data.u_h, &state.b))?;
            Ok((db.scaled(minus_one), dq.scaled(minus_one)))
        }
    }
}

/// ⟨f, g⟩_ℂ = ∫ f·conj(g) dx = (2π)² Σ_k f̂_k conj(ĝ_k).
pub fn inner_product_complex(f: &SpectralField, g: &SpectralField) -> Result<Complex64> {
    if f.grid() != g.grid() {
        return Err(TqgError::GridMismatch(f.grid().n(), g.grid().n()));
    }
    let products: Vec<Complex64> = f
        .coeffs()
        .iter()
        .zip(g.coeffs().iter())
        .map(|(a, b)| a * b.conj())
        .collect();
    let re: Vec<f64> = products.iter().map(|z| z.re).collect();
    let im: Vec<f64> = products.iter().map(|z| z.im).collect();
    Ok(Complex64::new(pairwise_sum(&re), pairwise_sum(&im)) * (TAU * TAU))
}

/// Real L² pairing ⟨f, g⟩ of two real fields.
fn inner_product_real(f: &SpectralField, g: &SpectralField) -> Result<f64> {
    Ok(inner_product_complex(f, g)?.re)
}

/// ⟨f₁,g₁⟩ + ⟨f₂,g₂⟩ + i[⟨f₂,g₁⟩ − ⟨f₁,g₂⟩] from the real and imaginary parts.
pub fn inner_product_by_real_parts(f: &SpectralField, g: &SpectralField) -> Result<Complex64> {
    let (f1, f2) = (f.real_part(), f.imag_part());
    let (g1, g2) = (g.real_part(), g.imag_part());
    let re = inner_product_real(&f1, &g1)? + inner_product_real(&f2, &g2)?;
    let im = inner_product_real(&f2, &g1)? - inner_product_real(&f1, &g2)?;
    Ok(Complex64::new(re, im))
}

/// ⟨B(f, g)_ℂ, h⟩_ℂ on the exact convolution path.
pub fn trilinear(f: &VectorSpectralField, g: &SpectralField, h: &SpectralField) -> Result<Complex64> {
    inner_product_complex(&advect(f, g, AdvectionMethod::Convolution)?, h)
}
