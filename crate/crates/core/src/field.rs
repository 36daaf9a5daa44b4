//! Mean-free spectral fields on the 2-torus.
//!
//! A field stores the analytic Fourier coefficients f̂_k of
//! f(x) = Σ_k f̂_k e^{ik·x} on a [`SpectralGrid`]; the mean coefficient is
//! held at zero by every constructor and operation.

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TqgError};
use crate::grid::{SpectralGrid, Wavevector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: SpectralGrid,
    coeffs: Array2<Complex64>,
    is_real: bool,
}

impl SpectralField {
    pub fn zeros(grid: &SpectralGrid) -> Self {
        let n = grid.n();
        Self {
            grid: grid.clone(),
            coeffs: Array2::zeros((n, n)),
            is_real: true,
        }
    }

    /// Wraps a coefficient array, zeroing the mean mode.
    pub(crate) fn from_coeffs(grid: &SpectralGrid, mut coeffs: Array2<Complex64>, is_real: bool) -> Self {
        debug_assert_eq!(coeffs.dim(), (grid.n(), grid.n()));
        coeffs[[0, 0]] = ZERO;
        Self {
            grid: grid.clone(),
            coeffs,
            is_real,
        }
    }

    /// Builds a field from explicit modes. With `enforce_real` every entry's
    /// conjugate partner f̂_{−k} = conj(f̂_k) is filled in as well.
    pub fn from_modes(
        grid: &SpectralGrid,
        entries: &[(Wavevector, Complex64)],
        enforce_real: bool,
    ) -> Result<Self> {
        let mut coeffs = Array2::zeros((grid.n(), grid.n()));
        for &(k, amp) in entries {
            if k == (0, 0) {
                return Err(TqgError::MeanMode);
            }
            let (i1, i2) = grid
                .index(k)
                .ok_or(TqgError::WavevectorOutOfRange(k.0, k.1))?;
            coeffs[[i1, i2]] = amp;
            if enforce_real {
                let (j1, j2) = grid
                    .index((-k.0, -k.1))
                    .ok_or(TqgError::NoConjugatePartner(k.0, k.1))?;
                coeffs[[j1, j2]] = amp.conj();
            }
        }
        let field = Self::from_coeffs(grid, coeffs, enforce_real);
        if enforce_real {
            for &(k, _) in entries {
                let a = field.coeff(k);
                let b = field.coeff((-k.0, -k.1)).conj();
                if (a - b).norm() > 1e-14 * a.norm().max(b.norm()) {
                    return Err(TqgError::InconsistentConjugatePair(k.0, k.1));
                }
            }
        }
        Ok(field)
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    /// Coefficient at `k`; zero outside the grid.
    pub fn coeff(&self, k: Wavevector) -> Complex64 {
        self.grid
            .index(k)
            .map(|(i1, i2)| self.coeffs[[i1, i2]])
            .unwrap_or(ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Point values f(x_j) at x_j = 2π·j/N, indexed [j₁, j₂].
    pub fn to_physical(&self) -> Array2<Complex64> {
        let mut values = self.coeffs.clone();
        self.grid.fft2_inverse(&mut values);
        values
    }

    /// Inverse of [`to_physical`](Self::to_physical); the mean is discarded.
    /// The result is flagged real when every input value is real.
    pub fn from_physical(grid: &SpectralGrid, values: &Array2<Complex64>) -> Result<Self> {
        let n = grid.n();
        if values.dim() != (n, n) {
            return Err(TqgError::ShapeMismatch {
                got: values.dim(),
                n,
            });
        }
        let is_real = values.iter().all(|v| v.im == 0.0);
        let mut coeffs = values.as_standard_layout().into_owned();
        grid.fft2_forward(&mut coeffs);
        let scale = 1.0 / (n * n) as f64;
        coeffs.mapv_inplace(|c| c * scale);
        Ok(Self::from_coeffs(grid, coeffs, is_real))
    }

    /// Multiplies every coefficient by `symbol(k)`.
    pub(crate) fn map_symbol<F>(&self, symbol: F, keeps_real: bool) -> Self
    where
        F: Fn(Wavevector) -> Complex64,
    {
        let mut coeffs = self.coeffs.clone();
        for ((i1, i2), k) in self.grid.wavevectors() {
            let c = &mut coeffs[[i1, i2]];
            if *c != ZERO {
                *c *= symbol(k);
            }
        }
        Self::from_coeffs(&self.grid, coeffs, self.is_real && keeps_real)
    }

    /// ∂/∂x_axis, i.e. f̂_k ↦ i·k_axis·f̂_k.
    pub fn derivative(&self, axis: Axis) -> Self {
        self.map_symbol(
            |k| {
                let ka = match axis {
                    Axis::X1 => k.0,
                    Axis::X2 => k.1,
                };
                I * ka as f64
            },
            true,
        )
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::from_coeffs(
            &self.grid,
            self.coeffs.mapv(|c| c * factor),
            self.is_real && factor.im == 0.0,
        )
    }

    pub fn scaled_real(&self, factor: f64) -> Self {
        self.scaled(Complex64::new(factor, 0.0))
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(TqgError::GridMismatch(self.grid.n(), other.grid.n()));
        }
        Ok(())
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self::from_coeffs(
            &self.grid,
            &self.coeffs + &other.coeffs,
            self.is_real && other.is_real,
        ))
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Self::from_coeffs(
            &self.grid,
            &self.coeffs - &other.coeffs,
            self.is_real && other.is_real,
        ))
    }

    /// self + a·x.
    pub fn axpy(&self, a: Complex64, x: &Self) -> Result<Self> {
        self.check_grid(x)?;
        let mut coeffs = self.coeffs.clone();
        Zip::from(&mut coeffs).and(&x.coeffs).for_each(|c, &xi| *c += a * xi);
        Ok(Self::from_coeffs(
            &self.grid,
            coeffs,
            self.is_real && x.is_real && a.im == 0.0,
        ))
    }

    /// Largest |f̂_k − conj(f̂_{−k})| over the symmetric range.
    pub fn reality_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for ((i1, i2), k) in self.grid.wavevectors() {
            if !self.grid.in_symmetric_range(k) {
                continue;
            }
            let partner = self.coeffs[[self.grid.negated_index(i1), self.grid.negated_index(i2)]];
            defect = defect.max((self.coeffs[[i1, i2]] - partner.conj()).norm());
        }
        defect
    }

    /// Field whose point values are the complex conjugates of this one's.
    pub fn conj(&self) -> Self {
        let n = self.grid.n();
        let g = &self.grid;
        let coeffs = Array2::from_shape_fn((n, n), |(i1, i2)| {
            self.coeffs[[g.negated_index(i1), g.negated_index(i2)]].conj()
        });
        Self::from_coeffs(&self.grid, coeffs, self.is_real)
    }

    /// Real part f₁ of f = f₁ + i f₂, as a (real) spectral field.
    pub fn real_part(&self) -> Self {
        let c = self.conj();
        Self::from_coeffs(
            &self.grid,
            (&self.coeffs + &c.coeffs).mapv(|z| z * 0.5),
            true,
        )
    }

    /// Imaginary part f₂ of f = f₁ + i f₂.
    pub fn imag_part(&self) -> Self {
        let c = self.conj();
        Self::from_coeffs(
            &self.grid,
            (&self.coeffs - &c.coeffs).mapv(|z| z * Complex64::new(0.0, -0.5)),
            true,
        )
    }

    /// Averages each conjugate pair so the symmetry holds exactly and drops
    /// the unpaired Nyquist modes. Used on outputs that are real analytically.
    pub(crate) fn symmetrize(&mut self) {
        let n = self.grid.n();
        let g = self.grid.clone();
        for i1 in 0..n {
            for i2 in 0..n {
                let k = g.wavevector(i1, i2);
                if !g.in_symmetric_range(k) {
                    self.coeffs[[i1, i2]] = ZERO;
                    continue;
                }
                let (j1, j2) = (g.negated_index(i1), g.negated_index(i2));
                if (i1, i2) < (j1, j2) {
                    let avg = (self.coeffs[[i1, i2]] + self.coeffs[[j1, j2]].conj()) * 0.5;
                    self.coeffs[[i1, i2]] = avg;
                    self.coeffs[[j1, j2]] = avg.conj();
                }
            }
        }
        self.coeffs[[0, 0]] = ZERO;
        self.is_real = true;
    }

    /// Nonzero coefficients as (k₁, k₂, re, im), sorted by (k₁, k₂).
    pub fn entries(&self) -> Vec<(i64, i64, f64, f64)> {
        let mut out: Vec<_> = self
            .grid
            .wavevectors()
            .filter_map(|((i1, i2), k)| {
                let c = self.coeffs[[i1, i2]];
                (c != ZERO).then_some((k.0, k.1, c.re, c.im))
            })
            .collect();
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }

    pub fn to_snapshot(&self) -> FieldSnapshot {
        FieldSnapshot {
            n: self.grid.n(),
            is_real: self.is_real,
            entries: self.entries(),
        }
    }

    pub fn from_snapshot(snap: &FieldSnapshot) -> Result<Self> {
        let grid = SpectralGrid::new(snap.n)?;
        let entries: Vec<_> = snap
            .entries
            .iter()
            .map(|&(k1, k2, re, im)| ((k1, k2), Complex64::new(re, im)))
            .collect();
        let mut field = Self::from_modes(&grid, &entries, false)?;
        if snap.is_real {
            let scale = field.max_abs().max(f64::MIN_POSITIVE);
            if field.reality_defect() > 1e-14 * scale {
                return Err(TqgError::Parse(
                    "snapshot flagged real but not conjugate symmetric".into(),
                ));
            }
            field.is_real = true;
        }
        Ok(field)
    }
}

/// JSON snapshot: `{"n": N, "is_real": bool, "entries": [[k1,k2,re,im], …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSnapshot {
    pub n: usize,
    #[serde(default)]
    pub is_real: bool,
    pub entries: Vec<(i64, i64, f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct VectorSpectralField {
    pub x1: SpectralField,
    pub x2: SpectralField,
}

impl VectorSpectralField {
    pub fn new(x1: SpectralField, x2: SpectralField) -> Result<Self> {
        x1.check_grid(&x2)?;
        Ok(Self { x1, x2 })
    }

    pub fn zeros(grid: &SpectralGrid) -> Self {
        Self {
            x1: SpectralField::zeros(grid),
            x2: SpectralField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.x1.grid()
    }

    pub fn is_real(&self) -> bool {
        self.x1.is_real() && self.x2.is_real()
    }

    pub fn is_zero(&self) -> bool {
        self.x1.is_zero() && self.x2.is_zero()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            x1: self.x1.scaled(factor),
            x2: self.x2.scaled(factor),
        }
    }

    pub fn components(&self) -> [&SpectralField; 2] {
        [&self.x1, &self.x2]
    }

    pub fn real_part(&self) -> Self {
        Self {
            x1: self.x1.real_part(),
            x2: self.x2.real_part(),
        }
    }

    pub fn imag_part(&self) -> Self {
        Self {
            x1: self.x1.imag_part(),
            x2: self.x2.imag_part(),
        }
    }

    /// max_k |k·û_k|.
    pub fn divergence_defect(&self) -> f64 {
        self.grid()
            .wavevectors()
            .map(|((i1, i2), k)| {
                let d = self.x1.coeffs[[i1, i2]] * k.0 as f64 + self.x2.coeffs[[i1, i2]] * k.1 as f64;
                d.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Largest pointwise |u(x_j)| on the collocation grid.
    pub fn max_physical_magnitude(&self) -> f64 {
        let a = self.x1.to_physical();
        let b = self.x2.to_physical();
        a.iter()
            .zip(b.iter())
            .map(|(u, v)| (u.norm_sqr() + v.norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }
}

/// ∇⊥ψ = (−∂₂ψ, ∂₁ψ).
pub fn perp_gradient(psi: &SpectralField) -> VectorSpectralField {
    VectorSpectralField {
        x1: psi.derivative(Axis::X2).scaled_real(-1.0),
        x2: psi.derivative(Axis::X1),
    }
}

/// Random field with coefficients
/// amplitude·ρ_k·e^{iα_k}·e^{−φ*|k|}·(1+|k|)^{−p}, ρ_k ∈ [½, 1], α_k ∈ [0, 2π).
/// Nyquist modes are left empty so real fields are exactly symmetric.
pub fn random_gevrey_field(
    grid: &SpectralGrid,
    seed: u64,
    phi_star: f64,
    p: f64,
    amplitude: f64,
    real: bool,
) -> SpectralField {
    random_gevrey_field_banded(grid, seed, phi_star, p, amplitude, real, None)
}

/// As [`random_gevrey_field`], restricted to |k₁|, |k₂| ≤ `band`.
pub fn random_gevrey_field_banded(
    grid: &SpectralGrid,
    seed: u64,
    phi_star: f64,
    p: f64,
    amplitude: f64,
    real: bool,
    band: Option<i64>,
) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = band.unwrap_or(i64::MAX).min(grid.k_max() - 1);
    let mut coeffs = Array2::zeros((grid.n(), grid.n()));
    for ((i1, i2), k) in grid.wavevectors() {
        if k == (0, 0) || k.0.abs() > limit || k.1.abs() > limit {
            continue;
        }
        // one draw per conjugate pair for real fields
        if real && (k.0, k.1) < (-k.0, -k.1) {
            continue;
        }
        let rho: f64 = rng.random_range(0.5..=1.0);
        let alpha: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let kn = ((k.0 * k.0 + k.1 * k.1) as f64).sqrt();
        let mag = amplitude * rho * (-phi_star * kn).exp() * (1.0 + kn).powf(-p);
        let c = Complex64::from_polar(mag, alpha);
        coeffs[[i1, i2]] = c;
        if real {
            coeffs[[grid.negated_index(i1), grid.negated_index(i2)]] = c.conj();
        }
    }
    SpectralField::from_coeffs(grid, coeffs, real)
}
