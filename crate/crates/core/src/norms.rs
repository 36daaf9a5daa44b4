//! Fourier multipliers |k|^a and e^{φ|k|}, homogeneous Sobolev and Gevrey
//! norms, and an estimator for the analyticity radius of a spectrum.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TqgError};
use crate::field::{SpectralField, VectorSpectralField};

/// e^{φ|k|} may not exceed this value.
pub const WEIGHT_CAP: f64 = 1e300;

fn ln_weight_cap() -> f64 {
    WEIGHT_CAP.ln()
}

/// Sobolev order r and Gevrey radius φ for the weight e^{φ|k|}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GevreyParams {
    pub r: f64,
    pub phi: f64,
}

impl GevreyParams {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        if !(r >= 0.0 && phi >= 0.0) {
            return Err(TqgError::InvalidArgument(format!(
                "gevrey parameters need r >= 0 and phi >= 0, got r = {r}, phi = {phi}"
            )));
        }
        Ok(Self { r, phi })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusFit {
    pub phi_est: f64,
    pub p_est: f64,
    pub residual: f64,
}

/// Pairwise summation over a fixed order, so reductions are reproducible.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// sqrt(Σ t²) without intermediate overflow.
fn scaled_l2(terms: &[f64]) -> f64 {
    let scale = terms.iter().fold(0.0_f64, |m, &t| m.max(t.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let squares: Vec<f64> = terms.iter().map(|t| (t / scale).powi(2)).collect();
    scale * pairwise_sum(&squares).sqrt()
}

fn modulus(k: (i64, i64)) -> f64 {
    ((k.0 * k.0 + k.1 * k.1) as f64).sqrt()
}

/// f̂_k ↦ |k|^a f̂_k; Λ^ρ corresponds to a = 2ρ.
pub fn symbol_pow(field: &SpectralField, a: f64) -> SpectralField {
    if a == 0.0 {
        return field.clone();
    }
    field.map_symbol(|k| Complex64::new(modulus(k).powf(a), 0.0), true)
}

fn check_weight(field: &SpectralField, phi: f64) -> Result<()> {
    if !(phi >= 0.0) {
        return Err(TqgError::InvalidArgument(format!("phi must be >= 0, got {phi}")));
    }
    let cap = ln_weight_cap();
    let worst = field
        .grid()
        .wavevectors()
        .filter(|((i1, i2), _)| field.coeffs()[[*i1, *i2]] != Complex64::new(0.0, 0.0))
        .map(|(_, k)| modulus(k))
        .filter(|&kn| phi * kn > cap)
        .fold(f64::INFINITY, f64::min);
    if worst.is_finite() {
        return Err(TqgError::WeightOverflow { shell: worst, phi });
    }
    Ok(())
}

/// f̂_k ↦ e^{φ|k|} f̂_k.
pub fn gevrey_weight(field: &SpectralField, phi: f64) -> Result<SpectralField> {
    check_weight(field, phi)?;
    if phi == 0.0 {
        return Ok(field.clone());
    }
    Ok(field.map_symbol(|k| Complex64::new((phi * modulus(k)).exp(), 0.0), true))
}

/// (Σ_k |k|^{2r} |f̂_k|²)^{1/2}.
pub fn sobolev_norm(field: &SpectralField, r: f64) -> f64 {
    let terms: Vec<f64> = field
        .grid()
        .wavevectors()
        .map(|((i1, i2), k)| {
            let c = field.coeffs()[[i1, i2]];
            if k == (0, 0) || c.norm() == 0.0 {
                0.0
            } else {
                modulus(k).powf(r) * c.norm()
            }
        })
        .collect();
    scaled_l2(&terms)
}

pub fn gevrey_norm(field: &SpectralField, params: GevreyParams) -> Result<f64> {
    Ok(sobolev_norm(&gevrey_weight(field, params.phi)?, params.r))
}

/// Componentwise norm of a vector field, squares summed.
pub fn vector_gevrey_norm(u: &VectorSpectralField, params: GevreyParams) -> Result<f64> {
    let a = gevrey_norm(&u.x1, params)?;
    let b = gevrey_norm(&u.x2, params)?;
    Ok(a.hypot(b))
}

pub fn vector_sobolev_norm(u: &VectorSpectralField, r: f64) -> f64 {
    sobolev_norm(&u.x1, r).hypot(sobolev_norm(&u.x2, r))
}

/// ‖e^{φΛ^{1/2}}A‖²_{H^{rA}} + ‖e^{φΛ^{1/2}}B‖²_{H^{rB}}.
pub fn product_norm_sq(
    a: &SpectralField,
    ra: f64,
    b: &SpectralField,
    rb: f64,
    phi: f64,
) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(TqgError::GridMismatch(a.grid().n(), b.grid().n()));
    }
    let na = gevrey_norm(a, GevreyParams { r: ra, phi })?;
    let nb = gevrey_norm(b, GevreyParams { r: rb, phi })?;
    Ok(na * na + nb * nb)
}

/// Energy per exact shell |k|² = const, enough to re-evaluate any
/// Sobolev/Gevrey norm of the field without the coefficients.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShellSpectrum {
    /// (|k|², Σ_{shell} |f̂_k|²), ascending in |k|².
    pub shells: Vec<(u64, f64)>,
}

impl ShellSpectrum {
    pub fn of(field: &SpectralField) -> Self {
        Self::accumulate([field])
    }

    pub fn of_vector(u: &VectorSpectralField) -> Self {
        Self::accumulate(u.components())
    }

    fn accumulate<'a>(fields: impl IntoIterator<Item = &'a SpectralField>) -> Self {
        let mut map: BTreeMap<u64, f64> = BTreeMap::new();
        for f in fields {
            for ((i1, i2), k) in f.grid().wavevectors() {
                let e = f.coeffs()[[i1, i2]].norm_sqr();
                if k != (0, 0) && e > 0.0 {
                    *map.entry((k.0 * k.0 + k.1 * k.1) as u64).or_insert(0.0) += e;
                }
            }
        }
        Self {
            shells: map.into_iter().collect(),
        }
    }

    /// ‖e^{φΛ^{1/2}} f‖²_{H^r}.
    pub fn norm_sq(&self, r: f64, phi: f64) -> Result<f64> {
        let cap = ln_weight_cap();
        let mut terms = Vec::with_capacity(self.shells.len());
        for &(k2, e) in &self.shells {
            let kn = (k2 as f64).sqrt();
            if phi * kn > cap {
                return Err(TqgError::WeightOverflow { shell: kn, phi });
            }
            terms.push((k2 as f64).powf(r) * (2.0 * phi * kn).exp() * e);
        }
        Ok(pairwise_sum(&terms))
    }
}

/// Fits log max_{shell}|f̂_k| ≈ C − φ|k| − p·log(1+|k|) over the exact shells
/// |k|² = const with shell_min ≤ |k| ≤ shell_max, weighting each shell by
/// its lattice population.
pub fn estimate_radius(field: &SpectralField, shell_min: f64, shell_max: f64) -> Result<RadiusFit> {
    // |k|² -> (max |f̂|, population)
    let mut shells: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for ((i1, i2), k) in field.grid().wavevectors() {
        let kn = modulus(k);
        if k == (0, 0) || kn < shell_min || kn > shell_max {
            continue;
        }
        let entry = shells.entry((k.0 * k.0 + k.1 * k.1) as u64).or_insert((0.0, 0));
        entry.0 = entry.0.max(field.coeffs()[[i1, i2]].norm());
        entry.1 += 1;
    }
    let points: Vec<(f64, f64, f64)> = shells
        .into_iter()
        .filter(|(_, (m, _))| *m > 0.0)
        .map(|(k2, (m, pop))| ((k2 as f64).sqrt(), m.ln(), pop as f64))
        .collect();
    if points.len() < 4 {
        return Err(TqgError::TooFewShells(points.len()));
    }

    // weighted normal equations for y = c0 + c1·(−x) + c2·(−log(1+x))
    let mut ata = [[0.0; 3]; 3];
    let mut atb = [0.0; 3];
    for &(x, y, w) in &points {
        let row = [1.0, -x, -(1.0 + x).ln()];
        for i in 0..3 {
            atb[i] += w * row[i] * y;
            for j in 0..3 {
                ata[i][j] += w * row[i] * row[j];
            }
        }
    }
    let coef = solve3(ata, atb).ok_or_else(|| {
        TqgError::InvalidArgument("radius fit is degenerate (shells too few or collinear)".into())
    })?;
    let sq: Vec<f64> = points
        .iter()
        .map(|&(x, y, _)| {
            let pred = coef[0] - coef[1] * x - coef[2] * (1.0 + x).ln();
            (y - pred).powi(2)
        })
        .collect();
    let residual = (pairwise_sum(&sq) / points.len() as f64).sqrt();
    Ok(RadiusFit {
        phi_est: coef[1],
        p_est: coef[2],
        residual,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for c in col..3 {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}
