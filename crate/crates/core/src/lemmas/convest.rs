use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{trial_fields, LemmaParameters, LemmaReport, TrialFields};
use crate::dynamics::{advect, inner_product_complex, AdvectionMethod};
use crate::error::{Result, TqgError};
use crate::field::{SpectralField, VectorSpectralField};
use crate::grid::SpectralGrid;
use crate::norms::{gevrey_norm, gevrey_weight, symbol_pow, vector_gevrey_norm, vector_sobolev_norm, sobolev_norm, GevreyParams};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvestTerms {
    /// |⟨W(u·∇v), Ww⟩| with W = Λ^{r/2}e^{φΛ^{1/2}}.
    pub lhs: f64,
    /// ‖u‖_{H^r}‖v‖_{H^r}‖w‖_{H^r}.
    pub rhs_sobolev: f64,
    /// φ(‖e v‖_{H^r}‖e u‖_{H^{r+1/2}} + ‖e u‖_{H^r}‖e v‖_{H^{r+1/2}})‖e w‖_{H^{r+1/2}}.
    pub rhs_gevrey: f64,
    pub ratio: f64,
}

/// Λ^{r/2}e^{φΛ^{1/2}} f.
fn weighted(f: &SpectralField, r: f64, phi: f64) -> Result<SpectralField> {
    Ok(symbol_pow(&gevrey_weight(f, phi)?, r))
}

fn check_band(fields: &TrialFields) -> Result<()> {
    let grid = fields.v.grid();
    let band = grid.n() as i64 / 3;
    for f in [&fields.u.x1, &fields.u.x2, &fields.v, &fields.w] {
        if f.grid() != grid {
            return Err(TqgError::GridMismatch(grid.n(), f.grid().n()));
        }
        let outside = grid
            .wavevectors()
            .any(|((i1, i2), k)| (k.0.abs() > band || k.1.abs() > band) && f.coeffs()[[i1, i2]].norm() > 0.0);
        if outside {
            return Err(TqgError::InvalidArgument(format!(
                "trial fields must be band-limited to |k_i| <= {band}"
            )));
        }
    }
    Ok(())
}

struct Norms {
    u: f64,
    v: f64,
    w: f64,
    eu: f64,
    ev: f64,
    eu_half: f64,
    ev_half: f64,
    ew_half: f64,
    u_minus_one: f64,
}

fn norms(f: &TrialFields, r: f64, phi: f64) -> Result<Norms> {
    let p = |r| GevreyParams { r, phi };
    Ok(Norms {
        u: vector_sobolev_norm(&f.u, r),
        v: sobolev_norm(&f.v, r),
        w: sobolev_norm(&f.w, r),
        eu: vector_gevrey_norm(&f.u, p(r))?,
        ev: gevrey_norm(&f.v, p(r))?,
        eu_half: vector_gevrey_norm(&f.u, p(r + 0.5))?,
        ev_half: gevrey_norm(&f.v, p(r + 0.5))?,
        ew_half: gevrey_norm(&f.w, p(r + 0.5))?,
        u_minus_one: vector_sobolev_norm(&f.u, r - 1.0),
    })
}

fn total_pairing(f: &TrialFields, r: f64, phi: f64) -> Result<Complex64> {
    let transport = advect(&f.u, &f.v, AdvectionMethod::Convolution)?;
    inner_product_complex(&weighted(&transport, r, phi)?, &weighted(&f.w, r, phi)?)
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

pub fn convest_terms(u: &VectorSpectralField, v: &SpectralField, w: &SpectralField, r: f64, phi: f64) -> Result<ConvestTerms> {
    let fields = TrialFields {
        u: u.clone(),
        v: v.clone(),
        w: w.clone(),
    };
    check_band(&fields)?;
    terms_of(&fields, r, phi)
}

fn terms_of(fields: &TrialFields, r: f64, phi: f64) -> Result<ConvestTerms> {
    let lhs = total_pairing(fields, r, phi)?.norm();
    let n = norms(fields, r, phi)?;
    let rhs_sobolev = n.u * n.v * n.w;
    let rhs_gevrey = phi * (n.ev * n.eu_half + n.eu * n.ev_half) * n.ew_half;
    Ok(ConvestTerms {
        lhs,
        rhs_sobolev,
        rhs_gevrey,
        ratio: ratio(lhs, rhs_sobolev + rhs_gevrey),
    })
}

fn check_params(r: f64, phi: f64) -> Result<()> {
    if !(r > 2.5) {
        return Err(TqgError::InvalidArgument(format!("r must be > 5/2, got {r}")));
    }
    if !(phi >= 0.0 && phi.is_finite()) {
        return Err(TqgError::InvalidArgument(format!("phi must be >= 0, got {phi}")));
    }
    Ok(())
}

pub fn verify_convest(grid: &SpectralGrid, r: f64, phi: f64, trials: usize, seed: u64) -> Result<LemmaReport> {
    check_params(r, phi)?;
    let ratios: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| terms_of(&trial_fields(grid, seed, t, phi), r, phi).map(|x| x.ratio))
        .collect::<Result<_>>()?;
    Ok(LemmaReport::from_ratios(
        "convest",
        &ratios,
        LemmaParameters {
            r: Some(r),
            phi: Some(phi),
            n: Some(grid.n()),
            seed: Some(seed),
        },
    ))
}

/// Decomposition of the weighted transport pairing into the commuted part
/// I₁ and the commutator I₂, with the triple sums that bound I₂.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub total: Complex64,
    pub i1: Complex64,
    /// Commutator evaluated directly from its triple-sum form.
    pub i2: Complex64,
    /// |I₁ + I₂ − total| / |total|.
    pub identity_defect: f64,
    pub i2a: f64,
    pub i2b: f64,
    /// φ‖e u‖_{H^r}‖e v‖_{H^{r+1/2}}‖e w‖_{H^{r+1/2}}; degenerate at φ = 0.
    pub i1_bound: Option<f64>,
    /// ‖u‖_{H^{r−1}}‖e v‖_{H^{r+1/2}}‖e w‖_{H^{r+1/2}}.
    pub i1_pre_bound: f64,
    /// ‖u‖_{H^r}‖v‖_{H^r}‖w‖_{H^r}.
    pub i2a_bound: f64,
    /// φ(‖e v‖_{H^r}‖e u‖_{H^{r+1/2}} + ‖e u‖_{H^r}‖e v‖_{H^{r+1/2}})‖e w‖_{H^{r+1/2}}.
    pub i2b_bound: Option<f64>,
    pub lemma_ratio: f64,
}

type Modes = Vec<((i64, i64), f64, Complex64, Complex64)>;

fn nonzero_vector(u: &VectorSpectralField) -> Modes {
    u.grid()
        .wavevectors()
        .filter_map(|((i1, i2), k)| {
            let a = u.x1.coeffs()[[i1, i2]];
            let b = u.x2.coeffs()[[i1, i2]];
            (a.norm() > 0.0 || b.norm() > 0.0).then(|| (k, (a.norm_sqr() + b.norm_sqr()).sqrt(), a, b))
        })
        .collect()
}

fn modulus(k: (i64, i64)) -> f64 {
    ((k.0 * k.0 + k.1 * k.1) as f64).sqrt()
}

pub fn verify_i1_i2_split(
    u: &VectorSpectralField,
    v: &SpectralField,
    w: &SpectralField,
    r: f64,
    phi: f64,
) -> Result<SplitRecord> {
    let fields = TrialFields {
        u: u.clone(),
        v: v.clone(),
        w: w.clone(),
    };
    check_band(&fields)?;
    split_terms(&fields, r, phi)
}

pub(crate) fn split_terms(f: &TrialFields, r: f64, phi: f64) -> Result<SplitRecord> {
    let grid = f.v.grid();
    let total = total_pairing(f, r, phi)?;
    let ww = weighted(&f.w, r, phi)?;
    let i1 = inner_product_complex(&advect(&f.u, &weighted(&f.v, r, phi)?, AdvectionMethod::Convolution)?, &ww)?;

    let weight = |x: f64| x.powf(r) * (phi * x).exp();
    let us = nonzero_vector(&f.u);
    let vs: Vec<((i64, i64), Complex64)> = grid
        .wavevectors()
        .filter_map(|((i1, i2), k)| {
            let c = f.v.coeffs()[[i1, i2]];
            (c.norm() > 0.0).then_some((k, c))
        })
        .collect();
    let i = Complex64::new(0.0, 1.0);
    let mut i2 = Complex64::new(0.0, 0.0);
    let mut i2a = 0.0;
    let mut i2b = 0.0;
    for &(jv, jn, a, b) in &us {
        let j = modulus(jv);
        for &(kv, vk) in &vs {
            let l = (jv.0 + kv.0, jv.1 + kv.1);
            if l == (0, 0) || !grid.contains(l) {
                continue;
            }
            let wl = f.w.coeff(l);
            if wl.norm() == 0.0 {
                continue;
            }
            let (k, ell) = (modulus(kv), modulus(l));
            let (wk_, wl_) = (weight(k), weight(ell));
            let transport = (a * (i * kv.0 as f64) + b * (i * kv.1 as f64)) * vk;
            i2 += transport * wl.conj() * wl_ * (wl_ - wk_);
            let mags = jn * vk.norm() * wl.norm();
            i2a += ell.powf(r) * mags * (j.powf(r) * k + k.powf(r) * j);
            i2b += phi * mags * wl_ * (j.powf(r + 1.0) * k + k.powf(r + 1.0) * j) * (phi * (j + k)).exp();
        }
    }
    let area = TAU * TAU;
    let (i2, i2a, i2b) = (i2 * area, i2a * area, i2b * area);

    let n = norms(f, r, phi)?;
    let defect = (i1 + i2 - total).norm();
    let rhs = n.u * n.v * n.w + phi * (n.ev * n.eu_half + n.eu * n.ev_half) * n.ew_half;
    Ok(SplitRecord {
        total,
        i1,
        i2,
        identity_defect: if total.norm() > 0.0 { defect / total.norm() } else { defect },
        i2a,
        i2b,
        i1_bound: (phi > 0.0).then(|| phi * n.eu * n.ev_half * n.ew_half),
        i1_pre_bound: n.u_minus_one * n.ev_half * n.ew_half,
        i2a_bound: n.u * n.v * n.w,
        i2b_bound: (phi > 0.0).then(|| phi * (n.ev * n.eu_half + n.eu * n.ev_half) * n.ew_half),
        lemma_ratio: ratio(total.norm(), rhs),
    })
}

/// Split records over an ensemble; the report's ratio is |I₂|/(I₂^A + I₂^B)
/// and the other fitted constants are listed by name.
pub fn split_report(grid: &SpectralGrid, r: f64, phi: f64, trials: usize, seed: u64) -> Result<(LemmaReport, Vec<SplitRecord>)> {
    check_params(r, phi)?;
    let records: Vec<SplitRecord> = (0..trials as u64)
        .into_par_iter()
        .map(|t| split_terms(&trial_fields(grid, seed, t, phi), r, phi))
        .collect::<Result<_>>()?;
    let max = |xs: &mut dyn Iterator<Item = f64>| xs.fold(0.0, f64::max);
    let split: Vec<f64> = records.iter().map(|x| ratio(x.i2.norm(), x.i2a + x.i2b)).collect();
    let mut report = LemmaReport::from_ratios(
        "split",
        &split,
        LemmaParameters {
            r: Some(r),
            phi: Some(phi),
            n: Some(grid.n()),
            seed: Some(seed),
        },
    );
    let mut constants = BTreeMap::new();
    constants.insert("lemma".to_string(), max(&mut records.iter().map(|x| x.lemma_ratio)));
    constants.insert("i2a".to_string(), max(&mut records.iter().map(|x| ratio(x.i2a, x.i2a_bound))));
    constants.insert("i1_pre".to_string(), max(&mut records.iter().map(|x| ratio(x.i1.norm(), x.i1_pre_bound))));
    constants.insert("identity_defect".to_string(), max(&mut records.iter().map(|x| x.identity_defect)));
    if phi > 0.0 {
        constants.insert(
            "i2b".to_string(),
            max(&mut records.iter().map(|x| ratio(x.i2b, x.i2b_bound.unwrap_or(f64::NAN)))),
        );
        constants.insert(
            "i1".to_string(),
            max(&mut records.iter().map(|x| ratio(x.i1.norm(), x.i1_bound.unwrap_or(f64::NAN)))),
        );
    }
    report.constants = constants;
    Ok((report, records))
}
