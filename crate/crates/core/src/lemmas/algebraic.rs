use serde::{Deserialize, Serialize};

use super::{LemmaParameters, LemmaReport};
use crate::error::{Result, TqgError};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicTerms {
    pub lhs: f64,
    pub rhs: f64,
}

/// |ξ^r e^{φξ} − η^r e^{φη}| and |ξ−η|[(|ξ−η|^{r−1} + η^{r−1}) + φ(|ξ−η|^r + η^r)e^{φ(|ξ−η|+η)}].
pub fn algebraic_ratio(r: f64, phi: f64, xi: f64, eta: f64) -> AlgebraicTerms {
    let f = |x: f64| x.powf(r) * (phi * x).exp();
    let d = (xi - eta).abs();
    let bracket = (d.powf(r - 1.0) + eta.powf(r - 1.0))
        + phi * (d.powf(r) + eta.powf(r)) * (phi * (d + eta)).exp();
    AlgebraicTerms {
        lhs: (f(xi) - f(eta)).abs(),
        rhs: d * bracket,
    }
}

/// Scans every (ξ, η, φ) triple. Diagonal points ξ = η must give LHS = 0;
/// their largest |LHS| is reported as the `diagonal_lhs` constant and any
/// nonzero value is counted as a violation.
pub fn verify_algebraic(r: f64, phi_grid: &[f64], xi_grid: &[f64], eta_grid: &[f64]) -> Result<LemmaReport> {
    if !(r >= 1.0) {
        return Err(TqgError::InvalidArgument(format!("r must be >= 1, got {r}")));
    }
    if phi_grid.iter().chain(xi_grid).chain(eta_grid).any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(TqgError::InvalidArgument("grids must hold nonnegative finite values".into()));
    }
    let mut ratios = Vec::with_capacity(phi_grid.len() * xi_grid.len() * eta_grid.len());
    let mut diagonal_lhs: f64 = 0.0;
    let mut diagonal_points = 0usize;
    for &phi in phi_grid {
        for &xi in xi_grid {
            for &eta in eta_grid {
                let t = algebraic_ratio(r, phi, xi, eta);
                if xi == eta {
                    diagonal_lhs = diagonal_lhs.max(t.lhs);
                    diagonal_points += 1;
                } else {
                    ratios.push(t.lhs / t.rhs);
                }
            }
        }
    }
    let mut report = LemmaReport::from_ratios(
        "algebraic",
        &ratios,
        LemmaParameters {
            r: Some(r),
            ..Default::default()
        },
    );
    if diagonal_lhs != 0.0 {
        report.violations += 1;
    }
    report.constants.insert("diagonal_lhs".into(), diagonal_lhs);
    report.constants.insert("diagonal_points".into(), diagonal_points as f64);
    Ok(report)
}
