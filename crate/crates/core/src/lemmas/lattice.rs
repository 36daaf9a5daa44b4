use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TqgError};

/// Radii used when none are given.
pub const DEFAULT_RADII: [f64; 5] = [125.0, 250.0, 500.0, 1000.0, 2000.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeRow {
    #[serde(rename = "R")]
    pub radius: f64,
    pub partial_sum: f64,
    /// Estimated remainder limit − partial_sum (convergent case only).
    pub tail_estimate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeTable {
    pub r: f64,
    pub rows: Vec<LatticeRow>,
    /// Extrapolated Σ over the whole punctured lattice, r > 5/2 only.
    pub limit: Option<f64>,
    /// Power q in a tail ∝ R^q fitted from the last three radii.
    pub tail_exponent: Option<f64>,
}

#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Σ_{0<|j|≤R} |j|^{−(2r−3)} over j ∈ ℤ² for each R, with tail model
/// C·R^{−(2r−5)} when r > 5/2.
pub fn lattice_sum(r: f64, radii: &[f64]) -> Result<LatticeTable> {
    lattice_sum_with(r, radii)
}

pub fn lattice_sum_with(r: f64, radii: &[f64]) -> Result<LatticeTable> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(TqgError::InvalidArgument(format!("r must be > 0, got {r}")));
    }
    if radii.iter().any(|x| !(x.is_finite() && *x >= 0.0)) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TqgError::InvalidArgument("radii must be nonnegative and strictly increasing".into()));
    }
    let half_power = -(r - 1.5);
    let r_max = radii.last().copied().unwrap_or(0.0);
    let bounds: Vec<f64> = radii.iter().map(|x| x * x).collect();
    let mut bins = vec![Compensated::default(); radii.len()];
    let jmax = r_max.floor() as i64;
    // one quadrant {j₁ > 0, j₂ ≥ 0}; its four rotations tile ℤ² \ {0}
    for j1 in 1..=jmax {
        let mut j2 = 0i64;
        loop {
            let d2 = (j1 * j1 + j2 * j2) as f64;
            if d2 > r_max * r_max {
                break;
            }
            let bin = bounds.partition_point(|&b| b < d2);
            bins[bin].add(4.0 * d2.powf(half_power));
            j2 += 1;
        }
    }
    let mut running = Compensated::default();
    let mut rows: Vec<LatticeRow> = radii
        .iter()
        .zip(bins.iter())
        .map(|(&radius, bin)| {
            running.add(bin.value());
            LatticeRow {
                radius,
                partial_sum: running.value(),
                tail_estimate: None,
            }
        })
        .collect();

    let usable: Vec<&LatticeRow> = rows.iter().filter(|row| row.radius >= 1.0).collect();
    let a = 2.0 * r - 5.0;
    let limit = if a > 0.0 && usable.len() >= 2 {
        let (p, l) = (usable[usable.len() - 2], usable[usable.len() - 1]);
        let c = (l.partial_sum - p.partial_sum) / (p.radius.powf(-a) - l.radius.powf(-a));
        Some(l.partial_sum + c * l.radius.powf(-a))
    } else {
        None
    };
    let tail_exponent = if usable.len() >= 3 {
        let t = &usable[usable.len() - 3..];
        fit_tail_power(
            [t[0].radius, t[1].radius, t[2].radius],
            [t[0].partial_sum, t[1].partial_sum, t[2].partial_sum],
        )
        .map(|a| -a)
    } else {
        None
    };
    if let Some(limit) = limit {
        for row in rows.iter_mut().filter(|row| row.radius >= 1.0) {
            row.tail_estimate = Some(limit - row.partial_sum);
        }
    }
    Ok(LatticeTable {
        r,
        rows,
        limit,
        tail_exponent,
    })
}

/// a > 0 with (S₃−S₂)/(S₂−S₁) = (R₂^{−a}−R₃^{−a})/(R₁^{−a}−R₂^{−a}).
fn fit_tail_power(radii: [f64; 3], sums: [f64; 3]) -> Option<f64> {
    let target = (sums[2] - sums[1]) / (sums[1] - sums[0]);
    if !(target.is_finite() && target > 0.0) {
        return None;
    }
    let [r1, r2, r3] = radii;
    let g = |a: f64| (r2.powf(-a) - r3.powf(-a)) / (r1.powf(-a) - r2.powf(-a));
    // g decreases in a from ln(R₃/R₂)/ln(R₂/R₁) at a → 0
    let (mut lo, mut hi) = (1e-9, 60.0);
    if target >= g(lo) || target <= g(hi) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Least-squares slope of the partial sums against ln R (rows with R ≥ 1).
pub fn log_slope(table: &LatticeTable) -> Option<f64> {
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|row| row.radius >= 1.0)
        .map(|row| (row.radius.ln(), row.partial_sum))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// π(2r−3)/(2r−5).
pub fn leading_term(r: f64) -> f64 {
    PI * (2.0 * r - 3.0) / (2.0 * r - 5.0)
}

/// (r, extrapolated limit / leading term) for each r > 5/2.
pub fn leading_term_ratio(rs: &[f64], radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    rs.iter()
        .map(|&r| {
            if !(r > 2.5) {
                return Err(TqgError::InvalidArgument(format!("r must be > 5/2, got {r}")));
            }
            let limit = lattice_sum(r, radii)?
                .limit
                .ok_or_else(|| TqgError::InvalidArgument("need at least two radii >= 1".into()))?;
            Ok((r, limit / leading_term(r)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(r: f64, radius: f64) -> f64 {
        let m = radius.floor() as i64;
        let mut s = 0.0;
        for a in -m..=m {
            for b in -m..=m {
                let d2 = (a * a + b * b) as f64;
                if d2 > 0.0 && d2 <= radius * radius {
                    s += d2.powf(-(r - 1.5));
                }
            }
        }
        s
    }

    #[test]
    fn matches_full_lattice_enumeration() {
        for r in [2.5, 3.0, 4.2] {
            let t = lattice_sum(r, &[0.5, 1.0, 5.0, 12.3, 30.0]).unwrap();
            assert_eq!(t.rows[0].partial_sum, 0.0);
            assert_eq!(t.rows[1].partial_sum, 4.0);
            for row in &t.rows {
                assert!((row.partial_sum - brute(r, row.radius)).abs() < 1e-12 * row.partial_sum.max(1.0));
            }
            assert!(t.rows.windows(2).all(|w| w[0].partial_sum <= w[1].partial_sum));
        }
    }

    #[test]
    fn divergent_case_has_no_limit() {
        let t = lattice_sum(2.5, &[10.0, 20.0, 40.0]).unwrap();
        assert!(t.limit.is_none());
        assert!(t.rows.iter().all(|row| row.tail_estimate.is_none()));
        let slope = log_slope(&lattice_sum(2.5, &[50.0, 100.0, 200.0, 400.0]).unwrap()).unwrap();
        assert!((slope / (2.0 * PI) - 1.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn convergent_tail() {
        let t = lattice_sum(3.0, &[100.0, 200.0, 400.0, 800.0]).unwrap();
        let q = t.tail_exponent.unwrap();
        assert!((q + 1.0).abs() < 0.2, "{q}");
        let tails: Vec<f64> = t.rows.iter().map(|row| row.tail_estimate.unwrap()).collect();
        assert!(tails.windows(2).all(|w| w[1] < w[0]));
        assert!(lattice_sum(3.0, &[2.0, 1.0]).is_err());
        assert!(leading_term_ratio(&[2.5], &[10.0, 20.0]).is_err());
    }
}
