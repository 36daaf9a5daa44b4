use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{trial_field, trial_seed, LemmaParameters, LemmaReport};
use crate::dynamics::{helmholtz, velocity};
use crate::error::{Result, TqgError};
use crate::field::SpectralField;
use crate::grid::{SpectralGrid, Wavevector};
use crate::norms::{sobolev_norm, vector_sobolev_norm};

/// ‖∇⊥ψ‖²_{H^{r+1}} / ‖(Δ − 1)ψ‖²_{H^r}; None for ψ = 0.
pub fn veltovor_ratio(psi: &SpectralField, r: f64) -> Option<f64> {
    let omega = sobolev_norm(&helmholtz(psi), r).powi(2);
    if omega == 0.0 {
        return None;
    }
    Some(vector_sobolev_norm(&velocity(psi), r + 1.0).powi(2) / omega)
}

/// Ratio for ψ a single Fourier mode at k.
pub fn veltovor_single_mode(grid: &SpectralGrid, k: Wavevector, r: f64) -> Result<f64> {
    let psi = SpectralField::from_modes(grid, &[(k, num_complex::Complex64::new(1.0, 0.0))], false)?;
    veltovor_ratio(&psi, r).ok_or(TqgError::MeanMode)
}

pub fn verify_veltovor(grid: &SpectralGrid, r: f64, trials: usize, seed: u64) -> Result<LemmaReport> {
    if !(r >= 0.0) {
        return Err(TqgError::InvalidArgument(format!("r must be >= 0, got {r}")));
    }
    let ratios: Vec<Option<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
            veltovor_ratio(&trial_field(grid, &mut rng, 0.0), r)
        })
        .collect();
    let ratios: Vec<f64> = ratios.into_iter().flatten().collect();
    Ok(LemmaReport::from_ratios(
        "veltovor",
        &ratios,
        LemmaParameters {
            r: Some(r),
            phi: None,
            n: Some(grid.n()),
            seed: Some(seed),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_values() {
        let g = SpectralGrid::new(16).unwrap();
        for r in [0.0, 1.0, 2.5] {
            assert!((veltovor_single_mode(&g, (1, 0), r).unwrap() - 0.25).abs() < 1e-15);
            assert!((veltovor_single_mode(&g, (3, 4), r).unwrap() - 625.0 / 676.0).abs() < 1e-15);
        }
        assert!(veltovor_ratio(&SpectralField::zeros(&g), 1.0).is_none());
    }

    #[test]
    fn ensemble_below_one() {
        let g = SpectralGrid::new(16).unwrap();
        let rep = verify_veltovor(&g, 2.0, 200, 3).unwrap();
        assert_eq!(rep.trials, 200);
        assert!(rep.max_ratio < 1.0 && rep.max_ratio > 0.25);
        assert_eq!(rep, verify_veltovor(&g, 2.0, 200, 3).unwrap());
        assert!(verify_veltovor(&g, -1.0, 1, 0).is_err());
    }
}
