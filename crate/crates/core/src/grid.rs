//! Square Fourier grid on the 2π-periodic torus and its cached FFT plans.

use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, TqgError};

pub const MIN_MODES: usize = 4;
pub const MAX_MODES: usize = 1024;

/// Integer wavevector (k₁, k₂).
pub type Wavevector = (i64, i64);

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    padded_forward: Arc<dyn Fft<f64>>,
    padded_inverse: Arc<dyn Fft<f64>>,
}

/// N modes per axis, wavevectors k ∈ {−N/2+1, …, N/2}², stored in the
/// standard FFT layout (index i holds k = i for i ≤ N/2, k = i − N above).
#[derive(Clone)]
pub struct SpectralGrid {
    n: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid").field("n", &self.n).finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for SpectralGrid {}

impl SpectralGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n % 2 != 0 {
            return Err(TqgError::OddGridSize(n));
        }
        if !(MIN_MODES..=MAX_MODES).contains(&n) {
            return Err(TqgError::GridSizeOutOfRange(n));
        }
        let m = Self::padded_size_for(n);
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            padded_forward: planner.plan_fft_forward(m),
            padded_inverse: planner.plan_fft_inverse(m),
        };
        Ok(Self {
            n,
            plans: Arc::new(plans),
        })
    }

    fn padded_size_for(n: usize) -> usize {
        3 * n / 2
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Collocation points per axis on the dealiasing grid (3N/2).
    pub fn padded_n(&self) -> usize {
        Self::padded_size_for(self.n)
    }

    /// Number of stored modes, mean included.
    pub fn mode_count(&self) -> usize {
        self.n * self.n
    }

    pub fn k_min(&self) -> i64 {
        -(self.n as i64) / 2 + 1
    }

    pub fn k_max(&self) -> i64 {
        self.n as i64 / 2
    }

    pub fn contains(&self, k: Wavevector) -> bool {
        let r = self.k_min()..=self.k_max();
        r.contains(&k.0) && r.contains(&k.1)
    }

    /// True when neither component sits on the unpaired Nyquist value N/2.
    pub fn in_symmetric_range(&self, k: Wavevector) -> bool {
        k.0.abs() < self.k_max() && k.1.abs() < self.k_max()
    }

    pub fn wavenumber(&self, i: usize) -> i64 {
        wavenumber(i, self.n)
    }

    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    pub fn wavevector(&self, i1: usize, i2: usize) -> Wavevector {
        (self.wavenumber(i1), self.wavenumber(i2))
    }

    pub fn index(&self, k: Wavevector) -> Option<(usize, usize)> {
        self.contains(k)
            .then(|| (self.index_of(k.0), self.index_of(k.1)))
    }

    /// Index of −k under the discrete transform's periodicity (the Nyquist
    /// index maps to itself).
    pub fn negated_index(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    /// All wavevectors in storage order.
    pub fn wavevectors(&self) -> impl Iterator<Item = ((usize, usize), Wavevector)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i1| (0..n).map(move |i2| ((i1, i2), self.wavevector(i1, i2))))
    }

    pub(crate) fn fft2_inverse(&self, data: &mut Array2<Complex64>) {
        fft2(data, &self.plans.inverse);
    }

    pub(crate) fn fft2_forward(&self, data: &mut Array2<Complex64>) {
        fft2(data, &self.plans.forward);
    }

    pub(crate) fn padded_fft2_inverse(&self, data: &mut Array2<Complex64>) {
        fft2(data, &self.plans.padded_inverse);
    }

    pub(crate) fn padded_fft2_forward(&self, data: &mut Array2<Complex64>) {
        fft2(data, &self.plans.padded_forward);
    }
}

pub(crate) fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Unnormalized 2-D transform of a square row-major array: rows, then columns.
fn fft2(data: &mut Array2<Complex64>, plan: &Arc<dyn Fft<f64>>) {
    let len = plan.len();
    debug_assert_eq!(data.dim(), (len, len));
    let rows = data
        .as_slice_mut()
        .expect("spectral arrays are kept in standard layout");
    plan.process(rows);
    let mut transposed = data.t().as_standard_layout().into_owned();
    plan.process(
        transposed
            .as_slice_mut()
            .expect("freshly allocated array is contiguous"),
    );
    data.assign(&transposed.t());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n8_ranges() {
        let g = SpectralGrid::new(8).unwrap();
        assert_eq!((g.k_min(), g.k_max()), (-3, 4));
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        assert!(g.contains((4, -3)));
        assert!(!g.contains((-4, 0)));
    }

    #[test]
    fn n4_counts() {
        let g = SpectralGrid::new(4).unwrap();
        assert_eq!(g.mode_count(), 16);
        assert_eq!(g.wavevectors().filter(|(_, k)| *k != (0, 0)).count(), 15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(SpectralGrid::new(7).unwrap_err().to_string(), "N must be even");
        assert!(matches!(
            SpectralGrid::new(2),
            Err(TqgError::GridSizeOutOfRange(2))
        ));
        assert!(SpectralGrid::new(1026).is_err());
        assert!(SpectralGrid::new(1024).is_ok());
    }

    #[test]
    fn index_roundtrip() {
        let g = SpectralGrid::new(10).unwrap();
        for ((i1, i2), k) in g.wavevectors() {
            assert_eq!(g.index(k), Some((i1, i2)));
        }
        assert_eq!(g.negated_index(0), 0);
        assert_eq!(g.negated_index(5), 5);
        assert_eq!(g.negated_index(1), 9);
    }
}
