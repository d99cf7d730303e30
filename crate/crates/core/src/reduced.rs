//! Compact representation of channels of the form `H = B_R M B_Sᵀ`.
//!
//! Each tall factor is split as `B = Q C` with orthonormal `Q` (from the
//! eigen-decomposition of `Bᴴ B`), so `H = Q_R (C_R M C_Sᴴ) Q_Sᴴ` where the
//! source side factors `conj(B_S)`. The small core `K = C_R M C_Sᴴ` has the
//! same nonzero singular values as `H`, so rates can be computed without
//! ever forming the full matrix.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::capacity::hermitian_eigen;
use crate::scalar::Real;

/// Eigenvalues of the Gram matrix below this fraction of the largest are
/// treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedFactor<T: Real> {
    /// `N × r`, orthonormal columns.
    pub basis: DMatrix<Complex<T>>,
    /// `r × n`, with `basis · coefficients = B`.
    pub coefficients: DMatrix<Complex<T>>,
}

impl<T: Real> ReducedFactor<T> {
    pub fn rank(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn reconstruct(&self) -> DMatrix<Complex<T>> {
        &self.basis * &self.coefficients
    }
}

/// Splits `B = Q C` keeping only the numerically nonzero part of `Bᴴ B`.
pub fn reduce_factor<T: Real>(b: &DMatrix<Complex<T>>) -> ReducedFactor<T> {
    let n = b.ncols();
    if b.nrows() == 0 || n == 0 {
        return ReducedFactor {
            basis: DMatrix::zeros(b.nrows(), 0),
            coefficients: DMatrix::zeros(0, n),
        };
    }
    let (values, vectors) = hermitian_eigen(&(b.adjoint() * b));
    let top = values.first().copied().unwrap_or_else(T::zero).max(T::zero());
    let cut = top * T::lit(RANK_TOLERANCE);
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] > cut && values[i] > T::zero()).collect();
    let r = keep.len();
    let kept = DMatrix::from_fn(n, r, |row, c| vectors[(row, keep[c])]);
    let mut coefficients = kept.adjoint();
    let mut basis = b * &kept;
    for (c, &i) in keep.iter().enumerate() {
        let s = values[i].sqrt();
        coefficients.row_mut(c).scale_mut(s);
        basis.column_mut(c).unscale_mut(s);
    }
    ReducedFactor { basis, coefficients }
}

/// Both sides of a link in reduced form.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedLink<T: Real> {
    pub receive: ReducedFactor<T>,
    /// Factor of `conj(B_S)`.
    pub source: ReducedFactor<T>,
    pub receive_elements: usize,
    pub source_elements: usize,
}

impl<T: Real> ReducedLink<T> {
    pub fn new(receive_factor: &DMatrix<Complex<T>>, source_factor: &DMatrix<Complex<T>>) -> Self {
        Self {
            receive: reduce_factor(receive_factor),
            source: reduce_factor(&source_factor.map(|z| z.conj())),
            receive_elements: receive_factor.nrows(),
            source_elements: source_factor.nrows(),
        }
    }

    /// `K = C_R M C_Sᴴ`.
    pub fn core(&self, middle: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        &self.receive.coefficients * middle * self.source.coefficients.adjoint()
    }

    /// `Q_R K Q_Sᴴ`, the full `N_R × N_S` channel.
    pub fn expand(&self, core: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        &self.receive.basis * core * self.source.basis.adjoint()
    }

    /// Channel with the receive isometry applied: `Q_R K`, i.e. `H Q_S`.
    pub fn receive_rows(&self, core: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        &self.receive.basis * core
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::eigen_spectrum;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = DMatrix<Complex64>;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> M {
        M::from_fn(r, c, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn factor_reconstructs_and_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (r, c) in [(20, 5), (5, 20), (7, 7)] {
            let b = random_matrix(&mut rng, r, c);
            let f = reduce_factor(&b);
            assert_eq!(f.rank(), r.min(c));
            assert!((f.reconstruct() - &b).camax() < 1e-10);
            let gram = f.basis.adjoint() * &f.basis;
            assert!((gram - M::identity(f.rank(), f.rank())).camax() < 1e-10);
        }
    }

    #[test]
    fn rank_deficient_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = random_matrix(&mut rng, 12, 2) * random_matrix(&mut rng, 2, 6);
        let f = reduce_factor(&b);
        assert_eq!(f.rank(), 2);
        assert!((f.reconstruct() - &b).camax() < 1e-10);
        assert_eq!(reduce_factor(&M::zeros(4, 3)).rank(), 0);
    }

    #[test]
    fn core_preserves_spectrum_and_expands_to_full_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b_r = random_matrix(&mut rng, 30, 6);
        let b_s = random_matrix(&mut rng, 25, 4);
        let m = random_matrix(&mut rng, 6, 4);
        let dense = &b_r * &m * b_s.transpose();
        let link = ReducedLink::new(&b_r, &b_s);
        let k = link.core(&m);
        assert!((link.expand(&k) - &dense).camax() < 1e-10);
        let full = eigen_spectrum(&dense);
        let small = eigen_spectrum(&k);
        for (a, b) in full.iter().zip(&small) {
            assert!((a - b).abs() < 1e-9 * full[0]);
        }
        assert!(full[small.len()..].iter().all(|&v| v < 1e-9 * full[0]));
        let rows = link.receive_rows(&k);
        assert!((rows - &dense * &link.source.basis).camax() < 1e-10);
    }
}
