//! Transforms applied to measured or synthesised channel matrices.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cplx, Real};

/// `√(χ_R χ_S) · H`.
pub fn compensate_efficiency<T: Real>(h: &DMatrix<Complex<T>>, chi_receive: T, chi_source: T) -> Result<DMatrix<Complex<T>>> {
    for (name, chi) in [("chi_receive", chi_receive), ("chi_source", chi_source)] {
        if !(chi >= T::zero() && chi <= T::one()) {
            return Err(Error::Domain(format!("{name} = {} outside [0, 1]", chi.as_f64())));
        }
    }
    Ok(h * cplx((chi_receive * chi_source).sqrt()))
}

/// Receive positions of a measured channel laid out row-major, x fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiveGrid<T: Real> {
    pub rows: usize,
    pub cols: usize,
    /// Spacing between adjacent positions, in wavelengths.
    pub spacing: T,
}

/// Keeps the receive rows whose grid coordinates are multiples of
/// `target_spacing / spacing` along both axes, in their original order.
pub fn resample_receive_array<T: Real>(h: &DMatrix<Complex<T>>, grid: ReceiveGrid<T>, target_spacing: T) -> Result<DMatrix<Complex<T>>> {
    if h.nrows() != grid.rows * grid.cols {
        return Err(Error::Dimension(format!(
            "{} channel rows for a {}x{} grid",
            h.nrows(),
            grid.rows,
            grid.cols
        )));
    }
    if !(grid.spacing > T::zero() && target_spacing > T::zero()) {
        return Err(Error::Stride("spacings must be positive".into()));
    }
    let ratio = (target_spacing / grid.spacing).as_f64();
    let stride = ratio.round();
    if stride < 1.0 || (ratio - stride).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Stride(format!(
            "target spacing {} is not an integer multiple of {}",
            target_spacing.as_f64(),
            grid.spacing.as_f64()
        )));
    }
    let stride = stride as usize;
    if !grid.rows.is_multiple_of(stride) || !grid.cols.is_multiple_of(stride) {
        return Err(Error::Stride(format!(
            "stride {stride} does not divide the {}x{} grid",
            grid.rows, grid.cols
        )));
    }
    let keep: Vec<usize> = (0..h.nrows())
        .filter(|&r| (r % grid.cols).is_multiple_of(stride) && (r / grid.cols).is_multiple_of(stride))
        .collect();
    Ok(h.select_rows(keep.iter()))
}
