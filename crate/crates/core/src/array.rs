//! Planar array placement, steering vectors and propagating wavenumber samples.
//!
//! All lengths are expressed in wavelengths, so the free-space wavenumber is
//! `2π`. Arrays lie in the `xy` plane, centred on the origin, with elements
//! indexed row by row (`x` fastest).

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex;

use crate::angular::block_solid_angle;
use crate::error::{Error, Result};
use crate::scalar::{phasor, two_pi, Real};

/// Tolerance on `aperture / spacing` being an integer.
const COMMENSURATE_TOL: f64 = 1e-9;

/// Uniform rectangular planar array.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry<T: Real> {
    pub aperture_x: T,
    pub aperture_y: T,
    pub spacing_x: T,
    pub spacing_y: T,
    pub count_x: usize,
    pub count_y: usize,
    /// Element positions in wavelengths, `z = 0`.
    pub positions: Vec<Vector3<T>>,
}

impl<T: Real> ArrayGeometry<T> {
    /// Array filling `aperture_x × aperture_y` at the given spacings.
    ///
    /// The aperture must be an integer multiple of the spacing on each axis.
    pub fn new(aperture_x: T, aperture_y: T, spacing_x: T, spacing_y: T) -> Result<Self> {
        let count_x = commensurate_count(aperture_x, spacing_x, "x")?;
        let count_y = commensurate_count(aperture_y, spacing_y, "y")?;
        Self::assemble(aperture_x, aperture_y, spacing_x, spacing_y, count_x, count_y)
    }

    /// Array of `count_x × count_y` elements; the aperture is `count · spacing`.
    pub fn from_counts(count_x: usize, count_y: usize, spacing_x: T, spacing_y: T) -> Result<Self> {
        if count_x == 0 || count_y == 0 {
            return Err(Error::InvalidGeometry("element counts must be at least 1".into()));
        }
        let aperture_x = spacing_x * T::count(count_x);
        let aperture_y = spacing_y * T::count(count_y);
        Self::assemble(aperture_x, aperture_y, spacing_x, spacing_y, count_x, count_y)
    }

    fn assemble(aperture_x: T, aperture_y: T, spacing_x: T, spacing_y: T, count_x: usize, count_y: usize) -> Result<Self> {
        let positions = element_positions(count_x, count_y, spacing_x, spacing_y)?;
        Ok(Self {
            aperture_x,
            aperture_y,
            spacing_x,
            spacing_y,
            count_x,
            count_y,
            positions,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Short structure label such as `8x16` (`count_y × count_x`, rows first).
    pub fn label(&self) -> String {
        format!("{}x{}", self.count_y, self.count_x)
    }
}

fn commensurate_count<T: Real>(aperture: T, spacing: T, axis: &str) -> Result<usize> {
    let (a, d) = (aperture.as_f64(), spacing.as_f64());
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidGeometry(format!("spacing_{axis} must be positive, got {d}")));
    }
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidGeometry(format!("aperture_{axis} must be positive, got {a}")));
    }
    let ratio = a / d;
    let count = ratio.round();
    if count < 1.0 || (ratio - count).abs() > COMMENSURATE_TOL * ratio.max(1.0) {
        return Err(Error::InvalidGeometry(format!(
            "aperture_{axis} = {a} is not an integer multiple of spacing_{axis} = {d}"
        )));
    }
    Ok(count as usize)
}

/// Centred, row-major element grid.
///
/// Element `p` (0-based) sits at `((p mod N_x) − (N_x−1)/2)·d_x` along `x` and
/// `(⌊p / N_x⌋ − (N_y−1)/2)·d_y` along `y`.
pub fn element_positions<T: Real>(count_x: usize, count_y: usize, spacing_x: T, spacing_y: T) -> Result<Vec<Vector3<T>>> {
    if count_x == 0 || count_y == 0 {
        return Err(Error::InvalidGeometry("element counts must be at least 1".into()));
    }
    if !(spacing_x > T::zero()) || !(spacing_y > T::zero()) {
        return Err(Error::InvalidGeometry("spacings must be positive".into()));
    }
    let half = T::lit(0.5);
    let cx = (T::count(count_x) - T::one()) * half;
    let cy = (T::count(count_y) - T::one()) * half;
    let mut out = Vec::with_capacity(count_x * count_y);
    for iy in 0..count_y {
        for ix in 0..count_x {
            out.push(Vector3::new(
                (T::count(ix) - cx) * spacing_x,
                (T::count(iy) - cy) * spacing_y,
                T::zero(),
            ));
        }
    }
    Ok(out)
}

/// Wavevector `2π (sinθ cosφ, sinθ sinφ, cosθ)` in radians per wavelength.
pub fn wavevector<T: Real>(theta: T, phi: T) -> Vector3<T> {
    let k = two_pi::<T>();
    Vector3::new(k * theta.sin() * phi.cos(), k * theta.sin() * phi.sin(), k * theta.cos())
}

/// Unit-norm steering vector `(1/√N) exp(−j k·r_n)`.
pub fn steering_vector<T: Real>(geometry: &ArrayGeometry<T>, theta: T, phi: T) -> Result<DVector<Complex<T>>> {
    if !(theta >= T::zero() && theta <= T::FRAC_PI_2() + T::lit(1e-12)) {
        return Err(Error::Domain(format!("polar angle {} outside [0, π/2]", theta.as_f64())));
    }
    let k = wavevector(theta, phi);
    let scale = T::one() / T::count(geometry.len()).sqrt();
    Ok(DVector::from_iterator(
        geometry.len(),
        geometry.positions.iter().map(|r| phasor(-k.dot(r)) * scale),
    ))
}

/// Propagating samples of the wavenumber plane for an aperture, with the
/// solid angle of each sample's block.
#[derive(Debug, Clone, PartialEq)]
pub struct WavenumberSampleSet<T: Real> {
    pub aperture_x: T,
    pub aperture_y: T,
    /// `(m_x, m_y)` ordered with `m_x` fastest.
    pub indices: Vec<(i64, i64)>,
    pub block_weights: Vec<T>,
}

impl<T: Real> WavenumberSampleSet<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Normalised transverse wavenumber `(m_x / L_x, m_y / L_y)`.
    pub fn normalized_wavenumber(&self, i: usize) -> (T, T) {
        let (mx, my) = self.indices[i];
        (T::lit(mx as f64) / self.aperture_x, T::lit(my as f64) / self.aperture_y)
    }

    /// `(θ, φ)` of sample `i`.
    pub fn angles(&self, i: usize) -> (T, T) {
        let (kx, ky) = self.normalized_wavenumber(i);
        sample_angles(kx, ky)
    }

    pub fn total_weight(&self) -> T {
        self.block_weights.iter().fold(T::zero(), |a, &w| a + w)
    }
}

fn sample_angles<T: Real>(kx: T, ky: T) -> (T, T) {
    let radial = (kx * kx + ky * ky).sqrt().min(T::one());
    (radial.asin(), ky.atan2(kx))
}

/// Lattice points `(m_x, m_y)` inside the closed disk
/// `(m_x/L_x)² + (m_y/L_y)² ≤ 1` (apertures in wavelengths).
pub fn propagating_indices(aperture_x: f64, aperture_y: f64) -> Vec<(i64, i64)> {
    let max_x = aperture_x.floor() as i64;
    let max_y = aperture_y.floor() as i64;
    let mut out = Vec::new();
    for my in -max_y..=max_y {
        for mx in -max_x..=max_x {
            if in_disk(mx, my, aperture_x, aperture_y) {
                out.push((mx, my));
            }
        }
    }
    out
}

pub(crate) fn in_disk(mx: i64, my: i64, aperture_x: f64, aperture_y: f64) -> bool {
    let (u, v) = (mx as f64 / aperture_x, my as f64 / aperture_y);
    u * u + v * v <= 1.0 + 1e-12
}

/// Propagating sample set of an `L_x × L_y` aperture with block weights filled in.
pub fn propagating_sample_set<T: Real>(aperture_x: T, aperture_y: T) -> Result<WavenumberSampleSet<T>> {
    let (lx, ly) = (aperture_x.as_f64(), aperture_y.as_f64());
    if !(lx > 0.0 && ly > 0.0) {
        return Err(Error::InvalidGeometry("apertures must be positive".into()));
    }
    let indices = propagating_indices(lx, ly);
    let block_weights = indices.iter().map(|&m| T::lit(block_solid_angle(m, lx, ly))).collect();
    Ok(WavenumberSampleSet {
        aperture_x,
        aperture_y,
        indices,
        block_weights,
    })
}

/// `N × n` matrix of unnormalised phases `exp(−j k(l)·r_q)`, one column per sample.
pub fn steering_matrix<T: Real>(geometry: &ArrayGeometry<T>, samples: &WavenumberSampleSet<T>) -> Result<DMatrix<Complex<T>>> {
    let k0 = two_pi::<T>();
    let mut out = DMatrix::zeros(geometry.len(), samples.len());
    for (l, &(mx, my)) in samples.indices.iter().enumerate() {
        let (lx, ly) = (samples.aperture_x.as_f64(), samples.aperture_y.as_f64());
        if !in_disk(mx, my, lx, ly) {
            return Err(Error::InvalidSample(mx, my));
        }
        let (kx, ky) = samples.normalized_wavenumber(l);
        for (q, r) in geometry.positions.iter().enumerate() {
            out[(q, l)] = phasor(-(k0 * (kx * r.x + ky * r.y)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn brute_force_count(l: f64) -> usize {
        let mut n = 0;
        for mx in -20i64..=20 {
            for my in -20i64..=20 {
                if ((mx * mx + my * my) as f64) <= l * l {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn single_element_sits_at_origin() {
        let p = element_positions(1, 1, 0.37_f64, 0.5).unwrap();
        assert_eq!(p, vec![Vector3::zeros()]);
    }

    #[test]
    fn two_by_two_at_half_wavelength() {
        let p = element_positions(2, 2, 0.5_f64, 0.5).unwrap();
        let expect = [(-0.25, -0.25), (0.25, -0.25), (-0.25, 0.25), (0.25, 0.25)];
        for (r, (x, y)) in p.iter().zip(expect) {
            assert_relative_eq!(r.x, x);
            assert_relative_eq!(r.y, y);
        }
        let sum: Vector3<f64> = p.iter().sum();
        assert!(sum.norm() < 1e-15);
    }

    #[test]
    fn eight_by_eight_spans_three_and_a_half_wavelengths() {
        let g = ArrayGeometry::new(4.0_f64, 4.0, 0.5, 0.5).unwrap();
        assert_eq!(g.len(), 64);
        let xs: Vec<f64> = g.positions.iter().map(|r| r.x).collect();
        let span = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
        assert_relative_eq!(span, 3.5, epsilon = 1e-12);
    }

    #[test]
    fn invalid_geometries_are_rejected() {
        assert!(matches!(element_positions(0, 2, 0.5_f64, 0.5), Err(Error::InvalidGeometry(_))));
        assert!(matches!(element_positions(2, 2, 0.0_f64, 0.5), Err(Error::InvalidGeometry(_))));
        assert!(ArrayGeometry::new(4.0_f64, 4.0, -0.5, 0.5).is_err());
        assert!(ArrayGeometry::new(4.0_f64, 4.0, 0.875, 0.5).is_err());
        assert!(ArrayGeometry::from_counts(0, 1, 0.5_f64, 0.5).is_err());
    }

    #[test]
    fn broadside_steering_is_uniform() {
        let g = ArrayGeometry::new(2.0_f64, 1.5, 0.5, 0.25).unwrap();
        let a = steering_vector(&g, 0.0, 1.234).unwrap();
        let v = 1.0 / (g.len() as f64).sqrt();
        for z in a.iter() {
            assert_relative_eq!(z.re, v, epsilon = 1e-15);
            assert!(z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn single_element_steering_is_one() {
        let g = ArrayGeometry::from_counts(1, 1, 0.5_f64, 0.5).unwrap();
        let a = steering_vector(&g, 0.7, 0.3).unwrap();
        assert_relative_eq!(a[0].re, 1.0, epsilon = 1e-15);
        assert!(a[0].im.abs() < 1e-15);
    }

    #[test]
    fn endfire_pair_phases() {
        let g = ArrayGeometry::from_counts(2, 1, 0.5_f64, 0.5).unwrap();
        let a = steering_vector(&g, FRAC_PI_2, 0.0).unwrap();
        let s = 1.0 / 2f64.sqrt();
        // element 0 at x = −λ/4 → exp(+jπ/2); element 1 at +λ/4 → exp(−jπ/2)
        assert_relative_eq!(a[0].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(a[0].im, s, epsilon = 1e-15);
        assert_relative_eq!(a[1].im, -s, epsilon = 1e-15);
    }

    #[test]
    fn steering_rejects_back_hemisphere() {
        let g = ArrayGeometry::from_counts(2, 2, 0.5_f64, 0.5).unwrap();
        assert!(steering_vector(&g, 2.0, 0.0).is_err());
    }

    #[test]
    fn lattice_counts_match_enumeration() {
        for l in [1.0, 2.0, 4.0, 8.0] {
            assert_eq!(propagating_indices(l, l).len(), brute_force_count(l), "L = {l}");
        }
        assert_eq!(propagating_indices(4.0, 4.0).len(), 49);
        assert_eq!(propagating_indices(1.0, 1.0), vec![(0, -1), (-1, 0), (0, 0), (1, 0), (0, 1)]);
        assert_eq!(propagating_indices(0.5, 0.5), vec![(0, 0)]);
    }

    #[test]
    fn sample_set_angles() {
        let s = propagating_sample_set(1.0_f64, 1.0).unwrap();
        let i = s.indices.iter().position(|&m| m == (0, 1)).unwrap();
        let (theta, phi) = s.angles(i);
        assert_relative_eq!(theta, FRAC_PI_2, epsilon = 1e-12);
        assert_relative_eq!(phi, FRAC_PI_2, epsilon = 1e-12);
        let j = s.indices.iter().position(|&m| m == (-1, 0)).unwrap();
        assert_relative_eq!(s.angles(j).1, PI, epsilon = 1e-12);
    }

    #[test]
    fn broadside_column_is_all_ones() {
        let g = ArrayGeometry::new(2.0_f64, 2.0, 0.5, 0.5).unwrap();
        let s = WavenumberSampleSet {
            aperture_x: 2.0,
            aperture_y: 2.0,
            indices: vec![(0, 0)],
            block_weights: vec![1.0],
        };
        let u = steering_matrix(&g, &s).unwrap();
        assert!(u.iter().all(|z| (z.re - 1.0).abs() < 1e-15 && z.im.abs() < 1e-15));
    }

    #[test]
    fn steering_matrix_shape_and_modulus() {
        let g = ArrayGeometry::new(4.0_f64, 4.0, 0.5, 0.5).unwrap();
        let s = propagating_sample_set(4.0_f64, 4.0).unwrap();
        let u = steering_matrix(&g, &s).unwrap();
        assert_eq!(u.shape(), (64, 49));
        assert!(u.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));

        let one = ArrayGeometry::from_counts(1, 1, 0.5_f64, 0.5).unwrap();
        let u1 = steering_matrix(&one, &s).unwrap();
        assert_eq!(u1.nrows(), 1);
        assert!(u1.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn steering_matrix_rejects_evanescent_sample() {
        let g = ArrayGeometry::new(1.0_f64, 1.0, 0.5, 0.5).unwrap();
        let s = WavenumberSampleSet {
            aperture_x: 1.0,
            aperture_y: 1.0,
            indices: vec![(1, 1)],
            block_weights: vec![0.0],
        };
        assert_eq!(steering_matrix(&g, &s), Err(Error::InvalidSample(1, 1)));
    }

    #[test]
    fn single_precision_geometry() {
        let g = ArrayGeometry::new(2.0_f32, 2.0, 0.5, 0.5).unwrap();
        let a = steering_vector(&g, 0.4_f32, 1.1).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-5);
    }
}
