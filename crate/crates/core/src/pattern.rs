//! Element directivity patterns and the per-sample pattern matrices built
//! from them.
//!
//! A pattern maps a direction `(θ, φ)` to the complex amplitudes
//! `(d_θ, d_φ)` along the spherical unit vectors of the array frame,
//! normalised so that `|d_θ|² + |d_φ|²` averages to one over the sphere.

use nalgebra::{DMatrix, Vector3};
use num_complex::Complex;

use crate::array::{ArrayGeometry, WavenumberSampleSet};
use crate::error::{Error, Result};
use crate::scalar::{cplx, two_pi, Real};

/// Peak directivity of an ideal half-wave dipole, `4 / Cin(2π)`.
pub const HALF_WAVE_DIPOLE_DIRECTIVITY: f64 = 1.640_922_376_984_585;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsotropicPolarization {
    /// Equal split across both components; only meaningful for scalar models.
    Scalar,
    Theta,
    Phi,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatternKind<T: Real> {
    Constant { d_theta: Complex<T>, d_phi: Complex<T> },
    Dipole { axis: Vector3<T> },
    Sampled(SampledPattern<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizedPattern<T: Real> {
    pub kind: PatternKind<T>,
    pub label: String,
}

impl<T: Real> PolarizedPattern<T> {
    /// `(d_θ, d_φ)` at polar angle `theta` and azimuth `phi` (radians).
    pub fn evaluate(&self, theta: T, phi: T) -> Result<(Complex<T>, Complex<T>)> {
        match &self.kind {
            PatternKind::Constant { d_theta, d_phi } => Ok((*d_theta, *d_phi)),
            PatternKind::Dipole { axis } => Ok(dipole_field(axis, theta, phi)),
            PatternKind::Sampled(s) => s.evaluate(theta, phi),
        }
    }

    /// `|d_θ|² + |d_φ|²`.
    pub fn power(&self, theta: T, phi: T) -> Result<T> {
        let (a, b) = self.evaluate(theta, phi)?;
        Ok(a.norm_sqr() + b.norm_sqr())
    }
}

pub fn isotropic_pattern<T: Real>(polarization: IsotropicPolarization) -> PolarizedPattern<T> {
    let (one, zero) = (cplx(T::one()), cplx(T::zero()));
    let (d_theta, d_phi, label) = match polarization {
        IsotropicPolarization::Scalar => {
            let h = cplx(T::FRAC_1_SQRT_2());
            (h, h, "isotropic-scalar")
        }
        IsotropicPolarization::Theta => (one, zero, "isotropic-theta"),
        IsotropicPolarization::Phi => (zero, one, "isotropic-phi"),
    };
    PolarizedPattern {
        kind: PatternKind::Constant { d_theta, d_phi },
        label: label.into(),
    }
}

/// Ideal half-wave dipole along `axis` (normalised internally).
pub fn dipole_pattern<T: Real>(axis: Vector3<T>) -> Result<PolarizedPattern<T>> {
    let norm = axis.norm();
    if !(norm > T::zero()) {
        return Err(Error::Domain("dipole axis must be nonzero".into()));
    }
    Ok(PolarizedPattern {
        kind: PatternKind::Dipole { axis: axis / norm },
        label: "half-wave-dipole".into(),
    })
}

/// Radial, polar and azimuthal unit vectors at `(θ, φ)`.
pub fn spherical_basis<T: Real>(theta: T, phi: T) -> (Vector3<T>, Vector3<T>, Vector3<T>) {
    let (st, ct) = (theta.sin(), theta.cos());
    let (sp, cp) = (phi.sin(), phi.cos());
    (
        Vector3::new(st * cp, st * sp, ct),
        Vector3::new(ct * cp, ct * sp, -st),
        Vector3::new(-sp, cp, T::zero()),
    )
}

fn dipole_field<T: Real>(axis: &Vector3<T>, theta: T, phi: T) -> (Complex<T>, Complex<T>) {
    let (r, t, p) = spherical_basis(theta, phi);
    let cos_a = axis.dot(&r);
    let sin2 = T::one() - cos_a * cos_a;
    if sin2 <= T::lit(1e-24) {
        return (Complex::default(), Complex::default());
    }
    let amp = -T::lit(HALF_WAVE_DIPOLE_DIRECTIVITY).sqrt() * (T::FRAC_PI_2() * cos_a).cos() / sin2;
    let transverse = axis - r * cos_a;
    (cplx(amp * transverse.dot(&t)), cplx(amp * transverse.dot(&p)))
}

/// Pattern tabulated on a regular `(θ, φ)` grid in degrees and interpolated
/// bilinearly. An axis with a single sample is treated as constant along it.
/// If the azimuth samples leave a gap of at most one step before wrapping to
/// 360°, the grid is treated as periodic in φ.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPattern<T: Real> {
    pub theta_deg: Vec<T>,
    pub phi_deg: Vec<T>,
    /// Indexed `[i_theta * phi_deg.len() + i_phi]`.
    pub d_theta: Vec<Complex<T>>,
    pub d_phi: Vec<Complex<T>>,
}

impl<T: Real> SampledPattern<T> {
    pub fn new(theta_deg: Vec<T>, phi_deg: Vec<T>, d_theta: Vec<Complex<T>>, d_phi: Vec<Complex<T>>) -> Result<Self> {
        for (name, axis) in [("theta", &theta_deg), ("phi", &phi_deg)] {
            if axis.is_empty() {
                return Err(Error::Domain(format!("{name} grid is empty")));
            }
            if axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::Domain(format!("{name} grid is not strictly increasing")));
            }
        }
        let n = theta_deg.len() * phi_deg.len();
        if d_theta.len() != n || d_phi.len() != n {
            return Err(Error::Dimension(format!(
                "expected {n} samples, got {} and {}",
                d_theta.len(),
                d_phi.len()
            )));
        }
        Ok(Self {
            theta_deg,
            phi_deg,
            d_theta,
            d_phi,
        })
    }

    fn is_periodic(&self) -> bool {
        let p = &self.phi_deg;
        if p.len() < 2 {
            return false;
        }
        let (first, last) = (p[0], p[p.len() - 1]);
        let gap = first + T::lit(360.0) - last;
        let step = p[1] - p[0];
        gap > T::zero() && gap <= step * T::lit(1.0 + 1e-9)
    }

    pub fn evaluate(&self, theta: T, phi: T) -> Result<(Complex<T>, Complex<T>)> {
        let deg = T::lit(180.0) / T::PI();
        let out_of_range = || Error::OutOfRange {
            theta: theta.as_f64(),
            phi: phi.as_f64(),
        };
        let (t0, tw) = locate(&self.theta_deg, theta * deg).ok_or_else(out_of_range)?;
        let (p0, pw, p1) = self.locate_phi(phi * deg).ok_or_else(out_of_range)?;
        let t1 = (t0 + 1).min(self.theta_deg.len() - 1);
        let np = self.phi_deg.len();
        let mix = |v: &[Complex<T>]| {
            let a = v[t0 * np + p0] * (T::one() - pw) + v[t0 * np + p1] * pw;
            let b = v[t1 * np + p0] * (T::one() - pw) + v[t1 * np + p1] * pw;
            a * (T::one() - tw) + b * tw
        };
        Ok((mix(&self.d_theta), mix(&self.d_phi)))
    }

    fn locate_phi(&self, phi: T) -> Option<(usize, T, usize)> {
        let full = T::lit(360.0);
        let np = self.phi_deg.len();
        for cand in [phi, phi + full, phi - full] {
            if let Some((i, w)) = locate(&self.phi_deg, cand) {
                return Some((i, w, (i + 1).min(np - 1)));
            }
        }
        if self.is_periodic() {
            let (first, last) = (self.phi_deg[0], self.phi_deg[np - 1]);
            let gap = first + full - last;
            for cand in [phi, phi + full, phi - full] {
                let off = cand - last;
                if off >= T::zero() && off <= gap {
                    return Some((np - 1, off / gap, 0));
                }
            }
        }
        None
    }
}

/// Lower bracket index and fractional weight of `x` in a sorted grid.
fn locate<T: Real>(grid: &[T], x: T) -> Option<(usize, T)> {
    let n = grid.len();
    if n == 1 {
        return Some((0, T::zero()));
    }
    let tol = T::lit(1e-9);
    if x < grid[0] - tol || x > grid[n - 1] + tol {
        return None;
    }
    let x = x.clamp(grid[0], grid[n - 1]);
    let i = grid.partition_point(|&g| g <= x).saturating_sub(1).min(n - 2);
    Some((i, (x - grid[i]) / (grid[i + 1] - grid[i])))
}

/// `N × 2n` matrix whose row `q` holds `(d_θ,q, d_φ,q)` at each sample angle.
pub fn assemble_pattern_matrix<T: Real>(patterns: &[PolarizedPattern<T>], samples: &WavenumberSampleSet<T>) -> Result<DMatrix<Complex<T>>> {
    let mut out = DMatrix::zeros(patterns.len(), 2 * samples.len());
    for l in 0..samples.len() {
        let (theta, phi) = samples.angles(l);
        for (q, pattern) in patterns.iter().enumerate() {
            let (dt, dp) = pattern.evaluate(theta, phi)?;
            out[(q, 2 * l)] = dt;
            out[(q, 2 * l + 1)] = dp;
        }
    }
    Ok(out)
}

/// Pattern matrix with each column pair multiplied by the element's plane-wave
/// phase `exp(−j k(l)·r_q)`, so that a co-polarised isotropic pattern reduces
/// to the plain steering matrix.
pub fn steered_pattern_matrix<T: Real>(
    patterns: &[PolarizedPattern<T>],
    geometry: &ArrayGeometry<T>,
    samples: &WavenumberSampleSet<T>,
) -> Result<DMatrix<Complex<T>>> {
    if patterns.len() != geometry.len() {
        return Err(Error::Dimension(format!(
            "{} patterns for {} elements",
            patterns.len(),
            geometry.len()
        )));
    }
    let mut f = assemble_pattern_matrix(patterns, samples)?;
    let steering = crate::array::steering_matrix(geometry, samples)?;
    for l in 0..samples.len() {
        for q in 0..geometry.len() {
            let a = steering[(q, l)];
            f[(q, 2 * l)] *= a;
            f[(q, 2 * l + 1)] *= a;
        }
    }
    Ok(f)
}

/// Numerical `(1/4π) ∬ (|d_θ|² + |d_φ|²) sinθ dθ dφ` on a midpoint grid.
pub fn sphere_average_power<T: Real>(pattern: &PolarizedPattern<T>, theta_steps: usize, phi_steps: usize) -> Result<T> {
    let dt = T::PI() / T::count(theta_steps);
    let dp = two_pi::<T>() / T::count(phi_steps);
    let half = T::lit(0.5);
    let mut acc = T::zero();
    for i in 0..theta_steps {
        let theta = (T::count(i) + half) * dt;
        let mut ring = T::zero();
        for j in 0..phi_steps {
            ring += pattern.power(theta, (T::count(j) + half) * dp)?;
        }
        acc += ring * theta.sin();
    }
    Ok(acc * dt * dp / (T::lit(4.0) * T::PI()))
}
