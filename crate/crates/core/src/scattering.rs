//! Mutual-coupling description of an infinite periodic array by its
//! scattering coefficients, and the impedance / reflection quantities
//! derived from it.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cplx, phasor, two_pi, Real};

/// Coefficients `S_pq` between a reference element and the element at lattice
/// offset `(p, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringGrid<T: Real> {
    pub coefficients: BTreeMap<(i64, i64), Complex<T>>,
    /// Reference impedance in ohms.
    pub reference_impedance: T,
}

impl<T: Real> ScatteringGrid<T> {
    pub fn new(coefficients: BTreeMap<(i64, i64), Complex<T>>, reference_impedance: T) -> Self {
        Self {
            coefficients,
            reference_impedance,
        }
    }

    pub fn from_entries(entries: impl IntoIterator<Item = ((i64, i64), Complex<T>)>, reference_impedance: T) -> Self {
        let mut coefficients = BTreeMap::new();
        for (k, v) in entries {
            *coefficients.entry(k).or_insert_with(Complex::default) += v;
        }
        Self {
            coefficients,
            reference_impedance,
        }
    }

    /// `Σ |S_pq|²`.
    pub fn power_sum(&self) -> T {
        self.coefficients.values().fold(T::zero(), |acc, s| acc + s.norm_sqr())
    }

    pub fn is_passive(&self) -> bool {
        self.power_sum().as_f64() <= 1.0 + 1e-9
    }

    /// Finite-array coupling matrix for an `nx × ny` grid, rows ordered x fastest.
    /// Offsets outside the grid support are zero.
    pub fn to_array_matrix(&self, count_x: usize, count_y: usize) -> DMatrix<Complex<T>> {
        let n = count_x * count_y;
        DMatrix::from_fn(n, n, |r, c| {
            let (rx, ry) = ((r % count_x) as i64, (r / count_x) as i64);
            let (cx, cy) = ((c % count_x) as i64, (c / count_x) as i64);
            self.coefficients.get(&(cx - rx, cy - ry)).copied().unwrap_or_default()
        })
    }
}

/// `Z = Z₀ (I + S)(I − S)⁻¹`.
pub fn z_from_s<T: Real>(s: &DMatrix<Complex<T>>, reference_impedance: T) -> Result<DMatrix<Complex<T>>> {
    let n = square_dim(s)?;
    let eye = DMatrix::<Complex<T>>::identity(n, n);
    let inv = (&eye - s).try_inverse().ok_or_else(|| Error::Singular("I - S".into()))?;
    Ok((&eye + s) * inv * cplx(reference_impedance))
}

/// `S = (Z − Z₀ I)(Z + Z₀ I)⁻¹`.
pub fn s_from_z<T: Real>(z: &DMatrix<Complex<T>>, reference_impedance: T) -> Result<DMatrix<Complex<T>>> {
    let n = square_dim(z)?;
    let z0 = DMatrix::<Complex<T>>::identity(n, n) * cplx(reference_impedance);
    let inv = (z + &z0).try_inverse().ok_or_else(|| Error::Singular("Z + Z0 I".into()))?;
    Ok((z - z0) * inv)
}

fn square_dim<T: Real>(m: &DMatrix<Complex<T>>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("expected square matrix, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(m.nrows())
}

/// `R(ψ) = Σ S_pq exp(−j p ψ_x − j q ψ_y)`.
pub fn active_reflection_coefficient<T: Real>(grid: &ScatteringGrid<T>, psi_x: T, psi_y: T) -> Complex<T> {
    grid.coefficients.iter().fold(Complex::default(), |acc, (&(p, q), &s)| {
        acc + s * phasor(-(T::lit(p as f64) * psi_x + T::lit(q as f64) * psi_y))
    })
}

/// `1 − Σ |S_pq|²`.
pub fn transmission_efficiency_from_scattering<T: Real>(grid: &ScatteringGrid<T>) -> Result<T> {
    let sum = grid.power_sum();
    if sum.as_f64() > 1.0 + 1e-9 {
        return Err(Error::NonPassive(sum.as_f64()));
    }
    Ok((T::one() - sum).clamp(T::zero(), T::one()))
}

/// `1 − (1/4π²) ∬ |R(ψ)|² dψ` over `[−π, π]²`, by an `n × n` periodic
/// trapezoid rule (exact for trigonometric polynomials of degree below `n`).
pub fn transmission_efficiency_by_quadrature<T: Real>(grid: &ScatteringGrid<T>, points_per_axis: usize) -> T {
    let n = points_per_axis.max(1);
    let step = two_pi::<T>() / T::count(n);
    let psi = |i: usize| -T::PI() + T::count(i) * step;

    let mut rows: BTreeMap<i64, Vec<(i64, Complex<T>)>> = BTreeMap::new();
    for (&(p, q), &s) in &grid.coefficients {
        rows.entry(p).or_default().push((q, s));
    }
    let ps: Vec<i64> = rows.keys().copied().collect();
    // inner[j][k] = Σ_q S_{p_k q} e^{−j q ψ_y(j)}
    let inner: Vec<Vec<Complex<T>>> = (0..n)
        .map(|j| {
            let y = psi(j);
            rows.values()
                .map(|row| {
                    row.iter()
                        .fold(Complex::default(), |a, &(q, s)| a + s * phasor(-T::lit(q as f64) * y))
                })
                .collect()
        })
        .collect();
    let outer: Vec<Vec<Complex<T>>> = (0..n)
        .map(|i| {
            let x = psi(i);
            ps.iter().map(|&p| phasor(-T::lit(p as f64) * x)).collect()
        })
        .collect();

    let mut total = T::zero();
    for ex in &outer {
        for row in &inner {
            let r = ex.iter().zip(row).fold(Complex::default(), |a, (&e, &s)| a + e * s);
            total += r.norm_sqr();
        }
    }
    T::one() - total / T::count(n * n)
}
