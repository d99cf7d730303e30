//! Upper bounds on element efficiency and per-element calibration.

use crate::error::{Error, Result};
use crate::scalar::{two_pi, Real};

/// Where an efficiency profile came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfficiencySource {
    BoundOnly,
    Simulated,
    Calibrated,
}

/// Per-element total efficiencies `χ₀,ₙ ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyProfile<T: Real> {
    pub per_element: Vec<T>,
    pub source: EfficiencySource,
}

impl<T: Real> EfficiencyProfile<T> {
    pub fn new(per_element: Vec<T>, source: EfficiencySource) -> Result<Self> {
        if let Some(bad) = per_element.iter().find(|&&v| !(v >= T::zero() && v <= T::one())) {
            return Err(Error::Domain(format!("efficiency {} outside [0, 1]", bad.as_f64())));
        }
        Ok(Self { per_element, source })
    }

    /// Same bound on every element.
    pub fn uniform(value: T, count: usize) -> Result<Self> {
        Self::new(vec![value; count], EfficiencySource::BoundOnly)
    }

    pub fn len(&self) -> usize {
        self.per_element.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_element.is_empty()
    }
}

/// Upper bound on ohmic radiation efficiency of a conductor of surface `S`
/// (m²) with skin depth `δ` (m) at wavenumber `k` (rad/m):
/// `(1 + (3π/2)·δ/(k·S))⁻¹`.
pub fn radiation_efficiency_bound<T: Real>(surface_area: T, skin_depth: T, wavenumber: T) -> Result<T> {
    for (name, v) in [
        ("surface_area", surface_area),
        ("skin_depth", skin_depth),
        ("wavenumber", wavenumber),
    ] {
        if !(v > T::zero()) {
            return Err(Error::Domain(format!("{name} must be positive, got {}", v.as_f64())));
        }
    }
    let ratio = T::lit(1.5) * T::PI() * skin_depth / (wavenumber * surface_area);
    Ok(T::one() / (T::one() + ratio))
}

/// Upper bound on transmission efficiency of an infinite rectangular-grid
/// array with spacings `d_x, d_y` in wavelengths.
///
/// The element is matched inside the visible region (ellipse with semi-axes
/// `2π d_x`, `2π d_y` in the `(ψ_x, ψ_y)` plane) and fully reflecting
/// elsewhere in `[−π, π]²`, so the bound is the covered fraction of that square.
pub fn transmission_efficiency_bound<T: Real>(spacing_x: T, spacing_y: T) -> Result<T> {
    if !(spacing_x > T::zero()) || !(spacing_y > T::zero()) {
        return Err(Error::Domain("spacings must be positive".into()));
    }
    let k = two_pi::<T>();
    let pi = T::PI();
    let area = ellipse_rectangle_intersection_area(k * spacing_x, k * spacing_y, pi, pi);
    Ok((area / (k * k)).min(T::one()))
}

/// Exact area of `{x²/a² + y²/b² ≤ 1} ∩ [−w, w] × [−h, h]`.
pub fn ellipse_rectangle_intersection_area<T: Real>(semi_axis_a: T, semi_axis_b: T, half_width: T, half_height: T) -> T {
    let (a, b, w, h) = (semi_axis_a, semi_axis_b, half_width, half_height);
    if !(a > T::zero() && b > T::zero() && w > T::zero() && h > T::zero()) {
        return T::zero();
    }
    let (u, v) = (w / a, h / b);
    if u * u + v * v <= T::one() + T::lit(1e-12) {
        return T::lit(4.0) * w * h;
    }
    a * b * unit_circle_rectangle_area(-u, u, -v, v)
}

/// Area of the unit disk inside `[x0, x1] × [y0, y1]`.
pub fn unit_circle_rectangle_area<T: Real>(x0: T, x1: T, y0: T, y1: T) -> T {
    if !(x1 > x0 && y1 > y0) {
        return T::zero();
    }
    corner_area(x1, y1) - corner_area(x0, y1) - corner_area(x1, y0) + corner_area(x0, y0)
}

/// `∫_{−1}^{x} √(1−t²) dt`.
fn half_chord_integral<T: Real>(x: T) -> T {
    let x = x.clamp(-T::one(), T::one());
    (x * (T::one() - x * x).max(T::zero()).sqrt() + x.asin() + T::FRAC_PI_2()) * T::lit(0.5)
}

/// Area of `{X ≤ x, Y ≤ y}` inside the unit disk.
fn corner_area<T: Real>(x: T, y: T) -> T {
    let one = T::one();
    let x = x.clamp(-one, one);
    if y >= one {
        return T::lit(2.0) * half_chord_integral(x);
    }
    if y <= -one {
        return T::zero();
    }
    let s = (one - y * y).sqrt();
    let two = T::lit(2.0);
    let mut area = T::zero();
    // |X| > s: the disk chord lies entirely below y (y > 0) or above it (y < 0)
    if y > T::zero() {
        area += two * (half_chord_integral(x.min(-s)) - half_chord_integral(-one));
        if x > s {
            area += two * (half_chord_integral(x) - half_chord_integral(s));
        }
    }
    if x > -s {
        let xm = x.min(s);
        area += y * (xm + s) + half_chord_integral(xm) - half_chord_integral(-s);
    }
    area
}

/// Total efficiency `χ₀ = χ_r · χ_t`.
pub fn total_efficiency<T: Real>(radiation: T, transmission: T) -> T {
    radiation * transmission
}

/// Per element, keeps the larger of the simulated value and the bound.
pub fn calibrate_efficiencies<T: Real>(simulated: &EfficiencyProfile<T>, bound: T) -> EfficiencyProfile<T> {
    EfficiencyProfile {
        per_element: simulated.per_element.iter().map(|&s| s.max(bound)).collect(),
        source: EfficiencySource::Calibrated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    const LAMBDA: f64 = 0.15;
    const SKIN_DEPTH: f64 = 1.9e-6;

    fn square_plate(side: f64) -> f64 {
        radiation_efficiency_bound(side * side, SKIN_DEPTH, 2.0 * PI / LAMBDA).unwrap()
    }

    #[test]
    fn radiation_bound_anchors() {
        assert!((square_plate(LAMBDA / 100.0) - 0.913).abs() < 0.01);
        assert!(square_plate(LAMBDA / 10.0) >= 0.999);
        assert_relative_eq!(radiation_efficiency_bound(1.0, 1e-300, 1.0).unwrap(), 1.0);
        assert!(radiation_efficiency_bound(0.0, 1.0, 1.0).is_err());
        assert!(radiation_efficiency_bound(1.0, -1.0, 1.0).is_err());
        assert!(radiation_efficiency_bound(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sub_half_wavelength_bounds() {
        assert_relative_eq!(transmission_efficiency_bound(0.5, 0.5).unwrap(), PI / 4.0, epsilon = 1e-14);
        assert_relative_eq!(transmission_efficiency_bound(0.25, 0.5).unwrap(), PI / 8.0, epsilon = 1e-14);
        assert_relative_eq!(transmission_efficiency_bound(0.125, 0.5).unwrap(), PI / 16.0, epsilon = 1e-14);
        assert!(transmission_efficiency_bound(0.0, 0.5).is_err());
    }

    #[test]
    fn full_efficiency_beyond_critical_spacing() {
        for d in [FRAC_1_SQRT_2, 0.75, 1.0, 3.0] {
            assert_eq!(transmission_efficiency_bound(d, d).unwrap(), 1.0);
        }
        for d in [0.1, 0.5, 0.6, 0.7, 0.707] {
            assert!(transmission_efficiency_bound(d, d).unwrap() < 1.0);
        }
    }

    #[test]
    fn containment_cases() {
        assert_relative_eq!(ellipse_rectangle_intersection_area(1.0, 1.0, 2.0, 2.0), PI, epsilon = 1e-14);
        assert_relative_eq!(ellipse_rectangle_intersection_area(2.0, 2.0, 1.0, 1.0), 4.0);
        assert_relative_eq!(unit_circle_rectangle_area(0.0, 1.0, 0.0, 1.0), PI / 4.0, epsilon = 1e-14);
        assert_relative_eq!(
            unit_circle_rectangle_area(-0.5, 0.5, -2.0, 2.0),
            0.5_f64.asin() * 2.0 + 3f64.sqrt() / 2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn wide_ellipse_matches_monte_carlo() {
        let (a, b, w, h) = (1.2 * PI, 0.5 * PI, PI, PI);
        let exact = ellipse_rectangle_intersection_area(a, b, w, h);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 10_000_000;
        let mut hits = 0u64;
        for _ in 0..n {
            let x: f64 = rng.random_range(-w..w);
            let y: f64 = rng.random_range(-h..h);
            if (x / a).powi(2) + (y / b).powi(2) <= 1.0 {
                hits += 1;
            }
        }
        let mc = hits as f64 / n as f64 * 4.0 * w * h;
        assert!((exact - mc).abs() / mc < 1e-3, "exact {exact}, mc {mc}");
    }

    #[test]
    fn single_precision_area() {
        let v = ellipse_rectangle_intersection_area(
            std::f32::consts::PI,
            std::f32::consts::PI,
            std::f32::consts::PI,
            std::f32::consts::PI,
        );
        assert!((v - std::f32::consts::PI.powi(3)).abs() < 1e-4);
    }

    #[test]
    #[allow(clippy::approx_constant)] // tabulated bound, rounded
    fn calibration_keeps_larger_value() {
        let sim = EfficiencyProfile::new(vec![0.7407, 0.9, 0.1090], EfficiencySource::Simulated).unwrap();
        let c = calibrate_efficiencies(&sim, 0.7854);
        assert_eq!(c.per_element[..2], [0.7854, 0.9]);
        assert_eq!(calibrate_efficiencies(&sim, 0.5).per_element[1], 0.9);
        assert_eq!(calibrate_efficiencies(&sim, 0.1963).per_element[2], 0.1963);
        assert_eq!(c.source, EfficiencySource::Calibrated);
        assert!(EfficiencyProfile::new(vec![1.2_f64], EfficiencySource::Simulated).is_err());
    }

    proptest! {
        #[test]
        fn bound_monotone_in_each_spacing(dx in 0.01f64..1.5, dy in 0.01f64..1.5, step in 0.0f64..0.5) {
            let base = transmission_efficiency_bound(dx, dy).unwrap();
            prop_assert!(transmission_efficiency_bound(dx + step, dy).unwrap() >= base - 1e-13);
            prop_assert!(transmission_efficiency_bound(dx, dy + step).unwrap() >= base - 1e-13);
            prop_assert!(base > 0.0 && base <= 1.0);
        }

        #[test]
        fn area_symmetric_under_axis_swap(a in 0.1f64..5.0, b in 0.1f64..5.0, w in 0.1f64..5.0, h in 0.1f64..5.0) {
            let lhs = ellipse_rectangle_intersection_area(a, b, w, h);
            let rhs = ellipse_rectangle_intersection_area(b, a, h, w);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
            prop_assert!(lhs <= PI * a * b + 1e-12 && lhs <= 4.0 * w * h + 1e-12);
        }

        #[test]
        fn radiation_bound_monotone(s in 1e-8f64..1e-2, ds in 1e-9f64..1e-2, delta in 1e-8f64..1e-4, dd in 1e-9f64..1e-4) {
            let k = 2.0 * PI / LAMBDA;
            let base = radiation_efficiency_bound(s, delta, k).unwrap();
            prop_assert!(radiation_efficiency_bound(s + ds, delta, k).unwrap() > base);
            prop_assert!(radiation_efficiency_bound(s, delta + dd, k).unwrap() < base);
        }
    }
}
