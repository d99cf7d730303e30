//! Angular-response statistics in the wavenumber domain.
//!
//! Each propagating sample `m` owns a block of the unit disk of normalised
//! transverse wavenumbers `k̂ = (k_x, k_y)/(2π/λ)`. Block edges lie on the
//! lattice `m·Δ` with `Δ = λ/L`, and the sample point is the block corner
//! closest to the origin: a disk point `k̂` belongs to block
//! `trunc(k̂/Δ)` (rounded toward zero on each axis). This tiles the disk
//! exactly, so the block solid angles add up to the hemisphere, `2π`.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::array::{in_disk, WavenumberSampleSet};
use crate::quadrature;
use crate::rng::SeedLineage;
use crate::scalar::Real;

const BLOCK_TOL: f64 = 1e-13;

/// Interval `[lo, hi]` of normalised wavenumbers covered by lattice index `m`.
pub fn block_interval(m: i64, delta: f64) -> (f64, f64) {
    let m = m as f64;
    match m.partial_cmp(&0.0) {
        Some(std::cmp::Ordering::Greater) => (m * delta, (m + 1.0) * delta),
        Some(std::cmp::Ordering::Less) => ((m - 1.0) * delta, m * delta),
        _ => (-delta, delta),
    }
}

/// Solid angle `∫∫ sinθ dθ dφ` of block `index` of an `L_x × L_y` aperture
/// (wavelengths), i.e. `∫∫ dk̂_x dk̂_y / √(1 − |k̂|²)` over the block clipped
/// to the unit disk.
///
/// The `k̂_y` integral is done in closed form (`asin`); the remaining bounded
/// integrand in `k̂_x` is integrated adaptively with breakpoints where the
/// block's horizontal edges cross the rim.
pub fn block_solid_angle(index: (i64, i64), aperture_x: f64, aperture_y: f64) -> f64 {
    if !in_disk(index.0, index.1, aperture_x, aperture_y) {
        return 0.0;
    }
    let (x0, x1) = block_interval(index.0, 1.0 / aperture_x);
    let (y0, y1) = block_interval(index.1, 1.0 / aperture_y);
    rectangle_solid_angle(x0, x1, y0, y1)
}

/// Solid angle subtended by `[x0,x1] × [y0,y1]` ∩ unit disk in the `k̂` plane.
pub fn rectangle_solid_angle(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let (a, b) = (x0.max(-1.0), x1.min(1.0));
    if !(b > a) || !(y1 > y0) || y0 >= 1.0 || y1 <= -1.0 {
        return 0.0;
    }
    let strip = |x: f64| {
        let c = (1.0 - x * x).max(0.0).sqrt();
        if c <= 0.0 {
            return 0.0;
        }
        let hi = (y1 / c).clamp(-1.0, 1.0).asin();
        let lo = (y0 / c).clamp(-1.0, 1.0).asin();
        (hi - lo).max(0.0)
    };
    let mut breaks = Vec::with_capacity(4);
    for y in [y0, y1] {
        if y.abs() < 1.0 {
            let s = (1.0 - y * y).sqrt();
            breaks.extend([-s, s]);
        }
    }
    quadrature::integrate(strip, a, b, &breaks, BLOCK_TOL)
}

/// Normalisation applied to the block-variance map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Products of solid angles; totals `(2π)²`.
    Raw,
    /// Scaled to unit total, so each channel entry has unit average power.
    #[default]
    UnitAverageGain,
}

/// Per-block variances `σ²(l, m)` of the angular response.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularVarianceMap<T: Real> {
    pub receive_weights: Vec<T>,
    pub source_weights: Vec<T>,
    /// `n_R × n_S`.
    pub variances: DMatrix<T>,
    pub normalization: Normalization,
}

impl<T: Real> AngularVarianceMap<T> {
    pub fn total(&self) -> T {
        self.variances.iter().fold(T::zero(), |a, &v| a + v)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.variances.shape()
    }
}

/// Isotropic variance map: outer product of the two block-weight vectors.
pub fn variance_map<T: Real>(
    receive: &WavenumberSampleSet<T>,
    source: &WavenumberSampleSet<T>,
    normalization: Normalization,
) -> AngularVarianceMap<T> {
    let (nr, ns) = (receive.len(), source.len());
    let mut variances = DMatrix::from_fn(nr, ns, |l, m| receive.block_weights[l] * source.block_weights[m]);
    if normalization == Normalization::UnitAverageGain {
        let total = variances.iter().fold(T::zero(), |a, &v| a + v);
        if total > T::zero() {
            variances /= total;
        }
    }
    AngularVarianceMap {
        receive_weights: receive.block_weights.clone(),
        source_weights: source.block_weights.clone(),
        variances,
        normalization,
    }
}

/// One draw of the wavenumber-domain coupling matrix `H_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularResponse<T: Real> {
    pub matrix: DMatrix<Complex<T>>,
    pub seed_lineage: Option<SeedLineage>,
}

/// Draws `H_a(l, m) ~ CN(0, σ²(l, m))`, independent entries, row by row.
pub fn draw_angular_response<T: Real, R: Rng + ?Sized>(map: &AngularVarianceMap<T>, rng: &mut R) -> DMatrix<Complex<T>> {
    let (nr, ns) = map.shape();
    let mut out = DMatrix::zeros(nr, ns);
    for l in 0..nr {
        for m in 0..ns {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let s = (map.variances[(l, m)] * T::lit(0.5)).sqrt();
            out[(l, m)] = Complex::new(T::lit(re) * s, T::lit(im) * s);
        }
    }
    out
}

/// Draw keyed by a seed lineage, recorded alongside the matrix.
pub fn draw_angular_response_for<T: Real>(map: &AngularVarianceMap<T>, lineage: SeedLineage) -> AngularResponse<T> {
    let mut rng = lineage.stream(crate::rng::Purpose::AngularResponse);
    AngularResponse {
        matrix: draw_angular_response(map, &mut rng),
        seed_lineage: Some(lineage),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{propagating_indices, propagating_sample_set};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Independent route: polar coordinates, ray/box clipping per azimuth with
    /// the radial integral `∫ sinθ dθ = √(1−r₁²) − √(1−r₂²)` in closed form,
    /// and a cosine-graded composite Simpson rule in azimuth.
    fn polar_oracle(x0: f64, x1: f64, y0: f64, y1: f64, panels: usize) -> f64 {
        let radial = |phi: f64| {
            let (dx, dy) = (phi.cos(), phi.sin());
            let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
            for (d, lo, hi) in [(dx, x0, x1), (dy, y0, y1)] {
                if d.abs() < 1e-300 {
                    if !(0.0 >= lo && 0.0 <= hi) {
                        return 0.0;
                    }
                } else {
                    let (a, b) = ((lo / d).min(hi / d), (lo / d).max(hi / d));
                    t0 = t0.max(a);
                    t1 = t1.min(b);
                }
            }
            if t1 <= t0 {
                0.0
            } else {
                (1.0 - t0 * t0).max(0.0).sqrt() - (1.0 - t1 * t1).max(0.0).sqrt()
            }
        };
        let mut breaks = vec![0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2, 2.0 * PI];
        for x in [x0, x1] {
            for y in [y0, y1] {
                breaks.push(y.atan2(x).rem_euclid(2.0 * PI));
            }
        }
        for x in [x0, x1] {
            if x.abs() < 1.0 {
                let s = (1.0 - x * x).sqrt();
                breaks.extend([s.atan2(x), (-s).atan2(x)].map(|a| a.rem_euclid(2.0 * PI)));
            }
        }
        for y in [y0, y1] {
            if y.abs() < 1.0 {
                let s = (1.0 - y * y).sqrt();
                breaks.extend([y.atan2(s), y.atan2(-s)].map(|a| a.rem_euclid(2.0 * PI)));
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let g = |s: f64| {
                let phi = a + (b - a) * 0.5 * (1.0 - (PI * s).cos());
                radial(phi) * (b - a) * 0.5 * PI * (PI * s).sin()
            };
            let h = 1.0 / panels as f64;
            let mut acc = g(0.0) + g(1.0);
            for i in 1..panels {
                acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            total += acc * h / 3.0;
        }
        total
    }

    /// Brute-force midpoint rule on a (θ, φ) grid with the truncation rule.
    fn midpoint_oracle(index: (i64, i64), l: f64, n: usize) -> f64 {
        let (dt, dp) = (FRAC_PI_2 / n as f64, 2.0 * PI / (4 * n) as f64);
        let mut acc = 0.0;
        for i in 0..n {
            let th = (i as f64 + 0.5) * dt;
            for j in 0..4 * n {
                let ph = (j as f64 + 0.5) * dp;
                let kx = th.sin() * ph.cos() * l;
                let ky = th.sin() * ph.sin() * l;
                if (kx.trunc() as i64, ky.trunc() as i64) == index {
                    acc += th.sin();
                }
            }
        }
        acc * dt * dp
    }

    #[test]
    fn half_wavelength_aperture_single_block_is_hemisphere() {
        assert_relative_eq!(block_solid_angle((0, 0), 0.5, 0.5), 2.0 * PI, epsilon = 1e-10);
    }

    #[test]
    fn wavelength_aperture_blocks_match_polar_oracle() {
        for m in propagating_indices(1.0, 1.0) {
            let (x0, x1) = block_interval(m.0, 1.0);
            let (y0, y1) = block_interval(m.1, 1.0);
            let oracle = polar_oracle(x0, x1, y0, y1, 4000);
            assert!((block_solid_angle(m, 1.0, 1.0) - oracle).abs() < 1e-7, "{m:?}");
        }
        assert_relative_eq!(block_solid_angle((0, 0), 1.0, 1.0), 2.0 * PI, epsilon = 1e-9);
    }

    #[test]
    fn quadrant_rectangle_matches_closed_form() {
        // first quadrant of the disk is a quarter hemisphere
        assert!((rectangle_solid_angle(0.0, 1.0, 0.0, 1.0) - FRAC_PI_2).abs() < 1e-9);
        assert!((polar_oracle(0.0, 1.0, 0.0, 1.0, 4000) - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn rim_blocks_match_polar_oracle() {
        for l in [2.0, 4.0, 3.5] {
            for m in propagating_indices(l, l) {
                let (x0, x1) = block_interval(m.0, 1.0 / l);
                let (y0, y1) = block_interval(m.1, 1.0 / l);
                let v = block_solid_angle(m, l, l);
                assert!(v.is_finite() && v >= 0.0);
                assert!((v - polar_oracle(x0, x1, y0, y1, 4000)).abs() < 1e-6, "L={l} m={m:?}");
            }
        }
    }

    #[test]
    fn midpoint_sanity() {
        for m in [(0, 0), (3, 2), (-4, 0), (-2, -3)] {
            let v = block_solid_angle(m, 4.0, 4.0);
            assert!((v - midpoint_oracle(m, 4.0, 600)).abs() < 2e-3, "{m:?}");
        }
    }

    #[test]
    fn grazing_samples_have_zero_measure() {
        assert_eq!(block_solid_angle((4, 0), 4.0, 4.0), 0.0);
        assert!(block_solid_angle((-4, 0), 4.0, 4.0).abs() < 1e-12);
        assert_eq!(block_solid_angle((5, 0), 4.0, 4.0), 0.0);
    }

    #[test]
    fn hemisphere_partition() {
        for l in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let s = propagating_sample_set(l, l).unwrap();
            assert_relative_eq!(s.total_weight(), 2.0 * PI, max_relative = 1e-6);
        }
        let s = propagating_sample_set(1.0 / 2f64.sqrt(), 2f64.sqrt()).unwrap();
        assert_relative_eq!(s.total_weight(), 2.0 * PI, max_relative = 1e-6);
    }

    #[test]
    fn variance_maps() {
        let half = propagating_sample_set(0.5_f64, 0.5).unwrap();
        let raw = variance_map(&half, &half, Normalization::Raw);
        assert_relative_eq!(raw.variances[(0, 0)], 4.0 * PI * PI, max_relative = 1e-10);

        let s4 = propagating_sample_set(4.0_f64, 4.0).unwrap();
        let raw4 = variance_map(&s4, &s4, Normalization::Raw);
        assert_eq!(raw4.shape(), (49, 49));
        assert_relative_eq!(raw4.total(), 4.0 * PI * PI, max_relative = 1e-5);
        assert_relative_eq!(raw4.variances[(3, 7)], s4.block_weights[3] * s4.block_weights[7]);
        let unit = variance_map(&s4, &s4, Normalization::UnitAverageGain);
        assert!((unit.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_draws_zero() {
        let s = propagating_sample_set(2.0_f64, 2.0).unwrap();
        let mut map = variance_map(&s, &s, Normalization::Raw);
        map.variances.fill(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(draw_angular_response(&map, &mut rng).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn draws_are_deterministic() {
        let s = propagating_sample_set(2.0_f64, 2.0).unwrap();
        let map = variance_map(&s, &s, Normalization::UnitAverageGain);
        let a = draw_angular_response_for(&map, SeedLineage::new(11, 5));
        let b = draw_angular_response_for(&map, SeedLineage::new(11, 5));
        assert_eq!(a, b);
        let c = draw_angular_response_for(&map, SeedLineage::new(11, 6));
        assert_ne!(a.matrix, c.matrix);
    }

    #[test]
    fn entry_statistics() {
        let map = AngularVarianceMap {
            receive_weights: vec![1.0],
            source_weights: vec![1.0],
            variances: DMatrix::from_element(1, 1, 2.5_f64),
            normalization: Normalization::Raw,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let (mut p, mut re2, mut im2) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = draw_angular_response(&map, &mut rng)[(0, 0)];
            p += z.norm_sqr();
            re2 += z.re * z.re;
            im2 += z.im * z.im;
        }
        let nf = n as f64;
        assert!((p / nf - 2.5).abs() / 2.5 < 0.03);
        // each quadrature has variance σ²/2; standard error of the estimate is σ²/2·√(2/n)
        let se = 1.25 * (2.0 / nf).sqrt();
        assert!((re2 / nf - 1.25).abs() < 3.0 * se);
        assert!((im2 / nf - 1.25).abs() < 3.0 * se);
    }
}
