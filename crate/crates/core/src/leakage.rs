//! Random cross-polarisation leakage between the two orthogonal field
//! components of every propagation path.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};
use crate::scalar::{phasor, two_pi, Real};

/// Statistics of the cross-polarisation power ratio `κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XprParameters<T: Real> {
    pub mu_xpr_db: T,
    pub sigma_xpr_db: T,
    /// Fixed `κ` for every block; the log-normal spread is ignored when set.
    pub deterministic_kappa: Option<T>,
}

impl<T: Real> XprParameters<T> {
    pub fn log_normal(mu_xpr_db: T, sigma_xpr_db: T) -> Result<Self> {
        if !(sigma_xpr_db >= T::zero()) {
            return Err(Error::Domain(format!(
                "sigma_xpr_db must be nonnegative, got {}",
                sigma_xpr_db.as_f64()
            )));
        }
        Ok(Self {
            mu_xpr_db,
            sigma_xpr_db,
            deterministic_kappa: None,
        })
    }

    pub fn fixed(kappa: T) -> Result<Self> {
        if !(kappa > T::zero()) {
            return Err(Error::Domain(format!("kappa must be positive, got {}", kappa.as_f64())));
        }
        Ok(Self {
            mu_xpr_db: T::lit(10.0) * kappa.log10(),
            sigma_xpr_db: T::zero(),
            deterministic_kappa: Some(kappa),
        })
    }
}

/// `2n_R × 2n_S` matrix of 2×2 leakage blocks, one per path `(l, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeakageMatrix<T: Real> {
    pub matrix: DMatrix<Complex<T>>,
    /// `κ` of each block, `n_R × n_S`.
    pub kappas: DMatrix<T>,
}

impl<T: Real> LeakageMatrix<T> {
    /// Same `κ` on every block with all phases zero.
    pub fn uniform(kappa: T, n_r: usize, n_s: usize) -> Self {
        let mut matrix = DMatrix::zeros(2 * n_r, 2 * n_s);
        for l in 0..n_r {
            for m in 0..n_s {
                write_block(&mut matrix, l, m, kappa, [T::zero(); 4]);
            }
        }
        Self {
            matrix,
            kappas: DMatrix::from_element(n_r, n_s, kappa),
        }
    }

    pub fn block(&self, l: usize, m: usize) -> [[Complex<T>; 2]; 2] {
        let (r, c) = (2 * l, 2 * m);
        [
            [self.matrix[(r, c)], self.matrix[(r, c + 1)]],
            [self.matrix[(r + 1, c)], self.matrix[(r + 1, c + 1)]],
        ]
    }

    pub fn path_counts(&self) -> (usize, usize) {
        self.kappas.shape()
    }
}

fn write_block<T: Real>(out: &mut DMatrix<Complex<T>>, l: usize, m: usize, kappa: T, phases: [T; 4]) {
    let inv = T::one() / kappa;
    let co = T::one() / (T::one() + inv).sqrt();
    let cross = inv.sqrt() * co;
    let (r, c) = (2 * l, 2 * m);
    out[(r, c)] = phasor(phases[0]) * co;
    out[(r, c + 1)] = phasor(phases[1]) * cross;
    out[(r + 1, c)] = phasor(phases[2]) * cross;
    out[(r + 1, c + 1)] = phasor(phases[3]) * co;
}

/// Draws one leakage matrix. Blocks are filled row-major over `(l, m)`; each
/// consumes a `κ` draw (unless fixed) followed by four phases.
pub fn draw_leakage<T: Real, R: Rng + ?Sized>(xpr: &XprParameters<T>, n_r: usize, n_s: usize, rng: &mut R) -> LeakageMatrix<T> {
    let mut matrix = DMatrix::zeros(2 * n_r, 2 * n_s);
    let mut kappas = DMatrix::zeros(n_r, n_s);
    let phase = Uniform::new(0.0, two_pi::<f64>()).expect("valid phase range");
    let (mu, sigma) = (xpr.mu_xpr_db.as_f64(), xpr.sigma_xpr_db.as_f64());
    for l in 0..n_r {
        for m in 0..n_s {
            let kappa = match xpr.deterministic_kappa {
                Some(k) => k,
                None => {
                    let z: f64 = StandardNormal.sample(rng);
                    T::lit(10f64.powf((mu + sigma * z) / 10.0))
                }
            };
            let phases = [0; 4].map(|_| T::lit(phase.sample(rng)));
            write_block(&mut matrix, l, m, kappa, phases);
            kappas[(l, m)] = kappa;
        }
    }
    LeakageMatrix { matrix, kappas }
}
