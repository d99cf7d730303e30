//! Single-user rates: water-filling, log-det capacity, eigen spectra and the
//! seeded Monte-Carlo average over channel draws.

use nalgebra::DMatrix;
use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::SeedLineage;
use crate::scalar::{cplx, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation<T: Real> {
    pub powers: Vec<T>,
    pub water_level: T,
    pub rate_bits: T,
}

/// Power across parallel channels with gains `g_i` (noise 1):
/// `p_i = max(0, μ − 1/g_i)`, `Σ p_i = P`. Exact active-set solution.
pub fn water_filling<T: Real>(gains: &[T], total_power: T) -> PowerAllocation<T> {
    let mut order: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > T::zero()).collect();
    let mut powers = vec![T::zero(); gains.len()];
    if order.is_empty() || !(total_power > T::zero()) {
        return PowerAllocation {
            powers,
            water_level: T::zero(),
            rate_bits: T::zero(),
        };
    }
    order.sort_by(|&a, &b| gains[b].partial_cmp(&gains[a]).expect("finite gains"));
    let mut inv_sum = T::zero();
    let mut level = T::zero();
    for (k, &i) in order.iter().enumerate() {
        let inv = T::one() / gains[i];
        let candidate = (total_power + inv_sum + inv) / T::count(k + 1);
        if candidate <= inv && k > 0 {
            break;
        }
        inv_sum += inv;
        level = candidate;
    }
    let mut rate = T::zero();
    for &i in &order {
        let p = (level - T::one() / gains[i]).max(T::zero());
        powers[i] = p;
        rate += (T::one() + gains[i] * p).log2();
    }
    PowerAllocation {
        powers,
        water_level: level,
        rate_bits: rate,
    }
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues<T: Real>(m: &DMatrix<Complex<T>>) -> Vec<T> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut eig: Vec<T> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    eig
}

/// Eigenpairs of a Hermitian matrix, descending by eigenvalue.
pub fn hermitian_eigen<T: Real>(m: &DMatrix<Complex<T>>) -> (Vec<T>, DMatrix<Complex<T>>) {
    let se = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| se.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Eigenvalues of `H Hᴴ`, descending, clamped at zero and padded to `N_R`.
pub fn eigen_spectrum<T: Real>(h: &DMatrix<Complex<T>>) -> Vec<T> {
    let gram = if h.nrows() <= h.ncols() { h * h.adjoint() } else { h.adjoint() * h };
    let mut eig: Vec<T> = hermitian_eigenvalues(&gram).into_iter().map(|v| v.max(T::zero())).collect();
    eig.resize(h.nrows(), T::zero());
    eig
}

/// `log₂ det(A)` of a Hermitian positive definite matrix.
pub fn log2_det_hpd<T: Real>(a: &DMatrix<Complex<T>>) -> Result<T> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Singular("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    let mut acc = T::zero();
    for i in 0..a.nrows() {
        acc += l[(i, i)].re.log2();
    }
    Ok(acc + acc)
}

/// `log₂ det(I + ρ H R Hᴴ)`.
pub fn capacity<T: Real>(h: &DMatrix<Complex<T>>, covariance: &DMatrix<Complex<T>>, rho: T) -> Result<T> {
    let n = h.ncols();
    if covariance.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "covariance {:?} for {} transmit antennas",
            covariance.shape(),
            n
        )));
    }
    let eig = hermitian_eigenvalues(covariance);
    if let (Some(&max), Some(&min)) = (eig.first(), eig.last()) {
        if min < -T::lit(1e-9) * max.abs().max(T::one()) {
            return Err(Error::NotPsd(min.as_f64()));
        }
    }
    let m = h * covariance * h.adjoint() * cplx(rho) + DMatrix::identity(h.nrows(), h.nrows());
    log2_det_hpd(&m)
}

/// Capacity-achieving transmit covariance `V diag(p) Vᴴ` under total power `P`.
pub fn waterfilled_covariance<T: Real>(h: &DMatrix<Complex<T>>, total_power: T, rho: T) -> DMatrix<Complex<T>> {
    let (values, vectors) = hermitian_eigen(&(h.adjoint() * h));
    let gains: Vec<T> = values.iter().map(|&v| v.max(T::zero()) * rho).collect();
    let alloc = water_filling(&gains, total_power);
    let mut scaled = vectors.clone();
    for (c, &p) in alloc.powers.iter().enumerate() {
        scaled.column_mut(c).scale_mut(p);
    }
    scaled * vectors.adjoint()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Allocation {
    WaterFilling,
    Equal,
}

impl Allocation {
    pub fn label(self) -> &'static str {
        match self {
            Allocation::WaterFilling => "waterfilling",
            Allocation::Equal => "equal",
        }
    }
}

/// Rate from the eigenvalues of `H Hᴴ`; equal allocation spreads `P` over
/// all `transmit_antennas`.
pub fn rate_from_eigenvalues<T: Real>(eigenvalues: &[T], transmit_antennas: usize, total_power: T, rho: T, allocation: Allocation) -> T {
    match allocation {
        Allocation::WaterFilling => {
            let gains: Vec<T> = eigenvalues.iter().map(|&v| v.max(T::zero()) * rho).collect();
            water_filling(&gains, total_power).rate_bits
        }
        Allocation::Equal => {
            let per = total_power / T::count(transmit_antennas.max(1));
            eigenvalues
                .iter()
                .fold(T::zero(), |acc, &v| acc + (T::one() + rho * per * v.max(T::zero())).log2())
        }
    }
}

/// Rate of one channel realisation under the given allocation.
pub fn mimo_rate<T: Real>(h: &DMatrix<Complex<T>>, total_power: T, rho: T, allocation: Allocation) -> T {
    rate_from_eigenvalues(&eigen_spectrum(h), h.ncols(), total_power, rho, allocation)
}

/// Sample mean with a normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub ci95: f64,
    pub trials: usize,
}

impl Estimate {
    /// Summation runs in trial order so the result does not depend on how
    /// the trials were scheduled.
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                ci95: f64::NAN,
                trials: 0,
            };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        let ci95 = if n < 2 {
            0.0
        } else {
            let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            1.96 * (var / n as f64).sqrt()
        };
        Self { mean, ci95, trials: n }
    }
}

/// Runs `trial` for lineages `(seed, 0..trials)` on the current rayon pool
/// and collects the results in trial order.
pub fn run_trials<F, V>(seed: u64, trials: usize, trial: F) -> Result<Vec<V>>
where
    F: Fn(SeedLineage) -> Result<V> + Sync,
    V: Send,
{
    (0..trials as u64)
        .into_par_iter()
        .map(|t| trial(SeedLineage::new(seed, t)))
        .collect()
}

/// Ergodic average of a per-trial rate.
pub fn ergodic<F>(seed: u64, trials: usize, trial: F) -> Result<Estimate>
where
    F: Fn(SeedLineage) -> Result<f64> + Sync,
{
    Ok(Estimate::from_samples(&run_trials(seed, trials, trial)?))
}
