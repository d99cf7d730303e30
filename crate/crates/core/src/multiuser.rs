//! Downlink multi-user rates: zero-forcing and maximum-ratio precoding,
//! sum-power iterative water-filling, and random user placement.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;

use crate::array::ArrayGeometry;
use crate::capacity::{hermitian_eigen, log2_det_hpd, water_filling};
use crate::error::{Error, Result};
use crate::scalar::{cplx, Real};

/// How each user's channel is turned into precoded streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamMode {
    /// Every receive antenna is a stream.
    PerAntenna,
    /// The strongest `streams` eigenmodes of each user, received with the
    /// matching left singular vectors.
    PerUser { streams: usize },
}

/// Stacked single-stream rows and the user each row belongs to.
pub fn effective_rows<T: Real>(user_channels: &[DMatrix<Complex<T>>], mode: StreamMode) -> Result<(DMatrix<Complex<T>>, Vec<usize>)> {
    let cols = check_users(user_channels)?;
    let mut rows: Vec<DMatrix<Complex<T>>> = Vec::new();
    let mut owner = Vec::new();
    for (k, h) in user_channels.iter().enumerate() {
        match mode {
            StreamMode::PerAntenna => {
                rows.push(h.clone());
                owner.extend(std::iter::repeat_n(k, h.nrows()));
            }
            StreamMode::PerUser { streams } => {
                let (_, u) = hermitian_eigen(&(h * h.adjoint()));
                let s = streams.min(h.nrows());
                rows.push(u.columns(0, s).adjoint() * h);
                owner.extend(std::iter::repeat_n(k, s));
            }
        }
    }
    let total: usize = rows.iter().map(|r| r.nrows()).sum();
    let mut stacked = DMatrix::zeros(total, cols);
    let mut at = 0;
    for r in rows {
        stacked.rows_mut(at, r.nrows()).copy_from(&r);
        at += r.nrows();
    }
    Ok((stacked, owner))
}

fn check_users<T: Real>(user_channels: &[DMatrix<Complex<T>>]) -> Result<usize> {
    let first = user_channels.first().ok_or_else(|| Error::Dimension("no users".into()))?;
    let cols = first.ncols();
    if user_channels.iter().any(|h| h.ncols() != cols) {
        return Err(Error::Dimension("user channels have different transmit dimensions".into()));
    }
    Ok(cols)
}

fn check_rho<T: Real>(rho_per_user: &[T], users: usize) -> Result<()> {
    if rho_per_user.len() != users {
        return Err(Error::Dimension(format!("{} SNR values for {} users", rho_per_user.len(), users)));
    }
    Ok(())
}

/// Row Gram `G Gᴴ`, rejecting stacks without full row rank.
fn full_rank_gram<T: Real>(rows: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
    let gram = rows * rows.adjoint();
    let (values, _) = hermitian_eigen(&gram);
    let top = values.first().copied().unwrap_or_else(T::zero);
    let rank = values.iter().filter(|&&v| v > top * T::lit(1e-10) && v > T::zero()).count();
    if rank < rows.nrows() {
        return Err(Error::RankDeficient { rank, rows: rows.nrows() });
    }
    Ok(gram)
}

/// Zero-forcing precoder `Gᴴ(GGᴴ)⁻¹` with unit-norm columns.
pub fn zf_precoder<T: Real>(rows: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
    let gram = full_rank_gram(rows)?;
    let inv = gram.try_inverse().ok_or_else(|| Error::Singular("stream Gram matrix".into()))?;
    let mut w = rows.adjoint() * inv;
    for mut c in w.column_iter_mut() {
        let n = c.norm();
        c.unscale_mut(n);
    }
    Ok(w)
}

/// Sum rate with zero-forcing and equal power per stream:
/// `SINR_i = ρ_i (P/S) / [(GGᴴ)⁻¹]_ii`.
pub fn zf_sum_rate<T: Real>(user_channels: &[DMatrix<Complex<T>>], total_power: T, rho_per_user: &[T], mode: StreamMode) -> Result<T> {
    check_rho(rho_per_user, user_channels.len())?;
    let (rows, owner) = effective_rows(user_channels, mode)?;
    let gram = full_rank_gram(&rows)?;
    let inv = gram.try_inverse().ok_or_else(|| Error::Singular("stream Gram matrix".into()))?;
    let per_stream = total_power / T::count(rows.nrows());
    Ok((0..rows.nrows()).fold(T::zero(), |acc, i| {
        let sinr = rho_per_user[owner[i]] * per_stream / inv[(i, i)].re;
        acc + (T::one() + sinr).log2()
    }))
}

/// Sum rate with matched-filter precoding `w_i = g_iᴴ/‖g_i‖`, equal power,
/// interference from all other streams treated as noise.
pub fn mrt_sum_rate<T: Real>(user_channels: &[DMatrix<Complex<T>>], total_power: T, rho_per_user: &[T], mode: StreamMode) -> Result<T> {
    check_rho(rho_per_user, user_channels.len())?;
    let (rows, owner) = effective_rows(user_channels, mode)?;
    let gram = &rows * rows.adjoint();
    let s = rows.nrows();
    let per_stream = total_power / T::count(s);
    let mut rate = T::zero();
    for i in 0..s {
        let own = gram[(i, i)].re;
        if !(own > T::zero()) {
            continue;
        }
        let snr = rho_per_user[owner[i]] * per_stream;
        let mut interference = T::zero();
        for j in (0..s).filter(|&j| j != i) {
            let norm_j = gram[(j, j)].re;
            if norm_j > T::zero() {
                interference += gram[(i, j)].norm_sqr() / norm_j;
            }
        }
        rate += (T::one() + snr * own / (T::one() + snr * interference)).log2();
    }
    Ok(rate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IwfOutcome<T: Real> {
    pub sum_rate: T,
    /// Sum rate after each sweep.
    pub trace: Vec<T>,
    pub converged: bool,
    /// Dual uplink covariance of each user.
    pub covariances: Vec<DMatrix<Complex<T>>>,
}

/// `log₂ det(I + Σ ρ_k H_kᴴ Q_k H_k)`.
fn dual_sum_rate<T: Real>(scaled: &[DMatrix<Complex<T>>], q: &[DMatrix<Complex<T>>]) -> Result<T> {
    log2_det_hpd(&aggregate(scaled, q, None))
}

fn aggregate<T: Real>(scaled: &[DMatrix<Complex<T>>], q: &[DMatrix<Complex<T>>], skip: Option<usize>) -> DMatrix<Complex<T>> {
    let m = scaled[0].ncols();
    let mut acc = DMatrix::identity(m, m);
    for (k, (h, qk)) in scaled.iter().zip(q).enumerate() {
        if Some(k) != skip {
            acc += h.adjoint() * qk * h;
        }
    }
    acc
}

/// Broadcast sum rate under a total power budget, by sum-power iterative
/// water-filling on the dual multiple-access channel.
///
/// Each sweep water-fills all users jointly against the interference of the
/// previous sweep. The next iterate is whichever of the full update and its
/// `1/K` average with the previous covariances gives the higher sum rate;
/// the averaged update alone never decreases it.
pub fn iterative_water_filling<T: Real>(
    user_channels: &[DMatrix<Complex<T>>],
    total_power: T,
    rho_per_user: &[T],
    tolerance: T,
    max_iters: usize,
) -> Result<IwfOutcome<T>> {
    check_users(user_channels)?;
    check_rho(rho_per_user, user_channels.len())?;
    let scaled: Vec<DMatrix<Complex<T>>> = user_channels.iter().zip(rho_per_user).map(|(h, &r)| h * cplx(r.sqrt())).collect();
    let k_users = scaled.len();
    let mut q: Vec<DMatrix<Complex<T>>> = scaled.iter().map(|h| DMatrix::zeros(h.nrows(), h.nrows())).collect();
    let mut current = T::zero();
    let mut trace = Vec::new();
    let weight = T::one() / T::count(k_users);

    for _ in 0..max_iters {
        let mut modes = Vec::with_capacity(k_users);
        let mut gains = Vec::new();
        for k in 0..k_users {
            let z = aggregate(&scaled, &q, Some(k));
            let chol = z.cholesky().ok_or_else(|| Error::Singular("interference covariance".into()))?;
            let a = &scaled[k] * chol.solve(&scaled[k].adjoint());
            let (values, vectors) = hermitian_eigen(&((&a + a.adjoint()) * cplx(T::lit(0.5))));
            gains.extend(values.iter().map(|&v| v.max(T::zero())));
            modes.push(vectors);
        }
        let alloc = water_filling(&gains, total_power);
        let mut at = 0;
        let fresh: Vec<DMatrix<Complex<T>>> = modes
            .iter()
            .map(|u| {
                let n = u.ncols();
                let mut scaled_u = u.clone();
                for c in 0..n {
                    scaled_u.column_mut(c).scale_mut(alloc.powers[at + c]);
                }
                at += n;
                scaled_u * u.adjoint()
            })
            .collect();
        let averaged: Vec<DMatrix<Complex<T>>> = fresh
            .iter()
            .zip(&q)
            .map(|(f, o)| f * cplx(weight) + o * cplx(T::one() - weight))
            .collect();
        let full_rate = dual_sum_rate(&scaled, &fresh)?;
        let avg_rate = dual_sum_rate(&scaled, &averaged)?;
        let (next, rate) = if full_rate >= avg_rate {
            (fresh, full_rate)
        } else {
            (averaged, avg_rate)
        };
        let gain = rate - current;
        if gain < T::zero() {
            // Round-off only; keep the previous iterate.
            trace.push(current);
            return Ok(IwfOutcome {
                sum_rate: current,
                trace,
                converged: true,
                covariances: q,
            });
        }
        q = next;
        current = rate;
        trace.push(rate);
        if gain < tolerance {
            return Ok(IwfOutcome {
                sum_rate: current,
                trace,
                converged: true,
                covariances: q,
            });
        }
    }
    Ok(IwfOutcome {
        sum_rate: current,
        trace,
        converged: false,
        covariances: q,
    })
}

/// Link budget and placement of the users served by one base station.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiUserScenario<T: Real> {
    pub bs_geometry: ArrayGeometry<T>,
    pub user_geometries: Vec<ArrayGeometry<T>>,
    /// `(range in m, azimuth in rad)` per user.
    pub user_placements: Vec<(f64, f64)>,
    pub pathloss_exponent: f64,
    pub reference_range_m: f64,
    pub reference_snr_db: f64,
    pub total_power_w: f64,
}

impl<T: Real> MultiUserScenario<T> {
    pub fn users(&self) -> usize {
        self.user_geometries.len()
    }

    /// `ρ_k` in dB: reference SNR minus `10 γ log₁₀(r_k / r_ref)`.
    pub fn snr_db(&self, range_m: f64) -> f64 {
        self.reference_snr_db - 10.0 * self.pathloss_exponent * (range_m / self.reference_range_m).log10()
    }

    /// Linear `ρ_k` per user.
    pub fn rho_per_user(&self) -> Vec<T> {
        self.user_placements
            .iter()
            .map(|&(r, _)| T::lit(10f64.powf(self.snr_db(r) / 10.0)))
            .collect()
    }
}

/// Users uniform over the area of an annular sector: azimuth uniform in
/// `[−half_width, half_width]`, range with CDF `∝ r² − r_min²`.
pub fn draw_sector_placements<R: Rng + ?Sized>(
    users: usize,
    range_min: f64,
    range_max: f64,
    half_width_rad: f64,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    (0..users)
        .map(|_| {
            let u: f64 = rng.random();
            let r = (u * (range_max * range_max - range_min * range_min) + range_min * range_min).sqrt();
            let az = rng.random_range(-half_width_rad..=half_width_rad);
            (r, az)
        })
        .collect()
}
