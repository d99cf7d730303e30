//! Downlink multi-user sweeps.

use nalgebra::Vector3;

use holomimo::angular::{draw_angular_response, variance_map, Normalization};
use holomimo::array::{propagating_sample_set, steering_matrix};
use holomimo::capacity::run_trials;
use holomimo::channel::polarized_angular_response;
use holomimo::efficiency::transmission_efficiency_bound;
use holomimo::leakage::{draw_leakage, XprParameters};
use holomimo::multiuser::{draw_sector_placements, iterative_water_filling, mrt_sum_rate, zf_sum_rate, MultiUserScenario, StreamMode};
use holomimo::pattern::{dipole_pattern, steered_pattern_matrix};
use holomimo::reduced::{reduce_factor, ReducedLink};
use holomimo::rng::{Purpose, SeedLineage};
use holomimo::{CMatrix, Complex64, Link, VarianceMap, Xpr};

use super::single_link::weighted;
use super::{column_estimates, db_to_linear, geometry, get};
use crate::arrays::DipoleArray;
use crate::config::{structure_label, EfficiencyMode, Precoder, ScenarioConfig, StreamKey};
use crate::error::RunError;
use crate::output::{results_file, OutputFile, ResultRow};

/// Stream tag of user `k`'s angular response; its leakage uses the next tag.
fn user_tag(k: usize) -> u64 {
    Purpose::UserResponse as u64 + 2 * k as u64
}

/// Reduced channel `K_k` of every user for one trial.
fn user_cores(link: &Link, map: &VarianceMap, xpr: Option<&Xpr>, users: usize, lineage: SeedLineage) -> holomimo::Result<Vec<CMatrix>> {
    (0..users)
        .map(|k| {
            let h_a = draw_angular_response(map, &mut lineage.stream_raw(user_tag(k)));
            let middle = match xpr {
                None => h_a,
                Some(x) => {
                    let (nr, ns) = map.shape();
                    let leak = draw_leakage(x, nr, ns, &mut lineage.stream_raw(user_tag(k) + 1));
                    polarized_angular_response(&leak.matrix, &h_a)?
                }
            };
            Ok(link.core(&middle))
        })
        .collect()
}

/// Re-expresses every user channel in an orthonormal basis of the stacked
/// row space. Sum rates of linear precoding and dual-MAC water-filling only
/// see `G Gᴴ`, so they are unchanged while the transmit dimension shrinks
/// to the total number of receive rows.
pub fn compress_transmit_side(users: &[CMatrix]) -> Vec<CMatrix> {
    let rows: usize = users.iter().map(|h| h.nrows()).sum();
    let cols = users.first().map_or(0, |h| h.ncols());
    let mut stacked = CMatrix::zeros(rows, cols);
    let mut at = 0;
    for h in users {
        stacked.rows_mut(at, h.nrows()).copy_from(h);
        at += h.nrows();
    }
    // Gᴴ = Q C, so G = Cᴴ Qᴴ and the rows of Cᴴ carry the same Gram matrix.
    let reduced = reduce_factor(&stacked.adjoint()).coefficients.adjoint();
    let mut out = Vec::with_capacity(users.len());
    let mut at = 0;
    for h in users {
        out.push(reduced.rows(at, h.nrows()).into_owned());
        at += h.nrows();
    }
    out
}

/// Sum rates of zero-forcing and matched-filter precoding against spacing,
/// for the scalar holographic channel and its efficiency-modified version.
pub fn fig13_mu_zf_mrt(config: &ScenarioConfig) -> Result<Vec<OutputFile>, RunError> {
    let p = &config.params;
    let (ax, ay) = (get(&p.aperture_x_wl, "aperture_x_wl")?, get(&p.aperture_y_wl, "aperture_y_wl")?);
    let (ux, uy) = (
        get(&p.user_aperture_x_wl, "user_aperture_x_wl")?,
        get(&p.user_aperture_y_wl, "user_aperture_y_wl")?,
    );
    let users = get(&p.users, "users")?;
    let power = get(&p.total_power_w, "total_power_w")?;
    let rho = vec![db_to_linear(get(&p.snr_db, "snr_db")?); users];
    let precoders = get(&p.precoders, "precoders")?;
    let mode = match get(&p.stream_mode, "stream_mode")? {
        StreamKey::PerAntenna => StreamMode::PerAntenna,
        StreamKey::PerUser => StreamMode::PerUser {
            streams: get(&p.streams_per_user, "streams_per_user")?,
        },
    };
    let bs_samples = propagating_sample_set(ax, ay)?;
    let ut_samples = propagating_sample_set(ux, uy)?;
    let map = variance_map(&ut_samples, &bs_samples, Normalization::UnitAverageGain);
    let mut rows = Vec::new();
    for (i, &d) in get(&p.spacings_wl, "spacings_wl")?.iter().enumerate() {
        let key = format!("params.spacings_wl[{i}]");
        let bs = geometry(ax, ay, d, d, &key)?;
        let ut = geometry(ux, uy, d, d, &key)?;
        let link = ReducedLink::new(&steering_matrix(&ut, &ut_samples)?, &steering_matrix(&bs, &bs_samples)?);
        let chi = transmission_efficiency_bound(d, d)?;
        let per_trial = run_trials(config.seed, config.trials, |lineage| {
            let cores = user_cores(&link, &map, None, users, lineage)?;
            let plain: Vec<CMatrix> = match mode {
                StreamMode::PerAntenna => cores.iter().map(|k| link.receive_rows(k)).collect(),
                StreamMode::PerUser { .. } => cores,
            };
            let plain = compress_transmit_side(&plain);
            let modified: Vec<CMatrix> = plain.iter().map(|h| h * Complex64::from(chi)).collect();
            let mut out = Vec::new();
            for channels in [&plain, &modified] {
                for pc in &precoders {
                    out.push(match pc {
                        Precoder::Zf => zf_sum_rate(channels, power, &rho, mode)?,
                        Precoder::Mrt => mrt_sum_rate(channels, power, &rho, mode)?,
                    });
                }
            }
            Ok(out)
        })?;
        let est = column_estimates(&per_trial);
        let mut it = est.into_iter();
        for model in ["holo", "mdf"] {
            for pc in &precoders {
                let label = match pc {
                    Precoder::Zf => "zf",
                    Precoder::Mrt => "mrt",
                };
                rows.push(ResultRow::new(
                    config.scenario.label(),
                    d,
                    model,
                    label,
                    it.next().expect("estimate per column"),
                ));
            }
        }
    }
    Ok(vec![results_file(&rows)?])
}

/// Sum rate by iterative water-filling for dipole base-station arrays of a
/// fixed aperture serving users spread over a sector.
pub fn fig14_mu_iwf(config: &ScenarioConfig) -> Result<Vec<OutputFile>, RunError> {
    let p = &config.params;
    let (ax, ay) = (get(&p.aperture_x_wl, "aperture_x_wl")?, get(&p.aperture_y_wl, "aperture_y_wl")?);
    let (ux, uy) = (
        get(&p.user_aperture_x_wl, "user_aperture_x_wl")?,
        get(&p.user_aperture_y_wl, "user_aperture_y_wl")?,
    );
    let [ucy, ucx] = get(&p.user_counts, "user_counts")?;
    let axis = get(&p.dipole_axis, "dipole_axis")?;
    let users = get(&p.users, "users")?;
    let power = get(&p.total_power_w, "total_power_w")?;
    let (tol, max_iters) = (get(&p.iwf_tolerance, "iwf_tolerance")?, get(&p.iwf_max_iters, "iwf_max_iters")?);
    let (r_min, r_max) = (get(&p.range_min_m, "range_min_m")?, get(&p.range_max_m, "range_max_m")?);
    let half_width = get(&p.sector_half_width_deg, "sector_half_width_deg")?.to_radians();
    let xpr = XprParameters::log_normal(get(&p.xpr_mu_db, "xpr_mu_db")?, get(&p.xpr_sigma_db, "xpr_sigma_db")?)?;
    let files = p.pattern_files.clone().unwrap_or_default();
    let modes = get(&p.efficiency_modes, "efficiency_modes")?;

    let ut = geometry(ux, uy, ux / ucx as f64, uy / ucy as f64, "params.user_counts")?;
    let ut_samples = propagating_sample_set(ux, uy)?;
    let ut_bound = transmission_efficiency_bound(ut.spacing_x, ut.spacing_y)?;
    let ut_f = steered_pattern_matrix(&vec![dipole_pattern(Vector3::from(axis))?; ut.len()], &ut, &ut_samples)?;
    let ut_u = steering_matrix(&ut, &ut_samples)?;
    let bs_samples = propagating_sample_set(ax, ay)?;
    let map = variance_map(&ut_samples, &bs_samples, Normalization::UnitAverageGain);

    let mut rows = Vec::new();
    for s in get(&p.structures, "structures")? {
        let arr = DipoleArray::build(s, ax, ay, axis, files.get(&structure_label(s)).map(|p| p.as_path()))?;
        let bs_f = steered_pattern_matrix(&arr.patterns, &arr.geometry, &arr.samples)?;
        for &mode in &modes {
            let (link, leak) = match mode {
                EfficiencyMode::Holo => (ReducedLink::new(&ut_u, &steering_matrix(&arr.geometry, &arr.samples)?), None),
                _ => {
                    let ut_chi = if mode == EfficiencyMode::Unit { 1.0 } else { ut_bound };
                    let b_r = weighted(&ut_f, &vec![ut_chi; ut.len()]);
                    (ReducedLink::new(&b_r, &weighted(&bs_f, &arr.efficiencies(mode)?)), Some(&xpr))
                }
            };
            let rates = run_trials(config.seed, config.trials, |lineage| {
                let placements = draw_sector_placements(users, r_min, r_max, half_width, &mut lineage.stream(Purpose::Placement));
                let scenario = MultiUserScenario::<f64> {
                    bs_geometry: arr.geometry.clone(),
                    user_geometries: vec![ut.clone(); users],
                    user_placements: placements,
                    pathloss_exponent: p.pathloss_exponent.unwrap_or(2.0),
                    reference_range_m: p.reference_range_m.unwrap_or(50.0),
                    reference_snr_db: p.reference_snr_db.unwrap_or(0.0),
                    total_power_w: power,
                };
                let channels = compress_transmit_side(&user_cores(&link, &map, leak, users, lineage)?);
                Ok(vec![
                    iterative_water_filling(&channels, power, &scenario.rho_per_user(), tol, max_iters)?.sum_rate,
                ])
            })?;
            let est = column_estimates(&rates);
            rows.push(ResultRow::new(
                config.scenario.label(),
                arr.geometry.spacing_x,
                format!("{}:{}", arr.label, mode.label()),
                "iwf",
                est[0],
            ));
        }
    }
    Ok(vec![results_file(&rows)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use holomimo::multiuser::iterative_water_filling;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn compression_preserves_sum_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let users: Vec<CMatrix> = (0..3)
            .map(|_| {
                CMatrix::from_fn(2, 12, |_, _| {
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
            })
            .collect();
        let small = compress_transmit_side(&users);
        assert_eq!(small[0].ncols(), 6);
        let rho = [1.0, 0.5, 2.0];
        let a = iterative_water_filling(&users, 10.0, &rho, 1e-10, 500).unwrap().sum_rate;
        let b = iterative_water_filling(&small, 10.0, &rho, 1e-10, 500).unwrap().sum_rate;
        assert!((a - b).abs() < 1e-6 * a, "{a} {b}");
        for mode in [StreamMode::PerAntenna, StreamMode::PerUser { streams: 1 }] {
            let (x, y) = (
                zf_sum_rate(&users, 10.0, &rho, mode).unwrap(),
                zf_sum_rate(&small, 10.0, &rho, mode).unwrap(),
            );
            assert!((x - y).abs() < 1e-9 * x);
            let (x, y) = (
                mrt_sum_rate(&users, 10.0, &rho, mode).unwrap(),
                mrt_sum_rate(&small, 10.0, &rho, mode).unwrap(),
            );
            assert!((x - y).abs() < 1e-9 * x);
        }
    }
}
