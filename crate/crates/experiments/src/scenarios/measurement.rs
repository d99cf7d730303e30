//! Synthetic probe measurement and its post-processing.

use holomimo::angular::{draw_angular_response, variance_map, Normalization};
use holomimo::array::{propagating_sample_set, ArrayGeometry};
use holomimo::capacity::{eigen_spectrum, mimo_rate, Allocation, Estimate};
use holomimo::channel::{synthesize_pol_link, ArrayEnd};
use holomimo::efficiency::transmission_efficiency_bound;
use holomimo::io::{load_channel, write_channel_csv};
use holomimo::leakage::{draw_leakage, XprParameters};
use holomimo::pattern::{isotropic_pattern, IsotropicPolarization};
use holomimo::postprocess::{compensate_efficiency, resample_receive_array, ReceiveGrid};
use holomimo::rng::{Purpose, SeedLineage};
use holomimo::CMatrix;

use super::{db_to_linear, get};
use crate::config::ScenarioConfig;
use crate::error::RunError;
use crate::output::{eigen_file, results_file, OutputFile, ResultRow};

/// Virtual receive grid `[rows, cols]` at λ/8.
pub const SYNTHETIC_RECEIVE_GRID: [usize; 2] = [16, 16];
/// Source array `[count_y, count_x]` at λ/2.
pub const SYNTHETIC_SOURCE_COUNTS: [usize; 2] = [4, 4];

const SYNTHETIC_RECEIVE_SPACING: f64 = 0.125;
const SYNTHETIC_SOURCE_SPACING: f64 = 0.5;
const SYNTHETIC_XPR_MU_DB: f64 = 8.0;
const SYNTHETIC_XPR_SIGMA_DB: f64 = 3.0;

/// One polarised realisation standing in for a probe scan: θ-polarised
/// isotropic elements, unit efficiency, log-normal cross-polarisation.
/// Rows follow the receive grid row-major, x fastest.
pub fn synthetic_measurement(seed: u64) -> holomimo::Result<CMatrix> {
    let [rr, rc] = SYNTHETIC_RECEIVE_GRID;
    let [sr, sc] = SYNTHETIC_SOURCE_COUNTS;
    let rx = ArrayGeometry::from_counts(rc, rr, SYNTHETIC_RECEIVE_SPACING, SYNTHETIC_RECEIVE_SPACING)?;
    let tx = ArrayGeometry::from_counts(sc, sr, SYNTHETIC_SOURCE_SPACING, SYNTHETIC_SOURCE_SPACING)?;
    let rx_samples = propagating_sample_set(rx.aperture_x, rx.aperture_y)?;
    let tx_samples = propagating_sample_set(tx.aperture_x, tx.aperture_y)?;
    let map = variance_map(&rx_samples, &tx_samples, Normalization::UnitAverageGain);
    let lineage = SeedLineage::new(seed, 0);
    let h_a = draw_angular_response(&map, &mut lineage.stream(Purpose::AngularResponse));
    let xpr = XprParameters::log_normal(SYNTHETIC_XPR_MU_DB, SYNTHETIC_XPR_SIGMA_DB)?;
    let (nr, ns) = map.shape();
    let leak = draw_leakage(&xpr, nr, ns, &mut lineage.stream(Purpose::Leakage));
    let iso = isotropic_pattern(IsotropicPolarization::Theta);
    let (rx_patterns, tx_patterns) = (vec![iso.clone(); rx.len()], vec![iso; tx.len()]);
    let (rx_chi, tx_chi) = (vec![1.0; rx.len()], vec![1.0; tx.len()]);
    let receive = ArrayEnd {
        geometry: &rx,
        samples: &rx_samples,
        patterns: &rx_patterns,
        efficiencies: &rx_chi,
    };
    let source = ArrayEnd {
        geometry: &tx,
        samples: &tx_samples,
        patterns: &tx_patterns,
        efficiencies: &tx_chi,
    };
    Ok(synthesize_pol_link(&receive, &source, &leak, &h_a)?.with_lineage(lineage).matrix)
}

/// Capacity and leading eigenvalues of the measured channel resampled to
/// coarser receive grids, with and without efficiency compensation.
pub fn postprocess_pipeline(config: &ScenarioConfig) -> Result<Vec<OutputFile>, RunError> {
    let p = &config.params;
    let [rows, cols] = get(&p.grid, "grid")?;
    let spacing = get(&p.grid_spacing_wl, "grid_spacing_wl")?;
    let source_spacing = get(&p.source_spacing_wl, "source_spacing_wl")?;
    let power = get(&p.total_power_w, "total_power_w")?;
    let rho = db_to_linear(get(&p.snr_db, "snr_db")?);
    let top = get(&p.top_eigenvalues, "top_eigenvalues")?;
    let mut outputs = Vec::new();
    let h = match &p.measurement {
        Some(path) => load_channel(path)?,
        None => {
            let h = synthetic_measurement(config.seed)?;
            let mut bytes = Vec::new();
            write_channel_csv(&h, &mut bytes)?;
            outputs.push(OutputFile {
                name: "measurement.csv".into(),
                bytes,
            });
            h
        }
    };
    let grid = ReceiveGrid { rows, cols, spacing };
    if h.nrows() != rows * cols {
        return Err(RunError::Config(format!(
            "params.grid: {rows}x{cols} does not match {} channel rows",
            h.nrows()
        )));
    }
    let chi_s = transmission_efficiency_bound(source_spacing, source_spacing)?;
    let mut results = Vec::new();
    for (i, &target) in get(&p.target_spacings_wl, "target_spacings_wl")?.iter().enumerate() {
        let sub = resample_receive_array(&h, grid, target).map_err(|e| RunError::Config(format!("params.target_spacings_wl[{i}]: {e}")))?;
        let chi_r = transmission_efficiency_bound(target, target)?;
        let compensated = compensate_efficiency(&sub, chi_r, chi_s)?;
        for (model, m) in [("measured", &sub), ("compensated", &compensated)] {
            let rate = mimo_rate(m, power, rho, Allocation::WaterFilling);
            results.push(ResultRow::new(
                config.scenario.label(),
                target,
                model,
                Allocation::WaterFilling.label(),
                Estimate::from_samples(&[rate]),
            ));
            let eig: Vec<f64> = eigen_spectrum(m).into_iter().take(top).collect();
            outputs.push(eigen_file(&format!("eigen_nr{}_{model}.csv", sub.nrows()), &eig)?);
        }
    }
    outputs.insert(0, results_file(&results)?);
    Ok(outputs)
}
