//! Scenario pipelines. Each returns its output files in memory; writing and
//! checksumming happen in [`crate::runner`].

mod measurement;
mod multi_user;
mod single_link;
mod tables;

pub use measurement::{postprocess_pipeline, synthetic_measurement, SYNTHETIC_RECEIVE_GRID, SYNTHETIC_SOURCE_COUNTS};
pub use multi_user::{fig13_mu_zf_mrt, fig14_mu_iwf};
pub use single_link::{fig11_dipole_arrays, fig8a_spacing_sweep, fig8b_xpr_sweep};
pub use tables::efficiency_tables;

use holomimo::array::ArrayGeometry;
use holomimo::capacity::Estimate;
use holomimo::Geometry;

use crate::config::{ScenarioConfig, ScenarioId};
use crate::error::RunError;
use crate::output::OutputFile;

pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<OutputFile>, RunError> {
    config.validate()?;
    match config.scenario {
        ScenarioId::Fig8aSpacingSweep => fig8a_spacing_sweep(config),
        ScenarioId::Fig8bXprSweep => fig8b_xpr_sweep(config),
        ScenarioId::Fig11DipoleArrays => fig11_dipole_arrays(config),
        ScenarioId::Fig13MuZfMrt => fig13_mu_zf_mrt(config),
        ScenarioId::Fig14MuIwf => fig14_mu_iwf(config),
        ScenarioId::PostprocessPipeline => postprocess_pipeline(config),
        ScenarioId::EfficiencyTables => efficiency_tables(config),
    }
}

/// Reads a defaulted key.
pub(crate) fn get<T: Clone>(value: &Option<T>, key: &str) -> Result<T, RunError> {
    value.clone().ok_or_else(|| RunError::Config(format!("params.{key}: missing")))
}

pub(crate) fn geometry(aperture_x: f64, aperture_y: f64, spacing_x: f64, spacing_y: f64, key: &str) -> Result<Geometry, RunError> {
    ArrayGeometry::new(aperture_x, aperture_y, spacing_x, spacing_y).map_err(|e| RunError::Config(format!("{key}: {e}")))
}

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Column-wise estimates of per-trial result vectors.
pub(crate) fn column_estimates(per_trial: &[Vec<f64>]) -> Vec<Estimate> {
    let cols = per_trial.first().map_or(0, Vec::len);
    (0..cols)
        .map(|c| Estimate::from_samples(&per_trial.iter().map(|row| row[c]).collect::<Vec<_>>()))
        .collect()
}
