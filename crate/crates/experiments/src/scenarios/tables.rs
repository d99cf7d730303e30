//! Efficiency bound tables.

use serde::Serialize;

use holomimo::efficiency::{
    calibrate_efficiencies, radiation_efficiency_bound, transmission_efficiency_bound, EfficiencyProfile, EfficiencySource,
};

use super::get;
use crate::arrays::{central_efficiency, structure_geometry};
use crate::config::{structure_label, ScenarioConfig};
use crate::error::RunError;
use crate::output::{csv_file, OutputFile};

#[derive(Serialize)]
struct TransmissionRow {
    structure: String,
    spacing_x_wl: f64,
    spacing_y_wl: f64,
    chi_s_percent: Option<f64>,
    chi_ub_percent: f64,
    chi_calibrated_percent: Option<f64>,
}

#[derive(Serialize)]
struct RadiationRow {
    side_wl: f64,
    side_m: f64,
    chi_r: f64,
}

fn percent(x: f64) -> f64 {
    (x * 1e4).round() / 100.0
}

pub fn efficiency_tables(config: &ScenarioConfig) -> Result<Vec<OutputFile>, RunError> {
    let p = &config.params;
    let (ax, ay) = (get(&p.aperture_x_wl, "aperture_x_wl")?, get(&p.aperture_y_wl, "aperture_y_wl")?);
    let mut transmission = Vec::new();
    for s in get(&p.structures, "structures")? {
        let g = structure_geometry(s, ax, ay)?;
        let bound = transmission_efficiency_bound(g.spacing_x, g.spacing_y)?;
        let simulated = if (ax, ay) == (4.0, 4.0) { central_efficiency(s) } else { None };
        let calibrated = simulated
            .map(|c| {
                EfficiencyProfile::new(vec![c], EfficiencySource::Simulated).map(|prof| calibrate_efficiencies(&prof, bound).per_element[0])
            })
            .transpose()?;
        transmission.push(TransmissionRow {
            structure: structure_label(s),
            spacing_x_wl: g.spacing_x,
            spacing_y_wl: g.spacing_y,
            chi_s_percent: simulated.map(percent),
            chi_ub_percent: percent(bound),
            chi_calibrated_percent: calibrated.map(percent),
        });
    }
    let wavelength = get(&p.wavelength_m, "wavelength_m")?;
    let skin = get(&p.skin_depth_m, "skin_depth_m")?;
    let k = 2.0 * std::f64::consts::PI / wavelength;
    let mut radiation = Vec::new();
    for side in get(&p.plate_sides_wl, "plate_sides_wl")? {
        let a = side * wavelength;
        radiation.push(RadiationRow {
            side_wl: side,
            side_m: a,
            chi_r: radiation_efficiency_bound(a * a, skin, k)?,
        });
    }
    Ok(vec![
        csv_file("efficiency_table.csv", &transmission)?,
        csv_file("radiation_table.csv", &radiation)?,
    ])
}
