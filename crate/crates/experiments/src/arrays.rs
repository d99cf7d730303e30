//! Dipole arrays on a fixed aperture and the pattern files describing them.

use std::path::Path;

use nalgebra::Vector3;

use holomimo::array::{propagating_sample_set, ArrayGeometry};
use holomimo::efficiency::{calibrate_efficiencies, transmission_efficiency_bound};
use holomimo::io::{load_patterns, write_pattern_csv};
use holomimo::pattern::{dipole_pattern, SampledPattern};
use holomimo::{Complex64, Efficiencies, Geometry, Pattern, SampleSet};

use crate::config::{structure_label, EfficiencyMode};
use crate::error::RunError;

/// Simulated efficiency of the central element for the arrays of a
/// 4λ × 4λ aperture, in `[count_y, count_x]` form.
pub const CENTRAL_EFFICIENCY: [([usize; 2], f64); 3] = [([8, 8], 0.7407), ([8, 16], 0.2925), ([8, 32], 0.1090)];

pub fn central_efficiency(structure: [usize; 2]) -> Option<f64> {
    CENTRAL_EFFICIENCY.iter().find(|(s, _)| *s == structure).map(|(_, v)| *v)
}

/// Geometry of `[count_y, count_x]` elements filling the aperture.
pub fn structure_geometry(structure: [usize; 2], aperture_x: f64, aperture_y: f64) -> Result<Geometry, RunError> {
    let [cy, cx] = structure;
    ArrayGeometry::new(aperture_x, aperture_y, aperture_x / cx as f64, aperture_y / cy as f64)
        .map_err(|e| RunError::Config(format!("params.structures: {e}")))
}

/// Efficiency assumed for outer-ring elements: neighbours on one side only,
/// so twice the transmission bound of the cell, never below `central`.
pub fn default_edge_efficiency(geometry: &Geometry, central: f64) -> Result<f64, RunError> {
    let bound = transmission_efficiency_bound(geometry.spacing_x, geometry.spacing_y)?;
    Ok((2.0 * bound).min(1.0).max(central))
}

/// Elements on the outer ring of the grid.
pub fn is_edge(geometry: &Geometry, element: usize) -> bool {
    let (ix, iy) = (element % geometry.count_x, element / geometry.count_x);
    ix == 0 || iy == 0 || ix + 1 == geometry.count_x || iy + 1 == geometry.count_y
}

/// Dipole array with its patterns and, when loaded from a file, simulated
/// element efficiencies.
#[derive(Debug, Clone)]
pub struct DipoleArray {
    pub label: String,
    pub geometry: Geometry,
    pub samples: SampleSet,
    pub patterns: Vec<Pattern>,
    pub simulated: Option<Efficiencies>,
    /// Transmission bound at the array spacing.
    pub bound: f64,
}

impl DipoleArray {
    pub fn build(
        structure: [usize; 2],
        aperture_x: f64,
        aperture_y: f64,
        axis: [f64; 3],
        pattern_file: Option<&Path>,
    ) -> Result<Self, RunError> {
        let geometry = structure_geometry(structure, aperture_x, aperture_y)?;
        let samples = propagating_sample_set(aperture_x, aperture_y)?;
        let label = structure_label(structure);
        let (patterns, simulated) = match pattern_file {
            Some(path) => {
                let set = load_patterns(path)?;
                if set.patterns.len() != geometry.len() {
                    return Err(RunError::Config(format!(
                        "params.pattern_files.{label}: {} describes {} elements, the array has {}",
                        path.display(),
                        set.patterns.len(),
                        geometry.len()
                    )));
                }
                (set.patterns, Some(set.efficiency))
            }
            None => {
                let d = dipole_pattern(Vector3::from(axis))?;
                (vec![d; geometry.len()], None)
            }
        };
        let bound = transmission_efficiency_bound(geometry.spacing_x, geometry.spacing_y)?;
        Ok(Self {
            label,
            geometry,
            samples,
            patterns,
            simulated,
            bound,
        })
    }

    /// Per-element efficiency for a mode; `Holo` has none.
    pub fn efficiencies(&self, mode: EfficiencyMode) -> Result<Vec<f64>, RunError> {
        let n = self.geometry.len();
        let simulated = || {
            self.simulated.as_ref().ok_or_else(|| {
                RunError::Config(format!(
                    "params.pattern_files.{}: needed for {} efficiency",
                    self.label,
                    mode.label()
                ))
            })
        };
        Ok(match mode {
            EfficiencyMode::Holo | EfficiencyMode::Unit => vec![1.0; n],
            EfficiencyMode::Bound => vec![self.bound; n],
            EfficiencyMode::Simulated => simulated()?.per_element.clone(),
            EfficiencyMode::Calibrated => calibrate_efficiencies(simulated()?, self.bound).per_element,
        })
    }
}

/// Analytic dipole tabulated every `step_deg` over the upper hemisphere.
pub fn tabulate_dipole(axis: [f64; 3], step_deg: f64) -> Result<SampledPattern<f64>, RunError> {
    let d = dipole_pattern(Vector3::from(axis))?;
    let thetas = axis_grid(0.0, 90.0, step_deg);
    let phis = axis_grid(-180.0, 180.0, step_deg);
    let (mut dt, mut dp) = (Vec::new(), Vec::new());
    for &t in &thetas {
        for &p in &phis {
            let (a, b): (Complex64, Complex64) = d.evaluate(t.to_radians(), p.to_radians())?;
            dt.push(a);
            dp.push(b);
        }
    }
    Ok(SampledPattern::new(thetas, phis, dt, dp)?)
}

fn axis_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| if i == n { hi } else { lo + i as f64 * step }).collect()
}

/// Pattern file for one structure: a shared tabulated dipole, `central`
/// efficiency inside and `edge` on the outer ring.
pub fn pattern_file_bytes(geometry: &Geometry, axis: [f64; 3], central: f64, edge: f64, step_deg: f64) -> Result<Vec<u8>, RunError> {
    for (key, v) in [("central efficiency", central), ("edge efficiency", edge)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(RunError::Config(format!("{key} {v} outside [0, 1]")));
        }
    }
    if !(step_deg > 0.0 && step_deg <= 90.0) {
        return Err(RunError::Config(format!("step {step_deg} must lie in (0, 90]")));
    }
    let sampled = tabulate_dipole(axis, step_deg)?;
    let chi: Vec<f64> = (0..geometry.len())
        .map(|e| if is_edge(geometry, e) { edge } else { central })
        .collect();
    let mut out = Vec::new();
    write_pattern_csv(&[(None, &sampled)], &chi, &mut out)?;
    Ok(out)
}
