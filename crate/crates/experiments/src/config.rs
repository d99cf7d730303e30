//! JSON scenario configuration.
//!
//! ```json
//! {
//!   "scenario": "fig8a_spacing_sweep",
//!   "seed": 7,
//!   "trials": 500,
//!   "output": "out/fig8a",
//!   "params": { "spacings_wl": [1.0, 0.5, 0.25, 0.125] }
//! }
//! ```
//!
//! Every key under `params` is optional; missing keys take the scenario
//! defaults listed in [`Params::with_defaults`]. Relative paths, including
//! `output`, are resolved against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    Fig8aSpacingSweep,
    Fig8bXprSweep,
    Fig11DipoleArrays,
    Fig13MuZfMrt,
    Fig14MuIwf,
    PostprocessPipeline,
    EfficiencyTables,
}

impl ScenarioId {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioId::Fig8aSpacingSweep => "fig8a_spacing_sweep",
            ScenarioId::Fig8bXprSweep => "fig8b_xpr_sweep",
            ScenarioId::Fig11DipoleArrays => "fig11_dipole_arrays",
            ScenarioId::Fig13MuZfMrt => "fig13_mu_zf_mrt",
            ScenarioId::Fig14MuIwf => "fig14_mu_iwf",
            ScenarioId::PostprocessPipeline => "postprocess_pipeline",
            ScenarioId::EfficiencyTables => "efficiency_tables",
        }
    }
}

/// Which element efficiencies enter a dipole-array channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyMode {
    /// Scalar holographic channel: no patterns, no efficiency.
    Holo,
    /// Transmission bound for every element.
    Bound,
    /// Per-element values from the pattern file.
    Simulated,
    /// Simulated values raised to the bound.
    Calibrated,
    /// Patterns kept, efficiency 1.
    Unit,
}

impl EfficiencyMode {
    pub fn label(self) -> &'static str {
        match self {
            EfficiencyMode::Holo => "holo",
            EfficiencyMode::Bound => "bound",
            EfficiencyMode::Simulated => "simulated",
            EfficiencyMode::Calibrated => "calibrated",
            EfficiencyMode::Unit => "unit",
        }
    }

    pub fn needs_pattern_file(self) -> bool {
        matches!(self, EfficiencyMode::Simulated | EfficiencyMode::Calibrated)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationKey {
    Waterfilling,
    Equal,
}

impl From<AllocationKey> for holomimo::capacity::Allocation {
    fn from(a: AllocationKey) -> Self {
        match a {
            AllocationKey::Waterfilling => holomimo::capacity::Allocation::WaterFilling,
            AllocationKey::Equal => holomimo::capacity::Allocation::Equal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precoder {
    Zf,
    Mrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKey {
    PerAntenna,
    PerUser,
}

/// Scenario parameters. Lengths are in wavelengths unless the key says
/// otherwise; structures are `[count_y, count_x]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Source (base-station) aperture.
    pub aperture_x_wl: Option<f64>,
    pub aperture_y_wl: Option<f64>,
    /// Receive (user) aperture.
    pub user_aperture_x_wl: Option<f64>,
    pub user_aperture_y_wl: Option<f64>,
    /// Square spacings swept at both ends.
    pub spacings_wl: Option<Vec<f64>>,
    /// Fixed spacing for single-geometry scenarios.
    pub spacing_x_wl: Option<f64>,
    pub spacing_y_wl: Option<f64>,
    pub structures: Option<Vec<[usize; 2]>>,
    pub user_counts: Option<[usize; 2]>,
    pub snr_db: Option<f64>,
    pub total_power_w: Option<f64>,
    pub allocations: Option<Vec<AllocationKey>>,
    pub kappas: Option<Vec<f64>>,
    pub xpr_mu_db: Option<f64>,
    pub xpr_sigma_db: Option<f64>,
    pub efficiency_modes: Option<Vec<EfficiencyMode>>,
    /// Pattern file per structure label, e.g. `"8x16": "patterns_8x16.csv"`.
    pub pattern_files: Option<BTreeMap<String, PathBuf>>,
    pub dipole_axis: Option<[f64; 3]>,
    pub users: Option<usize>,
    pub range_min_m: Option<f64>,
    pub range_max_m: Option<f64>,
    pub sector_half_width_deg: Option<f64>,
    pub pathloss_exponent: Option<f64>,
    pub reference_range_m: Option<f64>,
    pub reference_snr_db: Option<f64>,
    pub precoders: Option<Vec<Precoder>>,
    pub stream_mode: Option<StreamKey>,
    pub streams_per_user: Option<usize>,
    pub iwf_tolerance: Option<f64>,
    pub iwf_max_iters: Option<usize>,
    /// Measured channel file; synthesised from the seed when absent.
    pub measurement: Option<PathBuf>,
    pub grid: Option<[usize; 2]>,
    pub grid_spacing_wl: Option<f64>,
    pub target_spacings_wl: Option<Vec<f64>>,
    pub source_spacing_wl: Option<f64>,
    pub top_eigenvalues: Option<usize>,
    pub wavelength_m: Option<f64>,
    pub skin_depth_m: Option<f64>,
    pub plate_sides_wl: Option<Vec<f64>>,
}

pub const DEFAULT_TRIALS: usize = 500;

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub output: PathBuf,
    #[serde(default)]
    pub params: Params,
}

macro_rules! fill {
    ($p:ident, $($key:ident = $value:expr),* $(,)?) => {
        $( if $p.$key.is_none() { $p.$key = Some($value); } )*
    };
}

impl Params {
    /// Fills every unset key used by `scenario` with its default.
    pub fn with_defaults(mut self, scenario: ScenarioId) -> Self {
        let p = &mut self;
        let table_structures = vec![[8, 8], [8, 16], [8, 32]];
        match scenario {
            ScenarioId::Fig8aSpacingSweep => {
                fill!(
                    p,
                    aperture_x_wl = 4.0,
                    aperture_y_wl = 4.0,
                    spacings_wl = vec![1.0, 0.5, 0.25, 0.125]
                );
                fill!(
                    p,
                    snr_db = 0.0,
                    total_power_w = 10.0,
                    allocations = vec![AllocationKey::Waterfilling]
                );
            }
            ScenarioId::Fig8bXprSweep => {
                fill!(p, aperture_x_wl = 4.0, aperture_y_wl = 4.0, spacing_x_wl = 0.5, spacing_y_wl = 0.5);
                fill!(
                    p,
                    kappas = vec![0.1, 1.0, 10.0, 100.0, 1e4, 1e6],
                    snr_db = 0.0,
                    total_power_w = 10.0
                );
                fill!(p, allocations = vec![AllocationKey::Waterfilling]);
            }
            ScenarioId::Fig11DipoleArrays => {
                fill!(p, aperture_x_wl = 4.0, aperture_y_wl = 4.0, structures = table_structures);
                fill!(
                    p,
                    efficiency_modes = vec![
                        EfficiencyMode::Unit,
                        EfficiencyMode::Bound,
                        EfficiencyMode::Simulated,
                        EfficiencyMode::Calibrated
                    ]
                );
                fill!(
                    p,
                    xpr_mu_db = 8.0,
                    xpr_sigma_db = 3.0,
                    dipole_axis = [0.0, 1.0, 0.0],
                    snr_db = 0.0,
                    total_power_w = 10.0
                );
                fill!(p, allocations = vec![AllocationKey::Waterfilling], pattern_files = BTreeMap::new());
            }
            ScenarioId::Fig13MuZfMrt => {
                fill!(
                    p,
                    aperture_x_wl = 8.0,
                    aperture_y_wl = 8.0,
                    user_aperture_x_wl = 4.0,
                    user_aperture_y_wl = 4.0
                );
                fill!(
                    p,
                    spacings_wl = vec![1.0, 0.5, 0.25, 0.125],
                    users = 3,
                    snr_db = 0.0,
                    total_power_w = 10.0
                );
                fill!(
                    p,
                    precoders = vec![Precoder::Zf, Precoder::Mrt],
                    stream_mode = StreamKey::PerUser,
                    streams_per_user = 1
                );
            }
            ScenarioId::Fig14MuIwf => {
                fill!(p, aperture_x_wl = 4.0, aperture_y_wl = 4.0, structures = table_structures);
                fill!(
                    p,
                    user_aperture_x_wl = std::f64::consts::FRAC_1_SQRT_2,
                    user_aperture_y_wl = std::f64::consts::SQRT_2,
                    user_counts = [2, 2]
                );
                fill!(
                    p,
                    efficiency_modes = vec![EfficiencyMode::Unit, EfficiencyMode::Simulated, EfficiencyMode::Calibrated]
                );
                fill!(p, xpr_mu_db = 8.0, xpr_sigma_db = 3.0, dipole_axis = [0.0, 1.0, 0.0], users = 10);
                fill!(
                    p,
                    range_min_m = 25.0,
                    range_max_m = 100.0,
                    sector_half_width_deg = 60.0,
                    pathloss_exponent = 2.0
                );
                fill!(p, reference_range_m = 50.0, reference_snr_db = 0.0, total_power_w = 10.0);
                fill!(p, iwf_tolerance = 1e-6, iwf_max_iters = 200, pattern_files = BTreeMap::new());
            }
            ScenarioId::PostprocessPipeline => {
                fill!(
                    p,
                    grid = [16, 16],
                    grid_spacing_wl = 0.125,
                    target_spacings_wl = vec![0.125, 0.25, 0.5]
                );
                fill!(p, source_spacing_wl = 0.5, snr_db = 0.0, total_power_w = 10.0, top_eigenvalues = 16);
            }
            ScenarioId::EfficiencyTables => {
                fill!(p, aperture_x_wl = 4.0, aperture_y_wl = 4.0, structures = table_structures);
                fill!(p, wavelength_m = 0.15, skin_depth_m = 1.9e-6, plate_sides_wl = vec![0.01, 0.1]);
            }
        }
        self
    }
}

fn bad(key: &str, message: impl std::fmt::Display) -> RunError {
    RunError::Config(format!("{key}: {message}"))
}

fn positive(key: &str, v: Option<f64>) -> Result<(), RunError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(bad(key, format!("must be positive, got {x}"))),
        _ => Ok(()),
    }
}

fn finite(key: &str, v: Option<f64>) -> Result<(), RunError> {
    match v {
        Some(x) if !x.is_finite() => Err(bad(key, "must be finite")),
        _ => Ok(()),
    }
}

fn nonempty<T>(key: &str, v: &Option<Vec<T>>) -> Result<(), RunError> {
    match v {
        Some(list) if list.is_empty() => Err(bad(key, "must not be empty")),
        _ => Ok(()),
    }
}

impl ScenarioConfig {
    /// Reads a config, resolves relative paths against its directory and
    /// fills defaults.
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let mut config: ScenarioConfig = serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config.resolved())
    }

    pub fn resolved(mut self) -> Self {
        self.params = self.params.with_defaults(self.scenario);
        self
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.output);
        if let Some(files) = self.params.pattern_files.as_mut() {
            files.values_mut().for_each(join);
        }
        if let Some(m) = self.params.measurement.as_mut() {
            join(m);
        }
    }

    /// sha256 over the canonical JSON of the config without `seed` and `output`.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serialises");
        if let Some(map) = value.as_object_mut() {
            map.remove("seed");
            map.remove("output");
        }
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }

    /// Rejects physically invalid inputs, naming the offending key.
    pub fn validate(&self) -> Result<(), RunError> {
        let p = &self.params;
        if self.trials < 1 {
            return Err(bad("trials", "must be at least 1"));
        }
        for (key, v) in [
            ("params.aperture_x_wl", p.aperture_x_wl),
            ("params.aperture_y_wl", p.aperture_y_wl),
            ("params.user_aperture_x_wl", p.user_aperture_x_wl),
            ("params.user_aperture_y_wl", p.user_aperture_y_wl),
            ("params.spacing_x_wl", p.spacing_x_wl),
            ("params.spacing_y_wl", p.spacing_y_wl),
            ("params.total_power_w", p.total_power_w),
            ("params.range_min_m", p.range_min_m),
            ("params.range_max_m", p.range_max_m),
            ("params.reference_range_m", p.reference_range_m),
            ("params.grid_spacing_wl", p.grid_spacing_wl),
            ("params.source_spacing_wl", p.source_spacing_wl),
            ("params.iwf_tolerance", p.iwf_tolerance),
            ("params.wavelength_m", p.wavelength_m),
            ("params.skin_depth_m", p.skin_depth_m),
        ] {
            positive(key, v)?;
        }
        for (key, v) in [
            ("params.snr_db", p.snr_db),
            ("params.xpr_mu_db", p.xpr_mu_db),
            ("params.pathloss_exponent", p.pathloss_exponent),
            ("params.reference_snr_db", p.reference_snr_db),
            ("params.sector_half_width_deg", p.sector_half_width_deg),
        ] {
            finite(key, v)?;
        }
        if let Some(s) = p.xpr_sigma_db {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(bad("params.xpr_sigma_db", format!("must be nonnegative, got {s}")));
            }
        }
        for (key, list) in [
            ("params.spacings_wl", &p.spacings_wl),
            ("params.kappas", &p.kappas),
            ("params.target_spacings_wl", &p.target_spacings_wl),
            ("params.plate_sides_wl", &p.plate_sides_wl),
        ] {
            nonempty(key, list)?;
            for (i, &v) in list.iter().flatten().enumerate() {
                positive(&format!("{key}[{i}]"), Some(v))?;
            }
        }
        nonempty("params.allocations", &p.allocations)?;
        nonempty("params.efficiency_modes", &p.efficiency_modes)?;
        nonempty("params.precoders", &p.precoders)?;
        nonempty("params.structures", &p.structures)?;
        if let Some(spacings) = &p.spacings_wl {
            for (i, &d) in spacings.iter().enumerate() {
                for (axis, ap) in [
                    ("aperture_x_wl", p.aperture_x_wl),
                    ("aperture_y_wl", p.aperture_y_wl),
                    ("user_aperture_x_wl", p.user_aperture_x_wl),
                    ("user_aperture_y_wl", p.user_aperture_y_wl),
                ] {
                    if let Some(a) = ap {
                        if d > a {
                            return Err(bad(
                                &format!("params.spacings_wl[{i}]"),
                                format!("spacing {d} exceeds {axis} = {a}"),
                            ));
                        }
                    }
                }
            }
        }
        for (key, d, ap) in [
            ("params.spacing_x_wl", p.spacing_x_wl, p.aperture_x_wl),
            ("params.spacing_y_wl", p.spacing_y_wl, p.aperture_y_wl),
        ] {
            if let (Some(d), Some(a)) = (d, ap) {
                if d > a {
                    return Err(bad(key, format!("spacing {d} exceeds the aperture {a}")));
                }
            }
        }
        if let Some(structures) = &p.structures {
            for (i, s) in structures.iter().enumerate() {
                if s[0] == 0 || s[1] == 0 {
                    return Err(bad(&format!("params.structures[{i}]"), "element counts must be at least 1"));
                }
            }
        }
        if let Some(c) = p.user_counts {
            if c[0] == 0 || c[1] == 0 {
                return Err(bad("params.user_counts", "element counts must be at least 1"));
            }
        }
        if let Some(a) = p.dipole_axis {
            if a.iter().map(|x| x * x).sum::<f64>() == 0.0 || a.iter().any(|x| !x.is_finite()) {
                return Err(bad("params.dipole_axis", "must be a nonzero finite vector"));
            }
        }
        if p.users == Some(0) {
            return Err(bad("params.users", "must be at least 1"));
        }
        if p.streams_per_user == Some(0) {
            return Err(bad("params.streams_per_user", "must be at least 1"));
        }
        if p.iwf_max_iters == Some(0) {
            return Err(bad("params.iwf_max_iters", "must be at least 1"));
        }
        if let (Some(a), Some(b)) = (p.range_min_m, p.range_max_m) {
            if a > b {
                return Err(bad("params.range_min_m", format!("{a} exceeds range_max_m = {b}")));
            }
        }
        if let Some(g) = p.grid {
            if g[0] == 0 || g[1] == 0 {
                return Err(bad("params.grid", "grid dimensions must be at least 1"));
            }
        }
        if let Some(m) = &p.measurement {
            if !m.is_file() {
                return Err(bad("params.measurement", format!("file {} does not exist", m.display())));
            }
        }
        self.validate_pattern_files()
    }

    fn validate_pattern_files(&self) -> Result<(), RunError> {
        let p = &self.params;
        let files = p.pattern_files.clone().unwrap_or_default();
        for (label, path) in &files {
            if !path.is_file() {
                return Err(bad(
                    &format!("params.pattern_files.{label}"),
                    format!("file {} does not exist", path.display()),
                ));
            }
        }
        let needs = p.efficiency_modes.iter().flatten().any(|m| m.needs_pattern_file());
        if needs {
            for s in p.structures.iter().flatten() {
                let label = structure_label(*s);
                if !files.contains_key(&label) {
                    return Err(bad(
                        &format!("params.pattern_files.{label}"),
                        "missing; simulated and calibrated efficiency modes need a pattern file per structure",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// `"8x16"` for `[8, 16]`.
pub fn structure_label(s: [usize; 2]) -> String {
    format!("{}x{}", s[0], s[1])
}
