#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use holomimo_experiments::arrays::{central_efficiency, default_edge_efficiency, pattern_file_bytes, structure_geometry};
use holomimo_experiments::output::{read_results, ResultRow};
use holomimo_experiments::scenarios::run_scenario;
use holomimo_experiments::ScenarioConfig;

pub const STRUCTURES: [[usize; 2]; 3] = [[8, 8], [8, 16], [8, 32]];

/// Writes `config` as JSON into `dir` and loads it back.
pub fn load_config(dir: &Path, name: &str, config: Value) -> ScenarioConfig {
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_vec_pretty(&config).unwrap()).unwrap();
    ScenarioConfig::load(&path).unwrap()
}

pub fn config(dir: &Path, scenario: &str, seed: u64, trials: usize, params: Value) -> ScenarioConfig {
    load_config(
        dir,
        scenario,
        json!({ "scenario": scenario, "seed": seed, "trials": trials, "output": format!("out/{scenario}"), "params": params }),
    )
}

/// Pattern files for the three 4λ × 4λ dipole arrays, as `make-patterns`
/// writes them by default.
pub fn write_pattern_files(dir: &Path) -> Value {
    let mut files = serde_json::Map::new();
    for s in STRUCTURES {
        let g = structure_geometry(s, 4.0, 4.0).unwrap();
        let central = central_efficiency(s).unwrap();
        let edge = default_edge_efficiency(&g, central).unwrap();
        let label = format!("{}x{}", s[0], s[1]);
        let path: PathBuf = dir.join(format!("patterns_{label}.csv"));
        std::fs::write(&path, pattern_file_bytes(&g, [0.0, 1.0, 0.0], central, edge, 1.0).unwrap()).unwrap();
        files.insert(label, Value::String(path.display().to_string()));
    }
    Value::Object(files)
}

pub fn results(config: &ScenarioConfig) -> Vec<ResultRow> {
    let outputs = run_scenario(config).unwrap();
    let file = outputs.iter().find(|f| f.name == "results.csv").expect("results.csv");
    read_results(&file.bytes).unwrap()
}

pub fn row<'a>(rows: &'a [ResultRow], spacing: f64, model: &str, allocation: &str) -> &'a ResultRow {
    rows.iter()
        .find(|r| r.spacing_wl == spacing && r.model == model && r.allocation == allocation)
        .unwrap_or_else(|| panic!("no row for {spacing} {model} {allocation}"))
}

pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    (max - min) / min
}
