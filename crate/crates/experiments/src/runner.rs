//! Writes scenario outputs with a manifest, and replays manifests.
//!
//! `manifest.json` records the resolved config, its hash (without `seed`
//! and `output`), the seed, the crate version, the sha256 of every input
//! file and of every output file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::RunError;
use crate::output::OutputFile;
use crate::scenarios::run_scenario;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub config: ScenarioConfig,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn input_files(config: &ScenarioConfig) -> Vec<PathBuf> {
    let p = &config.params;
    let mut files: Vec<PathBuf> = p.pattern_files.iter().flatten().map(|(_, f)| f.clone()).collect();
    files.extend(p.measurement.clone());
    files
}

/// Runs `f` on a rayon pool with `threads` workers, or the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, RunError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(RunError::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| RunError::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Runs the scenario, writes every output and the manifest into
/// `config.output`, and returns the manifest.
pub fn run(config: &ScenarioConfig, threads: Option<usize>) -> Result<Manifest, RunError> {
    let outputs = with_threads(threads, || run_scenario(config))??;
    write_outputs(config, &outputs)
}

fn write_outputs(config: &ScenarioConfig, outputs: &[OutputFile]) -> Result<Manifest, RunError> {
    fs::create_dir_all(&config.output)?;
    let mut digests = Vec::with_capacity(outputs.len());
    for f in outputs {
        fs::write(config.output.join(&f.name), &f.bytes)?;
        digests.push(FileDigest {
            file: f.name.clone(),
            sha256: sha256_hex(&f.bytes),
        });
    }
    let mut inputs = Vec::new();
    for path in input_files(config) {
        let bytes = fs::read(&path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        inputs.push(FileDigest {
            file: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
    }
    let manifest = Manifest {
        scenario: config.scenario.label().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config.hash(),
        seed: config.seed,
        config: config.clone(),
        inputs,
        outputs: digests,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| RunError::Io(std::io::Error::other(e)))?;
    text.push('\n');
    fs::write(config.output.join(MANIFEST_NAME), text)?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<Manifest, RunError> {
    let text = fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))
}

/// Re-runs a manifest's config (into `output` when given) and checks that
/// every input and output file matches its recorded checksum.
pub fn replay(manifest_path: &Path, output: Option<&Path>, threads: Option<usize>) -> Result<Manifest, RunError> {
    let recorded = load_manifest(manifest_path)?;
    let mut config = recorded.config.clone();
    if config.hash() != recorded.config_hash {
        return Err(RunError::Mismatch("config does not match the recorded config_hash".into()));
    }
    if let Some(out) = output {
        config.output = out.to_path_buf();
    }
    let fresh = run(&config, threads)?;
    if fresh.inputs != recorded.inputs {
        return Err(RunError::Mismatch("input files changed since the manifest was written".into()));
    }
    for want in &recorded.outputs {
        match fresh.outputs.iter().find(|d| d.file == want.file) {
            Some(got) if got.sha256 == want.sha256 => {}
            Some(_) => return Err(RunError::Mismatch(format!("{} differs", want.file))),
            None => return Err(RunError::Mismatch(format!("{} was not produced", want.file))),
        }
    }
    if fresh.outputs.len() != recorded.outputs.len() {
        return Err(RunError::Mismatch("replay produced extra files".into()));
    }
    Ok(fresh)
}
