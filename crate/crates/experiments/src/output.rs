//! In-memory output files and the CSV tables written by the scenarios.

use serde::{Deserialize, Serialize};

use crate::error::RunError;
use holomimo::capacity::Estimate;

/// One emitted file, named relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: String,
    pub spacing_wl: f64,
    pub model: String,
    pub allocation: String,
    pub trials: usize,
    pub mean_bits: f64,
    pub ci95_bits: f64,
}

impl ResultRow {
    pub fn new(scenario: &str, spacing_wl: f64, model: impl Into<String>, allocation: impl Into<String>, estimate: Estimate) -> Self {
        Self {
            scenario: scenario.to_string(),
            spacing_wl,
            model: model.into(),
            allocation: allocation.into(),
            trials: estimate.trials,
            mean_bits: estimate.mean,
            ci95_bits: estimate.ci95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub rank_index: usize,
    pub eigenvalue: f64,
}

/// Serialises rows with a header line.
pub fn csv_file<R: Serialize>(name: &str, rows: &[R]) -> Result<OutputFile, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| RunError::Io(std::io::Error::other(e)))?;
    }
    let bytes = w.into_inner().map_err(|e| RunError::Io(std::io::Error::other(e.to_string())))?;
    Ok(OutputFile {
        name: name.to_string(),
        bytes,
    })
}

pub fn results_file(rows: &[ResultRow]) -> Result<OutputFile, RunError> {
    csv_file("results.csv", rows)
}

/// Eigenvalues with 1-based rank indices.
pub fn eigen_file(name: &str, eigenvalues: &[f64]) -> Result<OutputFile, RunError> {
    let rows: Vec<EigenRow> = eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &eigenvalue)| EigenRow {
            rank_index: i + 1,
            eigenvalue,
        })
        .collect();
    csv_file(name, &rows)
}

/// Parses a results table back.
pub fn read_results(bytes: &[u8]) -> Result<Vec<ResultRow>, RunError> {
    csv::Reader::from_reader(bytes)
        .deserialize()
        .collect::<Result<Vec<ResultRow>, _>>()
        .map_err(|e| RunError::Io(std::io::Error::other(e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_round_trip_with_header() {
        let rows = vec![ResultRow::new(
            "s",
            0.5,
            "holo",
            "waterfilling",
            Estimate {
                mean: 12.25,
                ci95: 0.1,
                trials: 3,
            },
        )];
        let f = results_file(&rows).unwrap();
        let text = String::from_utf8(f.bytes.clone()).unwrap();
        assert!(text.starts_with("scenario,spacing_wl,model,allocation,trials,mean_bits,ci95_bits\n"));
        assert_eq!(read_results(&f.bytes).unwrap(), rows);
        let e = String::from_utf8(eigen_file("e.csv", &[2.0, 1.0]).unwrap().bytes).unwrap();
        assert_eq!(e, "rank_index,eigenvalue\n1,2.0\n2,1.0\n");
    }
}
