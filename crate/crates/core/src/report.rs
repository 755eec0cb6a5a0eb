//! CSV artifacts for residual traces and residual checkpoints.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::IterationMetrics;
use crate::error::{Error, Result};

/// One row of `residual_trace.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub m: usize,
    pub t: u32,
    pub mean_residual: f64,
    pub entries_swept: u64,
    pub synced_cells: u64,
    pub up_bytes: u64,
    pub down_bytes: u64,
    pub compute_secs: f64,
    pub sync_secs: f64,
    pub perplexity: Option<f64>,
}

impl From<&IterationMetrics> for TraceRow {
    fn from(i: &IterationMetrics) -> Self {
        Self {
            m: i.m,
            t: i.t,
            mean_residual: i.mean_residual,
            entries_swept: i.entries_swept,
            synced_cells: i.synced_cells,
            up_bytes: i.up_bytes,
            down_bytes: i.down_bytes,
            compute_secs: i.compute_secs,
            sync_secs: i.sync_secs,
            perplexity: i.perplexity,
        }
    }
}

pub fn write_residual_trace(path: &Path, iterations: &[IterationMetrics]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for i in iterations {
        w.serialize(TraceRow::from(i))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_residual_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, csv::Error>>()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct CheckpointRow {
    word_id: usize,
    residual: f64,
}

/// Per-word residual totals as `word_id,residual` with 1-based word ids.
pub fn write_word_residuals(path: &Path, residuals: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (i, &residual) in residuals.iter().enumerate() {
        w.serialize(CheckpointRow { word_id: i + 1, residual })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Inverse of [`write_word_residuals`]; word ids must be `1..=W` in order.
pub fn read_word_residuals(path: &Path) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (i, row) in r.deserialize::<CheckpointRow>().enumerate() {
        let row = row?;
        if row.word_id != i + 1 {
            return Err(Error::parse(path, i + 2, format!("expected word_id {}, found {}", i + 1, row.word_id)));
        }
        if !(row.residual >= 0.0 && row.residual.is_finite()) {
            return Err(Error::parse(path, i + 2, format!("residual must be finite and non-negative, got {}", row.residual)));
        }
        out.push(row.residual);
    }
    if out.is_empty() {
        return Err(Error::parse(path, 1, "checkpoint has no rows"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(t: u32, perplexity: Option<f64>) -> IterationMetrics {
        IterationMetrics {
            m: 1,
            t,
            mean_residual: 0.5 / f64::from(t),
            entries_swept: 10,
            synced_cells: 4,
            up_bytes: 112,
            down_bytes: 112,
            compute_secs: 0.25,
            sync_secs: 0.125,
            perplexity,
        }
    }

    #[test]
    fn trace_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        let its = vec![metrics(1, Some(300.5)), metrics(2, None)];
        write_residual_trace(&path, &its).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("m,t,mean_residual,"));
        let rows = read_residual_trace(&path).unwrap();
        assert_eq!(rows, its.iter().map(TraceRow::from).collect::<Vec<_>>());
    }

    #[test]
    fn checkpoint_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.csv");
        write_word_residuals(&path, &[0.0, 2.5, 1.0]).unwrap();
        assert_eq!(read_word_residuals(&path).unwrap(), vec![0.0, 2.5, 1.0]);
        std::fs::write(&path, "word_id,residual\n2,1.0\n").unwrap();
        assert!(read_word_residuals(&path).is_err());
        std::fs::write(&path, "word_id,residual\n").unwrap();
        assert!(read_word_residuals(&path).is_err());
    }
}
