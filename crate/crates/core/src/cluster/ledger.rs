//! Append-only record of every barrier payload.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerRecord {
    /// Mini-batch ordinal `m`.
    pub m: usize,
    /// Iteration `t` within the mini-batch.
    pub t: u32,
    /// Worker id `n`.
    pub n: u32,
    pub direction: Direction,
    /// Wire records in the payload.
    pub entries: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommLedger {
    num_topics: usize,
    vocab_size: usize,
    records: Vec<LedgerRecord>,
    total_bytes: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub total_bytes: u64,
    pub total_entries: u64,
    /// Bytes at the first iteration of each mini-batch (full synchronization).
    pub first_iteration_bytes: u64,
    /// Bytes at iterations `t >= 2` (power-set synchronization).
    pub later_iteration_bytes: u64,
    pub up_bytes: u64,
    pub down_bytes: u64,
    /// `(worker id, bytes)` ascending by worker.
    pub per_worker_bytes: Vec<(u32, u64)>,
    /// Mean over `t >= 2` upward payloads of `entries / (2 K W)`; zero when
    /// no such payload exists.
    pub partial_full_ratio: f64,
    pub iterations_first: u64,
    pub iterations_later: u64,
}

impl CommLedger {
    pub fn new(num_topics: usize, vocab_size: usize) -> Self {
        Self {
            num_topics,
            vocab_size,
            records: Vec::new(),
            total_bytes: 0,
        }
    }

    pub fn record(&mut self, rec: LedgerRecord) {
        self.total_bytes += rec.bytes;
        self.records.push(rec);
    }

    pub fn records(&self) -> &[LedgerRecord] {
        &self.records
    }

    pub fn total_bytes(&self) -> u64 {
        self.total_bytes
    }

    pub fn summary(&self) -> LedgerSummary {
        let mut s = LedgerSummary::default();
        let mut per_worker: BTreeMap<u32, u64> = BTreeMap::new();
        let mut iterations: BTreeMap<(usize, u32), ()> = BTreeMap::new();
        let full_cells = 2.0 * self.num_topics as f64 * self.vocab_size as f64;
        let (mut ratio_sum, mut ratio_n) = (0.0, 0u64);
        for r in &self.records {
            s.total_bytes += r.bytes;
            s.total_entries += r.entries;
            if r.t <= 1 {
                s.first_iteration_bytes += r.bytes;
            } else {
                s.later_iteration_bytes += r.bytes;
            }
            match r.direction {
                Direction::Up => {
                    s.up_bytes += r.bytes;
                    if r.t >= 2 && full_cells > 0.0 {
                        ratio_sum += r.entries as f64 / full_cells;
                        ratio_n += 1;
                    }
                }
                Direction::Down => s.down_bytes += r.bytes,
            }
            *per_worker.entry(r.n).or_default() += r.bytes;
            iterations.insert((r.m, r.t), ());
        }
        s.per_worker_bytes = per_worker.into_iter().collect();
        s.partial_full_ratio = if ratio_n > 0 { ratio_sum / ratio_n as f64 } else { 0.0 };
        s.iterations_first = iterations.keys().filter(|(_, t)| *t <= 1).count() as u64;
        s.iterations_later = iterations.keys().filter(|(_, t)| *t >= 2).count() as u64;
        s
    }

    /// CSV `m,t,n,direction,entries,bytes`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path, num_topics: usize, vocab_size: usize) -> Result<Self> {
        let mut ledger = Self::new(num_topics, vocab_size);
        let mut r = csv::Reader::from_path(path)?;
        for rec in r.deserialize() {
            ledger.record(rec?);
        }
        Ok(ledger)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(m: usize, t: u32, n: u32, direction: Direction, entries: u64) -> LedgerRecord {
        LedgerRecord {
            m,
            t,
            n,
            direction,
            entries,
            bytes: 16 + 12 * entries,
        }
    }

    #[test]
    fn empty_ledger_summary_is_zero() {
        assert_eq!(CommLedger::new(4, 6).summary(), LedgerSummary::default());
    }

    #[test]
    fn full_sync_of_four_by_six_with_two_workers() {
        let mut l = CommLedger::new(4, 6);
        for n in 1..=2 {
            l.record(rec(1, 1, n, Direction::Up, 48));
            l.record(rec(1, 1, n, Direction::Down, 48));
        }
        let s = l.summary();
        assert_eq!(s.per_worker_bytes, vec![(1, 1184), (2, 1184)]);
        assert_eq!(s.up_bytes, 2 * 592);
        assert_eq!(s.total_bytes, 4 * 592);
        assert_eq!(s.first_iteration_bytes, s.total_bytes);
        assert_eq!(s.partial_full_ratio, 0.0);
        assert_eq!(l.total_bytes(), s.total_bytes);
    }

    #[test]
    fn partial_ratio_averages_later_uploads() {
        let mut l = CommLedger::new(10, 10);
        l.record(rec(1, 1, 1, Direction::Up, 200));
        l.record(rec(1, 2, 1, Direction::Up, 2));
        l.record(rec(1, 3, 1, Direction::Up, 6));
        l.record(rec(1, 3, 1, Direction::Down, 6));
        let s = l.summary();
        assert!((s.partial_full_ratio - 0.02).abs() < 1e-12);
        assert_eq!((s.iterations_first, s.iterations_later), (1, 2));
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.csv");
        let mut l = CommLedger::new(3, 5);
        l.record(rec(1, 1, 1, Direction::Up, 30));
        l.record(rec(2, 4, 3, Direction::Down, 8));
        l.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("m,t,n,direction,entries,bytes\n1,1,1,up,30,376\n"));
        assert_eq!(CommLedger::read_csv(&path, 3, 5).unwrap(), l);
    }
}
