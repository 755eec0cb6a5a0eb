//! Barrier payload and its little-endian wire encoding.
//!
//! ```text
//! header  u32 iteration | u32 worker_id | u64 record_count
//! body    record_count x (u32 word | u32 topic | f32 value)
//! ```
//!
//! A payload carries one `phi_hat` record and one residual record per cell:
//! all `phi_hat` records first, then the residual records in the same cell
//! order. Indices are 1-based on the wire.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const HEADER_BYTES: usize = 16;
pub const RECORD_BYTES: usize = 12;

/// One synchronized cell `(w, k)` with both matrix values (0-based indices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncEntry<T> {
    pub word: u32,
    pub topic: u32,
    /// Upward: `local - base`. Downward: merged absolute value.
    pub phi: T,
    /// Upward: the worker's partial residual. Downward: merged residual.
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncPayload<T> {
    pub iteration: u32,
    pub worker_id: u32,
    pub entries: Vec<SyncEntry<T>>,
}

impl<T: Real> SyncPayload<T> {
    /// Wire records: two per cell.
    pub fn record_count(&self) -> usize {
        2 * self.entries.len()
    }

    pub fn byte_size(&self) -> usize {
        HEADER_BYTES + RECORD_BYTES * self.record_count()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.byte_size());
        out.extend_from_slice(&self.iteration.to_le_bytes());
        out.extend_from_slice(&self.worker_id.to_le_bytes());
        out.extend_from_slice(&(self.record_count() as u64).to_le_bytes());
        for pass in 0..2 {
            for e in &self.entries {
                let v = if pass == 0 { e.phi } else { e.residual };
                out.extend_from_slice(&(e.word + 1).to_le_bytes());
                out.extend_from_slice(&(e.topic + 1).to_le_bytes());
                out.extend_from_slice(&v.to_wire().to_le_bytes());
            }
        }
        out
    }

    /// Inverse of [`encode`](Self::encode); values come back at single precision.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |m: String| Error::Domain(format!("malformed sync payload: {m}"));
        if bytes.len() < HEADER_BYTES {
            return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
        let iteration = u32_at(0);
        let worker_id = u32_at(4);
        let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
        if !count.is_multiple_of(2) {
            return Err(bad(format!("odd record count {count}")));
        }
        if bytes.len() != HEADER_BYTES + RECORD_BYTES * count {
            return Err(bad(format!("{} records need {} bytes, got {}", count, HEADER_BYTES + RECORD_BYTES * count, bytes.len())));
        }
        let cells = count / 2;
        let record = |i: usize| -> Result<(u32, u32, T)> {
            let o = HEADER_BYTES + RECORD_BYTES * i;
            let (w, k) = (u32_at(o), u32_at(o + 4));
            if w == 0 || k == 0 {
                return Err(bad(format!("record {i} has a zero index")));
            }
            let v = f32::from_le_bytes(bytes[o + 8..o + 12].try_into().expect("4 bytes"));
            Ok((w - 1, k - 1, T::from_wire(v)))
        };
        let mut entries = Vec::with_capacity(cells);
        for i in 0..cells {
            let (word, topic, phi) = record(i)?;
            let (w2, k2, residual) = record(cells + i)?;
            if (w2, k2) != (word, topic) {
                return Err(bad(format!("residual record {i} does not match its phi_hat cell")));
            }
            entries.push(SyncEntry { word, topic, phi, residual });
        }
        Ok(Self {
            iteration,
            worker_id,
            entries,
        })
    }
}
