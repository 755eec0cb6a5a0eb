//! Barrier synchronization of the `phi_hat` and residual matrices.

use super::ledger::{CommLedger, Direction, LedgerRecord};
use super::wire::{SyncEntry, SyncPayload};
use crate::error::{Error, Result};
use crate::inference::GlobalStats;
use crate::scalar::Real;
use crate::scheduler::PowerSet;

const PROTOCOL_TOL: f64 = 1e-9;

/// Cells exchanged at a barrier.
#[derive(Debug, Clone, Copy)]
pub enum SyncScope<'a> {
    Full,
    Power(&'a PowerSet),
}

impl SyncScope<'_> {
    pub fn num_cells(&self, num_topics: usize, vocab_size: usize) -> usize {
        match self {
            SyncScope::Full => num_topics * vocab_size,
            SyncScope::Power(p) => p.num_cells(),
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self, SyncScope::Full)
    }

    /// Visit every cell in `(w, k)` order.
    pub fn for_each_cell(&self, num_topics: usize, vocab_size: usize, mut f: impl FnMut(usize, usize)) {
        match self {
            SyncScope::Full => {
                for w in 0..vocab_size {
                    for k in 0..num_topics {
                        f(w, k);
                    }
                }
            }
            SyncScope::Power(p) => p.cells().for_each(|(w, k)| f(w, k)),
        }
    }

    /// Membership mask over the word-major cell layout.
    fn mask(&self, num_topics: usize, vocab_size: usize) -> Vec<bool> {
        let mut m = vec![self.is_full(); num_topics * vocab_size];
        if let SyncScope::Power(p) = self {
            for (w, k) in p.cells() {
                m[w * num_topics + k] = true;
            }
        }
        m
    }
}

/// Build a worker's upward payload: `phi_hat` deltas against the barrier
/// base and the worker's residual for every cell in scope. Fails if the
/// replica moved outside the scope.
pub fn upload<T: Real>(
    base: &GlobalStats<T>,
    replica: &GlobalStats<T>,
    scope: SyncScope<'_>,
    iteration: u32,
    worker_id: u32,
) -> Result<SyncPayload<T>> {
    let (k_count, w_count) = (base.num_topics(), base.vocab_size());
    if (replica.num_topics(), replica.vocab_size()) != (k_count, w_count) {
        return Err(Error::Protocol {
            iteration,
            worker: worker_id,
            message: "replica dimensions differ from the base".into(),
        });
    }
    if !scope.is_full() {
        let mask = scope.mask(k_count, w_count);
        for (i, &inside) in mask.iter().enumerate() {
            if inside {
                continue;
            }
            let dphi = (replica.phi[i] - base.phi[i]).abs().as_f64();
            let dres = (replica.residual[i] - base.residual[i]).abs().as_f64();
            if dphi > PROTOCOL_TOL || dres > PROTOCOL_TOL {
                return Err(Error::Protocol {
                    iteration,
                    worker: worker_id,
                    message: format!(
                        "replica changed cell (w={}, k={}) outside the synchronization scope",
                        i / k_count + 1,
                        i % k_count + 1
                    ),
                });
            }
        }
    }
    let mut entries = Vec::with_capacity(scope.num_cells(k_count, w_count));
    scope.for_each_cell(k_count, w_count, |w, k| {
        let i = w * k_count + k;
        entries.push(SyncEntry {
            word: w as u32,
            topic: k as u32,
            phi: replica.phi[i] - base.phi[i],
            residual: replica.residual[i],
        });
    });
    Ok(SyncPayload {
        iteration,
        worker_id,
        entries,
    })
}

/// Topic totals after overwriting scope cells, derived from the base the
/// same way on every participant so all replicas agree bit for bit.
fn merged_totals<T: Real>(base: &GlobalStats<T>, merged: &mut GlobalStats<T>, full: bool, cells: &[SyncEntry<T>]) {
    if full {
        merged.recompute_totals();
        return;
    }
    let k_count = base.num_topics();
    merged.topic_totals.copy_from_slice(&base.topic_totals);
    for c in cells {
        let i = c.word as usize * k_count + c.topic as usize;
        let k = c.topic as usize;
        merged.topic_totals[k] = (merged.topic_totals[k] + (merged.phi[i] - base.phi[i])).max(T::zero());
    }
}

/// Merge upward payloads in ascending worker order:
/// `phi(w,k) = base(w,k) + sum_n delta_n(w,k)` and `r(w,k) = sum_n r_n(w,k)`
/// inside the scope; everything else is copied from `base`.
pub fn merge_payloads<T: Real>(
    base: &GlobalStats<T>,
    payloads: &[SyncPayload<T>],
    scope: SyncScope<'_>,
) -> Result<GlobalStats<T>> {
    let k_count = base.num_topics();
    let cells = scope.num_cells(k_count, base.vocab_size());
    let mut merged = base.clone();
    let mut order: Vec<&SyncPayload<T>> = payloads.iter().collect();
    order.sort_by_key(|p| p.worker_id);
    if let Some(p) = order.iter().find(|p| p.entries.len() != cells) {
        return Err(Error::Protocol {
            iteration: p.iteration,
            worker: p.worker_id,
            message: format!("payload has {} cells, scope has {cells}", p.entries.len()),
        });
    }
    let Some(first) = order.first() else {
        return Ok(merged);
    };
    for (c, head) in first.entries.iter().enumerate() {
        let i = head.word as usize * k_count + head.topic as usize;
        let mut phi = base.phi[i];
        let mut residual = T::zero();
        for p in &order {
            let e = &p.entries[c];
            if (e.word, e.topic) != (head.word, head.topic) {
                return Err(Error::Protocol {
                    iteration: p.iteration,
                    worker: p.worker_id,
                    message: format!("cell {c} differs from worker {}'s cell order", first.worker_id),
                });
            }
            phi = phi + e.phi;
            residual = residual + e.residual;
        }
        merged.phi[i] = phi.max(T::zero());
        merged.residual[i] = residual;
    }
    merged_totals(base, &mut merged, scope.is_full(), &first.entries);
    Ok(merged)
}

/// Downward payload carrying the merged values of every cell in scope.
pub fn broadcast<T: Real>(merged: &GlobalStats<T>, scope: SyncScope<'_>, iteration: u32, worker_id: u32) -> SyncPayload<T> {
    let k_count = merged.num_topics();
    let mut entries = Vec::with_capacity(scope.num_cells(k_count, merged.vocab_size()));
    scope.for_each_cell(k_count, merged.vocab_size(), |w, k| {
        let i = w * k_count + k;
        entries.push(SyncEntry {
            word: w as u32,
            topic: k as u32,
            phi: merged.phi[i],
            residual: merged.residual[i],
        });
    });
    SyncPayload {
        iteration,
        worker_id,
        entries,
    }
}

/// Install a downward payload into a worker replica whose out-of-scope cells
/// already equal `base`.
pub fn apply_broadcast<T: Real>(base: &GlobalStats<T>, replica: &mut GlobalStats<T>, payload: &SyncPayload<T>, full: bool) {
    let k_count = replica.num_topics();
    if !full {
        // drop local residual/phi edits outside what the payload overwrites
        replica.phi.copy_from_slice(&base.phi);
        replica.residual.copy_from_slice(&base.residual);
    }
    for e in &payload.entries {
        let i = e.word as usize * k_count + e.topic as usize;
        replica.phi[i] = e.phi;
        replica.residual[i] = e.residual;
    }
    merged_totals(base, replica, full, &payload.entries);
}

/// One barrier: upload from every replica, merge, broadcast, and log the
/// exact payload sizes. `replicas[i]` belongs to worker `i + 1`.
pub fn sync_matrices<T: Real>(
    base: &GlobalStats<T>,
    replicas: &[&GlobalStats<T>],
    scope: SyncScope<'_>,
    minibatch: usize,
    iteration: u32,
    ledger: &mut CommLedger,
) -> Result<(GlobalStats<T>, Vec<SyncPayload<T>>)> {
    let payloads = replicas
        .iter()
        .enumerate()
        .map(|(i, r)| upload(base, r, scope, iteration, i as u32 + 1))
        .collect::<Result<Vec<_>>>()?;
    let merged = merge_payloads(base, &payloads, scope)?;
    record_exchange(ledger, &payloads, &merged, scope, minibatch, iteration);
    Ok((merged, payloads))
}

pub(crate) fn record_exchange<T: Real>(
    ledger: &mut CommLedger,
    up: &[SyncPayload<T>],
    merged: &GlobalStats<T>,
    scope: SyncScope<'_>,
    minibatch: usize,
    iteration: u32,
) {
    for p in up {
        ledger.record(LedgerRecord {
            m: minibatch,
            t: iteration,
            n: p.worker_id,
            direction: Direction::Up,
            entries: p.record_count() as u64,
            bytes: p.encode().len() as u64,
        });
    }
    for p in up {
        let down = broadcast(merged, scope, iteration, p.worker_id);
        ledger.record(LedgerRecord {
            m: minibatch,
            t: iteration,
            n: p.worker_id,
            direction: Direction::Down,
            entries: down.record_count() as u64,
            bytes: down.encode().len() as u64,
        });
    }
}
