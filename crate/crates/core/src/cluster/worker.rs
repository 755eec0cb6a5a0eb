use super::sync::{apply_broadcast, upload, SyncScope};
use super::wire::SyncPayload;
use crate::corpus::Shard;
use crate::error::Result;
use crate::inference::{
    accumulate_phi, compute_residual, init_messages, rebuild_theta, update_message, GlobalStats, Hyperparams,
    MessageBlock, MessageContext, StorageMeter, ThetaStats, Topics, UpdateOutcome,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub entries_swept: u64,
    pub degenerate_updates: u64,
}

/// One worker's private state for the current mini-batch.
#[derive(Debug)]
pub struct WorkerState<T> {
    shard: Shard,
    /// Row of `theta` for each shard entry.
    doc_slot: Vec<u32>,
    messages: MessageBlock<T>,
    theta: ThetaStats<T>,
    replica: GlobalStats<T>,
    old: Vec<T>,
    new: Vec<T>,
    residual: Vec<T>,
}

impl<T: Real> WorkerState<T> {
    /// Initialize messages and document statistics for `shard`, starting from
    /// a copy of the global statistics.
    pub fn new(shard: Shard, base: &GlobalStats<T>, seed: u64, meter: Option<&StorageMeter>) -> Result<Self> {
        let k_count = base.num_topics();
        let mut messages = init_messages(&shard, k_count, seed)?;
        let mut theta = rebuild_theta(&shard, &messages, k_count)?;
        if let Some(m) = meter {
            messages.attach_meter(m);
            theta.attach_meter(m);
        }
        let mut doc_slot = Vec::with_capacity(shard.nnz());
        let mut slot = 0usize;
        for e in &shard.entries {
            while shard.doc_ids[slot] != e.doc {
                slot += 1;
            }
            doc_slot.push(slot as u32);
        }
        Ok(Self {
            shard,
            doc_slot,
            messages,
            theta,
            replica: base.clone(),
            old: vec![T::zero(); k_count],
            new: vec![T::zero(); k_count],
            residual: vec![T::zero(); k_count],
        })
    }

    pub fn worker_id(&self) -> u32 {
        self.shard.worker_id
    }

    pub fn shard(&self) -> &Shard {
        &self.shard
    }

    pub fn messages(&self) -> &MessageBlock<T> {
        &self.messages
    }

    pub fn theta(&self) -> &ThetaStats<T> {
        &self.theta
    }

    pub fn replica(&self) -> &GlobalStats<T> {
        &self.replica
    }

    /// Bytes of message and document-statistics storage.
    pub fn storage_bytes(&self) -> usize {
        self.messages.size_bytes() + self.theta.size_bytes()
    }

    /// One pass over the shard in `(doc, word)` order.
    ///
    /// Document statistics are updated in place as messages change; the
    /// topic-word side reads the immutable barrier `base`, and the changes
    /// accumulate in the local replica until the next barrier. On the first
    /// sweep of a mini-batch `base` does not yet contain this batch's
    /// messages, so nothing is excluded from it. Under a power-set scope only
    /// entries of power words are visited, restricted to their power topics.
    pub fn sweep(
        &mut self,
        base: &GlobalStats<T>,
        scope: SyncScope<'_>,
        hyper: &Hyperparams<T>,
        first_sweep: bool,
    ) -> Result<SweepStats> {
        let k_count = base.num_topics();
        let vocab_size = base.vocab_size();
        match scope {
            SyncScope::Full => self.replica.reset_residual(),
            SyncScope::Power(p) => {
                for (w, k) in p.cells() {
                    self.replica.set_residual(w, k, T::zero());
                }
            }
        }
        let absent = vec![T::zero(); k_count];
        let mut stats = SweepStats::default();
        for i in 0..self.shard.entries.len() {
            let e = self.shard.entries[i];
            let w = e.word as usize;
            let topics = match scope {
                SyncScope::Full => Topics::All,
                SyncScope::Power(p) => match p.topics_for(w) {
                    None => continue,
                    Some(ts) if ts.len() == k_count => Topics::All,
                    Some(ts) => Topics::Subset(ts),
                },
            };
            let slot = self.doc_slot[i] as usize;
            self.old.copy_from_slice(self.messages.message(i));
            let ctx = MessageContext {
                theta_doc: self.theta.row(slot),
                phi_word: base.phi_row(w),
                topic_totals: base.topic_totals(),
                phi_includes_entry: !first_sweep,
                vocab_size,
            };
            if update_message(e.count, &ctx, &self.old, topics, hyper, &mut self.new) == UpdateOutcome::Degenerate {
                stats.degenerate_updates += 1;
            }
            compute_residual(&self.old, &self.new, e.count, &mut self.residual);
            match topics {
                Topics::All => {
                    for k in 0..k_count {
                        self.replica.add_residual(w, k, self.residual[k]);
                    }
                }
                Topics::Subset(ts) => {
                    for &k in ts {
                        self.replica.add_residual(w, k, self.residual[k]);
                    }
                }
            }
            let x = T::of_count(e.count);
            for (t, (&n, &o)) in self.theta.row_mut(slot).iter_mut().zip(self.new.iter().zip(&self.old)) {
                *t = (*t + x * (n - o)).max(T::zero());
            }
            let previous = if first_sweep { &absent } else { &self.old };
            accumulate_phi(&mut self.replica, &e, previous, &self.new)?;
            self.messages.message_mut(i).copy_from_slice(&self.new);
            stats.entries_swept += 1;
        }
        Ok(stats)
    }

    pub fn upload(&self, base: &GlobalStats<T>, scope: SyncScope<'_>, iteration: u32) -> Result<SyncPayload<T>> {
        upload(base, &self.replica, scope, iteration, self.worker_id())
    }

    pub fn receive(&mut self, base: &GlobalStats<T>, payload: &SyncPayload<T>, full: bool) {
        apply_broadcast(base, &mut self.replica, payload, full);
    }
}
