use super::memory::{MeterGuard, StorageMeter};
use super::messages::MessageBlock;
use crate::corpus::{Entry, Shard};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Expected topic counts per document of one shard (`D_shard` rows of `K`).
#[derive(Debug)]
pub struct ThetaStats<T> {
    num_topics: usize,
    doc_ids: Vec<u32>,
    values: Vec<T>,
    _guard: Option<MeterGuard>,
}

impl<T: Real> ThetaStats<T> {
    pub fn zeros(doc_ids: Vec<u32>, num_topics: usize) -> Self {
        let values = vec![T::zero(); doc_ids.len() * num_topics];
        Self {
            num_topics,
            doc_ids,
            values,
            _guard: None,
        }
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn doc_ids(&self) -> &[u32] {
        &self.doc_ids
    }

    /// Row for the `i`-th document of the shard (not the global doc id).
    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.num_topics..(i + 1) * self.num_topics]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        let k = self.num_topics;
        &mut self.values[i * k..(i + 1) * k]
    }

    pub fn size_bytes(&self) -> usize {
        self.values.len() * std::mem::size_of::<T>()
    }

    pub fn attach_meter(&mut self, meter: &StorageMeter) {
        self._guard = Some(meter.track(self.size_bytes()));
    }
}

/// `theta_d(k) = sum_w x_{w,d} mu_{w,d}(k)` over the shard's entries.
pub fn rebuild_theta<T: Real>(shard: &Shard, messages: &MessageBlock<T>, num_topics: usize) -> Result<ThetaStats<T>> {
    if messages.len() != shard.nnz() || messages.num_topics() != num_topics {
        return Err(Error::Accounting(format!(
            "message block has {} rows of K={} but shard has {} entries and K={num_topics}",
            messages.len(),
            messages.num_topics(),
            shard.nnz()
        )));
    }
    let mut theta = ThetaStats::zeros(shard.doc_ids.clone(), num_topics);
    let mut slot = 0;
    for (i, e) in shard.entries.iter().enumerate() {
        while shard.doc_ids.get(slot) != Some(&e.doc) {
            slot += 1;
            if slot >= shard.doc_ids.len() {
                return Err(Error::Accounting(format!(
                    "entry for document {} is not in the shard's document list",
                    e.doc + 1
                )));
            }
        }
        let x = T::of_count(e.count);
        for (t, &mu) in theta.row_mut(slot).iter_mut().zip(messages.message(i)) {
            *t = *t + x * mu;
        }
    }
    Ok(theta)
}

/// Global topic-word statistics `phi_hat`, the residual matrix, and cached
/// per-topic totals. Both matrices are word-major: index `w * K + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalStats<T> {
    num_topics: usize,
    vocab_size: usize,
    pub(crate) phi: Vec<T>,
    pub(crate) residual: Vec<T>,
    pub(crate) topic_totals: Vec<T>,
}

impl<T: Real> GlobalStats<T> {
    pub fn zeros(num_topics: usize, vocab_size: usize) -> Self {
        Self {
            num_topics,
            vocab_size,
            phi: vec![T::zero(); num_topics * vocab_size],
            residual: vec![T::zero(); num_topics * vocab_size],
            topic_totals: vec![T::zero(); num_topics],
        }
    }

    /// Build from a word-major `phi_hat`; totals are computed, residuals zero.
    pub fn from_phi(num_topics: usize, vocab_size: usize, phi: Vec<T>) -> Result<Self> {
        if phi.len() != num_topics * vocab_size {
            return Err(Error::DimensionMismatch {
                expected: format!("{} values (K={num_topics}, W={vocab_size})", num_topics * vocab_size),
                found: format!("{} values", phi.len()),
            });
        }
        if phi.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::Domain("phi_hat entries must be finite and non-negative".into()));
        }
        let mut s = Self {
            num_topics,
            vocab_size,
            phi,
            residual: vec![T::zero(); num_topics * vocab_size],
            topic_totals: vec![T::zero(); num_topics],
        };
        s.recompute_totals();
        Ok(s)
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    #[inline]
    pub(crate) fn at(&self, w: usize, k: usize) -> usize {
        w * self.num_topics + k
    }

    pub fn phi(&self, w: usize, k: usize) -> T {
        self.phi[self.at(w, k)]
    }

    pub fn residual(&self, w: usize, k: usize) -> T {
        self.residual[self.at(w, k)]
    }

    pub fn phi_row(&self, w: usize) -> &[T] {
        &self.phi[w * self.num_topics..(w + 1) * self.num_topics]
    }

    pub fn residual_row(&self, w: usize) -> &[T] {
        &self.residual[w * self.num_topics..(w + 1) * self.num_topics]
    }

    pub fn phi_values(&self) -> &[T] {
        &self.phi
    }

    pub fn residual_values(&self) -> &[T] {
        &self.residual
    }

    pub fn topic_totals(&self) -> &[T] {
        &self.topic_totals
    }

    pub fn residual_total(&self) -> T {
        self.residual.iter().copied().sum()
    }

    pub fn reset_residual(&mut self) {
        self.residual.iter_mut().for_each(|r| *r = T::zero());
    }

    pub fn set_residual(&mut self, w: usize, k: usize, value: T) {
        let i = self.at(w, k);
        self.residual[i] = value;
    }

    pub fn add_residual(&mut self, w: usize, k: usize, value: T) {
        let i = self.at(w, k);
        self.residual[i] = self.residual[i] + value;
    }

    pub fn recompute_totals(&mut self) {
        let k_count = self.num_topics;
        self.topic_totals.iter_mut().for_each(|t| *t = T::zero());
        for row in self.phi.chunks_exact(k_count) {
            for (t, &v) in self.topic_totals.iter_mut().zip(row) {
                *t = *t + v;
            }
        }
    }

    /// Check every entry is non-negative and the cached totals agree with the
    /// column sums to `rel_tol`.
    pub fn check_consistency(&self, rel_tol: f64) -> Result<()> {
        if let Some(i) = self.phi.iter().position(|v| v.is_nan() || *v < T::zero()) {
            return Err(Error::Accounting(format!("phi_hat entry {i} is negative or NaN")));
        }
        if let Some(i) = self.residual.iter().position(|v| v.is_nan() || *v < T::zero()) {
            return Err(Error::Accounting(format!("residual entry {i} is negative or NaN")));
        }
        let mut fresh = self.clone();
        fresh.recompute_totals();
        for (k, (a, b)) in self.topic_totals.iter().zip(&fresh.topic_totals).enumerate() {
            let (a, b) = (a.as_f64(), b.as_f64());
            if (a - b).abs() > rel_tol * b.abs().max(1.0) {
                return Err(Error::Accounting(format!(
                    "topic total {k} is {a} but phi_hat column sums to {b}"
                )));
            }
        }
        Ok(())
    }
}

/// Apply one entry's message change to `phi_hat` and the topic totals:
/// `phi(w,k) += x * (new(k) - old(k))`, clamping rounding noise at zero.
pub fn accumulate_phi<T: Real>(global: &mut GlobalStats<T>, entry: &Entry, old: &[T], new: &[T]) -> Result<()> {
    let tol = T::of(1e-6);
    let x = T::of_count(entry.count);
    let w = entry.word as usize;
    let k_count = global.num_topics;
    let row = w * k_count;
    for k in 0..k_count {
        let delta = x * (new[k] - old[k]);
        if delta == T::zero() {
            continue;
        }
        let phi = global.phi[row + k] + delta;
        let total = global.topic_totals[k] + delta;
        if phi < -tol || total < -tol {
            return Err(Error::Accounting(format!(
                "phi_hat(w={}, k={}) would become {phi}; the entry's old contribution is missing",
                w + 1,
                k + 1
            )));
        }
        global.phi[row + k] = phi.max(T::zero());
        global.topic_totals[k] = total.max(T::zero());
    }
    Ok(())
}

/// Average residual per token, `sum_{w,k} r_w(k) / tokens`.
pub fn mean_residual<T: Real>(global: &GlobalStats<T>, token_count: u64) -> Result<T> {
    if token_count == 0 {
        return Err(Error::Domain("mean residual needs at least one token".into()));
    }
    Ok(global.residual_total() / T::of(token_count as f64))
}
