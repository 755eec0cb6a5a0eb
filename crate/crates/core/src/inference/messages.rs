use rand::Rng;
use rand_distr::Open01;

use super::memory::{MeterGuard, StorageMeter};
use crate::corpus::Shard;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

/// Per-entry topic posteriors for one shard, in the shard's entry order.
#[derive(Debug)]
pub struct MessageBlock<T> {
    num_topics: usize,
    values: Vec<T>,
    _guard: Option<MeterGuard>,
}

impl<T: Real> MessageBlock<T> {
    pub fn from_values(num_topics: usize, values: Vec<T>) -> Result<Self> {
        if num_topics == 0 || !values.len().is_multiple_of(num_topics) {
            return Err(Error::Domain(format!(
                "{} message values do not form rows of K={num_topics}",
                values.len()
            )));
        }
        Ok(Self {
            num_topics,
            values,
            _guard: None,
        })
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.num_topics
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn message(&self, i: usize) -> &[T] {
        let k = self.num_topics;
        &self.values[i * k..(i + 1) * k]
    }

    pub fn message_mut(&mut self, i: usize) -> &mut [T] {
        let k = self.num_topics;
        &mut self.values[i * k..(i + 1) * k]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn size_bytes(&self) -> usize {
        self.values.len() * std::mem::size_of::<T>()
    }

    pub fn attach_meter(&mut self, meter: &StorageMeter) {
        self._guard = Some(meter.track(self.size_bytes()));
    }
}

/// Random normalized messages. Each entry's vector depends only on
/// `(seed, doc, word)`, so the draw does not change with sharding.
pub fn init_messages<T: Real>(shard: &Shard, num_topics: usize, seed: u64) -> Result<MessageBlock<T>> {
    if num_topics == 0 {
        return Err(Error::Config("number of topics must be at least 1".into()));
    }
    let mut values = Vec::with_capacity(shard.nnz() * num_topics);
    for e in &shard.entries {
        let mut rng = rng::stream(
            seed,
            &[rng::DOMAIN_MESSAGES, u64::from(e.doc), u64::from(e.word)],
        );
        let start = values.len();
        values.extend((0..num_topics).map(|_| T::of(rng.sample::<f64, _>(Open01))));
        let row = &mut values[start..];
        let total: T = row.iter().copied().sum();
        row.iter_mut().for_each(|v| *v = *v / total);
    }
    MessageBlock::from_values(num_topics, values)
}
