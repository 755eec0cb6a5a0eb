use super::{Entry, SparseCorpus};
use crate::error::{Error, Result};

/// A contiguous run of documents processed to convergence before the next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiniBatch {
    /// 1-based ordinal `m`.
    pub index: usize,
    pub doc_ids: Vec<u32>,
    /// Entries in `(doc, word)` order.
    pub entries: Vec<Entry>,
}

impl MiniBatch {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn num_tokens(&self) -> u64 {
        self.entries.iter().map(|e| u64::from(e.count)).sum()
    }
}

/// The part of a mini-batch owned by one worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shard {
    /// 1-based worker id `n`.
    pub worker_id: u32,
    /// Ascending document ids.
    pub doc_ids: Vec<u32>,
    /// Entries in `(doc, word)` order.
    pub entries: Vec<Entry>,
}

impl Shard {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn num_tokens(&self) -> u64 {
        self.entries.iter().map(|e| u64::from(e.count)).sum()
    }
}

/// Greedy fill in document-id order: a new batch starts when adding the next
/// document would push the batch past `target_nnz` and the batch is non-empty.
pub fn make_minibatches(corpus: &SparseCorpus, target_nnz: usize) -> Result<Vec<MiniBatch>> {
    if target_nnz == 0 {
        return Err(Error::Config("mini-batch target NNZ must be at least 1".into()));
    }
    let mut batches = Vec::new();
    let mut current = MiniBatch {
        index: 1,
        doc_ids: Vec::new(),
        entries: Vec::new(),
    };
    for d in 0..corpus.num_docs() {
        let nnz = corpus.doc_nnz(d);
        if !current.doc_ids.is_empty() && current.nnz() + nnz > target_nnz {
            let next = current.index + 1;
            batches.push(std::mem::replace(
                &mut current,
                MiniBatch {
                    index: next,
                    doc_ids: Vec::new(),
                    entries: Vec::new(),
                },
            ));
        }
        current.doc_ids.push(d as u32);
        current.entries.extend(corpus.doc_entries(d));
    }
    if !current.doc_ids.is_empty() {
        batches.push(current);
    }
    Ok(batches)
}

/// Longest-processing-time assignment on per-document nnz: documents in
/// descending nnz (ties to the lower id) go to the currently lightest worker
/// (ties to the lower worker id). Every worker gets a shard, possibly empty.
pub fn shard_documents(batch: &MiniBatch, num_workers: usize) -> Result<Vec<Shard>> {
    if num_workers == 0 {
        return Err(Error::Config("number of workers must be at least 1".into()));
    }
    // per-document entry ranges within the batch
    let mut spans: Vec<(u32, usize, usize)> = Vec::with_capacity(batch.doc_ids.len());
    let mut i = 0;
    for &d in &batch.doc_ids {
        let start = i;
        while i < batch.entries.len() && batch.entries[i].doc == d {
            i += 1;
        }
        spans.push((d, start, i));
    }
    let mut order: Vec<usize> = (0..spans.len()).collect();
    order.sort_by(|&a, &b| {
        let (na, nb) = (spans[a].2 - spans[a].1, spans[b].2 - spans[b].1);
        nb.cmp(&na).then(spans[a].0.cmp(&spans[b].0))
    });

    let mut load = vec![0usize; num_workers];
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); num_workers];
    for doc in order {
        let (target, _) = load
            .iter()
            .enumerate()
            .min_by_key(|&(n, &l)| (l, n))
            .expect("at least one worker");
        load[target] += spans[doc].2 - spans[doc].1;
        assigned[target].push(doc);
    }

    Ok(assigned
        .into_iter()
        .enumerate()
        .map(|(n, mut docs)| {
            docs.sort_by_key(|&i| spans[i].0);
            let mut entries = Vec::new();
            for &i in &docs {
                entries.extend_from_slice(&batch.entries[spans[i].1..spans[i].2]);
            }
            Shard {
                worker_id: n as u32 + 1,
                doc_ids: docs.iter().map(|&i| spans[i].0).collect(),
                entries,
            }
        })
        .collect())
}
