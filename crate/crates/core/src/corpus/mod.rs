//! Bag-of-words corpora: loading, splitting, mini-batching and sharding.
//!
//! Indices are 0-based in memory and 1-based in every file format.

mod batch;
mod split;
pub mod synth;
mod uci;

pub use batch::{make_minibatches, shard_documents, MiniBatch, Shard};
pub use split::{split_train_test, SplitPair};
pub use uci::{load_uci_bow, load_uci_docword, read_uci_bow, write_uci_bow};

use crate::error::{Error, Result};

/// One nonzero cell `x_{w,d}` of the document-word matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entry {
    pub doc: u32,
    pub word: u32,
    pub count: u32,
}

/// Compressed sparse document-word count matrix, stored row-per-document with
/// words ascending inside each document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseCorpus {
    vocab: Vec<String>,
    doc_ptr: Vec<usize>,
    words: Vec<u32>,
    counts: Vec<u32>,
}

impl SparseCorpus {
    /// Build from unordered entries. Duplicate `(doc, word)` pairs are summed.
    pub fn from_entries(
        num_docs: usize,
        vocab: Vec<String>,
        mut entries: Vec<Entry>,
    ) -> Result<Self> {
        let vocab_size = vocab.len();
        for e in &entries {
            if e.doc as usize >= num_docs || e.word as usize >= vocab_size {
                return Err(Error::Domain(format!(
                    "entry (d={}, w={}) outside {}x{} corpus",
                    e.doc as usize + 1,
                    e.word as usize + 1,
                    num_docs,
                    vocab_size
                )));
            }
            if e.count == 0 {
                return Err(Error::Domain(format!(
                    "entry (d={}, w={}) has zero count",
                    e.doc as usize + 1,
                    e.word as usize + 1
                )));
            }
        }
        entries.sort_unstable_by_key(|e| (e.doc, e.word));

        let mut doc_ptr = Vec::with_capacity(num_docs + 1);
        let mut words = Vec::with_capacity(entries.len());
        let mut counts: Vec<u32> = Vec::with_capacity(entries.len());
        doc_ptr.push(0);
        let mut current_doc = 0u32;
        let mut last: Option<(u32, u32)> = None;
        for e in entries {
            while current_doc < e.doc {
                doc_ptr.push(words.len());
                current_doc += 1;
            }
            if last == Some((e.doc, e.word)) {
                let c = counts.last_mut().expect("duplicate follows an entry");
                *c = c.checked_add(e.count).ok_or_else(|| {
                    Error::Domain(format!("count overflow at d={}", e.doc as usize + 1))
                })?;
            } else {
                words.push(e.word);
                counts.push(e.count);
                last = Some((e.doc, e.word));
            }
        }
        while doc_ptr.len() < num_docs + 1 {
            doc_ptr.push(words.len());
        }
        Ok(Self {
            vocab,
            doc_ptr,
            words,
            counts,
        })
    }

    /// Corpus with placeholder vocabulary `w1..wW`.
    pub fn with_anonymous_vocab(
        num_docs: usize,
        vocab_size: usize,
        entries: Vec<Entry>,
    ) -> Result<Self> {
        Self::from_entries(num_docs, anonymous_vocab(vocab_size), entries)
    }

    pub fn num_docs(&self) -> usize {
        self.doc_ptr.len() - 1
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn nnz(&self) -> usize {
        self.words.len()
    }

    pub fn num_tokens(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Words and counts of document `d` (0-based).
    pub fn doc(&self, d: usize) -> (&[u32], &[u32]) {
        let (lo, hi) = (self.doc_ptr[d], self.doc_ptr[d + 1]);
        (&self.words[lo..hi], &self.counts[lo..hi])
    }

    pub fn doc_nnz(&self, d: usize) -> usize {
        self.doc_ptr[d + 1] - self.doc_ptr[d]
    }

    pub fn doc_tokens(&self, d: usize) -> u64 {
        self.doc(d).1.iter().map(|&c| u64::from(c)).sum()
    }

    /// All entries in `(doc, word)` order.
    pub fn entries(&self) -> impl Iterator<Item = Entry> + '_ {
        (0..self.num_docs()).flat_map(move |d| {
            let (ws, cs) = self.doc(d);
            ws.iter().zip(cs).map(move |(&word, &count)| Entry {
                doc: d as u32,
                word,
                count,
            })
        })
    }

    pub fn doc_entries(&self, d: usize) -> impl Iterator<Item = Entry> + '_ {
        let (ws, cs) = self.doc(d);
        ws.iter().zip(cs).map(move |(&word, &count)| Entry {
            doc: d as u32,
            word,
            count,
        })
    }

    /// Keep only the `keep` most frequent words (by total count, ties to the
    /// lower index), re-indexing the vocabulary in original order. Documents
    /// are kept even if they become empty.
    pub fn truncate_vocabulary(&self, keep: usize) -> Result<SparseCorpus> {
        if keep == 0 {
            return Err(Error::Config("vocabulary truncation must keep at least one word".into()));
        }
        if keep >= self.vocab_size() {
            return Ok(self.clone());
        }
        let mut freq = vec![0u64; self.vocab_size()];
        for (&w, &c) in self.words.iter().zip(&self.counts) {
            freq[w as usize] += u64::from(c);
        }
        let mut order: Vec<usize> = (0..self.vocab_size()).collect();
        order.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));
        let mut kept: Vec<usize> = order[..keep].to_vec();
        kept.sort_unstable();
        let mut remap = vec![u32::MAX; self.vocab_size()];
        for (new, &old) in kept.iter().enumerate() {
            remap[old] = new as u32;
        }
        let vocab = kept.iter().map(|&w| self.vocab[w].clone()).collect();
        let entries = self
            .entries()
            .filter(|e| remap[e.word as usize] != u32::MAX)
            .map(|e| Entry {
                word: remap[e.word as usize],
                ..e
            })
            .collect();
        SparseCorpus::from_entries(self.num_docs(), vocab, entries)
    }

    /// Sub-corpus of the first `n` documents.
    pub fn head(&self, n: usize) -> SparseCorpus {
        let n = n.min(self.num_docs());
        let end = self.doc_ptr[n];
        SparseCorpus {
            vocab: self.vocab.clone(),
            doc_ptr: self.doc_ptr[..=n].to_vec(),
            words: self.words[..end].to_vec(),
            counts: self.counts[..end].to_vec(),
        }
    }
}

pub(crate) fn anonymous_vocab(vocab_size: usize) -> Vec<String> {
    (1..=vocab_size).map(|w| format!("w{w}")).collect()
}
