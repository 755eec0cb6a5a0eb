use rand::seq::index;

use super::{Entry, SparseCorpus};
use crate::error::{Error, Result};
use crate::rng;

/// Token-level 80/20-style split of every document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPair {
    pub train: SparseCorpus,
    pub test: SparseCorpus,
}

/// Split each document's tokens: `floor(test_fraction * tokens)` tokens chosen
/// uniformly without replacement (seeded per document) go to `test`, the rest
/// to `train`. Single-token documents therefore stay entirely in `train`.
pub fn split_train_test(corpus: &SparseCorpus, test_fraction: f64, seed: u64) -> Result<SplitPair> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut train = Vec::with_capacity(corpus.nnz());
    let mut test = Vec::new();
    for d in 0..corpus.num_docs() {
        let (words, counts) = corpus.doc(d);
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        let n_test = (test_fraction * total as f64 + 1e-9).floor() as usize;
        let mut test_counts = vec![0u32; words.len()];
        if n_test > 0 {
            // token i belongs to entry j where cumulative counts straddle i
            let mut cumulative = Vec::with_capacity(counts.len());
            let mut acc = 0usize;
            for &c in counts {
                acc += c as usize;
                cumulative.push(acc);
            }
            let mut rng = rng::stream(seed, &[rng::DOMAIN_SPLIT, d as u64]);
            for token in index::sample(&mut rng, total, n_test) {
                let j = cumulative.partition_point(|&c| c <= token);
                test_counts[j] += 1;
            }
        }
        for ((&word, &count), &t) in words.iter().zip(counts).zip(&test_counts) {
            let doc = d as u32;
            if count > t {
                train.push(Entry { doc, word, count: count - t });
            }
            if t > 0 {
                test.push(Entry { doc, word, count: t });
            }
        }
    }
    let vocab = corpus.vocab().to_vec();
    Ok(SplitPair {
        train: SparseCorpus::from_entries(corpus.num_docs(), vocab.clone(), train)?,
        test: SparseCorpus::from_entries(corpus.num_docs(), vocab, test)?,
    })
}
