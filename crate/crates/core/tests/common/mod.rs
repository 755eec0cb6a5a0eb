//! Test-only reference implementation: dense, sequential online BP.
//!
//! Shares nothing with the library's inference code except the initial
//! message draw, which is an input to the algorithm rather than part of it.

#![allow(dead_code)]

use pobp::corpus::{make_minibatches, MiniBatch, Shard};
use pobp::inference::init_messages;
use pobp::SparseCorpus;

pub struct DenseObp {
    pub k: usize,
    pub w: usize,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub max_iterations: u32,
    pub seed: u64,
    /// Topic-major `K x W`.
    pub phi: Vec<Vec<f64>>,
    /// Topic-major snapshot after every barrier of every batch.
    pub barriers: Vec<Vec<Vec<f64>>>,
    pub mean_residuals: Vec<Vec<f64>>,
    /// When set, `states` receives messages, document statistics and the
    /// word-major residual matrix after every sweep.
    pub record_state: bool,
    pub states: Vec<SweepState>,
}

pub struct SweepState {
    pub mu: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    pub residual: Vec<f64>,
}

impl DenseObp {
    pub fn new(k: usize, w: usize, alpha: f64, beta: f64, seed: u64) -> Self {
        Self {
            k,
            w,
            alpha,
            beta,
            epsilon: 1e-3,
            max_iterations: 200,
            seed,
            phi: vec![vec![0.0; w]; k],
            barriers: Vec::new(),
            mean_residuals: Vec::new(),
            record_state: false,
            states: Vec::new(),
        }
    }

    fn totals(&self) -> Vec<f64> {
        self.phi.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn run_batch(&mut self, batch: &MiniBatch) {
        let (k, w) = (self.k, self.w);
        let shard = Shard {
            worker_id: 1,
            doc_ids: batch.doc_ids.clone(),
            entries: batch.entries.clone(),
        };
        let init = init_messages::<f64>(&shard, k, self.seed).unwrap();
        // mu[i][k] for the i-th batch entry
        let mut mu: Vec<Vec<f64>> = (0..batch.entries.len()).map(|i| init.message(i).to_vec()).collect();
        let docs = batch.doc_ids.clone();
        let mut theta = vec![vec![0.0; k]; docs.len()];
        let slots: Vec<usize> = batch
            .entries
            .iter()
            .map(|e| docs.binary_search(&e.doc).unwrap())
            .collect();
        for (i, e) in batch.entries.iter().enumerate() {
            let s = slots[i];
            for t in 0..k {
                theta[s][t] += e.count as f64 * mu[i][t];
            }
        }
        let tokens: f64 = batch.entries.iter().map(|e| e.count as f64).sum();
        let mut traces = Vec::new();
        let mut t = 1u32;
        loop {
            let base = self.phi.clone();
            let base_totals = self.totals();
            let mut next = base.clone();
            let mut residual_sum = 0.0;
            let mut residual = vec![0.0; w * k];
            for (i, e) in batch.entries.iter().enumerate() {
                let s = slots[i];
                let x = e.count as f64;
                let wi = e.word as usize;
                let old = mu[i].clone();
                let mut fresh = vec![0.0; k];
                for topic in 0..k {
                    let own = x * old[topic];
                    let th = (theta[s][topic] - own).max(0.0);
                    let (ph, tot) = if t == 1 {
                        (base[topic][wi], base_totals[topic])
                    } else {
                        ((base[topic][wi] - own).max(0.0), (base_totals[topic] - own).max(0.0))
                    };
                    fresh[topic] = (th + self.alpha) * (ph + self.beta) / (tot + w as f64 * self.beta);
                }
                let z: f64 = fresh.iter().sum();
                for v in fresh.iter_mut() {
                    *v /= z;
                }
                for topic in 0..k {
                    residual_sum += x * (fresh[topic] - old[topic]).abs();
                    residual[wi * k + topic] += x * (fresh[topic] - old[topic]).abs();
                    theta[s][topic] = (theta[s][topic] + x * (fresh[topic] - old[topic])).max(0.0);
                    let before = if t == 1 { 0.0 } else { old[topic] };
                    next[topic][wi] = (next[topic][wi] + x * (fresh[topic] - before)).max(0.0);
                }
                mu[i] = fresh;
            }
            self.phi = next;
            self.barriers.push(self.phi.clone());
            if self.record_state {
                self.states.push(SweepState {
                    mu: mu.clone(),
                    theta: theta.clone(),
                    residual,
                });
            }
            let mean = residual_sum / tokens;
            traces.push(mean);
            if mean < self.epsilon || t >= self.max_iterations {
                break;
            }
            t += 1;
        }
        self.mean_residuals.push(traces);
    }

    pub fn run(&mut self, corpus: &SparseCorpus, target_nnz: usize) {
        for b in make_minibatches(corpus, target_nnz).unwrap() {
            self.run_batch(&b);
        }
    }

    /// Word-major flattening, the library's layout.
    pub fn word_major(phi: &[Vec<f64>]) -> Vec<f64> {
        let (k, w) = (phi.len(), phi[0].len());
        let mut out = vec![0.0; k * w];
        for (t, row) in phi.iter().enumerate() {
            for (wi, v) in row.iter().enumerate() {
                out[wi * k + t] = *v;
            }
        }
        out
    }
}

/// The 2-document, 3-word micro-fixture.
pub fn micro_corpus() -> SparseCorpus {
    use pobp::Entry;
    let entries = vec![
        Entry { doc: 0, word: 0, count: 2 },
        Entry { doc: 0, word: 1, count: 1 },
        Entry { doc: 1, word: 1, count: 3 },
        Entry { doc: 1, word: 2, count: 1 },
    ];
    SparseCorpus::with_anonymous_vocab(2, 3, entries).unwrap()
}

/// Desk corpus used across integration tests.
pub fn desk_corpus(docs: usize, vocab: usize, topics: usize, seed: u64) -> SparseCorpus {
    let spec = pobp::corpus::synth::SyntheticSpec {
        num_docs: docs,
        vocab_size: vocab,
        num_topics: topics,
        seed,
        ..Default::default()
    };
    pobp::corpus::synth::generate(&spec).unwrap()
}

pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

/// Smallest NNZ target at or above `nnz / m` that splits `corpus` into
/// exactly `m` mini-batches.
pub fn target_for_batches(corpus: &SparseCorpus, m: usize) -> usize {
    let mut target = corpus.nnz() / m;
    loop {
        let n = make_minibatches(corpus, target).unwrap().len();
        if n == m {
            return target;
        }
        assert!(n > m, "no target gives {m} batches");
        target += 1;
    }
}
