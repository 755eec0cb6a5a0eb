//! Synthetic corpora drawn from the LDA generative process.
//!
//! Word frequencies follow a Zipf-shaped base measure so the vocabulary has
//! the heavy-tailed usage seen in real text.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use super::{Entry, SparseCorpus};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub num_docs: usize,
    pub vocab_size: usize,
    pub num_topics: usize,
    /// Mean document length in tokens (Poisson, at least one token).
    pub mean_doc_len: f64,
    /// Symmetric Dirichlet parameter for document-topic proportions.
    pub doc_topic_alpha: f64,
    /// Exponent of the Zipf base measure over words.
    pub zipf_exponent: f64,
    /// Total Dirichlet mass of each topic around the base measure; smaller
    /// means sparser, more distinct topics.
    pub topic_concentration: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            num_docs: 2000,
            vocab_size: 2000,
            num_topics: 20,
            mean_doc_len: 120.0,
            doc_topic_alpha: 0.1,
            zipf_exponent: 1.0,
            topic_concentration: 200.0,
            seed: 20140101,
        }
    }
}

fn dirichlet(rng: &mut impl Rng, params: &[f64]) -> Vec<f64> {
    let mut draws: Vec<f64> = params
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
        .collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        draws.iter_mut().for_each(|v| *v /= total);
    } else {
        let u = 1.0 / draws.len() as f64;
        draws.iter_mut().for_each(|v| *v = u);
    }
    draws
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|&v| {
            acc += v;
            acc
        })
        .collect()
}

fn draw(rng: &mut impl Rng, cdf: &[f64]) -> usize {
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

pub fn generate(spec: &SyntheticSpec) -> Result<SparseCorpus> {
    if spec.vocab_size == 0 || spec.num_topics == 0 {
        return Err(Error::Config("synthetic corpus needs W >= 1 and K >= 1".into()));
    }
    if !(spec.mean_doc_len > 0.0 && spec.doc_topic_alpha > 0.0 && spec.topic_concentration > 0.0) {
        return Err(Error::Config("synthetic corpus parameters must be positive".into()));
    }
    let mut rng = rng::stream(spec.seed, &[rng::DOMAIN_SYNTH]);

    // Shuffle ranks so frequent words are scattered over the index range.
    let mut rank: Vec<usize> = (0..spec.vocab_size).collect();
    for i in (1..rank.len()).rev() {
        let j = rng.random_range(0..=i);
        rank.swap(i, j);
    }
    let zipf: Vec<f64> = rank
        .iter()
        .map(|&r| 1.0 / ((r + 1) as f64).powf(spec.zipf_exponent))
        .collect();
    let z_total: f64 = zipf.iter().sum();
    let base: Vec<f64> = zipf
        .iter()
        .map(|z| (spec.topic_concentration * z / z_total).max(1e-6))
        .collect();

    let topic_cdfs: Vec<Vec<f64>> = (0..spec.num_topics)
        .map(|_| cumulative(&dirichlet(&mut rng, &base)))
        .collect();
    let doc_alpha = vec![spec.doc_topic_alpha; spec.num_topics];
    let length = Poisson::new(spec.mean_doc_len).expect("positive mean");

    let mut entries = Vec::new();
    let mut counts = vec![0u32; spec.vocab_size];
    for d in 0..spec.num_docs {
        let theta = cumulative(&dirichlet(&mut rng, &doc_alpha));
        let n = (length.sample(&mut rng) as usize).max(1);
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..n {
            let k = draw(&mut rng, &theta);
            counts[draw(&mut rng, &topic_cdfs[k])] += 1;
        }
        for (w, &c) in counts.iter().enumerate() {
            if c > 0 {
                entries.push(Entry {
                    doc: d as u32,
                    word: w as u32,
                    count: c,
                });
            }
        }
    }
    SparseCorpus::with_anonymous_vocab(spec.num_docs, spec.vocab_size, entries)
}
