//! Held-out evaluation: fold-in of document-topic proportions with a frozen
//! topic-word distribution, and predictive perplexity.

use rand::Rng;
use rand_distr::Open01;
use rayon::prelude::*;

use super::{GlobalStats, Hyperparams};
use crate::corpus::SparseCorpus;
use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::Real;

const PROBABILITY_FLOOR: f64 = 1e-12;

/// Normalized topic-word distribution `phi_w(k)`, word-major, each topic
/// summing to one over the vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicWordDist<T> {
    num_topics: usize,
    vocab_size: usize,
    values: Vec<T>,
}

impl<T: Real> TopicWordDist<T> {
    /// `phi_w(k) = (phi_hat_w(k) + beta) / (sum_w phi_hat_w(k) + W beta)`.
    pub fn from_stats(stats: &GlobalStats<T>, beta: T) -> Self {
        let (k_count, w_count) = (stats.num_topics(), stats.vocab_size());
        let w_beta = T::of(w_count as f64) * beta;
        let denom: Vec<T> = stats.topic_totals().iter().map(|&t| t + w_beta).collect();
        let values = stats
            .phi_values()
            .chunks_exact(k_count)
            .flat_map(|row| row.iter().zip(&denom).map(|(&p, &d)| (p + beta) / d))
            .collect();
        Self {
            num_topics: k_count,
            vocab_size: w_count,
            values,
        }
    }

    pub fn uniform(num_topics: usize, vocab_size: usize) -> Self {
        Self {
            num_topics,
            vocab_size,
            values: vec![T::one() / T::of(vocab_size as f64); num_topics * vocab_size],
        }
    }

    /// Wrap a word-major matrix, checking each topic sums to one.
    pub fn from_word_major(num_topics: usize, vocab_size: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != num_topics * vocab_size || num_topics == 0 {
            return Err(Error::DimensionMismatch {
                expected: format!("K={num_topics} x W={vocab_size}"),
                found: format!("{} values", values.len()),
            });
        }
        let mut sums = vec![0.0f64; num_topics];
        for row in values.chunks_exact(num_topics) {
            for (s, v) in sums.iter_mut().zip(row) {
                if v.is_nan() || *v < T::zero() {
                    return Err(Error::Domain("topic-word probabilities must be non-negative".into()));
                }
                *s += v.as_f64();
            }
        }
        if let Some(k) = sums.iter().position(|s| (s - 1.0).abs() > 1e-6) {
            return Err(Error::Domain(format!(
                "topic {} sums to {} instead of 1",
                k + 1,
                sums[k]
            )));
        }
        Ok(Self {
            num_topics,
            vocab_size,
            values,
        })
    }

    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn word(&self, w: usize) -> &[T] {
        &self.values[w * self.num_topics..(w + 1) * self.num_topics]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Fold-in result for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldIn<T> {
    pub theta: Vec<T>,
    /// The document had no tokens; `theta` is uniform.
    pub degenerate: bool,
}

/// Stop fold-in once a sweep moves `theta_d` by less than this per token.
pub const FOLD_IN_TOL: f64 = 1e-8;

/// Estimate `theta_d` for one document with `phi` frozen: up to `iters` sweeps of
/// `mu(k) ∝ [theta_{-w,d}(k) + alpha] phi_w(k)` from a seeded random start,
/// returning `theta_d(k) ∝ theta_hat_d(k) + alpha`.
pub fn fold_in_theta<T: Real>(
    doc_id: u32,
    words: &[u32],
    counts: &[u32],
    phi: &TopicWordDist<T>,
    hyper: &Hyperparams<T>,
    iters: usize,
    seed: u64,
) -> Result<FoldIn<T>> {
    let k_count = phi.num_topics();
    if iters == 0 {
        return Err(Error::Config("fold-in needs at least one iteration".into()));
    }
    if hyper.num_topics != k_count {
        return Err(Error::DimensionMismatch {
            expected: format!("K={}", hyper.num_topics),
            found: format!("K={k_count}"),
        });
    }
    if words.is_empty() {
        return Ok(FoldIn {
            theta: vec![T::one() / T::of(k_count as f64); k_count],
            degenerate: true,
        });
    }
    let mut mu = vec![T::zero(); words.len() * k_count];
    let mut theta = vec![T::zero(); k_count];
    for (i, (&w, &c)) in words.iter().zip(counts).enumerate() {
        let mut rng = rng::stream(seed, &[rng::DOMAIN_FOLD_IN, u64::from(doc_id), u64::from(w)]);
        let row = &mut mu[i * k_count..(i + 1) * k_count];
        row.iter_mut().for_each(|v| *v = T::of(rng.sample::<f64, _>(Open01)));
        let s: T = row.iter().copied().sum();
        let x = T::of_count(c);
        for (v, t) in row.iter_mut().zip(theta.iter_mut()) {
            *v = *v / s;
            *t = *t + x * *v;
        }
    }
    let mut fresh = vec![T::zero(); k_count];
    let tokens: f64 = counts.iter().map(|&c| f64::from(c)).sum();
    for _ in 0..iters {
        let mut moved = 0.0f64;
        for (i, (&w, &c)) in words.iter().zip(counts).enumerate() {
            let x = T::of_count(c);
            let row = &mut mu[i * k_count..(i + 1) * k_count];
            let phi_w = phi.word(w as usize);
            let mut sum = T::zero();
            for k in 0..k_count {
                let excl = (theta[k] - x * row[k]).max(T::zero());
                fresh[k] = (excl + hyper.alpha) * phi_w[k];
                sum = sum + fresh[k];
            }
            if !(sum > T::zero() && sum.is_finite()) {
                continue;
            }
            for k in 0..k_count {
                let v = fresh[k] / sum;
                moved += (x * (v - row[k])).abs().as_f64();
                theta[k] = (theta[k] + x * (v - row[k])).max(T::zero());
                row[k] = v;
            }
        }
        if moved <= FOLD_IN_TOL * tokens {
            break;
        }
    }
    let total: T = theta.iter().map(|&t| t + hyper.alpha).sum();
    Ok(FoldIn {
        theta: theta.iter().map(|&t| (t + hyper.alpha) / total).collect(),
        degenerate: false,
    })
}

/// Fold in every document of `corpus` in parallel. Returns a flat `D x K`
/// matrix and the number of documents with no tokens.
pub fn fold_in_corpus<T: Real>(
    corpus: &SparseCorpus,
    phi: &TopicWordDist<T>,
    hyper: &Hyperparams<T>,
    iters: usize,
    seed: u64,
) -> Result<(Vec<T>, usize)> {
    if corpus.vocab_size() != phi.vocab_size() {
        return Err(Error::DimensionMismatch {
            expected: format!("W={}", phi.vocab_size()),
            found: format!("W={}", corpus.vocab_size()),
        });
    }
    let per_doc: Vec<FoldIn<T>> = (0..corpus.num_docs())
        .into_par_iter()
        .map(|d| {
            let (words, counts) = corpus.doc(d);
            fold_in_theta(d as u32, words, counts, phi, hyper, iters, seed)
        })
        .collect::<Result<_>>()?;
    let degenerate = per_doc.iter().filter(|f| f.degenerate).count();
    Ok((per_doc.into_iter().flat_map(|f| f.theta).collect(), degenerate))
}

/// `exp{ -sum x log[sum_k theta_d(k) phi_w(k)] / sum x }` over the test counts,
/// with the inner probability floored at 1e-12.
pub fn predictive_perplexity<T: Real>(test: &SparseCorpus, theta: &[T], phi: &TopicWordDist<T>) -> Result<f64> {
    let k_count = phi.num_topics();
    if test.vocab_size() != phi.vocab_size() {
        return Err(Error::DimensionMismatch {
            expected: format!("W={}", phi.vocab_size()),
            found: format!("W={}", test.vocab_size()),
        });
    }
    if theta.len() != test.num_docs() * k_count {
        return Err(Error::DimensionMismatch {
            expected: format!("{} x {k_count} theta values", test.num_docs()),
            found: format!("{}", theta.len()),
        });
    }
    let mut log_lik = 0.0f64;
    let mut tokens = 0u64;
    for e in test.entries() {
        let th = &theta[e.doc as usize * k_count..(e.doc as usize + 1) * k_count];
        let p: f64 = th
            .iter()
            .zip(phi.word(e.word as usize))
            .map(|(&a, &b)| a.as_f64() * b.as_f64())
            .sum();
        log_lik += f64::from(e.count) * p.max(PROBABILITY_FLOOR).ln();
        tokens += u64::from(e.count);
    }
    if tokens == 0 {
        return Err(Error::Domain("perplexity needs a non-empty test set".into()));
    }
    Ok((-log_lik / tokens as f64).exp())
}

/// Relative improvement of `p_new` over `p_ref`, in percent.
pub fn perplexity_gap(p_ref: f64, p_new: f64) -> Result<f64> {
    if p_ref.is_nan() || p_ref <= 0.0 {
        return Err(Error::Domain(format!("reference perplexity must be positive, got {p_ref}")));
    }
    Ok((p_ref - p_new) / p_ref * 100.0)
}
