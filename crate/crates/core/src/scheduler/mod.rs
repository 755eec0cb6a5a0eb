//! Residual-driven selection of power words and power topics.

mod diagnostics;

pub use diagnostics::{powerlaw_topshare, spearman, write_rank_curve_csv, write_topshare_csv, TopShare};

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::inference::GlobalStats;
use crate::scalar::Real;

/// Fractions of the vocabulary and of the topics synchronized after the
/// first iteration of each mini-batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionRatios {
    pub lambda_w: f64,
    pub lambda_k: f64,
}

fn check_ratio(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in (0, 1], got {v}")))
    }
}

impl SelectionRatios {
    pub fn new(lambda_w: f64, lambda_k: f64) -> Result<Self> {
        check_ratio("lambda_w", lambda_w)?;
        check_ratio("lambda_k", lambda_k)?;
        Ok(Self { lambda_w, lambda_k })
    }

    /// Ratios from an absolute per-word topic budget `lambda_k * K`, capped at `K`.
    pub fn with_topic_budget(lambda_w: f64, topics_per_word: usize, num_topics: usize) -> Result<Self> {
        if topics_per_word == 0 || num_topics == 0 {
            return Err(Error::Config("topic budget and K must be at least 1".into()));
        }
        Self::new(lambda_w, topics_per_word.min(num_topics) as f64 / num_topics as f64)
    }

    pub fn full() -> Self {
        Self {
            lambda_w: 1.0,
            lambda_k: 1.0,
        }
    }

    pub fn is_full(&self) -> bool {
        self.lambda_w >= 1.0 && self.lambda_k >= 1.0
    }
}

/// `max(1, round_half_up(ratio * n))`, capped at `n`.
pub fn selection_size(ratio: f64, n: usize) -> usize {
    ((ratio * n as f64 + 0.5 + 1e-9).floor() as usize).clamp(1, n.max(1))
}

/// Descending by value, ascending by index on ties.
fn rank_order<T: Real>(values: &[T]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| {
        values[b]
            .as_f64()
            .total_cmp(&values[a].as_f64())
            .then(a.cmp(&b))
    }
}

/// Indices of the `count` largest values (ties to the lower index), ascending.
/// Uses an O(n) selection, not a full sort.
pub(crate) fn top_indices<T: Real>(values: &[T], count: usize) -> Vec<usize> {
    let count = count.min(values.len());
    let mut idx: Vec<usize> = (0..values.len()).collect();
    if count < idx.len() && count > 0 {
        idx.select_nth_unstable_by(count - 1, rank_order(values));
    }
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

/// Column sums `r_w = sum_k r_w(k)`.
pub fn word_residual_totals<T: Real>(global: &GlobalStats<T>) -> Vec<T> {
    global
        .residual_values()
        .chunks_exact(global.num_topics())
        .map(|row| row.iter().copied().sum())
        .collect()
}

pub fn select_power_words<T: Real>(word_residuals: &[T], lambda_w: f64) -> Result<Vec<usize>> {
    check_ratio("lambda_w", lambda_w)?;
    if word_residuals.is_empty() {
        return Ok(Vec::new());
    }
    Ok(top_indices(word_residuals, selection_size(lambda_w, word_residuals.len())))
}

/// For each power word, its `max(1, round(lambda_k K))` highest-residual topics.
pub fn select_power_topics<T: Real>(
    global: &GlobalStats<T>,
    power_words: &[usize],
    lambda_k: f64,
) -> Result<Vec<Vec<usize>>> {
    check_ratio("lambda_k", lambda_k)?;
    if power_words.is_empty() {
        return Err(Error::Domain("power topic selection needs at least one power word".into()));
    }
    let count = selection_size(lambda_k, global.num_topics());
    Ok(power_words
        .iter()
        .map(|&w| top_indices(global.residual_row(w), count))
        .collect())
}

/// Power words and, per power word, its power topics, for one iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSet {
    pub iteration: u32,
    words: Vec<usize>,
    topics: Vec<Vec<usize>>,
    slot: Vec<u32>,
}

const NOT_SELECTED: u32 = u32::MAX;

impl PowerSet {
    fn build(iteration: u32, vocab_size: usize, words: Vec<usize>, topics: Vec<Vec<usize>>) -> Self {
        let mut slot = vec![NOT_SELECTED; vocab_size];
        for (i, &w) in words.iter().enumerate() {
            slot[w] = i as u32;
        }
        Self {
            iteration,
            words,
            topics,
            slot,
        }
    }

    /// Every word with every topic.
    pub fn full(iteration: u32, num_topics: usize, vocab_size: usize) -> Self {
        let all: Vec<usize> = (0..num_topics).collect();
        Self::build(
            iteration,
            vocab_size,
            (0..vocab_size).collect(),
            vec![all; vocab_size],
        )
    }

    /// Two-step selection from the synchronized residual matrix.
    pub fn select<T: Real>(global: &GlobalStats<T>, ratios: &SelectionRatios, iteration: u32) -> Result<Self> {
        let words = select_power_words(&word_residual_totals(global), ratios.lambda_w)?;
        let topics = select_power_topics(global, &words, ratios.lambda_k)?;
        Ok(Self::build(iteration, global.vocab_size(), words, topics))
    }

    pub fn words(&self) -> &[usize] {
        &self.words
    }

    /// Power topics of `w`, or `None` when `w` is not a power word.
    #[inline]
    pub fn topics_for(&self, w: usize) -> Option<&[usize]> {
        match self.slot.get(w) {
            Some(&s) if s != NOT_SELECTED => Some(&self.topics[s as usize]),
            _ => None,
        }
    }

    pub fn contains(&self, w: usize, k: usize) -> bool {
        self.topics_for(w).is_some_and(|t| t.binary_search(&k).is_ok())
    }

    /// Number of `(w, k)` cells covered.
    pub fn num_cells(&self) -> usize {
        self.topics.iter().map(Vec::len).sum()
    }

    /// Covered cells in `(w, k)` order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.words
            .iter()
            .zip(&self.topics)
            .flat_map(|(&w, ks)| ks.iter().map(move |&k| (w, k)))
    }
}
