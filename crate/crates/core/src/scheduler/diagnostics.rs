//! Power-law diagnostics over word residual totals.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct TopShare {
    /// `(fraction, share of total residual held by the top round(fraction W) words)`.
    pub shares: Vec<(f64, f64)>,
    /// `(rank, word index, residual)` in descending residual order, rank from 1.
    pub rank_curve: Vec<(usize, usize, f64)>,
}

pub fn powerlaw_topshare<T: Real>(word_residuals: &[T], fractions: &[f64]) -> Result<TopShare> {
    let values: Vec<f64> = word_residuals.iter().map(|v| v.as_f64()).collect();
    let total: f64 = values.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::Domain("total residual is zero; nothing to rank".into()));
    }
    if let Some(f) = fractions.iter().find(|f| !(**f >= 0.0 && **f <= 1.0)) {
        return Err(Error::Config(format!("share fraction must lie in [0, 1], got {f}")));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut prefix = Vec::with_capacity(values.len() + 1);
    prefix.push(0.0);
    for &w in &order {
        prefix.push(prefix.last().copied().unwrap_or(0.0) + values[w]);
    }
    let shares = fractions
        .iter()
        .map(|&f| {
            let n = ((f * values.len() as f64) + 0.5 + 1e-9).floor() as usize;
            (f, prefix[n.min(values.len())] / total)
        })
        .collect();
    let rank_curve = order
        .iter()
        .enumerate()
        .map(|(i, &w)| (i + 1, w, values[w]))
        .collect();
    Ok(TopShare { shares, rank_curve })
}

/// CSV `rank,word_id,residual` (1-based word ids).
pub fn write_rank_curve_csv(path: &Path, share: &TopShare) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rank", "word_id", "residual"])?;
    for &(rank, word, r) in &share.rank_curve {
        w.write_record([rank.to_string(), (word + 1).to_string(), r.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// CSV `fraction,share`.
pub fn write_topshare_csv(path: &Path, share: &TopShare) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["fraction", "share"])?;
    for &(f, s) in &share.shares {
        w.write_record([f.to_string(), s.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &t in &idx[i..=j] {
            ranks[t] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::Domain(format!(
            "rank correlation needs two equal-length series of at least 2 points, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return Err(Error::Domain("rank correlation of a constant series is undefined".into()));
    }
    Ok(cov / (va * vb).sqrt())
}
