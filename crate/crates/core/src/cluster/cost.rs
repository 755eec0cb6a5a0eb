//! Analytic cost model: overall cost `A/N + B N`, its optimum, the
//! per-algorithm complexity rows and communication-volume projections.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Corpus and run sizes for the complexity formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    pub num_topics: f64,
    pub vocab_size: f64,
    pub num_docs: f64,
    pub num_minibatches: f64,
    /// Iterations per mini-batch, `T`.
    pub iterations: f64,
    pub num_workers: f64,
    pub lambda_k: f64,
    pub lambda_w: f64,
    /// Non-zero density: `NNZ = eta * W * D`.
    pub eta: f64,
    /// Token density: `tokens = eta' * W * D`.
    pub eta_tokens: f64,
    /// Iterations of a batch algorithm, `T'`.
    pub batch_iterations: f64,
    pub bytes_per_entry: f64,
}

impl CostParams {
    fn check(&self) -> Result<()> {
        let fields = [
            ("K", self.num_topics),
            ("W", self.vocab_size),
            ("D", self.num_docs),
            ("M", self.num_minibatches),
            ("T", self.iterations),
            ("N", self.num_workers),
            ("lambda_k", self.lambda_k),
            ("lambda_w", self.lambda_w),
            ("eta", self.eta),
            ("eta'", self.eta_tokens),
            ("T'", self.batch_iterations),
            ("bytes_per_entry", self.bytes_per_entry),
        ];
        for (name, v) in fields {
            positive(name, v)?;
        }
        if self.lambda_k > 1.0 || self.lambda_w > 1.0 {
            return Err(Error::Domain("selection ratios must not exceed 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CostModelInput {
    /// Overall computation cost `A` and per-processor communication cost `B`.
    Direct { a: f64, b: f64 },
    Table(CostParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmCost {
    pub algorithm: String,
    pub computation: f64,
    pub memory: f64,
    /// `None` where the algorithm does not communicate.
    pub communication: Option<f64>,
}

/// Communication volume forecasts in matrix entries and bytes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeProjection {
    /// `N M T K W`.
    pub online_entries: f64,
    pub online_bytes: f64,
    /// `N T' K W`.
    pub batch_entries: f64,
    pub batch_bytes: f64,
    /// `lambda_k lambda_w N M T K W`.
    pub power_entries: f64,
    pub power_bytes: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModelOutput {
    pub a: f64,
    pub b: f64,
    pub n_star: f64,
    pub min_overall_cost: f64,
    pub rows: Vec<AlgorithmCost>,
    pub projection: Option<VolumeProjection>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `A / N + B N`.
pub fn overall_cost(a: f64, b: f64, n: f64) -> Result<f64> {
    positive("A", a)?;
    positive("B", b)?;
    positive("N", n)?;
    Ok(a / n + b * n)
}

pub fn cost_model(input: &CostModelInput) -> Result<CostModelOutput> {
    let (a, b, rows, projection) = match *input {
        CostModelInput::Direct { a, b } => (a, b, Vec::new(), None),
        CostModelInput::Table(p) => {
            p.check()?;
            let (k, w, d, m, t, n) = (
                p.num_topics,
                p.vocab_size,
                p.num_docs,
                p.num_minibatches,
                p.iterations,
                p.num_workers,
            );
            let lam = p.lambda_k * p.lambda_w;
            let a = p.eta * lam * k * w * d * t;
            let b = lam * k * w * m * t;
            let rows = vec![
                AlgorithmCost {
                    algorithm: "POBP".into(),
                    computation: a / n,
                    memory: k * (p.eta * w * d + d) / (m * n) + 2.0 * k * w,
                    communication: Some(lam * k * w * m * n * t),
                },
                AlgorithmCost {
                    algorithm: "OBP".into(),
                    computation: a,
                    memory: k * (p.eta * w * d + d) / m + 2.0 * k * w,
                    communication: None,
                },
                AlgorithmCost {
                    algorithm: "PGS".into(),
                    computation: p.eta_tokens * k * w * d * p.batch_iterations / n,
                    memory: (k * d + p.eta_tokens * w * d) / n + k * w,
                    communication: Some(n * k * w * p.batch_iterations),
                },
            ];
            let online = n * m * t * k * w;
            let batch = n * p.batch_iterations * k * w;
            let projection = VolumeProjection {
                online_entries: online,
                online_bytes: online * p.bytes_per_entry,
                batch_entries: batch,
                batch_bytes: batch * p.bytes_per_entry,
                power_entries: lam * online,
                power_bytes: lam * online * p.bytes_per_entry,
            };
            (a, b, rows, Some(projection))
        }
    };
    positive("A", a)?;
    positive("B", b)?;
    Ok(CostModelOutput {
        a,
        b,
        n_star: (a / b).sqrt(),
        min_overall_cost: 2.0 * (a * b).sqrt(),
        rows,
        projection,
    })
}

/// Human-readable byte count with decimal units.
pub fn format_bytes(bytes: f64) -> String {
    const UNITS: [&str; 7] = ["B", "KB", "MB", "GB", "TB", "PB", "EB"];
    let mut v = bytes;
    let mut unit = 0;
    while v.abs() >= 1000.0 && unit + 1 < UNITS.len() {
        v /= 1000.0;
        unit += 1;
    }
    format!("{v:.3} {}", UNITS[unit])
}

pub fn render(out: &CostModelOutput) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "A (computation)        {:.6e}", out.a);
    let _ = writeln!(s, "B (communication/proc) {:.6e}", out.b);
    let _ = writeln!(s, "N*                     {:.6}", out.n_star);
    let _ = writeln!(s, "min overall cost       {:.6e}", out.min_overall_cost);
    if !out.rows.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<6} {:>14} {:>14} {:>14}", "algo", "computation", "memory", "communication");
        for r in &out.rows {
            let comm = r.communication.map(|c| format!("{c:.6e}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(s, "{:<6} {:>14.6e} {:>14.6e} {:>14}", r.algorithm, r.computation, r.memory, comm);
        }
    }
    if let Some(p) = &out.projection {
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "full online sync  {:.4e} entries  {}",
            p.online_entries,
            format_bytes(p.online_bytes)
        );
        let _ = writeln!(
            s,
            "batch sync        {:.4e} entries  {}",
            p.batch_entries,
            format_bytes(p.batch_bytes)
        );
        let _ = writeln!(
            s,
            "power sync        {:.4e} entries  {}",
            p.power_entries,
            format_bytes(p.power_bytes)
        );
    }
    s
}
