use std::path::PathBuf;

use clap::Args;
use pobp::report::{read_residual_trace, read_word_residuals};
use pobp::scheduler::{powerlaw_topshare, spearman, write_rank_curve_csv, write_topshare_csv};
use pobp::Result;

use crate::train::create_dir;

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Per-word residual checkpoint (`word_id,residual`).
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Residual trace with perplexity checkpoints, for the co-trend statistic.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2])]
    pub fractions: Vec<f64>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

pub fn run(args: DiagnoseArgs) -> Result<()> {
    let residuals = read_word_residuals(&args.checkpoint)?;
    if residuals.iter().all(|&r| r == 0.0) {
        println!("converged: total residual is zero, nothing to rank");
        return Ok(());
    }
    let share = powerlaw_topshare(&residuals, &args.fractions)?;
    create_dir(&args.out_dir)?;
    let rank_path = args.out_dir.join("rank_curve.csv");
    let share_path = args.out_dir.join("topshare.csv");
    write_rank_curve_csv(&rank_path, &share)?;
    write_topshare_csv(&share_path, &share)?;
    println!("words {}", residuals.len());
    for (f, s) in &share.shares {
        println!("top_share {f} {s:.6}");
    }
    if let Some(trace) = &args.trace {
        let (res, ppl): (Vec<f64>, Vec<f64>) = read_residual_trace(trace)?
            .iter()
            .filter_map(|r| r.perplexity.map(|p| (r.mean_residual, p)))
            .unzip();
        if res.len() >= 2 {
            println!("checkpoints {}", res.len());
            println!("spearman {:.6}", spearman(&res, &ppl)?);
        } else {
            println!("checkpoints {} (too few for a rank correlation)", res.len());
        }
    }
    println!("rank_curve {}", rank_path.display());
    println!("topshare {}", share_path.display());
    Ok(())
}
