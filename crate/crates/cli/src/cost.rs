use clap::Args;
use pobp::cluster::{cost_model, render_cost_model, CostModelInput, CostParams};
use pobp::{Error, Result};

/// Defaults reproduce the large-scale worked example: 1000 processors,
/// 500 mini-batches of 100 iterations, K = 2000, W = 141,043.
#[derive(Debug, Args)]
pub struct CostArgs {
    /// Overall computation cost; with `--b`, skips the complexity table.
    #[arg(long, requires = "b")]
    pub a: Option<f64>,
    /// Per-processor communication cost.
    #[arg(long, requires = "a")]
    pub b: Option<f64>,
    #[arg(long, default_value_t = 2000.0)]
    pub num_topics: f64,
    #[arg(long, default_value_t = 141_043.0)]
    pub vocab_size: f64,
    #[arg(long, default_value_t = 8.2e6)]
    pub num_docs: f64,
    #[arg(long, default_value_t = 500.0)]
    pub num_minibatches: f64,
    #[arg(long, default_value_t = 100.0)]
    pub iterations: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub num_workers: f64,
    #[arg(long, default_value_t = 0.1)]
    pub lambda_w: f64,
    #[arg(long, default_value_t = 50.0)]
    pub lambda_k_times_k: f64,
    /// Fraction of non-zero cells: NNZ = eta W D.
    #[arg(long, default_value_t = 1e-3)]
    pub eta: f64,
    /// Tokens per cell: tokens = eta' W D.
    #[arg(long, default_value_t = 1e-2)]
    pub eta_tokens: f64,
    /// Iterations of the batch comparison.
    #[arg(long, default_value_t = 500.0)]
    pub batch_iterations: f64,
    #[arg(long, default_value_t = 8.0)]
    pub bytes_per_entry: f64,
}

pub fn run(args: CostArgs) -> Result<()> {
    let input = match (args.a, args.b) {
        (Some(a), Some(b)) => CostModelInput::Direct { a, b },
        _ => CostModelInput::Table(CostParams {
            num_topics: args.num_topics,
            vocab_size: args.vocab_size,
            num_docs: args.num_docs,
            num_minibatches: args.num_minibatches,
            iterations: args.iterations,
            num_workers: args.num_workers,
            lambda_k: (args.lambda_k_times_k / args.num_topics).min(1.0),
            lambda_w: args.lambda_w,
            eta: args.eta,
            eta_tokens: args.eta_tokens,
            batch_iterations: args.batch_iterations,
            bytes_per_entry: args.bytes_per_entry,
        }),
    };
    // every flag is user input, so a rejected value is a configuration error
    let out = cost_model(&input).map_err(|e| match e {
        Error::Domain(msg) => Error::Config(msg),
        other => other,
    })?;
    print!("{}", render_cost_model(&out));
    Ok(())
}
