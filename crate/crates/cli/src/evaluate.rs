use std::path::PathBuf;

use clap::Args;
use pobp::corpus::split_train_test;
use pobp::inference::{fold_in_corpus, predictive_perplexity, Hyperparams, TopicWordDist};
use pobp::{model_io, Error, Result};

use crate::train::{create_dir, load_corpus, write_json, ConfigArgs};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Raw topic-word statistics written by `train` (phi_hat.bin).
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn run(args: EvaluateArgs) -> Result<()> {
    let stats = model_io::load_phi_hat::<f64>(&args.model)?;
    let mut overrides = args.config.clone();
    overrides.num_topics = Some(stats.num_topics());
    let config = overrides.resolve()?;
    let corpus = load_corpus(&config)?;
    if corpus.vocab_size() != stats.vocab_size() {
        return Err(Error::DimensionMismatch {
            expected: format!("W={} (model {})", stats.vocab_size(), args.model.display()),
            found: format!("W={} (corpus)", corpus.vocab_size()),
        });
    }
    if config.test_fraction <= 0.0 {
        return Err(Error::Config("evaluation needs test_fraction > 0".into()));
    }
    let hyper = Hyperparams::new(config.alpha(), config.beta, stats.num_topics())?;
    let phi = TopicWordDist::from_stats(&stats, config.beta);
    let split = split_train_test(&corpus, config.test_fraction, config.seed)?;
    let (theta, empty) = fold_in_corpus(&split.train, &phi, &hyper, config.fold_in_iters, config.seed)?;
    let perplexity = predictive_perplexity(&split.test, &theta, &phi)?;

    create_dir(&config.out_dir)?;
    let path = config.out_dir.join("evaluation.json");
    write_json(
        &path,
        &serde_json::json!({
            "model": args.model.display().to_string(),
            "num_topics": stats.num_topics(),
            "vocab_size": stats.vocab_size(),
            "test_fraction": config.test_fraction,
            "fold_in_iters": config.fold_in_iters,
            "seed": config.seed,
            "held_out_tokens": split.test.num_tokens(),
            "documents_without_fold_in_tokens": empty,
            "perplexity": perplexity,
        }),
    )?;
    println!("perplexity {perplexity:.6}");
    println!("held_out_tokens {}", split.test.num_tokens());
    println!("report {}", path.display());
    Ok(())
}
