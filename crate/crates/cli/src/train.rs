use std::path::{Path, PathBuf};

use clap::Args;
use log::info;
use pobp::cluster::{run_pobp_observed, BarrierView, Evaluation};
use pobp::corpus::{load_uci_bow, load_uci_docword, split_train_test};
use pobp::scheduler::word_residual_totals;
use pobp::{model_io, report, Error, Result, RunConfig, SparseCorpus};

/// Command-line overrides; each beats the config file, which beats defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub docword: Option<PathBuf>,
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    #[arg(long)]
    pub vocab_keep: Option<usize>,
    #[arg(long)]
    pub num_topics: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda_w: Option<f64>,
    #[arg(long)]
    pub lambda_k_times_k: Option<usize>,
    #[arg(long)]
    pub minibatch_target_nnz: Option<usize>,
    #[arg(long)]
    pub num_workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<u32>,
    #[arg(long)]
    pub test_fraction: Option<f64>,
    #[arg(long)]
    pub fold_in_iters: Option<usize>,
    #[arg(long)]
    pub eval_every_iterations: Option<u32>,
    #[arg(long)]
    pub threaded: Option<bool>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            )*};
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    c.$field = Some(v.clone());
                }
            )*};
        }
        set!(
            num_topics,
            beta,
            lambda_w,
            lambda_k_times_k,
            minibatch_target_nnz,
            num_workers,
            seed,
            epsilon,
            max_iterations,
            test_fraction,
            fold_in_iters,
            threaded,
            out_dir
        );
        set_opt!(docword, vocab, vocab_keep, alpha, eval_every_iterations);
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
}

pub fn load_corpus(config: &RunConfig) -> Result<SparseCorpus> {
    let docword = config
        .docword
        .as_deref()
        .ok_or_else(|| Error::Config("no corpus given (set docword or pass --docword)".into()))?;
    let corpus = match &config.vocab {
        Some(v) => load_uci_bow(docword, v)?,
        None => load_uci_docword(docword)?,
    };
    match config.vocab_keep {
        Some(keep) => corpus.truncate_vocabulary(keep),
        None => Ok(corpus),
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Serde(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn run(args: TrainArgs) -> Result<()> {
    let config = args.config.resolve()?;
    let corpus = load_corpus(&config)?;
    info!(
        "corpus: {} docs, W={}, {} nnz, {} tokens",
        corpus.num_docs(),
        corpus.vocab_size(),
        corpus.nnz(),
        corpus.num_tokens()
    );
    let (train, evaluation) = if config.test_fraction > 0.0 {
        let split = split_train_test(&corpus, config.test_fraction, config.seed)?;
        let ev = Evaluation {
            fold_in: split.train.clone(),
            held_out: split.test,
            iters: config.fold_in_iters,
            seed: config.seed,
            every_iterations: config.eval_every_iterations,
        };
        (split.train, Some(ev))
    } else {
        (corpus, None)
    };
    let engine = config.engine_config::<f64>()?;

    // per-word residual totals at every barrier of the first mini-batch
    let mut first_batch = Vec::new();
    let mut observer = |v: &BarrierView<'_, f64>| -> Result<()> {
        if v.m == 1 {
            first_batch.push(word_residual_totals(v.stats));
        }
        Ok(())
    };
    let out = run_pobp_observed(&train, &engine, evaluation, Some(&mut observer))?;

    let dir = &config.out_dir;
    create_dir(dir)?;
    let paths = [
        ("phi_hat", "phi_hat.bin"),
        ("phi", "phi.bin"),
        ("ledger", "ledger.csv"),
        ("residual_trace", "residual_trace.csv"),
        ("residual_checkpoint", "residual_checkpoint.csv"),
        ("config", "config.toml"),
        ("report", "report.json"),
    ];
    let path = |key: &str| dir.join(paths.iter().find(|(k, _)| *k == key).expect("known artifact").1);
    model_io::save_phi_hat(&path("phi_hat"), &out.model.phi_hat)?;
    model_io::save_phi(&path("phi"), &out.model.phi)?;
    out.ledger.write_csv(&path("ledger"))?;
    report::write_residual_trace(&path("residual_trace"), &out.report.iterations)?;
    let midpoint = first_batch.len().div_ceil(2).max(1);
    let checkpoint = first_batch.get(midpoint - 1).cloned().unwrap_or_default();
    report::write_word_residuals(&path("residual_checkpoint"), &checkpoint)?;
    config.save(&path("config"))?;

    let artifacts: serde_json::Map<String, serde_json::Value> = paths
        .iter()
        .map(|(k, f)| (k.to_string(), serde_json::Value::String(dir.join(f).display().to_string())))
        .collect();
    let summary = &out.report.ledger;
    let final_perplexity = out.report.minibatches.last().and_then(|b| b.perplexity);
    let doc = serde_json::json!({
        "config": serde_json::to_value(&config).map_err(|e| Error::Serde(e.to_string()))?,
        "corpus": {
            "docs": train.num_docs(),
            "vocab_size": train.vocab_size(),
            "nnz": train.nnz(),
            "tokens": train.num_tokens(),
        },
        "final_perplexity": final_perplexity,
        "residual_checkpoint_iteration": midpoint,
        "report": serde_json::to_value(&out.report).map_err(|e| Error::Serde(e.to_string()))?,
        "artifacts": artifacts,
    });
    write_json(&path("report"), &doc)?;

    println!("mini_batches {}", out.report.minibatches.len());
    println!("iterations {}", out.report.iterations.len());
    println!("total_bytes {}", summary.total_bytes);
    println!("partial_full_ratio {:.6}", summary.partial_full_ratio);
    if let Some(p) = final_perplexity {
        println!("perplexity {p:.4}");
    }
    println!("out_dir {}", dir.display());
    Ok(())
}
