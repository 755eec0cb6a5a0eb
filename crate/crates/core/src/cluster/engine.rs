//! Coordinator loop: mini-batches streamed through sharded workers with
//! barrier synchronization after every sweep.

use std::time::Instant;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use super::ledger::{CommLedger, LedgerSummary};
use super::sync::{broadcast, merge_payloads, record_exchange, SyncScope};
use super::wire::SyncPayload;
use super::worker::{SweepStats, WorkerState};
use crate::corpus::{make_minibatches, shard_documents, MiniBatch, SparseCorpus};
use crate::error::{Error, Result};
use crate::inference::{
    fold_in_corpus, mean_residual, predictive_perplexity, GlobalStats, Hyperparams, StorageMeter, TopicWordDist,
};
use crate::scalar::Real;
use crate::scheduler::{PowerSet, SelectionRatios};

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig<T> {
    pub hyper: Hyperparams<T>,
    pub ratios: SelectionRatios,
    pub num_workers: usize,
    /// Stop a mini-batch once the mean residual per token drops below this.
    pub epsilon: f64,
    pub max_iterations: u32,
    pub minibatch_target_nnz: usize,
    pub seed: u64,
    /// Run workers on separate threads; the sequential schedule gives
    /// identical results.
    pub threaded: bool,
}

impl<T: Real> EngineConfig<T> {
    /// Defaults: `alpha = 2/K`, `beta = 0.01`, full synchronization, one
    /// worker, `epsilon = 1e-3`, at most 200 iterations, 45,000 nnz per batch.
    pub fn new(num_topics: usize) -> Result<Self> {
        Ok(Self {
            hyper: Hyperparams::standard(num_topics)?,
            ratios: SelectionRatios::full(),
            num_workers: 1,
            epsilon: 1e-3,
            max_iterations: 200,
            minibatch_target_nnz: 45_000,
            seed: 0,
            threaded: true,
        })
    }

    pub fn validate(&self) -> Result<()> {
        Hyperparams::new(self.hyper.alpha, self.hyper.beta, self.hyper.num_topics)?;
        SelectionRatios::new(self.ratios.lambda_w, self.ratios.lambda_k)?;
        if self.num_workers == 0 {
            return Err(Error::Config("number of workers must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max iterations must be at least 1".into()));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::Config(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        if self.minibatch_target_nnz == 0 {
            return Err(Error::Config("mini-batch target NNZ must be at least 1".into()));
        }
        Ok(())
    }
}

/// Held-out evaluation: fold-in on `fold_in` with the current topics, then
/// predictive perplexity on `held_out` (same documents, disjoint tokens).
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub fold_in: SparseCorpus,
    pub held_out: SparseCorpus,
    pub iters: usize,
    pub seed: u64,
    /// Also evaluate inside each mini-batch at `t = 1` and every this many
    /// iterations, plus the last one.
    pub every_iterations: Option<u32>,
}

impl Evaluation {
    pub fn perplexity<T: Real>(&self, stats: &GlobalStats<T>, hyper: &Hyperparams<T>) -> Result<f64> {
        let phi = TopicWordDist::from_stats(stats, hyper.beta);
        let (theta, _) = fold_in_corpus(&self.fold_in, &phi, hyper, self.iters, self.seed)?;
        predictive_perplexity(&self.held_out, &theta, &phi)
    }

    fn due(&self, t: u32, last: bool) -> bool {
        match self.every_iterations {
            Some(e) if e > 0 => t == 1 || t.is_multiple_of(e) || last,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationMetrics {
    pub m: usize,
    pub t: u32,
    pub mean_residual: f64,
    pub entries_swept: u64,
    /// Cells exchanged per worker (each cell is two wire records).
    pub synced_cells: u64,
    pub up_bytes: u64,
    pub down_bytes: u64,
    pub compute_secs: f64,
    pub sync_secs: f64,
    pub perplexity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchMetrics {
    pub m: usize,
    pub docs: usize,
    pub nnz: usize,
    pub tokens: u64,
    pub iterations: u32,
    pub converged: bool,
    pub final_mean_residual: f64,
    /// Message plus document-statistics bytes across all workers.
    pub storage_bytes: usize,
    pub perplexity: Option<f64>,
}

/// What an observer sees at each barrier, after the merge.
#[derive(Debug)]
pub struct BarrierView<'a, T> {
    pub m: usize,
    pub t: u32,
    pub stats: &'a GlobalStats<T>,
    pub mean_residual: f64,
    pub workers: &'a [WorkerState<T>],
}

pub trait BarrierObserver<T> {
    fn on_barrier(&mut self, view: &BarrierView<'_, T>) -> Result<()>;
}

impl<T, F> BarrierObserver<T> for F
where
    F: FnMut(&BarrierView<'_, T>) -> Result<()>,
{
    fn on_barrier(&mut self, view: &BarrierView<'_, T>) -> Result<()> {
        self(view)
    }
}

/// Optional instrumentation for [`run_minibatch`].
#[derive(Default)]
pub struct Hooks<'a, T> {
    pub meter: Option<&'a StorageMeter>,
    pub evaluation: Option<&'a Evaluation>,
    pub observer: Option<&'a mut dyn BarrierObserver<T>>,
}

#[derive(Debug)]
pub struct MinibatchOutcome<T> {
    pub stats: GlobalStats<T>,
    pub iterations: Vec<IterationMetrics>,
    pub batch: BatchMetrics,
}

fn on_workers<T: Real, R: Send>(
    workers: &mut [WorkerState<T>],
    threaded: bool,
    f: impl Fn(&mut WorkerState<T>) -> Result<R> + Sync,
) -> Vec<(u32, Result<R>)> {
    if threaded && workers.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = workers
                .iter_mut()
                .map(|w| {
                    let id = w.worker_id();
                    (id, s.spawn(|| f(w)))
                })
                .collect();
            handles
                .into_iter()
                .map(|(id, h)| {
                    let r = h
                        .join()
                        .unwrap_or_else(|_| Err(Error::Domain("worker thread panicked".into())));
                    (id, r)
                })
                .collect()
        })
    } else {
        workers.iter_mut().map(|w| (w.worker_id(), f(w))).collect()
    }
}

fn worker_failure(m: usize, t: u32, worker: u32, e: Error) -> Error {
    match e {
        Error::Protocol { .. } | Error::WorkerFailed { .. } => e,
        other => Error::WorkerFailed {
            worker,
            minibatch: m,
            iteration: t,
            message: other.to_string(),
        },
    }
}

/// Process one mini-batch to convergence.
///
/// Iteration 1 sweeps every entry and synchronizes both full matrices.
/// Later iterations sweep only entries of power words, on their power
/// topics, and synchronize only those cells; the power set is re-selected
/// from the merged residuals after every barrier. The residual matrix starts
/// each mini-batch at zero.
pub fn run_minibatch<T: Real>(
    batch: &MiniBatch,
    mut global: GlobalStats<T>,
    config: &EngineConfig<T>,
    ledger: &mut CommLedger,
    mut hooks: Hooks<'_, T>,
) -> Result<MinibatchOutcome<T>> {
    config.validate()?;
    let (k_count, w_count) = (global.num_topics(), global.vocab_size());
    if k_count != config.hyper.num_topics {
        return Err(Error::DimensionMismatch {
            expected: format!("K={}", config.hyper.num_topics),
            found: format!("K={k_count}"),
        });
    }
    if let Some(e) = batch.entries.iter().find(|e| e.word as usize >= w_count) {
        return Err(Error::DimensionMismatch {
            expected: format!("word ids below W={w_count}"),
            found: format!("word {}", e.word + 1),
        });
    }
    let m = batch.index;
    let tokens = batch.num_tokens();
    global.reset_residual();

    let shards = shard_documents(batch, config.num_workers)?;
    let mut workers: Vec<WorkerState<T>> = {
        let base = &global;
        let meter = hooks.meter;
        let results: Vec<Result<WorkerState<T>>> = if config.threaded && shards.len() > 1 {
            std::thread::scope(|s| {
                let handles: Vec<_> = shards
                    .into_iter()
                    .map(|sh| s.spawn(move || WorkerState::new(sh, base, config.seed, meter)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().unwrap_or_else(|_| Err(Error::Domain("worker thread panicked".into()))))
                    .collect()
            })
        } else {
            shards
                .into_iter()
                .map(|sh| WorkerState::new(sh, base, config.seed, meter))
                .collect()
        };
        results
            .into_iter()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| worker_failure(m, 0, i as u32 + 1, e)))
            .collect::<Result<_>>()?
    };
    let storage_bytes = workers.iter().map(WorkerState::storage_bytes).sum();

    let mut iterations = Vec::new();
    let mut power: Option<PowerSet> = None;
    let converged;
    let last_mean;
    let mut t = 1u32;
    loop {
        let scope = match &power {
            Some(p) => SyncScope::Power(p),
            None => SyncScope::Full,
        };
        let started = Instant::now();
        let base = &global;
        let hyper = &config.hyper;
        let results = on_workers(&mut workers, config.threaded, |w| -> Result<(SweepStats, SyncPayload<T>)> {
            let stats = w.sweep(base, scope, hyper, t == 1)?;
            let payload = w.upload(base, scope, t)?;
            Ok((stats, payload))
        });
        let mut payloads = Vec::with_capacity(results.len());
        let mut swept = 0u64;
        for (id, r) in results {
            let (stats, payload) = r.map_err(|e| worker_failure(m, t, id, e))?;
            swept += stats.entries_swept;
            if stats.degenerate_updates > 0 {
                debug!("worker {id}: {} degenerate message updates at m={m}, t={t}", stats.degenerate_updates);
            }
            payloads.push(payload);
        }
        let compute_secs = started.elapsed().as_secs_f64();

        let started = Instant::now();
        let merged = merge_payloads(&global, &payloads, scope)?;
        let bytes_before = ledger.total_bytes();
        record_exchange(ledger, &payloads, &merged, scope, m, t);
        let up_bytes: u64 = payloads.iter().map(|p| p.byte_size() as u64).sum();
        let down_bytes = ledger.total_bytes() - bytes_before - up_bytes;
        let full = scope.is_full();
        for w in workers.iter_mut() {
            let down = broadcast(&merged, scope, t, w.worker_id());
            w.receive(&global, &down, full);
        }
        let synced_cells = scope.num_cells(k_count, w_count) as u64;
        global = merged;
        let sync_secs = started.elapsed().as_secs_f64();

        let mean = if tokens > 0 { mean_residual(&global, tokens)?.as_f64() } else { 0.0 };
        let done_converged = mean < config.epsilon;
        let last = done_converged || t >= config.max_iterations;
        let perplexity = match hooks.evaluation {
            Some(ev) if ev.due(t, last) => Some(ev.perplexity(&global, &config.hyper)?),
            _ => None,
        };
        if let Some(obs) = hooks.observer.as_deref_mut() {
            obs.on_barrier(&BarrierView {
                m,
                t,
                stats: &global,
                mean_residual: mean,
                workers: &workers,
            })?;
        }
        iterations.push(IterationMetrics {
            m,
            t,
            mean_residual: mean,
            entries_swept: swept,
            synced_cells,
            up_bytes,
            down_bytes,
            compute_secs,
            sync_secs,
            perplexity,
        });
        debug!("m={m} t={t} mean_residual={mean:.6} swept={swept} cells={synced_cells}");
        if last {
            converged = done_converged;
            last_mean = mean;
            break;
        }
        power = if config.ratios.is_full() {
            None
        } else {
            Some(PowerSet::select(&global, &config.ratios, t + 1)?)
        };
        t += 1;
    }
    drop(workers);

    let perplexity = match hooks.evaluation {
        Some(ev) => match iterations.last().and_then(|i| i.perplexity) {
            Some(p) => Some(p),
            None => Some(ev.perplexity(&global, &config.hyper)?),
        },
        None => None,
    };
    info!(
        "mini-batch {m}: {} docs, {} iterations, mean residual {last_mean:.3e}{}",
        batch.doc_ids.len(),
        t,
        perplexity.map(|p| format!(", perplexity {p:.2}")).unwrap_or_default()
    );
    Ok(MinibatchOutcome {
        stats: global,
        iterations,
        batch: BatchMetrics {
            m,
            docs: batch.doc_ids.len(),
            nnz: batch.nnz(),
            tokens,
            iterations: t,
            converged,
            final_mean_residual: last_mean,
            storage_bytes,
            perplexity,
        },
    })
}

/// Learned model: raw statistics and their smoothed normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<T> {
    pub phi_hat: GlobalStats<T>,
    pub phi: TopicWordDist<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub num_topics: usize,
    pub vocab_size: usize,
    pub num_workers: usize,
    pub minibatches: Vec<BatchMetrics>,
    pub iterations: Vec<IterationMetrics>,
    pub ledger: LedgerSummary,
    /// Highest simultaneous message plus document-statistics bytes.
    pub peak_storage_bytes: usize,
    pub compute_secs: f64,
    pub sync_secs: f64,
}

#[derive(Debug)]
pub struct RunOutput<T> {
    pub model: TrainedModel<T>,
    pub report: RunReport,
    pub ledger: CommLedger,
}

/// Streaming trainer that threads the global statistics through successive
/// mini-batches. Only one mini-batch's worker state is alive at a time.
pub struct Pobp<T> {
    config: EngineConfig<T>,
    stats: GlobalStats<T>,
    ledger: CommLedger,
    meter: StorageMeter,
    evaluation: Option<Evaluation>,
    batches: Vec<BatchMetrics>,
    iterations: Vec<IterationMetrics>,
}

impl<T: Real> Pobp<T> {
    pub fn new(config: EngineConfig<T>, vocab_size: usize) -> Result<Self> {
        config.validate()?;
        if vocab_size == 0 {
            return Err(Error::Config("vocabulary must not be empty".into()));
        }
        let k = config.hyper.num_topics;
        Ok(Self {
            stats: GlobalStats::zeros(k, vocab_size),
            ledger: CommLedger::new(k, vocab_size),
            meter: StorageMeter::new(),
            evaluation: None,
            batches: Vec::new(),
            iterations: Vec::new(),
            config,
        })
    }

    pub fn with_evaluation(mut self, evaluation: Evaluation) -> Self {
        self.evaluation = Some(evaluation);
        self
    }

    pub fn config(&self) -> &EngineConfig<T> {
        &self.config
    }

    pub fn stats(&self) -> &GlobalStats<T> {
        &self.stats
    }

    pub fn ledger(&self) -> &CommLedger {
        &self.ledger
    }

    pub fn meter(&self) -> &StorageMeter {
        &self.meter
    }

    pub fn batches(&self) -> &[BatchMetrics] {
        &self.batches
    }

    pub fn process(&mut self, batch: &MiniBatch) -> Result<&BatchMetrics> {
        self.process_observed(batch, None)
    }

    pub fn process_observed(
        &mut self,
        batch: &MiniBatch,
        observer: Option<&mut dyn BarrierObserver<T>>,
    ) -> Result<&BatchMetrics> {
        let stats = std::mem::replace(&mut self.stats, GlobalStats::zeros(0, 0));
        let hooks = Hooks {
            meter: Some(&self.meter),
            evaluation: self.evaluation.as_ref(),
            observer: observer.map(|o| o as &mut dyn BarrierObserver<T>),
        };
        let outcome = run_minibatch(batch, stats, &self.config, &mut self.ledger, hooks)?;
        outcome.stats.check_consistency(1e-6)?;
        self.stats = outcome.stats;
        self.iterations.extend(outcome.iterations);
        self.batches.push(outcome.batch);
        Ok(self.batches.last().expect("just pushed"))
    }

    pub fn finish(self) -> RunOutput<T> {
        let phi = TopicWordDist::from_stats(&self.stats, self.config.hyper.beta);
        let mut phi_hat = self.stats;
        phi_hat.reset_residual();
        let report = RunReport {
            num_topics: phi_hat.num_topics(),
            vocab_size: phi_hat.vocab_size(),
            num_workers: self.config.num_workers,
            ledger: self.ledger.summary(),
            peak_storage_bytes: self.meter.peak(),
            compute_secs: self.iterations.iter().map(|i| i.compute_secs).sum(),
            sync_secs: self.iterations.iter().map(|i| i.sync_secs).sum(),
            minibatches: self.batches,
            iterations: self.iterations,
        };
        RunOutput {
            model: TrainedModel { phi_hat, phi },
            report,
            ledger: self.ledger,
        }
    }
}

/// Train on `corpus`: split into mini-batches and stream them through
/// [`Pobp`], starting from an all-zero `phi_hat`.
pub fn run_pobp<T: Real>(
    corpus: &SparseCorpus,
    config: &EngineConfig<T>,
    evaluation: Option<Evaluation>,
) -> Result<RunOutput<T>> {
    run_pobp_observed(corpus, config, evaluation, None)
}

pub fn run_pobp_observed<T: Real>(
    corpus: &SparseCorpus,
    config: &EngineConfig<T>,
    evaluation: Option<Evaluation>,
    mut observer: Option<&mut dyn BarrierObserver<T>>,
) -> Result<RunOutput<T>> {
    let batches = make_minibatches(corpus, config.minibatch_target_nnz)?;
    if batches.is_empty() {
        return Err(Error::Config("corpus produced no mini-batches".into()));
    }
    let mut engine = Pobp::new(config.clone(), corpus.vocab_size())?;
    if let Some(ev) = evaluation {
        engine = engine.with_evaluation(ev);
    }
    for batch in &batches {
        engine.process_observed(batch, observer.as_mut().map(|o| &mut **o as &mut dyn BarrierObserver<T>))?;
    }
    Ok(engine.finish())
}
