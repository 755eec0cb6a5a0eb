mod common;

use common::{desk_corpus, max_rel, micro_corpus, DenseObp};
use pobp::cluster::{
    run_minibatch, run_pobp, run_pobp_observed, BarrierView, CommLedger, Direction, EngineConfig, Hooks, Pobp,
};
use pobp::corpus::make_minibatches;
use pobp::inference::{GlobalStats, Hyperparams, StorageMeter};
use pobp::scheduler::SelectionRatios;
use pobp::{Error, SparseCorpus};

fn config(k: usize, workers: usize, seed: u64) -> EngineConfig<f64> {
    let mut c = EngineConfig::new(k).unwrap();
    c.num_workers = workers;
    c.seed = seed;
    c
}

fn barrier_trace(corpus: &SparseCorpus, cfg: &EngineConfig<f64>) -> Vec<Vec<f64>> {
    let mut trace = Vec::new();
    let mut obs = |v: &BarrierView<'_, f64>| -> pobp::Result<()> {
        trace.push(v.stats.phi_values().to_vec());
        Ok(())
    };
    run_pobp_observed(corpus, cfg, None, Some(&mut obs)).unwrap();
    trace
}

fn oracle_trace(corpus: &SparseCorpus, cfg: &EngineConfig<f64>) -> Vec<Vec<f64>> {
    let mut o = DenseObp::new(
        cfg.hyper.num_topics,
        corpus.vocab_size(),
        cfg.hyper.alpha,
        cfg.hyper.beta,
        cfg.seed,
    );
    o.epsilon = cfg.epsilon;
    o.max_iterations = cfg.max_iterations;
    o.run(corpus, cfg.minibatch_target_nnz);
    o.barriers.iter().map(|b| DenseObp::word_major(b)).collect()
}

#[test]
fn micro_fixture_matches_dense_reference() {
    let corpus = micro_corpus();
    let mut cfg = config(2, 1, 11);
    cfg.minibatch_target_nnz = 2;
    let got = barrier_trace(&corpus, &cfg);
    let want = oracle_trace(&corpus, &cfg);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!(max_rel(g, w) <= 1e-6, "{g:?} vs {w:?}");
    }
}

#[test]
fn small_corpus_matches_dense_reference_across_batches() {
    let corpus = desk_corpus(150, 120, 5, 3);
    let mut cfg = config(6, 1, 5);
    cfg.minibatch_target_nnz = common::target_for_batches(&corpus, 3);
    let got = barrier_trace(&corpus, &cfg);
    let want = oracle_trace(&corpus, &cfg);
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(&want) {
        assert!(max_rel(g, w) <= 1e-6);
    }
}

#[test]
fn merged_stats_do_not_depend_on_worker_count() {
    let corpus = desk_corpus(200, 150, 5, 8);
    let mut traces = Vec::new();
    for n in [1, 2, 4] {
        let mut cfg = config(5, n, 2);
        cfg.minibatch_target_nnz = corpus.nnz() / 2 + 1;
        traces.push(barrier_trace(&corpus, &cfg));
    }
    for t in &traces[1..] {
        assert_eq!(t.len(), traces[0].len());
        for (a, b) in t.iter().zip(&traces[0]) {
            assert!(max_rel(a, b) <= 1e-6);
        }
    }
}

#[test]
fn sequential_and_threaded_schedules_agree() {
    let corpus = desk_corpus(120, 100, 4, 9);
    let mut cfg = config(4, 3, 4);
    cfg.ratios = SelectionRatios::new(0.3, 0.5).unwrap();
    cfg.threaded = false;
    let a = run_pobp(&corpus, &cfg, None).unwrap();
    cfg.threaded = true;
    let b = run_pobp(&corpus, &cfg, None).unwrap();
    assert_eq!(a.model.phi_hat.phi_values(), b.model.phi_hat.phi_values());
    assert_eq!(a.ledger.records(), b.ledger.records());
}

#[test]
fn infinite_threshold_runs_one_full_sync() {
    let corpus = desk_corpus(60, 6, 3, 1);
    let mut cfg = config(4, 2, 1);
    cfg.epsilon = f64::INFINITY;
    cfg.ratios = SelectionRatios::new(0.5, 0.5).unwrap();
    let batch = &make_minibatches(&corpus, usize::MAX).unwrap()[0];
    let mut ledger = CommLedger::new(4, 6);
    let out = run_minibatch(batch, GlobalStats::zeros(4, 6), &cfg, &mut ledger, Hooks::default()).unwrap();
    assert_eq!(out.iterations.len(), 1);
    assert_eq!(ledger.records().len(), 4);
    for r in ledger.records() {
        assert_eq!(r.entries, 4 * 6 * 2);
        assert_eq!(r.bytes, 592);
    }
    for n in [1, 2] {
        for dir in [Direction::Up, Direction::Down] {
            assert_eq!(ledger.records().iter().filter(|r| r.n == n && r.direction == dir).count(), 1);
        }
    }
}

#[test]
fn power_iterations_respect_selection_bounds() {
    let corpus = desk_corpus(150, 200, 5, 21);
    let (k, w) = (8usize, corpus.vocab_size());
    let mut cfg = config(k, 2, 3);
    cfg.ratios = SelectionRatios::with_topic_budget(0.5, k / 2, k).unwrap();
    cfg.max_iterations = 12;
    cfg.epsilon = 0.0;
    let batch = &make_minibatches(&corpus, usize::MAX).unwrap()[0];
    let mut ledger = CommLedger::new(k, w);
    let out = run_minibatch(batch, GlobalStats::zeros(k, w), &cfg, &mut ledger, Hooks::default()).unwrap();
    assert_eq!(out.iterations.len(), 12);
    let full_swept = batch.nnz() as u64;
    assert_eq!(out.iterations[0].entries_swept, full_swept);
    let cell_bound = (w / 2) * (k / 2);
    for it in &out.iterations[1..] {
        // every entry of a power word is visited; power words are half the vocabulary
        assert!(it.entries_swept < full_swept);
        assert_eq!(it.synced_cells as usize, cell_bound);
    }
    for r in ledger.records().iter().filter(|r| r.t >= 2) {
        assert_eq!(r.entries as usize, 2 * cell_bound);
        assert_eq!(r.bytes as usize, 16 + 12 * 2 * cell_bound);
    }
}

#[test]
fn incremental_stats_equal_rebuild_from_messages() {
    let corpus = desk_corpus(100, 80, 4, 17);
    let mut cfg = config(5, 3, 6);
    cfg.ratios = SelectionRatios::new(0.25, 0.4).unwrap();
    cfg.max_iterations = 15;
    let batches = make_minibatches(&corpus, corpus.nnz() / 2 + 1).unwrap();
    let mut engine = Pobp::new(cfg, corpus.vocab_size()).unwrap();
    for batch in &batches {
        let before = engine.stats().phi_values().to_vec();
        let mut checked = 0;
        let mut obs = |v: &BarrierView<'_, f64>| -> pobp::Result<()> {
            let k = v.stats.num_topics();
            let mut rebuilt = before.clone();
            for worker in v.workers {
                for (i, e) in worker.shard().entries.iter().enumerate() {
                    for (t, mu) in worker.messages().message(i).iter().enumerate() {
                        rebuilt[e.word as usize * k + t] += e.count as f64 * mu;
                    }
                }
            }
            assert!(max_rel(v.stats.phi_values(), &rebuilt) < 1e-9);
            v.stats.check_consistency(1e-9)?;
            checked += 1;
            Ok(())
        };
        engine.process_observed(batch, Some(&mut obs)).unwrap();
        assert!(checked >= 2);
    }
}

#[test]
fn live_storage_peaks_at_one_batch() {
    let corpus = desk_corpus(240, 150, 5, 30);
    let k = 6;
    let mut cfg = config(k, 2, 8);
    cfg.minibatch_target_nnz = common::target_for_batches(&corpus, 3);
    let batches = make_minibatches(&corpus, cfg.minibatch_target_nnz).unwrap();
    assert_eq!(batches.len(), 3);
    let requirement = |b: &pobp::MiniBatch| (b.nnz() + b.doc_ids.len()) * k * std::mem::size_of::<f64>();
    let mut engine = Pobp::new(cfg, corpus.vocab_size()).unwrap();
    for b in &batches {
        let m = engine.process(b).unwrap();
        assert_eq!(m.storage_bytes, requirement(b));
        assert_eq!(engine.meter().current(), 0);
    }
    let max_req = batches.iter().map(requirement).max().unwrap();
    assert_eq!(engine.meter().peak(), max_req);
}

#[test]
fn residual_starts_each_batch_at_zero_and_converges() {
    let corpus = desk_corpus(200, 150, 5, 12);
    let mut cfg = config(5, 2, 1);
    cfg.minibatch_target_nnz = corpus.nnz() / 2 + 1;
    let out = run_pobp(&corpus, &cfg, None).unwrap();
    for b in &out.report.minibatches {
        assert!(b.converged);
        assert!(b.final_mean_residual < cfg.epsilon);
    }
    assert_eq!(out.model.phi_hat.residual_total(), 0.0);
    let tokens: f64 = corpus.num_tokens() as f64;
    let phi_sum: f64 = out.model.phi_hat.phi_values().iter().sum();
    assert!((phi_sum - tokens).abs() < 1e-6 * tokens);
}

#[test]
fn dimension_mismatch_is_reported() {
    let corpus = micro_corpus();
    let cfg = config(2, 1, 1);
    let batch = &make_minibatches(&corpus, usize::MAX).unwrap()[0];
    let mut ledger = CommLedger::new(2, 2);
    let err = run_minibatch(batch, GlobalStats::zeros(2, 2), &cfg, &mut ledger, Hooks::default()).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { .. }));
    let err = run_minibatch(batch, GlobalStats::zeros(3, 3), &cfg, &mut ledger, Hooks::default()).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { .. }));
}

#[test]
fn invalid_configs_rejected() {
    let mut cfg = config(2, 1, 1);
    cfg.num_workers = 0;
    assert!(Pobp::new(cfg.clone(), 3).is_err());
    cfg.num_workers = 1;
    cfg.hyper = Hyperparams { alpha: -1.0, beta: 0.01, num_topics: 2 };
    assert!(Pobp::new(cfg, 3).is_err());
    let _ = StorageMeter::new();
}
