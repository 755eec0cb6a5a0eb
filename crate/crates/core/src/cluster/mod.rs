//! Parallel orchestration: workers, barrier synchronization, the
//! communication ledger and the analytic cost model.

pub mod cost;
mod engine;
mod ledger;
mod sync;
mod wire;
mod worker;

pub use cost::{cost_model, render as render_cost_model, CostModelInput, CostModelOutput, CostParams};
pub use engine::{
    run_minibatch, run_pobp, run_pobp_observed, BarrierObserver, BarrierView, BatchMetrics, EngineConfig, Evaluation,
    Hooks, IterationMetrics, MinibatchOutcome, Pobp, RunOutput, RunReport, TrainedModel,
};
pub use ledger::{CommLedger, Direction, LedgerRecord, LedgerSummary};
pub use sync::{apply_broadcast, broadcast, merge_payloads, sync_matrices, upload, SyncScope};
pub use wire::{SyncEntry, SyncPayload, HEADER_BYTES, RECORD_BYTES};
pub use worker::{SweepStats, WorkerState};
