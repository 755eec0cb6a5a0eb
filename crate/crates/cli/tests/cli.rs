use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pobp::inference::GlobalStats;
use pobp::model_io;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pobp"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/tiny").join(name)
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .trim()
        .parse()
        .unwrap()
}

fn train(out: &Path, extra: &[&str]) -> Output {
    run(bin()
        .arg("train")
        .arg("--docword")
        .arg(fixture("docword.txt"))
        .arg("--vocab")
        .arg(fixture("vocab.txt"))
        .args(["--num-topics", "8", "--num-workers", "2", "--max-iterations", "25", "--fold-in-iters", "50"])
        .arg("--out-dir")
        .arg(out)
        .args(extra))
}

#[test]
fn train_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = train(&out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    for (_, path) in report["artifacts"].as_object().unwrap() {
        assert!(Path::new(path.as_str().unwrap()).exists(), "{path}");
    }
    assert_eq!(report["config"]["num_topics"], 8);
    assert!(report["report"]["ledger"]["total_bytes"].as_u64().unwrap() > 0);
    let stats: GlobalStats<f64> = model_io::load_phi_hat(&out.join("phi_hat.bin")).unwrap();
    assert_eq!((stats.num_topics(), stats.vocab_size()), (8, 400));
    let text = stdout(&o);
    assert!(value(&text, "perplexity") < 400.0);
}

#[test]
fn identical_runs_give_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(train(&a, &["--test-fraction", "0"]).status.success());
    assert!(train(&b, &["--test-fraction", "0", "--threaded", "false"]).status.success());
    for f in ["phi_hat.bin", "phi.bin", "ledger.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_and_flags_layer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("run");
    std::fs::write(
        &cfg,
        format!(
            "docword = {:?}\nvocab = {:?}\nnum_topics = 6\nlambda_w = 0.5\nmax_iterations = 5\nfold_in_iters = 20\n",
            fixture("docword.txt"),
            fixture("vocab.txt")
        ),
    )
    .unwrap();
    let o = run(bin()
        .args(["train", "--config"])
        .arg(&cfg)
        .args(["--lambda-w", "0.25", "--out-dir"])
        .arg(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written = pobp::RunConfig::load(&out.join("config.toml")).unwrap();
    assert_eq!(written.num_topics, 6);
    assert_eq!(written.lambda_w, 0.25);
    assert_eq!(written.max_iterations, 5);
    assert_eq!(written.beta, 0.01);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let o = train(&out, &["--lambda-w", "2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(bin().args(["train", "--docword"]).arg(dir.path().join("missing.txt")).arg("--out-dir").arg(&out));
    assert_eq!(o.status.code(), Some(2));
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2\n3\n1\n1 9 1\n").unwrap();
    let o = run(bin().args(["train", "--docword"]).arg(&bad).arg("--out-dir").arg(&out));
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    let o = run(bin().args(["train", "--no-such-flag"]));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn uniform_model_has_perplexity_w() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("zero.bin");
    model_io::save_phi_hat(&model, &GlobalStats::<f64>::zeros(8, 400)).unwrap();
    let o = run(bin()
        .args(["evaluate", "--model"])
        .arg(&model)
        .arg("--docword")
        .arg(fixture("docword.txt"))
        .args(["--fold-in-iters", "20", "--out-dir"])
        .arg(dir.path()));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((value(&stdout(&o), "perplexity") - 400.0).abs() < 1e-6);
    assert!(dir.path().join("evaluation.json").exists());
}

#[test]
fn trained_model_beats_uniform_and_mismatch_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(train(&out, &[]).status.success());
    let o = run(bin()
        .args(["evaluate", "--model"])
        .arg(out.join("phi_hat.bin"))
        .arg("--docword")
        .arg(fixture("docword.txt"))
        .args(["--fold-in-iters", "50", "--out-dir"])
        .arg(&out));
    assert!(o.status.success());
    assert!(value(&stdout(&o), "perplexity") < 400.0);
    let o = run(bin()
        .args(["evaluate", "--model"])
        .arg(out.join("phi_hat.bin"))
        .arg("--docword")
        .arg(fixture("docword.txt"))
        .args(["--vocab-keep", "300", "--out-dir"])
        .arg(&out));
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("W=400") && stderr.contains("W=300"), "{stderr}");
}

#[test]
fn cost_model_reports_projections() {
    let o = run(bin().arg("cost-model"));
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("full online sync  1.4104e16 entries  112.834 PB"), "{text}");
    assert!(text.contains("batch sync        1.4104e14 entries  1.128 PB"), "{text}");
    assert!(text.contains("power sync        3.5261e13"), "{text}");
    let o = run(bin().args(["cost-model", "--a", "9", "--b", "9"]));
    assert!(stdout(&o).contains("N*                     1.000000"));
    let o = run(bin().args(["cost-model", "--eta", "-1"]));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn diagnose_reports_shares_and_handles_zero_residual() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("ck.csv");
    std::fs::write(&ck, "word_id,residual\n1,8.0\n2,1.0\n3,0.5\n4,0.5\n5,0.0\n").unwrap();
    let o = run(bin().args(["diagnose", "--checkpoint"]).arg(&ck).arg("--out-dir").arg(dir.path()));
    assert!(o.status.success());
    assert!((value(&stdout(&o), "top_share 0.2") - 0.8).abs() < 1e-9);
    assert!(dir.path().join("rank_curve.csv").exists());
    assert!(dir.path().join("topshare.csv").exists());

    std::fs::write(&ck, "word_id,residual\n1,4.5\n").unwrap();
    let o = run(bin().args(["diagnose", "--checkpoint"]).arg(&ck).args(["--fractions", "1.0"]).arg("--out-dir").arg(dir.path()));
    assert!((value(&stdout(&o), "top_share 1") - 1.0).abs() < 1e-12);

    std::fs::write(&ck, "word_id,residual\n1,0.0\n2,0.0\n").unwrap();
    let o = run(bin().args(["diagnose", "--checkpoint"]).arg(&ck).arg("--out-dir").arg(dir.path()));
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("converged"));
}

#[test]
fn diagnose_reads_training_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert!(train(&out, &["--eval-every-iterations", "3"]).status.success());
    let o = run(bin()
        .args(["diagnose", "--checkpoint"])
        .arg(out.join("residual_checkpoint.csv"))
        .arg("--trace")
        .arg(out.join("residual_trace.csv"))
        .arg("--out-dir")
        .arg(out.join("diag")));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(value(&text, "top_share 0.2") > 0.2);
    assert!(value(&text, "checkpoints") >= 2.0);
}
