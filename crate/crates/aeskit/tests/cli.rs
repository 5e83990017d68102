use std::path::Path;
use std::process::Command;

use aeskit::io::corpus::{load_corpus, write_corpus, ColumnSchema};
use aeskit::io::embeddings::{load_embeddings, save_embeddings};
use aeskit::io::predictions::{read_predictions, read_truth, write_predictions, PredValues, PredictionTable};
use aeskit::io::read_json;
use aeskit_core::embed::synth_embeddings;
use aeskit_core::ensemble::{ThresholdFit, WeightSearchReport};
use aeskit_core::metrics::EvalReport;
use tempfile::TempDir;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["aeskit"];
    argv.extend_from_slice(args);
    aeskit::cli::run(argv)
}

fn ok(args: &[&str]) {
    assert_eq!(run(args), 0, "aeskit {}", args.join(" "));
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Corpus, split and features for 180 synthetic essays.
fn prepared() -> TempDir {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&["synth-corpus", "--n", "180", "--seed", "3", "--out", &s(&d.join("corpus.csv"))]);
    ok(&["split", "--input", &s(&d.join("corpus.csv")), "--out", &s(&d.join("split"))]);
    ok(&[
        "featurize",
        "--input",
        &s(&d.join("corpus.csv")),
        "--out",
        &s(&d.join("feats")),
        "--fit-ids",
        &s(&d.join("split/train.txt")),
    ]);
    tmp
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_aeskit");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["--version"]), Some(0));
    assert_eq!(code(&[]), Some(2));
    assert_eq!(code(&["no-such-command"]), Some(2));
    assert_eq!(code(&["split", "--input", "/nonexistent/corpus.csv", "--out", "/tmp/x"]), Some(4));
    let out = Command::new(bin).arg("--version").output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("chacha8-fy/v1"));
}

#[test]
fn usage_and_validation_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(run(&["split", "--out", &s(&d.join("split"))]), 2);
    let bad = d.join("bad.csv");
    std::fs::write(&bad, "essay_id,full_text,score\na,hello,3\nb,world,9\n").unwrap();
    assert_eq!(run(&["split", "--input", &s(&bad), "--out", &s(&d.join("split"))]), 3);
    let dup = d.join("dup.csv");
    std::fs::write(&dup, "essay_id,full_text,score\na,hello,3\na,world,2\n").unwrap();
    assert_eq!(run(&["stats", "--input", &s(&dup), "--out", &s(&d.join("stats.json"))]), 3);
    let good = d.join("good.csv");
    std::fs::write(&good, "essay_id,full_text,score\na,x,1\nb,x,2\nc,x,3\nd,x,4\n").unwrap();
    let out = s(&d.join("s"));
    assert_eq!(run(&["split", "--input", &s(&good), "--out", &out, "--no-stratify", "--ratios", "0.5,0.5,0.5"]), 3);
    assert_eq!(run(&["split", "--input", &s(&good), "--out", &out, "--ratios", "0.5,0.5"]), 2);
    assert_eq!(run(&["split", "--input", &s(&good), "--out", &out, "--no-stratify", "--ratios", "0.5,0.25,0.25"]), 0);
}

#[test]
fn corpus_and_prediction_files_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let corpus = aeskit::synth::synth_corpus(25, 9).unwrap();
    let schema = ColumnSchema::default();
    write_corpus(&d.join("c.csv"), &corpus, &schema).unwrap();
    assert_eq!(load_corpus(&d.join("c.csv"), &schema).unwrap(), corpus);

    let ids: Vec<String> = vec!["a".into(), "b".into()];
    for values in [
        PredValues::Probs(vec![[0.1, 0.2, 0.3, 0.2, 0.1, 0.1], [1.0 / 3.0, 0.0, 0.0, 0.0, 0.0, 2.0 / 3.0]]),
        PredValues::Scores(vec![2.25, 5.000000000000001]),
        PredValues::Labels(vec![6, 1]),
    ] {
        let table = PredictionTable { ids: ids.clone(), values };
        write_predictions(&d.join("p.csv"), &table).unwrap();
        assert_eq!(read_predictions(&d.join("p.csv")).unwrap(), table);
    }
}

#[test]
fn embeddings_round_trip_and_concat() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let ids: Vec<String> = (0..7).map(|i| format!("e{i}")).collect();
    let set = synth_embeddings(4, ids, 5, None).unwrap();
    let manifest = save_embeddings(&d.join("one"), &set).unwrap();
    let back = load_embeddings(&manifest).unwrap();
    assert_eq!((back.values(), back.row_ids(), back.dim()), (set.values(), set.row_ids(), set.dim()));
    assert_eq!(back.manifest.data_file, "one.emb.bin");

    ok(&["synth-corpus", "--n", "30", "--out", &s(&d.join("c.csv"))]);
    for (name, dim) in [("a", "16"), ("b", "8")] {
        ok(&["synth-embeddings", "--input", &s(&d.join("c.csv")), "--dim", dim, "--seed", dim, "--out", &s(&d.join(name))]);
    }
    ok(&["embed-concat", "--input", &s(&d.join("a.emb.json")), &s(&d.join("b.emb.json")), "--out", &s(&d.join("ab"))]);
    let joined = load_embeddings(&d.join("ab.emb.json")).unwrap();
    assert_eq!((joined.dim(), joined.count()), (24, 30));
    assert!(d.join("ab.config.json").is_file());

    // Reordered ids are rejected rather than silently misaligned.
    let a = load_embeddings(&d.join("a.emb.json")).unwrap();
    let mut rows: Vec<usize> = (0..a.count()).collect();
    rows.reverse();
    let values: Vec<f32> = rows.iter().flat_map(|&r| a.row(r).to_vec()).collect();
    let ids: Vec<String> = rows.iter().map(|&r| a.row_ids()[r].clone()).collect();
    let flipped = aeskit_core::embed::EmbeddingSet::new(a.manifest.clone(), values, ids).unwrap();
    save_embeddings(&d.join("flipped"), &flipped).unwrap();
    assert_eq!(run(&["embed-concat", "--input", &s(&d.join("a.emb.json")), &s(&d.join("flipped.emb.json")), "--out", &s(&d.join("x"))]), 3);
}

#[test]
fn mlp_on_embeddings_and_ensembles() {
    let tmp = prepared();
    let d = tmp.path();
    let corpus = s(&d.join("corpus.csv"));
    let (train, val) = (s(&d.join("split/train.txt")), s(&d.join("split/validation.txt")));
    let hc = s(&d.join("feats/handcrafted.csv"));
    ok(&["synth-embeddings", "--input", &corpus, "--dim", "12", "--out", &s(&d.join("emb"))]);
    let emb = s(&d.join("emb.emb.json"));

    ok(&[
        "train", "mlp", "--features", &emb, "--labels", &corpus, "--train-ids", &train, "--hidden", "16", "--epochs", "30",
        "--folds", "3", "--batch-size", "16", "--learning-rate", "0.01", "--out", &s(&d.join("mlp")),
    ]);
    assert!(d.join("mlp/folds.json").is_file());
    ok(&[
        "train", "gbdt", "--features", &hc, "--labels", &corpus, "--train-ids", &train, "--validation-ids", &val,
        "--preset", "lgbm-like", "--goss", "0.3,0.1", "--rounds", "40", "--min-samples-leaf", "5", "--out", &s(&d.join("gbdt")),
    ]);
    let config: serde_json::Value = read_json(&d.join("gbdt/config.json")).unwrap();
    assert_eq!(config["params"]["goss"]["top_fraction"], 0.3);
    ok(&["predict", "--model", &s(&d.join("mlp")), "--features", &emb, "--ids", &val, "--out", &s(&d.join("mlp.csv"))]);
    ok(&["predict", "--model", &s(&d.join("gbdt")), "--features", &hc, "--ids", &val, "--out", &s(&d.join("gbdt.csv"))]);
    ok(&["predict", "--model", &s(&d.join("gbdt")), "--features", &hc, "--ids", &val, "--output", "labels", "--out", &s(&d.join("gbdt_labels.csv"))]);

    let merged = s(&d.join("merged.csv"));
    ok(&["ensemble", "merge", "--preds", &s(&d.join("mlp.csv")), &s(&d.join("gbdt.csv")), "--truth", &corpus, "--out", &merged]);
    let search: WeightSearchReport = read_json(&d.join("merged.weights.json")).unwrap();
    assert!(search.table.len() >= 5);
    let w = search.best.as_slice();
    assert!((w[0] + w[1] - 1.0).abs() < 1e-9);
    ok(&["ensemble", "merge", "--preds", &s(&d.join("mlp.csv")), &s(&d.join("gbdt.csv")), "--weights", "0.4,0.6", "--out", &s(&d.join("fixed.csv"))]);
    assert_eq!(
        run(&["ensemble", "merge", "--preds", &s(&d.join("mlp.csv")), &s(&d.join("gbdt.csv")), "--weights", "0.4,0.7", "--out", &s(&d.join("bad.csv"))]),
        3
    );
    ok(&["ensemble", "vote", "--preds", &s(&d.join("mlp.csv")), &s(&d.join("gbdt.csv")), &s(&d.join("gbdt_labels.csv")), "--out", &s(&d.join("vote.csv"))]);
    ok(&["ensemble", "thresholds", "--preds", &merged, "--truth", &corpus, "--out", &s(&d.join("thr.csv"))]);
    let fit: ThresholdFit = read_json(&d.join("thr.thresholds.json")).unwrap();
    assert!(fit.qwk >= fit.initial_qwk);
    ok(&["ensemble", "thresholds", "--preds", &merged, "--thresholds", &s(&d.join("thr.thresholds.json")), "--out", &s(&d.join("thr2.csv"))]);
    assert_eq!(std::fs::read(d.join("thr.csv")).unwrap(), std::fs::read(d.join("thr2.csv")).unwrap());

    let vote = read_predictions(&d.join("vote.csv")).unwrap();
    assert!(matches!(vote.values, PredValues::Labels(_)));
    assert_eq!(vote.len(), aeskit::io::read_ids(Path::new(&val)).unwrap().len());

    for name in ["mlp", "gbdt", "merged", "vote", "thr"] {
        let preds = s(&d.join(format!("{name}.csv")));
        ok(&["evaluate", "--preds", &preds, "--truth", &corpus, "--out", &s(&d.join(format!("{name}.eval.json")))]);
    }
    let gbdt_eval: EvalReport = read_json(&d.join("gbdt.eval.json")).unwrap();
    assert!(gbdt_eval.qwk > 0.8, "gbdt qwk {}", gbdt_eval.qwk);
    let truth = read_truth(&d.join("corpus.csv")).unwrap();
    assert_eq!(truth.len(), 180);

    ok(&["stats", "--input", &corpus, "--out", &s(&d.join("stats.json"))]);
    let evals: Vec<String> = ["mlp", "gbdt", "merged"].iter().map(|n| format!("{n}={}", s(&d.join(format!("{n}.eval.json"))))).collect();
    let mut args = vec!["report", "--stats", &s(&d.join("stats.json"))].into_iter().map(String::from).collect::<Vec<_>>();
    args.push("--eval".into());
    args.extend(evals);
    args.extend(["--weights".into(), s(&d.join("merged.weights.json")), "--out".into(), s(&d.join("report.md"))]);
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
    let md = std::fs::read_to_string(d.join("report.md")).unwrap();
    for needle in ["merged", "gbdt", "mlp", "180"] {
        assert!(md.contains(needle), "report lacks {needle}");
    }
}

#[test]
fn config_file_overlaid_by_flags() {
    let tmp = prepared();
    let d = tmp.path();
    let cfg = d.join("split/config.json");
    let resolved: serde_json::Value = read_json(&cfg).unwrap();
    assert_eq!(resolved["seed"], 42);
    ok(&["split", "--config", &s(&cfg), "--seed", "7", "--out", &s(&d.join("split7"))]);
    let echoed: serde_json::Value = read_json(&d.join("split7/config.json")).unwrap();
    assert_eq!(echoed["seed"], 7);
    assert_eq!(echoed["input"], resolved["input"]);
    let a = std::fs::read(d.join("split/train.txt")).unwrap();
    let b = std::fs::read(d.join("split7/train.txt")).unwrap();
    assert_ne!(a, b);
    ok(&["--threads", "1", "split", "--config", &s(&cfg), "--out", &s(&d.join("split1"))]);
    assert_eq!(a, std::fs::read(d.join("split1/train.txt")).unwrap());
}
