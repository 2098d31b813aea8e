use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use motifhash_core::hashing::{HashModel, HashModelConfig};
use motifhash_core::io;
use motifhash_core::synthesis::calibrate_noise;

fn motifhash(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motifhash")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = motifhash(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(args: &[&str]) -> Option<i32> {
    motifhash(args).status.code()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

struct Staged {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Staged {
    fn path(&self, name: &str) -> String {
        s(&self.root.join(name))
    }
}

/// gen-data, build-graph and synthesize on a small dataset.
fn staged(seed: &str) -> Staged {
    let dir = tempfile::tempdir().unwrap();
    let st = Staged { root: dir.path().to_path_buf(), _dir: dir };
    ok(&["gen-data", "--n", "200", "--communities", "4", "--seed", seed, "--out", &st.path("data")]);
    ok(&[
        "build-graph", "--train", &st.path("data/train.csv"), "--split", &st.path("data/split.json"), "--dmax", "8",
        "--seed", seed, "--out", &st.path("clipped.tsv"),
    ]);
    ok(&["synthesize", "--graph", &st.path("clipped.tsv"), "--seed", seed, "--t-steps", "50", "--out", &st.path("sanitized.tsv")]);
    st
}

#[test]
fn gen_data_is_deterministic_and_splits_by_fraction() {
    let dir = tempfile::tempdir().unwrap();
    for run in ["a", "b"] {
        ok(&["gen-data", "--n", "400", "--communities", "4", "--seed", "7", "--query-fraction", "0.1", "--out", &s(&dir.path().join(run))]);
    }
    for file in ["train.csv", "query.csv", "split.json", "gen-data.config.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(file)).unwrap(),
            std::fs::read(dir.path().join("b").join(file)).unwrap(),
            "{file}"
        );
    }
    let query = io::load_features(&dir.path().join("a/query.csv")).unwrap();
    let train = io::load_features(&dir.path().join("a/train.csv")).unwrap();
    assert_eq!((query.len(), train.len()), (40, 360));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&["gen-data", "--n", "10"]), Some(2));
    assert_eq!(code(&["no-such-command"]), Some(2));
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&["gen-data", "--n", "10", "--communities", "1", "--out", &s(dir.path())]), Some(2));
}

#[test]
fn build_graph_respects_bound_and_refuses_query_items() {
    let st = staged("3");
    let clipped = io::load_graph(Path::new(&st.path("clipped.tsv"))).unwrap();
    assert_eq!(clipped.d_max, 8);
    assert!(clipped.graph.support().max_degree() <= 8);
    assert!(st.root.join("build-graph.config.json").exists());

    // Query features fed in as graph input.
    let leak = [
        "build-graph", "--train", &st.path("data/query.csv"), "--split", &st.path("data/split.json"), "--dmax", "8", "--out",
        &st.path("leak.tsv"),
    ];
    assert_eq!(code(&leak), Some(3));
    let overlap = [
        "build-graph", "--train", &st.path("data/train.csv"), "--query", &st.path("data/train.csv"), "--dmax", "8", "--out",
        &st.path("leak.tsv"),
    ];
    assert_eq!(code(&overlap), Some(3));
    assert!(!st.root.join("leak.tsv").exists());

    ok(&["build-graph", "--train", &st.path("data/train.csv"), "--dmax", "8", "--seed", "3", "--out", &st.path("again.tsv")]);
    assert_eq!(std::fs::read(st.path("clipped.tsv")).unwrap(), std::fs::read(st.path("again.tsv")).unwrap());
}

#[test]
fn synthesize_receipt_echoes_budget() {
    let st = staged("4");
    let stdout = ok(&[
        "synthesize", "--graph", &st.path("clipped.tsv"), "--epsilon", "2.0", "--delta", "1e-5", "--t-steps", "30", "--out",
        &st.path("s2.tsv"),
    ]);
    assert!(stdout.contains("epsilon=2"));
    let sanitized = io::load_sanitized(Path::new(&st.path("s2.tsv"))).unwrap();
    let r = &sanitized.receipt;
    assert_eq!((r.epsilon, r.delta, r.t_steps, r.d_max), (2.0, 1e-5, 30, 8));
    assert_eq!(r.sigma, calibrate_noise(r.delta2, 2.0, 1e-5, 30, r.calib_constant).unwrap());
    assert!(!r.audit_noiseless);

    assert_eq!(code(&["synthesize", "--graph", &st.path("clipped.tsv"), "--epsilon", "0", "--out", &st.path("bad.tsv")]), Some(2));

    let noiseless = ok(&[
        "synthesize", "--graph", &st.path("clipped.tsv"), "--audit-noiseless", "--t-steps", "30", "--out", &st.path("s0.tsv"),
    ]);
    assert!(noiseless.contains("NOT PRIVATE"));
    let r0 = io::load_sanitized(Path::new(&st.path("s0.tsv"))).unwrap().receipt;
    assert!(r0.audit_noiseless);
    assert_eq!(r0.sigma, 0.0);
}

#[test]
fn distill_supports_code_lengths_and_is_deterministic() {
    let st = staged("5");
    for bits in ["16", "32", "64"] {
        let out = st.path(&format!("m{bits}"));
        ok(&["distill", "--train", &st.path("data/train.csv"), "--sanitized", &st.path("sanitized.tsv"), "--bits", bits, "--epochs", "2", "--seed", "5", "--out", &out]);
        let (ids, codes) = io::load_codes(&Path::new(&out).join("train_text.codes")).unwrap();
        assert_eq!(codes.k_bits().to_string(), bits);
        assert_eq!(ids.len(), 180);
    }
    let again = st.path("m16b");
    ok(&["distill", "--train", &st.path("data/train.csv"), "--sanitized", &st.path("sanitized.tsv"), "--bits", "16", "--epochs", "2", "--seed", "5", "--out", &again]);
    for file in ["model.json", "train_image.codes", "train_text.codes"] {
        assert_eq!(
            std::fs::read(st.root.join("m16").join(file)).unwrap(),
            std::fs::read(Path::new(&again).join(file)).unwrap()
        );
    }
}

#[test]
fn zero_epochs_emit_the_initialized_model() {
    let st = staged("6");
    let out = st.path("m0");
    let stdout = ok(&["distill", "--train", &st.path("data/train.csv"), "--sanitized", &st.path("sanitized.tsv"), "--epochs", "0", "--seed", "6", "--out", &out]);
    assert!(stdout.contains("0 epochs"));
    let model = io::load_model(&Path::new(&out).join("model.json")).unwrap();
    let expected = HashModel::init(&HashModelConfig { ..model.config.clone() }).unwrap();
    assert_eq!(model, expected);
}

#[test]
fn distill_refuses_misaligned_graph() {
    let st = staged("7");
    ok(&["gen-data", "--n", "100", "--seed", "7", "--out", &st.path("other")]);
    let args = ["distill", "--train", &st.path("other/train.csv"), "--sanitized", &st.path("sanitized.tsv"), "--out", &st.path("m")];
    assert_eq!(code(&args), Some(3));
}

#[test]
fn evaluate_reports_both_directions() {
    let st = staged("8");
    ok(&["distill", "--train", &st.path("data/train.csv"), "--sanitized", &st.path("sanitized.tsv"), "--epochs", "3", "--seed", "8", "--out", &st.path("m")]);
    let eval = |out: &str| {
        ok(&[
            "evaluate", "--model", &st.path("m/model.json"), "--train", &st.path("data/train.csv"), "--query",
            &st.path("data/query.csv"), "--reference", &st.path("clipped.tsv"), "--seed", "8", "--out", &st.path(out),
        ])
    };
    eval("e1.json");
    eval("e2.json");
    let a = std::fs::read_to_string(st.path("e1.json")).unwrap();
    assert_eq!(a, std::fs::read_to_string(st.path("e2.json")).unwrap());
    let json: serde_json::Value = serde_json::from_str(&a).unwrap();
    for key in ["map_i2t", "map_t2i", "map_avg", "tce"] {
        let v = json[key].as_f64().unwrap();
        assert!(v.is_finite() && v >= 0.0, "{key} = {v}");
    }
    assert_eq!(json["k_cutoff"], 50);
    assert_eq!(json["k_bits"], 16);
}

#[test]
fn sweep_writes_one_row_per_point_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let stdout = ok(&[
        "sweep", "--param", "epsilon", "--grid", "1,inf", "--repeats", "2", "--n", "120", "--dmax", "6", "--t-steps", "20",
        "--epochs", "2", "--out", &s(&out),
    ]);
    assert!(stdout.contains("NOT PRIVATE"));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "parameter,value,repeat,seed,map_i2t,map_t2i,map_avg,tce");
    assert_eq!(lines.len(), 5);
    assert!(lines[3].starts_with("epsilon,inf,0,"));

    let out = dir.path().join("dmax.csv");
    ok(&["sweep", "--param", "dmax", "--repeats", "1", "--n", "120", "--t-steps", "10", "--epochs", "1", "--out", &s(&out)]);
    // 108 training items scale the default grid down to {1, 2, 5}.
    let values: Vec<String> = std::fs::read_to_string(&out)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(values, ["1", "2", "5"]);
}

#[test]
fn audit_passes_default_bound_and_fails_zero_bound() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("audit.json");
    let stdout = ok(&["audit-sensitivity", "--out", &s(&report)]);
    assert!(stdout.starts_with("PASS"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(json["observed_max"].as_f64().unwrap() > 0.0);
    assert!(json["delta2"].as_f64().unwrap() >= json["observed_max"].as_f64().unwrap());

    assert_eq!(code(&["audit-sensitivity", "--delta2", "0", "--out", &s(&report)]), Some(3));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["pass"], false);
}

#[test]
fn config_file_is_merged_with_flags_and_written_back() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(&config, r#"{"seed": 11, "data": {"synthetic": {"n_items": 150, "n_communities": 3}}}"#).unwrap();
    let out = dir.path().join("data");
    ok(&["gen-data", "--config", &s(&config), "--n", "100", "--out", &s(&out)]);
    let effective: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("gen-data.config.json")).unwrap()).unwrap();
    assert_eq!(effective["seed"], 11);
    assert_eq!(effective["data"]["synthetic"]["n_items"], 100);
    assert_eq!(effective["data"]["synthetic"]["n_communities"], 3);

    std::fs::write(&config, r#"{"no_such_field": 1}"#).unwrap();
    assert_eq!(code(&["gen-data", "--config", &s(&config), "--out", &s(&out)]), Some(2));
}

#[test]
fn staged_commands_reproduce_the_pipeline() {
    let st = staged("12");
    ok(&["pipeline", "--n", "200", "--communities", "4", "--dmax", "8", "--t-steps", "50", "--seed", "12", "--out", &st.path("pipe")]);
    for (staged_file, pipe_file) in [("data/train.csv", "pipe/train.csv"), ("clipped.tsv", "pipe/clipped.tsv"), ("sanitized.tsv", "pipe/sanitized.tsv")] {
        assert_eq!(std::fs::read(st.path(staged_file)).unwrap(), std::fs::read(st.path(pipe_file)).unwrap(), "{staged_file}");
    }
    assert!(st.root.join("pipe/metrics.json").exists());
    assert!(st.root.join("pipe/pipeline.config.json").exists());
}
