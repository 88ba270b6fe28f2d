//! CLI smoke tests: the full synth → train → predict → eval loop plus the
//! inspection commands, driving the real binary.

use std::path::Path;
use std::process::Command;

fn seqtree_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seqtree"))
}

fn run_ok(cmd: &mut Command) -> String {
    let output = cmd.output().expect("binary runs");
    assert!(
        output.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout).expect("utf-8 stdout")
}

fn fixtures_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures"))
}

#[test]
fn synth_train_predict_eval_agree() {
    let dir = tempfile::tempdir().unwrap();
    let data_csv = dir.path().join("tata.csv");
    let out = run_ok(seqtree_bin().args([
        "synth",
        "--motif",
        "TATA",
        "--n",
        "300",
        "--len",
        "25",
        "--seed",
        "3",
        "--output",
        data_csv.to_str().unwrap(),
    ]));
    assert!(out.contains("wrote 300 rows"), "{out}");
    assert!(out.contains("150 positive, 150 negative"), "{out}");

    let out_dir = dir.path().join("run");
    let config = format!(
        r#"
[dataset]
source = "csv"
path = "{data}"

[run]
mode = "cart_onehot"
output_dir = "{out_dir}"
seeds = [0]
depths = [3]
test_frac = 0.2
"#,
        data = data_csv.display(),
        out_dir = out_dir.display(),
    );
    let config_path = dir.path().join("run.toml");
    std::fs::write(&config_path, config).unwrap();
    let train_out = run_ok(seqtree_bin().args(["train", "--config", config_path.to_str().unwrap()]));
    assert!(train_out.contains("seed 0 depth 3"), "{train_out}");

    // `predict` + `eval` on the held-out rows must reproduce `train`'s
    // reported test metrics. Rebuild the same split through the library.
    let ds = seqtree::seqdata::load_csv(&data_csv).unwrap();
    let (_, test) = seqtree::seqdata::train_test_split(&ds, 0.2, 0).unwrap();
    let test_csv = dir.path().join("test.csv");
    test.save_csv(&test_csv).unwrap();

    let tree_path = out_dir.join("trees/seed0_depth3.tree.json");
    let preds_csv = dir.path().join("preds.csv");
    run_ok(seqtree_bin().args([
        "predict",
        "--tree",
        tree_path.to_str().unwrap(),
        "--data",
        test_csv.to_str().unwrap(),
        "--output",
        preds_csv.to_str().unwrap(),
    ]));
    let eval_out = run_ok(seqtree_bin().args([
        "eval",
        "--preds",
        preds_csv.to_str().unwrap(),
        "--data",
        test_csv.to_str().unwrap(),
    ]));

    // train printed "... | test accuracy X ..."; eval prints the same
    // metric line for the identical tree and rows.
    let reported_test = train_out
        .lines()
        .find(|l| l.starts_with("seed 0 depth 3"))
        .and_then(|l| l.split(" | test ").nth(1))
        .expect("train output line");
    assert_eq!(eval_out.trim(), reported_test.trim());
}

#[test]
fn inspect_renders_the_fixture_tree() {
    let tree = fixtures_dir().join("fig_tree.json");
    let out = run_ok(seqtree_bin().args(["inspect", "--tree", tree.to_str().unwrap()]));
    assert!(out.contains("internal nodes: 7  leaves: 8"), "{out}");
    assert!(out.contains("upstream_G_content_20_49 <= 0.250"), "{out}");
    assert!(out.contains("expr: prop({G},20,49)"), "{out}");
    assert!(out.contains("upstream_stacking_energy_10_49 <= -1.770"), "{out}");
    // All eight leaf probabilities are printed.
    for p1 in ["0.510", "0.060", "0.860", "0.330", "0.130", "0.550", "0.780", "0.950"] {
        assert!(out.contains(&format!("leaf p1={p1}")), "missing leaf {p1} in {out}");
    }
}

#[test]
fn halstead_reports_fixture_complexity() {
    let tree = fixtures_dir().join("fig_tree.json");
    let out = run_ok(seqtree_bin().args(["halstead", "--tree", tree.to_str().unwrap()]));
    assert!(out.contains("volume"), "{out}");
    assert!(out.contains("median over 7 generated splits"), "{out}");
    // prop({G},20,49) is the hand-computed example.
    let row = out
        .lines()
        .find(|l| l.starts_with("upstream_G_content_20_49"))
        .expect("row for the root split");
    assert!(row.contains("8.000"), "{row}");
    assert!(row.contains("0.500"), "{row}");
    assert!(row.contains("4.000"), "{row}");
}

#[test]
fn invalid_tree_document_is_a_clean_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"not\": \"a tree\"}").unwrap();
    let output = seqtree_bin()
        .args(["inspect", "--tree", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("tree document"), "{stderr}");
}
