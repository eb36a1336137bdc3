//! Black-box tests of the `bibalance` binary: every subcommand, the format
//! flag, determinism under a fixed seed, and the failure diagnostics.

use std::path::Path;
use std::process::{Command, Output};

fn bibalance(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bibalance"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is UTF-8")
}

fn write_graph(path: &Path, rows: &str) {
    std::fs::write(path, rows).expect("fixture writes");
}

/// Generates a planted benchmark graph through the binary itself and returns
/// its path inside `dir`.
fn generated_graph(dir: &Path) -> String {
    let path = dir.join("graph.tsv");
    let out = bibalance(&[
        "generate",
        "--buyers",
        "40",
        "--sellers",
        "25",
        "--density",
        "0.3",
        "--noise",
        "0.15",
        "--seed",
        "11",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "generate failed: {}", stderr(&out));
    path.to_str().unwrap().to_string()
}

#[test]
fn census_reports_the_single_balanced_butterfly() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("square.tsv");
    write_graph(&graph, "u1\tp1\t1\nu1\tp2\t1\nu2\tp1\t1\nu2\tp2\t1\n");
    let out = bibalance(&["census", "--input", graph.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# class\tsigns\tcount\t"), "got: {text}");
    assert!(text.contains("A\t(+,+,+,+)\t1\t1.000000"), "got: {text}");
    assert!(text.contains("\nbalanced\t-\t1\t1.000000"), "got: {text}");
}

#[test]
fn census_table_format_renders_aligned_columns() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("square.tsv");
    write_graph(&graph, "u1\tp1\t1\nu1\tp2\t1\nu2\tp1\t1\nu2\tp2\t-1\n");
    let out = bibalance(&[
        "census",
        "--input",
        graph.to_str().unwrap(),
        "--format",
        "table",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let rule = lines.next().unwrap();
    assert!(header.starts_with("class"), "got: {header}");
    assert!(!header.contains('\t'), "table output must not contain tabs");
    assert!(rule.starts_with("-----"), "got: {rule}");
    // The unbalanced square shows up as one class-F butterfly.
    assert!(text.contains("F           (+,+,+,-)  1"), "got: {text}");
}

#[test]
fn generate_census_pipeline_is_fully_balanced_without_noise() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("clean.tsv");
    let out = bibalance(&[
        "generate", "--buyers", "15", "--sellers", "12", "--density", "0.4", "--seed", "9",
        "--output", graph.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = bibalance(&["census", "--input", graph.to_str().unwrap()]);
    assert!(out.status.success());
    let balanced_row = stdout(&out)
        .lines()
        .find(|line| line.starts_with("balanced\t"))
        .expect("summary row present")
        .to_string();
    let fraction = balanced_row.split('\t').nth(3).unwrap().to_string();
    assert_eq!(fraction, "1.000000", "row: {balanced_row}");
}

#[test]
fn suggest_lists_the_balance_increasing_link() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("wedge.tsv");
    // u2—p1—u1—p2 is an all-positive path, so linking (u2, p2) positively
    // closes one balanced butterfly.
    write_graph(&graph, "u1\tp1\t1\nu1\tp2\t1\nu2\tp1\t1\n");
    let out = bibalance(&["suggest", "--input", graph.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# buyer_id\tseller_id\tnet_gain\n"), "got: {text}");
    assert!(text.contains("u2\tp2\t1"), "got: {text}");
}

#[test]
fn caterpillars_profiles_listed_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("wedge.tsv");
    write_graph(&graph, "u1\tp1\t1\nu1\tp2\t-1\nu2\tp1\t1\n");
    let pairs = dir.path().join("pairs.tsv");
    write_graph(&pairs, "# comment line\nu2\tp2\n");
    let out = bibalance(&[
        "caterpillars",
        "--input",
        graph.to_str().unwrap(),
        "--pairs",
        pairs.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    // One (+,+,-) caterpillar: u2—p1 (+), p1—u1 (+), u1—p2 (-).
    assert!(text.contains("# buyer_id\tseller_id\t(+,+,+)\t(+,+,-)"), "got: {text}");
    assert!(text.contains("u2\tp2\t0\t1\t0\t0\t0\t0\t0\t0\t0\t1\t-1"), "got: {text}");
}

#[test]
fn evaluate_is_deterministic_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generated_graph(dir.path());
    let run = || bibalance(&["evaluate", "--input", &graph, "--method", "MF", "--seed", "7"]);
    let first = run();
    let second = run();
    assert!(first.status.success(), "stderr: {}", stderr(&first));
    assert_eq!(first.stdout, second.stdout, "same seed, different bytes");
    let report: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(report["method"], "MF");
    assert_eq!(report["split_seed"], 7);
    let auc = report["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc));
}

#[test]
fn evaluate_averages_over_multiple_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generated_graph(dir.path());
    let out = bibalance(&[
        "evaluate", "--input", &graph, "--method", "LazyRW", "--seed", "3", "--seeds", "3",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let reports = value["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    let seeds: Vec<u64> = reports
        .iter()
        .map(|r| r["split_seed"].as_u64().unwrap())
        .collect();
    assert_eq!(seeds, vec![3, 4, 5]);
    let mean = reports.iter().map(|r| r["auc"].as_f64().unwrap()).sum::<f64>() / 3.0;
    assert!((value["mean_auc"].as_f64().unwrap() - mean).abs() < 1e-12);
}

#[test]
fn evaluate_dumps_test_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generated_graph(dir.path());
    let dump = dir.path().join("predictions.tsv");
    let out = bibalance(&[
        "evaluate", "--input", &graph, "--method", "SCsc", "--seed", "2",
        "--dump-predictions", dump.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(
        text.starts_with("# buyer_id\tseller_id\ttrue_sign\tscore\tpredicted_sign\tmethod\n"),
        "got: {text}"
    );
    assert!(text.lines().count() > 1, "no prediction rows written");
    assert!(text.contains("\tSCsc\n"), "got: {text}");
}

#[test]
fn singleton_sweep_reproduces_the_evaluate_report() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generated_graph(dir.path());
    let evaluated = bibalance(&["evaluate", "--input", &graph, "--method", "LazyRW", "--seed", "4"]);
    let swept = bibalance(&["sweep", "--input", &graph, "--method", "LazyRW", "--seed", "4"]);
    assert!(evaluated.status.success() && swept.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&evaluated)).unwrap();
    let sweep: serde_json::Value = serde_json::from_str(&stdout(&swept)).unwrap();
    assert_eq!(sweep["validation_reports"].as_array().unwrap().len(), 1);
    assert_eq!(sweep["best_index"], 0);
    assert_eq!(sweep["test_report"], report);
}

#[test]
fn sweep_searches_the_configured_grid() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generated_graph(dir.path());
    let config = dir.path().join("spec.json");
    std::fs::write(
        &config,
        r#"{"method": "SBRW", "seed": 1, "grid": {"omega": [1.0, 3.0], "delta_pos": [0, 2]}}"#,
    )
    .unwrap();
    let out = bibalance(&["sweep", "--input", &graph, "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let sweep: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let reports = sweep["validation_reports"].as_array().unwrap();
    assert_eq!(reports.len(), 4, "2 ω × 2 δ_p candidates");
    let best = sweep["best_index"].as_u64().unwrap() as usize;
    let best_auc = reports[best]["auc"].as_f64().unwrap();
    for report in reports {
        assert!(report["auc"].as_f64().unwrap() <= best_auc);
    }
}

#[test]
fn config_file_resolves_method_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generated_graph(dir.path());
    let config = dir.path().join("spec.json");
    std::fs::write(&config, r#"{"method": "MFwBT", "dataset": "toy", "seed": 3}"#).unwrap();
    let out = bibalance(&["evaluate", "--input", &graph, "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["method"], "MFwBT");
    assert_eq!(report["dataset"], "toy");
    assert_eq!(report["split_seed"], 3);
    // Omitted config section falls back to the method's defaults, which keep
    // the implicit links on.
    assert_eq!(report["hyperparameters"]["alpha"], 0.5);
    assert_eq!(report["hyperparameters"]["k_neg"], 10000);
    assert_eq!(report["hyperparameters"]["seed"], 3);
}

#[test]
fn predict_scores_listed_pairs_and_saves_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generated_graph(dir.path());
    let pairs = dir.path().join("pairs.tsv");
    write_graph(&pairs, "b0\ts0\nb1\ts1\n");
    let model = dir.path().join("model.tsv");
    let out = bibalance(&[
        "predict", "--input", &graph, "--method", "SBRW",
        "--pairs", pairs.to_str().unwrap(),
        "--model-out", model.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("# buyer_id\tseller_id\tscore\tpredicted_sign\n"), "got: {text}");
    assert_eq!(text.lines().count(), 3, "two pair rows expected: {text}");
    for line in text.lines().skip(1) {
        let sign = line.split('\t').nth(3).unwrap();
        assert!(sign == "1" || sign == "-1", "got: {line}");
    }
    let saved = std::fs::read_to_string(&model).unwrap();
    assert!(saved.starts_with("# buyer_id\tseller_id\tscore\n"), "got: {saved}");
}

#[test]
fn predict_defaults_to_every_non_linked_pair() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("wedge.tsv");
    write_graph(&graph, "u1\tp1\t1\nu1\tp2\t1\nu2\tp1\t1\nu2\tp2\t-1\nu3\tp1\t1\n");
    let out = bibalance(&["predict", "--input", &graph.to_str().unwrap(), "--method", "LazyRW"]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    // 3×2 candidate pairs minus 5 edges = 1 non-linked pair: (u3, p2).
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2, "got: {text}");
    assert!(text.lines().nth(1).unwrap().starts_with("u3\tp2\t"), "got: {text}");
}

#[test]
fn missing_input_fails_with_the_path_in_the_message() {
    let out = bibalance(&["census", "--input", "/no/such/graph.tsv"]);
    assert_eq!(out.status.code(), Some(1));
    let message = stderr(&out);
    assert!(message.starts_with("error:"), "got: {message}");
    assert!(message.contains("/no/such/graph.tsv"), "got: {message}");
}

#[test]
fn malformed_config_fails_with_a_parse_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generated_graph(dir.path());
    let config = dir.path().join("bad.json");
    std::fs::write(&config, "not json at all").unwrap();
    let out = bibalance(&["evaluate", "--input", &graph, "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error: serialization error"), "got: {}", stderr(&out));
}

#[test]
fn invalid_split_fractions_fail_validation() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generated_graph(dir.path());
    let out = bibalance(&[
        "evaluate", "--input", &graph, "--method", "MF", "--split", "0.5,0.5,0.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("sum to 1"), "got: {}", stderr(&out));
}

#[test]
fn unknown_method_fails_with_the_alternatives() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generated_graph(dir.path());
    let out = bibalance(&["evaluate", "--input", &graph, "--method", "PageRank"]);
    assert_eq!(out.status.code(), Some(1));
    let message = stderr(&out);
    assert!(message.contains("unknown method"), "got: {message}");
    assert!(message.contains("SBRW"), "got: {message}");
}

#[test]
fn unknown_ids_in_a_pairs_file_fail() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("square.tsv");
    write_graph(&graph, "u1\tp1\t1\nu1\tp2\t1\nu2\tp1\t1\nu2\tp2\t1\n");
    let pairs = dir.path().join("pairs.tsv");
    write_graph(&pairs, "ghost\tp1\n");
    let out = bibalance(&[
        "caterpillars",
        "--input", graph.to_str().unwrap(),
        "--pairs", pairs.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unknown buyer id: \"ghost\""), "got: {}", stderr(&out));
}

#[test]
fn unknown_subcommands_are_rejected_by_the_parser() {
    let out = bibalance(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unrecognized subcommand"), "got: {}", stderr(&out));
}

#[test]
fn evaluate_requires_a_method_from_somewhere() {
    let dir = tempfile::tempdir().unwrap();
    let graph = generated_graph(dir.path());
    let out = bibalance(&["evaluate", "--input", &graph]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no method chosen"), "got: {}", stderr(&out));
}
