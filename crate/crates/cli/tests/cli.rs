use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn duet(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_duet"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_code(output: &Output, code: i32) {
    assert_eq!(
        output.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

/// Generate a small workload and build an index from it; returns the
/// workspace root.
fn workspace_with_index() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let synth = duet(
        &[
            "synth",
            "--seed",
            "11",
            "--docs",
            "200",
            "--vocab",
            "120",
            "--queries",
            "10",
            "--out-dir",
            "work",
        ],
        dir.path(),
    );
    assert_code(&synth, 0);
    let build = duet(
        &[
            "build",
            "--collection",
            "work/collection.tsv",
            "--impacts",
            "work/impacts.jsonl",
            "--out",
            "work/index",
        ],
        dir.path(),
    );
    assert_code(&build, 0);
    dir
}

#[test]
fn pipeline_runs_and_is_deterministic() {
    let dir = workspace_with_index();
    let query = |run_out: &str| {
        let out = duet(
            &[
                "query",
                "--index",
                "work/index",
                "--queries",
                "work/queries.tsv",
                "--strategy",
                "gt",
                "--k",
                "10",
                "--run-out",
                run_out,
                "--stats-out",
                "work/stats.csv",
                "--latency-out",
                "work/lat.tsv",
                "--emit-primary",
            ],
            dir.path(),
        );
        assert_code(&out, 0);
    };
    query("work/a.run");
    query("work/b.run");
    let a = fs::read(dir.path().join("work/a.run")).unwrap();
    let b = fs::read(dir.path().join("work/b.run")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(
        a, b,
        "identical invocations must produce identical run files"
    );
    let a_primary = fs::read(dir.path().join("work/a.run.primary")).unwrap();
    let b_primary = fs::read(dir.path().join("work/b.run.primary")).unwrap();
    assert_eq!(a_primary, b_primary);
    assert_ne!(
        a, a_primary,
        "learned-side and BM25-side runs should differ"
    );

    let eval = duet(
        &[
            "evaluate",
            "--run",
            "work/a.run",
            "--qrels",
            "work/qrels.txt",
            "--latency",
            "work/lat.tsv",
            "--stats",
            "work/stats.csv",
            "--scored-fraction-out",
            "work/frac.csv",
        ],
        dir.path(),
    );
    assert_code(&eval, 0);
    let report = stdout_json(&eval);
    assert_eq!(report["n_queries"], 10);
    assert!(report["rr_at_10"].as_f64().unwrap() >= 0.0);
    assert_eq!(report["latency"]["n"], 10);
    let frac = fs::read_to_string(dir.path().join("work/frac.csv")).unwrap();
    assert!(frac.starts_with("qid,scored_fraction\n"));
    assert!(frac.contains("\nALL,"));
}

#[test]
fn synth_same_seed_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["one", "two"] {
        let synth = duet(
            &[
                "synth",
                "--seed",
                "3",
                "--docs",
                "60",
                "--vocab",
                "50",
                "--out-dir",
                out,
            ],
            dir.path(),
        );
        assert_code(&synth, 0);
    }
    for name in [
        "collection.tsv",
        "impacts.jsonl",
        "queries.tsv",
        "qrels.txt",
    ] {
        let one = fs::read(dir.path().join("one").join(name)).unwrap();
        let two = fs::read(dir.path().join("two").join(name)).unwrap();
        assert_eq!(one, two, "{name} differs between identical seeds");
    }
}

#[test]
fn synth_zero_docs_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = duet(&["synth", "--docs", "0", "--out-dir", "w"], dir.path());
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("num_docs"));
}

#[test]
fn build_report_matches_stats_and_invariant() {
    let dir = workspace_with_index();
    let build = duet(
        &[
            "build",
            "--collection",
            "work/collection.tsv",
            "--impacts",
            "work/impacts.jsonl",
            "--out",
            "work/index2",
        ],
        dir.path(),
    );
    assert_code(&build, 0);
    let report = stdout_json(&build);

    let stats = duet(&["stats", "--index", "work/index2"], dir.path());
    assert_code(&stats, 0);
    let summary = stdout_json(&stats);
    // The report's postings count is the sum of lexicon doc frequencies,
    // which is exactly what `stats` recounts from the loaded index.
    assert_eq!(report["postings"], summary["postings"]);
    assert_eq!(report["docs"], summary["documents"]);
    assert_eq!(report["terms"], summary["terms"]);
}

#[test]
fn stats_reports_query_summary_and_upper_bounds() {
    let dir = workspace_with_index();
    let stats = duet(
        &[
            "stats",
            "--index",
            "work/index",
            "--queries",
            "work/queries.tsv",
            "--upper-bounds-out",
            "work/ub.csv",
        ],
        dir.path(),
    );
    assert_code(&stats, 0);
    let summary = stdout_json(&stats);
    assert_eq!(summary["queries"]["count"], 10);
    assert!(summary["queries"]["avg_terms"].as_f64().unwrap() > 0.0);
    let ub = fs::read_to_string(dir.path().join("work/ub.csv")).unwrap();
    assert!(ub.starts_with("qid,term,channel,max_impact\n"));
    assert!(ub.lines().count() > 10);
}

#[test]
fn missing_collection_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = duet(
        &["build", "--collection", "nope.tsv", "--out", "idx"],
        dir.path(),
    );
    assert_code(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn absent_impacts_builds_zero_learned_channel_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("coll.tsv"),
        "d1\talpha beta\nd2\tbeta gamma\n",
    )
    .unwrap();

    // Flag given but the file does not exist.
    let with_flag = duet(
        &[
            "build",
            "--collection",
            "coll.tsv",
            "--impacts",
            "gone.jsonl",
            "--out",
            "idx1",
        ],
        dir.path(),
    );
    assert_code(&with_flag, 0);
    assert!(String::from_utf8_lossy(&with_flag.stderr).contains("warning"));
    assert_eq!(stdout_json(&with_flag)["learned_postings"], 0);

    // Flag omitted entirely.
    let without = duet(
        &["build", "--collection", "coll.tsv", "--out", "idx2"],
        dir.path(),
    );
    assert_code(&without, 0);
    assert!(String::from_utf8_lossy(&without.stderr).contains("warning"));
    assert_eq!(stdout_json(&without)["learned_postings"], 0);
}

#[test]
fn unknown_strategy_lists_valid_ones() {
    let dir = workspace_with_index();
    let out = duet(
        &[
            "query",
            "--index",
            "work/index",
            "--queries",
            "work/queries.tsv",
            "--strategy",
            "wand",
            "--run-out",
            "r.run",
        ],
        dir.path(),
    );
    assert_code(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    for name in [
        "bm25",
        "learned",
        "gt",
        "gti",
        "exhaustive-primary",
        "exhaustive-learned",
    ] {
        assert!(stderr.contains(name), "stderr should list {name}: {stderr}");
    }
}

#[test]
fn emit_primary_rejected_for_unguided_strategies() {
    let dir = workspace_with_index();
    let out = duet(
        &[
            "query",
            "--index",
            "work/index",
            "--queries",
            "work/queries.tsv",
            "--strategy",
            "bm25",
            "--run-out",
            "r.run",
            "--emit-primary",
        ],
        dir.path(),
    );
    assert_code(&out, 2);
}

#[test]
fn k_zero_is_rejected() {
    let dir = workspace_with_index();
    let out = duet(
        &[
            "query",
            "--index",
            "work/index",
            "--queries",
            "work/queries.tsv",
            "--strategy",
            "bm25",
            "--k",
            "0",
            "--run-out",
            "r.run",
        ],
        dir.path(),
    );
    assert_code(&out, 2);
}

#[test]
fn corrupt_index_is_runtime_error() {
    let dir = workspace_with_index();
    let postings = dir.path().join("work/index/postings.bin");
    let mut bytes = fs::read(&postings).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xFF;
    fs::write(&postings, bytes).unwrap();
    let out = duet(
        &[
            "query",
            "--index",
            "work/index",
            "--queries",
            "work/queries.tsv",
            "--strategy",
            "bm25",
            "--run-out",
            "r.run",
        ],
        dir.path(),
    );
    assert_code(&out, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));
}

#[test]
fn evaluate_worked_examples() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, body: &str| fs::write(dir.path().join(name), body).unwrap();
    write("qrels.txt", "q1 0 rel 1\n");
    write("lat.tsv", "q1\t1500\n");

    // First relevant at rank 1.
    write("top.run", "q1 Q0 rel 1 9 tag\nq1 Q0 other 2 8 tag\n");
    let top = duet(
        &[
            "evaluate",
            "--run",
            "top.run",
            "--qrels",
            "qrels.txt",
            "--latency",
            "lat.tsv",
        ],
        dir.path(),
    );
    assert_code(&top, 0);
    let report = stdout_json(&top);
    assert!((report["rr_at_10"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((report["latency"]["mean_ms"].as_f64().unwrap() - 1.5).abs() < 1e-9);

    // Relevant at rank 2: the NDCG worked example.
    write("second.run", "q1 Q0 other 1 9 tag\nq1 Q0 rel 2 8 tag\n");
    let second = duet(
        &[
            "evaluate",
            "--run",
            "second.run",
            "--qrels",
            "qrels.txt",
            "--latency",
            "lat.tsv",
        ],
        dir.path(),
    );
    assert_code(&second, 0);
    let ndcg = stdout_json(&second)["ndcg_at_10"].as_f64().unwrap();
    assert!((ndcg - 0.6309).abs() < 1e-4, "got {ndcg}");

    // Empty run against non-empty qrels.
    write("empty.run", "");
    let empty = duet(
        &[
            "evaluate",
            "--run",
            "empty.run",
            "--qrels",
            "qrels.txt",
            "--latency",
            "lat.tsv",
        ],
        dir.path(),
    );
    assert_code(&empty, 0);
    assert_eq!(stdout_json(&empty)["rr_at_10"].as_f64().unwrap(), 0.0);
}

#[test]
fn evaluate_parse_error_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("qrels.txt"), "q1 0 rel 1\n").unwrap();
    fs::write(dir.path().join("lat.tsv"), "q1\t100\n").unwrap();
    fs::write(
        dir.path().join("bad.run"),
        "q1 Q0 rel 1 9 tag\nq1 Q0 rel oops 8 tag\n",
    )
    .unwrap();
    let out = duet(
        &[
            "evaluate",
            "--run",
            "bad.run",
            "--qrels",
            "qrels.txt",
            "--latency",
            "lat.tsv",
        ],
        dir.path(),
    );
    assert_code(&out, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
}

#[test]
fn all_strategies_produce_runs() {
    let dir = workspace_with_index();
    let mut runs: Vec<(String, PathBuf)> = Vec::new();
    for strategy in [
        "bm25",
        "learned",
        "gt",
        "gti",
        "exhaustive-primary",
        "exhaustive-learned",
    ] {
        let run_out = format!("work/{strategy}.run");
        let out = duet(
            &[
                "query",
                "--index",
                "work/index",
                "--queries",
                "work/queries.tsv",
                "--strategy",
                strategy,
                "--k",
                "10",
                "--run-out",
                &run_out,
            ],
            dir.path(),
        );
        assert_code(&out, 0);
        runs.push((strategy.to_string(), dir.path().join(run_out)));
    }
    let read = |p: &PathBuf| fs::read_to_string(p).unwrap();
    let by_name = |n: &str| {
        runs.iter()
            .find(|(s, _)| s == n)
            .map(|(_, p)| read(p))
            .unwrap()
    };
    // Pruned and exhaustive traversals agree per channel; the two
    // channels disagree with each other.
    let strip_tag = |s: String| -> String {
        s.lines()
            .map(|l| l.rsplit_once(' ').unwrap().0.to_string() + "\n")
            .collect()
    };
    assert_eq!(
        strip_tag(by_name("bm25")),
        strip_tag(by_name("exhaustive-primary"))
    );
    assert_eq!(
        strip_tag(by_name("learned")),
        strip_tag(by_name("exhaustive-learned"))
    );
    assert_ne!(strip_tag(by_name("bm25")), strip_tag(by_name("learned")));
}
