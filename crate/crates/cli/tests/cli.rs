use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swarmsearch"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// 300 simulated users, one per hour from 2006-03-01.
fn synth_log(dir: &Path) -> PathBuf {
    let log = dir.join("log.tsv");
    run(&["synth", "--users", "300", "--seed", "9", "--query", "fire ants", "--out", s(&log)]);
    log
}

fn write_config(dir: &Path, flavor: &str) -> PathBuf {
    let path = dir.join(format!("{flavor}.conf"));
    std::fs::write(
        &path,
        format!("# test run\nflavor = {flavor}\ndelta = 86400\nk = 1\npartition = 2006-03-10\niterations = 4\nseed = 3\n"),
    )
    .unwrap();
    path
}

#[test]
fn sessionize_fragment_yields_five_sessions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sessions.jsonl");
    run(&["sessionize", "--in", s(&data("ants_fragment.tsv")), "--out", s(&out)]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(dir.path().join("sessions.jsonl.manifest.json").exists());
}

#[test]
fn empty_synthetic_log_is_fine() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty.tsv");
    run(&["synth", "--users", "0", "--out", s(&out)]);
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 1);
}

#[test]
fn usage_errors_exit_with_two() {
    let out = bin().args(["sessionize", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["synth", "--relevant-rank", "11", "--out", "/dev/null"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["sessionize", "--in", "/nonexistent/log", "--out", "/dev/null"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/log"));
}

#[test]
fn matrix_writes_every_run() {
    let dir = tempfile::tempdir().unwrap();
    let sessions = dir.path().join("sessions.jsonl");
    run(&["sessionize", "--in", s(&data("ants_fragment.tsv")), "--out", s(&sessions)]);
    let out_dir = dir.path().join("runs");
    run(&["simulate", "--in", s(&sessions), "--matrix", "--seed", "1", "--out-dir", s(&out_dir)]);
    let reports = std::fs::read_dir(&out_dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".report.tsv"))
        .count();
    assert_eq!(reports, 24);
    assert!(out_dir.join("simulate.manifest.json").exists());
}

#[test]
fn stepwise_commands_match_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let log = synth_log(d);
    let (names, suffixes) = (data("names.txt"), data("suffixes.txt"));
    let lex = ["--names", s(&names), "--suffixes", s(&suffixes)];

    let piped = d.join("piped");
    let mut args = vec!["pipeline", "--log", s(&log), "--config"];
    let base_conf = write_config(d, "naive");
    args.extend([s(&base_conf), "--out-dir", s(&piped)]);
    args.extend(lex);
    run(&args);

    let all = d.join("all.jsonl");
    let union = d.join("union.jsonl");
    let labels = d.join("labels.tsv");
    run(&["sessionize", "--in", s(&log), "--out", s(&all)]);
    run(&["filter", "--in", s(&all), "--subset", "union", "--out", s(&union)]);
    let mut args = vec!["classify-intent", "--in", s(&union), "--out", s(&labels)];
    args.extend(lex);
    run(&args);
    let mut report_args: Vec<String> = vec!["report".into(), "--labels".into(), s(&labels).into()];
    for flavor in ["naive", "ranking-bias", "elaborate"] {
        let conf = write_config(d, flavor);
        let out_dir = d.join(flavor);
        run(&["simulate", "--in", s(&union), "--config", s(&conf), "--out-dir", s(&out_dir)]);
        let outcomes = std::fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .find(|p| p.to_string_lossy().ends_with(".outcomes.jsonl"))
            .unwrap();
        report_args.extend(["--run".into(), format!("{flavor}={}", outcomes.display())]);
    }
    let stepwise = d.join("report.tsv");
    report_args.extend(["--out".into(), s(&stepwise).into()]);
    let out = bin().args(&report_args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    assert_eq!(std::fs::read(&labels).unwrap(), std::fs::read(piped.join("labels.tsv")).unwrap());
    let a = std::fs::read_to_string(&stepwise).unwrap();
    let b = std::fs::read_to_string(piped.join("report.tsv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 28);
}

#[test]
fn reruns_reproduce_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let log = synth_log(d);
    let sessions = d.join("sessions.jsonl");
    run(&["sessionize", "--in", s(&log), "--out", s(&sessions)]);
    let conf = write_config(d, "elaborate");
    let digests = |out: &Path| -> Vec<serde_json::Value> {
        run(&["simulate", "--in", s(&sessions), "--config", s(&conf), "--out-dir", s(out)]);
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.join("simulate.manifest.json")).unwrap()).unwrap();
        assert_eq!(m["seed"], 3);
        m["outputs"].as_array().unwrap().iter().map(|o| o["sha256"].clone()).collect()
    };
    assert_eq!(digests(&d.join("a")), digests(&d.join("b")));
}

#[test]
fn analyze_prints_correlations() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("exp.csv");
    let mut text = String::from("order,group,task,trivial,seconds,queries\n");
    for (g, times) in [("control", [300, 250, 260, 200]), ("experimental", [200, 210, 150, 140])] {
        for user in 0..3 {
            for (order, t) in times.iter().enumerate() {
                let q = if order % 2 == 0 { "fire ants|fire ant bite" } else { "antibiotic history" };
                text.push_str(&format!("{},{g},task{},{},{},{q}\n", order + 1, user * 10 + order, order < 2, t + user * 7));
            }
        }
    }
    std::fs::write(&csv, text).unwrap();
    let out = dir.path().join("analysis.tsv");
    run(&["analyze", "--in", s(&csv), "--out", s(&out)]);
    let tsv = std::fs::read_to_string(&out).unwrap();
    assert!(tsv.contains("control") && tsv.contains("experimental"), "{tsv}");
}
