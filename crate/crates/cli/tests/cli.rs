#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use jigsaw_cli::{
    cmd_estimate_trials, cmd_pipeline, cmd_reconstruct, exit_code, read_distribution, Cli,
    EstimateArgs, PipelineArgs, ReconstructArgs,
};
use clap::Parser;
use jigsaw_core::io::{to_json_string, CountFile, PlanFile, PmfFile};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ghz4").join(name)
}

fn fixture_marginals() -> Vec<PathBuf> {
    (0..4).map(|i| fixture(&format!("cpm_{i:03}.json"))).collect()
}

fn reconstruct_args(args: &[&str]) -> ReconstructArgs {
    let cli = Cli::try_parse_from(["jigsaw", "reconstruct"].iter().chain(args)).unwrap();
    match cli.command {
        jigsaw_cli::Command::Reconstruct(a) => a,
        _ => unreachable!(),
    }
}

fn pipeline_args(args: &[&str]) -> PipelineArgs {
    let cli = Cli::try_parse_from(["jigsaw", "pipeline"].iter().chain(args)).unwrap();
    match cli.command {
        jigsaw_cli::Command::Pipeline(a) => a,
        _ => unreachable!(),
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ghz4_reconstruction(dir: &Path) -> PathBuf {
    let out = dir.join("out.json");
    let mut argv: Vec<String> = vec![
        "--global".into(),
        path_str(&fixture("global.json")).into(),
        "--out".into(),
        path_str(&out).into(),
    ];
    argv.extend(fixture_marginals().iter().map(|p| path_str(p).to_string()));
    let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
    cmd_reconstruct(&reconstruct_args(&argv)).unwrap();
    out
}

#[test]
fn ghz4_matches_golden_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = ghz4_reconstruction(dir.path());
    assert_eq!(fs::read(&out).unwrap(), fs::read(fixture("expected.json")).unwrap());
    assert_eq!(
        fs::read(dir.path().join("out.convergence.json")).unwrap(),
        fs::read(fixture("expected.convergence.json")).unwrap()
    );
}

#[test]
fn ghz4_golden_agrees_with_oracle() {
    let global = read_distribution(&fixture("global.json")).unwrap();
    let prior: oracle::Dist = global.pmf.iter().map(|(o, p)| (o.to_string(), p)).collect();
    let marginals: Vec<(Vec<usize>, oracle::Dist)> = fixture_marginals()
        .iter()
        .map(|path| {
            let d = read_distribution(path).unwrap();
            (d.qubits.unwrap(), d.pmf.iter().map(|(o, p)| (o.to_string(), p)).collect())
        })
        .collect();
    let want = oracle::reconstruct(&prior, &marginals, true, 1e-4, 100);
    let golden = read_distribution(&fixture("expected.json")).unwrap();
    assert_eq!(golden.pmf.len(), want.len());
    for (o, p) in golden.pmf.iter() {
        assert!((p - want[&o.to_string()]).abs() < 1e-12, "{o}");
    }
}

#[test]
fn no_marginals_returns_the_normalized_global() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.json");
    let args = reconstruct_args(&["--global", path_str(&fixture("global.json")), "--out", path_str(&out)]);
    cmd_reconstruct(&args).unwrap();
    let got = read_distribution(&out).unwrap().pmf;
    let want = read_distribution(&fixture("global.json")).unwrap().pmf;
    assert_eq!(got.outcomes(), want.outcomes());
    assert_eq!(got.probabilities(), want.probabilities());
}

#[test]
fn mismatched_marginal_is_rejected_with_its_name() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"width": 4, "qubits": [1, 0], "shots": 3, "counts": {"101": 3}}"#).unwrap();
    let out = dir.path().join("out.json");
    let args = reconstruct_args(&[
        "--global",
        path_str(&fixture("global.json")),
        "--out",
        path_str(&out),
        path_str(&bad),
    ]);
    let err = cmd_reconstruct(&args).unwrap_err();
    assert!(format!("{err:#}").contains("bad.json"), "{err:#}");
    assert_eq!(exit_code(&err), 2);

    let wide = dir.path().join("wide.json");
    fs::write(&wide, r#"{"width": 5, "qubits": [1, 0], "shots": 3, "counts": {"10": 3}}"#).unwrap();
    let args = reconstruct_args(&[
        "--global",
        path_str(&fixture("global.json")),
        "--out",
        path_str(&out),
        path_str(&wide),
    ]);
    let err = cmd_reconstruct(&args).unwrap_err();
    assert!(format!("{err:#}").contains("wide.json"), "{err:#}");
}

#[test]
fn disjoint_marginal_exits_with_numerical_status() {
    let dir = tempfile::tempdir().unwrap();
    let global = dir.path().join("g.json");
    fs::write(&global, r#"{"width": 2, "shots": 5, "counts": {"00": 5}}"#).unwrap();
    let m = dir.path().join("m.json");
    fs::write(&m, r#"{"width": 2, "qubits": [0], "shots": 5, "counts": {"1": 5}}"#).unwrap();
    let out = dir.path().join("o.json");
    let status = Command::new(env!("CARGO_BIN_EXE_jigsaw"))
        .args(["reconstruct", "--global", path_str(&global), "--out", path_str(&out), path_str(&m)])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(3));
    let status = Command::new(env!("CARGO_BIN_EXE_jigsaw"))
        .args(["reconstruct", "--global", path_str(&dir.path().join("missing.json")), "--out", path_str(&out)])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
}

#[test]
fn estimate_trials_prints_the_count() {
    let text = cmd_estimate_trials(&EstimateArgs {
        subset_size: 2,
        confidence: 0.9999,
    })
    .unwrap();
    assert_eq!(text, "148\n");
    let output = Command::new(env!("CARGO_BIN_EXE_jigsaw"))
        .args(["estimate-trials", "--subset-size", "2"])
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(output.stdout).unwrap(), "148\n");
}

fn assert_round_trips(path: &Path) {
    let text = fs::read_to_string(path).unwrap();
    let name = path.file_name().unwrap().to_str().unwrap();
    let again = if name == "plan.json" {
        let f: PlanFile = serde_json::from_str(&text).unwrap();
        to_json_string(&PlanFile::new(&f.to_plan().unwrap(), f.trials.as_ref()))
    } else if name == "profile.json" {
        let v: Vec<jigsaw_core::noise_sim::ChannelError> = serde_json::from_str(&text).unwrap();
        to_json_string(&v)
    } else if text.contains("\"counts\"") {
        let f: CountFile = serde_json::from_str(&text).unwrap();
        let counts = f.to_counts().unwrap();
        match &f.qubits {
            Some(q) => to_json_string(&CountFile::marginal(f.width, q, &counts).unwrap()),
            None => to_json_string(&CountFile::global(&counts)),
        }
    } else if text.contains("\"probabilities\"") {
        let f: PmfFile = serde_json::from_str(&text).unwrap();
        to_json_string(&PmfFile::from_pmf(&f.to_pmf().unwrap()))
    } else {
        return;
    };
    assert_eq!(again, text, "{}", path.display());
}

#[test]
fn written_files_read_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    cmd_pipeline(&pipeline_args(&[
        "--workload",
        "planted:6:0.5:8",
        "--layers",
        "2:3",
        "--trials",
        "8000",
        "--out-dir",
        path_str(&run),
    ]))
    .unwrap();
    let mut checked = 0;
    for entry in fs::read_dir(&run).unwrap().chain(fs::read_dir(run.join("counts")).unwrap()) {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            assert_round_trips(&path);
            checked += 1;
        }
    }
    assert!(checked > 10);
}

#[test]
fn noiseless_pipeline_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("clean.json");
    fs::write(&profile, to_json_string(&vec![[0.0, 0.0]; 5])).unwrap();
    let run = dir.path().join("run");
    cmd_pipeline(&pipeline_args(&[
        "--workload",
        "ghz:5",
        "--profile",
        path_str(&profile),
        "--trials",
        "4000",
        "--out-dir",
        path_str(&run),
    ]))
    .unwrap();
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["baseline"]["pst"], 1.0);
    assert_eq!(report["jigsaw"]["pst"], 1.0);
    assert_eq!(report["jigsaw"]["ist"], "inf");
}

#[test]
fn bad_flags_are_usage_errors() {
    let status = Command::new(env!("CARGO_BIN_EXE_jigsaw"))
        .args(["pipeline", "--workload", "ghz:4", "--layers", "5:2", "--out-dir", "x"])
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
    let status = Command::new(env!("CARGO_BIN_EXE_jigsaw"))
        .args(["pipeline", "--workload", "ghz:4", "--split-fraction", "1.5", "--out-dir"])
        .arg(tempfile::tempdir().unwrap().path())
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(2));
}
