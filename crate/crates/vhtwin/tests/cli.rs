use std::path::Path;
use std::process::{Command, Output};

use vhtwin::{ExperimentConfig, ReportSet};

const SMALL: &[&str] = &[
    "--set",
    "network.n_bs=10",
    "--set",
    "network.degree=4",
    "--set",
    "dcs.clusters=3",
    "--set",
    "vtwin.epochs=6",
    "--set",
    "vtwin.dcs_period=3",
    "--set",
    "htwin.epochs=4",
    "--set",
    "htwin.dcs_period=2",
    "--set",
    "data.length=240",
];

fn vhtwin(args: &[&str], extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vhtwin"))
        .args(args)
        .args(extra)
        .env_remove("VHTWIN_THREADS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn report(out: &Output) -> ReportSet {
    assert_eq!(code(out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn vtwin_then_htwin_from_saved_twin() {
    let dir = tempfile::tempdir().unwrap();
    let v = report(&vhtwin(&["vtwin", "--out", p(dir.path())], SMALL));
    assert_eq!(v.reports[0].label, "vh.v");
    assert!(v.reports[0].initial_mapping_s.is_some());
    let twin = dir.path().join("twin.txt");
    assert!(twin.exists() && dir.path().join("vtwin.json").exists());

    let h = report(&vhtwin(&["htwin", "--twin", p(&twin)], SMALL));
    assert_eq!(h.reports[0].label, "vh.h");
    assert!(h.reports[0].update_rounds.is_some());
    assert!(h.reports[0].mse.is_finite());
}

#[test]
fn htwin_rejects_a_twin_of_another_shape() {
    let dir = tempfile::tempdir().unwrap();
    let twin = dir.path().join("twin.txt");
    std::fs::write(&twin, "vhtwin-twin 1\narch linear\ninput_dim 2\nparams 3\n0\n0\n0\n").unwrap();
    assert_eq!(code(&vhtwin(&["htwin", "--twin", p(&twin)], SMALL)), 1);
}

#[test]
fn csv_format_is_long_table() {
    let out = vhtwin(&["baseline", "--format", "csv"], SMALL);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phase,metric,value,value_norm"));
    assert!(lines.all(|l| l.split(',').count() == 4));
    assert!(text.contains("baseline.v,mapping_time,"));
    assert!(text.contains("baseline.h,update_rounds,"));
}

#[test]
fn synthetic_export_feeds_csv_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = vhtwin(&["synth", "--out", p(dir.path())], SMALL);
    assert_eq!(code(&out), 0);
    let grid = dir.path().join("synth.csv");
    let roster = dir.path().join("roster.csv");
    let loaded = vhtwin::dataio::load_grid_csv(&grid, "internet").unwrap();
    assert_eq!(loaded.len(), 10);
    assert!(loaded.values().all(|s| s.len() == 240 && s.breaks.is_empty()));
    assert_eq!(vhtwin::dataio::load_roster(&roster).unwrap().len(), 10);

    let from_csv = [
        "--set",
        "data.source=csv",
        "--set",
        &format!("data.path={}", p(&grid)),
        "--set",
        &format!("network.roster={}", p(&roster)),
    ];
    let csv_dir = dir.path().join("csv");
    let synth_dir = dir.path().join("synth");
    let csv_run = report(&vhtwin(&["cluster", "--out", p(&csv_dir)], &[SMALL, &from_csv].concat()));
    let synth_run = report(&vhtwin(&["cluster", "--out", p(&synth_dir)], SMALL));
    assert_eq!(csv_run.summary, synth_run.summary);
    let assignment = std::fs::read_to_string(csv_dir.join("assignment.csv")).unwrap();
    assert_eq!(assignment.lines().next(), Some("bs_id,cluster_id"));
    assert_eq!(assignment.lines().count(), 11);
    assert_eq!(assignment, std::fs::read_to_string(synth_dir.join("assignment.csv")).unwrap());
}

#[test]
fn config_file_and_echo_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    let v = report(&vhtwin(&["vtwin", "--seed", "17", "--out", p(dir.path())], SMALL));
    let echo = v.reports[0].config_echo.clone();
    assert_eq!(echo["seed"], "17");
    std::fs::write(&cfg_path, ExperimentConfig::from_echo(&echo).unwrap().to_text()).unwrap();
    let again = report(&vhtwin(&["vtwin", "--config", p(&cfg_path)], &[]));
    assert_eq!(again.reports[0].config_echo, echo);
    assert_eq!(again.reports[0].mse, v.reports[0].mse);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Usage and configuration problems.
    assert_eq!(code(&vhtwin(&["cluster", "--bogus"], &[])), 1);
    assert_eq!(code(&vhtwin(&["cluster", "--set", "no.such_key=1"], &[])), 1);
    assert_eq!(code(&vhtwin(&["cluster", "--set", "dcs.clusters=0"], &[])), 1);
    assert_eq!(code(&vhtwin(&["cluster", "--set", "network.degree=99"], &[])), 1);
    let bad_cfg = dir.path().join("bad.cfg");
    std::fs::write(&bad_cfg, "seed = 1\nseed = 2\n").unwrap();
    assert_eq!(code(&vhtwin(&["cluster", "--config", p(&bad_cfg)], &[])), 1);

    // Data problems.
    let missing = dir.path().join("missing.csv");
    let from = |path: &Path| format!("data.path={}", p(path));
    let csv_args = |path: &Path| {
        vec![
            "cluster".to_string(),
            "--set".into(),
            "data.source=csv".into(),
            "--set".into(),
            from(path),
        ]
    };
    let run = |args: Vec<String>| {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        code(&vhtwin(&args, &[]))
    };
    assert_eq!(run(csv_args(&missing)), 2);
    let garbled = dir.path().join("garbled.csv");
    std::fs::write(&garbled, "cell_id,timestamp_ms,internet\n1,0,abc\n").unwrap();
    assert_eq!(run(csv_args(&garbled)), 2);
    let twin = dir.path().join("not_a_twin.txt");
    std::fs::write(&twin, "hello\n").unwrap();
    assert_eq!(code(&vhtwin(&["htwin", "--twin", p(&twin)], SMALL)), 2);

    // Training that blows up.
    let diverge = vhtwin(&["vtwin", "--set", "train.learning_rate=1e30"], SMALL);
    assert_eq!(code(&diverge), 3, "{}", String::from_utf8_lossy(&diverge.stderr));
}
