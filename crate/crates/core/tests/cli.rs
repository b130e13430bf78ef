use std::ffi::OsStr;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn defectors<S: AsRef<OsStr>>(args: &[S], out: Option<&Path>, seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_defectors"));
    cmd.args(args).env_remove("DF_SEED");
    if let Some(dir) = out {
        cmd.arg("--out").arg(dir);
    }
    if let Some(seed) = seed_env {
        cmd.env("DF_SEED", seed);
    }
    cmd.output().unwrap()
}

const TINY: &[&str] = &[
    "run",
    "--grid",
    "5x4",
    "--generations",
    "6",
    "--rounds",
    "8",
    "--runs",
    "2",
];

fn tiny<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    TINY.iter().chain(extra).copied().collect()
}

#[test]
fn run_writes_the_named_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = defectors(
        &tiny(&["--case", "I", "--seed", "42"]),
        Some(tmp.path()),
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut names: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "caseI_avg.csv",
            "caseI_run0.csv",
            "caseI_run1.csv",
            "caseI_summary.json",
            "summary.json"
        ]
    );
    let csv = fs::read_to_string(tmp.path().join("caseI_run0.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "generation,frac_cooperator,frac_defector,frac_top_defector,frac_neutral,fitness_mean,fitness_max,fitness_min"
    );
    assert_eq!(lines.len(), 8);
    assert!(lines[1].starts_with("0,0.800000,0.200000,"));
    assert!(!csv.contains('\r'));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("caseI_summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["case"], "I");
    assert_eq!(summary["runs"], 2);
}

#[test]
fn three_cases_report_peak_order() {
    let tmp = tempfile::tempdir().unwrap();
    let out = defectors(&tiny(&["--case", "all"]), Some(tmp.path()), None);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap())
            .unwrap();
    let cases = report["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 3);
    let order: Vec<&str> = report["peak_defector_order"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    let mut expected: Vec<(&str, f64)> = cases
        .iter()
        .map(|c| {
            (
                c["case"].as_str().unwrap(),
                c["peak_defector"].as_f64().unwrap(),
            )
        })
        .collect();
    expected.sort_by(|a, b| b.1.total_cmp(&a.1));
    assert_eq!(order, expected.iter().map(|e| e.0).collect::<Vec<_>>());
    for id in ["I", "IIA", "IIB"] {
        assert!(tmp.path().join(format!("case{id}_avg.csv")).exists());
    }
}

#[test]
fn env_seed_is_a_fallback() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str, args: &[&str], env: Option<&str>| {
        let out = tmp.path().join(dir);
        assert!(defectors(&tiny(args), Some(&out), env).status.success());
        fs::read(out.join("caseIIB_run0.csv")).unwrap()
    };
    let flag = run("flag", &["--case", "IIB", "--seed", "11"], None);
    let env = run("env", &["--case", "IIB"], Some("11"));
    let both = run("both", &["--case", "IIB", "--seed", "11"], Some("99"));
    let other = run("other", &["--case", "IIB"], Some("12"));
    assert_eq!(flag, env);
    assert_eq!(flag, both);
    assert_ne!(flag, other);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["run", "--mutation", "1.5"][..],
        &["run", "--grid", "axb"],
        &["run", "--unknown"],
        &["frobnicate"],
        &["inspect-chromosome", "123"],
    ] {
        let out = defectors(args, None, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(
        defectors(&["run"], None, Some("abc")).status.code(),
        Some(2)
    );
    assert_eq!(defectors(&["--help"], None, None).status.code(), Some(0));
}

#[test]
fn io_failure_exits_with_one_and_cleans_up() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("not-a-dir");
    fs::write(&blocker, "x").unwrap();
    let out = defectors(&tiny(&["--case", "I"]), Some(&blocker), None);
    assert_eq!(out.status.code(), Some(1));

    // the averaged CSV path is taken by a directory, so writing fails midway
    let dir = tmp.path().join("partial");
    fs::create_dir_all(dir.join("caseI_avg.csv")).unwrap();
    let out = defectors(&tiny(&["--case", "I"]), Some(&dir), None);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.join("caseI_run0.csv").exists());
    assert!(!dir.join("caseI_run1.csv").exists());
}

#[test]
fn validate_payoffs_report() {
    let out = defectors(&["validate-payoffs"], None, None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("Case I:") && lines[0].contains("Strong dilemma; 2R>T+S holds"));
    assert!(
        lines[1].starts_with("Case IIA:")
            && lines[1].contains("S=-5")
            && lines[1].contains("Weak dilemma; 2R>T+S holds")
    );
    assert!(
        lines[2].starts_with("Case IIB:")
            && lines[2].contains("Weak dilemma; 2R>T+S fails (equality)")
    );

    let only = defectors(&["validate-payoffs", "--case", "IIA"], None, None);
    assert_eq!(String::from_utf8(only.stdout).unwrap().lines().count(), 1);
}

#[test]
fn inspect_chromosome_report() {
    let out = defectors(&["inspect-chromosome", "7FFFFFFFFFFFFFFFFF"], None, None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("class=TopDefector, fraction=0.000"));
    assert!(text.contains("opening move: D"));

    let tft = defectors::Chromosome::tit_for_tat().encode_hex();
    let out = defectors(&["inspect-chromosome", &tft], None, None);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("opening move: C"));
    assert!(text.contains("second move after opponent C: C, D: D"));
}
