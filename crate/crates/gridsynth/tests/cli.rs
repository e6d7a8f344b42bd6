mod common;

use std::path::Path;
use std::process::{Command, Output};

use gridsynth::NetworkDocument;

fn gridsynth(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridsynth")).args(args).current_dir(cwd).env_clear().output().unwrap()
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = gridsynth(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridsynth(&["generate", "--params", "p.json", "--out-dir", "s"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--topology"));
    assert_eq!(gridsynth(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(gridsynth(&["powerflow", "--sample", "s", "--band", "1.1:0.9"], dir.path()).status.code(), Some(2));
}

#[test]
fn help_and_version() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok(&["--version"], dir.path());
    assert!(String::from_utf8_lossy(&v.stdout).starts_with("gridsynth "));
    let h = ok(&["--help"], dir.path());
    let text = String::from_utf8_lossy(&h.stdout);
    for sub in ["fit", "generate", "check", "enforce", "powerflow", "report", "pipeline"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridsynth(&["fit", "--input", "missing.json", "--out", "p.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(dir.path().join("bad.json"), b"{\"buses\": []}").unwrap();
    let out = gridsynth(&["check", "--sample", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("p.json").exists());
}

#[test]
fn pipeline_equals_composed_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_inputs(d, 150, 40, 600);
    ok(&["pipeline", "--observed", "obs.json", "--topology", "topo.json", "--samples", "12", "--seed", "7", "--out-dir", "pipe"], d);

    ok(&["fit", "--input", "obs.json", "--out", "manual/params.json"], d);
    ok(&["generate", "--topology", "topo.json", "--params", "manual/params.json", "--samples", "12", "--seed", "7", "--out-dir", "manual/samples"], d);
    std::fs::create_dir_all(d.join("manual/powerflow")).unwrap();
    for i in 0..12 {
        let s = format!("manual/samples/sample_{i}.json");
        let r = format!("manual/powerflow/sample_{i}.csv");
        ok(&["powerflow", "--sample", &s, "--report", &r], d);
    }
    ok(&["report", "--real", "obs.json", "--synthetic-dir", "manual/samples", "--out", "manual/report.csv", "--histograms", "manual/hist"], d);

    let pipe = common::tree_contents(&d.join("pipe"));
    let manual = common::tree_contents(&d.join("manual"));
    assert_eq!(pipe.keys().collect::<Vec<_>>(), manual.keys().collect::<Vec<_>>());
    assert!(pipe == manual, "pipeline output differs from composed subcommands");
    assert_eq!(pipe.len(), 1 + 12 + 12 + 2 + 6);

    let csv = String::from_utf8(pipe["report.csv"].clone()).unwrap();
    assert!(csv.starts_with("phase,mean_kw_real,mean_kw_synth,mape_percent\nA,"));
    let pf = String::from_utf8(pipe["powerflow/sample_0.csv"].clone()).unwrap();
    assert!(pf.starts_with("bus,phase,v_pu,in_band\nb0,A,1,true\n"), "{}", &pf[..80]);
}

#[test]
fn generate_is_independent_of_jobs_and_refittable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_inputs(d, 120, 30, 601);
    for jobs in ["1", "3"] {
        let out = format!("j{jobs}");
        ok(&["generate", "--topology", "topo.json", "--params", "p0.json", "--samples", "9", "--jobs", jobs, "--out-dir", &out], d);
    }
    assert_eq!(common::tree_contents(&d.join("j1")), common::tree_contents(&d.join("j3")));
    ok(&["fit", "--input", "j1/sample_3.json", "--bins", "5", "--out", "refit.json"], d);
    for i in 0..9 {
        ok(&["check", "--sample", &format!("j1/sample_{i}.json")], d);
    }
}

#[test]
fn check_flags_and_enforce_repairs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    common::write_inputs(d, 60, 20, 602);
    ok(&["generate", "--topology", "topo.json", "--params", "p0.json", "--samples", "1", "--out-dir", "s", "--scenario", "unbalanced"], d);
    let path = d.join("s/sample_0.json");
    let mut doc = NetworkDocument::parse(&std::fs::read(&path).unwrap()).unwrap();
    let phases = doc.bus_phases.as_mut().unwrap();
    phases.insert("b0".into(), vec!["B".into()]);
    std::fs::write(d.join("broken.json"), doc.to_json()).unwrap();

    let out = gridsynth(&["check", "--sample", "broken.json"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("upstream bus b0"));

    ok(&["enforce", "--sample", "broken.json", "--out", "fixed.json"], d);
    ok(&["check", "--sample", "fixed.json"], d);
    let fixed = NetworkDocument::parse(&std::fs::read(d.join("fixed.json")).unwrap()).unwrap();
    assert_eq!(fixed.bus_phases.unwrap()["b0"], vec!["A", "B", "C"]);
}
