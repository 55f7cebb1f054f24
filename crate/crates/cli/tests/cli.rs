use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn underlay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_underlay"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// A copy of a shipped config with a smaller trial count.
fn quick_config(dir: &Path, name: &str, trials: usize) -> PathBuf {
    let text = fs::read_to_string(shipped(name)).unwrap();
    let path = dir.join(name);
    fs::write(&path, text.replace("trials = 1000", &format!("trials = {trials}"))).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_preset_echoes_parameters() {
    let out = underlay(&["validate", "--config", shipped("fig3.cfg").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("K=10, M_b=128, M_u=4"), "{text}");
    for key in [
        "geometry.num_ues",
        "geometry.path_loss_exponent",
        "estimation.variance_fraction",
        "constraints.total_power_dbm",
        "sweep.values",
        "runtime.seed",
    ] {
        assert!(text.contains(key), "missing {key}");
    }
}

#[test]
fn every_shipped_config_validates() {
    for name in ["fig2.cfg", "fig3.cfg", "fig4.cfg", "fig5.cfg", "min_rate.cfg"] {
        let out = underlay(&["validate", "--config", shipped(name).to_str().unwrap()]);
        assert!(out.status.success(), "{name}: {}", stderr(&out));
    }
}

#[test]
fn unknown_key_exits_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(shipped("fig3.cfg"))
        .unwrap()
        .replace("side = ", "sides = ");
    let path = dir.path().join("bad.cfg");
    fs::write(&path, text).unwrap();
    let out = underlay(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("geometry.sides"), "{}", stderr(&out));
}

#[test]
fn bad_value_names_its_key() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(shipped("fig3.cfg"))
        .unwrap()
        .replace("ue_antennas = 4", "ue_antennas = 2");
    let path = dir.path().join("bad.cfg");
    fs::write(&path, text).unwrap();
    let out = underlay(&[
        "run",
        "--config",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("geometry.ue_antennas"), "{}", stderr(&out));
    assert!(!dir.path().join("records.csv").exists());
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = underlay(&["validate", "--config", "/nonexistent/underlay.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path(), "fig3.cfg", 2);
    let out_dir = dir.path().join("out");
    let out = underlay(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let records = fs::read_to_string(out_dir.join("records.csv")).unwrap();
    let lines: Vec<&str> = records.lines().collect();
    assert_eq!(
        lines[0],
        "sweep_var,sweep_value,solver,trial,admitted,total_power_mw,est_int_pu1_mw,est_int_pu2_mw,true_int_pu1_mw,true_int_pu2_mw"
    );
    // four sweep values, two trials, three solvers
    assert_eq!(lines.len(), 1 + 4 * 2 * 3);
    assert!(lines[1].starts_with("bs_antennas,32,equal_power,0,"));

    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "sweep_var,sweep_value,solver,mean_admitted,stderr");
    assert_eq!(lines.len(), 1 + 4 * 3);
}

#[test]
fn output_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path(), "fig5.cfg", 4);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out_dir = dir.path().join(format!("t{threads}"));
        let out = underlay(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push((
            fs::read(out_dir.join("records.csv")).unwrap(),
            fs::read(out_dir.join("summary.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn seed_override_changes_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path(), "fig3.cfg", 3);
    let run = |seed: &str| {
        let out_dir = dir.path().join(format!("s{seed}"));
        let out = underlay(&[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--seed",
            seed,
        ]);
        assert!(out.status.success());
        fs::read(out_dir.join("records.csv")).unwrap()
    };
    assert_eq!(run("11"), run("11"));
    assert_ne!(run("11"), run("12"));
}

#[test]
fn oracle_suite_passes() {
    let out = underlay(&["oracle"]);
    assert!(out.status.success(), "{}{}", stdout(&out), stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3, "{text}");
}
