use std::process::{Command, Output};

fn smf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smf")).args(args).output().expect("spawn smf")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_on_every_subcommand() {
    for sub in ["modes", "calibrate", "scan", "fit", "oracle-check"] {
        let o = smf(&[sub, "--help"]);
        assert!(o.status.success(), "{sub}");
        assert!(stdout(&o).contains("Usage"), "{sub}");
    }
}

#[test]
fn modes_table_has_51_rows() {
    let o = smf(&["modes", "--c-range", "0:5:0.1", "--points", "129"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "c, chi0, chi1, chi2");
    assert_eq!(lines.len(), 52);
    let row: Vec<f64> = lines[39].split(',').map(|s| s.trim().parse().unwrap()).collect();
    assert!((row[0] - 3.8).abs() < 1e-9);
    assert!(row[1] > 0.97 && (row[2] - 0.9).abs() < 0.05 && (row[3] - 0.5).abs() < 0.08, "{row:?}");
}

#[test]
fn modes_eigenmode_samples_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("phi.csv");
    let o = smf(&[
        "modes",
        "--c-range",
        "1:1:1",
        "--points",
        "65",
        "--eigenmodes-at",
        "0.7,3.8",
        "--eigenmodes-output",
        p.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&p).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 65);
}

#[test]
fn bad_range_is_config_error() {
    let o = smf(&["modes", "--c-range", "5:0:0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error[config]:"));
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn fit_empty_csv_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.csv");
    std::fs::write(&p, "").unwrap();
    let o = smf(&["fit", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn missing_file_exits_4() {
    let o = smf(&["fit", "/nonexistent/scan.csv"]);
    assert_eq!(o.status.code(), Some(4));
    let o = smf(&["scan", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn unknown_preset_and_key_exit_2() {
    assert_eq!(smf(&["calibrate", "--preset", "nope"]).status.code(), Some(2));
    let o = smf(&["calibrate", "--preset", "single_mode", "--set", "pump.colour=3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gain_too_high_exits_2() {
    let o = smf(&["calibrate", "--preset", "single_mode", "--set", "pump.pair_probability=0.5"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn calibrate_reports_gain() {
    let o = smf(&["calibrate", "--preset", "single_mode"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("gamma_l_per_w = "));
    assert!(text.contains("pair_probability = 3.9"));
}

#[test]
fn small_scan_fit_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    // coarse grid and short gate keep the mode count small
    std::fs::write(
        &cfg,
        "preset = \"single_mode\"\n[grid]\npoints = 129\n[scan]\npoints = 9\n",
    )
    .unwrap();
    let out = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for o in &out {
        let r = smf(&["scan", cfg.to_str().unwrap(), "--set", "detection.gate_ps=200", "-o", o.to_str().unwrap()]);
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let a = std::fs::read(&out[0]).unwrap();
    assert_eq!(a, std::fs::read(&out[1]).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("tau_ps, p4, p2_ab, p2_acc, pA, pB, pC, pD\n"));
    assert_eq!(text.lines().count(), 10);

    let f = smf(&["fit", out[0].to_str().unwrap()]);
    assert!(f.status.success(), "{}", String::from_utf8_lossy(&f.stderr));
    let fit = stdout(&f);
    for key in ["V = ", "V_err = ", "tau0_ps = ", "sigma_ps = ", "baseline = "] {
        assert!(fit.contains(key), "{fit}");
    }
    let v: f64 = fit.lines().next().unwrap()["V = ".len()..].parse().unwrap();
    assert!(v > 0.3 && v < 1.0, "{v}");

    let f2 = smf(&["fit", out[0].to_str().unwrap(), "--observable", "twofold", "--pulses", "1e10"]);
    assert!(f2.status.success(), "{}", String::from_utf8_lossy(&f2.stderr));
    assert_eq!(smf(&["fit", out[0].to_str().unwrap(), "--observable", "sixfold"]).status.code(), Some(2));
}

#[test]
fn oracle_check_small_suite() {
    let o = smf(&["oracle-check", "--states", "5", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("max_deviation = "));
}
