use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kantian"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kantian-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn csv_rows(out: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(out.join("equilibrium.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,alpha,type_or_x,action,cost,solver,residual,iterations"
    );
    lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn symmetric_sweep_has_one_row_per_point_and_curve() {
    let out = scratch("sym");
    let o = run(
        &["solve", "scenario=symmetric_fishing", "sweep=0:1:0.05"],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 63);
    for solver in [
        "kantian_fixed_point",
        "altruistic_closed_form",
        "nash_fixed_point",
    ] {
        assert_eq!(rows.iter().filter(|r| r[5] == solver).count(), 21);
    }
    let kantian_half = rows
        .iter()
        .find(|r| r[5] == "kantian_fixed_point" && r[1] == "0.5")
        .unwrap();
    let u: f64 = kantian_half[3].parse().unwrap();
    assert!((u - 2.0 / 7.0).abs() < 1e-8);
    assert!(out.join("symmetric_fishing.svg").exists());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["converged"], true);
    assert_eq!(meta["alpha_sweep"], "0:1:0.05");
    std::fs::remove_dir_all(out).unwrap();
}

#[test]
fn four_type_rows_and_residuals() {
    let out = scratch("four");
    let o = run(
        &[
            "solve",
            "scenario=four_type",
            "--alpha",
            "0.5",
            "--format",
            "csv",
        ],
        &out,
    );
    assert!(o.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 8);
    assert_eq!(rows.iter().filter(|r| r[5] == "rkn_direct").count(), 4);
    assert_eq!(rows.iter().filter(|r| r[5] == "hrkn_direct").count(), 4);
    assert_eq!(
        rows.iter().map(|r| r[2].as_str()).collect::<Vec<_>>(),
        ["1", "2", "3", "4", "1", "2", "3", "4"]
    );
    assert!(rows.iter().all(|r| r[6].parse::<f64>().unwrap() < 1e-10));
    assert!(!out.join("four_type.svg").exists());
    std::fs::remove_dir_all(out).unwrap();
}

#[test]
fn continuum_rows_cover_the_grid() {
    let out = scratch("cont");
    let o = run(
        &[
            "solve",
            "scenario=continuum_uniform",
            "--alpha",
            "0.5",
            "--grid-n",
            "101",
        ],
        &out,
    );
    assert!(o.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 101);
    assert_eq!(rows[100][2], "1");
    for r in &rows {
        assert!((r[3].parse::<f64>().unwrap() - 2.0 / 7.0).abs() < 1e-10);
    }
    std::fs::remove_dir_all(out).unwrap();
}

#[test]
fn config_file_with_flag_override() {
    let out = scratch("cfg");
    std::fs::create_dir_all(&out).unwrap();
    let cfg = out.join("run.cfg");
    std::fs::write(
        &cfg,
        "# windowed run\nscenario = continuum_windowed\nalpha = 0.3\ngrid_n = 51\nxi = affine\n",
    )
    .unwrap();
    let o = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .args(["--grid-n", "61", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_rows(&out).len(), 61);
    std::fs::remove_dir_all(out).unwrap();
}

#[test]
fn svg_output_is_deterministic() {
    let (a, b) = (scratch("svg-a"), scratch("svg-b"));
    for out in [&a, &b] {
        assert!(run(&["solve", "scenario=four_type", "sweep=0:1:0.25"], out)
            .status
            .success());
    }
    let read = |d: &Path| std::fs::read(d.join("four_type.svg")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert!(String::from_utf8(read(&a))
        .unwrap()
        .contains("h,r-KN type 4"));
    std::fs::remove_dir_all(a).unwrap();
    std::fs::remove_dir_all(b).unwrap();
}

#[test]
fn usage_errors_exit_2() {
    let out = scratch("usage");
    for args in [
        &["solve", "scenario=nope"][..],
        &["solve", "scenario=four_type", "alpha=1.5"],
        &["solve", "scenario=four_type", "--sweep", "0:1:0"],
        &["solve", "scenario=four_type", "colour=red"],
        &["solve"],
        &["frobnicate"],
    ] {
        let o = run(args, &out);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let _ = std::fs::remove_dir_all(out);
}

#[test]
fn missed_tolerance_exits_3_and_flags_outputs() {
    let out = scratch("tol");
    let o = run(
        &[
            "solve",
            "scenario=symmetric_fishing",
            "alpha=0.5",
            "max_iter=3",
        ],
        &out,
    );
    assert_eq!(o.status.code(), Some(3));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["converged"], false);
    assert!(out.join("equilibrium.csv").exists());
    std::fs::remove_dir_all(out).unwrap();
}

#[test]
fn verify_reports_both_checks() {
    let o = bin()
        .args(["verify", "scenario=continuum_uniform", "alpha=0.5"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("pontryagin_residual="));
    assert!(text.contains("crosscheck_deviation="));
    assert!(!text.contains("FAIL"));
}

#[test]
fn list_scenarios_names_everything() {
    let o = bin().arg("list-scenarios").output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in [
        "symmetric_fishing",
        "four_type",
        "continuum_uniform",
        "continuum_windowed",
    ] {
        assert!(text.contains(name));
    }
}
