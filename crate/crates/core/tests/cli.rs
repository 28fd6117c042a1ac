//! End-to-end tests of the `setscope` binary.

use std::fs;
use std::process::{Command, Output};

use setscope::cli::{CommandKind, RunArgs, RunConfig};

fn setscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_setscope"))
        .args(args)
        .env_remove("SETSCOPE_JOBS")
        .output()
        .expect("launch setscope")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn scl_emits_one_row_per_branch_and_momentum() {
    let o = setscope(&[
        "scl", "--km", "-1", "--ke", "1", "--w", "0.9", "--ly", "4,5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("L_y,k_y_index,k_y,k_x,epsilon,lambda_re,lambda_im,is_ground")
    );
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert!(rows.iter().all(|r| r.len() == 8));
    for ly in ["4", "5"] {
        let n = ly.parse::<usize>().unwrap();
        for branch in ["0", "pi"] {
            let ks: Vec<&str> = rows
                .iter()
                .filter(|r| r[0] == ly && r[3] == branch && r[7] == "false")
                .map(|r| r[1].as_str())
                .collect();
            assert_eq!(ks.len(), n, "L_y={ly} k_x={branch}");
        }
    }
    assert!(rows.iter().any(|r| r[7] == "true"));
}

#[test]
fn out_of_range_w_is_rejected_with_exit_code_2() {
    let o = setscope(&["scl", "--w", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("invalid-parameter") && err.contains("w"),
        "{err}"
    );
    assert!(o.stdout.is_empty());
}

#[test]
fn bad_sign_is_a_usage_error() {
    let o = setscope(&["scl", "--km", "2"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn verify_refuses_perimeters_beyond_the_oracle_cap() {
    let o = setscope(&["verify", "--ly", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("oracle size cap"), "{}", stderr(&o));
}

#[test]
fn verify_passes_on_small_perimeters() {
    let o = setscope(&[
        "verify", "--km", "-1", "--ke", "-1", "--ly", "2,3,4", "--w", "0.7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
}

#[test]
fn injected_fault_is_located_and_fails_verification() {
    let o = setscope(&["verify", "--ly", "3", "--w", "0.9", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("FAIL spectrum"), "{err}");
    assert!(
        err.contains("L_y=3") && err.contains("eigenvalue index"),
        "{err}"
    );
}

#[test]
fn classify_needs_three_even_perimeters() {
    let o = setscope(&["classify", "--ly", "6,8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("insufficient-samples"),
        "{}",
        stderr(&o)
    );
    let o = setscope(&["classify", "--ly", "5,7,9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("undefined-for-odd"), "{}", stderr(&o));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let sweep = |jobs: &str| {
        setscope(&[
            "sweep",
            "--km",
            "-1",
            "--w",
            "0.3,0.6,0.9",
            "--ly",
            "6,8",
            "--jobs",
            jobs,
        ])
    };
    let (a, b) = (sweep("1"), sweep("3"));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().next(), Some("w,L_y,gamma_00,gamma_pipi"));
    assert_eq!(stdout(&a).lines().count(), 7);

    let classify = |jobs: &str| {
        setscope(&[
            "classify", "--km", "-1", "--ke", "1", "--ly", "4,6,8", "--jobs", jobs,
        ])
    };
    let (a, b) = (classify("1"), classify("2"));
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_is_read_and_flags_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# classification run\nkm = -1\nke = 1\nw = 0.9\nly = 4,6,8\ndetect = both\nperiod-threshold = 0.05\n",
    )
    .unwrap();
    let out = dir.path().join("report.json");
    let o = setscope(&[
        "classify",
        "--config",
        cfg.to_str().unwrap(),
        "--ke",
        "-1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["eta_e"], serde_json::json!(-1));
    assert_eq!(report["eta_m"], serde_json::json!(-1));
    let echo: RunConfig = serde_json::from_value(report["config"].clone()).unwrap();
    assert_eq!(echo.ly, vec![4, 6, 8]);
    assert_eq!(echo.w, vec![0.9]);

    // the echoed configuration reproduces the run
    let again = RunArgs::from_config_text(&echo.to_config_text())
        .unwrap()
        .resolve(CommandKind::Classify)
        .unwrap();
    assert_eq!(again, echo);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "colour = blue\n").unwrap();
    let o = setscope(&["scl", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn jobs_may_come_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_setscope"))
        .args(["scl", "--ly", "4"])
        .env("SETSCOPE_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("jobs"));
}
