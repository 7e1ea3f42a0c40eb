use std::io::Write as _;
use std::process::Command;

use formal_variational::frontend::run_command;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String) {
    let out = run_command(std::iter::once("varcheck").chain(args.iter().copied()));
    (out.exit_code, out.rendered)
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let mut argv = vec!["--format", "json"];
    argv.extend_from_slice(args);
    let (code, text) = run(&argv);
    (
        code,
        serde_json::from_str(&text).unwrap_or_else(|e| panic!("{e}: {text}")),
    )
}

#[test]
fn helmholtz_passes_for_variational_input() {
    let (code, json) = run_json(&["helmholtz", "y'' + y^2"]);
    assert_eq!(code, 0);
    assert_eq!(json["status"], "pass");
    assert_eq!(json["payload"]["passed"], true);
}

#[test]
fn lagrangian_of_second_derivative() {
    let (code, json) = run_json(&["lagrangian", "y''"]);
    assert_eq!(code, 0);
    assert_eq!(json["payload"]["lagrangian"], "1/2*y*y''");
    assert_eq!(json["payload"]["verified"], true);
}

#[test]
fn lagrangian_refuses_without_force() {
    let (code, json) = run_json(&["lagrangian", "z^2*y' + z*y"]);
    assert_eq!(code, 1);
    assert!(json["payload"].get("lagrangian").is_none());
    assert!(json["payload"]["diagnostic"]
        .as_str()
        .unwrap()
        .contains("fails"));

    let (code, json) = run_json(&["lagrangian", "--force", "z^2*y' + z*y"]);
    assert_eq!(code, 1);
    assert_eq!(json["payload"]["verified"], false);
    assert!(json["payload"]["lagrangian"].is_string());
}

#[test]
fn symplectic_reports_violating_pair() {
    let (code, json) = run_json(&["symplectic", "y*y''", "--window", "-2:10"]);
    assert_eq!(code, 1);
    assert_eq!(json["status"], "fail");
    let v = &json["payload"]["violation"];
    assert!(v["i"].is_i64() && v["j"].is_i64());
}

#[test]
fn exit_code_matrix() {
    let cases: &[(&[&str], i32)] = &[
        (&["delta", "y*y'"], 0),
        (&["helmholtz", "y'' + y^2"], 0),
        (&["helmholtz", "y'"], 1),
        (&["helmholtz", "1/0*y"], 2),
        (&["helmholtz", "y +"], 2),
        (&["total-derivative", "y*y'"], 0),
        (&["total-derivative", "y"], 1),
        (&["self-adjoint", "--op", "1; 0; z"], 1),
        (&["self-adjoint", "--op", "1; 2*z; z^2"], 0),
        (&["adjoint", "--op", "z; z^2"], 0),
        (&["residue", "3*z^-1 + z"], 0),
        (&["residue", "z^-3 + O(z^-2)"], 3),
        (&["linearize", "y'^2 - 4*y", "--at", "z^2"], 0),
        (&["tangent", "y'^2 - 4*y", "--at", "z^2"], 0),
        (
            &[
                "tangent",
                "z*y' + y'^2 - y",
                "--at",
                "z + 1",
                "--space",
                "disc",
                "--window",
                "16",
            ],
            0,
        ),
        (&["expand", "y^2", "--window", "-1:4", "--coeff", "0"], 0),
        (&["expand", "y^2", "--window", "-1:4", "--coeff", "9"], 3),
        (&["expand", "y^2", "--window", "3:4"], 2),
        (&["el-check", "y*y'' + z*y^2", "--window", "-3:12"], 0),
        (&["el-check", "z^-3*y'''^3", "--window", "-3:4"], 3),
        (&["symplectic", "y'' + y^2", "--window", "-3:12"], 0),
        (&["symplectic", "z^-3*y'''^3", "--window", "-3:4"], 3),
        (&["action", "--op", "1; 0; 1"], 0),
        (&["action", "--op", "y"], 2),
        (&["selfcheck", "--count", "20"], 0),
        (&["no-such-command"], 2),
        (&["helmholtz", "y", "--window"], 2),
        (&["--help"], 0),
    ];
    for (args, want) in cases {
        let (code, text) = run(args);
        assert_eq!(code, *want, "{args:?} gave {code}:\n{text}");
    }
}

#[test]
fn text_and_json_agree() {
    let runs: &[&[&str]] = &[
        &["helmholtz", "y' + y^2"],
        &["delta", "z*y'^2 + y^3"],
        &["lagrangian", "y'' + y^2"],
        &["adjoint", "--op", "z; z^2; 1"],
        &["symplectic", "y*y''", "--window", "-2:10"],
        &["tangent", "y'^2 - 4*y", "--at", "z^2"],
    ];
    for args in runs {
        let (_, json) = run_json(args);
        let (_, text) = run(args);
        let status = json["status"].as_str().unwrap();
        assert!(text.starts_with(&format!(
            "{}: {status}\n",
            json["command"].as_str().unwrap()
        )));
        let mut strings = Vec::new();
        collect_strings(&json["payload"], &mut strings);
        for s in strings {
            assert!(
                text.contains(&s),
                "{args:?}: text output lacks {s:?}\n{text}"
            );
        }
    }
}

fn collect_strings(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::String(s) => out.push(s.clone()),
        Value::Array(a) => a.iter().for_each(|x| collect_strings(x, out)),
        Value::Object(m) => m.values().for_each(|x| collect_strings(x, out)),
        Value::Bool(b) => out.push(b.to_string()),
        _ => {}
    }
}

#[test]
fn file_input_runs_every_line() {
    let dir = std::env::temp_dir().join(format!("varcheck-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("equations.txt");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# two equations\ny'' + y^2\n\ny'  # not variational").unwrap();
    drop(f);
    let (code, json) = run_json(&["helmholtz", "--file", path.to_str().unwrap()]);
    std::fs::remove_dir_all(&dir).ok();
    let reports = json.as_array().expect("array of reports");
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["status"], "pass");
    assert_eq!(reports[1]["status"], "fail");
    assert_eq!(code, 1);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_varcheck");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let ok = status(&["helmholtz", "y'' + y^2"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).starts_with("helmholtz: pass"));
    assert_eq!(
        status(&["symplectic", "y*y''", "--window", "-2:10"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(status(&["helmholtz", "1/0*y"]).status.code(), Some(2));
}

#[test]
fn seed_changes_selfcheck_battery_reproducibly() {
    let a = run(&[
        "--format",
        "json",
        "--seed",
        "7",
        "selfcheck",
        "--count",
        "10",
    ]);
    let b = run(&[
        "--format",
        "json",
        "--seed",
        "7",
        "selfcheck",
        "--count",
        "10",
    ]);
    assert_eq!(a, b);
    assert_eq!(a.0, 0);
}
