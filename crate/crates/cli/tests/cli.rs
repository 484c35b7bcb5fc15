use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

const OSCILLATOR: &str = "\
context { base t; fields y }
lagrangian L = 1/2*(y_t^2 - y^2)
section s = sin(t)
section bad = t
variation xi = 1 + t
variation eta = cos(t)
numeric { domain [0, pi] }
onshell crit { y_tt = -y }
";

fn problem(src: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(src.as_bytes()).unwrap();
    f
}

fn jetvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetvar"))
        .args(args)
        .output()
        .unwrap()
}

fn run(src: &str, args: &[&str]) -> (i32, String, String) {
    let f = problem(src);
    let path = f.path().to_str().unwrap();
    let mut full = vec![args[0], path];
    full.extend_from_slice(&args[1..]);
    let out = jetvar(&full);
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(stdout: &str) -> serde_json::Value {
    serde_json::from_str(stdout).unwrap()
}

#[test]
fn el_prints_the_oscillator_equation() {
    let (code, out, _) = run(OSCILLATOR, &["el"]);
    assert_eq!(code, 0);
    assert_eq!(out, "e_1 = -y - y_tt\n");
    let (_, out, _) = run(OSCILLATOR, &["el", "--format", "latex"]);
    assert_eq!(out, "e_{1} = -y - y_{tt}\n");
}

#[test]
fn structured_output_is_deterministic() {
    for cmd in [
        &["el", "--format", "structured"][..],
        &["jacobi", "--format", "structured"],
        &["second-var", "--section", "s", "--format", "structured"],
    ] {
        let (code, first, _) = run(OSCILLATOR, cmd);
        assert_eq!(code, 0, "{cmd:?}");
        let (_, second, _) = run(OSCILLATOR, cmd);
        assert_eq!(first, second);
    }
    let (_, out, _) = run(OSCILLATOR, &["el", "--format", "structured"]);
    let v = json(&out);
    assert_eq!(v["command"], "el");
    assert_eq!(v["lagrangian"], "L");
    assert_eq!(v["euler_lagrange"]["kind"], "source_form");
}

#[test]
fn helmholtz_detects_non_variational_sources() {
    let src = "context { base t; fields y }\nsource e = y_t\n";
    let (code, out, _) = run(src, &["helmholtz"]);
    assert_eq!(code, 0);
    assert!(out.contains("H[1,1,{t}] = 2"), "{out}");
    assert!(out.contains("verdict: not locally variational"), "{out}");
    let (_, out, _) = run(src, &["helmholtz", "--format", "structured"]);
    let v = json(&out);
    assert_eq!(v["locally_variational"], false);
    assert_eq!(v["verdict"], "not locally variational");
    let entries = v["helmholtz"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["value"]["value"], "2");

    let src = "context { base t; fields y }\nsource e = y_tt\n";
    let (_, out, _) = run(src, &["helmholtz"]);
    assert!(out.contains("H = 0") && out.contains("verdict: locally variational"));
}

#[test]
fn helmholtz_of_an_euler_lagrange_form_vanishes() {
    let (code, out, _) = run(OSCILLATOR, &["helmholtz", "--lagrangian", "L"]);
    assert_eq!(code, 0);
    assert!(out.contains("verdict: locally variational"));
}

#[test]
fn check_critical_exits_3_off_shell() {
    let (code, out, err) = run(OSCILLATOR, &["check-critical", "--section", "bad"]);
    assert_eq!(code, 3);
    assert!(out.contains("critical: false"));
    assert!(err.contains("check failed"));
    let (code, out, _) = run(
        OSCILLATOR,
        &[
            "check-critical",
            "--section",
            "s",
            "--fields",
            "xi",
            "--format",
            "structured",
        ],
    );
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["criticality"]["critical"], true);
    assert!(
        v["first_variation"]["xi"]["finite_difference"]
            .as_f64()
            .unwrap()
            .abs()
            < 1e-8
    );
}

#[test]
fn second_variation_agrees_on_shell() {
    let (code, out, _) = run(
        OSCILLATOR,
        &[
            "second-var",
            "--section",
            "s",
            "--fields",
            "xi,eta",
            "--format",
            "structured",
        ],
    );
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["second_variation"]["agrees"], true);
    assert_eq!(v["symmetry"]["symmetric"], true);
    let (code, _, _) = run(OSCILLATOR, &["second-var", "--section", "bad"]);
    assert_eq!(code, 3);
}

#[test]
fn numeric_overrides() {
    let (code, out, _) = run(
        OSCILLATOR,
        &[
            "check-critical",
            "--section",
            "s",
            "--nodes",
            "8",
            "--step",
            "0.01",
            "--tol",
            "1e-3",
        ],
    );
    assert_eq!(code, 0, "{out}");
    let (code, _, err) = run(
        OSCILLATOR,
        &["check-critical", "--section", "s", "--nodes", "0"],
    );
    assert_eq!(code, 1, "{err}");
}

#[test]
fn jacobi_is_self_adjoint() {
    let (code, out, _) = run(OSCILLATOR, &["jacobi"]);
    assert_eq!(code, 0);
    assert!(out.contains("J[1,1,{tt}] = -1"));
    assert!(out.contains("self_adjoint: true"));
    assert!(out.contains("[on_shell]"));
}

#[test]
fn hessian_and_variation() {
    let src = "\
context { base t; fields y }
lagrangian L = 1/2*y_t^2*y
variation a = y_t
variation b = y
";
    let (code, out, _) = run(src, &["hessian"]);
    assert_eq!(code, 0);
    assert!(out.contains("hessian = -3*y*y_t*y_tt - 3/2*y_t^3"), "{out}");
    assert!(out.contains("first_ideal = (y_t) e_1"), "{out}");
    let (code, out, _) = run(src, &["variation", "--fields", "b"]);
    assert_eq!(code, 0);
    assert_eq!(out, "variation = -y^2*y_tt - 1/2*y*y_t^2\n");
    let (code, _, err) = run(src, &["hessian", "--fields", "a"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn adjoint_of_a_form() {
    let src = "context { base t; fields y }\nform A { A[1,1,{t}] = 1; A[1,1,{}] = y }\n";
    let (code, out, _) = run(src, &["adjoint"]);
    assert_eq!(code, 0);
    assert!(out.contains("A*[1,1,{t}] = -1"));
    assert!(out.contains("A*[1,1,{}] = y"));
}

#[test]
fn exit_codes_for_errors() {
    let (code, _, err) = run(
        "context { base t; fields y }\nlagrangian L = y_t +\n",
        &["el"],
    );
    assert_eq!(code, 1);
    assert!(err.contains("line 2"), "{err}");
    let (code, _, err) = run(OSCILLATOR, &["el", "--lagrangian", "M"]);
    assert_eq!(code, 2);
    assert!(err.contains("`M`"));
    let (code, _, _) = run(OSCILLATOR, &["adjoint"]);
    assert_eq!(code, 2);
    assert_eq!(jetvar(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(jetvar(&["el", "/nonexistent/file"]).status.code(), Some(1));
    assert_eq!(jetvar(&["--help"]).status.code(), Some(0));
    let (code, _, _) = run(OSCILLATOR, &["el", "--format", "xml"]);
    assert_eq!(code, 1);
}

#[test]
fn output_file_only_when_requested() {
    let f = problem(OSCILLATOR);
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("el.txt");
    let out = jetvar(&[
        "el",
        f.path().to_str().unwrap(),
        "--output",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(&target).unwrap(),
        "e_1 = -y - y_tt\n"
    );
}
