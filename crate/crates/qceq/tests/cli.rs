use std::path::PathBuf;
use std::process::{Command, Output};

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qceq-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn qceq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qceq")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn equiv_exit_codes() {
    let hh = scratch("hh.qc", "qubits 1\nH 0\nH 0\n");
    let id = scratch("id.qc", "qubits 1\n");
    let p3 = scratch("p3.qc", "qubits 1\nP(0.3) 0\n");
    let p4 = scratch("p4.qc", "qubits 1\nP(0.4) 0\n");
    let (hh, id, p3, p4) = (hh.to_str().unwrap(), id.to_str().unwrap(), p3.to_str().unwrap(), p4.to_str().unwrap());

    assert_eq!(qceq(&["equiv", hh, id]).status.code(), Some(0));
    let o = qceq(&["--json", "equiv", p3, p4]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["pass"], false);
    assert!((v["max_deviation"].as_f64().unwrap() - 0.09996).abs() < 1e-4);
    // a loose tolerance accepts the same pair
    assert_eq!(qceq(&["--tol", "0.2", "equiv", p3, p4]).status.code(), Some(0));
}

#[test]
fn usage_and_parse_errors_exit_2() {
    let garbage = scratch("bad.qc", "qubits 1\nFROB 0\n");
    assert_eq!(qceq(&["eval", garbage.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(qceq(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(qceq(&["solve-kstar", "--gamma", "1,2,3"]).status.code(), Some(2));
}

#[test]
fn eval_prints_the_matrix() {
    let x = scratch("x.qc", "qubits 1\nX 0\n");
    let o = qceq(&["--json", "eval", x.to_str().unwrap()]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["command"], "eval");
    assert!(v["results"].as_array().is_some_and(|r| !r.is_empty()));
}

#[test]
fn rule_catalog_checks_pass() {
    assert!(qceq(&["--trials", "3", "check-rules"]).status.success());
    assert!(qceq(&["--trials", "3", "check-rules", "--retired"]).status.success());
    let o = qceq(&["--trials", "2", "--json", "identities"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["pass"], true);
}

#[test]
fn replay_shipped_derivations() {
    let o = qceq(&["replay"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    for name in ["XX", "ZZ", "CNOTCNOT", "CNOTSWAP", "RXcommutCNOT", "ctrlPinit"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn apply_rewrites_a_file() {
    let src = scratch("apply.qc", "qubits 2\nH 1\nH 1\nCX 0 1\n");
    let out = src.with_file_name("applied.qc");
    let o = qceq(&["apply", src.to_str().unwrap(), "--rule", "C", "--anchor", "0", "--wires", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(!written.contains("H 1"), "{written}");
    assert_eq!(qceq(&["equiv", src.to_str().unwrap(), out.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn solvers_from_the_command_line() {
    let o = qceq(&["--json", "solve-kstar", "--gamma", "0,0,0,2*pi"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("6.283185307179586"));

    let x = scratch("x.mat", "0 1\n1 0\n");
    let o = qceq(&["euler", "--matrix", x.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn synthesize_then_check() {
    let m = scratch("copy.mat", "1 0\n0 0\n0 0\n0 1\n");
    let out = m.with_file_name("copy_synth.qc");
    let o = qceq(&["synth", "--matrix", m.to_str().unwrap(), "--kind", "isometry", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let reference = scratch("copy_ref.qc", "qubits 1\ntheory qciso\nINIT\nCX 0 1\n");
    assert_eq!(qceq(&["equiv", out.to_str().unwrap(), reference.to_str().unwrap()]).status.code(), Some(0));
}
