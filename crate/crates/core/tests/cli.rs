use std::path::Path;
use std::process::{Command, Output};

use cylinder_sos::verify::CertificateFile;

fn cylsos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylsos")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn certify_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "f.txt", "y^2 + 2 + x1\n");
    let cert = dir.path().join("f.json");
    let out = cylsos(&["certify", &input, "-o", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let file = CertificateFile::from_json(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert!(!file.exact);
    for mode in ["interval", "float"] {
        let out = cylsos(&["verify", cert.to_str().unwrap(), "--mode", mode]);
        assert_eq!(code(&out), 0, "{mode}: {}", String::from_utf8_lossy(&out.stdout));
        assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS"));
    }
}

#[test]
fn exact_certificate_verifies_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "f.txt", "y^4 + 1");
    let cert = dir.path().join("f.json");
    assert_eq!(code(&cylsos(&["certify", &input, "--exact", "-o", cert.to_str().unwrap()])), 0);
    let out = cylsos(&["verify", cert.to_str().unwrap(), "--mode", "exact"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn tampered_certificate_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "f.txt", "y^2 + 1");
    let cert = dir.path().join("f.json");
    assert_eq!(code(&cylsos(&["certify", &input, "--exact", "-o", cert.to_str().unwrap()])), 0);
    let mut file = CertificateFile::from_json(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    file.target = format!("{} + 1/1000", file.target);
    let bad = write(dir.path(), "bad.json", &file.to_json());
    let out = cylsos(&["verify", &bad, "--mode", "exact"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("FAIL"));
}

#[test]
fn stdin_input_is_accepted() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_cylsos"))
        .args(["certify", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"(y + x1)^2 + 1").unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(code(&out), 0);
    assert!(CertificateFile::from_json(&String::from_utf8_lossy(&out.stdout)).is_ok());
}

#[test]
fn negative_polynomial_exits_with_one() {
    let out = cylsos(&["check", "y^2 - 1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("negative at"));
    assert_eq!(code(&cylsos(&["check", "y^2 + 1"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "f.txt", "y^2 - 1");
    assert_eq!(code(&cylsos(&["certify", &input])), 1);
}

#[test]
fn usage_errors_exit_with_three() {
    assert_eq!(code(&cylsos(&[])), 3);
    assert_eq!(code(&cylsos(&["frobnicate"])), 3);
    assert_eq!(code(&cylsos(&["check", "y^2 + z"])), 3);
    assert_eq!(code(&cylsos(&["check", "(y + 1"])), 3);
    assert_eq!(code(&cylsos(&["verify", "/nonexistent/cert.json"])), 3);
    assert_eq!(code(&cylsos(&["factor-circle", "y + 1"])), 3);

    let dir = tempfile::tempdir().unwrap();
    let junk = write(dir.path(), "junk.json", "{\"ring\": \"circle-cylinder\"}");
    assert_eq!(code(&cylsos(&["verify", &junk])), 3);
    assert_eq!(code(&cylsos(&["--help"])), 0);
}

#[test]
fn factor_circle_and_envelope_print_results() {
    let out = cylsos(&["factor-circle", "(1 - x1)*(3 + x1)"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("real-zero part") && text.contains("positive part"));

    let out = cylsos(&["envelope", "y^2 + 2 + x1", "--s", "y^2 + 1", "--samples", "8"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 9);
}
