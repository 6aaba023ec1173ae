//! The command-line interface on the fixture files.

use zetalift::cli::run;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{}", env!("CARGO_MANIFEST_DIR"), name)
}

fn zl(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("zetalift").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn line<'a>(out: &'a str, prefix: &str) -> &'a str {
    out.lines()
        .find(|l| l.starts_with(prefix))
        .unwrap_or_else(|| panic!("no {prefix} line in\n{out}"))
}

#[test]
fn zeta_elliptic_f5() {
    let (code, out, _) = zl(&["zeta", &fixture("elliptic_f5.spec")]);
    assert_eq!(code, 0);
    assert_eq!(line(&out, "P1:"), "P1: 1 0 5");
    assert_eq!(line(&out, "COUNTS:"), "COUNTS: 6 36");
    assert!(out.contains("Z(T) = (1 + 5T^2) / ((1 - T)(1 - 5T))"));
}

#[test]
fn check_genus2_f5_matches() {
    let (code, out, _) = zl(&["check", "--seed", "7", &fixture("genus2_f5.spec")]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().any(|l| l == "MATCH"));
    assert_eq!(line(&out, "pipeline P1:"), "pipeline P1: 1 0 10 0 25");
    assert_eq!(line(&out, "oracle   P1:"), "oracle   P1: 1 0 10 0 25");
}

#[test]
fn plan_reports_weil_precision() {
    let (code, out, _) = zl(&["plan", &fixture("elliptic_f5.spec")]);
    assert_eq!(code, 0);
    assert!(out.contains("N=2 (+margin 0)"), "{out}");
    let (_, out, _) = zl(&["plan", "--margin", "1", &fixture("elliptic_f5.spec")]);
    assert!(out.contains("N=3 (+margin 1)"), "{out}");
}

#[test]
fn oracle_and_cup_lines() {
    let (code, out, _) = zl(&["oracle", &fixture("elliptic_f7.spec")]);
    assert_eq!(code, 0);
    // y^2 = x^3 + 1 over F_7 has 12 points, so a_1 = 12 - 7 - 1
    assert_eq!(line(&out, "COUNTS:"), "COUNTS: 12");
    assert_eq!(line(&out, "P1:"), "P1: 1 4 7");
    let (code, out, _) = zl(&["cup", &fixture("elliptic_f5.spec")]);
    assert_eq!(code, 0);
    let m1: Vec<&str> = line(&out, "M1:").split_whitespace().skip(1).collect();
    assert_eq!(m1.len(), 4);
    assert_eq!(m1[0], "0");
    assert_eq!(m1[3], "0");
}

#[test]
fn json_output_is_machine_only() {
    let (code, out, _) = zl(&["zeta", "--json", &fixture("elliptic_f25.spec")]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["p1"], serde_json::json!([1, 2, 25]));
    assert_eq!(out.lines().count(), 1);
}

#[test]
fn lift_prints_every_end() {
    let (code, out, _) = zl(&["lift", "--terms", "3", &fixture("hyperbola_f5.spec")]);
    assert_eq!(code, 0);
    assert!(out.contains("end plus") && out.contains("end minus"));
    assert_eq!(out.matches("phi(x)").count(), 2);
}

#[test]
fn exit_codes() {
    // x^5 + x + 1 has a double root at 4 over F_7
    let (code, out, _) = zl(&["zeta", &fixture("genus2_f7.spec")]);
    assert_eq!(code, 3);
    assert!(out.starts_with("ERROR spec:"), "{out}");
    let (code, _, _) = zl(&["zeta", &fixture("missing.spec")]);
    assert_eq!(code, 4);
    let (code, _, err) = zl(&["frobnicate"]);
    assert_eq!(code, 4);
    assert!(err.contains("frobnicate"));
    let (code, _, _) = zl(&["--help"]);
    assert_eq!(code, 0);
}

#[test]
fn parse_failure_exit_code() {
    let dir = std::env::temp_dir().join(format!("zetalift-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.spec");
    std::fs::write(
        &bad,
        "[field]\np = 5\n[curve]\nbuiltin = hyperelliptic\nQ = x^3 +\n",
    )
    .unwrap();
    let (code, out, _) = zl(&["zeta", bad.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(out.contains("line 5"), "{out}");
    let (code, out, _) = zl(&["zeta", "--json", bad.to_str().unwrap()]);
    assert_eq!(code, 4);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["error"], "parse");
    std::fs::remove_dir_all(&dir).ok();
}
