use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};
use tempfile::TempDir;

use courant_core::brackets::{BracketKind, BracketSpec};
use courant_core::bundle::{AnchoredSection, Bracket};
use courant_core::cartan::Form;
use courant_core::json::{form_to_json, poly_to_json, section_from_json, section_to_json};
use courant_core::scalar::Poly;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_courant-lift"));
    c.env_remove("COURANT_LIFT_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn forms_bracket_example() {
    let br = BracketSpec::standard(BracketKind::Forms(2), 3).unwrap();
    let ctx = br.context().clone();
    let dir = TempDir::new().unwrap();
    let alpha = Form::monomial(3, &[1, 2], Poly::var(3, 0)).unwrap();
    let s1 = AnchoredSection { x: vec![ctx.zero(); 3], eps: ctx.from_forms(&[alpha]) };
    let s2 = AnchoredSection::coordinate_field(&ctx, 0);
    let p1 = write(&dir, "s1.json", &section_to_json(&s1));
    let p2 = write(&dir, "s2.json", &section_to_json(&s2));

    let out = run(&["bracket-eval", "--bracket", "forms:2", "--n", "3", s(&p1), s(&p2)]);
    assert_eq!(out.status.code(), Some(0));
    let got = section_from_json(&ctx, &stdout_json(&out)["result"], "result").unwrap();
    let expect = AnchoredSection {
        x: vec![ctx.zero(); 3],
        eps: ctx.from_forms(&[Form::monomial(3, &[1, 2], Poly::int(3, -1)).unwrap()]),
    };
    assert_eq!(got, expect);
}

#[test]
fn natural_holds_for_courant_dorfman() {
    let out = run(&["check", "natural", "--bracket", "courant-dorfman", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["holds"], json!(true));
    assert_eq!(report["config"]["seed"], json!(0));
    assert_eq!(report["config"]["trials"], json!(100));
    assert_eq!(report["config"]["max_degree"], json!(2));
    assert_eq!(report["result"]["coverage"]["generator_status"], json!("verified on generator set"));
}

fn nonclosed_mu() -> Value {
    let zero = form_to_json(&Form::<Poly>::zero(3, 2));
    json!({"components": [form_to_json(&Form::basis(3, &[0, 1])), zero, zero]})
}

#[test]
fn twist_by_nonclosed_mu_fails_with_witness() {
    let dir = TempDir::new().unwrap();
    let mu = write(&dir, "nonclosed.json", &nonclosed_mu());
    let out = run(&["check", "twist", "--bracket", "courant-dorfman", "--n", "3", "--mu", s(&mu)]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["holds"], json!(false));
    assert!(report["result"]["checks"]["twisted_jacobi"]["witness"].is_object());
    assert!(report["result"]["witness"].is_object());
}

#[test]
fn twist_by_volume_form_holds() {
    let dir = TempDir::new().unwrap();
    let mu = write(&dir, "vol.json", &json!({"form": form_to_json(&Form::basis(3, &[0, 1, 2]))}));
    let out = run(&["check", "twist", "--bracket", "courant-dorfman", "--n", "3", "--mu", s(&mu), "--trials", "20"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn symmetry_checks() {
    let dir = TempDir::new().unwrap();
    let closed = write(&dir, "closed.json", &json!({"form": form_to_json(&Form::basis(2, &[0, 1]))}));
    let out = run(&["check", "symmetry", "--bracket", "courant-dorfman", "--n", "2", "--beta", s(&closed)]);
    assert_eq!(out.status.code(), Some(0));

    let form = Form::monomial(3, &[1, 2], Poly::var(3, 0)).unwrap();
    let open = write(&dir, "open.json", &json!({"form": form_to_json(&form)}));
    let out = run(&["check", "symmetry", "--bracket", "courant-dorfman", "--n", "3", "--beta", s(&open)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["result"]["checks"]["agreement"], json!("pass"));
}

#[test]
fn reports_are_byte_identical() {
    let args = ["jacobi-check", "--bracket", "mixed:1,1", "--n", "3", "--trials", "30", "--seed", "4"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);

    let args = ["torus-check", "--seed", "4", "--trials", "30"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn seed_environment_overrides_flag() {
    let out = bin()
        .args(["check", "main2", "--bracket", "courant-dorfman", "--n", "2", "--seed", "3", "--trials", "10"])
        .env("COURANT_LIFT_SEED", "77")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["config"]["seed"], json!(77));
}

#[test]
fn malformed_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let zero_den = json!({"X": {"degree": 1, "terms": []}, "eps": [{"nvars": 1, "terms": [{"exps": [1], "coeff": "1/0"}]}]});
    let p = write(&dir, "zero.json", &zero_den);
    let out = run(&["bracket-eval", "--bracket", "courant-dorfman", "--n", "1", s(&p), s(&p)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero denominator"));

    let one = json!({"nvars": 3, "terms": [{"exps": [0, 0, 0], "coeff": "1"}]});
    let bad_idx = json!({"components": [{"degree": 2, "terms": [{"idx": [2, 1], "coeff": one}]}, {"degree": 2, "terms": []}, {"degree": 2, "terms": []}]});
    let p = write(&dir, "idx.json", &bad_idx);
    let out = run(&["check", "twist", "--bracket", "courant-dorfman", "--n", "3", "--mu", s(&p)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("indices not strictly increasing"));

    let p = dir.path().join("garbage.json");
    std::fs::write(&p, "{not json").unwrap();
    assert_eq!(run(&["lift", "--bracket", "courant-dorfman", "--n", "2", "--section", s(&p)]).status.code(), Some(2));
    assert_eq!(run(&["check", "natural", "--bracket", "nonsense", "--n", "2"]).status.code(), Some(2));
    assert_eq!(run(&["check", "twist", "--bracket", "courant-dorfman", "--n", "2"]).status.code(), Some(2));
}

#[test]
fn lift_then_decompose_from_stdin() {
    use std::io::Write;
    let br = BracketSpec::standard(BracketKind::CourantDorfman, 2).unwrap();
    let ctx = br.context().clone();
    let dir = TempDir::new().unwrap();
    // (0, x dy) lifts to (0, u0 dy + x du1)
    let nu = AnchoredSection { x: vec![ctx.zero(); 2], eps: vec![ctx.zero(), Poly::var(2, 0)] };
    let p = write(&dir, "nu.json", &section_to_json(&nu));
    let out = run(&["lift", "--bracket", "courant-dorfman", "--n", "2", "--section", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["decomposition"]["eps"][1], poly_to_json(&Poly::var(2, 0)));

    let mut child = bin()
        .args(["decompose-linear", "--n", "2", "--r", "2", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let lift = serde_json::to_string(&report["result"]["lift"]).unwrap();
    child.stdin.take().unwrap().write_all(lift.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["result"], report["result"]["decomposition"]);
}

#[test]
fn non_linear_section_is_a_failed_decomposition() {
    let dir = TempDir::new().unwrap();
    let u0_squared = json!({"nvars": 3, "terms": [{"exps": [0, 2, 0], "coeff": "1"}]});
    let chi = json!({
        "total_vars": 3,
        "V": {"degree": 1, "terms": []},
        "A": {"degree": 1, "terms": [{"idx": [0], "coeff": u0_squared}]},
    });
    let p = write(&dir, "chi.json", &chi);
    let out = run(&["decompose-linear", "--n", "1", "--r", "2", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_json(&out)["result"]["reason"].as_str().unwrap().contains("not linear"));
}

#[test]
fn torus_and_catalog() {
    let out = run(&["torus-check", "--trials", "50", "--max-frequency", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["result"]["jacobi"], json!("pass"));
    assert_eq!(report["result"]["first_slot_linear"], json!(false));
    assert_eq!(report["result"]["locality_witness"]["jet_order"], json!(3));

    let out = run(&["torus-check", "--trials", "5", "--max-frequency", "0"]);
    assert_eq!(stdout_json(&out)["result"]["locality_witness"], json!("none found"));

    let out = run(&["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["result"].as_array().unwrap().len(), 5);

    let out = run(&["--pretty", "check", "natural", "--bracket", "lie-only", "--n", "2"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("holds"));
}

#[test]
fn decompose_exact_linear_two_form() {
    // d(u0 dx1) = du0∧dx1 on E = ℝ² × ℝ², so μ = dx1 in the first slot, ω = 0
    let dir = TempDir::new().unwrap();
    let h = Form::basis(4, &[1, 2]).scale(&courant_core::scalar::Rational::from(-1));
    let p = write(&dir, "h.json", &form_to_json(&h));
    let out = run(&["decompose-kform", "--n", "2", "--r", "2", s(&p)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let result = &stdout_json(&out)["result"];
    assert_eq!(result["mu"]["components"][0], form_to_json(&Form::basis(2, &[1])));
    assert_eq!(result["omega"]["components"][0]["terms"], json!([]));
}
