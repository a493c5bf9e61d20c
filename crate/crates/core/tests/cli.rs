use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use dgforge::cli::run_captured;
use dgforge::dga::DgAlgebra;
use dgforge::format::{read_object, write_object, Object, ObjectFile};
use dgforge::rings::CoefficientRing;

fn q() -> CoefficientRing {
    CoefficientRing::Rationals
}

fn file(dir: &Path, name: &str, kind: &str, ring: Value, payload: Value) -> PathBuf {
    let doc = json!({ "format_version": "1", "kind": kind, "ring": ring, "payload": payload, "seal": "" });
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    path
}

fn save(dir: &Path, name: &str, o: &Object) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, write_object(o)).unwrap();
    path
}

fn run(args: &[&str]) -> (i32, String) {
    let mut v = vec!["dgforge"];
    v.extend_from_slice(args);
    run_captured(v)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn m(rows: &[&[i64]], cols: usize) -> Value {
    let rows: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    json!({ "shape": [rows.len(), cols], "rows": rows })
}

fn complex(lo: i64, ranks: &[usize], diffs: Vec<Value>) -> Value {
    json!({ "lo": lo, "ranks": ranks, "differentials": diffs })
}

/// `Z --2--> Z` in degrees 0, 1.
fn two_complex() -> Value {
    complex(0, &[1, 1], vec![m(&[&[2]], 1)])
}

fn times_two_idempotent() -> Value {
    let c = two_complex();
    let e = json!({ "src": c, "dst": c, "components": [
        { "degree": 0, "matrix": m(&[&[2]], 1) }, { "degree": 1, "matrix": m(&[&[2]], 1) } ] });
    json!({ "e": e, "h": { "from": { "src": c, "dst": c, "components": [
        { "degree": 0, "matrix": m(&[&[4]], 1) }, { "degree": 1, "matrix": m(&[&[4]], 1) } ] },
        "to": e, "components": [ { "degree": 1, "matrix": m(&[&[1]], 1) } ] } })
}

fn projector_idempotent() -> Value {
    let c = complex(0, &[2], vec![]);
    let e = json!({ "src": c, "dst": c, "components": [ { "degree": 0, "matrix": m(&[&[1, 0], &[0, 0]], 2) } ] });
    json!({ "e": e, "h": { "from": e, "to": e, "components": [] } })
}

#[test]
fn validate_accepts_a_complex() {
    let dir = tempfile::tempdir().unwrap();
    let f = file(dir.path(), "c.json", "complex", json!("Z"), two_complex());
    assert_eq!(run(&["validate", p(&f)]).0, 0);
}

#[test]
fn validate_rejects_nonzero_square() {
    let dir = tempfile::tempdir().unwrap();
    let c = complex(0, &[1, 1, 1], vec![m(&[&[1]], 1), m(&[&[1]], 1)]);
    let f = file(dir.path(), "c.json", "complex", json!("Z"), c);
    let (code, out) = run(&["validate", p(&f)]);
    assert_eq!(code, 3);
    assert!(out.contains("d∘d ≠ 0 at degree 0"), "{out}");
}

#[test]
fn validate_rejects_unknown_kind_and_bad_scalars() {
    let dir = tempfile::tempdir().unwrap();
    let f = file(dir.path(), "x.json", "sheaf", json!("Z"), json!({}));
    assert_eq!(run(&["validate", p(&f)]).0, 3);
    let f = file(dir.path(), "c.json", "complex", json!("Q"), complex(0, &[1, 1], vec![json!({"shape": [1, 1], "rows": [["6/8"]]})]));
    assert_eq!(run(&["validate", p(&f)]).0, 3);
    let f = file(dir.path(), "d.json", "complex", json!("Z"), complex(0, &[1, 1], vec![json!({"shape": [1, 1], "rows": [["1/2"]]})]));
    assert_eq!(run(&["validate", p(&f)]).0, 3);
    assert_eq!(run(&["validate", "/nonexistent/file.json"]).0, 3);
    assert_eq!(run(&["frobnicate"]).0, 3);
}

#[test]
fn split_projector_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let f = file(dir.path(), "e.json", "homotopy_idempotent", json!("Z"), projector_idempotent());
    let out = dir.path().join("cert.json");
    assert_eq!(run(&["split-idempotent", p(&f), "--out", p(&out)]).0, 0);
    let Object::Certificate(c) = read_object(&std::fs::read_to_string(&out).unwrap()).unwrap() else {
        panic!("expected a certificate")
    };
    assert_eq!(c.name(), "splitting");
    assert_eq!(run(&["verify", p(&out)]).0, 0);
}

#[test]
fn split_over_z_needs_a_localization() {
    let dir = tempfile::tempdir().unwrap();
    let f = file(dir.path(), "e.json", "homotopy_idempotent", json!("Z"), times_two_idempotent());
    let (code, out) = run(&["--report", "json", "split-idempotent", p(&f)]);
    assert_eq!(code, 2, "{out}");
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["outcome"], "unknown");
}

#[test]
fn split_rejects_a_broken_homotopy() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad = times_two_idempotent();
    bad["h"]["components"][0]["matrix"]["rows"][0][0] = json!("3");
    let f = file(dir.path(), "e.json", "homotopy_idempotent", json!("Z"), bad);
    assert_eq!(run(&["split-idempotent", p(&f)]).0, 3);
}

#[test]
fn tampered_seal_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let f = file(dir.path(), "c.json", "complex", json!("Z"), two_complex());
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    doc["seal"] = json!("00".repeat(32));
    std::fs::write(&f, doc.to_string()).unwrap();
    assert_eq!(run(&["validate", p(&f)]).0, 3);
}

#[test]
fn check_smooth_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let dual = save(dir.path(), "dual.json", &Object::DgAlgebra(DgAlgebra::truncated_polynomial(q(), 2)));
    let cert = dir.path().join("ns.json");
    assert_eq!(run(&["check-smooth", p(&dual), "--depth", "4", "--out", p(&cert)]).0, 1);
    assert_eq!(run(&["verify", p(&cert)]).0, 0);
    assert_eq!(run(&["check-smooth", p(&dual), "--depth", "0"]).0, 2);

    let m2 = save(dir.path(), "m2.json", &Object::DgAlgebra(DgAlgebra::matrix_algebra(q(), 2)));
    let cert = dir.path().join("s.json");
    assert_eq!(run(&["check-smooth", p(&m2), "--out", p(&cert)]).0, 0);
    assert_eq!(run(&["verify", p(&cert)]).0, 0);
}

#[test]
fn verify_rejects_a_flipped_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let a2 = save(dir.path(), "a2.json", &Object::DgAlgebra(DgAlgebra::upper_triangular(q(), 2)));
    let cert = dir.path().join("s.json");
    assert_eq!(run(&["check-smooth", p(&a2), "--out", p(&cert)]).0, 0);
    let text = std::fs::read_to_string(&cert).unwrap();
    let mut f = ObjectFile::parse(&text).unwrap();
    let path = dgforge::format::scalar_paths(&f.payload).into_iter().find(|s| {
        f.payload.pointer(s).and_then(Value::as_str) == Some("1")
    });
    *f.payload.pointer_mut(&path.unwrap()).unwrap() = json!("3");
    std::fs::write(&cert, f.to_text()).unwrap();
    assert_eq!(run(&["verify", p(&cert)]).0, 1);
    f.reseal();
    std::fs::write(&cert, f.to_text()).unwrap();
    assert_eq!(run(&["verify", p(&cert)]).0, 1);
}

#[test]
fn verify_refuses_plain_objects() {
    let dir = tempfile::tempdir().unwrap();
    let f = file(dir.path(), "c.json", "complex", json!("Z"), two_complex());
    assert_eq!(run(&["verify", p(&f)]).0, 3);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a2 = save(dir.path(), "a2.json", &Object::DgAlgebra(DgAlgebra::upper_triangular(q(), 2)));
    let (x, y) = (dir.path().join("x.json"), dir.path().join("y.json"));
    assert_eq!(run(&["check-smooth", p(&a2), "--out", p(&x)]).0, 0);
    assert_eq!(run(&["check-smooth", p(&a2), "--out", p(&y)]).0, 0);
    assert_eq!(std::fs::read(&x).unwrap(), std::fs::read(&y).unwrap());
}

#[test]
fn base_change_and_cohomology() {
    let dir = tempfile::tempdir().unwrap();
    let f = file(dir.path(), "c.json", "complex", json!("Z"), two_complex());
    let out = dir.path().join("f2.json");
    assert_eq!(run(&["base-change", p(&f), "--to", "F_2", "--out", p(&out)]).0, 0);
    let Object::Complex(c) = read_object(&std::fs::read_to_string(&out).unwrap()).unwrap() else { panic!() };
    assert_eq!(c.ring(), &CoefficientRing::prime_field(2).unwrap());
    let (code, text) = run(&["--report", "json", "cohomology", p(&out)]);
    assert_eq!(code, 0, "{text}");
    let (code, text) = run(&["--report", "json", "cohomology", p(&f)]);
    assert_eq!(code, 0);
    let report: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["details"]["torsion_primes"], json!([2]));
    assert!(report["message"].as_str().unwrap().contains("H^1: rank 0 + Z/2"), "{text}");
    assert_eq!(run(&["base-change", p(&f), "--to", "Z[1/3]", "--out", p(&out)]).0, 0);
    let back = dir.path().join("back.json");
    assert_eq!(run(&["base-change", p(&out), "--to", "Z", "--out", p(&back)]).0, 3);
}

#[test]
fn ring_of_definition_and_descent() {
    let dir = tempfile::tempdir().unwrap();
    let c = complex(0, &[1, 1], vec![json!({"shape": [1, 1], "rows": [["2/3"]]})]);
    let f = file(dir.path(), "c.json", "complex", json!("Q"), c.clone());
    let out = dir.path().join("d.json");
    let (code, text) = run(&["--report", "json", "ring-of-definition", p(&f), "--out", p(&out)]);
    assert_eq!(code, 0, "{text}");
    let report: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(report["stage"], json!({"loc": [3]}));
    assert_eq!(run(&["verify", p(&out)]).0, 0);

    let id = json!({ "src": c, "dst": c, "components": [
        { "degree": 0, "matrix": m(&[&[1]], 1) }, { "degree": 1, "matrix": m(&[&[1]], 1) } ] });
    let g = file(dir.path(), "id.json", "chain_map", json!("Q"), id.clone());
    let cert = dir.path().join("qis.json");
    assert_eq!(run(&["descend-qis", p(&g), "--out", p(&cert)]).0, 0);
    assert_eq!(run(&["verify", p(&cert)]).0, 0);
    let morph = dir.path().join("m.json");
    assert_eq!(run(&["descend-morphism", p(&g), "--out", p(&morph)]).0, 0);
    assert_eq!(run(&["verify", p(&morph)]).0, 0);

    let point = complex(0, &[1], vec![]);
    let zero = json!({ "src": point, "dst": point, "components": [] });
    let z = file(dir.path(), "zero.json", "chain_map", json!("Q"), zero);
    assert_eq!(run(&["descend-qis", p(&z)]).0, 1);
}

#[test]
fn check_proper_reports_a_stage() {
    let dir = tempfile::tempdir().unwrap();
    let a = save(dir.path(), "a.json", &Object::DgAlgebra(DgAlgebra::truncated_polynomial(q(), 3)));
    let out = dir.path().join("p.json");
    let (code, text) = run(&["check-proper", p(&a), "--out", p(&out)]);
    assert_eq!(code, 0, "{text}");
    assert_eq!(run(&["verify", p(&out)]).0, 0);
}

#[test]
fn help_exits_zero() {
    assert_eq!(run(&["--help"]).0, 0);
}
