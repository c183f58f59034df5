use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::JSONSchema;
use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn golden(name: &str) -> PathBuf {
    root().join("golden").join(name)
}

fn qe_verify(args: &[&str], file: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qe-verify"))
        .args(args.iter().take(1))
        .arg(file)
        .args(args.iter().skip(1))
        .env_remove("QE_VERIFY_SEED")
        .output()
        .expect("binary runs")
}

fn schema(name: &str) -> JSONSchema {
    let text = std::fs::read_to_string(root().join("schemas").join(name)).unwrap();
    JSONSchema::compile(&serde_json::from_str(&text).unwrap()).expect("schema compiles")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn temp(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qe-verify-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn golden_files() -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![root().join("golden")];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "json") {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

#[test]
fn golden_problems_and_reports_match_their_schemas() {
    let (problem, report) = (schema("problem.schema.json"), schema("report.schema.json"));
    for file in golden_files() {
        let value: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
        assert!(problem.is_valid(&value), "{}", file.display());
        for cmd in ["check", "classify", "ode"] {
            let out = qe_verify(&[cmd], &file);
            if out.status.code() == Some(2) {
                continue;
            }
            let v = json(&out);
            let msgs: Vec<String> = match report.validate(&v) {
                Ok(()) => Vec::new(),
                Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
            };
            assert!(msgs.is_empty(), "{cmd} {}: {msgs:?}", file.display());
        }
    }
}

#[test]
fn branch_labels_of_golden_problems() {
    for (file, branch, code) in [
        ("conformal_de_sitter.json", "conformal-einstein", 0),
        ("non_isotropic_de_sitter.json", "non-isotropic-warped", 0),
        ("isotropic_ppwave.json", "isotropic-pp-wave", 0),
        ("soliton_ppwave.json", "isotropic-pp-wave", 0),
        ("not_qe_cubic.json", "not-QE", 1),
        ("ricci_flat_non_lcf.json", "not-LCF", 1),
        ("minkowski_trivial.json", "indeterminate", 1),
    ] {
        let out = qe_verify(&["classify"], &golden(file));
        assert_eq!(out.status.code(), Some(code), "{file}");
        assert_eq!(json(&out)["branch"], branch, "{file}");
    }
}

#[test]
fn not_qe_reports_the_trace_spread() {
    let v = json(&qe_verify(&["classify"], &golden("not_qe_cubic.json")));
    assert!(v["residuals"]["lambda_spread"].as_f64().unwrap() > 1.0);
    assert!(v["warnings"][0].as_str().unwrap().contains("trace obstruction"));
}

#[test]
fn check_exit_codes() {
    let out = qe_verify(&["check"], &golden("isotropic_ppwave.json"));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["residuals"]["qe"].as_f64().unwrap() < 1e-9);

    let out = qe_verify(&["check"], &golden("minkowski_trivial.json"));
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["lambda"].as_f64(), Some(0.0));

    let out = qe_verify(&["check"], &golden("quartic_ppwave.json"));
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["verdict"], "fail");
    assert!(v["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().starts_with("LCF failure")));
}

#[test]
fn input_errors_exit_two_with_a_pointer() {
    for (body, pointer) in [
        (r#"{"coordinates":["t","x","z"],"metric":[["-1","0","0"],[null,"1","0"],[null,null,"1"]],"potential":{"f":"y^2","mu":1}}"#, "/potential/f"),
        (r#"{"coordinates":["t","x","z"],"metric":[["-1","0","0"],[null,"1","0"],[null,null,"1"]],"potential":{"f":"x","mu":"1"}}"#, "/potential/mu"),
        (r#"{"coordinates":["t","x","z"],"metric":[["-1","0","0"]],"potential":{"f":"x","mu":1}}"#, "/metric"),
        (r#"{"coordinates":["t","x","z"],"metric":[["-1","t","0"],["x","1","0"],[null,null,"1"]],"potential":{"f":"x","mu":1}}"#, "/metric/1/0"),
        (r#"{"construct":{"warped":{"epsilon":-1,"psi":"exp(t)","fiber":"torus","fiber_dim":2}},"potential":{"f":"t","mu":1}}"#, "/construct/warped/fiber"),
        (r#"{"coordinates":["t","x","z"],"metric":[["-1","0","0"],[null,"1","0"],[null,null,"1"]],"potential":{"f":"x","mu":1},"samples":{"box":{"w":[0,1]}}}"#, "/samples/box/w"),
    ] {
        let file = temp("bad.json", body);
        let out = qe_verify(&["check"], &file);
        assert_eq!(out.status.code(), Some(2), "{body}");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(stderr.contains(&format!("error: {pointer}:")), "{body}: {stderr}");
    }
    let out = qe_verify(&["check"], Path::new("/nonexistent/problem.json"));
    assert_eq!(out.status.code(), Some(2));
    let out = qe_verify(&["check"], &golden("ode/exponential.json"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn riemannian_metric_is_an_input_error() {
    let file = temp("riemannian.json", r#"{"coordinates":["t","x","z"],"metric":[["1","0","0"],[null,"1","0"],[null,null,"1"]],"potential":{"f":"x","mu":1}}"#);
    assert_eq!(qe_verify(&["check"], &file).status.code(), Some(2));
}

#[test]
fn ode_command() {
    let out = qe_verify(&["ode"], &golden("ode/exponential.json"));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let f_end = v["ode"]["f0_end"].as_f64().unwrap();
    assert!((f_end - std::f64::consts::E).abs() < 1e-8);

    let v = json(&qe_verify(&["ode"], &golden("two_symmetric.json")));
    assert!(v["ode"]["sign_change_count"].as_u64().unwrap() >= 2);
    assert!(v["ode"]["theorem_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn classify_with_ode_section_notes_the_zeros() {
    let out = qe_verify(&["classify"], &golden("two_symmetric.json"));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["branch"], "isotropic-pp-wave");
    assert!(v["ode"]["sign_change_count"].as_u64().unwrap() >= 2);
    assert!(v["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("changes sign")));
    assert!(v["residuals"]["plane_wave_third_derivatives"].is_number());
}

#[test]
fn construct_expands_cahen_wallach() {
    let out = qe_verify(&["construct"], &golden("cahen_wallach.json"));
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(schema("problem.schema.json").is_valid(&v));
    assert_eq!(v["coordinates"], serde_json::json!(["u", "v", "x1"]));
    assert_eq!(v["metric"][0][0], "-x1^2");
    assert_eq!(v["metric"][0][1], "1");
    assert!(v.get("construct").is_none());
}

#[test]
fn constructed_de_sitter_checks() {
    let out_file = std::env::temp_dir().join(format!("qe-verify-ds-{}.json", std::process::id()));
    let out = qe_verify(&["construct", "--out", out_file.to_str().unwrap()], &golden("non_isotropic_de_sitter.json"));
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let check = qe_verify(&["check"], &out_file);
    assert_eq!(check.status.code(), Some(0));
    assert!((json(&check)["lambda"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    // the expanded and the original file give the same classification report
    let a = qe_verify(&["classify"], &out_file);
    let b = qe_verify(&["classify"], &golden("non_isotropic_de_sitter.json"));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_precedence() {
    let file = golden("minkowski_trivial.json");
    let default = json(&qe_verify(&["check"], &file));
    assert_eq!(default["seed"].as_u64(), Some(qe_core::geometry::DEFAULT_SEED));
    let env = Command::new(env!("CARGO_BIN_EXE_qe-verify"))
        .arg("check")
        .arg(&file)
        .env("QE_VERIFY_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(json(&env)["seed"].as_u64(), Some(42));
    let flag = Command::new(env!("CARGO_BIN_EXE_qe-verify"))
        .args(["check", file.to_str().unwrap(), "--seed", "7", "--samples", "3"])
        .env("QE_VERIFY_SEED", "42")
        .output()
        .unwrap();
    let v = json(&flag);
    assert_eq!(v["seed"].as_u64(), Some(7));
    assert_eq!(v["tau_samples"].as_array().unwrap().len(), 3);
    // file seed beats the default
    assert_eq!(json(&qe_verify(&["check"], &golden("isotropic_ppwave.json")))["seed"].as_u64(), Some(3607));
}

#[test]
fn different_seeds_sample_different_points() {
    let file = golden("non_isotropic_de_sitter.json");
    let a = qe_verify(&["classify", "--seed", "1"], &file);
    let b = qe_verify(&["classify", "--seed", "2"], &file);
    assert_eq!(json(&a)["branch"], json(&b)["branch"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn text_format() {
    let out = qe_verify(&["classify", "--format", "text"], &golden("conformal_de_sitter.json"));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("verdict: pass\nbranch: conformal-einstein\n"), "{text}");
}

#[test]
fn floats_are_printed_with_seventeen_digits() {
    let out = qe_verify(&["check"], &golden("non_isotropic_de_sitter.json"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"lambda\": 3.0000000000000000e0"), "{text}");
}
