use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn hmorph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmorph"))
        .args(args)
        .current_dir(workspace())
        .output()
        .expect("binary runs")
}

fn workspace() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn passing_scenario_exits_zero_with_json() {
    let o = hmorph(&["run", "hopf-s3", "--report", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["overall"], true);
    let cfg = &v["config"];
    assert_eq!(cfg["seed"], 42);
    assert_eq!(cfg["points"], 20);
    assert_eq!(cfg["step"], 1e-4);
    assert_eq!(cfg["tol"], 1e-6);
    assert_eq!(cfg["richardson"], true);
    let r = &v["reports"][0];
    assert_eq!(r["scenario_id"], "hopf-s3");
    assert_eq!(r["overall"], true);
    for c in r["checks"].as_array().unwrap() {
        for key in ["name", "residual", "tolerance", "verdict", "samples_used", "excluded_samples"] {
            assert!(c.get(key).is_some(), "check lacks {key}: {c}");
        }
    }
}

#[test]
fn failing_verdict_exits_one() {
    let o = hmorph(&["run", "hopf-s3", "torus-quadratic-harmonic", "--report", "json"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["overall"], false);
    assert_eq!(v["reports"][0]["overall"], true);
    assert_eq!(v["reports"][1]["overall"], false);
}

#[test]
fn usage_and_config_errors_exit_two() {
    for args in [
        &["run", "nonexistent"][..],
        &["run"],
        &["run", "hopf-s3", "--points", "0"],
        &["run", "hopf-s3", "--step=-1e-4"],
        &["run", "hopf-s3", "--step", "nan"],
        &["run", "hopf-s3", "--tol", "0"],
        &["run", "hopf-s3", "--richardson", "maybe"],
        &["run", "hopf-s3", "--report", "xml"],
        &["classify", "--config", "does/not/exist.geo"],
        &["check-map", "--config", "configs/sphere.geo", "--map", "missing"],
        &["classify", "--config", "Cargo.toml"],
        &["frobnicate"],
    ] {
        let o = hmorph(args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    let o = hmorph(&["run", "nonexistent"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown scenario"));
}

#[test]
fn parse_errors_report_positions() {
    let dir = std::env::temp_dir().join(format!("hmorph-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.geo");
    std::fs::write(&path, "dim = 2\ng = [[1,]\n").unwrap();
    let o = hmorph(&["classify", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:9"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn json_is_byte_identical_across_runs() {
    let args = ["run", "hopf-s3", "ce-1-0-deltaJ", "torus-classify", "--report", "json", "--seed", "9"];
    let a = hmorph(&args);
    let b = hmorph(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reports_follow_request_order() {
    let ids = ["torus-lemma", "hopf-s3", "cp1-classify", "ce-0-0-deltaJ"];
    let mut args = vec!["run"];
    args.extend(ids);
    args.extend(["--report", "json"]);
    let v = json(&hmorph(&args));
    let got: Vec<_> = v["reports"].as_array().unwrap().iter().map(|r| r["scenario_id"].as_str().unwrap()).collect();
    assert_eq!(got, ids);
}

/// Pulls `key=value` pairs for residuals out of the text report.
fn text_residuals(text: &str) -> Vec<(String, f64, f64)> {
    text.lines()
        .filter_map(|l| l.trim().strip_prefix("check "))
        .map(|l| {
            let (name, rest) = l.split_once(": ").unwrap();
            let field = |k: &str| -> f64 {
                let v = rest.split_whitespace().find_map(|t| t.strip_prefix(k)).unwrap();
                v.parse().unwrap()
            };
            (name.to_string(), field("residual="), field("tolerance="))
        })
        .collect()
}

#[test]
fn text_and_json_show_identical_residuals() {
    let ids = ["hopf-s3", "product-hopf-1-1-lemma", "punctured-hopf-1-lift-minus"];
    let mut base = vec!["run"];
    base.extend(ids);
    let text = hmorph(&base);
    base.extend(["--report", "json"]);
    let v = json(&hmorph(&base));
    let from_text = text_residuals(&String::from_utf8(text.stdout).unwrap());
    let from_json: Vec<(String, f64, f64)> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r["checks"].as_array().unwrap().clone())
        .map(|c| {
            (
                c["name"].as_str().unwrap().to_string(),
                c["residual"].as_f64().unwrap(),
                c["tolerance"].as_f64().unwrap(),
            )
        })
        .collect();
    assert!(!from_json.is_empty());
    assert_eq!(from_text, from_json);
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let path = std::env::temp_dir().join(format!("hmorph-out-{}.json", std::process::id()));
    let o = hmorph(&["run", "torus-classify", "--report", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["reports"][0]["scenario_id"], "torus-classify");
    let _ = std::fs::remove_file(path);
}

#[test]
fn list_names_every_scenario() {
    let o = hmorph(&["list", "--report", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let listed = v["scenarios"].as_array().unwrap();
    assert_eq!(listed.len(), hmorph::scenarios::scenarios().len());
    assert!(listed.iter().any(|s| s["id"] == "hopf-s3"));
}

#[test]
fn classify_flat_torus_config_is_all_true() {
    let o = hmorph(&[
        "classify",
        "--config",
        "configs/flat-torus.geo",
        "--points",
        "50",
        "--seed",
        "7",
        "--report",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let s = &json(&o)["reports"][0]["structure"];
    for k in ["kahler", "symplectic_12", "cosymplectic", "integrable"] {
        assert_eq!(s[k], true, "{k}");
    }
}

#[test]
fn classify_hopf_surface_config_matches_the_catalog() {
    let v = json(&hmorph(&["classify", "--config", "configs/hopf-surface.geo", "--report", "json"]));
    let s = &v["reports"][0]["structure"];
    assert_eq!(s["integrable"], true);
    assert_eq!(s["cosymplectic"], false);
    assert_eq!(s["kahler"], false);
}

#[test]
fn check_map_verdicts() {
    for (config, map, exit) in [
        ("configs/sphere.geo", "stereo", 0),
        ("configs/sphere.geo", "height", 1),
        ("configs/flat-torus.geo", "conj", 0),
        ("configs/flat-torus.geo", "shear", 1),
        ("configs/hopf-surface.geo", "hopf", 0),
    ] {
        let o = hmorph(&["check-map", "--config", config, "--map", map]);
        assert_eq!(code(&o), exit, "{config} {map}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn geodsl_warnings_go_to_stderr() {
    let path = std::env::temp_dir().join(format!("hmorph-warn-{}.geo", std::process::id()));
    std::fs::write(&path, "dim = 2\ndomain x1 in [0, 1]\ndomain x2 in [0, 1]\ng[1][2] = 0.2\nmap id : self = [x1, x2]\n")
        .unwrap();
    let o = hmorph(&["check-map", "--config", path.to_str().unwrap(), "--map", "id", "--report", "json"]);
    let _ = std::fs::remove_file(&path);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert!(serde_json::from_slice::<Value>(&o.stdout).is_ok());
}
