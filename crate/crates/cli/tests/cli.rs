use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pidlab::harness::{generate, FamilySpec};
use pidlab::measures::{si_mmi, InfoTerms, Measure};
use pidlab::SolverConfig;
use serde_json::Value;
use tempfile::TempDir;

fn pidlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pidlab"))
        .args(args)
        .env_remove("PIDLAB_TOL")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn family_file(dir: &TempDir, name: &str, params: &[&str]) -> PathBuf {
    let out = dir.path().join(format!("{name}-{}.json", params.join("_")));
    let mut args = vec!["family", "--name", name, "--out", out.to_str().unwrap()];
    for p in params {
        args.extend(["--param", p]);
    }
    let o = pidlab(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn compute(input: &Path, measures: &str, out: &Path) -> Output {
    pidlab(&[
        "compute",
        "--input",
        input.to_str().unwrap(),
        "--measures",
        measures,
        "--out",
        out.to_str().unwrap(),
    ])
}

fn result<'a>(report: &'a Value, measure: &str) -> &'a Value {
    report["results"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["measure"] == measure)
        .unwrap_or_else(|| panic!("no {measure} in {report}"))
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn xor_with_mmi_and_broja() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "xor", &[]);
    let out = dir.path().join("r.json");
    assert_eq!(code(&compute(&input, "mmi,broja", &out)), 0);
    let r = json(&out);
    for m in ["mmi", "broja"] {
        let x = result(&r, m);
        assert!(f(&x["si"]).abs() < 1e-9);
        assert!((f(&x["ci"]) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn and_gate_with_broja() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "and-gate", &[]);
    let out = dir.path().join("r.json");
    assert_eq!(code(&compute(&input, "broja", &out)), 0);
    let x = result(&json(&out), "broja").clone();
    assert!(f(&x["ui_y"]).abs() < 1e-4 && f(&x["ui_z"]).abs() < 1e-4);
    assert!((f(&x["si"]) - 0.311_278).abs() < 1e-4);
    assert!((f(&x["ci"]) - 0.5).abs() < 1e-4);
}

#[test]
fn missing_role_variable_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "xor", &[]);
    let o = pidlab(&["compute", "--input", input.to_str().unwrap(), "--sources", "Y,W"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_and_invalid_inputs() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&pidlab(&["compute", "--input", bad.to_str().unwrap()])), 2);

    let unnormalized = dir.path().join("half.json");
    fs::write(
        &unnormalized,
        r#"{"variables": ["S", "Y", "Z"],
            "alphabets": {"S": ["a", "b"], "Y": ["0", "1"], "Z": ["0", "1"]},
            "entries": [{"state": ["a", "0", "0"], "p": "1/2"}]}"#,
    )
    .unwrap();
    assert_eq!(code(&pidlab(&["compute", "--input", unnormalized.to_str().unwrap()])), 3);

    let missing = dir.path().join("nope.json");
    assert_eq!(code(&pidlab(&["compute", "--input", missing.to_str().unwrap()])), 2);
}

#[test]
fn ig_needs_full_support() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "xor", &[]);
    let out = dir.path().join("r.json");
    let o = compute(&input, "ig", &out);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
    assert_eq!(code(&compute(&input, "all", &out)), 0);
    let r = json(&out);
    assert_eq!(r["skipped"][0]["measure"], "ig");
    assert_eq!(r["results"].as_array().unwrap().len(), Measure::ALL.len() - 1);
}

#[test]
fn red_family_export_matches_table() {
    let dir = TempDir::new().unwrap();
    let path = family_file(&dir, "red-discontinuity", &["a=0.5"]);
    let file = json(&path);
    let mut sy = [[0.0; 3]; 2];
    for e in file["entries"].as_array().unwrap() {
        let s: usize = e["state"][0].as_str().unwrap().parse().unwrap();
        let y: usize = e["state"][1].as_str().unwrap().parse().unwrap();
        sy[s][y] += e["p"].as_str().unwrap().parse::<f64>().unwrap();
    }
    let want = [[0.0, 0.25, 0.25], [0.25, 0.25, 0.0]];
    for s in 0..2 {
        for y in 0..3 {
            assert!((sy[s][y] - want[s][y]).abs() < 1e-15, "{sy:?}");
        }
    }
}

#[test]
fn family_exports() {
    let dir = TempDir::new().unwrap();
    let xor = json(&family_file(&dir, "xor", &[]));
    assert_eq!(xor["entries"].as_array().unwrap().len(), 4);

    let a = fs::read(family_file(&dir, "dirichlet-random", &["seed=7"])).unwrap();
    let again = dir.path().join("again.json");
    pidlab(&["family", "--name", "dirichlet-random", "--param", "seed=7", "--out", again.to_str().unwrap()]);
    assert_eq!(a, fs::read(again).unwrap());

    assert_eq!(code(&pidlab(&["family", "--name", "red-discontinuity", "--param", "a=2"])), 3);
    assert_eq!(code(&pidlab(&["family", "--name", "nonesuch"])), 2);
    assert_eq!(code(&pidlab(&["family", "--name", "xor", "--param", "a=1"])), 2);
}

#[test]
fn family_then_compute_matches_in_process() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "dirichlet-random", &["seed=3", "dims=2x3x2"]);
    let out = dir.path().join("r.json");
    assert_eq!(code(&compute(&input, "all", &out)), 0);
    let report = json(&out);
    let p = generate(&FamilySpec::dirichlet_dims(3, &[2, 3, 2])).unwrap();
    let cfg = SolverConfig::default();
    for m in Measure::ALL {
        let want = m.compute(&p, &cfg).unwrap();
        let got = result(&report, m.as_str());
        for (k, v) in [("si", want.si), ("ui_y", want.ui_y), ("ui_z", want.ui_z), ("ci", want.ci)] {
            assert_eq!(f(&got[k]).to_bits(), v.to_bits(), "{m} {k}");
        }
    }
}

#[test]
fn reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "dirichlet-random", &["seed=11"]);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    compute(&input, "all", &a);
    compute(&input, "all", &b);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    for out in [&a, &b] {
        pidlab(&["verify", "--suite", "oracle", "--trials", "5", "--seed", "2", "--out", out.to_str().unwrap()]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

fn verify(suite: &str, trials: &str, dir: &TempDir) -> (i32, Value) {
    let out = dir.path().join(format!("{suite}.json"));
    let o = pidlab(&["verify", "--suite", suite, "--trials", trials, "--seed", "1", "--out", out.to_str().unwrap()]);
    (code(&o), json(&out))
}

#[test]
fn verify_consistency() {
    let dir = TempDir::new().unwrap();
    let (c, r) = verify("consistency", "40", &dir);
    assert_eq!(c, 0);
    for check in r["checks"].as_array().unwrap() {
        if check["relation"] == "at_most" {
            assert!(f(&check["value"]) <= 1e-7);
        }
    }
}

#[test]
fn verify_continuity_verdicts() {
    let dir = TempDir::new().unwrap();
    let (c, r) = verify("continuity", "0", &dir);
    assert_eq!(c, 0);
    let probes = r["probes"].as_array().unwrap();
    let red = probes.iter().find(|p| p["measure"] == "red").unwrap();
    assert_eq!(red["verdict"], "DISCONTINUOUS");
    assert!((f(&red["jump"]) - 0.146).abs() < 1e-3);
    let broja = probes.iter().find(|p| p["measure"] == "broja").unwrap();
    assert_eq!(broja["verdict"], "CONTINUOUS");
}

#[test]
fn verify_additivity_reports_every_check() {
    let dir = TempDir::new().unwrap();
    let (c, r) = verify("additivity", "5", &dir);
    let checks = r["checks"].as_array().unwrap();
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    // The dependency measure's shared part is subadditive, not superadditive.
    assert_eq!(failed, ["dep/min_si_defect", "dep/witness_si_defect"]);
    assert_eq!(c, 5);
    assert_eq!(r["passed"], false);
    assert_eq!(r["witnesses"].as_array().unwrap().len(), 5);
}

#[test]
fn unknown_suite() {
    assert_eq!(code(&pidlab(&["verify", "--suite", "speed"])), 2);
}

fn construct(input: &Path, dy: &str, dz: &str, out: &Path) -> Output {
    pidlab(&[
        "ui-construction",
        "--input",
        input.to_str().unwrap(),
        "--delta-y",
        dy,
        "--delta-z",
        dz,
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn ui_construction_command() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "dirichlet-random", &["seed=5"]);
    let out = dir.path().join("r.json");
    assert_eq!(code(&construct(&input, "0", "0", &out)), 0);
    let r = json(&out);
    let p = generate(&FamilySpec::dirichlet(5)).unwrap();
    assert!((f(&r["result"]["si"]) - si_mmi(&p).unwrap().si).abs() < 1e-15);
    assert_eq!(r["result"]["measure"], "ui_construction(cli)");

    let t = InfoTerms::of(&p).unwrap();
    let dy = (0.5 * t.sy.min(t.sy_given_z)).to_string();
    let dz = (0.25 * t.sz.min(t.sz_given_y)).to_string();
    assert_eq!(code(&construct(&input, &dy, &dz, &out)), 0);
    let r = json(&out);
    assert!(f(&r["consistency_residual"]).abs() <= f(&r["consistency_tolerance"]));

    assert_eq!(code(&construct(&input, "5", "0", &out)), 3);
    assert_eq!(code(&construct(&input, "-0.5", "0", &out)), 3);
}

#[test]
fn tolerance_from_environment() {
    let dir = TempDir::new().unwrap();
    let input = family_file(&dir, "xor", &[]);
    let out = dir.path().join("r.json");
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_pidlab"))
            .args(["compute", "--input", input.to_str().unwrap(), "--measures", "broja", "--out", out.to_str().unwrap()])
            .env("PIDLAB_TOL", tol)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1e-6")), 0);
    assert_eq!(f(&json(&out)["tolerances"]["solver"]["gap_tol"]), 1e-6);
    assert_eq!(code(&run("fast")), 2);
}
