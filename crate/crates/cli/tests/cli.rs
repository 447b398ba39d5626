use std::path::Path;
use std::process::{Command, Output};

fn dol(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dol"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join(name)).unwrap()).unwrap()
}

#[test]
fn orbit_writes_csv_and_summary() {
    let d = tempfile::tempdir().unwrap();
    let out = dol(
        d.path(),
        &["orbit", "--m", "1", "--eps", "1.0,0.5", "--seed", "7"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(d.path().join("orbit.csv")).unwrap();
    assert!(csv.starts_with("n,re_1,im_1,defect\n"));
    let j = json(d.path(), "orbit.json");
    assert_eq!(j["seed"], 7);
    assert!(j["version"].as_str().unwrap().starts_with("dol-core"));
    assert_eq!(j["policy"]["backward_depth"], 120);
    assert_eq!(j["config"]["resolutions"], serde_json::json!([1.0, 0.5]));
    let r = &j["result"];
    assert_eq!(r["targets_hit"], r["checkpoints"].as_array().unwrap().len());
    assert!(r["max_shadowing_defect"].as_f64().unwrap() < 1e-10);
    assert_eq!(
        csv.lines().count() - 1,
        r["itinerary_length"].as_u64().unwrap() as usize
    );
}

#[test]
fn product_orbit() {
    let d = tempfile::tempdir().unwrap();
    let out = dol(d.path(), &["orbit", "--m", "2", "--eps", "2.0"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(d.path().join("orbit.csv")).unwrap();
    assert!(csv.starts_with("n,re_1,im_1,re_2,im_2,defect\n"));
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(dol(d.path(), &["orbit", "--m", "1"]).status.code(), Some(2));
    assert_eq!(dol(d.path(), &["bogus"]).status.code(), Some(2));
    assert_eq!(
        dol(d.path(), &["pack", "--geom", "triangle"]).status.code(),
        Some(2)
    );
    assert_eq!(
        dol(d.path(), &["density", "--input", "nope.csv", "--eps", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dol(d.path(), &["orbit", "--eps", "0.5,1.0"]).status.code(),
        Some(2)
    );
    assert_eq!(dol(d.path(), &["push"]).status.code(), Some(2));
}

#[test]
fn push_and_density_pipeline() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(
        dol(d.path(), &["orbit", "--eps", "1.0,0.5,0.25"])
            .status
            .code(),
        Some(0)
    );
    let out = dol(
        d.path(),
        &["density", "--input", "orbit.csv", "--eps", "0.5"],
    );
    assert_eq!(out.status.code(), Some(0));
    let j = json(d.path(), "density.json");
    let row = &j["result"][0];
    for key in [
        "epsilon",
        "cells_total",
        "cells_hit",
        "coverage_fraction",
        "max_first_hit",
    ] {
        assert!(row.get(key).is_some(), "missing {key}");
    }
    assert_eq!(row["coverage_fraction"], 1.0);
    assert_eq!(j["config"]["extra"]["domain"], "omega");

    assert_eq!(
        dol(d.path(), &["push", "--input", "orbit.csv"])
            .status
            .code(),
        Some(0)
    );
    let p = json(d.path(), "push.json");
    assert!(p["result"]["max_conjugacy_defect"].as_f64().unwrap() < 1e-9);
    let csv = std::fs::read_to_string(d.path().join("push.csv")).unwrap();
    assert!(csv.starts_with("n,re_1,im_1,conj_defect\n"));
    // the last row has no successor
    assert!(csv.lines().last().unwrap().ends_with(','));

    let out = dol(
        d.path(),
        &["density", "--input", "push.csv", "--eps", "400"],
    );
    assert!(out.status.code().is_some());
    assert_eq!(
        json(d.path(), "density.json")["config"]["extra"]["domain"],
        "annulus"
    );
}

#[test]
fn push_builds_orbit_from_schedule() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(
        dol(d.path(), &["push", "--m", "2", "--eps", "4.0"])
            .status
            .code(),
        Some(0)
    );
    let csv = std::fs::read_to_string(d.path().join("push.csv")).unwrap();
    assert!(csv.starts_with("n,re_1,im_1,re_2,im_2,conj_defect\n"));
}

#[test]
fn growth_reports_kappa() {
    let d = tempfile::tempdir().unwrap();
    let out = dol(d.path(), &["growth", "--m", "1", "--target", "0.99"]);
    assert_eq!(out.status.code(), Some(0));
    let j = json(d.path(), "growth.json");
    let k = j["result"]["kappa"].as_f64().unwrap();
    assert!((k - 2.556635e-4).abs() < 1e-9);
    assert_eq!(j["result"]["steps_to_99"], 18011);
    let csv = std::fs::read_to_string(d.path().join("growth.csv")).unwrap();
    assert!(csv.starts_with("j,v\n0,"));
    assert_eq!(csv.lines().count(), 18013);
    assert_eq!(
        dol(d.path(), &["growth", "--target", "1.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn pack_presets() {
    let d = tempfile::tempdir().unwrap();
    let out = dol(d.path(), &["pack", "--geom", "unit-square", "--h0", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(d.path(), "pack.json")["result"].clone();
    assert_eq!(r["bound_ok"], true);
    assert_eq!(r["h"], 0.125);
    for key in [
        "h",
        "cube_count",
        "ball_volume",
        "v_lower",
        "v_upper",
        "bound_ok",
        "h_final",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    let out = dol(d.path(), &["pack", "--geom", "unit-disc", "--h0", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let out = dol(d.path(), &["pack", "--geom", "box:0,0,1,1;ball:2,0.5,0.5"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn thin_slab_hits_iteration_cap() {
    let d = tempfile::tempdir().unwrap();
    let out = dol(
        d.path(),
        &["pack", "--geom", "box:0,0,1,1e-9", "--h0", "0.5"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(d.path(), "pack.json")["passed"], false);
}

#[test]
fn lipschitz_verdicts() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("abs.csv"),
        "v,r\n-1,1\n-0.5,0.5\n0,0\n0.5,0.5\n1,1\n",
    )
    .unwrap();
    let out = dol(
        d.path(),
        &["lipschitz", "--input", "abs.csv", "--trials", "2000"],
    );
    assert_eq!(out.status.code(), Some(0));
    let r = json(d.path(), "lipschitz.json")["result"].clone();
    assert_eq!(r["estimate"], 1.0);
    assert_eq!(r["cone_violations"], 0);
    assert_eq!(r["star"]["passed"], true);

    let out = dol(d.path(), &["lipschitz", "--input", "abs.csv", "--c", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(d.path(), "lipschitz.json")["result"].clone();
    assert!(r["cone_violations"].as_u64().unwrap() > 0);

    std::fs::write(
        d.path().join("m2.csv"),
        "v,z_re_1,z_im_1,r\n0,0,0,0\n1,0,0,2\n",
    )
    .unwrap();
    let out = dol(d.path(), &["lipschitz", "--input", "m2.csv", "--c", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(d.path(), "lipschitz.json")["result"]["star"].is_null());
}
