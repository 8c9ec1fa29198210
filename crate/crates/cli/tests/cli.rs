use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use urbanview::gestures::{GestureFrame, Hand, Status};
use urbanview::sweep::AnalysisReport;
use urbanview::{Building, BuildingRole, Cuboid, EngineConfig, GeoOrigin, Point3, Scene};

fn boxed(id: &str, role: BuildingRole, lo: [f64; 3], hi: [f64; 3]) -> Building {
    Building::new(id, role, vec![Cuboid::from_bounds(lo.into(), hi.into()).unwrap()]).unwrap()
}

fn write_scene(dir: &Path) -> PathBuf {
    let s = Scene::new(
        GeoOrigin {
            lat: 22.54,
            lon: 114.05,
        },
        vec![
            boxed("tower", BuildingRole::Landmark, [55.0, -5.0, 0.0], [65.0, 5.0, 60.0]),
            boxed("cand", BuildingRole::Candidate, [-5.0, -8.0, 0.0], [5.0, 8.0, 25.0]),
            boxed("west", BuildingRole::Static, [-30.0, -10.0, 0.0], [-15.0, 10.0, 12.0]),
        ],
        vec![Point3::new(-40.0, -40.0, 0.0), Point3::new(60.0, -40.0, 0.0)],
    )
    .unwrap();
    let path = dir.join("scene.json");
    std::fs::write(&path, s.to_json().unwrap()).unwrap();
    path
}

fn urbanview(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urbanview"))
        .env_remove("URBANVIEW_CONFIG")
        .args(args)
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).unwrap();
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn dump_defaults_parses_back() {
    let out = urbanview(&["config", "dump-defaults"]);
    assert!(out.status.success());
    let c = EngineConfig::from_json_str(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(c, EngineConfig::default());
}

#[test]
fn analyze_visibility_and_shading() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path());
    let s = scene.to_str().unwrap();
    let v = stdout_json(&urbanview(&[
        "analyze",
        s,
        "--target",
        "tower",
        "--viewpoint",
        "-40,-40,1.7",
        "--resolution",
        "200",
    ]));
    let vis = v["visibility"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&vis));

    let v = stdout_json(&urbanview(&[
        "analyze",
        s,
        "--target",
        "cand",
        "--sun",
        "2024-06-21T16:00:00+08:00",
        "--resolution",
        "200",
    ]));
    assert!((0.0..=1.0).contains(&v["shading"].as_f64().unwrap()));

    // both or neither measurement is an argument error
    let out = urbanview(&["analyze", s, "--target", "tower"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn errors_are_json_with_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path());
    let s = scene.to_str().unwrap();

    let out = urbanview(&["analyze", s, "--target", "nope", "--viewpoint", "0,-40,2"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_kind(&out), "not_found");

    let out = urbanview(&["analyze", s, "--target", "cand", "--sun", "2024-06-21T23:00:00+08:00"]);
    assert_eq!(out.status.code(), Some(6));
    assert_eq!(error_kind(&out), "night_time");

    let out = urbanview(&[
        "analyze",
        s,
        "--target",
        "tower",
        "--viewpoint",
        "0,-40,2",
        "--resolution",
        "15",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_kind(&out), "validation");

    let out = urbanview(&[
        "optimize",
        dir.path().join("missing.json").to_str().unwrap(),
        "--target",
        "x",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(error_kind(&out), "io");
}

#[test]
fn config_file_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path());
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"energy": {"starts": 0}}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_urbanview"))
        .env("URBANVIEW_CONFIG", &cfg)
        .args(["optimize", scene.to_str().unwrap(), "--target", "tower"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    std::fs::write(&cfg, r#"{"energy": {"starts": 3}}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_urbanview"))
        .env("URBANVIEW_CONFIG", &cfg)
        .args(["optimize", scene.to_str().unwrap(), "--target", "tower", "--runs"])
        .output()
        .unwrap();
    let v = stdout_json(&out);
    assert_eq!(v["runs"].as_array().unwrap().len(), 3);
    assert!(v["best"]["energy"].as_f64().unwrap().is_finite());
}

#[test]
fn sweep_with_cache_and_edit() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path());
    let s = scene.to_str().unwrap();
    let report = dir.path().join("report.json");
    let r = report.to_str().unwrap();
    let args = [
        "--deterministic",
        "sweep",
        s,
        "--candidate",
        "cand",
        "--date",
        "2024-06-21",
        "--resolution",
        "100",
        "--cache",
        "--edit-yaw",
        "60",
        "--out",
        r,
    ];
    let first = urbanview(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let summary = String::from_utf8(first.stdout).unwrap();
    assert!(
        summary.starts_with("sweep cand: 18 variations x 21 shading samples"),
        "{summary}"
    );
    assert!(dir.path().join("scene.json.sweep-cache.json").exists());
    let a = std::fs::read(&report).unwrap();

    let second = urbanview(&args);
    assert!(second.status.success());
    assert_eq!(std::fs::read(&report).unwrap(), a);

    let loaded = AnalysisReport::load(&report).unwrap();
    let sel = loaded.selected.unwrap();
    // 60 degrees at scale 1.0 is variation (1, 1)
    assert_eq!(sel.variation, Some(4));
    assert_eq!(sel.shading, loaded.variations[4].shading);

    let out = urbanview(&["sweep", s, "--candidate", "cand"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn replay_applies_the_final_scale() {
    let dir = tempfile::tempdir().unwrap();
    let scene = write_scene(dir.path());
    let centre = Scene::load(&scene).unwrap().building("cand").unwrap().centroid();

    let o = Point3::new(0.0, 0.0, -1.0);
    let mut lines = vec![
        serde_json::to_string(&GestureFrame::new(0.0, Hand::Right, Status::Point, centre, o)).unwrap(),
        serde_json::to_string(&GestureFrame::new(0.2, Hand::Right, Status::Open, centre, o)).unwrap(),
        "{not json".to_string(),
    ];
    let (l0, r0) = (Point3::new(-0.2, 0.0, 1.0), Point3::new(0.2, 0.0, 1.0));
    for k in 0..110 {
        let u = (k as f64 - 99.0).max(0.0) / 10.0;
        let grow = 1.0 + u;
        let t = 1.0 + k as f64 * 0.01;
        for (hand, p) in [(Hand::Left, l0), (Hand::Right, r0)] {
            let p = Point3::new(p.x * grow, p.y, p.z);
            lines.push(serde_json::to_string(&GestureFrame::new(t, hand, Status::Close, p, o)).unwrap());
        }
    }
    let trace = dir.path().join("trace.ndjson");
    std::fs::write(&trace, lines.join("\n")).unwrap();
    let edited = dir.path().join("edited.json");
    let out = urbanview(&[
        "gestures",
        "replay",
        "--trace",
        trace.to_str().unwrap(),
        "--scene",
        scene.to_str().unwrap(),
        "--scene-out",
        edited.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let events: Vec<Value> = std::str::from_utf8(&out.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(events[0]["event"], "highlight");
    assert_eq!(events[1]["event"], "select");
    assert!(events
        .iter()
        .any(|e| e["event"] == "manipulation" && e["target"] == "cand"));
    assert_eq!(events.last().unwrap()["phase"], "released");
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let before = Scene::load(&scene).unwrap();
    let after = Scene::load(&edited).unwrap();
    let (lo0, hi0) = before.building("cand").unwrap().bounds();
    let (lo1, hi1) = after.building("cand").unwrap().bounds();
    assert!(((hi1.x - lo1.x) / (hi0.x - lo0.x) - 2.0).abs() < 1e-9);
    assert_eq!(after.building("west").unwrap(), before.building("west").unwrap());
}
