use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatland"))
        .args(args)
        .env("FLATLAND_FIXTURES", fixtures())
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(args: &[&str]) -> (i32, String) {
    let out = run(args);
    assert!(out.stdout.is_empty(), "no output on failure");
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("flatland-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn build_theta() {
    let v = ok(&["build", "graphs/theta.json", "colorings/theta.json"]);
    assert_eq!(v["format"], 1);
    assert_eq!(v["class"]["euler"], -1);
    assert_eq!(v["class"]["boundary_components"], 3);
    assert_eq!(v["strata"]["index"], 0);
    assert_eq!(v["strata"]["morse_identity"], true);
}

#[test]
fn build_capped_edge_is_a_disk() {
    let v = ok(&["build", "graphs/capped_edge.json", "colorings/capped_edge.json"]);
    assert_eq!(v["class"]["euler"], 1);
    assert_eq!(v["class"]["boundary_components"], 1);
    assert_eq!(v["class"]["orientable"], true);
}

#[test]
fn build_enumerates_all_theta_colorings() {
    let v = ok(&["build", "graphs/theta.json", "--enumerate"]);
    assert_eq!(v["count"], 36);
    let records = v["records"].as_array().unwrap();
    assert!(records.iter().all(|r| r["strata"]["index"] == 0));
}

#[test]
fn parallel_enumeration_is_deterministic() {
    let a = run(&["--jobs", "1", "build", "graphs/k4.json", "--enumerate"]);
    let b = run(&["--jobs", "4", "build", "graphs/k4.json", "--enumerate"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["build", "graphs/g_m.json", "colorings/g_m.json"][..],
        &["holography", "graphs/theta_sum.json", "colorings/theta_sum.json"],
        &["polyloop", "loops/sextic_generator.json", "--perturb", "5", "--seed", "9"],
        &["reduce-pattern", "curves/notched_disk.json"],
        &["whitney", "curves/torus_boundary.json"],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout, "{args:?}");
    }
}

#[test]
fn invalid_coloring_is_a_domain_error() {
    let path = scratch("bad_coloring.json");
    std::fs::write(&path, r#"{"format":1,"coloring":{"0":"A","1":"A","2":"C","3":"A","4":"B","5":"C"}}"#).unwrap();
    let (c, err) = code(&["build", "graphs/theta.json", path.to_str().unwrap()]);
    assert_eq!(c, 1);
    assert!(err.contains("violations"), "{err}");
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(code(&["build", "graphs/missing.json", "colorings/theta.json"]).0, 2);
    assert_eq!(code(&["build", "graphs/theta.json", "colorings/k4.json"]).0, 2);
    assert_eq!(code(&["build", "graphs/theta.json"]).0, 2);
    let path = scratch("junk.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(code(&["reduce-pattern", path.to_str().unwrap()]).0, 2);
}

#[test]
fn holography_round_trips() {
    for name in ["theta", "g_m", "dumbbell", "theta_sum"] {
        let v = ok(&["holography", &format!("graphs/{name}.json"), &format!("colorings/{name}.json")]);
        assert_eq!(v["isomorphic"], true, "{name}");
        assert_eq!(v["causality"]["format"], 1);
    }
}

#[test]
fn holography_from_saved_causality() {
    let v = ok(&["holography", "graphs/g_m.json", "colorings/g_m.json"]);
    let path = scratch("g_m_causality.json");
    std::fs::write(&path, v["causality"].to_string()).unwrap();
    let w = ok(&["holography", "--from-causality", path.to_str().unwrap(), "graphs/g_m.json", "colorings/g_m.json"]);
    assert_eq!(w["isomorphic"], true);
    assert_eq!(w["reconstructed"], v["reconstructed"]);
}

#[test]
fn corrupt_causality_exits_two() {
    let (c, err) = code(&["holography", "--from-causality", "invalid/corrupt_causality.json"]);
    assert_eq!(c, 2);
    assert!(err.contains("causality"), "{err}");
}

#[test]
fn dumped_surface_reloads() {
    let dump = scratch("theta_surface.json");
    let svg = scratch("theta_strips.svg");
    ok(&[
        "build",
        "graphs/theta.json",
        "colorings/theta.json",
        "--dump-surface",
        dump.to_str().unwrap(),
        "--render",
        svg.to_str().unwrap(),
    ]);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    let v = ok(&["holography", "--surface", dump.to_str().unwrap()]);
    assert_eq!(v["isomorphic"], true);
}

#[test]
fn polyloops() {
    let v = ok(&["polyloop", "loops/quartic_generator.json"]);
    assert_eq!(v["j"]["census"], 1);
    assert_eq!(v["j"]["strata"], 1);
    assert_eq!(v["j"]["delta_curves"], 1);
    assert_eq!(v["discriminant_check"], true);
    let r = ok(&["polyloop", "loops/rootless.json"]);
    assert_eq!(r["j"]["census"], 0);
    assert!(r["events"].as_array().unwrap().is_empty());
    let d = ok(&["polyloop", "loops/quartic_double.json"]);
    assert_eq!(d["j"]["census"], 2);
}

#[test]
fn perturbations_keep_j() {
    let v = ok(&["polyloop", "loops/quartic_generator.json", "--perturb", "20", "--epsilon", "0.01", "--seed", "3"]);
    assert_eq!(v["seed"], 3);
    let trials = v["perturbations"].as_array().unwrap();
    assert_eq!(trials.len(), 20);
    assert!(trials.iter().filter(|t| t["valid"] == true).all(|t| t["j"] == 1));
}

#[test]
fn triple_root_is_a_domain_error() {
    let (c, err) = code(&["polyloop", "invalid/triple_root_loop.json"]);
    assert_eq!(c, 1);
    assert!(err.contains("multiplicity 3") && err.contains("theta"), "{err}");
}

#[test]
fn whitney_reports() {
    let v = ok(&["whitney", "curves/figure_eight.json"]);
    let r = &v["loops"][0]["report"];
    assert_eq!(r["whitney_holds"], true);
    assert_eq!(r["gauss_degree"], 0);
    let c = ok(&["whitney", "curves/circle.json"]);
    assert_eq!(c["loops"][0]["report"]["region_holds"], true);
}

#[test]
fn reduce_patterns() {
    for (file, n) in [
        ("words/generator.json", 1),
        ("words/mirror_generator.json", -1),
        ("words/two_disks.json", 2),
        ("words/annular.json", 0),
        ("words/banded_generator.json", 1),
        ("curves/notched_disk.json", 1),
        ("curves/notched_disk_mirror.json", -1),
        ("curves/generator_delta.json", 1),
        ("loops/quartic_double.json", 2),
    ] {
        let v = ok(&["reduce-pattern", file]);
        assert_eq!(v["n"], n, "{file}");
    }
    let k = ok(&["reduce-pattern", "words/generator.json"]);
    assert_eq!(k["terminal"], "B0 B1 D0 D0");
}

#[test]
fn enumerate_graphs() {
    let v = ok(&["enumerate-graphs", "--max-vertices", "6", "--mixed"]);
    assert_eq!(v["total"], 58);
    let t = ok(&["enumerate-graphs", "--max-vertices", "6"]);
    assert_eq!(t["counts"]["2+0"], 2);
    assert_eq!(t["counts"]["4+0"], 5);
    assert_eq!(t["counts"]["6+0"], 17);
    assert_eq!(code(&["enumerate-graphs", "--max-vertices", "40"]).0, 2);
}

#[test]
fn render_detects_document_type() {
    for (file, kind) in [
        ("curves/pair_of_pants.json", "curve"),
        ("words/double_notch.json", "word"),
        ("loops/sextic_generator.json", "loop"),
        ("graphs/k4.json", "graph"),
    ] {
        let out = scratch(&format!("{kind}.svg"));
        let mut args = vec!["render", file];
        if kind == "graph" {
            args.push("colorings/k4.json");
        }
        args.extend(["--render", out.to_str().unwrap()]);
        let v = ok(&args);
        assert_eq!(v["kind"], kind);
        assert!(std::fs::read_to_string(&out).unwrap().contains("</svg>"));
    }
}
