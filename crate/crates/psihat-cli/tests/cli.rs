//! The `psihat` binary: exit codes, determinism and move round trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use psihat::triangulation::{find_h_isomorphism, EDGE_CORNERS};
use psihat_cli::commands::load_file;
use psihat_cli::document::TriangulationDoc;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/boundary4simplex.json")
}

fn psihat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psihat")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("psihat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    let _ = std::fs::remove_file(&p);
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_passes_and_is_byte_stable() {
    let a = psihat(&["verify", "--level", "operators", "--N", "3", "--trials", "20"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert!(stdout(&a).contains("all identities hold"));
    let b = psihat(&["verify", "--level", "operators", "--N", "3", "--trials", "20"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_names_the_failing_identity() {
    let o = psihat(&["verify", "--level", "algebra", "--N", "3", "--trials", "5", "--tol", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("failing: "));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(psihat(&["verify", "--level", "sixj", "--N", "4"]).status.code(), Some(2));
    assert_eq!(psihat(&["verify", "--level", "nonsense"]).status.code(), Some(2));
    assert_eq!(psihat(&["invariant", "/nonexistent.json"]).status.code(), Some(2));
    let o = psihat(&["move", s(&fixture()), "--kind", "pachner+", "--target", "7,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invariant_compares_against_a_baseline() {
    let base = scratch("baseline.json");
    let first = psihat(&["invariant", s(&fixture()), "--N", "3", "--baseline", s(&base)]);
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).contains("baseline written"));
    let moved = scratch("moved.json");
    let o = psihat(&["move", s(&fixture()), "--kind", "pachner+", "--target", "0,0", "-o", s(&moved)]);
    assert_eq!(o.status.code(), Some(0));
    let again = psihat(&["invariant", s(&moved), "--N", "3", "--baseline", s(&base)]);
    assert_eq!(again.status.code(), Some(0));
    assert!(stdout(&again).contains("equal mod qtilde, k="));
    let other = psihat(&["invariant", s(&fixture()), "--N", "5", "--baseline", s(&base)]);
    assert_eq!(other.status.code(), Some(2));
}

#[test]
fn a_missing_charge_is_solved_on_request() {
    let mut doc = TriangulationDoc::parse(&std::fs::read_to_string(fixture()).unwrap()).unwrap();
    doc.charge = None;
    let bare = scratch("bare.json");
    std::fs::write(&bare, doc.to_json()).unwrap();
    assert_eq!(psihat(&["invariant", s(&bare), "--N", "3"]).status.code(), Some(2));
    let o = psihat(&["invariant", s(&bare), "--N", "3", "--find-charge"]);
    assert_eq!(o.status.code(), Some(0));
    let solved = scratch("solved.json");
    assert_eq!(psihat(&["find-charge", s(&bare), "-o", s(&solved)]).status.code(), Some(0));
    assert!(load_file(&solved).unwrap().charge.is_some());
}

#[test]
fn pachner_round_trip_through_files() {
    let up = scratch("up.json");
    assert_eq!(psihat(&["move", s(&fixture()), "--kind", "pachner+", "--target", "0,0", "-o", s(&up)]).status.code(), Some(0));
    let h_up = load_file(&up).unwrap();
    let (t, e) = (0..h_up.complex.n_edges())
        .find(|&e| h_up.complex.edge_incidences(e).len() == 3 && h_up.complex.edge_incidences(e).iter().all(|&(t, _)| t >= 3))
        .map(|e| h_up.complex.edge_incidences(e)[0])
        .expect("the new edge");
    let down = scratch("down.json");
    let target = format!("{t},{e}");
    assert_eq!(psihat(&["move", s(&up), "--kind", "pachner-", "--target", &target, "-o", s(&down)]).status.code(), Some(0));
    let original = load_file(&fixture()).unwrap();
    assert!(find_h_isomorphism(&original, &load_file(&down).unwrap()).is_some());
}

#[test]
fn bubble_accepts_only_a_link_edge_of_the_face() {
    // Every triangle of the 5-cycle link meets the link, so each face qualifies.
    for f in 0..4 {
        let target = format!("0,{f}");
        let o = psihat(&["move", s(&fixture()), "--kind", "bubble+", "--target", &target]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    // Face 3 spans corners 0, 1 and 2, so the edge between corners 2 and 3 is not on it.
    assert_eq!(EDGE_CORNERS[5], (2, 3));
    let link_edge = "0,5";
    let o = psihat(&["move", s(&fixture()), "--kind", "bubble+", "--target", "0,3", "--link-edge", link_edge]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gauge_keeps_the_invariant() {
    let g = scratch("gauged.json");
    let o = psihat(&["gauge", s(&fixture()), "--random", "--seed", "3", "--make-admissible", "-o", s(&g)]);
    assert_eq!(o.status.code(), Some(0));
    let a = ResultLine::of(&psihat(&["invariant", s(&fixture()), "--N", "3"]));
    let b = ResultLine::of(&psihat(&["invariant", s(&g), "--N", "3"]));
    assert!((a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9);
}

struct ResultLine(f64, f64);

impl ResultLine {
    fn of(o: &Output) -> Self {
        let doc = psihat_cli::document::ResultDoc::parse(&stdout(o)).unwrap();
        ResultLine(doc.value[0], doc.value[1])
    }
}

#[test]
fn canonical_is_periodic_in_qtilde() {
    let a = psihat(&["canonical", "--value", "0.3,-0.2", "--N", "5"]);
    assert_eq!(a.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    let order = doc["qtilde_order"].as_u64().unwrap() as f64;
    let z = num_complex::Complex64::new(0.3, -0.2) * num_complex::Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / order);
    let b = psihat(&["canonical", "--value", &format!("{},{}", z.re, z.im), "--N", "5"]);
    let other: serde_json::Value = serde_json::from_slice(&b.stdout).unwrap();
    assert!((doc["modulus"].as_f64().unwrap() - other["modulus"].as_f64().unwrap()).abs() < 1e-12);
    assert!((doc["reduced_arg"].as_f64().unwrap() - other["reduced_arg"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(psihat(&["canonical", "--value", "0,0", "--N", "5"]).status.code(), Some(2));
}
