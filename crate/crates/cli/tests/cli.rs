use std::process::{Command, Output};

use serde_json::Value;

fn fiblab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiblab"))
        .args(args)
        .env("FIBLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn jsonl(o: &Output) -> Vec<Value> {
    stdout(o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn unknown_flag_is_usage_error() {
    let o = fiblab(&["check", "--nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn empty_file_checks_clean() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir, "empty.txt", "");
    let o = fiblab(&["check", &f, "--output", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}

#[test]
fn check_and_prove_report_failures() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "ids.txt",
        "cassini: F[n+1]*F[n-1] - F[n]^2 = (-1)^n\nwrong: F[n]^2 = F[2n]\n",
    );
    let o = fiblab(&["check", &f, "--output", "jsonl", "--range", "40"]);
    assert_eq!(o.status.code(), Some(1));
    let recs = jsonl(&o);
    assert_eq!(recs[0]["status"], "AllEqual");
    assert_eq!(recs[1]["status"], "Counterexample");
    assert_eq!(recs[1]["counterexample"]["assignment"]["n"], 2);

    let o = fiblab(&["prove", &f, "--output", "jsonl"]);
    assert_eq!(o.status.code(), Some(1));
    let recs = jsonl(&o);
    assert_eq!(recs[0]["status"], "Proven");
    assert_eq!(recs[1]["status"], "Falsified");
}

#[test]
fn prove_grid_override() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "fam.fibcat",
        "# fiblab-catalog v1\n\n[identity]\nid = shift\neq = \"F[n+k+1] = F[k+1]*F[n+1] + F[k]*F[n]\"\nparams = \"k:0..9\"\nclass = general\n",
    );
    let o = fiblab(&["prove", &f, "--grid", "k=2..4", "--output", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = jsonl(&o);
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[0]["bindings"]["k"], 2);
}

#[test]
fn classify_lists_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(&dir, "c.txt", "cubes: F[n+1]^3 + F[n]^3 - F[n-1]^3 = F[3n]\n");
    let o = fiblab(&["classify", &f, "--output", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = jsonl(&o);
    assert_eq!(recs[0]["class"], "NonHomogeneousCubic");
    assert_eq!(recs[1]["mismatches"], serde_json::json!([]));
}

#[test]
fn spiral_check_map_one() {
    let o = fiblab(&["spiral", "--map", "1", "--n", "5", "--check", "--output", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let r = &jsonl(&o)[0];
    assert_eq!(r["coplanar_x_eq_y"], true);
    assert_eq!(r["interiors_disjoint"], true);
}

#[test]
fn spiral_obj_goes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spiral.obj");
    let o = fiblab(&[
        "spiral",
        "--map",
        "2",
        "--n",
        "2",
        "--format",
        "obj",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 16);
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 12);
}

#[test]
fn spiral_rejects_bad_map() {
    assert_eq!(fiblab(&["spiral", "--map", "4"]).status.code(), Some(2));
}

#[test]
fn umbral_is_proven() {
    let o = fiblab(&["umbral", "--p", "4", "--variant", "minus", "--output", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(jsonl(&o)[0]["status"], "Proven");
}

#[test]
fn search_emits_catalog_records() {
    let o = fiblab(&["search", "--window", "-1..1", "--products", "cubes", "--targets", "triple:0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let cat = fiblab::catalog::load(&text).unwrap();
    assert_eq!(cat.len(), 1);
    assert_eq!(cat.entries[0].eq, "F[n+1]^3 + F[n]^3 = F[n-1]^3 + F[3n]");
}

#[test]
fn search_rejects_bad_targets() {
    let o = fiblab(&["search", "--window", "0..2", "--targets", "cube:1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn catalog_show_round_trips() {
    let o = fiblab(&["catalog", "show"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), fiblab::catalog::SHIPPED);
}

#[test]
fn catalog_verify_numeric_on_small_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        &dir,
        "two.fibcat",
        "# fiblab-catalog v1\n\n[identity]\nid = a\neq = \"F[n+2] = F[n+1] + F[n]\"\nclass = warmup\n\n[identity]\nid = b\neq = \"F[n] = F[n+1]\"\nclass = warmup\n",
    );
    let o = fiblab(&["catalog", "verify", "--file", &f, "--mode", "numeric", "--output", "jsonl"]);
    assert_eq!(o.status.code(), Some(1));
    let recs = jsonl(&o);
    assert_eq!(recs[0]["numeric"]["status"], "AllEqual");
    assert_eq!(recs[1]["numeric"]["status"], "Counterexample");
    assert_eq!(recs[2]["ok"], false);
}

#[test]
fn shipped_catalog_verifies() {
    let o = fiblab(&["catalog", "verify", "--mode", "both", "--output", "jsonl"]);
    assert_eq!(o.status.code(), Some(0));
    let recs = jsonl(&o);
    let (entries, summary) = recs.split_at(recs.len() - 1);
    let bounded: Vec<&str> = entries
        .iter()
        .filter(|r| r["symbolic"]["method"] == "BoundedOnly")
        .map(|r| r["id"].as_str().unwrap())
        .collect();
    assert_eq!(bounded, ["benjamin-eustis-plott"]);
    assert!(entries
        .iter()
        .filter(|r| r["id"] != "benjamin-eustis-plott")
        .all(|r| r["symbolic"]["status"] == "Proven" && r["numeric"]["status"] == "AllEqual"));
    assert_eq!(summary[0]["ok"], true);
}
