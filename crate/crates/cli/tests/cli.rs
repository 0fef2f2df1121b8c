use std::fs;
use std::path::Path;
use std::process::Command;

use contactlab_cli::runner::{DISSIPATION_FILE, REPORT_FILE};
use contactlab_cli::{emit_plot_data, exit, parse_config, read_report, run, RunOptions};
use serde_json::Value;

const MINIMAL: &str = r#"
[experiment]
id = "minimal"
dimension = 2

[params]
K = 10
q_per_axis = 4
directions = 16

[[task]]
kind = "r_sequence"
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_contactlab"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_text(text: &str, dir: &Path) -> contactlab_cli::ReportDocument {
    let exp = parse_config(text).unwrap();
    run(
        &exp,
        &RunOptions {
            out_dir: dir.to_path_buf(),
            refine: 1,
        },
    )
    .unwrap()
}

fn errors_of(text: &str) -> Vec<String> {
    parse_config(text).unwrap_err().0
}

#[test]
fn minimal_config_is_valid() {
    let exp = parse_config(MINIMAL).unwrap();
    assert_eq!(exp.dim, 2);
    assert_eq!(exp.tasks.len(), 1);
    assert_eq!(exp.tasks[0].id, "r_sequence_1");
    assert_eq!(exp.map.describe(), "id");
}

#[test]
fn unknown_primitive_kind_is_listed() {
    let text = format!("{MINIMAL}\n[[map]]\nkind = \"foo\"\n");
    let errs = errors_of(&text);
    assert_eq!(errs.len(), 1, "{errs:?}");
    assert!(
        errs[0].contains("foo") && errs[0].contains("map #1"),
        "{errs:?}"
    );
}

#[test]
fn dimension_mismatches_are_reported() {
    let text = format!(
        "{MINIMAL}\n[form]\nkind = \"metric\"\ng = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]\n"
    );
    let errs = errors_of(&text);
    assert!(
        errs.iter()
            .any(|e| e.contains("[form]") && e.contains("dimension")),
        "{errs:?}"
    );
    let text = format!(
        "{MINIMAL}\n[[map]]\nkind = \"canonical_lift\"\nmatrix = [1, 0, 0, 0, 1, 0, 0, 0, 1]\n"
    );
    let errs = errors_of(&text);
    assert!(
        errs.iter()
            .any(|e| e.contains("map #1") && e.contains("dimension")),
        "{errs:?}"
    );
}

#[test]
fn every_problem_is_collected() {
    let text = r#"
[experiment]
id = "broken"
dimension = 2

[[map]]
kind = "foo"

[[map]]
kind = "canonical_lift"
matrix = [2, 0, 0, 1]

[params]
q_per_axis = 0
K = 0

[thresholds]
bound_tol = -1.0

[[task]]
kind = "r_sequence"
id = "x"

[[task]]
kind = "growth"
id = "x"
images = ["ab", "a"]

[[task]]
kind = "bogus"

[extra]
"#;
    let errs = errors_of(text);
    for needle in [
        "foo",
        "unimodular",
        "q_per_axis",
        "params.K",
        "bound_tol",
        "duplicate id",
        "images and word",
        "bogus",
        "[extra]",
    ] {
        assert!(
            errs.iter().any(|e| e.contains(needle)),
            "{needle} missing from {errs:?}"
        );
    }
}

#[test]
fn bad_toml_and_missing_sections() {
    assert_eq!(errors_of("[experiment\n").len(), 1);
    let errs = errors_of("[params]\nK = 5\n");
    assert!(
        errs.iter().any(|e| e.contains("missing [experiment]")),
        "{errs:?}"
    );
    let errs = errors_of("[experiment]\nid = \"a\"\ndimension = 4\n");
    assert!(
        errs.iter().any(|e| e.contains("dimension must be 2 or 3")),
        "{errs:?}"
    );
    assert!(errs.iter().any(|e| e.contains("no [[task]]")), "{errs:?}");
}

#[test]
fn coarse_flows_are_rejected_at_validation() {
    let text = format!(
        "{MINIMAL}\n[[map]]\nkind = \"flow\"\nt = 1.0\nsteps = 4\nhamiltonian = {{ kind = \"conformal\", amp = 0.9, q_freq = [3, 2] }}\n"
    );
    let errs = errors_of(&text);
    assert!(
        errs.iter().any(|e| e.contains("contact residual")),
        "{errs:?}"
    );
}

#[test]
fn identity_bundle_is_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let doc = run_text(
        &format!("{MINIMAL}\n[[task]]\nkind = \"verify_bound\"\n"),
        dir.path(),
    );
    assert!(doc.pass);
    let r = &doc.tasks[0];
    assert!(r.series.as_ref().unwrap().points.iter().all(|p| p.1 == 0.0));
    assert_eq!(doc.provenance.refinement_deltas["r_sequence_1"], 0.0);
    let diss: Value = read_report(&dir.path().join(DISSIPATION_FILE)).unwrap();
    assert_eq!(diss["verdict"], "Elliptic-consistent");
    assert_eq!(diss["bound_check"]["s_target"], 0.0);
}

#[test]
fn cat_map_bundle_passes() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[experiment]
id = "cat"
dimension = 2

[[map]]
kind = "canonical_lift"
matrix = [2, 1, 1, 1]

[params]
K = 20
q_per_axis = 4
directions = 64
refinement_check = false

[[task]]
kind = "r_sequence"
id = "r"

[[task]]
kind = "homology"

[[task]]
kind = "verify_bound"
"#;
    let doc = run_text(text, dir.path());
    assert!(doc.pass);
    assert_eq!(doc.task("r").unwrap().result["verdict"], "Hyperbolic");
    let h = &doc.task("homology_2").unwrap().result;
    assert_eq!(h["is_periodic"], false);
    assert_eq!(h["a_block"]["A_I"], serde_json::json!([[1, -1], [-1, 2]]));
    // the dissipation report carries exactly these fields
    let diss = fs::read_to_string(dir.path().join(DISSIPATION_FILE)).unwrap();
    let v: serde_json::Map<String, Value> = serde_json::from_str(&diss).unwrap();
    let keys: Vec<&str> = v.keys().map(String::as_str).collect();
    let mut want = vec![
        "map_id",
        "lambda_id",
        "K",
        "grid",
        "r_series",
        "chi_hat",
        "chi_last",
        "lyap_hat",
        "verdict",
        "bound_check",
    ];
    want.sort();
    let mut got = keys.clone();
    got.sort();
    assert_eq!(got, want);
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("k,r_k"));
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn shear_bundle_is_elliptic_consistent_with_trivial_a_block() {
    let dir = tempfile::tempdir().unwrap();
    let doc = run_text(
        &fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../configs/shear_a.toml"
        ))
        .unwrap(),
        dir.path(),
    );
    assert!(doc.pass);
    assert_eq!(
        doc.task("r").unwrap().result["verdict"],
        "Elliptic-consistent"
    );
    let h = &doc.task("homology_2").unwrap().result;
    assert_eq!(h["is_periodic"], false);
    assert_eq!(h["a_block"]["A_I"], serde_json::json!([[1, 0], [0, 1]]));
    assert_eq!(h["a_block"]["is_periodic"], true);
}

#[test]
fn plot_data_has_one_row_per_term() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[experiment]
id = "plots"
dimension = 2

[params]
K = 12
q_per_axis = 2
directions = 8
growth_steps = 25
refinement_check = false

[[task]]
kind = "r_sequence"
id = "r"

[[task]]
kind = "growth"
id = "fib"
images = ["ab", "a"]
word = "a"

[[task]]
kind = "homology"
id = "h"
"#;
    run_text(text, dir.path());
    let report = read_report(&dir.path().join(REPORT_FILE)).unwrap();
    let out = dir.path().join("r.dat");
    assert_eq!(emit_plot_data(&report, "r", &out).unwrap(), 12);
    let body = fs::read_to_string(&out).unwrap();
    assert_eq!(body.lines().count(), 12);
    assert_eq!(body.lines().next(), Some("1 0"));
    let out = dir.path().join("fib.dat");
    emit_plot_data(&report, "fib", &out).unwrap();
    let last = fs::read_to_string(&out).unwrap();
    let cols: Vec<f64> = last
        .lines()
        .last()
        .unwrap()
        .split_whitespace()
        .map(|x| x.parse().unwrap())
        .collect();
    assert_eq!(cols[0], 25.0);
    let err = emit_plot_data(&report, "h", &dir.path().join("h.dat")).unwrap_err();
    assert!(err.to_string().contains("no series"), "{err}");
    assert!(emit_plot_data(&report, "missing", &dir.path().join("m.dat")).is_err());
}

#[test]
fn sampled_classes_follow_the_seed() {
    let text = |seed: u64| {
        format!(
            "[experiment]\nid = \"g\"\ndimension = 2\nseed = {seed}\n[[map]]\nkind = \"canonical_lift\"\nmatrix = [2, 1, 1, 1]\n[[task]]\nkind = \"growth\"\n"
        )
    };
    let classes = |seed| {
        let dir = tempfile::tempdir().unwrap();
        run_text(&text(seed), dir.path()).tasks[0].parameters["classes"].clone()
    };
    assert_eq!(classes(5), classes(5));
    assert_ne!(classes(5), classes(6));
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.toml", MINIMAL);
    let status = bin().args(["validate"]).arg(&ok).status().unwrap();
    assert_eq!(status.code(), Some(exit::SUCCESS));
    let status = bin()
        .arg("run")
        .arg(&ok)
        .arg("--out")
        .arg(dir.path().join("ok"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(exit::SUCCESS));
    assert!(dir.path().join("ok").join(REPORT_FILE).exists());

    let bad = write(dir.path(), "bad.toml", "[experiment]\nid = \"x\"\n");
    let out = bin().arg("run").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(exit::CONFIG_ERROR));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));

    // a conservative declaration contradicted by a hyperbolic verdict
    let contradiction = write(
        dir.path(),
        "contra.toml",
        "[experiment]\nid = \"c\"\ndimension = 2\nconservative = true\n[[map]]\nkind = \"canonical_lift\"\nmatrix = [2, 1, 1, 1]\n[params]\nK = 12\nq_per_axis = 2\ndirections = 16\nrefinement_check = false\n[[task]]\nkind = \"verify_bound\"\n",
    );
    let status = bin()
        .arg("run")
        .arg(&contradiction)
        .arg("--out")
        .arg(dir.path().join("c"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(exit::CHECK_FAILED));

    // a non-injective substitution sends the class to the trivial word
    let runtime = write(
        dir.path(),
        "rt.toml",
        "[experiment]\nid = \"rt\"\ndimension = 2\n[[task]]\nkind = \"growth\"\nimages = [\"a\", \"a\"]\nword = \"aB\"\n",
    );
    let out = bin()
        .arg("run")
        .arg(&runtime)
        .arg("--out")
        .arg(dir.path().join("rt"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(exit::RUNTIME_ERROR));
    assert!(String::from_utf8_lossy(&out.stderr).contains("growth_1"));

    let out = bin().arg("catalog").output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("canonical_lift"));

    let status = bin()
        .arg("plot")
        .arg(dir.path().join("ok").join(REPORT_FILE))
        .arg("r_sequence_1")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(exit::SUCCESS));
    assert!(dir.path().join("ok").join("r_sequence_1.dat").exists());
}

#[test]
fn refine_multiplies_grids() {
    let dir = tempfile::tempdir().unwrap();
    let exp = parse_config(MINIMAL).unwrap();
    let doc = run(
        &exp,
        &RunOptions {
            out_dir: dir.path().to_path_buf(),
            refine: 2,
        },
    )
    .unwrap();
    let grid = &doc.tasks[0].parameters["grid"];
    assert_eq!(grid["q_per_axis"], 8);
    assert_eq!(grid["directions"], 32);
    assert_eq!(doc.provenance.refine, 2);
}
