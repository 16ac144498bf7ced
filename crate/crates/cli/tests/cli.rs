use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const FIXTURE: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/../core/fixtures/errata-cube.instance"
);

fn rfacet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfacet"))
        .args(args)
        .env_remove("RFACET_MAX_STAR_FACETS")
        .env_remove("RFACET_MAX_UNIVERSE")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn scratch_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rfacet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verify_errata_passes_on_the_fixture() {
    let out = rfacet(&["verify-errata"]);
    let text = stdout(&out);
    let checks: Vec<&str> = text.lines().filter(|l| l.starts_with("CHECK ")).collect();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(checks.len() >= 12);
    assert!(checks.iter().all(|l| l.ends_with(" PASS")));
    assert!(text.contains("CHECK f_001 expected=7/3 got=7/3 PASS"));
}

#[test]
fn verify_errata_fails_on_a_perturbed_cost() {
    let original = std::fs::read_to_string(FIXTURE).unwrap();
    let perturbed = original.replace("edge 1 x z 1", "edge 1 x z 5");
    assert_ne!(original, perturbed);
    let path = scratch_file("perturbed.instance", &perturbed);
    let out = rfacet(&["verify-errata", "--fixture", path_str(&path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("CHECK f_001 expected=7/3 got=2/1 FAIL"));
}

#[test]
fn verify_errata_derives_a_missing_fixture() {
    let missing = std::env::temp_dir().join("rfacet-no-such-dir/errata-cube.instance");
    let out = rfacet(&["verify-errata", "--fixture", path_str(&missing)]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stderr(&out).contains("deriving"));
}

#[test]
fn solve_prints_optimum_sorted_by_vertex() {
    let out = rfacet(&["solve", FIXTURE]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "tree {x0,y0,z0} = 000\nx x0 0\ny y0 0\nz z0 0\n");
}

#[test]
fn solve_single_edge_instance() {
    let path = scratch_file("single.instance", "target t\nedge 0 v t 4\n");
    let out = rfacet(&["solve", path_str(&path)]);
    assert_eq!(stdout(&out), "tree {v0}\nv v0 4\n");
}

#[test]
fn solve_rejects_negative_cycle() {
    let path = scratch_file(
        "cycle.instance",
        "target t\nedge 0 a t 0\nedge 1 a b -2\nedge 2 b a 1\nedge 3 b t 0\n",
    );
    let out = rfacet(&["solve", path_str(&path)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).to_lowercase().contains("negative cycle"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn exact_values() {
    let cases = [
        (vec!["--rule", "rf", "--tree", "001"], "7/3\n"),
        (vec!["--rule", "rfstar", "--tree", "001"], "29/12\n"),
        (vec!["--rule", "rf", "--tree", "111"], "11/3\n"),
        (vec!["--rule", "rfstar", "--tree", "111"], "43/12\n"),
        (vec!["--rule", "rf", "--tree", "x0,y0,z1"], "7/3\n"),
        (
            vec!["--rule", "rfstar", "--tree", "001", "--facets", "x0,y0,z1"],
            "0/1\n",
        ),
    ];
    for (args, expected) in cases {
        let mut full = vec!["exact", FIXTURE];
        full.extend(args);
        let out = rfacet(&full);
        assert_eq!(out.status.code(), Some(0), "{full:?}: {}", stderr(&out));
        assert_eq!(stdout(&out), expected, "{full:?}");
    }
}

#[test]
fn exact_respects_the_enumeration_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_rfacet"))
        .args(["exact", FIXTURE, "--rule", "rfstar", "--tree", "001"])
        .env("RFACET_MAX_STAR_FACETS", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Monte Carlo"));
}

#[test]
fn exact_rejects_non_generic_instance() {
    let path = scratch_file(
        "ties.instance",
        "target t\nedge 0 v t 4\nedge 1 v t 4\nedge 2 v t 9\n",
    );
    let out = rfacet(&["exact", path_str(&path), "--rule", "rf", "--tree", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not generic"));
}

#[test]
fn simulate_is_reproducible_and_accurate() {
    let args = [
        "simulate", FIXTURE, "--rule", "rf", "--tree", "001", "--trials", "100000", "--seed", "7",
    ];
    let a = rfacet(&args);
    let b = rfacet(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let line = stdout(&a);
    let mean: f64 = line
        .split_whitespace()
        .find_map(|t| t.strip_prefix("mean="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mean - 7.0 / 3.0).abs() < 0.02, "{line}");
}

#[test]
fn simulate_rejects_zero_trials() {
    let out = rfacet(&[
        "simulate", FIXTURE, "--rule", "rf", "--tree", "001", "--trials", "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn comptree_text_shows_the_shifted_probability() {
    let out = rfacet(&["comptree", FIXTURE, "--rule", "rfstar", "--tree", "001"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        text.lines().any(|l| l.split_whitespace().nth(4) == Some("5/8")),
        "{text}"
    );
    let kept = rfacet(&[
        "comptree",
        FIXTURE,
        "--rule",
        "rfstar",
        "--tree",
        "001",
        "--keep-leaving-edge",
    ]);
    assert!(stdout(&kept).contains("F\\B={x1,y0,z1}"));
}

#[test]
fn comptree_rf_probabilities_are_reciprocal_candidate_counts() {
    for extra in [None, Some("--full"), Some("--keep-leaving-edge")] {
        let mut args = vec!["comptree", FIXTURE, "--rule", "rf", "--tree", "001"];
        args.extend(extra);
        let text = stdout(&rfacet(&args));
        let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split_whitespace().collect()).collect();
        for row in &rows {
            if row[2] != "choice" {
                continue;
            }
            let k = row[6].matches(',').count() + 1;
            let expected = format!("1/{k}");
            for child in rows.iter().filter(|c| c[1] == row[0]) {
                assert_eq!(child[4], expected, "{text}");
            }
        }
    }
}

#[test]
fn comptree_of_a_finished_call_is_a_single_leaf() {
    let out = rfacet(&[
        "comptree", FIXTURE, "--rule", "rf", "--tree", "001", "--facets", "x0,y0,z1",
    ]);
    assert_eq!(stdout(&out), "0 - leaf - 1/1 0 B={x0,y0,z1}\n");
}

#[test]
fn comptree_dot_output() {
    let out = rfacet(&[
        "comptree", FIXTURE, "--rule", "rfstar", "--tree", "111", "--format", "dot",
    ]);
    let text = stdout(&out);
    assert!(text.starts_with("digraph comptree {"));
    assert!(text.trim_end().ends_with('}'));
}

#[test]
fn perms_counts_and_conditions() {
    let count = rfacet(&[
        "perms",
        "count",
        "--elements",
        "6",
        "--given",
        "z0<x1,z0<y1,y0<x1",
    ]);
    assert_eq!(stdout(&count), "150\n");
    let cond = rfacet(&[
        "perms",
        "cond",
        "--elements",
        "3",
        "--given",
        "2<3",
        "--query",
        "1<3",
    ]);
    assert_eq!(stdout(&cond), "2/3\n");
    let free = rfacet(&["perms", "count", "--elements", "3"]);
    assert_eq!(stdout(&free), "6\n");
}

#[test]
fn perms_rejects_malformed_constraints() {
    let out = rfacet(&["perms", "count", "--elements", "3", "--given", "1-2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rfacet(&["perms", "count", "--elements", "3", "--given", "a<b,c<d"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        rfacet(&["exact", FIXTURE, "--rule", "fast", "--tree", "001"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(rfacet(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        rfacet(&["solve", "/nonexistent/file.instance"]).status.code(),
        Some(2)
    );
}
