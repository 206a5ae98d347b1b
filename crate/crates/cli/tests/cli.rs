//! End-to-end tests of the command-line surface: byte-identical outputs
//! under a fixed seed, structured error tokens, and cross-subcommand
//! round trips.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ergm"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ergm-cli-test-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_tmp(name: &str, content: &str) -> PathBuf {
    let p = tmp(name);
    fs::write(&p, content).unwrap();
    p
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn simulate_is_byte_identical_under_a_seed() {
    let model = write_tmp("m_edges.txt", "term edges\n");
    let run = || {
        let out = bin()
            .args(["simulate", "--model"])
            .arg(&model)
            .args(["--theta", "0", "--n", "5", "--draws", "10", "--seed", "7"])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    let a = run();
    let b = run();
    assert_eq!(a, b);
    assert!(a.starts_with("n 5\n"));
    // ten networks separated by `---`
    assert_eq!(a.matches("---").count(), 9);
}

#[test]
fn simulate_stats_only_rows() {
    let model = write_tmp("m_et.txt", "term edges\nterm triangles\n");
    let out = bin()
        .args(["simulate", "--model"])
        .arg(&model)
        .args(["--theta", "0,0", "--n", "4", "--draws", "5", "--seed", "3", "--stats-only"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    for line in text.lines() {
        assert_eq!(line.split('\t').count(), 2);
    }
}

#[test]
fn fit_on_boundary_data_reports_mle_nonexistent() {
    let model = write_tmp("m_edges2.txt", "term edges\n");
    let graphs = write_tmp("empty.txt", "n 5\n");
    let out = bin()
        .args(["fit", "--graphs"])
        .arg(&graphs)
        .arg("--model")
        .arg(&model)
        .args(["--method", "exact"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(
        stderr(&out).starts_with("mle-nonexistent\t"),
        "stderr: {}",
        stderr(&out)
    );
}

#[test]
fn enumerate_reports_closed_form_moments() {
    let model = write_tmp("m_edges3.txt", "term edges\n");
    let out = bin()
        .args(["enumerate", "--model"])
        .arg(&model)
        .args(["--n", "3", "--theta", "0", "--moments"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("mean_edges\t1.5\n"), "{text}");
    assert!(text.contains("var_edges\t0.75\n"), "{text}");
}

#[test]
fn enumerate_refuses_past_cap() {
    let model = write_tmp("m_edges4.txt", "term edges\n");
    let out = bin()
        .args(["enumerate", "--model"])
        .arg(&model)
        .args(["--n", "9", "--theta", "0"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).starts_with("cap-exceeded\t"), "{}", stderr(&out));
}

#[test]
fn parse_errors_are_structured() {
    let model = write_tmp("m_bad.txt", "term wibble\n");
    let out = bin()
        .args(["enumerate", "--model"])
        .arg(&model)
        .args(["--n", "4", "--theta", "0"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).starts_with("parse-error\t"), "{}", stderr(&out));

    let out = bin()
        .args(["fit", "--graphs", "/nonexistent/file", "--model"])
        .arg(&model)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stderr(&out).starts_with("io-error\t"), "{}", stderr(&out));
}

#[test]
fn fit_report_roundtrips_through_gof() {
    let model = write_tmp("m_edges5.txt", "term edges\n");
    let graphs = write_tmp(
        "g_two.txt",
        "n 5\n1 2\n2 3\n3 4\n---\nn 5\n1 3\n2 5\n4 5\n1 4\n",
    );
    let report_path = tmp("fit_report.txt");
    let out = bin()
        .args(["fit", "--graphs"])
        .arg(&graphs)
        .arg("--model")
        .arg(&model)
        .args(["--seed", "11", "--draws", "500", "--output"])
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let report = fs::read_to_string(&report_path).unwrap();
    assert!(report.contains("command\tfit"));
    assert!(report.contains("param\testimate\tstd_error"));

    let gof = |seed: &[&str]| {
        let mut cmd = bin();
        cmd.args(["gof", "--fit-report"])
            .arg(&report_path)
            .arg("--graphs")
            .arg(&graphs)
            .args(["--draws", "60"]);
        cmd.args(seed);
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    // seed defaults to the fit's seed lineage, so the report is reproducible
    let a = gof(&[]);
    let b = gof(&["--seed", "11"]);
    assert_eq!(a, b);
    assert!(a.contains("family\tbin\tobserved"));
    assert!(a.contains("triangles\ttotal"));
}

#[test]
fn fit_with_masks_runs_incomplete_path() {
    let model = write_tmp("m_edges6.txt", "term edges\n");
    let graphs = write_tmp("g_one.txt", "n 4\n1 2\n3 4\n");
    let mask = write_tmp("mask_one.txt", "# one unobserved dyad\n1 3\n");
    let out = bin()
        .args(["fit", "--graphs"])
        .arg(&graphs)
        .arg("--model")
        .arg(&model)
        .arg("--mask")
        .arg(&mask)
        .args(["--seed", "4"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("method\texact"), "{text}");
    assert!(text.contains("note\tincomplete data"), "{text}");
}

#[test]
fn scan_emits_one_row_per_grid_point() {
    let model = write_tmp("m_et2.txt", "term edges\nterm triangles\n");
    let grid = write_tmp("grid.txt", "-1 0\n-1 0.5\n");
    let out = bin()
        .args(["scan", "--model"])
        .arg(&model)
        .arg("--grid")
        .arg(&grid)
        .args(["--n", "8", "--seed", "2", "--draws", "200"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let rows: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("theta\t"))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("-1,0\t"));
}

#[test]
fn mask_designs_and_refusals() {
    let out = bin()
        .args(["mask", "--design", "mar", "--n", "6", "--q", "0.5", "--seed", "9"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    // deterministic under the seed
    let again = bin()
        .args(["mask", "--design", "mar", "--n", "6", "--q", "0.5", "--seed", "9"])
        .output()
        .unwrap();
    assert_eq!(text, stdout(&again));

    // full-observation extreme: no unobserved dyads listed
    let out = bin()
        .args(["mask", "--design", "mar", "--n", "6", "--q", "0", "--seed", "9"])
        .output()
        .unwrap();
    let full_text = stdout(&out);
    let body: Vec<&str> = full_text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(body.is_empty());

    let out = bin()
        .args(["mask", "--design", "subgraph", "--blocks", "0,0,1,1", "--prob", "1", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    // between-block dyads stay unobserved even with every block sampled
    assert!(stdout(&out).contains("1 3"));

    let out = bin()
        .args(["mask", "--design", "rds", "--n", "5", "--prob", "0.5"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(
        stderr(&out).starts_with("non-ignorable-design\t"),
        "{}",
        stderr(&out)
    );
}
