use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nestrank::bimatrix::{is_perfectly_nested, read_matrix};
use serde_json::Value;

fn nestrank(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nestrank"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

// Row i has degree d_i over columns 0..d_i.
fn nested(dir: &Path, name: &str, degrees: &[usize]) {
    let cols = *degrees.iter().max().unwrap();
    let mut body = format!("{} {cols}\n", degrees.len());
    for (i, &d) in degrees.iter().enumerate() {
        for a in 0..d {
            body.push_str(&format!("{i} {a}\n"));
        }
    }
    write(dir, name, &body);
}

#[test]
fn rank_reports_convergence() {
    let dir = tempfile::tempdir().unwrap();
    nested(dir.path(), "m.txt", &[2, 3, 5]);
    let out = nestrank(
        dir.path(),
        &["rank", "--algo", "fcm", "--epsilon", "1e-5", "m.txt"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["report"]["converged"], true);
    assert_eq!(v["state"]["fitness"].as_array().unwrap().len(), 3);
    assert!(stderr(&out).contains("\"command\":\"rank\""));
}

#[test]
fn gamma_one_matches_fcm() {
    let dir = tempfile::tempdir().unwrap();
    nested(dir.path(), "m.txt", &[1, 3, 4, 6]);
    let fcm = nestrank(dir.path(), &["rank", "--algo", "fcm", "m.txt"]);
    let gamma = nestrank(
        dir.path(),
        &["rank", "--algo", "gamma", "--gamma", "1", "m.txt"],
    );
    assert_eq!(fcm.status.code(), Some(0));
    assert_eq!(fcm.stdout, gamma.stdout);
}

#[test]
fn missing_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = nestrank(dir.path(), &["rank", "absent.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("absent.txt"));
}

#[test]
fn stopping_at_max_iter_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    nested(dir.path(), "m.txt", &[2, 3, 5]);
    let out = nestrank(
        dir.path(),
        &["rank", "--max-iter", "2", "--epsilon", "1e-14", "m.txt"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["report"]["converged"], false);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    nested(dir.path(), "m.txt", &[1, 2]);
    let out = nestrank(dir.path(), &["perturb", "m.txt", "--eta", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--seed"));
    assert_eq!(nestrank(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn analytic_mem_ratios() {
    let dir = tempfile::tempdir().unwrap();
    // Increments (3, 1, 2).
    nested(dir.path(), "m.txt", &[3, 4, 6]);
    let out = nestrank(
        dir.path(),
        &["analytic", "m.txt", "--algo", "mem", "--verify"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["ratios"]["method"], "MEM_CLOSED");
    let rows: Vec<f64> = serde_json::from_value(v["ratios"]["row_ratios"].clone()).unwrap();
    assert!((rows[0] - 2.0 / 3.0).abs() < 1e-15 && (rows[1] - 1.0 / 3.0).abs() < 1e-15);
    assert!(v["verify"]["max_discrepancy"].as_f64().unwrap() < 1e-6);
}

#[test]
fn analytic_crossing_is_blocked() {
    let dir = tempfile::tempdir().unwrap();
    nested(dir.path(), "m.txt", &[1, 4]);
    let out = nestrank(dir.path(), &["analytic", "m.txt", "--algo", "fcm"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["ratios"]["method"], "FCM_BLOCKED");
    assert!(v["ratios"]["blocks"].as_array().unwrap().len() >= 2);
}

#[test]
fn analytic_rejects_non_nested() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "m.txt", "2 2\n0 0\n1 1\n");
    let out = nestrank(dir.path(), &["analytic", "m.txt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not perfectly nested"));
}

#[test]
fn generate_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let gen = nestrank(
        dir.path(),
        &[
            "generate", "--model", "a", "--n", "100", "--alpha", "0.5", "-o", "a.txt",
        ],
    );
    assert_eq!(gen.status.code(), Some(0), "{}", stderr(&gen));
    let (m, _) = read_matrix(&dir.path().join("a.txt"), false).unwrap();
    assert_eq!(m.n_rows(), 100);
    assert!(is_perfectly_nested(&m));
    let config: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.txt.config.json")).unwrap())
            .unwrap();
    assert_eq!(config["command"], "generate");
    assert_eq!(config["alpha"], 0.5);

    let out = nestrank(
        dir.path(),
        &["analytic", "a.txt", "--verify", "-o", "r.json"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(v["ratios"]["method"], "FCM_CLOSED");
    assert!(v["verify"]["max_discrepancy"].as_f64().unwrap() < 1e-6);
}

#[test]
fn perturb_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    nestrank(
        dir.path(),
        &[
            "generate", "--model", "a", "--n", "40", "--alpha", "0.5", "-o", "a.txt",
        ],
    );
    let args = [
        "perturb", "a.txt", "--eta", "0.1", "--seed", "7", "--trials", "3",
    ];
    let first = nestrank(dir.path(), &args);
    let second = nestrank(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    let lines: Vec<Value> = String::from_utf8(first.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[2]["seed"], 9);
    assert_eq!(lines[0]["region"], "FULL");
}

#[test]
fn scaling_writes_one_row_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = nestrank(
        dir.path(),
        &[
            "scaling",
            "--model",
            "a",
            "--alpha",
            "0.5",
            "--algo",
            "fcm",
            "--sizes",
            "50,100,200",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,algo,N,n_star,converged");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("A,fcm,200,"));
}

#[test]
fn pack_writes_images() {
    let dir = tempfile::tempdir().unwrap();
    // Rows of degree 1, 3, 2 in shuffled order.
    write(dir.path(), "m.txt", "3 3\n0 2\n1 0\n1 1\n1 2\n2 1\n2 2\n");
    let out = nestrank(
        dir.path(),
        &[
            "pack", "m.txt", "--algo", "mem", "--pgm", "p.pgm", "--csv", "p.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["border_violations"], 0);
    assert_eq!(v["rows"], serde_json::json!([1, 2, 0]));
    let pgm = fs::read_to_string(dir.path().join("p.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n3 3\n255\n"));
    let csv = fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "1,1,1");
}

#[test]
fn ingest_with_whitelist() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "e.csv",
        "exporter,hs,yr,usd\nA,x,2000,10\nB,y,2000,10\nC,x,2000,5\nC,y,2000,5\n",
    );
    write(dir.path(), "keep.txt", "A\nB\n");
    let out = nestrank(
        dir.path(),
        &[
            "ingest",
            "e.csv",
            "--year",
            "2000",
            "--countries",
            "keep.txt",
            "--country-column",
            "exporter",
            "--product-column",
            "hs",
            "--year-column",
            "yr",
            "--value-column",
            "usd",
            "-o",
            "m.txt",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let (m, _) = read_matrix(&dir.path().join("m.txt"), false).unwrap();
    assert_eq!(m.to_dense(), vec![vec![1, 0], vec![0, 1]]);
    let labels: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("m.txt.labels.json")).unwrap())
            .unwrap();
    assert_eq!(labels["countries"], serde_json::json!(["A", "B"]));
    assert!(dir.path().join("m.txt.config.json").exists());
}
