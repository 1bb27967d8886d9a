use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use slmf_core::completion::project;
use slmf_core::rng::{substream, Stream};
use slmf_core::{fixtures, Format, GfMatrix, SupportPattern};
use tempfile::TempDir;

fn slmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_slmf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn write_pattern(dir: &Path, name: &str, p: &SupportPattern) -> String {
    write(dir, name, &p.emit(Format::Indicator)).display().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad json ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn check_slmf_accepts_printed_field() {
    let dir = TempDir::new().unwrap();
    let path = write_pattern(dir.path(), "phi.txt", fixtures::slmf_r2_m6().pattern());
    let out = slmf(&["check-slmf", "--pattern", &path, "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["slmf"], true);
    assert_eq!(v["agree"], true);
}

#[test]
fn check_slmf_rejects_repeated_column() {
    let dir = TempDir::new().unwrap();
    let p = SupportPattern::from_columns(5, &[vec![1, 2, 3], vec![1, 2, 3], vec![3, 4, 5]]).unwrap();
    let path = write_pattern(dir.path(), "phi.txt", &p);
    let out = slmf(&["check-slmf", "--pattern", &path, "--r", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["slmf"], false);
    assert_eq!(v["matching_check"], false);
}

#[test]
fn malformed_pattern_exits_two_without_stdout() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "bad.txt", "1 0 2\n1 1\n");
    let out = slmf(&[
        "check-relaxed",
        "--pattern",
        &path.display().to_string(),
        "--r",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "parse");
}

#[test]
fn wrong_slmf_shape_is_a_contract_error() {
    let dir = TempDir::new().unwrap();
    let path = write_pattern(dir.path(), "p.txt", &fixtures::two_group_base_6x5());
    let out = slmf(&["check-slmf", "--pattern", &path, "--r", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_relaxed_reports_witness() {
    let dir = TempDir::new().unwrap();
    let ok = write_pattern(dir.path(), "ok.txt", &fixtures::degree_gap_6x5());
    let out = slmf(&["check-relaxed", "--pattern", &ok, "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["relaxed"], true);

    let p = SupportPattern::from_columns(4, &[vec![1, 2], vec![1, 2], vec![3, 4]]).unwrap();
    let bad = write_pattern(dir.path(), "bad.txt", &p);
    let out = slmf(&["check-relaxed", "--pattern", &bad, "--r", "1", "--nu", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["relaxed"], false);
    assert!(v["witness"]["I"].is_array());
}

#[test]
fn partition_methods_agree_on_success_and_failure() {
    let dir = TempDir::new().unwrap();
    let good = write_pattern(dir.path(), "good.txt", &fixtures::degree_gap_5x5());
    let out = slmf(&["partition", "--pattern", &good, "--r", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["groups"].as_array().unwrap().len(), 2);

    let gap = write_pattern(dir.path(), "gap.txt", &fixtures::degree_gap_6x5());
    let out = slmf(&["partition", "--pattern", &gap, "--r", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["exhaustive"], true);

    let mut rng = substream(1, Stream::Sampling, 0);
    let uniform = loop {
        let cols: Vec<Vec<usize>> = (0..6)
            .map(|_| {
                let mut c = rand::seq::index::sample(&mut rng, 5, 3).into_vec();
                c.sort();
                c.into_iter().map(|i| i + 1).collect()
            })
            .collect();
        let p = SupportPattern::from_columns(5, &cols).unwrap();
        let path = write_pattern(dir.path(), "u.txt", &p);
        let search = slmf(&["partition", "--pattern", &path, "--r", "2"]);
        let pack = slmf(&["partition", "--pattern", &path, "--r", "2", "--method", "pack"]);
        assert_eq!(search.status.code(), pack.status.code());
        if pack.status.code() == Some(0) {
            break path;
        }
    };
    let out = slmf(&["partition", "--pattern", &uniform, "--r", "2", "--method", "pack"]);
    assert_eq!(stdout_json(&out)["r"], 2);
}

#[test]
fn certify_two_group_base() {
    let dir = TempDir::new().unwrap();
    let path = write_pattern(dir.path(), "p.txt", &fixtures::two_group_base_6x5());
    let out = slmf(&["certify", "--pattern", &path, "--r", "2"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert_eq!(v["certified"], true);
    assert_eq!(v["oracle"]["rank_observed"], 18);
}

#[test]
fn certify_rejects_wrong_size() {
    let dir = TempDir::new().unwrap();
    let path = write_pattern(dir.path(), "p.txt", &SupportPattern::full(4, 4).unwrap());
    let out = slmf(&["certify", "--pattern", &path, "--r", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["reason"], "size");
}

#[test]
fn certify_rejects_rank_too_large() {
    let dir = TempDir::new().unwrap();
    let path = write_pattern(dir.path(), "p.txt", &SupportPattern::full(3, 3).unwrap());
    let out = slmf(&["certify", "--pattern", &path, "--r", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

fn observations_csv(x: &GfMatrix, p: &SupportPattern) -> String {
    project(x, p)
        .iter()
        .map(|(&(i, j), v)| format!("{},{},{}\n", i + 1, j + 1, v))
        .collect()
}

#[test]
fn complete_round_trip_over_gf() {
    let dir = TempDir::new().unwrap();
    let p = fixtures::two_group_base_6x5();
    let pattern = write_pattern(dir.path(), "p.txt", &p);
    let cert = slmf(&["partition", "--pattern", &pattern, "--r", "2"]);
    assert_eq!(cert.status.code(), Some(0));
    let cert_path = write(dir.path(), "cert.json", &String::from_utf8(cert.stdout).unwrap());

    let mut rng = substream(3, Stream::Completion, 0);
    let x = &GfMatrix::random(6, 2, &mut rng) * &GfMatrix::random(2, 5, &mut rng);
    let obs = write(dir.path(), "obs.csv", &observations_csv(&x, &p));
    let out = slmf(&[
        "complete",
        "--pattern",
        &pattern,
        "--certificate",
        &cert_path.display().to_string(),
        "--observations",
        &obs.display().to_string(),
        "--format",
        "json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    for i in 0..6 {
        for j in 0..5 {
            assert_eq!(v["rows"][i][j], x[(i, j)].to_string());
        }
    }
}

#[test]
fn complete_rational_reports_non_generic_data() {
    let dir = TempDir::new().unwrap();
    let p = fixtures::two_group_base_6x5();
    let pattern = write_pattern(dir.path(), "p.txt", &p);
    let cert = slmf(&["partition", "--pattern", &pattern, "--r", "2"]);
    let cert_path = write(dir.path(), "cert.json", &String::from_utf8(cert.stdout).unwrap());
    let mut csv = String::new();
    for i in 0..p.m() {
        for j in (0..p.n()).filter(|&j| p.contains(i, j)) {
            csv.push_str(&format!("{},{},0\n", i + 1, j + 1));
        }
    }
    let obs = write(dir.path(), "obs.csv", &csv);
    let out = slmf(&[
        "complete",
        "--pattern",
        &pattern,
        "--certificate",
        &cert_path.display().to_string(),
        "--observations",
        &obs.display().to_string(),
        "--field",
        "rational",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["error"], "not_generic");
}

#[test]
fn verify_conjecture_small_census() {
    let dir = TempDir::new().unwrap();
    let dump = dir.path().join("dump.json");
    let out = slmf(&[
        "verify-conjecture",
        "--m",
        "4",
        "--n",
        "4",
        "--r",
        "2",
        "--col-size",
        "3",
        "--dump",
        &dump.display().to_string(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("pattern,m,n"));
    assert!(lines.count() > 0);
    let bundle: Value = serde_json::from_str(&std::fs::read_to_string(dump).unwrap()).unwrap();
    assert_eq!(bundle.as_array().unwrap().len(), 0);
}

#[test]
fn crosscheck_tree_criterion() {
    let out = slmf(&["--jobs", "2", "crosscheck", "--m", "3", "--n", "3", "--r", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!(v["checked"].as_u64().unwrap() > 0);
    assert_eq!(v["disagreements"].as_array().unwrap().len(), 0);
}

#[test]
fn crosscheck_rejects_unsupported_rank() {
    let out = slmf(&["crosscheck", "--m", "5", "--n", "5", "--r", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
