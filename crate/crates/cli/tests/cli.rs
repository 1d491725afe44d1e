//! End-to-end tests of the graphanon binary: the file contracts of `run`,
//! exit codes, determinism, ranking and the attack round-trip.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graphanon"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_random_graph(path: &Path, n: usize, p: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut text = String::from("# test graph\n");
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                text.push_str(&format!("{u}\t{v}\n"));
            }
        }
    }
    fs::write(path, text).unwrap();
}

#[test]
fn stats_on_a_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("triangle.txt");
    fs::write(&path, "0 1\n1 2\n2 0\n").unwrap();
    let out = run(&["stats", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "nodes\tedges\tavg_degree\tmean_cc\tapl\tdiameter\tcommunities"
    );
    assert_eq!(lines.next().unwrap(), "3\t3\t2.000\t1.000\t1.000\t1\t1");
}

#[test]
fn stats_on_an_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.txt");
    fs::write(&path, "").unwrap();
    let out = run(&["stats", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(
        text.lines().count(),
        1,
        "expected the header only: {text:?}"
    );
}

#[test]
fn run_rejects_a_missing_dataset_with_exit_2() {
    let out = run(&["run", "--dataset", "definitely-not-here.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_rejects_a_bad_config_file_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "dataset = x.txt\nnot_a_key = 1\n").unwrap();
    let out = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

fn collect_files(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn run_writes_the_cell_files_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("graph.txt");
    write_random_graph(&dataset, 50, 0.08, 40);
    let out_dir = dir.path().join("out");
    let args = |out_dir: &Path| {
        vec![
            "run".to_string(),
            "--dataset".into(),
            dataset.to_str().unwrap().into(),
            "--method".into(),
            "clust_r_l1".into(),
            "--k".into(),
            "2".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            out_dir.to_str().unwrap().into(),
        ]
    };
    let out = bin().args(args(&out_dir)).output().unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    // one published graph + seven report files per cell
    let cell = out_dir.join("clust_r_l1_k2");
    for file in [
        "published.txt",
        ".private/provenance.txt",
        "loss.csv",
        "risk.csv",
        "verify.txt",
        "config.txt",
        "weights.txt",
        "report.json",
    ] {
        assert!(cell.join(file).is_file(), "missing {file}");
    }
    assert_eq!(
        fs::read_to_string(cell.join("verify.txt"))
            .unwrap()
            .lines()
            .next(),
        Some("pass")
    );

    // a rerun with the identical config reproduces every byte
    let first = collect_files(&out_dir);
    fs::remove_dir_all(&out_dir).unwrap();
    let out = bin().args(args(&out_dir)).output().unwrap();
    assert!(out.status.success());
    let second = collect_files(&out_dir);
    assert_eq!(first.len(), second.len());
    for ((pa, ba), (pb, bb)) in first.iter().zip(&second) {
        assert_eq!(pa, pb);
        assert_eq!(ba, bb, "file {} differs between reruns", pa.display());
    }

    // a single-method grid ranks that method 1.0 everywhere
    let out = run(&["rank", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text
        .lines()
        .find(|l| l.starts_with("clust_r_l1"))
        .expect("rank row present");
    for field in row.split('\t').skip(1) {
        assert_eq!(field, "1.00");
    }

    // attack on the published graph + provenance reproduces the risk report
    let out = run(&[
        "attack",
        "--graph",
        cell.join("published.txt").to_str().unwrap(),
        "--provenance",
        cell.join(".private/provenance.txt").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out),
        fs::read_to_string(cell.join("risk.csv")).unwrap()
    );
}

#[test]
fn rank_awards_tied_methods_the_same_first_place() {
    let dir = tempfile::tempdir().unwrap();
    let losses = r#"{"degree":0.1,"cc":0.2,"apl":0.3,"hub":0.1,"bridge":0.2,"community_raw":1.0,"community_normalized":0.5}"#;
    for method in ["alpha", "beta"] {
        let cell = dir.path().join(format!("{method}_k2"));
        fs::create_dir_all(&cell).unwrap();
        fs::write(
            cell.join("report.json"),
            format!(r#"{{"method":"{method}","k":2,"loss":{losses}}}"#),
        )
        .unwrap();
    }
    let out = run(&["rank", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    // identical losses: both methods share rank 1 and both score a first
    for method in ["alpha", "beta"] {
        let row = text.lines().find(|l| l.starts_with(method)).unwrap();
        for field in row.split('\t').skip(1) {
            assert_eq!(field, "1.00", "{method} row: {row}");
        }
    }
    let firsts: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("times ranked first"))
        .skip(1)
        .take(2)
        .collect();
    assert_eq!(firsts, ["alpha\t7", "beta\t7"]);
}

#[test]
fn rank_flags_missing_cells() {
    let dir = tempfile::tempdir().unwrap();
    let losses = r#"{"degree":0.1,"cc":0.2,"apl":0.3,"hub":0.1,"bridge":0.2,"community_raw":1.0,"community_normalized":0.5}"#;
    let specs = [("alpha", 2), ("alpha", 4), ("beta", 2)];
    for (method, k) in specs {
        let cell = dir.path().join(format!("{method}_k{k}"));
        fs::create_dir_all(&cell).unwrap();
        fs::write(
            cell.join("report.json"),
            format!(r#"{{"method":"{method}","k":{k},"loss":{losses}}}"#),
        )
        .unwrap();
    }
    let out = run(&["rank", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("missing cells"), "{text}");
    assert!(text.contains("beta k=4"), "{text}");
}

#[test]
fn train_saves_a_weights_file_the_run_can_load() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("graph.txt");
    write_random_graph(&dataset, 40, 0.1, 41);
    let weights = dir.path().join("weights.txt");
    let out = run(&[
        "train",
        "--dataset",
        dataset.to_str().unwrap(),
        "--out",
        weights.to_str().unwrap(),
        "--sample-size",
        "20",
        "--epochs",
        "3",
        "--proposals",
        "3",
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(weights.is_file());

    let out_dir = dir.path().join("out");
    let out = run(&[
        "run",
        "--dataset",
        dataset.to_str().unwrap(),
        "--weights",
        weights.to_str().unwrap(),
        "--method",
        "clust_g",
        "--k",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}
