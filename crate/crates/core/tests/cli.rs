use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sdr_order::simgen::RngStream;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdr-order"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Two classes in four features; only the third feature separates them.
fn write_binary_csv(path: &Path, n_per_class: usize, seed: u64) {
    let mut rng = RngStream::new(seed, 0);
    let mut s = String::from("a,b,c,e,y\n");
    for class in 0..2 {
        for _ in 0..n_per_class {
            let shift = if class == 1 { 3.0 } else { 0.0 };
            let row = [rng.normal(), rng.normal(), rng.normal() + shift, rng.normal()];
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            s.push_str(&format!("{},{}\n", cells.join(","), class + 1));
        }
    }
    fs::write(path, s).unwrap();
}

fn p(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn oer_prints_bayes_error() {
    let o = run(&["oer", "--mu1", "0", "--mu2", "1", "--sigma1", "1", "--sigma2", "1"]);
    assert_eq!(code(&o), 0);
    let v: f64 = stdout(&o).trim().parse().unwrap();
    // Φ(-1/2)
    assert!((v - 0.308537538726).abs() < 1e-10);
}

#[test]
fn invalid_sigma_is_a_validation_error() {
    let o = run(&["oer", "--mu1", "0", "--mu2", "1", "--sigma1", "0", "--sigma2", "1"]);
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(code(&run(&["no-such-command"])), 1);
    assert_eq!(code(&run(&["simulate", "--tag", "Z9"])), 1);
    assert_eq!(code(&run(&["simulate", "--tag", "Q1", "--replicates", "0"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "out.csv");
    let o = run(&["reduce", "--input", s(&p(dir.path(), "absent.csv")), "--output", s(&out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_writes_result_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "run");
    let args = [
        "simulate", "--tag", "Q1", "--p", "6", "--sizes", "20", "--replicates", "3", "--test-per-class", "50",
        "--methods", "PCA,SIR2", "--criteria", "EIGENVALUE,T", "--out", s(&out),
    ];
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["replicates.csv", "summary.csv", "timings.csv", "config.json", "boxplot.svg"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let replicates = fs::read_to_string(out.join("replicates.csv")).unwrap();
    // header + 3 replicates × (baseline + 2 methods × 2 criteria)
    assert_eq!(replicates.lines().count(), 1 + 3 * 5);

    let again = p(dir.path(), "again");
    let mut args2 = args.to_vec();
    let last = args2.len() - 1;
    args2[last] = s(&again);
    assert_eq!(code(&run(&args2)), 0);
    assert_eq!(replicates, fs::read_to_string(again.join("replicates.csv")).unwrap());
}

#[test]
fn reduce_finds_the_separating_feature() {
    let dir = tempfile::tempdir().unwrap();
    let input = p(dir.path(), "train.csv");
    write_binary_csv(&input, 150, 3);
    let output = p(dir.path(), "reduced.csv");
    let report = p(dir.path(), "report.json");
    let scores = p(dir.path(), "scores.csv");
    let o = run(&[
        "reduce", "--input", s(&input), "--output", s(&output), "--method", "SIR", "--criterion", "T", "--d", "1",
        "--report", s(&report), "--scores", s(&scores),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let reduced = fs::read_to_string(&output).unwrap();
    assert_eq!(reduced.lines().next().unwrap(), "dir1,y");
    assert_eq!(reduced.lines().count(), 301);
    assert_eq!(fs::read_to_string(&scores).unwrap().lines().count(), 5);

    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let selected = json["selected"][0].as_u64().unwrap() as usize;
    let ranks: Vec<u64> = json["ranks"].as_array().unwrap().iter().map(|r| r.as_u64().unwrap()).collect();
    assert_eq!(ranks[selected - 1], 1);
    let t: Vec<f64> = json["scores"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let best = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // A mean shift of 3 against unit spread gives T near 3.
    assert!(best > 2.5, "{t:?}");
}

#[test]
fn binary_f_and_t_rank_alike() {
    let dir = tempfile::tempdir().unwrap();
    let input = p(dir.path(), "train.csv");
    write_binary_csv(&input, 80, 9);
    let mut ranks = Vec::new();
    for criterion in ["T", "F"] {
        let report = p(dir.path(), &format!("{criterion}.json"));
        let o = run(&[
            "reduce", "--input", s(&input), "--output", s(&p(dir.path(), "r.csv")), "--method", "SAVE",
            "--criterion", criterion, "--d", "2", "--report", s(&report),
        ]);
        assert_eq!(code(&o), 0);
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        ranks.push(json["ranks"].clone());
    }
    assert_eq!(ranks[0], ranks[1]);
}

#[test]
fn classify_with_split_and_file() {
    let dir = tempfile::tempdir().unwrap();
    let train = p(dir.path(), "train.csv");
    let test = p(dir.path(), "test.csv");
    write_binary_csv(&train, 100, 1);
    write_binary_csv(&test, 200, 2);
    let o = run(&["classify", "--train", s(&train), "--test", s(&test), "--method", "SIR", "--sweep", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let cer: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("test CER: "))
        .unwrap()
        .parse()
        .unwrap();
    // Bayes error is Φ(-1.5) ≈ 0.067.
    assert!(cer < 0.12, "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("d=")).count(), 3);

    let o = run(&["classify", "--train", s(&train), "--split", "0.7", "--classifier", "lda"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["classify", "--train", s(&train)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn distance_between_basis_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = p(dir.path(), "a.csv");
    let b = p(dir.path(), "b.csv");
    let c = p(dir.path(), "c.csv");
    fs::write(&a, "1,0\n0,1\n0,0\n").unwrap();
    fs::write(&b, "2,1\n0,3\n0,0\n").unwrap();
    fs::write(&c, "0\n0\n1\n").unwrap();
    let o = run(&["distance", s(&a), s(&b)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).trim().parse::<f64>().unwrap() < 1e-12);
    let o = run(&["distance", s(&a), s(&c)]);
    assert_eq!(code(&o), 1);
}
