use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gett::testkit::{compare, oracle_contract, pack, Category, CompareMode};
use gett::{ContractionSpec, TensorView};
use gett_cli::{read_tensor, write_tensor, TensorData, TensorFile};

fn gett(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gett"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(out: &[u8]) -> String {
    String::from_utf8_lossy(out).into_owned()
}

fn vector(dir: &Path, name: &str, values: Vec<f64>) -> PathBuf {
    let path = dir.join(name);
    write_tensor(
        &path,
        &TensorFile::new(TensorView::contiguous(&[values.len()]), values),
    )
    .unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn dot_product_writes_32() {
    let dir = tempfile::tempdir().unwrap();
    let a = vector(dir.path(), "a.tns", vec![1.0, 2.0, 3.0]);
    let b = vector(dir.path(), "b.tns", vec![4.0, 5.0, 6.0]);
    let c = dir.path().join("c.tns");
    let out = gett(&[
        "run",
        s(&a),
        s(&b),
        s(&c),
        "--conts",
        "1",
        "--cont-a",
        "0",
        "--cont-b",
        "0",
        "--perm",
        "",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let c = read_tensor(&c).unwrap();
    assert_eq!(c.view.rank(), 0);
    assert_eq!(c.data, TensorData::D(vec![32.0]));
}

#[test]
fn extent_mismatch_exits_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = vector(dir.path(), "a.tns", vec![1.0, 2.0, 3.0]);
    let b = vector(dir.path(), "b.tns", vec![1.0; 4]);
    let c = dir.path().join("c.tns");
    let out = gett(&[
        "run",
        s(&a),
        s(&b),
        s(&c),
        "--conts",
        "1",
        "--cont-a",
        "0",
        "--cont-b",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        text(&out.stderr).contains("ExtentMismatch"),
        "{}",
        text(&out.stderr)
    );
    assert!(!c.exists());
}

#[test]
fn repeated_perm_entry_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let a = vector(dir.path(), "a.tns", vec![1.0, 2.0]);
    let b = vector(dir.path(), "b.tns", vec![3.0, 4.0]);
    let c = dir.path().join("c.tns");
    let out = gett(&["run", s(&a), s(&b), s(&c), "--conts", "0", "--perm", "0,0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("PermNotBijection"));
    assert!(!c.exists());
}

#[test]
fn bad_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let a = vector(dir.path(), "a.tns", vec![1.0]);
    let junk = dir.path().join("junk.tns");
    std::fs::write(&junk, "GETT-TENSOR 1\ndtype: d\nrank: x\n").unwrap();
    let c = dir.path().join("c.tns");
    for b in [dir.path().join("missing.tns"), junk] {
        let out = gett(&["run", s(&a), s(&b), s(&c), "--conts", "0", "--perm", "0,1"]);
        assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    }
    let out = gett(&["run", s(&a), s(&a), s(&c), "--conts", "0", "--perm", "0,x"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_extent_checks() {
    let dir = tempfile::tempdir().unwrap();
    let a = vector(dir.path(), "a.tns", vec![1.0, 2.0]);
    let b = vector(dir.path(), "b.tns", vec![3.0, 4.0, 5.0]);
    let c = dir.path().join("c.tns");
    let out = gett(&[
        "run",
        s(&a),
        s(&b),
        s(&c),
        "--conts",
        "0",
        "--perm",
        "1,0",
        "--out-ext",
        "2,3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("OutExtentMismatch"));
    let out = gett(&[
        "run",
        s(&a),
        s(&b),
        s(&c),
        "--conts",
        "0",
        "--perm",
        "1,0",
        "--out-ext=3,-2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("NegativeExtent"));
    assert!(!c.exists());

    let out = gett(&[
        "run",
        s(&a),
        s(&b),
        s(&c),
        "--conts",
        "0",
        "--perm",
        "1,0",
        "--out-ext",
        "3,2",
        "--out-inc=-2,1",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let c = read_tensor(&c).unwrap();
    // C[j, i] = b[j] * a[i], first dimension walking backwards.
    let got = pack(
        &c.view,
        match &c.data {
            TensorData::D(v) => v,
            _ => unreachable!(),
        },
    );
    assert_eq!(got.data, vec![3.0, 4.0, 5.0, 6.0, 8.0, 10.0]);
}

fn spec_file(dir: &Path) -> HashMap<String, String> {
    std::fs::read_to_string(dir.join("spec.txt"))
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once(':').unwrap();
            (k.trim().to_string(), v.trim().to_string())
        })
        .collect()
}

fn doubles(t: &TensorFile) -> &[f64] {
    match &t.data {
        TensorData::D(v) => v,
        other => panic!("expected d, got {:?}", other.dtype()),
    }
}

fn list(s: &str) -> Vec<usize> {
    if s.is_empty() {
        vec![]
    } else {
        s.split(',').map(|t| t.parse().unwrap()).collect()
    }
}

#[test]
fn generated_cases_run_and_match_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    for (i, category) in Category::ALL.iter().enumerate() {
        let case_dir = dir.path().join(format!("case{i}"));
        let seed = (i * 7) as u64;
        let out = gett(&[
            "gen",
            "--category",
            category.name(),
            "--seed",
            &seed.to_string(),
            "--out-dir",
            s(&case_dir),
        ]);
        assert!(out.status.success(), "{}", text(&out.stderr));
        let spec = spec_file(&case_dir);
        assert_eq!(spec["category"], category.name());

        let c_path = case_dir.join("c.tns");
        let out = gett(&[
            "run",
            s(&case_dir.join("a.tns")),
            s(&case_dir.join("b.tns")),
            s(&c_path),
            "--conts",
            &spec["conts"],
            "--cont-a",
            &spec["cont-a"],
            "--cont-b",
            &spec["cont-b"],
            "--perm",
            &spec["perm"],
            "--out-ext",
            &spec["out-ext"],
            &format!("--out-inc={}", spec["out-inc"]),
        ]);
        assert!(out.status.success(), "{category}: {}", text(&out.stderr));

        let a = read_tensor(&case_dir.join("a.tns")).unwrap();
        let b = read_tensor(&case_dir.join("b.tns")).unwrap();
        let c = read_tensor(&c_path).unwrap();
        let spec = ContractionSpec::new(
            list(&spec["cont-a"]),
            list(&spec["cont-b"]),
            list(&spec["perm"]),
        );
        let expected = oracle_contract(
            &pack(&a.view, doubles(&a)),
            &pack(&b.view, doubles(&b)),
            &spec,
        )
        .unwrap();
        compare(&pack(&c.view, doubles(&c)), &expected, CompareMode::Exact)
            .unwrap_or_else(|e| panic!("{category}: {e}"));
    }
}

#[test]
fn same_flags_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y) = (dir.path().join("x"), dir.path().join("y"));
    for d in [&x, &y] {
        let out = gett(&[
            "gen",
            "--category",
            "Sub-tensor of lower rank",
            "--seed",
            "11",
            "--out-dir",
            s(d),
        ]);
        assert!(out.status.success());
        let spec = spec_file(d);
        let out = gett(&[
            "run",
            s(&d.join("a.tns")),
            s(&d.join("b.tns")),
            s(&d.join("c.tns")),
            "--conts",
            &spec["conts"],
            "--cont-a",
            &spec["cont-a"],
            "--cont-b",
            &spec["cont-b"],
            "--perm",
            &spec["perm"],
        ]);
        assert!(out.status.success(), "{}", text(&out.stderr));
    }
    for name in ["a.tns", "b.tns", "spec.txt", "c.tns"] {
        assert_eq!(
            std::fs::read(x.join(name)).unwrap(),
            std::fs::read(y.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn verify_reports_every_category() {
    let out = gett(&["verify", "--suite", "all", "--cases", "100", "--seed", "7"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let report = text(&out.stdout);
    for category in Category::ALL {
        let line = report
            .lines()
            .find(|l| l.starts_with(category.name()))
            .unwrap_or_else(|| panic!("no line for {category}"));
        assert!(line.trim_end().ends_with("100/100"), "{line}");
    }
    assert!(report.contains("2300 of 2300 cases passed"), "{report}");
}

#[test]
fn verify_single_category_and_unknown_name() {
    let out = gett(&["verify", "--suite", "Scalar contraction", "--cases", "50"]);
    assert!(out.status.success());
    assert_eq!(
        text(&out.stdout)
            .lines()
            .filter(|l| l.contains("/50"))
            .count(),
        1
    );

    let out = gett(&["verify", "--suite", "Cubes"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("unknown test category"));
}

#[test]
fn bench_counts_multiply_adds() {
    let out = gett(&[
        "bench", "--rank", "2", "--extent", "64", "--conts", "1", "--reps", "1",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains(&format!("multiply-adds per rep: {}", 64u64.pow(3))));

    let out = gett(&[
        "bench", "--rank", "2", "--extent", "4", "--conts", "3", "--reps", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
