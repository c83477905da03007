use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_momentlab"))
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn uniform_moments(n: usize) -> String {
    (0..=n).map(|k| format!("{:?}\n", 1.0 / (k as f64 + 1.0))).collect()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn check_feasible_uniform_on_segment() {
    let ws = Workspace::new();
    let seq = ws.file("u01.txt", &uniform_moments(8));
    let o = run(&["check-feasible", "--seq", s(&seq), "--support", "segment:0,1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("status: feasible"));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["block", "shift", "size", "min_eigen", "norm"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][0], "hankel");
    assert_eq!(rows[2][0], "segment");
}

#[test]
fn check_feasible_reports_witness() {
    let ws = Workspace::new();
    let seq = ws.file("bad.txt", "[1, 0, 1, 0, 0.5]\n");
    let o = run(&["check-feasible", "--seq", s(&seq), "--support", "line"]);
    assert_eq!(code(&o), 1);
    let report = stderr(&o);
    assert!(report.contains("status: infeasible"));
    assert!(report.contains("witness Q:"));
    assert!(report.contains("oracle: violation"));
}

#[test]
fn normal_moments_fail_on_half_line() {
    let ws = Workspace::new();
    let seq = ws.file("n.txt", "1\n0\n1\n0\n3\n");
    let o = run(&["check-feasible", "--seq", s(&seq), "--support", "halfline:0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn extend_dirac_is_degenerate() {
    let ws = Workspace::new();
    let seq = ws.file("d0.txt", "1\n0\n0\n0\n");
    let o = run(&["extend", "--seq", s(&seq), "--support", "line"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[1], ["4", "0.0", "0.0", "0.0", "true"]);
    assert!(stderr(&o).contains("m_4 in [0, 0]"));
}

#[test]
fn extend_reports_margin() {
    let ws = Workspace::new();
    let seq = ws.file("u5.txt", &uniform_moments(5));
    let o = run(&[
        "extend",
        "--seq",
        s(&seq),
        "--support",
        "segment:0,1",
        "--value",
        "0.14285714285714285",
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    let margin: f64 = rows[1][6].parse().unwrap();
    assert!(margin > 0.0);
    assert_eq!(rows[1][7], "true");
    let o = run(&["extend", "--seq", s(&seq), "--support", "segment:0,1", "--value", "0.5"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn extend_infeasible_input() {
    let ws = Workspace::new();
    let seq = ws.file("bad.txt", "1\n0\n1\n0\n0.5\n");
    let o = run(&["extend", "--seq", s(&seq)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("infeasible"));
}

#[test]
fn determinacy_verdicts() {
    let ws = Workspace::new();
    let mut normal = vec![0.0; 31];
    normal[0] = 1.0;
    for k in (2..=30).step_by(2) {
        normal[k] = normal[k - 2] * (k - 1) as f64;
    }
    let body: String = normal.iter().map(|v| format!("{v:?}\n")).collect();
    let seq = ws.file("normal.txt", &body);
    let o = run(&["determinacy", "--seq", s(&seq)]);
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("criterion_satisfied"));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[1][0], "2");
    let r2: f64 = rows[1][1].parse().unwrap();
    assert!((r2 - 2f64.sqrt()).abs() < 1e-12);

    let body: String = (0..=30).map(|n| format!("{:?}\n", (0.5 * (n * n) as f64).exp())).collect();
    let seq = ws.file("lognormal.txt", &body);
    let o = run(&["determinacy", "--seq", s(&seq), "--window", "3"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("inconclusive"));
}

#[test]
fn reconstruct_writes_nodes_and_checks() {
    let ws = Workspace::new();
    let seq = ws.file("u7.txt", &uniform_moments(7));
    let out = ws.path("nodes.csv");
    let checks = ws.path("checks.csv");
    let o = run(&[
        "reconstruct",
        "--seq",
        s(&seq),
        "--support",
        "segment:0,1",
        "--out",
        s(&out),
        "--checks",
        s(&checks),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("atoms: 4"));
    let rows = csv_rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows[0], ["node", "weight"]);
    assert_eq!(rows.len(), 5);
    for r in &rows[1..] {
        let x: f64 = r[0].parse().unwrap();
        let w: f64 = r[1].parse().unwrap();
        assert!((0.0..=1.0).contains(&x) && w > 0.0);
    }
    let rows = csv_rows(&fs::read_to_string(&checks).unwrap());
    assert_eq!(rows[0], ["order", "target", "achieved", "rel_error"]);
    assert_eq!(rows.len(), 9);
    assert!(rows[1..].iter().all(|r| r[3].parse::<f64>().unwrap() <= 1e-9));
}

#[test]
fn reconstruct_rejects_infeasible() {
    let ws = Workspace::new();
    let seq = ws.file("bad.txt", "1\n0\n1\n0\n0.5\n");
    assert_eq!(code(&run(&["reconstruct", "--seq", s(&seq)])), 1);
}

#[test]
fn moments_of_specs() {
    let ws = Workspace::new();
    let m = ws.file("u.txt", "uniform(0, 1)\n");
    let o = run(&["moments", "--measure", s(&m), "--order", "3"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["order", "moment"]);
    for (n, r) in rows[1..].iter().enumerate() {
        let v: f64 = r[1].parse().unwrap();
        assert!((v - 1.0 / (n as f64 + 1.0)).abs() < 1e-12);
    }
    let m = ws.file("sq.txt", "# unit square\nproduct(uniform(0,1), uniform(0,1))\n");
    let o = run(&["moments", "--measure", s(&m), "--order", "3"]);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["a1", "a2", "moment"]);
    let r = rows.iter().find(|r| r[0] == "1" && r[1] == "2").unwrap();
    assert!((r[2].parse::<f64>().unwrap() - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn bad_specs_are_usage_errors() {
    let ws = Workspace::new();
    let m = ws.file("bad.txt", "uniform(1, 0)\n");
    let o = run(&["moments", "--measure", s(&m), "--order", "2"]);
    assert_eq!(code(&o), 2);
    let m = ws.file("gamma.txt", "gamma(2)\n");
    let o = run(&["moments", "--measure", s(&m), "--order", "2"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("unknown measure"));
}

#[test]
fn fvolume_of_mixture() {
    let ws = Workspace::new();
    let m = ws.file("mix.txt", "mixture(0.5: dirac(0), 0.5: uniform(0,1))");
    let o = run(&["fvolume", "--measure", s(&m), "--box", "-1:0.5"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert!((rows[1][0].parse::<f64>().unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(rows[1][1], "true");
    let o = run(&["fvolume", "--measure", s(&m), "--box", "0:0.5"]);
    let rows = csv_rows(&stdout(&o));
    assert!((rows[1][0].parse::<f64>().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(rows[1][1], "false");
    let o = run(&["fvolume", "--measure", s(&m), "--box", "-inf:inf"]);
    let rows = csv_rows(&stdout(&o));
    assert!((rows[1][0].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    let o = run(&["fvolume", "--measure", s(&m), "--box", "0,0:1,1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn taylor_check_verb() {
    let ws = Workspace::new();
    let m = ws.file("coin.txt", "atoms(-1: 0.5, 1: 0.5)");
    let o = run(&["taylor-check", "--measure", s(&m), "--at", "0", "--step", "0.1", "--order", "3"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["t", "h", "n", "remainder", "bound", "slack", "holds"]);
    let rem: f64 = rows[1][3].parse().unwrap();
    assert!((rem - 4.165278025825e-6).abs() < 1e-15);
    assert_eq!(rows[1][6], "true");
    let u = ws.file("u.txt", "uniform(0, 1)");
    let o = run(&["taylor-check", "--measure", s(&u), "--at", "0", "--step", "0.1", "--order", "3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn converge_law_of_small_numbers() {
    let ws = Workspace::new();
    let fam = ws.file("fam.txt", "member: binomial(k, 1/k)\nlimit: poisson(1)\n");
    let o = run(&["converge", "--family", s(&fam), "--ks", "100", "--order", "2", "--grid", "half:-1,15"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows[0], ["k", "gap_1", "gap_2", "sup_cdf"]);
    let gap2: f64 = rows[1][2].parse().unwrap();
    assert!((gap2 - 0.01).abs() < 1e-9);
    let sup: f64 = rows[1][3].parse().unwrap();
    assert!(sup <= 0.011);
    let o = run(&["converge", "--family", s(&fam), "--grid", "0.5,1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("coincide with atoms"));
}

#[test]
fn parse_errors_name_the_line() {
    let ws = Workspace::new();
    let seq = ws.file("abc.txt", "1\nabc\n");
    let o = run(&["check-feasible", "--seq", s(&seq)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("abc.txt:2:"), "{}", stderr(&o));
    let empty = ws.file("empty.txt", "# nothing here\n");
    assert_eq!(code(&run(&["determinacy", "--seq", s(&empty)])), 2);
    assert_eq!(code(&run(&["determinacy", "--seq", s(&ws.path("missing.txt"))])), 2);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["check-feasible", "--seq", "x", "--support", "disk:1"])), 2);
    let ws = Workspace::new();
    let seq = ws.file("short.txt", "1\n0\n");
    assert_eq!(code(&run(&["check-feasible", "--seq", s(&seq)])), 2);
}

#[test]
fn csv_output_is_deterministic() {
    let ws = Workspace::new();
    let seq = ws.file("u.txt", &uniform_moments(10));
    let fam = ws.file("fam.txt", "member: binomial(k, 1/k)\nlimit: poisson(1)\n");
    let runs: [Vec<&str>; 2] = [
        vec!["check-feasible", "--seq", s(&seq), "--support", "segment:0,1", "--seed", "7"],
        vec!["converge", "--family", s(&fam), "--ks", "10,20,30,40"],
    ];
    for args in runs {
        let a = ws.path("a.csv");
        let b = ws.path("b.csv");
        let mut first = args.clone();
        first.extend(["--out", s(&a)]);
        let mut second = args.clone();
        second.extend(["--out", s(&b)]);
        assert_eq!(code(&run(&first)), code(&run(&second)));
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        assert!(!fs::read(&a).unwrap().is_empty());
    }
}
