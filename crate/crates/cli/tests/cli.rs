//! End-to-end runs of the binary, each compared with the library call it wraps.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use refstate::dimacs::{emit_dimacs, parse_dimacs};
use refstate::encoders::{encode_ref_f, encode_reflection, encode_sat, VarLayout, LAYOUT_VERSION};
use refstate::lab::{
    check_parameter_regime, monte_carlo, sample_rho, RandomRestriction, RhoParams, Variant,
};
use refstate::levelled::{check_levelled, parse_levelled, simulate};
use refstate::resolution::write_proof;
use refstate::{Clause, Cnf, Justification, ResolutionProof};
use tempfile::TempDir;

fn refstate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_refstate"))
        .args(args)
        .env_remove("REFSTATE_LAYOUT_VERSION")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Scratch(TempDir);

impl Scratch {
    fn new() -> Scratch {
        Scratch(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn out(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }
}

fn read_cnf(p: impl AsRef<Path>) -> Cnf {
    parse_dimacs(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// The four clauses on variables 1 and 2, with a spare third variable, and
/// their tree refutation.
fn square() -> (Cnf, ResolutionProof) {
    let f = Cnf::new(
        3,
        [[1, 2], [-1, 2], [1, -2], [-1, -2]]
            .iter()
            .map(|c| Clause::from_dimacs(c))
            .collect(),
    )
    .unwrap();
    let mut pi = ResolutionProof::new();
    pi.push(Clause::from_dimacs(&[1, 2]), Justification::Input(1));
    pi.push(Clause::from_dimacs(&[-1, 2]), Justification::Input(2));
    pi.push(
        Clause::from_dimacs(&[2]),
        Justification::Resolvent {
            left: 1,
            right: 2,
            pivot: 1,
        },
    );
    pi.push(Clause::from_dimacs(&[1, -2]), Justification::Input(3));
    pi.push(Clause::from_dimacs(&[-1, -2]), Justification::Input(4));
    pi.push(
        Clause::from_dimacs(&[-2]),
        Justification::Resolvent {
            left: 4,
            right: 5,
            pivot: 1,
        },
    );
    pi.push(
        Clause::empty(),
        Justification::Resolvent {
            left: 3,
            right: 6,
            pivot: 2,
        },
    );
    (f, pi)
}

#[test]
fn generators_match_the_encoders() {
    let dir = Scratch::new();
    let (f, _) = square();
    let cnf = dir.write("f.cnf", &emit_dimacs(&f));

    let o = refstate(&[
        "gen-ref",
        "--cnf",
        &cnf,
        "--s",
        "2",
        "--t",
        "3",
        "-o",
        &dir.out("ref.cnf"),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path("ref.cnf")).unwrap();
    assert!(text.contains(&format!("c layout {LAYOUT_VERSION}")));
    assert!(text.lines().any(|l| l.starts_with("c family ")));
    let layout = VarLayout::ref_f(3, 4, 2, 3).unwrap();
    assert_eq!(
        read_cnf(dir.path("ref.cnf")),
        encode_ref_f(&f, &layout).unwrap()
    );

    let o = refstate(&[
        "gen-reflection",
        "--n",
        "2",
        "--r",
        "2",
        "--s",
        "3",
        "--t",
        "2",
    ]);
    assert_eq!(code(&o), 0);
    let layout = VarLayout::reflection(2, 2, 3, 2).unwrap();
    assert_eq!(
        parse_dimacs(&stdout(&o)).unwrap(),
        encode_reflection(&layout).unwrap()
    );

    let o = refstate(&["gen-sat", "--n", "2", "--r", "3"]);
    assert_eq!(
        parse_dimacs(&stdout(&o)).unwrap(),
        encode_sat(&VarLayout::sat(2, 3).unwrap()).unwrap()
    );

    let o = refstate(&["gen-am", "--cnf", &cnf, "--s-tilde", "6"]);
    assert_eq!(code(&o), 0);
    assert!(!parse_dimacs(&stdout(&o)).unwrap().is_empty());
}

#[test]
fn checkers_report_through_exit_codes() {
    let dir = Scratch::new();
    let (f, pi) = square();
    let cnf = dir.write("f.cnf", &emit_dimacs(&f));
    let good = dir.write("good.res", &write_proof(&pi));
    assert_eq!(
        code(&refstate(&["check-res", "--cnf", &cnf, "--proof", &good])),
        0
    );

    let mut bad_pi = pi.clone();
    bad_pi.steps[2].clause = Clause::from_dimacs(&[-2]);
    let bad = dir.write("bad.res", &write_proof(&bad_pi));
    let o = refstate(&["check-res", "--cnf", &cnf, "--proof", &bad]);
    assert_eq!(code(&o), 1);
    assert!(!o.stderr.is_empty());

    let garbage = dir.write("garbage.res", "this is not a proof\n");
    assert_eq!(
        code(&refstate(&[
            "check-res",
            "--cnf",
            &cnf,
            "--proof",
            &garbage
        ])),
        2
    );
    assert_eq!(code(&refstate(&["check-res", "--cnf", &cnf])), 2);
    let o = refstate(&["gen-ref", "--cnf", &cnf, "--s", "two", "--t", "3"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("--s"));
}

#[test]
fn reflection_refutation_checks_end_to_end() {
    let dir = Scratch::new();
    let (proof, formula) = (dir.out("p.r2"), dir.out("refl.cnf"));
    let o = refstate(&[
        "build-res2",
        "--n",
        "2",
        "--r",
        "2",
        "--s",
        "2",
        "--t",
        "2",
        "--cnf-out",
        &formula,
        "-o",
        &proof,
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        code(&refstate(&[
            "check-res2",
            "--cnf",
            &formula,
            "--proof",
            &proof
        ])),
        0
    );
}

#[test]
fn witness_commands_round_trip_a_simulation() {
    let dir = Scratch::new();
    let (f, pi) = square();
    let cnf = dir.write("f.cnf", &emit_dimacs(&f));
    let proof = dir.write("p.res", &write_proof(&pi));
    assert_eq!(
        code(&refstate(&[
            "simulate-levelled",
            "--cnf",
            &cnf,
            "--proof",
            &proof,
            "-o",
            &dir.out("l.lev")
        ])),
        0
    );
    let lr = parse_levelled(&std::fs::read_to_string(dir.path("l.lev")).unwrap()).unwrap();
    assert_eq!(lr, simulate(&f, &pi).unwrap());
    assert_eq!(
        code(&refstate(&[
            "check-levelled",
            "--cnf",
            &cnf,
            "--proof",
            &dir.out("l.lev")
        ])),
        0
    );

    let o = refstate(&[
        "witness-encode",
        "--cnf",
        &cnf,
        "--levelled",
        &dir.out("l.lev"),
        "-o",
        &dir.out("model"),
    ]);
    assert_eq!(code(&o), 0);
    let (s, t) = (lr.s.to_string(), lr.t.to_string());
    let o = refstate(&[
        "witness-decode",
        "--cnf",
        &cnf,
        "--s",
        &s,
        "--t",
        &t,
        "--model",
        &dir.out("model"),
    ]);
    assert_eq!(code(&o), 0);
    let back = parse_levelled(&stdout(&o)).unwrap();
    assert_eq!(back, lr);
    assert!(check_levelled(&f, &back).is_ok());
}

#[test]
fn restrict_matches_the_library() {
    let dir = Scratch::new();
    let (f, pi) = square();
    let cnf = dir.write("f.cnf", &emit_dimacs(&f));
    let proof = dir.write("p.res", &write_proof(&pi));
    let assign = dir.write("a", "1 0\n");
    let o = refstate(&[
        "restrict",
        "--cnf",
        &cnf,
        "--assign",
        &assign,
        "--proof",
        &proof,
        "--proof-out",
        &dir.out("q.res"),
    ]);
    assert_eq!(code(&o), 0);
    let g = parse_dimacs(&stdout(&o)).unwrap();
    assert_eq!(g, f.restrict(&[(1, true)].into_iter().collect()));
    assert_eq!(
        code(&refstate(&[
            "check-res",
            "--cnf",
            &dir.write("g.cnf", &emit_dimacs(&g)),
            "--proof",
            &dir.out("q.res")
        ])),
        0
    );
}

#[test]
fn lab_commands_match_the_library() {
    let dir = Scratch::new();
    let dims = ["--n", "2", "--r", "2", "--s", "3", "--t", "30"];
    let layout = VarLayout::ref_f(2, 2, 3, 30).unwrap();
    let params = RhoParams::new(1.0, 5);

    let mut args = vec!["sample-rho"];
    args.extend(dims);
    args.extend(["--eps", "1", "--seed", "5", "--trial", "9", "-o"]);
    let rho = dir.out("rho.json");
    args.push(&rho);
    assert_eq!(code(&refstate(&args)), 0);
    let rr: RandomRestriction =
        serde_json::from_str(&std::fs::read_to_string(&rho).unwrap()).unwrap();
    assert_eq!(rr, sample_rho(&params, &layout, 9).unwrap());
    assert_eq!(
        code(&refstate(&[
            "sample-rho",
            "--n",
            "2",
            "--r",
            "2",
            "--s",
            "3",
            "--t",
            "30",
            "--eps",
            "1"
        ])),
        2
    );

    let f = dir.write("f.cnf", "p cnf 2 2\n1 0\n-1 0\n");
    let o = refstate(&["check-rho", "--cnf", &f, "--rho", &rho]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(code(&o), if report["ok"] == true { 0 } else { 1 });

    let mut args = vec!["mc-stats"];
    args.extend(dims);
    args.extend(["--eps", "1", "--seed", "5", "--trials", "64"]);
    let got: serde_json::Value = serde_json::from_str(&stdout(&refstate(&args))).unwrap();
    assert_eq!(
        got,
        serde_json::to_value(monte_carlo(&params, &layout, 64).unwrap()).unwrap()
    );
}

#[test]
fn regime_reports_the_library_evaluation() {
    let o = refstate(&[
        "regime", "--n", "2", "--r", "2", "--s", "1e14", "--t", "1e14", "--eps", "1", "--delta",
        "1e-3",
    ]);
    assert_eq!(code(&o), 0);
    let got: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let want = check_parameter_regime(
        2,
        2,
        100_000_000_000_000,
        100_000_000_000_000,
        1.0,
        1e-3,
        Variant::Standard,
    )
    .unwrap();
    assert_eq!(got, serde_json::to_value(&want).unwrap());
    assert!(got["inequalities"]
        .as_array()
        .unwrap()
        .iter()
        .all(|q| q["holds"] == true));
}

#[test]
fn a_foreign_layout_pin_is_refused() {
    let o = Command::new(env!("CARGO_BIN_EXE_refstate"))
        .args(["gen-sat", "--n", "1", "--r", "1"])
        .env("REFSTATE_LAYOUT_VERSION", "some-other-layout")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_refstate"))
        .args(["gen-sat", "--n", "1", "--r", "1"])
        .env("REFSTATE_LAYOUT_VERSION", LAYOUT_VERSION)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}
