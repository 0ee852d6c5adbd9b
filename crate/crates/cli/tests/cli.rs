use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use swipt_ee::scenario_file::ScenarioFile;

const REFERENCE: &str = "\
# reference scenario
user1.h = 0.8
user1.g = 0.5
user1.p_max = 2
user1.p_circuit = 0.3
user2.h = 0.4
user2.g = 0.3
user2.p_max = 2
user2.p_circuit = 0.3
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swipt-ee"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| {
            let (k, v) = l.split_once('=')?;
            (k.trim() == key).then(|| v.trim().to_string())
        })
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn solve_reports_inactive_regime_at_zero_demand() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.txt", REFERENCE);
    let o = run(&["solve", s.to_str().unwrap(), "--chi", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(field(&text, "regime"), "constraint_inactive");
    assert_eq!(field(&text, "p2"), "0");
}

#[test]
fn json_and_text_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "s.txt",
        &REFERENCE.replace("user2.g = 0.3", "user2.g = 0.8"),
    );
    let text = stdout(&run(&["solve", s.to_str().unwrap(), "--chi", "1.2"]));
    let json: serde_json::Value = serde_json::from_str(&stdout(&run(&[
        "solve",
        s.to_str().unwrap(),
        "--chi",
        "1.2",
        "--json",
    ])))
    .unwrap();
    for key in [
        "p1",
        "p2",
        "eta",
        "rate",
        "harvested",
        "chi_star",
        "chi_prime",
        "chi_max",
        "multiplier",
    ] {
        let from_text: f64 = field(&text, key).parse().unwrap();
        assert_eq!(json[key].as_f64(), Some(from_text), "{key}");
    }
    assert_eq!(json["regime"], field(&text, "regime"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.txt", REFERENCE);
    let o = run(&["solve", s.to_str().unwrap(), "--chi", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("chi_max"));

    let bad = write(
        dir.path(),
        "bad.txt",
        &REFERENCE.replace("user2.g = 0.3", "user2.g = abc"),
    );
    let o = run(&["solve", bad.to_str().unwrap(), "--chi", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("user2.g") && err.contains("line 7"), "{err}");

    assert_eq!(
        run(&["solve", "/nonexistent/file", "--chi", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["solve", s.to_str().unwrap(), "--chi", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["bogus"]).status.code(), Some(2));

    // Zero circuit power and lossless harvesting leave nothing to divide by.
    let lossless = "user1.h = 1\nuser1.g = 1\nuser1.p_max = 2\nuser1.p_circuit = 0\n\
                    user2.h = 0.5\nuser2.g = 1\nuser2.p_max = 2\nuser2.p_circuit = 0\n";
    let l = write(dir.path(), "lossless.txt", lossless);
    assert_eq!(
        run(&["solve", l.to_str().unwrap(), "--chi", "1"])
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn thresholds_report() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.txt", REFERENCE);
    let text = stdout(&run(&["thresholds", s.to_str().unwrap()]));
    assert_eq!(field(&text, "chi_prime"), "1");
    assert_eq!(field(&text, "chi_max"), "1.6");
    assert_eq!(field(&text, "degenerate"), "false");

    let tied = write(
        dir.path(),
        "tied.txt",
        &REFERENCE.replace("user2.g = 0.3", "user2.g = 0.5"),
    );
    let text = stdout(&run(&["thresholds", tied.to_str().unwrap()]));
    assert_eq!(field(&text, "degenerate"), "true");
}

#[test]
fn sweep_writes_csv_and_refuses_to_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.txt", REFERENCE);
    let out = dir.path().join("chi.csv");
    let args = |extra: &[&str]| {
        let mut v = vec![
            "sweep",
            s.to_str().unwrap(),
            "--axis",
            "chi",
            "--start",
            "0",
            "--end",
            "1.8",
            "--step",
            "0.1",
            "--output",
            out.to_str().unwrap(),
        ];
        v.extend_from_slice(extra);
        v.into_iter().map(String::from).collect::<Vec<_>>()
    };
    let o = bin().args(args(&[])).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("19 rows"));
    let csv = fs::read_to_string(&out).unwrap();
    let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "chi,p1,p2,eta,rate,harvested,regime,status");
    assert_eq!(data.len(), 20);
    assert!(data[11].starts_with("1,2,0,"));
    assert!(data[19].ends_with(",,infeasible"));

    assert_eq!(
        bin().args(args(&[])).output().unwrap().status.code(),
        Some(2)
    );
    assert_eq!(
        bin()
            .args(args(&["--force", "--oracle", "--coarse-n", "50"]))
            .output()
            .unwrap()
            .status
            .code(),
        Some(0)
    );
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv
        .lines()
        .any(|l| l == "chi,p1,p2,eta,rate,harvested,regime,status,oracle_eta"));

    let bad = run(&[
        "sweep",
        s.to_str().unwrap(),
        "--axis",
        "chi",
        "--start",
        "1",
        "--end",
        "0",
        "--step",
        "0.1",
        "--output",
        "x.csv",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn power_and_circuit_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "s.txt", REFERENCE);
    for (axis, extra) in [("power", vec!["--user", "2"]), ("pc", vec!["--chi", "0.2"])] {
        let out = dir.path().join(format!("{axis}.csv"));
        let mut args = vec![
            "sweep",
            s.to_str().unwrap(),
            "--axis",
            axis,
            "--start",
            "0",
            "--end",
            "2",
            "--step",
            "0.5",
            "--output",
            out.to_str().unwrap(),
        ];
        args.extend(extra);
        assert_eq!(run(&args).status.code(), Some(0), "{axis}");
        let csv = fs::read_to_string(&out).unwrap();
        assert_eq!(
            csv.lines().filter(|l| !l.starts_with('#')).count(),
            6,
            "{axis}"
        );
    }
    let out = dir.path().join("bad.csv");
    let o = run(&[
        "sweep",
        s.to_str().unwrap(),
        "--axis",
        "power",
        "--user",
        "3",
        "--start",
        "0",
        "--end",
        "1",
        "--step",
        "0.5",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_and_detects_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "s.txt",
        &REFERENCE.replace("user2.g = 0.3", "user2.g = 0.8"),
    );
    let args = [
        "verify",
        s.to_str().unwrap(),
        "--chi-points",
        "12",
        "--resolution",
        "200",
    ];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
    let mut perturbed = args.to_vec();
    perturbed.extend(["--perturb-gain", "0.2"]);
    assert_eq!(run(&perturbed).status.code(), Some(1));

    let single = "user1.h = 1\nuser1.g = 0.5\nuser1.p_max = 4\nuser1.p_circuit = 1\n\
                  user2.h = 0\nuser2.g = 0\nuser2.p_max = 0\nuser2.p_circuit = 0\n";
    let single = write(dir.path(), "single.txt", single);
    assert_eq!(
        run(&["verify", single.to_str().unwrap(), "--chi-points", "20"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn sample_is_deterministic_and_reparseable() {
    let dir = tempfile::tempdir().unwrap();
    let template = write(dir.path(), "t.txt", REFERENCE);
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for out in [&a, &b] {
        let o = run(&[
            "sample",
            "--seed",
            "9",
            "--template",
            template.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.contains("chacha20"));
    let parsed = ScenarioFile::parse(&text).unwrap();
    assert_eq!(parsed.to_text(), text);
    assert_eq!(parsed.scenario.p_max(), [2.0, 2.0]);

    // Every reading command accepts the sampled file.
    assert_eq!(
        run(&["thresholds", a.to_str().unwrap()]).status.code(),
        Some(0)
    );
    let code = run(&["solve", a.to_str().unwrap(), "--chi", "0"])
        .status
        .code();
    assert!(matches!(code, Some(0) | Some(4)));
    let o = run(&[
        "sample",
        "--seed",
        "9",
        "--template",
        template.to_str().unwrap(),
        "--output",
        a.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let bad = write(dir.path(), "bad.txt", "user1.h = 1\n");
    let o = run(&[
        "sample",
        "--seed",
        "1",
        "--template",
        bad.to_str().unwrap(),
        "--output",
        dir.path().join("c.txt").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
