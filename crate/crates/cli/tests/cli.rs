use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use contrarian_core::RunManifest;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_contrarian"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn manifest(dir: &Path) -> RunManifest {
    RunManifest::read(&dir.join("manifest.json")).unwrap()
}

fn dir_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn spectrum_writes_table_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "spectrum", "--n", "29", "--m", "2", "--C", "(1,0);(0,1)", "--p", "0.3",
        "--out-dir", dir_arg(tmp.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 29 * 29 + 1);
    assert!(csv.starts_with("v_1,v_2,re,im,modulus,theta,in_W\n"));
    let m = manifest(tmp.path());
    assert_eq!(m.command, "spectrum");
    // p = 0.3 is below the 1/3 threshold, so only the (1,1) pair is subdominant
    assert_eq!(m.summary["spectrum"]["W"].as_array().unwrap().len(), 2);
    assert!(m.mismatches(tmp.path()).is_empty());
    let out = run(&[
        "spectrum", "--n", "29", "--C", "(1,0);(0,1)", "--p", "0.5",
        "--out-dir", dir_arg(tmp.path()),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(manifest(tmp.path()).summary["spectrum"]["W"].as_array().unwrap().len(), 4);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = dir_arg(tmp.path());
    assert_eq!(code(&run(&["spectrum", "--n", "29", "--C", "(1,0);(0,1)", "--out-dir", d])), 2);
    assert_eq!(code(&run(&["spectrum", "--n", "29", "--C", "(1,0);(0,1)", "--p", "1.5", "--out-dir", d])), 2);
    assert_eq!(code(&run(&["spectrum", "--n", "29", "--C", "(1,0", "--p", "0.5", "--out-dir", d])), 2);
    assert_eq!(code(&run(&["spectrum", "--bogus"])), 2);
    assert_eq!(
        code(&run(&["spectrum", "--n", "4", "--m", "2", "--C", "(2,0);(0,2)", "--p", "0.5", "--out-dir", d])),
        3
    );
    assert_eq!(code(&run(&["reproduce", "ex9", "--out-dir", d])), 2);
    assert_eq!(code(&run(&["reproduce", "--out-dir", d])), 2);
    // ex3's W claim is specific to p = 1/4
    assert_eq!(code(&run(&["reproduce", "ex3", "--p", "0.6", "--out-dir", d])), 1);
    assert!(tmp.path().join("checks.json").exists());
}

#[test]
fn every_example_reproduces() {
    for ex in ["ex1", "ex2", "ex3", "mix-low", "mix-high"] {
        let tmp = tempfile::tempdir().unwrap();
        let out = run(&["reproduce", ex, "--out-dir", dir_arg(tmp.path())]);
        let text = stdout(&out);
        assert_eq!(code(&out), 0, "{ex}: {text}");
        assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
        assert_eq!(manifest(tmp.path()).summary["pass"], true);
    }
}

#[test]
fn config_file_with_flag_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    fs::write(&cfg, "n = 7\nC = \"(1,0);(0,1)\"\np = 0.3\nd = 2\nseed = 9\nsteps = 40\nscaling = \"inverse-lambda\"\n").unwrap();
    let out_dir = tmp.path().join("a");
    let out = run(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--steps", "25",
        "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&out_dir);
    assert_eq!(m.config["steps"], 25);
    assert_eq!(m.config["seed"], 9);
    assert_eq!(m.config["scaling"], "inverse-lambda");
    assert_eq!(m.summary["final_t"], 25);
    assert!(out_dir.join("error.csv").exists());

    fs::write(&cfg, "n = 7\nbogus = 1\n").unwrap();
    let out = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let runs: [&[&str]; 5] = [
        &["simulate", "--n", "7", "--C", "(1,0);(0,1)", "--p", "0.3", "--steps", "120", "--scaling", "inverse-lambda", "--seed", "4"],
        &["attractor", "--n", "13", "--C", "(1,0);(0,1);(2,3)", "--p", "0.25", "--resolution", "32", "--steps", "50"],
        &["mixed", "--n", "13", "--C", "(1,0);(0,1)", "--C2", "(1,0);(0,2)", "--p", "0.5", "--steps", "80", "--seed", "2", "--find-q"],
        &["equidist", "--alpha", "0.1,0.2718281828", "--t-grid", "50,200", "--l-max", "20"],
        &["reproduce", "mix-low"],
    ];
    for args in runs {
        let tmp = tempfile::tempdir().unwrap();
        let first = tmp.path().join("first");
        let second = tmp.path().join("second");
        let mut a: Vec<&str> = args.to_vec();
        a.extend(["--out-dir", first.to_str().unwrap()]);
        let out = run(&a);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let m1 = manifest(&first);
        let man = first.join("manifest.json");
        let out = run(&[args[0], "--config", man.to_str().unwrap(), "--out-dir", second.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{args:?} rerun: {}", String::from_utf8_lossy(&out.stderr));
        let m2 = manifest(&second);
        assert_eq!(m1.outputs, m2.outputs, "{args:?}");
        assert_eq!(m1.outputs_digest, m2.outputs_digest);
        assert_eq!(m1.config, m2.config);
        for e in &m1.outputs {
            assert_eq!(fs::read(first.join(&e.file)).unwrap(), fs::read(second.join(&e.file)).unwrap());
        }
        // a manifest is only accepted by the subcommand that wrote it
        let other = if args[0] == "spectrum" { "simulate" } else { "spectrum" };
        let out = run(&[other, "--config", man.to_str().unwrap(), "--out-dir", second.to_str().unwrap()]);
        assert_eq!(code(&out), 2);
    }
}

#[test]
fn mixed_growth_configuration() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "mixed", "--n", "29", "--C", "(2,0);(0,2)", "--C2", "(1,0);(0,1)", "--p", "0.9",
        "--q", "0.0306", "--steps", "50", "--find-q", "--out-dir", dir_arg(tmp.path()),
    ]);
    assert_eq!(code(&out), 0);
    let m = manifest(tmp.path());
    let q = m.summary["transition"]["q"].as_f64().unwrap();
    assert!((q - 0.0306).abs() < 1e-3);
    let seq = fs::read_to_string(tmp.path().join("sequence.csv")).unwrap();
    assert_eq!(seq.lines().count(), 51);
}
