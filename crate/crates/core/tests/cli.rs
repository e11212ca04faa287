use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_subtrace");

const SMALL: &str = "\
n_sensors = 6
subspace_rank = 2
signal_powers = 5, 1
noise_variance = 1e-3
n_steps = 1500
break_step = 1200
break_variance = 0.1
seed = 3
n_runs = 4
burn_in = 200
spark_window = 100
";

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("exp.conf");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let status = Command::new(BIN)
            .args(["simulate", "--config"])
            .arg(&cfg)
            .args(["--clamp", "generic", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out.join("series.csv")).unwrap());
        let svg = std::fs::read_to_string(out.join("series.svg")).unwrap();
        assert!(svg.starts_with("<svg"));
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert_eq!(text.lines().count(), 1501);
}

#[test]
fn seed_flag_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(BIN)
            .args(["--seed", seed, "simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out.join("series.csv")).unwrap()
    };
    assert_ne!(run("1", "s1"), run("2", "s2"));
    assert_eq!(run("1", "s1b"), run("1", "s3"));
}

#[test]
fn compare_prints_spark_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("cmp");
    let output = Command::new(BIN)
        .args(["compare", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("sparks original="), "{stdout}");
    assert!(stdout.contains("amended="));
    for f in ["original.csv", "amended.csv", "comparison.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn geometry_selfcheck_passes() {
    let output = Command::new(BIN)
        .args(["geometry", "--selfcheck", "--instances", "500"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 7);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| Command::new(BIN).args(args).output().unwrap().status.code();

    assert_eq!(code(&["simulate", "--bogus"]), Some(1));
    assert_eq!(code(&[]), Some(1));

    let bad = write_config(dir.path(), "n_sensors = 8\n");
    let out = dir.path().join("o");
    assert_eq!(
        code(&[
            "compare",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        Some(1)
    );

    let missing = dir.path().join("nope.conf");
    assert_eq!(
        code(&[
            "compare",
            "--config",
            missing.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        Some(2)
    );

    // output directory path blocked by a regular file
    let good = dir.path().join("good.conf");
    std::fs::write(&good, SMALL).unwrap();
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "x").unwrap();
    assert_eq!(
        code(&[
            "simulate",
            "--config",
            good.to_str().unwrap(),
            "--out",
            blocker.to_str().unwrap()
        ]),
        Some(2)
    );
}
