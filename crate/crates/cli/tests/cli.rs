use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use atten_forge::io::{parse_config, read_touchstone};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_atten-forge"));
    cmd.env_remove("ATTEN_FORGE_THREADS");
    cmd
}

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    if !out.status.success() {
        eprintln!("stdout:\n{}\nstderr:\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn ok(cmd: &mut Command) -> String {
    let out = run(cmd);
    assert!(out.status.success(), "exit {:?}", out.status.code());
    String::from_utf8(out.stdout).unwrap()
}

fn code(cmd: &mut Command) -> i32 {
    run(cmd).status.code().expect("exited normally")
}

fn tuned(dir: &Path) -> PathBuf {
    let out = dir.join("tuned.cfg");
    ok(bin().arg("optimize").arg("--config").arg(shipped("default.cfg")).arg("--out").arg(&out).arg("--joint"));
    out
}

#[test]
fn synth_completes_minimal_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("full.cfg");
    let stdout = ok(bin().arg("synth").arg("--config").arg(shipped("minimal.cfg")).arg("--out").arg(&out));
    assert!(stdout.contains("11.3137"), "{stdout}");
    let cfg = parse_config(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!((cfg.chip.unit4.r1.r - 11.31368).abs() < 1e-3);
    assert!((cfg.chip.unit4.r2.r - 104.82885).abs() < 1e-3);
}

#[test]
fn tuned_default_meets_band_targets() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tuned(dir.path());
    let stdout = ok(bin()
        .arg("report")
        .arg("--config")
        .arg(&cfg)
        .arg("--targets")
        .arg("il_max=3.8,rms_amp=0.15,rms_phase=1.6,rl_min=11.5"));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 4, "{stdout}");

    let strict = bin().arg("report").arg("--config").arg(&cfg).arg("--targets").arg("rms_amp=0.01").output().unwrap();
    assert_eq!(strict.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&strict.stdout).contains("FAIL rms_amp"));
}

#[test]
fn bad_config_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    let text = std::fs::read_to_string(shipped("default.cfg")).unwrap().replace("z0 = 50 ohm", "z0 = 50 ff");
    std::fs::write(&bad, text).unwrap();
    assert_eq!(code(bin().arg("report").arg("--config").arg(&bad)), 2);
    assert_eq!(code(bin().arg("report").arg("--config").arg(shipped("minimal.cfg"))), 2);
    assert_eq!(code(bin().arg("report").arg("--config").arg(dir.path().join("absent.cfg"))), 2);
    let unknown_target = bin().arg("report").arg("--config").arg(shipped("default.cfg")).arg("--targets").arg("gain=3").output().unwrap();
    assert_eq!(unknown_target.status.code(), Some(2));
}

#[test]
fn sweep_files_are_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shipped("default.cfg");
    let mut outputs = Vec::new();
    for threads in [None, Some("1"), Some("3")] {
        let out_dir = dir.path().join(format!("run-{}", threads.unwrap_or("auto")));
        let mut cmd = bin();
        cmd.arg("sweep").arg("--config").arg(&cfg).arg("--out-dir").arg(&out_dir);
        if let Some(t) = threads {
            cmd.env("ATTEN_FORGE_THREADS", t);
        }
        ok(&mut cmd);
        let states = std::fs::read(out_dir.join("states.csv")).unwrap();
        let metrics = std::fs::read(out_dir.join("metrics.csv")).unwrap();
        outputs.push((states, metrics));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let states = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert_eq!(states.lines().count(), 1 + 16 * 81);

    let mut bad_threads = bin();
    bad_threads.env("ATTEN_FORGE_THREADS", "many").arg("sweep").arg("--config").arg(&cfg).arg("--out-dir").arg(dir.path());
    assert_eq!(code(&mut bad_threads), 2);
}

#[test]
fn export_writes_readable_touchstone() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s3p5.s2p");
    ok(bin().arg("export").arg("--config").arg(shipped("default.cfg")).arg("--state").arg("3.5dB").arg("--out").arg(&out));
    let (rows, z0) = read_touchstone(&out).unwrap();
    assert_eq!(z0, 50.0);
    assert_eq!(rows.len(), 81);
    assert_eq!(rows[0].freq_hz, 20e9);
    assert!(rows.iter().all(|r| r.s.s21.norm() < 1.0));

    let mut missing = bin();
    missing.arg("export").arg("--config").arg(shipped("default.cfg")).arg("--state").arg("3.3dB").arg("--out").arg(&out);
    assert_eq!(code(&mut missing), 2);
}

#[test]
fn calibration_table_feeds_later_runs() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("cal.txt");
    let stdout = ok(bin().arg("calibrate").arg("--config").arg(shipped("default.cfg")).arg("--out").arg(&table));
    assert!(stdout.contains("21 entries"), "{stdout}");
    let direct = ok(bin().arg("report").arg("--config").arg(shipped("default.cfg")));
    let cached = ok(bin().arg("report").arg("--config").arg(shipped("default.cfg")).arg("--cal").arg(&table));
    assert_eq!(direct, cached);
}
