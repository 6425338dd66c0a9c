use std::process::Command;

use stc_lab::harness::{Experiment, SweepConfig};

const BIN: &str = env!("CARGO_BIN_EXE_stc-lab");

fn config(lr: usize) -> SweepConfig {
    SweepConfig::from_toml_str(
        &format!(
            r#"
seed = 5
ebn0_db = [4.0]
[code]
kind = "golden"
[channel]
lr = {lr}
mode = "clarke_varying"
fdt = 0.01
[frame]
length = 20
"#
        ),
        None,
    )
    .unwrap()
}

#[test]
fn receive_prefix_matches_smaller_array() {
    let big = Experiment::new(config(4)).unwrap();
    let small = Experiment::new(config(2)).unwrap();
    for frame in 0..40 {
        let a = big.transmit(0, frame).unwrap();
        let b = small.transmit(0, frame).unwrap();
        assert_eq!(a.bits, b.bits);
        let (ya, ha) = (a.y.truncate_rx(2), a.h.truncate_rx(2));
        assert_eq!(ya, b.y);
        assert_eq!(ha, b.h);
        assert_eq!(small.receive(&ya, &ha).unwrap(), small.receive(&b.y, &b.h).unwrap());
    }
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn cli_sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "ebn0_db = [0.0, 6.0]\n[stopping]\nmax_frames = 200\n[code]\nkind = \"alamouti\"\n[channel]\nlr = 1\nmode = \"quasi_static\"\n[frame]\nlength = 10\n",
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let (code, _, err) = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("ebn0_db,frames,frame_errors,fer"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn cli_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "ebn0_db = [1.0]\n[code]\nkind = \"golden\"\n[channel]\nlr = 2\nspeed = 3\n").unwrap();
    let (code, _, err) = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("channel.speed"), "{err}");

    let (code, _, _) = run(&["sweep", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["metrics", "--code", "no-such-code"]);
    assert_eq!(code, 2);
}

#[test]
fn cli_metrics_and_selftest() {
    let (code, out, _) = run(&["metrics", "--code", "alamouti-qpsk"]);
    assert_eq!(code, 0);
    assert!(out.contains("min rank                        2"), "{out}");
    let (code, out, _) = run(&["selftest"]);
    assert_eq!(code, 0);
    assert_eq!(out.matches("PASS").count(), 4);
}
