use std::fs;
use std::process::Command;

fn mimomc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mimomc"))
}

#[test]
fn presets_lists_every_name() {
    let out = mimomc().arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "coh-s1",
        "recov-s1",
        "wave-recov",
        "doa-s1",
        "scheme-compare",
    ] {
        assert!(text.lines().any(|l| l == name), "{name} missing");
    }
}

#[test]
fn serial_and_parallel_runs_write_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, serial: bool| {
        let out = dir.path().join(sub);
        let mut cmd = mimomc();
        cmd.args(["run", "--preset", "coh-s1", "--trials", "6", "--seed", "3"])
            .args([
                "--override",
                "sweep.array=10,20",
                "--override",
                "sweep.delta_theta=0,5",
            ])
            .arg("--out")
            .arg(&out);
        if serial {
            cmd.arg("--serial");
        }
        assert!(cmd.status().unwrap().success());
        fs::read_to_string(out.join("coh-s1.csv")).unwrap()
    };
    let a = run("a", true);
    let b = run("b", false);
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 1 + 4);
    assert!(a.starts_with("preset,master_seed,trial_first,trial_last,"));
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "preset = coh-s2  # scheme II\ntrials = 4\nsweep.nyquist = 32\nsweep.delta_theta = 5\n",
    )
    .unwrap();
    let from_file = dir.path().join("file");
    let status = mimomc()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&from_file)
        .status()
        .unwrap();
    assert!(status.success());
    let from_flags = dir.path().join("flags");
    let status = mimomc()
        .args(["run", "--preset", "coh-s2", "--trials", "4"])
        .args([
            "--override",
            "sweep.nyquist=32",
            "--override",
            "sweep.delta_theta=5",
        ])
        .arg("--out")
        .arg(&from_flags)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        fs::read_to_string(from_file.join("coh-s2.csv")).unwrap(),
        fs::read_to_string(from_flags.join("coh-s2.csv")).unwrap()
    );
}

#[test]
fn bad_override_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = mimomc()
        .args([
            "run",
            "--preset",
            "coh-s1",
            "--override",
            "no_such_key=1",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_such_key"));
}

#[test]
fn spectrum_peaks_at_true_doas_without_noise() {
    let out = mimomc()
        .args([
            "spectrum",
            "--doas=-20,15",
            "--speeds",
            "100,300",
            "--mt",
            "8",
            "--mr",
            "8",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let peaks: Vec<f64> = stderr
        .lines()
        .filter_map(|l| l.strip_prefix("peak: theta "))
        .map(|l| l.trim_end_matches(" deg").parse().unwrap())
        .collect();
    assert_eq!(peaks.len(), 2);
    assert!(
        (peaks[0] + 20.0).abs() < 0.01 && (peaks[1] - 15.0).abs() < 0.01,
        "{peaks:?}"
    );
    assert!(String::from_utf8(out.stdout).unwrap().lines().count() > 1000);
}
