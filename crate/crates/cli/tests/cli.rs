use std::path::Path;
use std::process::{Command, Output};

use nmq_core::presets::{PRESETS, PRESET_OMEGA};

const FIG3_CONFIG: &str =
    "omega1 = 10\ndelta1 = 0\ndelta2 = 0\nalpha1 = 2\nalpha2 = 2\ngamma = 0.5\nnbar = 0\n";

fn nmq(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nmq"))
        .args(args)
        .current_dir(dir)
        .env_remove("NMQ_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().to_string())
        .collect()
}

#[test]
fn preset_table_matches_captions() {
    let expected = [
        ("fig2", 2.0, 2.0, 0.5, 0.0),
        ("fig3", 0.0, 2.0, 0.5, 0.0),
        ("fig4", 0.0, 0.5, 0.5, 0.0),
        ("fig5", 0.0, 3.0, 27.0, 0.0),
        ("fig6", 0.0, 5.0, 1.0 / 3.0, 0.2),
        ("fig7", 2.0, 2.0, 0.5, 0.2),
        ("fig8", 0.0, 2.0, 0.5, 0.2),
        ("fig9", 0.0, 0.5, 1.0, 0.2),
        ("fig10", 0.0, 3.0, 27.0, 0.2),
    ];
    assert_eq!(PRESETS.len(), expected.len());
    assert_eq!(PRESET_OMEGA, 10.0);
    for (p, (name, delta, alpha, gamma, nbar)) in PRESETS.iter().zip(expected) {
        assert_eq!(
            (p.name, p.delta, p.alpha, p.gamma, p.nbar),
            (name, delta, alpha, gamma, nbar)
        );
    }
}

#[test]
fn list_presets_names_all() {
    let dir = tempfile::tempdir().unwrap();
    let out = nmq(&["list-presets"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    for p in &PRESETS {
        assert!(stdout(&out).contains(p.name));
    }
}

#[test]
fn simulate_is_byte_deterministic_and_matches_preset() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("fig3.toml"), FIG3_CONFIG).unwrap();
    for out_dir in ["a", "b"] {
        let o = nmq(&["simulate", "fig3.toml", "-o", out_dir], dir.path());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let o = nmq(
        &["simulate", "--preset", "fig3", "-o", "p", "--svg"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    for name in ["trajectory.csv", "events.csv", "summary.csv"] {
        let a = read(&dir.path().join("a"), name);
        assert_eq!(a, read(&dir.path().join("b"), name), "{name}");
        assert_eq!(a, read(&dir.path().join("p"), name), "{name}");
        assert!(!a.contains('\r'));
    }
    assert!(read(&dir.path().join("p"), "concurrence.svg").starts_with("<svg"));
    let record = read(&dir.path().join("a"), "run.toml");
    assert!(record.contains("scenario_hash"));
}

#[test]
fn trajectory_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmq(&["simulate", "--preset", "fig2", "-o", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = read(&dir.path().join("out"), "trajectory.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("t,a,b,c,d,Re(f),Im(f),concurrence,precursor,eof")
    );
    assert_eq!(csv.lines().count(), 2002);
    let first = csv.lines().nth(1).unwrap();
    assert_eq!(
        first,
        "0.00000000000e0,5.00000000000e-1,0.00000000000e0,0.00000000000e0,5.00000000000e-1,5.00000000000e-1,0.00000000000e0,1.00000000000e0,1.00000000000e0,1.00000000000e0"
    );
    // detuned zero-temperature entanglement never vanishes
    let c: Vec<f64> = column(&csv, "concurrence")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(c.iter().all(|&v| v > 0.0));
    assert_eq!(
        read(&dir.path().join("out"), "events.csv"),
        "kind,time,reduced_precision\n"
    );
}

#[test]
fn fig3_events_show_death_and_revival() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmq(&["simulate", "--preset", "fig3", "-o", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let kinds = column(&read(&dir.path().join("out"), "events.csv"), "kind");
    let death = kinds
        .iter()
        .position(|k| k == "DEATH")
        .expect("a DEATH event");
    assert!(kinds[death..].iter().any(|k| k == "REVIVAL"));
}

#[test]
fn config_errors_exit_2_with_key_name() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "empty_grid.toml",
            format!("{FIG3_CONFIG}num_points = 0\n"),
            "num_points",
        ),
        ("unknown.toml", format!("{FIG3_CONFIG}kappa = 1\n"), "kappa"),
        ("mixed.toml", format!("{FIG3_CONFIG}omega3 = 9\n"), "omega3"),
        (
            "missing.toml",
            FIG3_CONFIG.replace("gamma = 0.5\n", ""),
            "gamma",
        ),
        (
            "type.toml",
            FIG3_CONFIG.replace("nbar = 0", "nbar = \"warm\""),
            "nbar",
        ),
    ];
    for (file, body, key) in cases {
        std::fs::write(dir.path().join(file), body).unwrap();
        let o = nmq(&["simulate", file, "-o", "out"], dir.path());
        assert_eq!(o.status.code(), Some(2), "{file}");
        assert!(stderr(&o).contains(key), "{file}: {}", stderr(&o));
    }
    let o = nmq(&["simulate", "does_not_exist.toml"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = nmq(&["frobnicate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let body = FIG3_CONFIG
        .replace("gamma = 0.5", "gamma = 1e308")
        .replace("nbar = 0", "nbar = 1");
    std::fs::write(dir.path().join("overflow.toml"), body).unwrap();
    let o = nmq(&["simulate", "overflow.toml", "-o", "out"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn thread_cap_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let run = |value: &str| {
        Command::new(env!("CARGO_BIN_EXE_nmq"))
            .arg("list-presets")
            .env("NMQ_THREADS", value)
            .current_dir(dir.path())
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(run("2"), Some(0));
    assert_eq!(run("0"), Some(2));
    assert_eq!(run("many"), Some(2));
}

#[test]
fn sweep_revivals_grow_with_coupling() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("sweep.toml"),
        "delta1 = 0\nalpha1 = [0.5, 2, 5]\ngamma = 0.5\nnbar = 0.2\n",
    )
    .unwrap();
    let o = nmq(&["sweep", "sweep.toml", "-o", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = read(&dir.path().join("out"), "summary.csv");
    let revivals: Vec<usize> = column(&csv, "revivals")
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(revivals, vec![0, 0, 2]);
    assert!(revivals.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn finite_temperature_always_ends_in_death() {
    let dir = tempfile::tempdir().unwrap();
    for (file, alpha, gamma) in [("s9.toml", 0.5, 1.0), ("s10.toml", 3.0, 27.0)] {
        std::fs::write(
            dir.path().join(file),
            format!("delta1 = 0\nalpha1 = {alpha}\ngamma = {gamma}\nnbar = [0, 0.2]\n"),
        )
        .unwrap();
        let out = format!("out_{file}");
        let o = nmq(&["sweep", file, "-o", &out], dir.path());
        assert_eq!(o.status.code(), Some(0));
        let csv = read(&dir.path().join(&out), "summary.csv");
        let nbar = column(&csv, "nbar");
        let death = column(&csv, "final_death");
        for (n, d) in nbar.iter().zip(&death) {
            if d == "none" {
                assert_eq!(n.parse::<f64>().unwrap(), 0.0, "{file}");
            }
        }
        assert_ne!(death[1], "none", "{file}");
    }
}

#[test]
fn single_point_sweep_equals_simulate_summary() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("fig3.toml"), FIG3_CONFIG).unwrap();
    assert_eq!(
        nmq(&["simulate", "fig3.toml", "-o", "sim"], dir.path())
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        nmq(&["sweep", "fig3.toml", "-o", "sw"], dir.path())
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        read(&dir.path().join("sim"), "summary.csv"),
        read(&dir.path().join("sw"), "summary.csv")
    );
}

#[test]
fn sweep_cap_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("big.toml"),
        "delta1 = 0\nalpha1 = { start = 0.1, stop = 5, num = 400 }\ngamma = { start = 0.1, stop = 5, num = 400 }\nnbar = 0\n",
    )
    .unwrap();
    let o = nmq(&["sweep", "big.toml", "-o", "out"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cap"));
}

#[test]
fn verify_quick_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmq(&["verify", "quick"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("all 18 checks passed"));
}

#[test]
fn verify_full_reports_oracle_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmq(&["verify", "full", "--preset", "fig2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.contains("oracle[fig2]")).unwrap();
    assert!(line.starts_with("PASS"));
    let dev: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(dev <= 1e-8);
}

#[test]
fn memory_kernel_check_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmq(&["verify", "quick", "--nz", "--preset", "fig4"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS memory-kernel[fig4]"));
}

#[test]
fn corrupted_generator_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let o = nmq(
        &["verify", "full", "--preset", "fig2", "--inject-sign-flip"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL oracle[fig2]"));
}
