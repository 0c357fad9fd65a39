use std::path::Path;
use std::process::{Command, Output};

use nuqsim::scan::{parse_csv, Channel};

fn nuqsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nuqsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn earth_scan_to_stdout() {
    let o = nuqsim(&[
        "scan",
        "--scenario",
        "earth",
        "--energies",
        "1:25:7",
        "--compile",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 8);
    let rows = parse_csv(&text).unwrap().rows;
    assert_eq!(rows[0].energy_gev, 1.0);
    assert_eq!(rows[6].energy_gev, 25.0);
    for r in &rows {
        assert!((r.p_exact - r.p_theory).abs() <= 1e-12);
    }
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let o = nuqsim(&[
            "scan",
            "--scenario",
            "slab",
            "--energies",
            "1:25:20",
            "--seed",
            seed,
            "--csv",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        assert!(o.stdout.is_empty());
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "9");
    assert_eq!(a, run("b.csv", "9"));
    assert_ne!(a, run("c.csv", "10"));
}

#[test]
fn msw_writes_both_channels_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("msw.csv");
    let svg = dir.path().join("msw.svg");
    let o = nuqsim(&[
        "scan",
        "--scenario",
        "msw",
        "--energies",
        "0.001:0.05:4",
        "--synthesis",
        "optimized",
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(&std::fs::read_to_string(&csv).unwrap())
        .unwrap()
        .rows;
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0].channel, Some(Channel::Ee));
    assert_eq!(rows[1].channel, Some(Channel::Emu));
    for r in &rows {
        assert!((r.p_exact - r.p_theory).abs() <= 1e-3);
    }
    let plot = std::fs::read_to_string(&svg).unwrap();
    assert!(plot.starts_with("<svg") && plot.contains("Energy [GeV]"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"scenario": "slab", "energies": {"min": 2.0, "max": 4.0, "points": 3}, "shots": 100}"#,
    )
    .unwrap();
    let from_file = nuqsim(&["scan", "--config", cfg.to_str().unwrap()]);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file).lines().count(), 4);
    let overridden = nuqsim(&[
        "scan",
        "--config",
        cfg.to_str().unwrap(),
        "--energies",
        "2:4:5",
    ]);
    assert_eq!(stdout(&overridden).lines().count(), 6);
}

#[test]
fn dump_circuit_goes_to_stderr() {
    let o = nuqsim(&[
        "scan",
        "--scenario",
        "slab",
        "--energies",
        "3:3:1",
        "--compile",
        "--dump-circuit",
    ]);
    assert!(o.status.success());
    let dump = String::from_utf8_lossy(&o.stderr).into_owned();
    let body: String = dump
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    let c = nuqsim::compile::parse_circuit(&body).unwrap();
    assert_eq!(nuqsim::compile::pulse_count(&c), 21);
    assert_eq!(stdout(&o).lines().count(), 2);
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(code(&nuqsim(&["scan"])), 2);
    assert_eq!(
        code(&nuqsim(&["scan", "--scenario", "slab", "--shots", "0"])),
        2
    );
    assert_eq!(
        code(&nuqsim(&[
            "scan",
            "--scenario",
            "slab",
            "--energies",
            "5:1:3"
        ])),
        2
    );
    assert_eq!(
        code(&nuqsim(&[
            "scan",
            "--scenario",
            "slab",
            "--energies",
            "nonsense"
        ])),
        2
    );
    assert_eq!(
        code(&nuqsim(&[
            "scan",
            "--scenario",
            "slab",
            "--config",
            "/nonexistent/x.json"
        ])),
        2
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"scenario": "slab", "physics": {"ye": -1}}"#).unwrap();
    let o = nuqsim(&["scan", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("physics.ye"));
}

#[test]
fn plot_with_one_point_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("one.svg");
    let o = nuqsim(&[
        "scan",
        "--scenario",
        "earth",
        "--energies",
        "5:5:1",
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(!Path::new(&svg).exists());
}
