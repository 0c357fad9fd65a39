//! Byte-level regression checks against checked-in outputs.
//! Regenerate with `UPDATE_GOLDEN=1 cargo test --test golden`.

use std::path::PathBuf;

use nuqsim::scan::{csv_string, svg_string, Channel, ScanResult, ScanRow};

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert!(expected == actual, "{} differs from the golden copy", path.display());
}

fn fixture() -> ScanResult {
    let rows = (0..6)
        .flat_map(|i| {
            let e = 0.01 + 0.008 * i as f64;
            let pee = 0.55 - 0.04 * i as f64;
            let sampled = pee + if i % 2 == 0 { 0.006 } else { -0.004 };
            let se = (sampled * (1.0 - sampled) / 4096.0).sqrt();
            [
                ScanRow {
                    energy_gev: e,
                    channel: Some(Channel::Ee),
                    p_theory: pee,
                    p_exact: pee,
                    p_sampled: sampled,
                    stderr: se,
                },
                ScanRow {
                    energy_gev: e,
                    channel: Some(Channel::Emu),
                    p_theory: 1.0 - pee,
                    p_exact: 1.0 - pee,
                    p_sampled: 1.0 - sampled,
                    stderr: se,
                },
            ]
        })
        .collect();
    ScanResult { rows }
}

#[test]
fn svg_matches_golden() {
    golden("msw_fixture.svg", &svg_string(&fixture()).unwrap());
}

#[test]
fn csv_matches_golden() {
    golden("msw_fixture.csv", &csv_string(&fixture()));
}
