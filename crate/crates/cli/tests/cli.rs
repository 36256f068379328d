use std::process::Command;

use ctq_cli::commands::{
    cmd_curve, cmd_measure, grid_points, read_state_file, write_state_file, CurveFamily,
};
use ctq_core::states::{isotropic, max_entangled, pure_from_amplitudes, random_density, random_pure, State};
use ctq_core::DimensionSignature;

fn bell() -> State {
    State::Pure(pure_from_amplitudes(max_entangled(2), DimensionSignature::bipartite(2, 2).unwrap()).unwrap())
}

#[test]
fn file_round_trip_preserves_measures() {
    let dir = tempfile::tempdir().unwrap();
    let sig = DimensionSignature::bipartite(3, 4).unwrap();
    let states = [
        State::Pure(random_pure(&sig, 4).unwrap()),
        State::Density(random_density(&DimensionSignature::bipartite(2, 2).unwrap(), 3, 5).unwrap()),
    ];
    for (k, state) in states.iter().enumerate() {
        let path = dir.path().join(format!("s{k}.json"));
        write_state_file(&path, state).unwrap();
        let back = read_state_file(&path).unwrap();
        let a = cmd_measure(state, 3.0, 0.3, true).unwrap();
        let b = cmd_measure(&back, 3.0, 0.3, true).unwrap();
        for (x, y) in [(a.ctq, b.ctq), (a.ctq_raw, b.ctq_raw), (a.ct_alpha, b.ct_alpha), (a.concurrence, b.concurrence)] {
            match (x, y) {
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                _ => panic!("field presence changed"),
            }
        }
    }
}

#[test]
fn binary_measures_bell_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bell.json");
    write_state_file(&path, &bell()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ctq"))
        .args(["measure", path.to_str().unwrap(), "--q", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["ctq"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["lower_bound_only"], false);
}

#[test]
fn mixed_qutrit_file_degrades_to_bound() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mixed.json");
    let rho = random_density(&DimensionSignature::bipartite(3, 3).unwrap(), 9, 11).unwrap();
    write_state_file(&path, &State::Density(rho)).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ctq"))
        .args(["measure", path.to_str().unwrap(), "--q", "3"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lower_bound_only"], true);
    assert!(v["value"].is_null());
    assert!(v["bound"]["lower_bound"].is_number());
}

#[test]
fn isotropic_qutrit_file_lands_on_chord() {
    let r = cmd_measure(&State::Density(isotropic(0.9, 3).unwrap()), 3.0, 0.5, true).unwrap();
    assert_eq!(r.method, "isotropic-envelope");
    // tangent from (1, 1) touching at F = 8/9 has slope 9/4
    assert!((r.value.unwrap() - (2.25 * 0.9 - 1.25)).abs() < 1e-3);
}

#[test]
fn envelope_is_stable_under_grid_refinement() {
    let xs = grid_points(0.4, 1.0, 0.1).unwrap();
    for (family, d, q) in [(CurveFamily::Isotropic, 3, 3.0), (CurveFamily::Isotropic, 3, 4.0), (CurveFamily::Werner, 2, 8.0)] {
        let coarse = cmd_curve(family, d, q, &xs, 0.1, true).unwrap();
        let fine = cmd_curve(family, d, q, &xs, 0.001, true).unwrap();
        for (a, b) in coarse.rows.iter().zip(&fine.rows) {
            assert!((a.envelope - b.envelope).abs() < 5e-3, "{:?} x={}", family, a.x);
        }
    }
}

#[test]
fn qubit_isotropic_q4_curve_is_tight() {
    let xs = grid_points(0.5, 1.0, 0.01).unwrap();
    let c = cmd_curve(CurveFamily::Isotropic, 2, 4.0, &xs, 1e-4, true).unwrap();
    for r in &c.rows {
        assert!(r.envelope - r.lower_bound.unwrap() >= -1e-9);
    }
    for r in [&c.rows[0], c.rows.last().unwrap()] {
        assert!((r.envelope - r.lower_bound.unwrap()).abs() < 1e-9);
    }
}

#[test]
fn werner_csv_has_eof_column() {
    let out = Command::new(env!("CARGO_BIN_EXE_ctq"))
        .args(["werner", "--q", "8", "--from", "0.62", "--step", "0.02"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "w,raw,envelope,lower_bound,eof");
    for line in lines {
        let cells: Vec<f64> = line.split(',').filter(|c| !c.is_empty()).map(|c| c.parse().unwrap()).collect();
        let (env, eof) = (cells[2], *cells.last().unwrap());
        assert!(eof <= env + 1e-9, "{line}");
    }
}

#[test]
fn raw_scaling_multiplies_by_mu() {
    let xs = [0.8];
    let n = cmd_curve(CurveFamily::Isotropic, 3, 3.0, &xs, 1e-3, true).unwrap();
    let r = cmd_curve(CurveFamily::Isotropic, 3, 3.0, &xs, 1e-3, false).unwrap();
    let mu = ctq_core::mu(3, 3.0);
    assert!((r.rows[0].envelope - mu * n.rows[0].envelope).abs() < 1e-12);
}
