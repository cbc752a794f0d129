mod common;

use std::collections::BTreeMap;

use tailgating::fermion::{assemble_hamiltonian, IntegralSet};
use tailgating::hamgrid::{load_grid, write_grid, DisplacementLabel, HamiltonianGrid, Manifest};
use tailgating::oracle::{exact_ground_state, fd_energy_derivative};
use tailgating::pauli::PauliSum;
use tailgating::simulator::expval;
use tailgating::{Error, Exec};

const AXIAL: usize = 5;

fn label(steps: &[(usize, i32)]) -> DisplacementLabel {
    DisplacementLabel::from_steps(steps.iter().copied())
}

#[test]
fn shipped_grids_cover_full_hessian_stencils() {
    for name in ["h2", "h3p", "beh2", "h2o"] {
        let g = common::grid(name);
        let n = g.n_coords();
        for i in 0..n {
            for s in [-1, 1] {
                assert!(g.contains(&label(&[(i, s)])), "{name} missing ±{i}");
            }
            for j in i + 1..n {
                for (a, b) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                    assert!(g.contains(&label(&[(i, a), (j, b)])), "{name} missing pair {i},{j}");
                }
            }
        }
        assert!(g.len() >= 1 + 2 * n + 2 * n * (n - 1));
        assert!(g.gauge_report().is_clean(), "{name}: {:?}", g.gauge_report().violations);
    }
    let beh2 = common::grid("beh2");
    assert_eq!(beh2.n_coords(), 9);
    assert_eq!(beh2.n_qubits(), 14);
    let paired = beh2.labels().filter(|l| l.iter().count() == 2 && l.linf() == 1).count();
    let axial = beh2.labels().filter(|l| l.iter().count() == 1 && l.linf() == 1).count();
    assert_eq!((axial, paired), (18, 144));
}

#[test]
fn missing_base_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let src = common::data("h2");
    let mut m = Manifest::read(&src).unwrap();
    m.points.retain(|p| !p.label.is_empty());
    for p in &mut m.points {
        p.file = src.parent().unwrap().join(&p.file).to_string_lossy().into_owned();
    }
    let path = dir.path().join("nobase.json");
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let err = load_grid(&path).unwrap_err();
    assert!(matches!(err, Error::BaseGeometryAbsent));
    assert!(err.to_string().contains("base geometry absent"));
}

#[test]
fn missing_manifest_is_an_io_error() {
    assert!(load_grid("/nonexistent/grid.json").is_err());
}

#[test]
fn write_and_reload_round_trip() {
    let g = common::grid("h2");
    let dir = tempfile::tempdir().unwrap();
    let path = write_grid(dir.path(), "copy", &g).unwrap();
    let back = load_grid(path).unwrap();
    assert_eq!(back.len(), g.len());
    assert_eq!(back.content_hash(), g.content_hash());
}

#[test]
fn sign_flipped_orbital_is_flagged_at_that_point() {
    let g = common::grid("h2");
    let bad = label(&[(AXIAL, 1)]);
    let mut points = BTreeMap::new();
    for l in g.labels() {
        let mut ints = g.integrals(l).unwrap().clone();
        if *l == bad {
            let n = ints.n_orbitals;
            for q in 0..n {
                let v = ints.h1(0, q);
                ints.h1[q] = -v;
                if q != 0 {
                    ints.h1[q * n] = -v;
                }
            }
        }
        points.insert(l.clone(), ints);
    }
    let corrupted = HamiltonianGrid::new(g.molecule(), g.geometry().clone(), g.step(), points).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_grid(dir.path(), "flipped", &corrupted).unwrap();
    let reloaded = load_grid(path).unwrap();
    let report = reloaded.gauge_report();
    assert!(!report.is_clean());
    let flagged = bad.to_signed();
    assert!(report.violations.iter().all(|v| v.from == flagged || v.to == flagged));
    assert!(matches!(
        reloaded.coeff_derivative(&[AXIAL]),
        Err(Error::GaugeInconsistent(_))
    ));
}

#[test]
fn derivative_matches_richardson_estimate() {
    let g = common::grid("h2");
    let h = g.step();
    let at = |k: i32| g.integrals(&label(&[(AXIAL, k)])).unwrap().h1(0, 0);
    let rich = (8.0 * (at(1) - at(-1)) - (at(2) - at(-2))) / (12.0 * h);
    let d = g.coeff_derivative(&[AXIAL]).unwrap().h1(0, 0);
    assert!((d - rich).abs() <= 1e-6, "{d} vs {rich}");
}

#[test]
fn feynman_hellmann_matches_energy_slope() {
    let g = common::grid("h2");
    let h0 = g.hamiltonian_derivative(&[]).unwrap();
    assert!(h0.max_coefficient_diff(&assemble_hamiltonian(g.base()).unwrap()) == 0.0);
    let ground = exact_ground_state(&h0, Some(&g.sector())).unwrap();
    for c in [2, AXIAL] {
        let dh = g.hamiltonian_derivative(&[c]).unwrap();
        let fh = expval(&ground.state, &dh).unwrap();
        let fd = fd_energy_derivative(&g, &[c], Exec::default()).unwrap();
        assert!((fh - fd.value).abs() < 1e-6, "coordinate {c}: {fh} vs {}", fd.value);
    }
}

fn constant_grid() -> HamiltonianGrid {
    let g = common::grid("h2");
    let mut ints = IntegralSet::zeros(2, 2);
    ints.core_energy = 0.4;
    ints.set_h1(0, 0, -1.0);
    ints.set_h1(1, 1, -0.3);
    ints.set_h2(0, 0, 1, 1, 0.2);
    let points = g.labels().map(|l| (l.clone(), ints.clone())).collect();
    HamiltonianGrid::new("const", g.geometry().clone(), g.step(), points).unwrap()
}

#[test]
fn constant_grid_has_zero_derivatives() {
    let g = constant_grid();
    assert!(g.gauge_report().is_clean());
    assert!(g.gauge_report().violations.is_empty());
    for coords in [vec![0], vec![AXIAL], vec![AXIAL, AXIAL], vec![1, 4]] {
        let d = g.coeff_derivative(&coords).unwrap();
        assert!(d.core_energy.abs() < 1e-9);
        assert!(d.h1.iter().chain(&d.h2).all(|v| v.abs() < 1e-9));
        let dh = g.hamiltonian_derivative(&coords).unwrap();
        assert!(dh.max_coefficient_diff(&PauliSum::zero(4)) < 1e-9);
    }
}

#[test]
fn quadratic_core_energy_gives_exact_curvature() {
    let g = common::grid("h2");
    let h = g.step();
    let points: BTreeMap<_, _> = g
        .labels()
        .map(|l| {
            let mut ints = IntegralSet::zeros(2, 2);
            let r = l.steps(AXIAL) as f64 * h;
            ints.core_energy = r * r;
            (l.clone(), ints)
        })
        .collect();
    let q = HamiltonianGrid::new("quad", g.geometry().clone(), h, points).unwrap();
    let d2 = q.coeff_derivative(&[AXIAL, AXIAL]).unwrap();
    assert!((d2.core_energy - 2.0).abs() < 1e-9);
}
