mod common;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use tailgating::adapt::{adapt_build, build_pool, AdaptConfig};
use tailgating::fermion::{assemble_hamiltonian, IntegralSet};
use tailgating::hamgrid::{DisplacementLabel, HamiltonianGrid, SyntheticFamily};
use tailgating::oracle::{
    eigvec_derivative, eigvec_derivative_dense, exact_ground_state, fd_energy_derivative, fidelity_scan, linspace,
    normalization_identity_check, second_derivative_via_states, theorem1_check, GridLine, PhaseMode, ScanCircuit,
};
use tailgating::pauli::PauliSum;
use tailgating::Exec;

const AXIAL: usize = 5;

/// Applies `a†_p` (create) or `a_p` to a determinant bitmask (bit p =
/// spin-orbital p), with the sign from the orbitals below `p`.
fn ladder(det: u32, p: usize, create: bool) -> Option<(u32, f64)> {
    let occupied = det & (1 << p) != 0;
    if occupied == create {
        return None;
    }
    let sign = if (det & ((1 << p) - 1)).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    Some((det ^ (1 << p), sign))
}

/// ⟨a|H|b⟩ from second-quantized integrals, spin-orbital `2p + σ`.
fn ci_matrix(ints: &IntegralSet, dets: &[u32]) -> DMatrix<f64> {
    let n = ints.n_orbitals;
    let m = 2 * n;
    let mut h = DMatrix::zeros(dets.len(), dets.len());
    let index = |d: u32| dets.iter().position(|&x| x == d);
    for (col, &d) in dets.iter().enumerate() {
        h[(col, col)] += ints.core_energy;
        for p in 0..m {
            for q in 0..m {
                if p % 2 != q % 2 {
                    continue;
                }
                let Some((d1, s1)) = ladder(d, q, false) else { continue };
                let Some((d2, s2)) = ladder(d1, p, true) else { continue };
                if let Some(row) = index(d2) {
                    h[(row, col)] += s1 * s2 * ints.h1(p / 2, q / 2);
                }
            }
        }
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        if p % 2 != q % 2 || r % 2 != s % 2 {
                            continue;
                        }
                        let v = ints.h2(p / 2, q / 2, r / 2, s / 2);
                        if v == 0.0 {
                            continue;
                        }
                        // ½ (pq|rs) a†_p a†_r a_s a_q
                        let Some((d1, s1)) = ladder(d, q, false) else { continue };
                        let Some((d2, s2)) = ladder(d1, s, false) else { continue };
                        let Some((d3, s3)) = ladder(d2, r, true) else { continue };
                        let Some((d4, s4)) = ladder(d3, p, true) else { continue };
                        if let Some(row) = index(d4) {
                            h[(row, col)] += 0.5 * s1 * s2 * s3 * s4 * v;
                        }
                    }
                }
            }
        }
    }
    h
}

#[test]
fn h2_ground_energy_matches_determinant_ci() {
    let g = common::grid("h2");
    let ints = g.base();
    let dets: Vec<u32> = (0u32..16).filter(|d| d.count_ones() == 2).collect();
    let ci = ci_matrix(ints, &dets);
    let e_ci = ci.symmetric_eigen().eigenvalues.min();
    let h = assemble_hamiltonian(ints).unwrap();
    let e = exact_ground_state(&h, Some(&g.sector())).unwrap().energy;
    assert!((e - e_ci).abs() < 1e-10, "{e} vs {e_ci}");
    assert!((e + 1.137).abs() < 2e-3, "{e}");
    let dense = exact_ground_state(&h, None).unwrap().energy;
    assert!((dense - e).abs() < 1e-10);
}

#[test]
fn single_z_ground_state() {
    let z = PauliSum::from_terms(1, 0.0, [("Z0".parse().unwrap(), 1.0)]).unwrap();
    let gs = exact_ground_state(&z, None).unwrap();
    assert!((gs.energy + 1.0).abs() < 1e-14);
    assert!((gs.state.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
}

fn random_hermitian(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

fn phase_aligned(v: DVector<Complex64>, reference: &[Complex64]) -> DVector<Complex64> {
    let ov: Complex64 = reference.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    v * (ov.conj() / ov.norm())
}

fn eigvec(h: &DMatrix<Complex64>, index: usize) -> DVector<Complex64> {
    let e = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..h.nrows()).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    e.eigenvectors.column(order[index]).into_owned()
}

#[test]
fn eigenvector_derivatives_match_phase_aligned_differences() {
    let mut rng = common::rng(21);
    let step = 1e-5;
    for trial in 0..10 {
        let h = random_hermitian(&mut rng, 8);
        let d = random_hermitian(&mut rng, 8);
        let index = trial % 8;
        let (_, v, dv) = eigvec_derivative_dense(&h, &d, index, 1e-8).unwrap();
        let shift = |t: f64| &h + &d * Complex64::new(t, 0.0);
        let plus = phase_aligned(eigvec(&shift(step), index), &v);
        let minus = phase_aligned(eigvec(&shift(-step), index), &v);
        for k in 0..8 {
            let fd = (plus[k] - minus[k]) / (2.0 * step);
            assert!((fd - dv[k]).norm() < 1e-6, "trial {trial} component {k}");
        }
        let overlap: Complex64 = v.iter().zip(&dv).map(|(a, b)| a.conj() * b).sum();
        assert!(overlap.norm() < 1e-10);
    }
}

#[test]
fn zero_perturbation_gives_zero_eigenvector_change() {
    let g = common::grid("h2");
    let h = assemble_hamiltonian(g.base()).unwrap();
    let dv = eigvec_derivative(&h, &PauliSum::zero(4), 0, Some(&g.sector())).unwrap();
    assert!(dv.norm() < 1e-14);
}

fn constant_grid() -> HamiltonianGrid {
    let g = common::grid("h2");
    let ints = g.base().clone();
    let points = g.labels().map(|l| (l.clone(), ints.clone())).collect();
    HamiltonianGrid::new("const", g.geometry().clone(), g.step(), points).unwrap()
}

#[test]
fn constant_grid_derivatives_vanish() {
    let g = constant_grid();
    for coords in [
        vec![AXIAL],
        vec![AXIAL, AXIAL],
        vec![0, AXIAL],
        vec![AXIAL; 3],
        vec![AXIAL; 4],
    ] {
        let fd = fd_energy_derivative(&g, &coords, Exec::Sequential).unwrap();
        assert!(fd.value.abs() < 1e-6, "{coords:?}: {}", fd.value);
    }
    assert!(second_derivative_via_states(&g, AXIAL, AXIAL).unwrap().abs() < 1e-12);
}

#[test]
fn quadratic_surface_second_derivative_is_exact() {
    // E(d) = −1 + 1.5 d₀² + 0.25 d₀d₁
    let z = PauliSum::from_terms(1, 0.0, [("Z0".parse().unwrap(), 1.0)]).unwrap();
    let one = |c: f64| PauliSum::constant_only(1, c);
    let fam = SyntheticFamily::new(
        2,
        0.01,
        None,
        vec![(vec![], z), (vec![0, 0], one(1.5)), (vec![0, 1], one(0.25))],
    )
    .unwrap();
    let d00 = fd_energy_derivative(&fam, &[0, 0], Exec::Sequential).unwrap();
    assert!((d00.value - 3.0).abs() < 1e-9);
    let d01 = fd_energy_derivative(&fam, &[0, 1], Exec::Sequential).unwrap();
    assert!((d01.value - 0.25).abs() < 1e-9);
}

#[test]
fn normalization_identities_on_families() {
    let fam = SyntheticFamily::random(4, 2, 2, 12, 1e-4, 5);
    let k1 = normalization_identity_check(&fam, 0, 1, PhaseMode::Aligned).unwrap();
    assert!(k1.residual.abs() < 1e-6, "{}", k1.residual);
    let scrambled = normalization_identity_check(&fam, 0, 1, PhaseMode::Scrambled(3)).unwrap();
    assert!(scrambled.residual.abs() > 1e-6);
    let g = common::grid("h2");
    let k2 = normalization_identity_check(&g, AXIAL, 2, PhaseMode::Aligned).unwrap();
    assert!(k2.residual.abs() < 1e-5, "{}", k2.residual);
    assert!(normalization_identity_check(&g, AXIAL, 3, PhaseMode::Aligned).is_err());
}

#[test]
fn theorem_holds_on_synthetic_family() {
    let fam = SyntheticFamily::random(6, 2, 3, 20, 1e-2, 11);
    let report = theorem1_check(&fam, 2, &[vec![0, 0], vec![0, 1], vec![1, 1]], Exec::default()).unwrap();
    assert!(report.holds(), "{:#?}", report.entries);
    assert!(report.entries.iter().all(|e| e.predicted));
}

#[test]
fn second_derivative_via_states_matches_energy_differences() {
    let g = common::grid("h2");
    let states = second_derivative_via_states(&g, AXIAL, AXIAL).unwrap();
    let fd = fd_energy_derivative(&g, &[AXIAL, AXIAL], Exec::default()).unwrap();
    assert!(
        (states - fd.value).abs() < 1e-4 + fd.error_bound(),
        "{states} vs {}",
        fd.value
    );
}

#[test]
fn converged_h2_circuit_tracks_the_exact_state() {
    let g = common::grid("h2");
    let h = assemble_hamiltonian(g.base()).unwrap();
    let pool = build_pool(2, 2).unwrap();
    let config = AdaptConfig::default();
    let r = adapt_build(&h, &pool, &config).unwrap();
    let scan = ScanCircuit {
        circuit: r.circuit,
        theta: r.theta,
        reoptimize: true,
    };
    let line = GridLine {
        family: &g,
        direction: DisplacementLabel::from_steps([(AXIAL, 1)]),
    };
    let deltas = linspace(-0.02, 0.02, 5);
    let curve = fidelity_scan(&scan, &line, &deltas, &config, Exec::default()).unwrap();
    assert_eq!(curve.points.len(), 5);
    assert!(curve.points.iter().all(|p| p.fidelity > 1.0 - 1e-8), "{curve:?}");
    let single = fidelity_scan(&scan, &line, &[0.0], &config, Exec::default()).unwrap();
    assert_eq!(single.points.len(), 1);
    assert_eq!(single.points[0].dfidelity, 0.0);
    assert!(fidelity_scan(&scan, &line, &[0.0015], &config, Exec::default()).is_err());
}
