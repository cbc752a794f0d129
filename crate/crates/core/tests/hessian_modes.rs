mod common;

use nalgebra::DMatrix;
use tailgating::adapt::{adapt_build, build_pool, vqe_optimize, AdaptConfig};
use tailgating::checkpoint::{Checkpoint, HessianRecord};
use tailgating::energyderiv::{energy_gradient, hessian, mixed_gradient, solve_response};
use tailgating::fermion::assemble_hamiltonian;
use tailgating::hamgrid::{DisplacementLabel, HamiltonianGrid, SyntheticFamily};
use tailgating::normalmodes::{frequencies, mass_weight, normal_modes, wavenumber_conversion, ModeOptions};
use tailgating::oracle::fd_energy_hessian;
use tailgating::simulator::{param_hessian, Circuit, Excitation};
use tailgating::tailgate::{build_derivative_set, screen_gates, tailgate, TailgatedCircuit};
use tailgating::Exec;

const AXIAL: usize = 5;

fn tailgated(g: &HamiltonianGrid, epsilon: f64) -> TailgatedCircuit {
    tailgated_with(g, epsilon, &AdaptConfig::default())
}

fn tailgated_with(g: &HamiltonianGrid, epsilon: f64, config: &AdaptConfig) -> TailgatedCircuit {
    let h = assemble_hamiltonian(g.base()).unwrap();
    let pool = build_pool(g.base().n_orbitals, g.base().n_electrons).unwrap();
    let r = adapt_build(&h, &pool, config).unwrap();
    let set = build_derivative_set(g, 2, Exec::default()).unwrap();
    let rep = screen_gates(&r.circuit, &r.theta, &pool, &set, epsilon, Exec::default()).unwrap();
    tailgate(&r.circuit, &r.theta, &pool, &rep).unwrap()
}

fn flat(g: &HamiltonianGrid) -> HamiltonianGrid {
    let base = g.base().clone();
    let points = g.labels().map(|l| (l.clone(), base.clone())).collect();
    HamiltonianGrid::new("flat", g.geometry().clone(), g.step(), points).unwrap()
}

#[test]
fn h2_hessian_matches_exact_finite_differences() {
    let g = common::grid("h2");
    let tc = tailgated(&g, 1e-5);
    let res = hessian(&tc, &g).unwrap();
    let fd = fd_energy_hessian(&g, Exec::default()).unwrap();
    let err = (&res.matrix - &fd).amax();
    assert!(err < 1e-4, "max deviation {err}");
    assert!(!res.warning());
    let modes = normal_modes(&res.matrix, g.geometry(), &ModeOptions::default()).unwrap();
    assert_eq!(modes.frequencies.len(), 1);
    assert!(modes.frequencies[0] > 4000.0 && modes.frequencies[0] < 5500.0);
}

#[test]
fn flat_grid_gives_zero_hessian_and_no_modes() {
    let g = flat(&common::grid("h2"));
    let tc = tailgated(&g, 1e-5);
    assert!(tc.tail.is_empty());
    let res = hessian(&tc, &g).unwrap();
    assert!(res.matrix.amax() < 1e-9);
    assert!(energy_gradient(&tc.circuit(), &tc.theta(), &g, Exec::default())
        .unwrap()
        .iter()
        .all(|x| x.abs() < 1e-9));
    let modes = normal_modes(&res.matrix, g.geometry(), &ModeOptions::default()).unwrap();
    assert!(modes.frequencies.is_empty());
}

#[test]
fn equilibrium_gradient_vanishes() {
    let g = common::grid("h2_eq");
    let tc = tailgated(&g, 1e-5);
    let grad = energy_gradient(&tc.circuit(), &tc.theta(), &g, Exec::default()).unwrap();
    assert!(grad.iter().all(|x| x.abs() < 1e-4), "{grad:?}");
}

#[test]
fn mixed_gradient_of_constant_family_is_zero() {
    let g = common::grid("h2");
    let fam = SyntheticFamily::new(
        6,
        g.step(),
        Some(g.sector()),
        vec![(vec![], assemble_hamiltonian(g.base()).unwrap())],
    )
    .unwrap();
    let c = Circuit::new(4, vec![0, 1], vec![Excitation::double(0, 1, 2, 3).unwrap()]).unwrap();
    assert!(mixed_gradient(&c, &[0.1], &fam, AXIAL).unwrap()[0].abs() < 1e-12);
}

#[test]
fn response_solve_examples() {
    let r = DMatrix::from_row_slice(3, 2, &[1.0, -2.0, 0.5, 0.0, 3.0, 1.0]);
    let sol = solve_response(&DMatrix::identity(3, 3), &r, 1e-10).unwrap();
    assert!((sol.dtheta_dr + &r).amax() < 1e-14);
    // rank-2 system, right-hand side in the range
    let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
    let rhs = DMatrix::from_row_slice(3, 1, &[1.0, -1.0, 0.0]);
    let sol = solve_response(&a, &rhs, 1e-10).unwrap();
    assert_eq!(sol.rank, 2);
    assert!(sol.residuals[0] < 1e-10);
    assert_eq!(sol.dtheta_dr[(2, 0)], 0.0);
    let empty = solve_response(&DMatrix::zeros(0, 0), &DMatrix::zeros(0, 4), 1e-10).unwrap();
    assert_eq!(empty.dtheta_dr.shape(), (0, 4));
    assert!(empty.residuals.iter().all(|x| *x == 0.0));
}

#[test]
fn response_matches_reoptimized_parameters() {
    let g = common::grid("h2");
    let c = Circuit::new(4, vec![0, 1], vec![Excitation::double(0, 1, 2, 3).unwrap()]).unwrap();
    let config = AdaptConfig {
        vqe_grad_tol: 1e-7,
        ..AdaptConfig::default()
    };
    let opt = |label: DisplacementLabel| {
        let h = g.hamiltonian_at(&label).unwrap();
        vqe_optimize(&c, &[0.0], &h, &config).unwrap().theta[0]
    };
    let theta = opt(DisplacementLabel::base());
    let h0 = assemble_hamiltonian(g.base()).unwrap();
    let a = param_hessian(&c, &[theta], &h0).unwrap();
    let rhs = DMatrix::from_column_slice(1, 1, &mixed_gradient(&c, &[theta], &g, AXIAL).unwrap());
    let analytic = solve_response(&a, &rhs, 1e-10).unwrap().dtheta_dr[(0, 0)];
    let plus = opt(DisplacementLabel::from_steps([(AXIAL, 1)]));
    let minus = opt(DisplacementLabel::from_steps([(AXIAL, -1)]));
    let fd = (plus - minus) / (2.0 * g.step());
    assert!((analytic - fd).abs() < 1e-4, "{analytic} vs {fd}");
}

#[test]
fn hessian_ignores_tail_order() {
    // Reordering shifts the Hessian by commutator terms proportional to the
    // residual gradient of the head state, hence the tight polish.
    let g = common::grid("h3p");
    let config = AdaptConfig {
        polish_grad_tol: Some(1e-10),
        vqe_step_growth: 1.5,
        vqe_max_step: 1.0,
        ..AdaptConfig::default()
    };
    let tc = tailgated_with(&g, 1e-5, &config);
    assert!(tc.tail.len() >= 2);
    let base = hessian(&tc, &g).unwrap();
    let reversed: Vec<usize> = (0..tc.tail.len()).rev().collect();
    let other = hessian(&tc.with_tail_order(&reversed).unwrap(), &g).unwrap();
    let d = (&base.matrix - &other.matrix).amax();
    assert!(d < 1e-10, "{d}");
}

#[test]
fn mass_weighting_and_frequency_examples() {
    let g = common::grid("h2");
    let mut unit = g.geometry().clone();
    for a in &mut unit.atoms {
        a.mass_amu = 1.0;
    }
    let h = DMatrix::from_fn(6, 6, |i, j| (i + 2 * j) as f64 * 0.1);
    assert_eq!(mass_weight(&h, &unit).unwrap(), h);
    let k = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0]));
    let mw = mass_weight(&k, g.geometry()).unwrap();
    for i in 0..6 {
        assert!((mw[(i, i)] - k[(i, i)] / 1.008).abs() < 1e-14);
    }
    assert!(frequencies(&DMatrix::zeros(6, 6), 50.0).unwrap().frequencies.is_empty());
    let one = frequencies(&DMatrix::from_element(1, 1, 1.0), 50.0).unwrap();
    assert!((one.frequencies[0] - wavenumber_conversion()).abs() < 1e-9);
}

#[test]
fn checkpoint_round_trip() {
    let g = common::grid("h3p");
    let h = assemble_hamiltonian(g.base()).unwrap();
    let pool = build_pool(g.base().n_orbitals, g.base().n_electrons).unwrap();
    let config = AdaptConfig::default();
    let r = adapt_build(&h, &pool, &config).unwrap();
    let tc = tailgated(&g, 1e-5);
    let ck = Checkpoint::from_adapt(g.molecule(), Some(g.content_hash()), &r, &config).with_tail(&tc, 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    tailgating::checkpoint::write_json(&path, &ck).unwrap();
    let back = Checkpoint::read(&path).unwrap();
    assert_eq!(back.theta, ck.theta);
    assert_eq!(back.tailgated().circuit(), tc.circuit());

    let res = hessian(&tc, &g).unwrap();
    let rec = HessianRecord::new(&res);
    let hp = dir.path().join("h.json");
    tailgating::checkpoint::write_json(&hp, &rec).unwrap();
    assert_eq!(HessianRecord::read(&hp).unwrap().matrix(), res.matrix);
}
