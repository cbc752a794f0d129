use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use tailgating::fermion::{assemble_hamiltonian, jordan_wigner_one_body, IntegralSet};
use tailgating::pauli::{linear_combine, multiply, Pauli, PauliString, PauliSum};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Kronecker construction, qubit 0 as the leftmost factor.
fn kron_string(s: &PauliString, n: usize) -> DMatrix<Complex64> {
    let one = |p: Option<Pauli>| -> DMatrix<Complex64> {
        let z = c(0.0, 0.0);
        match p {
            None => DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c(1.0, 0.0)]),
            Some(Pauli::X) => DMatrix::from_row_slice(2, 2, &[z, c(1.0, 0.0), c(1.0, 0.0), z]),
            Some(Pauli::Y) => DMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
            Some(Pauli::Z) => DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), z, z, c(-1.0, 0.0)]),
        }
    };
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for q in 0..n {
        m = m.kronecker(&one(s.get(q)));
    }
    m
}

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(0u8..4, n).prop_map(|v| {
        PauliString::from_factors(v.into_iter().enumerate().filter_map(|(q, k)| match k {
            1 => Some((q, Pauli::X)),
            2 => Some((q, Pauli::Y)),
            3 => Some((q, Pauli::Z)),
            _ => None,
        }))
    })
}

#[test]
fn multiplication_examples() {
    let x0: PauliString = "X0".parse().unwrap();
    let y0: PauliString = "Y0".parse().unwrap();
    let (ph, p) = multiply(&x0, &x0);
    assert_eq!(ph.to_complex(), c(1.0, 0.0));
    assert!(p.is_identity());
    let (ph, p) = multiply(&x0, &y0);
    assert_eq!(ph.to_complex(), c(0.0, 1.0));
    assert_eq!(p, "Z0".parse().unwrap());
    let a: PauliString = "X0 Z1".parse().unwrap();
    let b: PauliString = "Y0 Z1".parse().unwrap();
    let (ph, p) = multiply(&a, &b);
    assert_eq!(ph.to_complex(), c(0.0, 1.0));
    assert_eq!(p, "Z0".parse().unwrap());
}

#[test]
fn one_body_images() {
    let n = jordan_wigner_one_body(1, 0, 0, 1.0).unwrap();
    assert!((n.constant() - 0.5).abs() < 1e-15);
    assert!((n.coefficient(&"Z0".parse().unwrap()) + 0.5).abs() < 1e-15);
    let hop = jordan_wigner_one_body(3, 0, 2, 1.0).unwrap();
    assert_eq!(hop.len(), 2);
    assert!((hop.coefficient(&"X0 Z1 X2".parse().unwrap()) - 0.5).abs() < 1e-15);
    assert!((hop.coefficient(&"Y0 Z1 Y2".parse().unwrap()) - 0.5).abs() < 1e-15);
}

#[test]
fn dense_hopping_couples_01_and_10() {
    let h = jordan_wigner_one_body(2, 0, 1, 1.0).unwrap();
    let m = h.to_dense().unwrap();
    assert!((m[(1, 2)] - c(1.0, 0.0)).norm() < 1e-15);
    assert!((m[(2, 1)] - c(1.0, 0.0)).norm() < 1e-15);
    assert!(m[(0, 0)].norm() < 1e-15 && m[(3, 3)].norm() < 1e-15);
    let k = PauliSum::constant_only(2, 0.7).to_dense().unwrap();
    assert_eq!(k, DMatrix::identity(4, 4) * c(0.7, 0.0));
}

fn random_integrals(n: usize, seed: u64) -> IntegralSet {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut ints = IntegralSet::zeros(n, 2);
    ints.core_energy = rng.gen_range(-1.0..1.0);
    for p in 0..n {
        for q in 0..=p {
            ints.set_h1(p, q, rng.gen_range(-1.0..1.0));
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    if (p * n + q) >= (r * n + s) && p >= q && r >= s {
                        ints.set_h2(p, q, r, s, rng.gen_range(-0.5..0.5));
                    }
                }
            }
        }
    }
    ints
}

/// `⟨Φ|H|Φ⟩` of an occupation-number state straight from the integrals.
fn determinant_energy(ints: &IntegralSet, occ: &[usize]) -> f64 {
    let mut e = ints.core_energy;
    for &i in occ {
        e += ints.h1(i / 2, i / 2);
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            let (p, q) = (i / 2, j / 2);
            e += ints.h2(p, p, q, q);
            if i % 2 == j % 2 {
                e -= ints.h2(p, q, q, p);
            }
        }
    }
    e
}

#[test]
fn diagonal_matches_second_quantized_energy() {
    for seed in 0..4 {
        let n = 2 + (seed as usize % 2);
        let ints = random_integrals(n, seed);
        let h = assemble_hamiltonian(&ints).unwrap();
        let m = h.to_dense().unwrap();
        let nq = 2 * n;
        for idx in 0..(1usize << nq) {
            let occ: Vec<usize> = (0..nq).filter(|&q| idx & (1 << (nq - 1 - q)) != 0).collect();
            let direct = determinant_energy(&ints, &occ);
            assert!((m[(idx, idx)].re - direct).abs() < 1e-10, "seed {seed} state {idx:b}");
        }
        let mh = m.adjoint();
        assert!((&m - mh).iter().all(|z| z.norm() < 1e-12));
    }
}

#[test]
fn linear_combine_cancels_and_merges() {
    let h = jordan_wigner_one_body(3, 0, 2, 0.3).unwrap();
    assert!(linear_combine(&[(1.0, &h), (-1.0, &h)]).unwrap().is_zero());
    let z = PauliSum::from_terms(1, 0.0, [("Z0".parse::<PauliString>().unwrap(), 1.0)]).unwrap();
    let two = linear_combine(&[(0.5, &z), (0.5, &z)]).unwrap();
    assert_eq!(two.len(), 1);
    assert!((two.coefficient(&"Z0".parse().unwrap()) - 1.0).abs() < 1e-15);
    assert!(linear_combine(&[(1.0, &h), (1.0, &z)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn product_matches_matrices(a in pauli_string(3), b in pauli_string(3)) {
        let (ph, p) = multiply(&a, &b);
        let lhs = kron_string(&a, 3) * kron_string(&b, 3);
        let rhs = kron_string(&p, 3) * ph.to_complex();
        prop_assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn product_is_associative(a in pauli_string(4), b in pauli_string(4), d in pauli_string(4)) {
        let (p1, ab) = multiply(&a, &b);
        let (p2, left) = multiply(&ab, &d);
        let (q1, bd) = multiply(&b, &d);
        let (q2, right) = multiply(&a, &bd);
        prop_assert_eq!(left, right);
        prop_assert_eq!(p1 * p2, q1 * q2);
    }

    #[test]
    fn one_body_is_hermitian(p in 0usize..4, q in 0usize..4, w in -2.0f64..2.0) {
        let h = jordan_wigner_one_body(4, p, q, w).unwrap();
        let m = h.to_dense().unwrap();
        prop_assert!((&m - m.adjoint()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn combine_is_linear(a in -1.0f64..1.0, b in -1.0f64..1.0, p in 0usize..3, q in 0usize..3) {
        let x = jordan_wigner_one_body(3, p, q, 1.0).unwrap();
        let sep = linear_combine(&[(a, &x), (b, &x)]).unwrap();
        let joint = linear_combine(&[(a + b, &x)]).unwrap();
        prop_assert!(sep.max_coefficient_diff(&joint) < 1e-12);
    }
}
