#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tailgating::hamgrid::{load_grid, HamiltonianGrid};
use tailgating::pauli::{Pauli, PauliString, PauliSum};
use tailgating::simulator::{Circuit, Excitation};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(format!("{name}.json"))
}

pub fn grid(name: &str) -> HamiltonianGrid {
    load_grid(data(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real-coefficient sum of random strings (Hermitian by construction).
pub fn random_observable(rng: &mut ChaCha8Rng, n_qubits: usize, n_terms: usize) -> PauliSum {
    let constant = rng.gen_range(-1.0..1.0);
    let terms: Vec<_> = (0..n_terms)
        .map(|_| {
            let s = PauliString::from_factors((0..n_qubits).filter_map(|q| match rng.gen_range(0..4) {
                1 => Some((q, Pauli::X)),
                2 => Some((q, Pauli::Y)),
                3 => Some((q, Pauli::Z)),
                _ => None,
            }));
            (s, rng.gen_range(-1.0..1.0))
        })
        .collect();
    PauliSum::from_terms(n_qubits, constant, terms).unwrap()
}

fn distinct(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v: Vec<usize> = Vec::new();
    while v.len() < k {
        let q = rng.gen_range(0..n);
        if !v.contains(&q) {
            v.push(q);
        }
    }
    v
}

pub fn random_excitation(rng: &mut ChaCha8Rng, n_qubits: usize) -> Excitation {
    if n_qubits >= 4 && rng.gen_bool(0.4) {
        let mut w = distinct(rng, n_qubits, 4);
        let (mut a, mut b) = ([w[0], w[1]], [w[2], w[3]]);
        a.sort_unstable();
        b.sort_unstable();
        w = vec![a[0], a[1], b[0], b[1]];
        Excitation::double(w[0], w[1], w[2], w[3]).unwrap()
    } else {
        let w = distinct(rng, n_qubits, 2);
        Excitation::single(w[0], w[1]).unwrap()
    }
}

/// Random reference and gate sequence with parameters in [-π, π).
pub fn random_circuit(rng: &mut ChaCha8Rng, n_qubits: usize, n_gates: usize) -> (Circuit, Vec<f64>) {
    let k = rng.gen_range(1..n_qubits);
    let reference = distinct(rng, n_qubits, k);
    let gates = (0..n_gates).map(|_| random_excitation(rng, n_qubits)).collect();
    let theta = (0..n_gates)
        .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
        .collect();
    (Circuit::new(n_qubits, reference, gates).unwrap(), theta)
}
