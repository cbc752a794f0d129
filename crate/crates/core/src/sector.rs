use serde::{Deserialize, Serialize};

use crate::pauli::basis_bit;

/// Fixed particle-number and spin-projection sector under interleaved
/// ordering: `n_up` electrons on even qubits, `n_down` on odd qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sector {
    pub n_qubits: usize,
    pub n_up: usize,
    pub n_down: usize,
}

impl Sector {
    pub fn new(n_qubits: usize, n_up: usize, n_down: usize) -> Self {
        Self { n_qubits, n_up, n_down }
    }

    fn masks(&self) -> (usize, usize) {
        let mut even = 0;
        let mut odd = 0;
        for q in 0..self.n_qubits {
            if q % 2 == 0 {
                even |= basis_bit(self.n_qubits, q);
            } else {
                odd |= basis_bit(self.n_qubits, q);
            }
        }
        (even, odd)
    }

    pub fn contains(&self, index: usize) -> bool {
        let (even, odd) = self.masks();
        (index & even).count_ones() as usize == self.n_up && (index & odd).count_ones() as usize == self.n_down
    }

    /// Basis indices of the sector in increasing order.
    pub fn basis(&self) -> Vec<usize> {
        let (even, odd) = self.masks();
        (0..1usize << self.n_qubits)
            .filter(|&b| {
                (b & even).count_ones() as usize == self.n_up && (b & odd).count_ones() as usize == self.n_down
            })
            .collect()
    }

    pub fn dimension(&self) -> usize {
        let half_up = self.n_qubits.div_ceil(2);
        let half_down = self.n_qubits / 2;
        binomial(half_up, self.n_up) * binomial(half_down, self.n_down)
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_sizes() {
        let s = Sector::new(4, 1, 1);
        assert_eq!(s.basis().len(), 4);
        assert_eq!(s.dimension(), 4);
        // |1100> is index 12 with qubit 0 leftmost
        assert!(s.contains(0b1100));
        assert!(!s.contains(0b1010));
        assert_eq!(Sector::new(14, 3, 3).dimension(), 1225);
        assert_eq!(Sector::new(14, 5, 5).dimension(), 441);
        assert_eq!(Sector::new(14, 3, 3).basis().len(), 1225);
    }
}
