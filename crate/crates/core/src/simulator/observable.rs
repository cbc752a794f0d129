use num_complex::Complex64;

use super::support::Support;
use crate::exec::Exec;
use crate::pauli::{i_pow, PauliSum};

/// A [`PauliSum`] compiled to a sparse matrix over a [`Support`], in
/// compressed-row form. Couplings that leave the support are dropped, which
/// is exact for inner products between states confined to the support.
#[derive(Clone, Debug)]
pub struct SparseObservable {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
    exec: Exec,
}

impl SparseObservable {
    pub fn new(h: &PauliSum, support: &Support) -> Self {
        Self::with_exec(h, support, Exec::default())
    }

    pub fn with_exec(h: &PauliSum, support: &Support, exec: Exec) -> Self {
        assert_eq!(
            h.n_qubits(),
            support.n_qubits(),
            "observable and support registers differ"
        );
        let n = h.n_qubits();
        let compiled: Vec<(usize, usize, Complex64)> = h
            .terms()
            .map(|(s, c)| {
                let (xm, zm, ny) = s.index_masks(n);
                (xm, zm, i_pow(ny) * c)
            })
            .collect();
        let constant = h.constant();
        let rows: Vec<Vec<(u32, Complex64)>> = exec.map(support.basis(), |&i| {
            let mut row: Vec<(u32, Complex64)> = Vec::new();
            if constant != 0.0 {
                row.push((support.position(i).unwrap() as u32, Complex64::new(constant, 0.0)));
            }
            for &(xm, zm, c) in &compiled {
                let j = i ^ xm;
                if let Some(pj) = support.position(j) {
                    // ⟨i|P|j⟩ = i^ny (-1)^{|j & z|}
                    let v = if (j & zm).count_ones() % 2 == 1 { -c } else { c };
                    row.push((pj as u32, v));
                }
            }
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(u32, Complex64)> = Vec::with_capacity(row.len());
            for (c, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|e| e.1.norm() > 0.0);
            merged
        });
        let mut row_start = Vec::with_capacity(rows.len() + 1);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_start.push(0);
        for r in rows {
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_start.push(cols.len());
        }
        Self {
            dim: support.dim(),
            row_start,
            cols,
            vals,
            exec,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    fn row_dot(&self, r: usize, v: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in self.row_start[r]..self.row_start[r + 1] {
            acc += self.vals[k] * v[self.cols[k] as usize];
        }
        acc
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "vector length differs from support");
        // small supports are not worth a fork-join
        if self.dim < 2048 {
            return (0..self.dim).map(|r| self.row_dot(r, v)).collect();
        }
        self.exec.map_range(self.dim, |r| self.row_dot(r, v))
    }

    /// `⟨a|H|b⟩`.
    pub fn matrix_element(&self, a: &[Complex64], b: &[Complex64]) -> Complex64 {
        inner(a, &self.apply(b))
    }

    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        self.matrix_element(v, v)
    }

    /// Dense copy over the support (for small supports and tests).
    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for k in self.row_start[r]..self.row_start[r + 1] {
                m[(r, self.cols[k] as usize)] += self.vals[k];
            }
        }
        m
    }

    /// True when every stored entry is real to `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.vals.iter().all(|v| v.im.abs() <= tol)
    }
}

/// `⟨a|b⟩`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
