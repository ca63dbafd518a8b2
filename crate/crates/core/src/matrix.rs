//! Square real matrices in dense or compressed-sparse-row storage.
//!
//! Only what the co-membership and spectral code needs: entry lookup,
//! matrix-vector products, weighted sums and an exact symmetry check.

use serde::Serialize;

use crate::error::{Error, Result};

/// Node counts above this use sparse storage by default.
pub const DENSE_LIMIT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StorageKind {
    Dense,
    Sparse,
}

impl StorageKind {
    pub fn for_size(n: usize) -> Self {
        if n > DENSE_LIMIT {
            StorageKind::Sparse
        } else {
            StorageKind::Dense
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Row-major `n * n` values.
    Dense(Vec<f64>),
    /// CSR with column indices sorted within each row.
    Sparse {
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    storage: Storage,
}

impl Matrix {
    pub fn zeros(n: usize, kind: StorageKind) -> Self {
        let storage = match kind {
            StorageKind::Dense => Storage::Dense(vec![0.0; n * n]),
            StorageKind::Sparse => Storage::Sparse {
                indptr: vec![0; n + 1],
                indices: Vec::new(),
                values: Vec::new(),
            },
        };
        Matrix { n, storage }
    }

    pub fn identity(n: usize) -> Self {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        Matrix {
            n,
            storage: Storage::Dense(values),
        }
    }

    /// Builds a dense matrix from row-major values.
    pub fn from_dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Validation(format!(
                "dense matrix of order {n} needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        Ok(Matrix {
            n,
            storage: Storage::Dense(values),
        })
    }

    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(
        n: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
        kind: StorageKind,
    ) -> Self {
        match kind {
            StorageKind::Dense => {
                let mut values = vec![0.0; n * n];
                for (i, j, v) in triplets {
                    values[i * n + j] += v;
                }
                Matrix {
                    n,
                    storage: Storage::Dense(values),
                }
            }
            StorageKind::Sparse => {
                let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
                for (i, j, v) in triplets {
                    rows[i].push((j, v));
                }
                let mut indptr = Vec::with_capacity(n + 1);
                let mut indices = Vec::new();
                let mut values = Vec::new();
                indptr.push(0);
                for mut row in rows {
                    row.sort_by_key(|&(j, _)| j);
                    let mut last: Option<usize> = None;
                    for (j, v) in row {
                        if last == Some(j) {
                            *values.last_mut().unwrap() += v;
                        } else {
                            indices.push(j);
                            values.push(v);
                            last = Some(j);
                        }
                    }
                    indptr.push(indices.len());
                }
                Matrix {
                    n,
                    storage: Storage::Sparse {
                        indptr,
                        indices,
                        values,
                    },
                }
            }
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn storage_kind(&self) -> StorageKind {
        match self.storage {
            Storage::Dense(_) => StorageKind::Dense,
            Storage::Sparse { .. } => StorageKind::Sparse,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "index ({i}, {j}) out of range");
        match &self.storage {
            Storage::Dense(v) => v[i * self.n + j],
            Storage::Sparse {
                indptr,
                indices,
                values,
            } => {
                let row = &indices[indptr[i]..indptr[i + 1]];
                match row.binary_search(&j) {
                    Ok(pos) => values[indptr[i] + pos],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Calls `visit(j, value)` for every stored entry of row `i`.
    pub fn for_each_in_row(&self, i: usize, mut visit: impl FnMut(usize, f64)) {
        match &self.storage {
            Storage::Dense(v) => {
                for (j, &x) in v[i * self.n..(i + 1) * self.n].iter().enumerate() {
                    if x != 0.0 {
                        visit(j, x);
                    }
                }
            }
            Storage::Sparse {
                indptr,
                indices,
                values,
            } => {
                for k in indptr[i]..indptr[i + 1] {
                    visit(indices[k], values[k]);
                }
            }
        }
    }

    /// Computes `out = self * x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.n);
        match &self.storage {
            Storage::Dense(v) => {
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &v[i * self.n..(i + 1) * self.n];
                    *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
            Storage::Sparse {
                indptr,
                indices,
                values,
            } => {
                for (i, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for k in indptr[i]..indptr[i + 1] {
                        acc += values[k] * x[indices[k]];
                    }
                    *o = acc;
                }
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.matvec_into(x, &mut out);
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.n];
        for (i, s) in sums.iter_mut().enumerate() {
            self.for_each_in_row(i, |_, v| *s += v);
        }
        sums
    }

    /// Bit-exact symmetry check.
    pub fn is_symmetric(&self) -> bool {
        for i in 0..self.n {
            let mut ok = true;
            self.for_each_in_row(i, |j, v| {
                if self.get(j, i).to_bits() != v.to_bits() {
                    ok = false;
                }
            });
            if !ok {
                return false;
            }
        }
        true
    }

    pub fn all_entries(&self, mut pred: impl FnMut(f64) -> bool) -> bool {
        match &self.storage {
            Storage::Dense(v) => v.iter().all(|&x| pred(x)),
            Storage::Sparse { values, .. } => values.iter().all(|&x| pred(x)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.all_entries(|x| x == 0.0)
    }

    /// Returns `self * factor`.
    pub fn scaled(&self, factor: f64) -> Matrix {
        let mut out = self.clone();
        match &mut out.storage {
            Storage::Dense(v) => v.iter_mut().for_each(|x| *x *= factor),
            Storage::Sparse { values, .. } => values.iter_mut().for_each(|x| *x *= factor),
        }
        out
    }

    /// Returns `Σ_k weight_k * M_k`; every term must have order `n`.
    pub fn weighted_sum(n: usize, terms: &[(f64, &Matrix)], kind: StorageKind) -> Matrix {
        let mut triplets = Vec::new();
        for &(w, m) in terms {
            assert_eq!(m.order(), n);
            for i in 0..n {
                m.for_each_in_row(i, |j, v| triplets.push((i, j, w * v)));
            }
        }
        Matrix::from_triplets(n, triplets, kind)
    }

    /// Returns `self + shift * I`.
    pub fn shifted_diagonal(&self, shift: f64) -> Matrix {
        let n = self.n;
        let mut triplets = Vec::new();
        for i in 0..n {
            self.for_each_in_row(i, |j, v| triplets.push((i, j, v)));
            triplets.push((i, i, shift));
        }
        Matrix::from_triplets(n, triplets, self.storage_kind())
    }

    /// Dense row-major copy of all entries.
    pub fn to_dense_vec(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(v) => v.clone(),
            Storage::Sparse { .. } => {
                let mut out = vec![0.0; self.n * self.n];
                for i in 0..self.n {
                    self.for_each_in_row(i, |j, v| out[i * self.n + j] = v);
                }
                out
            }
        }
    }
}
