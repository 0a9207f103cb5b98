use std::collections::BTreeMap;

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::{Error, Result};

/// Largest accepted relative residual of a direct solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Square sparse matrix in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries; columns within a row are sorted.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut raw = vec![(0usize, 0.0f64); triplets.len()];
        for &(i, j, v) in triplets {
            assert!(i < n && j < n, "entry ({i}, {j}) outside {n}x{n}");
            raw[fill[i]] = (j, v);
            fill[i] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            let row = &mut raw[counts[i]..counts[i + 1]];
            row.sort_by_key(|e| e.0);
            for &(j, v) in row.iter() {
                if cols.len() > row_ptr[i] && *cols.last().unwrap() == j {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn identity(n: usize) -> Self {
        let t: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, &t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect()
    }

    pub fn transpose(&self) -> Self {
        let t: Vec<_> = self.triplets().into_iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.n, &t)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.matvec(y).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.triplets() {
            out[i][j] = v;
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Entrywise sum of two matrices of equal dimension.
    pub fn add(&self, other: &CsrMatrix) -> Self {
        assert_eq!(self.n, other.n);
        let mut t = self.triplets();
        t.extend(other.triplets());
        Self::from_triplets(self.n, &t)
    }
}

/// LU factorization of a matrix restricted to its unconstrained indices.
///
/// Constrained indices are eliminated: their rows are dropped and their
/// columns moved to the right-hand side, so prescribed values hold exactly.
pub struct FactoredSystem {
    matrix: CsrMatrix,
    free: Vec<usize>,
    /// Position of each index in `free`, or `None` if constrained.
    slot: Vec<Option<usize>>,
    lu: Option<faer::sparse::linalg::solvers::Lu<usize, f64>>,
}

impl FactoredSystem {
    pub fn new(matrix: &CsrMatrix, constrained: &[usize]) -> Result<Self> {
        let n = matrix.dim();
        let mut is_fixed = vec![false; n];
        for &i in constrained {
            if i >= n {
                return Err(Error::SingularSystem(format!("constraint index {i} out of range")));
            }
            is_fixed[i] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&i| !is_fixed[i]).collect();
        let mut slot = vec![None; n];
        for (k, &i) in free.iter().enumerate() {
            slot[i] = Some(k);
        }
        let lu = if free.is_empty() {
            None
        } else {
            let mut trip = Vec::with_capacity(matrix.nnz());
            for (ki, &i) in free.iter().enumerate() {
                for (j, v) in matrix.row(i) {
                    if let Some(kj) = slot[j] {
                        trip.push(Triplet::new(ki, kj, v));
                    }
                }
            }
            let m = free.len();
            let sparse = SparseColMat::<usize, f64>::try_new_from_triplets(m, m, &trip)
                .map_err(|e| Error::SingularSystem(format!("matrix construction: {e:?}")))?;
            Some(sparse.sp_lu().map_err(|e| Error::SingularSystem(format!("factorization: {e:?}")))?)
        };
        Ok(FactoredSystem { matrix: matrix.clone(), free, slot, lu })
    }

    /// Solves `A x = rhs` on the free indices with `x[i] = v` for each
    /// `(i, v)` in `fixed`. Every constrained index must appear in `fixed`.
    pub fn solve(&self, rhs: &[f64], fixed: &[(usize, f64)]) -> Result<Vec<f64>> {
        let n = self.matrix.dim();
        if rhs.len() != n {
            return Err(Error::FieldMismatch(format!("rhs has {} entries, system has {n}", rhs.len())));
        }
        let mut x = vec![0.0; n];
        let mut seen = 0;
        for &(i, v) in fixed {
            if i >= n || self.slot[i].is_some() {
                return Err(Error::SingularSystem(format!("index {i} is not constrained")));
            }
            x[i] = v;
            seen += 1;
        }
        if seen != n - self.free.len() {
            return Err(Error::SingularSystem("missing constraint values".into()));
        }
        let Some(lu) = &self.lu else {
            return Ok(x);
        };
        let m = self.free.len();
        let reduced: Vec<f64> = self
            .free
            .iter()
            .map(|&i| {
                let coupled: f64 =
                    self.matrix.row(i).filter(|(j, _)| self.slot[*j].is_none()).map(|(j, v)| v * x[j]).sum();
                rhs[i] - coupled
            })
            .collect();
        let mut col = Mat::<f64>::from_fn(m, 1, |k, _| reduced[k]);
        lu.solve_in_place(col.as_mut());
        for (k, &i) in self.free.iter().enumerate() {
            x[i] = col[(k, 0)];
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::SingularSystem("non-finite solution".into()));
        }
        let scale = reduced.iter().map(|v| v * v).sum::<f64>().sqrt();
        let residual = self
            .free
            .iter()
            .zip(&reduced)
            .map(|(&i, &r)| {
                let ax: f64 = self.matrix.row(i).filter(|(j, _)| self.slot[*j].is_some()).map(|(j, v)| v * x[j]).sum();
                (ax - r).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        if residual > RESIDUAL_TOLERANCE * scale.max(f64::MIN_POSITIVE) && residual > 0.0 {
            return Err(Error::SingularSystem(format!(
                "relative residual {:.3e} exceeds {RESIDUAL_TOLERANCE:e}",
                residual / scale
            )));
        }
        Ok(x)
    }
}

/// Square system with Dirichlet-type constraints.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub constraints: BTreeMap<usize, f64>,
}

impl LinearSystem {
    pub fn new(matrix: CsrMatrix, rhs: Vec<f64>) -> Self {
        LinearSystem { matrix, rhs, constraints: BTreeMap::new() }
    }

    pub fn constrain(mut self, index: usize, value: f64) -> Self {
        self.constraints.insert(index, value);
        self
    }

    pub fn solve(&self) -> Result<Vec<f64>> {
        let fixed: Vec<(usize, f64)> = self.constraints.iter().map(|(&i, &v)| (i, v)).collect();
        let idx: Vec<usize> = fixed.iter().map(|e| e.0).collect();
        FactoredSystem::new(&self.matrix, &idx)?.solve(&self.rhs, &fixed)
    }
}
