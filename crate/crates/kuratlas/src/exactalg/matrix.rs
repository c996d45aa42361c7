//! Small dense complex matrices in exact (Gaussian-rational) or floating
//! mode, with the elimination kernels the rest of the crate runs on:
//! rank, kernel bases, deterministic complement extension, determinants.
//!
//! Pivoting is deterministic everywhere: exact mode picks the first
//! nonzero entry (lowest row index), floating mode the entry of largest
//! magnitude, so repeated runs produce identical bases.

use std::fmt;

use super::real::RealMatrix;
use super::scalar::{GaussianRational, C64};
use super::AlgebraError;

/// Arithmetic mode of a [`ComplexMatrix`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatrixMode {
    /// Exact Gaussian-rational entries; never rounds.
    Exact,
    /// Floating entries compared against the given tolerance (> 0).
    Float { tolerance: f64 },
}

#[derive(Clone, PartialEq)]
enum Data {
    Exact(Vec<GaussianRational>),
    Float(Vec<C64>),
}

/// Dense rows × cols complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Data,
    tolerance: f64,
}

pub(crate) const DEFAULT_TOLERANCE: f64 = 1e-9;

impl ComplexMatrix {
    pub fn zeros_exact(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: Data::Exact(vec![GaussianRational::zero(); rows * cols]),
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn identity_exact(n: usize) -> Self {
        let mut m = Self::zeros_exact(n, n);
        for i in 0..n {
            m.set(i, i, GaussianRational::one());
        }
        m
    }

    pub fn from_rows_exact(rows: Vec<Vec<GaussianRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        ComplexMatrix {
            rows: r,
            cols: c,
            data: Data::Exact(rows.into_iter().flatten().collect()),
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    /// Matrix whose columns are the given exact vectors.
    pub fn from_cols_exact(cols: Vec<Vec<GaussianRational>>, ambient: usize) -> Self {
        let c = cols.len();
        let mut m = Self::zeros_exact(ambient, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), ambient, "column length mismatch");
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn from_rows_f64(rows: Vec<Vec<C64>>, tolerance: f64) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        assert!(tolerance > 0.0, "tolerance must be positive in float mode");
        ComplexMatrix {
            rows: r,
            cols: c,
            data: Data::Float(rows.into_iter().flatten().collect()),
            tolerance,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mode(&self) -> MatrixMode {
        match &self.data {
            Data::Exact(_) => MatrixMode::Exact,
            Data::Float(_) => MatrixMode::Float {
                tolerance: self.tolerance,
            },
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.data, Data::Exact(_))
    }

    pub fn get(&self, i: usize, j: usize) -> GaussianRational {
        match &self.data {
            Data::Exact(v) => v[i * self.cols + j].clone(),
            Data::Float(v) => {
                let z = v[i * self.cols + j];
                GaussianRational::from_f64_exact(z.re, z.im).expect("finite entry")
            }
        }
    }

    pub fn get_c64(&self, i: usize, j: usize) -> C64 {
        match &self.data {
            Data::Exact(v) => v[i * self.cols + j].to_c64(),
            Data::Float(v) => v[i * self.cols + j],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: GaussianRational) {
        let idx = i * self.cols + j;
        match &mut self.data {
            Data::Exact(d) => d[idx] = v,
            Data::Float(d) => d[idx] = v.to_c64(),
        }
    }

    pub fn to_float(&self, tolerance: f64) -> ComplexMatrix {
        let rows = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get_c64(i, j)).collect())
            .collect();
        ComplexMatrix::from_rows_f64(rows, tolerance)
    }

    pub fn transpose(&self) -> ComplexMatrix {
        let mut out = match &self.data {
            Data::Exact(_) => Self::zeros_exact(self.cols, self.rows),
            Data::Float(_) => ComplexMatrix {
                rows: self.cols,
                cols: self.rows,
                data: Data::Float(vec![C64::new(0.0, 0.0); self.rows * self.cols]),
                tolerance: self.tolerance,
            },
        };
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        if self.is_exact() && rhs.is_exact() {
            let mut out = Self::zeros_exact(self.rows, rhs.cols);
            for i in 0..self.rows {
                for j in 0..rhs.cols {
                    let mut acc = GaussianRational::zero();
                    for k in 0..self.cols {
                        acc += &(&self.get(i, k) * &rhs.get(k, j));
                    }
                    out.set(i, j, acc);
                }
            }
            out
        } else {
            let tol = self.tolerance.min(rhs.tolerance);
            let mut rows = vec![vec![C64::new(0.0, 0.0); rhs.cols]; self.rows];
            for (i, row) in rows.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    for k in 0..self.cols {
                        *cell += self.get_c64(i, k) * rhs.get_c64(k, j);
                    }
                }
            }
            ComplexMatrix::from_rows_f64(rows, tol)
        }
    }

    /// Apply to a complex vector.
    pub fn apply_c64(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "apply dimension mismatch");
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get_c64(i, j) * v[j])
                    .sum::<C64>()
            })
            .collect()
    }

    pub fn apply_exact(&self, v: &[GaussianRational]) -> Vec<GaussianRational> {
        assert_eq!(v.len(), self.cols, "apply dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = GaussianRational::zero();
                for j in 0..self.cols {
                    acc += &(&self.get(i, j) * &v[j]);
                }
                acc
            })
            .collect()
    }

    /// Column-reduce in place (returns pivot column indices). Exact mode.
    fn rref_exact(entries: &mut [Vec<GaussianRational>]) -> Vec<usize> {
        let rows = entries.len();
        let cols = entries.first().map(|r| r.len()).unwrap_or(0);
        let mut pivots = Vec::new();
        let mut r = 0;
        for j in 0..cols {
            if r >= rows {
                break;
            }
            // First nonzero entry in column j at or below row r.
            let Some(p) = (r..rows).find(|&i| !entries[i][j].is_zero()) else {
                continue;
            };
            entries.swap(r, p);
            let inv = entries[r][j].inv().expect("pivot is nonzero");
            for x in entries[r].iter_mut() {
                *x = &*x * &inv;
            }
            for i in 0..rows {
                if i != r && !entries[i][j].is_zero() {
                    let f = entries[i][j].clone();
                    for k in 0..cols {
                        let d = &entries[r][k] * &f;
                        entries[i][k] -= &d;
                    }
                }
            }
            pivots.push(j);
            r += 1;
        }
        pivots
    }

    fn rref_f64(entries: &mut [Vec<C64>], tol: f64) -> Vec<usize> {
        let rows = entries.len();
        let cols = entries.first().map(|r| r.len()).unwrap_or(0);
        let mut pivots = Vec::new();
        let mut r = 0;
        for j in 0..cols {
            if r >= rows {
                break;
            }
            let (p, mag) = (r..rows)
                .map(|i| (i, entries[i][j].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if mag <= tol {
                continue;
            }
            entries.swap(r, p);
            let inv = 1.0 / entries[r][j];
            for x in entries[r].iter_mut() {
                *x *= inv;
            }
            for i in 0..rows {
                if i != r {
                    let f = entries[i][j];
                    if f.norm() > 0.0 {
                        for k in 0..cols {
                            let d = entries[r][k] * f;
                            entries[i][k] -= d;
                        }
                    }
                }
            }
            pivots.push(j);
            r += 1;
        }
        pivots
    }

    fn rows_exact(&self) -> Vec<Vec<GaussianRational>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect()
    }

    fn rows_c64(&self) -> Vec<Vec<C64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get_c64(i, j)).collect())
            .collect()
    }

    /// Rank over ℂ (exact) or numerical rank at the matrix tolerance.
    pub fn rank(&self) -> usize {
        match &self.data {
            Data::Exact(_) => {
                let mut rows = self.rows_exact();
                Self::rref_exact(&mut rows).len()
            }
            Data::Float(_) => {
                let mut rows = self.rows_c64();
                Self::rref_f64(&mut rows, self.tolerance).len()
            }
        }
    }

    /// Rank of the matrix viewed over ℝ under the realification
    /// convention (twice the complex rank for a genuinely complex-linear
    /// map; computed directly on the realified matrix).
    pub fn real_rank(&self) -> usize {
        match &self.data {
            Data::Exact(_) => {
                let mut rows = self.realify_exact_rows();
                Self::rref_exact(&mut rows).len()
            }
            Data::Float(_) => self.realify().rank(self.tolerance),
        }
    }

    fn realify_exact_rows(&self) -> Vec<Vec<GaussianRational>> {
        let mut out = vec![vec![GaussianRational::zero(); 2 * self.cols]; 2 * self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self.get(i, j);
                let a = GaussianRational::from_rat(z.re().clone());
                let b = GaussianRational::from_rat(z.im().clone());
                out[2 * i][2 * j] = a.clone();
                out[2 * i][2 * j + 1] = -&b;
                out[2 * i + 1][2 * j] = b;
                out[2 * i + 1][2 * j + 1] = a;
            }
        }
        out
    }

    /// Realified matrix (2·rows × 2·cols, interleaved convention) as f64.
    pub fn realify(&self) -> RealMatrix {
        let mut out = RealMatrix::zeros(2 * self.rows, 2 * self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let z = self.get_c64(i, j);
                out.set(2 * i, 2 * j, z.re);
                out.set(2 * i, 2 * j + 1, -z.im);
                out.set(2 * i + 1, 2 * j, z.im);
                out.set(2 * i + 1, 2 * j + 1, z.re);
            }
        }
        out
    }

    /// Basis of the kernel (null space of `self` acting on column
    /// vectors), computed with deterministic pivoting.
    pub fn kernel_basis(&self) -> Vec<Vec<GaussianRational>> {
        match &self.data {
            Data::Exact(_) => {
                let mut rows = self.rows_exact();
                let pivots = Self::rref_exact(&mut rows);
                let mut basis = Vec::new();
                let pivot_set: Vec<usize> = pivots.clone();
                for free in 0..self.cols {
                    if pivot_set.contains(&free) {
                        continue;
                    }
                    let mut v = vec![GaussianRational::zero(); self.cols];
                    v[free] = GaussianRational::one();
                    for (r, &pj) in pivot_set.iter().enumerate() {
                        v[pj] = -&rows[r][free];
                    }
                    basis.push(v);
                }
                basis
            }
            Data::Float(_) => self
                .kernel_basis_c64()
                .into_iter()
                .map(|v| {
                    v.into_iter()
                        .map(|z| GaussianRational::from_f64_exact(z.re, z.im).unwrap())
                        .collect()
                })
                .collect(),
        }
    }

    /// Float kernel basis.
    pub fn kernel_basis_c64(&self) -> Vec<Vec<C64>> {
        let mut rows = self.rows_c64();
        let pivots = Self::rref_f64(&mut rows, self.tolerance);
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![C64::new(0.0, 0.0); self.cols];
            v[free] = C64::new(1.0, 0.0);
            for (r, &pj) in pivots.iter().enumerate() {
                v[pj] = -rows[r][free];
            }
            basis.push(v);
        }
        basis
    }

    /// Deterministic complement extension: returns the indices of columns
    /// of `candidates` that extend the column span of `inside`, scanning
    /// candidates lowest index first.
    pub fn complement_column_indices(
        inside: &ComplexMatrix,
        candidates: &ComplexMatrix,
    ) -> Vec<usize> {
        assert_eq!(inside.rows, candidates.rows, "ambient dimension mismatch");
        let exact = inside.is_exact() && candidates.is_exact();
        let tol = inside.tolerance.min(candidates.tolerance);
        let base_rank = inside.rank();
        let mut chosen: Vec<usize> = Vec::new();
        for j in 0..candidates.cols {
            let mut cols: Vec<Vec<GaussianRational>> = (0..inside.cols)
                .map(|c| (0..inside.rows).map(|i| inside.get(i, c)).collect())
                .collect();
            for &cj in chosen.iter().chain(std::iter::once(&j)) {
                cols.push(
                    (0..candidates.rows)
                        .map(|i| candidates.get(i, cj))
                        .collect(),
                );
            }
            let stacked = ComplexMatrix::from_cols_exact(cols, inside.rows);
            let stacked = if exact {
                stacked
            } else {
                stacked.to_float(tol)
            };
            if stacked.rank() == base_rank + chosen.len() + 1 {
                chosen.push(j);
            }
        }
        chosen
    }

    /// Exact determinant (square, exact mode).
    pub fn det_exact(&self) -> Result<GaussianRational, AlgebraError> {
        if self.rows != self.cols {
            return Err(AlgebraError::DimensionMismatch(format!(
                "determinant of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let mut rows = self.rows_exact();
        let n = self.rows;
        let mut det = GaussianRational::one();
        for j in 0..n {
            let Some(p) = (j..n).find(|&i| !rows[i][j].is_zero()) else {
                return Ok(GaussianRational::zero());
            };
            if p != j {
                rows.swap(j, p);
                det = -det;
            }
            det *= &rows[j][j].clone();
            let inv = rows[j][j].inv().unwrap();
            for i in (j + 1)..n {
                if !rows[i][j].is_zero() {
                    let f = &rows[i][j] * &inv;
                    for k in j..n {
                        let d = &rows[j][k] * &f;
                        rows[i][k] -= &d;
                    }
                }
            }
        }
        Ok(det)
    }

    /// Determinant via LU with partial pivoting (any mode, as f64).
    pub fn det_c64(&self) -> Result<C64, AlgebraError> {
        if self.rows != self.cols {
            return Err(AlgebraError::DimensionMismatch(format!(
                "determinant of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let mut rows = self.rows_c64();
        let n = self.rows;
        let mut det = C64::new(1.0, 0.0);
        for j in 0..n {
            let (p, mag) = (j..n)
                .map(|i| (i, rows[i][j].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if mag == 0.0 {
                return Ok(C64::new(0.0, 0.0));
            }
            if p != j {
                rows.swap(j, p);
                det = -det;
            }
            det *= rows[j][j];
            let pivot = rows[j][j];
            for i in (j + 1)..n {
                let f = rows[i][j] / pivot;
                if f.norm() > 0.0 {
                    for k in j..n {
                        let d = rows[j][k] * f;
                        rows[i][k] -= d;
                    }
                }
            }
        }
        Ok(det)
    }

    /// Solve `self · x = b` exactly for a (possibly non-square) matrix
    /// with independent columns; `None` when the system is inconsistent.
    pub fn solve_columns_exact(&self, b: &[GaussianRational]) -> Option<Vec<GaussianRational>> {
        assert_eq!(b.len(), self.rows, "rhs length mismatch");
        let mut aug = self.rows_exact();
        for (i, row) in aug.iter_mut().enumerate() {
            row.push(b[i].clone());
        }
        let pivots = Self::rref_exact(&mut aug);
        if pivots.iter().any(|&p| p == self.cols) {
            return None; // pivot in the rhs column: inconsistent
        }
        let mut x = vec![GaussianRational::zero(); self.cols];
        for (r, &pj) in pivots.iter().enumerate() {
            x[pj] = aug[r][self.cols].clone();
        }
        // With dependent columns the solution is the one with free
        // variables set to zero; verify it reproduces b.
        let recon = self.apply_exact(&x);
        if recon != b {
            return None;
        }
        Some(x)
    }

    /// Solve `self · x = b` exactly (square, exact, invertible).
    pub fn solve_exact(
        &self,
        b: &[GaussianRational],
    ) -> Result<Vec<GaussianRational>, AlgebraError> {
        if self.rows != self.cols || b.len() != self.rows {
            return Err(AlgebraError::DimensionMismatch(
                "solve expects a square system".into(),
            ));
        }
        let n = self.rows;
        let mut aug = self.rows_exact();
        for (i, row) in aug.iter_mut().enumerate() {
            row.push(b[i].clone());
        }
        let pivots = Self::rref_exact(&mut aug);
        if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
            return Err(AlgebraError::Singular);
        }
        Ok((0..n).map(|i| aug[i][n].clone()).collect())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "ComplexMatrix {}x{} ({:?})",
            self.rows,
            self.cols,
            self.mode()
        )?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                let z = self.get_c64(i, j);
                write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}
