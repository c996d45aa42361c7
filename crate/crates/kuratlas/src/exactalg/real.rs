//! Real matrices, subspaces of ℝ^n, and symmetric-form classification.
//!
//! Floating verdicts record their margin: the smallest eigenvalue or pivot
//! magnitude that witnessed the decision.

use super::matrix::ComplexMatrix;
use super::scalar::C64;
use super::AlgebraError;

/// Dense real matrix (f64), row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix rows");
        RealMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_cols(cols: &[Vec<f64>], ambient: usize) -> Self {
        let mut m = Self::zeros(ambient, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), ambient, "column length mismatch");
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> RealMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.set(i, j, out.get(i, j) + a * rhs.get(k, j));
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "apply dimension mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Numerical rank by row echelon with partial pivoting; entries whose
    /// magnitude never exceeds `tol` during elimination do not count.
    pub fn rank(&self, tol: f64) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        let mut row = 0;
        for j in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let (p, mag) = (row..m.rows)
                .map(|i| (i, m.get(i, j).abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if mag <= tol {
                continue;
            }
            m.swap_rows(row, p);
            let pivot = m.get(row, j);
            for i in (row + 1)..m.rows {
                let f = m.get(i, j) / pivot;
                if f != 0.0 {
                    for k in j..m.cols {
                        m.set(i, k, m.get(i, k) - f * m.get(row, k));
                    }
                }
            }
            rank += 1;
            row += 1;
        }
        rank
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            let t = self.get(a, j);
            self.set(a, j, self.get(b, j));
            self.set(b, j, t);
        }
    }

    /// Null-space basis with deterministic pivoting (lowest free column
    /// first).
    pub fn kernel_basis(&self, tol: f64) -> Vec<Vec<f64>> {
        let mut m = self.clone();
        let mut pivots: Vec<usize> = Vec::new();
        let mut row = 0;
        for j in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let (p, mag) = (row..m.rows)
                .map(|i| (i, m.get(i, j).abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if mag <= tol {
                continue;
            }
            m.swap_rows(row, p);
            let pivot = m.get(row, j);
            for k in 0..m.cols {
                m.set(row, k, m.get(row, k) / pivot);
            }
            for i in 0..m.rows {
                if i != row {
                    let f = m.get(i, j);
                    if f != 0.0 {
                        for k in 0..m.cols {
                            m.set(i, k, m.get(i, k) - f * m.get(row, k));
                        }
                    }
                }
            }
            pivots.push(j);
            row += 1;
        }
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![0.0; self.cols];
            v[free] = 1.0;
            for (r, &pj) in pivots.iter().enumerate() {
                v[pj] = -m.get(r, free);
            }
            basis.push(v);
        }
        basis
    }

    /// Least-squares/minimum-norm solve via normal equations; adequate for
    /// the small, well-conditioned systems in this crate.
    pub fn solve_least_squares(&self, b: &[f64], tol: f64) -> Result<Vec<f64>, AlgebraError> {
        let at = self.transpose();
        let ata = at.matmul(self);
        let atb = at.apply(b);
        ata.solve_square(&atb, tol)
    }

    /// Gaussian elimination solve for a square system.
    pub fn solve_square(&self, b: &[f64], tol: f64) -> Result<Vec<f64>, AlgebraError> {
        if self.rows != self.cols || b.len() != self.rows {
            return Err(AlgebraError::DimensionMismatch(
                "solve expects a square system".into(),
            ));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut rhs = b.to_vec();
        for j in 0..n {
            let (p, mag) = (j..n)
                .map(|i| (i, m.get(i, j).abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if mag <= tol {
                return Err(AlgebraError::Singular);
            }
            m.swap_rows(j, p);
            rhs.swap(j, p);
            for i in (j + 1)..n {
                let f = m.get(i, j) / m.get(j, j);
                if f != 0.0 {
                    for k in j..n {
                        m.set(i, k, m.get(i, k) - f * m.get(j, k));
                    }
                    rhs[i] -= f * rhs[j];
                }
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for k in (i + 1)..n {
                acc -= m.get(i, k) * x[k];
            }
            x[i] = acc / m.get(i, i);
        }
        Ok(x)
    }

    pub fn det(&self) -> Result<f64, AlgebraError> {
        if self.rows != self.cols {
            return Err(AlgebraError::DimensionMismatch(
                "determinant of non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = 1.0;
        for j in 0..n {
            let (p, mag) = (j..n)
                .map(|i| (i, m.get(i, j).abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if mag == 0.0 {
                return Ok(0.0);
            }
            if p != j {
                m.swap_rows(j, p);
                det = -det;
            }
            det *= m.get(j, j);
            for i in (j + 1)..n {
                let f = m.get(i, j) / m.get(j, j);
                if f != 0.0 {
                    for k in j..n {
                        m.set(i, k, m.get(i, k) - f * m.get(j, k));
                    }
                }
            }
        }
        Ok(det)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
    /// returned in ascending order.
    pub fn symmetric_eigenvalues(&self, tol: f64) -> Result<Vec<f64>, AlgebraError> {
        if !self.is_symmetric(tol.max(1e-12)) {
            return Err(AlgebraError::NotSymmetric);
        }
        let n = self.rows;
        let mut a = self.clone();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += a.get(i, j).powi(2);
                }
            }
            if off.sqrt() < 1e-14 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let t = if aqq == app {
                        1.0
                    } else {
                        let tau = (aqq - app) / (2.0 * apq);
                        let s = if tau >= 0.0 { 1.0 } else { -1.0 };
                        s / (tau.abs() + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // Apply rotation on both sides.
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        let mut eigs: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
        eigs.sort_by(|x, y| x.total_cmp(y));
        Ok(eigs)
    }
}

/// Outcome of classifying a real symmetric form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Definiteness {
    Positive,
    Negative,
    Indefinite,
    Degenerate,
}

impl Definiteness {
    /// The classification of `−S` given that of nondegenerate `S`.
    pub fn negated(self) -> Definiteness {
        match self {
            Definiteness::Positive => Definiteness::Negative,
            Definiteness::Negative => Definiteness::Positive,
            other => other,
        }
    }
}

/// Classification plus the margin that witnessed it (smallest |eigenvalue|
/// in float mode, smallest |pivot| as f64 in exact mode).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefinitenessReport {
    pub class: Definiteness,
    pub margin: f64,
}

/// Classify a symmetric real matrix given as f64 data: eigenvalue signs at
/// tolerance `tol`; degenerate if any |λ| ≤ tol.
pub fn real_definiteness_f64(s: &RealMatrix, tol: f64) -> Result<DefinitenessReport, AlgebraError> {
    if s.rows() != s.cols() {
        return Err(AlgebraError::NotSymmetric);
    }
    if s.rows() == 0 {
        // The empty form is vacuously positive and negative; report
        // positive with infinite margin — callers treat 0-dim as pass.
        return Ok(DefinitenessReport {
            class: Definiteness::Positive,
            margin: f64::INFINITY,
        });
    }
    let eigs = s.symmetric_eigenvalues(tol)?;
    let margin = eigs.iter().map(|e| e.abs()).fold(f64::INFINITY, f64::min);
    let class = if eigs.iter().any(|e| e.abs() <= tol) {
        Definiteness::Degenerate
    } else if eigs.iter().all(|&e| e > 0.0) {
        Definiteness::Positive
    } else if eigs.iter().all(|&e| e < 0.0) {
        Definiteness::Negative
    } else {
        Definiteness::Indefinite
    };
    Ok(DefinitenessReport { class, margin })
}

/// Classify an exact symmetric rational matrix (entries must be real) by
/// exact congruence diagonalization: the signs of the principal pivots
/// give the inertia.
pub fn real_definiteness_exact(s: &ComplexMatrix) -> Result<DefinitenessReport, AlgebraError> {
    use num_traits::{Signed, Zero};
    let n = s.rows();
    if n != s.cols() {
        return Err(AlgebraError::NotSymmetric);
    }
    for i in 0..n {
        for j in 0..n {
            let z = s.get(i, j);
            if !z.is_real() || s.get(j, i) != z {
                return Err(AlgebraError::NotSymmetric);
            }
        }
    }
    if n == 0 {
        return Ok(DefinitenessReport {
            class: Definiteness::Positive,
            margin: f64::INFINITY,
        });
    }
    let mut a: Vec<Vec<super::scalar::Rat>> = (0..n)
        .map(|i| (0..n).map(|j| s.get(i, j).re().clone()).collect())
        .collect();
    let mut pos = 0usize;
    let mut neg = 0usize;
    let mut zero = 0usize;
    let mut margin = f64::INFINITY;
    let mut active: Vec<usize> = (0..n).collect();
    while let Some(&first) = active.first() {
        // Prefer a nonzero diagonal pivot; otherwise use the symmetric
        // mixing trick a_kk=0, a_kl≠0 ⇒ (e_k+e_l) has nonzero square.
        let pivot_idx = active
            .iter()
            .position(|&k| !a[k][k].is_zero())
            .map(|p| active[p]);
        let k = match pivot_idx {
            Some(k) => k,
            None => {
                // All active diagonal entries are zero.
                let mut mixed = None;
                'outer: for (ai, &k) in active.iter().enumerate() {
                    for &l in &active[ai + 1..] {
                        if !a[k][l].is_zero() {
                            mixed = Some((k, l));
                            break 'outer;
                        }
                    }
                }
                let Some((k, l)) = mixed else {
                    // Entire remaining block is zero.
                    zero += active.len();
                    break;
                };
                // Replace e_k by e_k + e_l (congruence): row/col update.
                let row_l: Vec<super::scalar::Rat> = a[l].clone();
                for (j, rl) in row_l.iter().enumerate() {
                    a[k][j] += rl;
                }
                for i in 0..n {
                    let v = a[i][l].clone();
                    a[i][k] += &v;
                }
                let _ = first;
                k
            }
        };
        let d = a[k][k].clone();
        debug_assert!(!d.is_zero());
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        margin = margin.min(super::scalar::rat_to_f64(&d).abs());
        // Eliminate row/column k against the remaining active indices.
        let others: Vec<usize> = active.iter().copied().filter(|&x| x != k).collect();
        for &i in &others {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &d;
            for &j in &others {
                let delta = &f * &a[k][j];
                a[i][j] -= &delta;
            }
            a[i][k] = super::scalar::Rat::zero();
            a[k][i] = super::scalar::Rat::zero();
        }
        active = others;
    }
    let class = if zero > 0 {
        Definiteness::Degenerate
    } else if neg == 0 {
        Definiteness::Positive
    } else if pos == 0 {
        Definiteness::Negative
    } else {
        Definiteness::Indefinite
    };
    if zero > 0 {
        margin = 0.0;
    }
    Ok(DefinitenessReport { class, margin })
}

/// Mode-dispatching classification of a symmetric matrix stored as a
/// [`ComplexMatrix`] with real entries.
pub fn real_definiteness(s: &ComplexMatrix, tol: f64) -> Result<DefinitenessReport, AlgebraError> {
    if s.is_exact() {
        real_definiteness_exact(s)
    } else {
        let n = s.rows();
        let mut m = RealMatrix::zeros(n, s.cols());
        for i in 0..n {
            for j in 0..s.cols() {
                let z = s.get_c64(i, j);
                if z.im.abs() > tol {
                    return Err(AlgebraError::NotSymmetric);
                }
                m.set(i, j, z.re);
            }
        }
        real_definiteness_f64(&m, tol)
    }
}

/// Realify a complex vector under the interleaved convention.
pub fn realify_vector(v: &[C64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * v.len());
    for z in v {
        out.push(z.re);
        out.push(z.im);
    }
    out
}

/// Inverse of [`realify_vector`].
pub fn unrealify_vector(v: &[f64]) -> Vec<C64> {
    assert!(v.len() % 2 == 0, "realified vector has even length");
    v.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
}

/// Realify a complex matrix (f64 output); see the module docs of
/// [`crate::exactalg`] for the convention.
pub fn realify_matrix(m: &ComplexMatrix) -> RealMatrix {
    m.realify()
}

/// The real symmetric 2n×2n Gram matrix of `Re Q` where `Q` is the
/// complex-bilinear diagonal form with entries `q`, expressed in realified
/// coordinates: `Re Q(u, w) = uᵀ G w`.
pub fn re_q_gram(q: &[C64]) -> RealMatrix {
    let n = q.len();
    let mut g = RealMatrix::zeros(2 * n, 2 * n);
    for (j, qj) in q.iter().enumerate() {
        // Re(q (a+bi)(c+di)) = Re q (ac − bd) − Im q (ad + bc)
        g.set(2 * j, 2 * j, qj.re);
        g.set(2 * j, 2 * j + 1, -qj.im);
        g.set(2 * j + 1, 2 * j, -qj.im);
        g.set(2 * j + 1, 2 * j + 1, -qj.re);
    }
    g
}

/// A real vector subspace of ℝ^ambient given by an explicit basis, checked
/// linearly independent at construction tolerance.
#[derive(Clone, Debug)]
pub struct RealSubspace {
    ambient: usize,
    basis: Vec<Vec<f64>>,
    tol: f64,
}

impl RealSubspace {
    pub fn new(ambient: usize, basis: Vec<Vec<f64>>, tol: f64) -> Result<Self, AlgebraError> {
        for b in &basis {
            if b.len() != ambient {
                return Err(AlgebraError::DimensionMismatch(
                    "basis vector length != ambient dimension".into(),
                ));
            }
        }
        let m = RealMatrix::from_cols(&basis, ambient);
        if m.rank(tol) != basis.len() {
            return Err(AlgebraError::DependentBasis);
        }
        Ok(RealSubspace {
            ambient,
            basis,
            tol,
        })
    }

    pub fn zero(ambient: usize, tol: f64) -> Self {
        RealSubspace {
            ambient,
            basis: Vec::new(),
            tol,
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn basis_matrix(&self) -> RealMatrix {
        RealMatrix::from_cols(&self.basis, self.ambient)
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        if self.basis.is_empty() {
            return v.iter().all(|x| x.abs() <= self.tol);
        }
        let m = self.basis_matrix();
        match m.solve_least_squares(v, self.tol * 1e-3) {
            Ok(c) => {
                let recon = m.apply(&c);
                recon
                    .iter()
                    .zip(v)
                    .all(|(a, b)| (a - b).abs() <= self.tol.max(1e-12) * 10.0)
            }
            Err(_) => false,
        }
    }

    /// Subspace spanned jointly with `other`.
    pub fn sum(&self, other: &RealSubspace) -> RealSubspace {
        assert_eq!(self.ambient, other.ambient);
        let mut basis = self.basis.clone();
        for v in &other.basis {
            let m = RealMatrix::from_cols(&basis, self.ambient);
            let mut cols = basis.clone();
            cols.push(v.clone());
            let m2 = RealMatrix::from_cols(&cols, self.ambient);
            if m2.rank(self.tol) > m.rank(self.tol) {
                basis.push(v.clone());
            }
        }
        RealSubspace {
            ambient: self.ambient,
            basis,
            tol: self.tol,
        }
    }

    /// Intersection via the kernel of the stacked basis matrix `[A | −B]`.
    pub fn intersection(&self, other: &RealSubspace) -> RealSubspace {
        assert_eq!(self.ambient, other.ambient);
        if self.basis.is_empty() || other.basis.is_empty() {
            return RealSubspace::zero(self.ambient, self.tol);
        }
        let a = self.basis_matrix();
        let cols = self.basis.len() + other.basis.len();
        let mut stacked = RealMatrix::zeros(self.ambient, cols);
        for (j, b) in self.basis.iter().enumerate() {
            for (i, &v) in b.iter().enumerate() {
                stacked.set(i, j, v);
            }
        }
        for (j, b) in other.basis.iter().enumerate() {
            for (i, &v) in b.iter().enumerate() {
                stacked.set(i, self.basis.len() + j, -v);
            }
        }
        let ker = stacked.kernel_basis(self.tol);
        let mut vecs = Vec::new();
        for k in &ker {
            let x = &k[..self.basis.len()];
            vecs.push(a.apply(x));
        }
        // Reduce to an independent set.
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in vecs {
            let mut cols = basis.clone();
            cols.push(v.clone());
            if RealMatrix::from_cols(&cols, self.ambient).rank(self.tol) == cols.len() {
                basis.push(v);
            }
        }
        RealSubspace {
            ambient: self.ambient,
            basis,
            tol: self.tol,
        }
    }

    /// Orthogonal complement under the standard inner product, basis from
    /// the kernel of the transposed basis matrix (deterministic pivoting).
    pub fn orthogonal_complement(&self) -> RealSubspace {
        if self.basis.is_empty() {
            let basis = (0..self.ambient)
                .map(|i| {
                    let mut v = vec![0.0; self.ambient];
                    v[i] = 1.0;
                    v
                })
                .collect();
            return RealSubspace {
                ambient: self.ambient,
                basis,
                tol: self.tol,
            };
        }
        let bt = self.basis_matrix().transpose();
        let basis = bt.kernel_basis(self.tol);
        RealSubspace {
            ambient: self.ambient,
            basis,
            tol: self.tol,
        }
    }

    /// True when the two subspaces have the same span.
    pub fn same_span(&self, other: &RealSubspace) -> bool {
        self.dim() == other.dim() && self.sum(other).dim() == self.dim()
    }
}

#[cfg(test)]
mod tests {
    use super::super::scalar::GaussianRational;
    use super::*;

    #[test]
    fn diag_definiteness() {
        let neg = RealMatrix::from_rows(vec![vec![-1.0, 0.0], vec![0.0, -1.0]]);
        assert_eq!(
            real_definiteness_f64(&neg, 1e-9).unwrap().class,
            Definiteness::Negative
        );
        let ind = RealMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, -1.0]]);
        assert_eq!(
            real_definiteness_f64(&ind, 1e-9).unwrap().class,
            Definiteness::Indefinite
        );
    }

    #[test]
    fn off_diagonal_positive_case() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3 (characteristic polynomial
        // λ² − 4λ + 3), so it is positive definite with margin 1.
        let m = RealMatrix::from_rows(vec![vec![2.0, 1.0], vec![1.0, 2.0]]);
        let rep = real_definiteness_f64(&m, 1e-9).unwrap();
        assert_eq!(rep.class, Definiteness::Positive);
        assert!((rep.margin - 1.0).abs() < 1e-9);
        let eigs = m.symmetric_eigenvalues(1e-9).unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-10 && (eigs[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn exact_definiteness_matches_float() {
        let gr = GaussianRational::from_int;
        let m = ComplexMatrix::from_rows_exact(vec![vec![gr(2), gr(1)], vec![gr(1), gr(2)]]);
        let rep = real_definiteness_exact(&m).unwrap();
        assert_eq!(rep.class, Definiteness::Positive);
        let deg = ComplexMatrix::from_rows_exact(vec![vec![gr(1), gr(1)], vec![gr(1), gr(1)]]);
        assert_eq!(
            real_definiteness_exact(&deg).unwrap().class,
            Definiteness::Degenerate
        );
        // Zero diagonal but nondegenerate: hyperbolic plane, indefinite.
        let hyp = ComplexMatrix::from_rows_exact(vec![vec![gr(0), gr(1)], vec![gr(1), gr(0)]]);
        assert_eq!(
            real_definiteness_exact(&hyp).unwrap().class,
            Definiteness::Indefinite
        );
    }

    #[test]
    fn subspace_operations() {
        let tol = 1e-9;
        let e1 = vec![1.0, 0.0, 0.0];
        let e2 = vec![0.0, 1.0, 0.0];
        let e3 = vec![0.0, 0.0, 1.0];
        let xy = RealSubspace::new(3, vec![e1.clone(), e2.clone()], tol).unwrap();
        let yz = RealSubspace::new(3, vec![e2.clone(), e3.clone()], tol).unwrap();
        let inter = xy.intersection(&yz);
        assert_eq!(inter.dim(), 1);
        assert!(inter.contains(&e2));
        assert_eq!(xy.sum(&yz).dim(), 3);
        let comp = xy.orthogonal_complement();
        assert_eq!(comp.dim(), 1);
        assert!(comp.contains(&e3));
        assert!(RealSubspace::new(3, vec![e1.clone(), e1.clone()], tol).is_err());
    }

    #[test]
    fn re_q_gram_of_unit_q() {
        // q = 1: Re Q((a,b),(a,b)) = a² − b².
        let g = re_q_gram(&[C64::new(1.0, 0.0)]);
        let v = vec![3.0, 2.0];
        let gv = g.apply(&v);
        let val: f64 = v.iter().zip(&gv).map(|(a, b)| a * b).sum();
        assert!((val - 5.0).abs() < 1e-12);
    }
}
