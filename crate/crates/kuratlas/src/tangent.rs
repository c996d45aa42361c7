//! Pointwise tangent-complex analysis at zeros of the section.
//!
//! At a zero `v` the tangent complex of the model is the three-term
//! complex `T_vV → E|_v → F|_v` with maps `ds|_v` and `t|_v`. This module
//! computes its cohomology exactly: `H⁰ = Ker ds|_v`, `H¹ = Ker t|_v /
//! Im ds|_v` (with an explicit complement basis, deterministic pivoting),
//! the induced complex quadratic form `Q̃_v` on `H¹`, and the virtual
//! dimension bookkeeping. The relative variant replaces `T_vV` by the
//! kernel of `dτ|_v` for a polynomial submersion `τ`.

use thiserror::Error;

use crate::darboux::{DarbouxError, DarbouxModel};
use crate::exactalg::{AlgebraError, ComplexMatrix, GaussianRational, Polynomial};

#[derive(Debug, Error)]
pub enum TangentError {
    #[error("point is not a zero of the section")]
    NotAZero,
    #[error("dτ is not surjective at the point")]
    TauNotSubmersive,
    #[error("quadratic form is not orthogonal between Im ds and Ker t; the model is not symplectic at this point")]
    DescentObstructed,
    #[error(transparent)]
    Darboux(#[from] DarbouxError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A polynomial submersion `τ : V → ℂ^k` making the analysis relative.
#[derive(Clone, Debug)]
pub struct RelativeContext {
    tau: Vec<Polynomial>,
    base_dim: usize,
}

impl RelativeContext {
    pub fn new(tau: Vec<Polynomial>) -> Self {
        let base_dim = tau.len();
        RelativeContext { tau, base_dim }
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn tau(&self) -> &[Polynomial] {
        &self.tau
    }

    /// `dτ|_v` as a k×m exact matrix.
    pub fn dtau_at(&self, v: &[GaussianRational]) -> Result<ComplexMatrix, TangentError> {
        let m = v.len();
        let mut rows = Vec::with_capacity(self.base_dim);
        for t in &self.tau {
            let mut row = Vec::with_capacity(m);
            for i in 0..m {
                row.push(t.partial(i)?.eval(v)?);
            }
            rows.push(row);
        }
        Ok(ComplexMatrix::from_rows_exact(rows))
    }
}

/// Pointwise tangent-complex data at a verified zero.
#[derive(Clone, Debug)]
pub struct TangentReport {
    pub point: Vec<GaussianRational>,
    /// `ds|_v`: n×m.
    pub ds_matrix: ComplexMatrix,
    /// `t|_v`: m×n.
    pub t_matrix_at: ComplexMatrix,
    /// Basis of `H⁰ = Ker ds|_v` (∩ `Ker dτ|_v` in relative mode), in ℂ^m.
    pub h0_basis: Vec<Vec<GaussianRational>>,
    /// Complement basis for `H¹ = Ker t|_v / Im ds|_v`, vectors in `E|_v`.
    pub h1_basis: Vec<Vec<GaussianRational>>,
    /// Gram matrix of `Q̃_v` on `h1_basis` (complex symmetric, exact).
    pub qtilde: ComplexMatrix,
    /// `q_j(v)` diagonal of the ambient form.
    pub q_at_point: Vec<GaussianRational>,
    /// `2m − n`; equals `dim H⁰ − dim H¹ + dim H²` with `dim H² = dim H⁰`.
    pub vdim: i64,
}

impl TangentReport {
    pub fn h0_dim(&self) -> usize {
        self.h0_basis.len()
    }

    pub fn h1_dim(&self) -> usize {
        self.h1_basis.len()
    }

    /// `dim H²` is forced to equal `dim H⁰` by the duality coming from the
    /// −2-shifted form; the Darboux complex has no lower terms.
    pub fn h2_dim(&self) -> usize {
        self.h0_basis.len()
    }

    /// Whether `ds|_v = 0` and `t|_v = 0` (the chart is minimal at v).
    pub fn is_minimal_point(&self) -> bool {
        self.ds_matrix.rank() == 0 && self.t_matrix_at.rank() == 0
    }

    /// Express an ambient vector of `E|_v` in `(h1_basis | Im ds)`
    /// coordinates and return the `h1` class coordinates; fails when the
    /// vector is not in `Ker t|_v`'s span of those columns.
    pub fn class_coordinates(
        &self,
        vector: &[GaussianRational],
    ) -> Result<Vec<GaussianRational>, TangentError> {
        let n = self.ds_matrix.rows();
        if vector.len() != n {
            return Err(TangentError::Algebra(AlgebraError::ArityMismatch {
                expected: n,
                got: vector.len(),
            }));
        }
        let k = self.h1_basis.len();
        let im_ds = self.image_ds_basis();
        let mut cols = self.h1_basis.clone();
        cols.extend(im_ds);
        if cols.is_empty() {
            return Ok(Vec::new());
        }
        let mat = ComplexMatrix::from_cols_exact(cols, n);
        let coeffs = mat
            .solve_columns_exact(vector)
            .ok_or(TangentError::DescentObstructed)?;
        Ok(coeffs[..k].to_vec())
    }

    fn image_ds_basis(&self) -> Vec<Vec<GaussianRational>> {
        let n = self.ds_matrix.rows();
        let m = self.ds_matrix.cols();
        let cols: Vec<Vec<GaussianRational>> = (0..m)
            .map(|i| (0..n).map(|j| self.ds_matrix.get(j, i)).collect())
            .collect();
        // Reduce to an independent spanning set, lowest column first.
        let empty = ComplexMatrix::zeros_exact(n, 0);
        let cand = ComplexMatrix::from_cols_exact(cols.clone(), n);
        ComplexMatrix::complement_column_indices(&empty, &cand)
            .into_iter()
            .map(|i| cols[i].clone())
            .collect()
    }
}

/// True iff `s_j(v) = 0` exactly for all j.
pub fn verify_zero(model: &DarbouxModel, v: &[GaussianRational]) -> Result<bool, TangentError> {
    if v.len() != model.m() {
        return Err(TangentError::Algebra(AlgebraError::ArityMismatch {
            expected: model.m(),
            got: v.len(),
        }));
    }
    for s in model.s() {
        if !s.eval(v)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `ds|_v` as an n×m exact matrix.
pub fn ds_at(model: &DarbouxModel, v: &[GaussianRational]) -> Result<ComplexMatrix, TangentError> {
    let mut rows = Vec::with_capacity(model.n());
    for s in model.s() {
        let mut row = Vec::with_capacity(model.m());
        for i in 0..model.m() {
            row.push(s.partial(i)?.eval(v)?);
        }
        rows.push(row);
    }
    Ok(ComplexMatrix::from_rows_exact(rows))
}

/// `t|_v` as an m×n exact matrix (valid at zeros of s).
pub fn t_at(model: &DarbouxModel, v: &[GaussianRational]) -> Result<ComplexMatrix, TangentError> {
    let two = GaussianRational::from_int(2);
    let mut rows = Vec::with_capacity(model.m());
    for i in 0..model.m() {
        let mut row = Vec::with_capacity(model.n());
        for (qj, sj) in model.q().iter().zip(model.s()) {
            let val = &(&two * &qj.eval(v)?) * &sj.partial(i)?.eval(v)?;
            let correction = &sj.eval(v)? * &qj.partial(i)?.eval(v)?;
            row.push(&val + &correction);
        }
        rows.push(row);
    }
    Ok(ComplexMatrix::from_rows_exact(rows))
}

/// Full pointwise analysis at a zero `v`, optionally relative to `rel`.
pub fn tangent_report(
    model: &DarbouxModel,
    v: &[GaussianRational],
    rel: Option<&RelativeContext>,
) -> Result<TangentReport, TangentError> {
    if !verify_zero(model, v)? {
        return Err(TangentError::NotAZero);
    }
    let q_at_point = model.q_at(v)?;
    let ds = ds_at(model, v)?;
    let t = t_at(model, v)?;
    let m = model.m();
    let n = model.n();

    // Domain of ds in the relative case: Ker dτ|_v.
    let (h0_basis, tangent_frame): (Vec<Vec<GaussianRational>>, Vec<Vec<GaussianRational>>) =
        match rel {
            None => {
                let frame = (0..m)
                    .map(|i| {
                        let mut e = vec![GaussianRational::zero(); m];
                        e[i] = GaussianRational::one();
                        e
                    })
                    .collect();
                (ds.kernel_basis(), frame)
            }
            Some(ctx) => {
                let dtau = ctx.dtau_at(v)?;
                if dtau.rank() != ctx.base_dim {
                    return Err(TangentError::TauNotSubmersive);
                }
                let rel_tangent = dtau.kernel_basis();
                // H⁰ = Ker ds ∩ Ker dτ: kernel of the stacked matrix.
                let mut rows: Vec<Vec<GaussianRational>> = Vec::new();
                for r in 0..ds.rows() {
                    rows.push((0..m).map(|c| ds.get(r, c)).collect());
                }
                for r in 0..dtau.rows() {
                    rows.push((0..m).map(|c| dtau.get(r, c)).collect());
                }
                let stacked = ComplexMatrix::from_rows_exact(rows);
                (stacked.kernel_basis(), rel_tangent)
            }
        };

    // Im ds (restricted to the relevant tangent frame) inside E|_v.
    let im_ds_cols: Vec<Vec<GaussianRational>> =
        tangent_frame.iter().map(|w| ds.apply_exact(w)).collect();
    let im_ds = ComplexMatrix::from_cols_exact(im_ds_cols.clone(), n);

    // Ker t|_v.
    let ker_t_basis = t.kernel_basis();
    let ker_t = ComplexMatrix::from_cols_exact(ker_t_basis.clone(), n);

    // Orthogonality Q(Im ds, Ker t) = 0 — checked, not assumed.
    for w in &im_ds_cols {
        for k in &ker_t_basis {
            let mut acc = GaussianRational::zero();
            for (qv, (wj, kj)) in q_at_point.iter().zip(w.iter().zip(k)) {
                acc += &(&(qv * wj) * kj);
            }
            if !acc.is_zero() {
                return Err(TangentError::DescentObstructed);
            }
        }
    }

    // Complement basis of Im ds inside Ker t, lowest pivot first.
    let chosen = ComplexMatrix::complement_column_indices(&im_ds, &ker_t);
    let h1_basis: Vec<Vec<GaussianRational>> =
        chosen.into_iter().map(|j| ker_t_basis[j].clone()).collect();

    // Gram matrix of Q on the complement basis.
    let k = h1_basis.len();
    let mut qtilde = ComplexMatrix::zeros_exact(k, k);
    for a in 0..k {
        for b in 0..k {
            let mut acc = GaussianRational::zero();
            for (qv, (xa, xb)) in q_at_point.iter().zip(h1_basis[a].iter().zip(&h1_basis[b])) {
                acc += &(&(qv * xa) * xb);
            }
            qtilde.set(a, b, acc);
        }
    }

    Ok(TangentReport {
        point: v.to_vec(),
        ds_matrix: ds,
        t_matrix_at: t,
        h0_basis,
        h1_basis,
        qtilde,
        q_at_point,
        vdim: virtual_dimension(model),
    })
}

/// Complex virtual dimension `2m − n` of the model.
pub fn virtual_dimension(model: &DarbouxModel) -> i64 {
    2 * model.m() as i64 - model.n() as i64
}

/// `det Q̃ ≠ 0` exactly (exact mode) or `|det| > tol` (float mode).
pub fn qtilde_nondegenerate(report: &TangentReport, tol: f64) -> bool {
    if report.h1_basis.is_empty() {
        return true;
    }
    if report.qtilde.is_exact() {
        !report
            .qtilde
            .det_exact()
            .map(|d| d.is_zero())
            .unwrap_or(true)
    } else {
        report
            .qtilde
            .det_c64()
            .map(|d| d.norm() > tol)
            .unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darboux::test_models::{conj_z2_model, extended_conj_z2_model, gr, linear_model};
    use crate::darboux::DomainBox;

    #[test]
    fn zero_verification() {
        let model = conj_z2_model();
        assert!(verify_zero(&model, &[gr(0)]).unwrap());
        assert!(!verify_zero(&model, &[gr(1)]).unwrap());
        // s = (x−1, i(x−1)) has zero at 1.
        let x = Polynomial::var(1, 0);
        let f = x.sub(&Polynomial::one(1));
        let shifted = DarbouxModel::new(
            1,
            2,
            vec!["x".into()],
            vec![Polynomial::one(1), Polynomial::one(1)],
            vec![f.clone(), f.scale(&GaussianRational::i())],
            DomainBox::cube(1, 2.0),
            vec![vec![gr(0)]],
        )
        .unwrap();
        assert!(verify_zero(&shifted, &[gr(1)]).unwrap());
        assert!(verify_zero(&shifted, &[gr(0), gr(0)]).is_err());
    }

    #[test]
    fn transverse_point_has_trivial_cohomology() {
        // s = (x, ix) at 0: Ker t|₀ = Im ds|₀ = ℂ·(1, i).
        let report = tangent_report(&linear_model(), &[gr(0)], None).unwrap();
        assert_eq!(report.h0_dim(), 0);
        assert_eq!(report.h1_dim(), 0);
        assert_eq!(report.vdim, 0);
    }

    #[test]
    fn minimal_point_cohomology_and_qtilde() {
        // s = (x², ix²) at 0: ds=0, t=0, h0 = 1, h1 = 2, Q̃ = diag(1,1).
        let report = tangent_report(&conj_z2_model(), &[gr(0)], None).unwrap();
        assert_eq!(report.h0_dim(), 1);
        assert_eq!(report.h1_dim(), 2);
        assert!(report.is_minimal_point());
        assert_eq!(report.qtilde.rows(), 2);
        assert_eq!(report.qtilde.get(0, 0), gr(1));
        assert_eq!(report.qtilde.get(1, 1), gr(1));
        assert_eq!(report.qtilde.get(0, 1), gr(0));
        // Euler bookkeeping: h0 − h1 + h2 = 1 − 2 + 1 = 0 = 2m − n.
        assert_eq!(
            report.h0_dim() as i64 - report.h1_dim() as i64 + report.h2_dim() as i64,
            report.vdim
        );
        assert!(qtilde_nondegenerate(&report, 1e-9));
    }

    #[test]
    fn relative_analysis_cuts_h0() {
        // m=2, τ=(x₂), s=(x₁, ix₁) at 0: Ker ds ∩ Ker dτ = 0.
        let x1 = Polynomial::var(2, 0);
        let model = DarbouxModel::new(
            2,
            2,
            vec!["x1".into(), "x2".into()],
            vec![Polynomial::one(2), Polynomial::one(2)],
            vec![x1.clone(), x1.scale(&GaussianRational::i())],
            DomainBox::cube(2, 1.0),
            vec![vec![gr(0), gr(0)]],
        )
        .unwrap();
        let rel = RelativeContext::new(vec![Polynomial::var(2, 1)]);
        let report = tangent_report(&model, &[gr(0), gr(0)], Some(&rel)).unwrap();
        assert_eq!(report.h0_dim(), 0);
        // Without the relative structure h0 is 1-dimensional (∂/∂x₂).
        let absolute = tangent_report(&model, &[gr(0), gr(0)], None).unwrap();
        assert_eq!(absolute.h0_dim(), 1);
        // dτ surjectivity is a precondition.
        let bad_rel = RelativeContext::new(vec![Polynomial::var(2, 1).pow(2)]);
        assert!(matches!(
            tangent_report(&model, &[gr(0), gr(0)], Some(&bad_rel)),
            Err(TangentError::TauNotSubmersive)
        ));
    }

    #[test]
    fn virtual_dimension_formula() {
        assert_eq!(virtual_dimension(&conj_z2_model()), 0);
        let ext = extended_conj_z2_model(1);
        assert_eq!(virtual_dimension(&ext), 0);
        // m = 0 is permitted (empty zero locus): vdim = −n.
        let c = Polynomial::constant(0, gr(1));
        let ic = c.scale(&GaussianRational::i());
        let empty = DarbouxModel::new(
            0,
            2,
            vec![],
            vec![Polynomial::one(0), Polynomial::one(0)],
            vec![c, ic],
            DomainBox::cube(0, 1.0),
            vec![],
        )
        .unwrap();
        assert_eq!(virtual_dimension(&empty), -2);
    }

    #[test]
    fn euler_bookkeeping_on_extension_chart() {
        // m=2, n=4 extension at the origin: h0 = 1, h1 = 2, vdim 0.
        let ext = extended_conj_z2_model(1);
        let report = tangent_report(&ext, &[gr(0), gr(0)], None).unwrap();
        assert_eq!(report.h0_dim(), 1);
        assert_eq!(report.h1_dim(), 2);
        assert_eq!(
            2 * report.h0_dim() as i64 - report.h1_dim() as i64,
            report.vdim
        );
        assert!(qtilde_nondegenerate(&report, 1e-9));
    }

    #[test]
    fn qtilde_degeneracy_detection() {
        // Hand-built reports exercising the determinant check.
        let mut rep = tangent_report(&conj_z2_model(), &[gr(0)], None).unwrap();
        rep.qtilde = ComplexMatrix::from_rows_exact(vec![vec![gr(0)]]);
        rep.h1_basis = vec![vec![gr(1), gr(0)]];
        assert!(!qtilde_nondegenerate(&rep, 1e-9));
        // [[1, i], [i, −1]] has determinant 0.
        let i = GaussianRational::i();
        rep.qtilde =
            ComplexMatrix::from_rows_exact(vec![vec![gr(1), i.clone()], vec![i.clone(), gr(-1)]]);
        rep.h1_basis = vec![vec![gr(1), gr(0)], vec![gr(0), gr(1)]];
        assert!(!qtilde_nondegenerate(&rep, 1e-9));
    }

    #[test]
    fn class_coordinates_reduce_modulo_image() {
        let report = tangent_report(&conj_z2_model(), &[gr(0)], None).unwrap();
        // Minimal point: classes are ambient coordinates.
        let coords = report.class_coordinates(&[gr(3), gr(5)]).unwrap();
        assert_eq!(coords, vec![gr(3), gr(5)]);
    }
}
