//! Orientations of Kuranishi atlas data: the transported sign of a
//! coordinate change, atlas-level consistency, the pointwise complex/real
//! orientation correspondence, and the −2-shifted normalization check.
//!
//! # Transport convention
//!
//! The short exact sequence `0 → T_J →^A E_J⊕T_K →^B E_K → 0` at a zero
//! (with `A = ds_J ⊕ dφ`, `B = −φ̂ ⊕ ds_K`) induces an isomorphism of top
//! exterior powers. The sign convention is fixed as the basis-completion
//! determinant rule: complete the columns `A·e₁, …, A·e_d` by standard
//! basis vectors `W = (w₁, …, w_r)` chosen greedily (lowest index first)
//! so that `B·W` is a basis, and set
//!
//! `sign = sign det[A·e | W] · sign det[B·W]`.
//!
//! Worked 2×2 example: the identity change on a chart with `d = r = 1`
//! and any `S = ds` gives `A = (S, 1)ᵀ`, `W = (1, 0)ᵀ`,
//! `det[A|W] = −1`, `B·W = −1`, so the sign is `(−1)·(−1) = +1`
//! independently of `S`. Any consistent convention yields consistent
//! atlas orientations; this one makes every test deterministic.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::exactalg::{realify_vector, AlgebraError, ComplexMatrix, RealMatrix, RealSubspace, C64};
use crate::kuranishi::{Atlas, ChartId, KuranishiError};
use crate::tangent::TangentReport;

#[derive(Debug, Error)]
pub enum OrientationError {
    #[error("linearization sequence is not exact at the zero")]
    NonExactSequence,
    #[error("orientation basis is degenerate or has the wrong size")]
    DegenerateOrientation,
    #[error("Im Π does not have the half dimension required by (*)")]
    StarRequired,
    #[error("chart {0} has no orientation data")]
    MissingSigns(ChartId),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Kuranishi(#[from] KuranishiError),
}

/// Per-chart orientation signs, one per footprint zero (in footprint
/// order).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OrientationData {
    pub signs: BTreeMap<ChartId, Vec<i8>>,
}

impl OrientationData {
    pub fn constant(atlas: &Atlas, sign: i8) -> Self {
        let signs = atlas
            .charts
            .iter()
            .map(|(id, c)| (id.clone(), vec![sign; c.footprint.len()]))
            .collect();
        OrientationData { signs }
    }

    pub fn reversed(&self) -> Self {
        OrientationData {
            signs: self
                .signs
                .iter()
                .map(|(k, v)| (k.clone(), v.iter().map(|s| -s).collect()))
                .collect(),
        }
    }

    pub fn sign_at(&self, chart: &str, zero_index: usize) -> Option<i8> {
        self.signs
            .get(chart)
            .and_then(|v| v.get(zero_index))
            .copied()
    }
}

/// Matrices of a linearized coordinate change at a zero, realified.
#[derive(Clone, Debug)]
pub struct TransportData {
    /// `ds_J` (r_J × d_J).
    pub ds_j: RealMatrix,
    /// `dφ` (d_K × d_J).
    pub dphi: RealMatrix,
    /// `φ̂` at the zero (r_K × r_J).
    pub phihat: RealMatrix,
    /// `ds_K` at the image zero (r_K × d_K).
    pub ds_k: RealMatrix,
}

fn to_real(m: &ComplexMatrix) -> RealMatrix {
    let mut out = RealMatrix::zeros(m.rows(), m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(i, j, m.get_c64(i, j).re);
        }
    }
    out
}

impl TransportData {
    /// Extract the transport data of an atlas change at a source zero.
    pub fn from_change(
        atlas: &Atlas,
        source: &str,
        target: &str,
        zero: &[crate::exactalg::GaussianRational],
    ) -> Result<Self, OrientationError> {
        let cc = atlas
            .changes
            .get(&(source.to_string(), target.to_string()))
            .ok_or_else(|| {
                OrientationError::Kuranishi(KuranishiError::MissingChart(format!(
                    "change {}->{}",
                    source, target
                )))
            })?;
        let src = atlas
            .charts
            .get(source)
            .ok_or_else(|| KuranishiError::MissingChart(source.to_string()))
            .map_err(OrientationError::Kuranishi)?;
        let tgt = atlas
            .charts
            .get(target)
            .ok_or_else(|| KuranishiError::MissingChart(target.to_string()))
            .map_err(OrientationError::Kuranishi)?;
        let image = cc.phi_at(zero)?;
        Ok(TransportData {
            ds_j: to_real(&src.section_jacobian_at(zero)?),
            dphi: to_real(&cc.dphi_at(zero)?),
            phihat: to_real(&cc.phihat_at(zero)?),
            ds_k: to_real(&tgt.section_jacobian_at(&image)?),
        })
    }
}

/// Sign of the induced isomorphism of top exterior powers under the fixed
/// basis-completion convention; errors when the sequence is not exact at
/// the tolerance.
pub fn transport_sign(data: &TransportData, tol: f64) -> Result<i8, OrientationError> {
    let r_j = data.ds_j.rows();
    let d_j = data.ds_j.cols();
    let d_k = data.dphi.rows();
    let r_k = data.phihat.rows();
    let mid = r_j + d_k;

    // A = [ds_J ; dφ], B = [−φ̂ | ds_K].
    let mut a = RealMatrix::zeros(mid, d_j);
    for i in 0..r_j {
        for j in 0..d_j {
            a.set(i, j, data.ds_j.get(i, j));
        }
    }
    for i in 0..d_k {
        for j in 0..d_j {
            a.set(r_j + i, j, data.dphi.get(i, j));
        }
    }
    let mut b = RealMatrix::zeros(r_k, mid);
    for i in 0..r_k {
        for j in 0..r_j {
            b.set(i, j, -data.phihat.get(i, j));
        }
        for j in 0..d_k {
            b.set(i, r_j + j, data.ds_k.get(i, j));
        }
    }
    // Exactness certificates.
    if a.rank(tol) != d_j || b.rank(tol) != r_k || a.rank(tol) + b.rank(tol) != mid {
        return Err(OrientationError::NonExactSequence);
    }
    let ba = b.matmul(&a);
    for i in 0..ba.rows() {
        for j in 0..ba.cols() {
            if ba.get(i, j).abs() > tol * 100.0 {
                return Err(OrientationError::NonExactSequence);
            }
        }
    }

    // Columns A·e_i.
    let image_cols: Vec<Vec<f64>> = (0..d_j).map(|j| a.col(j)).collect();
    // Greedy lift: standard basis vectors whose B-images extend the span.
    let mut lifted: Vec<Vec<f64>> = Vec::with_capacity(r_k);
    let mut b_images: Vec<Vec<f64>> = Vec::with_capacity(r_k);
    for idx in 0..mid {
        if lifted.len() == r_k {
            break;
        }
        let mut e = vec![0.0; mid];
        e[idx] = 1.0;
        let img = b.apply(&e);
        let mut trial = b_images.clone();
        trial.push(img.clone());
        if RealMatrix::from_cols(&trial, r_k).rank(tol) == trial.len() {
            lifted.push(e);
            b_images.push(img);
        }
    }
    if lifted.len() != r_k {
        return Err(OrientationError::NonExactSequence);
    }
    let mut m_cols = image_cols;
    m_cols.extend(lifted);
    let det_m = RealMatrix::from_cols(&m_cols, mid).det()?;
    let det_n = RealMatrix::from_cols(&b_images, r_k).det()?;
    if det_m.abs() <= tol || det_n.abs() <= tol {
        return Err(OrientationError::NonExactSequence);
    }
    Ok(if det_m * det_n > 0.0 { 1 } else { -1 })
}

/// Violations found by [`validate_orientation`].
#[derive(Clone, Debug)]
pub struct OrientationReport {
    /// `(source, target, zero index)` triples where the transported sign
    /// disagrees.
    pub violations: Vec<(ChartId, ChartId, usize)>,
    pub checks: usize,
}

impl OrientationReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check `o_K(φ(z)) = transport_sign · o_J(z)` for every change and every
/// shared footprint zero.
pub fn validate_orientation(
    atlas: &Atlas,
    data: &OrientationData,
    tol: f64,
) -> Result<OrientationReport, OrientationError> {
    let mut violations = Vec::new();
    let mut checks = 0usize;
    for ((source, target), cc) in &atlas.changes {
        let src = &atlas.charts[source];
        let tgt = &atlas.charts[target];
        for (zero_idx, (point, vertex)) in src.footprint.iter().enumerate() {
            if !tgt.footprint_vertices().contains(vertex) {
                continue;
            }
            let image = cc.phi_at(point)?;
            let Some(target_idx) = tgt
                .footprint
                .iter()
                .position(|(q, w)| w == vertex && q == &image)
            else {
                violations.push((source.clone(), target.clone(), zero_idx));
                continue;
            };
            let t = TransportData::from_change(atlas, source, target, point)?;
            let sign = transport_sign(&t, tol)?;
            let o_src = data
                .sign_at(source, zero_idx)
                .ok_or_else(|| OrientationError::MissingSigns(source.clone()))?;
            let o_tgt = data
                .sign_at(target, target_idx)
                .ok_or_else(|| OrientationError::MissingSigns(target.clone()))?;
            checks += 1;
            if o_tgt != sign * o_src {
                violations.push((source.clone(), target.clone(), zero_idx));
            }
        }
    }
    Ok(OrientationReport { violations, checks })
}

/// An ordered `Q̃`-orthonormal basis of `H¹` classes at a point, stored in
/// class coordinates with respect to the report's `h1_basis`.
#[derive(Clone, Debug)]
pub struct ComplexOrientationAtPoint {
    pub basis: Vec<Vec<C64>>,
}

impl ComplexOrientationAtPoint {
    /// The standard class basis (valid whenever `Q̃` is the identity).
    pub fn standard(k: usize) -> Self {
        ComplexOrientationAtPoint {
            basis: (0..k)
                .map(|a| {
                    let mut e = vec![C64::new(0.0, 0.0); k];
                    e[a] = C64::new(1.0, 0.0);
                    e
                })
                .collect(),
        }
    }

    /// The standard basis with its first two vectors swapped (the
    /// opposite orientation for k ≥ 2).
    pub fn swapped(k: usize) -> Self {
        let mut co = Self::standard(k);
        if k >= 2 {
            co.basis.swap(0, 1);
        }
        co
    }

    /// Scale one basis vector (breaks the Gram normalization).
    pub fn scaled(mut self, index: usize, factor: f64) -> Self {
        for x in self.basis[index].iter_mut() {
            *x *= factor;
        }
        self
    }

    /// Gram matrix under the report's `Q̃` (complex bilinear).
    pub fn gram(&self, report: &TangentReport) -> Vec<Vec<C64>> {
        let k = self.basis.len();
        let q: Vec<Vec<C64>> = (0..k)
            .map(|a| (0..k).map(|b| report.qtilde.get_c64(a, b)).collect())
            .collect();
        (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| {
                        let mut acc = C64::new(0.0, 0.0);
                        for c in 0..k {
                            for d in 0..k {
                                acc += self.basis[a][c] * q[c][d] * self.basis[b][d];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }
}

/// Does the stored basis genuinely represent a square root of `det Q̃`,
/// i.e. `|det Gram − 1| ≤ tol`?
pub fn shifted_orientation_check(
    report: &TangentReport,
    co: &ComplexOrientationAtPoint,
    tol: f64,
) -> Result<bool, OrientationError> {
    let k = report.h1_basis.len();
    if co.basis.len() != k || co.basis.iter().any(|v| v.len() != k) {
        return Err(OrientationError::DegenerateOrientation);
    }
    if k == 0 {
        return Ok(true);
    }
    let gram = co.gram(report);
    let m = ComplexMatrix::from_rows_f64(gram, tol);
    let det = m.det_c64()?;
    Ok((det - C64::new(1.0, 0.0)).norm() <= tol)
}

/// The orientation of the realified quotient `H¹_ℝ / Im Π` induced by the
/// complex orientation `co`, reported as a sign relative to the reference
/// orientation induced the same way by the report's own `h1_basis`
/// classes. `pi_image` must come from a passing (*) report (half
/// dimension), and `h1 = 0` returns the canonical `+1`.
pub fn point_orientation_correspondence(
    report: &TangentReport,
    pi_image: &RealSubspace,
    co: &ComplexOrientationAtPoint,
    tol: f64,
) -> Result<i8, OrientationError> {
    let k = report.h1_basis.len();
    if co.basis.len() != k {
        return Err(OrientationError::DegenerateOrientation);
    }
    if k == 0 {
        return Ok(1);
    }
    if pi_image.ambient() != 2 * k || pi_image.dim() != k {
        return Err(OrientationError::StarRequired);
    }
    // Quotient model: W = orthogonal complement of Im Π in ℝ^{2k}.
    let w = pi_image.orthogonal_complement();
    let mut cols: Vec<Vec<f64>> = w.basis().to_vec();
    cols.extend(pi_image.basis().iter().cloned());
    let full = RealMatrix::from_cols(&cols, 2 * k);
    let w_dim = w.basis().len();
    let classes_det = |vectors: &[Vec<C64>]| -> Result<f64, OrientationError> {
        let mut coords_cols: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
        for v in vectors {
            let real = realify_vector(v);
            let c = full
                .solve_square(&real, tol * 1e-3)
                .map_err(|_| OrientationError::DegenerateOrientation)?;
            coords_cols.push(c[..w_dim].to_vec());
        }
        let m = RealMatrix::from_cols(&coords_cols, w_dim);
        Ok(m.det()?)
    };
    let det_co = classes_det(&co.basis)?;
    let reference = ComplexOrientationAtPoint::standard(k);
    let det_ref = classes_det(&reference.basis)?;
    if det_co.abs() <= tol || det_ref.abs() <= tol {
        return Err(OrientationError::DegenerateOrientation);
    }
    Ok(if det_co * det_ref > 0.0 { 1 } else { -1 })
}
