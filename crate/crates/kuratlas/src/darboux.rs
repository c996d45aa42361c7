//! Local models in −2-Darboux form and their derived complex geometry.
//!
//! A model is the data `(m, n, q_j, s_j)`: `m` chart coordinates
//! `x₁, …, x_m`, an obstruction bundle of rank `n` with invertible
//! diagonal quadratic form `Q = diag(q_j)`, and a section `s = (s_j)`
//! subject to the exact identity `Σ_j q_j s_j² = 0`. Everything downstream
//! (tangent reports, reductions, atlas charts) is derived from it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{AlgebraError, ComplexMatrix, GaussianRational, Polynomial, C64};

#[derive(Debug, Error)]
pub enum DarbouxError {
    #[error("model failed validation: {0}")]
    InvalidModel(String),
    #[error("q_{index} vanishes at the evaluation point")]
    VanishingQ { index: usize },
    #[error("point lies outside the chart domain box")]
    OutsideDomain,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Axis-aligned box in ℂ^m: per-variable re/im intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    /// `[re_lo, re_hi, im_lo, im_hi]` per variable.
    pub ranges: Vec<[f64; 4]>,
}

impl DomainBox {
    pub fn cube(m: usize, half_width: f64) -> Self {
        DomainBox {
            ranges: vec![[-half_width, half_width, -half_width, half_width]; m],
        }
    }

    pub fn contains_c64(&self, p: &[C64]) -> bool {
        p.len() == self.ranges.len()
            && p.iter().zip(&self.ranges).all(|(z, r)| {
                z.re >= r[0] - 1e-12
                    && z.re <= r[1] + 1e-12
                    && z.im >= r[2] - 1e-12
                    && z.im <= r[3] + 1e-12
            })
    }

    pub fn contains_exact(&self, p: &[GaussianRational]) -> bool {
        let approx: Vec<C64> = p.iter().map(|z| z.to_c64()).collect();
        self.contains_c64(&approx)
    }
}

/// Exact symbolic record of a −2-Darboux local model.
#[derive(Clone, Debug)]
pub struct DarbouxModel {
    m: usize,
    n: usize,
    variables: Vec<String>,
    q: Vec<Polynomial>,
    s: Vec<Polynomial>,
    domain: DomainBox,
    nonvanish_samples: Vec<Vec<GaussianRational>>,
}

/// Per-check outcome of [`validate_model`]; failures are report entries,
/// not faults.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    /// `Σ_j q_j s_j² = 0` holds as an exact polynomial identity.
    pub identity_ok: bool,
    /// The residual polynomial when it does not.
    pub identity_residual: Polynomial,
    /// Every `q_j` is nonzero at every bundled witness sample.
    pub nonvanish_ok: bool,
    /// `(sample index, j)` pairs where `q_j` vanished.
    pub failed_samples: Vec<(usize, usize)>,
    /// All polynomials have the declared arity and `m ≥ 0`, `n ≥ 1`.
    pub arity_ok: bool,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.identity_ok && self.nonvanish_ok && self.arity_ok
    }
}

/// The structural 2-form data of the model: which formal terms appear in
/// the Darboux 2-form, plus the diagonal of the fibre quadratic form.
#[derive(Clone, Debug)]
pub struct SymplecticData {
    /// Term `dz_i ∧ dx_i` for each chart coordinate.
    pub dz_dx_terms: usize,
    /// Term `d(q_j y_j) ∧ dy_j` for each fibre coordinate.
    pub dqy_dy_terms: usize,
    /// The diagonal entries of `Q`, exactly the model's `q_j`.
    pub q_diagonal: Vec<Polynomial>,
}

/// The section `s` and the map `t : E → F` of the model, with `F ≅ T*V`.
#[derive(Clone, Debug)]
pub struct ChartGeometry {
    pub s_section: Vec<Polynomial>,
    /// `t_matrix[i][j] = 2 q_j ∂s_j/∂x_i + s_j ∂q_j/∂x_i` (row i, col j).
    pub t_matrix: Vec<Vec<Polynomial>>,
}

impl DarbouxModel {
    /// Assemble a model; structural arity errors are rejected here, the
    /// mathematical conditions are judged by [`validate_model`].
    pub fn new(
        m: usize,
        n: usize,
        variables: Vec<String>,
        q: Vec<Polynomial>,
        s: Vec<Polynomial>,
        domain: DomainBox,
        nonvanish_samples: Vec<Vec<GaussianRational>>,
    ) -> Result<Self, DarbouxError> {
        if variables.len() != m {
            return Err(DarbouxError::InvalidModel(format!(
                "expected {} variable names, got {}",
                m,
                variables.len()
            )));
        }
        if q.len() != n || s.len() != n {
            return Err(DarbouxError::InvalidModel(format!(
                "expected {} entries in q and s, got {} and {}",
                n,
                q.len(),
                s.len()
            )));
        }
        if domain.ranges.len() != m {
            return Err(DarbouxError::InvalidModel(
                "domain box arity != m".to_string(),
            ));
        }
        Ok(DarbouxModel {
            m,
            n,
            variables,
            q,
            s,
            domain,
            nonvanish_samples,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn q(&self) -> &[Polynomial] {
        &self.q
    }

    pub fn s(&self) -> &[Polynomial] {
        &self.s
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn nonvanish_samples(&self) -> &[Vec<GaussianRational>] {
        &self.nonvanish_samples
    }

    /// `q_j(v)` for all j, failing if any vanishes.
    pub fn q_at(&self, v: &[GaussianRational]) -> Result<Vec<GaussianRational>, DarbouxError> {
        let mut out = Vec::with_capacity(self.n);
        for (j, qj) in self.q.iter().enumerate() {
            let val = qj.eval(v)?;
            if val.is_zero() {
                return Err(DarbouxError::VanishingQ { index: j });
            }
            out.push(val);
        }
        Ok(out)
    }

    pub fn symplectic_data(&self) -> SymplecticData {
        SymplecticData {
            dz_dx_terms: self.m,
            dqy_dy_terms: self.n,
            q_diagonal: self.q.clone(),
        }
    }

    #[cfg(test)]
    pub(crate) fn set_q_for_tests(&mut self, q: Vec<Polynomial>) {
        self.q = q;
    }

    #[cfg(test)]
    pub(crate) fn set_samples_for_tests(&mut self, samples: Vec<Vec<GaussianRational>>) {
        self.nonvanish_samples = samples;
    }
}

/// Check the defining identities of a model: the exact relation
/// `Σ_j q_j s_j² = 0`, invertibility of each `q_j` at the bundled witness
/// samples, and arity consistency.
pub fn validate_model(model: &DarbouxModel) -> ValidationReport {
    let nv = model.m;
    let arity_ok = model.n >= 1
        && model.q.iter().all(|p| p.nvars() == nv)
        && model.s.iter().all(|p| p.nvars() == nv)
        && model.nonvanish_samples.iter().all(|pt| pt.len() == nv);

    let mut residual = Polynomial::zero(nv);
    if arity_ok {
        for (qj, sj) in model.q.iter().zip(&model.s) {
            residual = residual.add(&qj.mul(&sj.mul(sj)));
        }
    }
    let identity_ok = arity_ok && residual.is_zero();

    let mut failed_samples = Vec::new();
    if arity_ok {
        for (si, pt) in model.nonvanish_samples.iter().enumerate() {
            for (j, qj) in model.q.iter().enumerate() {
                if qj.eval(pt).map(|v| v.is_zero()).unwrap_or(true) {
                    failed_samples.push((si, j));
                }
            }
        }
    }
    ValidationReport {
        identity_ok,
        identity_residual: residual,
        nonvanish_ok: failed_samples.is_empty(),
        failed_samples,
        arity_ok,
    }
}

/// Derive the chart geometry: populate `t` column-by-column from
/// `t(e_j) = Σ_i (2 q_j ∂s_j/∂x_i + s_j ∂q_j/∂x_i) dx_i` and verify
/// `t∘s = 0` exactly.
pub fn build_geometry(model: &DarbouxModel) -> Result<ChartGeometry, DarbouxError> {
    let report = validate_model(model);
    if !report.pass() {
        return Err(DarbouxError::InvalidModel(
            "build_geometry requires a model passing validate_model".into(),
        ));
    }
    let two = GaussianRational::from_int(2);
    let mut t = vec![vec![Polynomial::zero(model.m); model.n]; model.m];
    for (j, (qj, sj)) in model.q.iter().zip(&model.s).enumerate() {
        for (i, row) in t.iter_mut().enumerate() {
            let dsj = sj.partial(i)?;
            let dqj = qj.partial(i)?;
            row[j] = qj.mul(&dsj).scale(&two).add(&sj.mul(&dqj));
        }
    }
    // t∘s = 0: each Σ_j t_{ij} s_j must vanish identically.
    for row in &t {
        let mut acc = Polynomial::zero(model.m);
        for (tij, sj) in row.iter().zip(&model.s) {
            acc = acc.add(&tij.mul(sj));
        }
        if !acc.is_zero() {
            return Err(DarbouxError::InvalidModel(format!(
                "t∘s has nonzero component {}",
                acc
            )));
        }
    }
    Ok(ChartGeometry {
        s_section: model.s.clone(),
        t_matrix: t,
    })
}

/// Apply a gauge change `t ↦ t + γ∘(−∧s)` where `γ : Λ²E → F` sends
/// `e_j ∧ e_k` (j < k) to `gamma(j, k)`, an m-vector of polynomials. At
/// points with `s(v) = 0` the result agrees with `t` — the
/// choice-independence of `t|_v` on the zero locus.
pub fn gauge_shift_t(
    geometry: &ChartGeometry,
    model: &DarbouxModel,
    gamma: &dyn Fn(usize, usize) -> Vec<Polynomial>,
) -> Vec<Vec<Polynomial>> {
    let m = model.m;
    let n = model.n;
    let mut out = geometry.t_matrix.clone();
    for j in 0..n {
        // e_j ∧ s = Σ_{k>j} s_k e_j∧e_k − Σ_{k<j} s_k e_k∧e_j
        for k in 0..n {
            if k == j {
                continue;
            }
            let (a, b, sign) = if j < k { (j, k, 1i64) } else { (k, j, -1i64) };
            let g = gamma(a, b);
            debug_assert_eq!(g.len(), m);
            let coeff = model.s[k].scale(&GaussianRational::from_int(sign));
            for (i, gi) in g.iter().enumerate() {
                out[i][j] = out[i][j].add(&coeff.mul(gi));
            }
        }
    }
    out
}

/// `d∘dz_i = 0` for all i: the x_i-derivative of the defining identity,
/// `Σ_j s_j (2 q_j ∂s_j/∂x_i + s_j ∂q_j/∂x_i) = 0`, checked exactly.
pub fn check_dd_zero(model: &DarbouxModel) -> Result<bool, DarbouxError> {
    if !validate_model(model).arity_ok {
        return Err(DarbouxError::InvalidModel("inconsistent arities".into()));
    }
    let two = GaussianRational::from_int(2);
    for i in 0..model.m {
        let mut acc = Polynomial::zero(model.m);
        for (qj, sj) in model.q.iter().zip(&model.s) {
            let dsj = sj.partial(i)?;
            let dqj = qj.partial(i)?;
            let inner = qj.mul(&dsj).scale(&two).add(&sj.mul(&dqj));
            acc = acc.add(&sj.mul(&inner));
        }
        if !acc.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The (2m+n)×(2m+n) matrix of the symplectic pairing `ω·` at a chart
/// point, on the basis `(∂/∂x_i, ∂/∂y_j, ∂/∂z_i)` with values expressed in
/// `(dx_i, dy_j, dz_i)`, evaluated with `y = 0`:
///
/// * `ω·∂/∂z_i = dx_i`
/// * `ω·∂/∂y_j = 2 q_j(v) dy_j`
/// * `ω·∂/∂x_i = −dz_i`
///
/// The result is invertible exactly when every `q_j(v) ≠ 0`.
pub fn symplectic_pairing_at(
    model: &DarbouxModel,
    v: &[GaussianRational],
) -> Result<ComplexMatrix, DarbouxError> {
    if v.len() != model.m {
        return Err(DarbouxError::Algebra(AlgebraError::ArityMismatch {
            expected: model.m,
            got: v.len(),
        }));
    }
    if !model.domain.contains_exact(v) {
        return Err(DarbouxError::OutsideDomain);
    }
    let q_vals = model.q_at(v)?;
    let (m, n) = (model.m, model.n);
    let dim = 2 * m + n;
    let mut mat = ComplexMatrix::zeros_exact(dim, dim);
    // Row blocks: dx (0..m), dy (m..m+n), dz (m+n..2m+n).
    // Column blocks: ∂x (0..m), ∂y (m..m+n), ∂z (m+n..2m+n).
    for i in 0..m {
        // ω·∂/∂x_i = −dz_i
        mat.set(m + n + i, i, -GaussianRational::one());
        // ω·∂/∂z_i = dx_i
        mat.set(i, m + n + i, GaussianRational::one());
    }
    for (j, qv) in q_vals.iter().enumerate() {
        // ω·∂/∂y_j = 2 q_j(v) dy_j
        mat.set(m + j, m + j, qv * &GaussianRational::from_int(2));
    }
    Ok(mat)
}


#[cfg(test)]
mod tests {
    use super::test_models::{gr, pair_model, x};
    use super::*;

    #[test]
    fn valid_pair_models() {
        // s = (x, ix): x² + (ix)² = 0.
        assert!(validate_model(&pair_model(x())).pass());
        // s = (x², ix²): same cancellation.
        assert!(validate_model(&pair_model(x().pow(2))).pass());
    }

    #[test]
    fn invalid_single_s() {
        // m=1, n=1, q=(1), s=(x): x² ≠ 0.
        let bad = DarbouxModel::new(
            1,
            1,
            vec!["x".into()],
            vec![Polynomial::one(1)],
            vec![x()],
            DomainBox::cube(1, 1.0),
            vec![vec![gr(0)]],
        )
        .unwrap();
        let rep = validate_model(&bad);
        assert!(!rep.identity_ok);
        assert!(!rep.pass());
        assert!(!rep.identity_residual.is_zero());
    }

    #[test]
    fn nonvanish_witness_failure_is_reported() {
        let mut model = pair_model(x());
        model.set_q_for_tests(vec![x(), x()]); // q vanishes at the sample 0
        let rep = validate_model(&model);
        assert!(!rep.nonvanish_ok);
        assert_eq!(rep.failed_samples, vec![(0, 0), (0, 1)]);
    }

    #[test]
    fn t_columns_for_x_squared() {
        // q=(1,1), s=(x², ix²):
        // column 1 = 4x·dx, column 2 = 4ix·dx  (from 2 q_j ds_j).
        let model = pair_model(x().pow(2));
        let geom = build_geometry(&model).unwrap();
        let four_x = x().scale(&gr(4));
        assert_eq!(geom.t_matrix[0][0], four_x);
        assert_eq!(
            geom.t_matrix[0][1],
            x().scale(&(&gr(4) * &GaussianRational::i()))
        );
    }

    #[test]
    fn t_columns_for_linear_pair() {
        // q=(1,1), s=(x, ix) → t columns 2dx, 2i·dx.
        let model = pair_model(x());
        let geom = build_geometry(&model).unwrap();
        assert_eq!(geom.t_matrix[0][0], Polynomial::constant(1, gr(2)));
        assert_eq!(
            geom.t_matrix[0][1],
            Polynomial::constant(1, &gr(2) * &GaussianRational::i())
        );
    }

    #[test]
    fn zero_section_gives_zero_t() {
        let model = DarbouxModel::new(
            1,
            2,
            vec!["x".into()],
            vec![Polynomial::one(1), Polynomial::one(1)],
            vec![Polynomial::zero(1), Polynomial::zero(1)],
            DomainBox::cube(1, 1.0),
            vec![vec![gr(0)]],
        )
        .unwrap();
        let geom = build_geometry(&model).unwrap();
        assert!(geom.t_matrix[0].iter().all(|p| p.is_zero()));
    }

    #[test]
    fn dd_zero_matches_validity() {
        assert!(check_dd_zero(&pair_model(x().pow(2))).unwrap());
        // Constants: all derivatives vanish.
        let consts = DarbouxModel::new(
            1,
            2,
            vec!["x".into()],
            vec![Polynomial::one(1), Polynomial::one(1)],
            vec![
                Polynomial::constant(1, gr(3)),
                Polynomial::constant(1, &gr(3) * &GaussianRational::i()),
            ],
            DomainBox::cube(1, 1.0),
            vec![vec![gr(0)]],
        )
        .unwrap();
        assert!(check_dd_zero(&consts).unwrap());
        // A model violating the defining identity: d∘dz ≠ 0.
        let bad = DarbouxModel::new(
            1,
            1,
            vec!["x".into()],
            vec![Polynomial::one(1)],
            vec![x()],
            DomainBox::cube(1, 1.0),
            vec![],
        )
        .unwrap();
        assert!(!check_dd_zero(&bad).unwrap());
    }

    #[test]
    fn gauge_shift_preserves_t_on_zero_locus() {
        let model = pair_model(x().pow(2));
        let geom = build_geometry(&model).unwrap();
        // γ(e₁∧e₂) = (1 + x)·dx₁, an arbitrary nonzero gauge.
        let gamma = |_j: usize, _k: usize| vec![Polynomial::one(1).add(&x())];
        let shifted = gauge_shift_t(&geom, &model, &gamma);
        assert_ne!(shifted, geom.t_matrix);
        // At the zero v = 0 of s the two agree.
        let v = [gr(0)];
        for i in 0..1 {
            for j in 0..2 {
                assert_eq!(
                    shifted[i][j].eval(&v).unwrap(),
                    geom.t_matrix[i][j].eval(&v).unwrap()
                );
            }
        }
    }

    #[test]
    fn pairing_determinant_is_two_for_trivial_model() {
        // m=1, n=1, q=(1), s=0 at v=0: diagonal blocks 1, 2, 1 up to sign.
        let model = DarbouxModel::new(
            1,
            1,
            vec!["x".into()],
            vec![Polynomial::one(1)],
            vec![Polynomial::zero(1)],
            DomainBox::cube(1, 1.0),
            vec![vec![gr(0)]],
        )
        .unwrap();
        let mat = symplectic_pairing_at(&model, &[gr(0)]).unwrap();
        let det = mat.det_exact().unwrap();
        assert!(det == gr(2) || det == gr(-2));
    }

    #[test]
    fn pairing_scales_linearly_in_q() {
        let model = pair_model(x().pow(2));
        let mut doubled = model.clone();
        doubled.set_q_for_tests(model.q().iter().map(|q| q.scale(&gr(2))).collect());
        let a = symplectic_pairing_at(&model, &[gr(0)]).unwrap();
        let b = symplectic_pairing_at(&doubled, &[gr(0)]).unwrap();
        for j in 0..2 {
            assert_eq!(b.get(1 + j, 1 + j), &gr(2) * &a.get(1 + j, 1 + j));
        }
    }

    #[test]
    fn pairing_rejects_vanishing_q_and_outside_points() {
        let mut model = pair_model(x());
        model.set_q_for_tests(vec![x(), x()]);
        model.set_samples_for_tests(vec![]);
        assert!(matches!(
            symplectic_pairing_at(&model, &[gr(0)]),
            Err(DarbouxError::VanishingQ { .. })
        ));
        let good = pair_model(x());
        assert!(matches!(
            symplectic_pairing_at(&good, &[gr(5)]),
            Err(DarbouxError::OutsideDomain)
        ));
    }
}
