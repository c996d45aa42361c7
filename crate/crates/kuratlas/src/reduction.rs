//! Negative-definite subbundles `E⁻`, conditions (*) and (†), the reduced
//! pair `(E⁺, s⁺)`, and transport of `E⁻` along chart comparisons.
//!
//! Frames are constant over a chart in its trivialization. Condition (*)
//! is checked pointwise at zeros of `s`: transversality to `Im ds`,
//! surjectivity of `t` on the frame, half-dimensionality of the image of
//! `Π_v` in `H¹`, and negative definiteness of `Re Q̃_v` there. Condition
//! (†) is sampled — the verdict is "no counterexample found", never a
//! proof.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::darboux::{DarbouxError, DarbouxModel};
use crate::exactalg::{
    re_q_gram, realify_vector, AlgebraError, CompiledPoly, ComplexMatrix, Definiteness,
    GaussianRational, Polynomial, RealMatrix, RealSubspace, C64,
};
use crate::tangent::{self, RelativeContext, TangentError, TangentReport};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("frame vectors are dependent or have wrong length")]
    BadFrame,
    #[error("construct_minimal_negative requires a minimal point (ds|_v = 0, t|_v = 0)")]
    NonMinimalPoint,
    #[error("degenerate pivot in Q-orthonormalization: |pivot| = {0:.3e}")]
    DegeneratePivot(f64),
    #[error("comparison map {map} drops rank at a sample zero")]
    RankDrop { map: &'static str },
    #[error("no valid complement frame: direct-sum certificate failed")]
    NoValidComplement,
    #[error("pullback frame fails condition (*) at sample zero {index}")]
    StarFailedAfterPullback { index: usize },
    #[error("pushforward certificate failed at step {step}: {reason}")]
    PushforwardCertificate { step: &'static str, reason: String },
    #[error("domain box is empty or has no samples")]
    EmptyDomain,
    #[error(transparent)]
    Tangent(#[from] TangentError),
    #[error(transparent)]
    Darboux(#[from] DarbouxError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A real subbundle `E⁻` of the trivialized bundle `E`, given by a
/// constant real frame in the realified fibre ℝ^{2n}.
#[derive(Clone, Debug)]
pub struct SubbundleFrame {
    frame: Vec<Vec<f64>>,
    ambient: usize,
}

impl SubbundleFrame {
    pub fn new(ambient: usize, frame: Vec<Vec<f64>>, tol: f64) -> Result<Self, ReductionError> {
        if frame.iter().any(|v| v.len() != ambient) {
            return Err(ReductionError::BadFrame);
        }
        if !frame.is_empty() {
            let m = RealMatrix::from_cols(&frame, ambient);
            if m.rank(tol) != frame.len() {
                return Err(ReductionError::BadFrame);
            }
        }
        Ok(SubbundleFrame { frame, ambient })
    }

    /// The frame `span_ℝ{i·e₁, …, i·e_n}` in ℂ^n: the canonical minimal
    /// negative frame for `Q = diag(1,…,1)`.
    pub fn i_span(n: usize) -> Self {
        let frame = (0..n)
            .map(|j| {
                let mut v = vec![0.0; 2 * n];
                v[2 * j + 1] = 1.0;
                v
            })
            .collect();
        SubbundleFrame {
            frame,
            ambient: 2 * n,
        }
    }

    /// The frame `span_ℝ{e₁, …, e_n}` (the wrong-sign choice for
    /// `Q = diag(1,…,1)`).
    pub fn re_span(n: usize) -> Self {
        let frame = (0..n)
            .map(|j| {
                let mut v = vec![0.0; 2 * n];
                v[2 * j] = 1.0;
                v
            })
            .collect();
        SubbundleFrame {
            frame,
            ambient: 2 * n,
        }
    }

    pub fn empty(ambient: usize) -> Self {
        SubbundleFrame {
            frame: Vec::new(),
            ambient,
        }
    }

    pub fn rank_real(&self) -> usize {
        self.frame.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    pub fn subspace(&self, tol: f64) -> RealSubspace {
        RealSubspace::new(self.ambient, self.frame.clone(), tol)
            .expect("frame was validated at construction")
    }

    /// Frame matrix with frame vectors as columns (2n × rank).
    pub fn matrix(&self) -> RealMatrix {
        RealMatrix::from_cols(&self.frame, self.ambient)
    }
}

/// Pointwise report for condition (*) at one zero.
#[derive(Clone, Debug)]
pub struct StarReport {
    pub point: Vec<GaussianRational>,
    /// Transversality: `Im ds|_v ∩ E⁻ = {0}`.
    pub transversal_ok: bool,
    /// Surjectivity: `t|_v(E⁻) = t|_v(E)` as real subspaces.
    pub t_surjective_ok: bool,
    /// Real dimension of `Im Π_v`.
    pub pi_image_dim: usize,
    /// `pi_image_dim` equals `dim_ℂ H¹`.
    pub half_dim_ok: bool,
    /// `Re Q̃_v` negative definite on `Im Π_v`.
    pub negdef_ok: bool,
    /// Smallest |eigenvalue| witnessing the definiteness verdict.
    pub margin: f64,
    /// `Im Π_v` in quotient coordinates (w.r.t. the realified `h1_basis`).
    pub pi_image_quotient: RealSubspace,
}

impl StarReport {
    pub fn pass(&self) -> bool {
        self.transversal_ok && self.t_surjective_ok && self.half_dim_ok && self.negdef_ok
    }
}

/// Realified span of the complex image of `ds|_v` (restricted to the
/// relative tangent frame when given), reduced to an independent basis:
/// for each complex generator `w`, both `w` and `i·w` realified.
fn realified_image_ds(
    report: &TangentReport,
    rel_frame: Option<&[Vec<GaussianRational>]>,
    tol: f64,
) -> Vec<Vec<f64>> {
    let ds = &report.ds_matrix;
    let n = ds.rows();
    let m = ds.cols();
    let frame: Vec<Vec<GaussianRational>> = match rel_frame {
        Some(f) => f.to_vec(),
        None => (0..m)
            .map(|i| {
                let mut e = vec![GaussianRational::zero(); m];
                e[i] = GaussianRational::one();
                e
            })
            .collect(),
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut push_independent = |v: Vec<f64>| {
        let mut trial = basis.clone();
        trial.push(v.clone());
        if RealMatrix::from_cols(&trial, 2 * n).rank(tol) == trial.len() {
            basis.push(v);
        }
    };
    for w in &frame {
        let img = ds.apply_exact(w);
        if img.iter().all(|z| z.is_zero()) {
            continue;
        }
        let img_c: Vec<C64> = img.iter().map(|z| z.to_c64()).collect();
        let i_img: Vec<C64> = img_c.iter().map(|z| C64::new(0.0, 1.0) * z).collect();
        push_independent(realify_vector(&img_c));
        push_independent(realify_vector(&i_img));
    }
    basis
}

/// Quotient coordinates of a realified `Ker t` vector with respect to the
/// realified `h1_basis`, modulo the realified image of `ds`.
fn quotient_coordinates(
    report: &TangentReport,
    im_ds_vecs: &[Vec<f64>],
    u: &[f64],
    tol: f64,
) -> Option<Vec<f64>> {
    let n = report.ds_matrix.rows();
    let k = report.h1_basis.len();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(2 * k + im_ds_vecs.len());
    for h in &report.h1_basis {
        let hc: Vec<C64> = h.iter().map(|z| z.to_c64()).collect();
        let ih: Vec<C64> = hc.iter().map(|z| C64::new(0.0, 1.0) * z).collect();
        cols.push(realify_vector(&hc));
        cols.push(realify_vector(&ih));
    }
    let quotient_cols = cols.len();
    for v in im_ds_vecs {
        cols.push(v.clone());
    }
    if cols.is_empty() {
        return Some(Vec::new());
    }
    let mat = RealMatrix::from_cols(&cols, 2 * n);
    let coords = mat.solve_least_squares(u, tol * 1e-3).ok()?;
    let recon = mat.apply(&coords);
    let err: f64 = recon
        .iter()
        .zip(u)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    if err > tol.max(1e-12) * 100.0 {
        return None;
    }
    Some(coords[..quotient_cols].to_vec())
}

/// Evaluate condition (*) for the pair `(model, E⁻)` at the zero `v`.
pub fn check_star(
    model: &DarbouxModel,
    eminus: &SubbundleFrame,
    v: &[GaussianRational],
    rel: Option<&RelativeContext>,
    tol: f64,
) -> Result<StarReport, ReductionError> {
    let n = model.n();
    if eminus.ambient() != 2 * n {
        return Err(ReductionError::BadFrame);
    }
    let report = tangent::tangent_report(model, v, rel)?;

    let rel_frame: Option<Vec<Vec<GaussianRational>>> = match rel {
        Some(ctx) => Some(ctx.dtau_at(v)?.kernel_basis()),
        None => None,
    };
    let im_ds_vecs = realified_image_ds(&report, rel_frame.as_deref(), tol);
    let im_ds = RealSubspace::new(2 * n, im_ds_vecs.clone(), tol)?;
    let em_space = eminus.subspace(tol);

    // Transversality: Im ds ∩ E⁻ = {0}.
    let transversal_ok = im_ds.intersection(&em_space).dim() == 0;

    // Surjectivity: t(E⁻) = t(E) as real subspaces.
    let t_real = report.t_matrix_at.realify();
    let rank_t_full = t_real.rank(tol);
    let t_frame = t_real.matmul(&eminus.matrix());
    let t_surjective_ok = t_frame.rank(tol) == rank_t_full;

    // E⁻ ∩ Ker t, pushed to the quotient.
    let ker_t = RealSubspace::new(2 * n, t_real.kernel_basis(tol), tol)
        .expect("kernel basis is independent");
    let em_ker = em_space.intersection(&ker_t);
    let mut quotient_vectors: Vec<Vec<f64>> = Vec::new();
    for u in em_ker.basis() {
        if let Some(qc) = quotient_coordinates(&report, &im_ds_vecs, u, tol) {
            quotient_vectors.push(qc);
        }
    }
    let k = report.h1_basis.len();
    let pi_image_quotient = {
        let mut acc = RealSubspace::zero(2 * k, tol);
        for qv in &quotient_vectors {
            if let Ok(c) = RealSubspace::new(2 * k, vec![qv.clone()], tol) {
                acc = acc.sum(&c);
            }
        }
        acc
    };
    let pi_image_dim = pi_image_quotient.dim();
    let half_dim_ok = pi_image_dim == k;

    // Re Q̃ on Im Π: Gram in ambient coordinates of E (valid because
    // Q(Im ds, Ker t) = 0 exactly, which tangent_report already checked).
    let q_vals: Vec<C64> = report.q_at_point.iter().map(|z| z.to_c64()).collect();
    let gram_q = re_q_gram(&q_vals);
    let basis = em_ker.basis();
    let d = basis.len();
    let (negdef_ok, margin) = if d == 0 {
        (k == 0, f64::INFINITY)
    } else {
        let mut g = RealMatrix::zeros(d, d);
        for a in 0..d {
            let ga = gram_q.apply(&basis[a]);
            for b in 0..d {
                let val: f64 = ga.iter().zip(&basis[b]).map(|(x, y)| x * y).sum();
                g.set(a, b, val);
            }
        }
        // Symmetrize rounding noise before classification.
        let mut sym = RealMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                sym.set(a, b, 0.5 * (g.get(a, b) + g.get(b, a)));
            }
        }
        let rep = crate::exactalg::real_definiteness_f64(&sym, tol)?;
        (rep.class == Definiteness::Negative, rep.margin)
    };

    Ok(StarReport {
        point: v.to_vec(),
        transversal_ok,
        t_surjective_ok,
        pi_image_dim,
        half_dim_ok,
        negdef_ok,
        margin,
        pi_image_quotient,
    })
}

/// Q-orthonormalize the `H¹` classes by pivoted complex Gram–Schmidt and
/// return `E⁻ = span_ℝ{i·e₁, …, i·e_k}` in ambient fibre coordinates.
///
/// Requires a minimal point (`ds|_v = 0`, `t|_v = 0`) and a nondegenerate
/// `Q̃`; isotropic pivots are repaired by the mixing step `w_a ← w_a + w_b`
/// which succeeds whenever `Q̃` is nondegenerate at the tolerance.
pub fn construct_minimal_negative(
    report: &TangentReport,
    tol: f64,
) -> Result<SubbundleFrame, ReductionError> {
    if !report.is_minimal_point() {
        return Err(ReductionError::NonMinimalPoint);
    }
    let k = report.h1_basis.len();
    let n = report.ds_matrix.rows();
    // Work in class coordinates with the bilinear form given by qtilde.
    let q: Vec<Vec<C64>> = (0..k)
        .map(|a| (0..k).map(|b| report.qtilde.get_c64(a, b)).collect())
        .collect();
    let form = |u: &[C64], w: &[C64]| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..k {
            for b in 0..k {
                acc += u[a] * q[a][b] * w[b];
            }
        }
        acc
    };
    let mut work: Vec<Vec<C64>> = (0..k)
        .map(|a| {
            let mut e = vec![C64::new(0.0, 0.0); k];
            e[a] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    let mut ortho: Vec<Vec<C64>> = Vec::with_capacity(k);
    while ortho.len() < k {
        // Largest |Q(w,w)| among remaining vectors, lowest index on ties.
        let mut best = 0usize;
        let mut best_mag = f64::NEG_INFINITY;
        for (i, w) in work.iter().enumerate() {
            let mag = form(w, w).norm();
            if mag > best_mag {
                best = i;
                best_mag = mag;
            }
        }
        let pivot_idx = if best_mag > tol {
            best
        } else {
            // All diagonal values are isotropic: mix a pair.
            let mut fixed = None;
            'outer: for a in 0..work.len() {
                for b in (a + 1)..work.len() {
                    let mixed: Vec<C64> =
                        work[a].iter().zip(&work[b]).map(|(x, y)| x + y).collect();
                    if form(&mixed, &mixed).norm() > tol {
                        fixed = Some((a, mixed));
                        break 'outer;
                    }
                }
            }
            let Some((a, mixed)) = fixed else {
                return Err(ReductionError::DegeneratePivot(best_mag));
            };
            work[a] = mixed;
            a
        };
        let w = work.remove(pivot_idx);
        let norm = form(&w, &w);
        if norm.norm() <= tol {
            return Err(ReductionError::DegeneratePivot(norm.norm()));
        }
        let scale = norm.sqrt();
        let e: Vec<C64> = w.iter().map(|x| x / scale).collect();
        for other in work.iter_mut() {
            let c = form(other, &e);
            for (o, ev) in other.iter_mut().zip(&e) {
                *o -= c * ev;
            }
        }
        ortho.push(e);
    }
    // Map class coordinates to ambient E coordinates and realify i·e_a.
    let h1_c64: Vec<Vec<C64>> = report
        .h1_basis
        .iter()
        .map(|h| h.iter().map(|z| z.to_c64()).collect())
        .collect();
    let mut frame = Vec::with_capacity(k);
    for e in &ortho {
        let mut ambient = vec![C64::new(0.0, 0.0); n];
        for (coef, h) in e.iter().zip(&h1_c64) {
            for (amb, hv) in ambient.iter_mut().zip(h) {
                *amb += coef * hv;
            }
        }
        let i_ambient: Vec<C64> = ambient.iter().map(|z| C64::new(0.0, 1.0) * z).collect();
        frame.push(realify_vector(&i_ambient));
    }
    SubbundleFrame::new(2 * n, frame, tol)
}

/// The reduced pair `(E⁺, s⁺)`: quotient by `E⁻` realized on the
/// orthogonal complement of the frame under the standard realified inner
/// product, with `s⁺` expanded exactly as real polynomials in the
/// realified chart coordinates `(a_i, b_i)`.
#[derive(Clone, Debug)]
pub struct ReducedChart {
    base: DarbouxModel,
    eminus: SubbundleFrame,
    eplus_rank: usize,
    splus: Vec<Polynomial>,
    complement: Vec<Vec<GaussianRational>>,
}

impl ReducedChart {
    pub fn base(&self) -> &DarbouxModel {
        &self.base
    }

    pub fn eminus(&self) -> &SubbundleFrame {
        &self.eminus
    }

    pub fn eplus_rank(&self) -> usize {
        self.eplus_rank
    }

    pub fn splus(&self) -> &[Polynomial] {
        &self.splus
    }

    /// Exact complement basis (columns of the realified fibre).
    pub fn complement(&self) -> &[Vec<GaussianRational>] {
        &self.complement
    }

    /// Real chart dimension of the reduced chart.
    pub fn dim_real(&self) -> usize {
        2 * self.base.m()
    }

    /// The dimension identity `dim_ℝ U − rank E⁺ = vdim` (holds whenever
    /// (*) does at the sampled zeros).
    pub fn dimension_identity_holds(&self) -> bool {
        self.dim_real() as i64 - self.eplus_rank as i64 == tangent::virtual_dimension(&self.base)
    }

    /// Evaluate `s⁺` at a realified point.
    pub fn splus_at(&self, u: &[f64]) -> Result<Vec<f64>, AlgebraError> {
        self.splus.iter().map(|p| p.eval_real_f64(u)).collect()
    }

    /// Euclidean norm of the full section `s` at a realified point.
    pub fn s_norm_at(&self, u: &[f64]) -> Result<f64, AlgebraError> {
        let point: Vec<C64> = u.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        let mut acc = 0.0;
        for s in self.base.s() {
            acc += s.eval_c64(&point)?.norm_sqr();
        }
        Ok(acc.sqrt())
    }
}

/// Build the reduction of `model` by the frame `eminus`.
///
/// The frame entries are interpreted exactly (every f64 is a dyadic
/// rational), the complement is the exact kernel of the frame matrix, and
/// `s⁺` is the exact coordinate vector of the realified section in the
/// complement basis.
pub fn reduce(
    model: &DarbouxModel,
    eminus: &SubbundleFrame,
) -> Result<ReducedChart, ReductionError> {
    let n = model.n();
    if eminus.ambient() != 2 * n {
        return Err(ReductionError::BadFrame);
    }
    let r = eminus.rank_real();
    let eplus_rank = 2 * n - r;

    // Exact frame matrix, rows = frame vectors.
    let frame_rows: Vec<Vec<GaussianRational>> = eminus
        .frame()
        .iter()
        .map(|v| {
            v.iter()
                .map(|&x| GaussianRational::from_f64_exact(x, 0.0).ok_or(ReductionError::BadFrame))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let complement: Vec<Vec<GaussianRational>> = if r == 0 {
        (0..2 * n)
            .map(|i| {
                let mut e = vec![GaussianRational::zero(); 2 * n];
                e[i] = GaussianRational::one();
                e
            })
            .collect()
    } else {
        let f = ComplexMatrix::from_rows_exact(frame_rows.clone());
        let ker = f.kernel_basis();
        if ker.len() != eplus_rank {
            return Err(ReductionError::BadFrame);
        }
        ker
    };

    // Realified section: (Re s₁, Im s₁, …) as exact real polynomials.
    let mut s_real = Vec::with_capacity(2 * n);
    for s in model.s() {
        let (re, im) = s.realify();
        s_real.push(re);
        s_real.push(im);
    }

    // Coordinates of s_real in the (complement | frame) basis: apply the
    // exact inverse of the basis matrix and keep the complement rows.
    let mut cols = complement.clone();
    for fr in &frame_rows {
        cols.push(fr.clone());
    }
    let basis_mat = ComplexMatrix::from_cols_exact(cols, 2 * n);
    let nvars = 2 * model.m();
    let mut splus = Vec::with_capacity(eplus_rank);
    // Solve basis_mat · c = e_l for each unit vector to build the inverse
    // row by row, then combine symbolically.
    let mut inverse_rows: Vec<Vec<GaussianRational>> = vec![Vec::new(); 2 * n];
    for l in 0..2 * n {
        let mut e = vec![GaussianRational::zero(); 2 * n];
        e[l] = GaussianRational::one();
        let col = basis_mat
            .solve_exact(&e)
            .map_err(|_| ReductionError::BadFrame)?;
        for (k, val) in col.iter().enumerate() {
            inverse_rows[k].push(val.clone());
        }
    }
    for inv_row in inverse_rows.iter().take(eplus_rank) {
        let mut acc = Polynomial::zero(nvars);
        for (coef, sp) in inv_row.iter().zip(&s_real) {
            if !coef.is_zero() {
                acc = acc.add(&sp.scale(coef));
            }
        }
        splus.push(acc);
    }

    Ok(ReducedChart {
        base: model.clone(),
        eminus: eminus.clone(),
        eplus_rank,
        splus,
        complement,
    })
}

/// Deterministic samplers over realified domain boxes.
#[derive(Clone, Debug)]
pub enum Sampler {
    /// Regular grid with the given spacing along every realified axis.
    Grid { spacing: f64 },
    /// Seeded uniform samples.
    Random { count: usize, seed: u64 },
}

impl Sampler {
    /// Enumerate sample points of the realified box `[lo, hi]` per axis.
    pub fn points(&self, box_: &[(f64, f64)]) -> Vec<Vec<f64>> {
        match self {
            Sampler::Grid { spacing } => {
                let h = *spacing;
                assert!(h > 0.0, "grid spacing must be positive");
                let mut axes: Vec<Vec<f64>> = Vec::with_capacity(box_.len());
                for &(lo, hi) in box_ {
                    let steps = ((hi - lo) / h).round() as usize;
                    axes.push((0..=steps).map(|k| lo + k as f64 * h).collect());
                }
                let mut out = vec![Vec::new()];
                for axis in &axes {
                    let mut next = Vec::with_capacity(out.len() * axis.len());
                    for partial in &out {
                        for &x in axis {
                            let mut p = partial.clone();
                            p.push(x);
                            next.push(p);
                        }
                    }
                    out = next;
                }
                out
            }
            Sampler::Random { count, seed } => {
                let mut rng = ChaCha12Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| {
                        box_.iter()
                            .map(|&(lo, hi)| rng.random_range(lo..=hi))
                            .collect()
                    })
                    .collect()
            }
        }
    }
}

/// Realified domain box of a model.
pub fn realified_domain(model: &DarbouxModel) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(2 * model.m());
    for r in &model.domain().ranges {
        out.push((r[0], r[1]));
        out.push((r[2], r[3]));
    }
    out
}

/// Outcome of sampling condition (†).
#[derive(Clone, Debug)]
pub struct DaggerReport {
    /// Samples with `|s⁺| ≤ tol` but `|s| > √tol`: candidates showing
    /// `(s⁺)⁻¹(0) ⊋ s⁻¹(0)`.
    pub witness: Option<Vec<f64>>,
    pub samples_checked: usize,
    /// Largest observed residual of the orthogonal-splitting identity
    /// `Re Q(s,s) = Re Q(s̃⁺,s̃⁺) + Re Q(s⁻,s⁻)`.
    pub max_eq_residual: f64,
    /// Samples where the Re Q-orthogonal splitting was not solvable.
    pub split_failures: usize,
}

impl DaggerReport {
    pub fn no_counterexample(&self) -> bool {
        self.witness.is_none()
    }
}

/// Sample the chart domain for (†) counterexamples and check the
/// Q-orthogonal splitting identity at every sample.
pub fn check_dagger(
    rc: &ReducedChart,
    sampler: &Sampler,
    tol: f64,
) -> Result<DaggerReport, ReductionError> {
    let box_ = realified_domain(rc.base());
    if box_.is_empty() {
        return Err(ReductionError::EmptyDomain);
    }
    let points = sampler.points(&box_);
    if points.is_empty() {
        return Err(ReductionError::EmptyDomain);
    }
    let frame_mat = rc.eminus().matrix();
    let r = rc.eminus().rank_real();
    let splus_fast: Vec<CompiledPoly> = rc.splus().iter().map(CompiledPoly::new).collect();
    let s_fast: Vec<CompiledPoly> = rc.base().s().iter().map(CompiledPoly::new).collect();
    let q_fast: Vec<CompiledPoly> = rc.base().q().iter().map(CompiledPoly::new).collect();
    let mut witness = None;
    let mut max_res = 0.0f64;
    let mut split_failures = 0usize;
    for u in &points {
        let splus: Vec<f64> = splus_fast.iter().map(|p| p.eval_real(u)).collect();
        let splus_norm = splus.iter().map(|x| x * x).sum::<f64>().sqrt();
        let point: Vec<C64> = u.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        let s_complex: Vec<C64> = s_fast.iter().map(|p| p.eval_c64(&point)).collect();
        let s_norm = s_complex.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if splus_norm <= tol && s_norm > tol.sqrt() && witness.is_none() {
            witness = Some(u.clone());
        }
        // Splitting identity: s = s̃⁺ ⊕ s⁻ orthogonal w.r.t. Re Q|_u.
        let q_vals: Vec<C64> = q_fast.iter().map(|p| p.eval_c64(&point)).collect();
        let gram = re_q_gram(&q_vals);
        let mut s_vec = Vec::with_capacity(2 * rc.base().n());
        for val in &s_complex {
            s_vec.push(val.re);
            s_vec.push(val.im);
        }
        let q_of = |a: &[f64], b: &[f64]| -> f64 {
            let gb = gram.apply(b);
            a.iter().zip(&gb).map(|(x, y)| x * y).sum()
        };
        if r == 0 {
            // s̃⁺ = s: residual is exactly 0.
            continue;
        }
        // Solve (Fᵀ G F) c = Fᵀ G s for the E⁻ component.
        let gf = gram.matmul(&frame_mat);
        let ftgf = frame_mat.transpose().matmul(&gf);
        let ftgs = frame_mat.transpose().apply(&gram.apply(&s_vec));
        match ftgf.solve_square(&ftgs, tol * 1e-3) {
            Ok(c) => {
                let s_minus = frame_mat.apply(&c);
                let s_plus: Vec<f64> = s_vec.iter().zip(&s_minus).map(|(a, b)| a - b).collect();
                let res =
                    (q_of(&s_vec, &s_vec) - q_of(&s_plus, &s_plus) - q_of(&s_minus, &s_minus))
                        .abs();
                max_res = max_res.max(res);
            }
            Err(_) => split_failures += 1,
        }
    }
    Ok(DaggerReport {
        witness,
        samples_checked: points.len(),
        max_eq_residual: max_res,
        split_failures,
    })
}

/// A chart comparison in complex geometry: a submersion `φ : V_J → V_K`
/// with surjective bundle maps `χ : E_J → φ*E_K` and optionally
/// `ξ : F_J → φ*F_K`, all with polynomial entries in the J-coordinates.
#[derive(Clone, Debug)]
pub struct ChartComparison {
    /// `m_K` polynomials in the `m_J` chart variables.
    pub phi: Vec<Polynomial>,
    /// `n_K × n_J` polynomial matrix.
    pub chi: Vec<Vec<Polynomial>>,
    /// `m_K × m_J` polynomial matrix (derived maps need it; optional).
    pub xi: Option<Vec<Vec<Polynomial>>>,
}

impl ChartComparison {
    /// The identity comparison of a model with itself.
    pub fn identity(model: &DarbouxModel) -> Self {
        let m = model.m();
        let n = model.n();
        let phi = (0..m).map(|i| Polynomial::var(m, i)).collect();
        let chi = (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| {
                        if r == c {
                            Polynomial::one(m)
                        } else {
                            Polynomial::zero(m)
                        }
                    })
                    .collect()
            })
            .collect();
        let xi = (0..m)
            .map(|r| {
                (0..m)
                    .map(|c| {
                        if r == c {
                            Polynomial::one(m)
                        } else {
                            Polynomial::zero(m)
                        }
                    })
                    .collect()
            })
            .collect();
        ChartComparison {
            phi,
            chi,
            xi: Some(xi),
        }
    }

    /// `dφ|_v` as an exact m_K×m_J matrix.
    pub fn dphi_at(&self, v: &[GaussianRational]) -> Result<ComplexMatrix, AlgebraError> {
        let mj = v.len();
        let mut rows = Vec::with_capacity(self.phi.len());
        for p in &self.phi {
            let mut row = Vec::with_capacity(mj);
            for i in 0..mj {
                row.push(p.partial(i)?.eval(v)?);
            }
            rows.push(row);
        }
        Ok(ComplexMatrix::from_rows_exact(rows))
    }

    /// `χ|_v` as an exact n_K×n_J matrix.
    pub fn chi_at(&self, v: &[GaussianRational]) -> Result<ComplexMatrix, AlgebraError> {
        let rows = self
            .chi
            .iter()
            .map(|row| row.iter().map(|p| p.eval(v)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ComplexMatrix::from_rows_exact(rows))
    }

    /// `φ(v)` exactly.
    pub fn phi_at(&self, v: &[GaussianRational]) -> Result<Vec<GaussianRational>, AlgebraError> {
        self.phi.iter().map(|p| p.eval(v)).collect()
    }

    /// Verify the intertwining identity `χ(s_J) = φ*(s_K)` exactly.
    pub fn intertwines_sections(
        &self,
        model_j: &DarbouxModel,
        model_k: &DarbouxModel,
    ) -> Result<bool, AlgebraError> {
        for (l, row) in self.chi.iter().enumerate() {
            let mut lhs = Polynomial::zero(model_j.m());
            for (c, sj) in row.iter().zip(model_j.s()) {
                lhs = lhs.add(&c.mul(sj));
            }
            let rhs = model_k.s()[l].substitute(&self.phi)?;
            if lhs != rhs {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Express vectors of a subspace `W ⊆ span(basis)` in basis coordinates
/// and return the orthogonal complement of `W` inside the span, as
/// ambient vectors. Deterministic, lowest pivot first; when `W` is empty
/// the basis itself is returned.
fn complement_within(
    basis: &[Vec<f64>],
    w_vectors: &[Vec<f64>],
    ambient: usize,
    tol: f64,
) -> Result<Vec<Vec<f64>>, ReductionError> {
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    if w_vectors.is_empty() {
        return Ok(basis.to_vec());
    }
    let b = RealMatrix::from_cols(basis, ambient);
    // Coordinates of each w in the basis.
    let mut coord_rows = Vec::with_capacity(w_vectors.len());
    for w in w_vectors {
        let c = b
            .solve_least_squares(w, tol * 1e-3)
            .map_err(|_| ReductionError::NoValidComplement)?;
        let recon = b.apply(&c);
        let err: f64 = recon
            .iter()
            .zip(w)
            .map(|(a, x)| (a - x).powi(2))
            .sum::<f64>()
            .sqrt();
        if err > tol * 100.0 {
            return Err(ReductionError::NoValidComplement);
        }
        coord_rows.push(c);
    }
    let m = RealMatrix::from_rows(coord_rows);
    let ker = m.kernel_basis(tol);
    Ok(ker.iter().map(|c| b.apply(c)).collect())
}

/// Pull back `(U_K, E_K⁻)` along a comparison to a frame on the J-chart:
/// `E' = χ⁻¹(E_K⁻)`, `E''' = (∇s_J)[Ker dφ]` with the trivial connection,
/// and `E_J⁻` the orthogonal complement of the projection of `E'''`
/// inside `E'`. Verifies the direct-sum certificate and condition (*) at
/// every sample zero.
pub fn pullback_subbundle(
    model_j: &DarbouxModel,
    model_k: &DarbouxModel,
    comparison: &ChartComparison,
    eminus_k: &SubbundleFrame,
    sample_zeros: &[Vec<GaussianRational>],
    tol: f64,
) -> Result<SubbundleFrame, ReductionError> {
    let n_j = model_j.n();
    let n_k = model_k.n();
    let m_k = model_k.m();
    if eminus_k.ambient() != 2 * n_k || sample_zeros.is_empty() {
        return Err(ReductionError::BadFrame);
    }
    // Rank certificates at every sample zero.
    for v in sample_zeros {
        let chi = comparison.chi_at(v)?;
        if chi.rank() != n_k {
            return Err(ReductionError::RankDrop { map: "chi" });
        }
        let dphi = comparison.dphi_at(v)?;
        if dphi.rank() != m_k {
            return Err(ReductionError::RankDrop { map: "dphi" });
        }
    }
    let base = &sample_zeros[0];
    let chi_real = comparison.chi_at(base)?.realify();
    let dphi = comparison.dphi_at(base)?;
    let ds_j_real = tangent::ds_at(model_j, base)?.realify();

    // E' = χ⁻¹(span E_K⁻): minimum-norm preimages of the frame plus Ker χ.
    let mut eprime: Vec<Vec<f64>> = Vec::new();
    let chi_chit = chi_real.matmul(&chi_real.transpose());
    for f in eminus_k.frame() {
        let y = chi_chit
            .solve_square(f, tol * 1e-3)
            .map_err(|_| ReductionError::RankDrop { map: "chi" })?;
        eprime.push(chi_real.transpose().apply(&y));
    }
    for kv in chi_real.kernel_basis(tol) {
        eprime.push(kv);
    }

    // E''' = ds_J[Ker dφ] (realified complex kernel).
    let mut etriple: Vec<Vec<f64>> = Vec::new();
    for w in dphi.kernel_basis() {
        let img = tangent::ds_at(model_j, base)?.apply_exact(&w);
        let img_c: Vec<C64> = img.iter().map(|z| z.to_c64()).collect();
        let i_img: Vec<C64> = img_c.iter().map(|z| C64::new(0.0, 1.0) * z).collect();
        etriple.push(realify_vector(&img_c));
        etriple.push(realify_vector(&i_img));
    }

    // E'' = orthogonal complement of E' in the ambient fibre.
    let eprime_space =
        RealSubspace::new(2 * n_j, eprime.clone(), tol).map_err(|_| ReductionError::BadFrame)?;
    let edouble = eprime_space.orthogonal_complement();

    // Project E''' into E' along E'': coordinates in the (E' | E'') basis.
    let mut all_cols = eprime.clone();
    all_cols.extend(edouble.basis().iter().cloned());
    let full = RealMatrix::from_cols(&all_cols, 2 * n_j);
    let mut projected: Vec<Vec<f64>> = Vec::new();
    for w in &etriple {
        let c = full
            .solve_least_squares(w, tol * 1e-3)
            .map_err(|_| ReductionError::NoValidComplement)?;
        let ep = RealMatrix::from_cols(&eprime, 2 * n_j);
        projected.push(ep.apply(&c[..eprime.len()]));
    }

    // E_J⁻ = complement of the projected E''' inside E'.
    let frame = complement_within(&eprime, &projected, 2 * n_j, tol)?;
    let result = SubbundleFrame::new(2 * n_j, frame, tol)?;

    // Direct-sum certificate: E_J = E_J⁻ ⊕ E'' ⊕ E'''.
    let mut stack: Vec<Vec<f64>> = result.frame().to_vec();
    stack.extend(edouble.basis().iter().cloned());
    stack.extend(etriple.iter().cloned());
    let total = RealMatrix::from_cols(&stack, 2 * n_j);
    if stack.len() != 2 * n_j || total.rank(tol) != 2 * n_j {
        return Err(ReductionError::NoValidComplement);
    }
    let _ = ds_j_real;

    // Condition (*) at every sample zero.
    for (i, z) in sample_zeros.iter().enumerate() {
        let star = check_star(model_j, &result, z, None, tol)?;
        if !star.pass() {
            return Err(ReductionError::StarFailedAfterPullback { index: i });
        }
    }
    Ok(result)
}

/// Pointwise matrices of a comparison at a zero, for the pushforward.
#[derive(Clone, Debug)]
pub struct PointComparison {
    pub ds_j: ComplexMatrix,
    pub t_j: ComplexMatrix,
    pub dphi: ComplexMatrix,
    pub chi: ComplexMatrix,
    pub xi: ComplexMatrix,
}

impl PointComparison {
    /// Collect the pointwise data of a comparison at a zero of `s_J`.
    pub fn at_zero(
        model_j: &DarbouxModel,
        comparison: &ChartComparison,
        v: &[GaussianRational],
    ) -> Result<Self, ReductionError> {
        let xi = match &comparison.xi {
            Some(rows) => {
                let data = rows
                    .iter()
                    .map(|row| row.iter().map(|p| p.eval(v)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                ComplexMatrix::from_rows_exact(data)
            }
            None => {
                return Err(ReductionError::PushforwardCertificate {
                    step: "input",
                    reason: "comparison lacks xi".into(),
                })
            }
        };
        Ok(PointComparison {
            ds_j: tangent::ds_at(model_j, v)?,
            t_j: tangent::t_at(model_j, v)?,
            dphi: comparison.dphi_at(v)?,
            chi: comparison.chi_at(v)?,
            xi,
        })
    }
}

/// Pushforward of `E_J⁻|_v` along the comparison at a single zero,
/// following the splitting construction: `T' = Ker dφ`, `E' = ds[T']`,
/// `E''` a complement of `E'` in `Ker χ`, `F'' = t[E'']`, `F̃` a complement
/// containing `Im t` modulo `F''`, `Ẽ⁻ = E⁻ ∩ t⁻¹(F̃)`, and finally
/// `E_K⁻ = χ[Ẽ⁻]` with every injectivity/rank certificate checked.
pub fn pushforward_subspace_at(
    data: &PointComparison,
    eminus_j_at_v: &RealSubspace,
    tol: f64,
) -> Result<RealSubspace, ReductionError> {
    let n_j = data.ds_j.rows();
    let m_j = data.ds_j.cols();
    let n_k = data.chi.rows();
    let m_k = data.dphi.rows();
    let cert = |step: &'static str, reason: String| ReductionError::PushforwardCertificate {
        step,
        reason,
    };
    if eminus_j_at_v.ambient() != 2 * n_j {
        return Err(cert("input", "frame ambient mismatch".into()));
    }

    let ds_real = data.ds_j.realify();
    let t_real = data.t_j.realify();
    let dphi_real = data.dphi.realify();
    let chi_real = data.chi.realify();
    let xi_real = data.xi.realify();

    // Rows are complexes: t∘ds ≈ 0.
    let comp = t_real.matmul(&ds_real);
    let comp_norm = (0..comp.rows())
        .flat_map(|i| (0..comp.cols()).map(move |j| (i, j)))
        .map(|(i, j)| comp.get(i, j).abs())
        .fold(0.0f64, f64::max);
    if comp_norm > tol * 100.0 {
        return Err(cert("rows", format!("t∘ds = {:.3e} != 0", comp_norm)));
    }
    // Columns surjective.
    if dphi_real.rank(tol) != 2 * m_k {
        return Err(cert("columns", "dphi not surjective".into()));
    }
    if chi_real.rank(tol) != 2 * n_k {
        return Err(cert("columns", "chi not surjective".into()));
    }
    if xi_real.rank(tol) != 2 * m_k {
        return Err(cert("columns", "xi not surjective".into()));
    }

    // (i) T' = Ker dφ.
    let tprime = dphi_real.kernel_basis(tol);
    // (iii) E' = ds[T'], must be injective on T' and land in Ker χ.
    let eprime: Vec<Vec<f64>> = tprime.iter().map(|w| ds_real.apply(w)).collect();
    let eprime_rank = if eprime.is_empty() {
        0
    } else {
        RealMatrix::from_cols(&eprime, 2 * n_j).rank(tol)
    };
    if eprime_rank != tprime.len() {
        return Err(cert("iii", "ds not injective on Ker dphi".into()));
    }
    for v in &eprime {
        let img = chi_real.apply(v);
        let norm: f64 = img.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > tol * 100.0 {
            return Err(cert("iii", "ds[Ker dphi] not inside Ker chi".into()));
        }
    }
    // (iv) E'' = complement of E' in Ker χ.
    let ker_chi = chi_real.kernel_basis(tol);
    let edouble = complement_within(&ker_chi, &eprime, 2 * n_j, tol)?;
    // (v) F'' = t[E''], injective, inside Ker ξ.
    let fdouble: Vec<Vec<f64>> = edouble.iter().map(|w| t_real.apply(w)).collect();
    let fdouble_rank = if fdouble.is_empty() {
        0
    } else {
        RealMatrix::from_cols(&fdouble, 2 * m_j).rank(tol)
    };
    if fdouble_rank != edouble.len() {
        return Err(cert("v", "t not injective on E''".into()));
    }
    for v in &fdouble {
        let img = xi_real.apply(v);
        let norm: f64 = img.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > tol * 100.0 {
            return Err(cert("v", "t[E''] not inside Ker xi".into()));
        }
    }
    // (vi) F''' = complement of F'' in Ker ξ.
    let ker_xi = xi_real.kernel_basis(tol);
    let ftriple = complement_within(&ker_xi, &fdouble, 2 * m_j, tol)?;

    // (vii) F̃ ⊇ complement of F'' inside Im t, extended to split F.
    let im_t_cols: Vec<Vec<f64>> = (0..2 * n_j).map(|j| t_real.col(j)).collect();
    let mut im_t_space = RealSubspace::zero(2 * m_j, tol);
    for c in &im_t_cols {
        if let Ok(s) = RealSubspace::new(2 * m_j, vec![c.clone()], tol) {
            im_t_space = im_t_space.sum(&s);
        }
    }
    // Complement of F'' inside Im t + F''.
    let mut imt_plus_fd = im_t_space.clone();
    for f in &fdouble {
        if let Ok(s) = RealSubspace::new(2 * m_j, vec![f.clone()], tol) {
            imt_plus_fd = imt_plus_fd.sum(&s);
        }
    }
    let b1 = complement_within(imt_plus_fd.basis(), &fdouble, 2 * m_j, tol)?;
    // Extend (B1 | F'' | F''') to all of F with standard basis vectors.
    let mut partial: Vec<Vec<f64>> = b1.clone();
    partial.extend(fdouble.iter().cloned());
    partial.extend(ftriple.iter().cloned());
    let mut ftilde = b1.clone();
    for idx in 0..2 * m_j {
        if partial.len() == 2 * m_j {
            break;
        }
        let mut e = vec![0.0; 2 * m_j];
        e[idx] = 1.0;
        let mut trial = partial.clone();
        trial.push(e.clone());
        if RealMatrix::from_cols(&trial, 2 * m_j).rank(tol) == trial.len() {
            partial.push(e.clone());
            ftilde.push(e);
        }
    }
    if partial.len() != 2 * m_j {
        return Err(cert("vii", "could not split F".into()));
    }
    if ftilde.len() != 2 * m_k {
        return Err(cert(
            "vii",
            format!("dim F~ = {} != 2 m_K = {}", ftilde.len(), 2 * m_k),
        ));
    }

    // (viii) Ẽ⁻ = E⁻ ∩ t⁻¹(F̃): kernel of (coords onto F''⊕F''') ∘ t.
    let mut f_basis_cols: Vec<Vec<f64>> = ftilde.clone();
    f_basis_cols.extend(fdouble.iter().cloned());
    f_basis_cols.extend(ftriple.iter().cloned());
    let f_basis = RealMatrix::from_cols(&f_basis_cols, 2 * m_j);
    let drop_dim = fdouble.len() + ftriple.len();
    let mut proj_t = RealMatrix::zeros(drop_dim.max(1), 2 * n_j);
    if drop_dim > 0 {
        for e_idx in 0..2 * n_j {
            let mut e = vec![0.0; 2 * n_j];
            e[e_idx] = 1.0;
            let te = t_real.apply(&e);
            let coords = f_basis
                .solve_square(&te, tol * 1e-3)
                .map_err(|_| cert("viii", "F basis not invertible".into()))?;
            for d in 0..drop_dim {
                proj_t.set(d, e_idx, coords[ftilde.len() + d]);
            }
        }
    }
    let t_inv_ftilde = if drop_dim == 0 {
        // Everything maps into F̃.
        RealSubspace::new(
            2 * n_j,
            (0..2 * n_j)
                .map(|i| {
                    let mut e = vec![0.0; 2 * n_j];
                    e[i] = 1.0;
                    e
                })
                .collect(),
            tol,
        )
        .expect("standard basis")
    } else {
        RealSubspace::new(2 * n_j, proj_t.kernel_basis(tol), tol)
            .map_err(|_| cert("viii", "kernel extraction failed".into()))?
    };
    let etilde_minus = eminus_j_at_v.intersection(&t_inv_ftilde);

    // χ must be injective on Ẽ⁻ (verified, not assumed).
    let images: Vec<Vec<f64>> = etilde_minus
        .basis()
        .iter()
        .map(|v| chi_real.apply(v))
        .collect();
    let out_rank = if images.is_empty() {
        0
    } else {
        RealMatrix::from_cols(&images, 2 * n_k).rank(tol)
    };
    if out_rank != etilde_minus.dim() {
        return Err(cert("viii", "chi not injective on E~minus".into()));
    }
    RealSubspace::new(2 * n_k, images, tol)
        .map_err(|_| cert("output", "dependent output basis".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darboux::test_models::{conj_z2_model, extended_conj_z2_model, gr, linear_model};
    use crate::tangent::tangent_report;

    const TOL: f64 = 1e-9;

    #[test]
    fn star_passes_for_i_span_on_minimal_chart() {
        // s = (x², ix²), v = 0, E⁻ = span{i·e₁, i·e₂}: all checks pass.
        let model = conj_z2_model();
        let em = SubbundleFrame::i_span(2);
        let rep = check_star(&model, &em, &[gr(0)], None, TOL).unwrap();
        assert!(rep.transversal_ok);
        assert!(rep.t_surjective_ok);
        assert_eq!(rep.pi_image_dim, 2);
        assert!(rep.half_dim_ok);
        assert!(rep.negdef_ok);
        assert!(rep.pass());
        assert!((rep.margin - 1.0).abs() < 1e-6);
    }

    #[test]
    fn star_fails_for_wrong_sign_frame() {
        // E⁻ = span{e₁, e₂}: Re Q is positive definite there.
        let model = conj_z2_model();
        let em = SubbundleFrame::re_span(2);
        let rep = check_star(&model, &em, &[gr(0)], None, TOL).unwrap();
        assert!(!rep.negdef_ok);
        assert!(!rep.pass());
    }

    #[test]
    fn star_zero_frame_on_transverse_chart() {
        // s = (x, ix), E⁻ = {0}: the Π-related checks are vacuously fine
        // (h1 = 0, Im Π = 0), but t(E⁻) = 0 ≠ t(E) since t|₀ ≠ 0, so the
        // surjectivity condition and hence (*) overall fail.
        let model = linear_model();
        let em = SubbundleFrame::empty(4);
        let rep = check_star(&model, &em, &[gr(0)], None, TOL).unwrap();
        assert_eq!(rep.pi_image_dim, 0);
        assert!(rep.half_dim_ok);
        assert!(rep.negdef_ok);
        assert!(rep.transversal_ok);
        assert!(!rep.t_surjective_ok);
        assert!(!rep.pass());
    }

    #[test]
    fn star_i_span_passes_on_transverse_chart() {
        // The right frame on the transverse chart has full rank n: the
        // i-span meets Im ds trivially and t maps it onto t(E).
        let model = linear_model();
        let em = SubbundleFrame::i_span(2);
        let rep = check_star(&model, &em, &[gr(0)], None, TOL).unwrap();
        assert_eq!(rep.pi_image_dim, 0);
        assert!(rep.pass());
    }

    #[test]
    fn minimal_negative_identity_form() {
        // Q = diag(1,1): E⁻ = span{(i,0), (0,i)}.
        let model = conj_z2_model();
        let report = tangent_report(&model, &[gr(0)], None).unwrap();
        let frame = construct_minimal_negative(&report, TOL).unwrap();
        assert_eq!(frame.rank_real(), 2);
        let expected = SubbundleFrame::i_span(2);
        assert!(frame.subspace(TOL).same_span(&expected.subspace(TOL)));
    }

    #[test]
    fn minimal_negative_scaled_form() {
        // Q = diag(4): e₁ = 1/2, E⁻ = span{i/2}.
        let x = crate::darboux::test_models::x;
        let model = DarbouxModel::new(
            1,
            2,
            vec!["x".into()],
            vec![
                Polynomial::constant(1, gr(4)),
                Polynomial::constant(1, gr(4)),
            ],
            vec![x().pow(2), x().pow(2).scale(&GaussianRational::i())],
            crate::darboux::DomainBox::cube(1, 1.0),
            vec![vec![gr(0)]],
        )
        .unwrap();
        let report = tangent_report(&model, &[gr(0)], None).unwrap();
        let frame = construct_minimal_negative(&report, TOL).unwrap();
        // First frame vector should be i·(1/2, 0) realified = (0, 0.5, 0, 0).
        assert!((frame.frame()[0][1] - 0.5).abs() < 1e-12);
        let star = check_star(&model, &frame, &[gr(0)], None, TOL).unwrap();
        assert!(star.pass());
    }

    #[test]
    fn minimal_negative_hyperbolic_form() {
        // Q̃ = [[0,1],[1,0]]: isotropic diagonal forces the mixing step;
        // the output must still be Re Q-negative definite.
        let model = conj_z2_model();
        let mut report = tangent_report(&model, &[gr(0)], None).unwrap();
        let i = GaussianRational::i();
        report.qtilde =
            ComplexMatrix::from_rows_exact(vec![vec![gr(0), gr(1)], vec![gr(1), gr(0)]]);
        // Pretend the ambient form is hyperbolic too: embed via h1 basis
        // unchanged but validate definiteness with the report's Q̃ rather
        // than the model's diagonal Q.
        let frame = construct_minimal_negative(&report, TOL).unwrap();
        assert_eq!(frame.rank_real(), 2);
        // Evaluate Re Q̃ on the produced frame directly in class coords:
        // frame vectors are i·e_a mapped through h1 (identity here).
        let q = [
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ];
        let to_c = |v: &[f64]| -> Vec<C64> { v.chunks(2).map(|c| C64::new(c[0], c[1])).collect() };
        let form = |u: &[C64], w: &[C64]| -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..2 {
                for b in 0..2 {
                    acc += u[a] * q[a][b] * w[b];
                }
            }
            acc
        };
        let mut gram = RealMatrix::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                let u = to_c(&frame.frame()[a]);
                let w = to_c(&frame.frame()[b]);
                gram.set(a, b, form(&u, &w).re);
            }
        }
        let rep = crate::exactalg::real_definiteness_f64(&gram, TOL).unwrap();
        assert_eq!(rep.class, Definiteness::Negative);
        let _ = i;
    }

    #[test]
    fn minimal_negative_requires_minimal_point() {
        let model = linear_model();
        let report = tangent_report(&model, &[gr(0)], None).unwrap();
        assert!(matches!(
            construct_minimal_negative(&report, TOL),
            Err(ReductionError::NonMinimalPoint)
        ));
    }

    #[test]
    fn reduce_conj_z2_gives_expected_splus() {
        // s = (x², ix²), E⁻ = i-span: s⁺ = (a²−b², −2ab).
        let model = conj_z2_model();
        let rc = reduce(&model, &SubbundleFrame::i_span(2)).unwrap();
        assert_eq!(rc.eplus_rank(), 2);
        let a = Polynomial::var(2, 0);
        let b = Polynomial::var(2, 1);
        let expected0 = a.mul(&a).sub(&b.mul(&b));
        let expected1 = a.mul(&b).scale(&gr(-2));
        assert_eq!(rc.splus()[0], expected0);
        assert_eq!(rc.splus()[1], expected1);
        assert!(rc.dimension_identity_holds());
    }

    #[test]
    fn reduce_with_empty_frame_is_full_realification() {
        let model = linear_model();
        let rc = reduce(&model, &SubbundleFrame::empty(4)).unwrap();
        assert_eq!(rc.eplus_rank(), 4);
        // s⁺ = (a, b, −b, a).
        let a = Polynomial::var(2, 0);
        let b = Polynomial::var(2, 1);
        assert_eq!(rc.splus()[0], a);
        assert_eq!(rc.splus()[1], b);
        assert_eq!(rc.splus()[2], b.scale(&gr(-1)));
        assert_eq!(rc.splus()[3], a);
    }

    #[test]
    fn reduce_linear_with_i_span() {
        // s = (x, ix), E⁻ = i-span: s⁺ = (a, −b), zero set {0}.
        let model = linear_model();
        let rc = reduce(&model, &SubbundleFrame::i_span(2)).unwrap();
        let a = Polynomial::var(2, 0);
        let b = Polynomial::var(2, 1);
        assert_eq!(rc.splus()[0], a);
        assert_eq!(rc.splus()[1], b.scale(&gr(-1)));
    }

    #[test]
    fn dagger_no_counterexample_for_good_frame() {
        let model = conj_z2_model();
        let rc = reduce(&model, &SubbundleFrame::i_span(2)).unwrap();
        let rep = check_dagger(&rc, &Sampler::Grid { spacing: 0.25 }, TOL).unwrap();
        assert!(rep.no_counterexample());
        assert!(rep.max_eq_residual <= 1e-9);
        assert_eq!(rep.split_failures, 0);
    }

    /// The mixed frame span{i·e₁, e₂}: negative on the first generator,
    /// wrong sign on the second. Its reduction has s⁺ = (a²−b², a²−b²),
    /// which vanishes on the whole curve a = ±b.
    pub(crate) fn mixed_sign_frame() -> SubbundleFrame {
        SubbundleFrame::new(
            4,
            vec![vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0]],
            TOL,
        )
        .unwrap()
    }

    #[test]
    fn dagger_catches_wrong_sign_frame() {
        // s⁺ for the mixed frame vanishes on a curve where s ≠ 0, so the
        // grid locates a (†) counterexample witness.
        let model = conj_z2_model();
        let rc = reduce(&model, &mixed_sign_frame()).unwrap();
        let a = Polynomial::var(2, 0);
        let b = Polynomial::var(2, 1);
        let a2_b2 = a.mul(&a).sub(&b.mul(&b));
        assert_eq!(rc.splus()[0], a2_b2);
        assert_eq!(rc.splus()[1], a2_b2);
        let rep = check_dagger(&rc, &Sampler::Grid { spacing: 0.25 }, TOL).unwrap();
        assert!(!rep.no_counterexample());
        let w = rep.witness.unwrap();
        // The witness must genuinely satisfy |s⁺| small, |s| large.
        let sp = rc.splus_at(&w).unwrap();
        assert!(sp.iter().map(|x| x * x).sum::<f64>().sqrt() <= TOL);
        assert!(rc.s_norm_at(&w).unwrap() > TOL.sqrt());
        // The mixed frame also fails (*): Re Q̃ is indefinite on Im Π.
        let star = check_star(&model, &mixed_sign_frame(), &[gr(0)], None, TOL).unwrap();
        assert!(!star.negdef_ok);
    }

    #[test]
    fn dagger_all_real_frame_has_no_counterexample() {
        // E⁻ = span{e₁, e₂} also fails (*) (Re Q̃ positive there), but its
        // reduced zero set (2ab, a²−b²) still equals {0}: no (†) witness.
        let model = conj_z2_model();
        let rc = reduce(&model, &SubbundleFrame::re_span(2)).unwrap();
        let rep = check_dagger(&rc, &Sampler::Grid { spacing: 0.25 }, TOL).unwrap();
        assert!(rep.no_counterexample());
        let star = check_star(&model, &SubbundleFrame::re_span(2), &[gr(0)], None, TOL).unwrap();
        assert!(!star.pass());
    }

    #[test]
    fn dagger_linear_chart_clean() {
        let model = linear_model();
        let rc = reduce(&model, &SubbundleFrame::i_span(2)).unwrap();
        let rep = check_dagger(&rc, &Sampler::Grid { spacing: 0.2 }, TOL).unwrap();
        assert!(rep.no_counterexample());
    }

    #[test]
    fn random_sampler_is_deterministic() {
        let s1 = Sampler::Random { count: 8, seed: 42 };
        let s2 = Sampler::Random { count: 8, seed: 42 };
        let box_ = vec![(-1.0, 1.0), (-1.0, 1.0)];
        assert_eq!(s1.points(&box_), s2.points(&box_));
    }

    #[test]
    fn pullback_along_identity_is_identity() {
        let model = conj_z2_model();
        let cmp = ChartComparison::identity(&model);
        let em = SubbundleFrame::i_span(2);
        let out = pullback_subbundle(&model, &model, &cmp, &em, &[vec![gr(0)]], TOL).unwrap();
        assert!(out.subspace(TOL).same_span(&em.subspace(TOL)));
    }

    /// Comparison from the (m=2, n=4) extension chart down to the base
    /// conj-z2 chart: φ drops the added coordinate, χ projects onto the
    /// first two fibre coordinates, ξ onto the first chart form.
    pub(crate) fn extension_comparison() -> ChartComparison {
        let m_j = 2;
        let phi = vec![Polynomial::var(m_j, 0)];
        let chi = vec![
            vec![
                Polynomial::one(m_j),
                Polynomial::zero(m_j),
                Polynomial::zero(m_j),
                Polynomial::zero(m_j),
            ],
            vec![
                Polynomial::zero(m_j),
                Polynomial::one(m_j),
                Polynomial::zero(m_j),
                Polynomial::zero(m_j),
            ],
        ];
        let xi = vec![vec![Polynomial::one(m_j), Polynomial::zero(m_j)]];
        ChartComparison {
            phi,
            chi,
            xi: Some(xi),
        }
    }

    #[test]
    fn pullback_along_extension_satisfies_star() {
        let model_j = extended_conj_z2_model(1);
        let model_k = conj_z2_model();
        let cmp = extension_comparison();
        assert!(cmp.intertwines_sections(&model_j, &model_k).unwrap());
        let em_k = SubbundleFrame::i_span(2);
        let zeros = vec![vec![gr(0), gr(0)]];
        let out = pullback_subbundle(&model_j, &model_k, &cmp, &em_k, &zeros, TOL).unwrap();
        let star = check_star(&model_j, &out, &[gr(0), gr(0)], None, TOL).unwrap();
        assert!(star.pass());
    }

    #[test]
    fn pullback_rejects_rank_drop() {
        let model = conj_z2_model();
        let mut cmp = ChartComparison::identity(&model);
        // χ with a polynomial entry vanishing at the zero: rank drop.
        cmp.chi[0][0] = Polynomial::var(1, 0);
        cmp.chi[1][1] = Polynomial::var(1, 0);
        let em = SubbundleFrame::i_span(2);
        assert!(matches!(
            pullback_subbundle(&model, &model, &cmp, &em, &[vec![gr(0)]], TOL),
            Err(ReductionError::RankDrop { .. })
        ));
    }

    #[test]
    fn pushforward_identity_returns_input() {
        let model = conj_z2_model();
        let cmp = ChartComparison::identity(&model);
        let data = PointComparison::at_zero(&model, &cmp, &[gr(0)]).unwrap();
        let em = SubbundleFrame::i_span(2).subspace(TOL);
        let out = pushforward_subspace_at(&data, &em, TOL).unwrap();
        assert!(out.same_span(&em));
    }

    #[test]
    fn pushforward_from_extension_satisfies_star() {
        // Push the canonical J-frame from the extension chart down to the
        // minimal K-chart; the result must satisfy (*) at v_K = 0.
        let model_j = extended_conj_z2_model(1);
        let model_k = conj_z2_model();
        let cmp = extension_comparison();
        let data = PointComparison::at_zero(&model_j, &cmp, &[gr(0), gr(0)]).unwrap();
        let em_j = SubbundleFrame::i_span(4).subspace(TOL);
        let out = pushforward_subspace_at(&data, &em_j, TOL).unwrap();
        let frame = SubbundleFrame::new(4, out.basis().to_vec(), TOL).unwrap();
        let star = check_star(&model_k, &frame, &[gr(0)], None, TOL).unwrap();
        assert!(star.pass(), "star report: {:?}", star);
    }

    #[test]
    fn exact_sequence_rank_bookkeeping() {
        // For a passing pair at a zero: rank_ℝ ds⁺|_v = 2m − dim_ℝ h0 and
        // eplus_rank − rank ds⁺|_v = dim_ℝ h1 − dim Im Π (the alternating
        // ranks of the four-term sequence).
        for (model, frame) in [
            (conj_z2_model(), SubbundleFrame::i_span(2)),
            (linear_model(), SubbundleFrame::i_span(2)),
            (extended_conj_z2_model(1), SubbundleFrame::i_span(4)),
        ] {
            let zero = vec![gr(0); model.m()];
            let star = check_star(&model, &frame, &zero, None, TOL).unwrap();
            assert!(star.pass());
            let report = tangent_report(&model, &zero, None).unwrap();
            let rc = reduce(&model, &frame).unwrap();
            // Realified Jacobian of s⁺ at the zero.
            let real_zero: Vec<f64> = zero
                .iter()
                .flat_map(|z| [z.to_c64().re, z.to_c64().im])
                .collect();
            let mut jac = RealMatrix::zeros(rc.eplus_rank(), rc.dim_real());
            for (r, sp) in rc.splus().iter().enumerate() {
                for c in 0..rc.dim_real() {
                    let val = sp.partial(c).unwrap().eval_real_f64(&real_zero).unwrap();
                    jac.set(r, c, val);
                }
            }
            let rank = jac.rank(TOL);
            assert_eq!(rank, 2 * model.m() - 2 * report.h0_dim());
            assert_eq!(
                rc.eplus_rank() - rank,
                2 * report.h1_dim() - star.pi_image_dim
            );
        }
    }

    #[test]
    fn relative_star_on_family_chart() {
        // m=2, s = (x₁², ix₁²), τ = x₂: the fibre analysis at 0 matches
        // the absolute minimal chart, and the i-span frame passes the
        // relative (*).
        let m = 2;
        let x1 = Polynomial::var(m, 0);
        let model = DarbouxModel::new(
            m,
            2,
            vec!["x1".into(), "x2".into()],
            vec![Polynomial::one(m), Polynomial::one(m)],
            vec![x1.pow(2), x1.pow(2).scale(&GaussianRational::i())],
            crate::darboux::DomainBox::cube(m, 1.0),
            vec![vec![gr(0), gr(0)]],
        )
        .unwrap();
        let rel = crate::tangent::RelativeContext::new(vec![Polynomial::var(m, 1)]);
        let star = check_star(
            &model,
            &SubbundleFrame::i_span(2),
            &[gr(0), gr(0)],
            Some(&rel),
            TOL,
        )
        .unwrap();
        assert!(star.pass(), "{:?}", star);
        assert_eq!(star.pi_image_dim, 2);
    }

    #[test]
    fn pullback_pushforward_round_trip() {
        // Pull the K-frame back to J, push the result forward again at
        // the shared zero: the verdicts of (*) agree at v_K.
        let model_j = extended_conj_z2_model(1);
        let model_k = conj_z2_model();
        let cmp = extension_comparison();
        let em_k = SubbundleFrame::i_span(2);
        let zeros_j = vec![vec![gr(0), gr(0)]];
        let em_j = pullback_subbundle(&model_j, &model_k, &cmp, &em_k, &zeros_j, TOL).unwrap();
        let data = PointComparison::at_zero(&model_j, &cmp, &zeros_j[0]).unwrap();
        let back = pushforward_subspace_at(&data, &em_j.subspace(TOL), TOL).unwrap();
        let back_frame = SubbundleFrame::new(4, back.basis().to_vec(), TOL).unwrap();
        let star_original = check_star(&model_k, &em_k, &[gr(0)], None, TOL).unwrap();
        let star_back = check_star(&model_k, &back_frame, &[gr(0)], None, TOL).unwrap();
        assert_eq!(star_original.pass(), star_back.pass());
        assert_eq!(star_original.pi_image_dim, star_back.pi_image_dim);
        assert!(star_back.pass());
    }

    #[test]
    fn pushforward_detects_broken_injectivity() {
        // The complex line (0,0,1,i) lies in Ker t ∩ Ker χ, so a frame
        // containing it lands in Ẽ⁻ but dies under χ: the step-(viii)
        // injectivity certificate must fail.
        let model_j = extended_conj_z2_model(1);
        let cmp = extension_comparison();
        let data = PointComparison::at_zero(&model_j, &cmp, &[gr(0), gr(0)]).unwrap();
        let w = vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
        ];
        let iw: Vec<C64> = w.iter().map(|z| C64::new(0.0, 1.0) * z).collect();
        let sub = RealSubspace::new(8, vec![realify_vector(&w), realify_vector(&iw)], TOL).unwrap();
        let result = pushforward_subspace_at(&data, &sub, TOL);
        assert!(matches!(
            result,
            Err(ReductionError::PushforwardCertificate { step: "viii", .. })
        ));
    }
}
