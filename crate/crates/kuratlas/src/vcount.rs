//! Signed zero counting for vdim-0 reduced charts: grid-seeded damped
//! Newton refinement, Jacobian-sign classification, planar local degrees
//! by winding number, and the orientation-adjusted total.
//!
//! Degenerate zeros are resolved by winding only in dimension 2;
//! elsewhere the count is reported as `NotCountable` rather than guessed.

use thiserror::Error;

use crate::exactalg::{AlgebraError, CompiledPoly, GaussianRational, Polynomial, RealMatrix};
use crate::orientation::OrientationData;
use crate::reduction::{realified_domain, ReducedChart, Sampler};

#[derive(Debug, Error)]
pub enum CountError {
    #[error(
        "find_zeros requires a square system (vdim 0), got {dim} variables and {rank} equations"
    )]
    NonSquareSystem { dim: usize, rank: usize },
    #[error("zero is not isolated at radius {radius}: min |s⁺| on the circle is {min_norm:.3e}")]
    NotIsolated { radius: f64, min_norm: f64 },
    #[error("winding is only defined for planar (2×2) systems")]
    NotPlanar,
    #[error("angle step too large; increase the sample count")]
    UnderSampled,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A square real polynomial system on a box; the raw input of the zero
/// counter. Reductions provide one via [`RealSystem::from_reduced`].
#[derive(Clone, Debug)]
pub struct RealSystem {
    pub name: String,
    pub polys: Vec<Polynomial>,
    pub domain: Vec<(f64, f64)>,
}

impl RealSystem {
    pub fn new(name: &str, polys: Vec<Polynomial>, domain: Vec<(f64, f64)>) -> Self {
        RealSystem {
            name: name.to_string(),
            polys,
            domain,
        }
    }

    pub fn from_reduced(rc: &ReducedChart) -> Self {
        RealSystem {
            name: format!("reduced({})", rc.base().variables().join(",")),
            polys: rc.splus().to_vec(),
            domain: realified_domain(rc.base()),
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }
}

/// Classification of one zero.
#[derive(Clone, Debug, PartialEq)]
pub enum ZeroKind {
    /// |det Jac| above the tolerance; carries the sign of the Jacobian.
    Nondegenerate { jacobian_sign: i8 },
    /// Jacobian numerically singular; `local_degree` filled in when a
    /// planar winding resolution has been run.
    Degenerate { local_degree: Option<i64> },
}

#[derive(Clone, Debug)]
pub struct Zero {
    pub point: Vec<f64>,
    pub kind: ZeroKind,
    pub jacobian_det: f64,
    /// The point rounded to small rationals reproduces `s⁺ = 0` exactly.
    pub exact_verified: bool,
}

#[derive(Clone, Debug)]
pub struct ZeroSet {
    pub chart: String,
    pub zeros: Vec<Zero>,
}

/// Newton refinement parameters.
#[derive(Clone, Copy, Debug)]
pub struct NewtonParams {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams {
            max_iter: 80,
            tol: 1e-12,
        }
    }
}

struct CompiledSystem {
    funcs: Vec<CompiledPoly>,
    jacobian: Vec<Vec<CompiledPoly>>,
    dim: usize,
}

impl CompiledSystem {
    fn new(sys: &RealSystem) -> Result<Self, CountError> {
        let dim = sys.dim();
        let rank = sys.polys.len();
        if dim != rank || dim == 0 {
            return Err(CountError::NonSquareSystem { dim, rank });
        }
        let funcs: Vec<CompiledPoly> = sys.polys.iter().map(CompiledPoly::new).collect();
        let mut jacobian = Vec::with_capacity(rank);
        for s in &sys.polys {
            let mut row = Vec::with_capacity(dim);
            for i in 0..dim {
                row.push(CompiledPoly::new(&s.partial(i)?));
            }
            jacobian.push(row);
        }
        Ok(CompiledSystem {
            funcs,
            jacobian,
            dim,
        })
    }

    fn value(&self, u: &[f64]) -> Vec<f64> {
        self.funcs.iter().map(|f| f.eval_real(u)).collect()
    }

    fn norm(&self, u: &[f64]) -> f64 {
        self.value(u).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn jacobian_at(&self, u: &[f64]) -> RealMatrix {
        let mut m = RealMatrix::zeros(self.dim, self.dim);
        for (i, row) in self.jacobian.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                m.set(i, j, p.eval_real(u));
            }
        }
        m
    }
}

/// Grid-seeded damped Newton search over an explicit square system.
///
/// Candidates are deduplicated by distance (scaled to the residual
/// tolerance, since degenerate zeros localize only to `√tol`), classified
/// by the Jacobian determinant, and snapped to exactly verified rational
/// points whenever the coordinates round cleanly.
pub fn find_zeros_in(
    sys: &RealSystem,
    sampler: &Sampler,
    newton: &NewtonParams,
) -> Result<ZeroSet, CountError> {
    let compiled = CompiledSystem::new(sys)?;
    let seeds = sampler.points(&sys.domain);
    let mut found: Vec<Vec<f64>> = Vec::new();
    // Quadratic-order zeros are located only to √tol; cluster generously.
    let dedup_radius = (20.0 * newton.tol.sqrt()).max(1e-7);
    for seed in seeds {
        let Some(z) = newton_refine(&compiled, &seed, newton) else {
            continue;
        };
        let inside = z
            .iter()
            .zip(&sys.domain)
            .all(|(x, (lo, hi))| *x >= lo - 1e-9 && *x <= hi + 1e-9);
        if !inside {
            continue;
        }
        let duplicate = found.iter().any(|w| {
            w.iter()
                .zip(&z)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
                < dedup_radius
        });
        if !duplicate {
            found.push(z);
        }
    }
    found.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| !o.is_eq())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let class_tol = 1e3 * newton.tol;
    let zeros = found
        .into_iter()
        .map(|point| {
            // Snap to an exactly verified rational zero when possible.
            let (point, exact_verified) = match snap_exact(sys, &point) {
                Some(p) => (p, true),
                None => (point, false),
            };
            let det = compiled.jacobian_at(&point).det().unwrap_or(0.0);
            let kind = if det.abs() > class_tol {
                ZeroKind::Nondegenerate {
                    jacobian_sign: if det > 0.0 { 1 } else { -1 },
                }
            } else {
                ZeroKind::Degenerate { local_degree: None }
            };
            Zero {
                point,
                kind,
                jacobian_det: det,
                exact_verified,
            }
        })
        .collect();
    Ok(ZeroSet {
        chart: sys.name.clone(),
        zeros,
    })
}

/// [`find_zeros_in`] on the reduced chart's own system.
pub fn find_zeros(
    rc: &ReducedChart,
    sampler: &Sampler,
    newton: &NewtonParams,
) -> Result<ZeroSet, CountError> {
    let dim = rc.dim_real();
    let rank = rc.eplus_rank();
    if dim != rank {
        return Err(CountError::NonSquareSystem { dim, rank });
    }
    find_zeros_in(&RealSystem::from_reduced(rc), sampler, newton)
}

fn newton_refine(sys: &CompiledSystem, seed: &[f64], params: &NewtonParams) -> Option<Vec<f64>> {
    let mut x = seed.to_vec();
    let mut fx = sys.norm(&x);
    for _ in 0..params.max_iter {
        if fx <= params.tol {
            return Some(x);
        }
        let jac = sys.jacobian_at(&x);
        let rhs: Vec<f64> = sys.value(&x).iter().map(|v| -v).collect();
        let Ok(step) = jac.solve_square(&rhs, 1e-14) else {
            return None; // singular Jacobian away from a zero: drop seed
        };
        // Backtracking damping.
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            let ft = sys.norm(&trial);
            if ft < fx {
                x = trial;
                fx = ft;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            return if fx <= params.tol { Some(x) } else { None };
        }
    }
    if fx <= params.tol {
        Some(x)
    } else {
        None
    }
}

/// Round to rationals with denominator 4096 and return the snapped point
/// when the system vanishes there exactly.
fn snap_exact(sys: &RealSystem, point: &[f64]) -> Option<Vec<f64>> {
    const DENOM: f64 = 4096.0;
    let snapped: Vec<f64> = point.iter().map(|&x| (x * DENOM).round() / DENOM).collect();
    if snapped.iter().zip(point).any(|(s, x)| (s - x).abs() > 1e-4) {
        return None;
    }
    let exact: Option<Vec<GaussianRational>> = snapped
        .iter()
        .map(|&x| GaussianRational::from_f64_exact(x, 0.0))
        .collect();
    let p = exact?;
    let all_zero = sys
        .polys
        .iter()
        .all(|s| s.eval(&p).map(|v| v.is_zero()).unwrap_or(false));
    if all_zero {
        Some(snapped)
    } else {
        None
    }
}

/// Winding number of the planar system along the circle of the given
/// radius around `zero`, by angle accumulation over the sampled loop.
/// Fails when the circle meets the zero set (not isolated) or the angular
/// steps are too coarse to trust.
pub fn local_degree_2d_in(
    sys: &RealSystem,
    zero: &[f64],
    radius: f64,
    samples: usize,
) -> Result<i64, CountError> {
    if sys.dim() != 2 || sys.polys.len() != 2 {
        return Err(CountError::NotPlanar);
    }
    let compiled = CompiledSystem::new(sys)?;
    let n = samples.max(16);
    let mut values = Vec::with_capacity(n + 1);
    let mut min_norm = f64::INFINITY;
    for k in 0..=n {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let p = [
            zero[0] + radius * theta.cos(),
            zero[1] + radius * theta.sin(),
        ];
        let v = compiled.value(&p);
        min_norm = min_norm.min((v[0] * v[0] + v[1] * v[1]).sqrt());
        values.push(v);
    }
    if min_norm <= 1e-9 {
        return Err(CountError::NotIsolated { radius, min_norm });
    }
    let mut total = 0.0f64;
    for w in values.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let cross = a[0] * b[1] - a[1] * b[0];
        let dot = a[0] * b[0] + a[1] * b[1];
        let step = cross.atan2(dot);
        if step.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(CountError::UnderSampled);
        }
        total += step;
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    Ok(winding.round() as i64)
}

/// [`local_degree_2d_in`] on the reduced chart's system.
pub fn local_degree_2d(
    rc: &ReducedChart,
    zero: &[f64],
    radius: f64,
    samples: usize,
) -> Result<i64, CountError> {
    local_degree_2d_in(&RealSystem::from_reduced(rc), zero, radius, samples)
}

/// Resolve every degenerate zero of a planar system by winding.
pub fn resolve_degenerate_2d(
    sys: &RealSystem,
    zs: &mut ZeroSet,
    radius: f64,
    samples: usize,
) -> Result<(), CountError> {
    for z in zs.zeros.iter_mut() {
        if let ZeroKind::Degenerate { local_degree } = &mut z.kind {
            if local_degree.is_none() {
                *local_degree = Some(local_degree_2d_in(sys, &z.point, radius, samples)?);
            }
        }
    }
    Ok(())
}

/// The outcome of a signed count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CountResult {
    Count(i64),
    /// Some degenerate zero has no resolved local degree.
    NotCountable,
}

/// Orientation-adjusted signed total: `Σ sign(det Jac)` over
/// nondegenerate zeros plus resolved local degrees over degenerate ones.
/// Signs are looked up per zero index in the orientation data (chart key
/// = the zero set's chart name), defaulting to `+1`.
pub fn signed_count(zs: &ZeroSet, orientation: &OrientationData) -> CountResult {
    let mut total = 0i64;
    for (idx, z) in zs.zeros.iter().enumerate() {
        let o = orientation.sign_at(&zs.chart, idx).unwrap_or(1) as i64;
        match &z.kind {
            ZeroKind::Nondegenerate { jacobian_sign } => {
                total += o * (*jacobian_sign as i64);
            }
            ZeroKind::Degenerate {
                local_degree: Some(d),
            } => {
                total += o * d;
            }
            ZeroKind::Degenerate { local_degree: None } => {
                return CountResult::NotCountable;
            }
        }
    }
    CountResult::Count(total)
}
