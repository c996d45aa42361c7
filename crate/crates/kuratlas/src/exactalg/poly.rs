//! Multivariate polynomials with exact Gaussian-rational coefficients.
//!
//! A polynomial over real variables is simply one whose coefficients all
//! have zero imaginary part; the realified sections `s⁺` and Kuranishi
//! chart data reuse this type with that convention.

use std::collections::BTreeMap;
use std::fmt;

use super::scalar::{GaussianRational, C64};
use super::AlgebraError;

/// A multivariate polynomial: a finite map from exponent vectors to
/// nonzero Gaussian-rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is exact
/// polynomial equality. The exponent map is ordered, which makes every
/// traversal (evaluation, printing, serialization) deterministic.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, GaussianRational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: GaussianRational) -> Self {
        let mut p = Polynomial::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, GaussianRational::one())
    }

    /// The coordinate polynomial `x_index`.
    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index out of range");
        let mut exps = vec![0u32; nvars];
        exps[index] = 1;
        let mut p = Polynomial::zero(nvars);
        p.terms.insert(exps, GaussianRational::one());
        p
    }

    /// Build from raw `(exponents, coefficient)` pairs, dropping zeros.
    pub fn from_terms(
        nvars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, GaussianRational)>,
    ) -> Result<Self, AlgebraError> {
        let mut p = Polynomial::zero(nvars);
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(AlgebraError::ArityMismatch {
                    expected: nvars,
                    got: exps.len(),
                });
            }
            p.add_term(exps, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// True when every coefficient is real.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.is_real())
    }

    fn add_term(&mut self, exps: Vec<u32>, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Polynomial) -> Polynomial {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c);
        }
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        let mut out = Polynomial::zero(self.nvars);
        for (e, k) in &self.terms {
            out.terms.insert(e.clone(), k * c);
        }
        out
    }

    pub fn mul(&self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity mismatch");
        let mut out = Polynomial::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut out = Polynomial::one(self.nvars);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Exact evaluation at a Gaussian-rational point.
    pub fn eval(&self, point: &[GaussianRational]) -> Result<GaussianRational, AlgebraError> {
        if point.len() != self.nvars {
            return Err(AlgebraError::ArityMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut acc = GaussianRational::zero();
        for (exps, c) in &self.terms {
            let mut term = c.clone();
            for (x, &e) in point.iter().zip(exps) {
                for _ in 0..e {
                    term *= x;
                }
            }
            acc += &term;
        }
        Ok(acc)
    }

    /// Floating evaluation at a complex point.
    pub fn eval_c64(&self, point: &[C64]) -> Result<C64, AlgebraError> {
        if point.len() != self.nvars {
            return Err(AlgebraError::ArityMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut acc = C64::new(0.0, 0.0);
        for (exps, c) in &self.terms {
            let mut term = c.to_c64();
            for (x, &e) in point.iter().zip(exps) {
                term *= x.powu(e);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Floating evaluation of a real-coefficient polynomial at a real point.
    pub fn eval_real_f64(&self, point: &[f64]) -> Result<f64, AlgebraError> {
        if point.len() != self.nvars {
            return Err(AlgebraError::ArityMismatch {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut acc = 0.0f64;
        for (exps, c) in &self.terms {
            let mut term = c.to_c64().re;
            for (x, &e) in point.iter().zip(exps) {
                term *= x.powi(e as i32);
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Formal partial derivative with respect to variable `index`.
    pub fn partial(&self, index: usize) -> Result<Polynomial, AlgebraError> {
        if index >= self.nvars {
            return Err(AlgebraError::UnknownVariable {
                index,
                nvars: self.nvars,
            });
        }
        let mut out = Polynomial::zero(self.nvars);
        for (exps, c) in &self.terms {
            let e = exps[index];
            if e == 0 {
                continue;
            }
            let mut de = exps.clone();
            de[index] = e - 1;
            out.add_term(de, c * &GaussianRational::from_int(e as i64));
        }
        Ok(out)
    }

    /// Substitute a polynomial for each variable (exact composition).
    ///
    /// `images[i]` replaces variable `i`; all images must share one arity,
    /// which becomes the arity of the result.
    pub fn substitute(&self, images: &[Polynomial]) -> Result<Polynomial, AlgebraError> {
        if images.len() != self.nvars {
            return Err(AlgebraError::ArityMismatch {
                expected: self.nvars,
                got: images.len(),
            });
        }
        let out_vars = images.first().map(|p| p.nvars).unwrap_or(0);
        let mut acc = Polynomial::zero(out_vars);
        for (exps, c) in &self.terms {
            let mut term = Polynomial::constant(out_vars, c.clone());
            for (img, &e) in images.iter().zip(exps) {
                if e > 0 {
                    term = term.mul(&img.pow(e));
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Expand a complex polynomial in real coordinates: substituting
    /// `x_j = a_j + i·b_j` (interleaved realification convention) yields
    /// `p = re + i·im` with `re`, `im` real polynomials in `2·nvars`
    /// variables `(a₁, b₁, a₂, b₂, …)`.
    pub fn realify(&self) -> (Polynomial, Polynomial) {
        let out_vars = 2 * self.nvars;
        let images: Vec<Polynomial> = (0..self.nvars)
            .map(|j| {
                let a = Polynomial::var(out_vars, 2 * j);
                let b = Polynomial::var(out_vars, 2 * j + 1).scale(&GaussianRational::i());
                a.add(&b)
            })
            .collect();
        let expanded = self.substitute(&images).expect("arity is consistent");
        let mut re = Polynomial::zero(out_vars);
        let mut im = Polynomial::zero(out_vars);
        for (exps, c) in &expanded.terms {
            use num_traits::Zero;
            if !c.re().is_zero() {
                re.add_term(exps.clone(), GaussianRational::from_rat(c.re().clone()));
            }
            if !c.im().is_zero() {
                im.add_term(exps.clone(), GaussianRational::from_rat(c.im().clone()));
            }
        }
        (re, im)
    }

    /// Conservative interval evaluation of a real-coefficient polynomial
    /// over a real box.
    pub fn eval_interval(&self, box_: &[Interval]) -> Result<Interval, AlgebraError> {
        if box_.len() != self.nvars {
            return Err(AlgebraError::ArityMismatch {
                expected: self.nvars,
                got: box_.len(),
            });
        }
        let mut acc = Interval::point(0.0);
        for (exps, c) in &self.terms {
            let mut term = Interval::point(c.to_c64().re);
            for (iv, &e) in box_.iter().zip(exps) {
                for _ in 0..e {
                    term = term.mul(iv);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exps, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})", c)?;
            for (i, &e) in exps.iter().enumerate() {
                if e == 1 {
                    write!(f, "*x{}", i)?;
                } else if e > 1 {
                    write!(f, "*x{}^{}", i, e)?;
                }
            }
        }
        Ok(())
    }
}

/// Coefficient-flattened copy of a polynomial for repeated floating
/// evaluation (avoids converting the exact coefficients every call).
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    nvars: usize,
    terms: Vec<(C64, Vec<u32>)>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        CompiledPoly {
            nvars: p.nvars(),
            terms: p.terms().map(|(e, c)| (c.to_c64(), e.clone())).collect(),
        }
    }

    pub fn eval_c64(&self, point: &[C64]) -> C64 {
        debug_assert_eq!(point.len(), self.nvars);
        let mut acc = C64::new(0.0, 0.0);
        for (c, exps) in &self.terms {
            let mut term = *c;
            for (x, &e) in point.iter().zip(exps) {
                term *= x.powu(e);
            }
            acc += term;
        }
        acc
    }

    /// Real evaluation (assumes real coefficients).
    pub fn eval_real(&self, point: &[f64]) -> f64 {
        debug_assert_eq!(point.len(), self.nvars);
        let mut acc = 0.0;
        for (c, exps) in &self.terms {
            let mut term = c.re;
            for (x, &e) in point.iter().zip(exps) {
                term *= x.powi(e as i32);
            }
            acc += term;
        }
        acc
    }
}

/// Closed real interval for conservative box evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "interval bounds out of order");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn add(&self, rhs: &Interval) -> Interval {
        Interval {
            lo: self.lo + rhs.lo,
            hi: self.hi + rhs.hi,
        }
    }

    pub fn mul(&self, rhs: &Interval) -> Interval {
        let cands = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        Interval {
            lo: cands.iter().cloned().fold(f64::INFINITY, f64::min),
            hi: cands.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gr(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    /// x² + 1 in one variable.
    fn x_sq_plus_one() -> Polynomial {
        let x = Polynomial::var(1, 0);
        x.mul(&x).add(&Polynomial::one(1))
    }

    #[test]
    fn eval_at_i_kills_x_sq_plus_one() {
        let p = x_sq_plus_one();
        assert!(p.eval(&[GaussianRational::i()]).unwrap().is_zero());
    }

    #[test]
    fn eval_x2y_at_2_3() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = x.mul(&x).mul(&y);
        assert_eq!(p.eval(&[gr(2), gr(3)]).unwrap(), gr(12));
    }

    #[test]
    fn cancellation_yields_exact_zero() {
        let x = Polynomial::var(1, 0);
        let p = x.mul(&x).sub(&x.mul(&x));
        assert!(p.is_zero());
        assert!(p.eval(&[gr(7)]).unwrap().is_zero());
    }

    #[test]
    fn partial_of_x2y() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = x.mul(&x).mul(&y);
        let expected = x.mul(&y).scale(&gr(2));
        assert_eq!(p.partial(0).unwrap(), expected);
        assert!(Polynomial::constant(2, gr(5)).partial(0).unwrap().is_zero());
    }

    #[test]
    fn partial_with_imaginary_coefficient() {
        // ∂(x² + ixy)/∂y = ix
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = x.mul(&x).add(&x.mul(&y).scale(&GaussianRational::i()));
        assert_eq!(p.partial(1).unwrap(), x.scale(&GaussianRational::i()));
        assert!(p.partial(5).is_err());
    }

    #[test]
    fn realify_x_squared() {
        // x² = (a² − b²) + i·(2ab)
        let x = Polynomial::var(1, 0);
        let (re, im) = x.mul(&x).realify();
        let a = Polynomial::var(2, 0);
        let b = Polynomial::var(2, 1);
        assert_eq!(re, a.mul(&a).sub(&b.mul(&b)));
        assert_eq!(im, a.mul(&b).scale(&gr(2)));
    }

    #[test]
    fn substitution_composes() {
        // p(x) = x², image x ↦ u + v gives (u+v)²
        let p = Polynomial::var(1, 0).pow(2);
        let u_plus_v = Polynomial::var(2, 0).add(&Polynomial::var(2, 1));
        let q = p.substitute(&[u_plus_v.clone()]).unwrap();
        assert_eq!(q, u_plus_v.mul(&u_plus_v));
    }

    #[test]
    fn interval_bounds_contain_samples() {
        let x = Polynomial::var(1, 0);
        let p = x.mul(&x).sub(&x); // x² − x on [0, 1] has range [−1/4, 0]
        let iv = p.eval_interval(&[Interval::new(0.0, 1.0)]).unwrap();
        for k in 0..=10 {
            let v = p.eval_real_f64(&[k as f64 / 10.0]).unwrap();
            assert!(iv.lo <= v && v <= iv.hi);
        }
    }
}
