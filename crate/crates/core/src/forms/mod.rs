//! Homogeneous forms, Hessian bi-forms and their calculus.
//!
//! A [`HomogeneousForm`] is a sparse map from exponent vectors to `f64`
//! coefficients, kept canonical: duplicate monomials are merged, exact zeros
//! are dropped, and terms iterate in lexicographic order with
//! `x1 > x2 > ... > xn` (so `x1^2`, then `x1 x2`, then `x2^2`).
//!
//! All differentiation is symbolic. The Laplacian and the trace of the
//! Hessian bi-form accumulate their contributions in the same variable order,
//! which makes `trace(H_p) == Δp` hold bit-for-bit.

mod biform;
pub(crate) mod compiled;
mod json;
pub(crate) mod matrix;

pub use biform::{b_r2d, BiForm};
pub use json::FormJson;
pub use matrix::SymMatrix;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Exponents of a monomial `x1^a1 ... xn^an`.
///
/// The ordering is lexicographic with larger leading exponents first, so a
/// `BTreeMap` keyed by exponent vectors iterates `x1^2, x1 x2, x2^2`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(exponents: Vec<u32>) -> Self {
        ExponentVector(exponents)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total degree `a1 + ... + an`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Ord for ExponentVector {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.cmp(&self.0)
    }
}

impl PartialOrd for ExponentVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(v: Vec<u32>) -> Self {
        ExponentVector(v)
    }
}

/// All exponent vectors of total degree `degree` in `n` variables, in
/// canonical (descending lexicographic) order.
pub fn monomials(n: usize, degree: u32) -> Vec<ExponentVector> {
    fn rec(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<ExponentVector>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(ExponentVector(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(n, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(n, degree, &mut Vec::with_capacity(n), &mut out);
    out
}

/// A homogeneous polynomial with real coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct HomogeneousForm {
    n_vars: usize,
    degree: u32,
    terms: BTreeMap<ExponentVector, f64>,
}

impl HomogeneousForm {
    /// Builds a canonical form from `(exponents, coefficient)` pairs.
    ///
    /// Duplicate monomials are summed and zero coefficients dropped. Every
    /// exponent vector must have length `n` and sum to `degree`.
    pub fn new<I, E>(n: usize, degree: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (E, f64)>,
        E: Into<ExponentVector>,
    {
        if n == 0 {
            return Err(Error::Domain("a form needs at least one variable".into()));
        }
        let mut map = BTreeMap::new();
        for (exp, coef) in terms {
            let exp = exp.into();
            if exp.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: exp.len() });
            }
            if exp.degree() != degree {
                return Err(Error::DegreeMismatch { expected: degree, found: exp.degree() });
            }
            if !coef.is_finite() {
                return Err(Error::Domain(format!("non-finite coefficient {coef}")));
            }
            *map.entry(exp).or_insert(0.0) += coef;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(HomogeneousForm { n_vars: n, degree, terms: map })
    }

    /// Builds a form from already-validated terms.
    pub(crate) fn from_map(n: usize, degree: u32, mut terms: BTreeMap<ExponentVector, f64>) -> Self {
        debug_assert!(terms.keys().all(|e| e.len() == n && e.degree() == degree));
        terms.retain(|_, c| *c != 0.0);
        HomogeneousForm { n_vars: n, degree, terms }
    }

    pub fn zero(n: usize, degree: u32) -> Self {
        HomogeneousForm { n_vars: n, degree, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::from_map(n, 0, BTreeMap::from([(ExponentVector(vec![0; n]), c)]))
    }

    /// The coordinate function `x_i` (zero-based).
    pub fn variable(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::from_map(n, 1, BTreeMap::from([(ExponentVector(e), 1.0)]))
    }

    /// `(x1^2 + ... + xn^2)^m`, expanded.
    pub fn radial(n: usize, m: u32) -> Self {
        let mut sq = BTreeMap::new();
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 2;
            sq.insert(ExponentVector(e), 1.0);
        }
        let sq = Self::from_map(n, 2, sq);
        sq.pow(m)
    }

    /// The form with the given coefficient vector over [`monomials`]`(n, degree)`.
    pub fn from_coefficients(n: usize, degree: u32, coefs: &[f64]) -> Self {
        let basis = monomials(n, degree);
        assert_eq!(basis.len(), coefs.len(), "coefficient vector length");
        let map = basis.into_iter().zip(coefs.iter().copied()).collect();
        Self::from_map(n, degree, map)
    }

    /// Coefficients over [`monomials`]`(n, degree)`, zeros included.
    pub fn coefficient_vector(&self) -> Vec<f64> {
        monomials(self.n_vars, self.degree).iter().map(|e| self.coefficient(e.as_slice())).collect()
    }

    /// A form with independent standard normal coefficients on every monomial.
    pub fn random<R: Rng + ?Sized>(n: usize, degree: u32, rng: &mut R) -> Self {
        let map = monomials(n, degree).into_iter().map(|e| (e, rng.sample::<f64, _>(StandardNormal))).collect();
        Self::from_map(n, degree, map)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, f64)> + '_ {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn coefficient(&self, exponents: &[u32]) -> f64 {
        self.terms.get(&ExponentVector(exponents.to_vec())).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, found: x.len() });
        }
        Ok(self.eval(x))
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.0.iter().zip(x).map(|(&a, &xi)| xi.powi(a as i32)).product::<f64>())
            .sum()
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n_vars != other.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, found: other.n_vars });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            *terms.entry(e.clone()).or_insert(0.0) += c;
        }
        Ok(Self::from_map(self.n_vars, self.degree, terms))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect();
        Self::from_map(self.n_vars, self.degree, terms)
    }

    /// `Σ weights[i] * forms[i]`; all forms must share `n` and degree.
    pub fn linear_combination(forms: &[HomogeneousForm], weights: &[f64]) -> Result<Self> {
        let first = forms.first().ok_or_else(|| Error::Domain("empty linear combination".into()))?;
        if forms.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: forms.len(), found: weights.len() });
        }
        let mut terms: BTreeMap<ExponentVector, f64> = BTreeMap::new();
        for (f, &w) in forms.iter().zip(weights) {
            first.check_compatible(f)?;
            for (e, c) in &f.terms {
                *terms.entry(e.clone()).or_insert(0.0) += w * c;
            }
        }
        Ok(Self::from_map(first.n_vars, first.degree, terms))
    }

    /// Polynomial product; degrees add.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.n_vars != other.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, found: other.n_vars });
        }
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<ExponentVector, f64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.0.iter().zip(&eb.0).map(|(a, b)| a + b).collect();
                *terms.entry(ExponentVector(e)).or_insert(0.0) += ca * cb;
            }
        }
        Self::from_map(self.n_vars, self.degree + other.degree, terms)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.n_vars, 1.0);
        for _ in 0..k {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// `∂p/∂x_i`. A degree-0 form differentiates to the zero form of degree 0.
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.n_vars, "variable index out of range");
        if self.degree == 0 {
            return Self::zero(self.n_vars, 0);
        }
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let a = e.0[i];
            if a == 0 {
                continue;
            }
            let mut d = e.0.clone();
            d[i] -= 1;
            terms.insert(ExponentVector(d), c * a as f64);
        }
        Self::from_map(self.n_vars, self.degree - 1, terms)
    }

    pub fn gradient(&self) -> Vec<HomogeneousForm> {
        (0..self.n_vars).map(|i| self.partial(i)).collect()
    }

    /// `∂²p/∂x_i∂x_j`, computed in one pass over the terms.
    pub fn second_partial(&self, i: usize, j: usize) -> Self {
        if self.degree < 2 {
            return Self::zero(self.n_vars, self.degree.saturating_sub(2));
        }
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut d = e.0.clone();
            let mut factor = d[i] as f64;
            if d[i] == 0 {
                continue;
            }
            d[i] -= 1;
            factor *= d[j] as f64;
            if d[j] == 0 {
                continue;
            }
            d[j] -= 1;
            terms.insert(ExponentVector(d), c * factor);
        }
        Self::from_map(self.n_vars, self.degree - 2, terms)
    }

    /// `Δp = Σ ∂²p/∂x_i²`. Forms of degree below two map to the zero form of
    /// degree `max(deg - 2, 0)`.
    pub fn laplacian(&self) -> Self {
        if self.degree < 2 {
            return Self::zero(self.n_vars, 0);
        }
        let mut terms: BTreeMap<ExponentVector, f64> = BTreeMap::new();
        for i in 0..self.n_vars {
            for (e, c) in &self.terms {
                let a = e.0[i];
                if a < 2 {
                    continue;
                }
                let mut d = e.0.clone();
                d[i] -= 2;
                *terms.entry(ExponentVector(d)).or_insert(0.0) += c * (a * (a - 1)) as f64;
            }
        }
        Self::from_map(self.n_vars, self.degree - 2, terms)
    }

    /// The Hessian bi-form `B_p(x, y) = yᵀ H_p(x) y`.
    pub fn hessian_biform(&self) -> BiForm {
        assert!(self.degree >= 2, "Hessian bi-form needs degree >= 2");
        let n = self.n_vars;
        let mut entries: Vec<HomogeneousForm> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    let sym = entries[j * n + i].clone();
                    entries.push(sym);
                } else {
                    entries.push(self.second_partial(i, j));
                }
            }
        }
        BiForm::from_entries_unchecked(n, self.degree - 2, entries)
    }

    /// The numeric Hessian `H_p(x)`.
    pub fn hessian_at(&self, x: &[f64]) -> Result<SymMatrix> {
        if x.len() != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, found: x.len() });
        }
        let n = self.n_vars;
        let mut h = vec![0.0; n * n];
        if self.degree >= 2 {
            for i in 0..n {
                for j in i..n {
                    let v = self.second_partial(i, j).eval(x);
                    h[i * n + j] = v;
                    h[j * n + i] = v;
                }
            }
        }
        SymMatrix::from_row_major(n, h)
    }

    /// The composition `x ↦ p(A x)` for a row-major `n × n` matrix `A`.
    pub fn compose_linear(&self, a: &[f64]) -> Result<Self> {
        let n = self.n_vars;
        if a.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: a.len() });
        }
        let rows: Vec<HomogeneousForm> = (0..n)
            .map(|i| {
                let terms = (0..n)
                    .map(|j| {
                        let mut e = vec![0; n];
                        e[j] = 1;
                        (ExponentVector(e), a[i * n + j])
                    })
                    .collect();
                Self::from_map(n, 1, terms)
            })
            .collect();
        let max_pow = self.degree as usize;
        let powers: Vec<Vec<HomogeneousForm>> = rows
            .iter()
            .map(|r| {
                let mut v = vec![Self::constant(n, 1.0)];
                for k in 1..=max_pow {
                    let next = v[k - 1].mul_unchecked(r);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc: BTreeMap<ExponentVector, f64> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut prod = Self::constant(n, *c);
            for (i, &k) in e.0.iter().enumerate() {
                if k > 0 {
                    prod = prod.mul_unchecked(&powers[i][k as usize]);
                }
            }
            for (pe, pc) in prod.terms {
                *acc.entry(pe).or_insert(0.0) += pc;
            }
        }
        Ok(Self::from_map(n, self.degree, acc))
    }

    /// Largest coefficient-wise difference, scaled by the larger coefficient
    /// magnitude of the two forms (absolute when both vanish).
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let scale = self.max_abs_coefficient().max(other.max_abs_coefficient());
        let mut worst: f64 = 0.0;
        for (e, c) in &self.terms {
            worst = worst.max((c - other.terms.get(e).copied().unwrap_or(0.0)).abs());
        }
        for (e, c) in &other.terms {
            if !self.terms.contains_key(e) {
                worst = worst.max(c.abs());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }
}

impl fmt::Display for HomogeneousForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " {} ", if *c < 0.0 { '-' } else { '+' })?;
                write!(f, "{}", c.abs())?;
            } else {
                write!(f, "{c}")?;
            }
            for (i, &a) in e.0.iter().enumerate() {
                match a {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    _ => write!(f, "*x{}^{}", i + 1, a)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn motzkin() -> HomogeneousForm {
        HomogeneousForm::new(
            3,
            6,
            [(vec![4, 2, 0], 1.0), (vec![2, 4, 0], 1.0), (vec![2, 2, 2], -3.0), (vec![0, 0, 6], 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn make_form_canonicalizes() {
        let p = HomogeneousForm::new(2, 2, [(vec![2, 0], 1.0), (vec![0, 2], 1.0)]).unwrap();
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.evaluate(&[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(p.evaluate(&[0.0, 0.0]).unwrap(), 0.0);

        let merged = HomogeneousForm::new(2, 2, [(vec![1, 1], 2.0), (vec![1, 1], -2.0), (vec![2, 0], 1.0)]).unwrap();
        assert_eq!(merged.num_terms(), 1);

        let order: Vec<Vec<u32>> = monomials(2, 2).into_iter().map(|e| e.0).collect();
        assert_eq!(order, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn make_form_rejects_bad_terms() {
        let err = HomogeneousForm::new(2, 2, [(vec![2, 0], 1.0), (vec![1, 0], 1.0)]).unwrap_err();
        assert!(matches!(err, Error::DegreeMismatch { expected: 2, found: 1 }));
        let err = HomogeneousForm::new(2, 2, [(vec![2, 0, 0], 1.0)]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 3 }));
        assert!(HomogeneousForm::new(2, 2, [(vec![2, 0], 1.0)]).unwrap().evaluate(&[1.0]).is_err());
    }

    #[test]
    fn motzkin_is_valid_and_vanishes_at_ones() {
        let m = motzkin();
        assert_eq!(m.degree(), 6);
        assert_eq!(m.evaluate(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn laplacian_examples() {
        for n in 1..6 {
            let l = HomogeneousForm::radial(n, 1).laplacian();
            assert_eq!(l, HomogeneousForm::constant(n, 2.0 * n as f64));
        }
        let h = HomogeneousForm::new(2, 2, [(vec![2, 0], 1.0), (vec![0, 2], -1.0)]).unwrap();
        assert!(h.laplacian().is_zero());

        // (x1^2 + x2^2 + x3^2)(x1^2 - x2^2) has Laplacian 14 (x1^2 - x2^2).
        let f = HomogeneousForm::new(3, 2, [(vec![2, 0, 0], 1.0), (vec![0, 2, 0], -1.0)]).unwrap();
        let g = HomogeneousForm::radial(3, 1).try_mul(&f).unwrap();
        assert!(g.laplacian().relative_distance(&f.scale(14.0)) < 1e-15);

        let lin = HomogeneousForm::variable(3, 0);
        assert_eq!(lin.laplacian(), HomogeneousForm::zero(3, 0));
    }

    #[test]
    fn hessian_examples() {
        let p = HomogeneousForm::new(2, 4, [(vec![4, 0], 1.0)]).unwrap();
        let b = p.hessian_biform();
        assert_eq!(b.entry(0, 0), &HomogeneousForm::new(2, 2, [(vec![2, 0], 12.0)]).unwrap());
        assert!(b.entry(0, 1).is_zero() && b.entry(1, 1).is_zero());

        let q = HomogeneousForm::new(2, 4, [(vec![2, 2], 1.0)]).unwrap();
        let h = q.hessian_at(&[1.0, 1.0]).unwrap();
        assert_eq!(h.row_major(), vec![2.0, 4.0, 4.0, 2.0]);

        let r4 = HomogeneousForm::radial(2, 2);
        let h = r4.hessian_at(&[1.0, 0.0]).unwrap();
        assert_eq!(h.row_major(), vec![12.0, 0.0, 0.0, 4.0]);

        let zero = HomogeneousForm::zero(3, 2);
        assert!(zero.hessian_at(&[0.3, -1.0, 2.0]).unwrap().row_major().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hessian_of_r4_matches_closed_form() {
        // yᵀ H y = 8 <x,y>^2 + 4 |x|^2 |y|^2
        let b = HomogeneousForm::radial(2, 2).hessian_biform();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x: [f64; 2] = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let y: [f64; 2] = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let xy = x[0] * y[0] + x[1] * y[1];
            let xx = x[0] * x[0] + x[1] * x[1];
            let yy = y[0] * y[0] + y[1] * y[1];
            let want = 8.0 * xy * xy + 4.0 * xx * yy;
            let got = b.evaluate(&x, &y).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn trace_of_hessian_is_laplacian_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.random_range(1..5);
            let deg = 2 * rng.random_range(1..4);
            let p = HomogeneousForm::random(n, deg, &mut rng);
            assert_eq!(p.hessian_biform().trace(), p.laplacian());
        }
    }

    #[test]
    fn hessian_at_agrees_with_biform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let p = HomogeneousForm::random(3, 4, &mut rng);
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
            let h = p.hessian_at(&x).unwrap();
            let m = p.hessian_biform().matrix_at(&x).unwrap();
            for (a, b) in h.row_major().iter().zip(m.row_major()) {
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn compose_with_permutation() {
        let p = HomogeneousForm::new(2, 3, [(vec![2, 1], 1.0), (vec![0, 3], 2.0)]).unwrap();
        let swap = [0.0, 1.0, 1.0, 0.0];
        let q = p.compose_linear(&swap).unwrap();
        let want = HomogeneousForm::new(2, 3, [(vec![1, 2], 1.0), (vec![3, 0], 2.0)]).unwrap();
        assert_eq!(q, want);
    }

    #[test]
    fn display_is_readable() {
        let p = HomogeneousForm::new(2, 2, [(vec![2, 0], 1.0), (vec![0, 2], -3.0)]).unwrap();
        assert_eq!(p.to_string(), "1*x1^2 - 3*x2^2");
    }
}
