use std::collections::BTreeMap;

use super::{ExponentVector, HomogeneousForm, SymMatrix};
use crate::error::{Error, Result};

/// A bi-homogeneous form `b(x, y) = yᵀ M(x) y`, quadratic in `y` and of
/// degree `x_degree` in `x`, stored as the symmetric matrix `M(x)` of forms.
#[derive(Clone, Debug, PartialEq)]
pub struct BiForm {
    n_vars: usize,
    x_degree: u32,
    /// Row-major `n × n`, symmetric.
    entries: Vec<HomogeneousForm>,
}

impl BiForm {
    /// Builds a bi-form from a row-major matrix of forms, checking shape,
    /// degrees and coefficient-wise symmetry.
    pub fn new(n: usize, x_degree: u32, entries: Vec<HomogeneousForm>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        for e in &entries {
            if e.n_vars() != n {
                return Err(Error::DimensionMismatch { expected: n, found: e.n_vars() });
            }
            if e.degree() != x_degree {
                return Err(Error::DegreeMismatch { expected: x_degree, found: e.degree() });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(BiForm { n_vars: n, x_degree, entries })
    }

    pub(crate) fn from_entries_unchecked(n: usize, x_degree: u32, entries: Vec<HomogeneousForm>) -> Self {
        BiForm { n_vars: n, x_degree, entries }
    }

    /// Builds a bi-form from the upper triangle `(i, j), i <= j`, row by row.
    pub fn from_upper(n: usize, x_degree: u32, upper: Vec<HomogeneousForm>) -> Result<Self> {
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::DimensionMismatch { expected: n * (n + 1) / 2, found: upper.len() });
        }
        let mut full = vec![HomogeneousForm::zero(n, x_degree); n * n];
        let mut it = upper.into_iter();
        for i in 0..n {
            for j in i..n {
                let f = it.next().expect("length checked");
                full[j * n + i] = f.clone();
                full[i * n + j] = f;
            }
        }
        Self::new(n, x_degree, full)
    }

    /// `yᵀ (c I) y` with constant entries.
    pub fn scaled_identity(n: usize, c: f64) -> Self {
        let mut entries = vec![HomogeneousForm::zero(n, 0); n * n];
        for i in 0..n {
            entries[i * n + i] = HomogeneousForm::constant(n, c);
        }
        BiForm { n_vars: n, x_degree: 0, entries }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn x_degree(&self) -> u32 {
        self.x_degree
    }

    pub fn entry(&self, i: usize, j: usize) -> &HomogeneousForm {
        &self.entries[i * self.n_vars + j]
    }

    pub fn entries(&self) -> &[HomogeneousForm] {
        &self.entries
    }

    /// `tr M(x)`, summed in diagonal order.
    pub fn trace(&self) -> HomogeneousForm {
        let mut acc = HomogeneousForm::zero(self.n_vars, self.x_degree);
        for i in 0..self.n_vars {
            acc = acc.try_add(self.entry(i, i)).expect("entries share degree");
        }
        acc
    }

    pub fn matrix_at(&self, x: &[f64]) -> Result<SymMatrix> {
        if x.len() != self.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, found: x.len() });
        }
        SymMatrix::from_row_major(self.n_vars, self.entries.iter().map(|e| e.eval(x)).collect())
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let n = self.n_vars;
        for v in [x, y] {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: v.len() });
            }
        }
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += y[i] * y[j] * self.entry(i, j).eval(x);
            }
        }
        Ok(acc)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.n_vars != other.n_vars {
            return Err(Error::DimensionMismatch { expected: self.n_vars, found: other.n_vars });
        }
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.try_add(b)).collect::<Result<_>>()?;
        Ok(BiForm { n_vars: self.n_vars, x_degree: self.x_degree, entries })
    }

    pub fn scale(&self, s: f64) -> Self {
        BiForm { n_vars: self.n_vars, x_degree: self.x_degree, entries: self.entries.iter().map(|e| e.scale(s)).collect() }
    }

    /// The same polynomial as a form in `2n` variables `(x1..xn, y1..yn)`.
    pub fn to_joint_form(&self) -> HomogeneousForm {
        let n = self.n_vars;
        let mut terms: BTreeMap<ExponentVector, f64> = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                for (e, c) in self.entry(i, j).terms() {
                    let mut joint = Vec::with_capacity(2 * n);
                    joint.extend_from_slice(e.as_slice());
                    joint.extend(std::iter::repeat_n(0, n));
                    joint[n + i] += 1;
                    joint[n + j] += 1;
                    *terms.entry(ExponentVector::new(joint)).or_insert(0.0) += c;
                }
            }
        }
        HomogeneousForm::from_map(2 * n, self.x_degree + 2, terms)
    }

    /// Largest coefficient-wise difference relative to the largest coefficient.
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let scale = self
            .entries
            .iter()
            .chain(&other.entries)
            .fold(0.0f64, |m, e| m.max(e.max_abs_coefficient()))
            .max(f64::MIN_POSITIVE);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.relative_distance(b) * a.max_abs_coefficient().max(b.max_abs_coefficient()))
            .fold(0.0f64, f64::max)
            / scale
    }
}

/// The Hessian bi-form of `r^{2d} = (x·x)^d`, built from its closed form
/// `2d (x·x)^{d-2} (2(d-1) <x,y>^2 + (x·x)(y·y))` rather than by
/// differentiation.
pub fn b_r2d(n: usize, d: u32) -> BiForm {
    assert!(d >= 1, "b_r2d needs d >= 1");
    let two_d = 2.0 * d as f64;
    if d == 1 {
        return BiForm::scaled_identity(n, 2.0);
    }
    let r_low = HomogeneousForm::radial(n, d - 2);
    let r_high = HomogeneousForm::radial(n, d - 1);
    let cross_weight = 2.0 * (d as f64 - 1.0) * two_d;
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let xixj = HomogeneousForm::variable(n, i).try_mul(&HomogeneousForm::variable(n, j)).expect("same n");
            let mut e = r_low.try_mul(&xixj).expect("same n").scale(cross_weight);
            if i == j {
                e = e.try_add(&r_high.scale(two_d)).expect("same degree");
            }
            entries.push(e);
        }
    }
    BiForm::from_entries_unchecked(n, 2 * d - 2, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b_r2d_degree_one_is_constant() {
        for n in 1..5 {
            let b = b_r2d(n, 1);
            assert_eq!(b.x_degree(), 0);
            assert_eq!(b, HomogeneousForm::radial(n, 1).hessian_biform());
        }
    }

    #[test]
    fn b_r2d_matches_differentiation() {
        for n in 1..5 {
            for d in 1..5 {
                let closed = b_r2d(n, d);
                let diff = HomogeneousForm::radial(n, d).hessian_biform();
                assert!(closed.relative_distance(&diff) <= 1e-12, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn b_r2d_value_on_product_sphere() {
        let b = b_r2d(3, 2);
        let e1 = [1.0, 0.0, 0.0];
        assert_eq!(b.evaluate(&e1, &e1).unwrap(), 12.0);
        let e2 = [0.0, 1.0, 0.0];
        assert_eq!(b.evaluate(&e1, &e2).unwrap(), 4.0);
    }

    #[test]
    fn new_checks_symmetry_and_degree() {
        let a = HomogeneousForm::variable(2, 0);
        let b = HomogeneousForm::variable(2, 1);
        let z = HomogeneousForm::zero(2, 1);
        assert!(matches!(
            BiForm::new(2, 1, vec![a.clone(), a.clone(), b.clone(), z.clone()]),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(BiForm::new(2, 1, vec![a.clone(), b.clone(), b.clone(), z.clone()]).is_ok());
        assert!(matches!(
            BiForm::new(2, 2, vec![a.clone(), b.clone(), b, z]),
            Err(Error::DegreeMismatch { .. })
        ));
    }

    #[test]
    fn joint_form_evaluates_identically() {
        let b = HomogeneousForm::radial(2, 2).hessian_biform();
        let j = b.to_joint_form();
        assert_eq!(j.n_vars(), 4);
        assert_eq!(j.degree(), 4);
        let (x, y) = ([0.3, -0.7], [1.1, 0.4]);
        let lhs = b.evaluate(&x, &y).unwrap();
        let rhs = j.evaluate(&[x[0], x[1], y[0], y[1]]).unwrap();
        assert!((lhs - rhs).abs() < 1e-13);
    }
}
