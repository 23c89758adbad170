use nalgebra::DMatrix;

use super::{gram_schmidt, moment_of_sum, monomial_moment};
use crate::error::{Error, Result};
use crate::forms::monomials;

/// An orthonormal basis of the zero-mean bi-forms `x^a y^b` (`|a| = 2d − 2`,
/// `|b| = 2`) under the product-sphere inner product, kept as coefficients
/// over the centred bi-monomials.
///
/// The sum of squares of the basis at a point of the product sphere is the
/// squared norm of the evaluation functional there, which by invariance is
/// the same at every point and equals the dimension.
#[derive(Clone, Debug)]
pub struct ZeroMeanBiKernel {
    n: usize,
    x_exps: Vec<Vec<u32>>,
    y_exps: Vec<Vec<u32>>,
    /// `(a, b)` index pairs of the candidates and their means.
    cands: Vec<(usize, usize, f64)>,
    coefs: Vec<Vec<f64>>,
}

impl ZeroMeanBiKernel {
    pub fn new(n: usize, d: u32) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Domain(format!("bi-form space needs n, d >= 1 (got {n}, {d})")));
        }
        let x_exps: Vec<Vec<u32>> = monomials(n, 2 * d - 2).into_iter().map(|e| e.as_slice().to_vec()).collect();
        let y_exps: Vec<Vec<u32>> = monomials(n, 2).into_iter().map(|e| e.as_slice().to_vec()).collect();
        let mut cands = Vec::with_capacity(x_exps.len() * y_exps.len());
        for (ia, a) in x_exps.iter().enumerate() {
            for (ib, b) in y_exps.iter().enumerate() {
                cands.push((ia, ib, monomial_moment(a) * monomial_moment(b)));
            }
        }
        let k = cands.len();
        let gram = DMatrix::from_fn(k, k, |i, j| {
            let (ai, bi, mi) = cands[i];
            let (aj, bj, mj) = cands[j];
            moment_of_sum(&x_exps[ai], &x_exps[aj]) * moment_of_sum(&y_exps[bi], &y_exps[bj]) - mi * mj
        });
        let coefs = gram_schmidt(&gram, 1e-10);
        if coefs.len() != k - 1 {
            return Err(Error::RankDeficiency { expected: k - 1, found: coefs.len() });
        }
        Ok(ZeroMeanBiKernel { n, x_exps, y_exps, cands, coefs })
    }

    /// Number of basis elements, `dim Bi − 1`.
    pub fn dim(&self) -> usize {
        self.coefs.len()
    }

    /// `Σ_i e_i(x, y)²` for unit vectors `x`, `y`.
    pub fn sum_of_squares(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        for v in [x, y] {
            if v.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: v.len() });
            }
        }
        let mono = |e: &[u32], p: &[f64]| e.iter().zip(p).map(|(&k, &v)| v.powi(k as i32)).product::<f64>();
        let xs: Vec<f64> = self.x_exps.iter().map(|a| mono(a, x)).collect();
        let ys: Vec<f64> = self.y_exps.iter().map(|b| mono(b, y)).collect();
        let phi: Vec<f64> = self.cands.iter().map(|&(a, b, m)| xs[a] * ys[b] - m).collect();
        Ok(self.coefs.iter().map(|c| c.iter().zip(&phi).map(|(u, v)| u * v).sum::<f64>().powi(2)).sum())
    }
}
