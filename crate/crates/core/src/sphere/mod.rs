//! Exact integration over `S^{n-1}` and `S^{n-1} × S^{n-1}`.
//!
//! Every integral here is a finite sum of monomial moments, so the L² and
//! Hessian inner products, Dirichlet integrals and sphere means are exact up
//! to floating-point rounding. Integrals are against the rotation-invariant
//! probability measure.

mod harmonic;
mod kernel;
mod moments;
mod orthonormal;

pub use harmonic::{harmonic_decompose, HarmonicDecomposition};
pub use kernel::ZeroMeanBiKernel;
pub use moments::monomial_moment;
pub(crate) use moments::moment_of_sum;
pub(crate) use orthonormal::gram_schmidt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{BiForm, HomogeneousForm, SymMatrix};

/// Which invariant inner product on forms of degree `2d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricTag {
    /// `<p, q>_2 = ∫ p q dσ` over the sphere.
    L2,
    /// `<p, q>_H = ∫ B_p B_q dσ` over the product of spheres.
    Hessian,
}

impl MetricTag {
    pub fn inner(self, p: &HomogeneousForm, q: &HomogeneousForm) -> Result<f64> {
        match self {
            MetricTag::L2 => l2_inner(p, q),
            MetricTag::Hessian => hessian_inner(p, q),
        }
    }

    pub fn norm(self, p: &HomogeneousForm) -> Result<f64> {
        Ok(self.inner(p, p)?.max(0.0).sqrt())
    }
}

impl std::fmt::Display for MetricTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MetricTag::L2 => "l2",
            MetricTag::Hessian => "hessian",
        })
    }
}

impl std::str::FromStr for MetricTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(MetricTag::L2),
            "hessian" => Ok(MetricTag::Hessian),
            other => Err(Error::Domain(format!("unknown metric '{other}'"))),
        }
    }
}

/// `∫ p dσ` over `S^{n-1}`.
pub fn sphere_mean(p: &HomogeneousForm) -> f64 {
    p.terms().map(|(e, c)| c * monomial_moment(e.as_slice())).sum()
}

/// `∫ f g dσ` for forms of any degrees in the same variables.
pub(crate) fn integral_of_product(f: &HomogeneousForm, g: &HomogeneousForm) -> f64 {
    debug_assert_eq!(f.n_vars(), g.n_vars());
    if (f.degree() + g.degree()) % 2 == 1 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (ea, ca) in f.terms() {
        for (eb, cb) in g.terms() {
            acc += ca * cb * moment_of_sum(ea.as_slice(), eb.as_slice());
        }
    }
    acc
}

fn check_same_space(p: &HomogeneousForm, q: &HomogeneousForm) -> Result<()> {
    if p.n_vars() != q.n_vars() {
        return Err(Error::DimensionMismatch { expected: p.n_vars(), found: q.n_vars() });
    }
    if p.degree() != q.degree() {
        return Err(Error::DegreeMismatch { expected: p.degree(), found: q.degree() });
    }
    Ok(())
}

/// `<p, q>_2 = ∫ p q dσ`.
pub fn l2_inner(p: &HomogeneousForm, q: &HomogeneousForm) -> Result<f64> {
    check_same_space(p, q)?;
    Ok(integral_of_product(p, q))
}

/// `∫∫ f g dσ(x) dσ(y)` by full expansion: both bi-forms are multiplied as
/// polynomials in `(x, y)` and each monomial integrated as a product of
/// moments in `x` and in `y`.
pub fn product_sphere_inner(f: &BiForm, g: &BiForm) -> Result<f64> {
    let n = f.n_vars();
    if g.n_vars() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.n_vars() });
    }
    if (f.x_degree() + g.x_degree()) % 2 == 1 {
        return Ok(0.0);
    }
    let jf = f.to_joint_form();
    let jg = g.to_joint_form();
    let mut acc = 0.0;
    for (ea, ca) in jf.terms() {
        let (ax, ay) = ea.as_slice().split_at(n);
        for (eb, cb) in jg.terms() {
            let (bx, by) = eb.as_slice().split_at(n);
            let my = moment_of_sum(ay, by);
            if my == 0.0 {
                continue;
            }
            acc += ca * cb * my * moment_of_sum(ax, bx);
        }
    }
    Ok(acc)
}

/// `<f, g>` on the product of spheres by integrating `y` in closed form:
/// `∫ (yᵀAy)(yᵀBy) dy = (2<A,B> + trA trB) / (n(n+2))`, then integrating
/// the resulting forms in `x` by moments.
pub fn quads_inner(f: &BiForm, g: &BiForm) -> Result<f64> {
    let n = f.n_vars();
    if g.n_vars() != n {
        return Err(Error::DimensionMismatch { expected: n, found: g.n_vars() });
    }
    let nn = (n * (n + 2)) as f64;
    let mut frob = 0.0;
    for i in 0..n {
        frob += integral_of_product(f.entry(i, i), g.entry(i, i));
        for j in (i + 1)..n {
            frob += 2.0 * integral_of_product(f.entry(i, j), g.entry(i, j));
        }
    }
    let tr = integral_of_product(&f.trace(), &g.trace());
    Ok((2.0 * frob + tr) / nn)
}

/// `<b, b>` via the closed form
/// `2/(n(n+2)) ∫ <M, M> dx + 1/(n(n+2)) ∫ tr² M dx`.
pub fn quads_norm(b: &BiForm) -> f64 {
    quads_inner(b, b).expect("same bi-form")
}

/// The Hessian inner product `<p, q>_H = <B_p, B_q>` on the product sphere.
pub fn hessian_inner(p: &HomogeneousForm, q: &HomogeneousForm) -> Result<f64> {
    check_same_space(p, q)?;
    if p.degree() < 2 {
        return Err(Error::Domain("the Hessian inner product needs degree >= 2".into()));
    }
    quads_inner(&p.hessian_biform(), &q.hessian_biform())
}

/// `∫_{S^{D-1}} <x, u>^{2k} dx / |u|^{2k} = Γ(D/2) Γ(k+1/2) / (√π Γ(k+D/2))`,
/// evaluated in log-space as `∏_{j<k} (2j+1)/(D+2j)`.
pub fn linear_power_moment(d_w: u64, k: u64) -> Result<f64> {
    if d_w == 0 || k == 0 {
        return Err(Error::Domain(format!("linear_power_moment needs d_w, k >= 1 (got {d_w}, {k})")));
    }
    let log: f64 = (0..k).map(|j| ((2 * j + 1) as f64).ln() - ((d_w + 2 * j) as f64).ln()).sum();
    let value = log.exp();
    debug_assert!(value <= linear_power_moment_bound(d_w, k) * (1.0 + 1e-12));
    Ok(value)
}

/// The upper bound `(2k / d_w)^k` for [`linear_power_moment`].
pub fn linear_power_moment_bound(d_w: u64, k: u64) -> f64 {
    (2.0 * k as f64 / d_w as f64).powf(k as f64)
}

/// `∫ <∇g, ∇g> dσ` over the sphere.
pub fn dirichlet_integral(g: &HomogeneousForm) -> f64 {
    if g.degree() == 0 {
        return 0.0;
    }
    g.gradient().iter().map(|gi| integral_of_product(gi, gi)).sum()
}

/// Pairwise inner products of `basis` under `metric`.
pub fn gram_matrix(basis: &[HomogeneousForm], metric: MetricTag) -> Result<SymMatrix> {
    let k = basis.len();
    if k == 0 {
        return Err(Error::Domain("empty basis".into()));
    }
    for f in &basis[1..] {
        check_same_space(&basis[0], f)?;
    }
    let biforms: Vec<BiForm>;
    let mut g = DMatrix::zeros(k, k);
    match metric {
        MetricTag::L2 => {
            for i in 0..k {
                for j in i..k {
                    let v = integral_of_product(&basis[i], &basis[j]);
                    g[(i, j)] = v;
                    g[(j, i)] = v;
                }
            }
        }
        MetricTag::Hessian => {
            if basis[0].degree() < 2 {
                return Err(Error::Domain("the Hessian inner product needs degree >= 2".into()));
            }
            biforms = basis.iter().map(HomogeneousForm::hessian_biform).collect();
            for i in 0..k {
                for j in i..k {
                    let v = quads_inner(&biforms[i], &biforms[j])?;
                    g[(i, j)] = v;
                    g[(j, i)] = v;
                }
            }
        }
    }
    Ok(SymMatrix::from_dmatrix(g))
}
