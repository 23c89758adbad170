//! Dimension counts, entropy estimates and the closed-form volume bounds.
//!
//! Binomials are exact big integers; they become floating point only at
//! the end, through their logarithms when they are large.

use std::f64::consts::E;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `C(a, b)` exactly; zero when `b > a`.
pub fn binomial(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for i in 0..b {
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

/// Natural logarithm of a positive big integer.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Dimension of the forms of degree `2d` in `n` variables.
pub fn dim_p(n: usize, d: u32) -> BigUint {
    binomial((n + 2 * d as usize - 1) as u64, 2 * d as u64)
}

/// Dimension of the bi-forms of degree `2d − 2` in `x` and `2` in `y`:
/// `C(n+2d−3, 2d−2) · C(n+1, 2)`.
pub fn dim_bi(n: usize, d: u32) -> BigUint {
    let n = n as u64;
    let d = d as u64;
    binomial(n + 2 * d - 3, 2 * d - 2) * binomial(n + 1, 2)
}

/// `C(n+2k−1, 2k) · C(n+(2d−2)k−1, (2d−2)k)`, strictly below
/// `C(n+2kd−1, 2kd)²` for `n ≥ 2` (both sides are 1 when `n = 1`).
pub fn dim_uk(n: usize, d: u32, k: u64) -> BigUint {
    let n = n as u64;
    let e = (2 * d as u64 - 2) * k;
    let v = binomial(n + 2 * k - 1, 2 * k) * binomial(n + e - 1, e);
    debug_assert!(v <= {
        let c = moment_binomial(n as usize, d, k);
        &c * &c
    });
    v
}

/// `C(n+2kd−1, 2kd)`, the dimension of forms of degree `2kd`.
pub fn moment_binomial(n: usize, d: u32, k: u64) -> BigUint {
    let m = 2 * k * d as u64;
    binomial(n as u64 + m - 1, m)
}

/// Binary entropy in nats, with `0 ln(1/0) = 0`.
pub fn entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("entropy argument {x} outside [0, 1]")));
    }
    let term = |t: f64| if t == 0.0 { 0.0 } else { -t * t.ln() };
    Ok(term(x) + term(1.0 - x))
}

/// `exp(a H(b/a))`, an upper bound for `C(a, b)`.
pub fn binom_entropy_bound(a: u64, b: u64) -> Result<f64> {
    if b > a {
        return Err(Error::Domain(format!("binom_entropy_bound needs b <= a (got a={a}, b={b})")));
    }
    if a == 0 {
        return Ok(1.0);
    }
    Ok((a as f64 * entropy(b as f64 / a as f64)?).exp())
}

/// `⌈n ln(2d+1)⌉`.
pub fn choose_k(n: usize, d: u32) -> u64 {
    (n as f64 * (2.0 * d as f64 + 1.0).ln()).ceil() as u64
}

/// `C(n+2kd−1, 2kd)^{1/2k}`, computed from the exact binomial.
pub fn moment_binomial_root(n: usize, d: u32, k: u64) -> f64 {
    (ln_big(&moment_binomial(n, d, k)) / (2 * k) as f64).exp()
}

/// The policy value `9e²` of the moment-comparison constant.
pub fn alpha_policy() -> f64 {
    9.0 * E * E
}

/// `α^{-1} √(d_w / (2k · v))`, the general volume lower bound. `k` may be
/// fractional.
pub fn general_volume_bound(d_w: u64, k: f64, alpha_k: f64, v_norm_sq: f64) -> Result<f64> {
    if d_w == 0 || [k, alpha_k, v_norm_sq].iter().any(|v| v.is_nan() || *v <= 0.0) {
        return Err(Error::Domain("general_volume_bound needs positive arguments".into()));
    }
    Ok((d_w as f64 / (2.0 * k * v_norm_sq)).sqrt() / alpha_k)
}

/// `2d / (9e² √(2n ln(2d+1))) · √(D_M / D_bi)`.
pub fn convex_volume_bound(n: usize, d: u32) -> f64 {
    let dm = ln_big(&(dim_p(n, d) - 1u32)).exp();
    let dbi = ln_big(&dim_bi(n, d)).exp();
    let nf = n as f64;
    let df = d as f64;
    2.0 * df / (alpha_policy() * (2.0 * nf * (2.0 * df + 1.0).ln()).sqrt()) * (dm / dbi).sqrt()
}

/// `12d²(4d+n)² / (n(n+2))`, the comparison constant between the Hessian
/// and L² norms.
pub fn metric_ratio(n: usize, d: u32) -> f64 {
    let (n, d) = (n as f64, d as f64);
    12.0 * d * d * (4.0 * d + n).powi(2) / (n * (n + 2.0))
}

/// Every constant for one `(n, d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub d: u32,
    #[serde(rename = "dim_P")]
    pub dim_p: u64,
    #[serde(rename = "D_M")]
    pub d_m: u64,
    #[serde(rename = "D_bi")]
    pub d_bi: u64,
    #[serde(rename = "dim_M_bi")]
    pub dim_m_bi: u64,
    pub k: u64,
    pub alpha_k: f64,
    /// `C(n+2kd−1, 2kd)^{1/k}`, at most `alpha_k`.
    pub alpha_numeric: f64,
    /// `dim U_k^{1/2k}`, a sharper admissible constant.
    pub alpha_uk: f64,
    pub convex_volume_bound: f64,
    /// Same bound with the policy constant replaced by `alpha_uk`.
    pub convex_volume_bound_sharp: f64,
    /// Lower bound for the section `X` itself: the general bound with
    /// `d_w = D_M`, integer `k`, `α = 9e²` and `v = dim M_bi`.
    pub section_volume_bound: f64,
    pub metric_ratio: f64,
    pub reference_exponents: (f64, f64),
}

fn to_u64(x: BigUint, what: &'static str) -> Result<u64> {
    x.to_u64().ok_or(Error::Overflow(what))
}

pub fn build_report(n: usize, d: u32) -> Result<BoundReport> {
    if n < 2 || d < 1 {
        return Err(Error::Domain(format!("build_report needs n >= 2 and d >= 1 (got {n}, {d})")));
    }
    let dim_p = to_u64(dim_p(n, d), "dim_P")?;
    let d_bi = to_u64(dim_bi(n, d), "D_bi")?;
    let k = choose_k(n, d);
    let alpha_k = alpha_policy();
    let alpha_numeric = (ln_big(&moment_binomial(n, d, k)) / k as f64).exp();
    let alpha_uk = (ln_big(&dim_uk(n, d, k)) / (2 * k) as f64).exp();
    let d_m = dim_p - 1;
    let dim_m_bi = d_bi - 1;
    let convex_volume_bound = convex_volume_bound(n, d);
    Ok(BoundReport {
        n,
        d,
        dim_p,
        d_m,
        d_bi,
        dim_m_bi,
        k,
        alpha_k,
        alpha_numeric,
        alpha_uk,
        convex_volume_bound,
        convex_volume_bound_sharp: convex_volume_bound * alpha_k / alpha_uk,
        section_volume_bound: general_volume_bound(d_m, k as f64, alpha_k, dim_m_bi as f64)?,
        metric_ratio: metric_ratio(n, d),
        reference_exponents: (-0.5, -(d as f64) + 0.5),
    })
}
