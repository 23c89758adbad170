//! Numeric membership tests for the cones of nonnegative, convex and
//! sum-of-squares forms.
//!
//! All answers are evidence, not proofs: nonnegativity and convexity rest
//! on a best-effort global minimization, the sum-of-squares test on a
//! first-order projection method.

mod gram;

pub use gram::{is_sos, sos_project, GramCertificate, GramStatus, SolverConfig};
pub(crate) use gram::GramSystem;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::HomogeneousForm;
use crate::geometry::{biform_min, sphere_minimize, OptConfig};

/// A yes/no answer with the minimum it was based on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub holds: bool,
    pub margin: f64,
    /// The minimizer did not converge; treat the answer with caution.
    pub flagged: bool,
}

/// `p ≥ −tol` on the unit sphere, with the minimum found as margin.
pub fn is_nonneg(p: &HomogeneousForm, tol: f64) -> Result<Decision> {
    is_nonneg_with(p, tol, &OptConfig::default())
}

pub fn is_nonneg_with(p: &HomogeneousForm, tol: f64, cfg: &OptConfig) -> Result<Decision> {
    if p.degree() % 2 == 1 {
        return Err(Error::Domain("nonnegativity needs an even degree".into()));
    }
    let m = sphere_minimize(p, cfg)?;
    Ok(Decision { holds: m.value >= -tol, margin: m.value, flagged: m.flagged() })
}

/// The Hessian of `p` is PSD up to `tol` on the unit sphere; the margin is
/// the smallest Hessian eigenvalue found there.
pub fn is_convex(p: &HomogeneousForm, tol: f64) -> Result<Decision> {
    is_convex_with(p, tol, &OptConfig::default())
}

pub fn is_convex_with(p: &HomogeneousForm, tol: f64, cfg: &OptConfig) -> Result<Decision> {
    if p.degree() < 2 || p.degree() % 2 == 1 {
        return Err(Error::Domain("convexity is tested for even degree >= 2".into()));
    }
    let m = biform_min(&p.hessian_biform(), cfg)?;
    Ok(Decision { holds: m.value >= -tol, margin: m.value, flagged: m.flagged() })
}
