//! Sphere calculus, cone gauges and volume bounds for cones of forms.
//!
//! The crate works with real homogeneous forms of even degree `2d` in `n`
//! variables and three nested cones inside them: sums of squares, convex
//! forms, and nonnegative forms. It provides
//!
//! * [`forms`]: sparse forms, Hessian bi-forms `yᵀ H_p(x) y`, symbolic
//!   differentiation;
//! * [`sphere`]: exact integration over the unit sphere and the product of
//!   two spheres, the L² and Hessian inner products, harmonic decomposition;
//! * [`geometry`]: gauges of compact sections of the cones, global
//!   minimization over spheres, Monte-Carlo volume ratios;
//! * [`bounds`]: closed-form dimension counts and volume lower bounds;
//! * [`membership`]: numeric tests for nonnegativity, convexity and the
//!   sum-of-squares property.
//!
//! ```
//! use conevol::forms::HomogeneousForm;
//! use conevol::sphere::{hessian_inner, l2_inner};
//!
//! let r4 = HomogeneousForm::radial(2, 2);
//! assert!((l2_inner(&r4, &r4).unwrap() - 1.0).abs() < 1e-15);
//! assert!(hessian_inner(&r4, &r4).unwrap() > 0.0);
//! ```

pub mod bounds;
pub mod error;
pub mod forms;
pub mod geometry;
pub mod membership;
pub mod sphere;

pub use error::{Error, Result};

/// The guide's chapters, compiled as doc-tests so that every snippet in the
/// book stays in sync with the library.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/forms.md")]
    mod forms {}
    #[doc = include_str!("../../../book/src/sphere-calculus.md")]
    mod sphere_calculus {}
    #[doc = include_str!("../../../book/src/gauges-and-volumes.md")]
    mod gauges_and_volumes {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/membership.md")]
    mod membership {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
