//! Gauges of compact cone sections, global minimization over spheres and
//! Monte-Carlo volume ratios.
//!
//! Every gauge rests on a numeric global minimization. A missed minimum
//! makes the gauge too small, which biases volume estimates upward; such
//! directions are flagged when no local search converged.

mod basis;
mod gauge;
mod minimize;
mod volume;

pub use basis::{orthonormal_basis, SubspaceBasis};
pub use gauge::{gauge, GaugeKind, GaugeOracle, GaugeValue};
pub use minimize::{biform_min, sphere_minimize, BiFormMinimum, OptConfig, SphereMinimum};
pub use volume::{direction, sample_gauges, volume_ratio, Estimators, VolumeEstimate};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// A Haar-random rotation of `R^n` as a row-major matrix: QR of a Gaussian
/// matrix with the signs of `R`'s diagonal absorbed into `Q`, then a column
/// flip if needed to land in `SO(n)`.
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(q[(i, j)]);
        }
    }
    out
}
