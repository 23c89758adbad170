use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::SubspaceBasis;
use super::gauge::{GaugeOracle, GaugeValue};
use crate::error::{Error, Result};
use crate::forms::HomogeneousForm;

const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Stream reserved for the bootstrap, disjoint from every direction index.
const BOOTSTRAP_STREAM: u64 = u64::MAX;

/// The three estimators of `(Vol section / Vol ball)^{1/D}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimators {
    /// `(mean Ga^{−D})^{1/D}`, the estimator of record.
    pub power_mean_root: f64,
    /// `mean Ga^{−1}`.
    pub inverse_mean: f64,
    /// `1 / mean Ga`.
    pub harmonic_mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub estimator: Estimators,
    /// Bootstrap 95% percentile interval for `power_mean_root`.
    pub ci: [f64; 2],
    pub samples: usize,
    pub seed: u64,
    pub dim: usize,
    pub flagged_fraction: f64,
}

/// Unit direction `i` in basis coordinates: ChaCha8 on stream `i` of
/// `seed`, so each direction is reproducible on its own.
///
/// Panics if `dim == 0`.
pub fn direction(seed: u64, index: u64, dim: usize) -> Vec<f64> {
    assert!(dim > 0, "no unit vectors in a zero-dimensional space");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|t| t / norm).collect();
        }
    }
}

/// Gauges of `samples` random unit directions, in index order. Directions
/// are evaluated in parallel; the output does not depend on the thread
/// count.
pub fn sample_gauges(oracle: &GaugeOracle, basis: &SubspaceBasis, samples: usize, seed: u64) -> Result<Vec<GaugeValue>> {
    if basis.n != oracle.n || basis.d != oracle.d {
        return Err(Error::DimensionMismatch { expected: oracle.n, found: basis.n });
    }
    let dim = basis.dim();
    if dim == 0 {
        return Err(Error::Domain("the zero-mean subspace is trivial for n = 1".into()));
    }
    // Dense coefficient matrix so that each direction is one pass over it.
    let coef_rows: Vec<Vec<f64>> = basis.forms.iter().map(HomogeneousForm::coefficient_vector).collect();
    let (n, deg) = (basis.n, 2 * basis.d);
    (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let c = direction(seed, i, dim);
            let mut coefs = vec![0.0; coef_rows[0].len()];
            for (ci, row) in c.iter().zip(&coef_rows) {
                for (a, b) in coefs.iter_mut().zip(row) {
                    *a += ci * b;
                }
            }
            oracle.evaluate(&HomogeneousForm::from_coefficients(n, deg, &coefs))
        })
        .collect()
}

impl VolumeEstimate {
    /// Estimators and bootstrap interval from gauge samples.
    pub fn from_gauges(gauges: &[GaugeValue], dim: usize, seed: u64) -> Result<VolumeEstimate> {
        if gauges.is_empty() {
            return Err(Error::Domain("no samples".into()));
        }
        if let Some(g) = gauges.iter().find(|g| g.value.is_nan() || g.value <= 0.0 || !g.value.is_finite()) {
            return Err(Error::Domain(format!("gauge value {} is not positive and finite", g.value)));
        }
        let values: Vec<f64> = gauges.iter().map(|g| g.value).collect();
        let estimator = estimators(&values, dim);
        let ci = bootstrap(&values, dim, seed);
        let flagged = gauges.iter().filter(|g| g.flagged).count();
        Ok(VolumeEstimate {
            estimator,
            ci,
            samples: gauges.len(),
            seed,
            dim,
            flagged_fraction: flagged as f64 / gauges.len() as f64,
        })
    }
}

fn power_mean_root(values: &[f64], dim: usize) -> f64 {
    // log-mean-exp of −D ln Ga
    let d = dim as f64;
    let logs: Vec<f64> = values.iter().map(|g| -d * g.ln()).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    ((top + (sum / values.len() as f64).ln()) / d).exp()
}

fn estimators(values: &[f64], dim: usize) -> Estimators {
    let n = values.len() as f64;
    let mut pmr = power_mean_root(values, dim);
    let inverse_mean = values.iter().map(|g| 1.0 / g).sum::<f64>() / n;
    let mut harmonic_mean = n / values.iter().sum::<f64>();
    // The ordering is an exact inequality of power means; on near-constant
    // samples summation rounding alone can break it by a few ulps.
    if pmr < inverse_mean && inverse_mean - pmr <= 1e-12 * inverse_mean {
        pmr = inverse_mean;
    }
    if harmonic_mean > inverse_mean && harmonic_mean - inverse_mean <= 1e-12 * inverse_mean {
        harmonic_mean = inverse_mean;
    }
    Estimators { power_mean_root: pmr, inverse_mean, harmonic_mean }
}

fn bootstrap(values: &[f64], dim: usize, seed: u64) -> [f64; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(BOOTSTRAP_STREAM);
    let n = values.len();
    let mut resample = vec![0.0; n];
    let mut stats: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            for slot in resample.iter_mut() {
                *slot = values[rng.random_range(0..n)];
            }
            power_mean_root(&resample, dim)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let at = |q: f64| stats[((q * BOOTSTRAP_RESAMPLES as f64) as usize).min(BOOTSTRAP_RESAMPLES - 1)];
    [at(0.025), at(0.975)]
}

/// Monte-Carlo estimate of the normalized volume of the oracle's section
/// inside the span of `basis`.
pub fn volume_ratio(oracle: &GaugeOracle, basis: &SubspaceBasis, samples: usize, seed: u64) -> Result<VolumeEstimate> {
    if samples < 100 {
        return Err(Error::Domain(format!("volume_ratio needs at least 100 samples (got {samples})")));
    }
    let gauges = sample_gauges(oracle, basis, samples, seed)?;
    VolumeEstimate::from_gauges(&gauges, basis.dim(), seed)
}
