use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::minimize::{biform_min, ratio_min, sphere_minimize, OptConfig};
use crate::error::{Error, Result};
use crate::forms::HomogeneousForm;
use crate::membership::{GramStatus, GramSystem, SolverConfig};
use crate::sphere::{sphere_mean, MetricTag};

/// Which compact section a gauge measures. Every section is taken in the
/// zero-mean hyperplane, translated by `(x·x)^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GaugeKind {
    /// `{p : p + (x·x)^d ≥ 0}`.
    PosTilde,
    /// `{p : B_p ≥ −1 on the product of spheres}`.
    XSection,
    /// `{p : p + (x·x)^d convex}`.
    KTilde,
    /// `{p : p + (x·x)^d a sum of squares}`.
    SqTilde,
    /// The unit ball of the chosen metric.
    Ball,
}

/// A gauge together with the numeric settings used to evaluate it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeOracle {
    pub kind: GaugeKind,
    pub n: usize,
    /// Half the degree.
    pub d: u32,
    pub opt: OptConfig,
    /// Norm used by [`GaugeKind::Ball`].
    pub metric: MetricTag,
    /// Gram solver used by [`GaugeKind::SqTilde`] at every bisection step.
    pub solver: SolverConfig,
}

/// A gauge value and whether any optimizer behind it failed to converge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeValue {
    pub value: f64,
    pub flagged: bool,
}

/// Relative width at which the sum-of-squares bisection stops.
const BISECTION_REL_TOL: f64 = 1e-3;
/// Largest upper bracket accepted by the sum-of-squares bisection.
const BRACKET_LIMIT: f64 = 1e6;

impl GaugeOracle {
    pub fn new(kind: GaugeKind, n: usize, d: u32) -> Self {
        GaugeOracle {
            kind,
            n,
            d,
            opt: OptConfig::default(),
            metric: MetricTag::L2,
            solver: SolverConfig { max_iters: 5_000, ..SolverConfig::default() },
        }
    }

    pub fn with_metric(mut self, metric: MetricTag) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_opt(mut self, opt: OptConfig) -> Self {
        self.opt = opt;
        self
    }

    pub fn with_solver(mut self, solver: SolverConfig) -> Self {
        self.solver = solver;
        self
    }

    fn check(&self, p: &HomogeneousForm) -> Result<()> {
        if p.n_vars() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: p.n_vars() });
        }
        if p.degree() != 2 * self.d {
            return Err(Error::DegreeMismatch { expected: 2 * self.d, found: p.degree() });
        }
        if self.kind != GaugeKind::Ball {
            let mean = sphere_mean(p);
            if mean.abs() > 1e-8 * p.max_abs_coefficient().max(f64::MIN_POSITIVE) {
                return Err(Error::Domain(format!("gauge needs a zero-mean form (mean {mean:e})")));
            }
        }
        Ok(())
    }

    /// `Ga(p) = min{λ ≥ 0 : p ∈ λ·section}`.
    pub fn evaluate(&self, p: &HomogeneousForm) -> Result<GaugeValue> {
        self.check(p)?;
        if p.is_zero() {
            return Ok(GaugeValue { value: 0.0, flagged: false });
        }
        match self.kind {
            GaugeKind::PosTilde => {
                let m = sphere_minimize(p, &self.opt)?;
                Ok(GaugeValue { value: (-m.value).max(0.0), flagged: m.flagged() })
            }
            GaugeKind::XSection => {
                let m = biform_min(&p.hessian_biform(), &self.opt)?;
                Ok(GaugeValue { value: (-m.value).max(0.0), flagged: m.flagged() })
            }
            GaugeKind::KTilde => {
                let m = ratio_min(&p.hessian_biform(), self.d, &self.opt)?;
                Ok(GaugeValue { value: (-m.value).max(0.0), flagged: m.flagged() })
            }
            GaugeKind::Ball => Ok(GaugeValue { value: self.metric.norm(p)?, flagged: false }),
            GaugeKind::SqTilde => self.sos_gauge(p),
        }
    }

    /// Bisection on `λ` for `p + λ(x·x)^d` being a sum of squares.
    ///
    /// The lower bracket is the nonnegativity gauge. The upper bracket needs
    /// no solver: with `Q_p` and `R` the minimum-norm Gram matrices of `p`
    /// and `(x·x)^d`, `Q_p + λR` is PSD once `λ ≥ λ_max(−R^{-1/2} Q_p R^{-1/2})`.
    /// Undecided solver runs count as infeasible, which can only raise the
    /// gauge.
    fn sos_gauge(&self, p: &HomogeneousForm) -> Result<GaugeValue> {
        let pos = sphere_minimize(p, &self.opt)?;
        // Work in units of the largest coefficient so that the bisection
        // path does not depend on the scale of `p`.
        let scale = p.max_abs_coefficient();
        let mut lo = (-pos.value).max(0.0) / scale;
        let sys = GramSystem::new(self.n, self.d);
        let rhs_p: Vec<f64> = sys.rhs(p).iter().map(|c| c / scale).collect();
        let rhs_r = sys.rhs(&HomogeneousForm::radial(self.n, self.d));
        let feasible = |lam: f64| -> bool {
            let rhs: Vec<f64> = rhs_p.iter().zip(&rhs_r).map(|(a, b)| a + lam * b).collect();
            sys.solve(&rhs, &self.solver).status == GramStatus::Feasible
        };
        let limit = BRACKET_LIMIT / scale;
        let mut hi = match certified_bracket(&sys, &rhs_p, &rhs_r) {
            Some(h) => h,
            None => {
                let mut h = lo.max(1e-6);
                while !feasible(h) {
                    h *= 2.0;
                    if h > limit {
                        break;
                    }
                }
                h
            }
        };
        if hi > limit {
            return Err(Error::BisectionBracketFailure { limit: BRACKET_LIMIT });
        }
        if hi <= lo {
            return Ok(GaugeValue { value: lo * scale, flagged: pos.flagged() });
        }
        while hi - lo > BISECTION_REL_TOL * hi {
            let mid = 0.5 * (lo + hi);
            if feasible(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(GaugeValue { value: hi * scale, flagged: pos.flagged() })
    }
}

/// `λ_max(−R^{-1/2} Q_p R^{-1/2})` for the minimum-norm Gram matrices, or
/// `None` when the one of `(x·x)^d` is not positive definite.
fn certified_bracket(sys: &GramSystem, rhs_p: &[f64], rhs_r: &[f64]) -> Option<f64> {
    let q = sys.min_norm(rhs_p);
    let r = sys.min_norm(rhs_r);
    let eig = SymmetricEigen::new(r);
    if eig.eigenvalues.iter().any(|&l| l <= 1e-12) {
        return None;
    }
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let v = &eig.eigenvectors;
    let w = v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose();
    let m = -(&w * q * &w);
    let m = 0.5 * (&m + m.transpose());
    let top = SymmetricEigen::new(m).eigenvalues.max();
    // pad by a relative margin so that rounding cannot leave Q_p + λR
    // marginally indefinite
    Some(top.max(0.0) * (1.0 + 1e-9) + 1e-12)
}

/// `gauge(oracle, p)`, discarding the convergence flag.
pub fn gauge(oracle: &GaugeOracle, p: &HomogeneousForm) -> Result<f64> {
    oracle.evaluate(p).map(|g| g.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::membership::is_sos;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn zero_mean(p: &HomogeneousForm) -> HomogeneousForm {
        let r = HomogeneousForm::radial(p.n_vars(), p.degree() / 2);
        p.try_sub(&r.scale(sphere_mean(p))).unwrap()
    }

    #[test]
    fn pos_gauge_is_minus_the_minimum() {
        // x1^2 - x2^2 has zero mean and minimum -1; scaled by 5.
        let p = HomogeneousForm::new(2, 2, [(vec![2, 0], 5.0), (vec![0, 2], -5.0)]).unwrap();
        let g = gauge(&GaugeOracle::new(GaugeKind::PosTilde, 2, 1), &p).unwrap();
        assert!((g - 5.0).abs() < 1e-12);
    }

    #[test]
    fn ball_gauge_is_the_norm() {
        let s = std::f64::consts::SQRT_2;
        let p = HomogeneousForm::new(2, 2, [(vec![2, 0], s), (vec![0, 2], -s)]).unwrap();
        let g = gauge(&GaugeOracle::new(GaugeKind::Ball, 2, 1), &p).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonzero_mean() {
        let p = HomogeneousForm::radial(2, 2);
        assert!(gauge(&GaugeOracle::new(GaugeKind::PosTilde, 2, 2), &p).is_err());
    }

    #[test]
    fn sandwich_between_x_and_ktilde() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let x = GaugeOracle::new(GaugeKind::XSection, 3, 2);
        let k = GaugeOracle::new(GaugeKind::KTilde, 3, 2);
        for _ in 0..10 {
            let p = zero_mean(&HomogeneousForm::random(3, 4, &mut rng));
            let gx = gauge(&x, &p).unwrap();
            let gk = gauge(&k, &p).unwrap();
            assert!(gk >= gx / 12.0 - 1e-6 && gk <= gx / 4.0 + 1e-6, "{gx} {gk}");
        }
    }

    #[test]
    fn ktilde_gauge_is_the_convexity_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = GaugeOracle::new(GaugeKind::KTilde, 3, 2);
        let r = HomogeneousForm::radial(3, 2);
        for _ in 0..5 {
            let p = zero_mean(&HomogeneousForm::random(3, 4, &mut rng));
            let g = gauge(&k, &p).unwrap();
            let on = p.scale(1.0 / g).try_add(&r).unwrap();
            assert!(crate::membership::is_convex(&on, 1e-6).unwrap().holds);
            let past = p.scale(1.0 / (0.99 * g)).try_add(&r).unwrap();
            assert!(!crate::membership::is_convex(&past, 1e-6).unwrap().holds);
        }
    }

    #[test]
    fn sos_gauge_brackets_and_certifies() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let pos = GaugeOracle::new(GaugeKind::PosTilde, 3, 2);
        let sq = GaugeOracle::new(GaugeKind::SqTilde, 3, 2);
        let r = HomogeneousForm::radial(3, 2);
        for _ in 0..3 {
            let p = zero_mean(&HomogeneousForm::random(3, 4, &mut rng));
            let gp = gauge(&pos, &p).unwrap();
            let gs = gauge(&sq, &p).unwrap();
            assert!(gs >= gp, "{gs} < {gp}");
            // Ternary quartics: nonnegative equals sum of squares, so the two
            // gauges agree up to the bisection width and solver budget.
            assert!(gs <= gp * 1.05, "{gs} vs {gp}");
            let at = p.scale(1.0 / gs).try_add(&r).unwrap();
            assert!(is_sos(&at, &SolverConfig::default()).unwrap());
        }
    }

    #[test]
    fn gauges_are_positively_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p = zero_mean(&HomogeneousForm::random(3, 4, &mut rng));
        for kind in [GaugeKind::PosTilde, GaugeKind::XSection, GaugeKind::KTilde, GaugeKind::SqTilde, GaugeKind::Ball] {
            let o = GaugeOracle::new(kind, 3, 2);
            let g = gauge(&o, &p).unwrap();
            for t in [0.5, 2.0, 10.0] {
                let gt = gauge(&o, &p.scale(t)).unwrap();
                assert!((gt - t * g).abs() <= 1e-6 * t * g, "{kind:?} t={t}: {gt} vs {}", t * g);
            }
        }
    }
}
