//! Gram-matrix feasibility by Dykstra's alternating projections.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{monomials, ExponentVector, HomogeneousForm, SymMatrix};

/// Tolerances and limits of the Gram solver. Tolerances are relative to the
/// largest coefficient of the target form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub psd_tol: f64,
    pub feas_tol: f64,
    pub max_iters: usize,
    pub infeas_gap: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { psd_tol: 1e-9, feas_tol: 1e-8, max_iters: 50_000, infeas_gap: 1e-6 }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        let ok = self.psd_tol > 0.0 && self.feas_tol > 0.0 && self.infeas_gap > 0.0 && self.max_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain("solver tolerances and max_iters must be positive".into()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GramStatus {
    Feasible,
    Infeasible,
    Undecided,
}

/// Outcome of the Gram feasibility search.
///
/// `gram` is indexed by the degree-`d` monomials in canonical order
/// (`monomials`), so `p(x) ≈ m(x)ᵀ G m(x)`. Infeasibility is a heuristic
/// verdict: the distance between the affine set and the PSD cone stopped
/// shrinking while still above `infeas_gap`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramCertificate {
    pub status: GramStatus,
    pub monomials: Vec<Vec<u32>>,
    pub gram: SymMatrix,
    /// Largest coefficient mismatch of `m(x)ᵀ G m(x)` against the target.
    pub affine_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    /// Frobenius distance between the last affine and PSD iterates, relative
    /// to the target's largest coefficient.
    pub gap_estimate: f64,
}

/// The linear map `G ↦ coefficients of m(x)ᵀ G m(x)` for one `(n, d)`.
#[derive(Clone, Debug)]
pub(crate) struct GramSystem {
    basis: Vec<ExponentVector>,
    /// Constraint index of every ordered entry, row-major.
    group: Vec<usize>,
    /// Exponents of the constraint monomials.
    targets: Vec<ExponentVector>,
    group_size: Vec<f64>,
}

impl GramSystem {
    pub fn new(n: usize, d: u32) -> Self {
        let basis = monomials(n, d);
        let targets = monomials(n, 2 * d);
        let index: std::collections::HashMap<Vec<u32>, usize> =
            targets.iter().enumerate().map(|(i, e)| (e.as_slice().to_vec(), i)).collect();
        let k = basis.len();
        let mut group = Vec::with_capacity(k * k);
        let mut group_size = vec![0.0; targets.len()];
        for a in &basis {
            for b in &basis {
                let sum: Vec<u32> = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x + y).collect();
                let g = index[&sum];
                group.push(g);
                group_size[g] += 1.0;
            }
        }
        GramSystem { basis, group, targets, group_size }
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    /// Coefficient vector of `p` in the constraint order.
    pub fn rhs(&self, p: &HomogeneousForm) -> Vec<f64> {
        self.targets.iter().map(|e| p.coefficient(e.as_slice())).collect()
    }

    fn apply(&self, q: &DMatrix<f64>) -> Vec<f64> {
        let k = self.size();
        let mut out = vec![0.0; self.targets.len()];
        for r in 0..k {
            for c in 0..k {
                out[self.group[r * k + c]] += q[(r, c)];
            }
        }
        out
    }

    /// Orthogonal projection onto `{Q : apply(Q) = rhs}` in the Frobenius
    /// norm. Constraint groups are disjoint, so each group's mismatch is
    /// spread evenly over its entries.
    pub fn project_affine(&self, q: &mut DMatrix<f64>, rhs: &[f64]) {
        let k = self.size();
        let cur = self.apply(q);
        let shift: Vec<f64> = (0..rhs.len()).map(|g| (rhs[g] - cur[g]) / self.group_size[g]).collect();
        for r in 0..k {
            for c in 0..k {
                q[(r, c)] += shift[self.group[r * k + c]];
            }
        }
    }

    /// The minimum-norm Gram matrix of `rhs`.
    pub fn min_norm(&self, rhs: &[f64]) -> DMatrix<f64> {
        let k = self.size();
        let mut q = DMatrix::zeros(k, k);
        self.project_affine(&mut q, rhs);
        q
    }

    pub fn residual(&self, q: &DMatrix<f64>, rhs: &[f64]) -> f64 {
        self.apply(q).iter().zip(rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn monomials(&self) -> Vec<Vec<u32>> {
        self.basis.iter().map(|e| e.as_slice().to_vec()).collect()
    }

    /// Dykstra iterations for `rhs`, which should be normalized so that its
    /// largest entry has magnitude about one.
    pub fn solve(&self, rhs: &[f64], cfg: &SolverConfig) -> Solve {
        let k = self.size();
        let mut x = self.min_norm(rhs);
        let mut corr = DMatrix::zeros(k, k);
        let mut y = x.clone();
        let mut checkpoint = f64::INFINITY;
        let mut gap = f64::INFINITY;
        for it in 1..=cfg.max_iters {
            let z = &x + &corr;
            y = project_psd(&z);
            corr = z - &y;
            let residual = self.residual(&y, rhs);
            if residual <= cfg.feas_tol {
                return Solve { status: GramStatus::Feasible, gram: y, iterations: it, gap: 0.0 };
            }
            x.copy_from(&y);
            self.project_affine(&mut x, rhs);
            gap = (&x - &y).norm();
            if it % 1000 == 0 {
                if gap > cfg.infeas_gap && gap >= (1.0 - 1e-3) * checkpoint {
                    return Solve { status: GramStatus::Infeasible, gram: y, iterations: it, gap };
                }
                checkpoint = gap;
            }
        }
        Solve { status: GramStatus::Undecided, gram: y, iterations: cfg.max_iters, gap }
    }
}

pub(crate) struct Solve {
    pub status: GramStatus,
    pub gram: DMatrix<f64>,
    pub iterations: usize,
    pub gap: f64,
}

/// Nearest positive semidefinite matrix in the Frobenius norm.
pub(crate) fn project_psd(q: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(q.clone());
    if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
        return q.clone();
    }
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let v = &eig.eigenvectors;
    let mut out = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    // restore exact symmetry
    let k = out.nrows();
    for r in 0..k {
        for c in (r + 1)..k {
            let m = 0.5 * (out[(r, c)] + out[(c, r)]);
            out[(r, c)] = m;
            out[(c, r)] = m;
        }
    }
    out
}

/// Runs the Gram solver on `p` (even degree).
pub fn sos_project(p: &HomogeneousForm, cfg: &SolverConfig) -> Result<GramCertificate> {
    cfg.validate()?;
    if p.degree() % 2 == 1 {
        return Err(Error::Domain("sums of squares have even degree".into()));
    }
    let sys = GramSystem::new(p.n_vars(), p.degree() / 2);
    let scale = p.max_abs_coefficient();
    let k = sys.size();
    if scale == 0.0 {
        let gram = SymMatrix::from_dmatrix(DMatrix::zeros(k, k));
        return Ok(GramCertificate {
            status: GramStatus::Feasible,
            monomials: sys.monomials(),
            gram,
            affine_residual: 0.0,
            min_eigenvalue: 0.0,
            iterations: 0,
            gap_estimate: 0.0,
        });
    }
    let rhs: Vec<f64> = sys.rhs(p).iter().map(|c| c / scale).collect();
    let s = sys.solve(&rhs, cfg);
    let gram = s.gram * scale;
    let affine_residual = sys.residual(&gram, &sys.rhs(p));
    let gram = SymMatrix::from_dmatrix(gram);
    let min_eigenvalue = gram.min_eigenvalue();
    Ok(GramCertificate {
        status: s.status,
        monomials: sys.monomials(),
        gram,
        affine_residual,
        min_eigenvalue,
        iterations: s.iterations,
        gap_estimate: s.gap,
    })
}

/// Numeric sum-of-squares test. An undecided run is an error: the caller
/// should raise `max_iters` or loosen the tolerances.
pub fn is_sos(p: &HomogeneousForm, cfg: &SolverConfig) -> Result<bool> {
    let cert = sos_project(p, cfg)?;
    match cert.status {
        GramStatus::Feasible => Ok(true),
        GramStatus::Infeasible => Ok(false),
        GramStatus::Undecided => Err(Error::Undecided { iterations: cert.iterations }),
    }
}
