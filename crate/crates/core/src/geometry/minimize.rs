//! Multistart projected-gradient minimization over the unit sphere.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::compiled::{CompiledBiForm, CompiledForm, Powers};
use crate::forms::matrix::{min_eigenpair_fast, min_eigenpair_slice, min_eigenvalue_fast};
use crate::forms::{BiForm, HomogeneousForm};

/// Tuning of the global sphere minimizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    /// Number of local searches, started from the best separated grid points.
    pub restarts: usize,
    /// Iteration cap for each local search.
    pub max_iters: usize,
    /// A local search stops once its step moves the point less than this.
    pub step_tol: f64,
    /// Number of points in the screening grid.
    pub grid_refinement: usize,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig { restarts: 32, max_iters: 200, step_tol: 1e-9, grid_refinement: 10_000 }
    }
}

impl OptConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.grid_refinement == 0 || self.max_iters == 0 {
            return Err(Error::Domain("restarts, max_iters and grid_refinement must be positive".into()));
        }
        if self.step_tol.is_nan() || self.step_tol <= 0.0 {
            return Err(Error::Domain("step_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Best point found on the sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereMinimum {
    /// The objective at `argmin`; never below the true minimum.
    pub value: f64,
    pub argmin: Vec<f64>,
    /// `false` when no local search converged within `max_iters`.
    pub converged: bool,
}

impl SphereMinimum {
    pub fn flagged(&self) -> bool {
        !self.converged
    }
}

/// Best point found on the product of two spheres.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiFormMinimum {
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub converged: bool,
}

impl BiFormMinimum {
    pub fn flagged(&self) -> bool {
        !self.converged
    }
}

/// A function on the sphere, evaluated at unit vectors only.
pub(crate) trait SphereObjective {
    fn n(&self) -> usize;
    fn value(&mut self, x: &[f64]) -> f64;
    /// Value and ambient gradient.
    fn value_grad(&mut self, x: &[f64], grad: &mut [f64]) -> f64;
    /// Accurate value used for the final report.
    fn refined_value(&mut self, x: &[f64]) -> f64 {
        self.value(x)
    }
}

pub(crate) struct FormObjective {
    n: usize,
    form: CompiledForm,
    pw: Powers,
}

impl FormObjective {
    pub fn new(p: &HomogeneousForm) -> Self {
        FormObjective { n: p.n_vars(), form: CompiledForm::new(p), pw: Powers::new(p.n_vars(), p.degree()) }
    }
}

impl SphereObjective for FormObjective {
    fn n(&self) -> usize {
        self.n
    }
    fn value(&mut self, x: &[f64]) -> f64 {
        self.pw.fill(x);
        self.form.eval(&self.pw)
    }
    fn value_grad(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.pw.fill(x);
        grad.iter_mut().for_each(|g| *g = 0.0);
        self.form.add_gradient(&self.pw, 1.0, grad);
        self.form.eval(&self.pw)
    }
}

/// `x ↦ λ_min(M(x))`, whose minimum over the sphere is the minimum of the
/// bi-form over the product of spheres.
pub(crate) struct EigenObjective {
    b: CompiledBiForm,
    pw: Powers,
    m: Vec<f64>,
}

impl EigenObjective {
    pub fn new(b: &BiForm) -> Self {
        let cb = CompiledBiForm::new(b);
        let pw = cb.powers();
        let n = cb.n();
        EigenObjective { b: cb, pw, m: vec![0.0; n * n] }
    }

    /// Minimizing eigenvector at `x`.
    pub fn eigvec(&mut self, x: &[f64]) -> Vec<f64> {
        self.pw.fill(x);
        self.b.matrix(&self.pw, &mut self.m);
        min_eigenpair_slice(self.b.n(), &self.m).1
    }
}

impl SphereObjective for EigenObjective {
    fn n(&self) -> usize {
        self.b.n()
    }
    fn value(&mut self, x: &[f64]) -> f64 {
        self.pw.fill(x);
        self.b.matrix(&self.pw, &mut self.m);
        min_eigenvalue_fast(self.b.n(), &self.m)
    }
    fn value_grad(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.pw.fill(x);
        self.b.matrix(&self.pw, &mut self.m);
        let (lambda, y) = min_eigenpair_fast(self.b.n(), &self.m);
        grad.iter_mut().for_each(|g| *g = 0.0);
        self.b.add_quadratic_gradient(&self.pw, &y, grad);
        lambda
    }
    fn refined_value(&mut self, x: &[f64]) -> f64 {
        self.pw.fill(x);
        self.b.matrix(&self.pw, &mut self.m);
        min_eigenpair_slice(self.b.n(), &self.m).0
    }
}

/// `x ↦ min_y yᵀM(x)y / yᵀR(x)y` with `R(x) = 2d(I + 2(d−1)xxᵀ)`, the
/// matrix of the Hessian bi-form of `(x·x)^d` at a unit vector. Solved as
/// the smallest eigenvalue of `R^{-1/2} M R^{-1/2}`, where
/// `R^{-1/2} = (2d)^{-1/2}(I + t xxᵀ)` with `t = 1/√(2d−1) − 1`.
pub(crate) struct RatioObjective {
    inner: EigenObjective,
    d: f64,
    t: f64,
    a: Vec<f64>,
}

impl RatioObjective {
    pub fn new(b: &BiForm, d: u32) -> Self {
        let d = d as f64;
        let n = b.n_vars();
        RatioObjective { inner: EigenObjective::new(b), d, t: 1.0 / (2.0 * d - 1.0).sqrt() - 1.0, a: vec![0.0; n * n] }
    }

    /// Fills `a = R^{-1/2} M(x) R^{-1/2}`.
    fn whiten(&mut self, x: &[f64]) {
        let n = self.inner.b.n();
        self.inner.pw.fill(x);
        self.inner.b.matrix(&self.inner.pw, &mut self.inner.m);
        let m = &self.inner.m;
        // S = I + t xxᵀ; S M S = M + t (x uᵀ + u xᵀ) + t² (xᵀMx) xxᵀ with u = Mx.
        let u: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i * n + j] * x[j]).sum()).collect();
        let xmx: f64 = u.iter().zip(x).map(|(a, b)| a * b).sum();
        let (t, s) = (self.t, 1.0 / (2.0 * self.d));
        for i in 0..n {
            for j in 0..n {
                self.a[i * n + j] =
                    s * (m[i * n + j] + t * (x[i] * u[j] + u[i] * x[j]) + t * t * xmx * x[i] * x[j]);
            }
        }
    }

    /// Back-transforms an eigenvector `z` of the whitened matrix to `y = S z`.
    fn unwhiten(&self, x: &[f64], z: &[f64]) -> Vec<f64> {
        let xz: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
        z.iter().zip(x).map(|(zi, xi)| zi + self.t * xz * xi).collect()
    }

    /// The minimizing direction `y` (unit length) at `x`.
    pub fn eigvec(&mut self, x: &[f64]) -> Vec<f64> {
        self.whiten(x);
        let z = min_eigenpair_slice(self.inner.b.n(), &self.a).1;
        let y = self.unwhiten(x, &z);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        y.iter().map(|v| v / norm).collect()
    }
}

impl SphereObjective for RatioObjective {
    fn n(&self) -> usize {
        self.inner.b.n()
    }
    fn value(&mut self, x: &[f64]) -> f64 {
        self.whiten(x);
        min_eigenvalue_fast(self.inner.b.n(), &self.a)
    }
    fn value_grad(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.whiten(x);
        let (lambda, z) = min_eigenpair_fast(self.inner.b.n(), &self.a);
        let y = self.unwhiten(x, &z);
        grad.iter_mut().for_each(|g| *g = 0.0);
        self.inner.b.add_quadratic_gradient(&self.inner.pw, &y, grad);
        let yy: f64 = y.iter().map(|v| v * v).sum();
        let xy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let d = self.d;
        let yry = 2.0 * d * (yy + 2.0 * (d - 1.0) * xy * xy);
        // Tangential part of ∇_x(yᵀR(x)y) is 2d·4(d−1)(x·y) y.
        let c = lambda * 2.0 * d * 4.0 * (d - 1.0) * xy;
        for (g, yi) in grad.iter_mut().zip(&y) {
            *g = (*g - c * yi) / yry;
        }
        lambda
    }
    fn refined_value(&mut self, x: &[f64]) -> f64 {
        self.whiten(x);
        min_eigenpair_slice(self.inner.b.n(), &self.a).0
    }
}

type GridCache = Mutex<HashMap<(usize, usize), Arc<Vec<f64>>>>;

/// Deterministic screening points on `S^{n-1}`, flattened row by row.
///
/// A uniform circle for `n = 2`, a Fibonacci spiral for `n = 3`, and a fixed
/// pseudo-random Gaussian cloud in higher dimensions.
pub(crate) fn sphere_grid(n: usize, size: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<GridCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(g) = cache.lock().expect("grid cache").get(&(n, size)) {
        return g.clone();
    }
    let grid = Arc::new(build_grid(n, size));
    cache.lock().expect("grid cache").insert((n, size), grid.clone());
    grid
}

fn build_grid(n: usize, size: usize) -> Vec<f64> {
    let mut pts = Vec::with_capacity(n * size);
    match n {
        1 => pts.extend([1.0, -1.0]),
        2 => {
            for i in 0..size {
                let th = std::f64::consts::TAU * i as f64 / size as f64;
                pts.extend([th.cos(), th.sin()]);
            }
        }
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for i in 0..size {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / size as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let th = golden * i as f64;
                pts.extend([r * th.cos(), r * th.sin(), z]);
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_0000 + n as u64);
            for _ in 0..size {
                let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let s = norm(&v);
                pts.extend(v.iter().map(|t| t / s));
            }
        }
    }
    pts
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Seeds are the best grid points, skipping any within about 2.8° of one
/// already chosen. The selection for `r` restarts is a prefix of the one for
/// any larger count.
fn select_seeds(obj: &mut impl SphereObjective, cfg: &OptConfig) -> Vec<Vec<f64>> {
    let n = obj.n();
    let grid = sphere_grid(n, cfg.grid_refinement);
    let count = grid.len() / n;
    let mut scored: Vec<(f64, usize)> = (0..count).map(|i| (obj.value(&grid[i * n..(i + 1) * n]), i)).collect();
    let pool = (cfg.restarts * 8).min(count);
    let by_value = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if pool < count {
        scored.select_nth_unstable_by(pool - 1, by_value);
        scored.truncate(pool);
    }
    scored.sort_unstable_by(by_value);
    let mut seeds: Vec<Vec<f64>> = Vec::with_capacity(cfg.restarts);
    for &(_, i) in &scored {
        let p = &grid[i * n..(i + 1) * n];
        if seeds.iter().all(|s| dot(s, p) < 0.9988) {
            seeds.push(p.to_vec());
            if seeds.len() == cfg.restarts {
                break;
            }
        }
    }
    seeds
}

struct Local {
    x: Vec<f64>,
    value: f64,
    converged: bool,
}

/// Projected gradient descent with Barzilai–Borwein trial steps, Armijo
/// backtracking and renormalization back onto the sphere.
fn local_search(obj: &mut impl SphereObjective, start: &[f64], cfg: &OptConfig) -> Local {
    let n = obj.n();
    let mut x = start.to_vec();
    let mut g = vec![0.0; n];
    let mut f = obj.value_grad(&x, &mut g);
    tangent(&x, &mut g);
    let mut step = {
        let gn = norm(&g);
        if gn == 0.0 {
            return Local { x, value: f, converged: true };
        }
        0.1 / gn
    };
    let mut trial = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    for _ in 0..cfg.max_iters {
        let gg = dot(&g, &g);
        if gg == 0.0 {
            return Local { x, value: f, converged: true };
        }
        let mut s = step;
        let mut accepted = None;
        for _ in 0..40 {
            for i in 0..n {
                trial[i] = x[i] - s * g[i];
            }
            let tn = norm(&trial);
            trial.iter_mut().for_each(|t| *t /= tn);
            let ft = obj.value(&trial);
            if ft <= f - 1e-4 * s * gg {
                accepted = Some(ft);
                break;
            }
            s *= 0.5;
        }
        if accepted.is_none() {
            // No descent at any resolvable step: stationary to working precision.
            return Local { x, value: f, converged: true };
        }
        let moved: f64 = x.iter().zip(&trial).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let f_new = obj.value_grad(&trial, &mut g_new);
        tangent(&trial, &mut g_new);
        // Barzilai–Borwein step for the next iteration.
        let mut sy = 0.0;
        let mut ss = 0.0;
        for i in 0..n {
            let si = trial[i] - x[i];
            sy += si * (g_new[i] - g[i]);
            ss += si * si;
        }
        step = if sy > 0.0 { ss / sy } else { 2.0 * s };
        x.copy_from_slice(&trial);
        g.copy_from_slice(&g_new);
        f = f_new;
        if moved < cfg.step_tol {
            return Local { x, value: f, converged: true };
        }
    }
    Local { x, value: f, converged: false }
}

fn tangent(x: &[f64], g: &mut [f64]) {
    let c = dot(x, g);
    for (gi, xi) in g.iter_mut().zip(x) {
        *gi -= c * xi;
    }
}

pub(crate) fn minimize_objective(obj: &mut impl SphereObjective, cfg: &OptConfig) -> Result<SphereMinimum> {
    cfg.validate()?;
    let seeds = select_seeds(obj, cfg);
    let mut best: Option<Local> = None;
    let mut any_converged = false;
    for seed in &seeds {
        let mut run = local_search(obj, seed, cfg);
        run.value = obj.refined_value(&run.x);
        any_converged |= run.converged;
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one seed");
    Ok(SphereMinimum { value: best.value, argmin: best.x, converged: any_converged })
}

/// Approximate global minimum of `p` over the unit sphere.
///
/// The returned value is `p` evaluated at the returned point, so it is an
/// upper bound on the true minimum.
pub fn sphere_minimize(p: &HomogeneousForm, cfg: &OptConfig) -> Result<SphereMinimum> {
    let n = p.n_vars();
    if p.degree() == 0 {
        let mut argmin = vec![0.0; n];
        argmin[0] = 1.0;
        return Ok(SphereMinimum { value: p.coefficient(&vec![0; n]), argmin, converged: true });
    }
    let mut obj = FormObjective::new(p);
    let mut m = minimize_objective(&mut obj, cfg)?;
    m.value = p.eval(&m.argmin);
    Ok(m)
}

/// Approximate minimum of `yᵀM(x)y` over pairs of unit vectors, taken as
/// the minimum over `x` of the smallest eigenvalue of `M(x)`.
pub fn biform_min(b: &BiForm, cfg: &OptConfig) -> Result<BiFormMinimum> {
    let mut obj = EigenObjective::new(b);
    let m = minimize_objective(&mut obj, cfg)?;
    let y = obj.eigvec(&m.argmin);
    Ok(BiFormMinimum { value: m.value, x: m.argmin, y, converged: m.converged })
}

/// Approximate minimum over pairs of unit vectors of
/// `B(x, y) / (2d(2(d−1)⟨x,y⟩² + 1))`.
pub(crate) fn ratio_min(b: &BiForm, d: u32, cfg: &OptConfig) -> Result<BiFormMinimum> {
    let mut obj = RatioObjective::new(b, d);
    let m = minimize_objective(&mut obj, cfg)?;
    let y = obj.eigvec(&m.argmin);
    Ok(BiFormMinimum { value: m.value, x: m.argmin, y, converged: m.converged })
}
