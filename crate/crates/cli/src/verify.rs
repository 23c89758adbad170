//! The identity and inequality suite behind `conevol verify`.

use std::f64::consts::E;

use conevol::bounds::{binom_entropy_bound, binomial, choose_k, moment_binomial_root, ln_big, metric_ratio};
use conevol::forms::{b_r2d, BiForm, HomogeneousForm};
use conevol::sphere::{
    dirichlet_integral, harmonic_decompose, hessian_inner, l2_inner, product_sphere_inner, quads_norm,
    ZeroMeanBiKernel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::manifest::RunManifest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Two computations of the same quantity; residual is relative.
    Identity,
    /// `lhs ≤ rhs`; residual is `(lhs − rhs) / |rhs|`, negative when slack.
    Inequality,
    /// Fixed cases, no randomness.
    Deterministic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub cases: usize,
    pub tolerance: f64,
    pub worst_residual: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub manifest: RunManifest,
    pub n: usize,
    pub degree: u32,
    pub trials: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Tracks the worst residual; NaN poisons the result.
struct Worst {
    value: f64,
    cases: usize,
}

impl Worst {
    fn new(start: f64) -> Self {
        Worst { value: start, cases: 0 }
    }

    fn push(&mut self, r: f64) {
        self.cases += 1;
        if r.is_nan() || r > self.value {
            self.value = r;
        }
    }

    fn finish(self, name: &str, kind: CheckKind, tolerance: f64) -> Check {
        Check {
            name: name.to_string(),
            kind,
            cases: self.cases,
            tolerance,
            worst_residual: self.value,
            passed: self.value <= tolerance,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn unit_point(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn two_paths(n: usize, d: u32, trials: usize, seed: u64) -> Check {
    let mut rng = stream(seed, 1);
    let mut w = Worst::new(0.0);
    for _ in 0..trials {
        let upper = (0..n * (n + 1) / 2).map(|_| HomogeneousForm::random(n, 2 * d - 2, &mut rng)).collect();
        let b = BiForm::from_upper(n, 2 * d - 2, upper).expect("entries share one space");
        let full = product_sphere_inner(&b, &b).expect("same space");
        w.push(rel(full, quads_norm(&b)));
    }
    w.finish("product_sphere_two_paths", CheckKind::Identity, 1e-9)
}

fn stokes(n: usize, d: u32, trials: usize, seed: u64) -> Check {
    let mut rng = stream(seed, 2);
    let mut w = Worst::new(0.0);
    for _ in 0..trials {
        let p = HomogeneousForm::random(n, 2 * d, &mut rng);
        for (_, f) in harmonic_decompose(&p).components() {
            let j = f.degree() as f64;
            let rhs = j * (2.0 * j + n as f64 - 2.0) * l2_inner(f, f).expect("same space");
            w.push(rel(dirichlet_integral(f), rhs));
        }
    }
    w.finish("stokes_identity_harmonic", CheckKind::Identity, 1e-8)
}

/// `Δ(r^{2m} f) = 2m(n+4d−2m−2) r^{2m−2} f` for harmonic `f`, evaluated on
/// the sphere. Residuals are scaled by the coefficient mass of `g`, which
/// bounds both sides on the unit sphere.
fn laplacian_eigen(n: usize, d: u32, trials: usize, seed: u64) -> Check {
    let mut rng = stream(seed, 3);
    let mut w = Worst::new(0.0);
    for _ in 0..trials {
        let p = HomogeneousForm::random(n, 2 * d, &mut rng);
        let x = unit_point(n, &mut rng);
        for (m, f) in harmonic_decompose(&p).components() {
            let g = HomogeneousForm::radial(n, *m).try_mul(f).expect("same space");
            let c = 2.0 * *m as f64 * (n as f64 + 4.0 * d as f64 - 2.0 * *m as f64 - 2.0);
            let lhs = g.laplacian().evaluate(&x).expect("point has n coordinates");
            let rhs = c * g.evaluate(&x).expect("point has n coordinates");
            let mass: f64 = g.terms().map(|(_, v)| v.abs()).sum::<f64>() * c.max(1.0);
            let scale = lhs.abs().max(rhs.abs()).max(mass);
            w.push(if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale });
        }
    }
    w.finish("laplacian_eigen_identity", CheckKind::Identity, 1e-9)
}

fn trace_laplacian(n: usize, d: u32, trials: usize, seed: u64) -> Check {
    let mut rng = stream(seed, 4);
    let mut w = Worst::new(0.0);
    for _ in 0..trials {
        let p = HomogeneousForm::random(n, 2 * d, &mut rng);
        let (t, l) = (p.hessian_biform().trace(), p.laplacian());
        w.push(if t == l { 0.0 } else { t.relative_distance(&l).max(f64::MIN_POSITIVE) });
    }
    w.finish("hessian_trace_equals_laplacian", CheckKind::Identity, 0.0)
}

fn euler(n: usize, d: u32, trials: usize, seed: u64) -> Check {
    let mut rng = stream(seed, 5);
    let mut w = Worst::new(0.0);
    for _ in 0..trials {
        let p = HomogeneousForm::random(n, 2 * d, &mut rng);
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let lhs: f64 = p.gradient().iter().zip(&x).map(|(g, xi)| xi * g.evaluate(&x).expect("n coordinates")).sum();
        let rhs = (2 * d) as f64 * p.evaluate(&x).expect("n coordinates");
        w.push(rel(lhs, rhs));
    }
    w.finish("euler_identity", CheckKind::Identity, 1e-10)
}

fn kernel_norm(n: usize, d: u32, trials: usize, seed: u64) -> Check {
    let mut rng = stream(seed, 6);
    let mut w = Worst::new(0.0);
    let kernel = match ZeroMeanBiKernel::new(n, d) {
        Ok(k) => k,
        Err(_) => {
            w.push(f64::INFINITY);
            return w.finish("reproducing_kernel_norm", CheckKind::Identity, 1e-6);
        }
    };
    for _ in 0..trials.min(20) {
        let x = unit_point(n, &mut rng);
        let y = unit_point(n, &mut rng);
        let s = kernel.sum_of_squares(&x, &y).unwrap_or(f64::NAN);
        w.push(rel(s, kernel.dim() as f64));
    }
    w.finish("reproducing_kernel_norm", CheckKind::Identity, 1e-6)
}

fn radial_closed_form(n: usize, d: u32) -> Check {
    let mut w = Worst::new(0.0);
    w.push(HomogeneousForm::radial(n, d).hessian_biform().relative_distance(&b_r2d(n, d)));
    w.finish("radial_biform_closed_form", CheckKind::Deterministic, 1e-12)
}

fn dirichlet_bound(n: usize, d: u32, cases: usize, seed: u64) -> Check {
    let mut rng = stream(seed, 7);
    let mut w = Worst::new(f64::NEG_INFINITY);
    let k = (2 * d) as f64;
    for _ in 0..cases {
        let g = HomogeneousForm::random(n, 2 * d, &mut rng);
        let rhs = (2.0 * k * k + k * n as f64) * l2_inner(&g, &g).expect("same space");
        w.push((dirichlet_integral(&g) - rhs) / rhs);
    }
    w.finish("dirichlet_gradient_bound", CheckKind::Inequality, 1e-12)
}

fn metric_bound(n: usize, d: u32, cases: usize, seed: u64) -> Check {
    let mut rng = stream(seed, 8);
    let mut w = Worst::new(f64::NEG_INFINITY);
    let c = metric_ratio(n, d);
    for _ in 0..cases {
        let g = HomogeneousForm::random(n, 2 * d, &mut rng);
        let rhs = c * l2_inner(&g, &g).expect("same space");
        w.push((hessian_inner(&g, &g).expect("degree at least 2") - rhs) / rhs);
    }
    w.finish("hessian_metric_bound", CheckKind::Inequality, 1e-12)
}

fn moment_constant() -> Check {
    let mut w = Worst::new(f64::NEG_INFINITY);
    for n in 2..=20 {
        for d in 1..=5 {
            w.push(moment_binomial_root(n, d, choose_k(n, d)) / (3.0 * E) - 1.0);
        }
    }
    w.finish("moment_constant_below_3e", CheckKind::Deterministic, 0.0)
}

fn entropy_bound() -> Check {
    let mut w = Worst::new(f64::NEG_INFINITY);
    for a in 1..=60u64 {
        for b in 0..=a {
            let bound = binom_entropy_bound(a, b).expect("b <= a").ln();
            w.push(ln_big(&binomial(a, b)) - bound);
        }
    }
    w.finish("binomial_entropy_bound", CheckKind::Deterministic, 1e-12)
}

/// Runs every check for forms of degree `2d` in `n` variables.
pub fn run_checks(n: usize, d: u32, trials: usize, seed: u64) -> Vec<Check> {
    let cases = 10 * trials;
    vec![
        two_paths(n, d, trials, seed),
        stokes(n, d, trials, seed),
        laplacian_eigen(n, d, trials, seed),
        trace_laplacian(n, d, trials, seed),
        euler(n, d, trials, seed),
        kernel_norm(n, d, trials, seed),
        radial_closed_form(n, d),
        dirichlet_bound(n, d, cases, seed),
        metric_bound(n, d, cases, seed),
        moment_constant(),
        entropy_bound(),
    ]
}

pub fn verify(n: usize, d: u32, trials: usize, seed: u64, manifest: RunManifest) -> VerifyReport {
    let checks = run_checks(n, d, trials, seed);
    let passed = checks.iter().all(|c| c.passed);
    VerifyReport { manifest, n, degree: 2 * d, trials, checks, passed }
}
