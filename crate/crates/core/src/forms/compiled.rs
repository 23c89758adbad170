//! Flat, allocation-free evaluation of forms and bi-forms. Used by the
//! optimizers, which evaluate the same polynomial at many points.

use super::{BiForm, HomogeneousForm};

/// Table of `x_i^e` for `e = 0..=max_degree`.
pub(crate) struct Powers {
    stride: usize,
    vals: Vec<f64>,
}

impl Powers {
    pub fn new(n: usize, max_degree: u32) -> Self {
        let stride = max_degree as usize + 1;
        Powers { stride, vals: vec![1.0; n * stride] }
    }

    pub fn fill(&mut self, x: &[f64]) {
        for (i, &xi) in x.iter().enumerate() {
            let row = &mut self.vals[i * self.stride..(i + 1) * self.stride];
            let mut acc = 1.0;
            for v in row.iter_mut() {
                *v = acc;
                acc *= xi;
            }
        }
    }

    #[inline]
    fn get(&self, i: usize, e: u32) -> f64 {
        self.vals[i * self.stride + e as usize]
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CompiledForm {
    n: usize,
    exps: Vec<u32>,
    coefs: Vec<f64>,
}

impl CompiledForm {
    pub fn new(p: &HomogeneousForm) -> Self {
        let n = p.n_vars();
        let mut exps = Vec::with_capacity(n * p.num_terms());
        let mut coefs = Vec::with_capacity(p.num_terms());
        for (e, c) in p.terms() {
            exps.extend_from_slice(e.as_slice());
            coefs.push(c);
        }
        CompiledForm { n, exps, coefs }
    }

    #[inline]
    pub fn eval(&self, pw: &Powers) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for (t, &c) in self.coefs.iter().enumerate() {
            let e = &self.exps[t * n..(t + 1) * n];
            let mut m = c;
            for (i, &a) in e.iter().enumerate() {
                if a > 0 {
                    m *= pw.get(i, a);
                }
            }
            acc += m;
        }
        acc
    }

    /// Adds `weight * ∇p(x)` to `grad`.
    pub fn add_gradient(&self, pw: &Powers, weight: f64, grad: &mut [f64]) {
        let n = self.n;
        for (t, &c) in self.coefs.iter().enumerate() {
            let e = &self.exps[t * n..(t + 1) * n];
            for k in 0..n {
                if e[k] == 0 {
                    continue;
                }
                let mut m = weight * c * e[k] as f64;
                for (i, &a) in e.iter().enumerate() {
                    let a = if i == k { a - 1 } else { a };
                    if a > 0 {
                        m *= pw.get(i, a);
                    }
                }
                grad[k] += m;
            }
        }
    }
}

/// Upper-triangular entries of `M(x)` compiled for repeated evaluation.
#[derive(Clone, Debug)]
pub(crate) struct CompiledBiForm {
    n: usize,
    x_degree: u32,
    upper: Vec<(usize, usize, CompiledForm)>,
}

impl CompiledBiForm {
    pub fn new(b: &BiForm) -> Self {
        let n = b.n_vars();
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i..n {
                let e = b.entry(i, j);
                if !e.is_zero() {
                    upper.push((i, j, CompiledForm::new(e)));
                }
            }
        }
        CompiledBiForm { n, x_degree: b.x_degree(), upper }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn powers(&self) -> Powers {
        Powers::new(self.n, self.x_degree)
    }

    /// Writes `M(x)` row-major into `out`.
    pub fn matrix(&self, pw: &Powers, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let n = self.n;
        for (i, j, f) in &self.upper {
            let v = f.eval(pw);
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }

    /// Adds `∇_x (yᵀ M(x) y)` to `grad`.
    pub fn add_quadratic_gradient(&self, pw: &Powers, y: &[f64], grad: &mut [f64]) {
        for (i, j, f) in &self.upper {
            let w = if i == j { y[*i] * y[*i] } else { 2.0 * y[*i] * y[*j] };
            if w != 0.0 {
                f.add_gradient(pw, w, grad);
            }
        }
    }
}
