use std::collections::BTreeMap;

use crate::forms::HomogeneousForm;

/// `p = Σ_m (x·x)^m f_m` with every `f_m` harmonic of degree `deg p − 2m`.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicDecomposition {
    n_vars: usize,
    degree: u32,
    components: Vec<(u32, HomogeneousForm)>,
}

impl HarmonicDecomposition {
    /// Nonzero components `(m, f_m)` in increasing `m`.
    pub fn components(&self) -> &[(u32, HomogeneousForm)] {
        &self.components
    }

    pub fn component(&self, m: u32) -> Option<&HomogeneousForm> {
        self.components.iter().find(|(k, _)| *k == m).map(|(_, f)| f)
    }

    /// `Σ_m (x·x)^m f_m`.
    pub fn reconstruct(&self) -> HomogeneousForm {
        let mut acc = HomogeneousForm::zero(self.n_vars, self.degree);
        for (m, f) in &self.components {
            let term = HomogeneousForm::radial(self.n_vars, *m).try_mul(f).expect("same variables");
            acc = acc.try_add(&term).expect("same degree");
        }
        acc
    }
}

/// `Δ^m (r^{2m} f) = c f` for harmonic `f` of degree `j`.
fn lift_constant(n: usize, m: u32, j: u32) -> f64 {
    (1..=m).map(|t| (2 * t) as f64 * (2.0 * t as f64 + n as f64 - 2.0 + 2.0 * j as f64)).product()
}

/// Splits `p` into radial powers times harmonic forms.
///
/// Works from the top down: `Δ^M p` only sees the `m = M` component, which
/// is recovered up to the constant `lift_constant`, subtracted, and the
/// next level read off the remainder.
pub fn harmonic_decompose(p: &HomogeneousForm) -> HarmonicDecomposition {
    let n = p.n_vars();
    let k = p.degree();
    let scale = p.max_abs_coefficient();
    let mut rem = p.clone();
    let mut components = Vec::new();
    for m in (0..=k / 2).rev() {
        let j = k - 2 * m;
        let mut top = rem.clone();
        for _ in 0..m {
            top = top.laplacian();
        }
        let f = chop(&top.scale(1.0 / lift_constant(n, m, j)), 1e-12 * scale);
        if f.is_zero() {
            continue;
        }
        let lifted = HomogeneousForm::radial(n, m).try_mul(&f).expect("same variables");
        rem = rem.try_sub(&lifted).expect("same degree");
        components.push((m, f));
    }
    components.reverse();
    HarmonicDecomposition { n_vars: n, degree: k, components }
}

fn chop(f: &HomogeneousForm, threshold: f64) -> HomogeneousForm {
    let kept: BTreeMap<_, _> = f.terms().filter(|(_, c)| c.abs() > threshold).map(|(e, c)| (e.clone(), c)).collect();
    HomogeneousForm::from_map(f.n_vars(), f.degree(), kept)
}
