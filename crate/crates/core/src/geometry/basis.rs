use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{monomials, HomogeneousForm};
use crate::sphere::{gram_matrix, gram_schmidt, monomial_moment, MetricTag};

/// An orthonormal basis of the zero-mean forms of degree `2d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    pub metric: MetricTag,
    pub n: usize,
    pub d: u32,
    pub forms: Vec<HomogeneousForm>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.forms.len()
    }

    /// `Σ c_i e_i`.
    pub fn combine(&self, coords: &[f64]) -> Result<HomogeneousForm> {
        HomogeneousForm::linear_combination(&self.forms, coords)
    }

    /// The basis `e_i ∘ A` for a row-major `n × n` matrix `A`.
    pub fn compose_linear(&self, a: &[f64]) -> Result<SubspaceBasis> {
        let forms = self.forms.iter().map(|f| f.compose_linear(a)).collect::<Result<_>>()?;
        Ok(SubspaceBasis { forms, ..self.clone() })
    }
}

/// Gram–Schmidt over the zero-mean parts `x^α − (∫x^α)(x·x)^d` of the
/// degree-`2d` monomials, using exact Gram matrices under `metric`.
pub fn orthonormal_basis(n: usize, d: u32, metric: MetricTag) -> Result<SubspaceBasis> {
    if n == 0 || d == 0 {
        return Err(Error::Domain(format!("orthonormal_basis needs n, d >= 1 (got {n}, {d})")));
    }
    let r = HomogeneousForm::radial(n, d);
    let cands: Vec<HomogeneousForm> = monomials(n, 2 * d)
        .into_iter()
        .map(|e| {
            let mu = monomial_moment(e.as_slice());
            HomogeneousForm::new(n, 2 * d, [(e, 1.0)]).expect("monomial").try_sub(&r.scale(mu)).expect("same space")
        })
        .collect();
    let expected = cands.len() - 1;
    let gram = gram_matrix(&cands, metric)?;
    let coefs = gram_schmidt(gram.as_dmatrix(), 1e-9);
    if coefs.len() != expected {
        return Err(Error::RankDeficiency { expected, found: coefs.len() });
    }
    let forms = coefs
        .iter()
        .map(|c| HomogeneousForm::linear_combination(&cands, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(SubspaceBasis { metric, n, d, forms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::sphere_mean;

    #[test]
    fn dimensions_and_orthonormality() {
        for (n, d) in [(2usize, 1u32), (2, 2), (3, 2), (3, 3), (4, 2)] {
            for metric in [MetricTag::L2, MetricTag::Hessian] {
                let b = orthonormal_basis(n, d, metric).unwrap();
                assert_eq!(b.dim(), monomials(n, 2 * d).len() - 1);
                let g = gram_matrix(&b.forms, metric).unwrap();
                assert!(g.distance_to_identity() < 1e-9, "n={n} d={d} {metric}: {}", g.distance_to_identity());
                for f in &b.forms {
                    assert!(sphere_mean(f).abs() <= 1e-10);
                }
            }
        }
        assert_eq!(orthonormal_basis(3, 2, MetricTag::L2).unwrap().dim(), 14);
    }
}
