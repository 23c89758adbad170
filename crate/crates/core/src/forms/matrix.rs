use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense symmetric matrix, e.g. a Hessian evaluated at a point or a Gram
/// matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymMatrixWire", into = "SymMatrixWire")]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

/// Row-major wire format.
#[derive(Serialize, Deserialize)]
struct SymMatrixWire {
    order: usize,
    entries: Vec<f64>,
}

impl TryFrom<SymMatrixWire> for SymMatrix {
    type Error = Error;
    fn try_from(w: SymMatrixWire) -> Result<Self> {
        SymMatrix::from_row_major(w.order, w.entries)
    }
}

impl From<SymMatrix> for SymMatrixWire {
    fn from(m: SymMatrix) -> Self {
        SymMatrixWire { order: m.order(), entries: m.row_major() }
    }
}

impl SymMatrix {
    /// Tolerance on `|a_ij - a_ji|`, relative to the largest entry.
    const SYMMETRY_TOL: f64 = 1e-12;

    pub fn from_row_major(order: usize, entries: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Domain("matrix order must be positive".into()));
        }
        if entries.len() != order * order {
            return Err(Error::DimensionMismatch { expected: order * order, found: entries.len() });
        }
        let scale = entries.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for i in 0..order {
            for j in (i + 1)..order {
                if (entries[i * order + j] - entries[j * order + i]).abs() > Self::SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(SymMatrix { inner: DMatrix::from_row_slice(order, order, &entries) })
    }

    pub(crate) fn from_dmatrix(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square());
        let sym = (&m + m.transpose()) * 0.5;
        SymMatrix { inner: sym }
    }

    pub fn identity(order: usize) -> Self {
        SymMatrix { inner: DMatrix::identity(order, order) }
    }

    pub fn order(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn row_major(&self) -> Vec<f64> {
        self.inner.transpose().iter().copied().collect()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.inner.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Smallest eigenvalue and a unit eigenvector for it.
    pub fn min_eigenpair(&self) -> (f64, Vec<f64>) {
        let n = self.order();
        min_eigenpair_slice(n, self.inner.transpose().as_slice())
    }

    /// Numerical rank: eigenvalues above `rel_tol` times the largest.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let ev = self.eigenvalues();
        let top = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        ev.iter().filter(|v| v.abs() > rel_tol * top).count()
    }

    /// Largest entry-wise deviation from the identity.
    pub fn distance_to_identity(&self) -> f64 {
        let n = self.order();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.inner[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Smallest eigenpair of a symmetric row-major `n × n` matrix via a full
/// symmetric eigendecomposition.
pub(crate) fn min_eigenpair_slice(n: usize, a: &[f64]) -> (f64, Vec<f64>) {
    let m = DMatrix::from_row_slice(n, n, a);
    let eig = SymmetricEigen::new(m);
    let (k, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    (lambda, eig.eigenvectors.column(k).iter().copied().collect())
}

/// Smallest eigenvalue of a symmetric row-major matrix. Orders two and three
/// use closed forms; larger orders fall back to the full decomposition.
pub(crate) fn min_eigenvalue_fast(n: usize, a: &[f64]) -> f64 {
    match n {
        1 => a[0],
        2 => {
            let (p, q, r) = (a[0], a[1], a[3]);
            let mean = 0.5 * (p + r);
            let half = 0.5 * (p - r);
            mean - half.hypot(q)
        }
        3 => min_eig3(a),
        _ => min_eigenpair_slice(n, a).0,
    }
}

/// Smallest eigenpair, with closed forms for orders up to three. Falls back
/// to the full decomposition whenever the closed-form eigenvector is poorly
/// determined (near-repeated smallest eigenvalue).
pub(crate) fn min_eigenpair_fast(n: usize, a: &[f64]) -> (f64, Vec<f64>) {
    match n {
        1 => (a[0], vec![1.0]),
        2 => {
            let lambda = min_eigenvalue_fast(2, a);
            let v1 = [a[1], lambda - a[0]];
            let v2 = [lambda - a[3], a[2]];
            let (n1, n2) = (v1[0].hypot(v1[1]), v2[0].hypot(v2[1]));
            let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let (v, nv) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
            if nv <= 1e-8 * scale.max(f64::MIN_POSITIVE) {
                return min_eigenpair_slice(2, a);
            }
            (lambda, vec![v[0] / nv, v[1] / nv])
        }
        3 => {
            let lambda = min_eig3(a);
            let r0 = [a[0] - lambda, a[1], a[2]];
            let r1 = [a[3], a[4] - lambda, a[5]];
            let r2 = [a[6], a[7], a[8] - lambda];
            let cands = [cross(&r0, &r1), cross(&r0, &r2), cross(&r1, &r2)];
            let (best, norm) = cands
                .iter()
                .map(|c| (c, (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("three candidates");
            let row_scale = [r0, r1, r2]
                .iter()
                .map(|r| (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt())
                .fold(0.0f64, f64::max);
            if norm <= 1e-6 * row_scale * row_scale || norm == 0.0 {
                return min_eigenpair_slice(3, a);
            }
            (lambda, vec![best[0] / norm, best[1] / norm, best[2] / norm])
        }
        _ => min_eigenpair_slice(n, a),
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Trigonometric solution of the symmetric 3×3 eigenproblem.
fn min_eig3(a: &[f64]) -> f64 {
    let (a00, a01, a02, a11, a12, a22) = (a[0], a[1], a[2], a[4], a[5], a[8]);
    let off = a01 * a01 + a02 * a02 + a12 * a12;
    let q = (a00 + a11 + a22) / 3.0;
    let (b00, b11, b22) = (a00 - q, a11 - q, a22 - q);
    let p2 = b00 * b00 + b11 * b11 + b22 * b22 + 2.0 * off;
    if p2 <= 0.0 {
        return a00.min(a11).min(a22);
    }
    let p = (p2 / 6.0).sqrt();
    let det = b00 * (b11 * b22 - a12 * a12) - a01 * (a01 * b22 - a12 * a02) + a02 * (a01 * a12 - b11 * a02);
    let r = (det / (2.0 * p * p * p)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(n: usize, rng: &mut impl Rng) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-3.0..3.0);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        a
    }

    #[test]
    fn closed_forms_match_decomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=5 {
            for _ in 0..200 {
                let a = random_sym(n, &mut rng);
                let (want, _) = min_eigenpair_slice(n, &a);
                let fast = min_eigenvalue_fast(n, &a);
                assert!((fast - want).abs() < 1e-10, "n={n}: {fast} vs {want}");
                let (lambda, v) = min_eigenpair_fast(n, &a);
                assert!((lambda - want).abs() < 1e-10);
                // A v = lambda v
                for i in 0..n {
                    let av: f64 = (0..n).map(|j| a[i * n + j] * v[j]).sum();
                    assert!((av - lambda * v[i]).abs() < 1e-8, "n={n} residual");
                }
            }
        }
    }

    #[test]
    fn repeated_eigenvalues_are_handled() {
        let id = [2.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 2.0];
        let (l, v) = min_eigenpair_fast(3, &id);
        assert!((l - 2.0).abs() < 1e-14);
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        let d2 = [1.0, 0.0, 0.0, 1.0];
        assert_eq!(min_eigenpair_fast(2, &d2).0, 1.0);
    }

    #[test]
    fn rejects_asymmetric_input() {
        assert!(matches!(
            SymMatrix::from_row_major(2, vec![1.0, 2.0, 3.0, 1.0]),
            Err(Error::NotSymmetric { row: 0, col: 1 })
        ));
    }

    #[test]
    fn json_is_row_major() {
        let m = SymMatrix::from_row_major(2, vec![1.0, 2.0, 2.0, 5.0]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"order":2,"entries":[1.0,2.0,2.0,5.0]}"#);
        let back: SymMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
