use nalgebra::DMatrix;

/// Gram–Schmidt in the span of some candidate vectors, given only their Gram
/// matrix.
///
/// Returns coefficient vectors `c` (one per accepted direction) such that
/// `Σ_k c_k v_k` is orthonormal. A candidate is dropped when its residual
/// norm² falls below `rel_tol` times its own norm². Each projection is done
/// twice, which keeps the result orthonormal to working precision.
pub(crate) fn gram_schmidt(gram: &DMatrix<f64>, rel_tol: f64) -> Vec<Vec<f64>> {
    let k = gram.nrows();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    // G·u for each accepted u, cached.
    let mut g_basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..k {
        let own = gram[(i, i)];
        if own <= 0.0 {
            continue;
        }
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        for _ in 0..2 {
            for (u, gu) in basis.iter().zip(&g_basis) {
                let proj: f64 = gu.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vj, uj) in v.iter_mut().zip(u) {
                    *vj -= proj * uj;
                }
            }
        }
        let gv: Vec<f64> = (0..k).map(|r| (0..k).map(|c| gram[(r, c)] * v[c]).sum()).collect();
        let norm_sq: f64 = gv.iter().zip(&v).map(|(a, b)| a * b).sum();
        if norm_sq <= rel_tol * own {
            continue;
        }
        let s = 1.0 / norm_sq.sqrt();
        basis.push(v.iter().map(|x| x * s).collect());
        g_basis.push(gv.iter().map(|x| x * s).collect());
    }
    basis
}
