use conevol::forms::{b_r2d, HomogeneousForm};
use conevol::sphere::{harmonic_decompose, l2_inner, sphere_mean};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn form(n: usize, degree: u32, seed: u64) -> HomogeneousForm {
    HomogeneousForm::random(n, degree, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn point(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_is_homogeneous(n in 1usize..5, degree in 0u32..7, seed: u64, t in -3.0f64..3.0, x in point(4)) {
        let p = form(n, degree, seed);
        let x = &x[..n];
        let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
        let lhs = p.evaluate(&tx).unwrap();
        let rhs = t.powi(degree as i32) * p.evaluate(x).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10), "{lhs} vs {rhs}");
    }

    #[test]
    fn euler_identity(n in 1usize..5, degree in 1u32..7, seed: u64, x in point(4)) {
        let p = form(n, degree, seed);
        let x = &x[..n];
        let grad: f64 = p.gradient().iter().zip(x).map(|(g, xi)| xi * g.evaluate(x).unwrap()).sum();
        let rhs = degree as f64 * p.evaluate(x).unwrap();
        prop_assert!(close(grad, rhs, 1e-10), "{grad} vs {rhs}");
    }

    #[test]
    fn differentiation_is_linear(n in 1usize..5, degree in 2u32..6, s1: u64, s2: u64, a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let p = form(n, degree, s1);
        let q = form(n, degree, s2);
        let combo = HomogeneousForm::linear_combination(&[p.clone(), q.clone()], &[a, b]).unwrap();
        let lhs = combo.laplacian();
        let rhs = HomogeneousForm::linear_combination(&[p.laplacian(), q.laplacian()], &[a, b]).unwrap();
        prop_assert!(lhs.relative_distance(&rhs) < 1e-12);
        for i in 0..n {
            let lhs = combo.partial(i);
            let rhs = HomogeneousForm::linear_combination(&[p.partial(i), q.partial(i)], &[a, b]).unwrap();
            prop_assert!(lhs.relative_distance(&rhs) < 1e-12);
        }
    }

    #[test]
    fn hessian_trace_is_laplacian_exactly(n in 1usize..6, degree in 2u32..7, seed: u64) {
        let p = form(n, degree, seed);
        prop_assert_eq!(p.hessian_biform().trace(), p.laplacian());
    }

    #[test]
    fn mixed_partials_commute(n in 2usize..5, degree in 2u32..6, seed: u64) {
        let p = form(n, degree, seed);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(p.second_partial(i, j), p.partial(i).partial(j));
                prop_assert_eq!(p.partial(i).partial(j), p.partial(j).partial(i));
            }
        }
    }

    #[test]
    fn json_round_trip(n in 1usize..5, degree in 0u32..6, seed: u64) {
        let p = form(n, degree, seed);
        let text = serde_json::to_string(&p).unwrap();
        let back: HomogeneousForm = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn product_is_pointwise(n in 1usize..4, d1 in 0u32..4, d2 in 0u32..4, s1: u64, s2: u64, x in point(3)) {
        let p = form(n, d1, s1);
        let q = form(n, d2, s2);
        let x = &x[..n];
        let pq = p.try_mul(&q).unwrap();
        let lhs = pq.evaluate(x).unwrap();
        let rhs = p.evaluate(x).unwrap() * q.evaluate(x).unwrap();
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn harmonic_pieces_are_orthogonal(n in 2usize..5, d in 1u32..4, seed: u64) {
        let p = form(n, 2 * d, seed);
        let dec = harmonic_decompose(&p);
        prop_assert!(dec.reconstruct().relative_distance(&p) < 1e-9);
        let scale = l2_inner(&p, &p).unwrap();
        let comps = dec.components();
        for (a, (ma, fa)) in comps.iter().enumerate() {
            prop_assert!(fa.laplacian().max_abs_coefficient() <= 1e-9 * (1.0 + fa.max_abs_coefficient()));
            for (mb, fb) in &comps[a + 1..] {
                let ra = HomogeneousForm::radial(n, *ma).try_mul(fa).unwrap();
                let rb = HomogeneousForm::radial(n, *mb).try_mul(fb).unwrap();
                prop_assert!(l2_inner(&ra, &rb).unwrap().abs() <= 1e-9 * scale);
            }
        }
    }
}

#[test]
fn radial_hessian_closed_form() {
    for n in 1..6 {
        for d in 1..5 {
            let direct = HomogeneousForm::radial(n, d).hessian_biform();
            assert!(direct.relative_distance(&b_r2d(n, d)) < 1e-12, "n={n} d={d}");
        }
    }
}

#[test]
fn zero_mean_part_has_zero_mean() {
    for seed in 0..20 {
        let p = form(3, 4, seed);
        let m = sphere_mean(&p);
        let centered = p.try_sub(&HomogeneousForm::radial(3, 2).scale(m)).unwrap();
        assert!(sphere_mean(&centered).abs() < 1e-12);
    }
}
