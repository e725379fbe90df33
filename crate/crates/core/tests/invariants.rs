use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use polyrank::generic::{codim_generic, generic_structure_at};
use polyrank::linalg::random_matrix;
use polyrank::{
    complete_eigenstructure, first_companion, realize, second_companion, MatrixPolynomial,
    RealizeTarget, ToleranceProfile,
};

/// `(m, n, r, d, a)` inside the supported grid.
fn family() -> impl Strategy<Value = (usize, usize, usize, usize, usize)> {
    (2usize..=5, 2usize..=5, 1usize..=3)
        .prop_flat_map(|(m, n, d)| (Just(m), Just(n), 1..m.min(n), Just(d)))
        .prop_flat_map(|(m, n, r, d)| (Just(m), Just(n), Just(r), Just(d), 0..=r * d))
}

fn realized(m: usize, n: usize, r: usize, d: usize, a: usize, seed: u64) -> MatrixPolynomial {
    let k = generic_structure_at(m, n, r, d, a).unwrap();
    realize(
        &RealizeTarget::Bounded(k),
        seed,
        &ToleranceProfile::default(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_equivalence_preserves_structure(
        (m, n, r, d, a) in family(),
        seed in 0u64..1_000,
    ) {
        let tol = ToleranceProfile::default();
        let p = realized(m, n, r, d, a, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let u = random_matrix(m, m, &mut rng);
        let v = random_matrix(n, n, &mut rng);
        let coeffs = p.coeffs().iter().map(|c| &u * c * &v).collect();
        let q = MatrixPolynomial::new(m, n, d, coeffs).unwrap();
        let s1 = complete_eigenstructure(&p, &tol).unwrap();
        let s2 = complete_eigenstructure(&q, &tol).unwrap();
        prop_assert!(s1.matches(&s2, 1e-6), "{s1:?} vs {s2:?}");
    }

    #[test]
    fn transpose_swaps_minimal_indices((m, n, r, d, a) in family(), seed in 0u64..1_000) {
        let tol = ToleranceProfile::default();
        let p = realized(m, n, r, d, a, seed);
        let s = complete_eigenstructure(&p, &tol).unwrap();
        let t = complete_eigenstructure(&p.transpose(), &tol).unwrap();
        prop_assert_eq!(&s.right, &t.left);
        prop_assert_eq!(&s.left, &t.right);
        prop_assert_eq!(t.balance_residual(), 0);
    }

    #[test]
    fn reversal_keeps_minimal_indices((m, n, r, d, a) in family(), seed in 0u64..1_000) {
        let tol = ToleranceProfile::default();
        let p = realized(m, n, r, d, a, seed);
        let s = complete_eigenstructure(&p, &tol).unwrap();
        let t = complete_eigenstructure(&p.reversal(), &tol).unwrap();
        prop_assert_eq!(&s.right, &t.right);
        prop_assert_eq!(&s.left, &t.left);
        prop_assert!(!t.has_elementary_divisors());
    }

    #[test]
    fn second_companion_shifts_left_indices((m, n, r, d, a) in family(), seed in 0u64..1_000) {
        let tol = ToleranceProfile::default();
        let p = realized(m, n, r, d, a, seed);
        let s = complete_eigenstructure(&p, &tol).unwrap();
        let c2 = second_companion(&p).unwrap().pencil.to_polynomial().unwrap();
        let t = complete_eigenstructure(&c2, &tol).unwrap();
        let shifted: Vec<usize> = s.left.iter().map(|e| e + d - 1).collect();
        prop_assert_eq!(&t.left, &shifted);
        prop_assert_eq!(&t.right, &s.right);
    }

    #[test]
    fn companion_is_an_isometry((m, n, r, d, a) in family(), s1 in 0u64..500, s2 in 500u64..1_000) {
        let p = realized(m, n, r, d, a, s1);
        let q = realized(m, n, r, d, a, s2);
        let lhs = first_companion(&p).unwrap().pencil.distance(&first_companion(&q).unwrap().pencil).unwrap();
        prop_assert!((lhs - p.distance(&q).unwrap()).abs() <= 1e-12 * (1.0 + lhs));
    }

    #[test]
    fn codimension_steps_by_m_minus_n((m, n, r, d, a) in family()) {
        prop_assume!(a < r * d);
        let c0 = codim_generic(m, n, r, d, a).unwrap();
        let c1 = codim_generic(m, n, r, d, a + 1).unwrap();
        prop_assert_eq!(c1 - c0, m as i64 - n as i64);
    }
}
