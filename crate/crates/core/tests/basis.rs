use num_complex::Complex64;
use proptest::prelude::*;

use twistlab::basis::{
    count_up_to_degree, special_hermite, special_hermite_auto, required_order, MultiIndex, MultiIndexPair,
    SampledBasis, Truncation,
};
use twistlab::grid::GridSpec;
use twistlab::Error;

#[test]
fn truncation_sizes() {
    for (n, k) in [(1, 0), (1, 8), (2, 3)] {
        let tr = Truncation::new(n, k).unwrap();
        assert_eq!(tr.len(), count_up_to_degree(n, k).pow(2));
    }
    assert!(Truncation::new(0, 2).is_err());
}

#[test]
fn low_order_is_reported() {
    let pair = MultiIndexPair::scalar(3, 1);
    let z = [Complex64::new(5.0, 0.5)];
    let need = required_order(&pair, &z);
    match special_hermite(&pair, &z, need - 1) {
        Err(Error::InsufficientQuadrature { required, given }) => {
            assert_eq!((required, given), (need, need - 1));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn two_dimensional_gram() {
    let tr = Truncation::new(2, 2).unwrap();
    let grid = GridSpec::default_for(2, 2, 24).unwrap();
    let basis = SampledBasis::new(&tr, &grid).unwrap();
    let g = basis.gram();
    for i in 0..tr.len() {
        for j in 0..tr.len() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((g[(i, j)] - want).norm() < 1e-6, "({i}, {j}): {}", g[(i, j)]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn swapping_indices_conjugates(mu in 0usize..6, nu in 0usize..6, x in -4.0f64..4.0, y in -4.0f64..4.0) {
        let z = [Complex64::new(x, y)];
        let mz = [Complex64::new(-x, -y)];
        let a = special_hermite_auto(&MultiIndexPair::scalar(mu, nu), &z).unwrap();
        let b = special_hermite_auto(&MultiIndexPair::scalar(nu, mu), &mz).unwrap();
        prop_assert!((a.conj() - b).norm() < 1e-12);
    }

    #[test]
    fn bounded_by_normalization(mu in 0usize..8, nu in 0usize..8, x in -6.0f64..6.0, y in -6.0f64..6.0) {
        // |Φ_μν| ≤ (2π)^{−1/2} by Cauchy–Schwarz on the defining integral
        let v = special_hermite_auto(&MultiIndexPair::scalar(mu, nu), &[Complex64::new(x, y)]).unwrap();
        prop_assert!(v.norm() <= (2.0 * std::f64::consts::PI).powf(-0.5) + 1e-12);
    }

    #[test]
    fn products_factor(m1 in 0usize..3, n1 in 0usize..3, m2 in 0usize..3, n2 in 0usize..3,
                       a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, d in -3.0f64..3.0) {
        let pair = MultiIndexPair::new(MultiIndex::new(vec![m1, m2]), MultiIndex::new(vec![n1, n2])).unwrap();
        let z = [Complex64::new(a, b), Complex64::new(c, d)];
        let joint = special_hermite_auto(&pair, &z).unwrap();
        let f1 = special_hermite_auto(&MultiIndexPair::scalar(m1, n1), &z[..1]).unwrap();
        let f2 = special_hermite_auto(&MultiIndexPair::scalar(m2, n2), &z[1..]).unwrap();
        prop_assert!((joint - f1 * f2).norm() < 1e-13);
    }
}
