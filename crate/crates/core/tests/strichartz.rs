use proptest::prelude::*;

use twistlab::basis::Truncation;
use twistlab::grid::{GridSpec, TimeGrid};
use twistlab::strichartz::{
    density, sample_orthonormal_system, sweep, write_rows_csv, CoefficientVector, OrthonormalSystem,
    StrichartzHarness, SupportMode, SweepConfig,
};

fn harness(k: usize, m: usize) -> StrichartzHarness {
    let tr = Truncation::new(1, k).unwrap();
    let grid = GridSpec::default_for(1, k, m).unwrap();
    StrichartzHarness::new(&tr, &TimeGrid::lebesgue(16).unwrap(), &grid).unwrap()
}

#[test]
fn ground_state_density_is_static() {
    let tr = Truncation::new(1, 0).unwrap();
    let sys = OrthonormalSystem::eigenfunctions(tr, &[0]).unwrap();
    let grid = GridSpec::default_for(1, 0, 32).unwrap();
    let rho = density(&sys, &CoefficientVector::ones(1), &TimeGrid::lebesgue(8).unwrap(), &grid).unwrap();
    for j in 1..8 {
        for (a, b) in rho.frame(j).iter().zip(rho.frame(0)) {
            assert!((a - b).norm() < 1e-15);
        }
    }
    let zero = density(&sys, &CoefficientVector::real(&[0.0]).unwrap(), &TimeGrid::lebesgue(8).unwrap(), &grid).unwrap();
    assert!(zero.values().iter().all(|v| v.norm() == 0.0));
}

#[test]
fn triangle_endpoint() {
    let h = harness(3, 32);
    let eig = OrthonormalSystem::eigenfunctions(h.truncation().clone(), &[0, 5, 9]).unwrap();
    let nj = CoefficientVector::real(&[1.0, 0.5, 2.0]).unwrap();
    let r = h.ratio(&eig, &nj, f64::INFINITY, 1.0).unwrap();
    assert!((r.ratio - 1.0).abs() < 1e-6, "{}", r.ratio);
    for seed in 0..5 {
        let sys = sample_orthonormal_system(h.truncation(), 6, seed).unwrap();
        let r = h.ratio(&sys, &CoefficientVector::ones(6), f64::INFINITY, 1.0).unwrap();
        assert!(r.ratio <= 1.0 + 1e-6);
    }
}

#[test]
fn eigenfunction_family_stays_bounded() {
    let h = harness(8, 48);
    let tr = h.truncation().clone();
    let mut worst: f64 = 0.0;
    for nf in 1..=9 {
        // Φ_{0ν}, ν < nf
        let modes: Vec<usize> = (0..nf)
            .map(|nu| tr.pairs().iter().position(|p| p.mu.degree() == 0 && p.nu.degree() == nu).unwrap())
            .collect();
        let sys = OrthonormalSystem::eigenfunctions(tr.clone(), &modes).unwrap();
        let r = h.ratio(&sys, &CoefficientVector::ones(nf), 2.0, 2.0).unwrap();
        worst = worst.max(r.ratio);
    }
    assert!(worst.is_finite() && worst < 1.0, "{worst}");
}

#[test]
fn sweep_rows_are_sorted_and_written() {
    let cfg = SweepConfig {
        q_values: vec![1.0, 2.0],
        n_values: vec![1, 3],
        trials: 2,
        m: 24,
        nt: 8,
        ..SweepConfig::default()
    };
    let rep = sweep(&cfg).unwrap();
    assert_eq!(rep.rows.len(), 8);
    assert!(rep.rows.windows(2).all(|w| (w[0].q, w[0].n_functions, w[0].trial) <= (w[1].q, w[1].n_functions, w[1].trial)));
    assert_eq!(rep, sweep(&cfg).unwrap());
    let mut buf = Vec::new();
    write_rows_csv(&rep.rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("n,p,q,N,trial,ratio,lhs,rhs"));
    let fixed = sweep(&SweepConfig { support: SupportMode::Fixed, k_max: 2, ..cfg }).unwrap();
    assert_eq!(fixed.summary.support, SupportMode::Fixed);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn densities_are_nonnegative_and_conserve_mass(seed in 0u64..10_000, nf in 1usize..10, w in prop::collection::vec(0.0f64..2.0, 10)) {
        let h = harness(3, 32);
        let sys = sample_orthonormal_system(h.truncation(), nf, seed).unwrap();
        let nj = CoefficientVector::real(&w[..nf]).unwrap();
        let rho = h.density(&sys, &nj).unwrap();
        prop_assert!(rho.values().iter().all(|v| v.re >= 0.0 && v.im == 0.0));
        let total: f64 = w[..nf].iter().sum();
        let wz = rho.grid().weights();
        for j in 0..rho.time().len() {
            let mass: f64 = rho.frame(j).iter().zip(&wz).map(|(v, w)| v.re * w).sum();
            prop_assert!((mass - total).abs() <= 1e-6 * total.max(1.0));
        }
    }

    #[test]
    fn quotient_is_scale_invariant(seed in 0u64..10_000, scale in 0.01f64..100.0) {
        let h = harness(2, 24);
        let sys = sample_orthonormal_system(h.truncation(), 4, seed).unwrap();
        let nj = CoefficientVector::real(&[1.0, 0.3, 0.7, 2.0]).unwrap();
        let a = h.ratio(&sys, &nj, 2.0, 2.0).unwrap().ratio;
        let b = h.ratio(&sys, &nj.scaled(scale), 2.0, 2.0).unwrap().ratio;
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}
