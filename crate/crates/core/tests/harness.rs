use dplrf::harness::evaluate::{calibration, evaluate_lowspace, evaluate_spectral, pool, Algorithm};
use dplrf::harness::generate::{gen_stream, Model};
use dplrf::harness::neighbors::{neighbor_priv1, neighbor_priv2, priv1_difference, priv2_difference};
use dplrf::linalg::{frobenius_norm, spectral_norm, svd, tail_singular_value};
use dplrf::privacy::noise_matrix;
use dplrf::{Epsilon, LowSpaceState, LrfConfig, SpectralState};

#[test]
fn neighbor_differences_respect_granularity() {
    for seed in 0..50 {
        let e1 = priv1_difference(7, 5, seed);
        assert!(frobenius_norm(&e1) <= 1.0 + 1e-12);
        let e2 = priv2_difference(7, 5, seed);
        let s = svd(&e2).unwrap();
        assert!((s.sigma[0] - 1.0).abs() < 1e-12);
        assert!(s.sigma[1] < 1e-12);

        let a = noise_matrix(7, 5, 1.0, 100 + seed);
        assert!(frobenius_norm(&(neighbor_priv1(&a, seed) - &a)) <= 1.0 + 1e-12);
        assert!((spectral_norm(&(neighbor_priv2(&a, seed) - &a)) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn generated_models_have_the_requested_spectrum() {
    let g = gen_stream(30, 20, Model::ExactRank { k: 3 }, 2, 0.0).unwrap();
    let s = svd(&g.dense).unwrap().sigma;
    assert!(s[2] > 1e-6 && s[3] < 1e-10 * s[0]);

    let g = gen_stream(30, 20, Model::LowRankPlusNoise { k: 3, tail: 0.25, scale: 4.0 }, 2, 0.0).unwrap();
    let s = svd(&g.dense).unwrap().sigma;
    assert!(s[2] >= 4.0 - 1e-9 && s[0] <= 8.0 + 1e-9, "{s:?}");
    assert!((tail_singular_value(&g.dense, 3) - 0.25).abs() < 1e-9, "{s:?}");
}

#[test]
fn calibration_matches_state() {
    let config = LrfConfig::new(20, 12, 2)
        .with_epsilon(Epsilon::finite(0.5).unwrap())
        .with_sketch_sizes(Some(6), None);
    let (params, plan) = calibration(&config, Algorithm::Spectral).unwrap();
    let st = SpectralState::init(&config).unwrap();
    assert_eq!((&params, &plan), (st.params(), st.plan()));
    let (params, plan) = calibration(&config, Algorithm::Lowspace).unwrap();
    let st = LowSpaceState::init(&config).unwrap();
    assert_eq!((&params, &plan), (st.params(), st.plan()));
    assert!(params.sigma_min > 0.0);
    assert!(plan.capped);
}

#[test]
fn reports_on_real_runs() {
    let g = gen_stream(32, 24, Model::LowRankPlusNoise { k: 2, tail: 0.1, scale: 5.0 }, 6, 0.2).unwrap();
    let config = LrfConfig::new(32, 24, 2).with_seed(3).with_sketch_sizes(Some(8), Some(32));

    let mut st = SpectralState::init(&config).unwrap();
    st.update_all(g.stream.updates.iter().copied()).unwrap();
    let f = st.finalize().unwrap();
    let r = evaluate_spectral(&g.dense, &f, st.params(), st.plan(), 1.0).unwrap();
    assert_eq!(r.budget_per_release.epsilon, Epsilon::Infinite);
    assert!(r.mult_ratio.unwrap() >= 1.0 - 1e-9);
    assert!(r.within_bound());

    let mut ls = LowSpaceState::init(&config).unwrap();
    ls.update_all(g.stream.updates.iter().copied()).unwrap();
    let lf = ls.finalize().unwrap();
    let r2 = evaluate_lowspace(&g.dense, &lf, ls.params(), ls.plan(), 1.0).unwrap();
    assert_eq!(r2.gamma_theory, 36.0);
    assert!(r2.restricted_error.unwrap() <= r2.spectral_error + 1e-9);

    let pooled = pool(&[r.clone(), r]).unwrap();
    assert_eq!((pooled.trials, pooled.success_rate), (2, 1.0));
}
