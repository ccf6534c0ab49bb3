use std::ffi::CStr;
use std::ptr;

use dplrf::{LrfConfig, SpectralState, TurnstileUpdate};
use dplrf_ffi::*;

fn diag_updates(values: &[f64]) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let idx: Vec<usize> = (0..values.len()).collect();
    (idx.clone(), idx, values.to_vec())
}

fn last_error() -> String {
    let p = dplrf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn read(f: *const DplrfFactorization) -> (Vec<f64>, Vec<f64>, Vec<f64>, usize) {
    let (mut rows, mut cols, mut k, mut rank) = (0, 0, 0, 0);
    assert_eq!(dplrf_factorization_shape(f, &mut rows, &mut cols, &mut k, &mut rank), DplrfStatus::Ok);
    let mut u = vec![0.0; rows * k];
    let mut s = vec![0.0; k];
    let mut v = vec![0.0; cols * k];
    assert_eq!(dplrf_factorization_u(f, u.as_mut_ptr(), u.len()), DplrfStatus::Ok);
    assert_eq!(dplrf_factorization_sigma(f, s.as_mut_ptr(), s.len()), DplrfStatus::Ok);
    assert_eq!(dplrf_factorization_v(f, v.as_mut_ptr(), v.len()), DplrfStatus::Ok);
    (u, s, v, rank)
}

#[test]
fn spectral_round_trip_matches_rust_api() {
    let mut cfg = dplrf_config_default(16, 16, 3);
    cfg.t = 6;
    cfg.v = 16;
    cfg.seed = 9;
    let (i, j, s) = diag_updates(&[5.0, 4.0, 3.0, 0.5]);
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(dplrf_spectral_new(&cfg, &mut h), DplrfStatus::Ok);
        assert_eq!(dplrf_spectral_update_batch(h, i.as_ptr(), j.as_ptr(), s.as_ptr(), s.len()), DplrfStatus::Ok);
        let mut f = ptr::null_mut();
        assert_eq!(dplrf_spectral_finalize(h, &mut f), DplrfStatus::Ok);
        let (u, sigma, v, rank) = read(f);
        assert_eq!(rank, 3);

        let config = LrfConfig::new(16, 16, 3).with_seed(9).with_sketch_sizes(Some(6), Some(16));
        let mut st = SpectralState::init(&config).unwrap();
        for x in 0..4 {
            st.update(TurnstileUpdate::new(i[x], j[x], s[x])).unwrap();
        }
        let expect = st.finalize().unwrap();
        assert_eq!(sigma, expect.sigma);
        for r in 0..16 {
            for c in 0..3 {
                assert_eq!(u[r * 3 + c], expect.u[(r, c)]);
                assert_eq!(v[r * 3 + c], expect.v[(r, c)]);
            }
        }
        dplrf_factorization_free(f);
        dplrf_spectral_free(h);
    }
}

#[test]
fn merge_equals_single_pass() {
    let mut cfg = dplrf_config_default(8, 12, 2);
    cfg.t = 4;
    cfg.v = 8;
    cfg.epsilon = 1.0;
    let (i, j, s) = diag_updates(&[3.0, -2.0, 1.5, 1.0, 0.25]);
    unsafe {
        let (mut a, mut b, mut whole) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        for h in [&mut a, &mut b, &mut whole] {
            assert_eq!(dplrf_lowspace_new(&cfg, h), DplrfStatus::Ok);
        }
        assert_eq!(dplrf_lowspace_update_batch(a, i.as_ptr(), j.as_ptr(), s.as_ptr(), 2), DplrfStatus::Ok);
        assert_eq!(
            dplrf_lowspace_update_batch(b, i[2..].as_ptr(), j[2..].as_ptr(), s[2..].as_ptr(), 3),
            DplrfStatus::Ok
        );
        assert_eq!(dplrf_lowspace_update_batch(whole, i.as_ptr(), j.as_ptr(), s.as_ptr(), 5), DplrfStatus::Ok);
        assert_eq!(dplrf_lowspace_merge(a, b), DplrfStatus::Ok);
        let (mut f1, mut f2) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(dplrf_lowspace_finalize(a, false, &mut f1), DplrfStatus::Ok);
        assert_eq!(dplrf_lowspace_finalize(whole, false, &mut f2), DplrfStatus::Ok);
        assert_eq!(read(f1), read(f2));

        let mut r = ptr::null_mut();
        assert_eq!(dplrf_lowspace_finalize(a, true, &mut r), DplrfStatus::Ok);
        let (mut rows, mut cols) = (0, 0);
        assert_eq!(dplrf_factorization_shape(r, &mut rows, &mut cols, ptr::null_mut(), ptr::null_mut()), DplrfStatus::Ok);
        assert_eq!((rows, cols), (8, 12));

        for f in [f1, f2, r] {
            dplrf_factorization_free(f);
        }
        for h in [a, b, whole] {
            dplrf_lowspace_free(h);
        }
    }
}

#[test]
fn continual_tree_steps_and_queries() {
    let mut cfg = dplrf_config_default(8, 8, 2);
    cfg.t = 4;
    cfg.v = 8;
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(dplrf_continual_new(&cfg, DplrfAlgorithm::Spectral, 4, &mut h), DplrfStatus::Ok);
        let mut levels = Vec::new();
        for e in 0..4usize {
            let (i, j, s) = ([e], [e], [4.0 - e as f64]);
            let mut level = 99;
            assert_eq!(dplrf_continual_step(h, i.as_ptr(), j.as_ptr(), s.as_ptr(), 1, &mut level), DplrfStatus::Ok);
            levels.push(level);
        }
        assert_eq!(levels, [0, 1, 0, 2]);
        let mut epoch = 0;
        assert_eq!(dplrf_continual_epoch(h, &mut epoch), DplrfStatus::Ok);
        assert_eq!(epoch, 4);
        let mut f = ptr::null_mut();
        assert_eq!(dplrf_continual_query(h, &mut f), DplrfStatus::Ok);
        let (_, sigma, _, _) = read(f);
        assert!((sigma[0] - 4.0).abs() < 1e-9 && (sigma[1] - 3.0).abs() < 1e-9, "{sigma:?}");
        dplrf_factorization_free(f);

        let one = [0usize];
        let val = [1.0];
        assert_eq!(
            dplrf_continual_step(h, one.as_ptr(), one.as_ptr(), val.as_ptr(), 1, ptr::null_mut()),
            DplrfStatus::HorizonExceeded
        );
        dplrf_continual_free(h);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut cfg = dplrf_config_default(4, 4, 9);
        let mut h = ptr::null_mut();
        assert_eq!(dplrf_spectral_new(&cfg, &mut h), DplrfStatus::InvalidArgument);
        assert!(h.is_null());
        assert!(last_error().contains("rank"));

        cfg.k = 1;
        cfg.epsilon = -1.0;
        assert_eq!(dplrf_spectral_new(&cfg, &mut h), DplrfStatus::InvalidArgument);

        cfg.epsilon = f64::INFINITY;
        assert_eq!(dplrf_spectral_new(ptr::null(), &mut h), DplrfStatus::NullPointer);
        assert_eq!(dplrf_spectral_new(&cfg, ptr::null_mut()), DplrfStatus::NullPointer);
        assert_eq!(dplrf_spectral_new(&cfg, &mut h), DplrfStatus::Ok);
        assert!(dplrf_last_error().is_null());

        assert_eq!(dplrf_spectral_update(h, 4, 0, 1.0), DplrfStatus::IndexOutOfRange);
        assert_eq!(dplrf_spectral_update(h, 0, 0, f64::NAN), DplrfStatus::InvalidInput);

        let mut f = ptr::null_mut();
        assert_eq!(dplrf_spectral_finalize(h, &mut f), DplrfStatus::EmptyBasis);

        assert_eq!(dplrf_spectral_update(h, 1, 1, 2.0), DplrfStatus::Ok);
        assert_eq!(dplrf_spectral_finalize(h, &mut f), DplrfStatus::Ok);
        let mut small = [0.0; 2];
        assert_eq!(dplrf_factorization_u(f, small.as_mut_ptr(), 2), DplrfStatus::BufferTooSmall);

        let mut other_cfg = cfg;
        other_cfg.seed = 1;
        let mut other = ptr::null_mut();
        assert_eq!(dplrf_spectral_new(&other_cfg, &mut other), DplrfStatus::Ok);
        assert_eq!(dplrf_spectral_merge(h, other), DplrfStatus::ConfigMismatch);

        dplrf_factorization_free(f);
        dplrf_spectral_free(other);
        dplrf_spectral_free(h);
        dplrf_spectral_free(ptr::null_mut());
    }
}
