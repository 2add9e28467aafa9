use mbss::cem::{e_step, fit, hard_assign, initialize, predict, CemConfig};
use mbss::dataset::{select_rows, ApiVocabulary, Dataset};
use mbss::gmm::{complete_log_likelihood, log_responsibilities, CovarianceFamily};
use mbss::model_select::select_model;
use mbss::synth::{sample_mixture, SynthSpec};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn family(i: usize) -> CovarianceFamily {
    CovarianceFamily::ALL[i % 6]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn complete_loglik_never_decreases(
        seed in 0u64..10_000,
        fam in 0usize..6,
        d in 1usize..5,
        sep in 0.5f64..4.0,
    ) {
        let data = sample_mixture(&SynthSpec::two_spherical(d, sep, 120, 0.2, seed)).unwrap().dataset;
        let config = CemConfig::with_family(family(fam));
        let init = initialize(&data, &config).unwrap();
        let z0 = hard_assign(&e_step(&init, data.unlabeled()).unwrap());
        let mut trace = vec![complete_log_likelihood(&init, &data, &z0).unwrap()];
        trace.extend(fit(&data, &config).unwrap().loglik_trace());
        for w in trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-8, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn responsibilities_sum_to_one(seed in 0u64..10_000, fam in 0usize..6) {
        let s = sample_mixture(&SynthSpec::two_correlated(3, 2.0, 0.4, 150, 0.3, seed)).unwrap();
        let r = fit(&s.dataset, &CemConfig::with_family(family(fam))).unwrap();
        let lr = log_responsibilities(&r.model, s.dataset.unlabeled()).unwrap();
        for j in 0..lr.nrows() {
            let total: f64 = lr.row(j).iter().map(|v| v.exp()).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            let p: f64 = r.posteriors.row(j).sum();
            prop_assert!((p - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn fits_are_deterministic() {
    let s = sample_mixture(&SynthSpec::two_spherical(4, 2.0, 400, 0.1, 17)).unwrap();
    let a = select_model(&s.dataset, &CovarianceFamily::ALL, &CemConfig::default()).unwrap();
    let b = select_model(&s.dataset, &CovarianceFamily::ALL, &CemConfig::default()).unwrap();
    assert_eq!(a, b);
    let again = sample_mixture(&SynthSpec::two_spherical(4, 2.0, 400, 0.1, 17)).unwrap();
    assert_eq!(s, again);
}

#[test]
fn unlabeled_row_order_does_not_matter() {
    let s = sample_mixture(&SynthSpec::two_spherical(3, 3.0, 300, 0.2, 4)).unwrap();
    let m = s.dataset.m();
    let mut perm: Vec<usize> = (0..m).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    let shuffled = s
        .dataset
        .with_blocks(
            s.dataset.labeled().clone(),
            s.dataset.labels().to_vec(),
            select_rows(s.dataset.unlabeled(), &perm),
        )
        .unwrap();
    for fam in CovarianceFamily::ALL {
        let config = CemConfig::with_family(fam);
        let a = fit(&s.dataset, &config).unwrap();
        let b = fit(&shuffled, &config).unwrap();
        for (j, &p) in perm.iter().enumerate() {
            assert_eq!(b.hard_labels[j], a.hard_labels[p], "{fam}");
        }
        for (ca, cb) in a.model.components().iter().zip(b.model.components()) {
            assert!((ca.mean() - cb.mean()).amax() < 1e-10);
            assert!((ca.covariance() - cb.covariance()).amax() < 1e-10);
        }
        assert!((a.complete_loglik - b.complete_loglik).abs() < 1e-8);
    }
}

#[test]
fn full_covariance_fits_are_rotation_invariant() {
    let s = sample_mixture(&SynthSpec::two_correlated(3, 2.5, 0.3, 300, 0.2, 8)).unwrap();
    let (c, si) = (0.6f64, 0.8f64);
    // orthogonal: rotation in the (0, 1) plane
    let q = DMatrix::from_row_slice(3, 3, &[c, -si, 0.0, si, c, 0.0, 0.0, 0.0, 1.0]);
    let rotate = |x: &DMatrix<f64>| x * q.transpose();
    let rotated = Dataset::new(
        rotate(s.dataset.labeled()),
        s.dataset.labels().to_vec(),
        rotate(s.dataset.unlabeled()),
        ApiVocabulary::generic(3).unwrap(),
        2,
    )
    .unwrap();
    for fam in [CovarianceFamily::EEE, CovarianceFamily::VVV] {
        let config = CemConfig::with_family(fam);
        let a = fit(&s.dataset, &config).unwrap();
        let b = fit(&rotated, &config).unwrap();
        assert_eq!(a.hard_labels, b.hard_labels, "{fam}");
        for (ca, cb) in a.model.components().iter().zip(b.model.components()) {
            let expected: DVector<f64> = &q * ca.mean();
            assert!((expected - cb.mean()).amax() < 1e-8);
        }
        assert!((a.complete_loglik - b.complete_loglik).abs() < 1e-6);
    }
}

#[test]
fn predictions_reproduce_fit_labels() {
    let s = sample_mixture(&SynthSpec::two_spherical(2, 2.0, 200, 0.25, 3)).unwrap();
    let r = fit(&s.dataset, &CemConfig::default()).unwrap();
    let (labels, post) = predict(&r.model, s.dataset.unlabeled()).unwrap();
    assert_eq!(labels, r.hard_labels);
    assert_eq!(post, r.posteriors);
}
