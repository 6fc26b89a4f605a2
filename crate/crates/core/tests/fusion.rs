use mmrec_core::fusion::*;
use mmrec_core::kernels::{argmax, ProbVector};
use mmrec_core::Tensor;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::check_golden;

fn random_probs(k: usize, rng: &mut impl Rng) -> ProbVector<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0)).collect();
    ProbVector::from_scores(raw).unwrap()
}

fn fv(v: Vec<f64>) -> FeatureVector<f64> {
    FeatureVector::new(v, FeatureSource::Fused).unwrap()
}

#[test]
fn alpha_fuse_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let k = rng.random_range(2..=10);
        let (p, q) = (random_probs(k, &mut rng), random_probs(k, &mut rng));
        assert_eq!(alpha_fuse(&p, &q, FusionConfig::new(1.0).unwrap()).unwrap().as_slice(), p.as_slice());
        assert_eq!(alpha_fuse(&p, &q, FusionConfig::new(0.0).unwrap()).unwrap().as_slice(), q.as_slice());
        let alpha = rng.random_range(0.0..=1.0);
        let f = alpha_fuse(&p, &q, FusionConfig::new(alpha).unwrap()).unwrap();
        assert!((f.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for ((&x, &a), &b) in f.as_slice().iter().zip(p.as_slice()).zip(q.as_slice()) {
            assert!(x >= a.min(b) - 1e-15 && x <= a.max(b) + 1e-15);
        }
    }
}

#[test]
fn verification_table() {
    let cases = [
        ((true, true), FusionOutcome::Yield),
        ((true, false), FusionOutcome::NoYield),
        ((false, true), FusionOutcome::HumanReview),
        ((false, false), FusionOutcome::NoPedestrian),
    ];
    for ((img, voice), want) in cases {
        let d = decision_fusion(img, voice);
        assert_eq!(d.outcome, want);
        assert_eq!((d.image_detected, d.voice_detected), (img, voice));
    }
    assert!(detected(0.5, 0.5));
    assert!(!detected(0.4999, 0.5));
}

proptest! {
    #[test]
    fn softmax_classify_follows_logit_argmax(
        s in prop::collection::vec(-3.0f64..3.0, 4),
        w in prop::collection::vec(-3.0f64..3.0, 20),
        shift in prop::collection::vec(-3.0f64..3.0, 4),
    ) {
        let weights = Tensor::from_vec(vec![5, 4], w.clone()).unwrap();
        let logits: Vec<f64> = w.chunks(4).map(|c| c.iter().zip(&s).map(|(a, b)| a * b).sum()).collect();
        let (probs, class) = softmax_classify(&fv(s.clone()), &weights).unwrap();
        let mut sorted = logits.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).all(|p| p[1] - p[0] > 1e-9) {
            prop_assert_eq!(class, argmax(&logits));
        }
        let shifted: Vec<f64> = w.chunks(4).flat_map(|c| c.iter().zip(&shift).map(|(a, b)| a + b).collect::<Vec<_>>()).collect();
        let (p2, _) = softmax_classify(&fv(s), &Tensor::from_vec(vec![5, 4], shifted).unwrap()).unwrap();
        for (a, b) in probs.as_slice().iter().zip(p2.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

/// Gaussian-ish blobs around distinct centers in `dim` dimensions.
fn blobs(k: usize, per_class: usize, dim: usize, spread: f64, seed: u64) -> (Vec<FeatureVector<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..k).map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect()).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            xs.push(fv(center.iter().map(|m| m + rng.random_range(-spread..spread)).collect()));
            ys.push(c);
        }
    }
    (xs, ys)
}

fn quick_cfg(seed: u64) -> SvmConfig {
    SvmConfig {
        epochs: 200,
        seed,
        ..SvmConfig::default()
    }
}

#[test]
fn pair_count_matches_class_count() {
    for k in 2..=10 {
        let (xs, ys) = blobs(k, 3, 3, 0.5, k as u64);
        let m = svm_fuse_train(&xs, &ys, k, &quick_cfg(1)).unwrap();
        assert_eq!(m.pairs.len(), k * (k - 1) / 2);
        assert_eq!(pair_count(k), m.pairs.len());
    }
}

#[test]
fn seven_classes_give_21_classifiers() {
    let (xs, ys) = blobs(7, 4, 5, 0.5, 7);
    let m = svm_fuse_train(&xs, &ys, 7, &quick_cfg(2)).unwrap();
    assert_eq!(m.pairs.len(), 21);
}

/// Exhaustive search over directions (0.1 degree grid) for a line that
/// separates `a` from `b` with gap at least `margin`.
fn separable_by_search(a: &[[f64; 2]], b: &[[f64; 2]], margin: f64) -> bool {
    (0..3600).any(|step| {
        let t = step as f64 * std::f64::consts::PI / 1800.0;
        let (u0, u1) = (t.cos(), t.sin());
        let proj = |p: &[f64; 2]| p[0] * u0 + p[1] * u1;
        let min_a = a.iter().map(proj).fold(f64::INFINITY, f64::min);
        let max_b = b.iter().map(proj).fold(f64::NEG_INFINITY, f64::max);
        min_a - max_b >= 2.0 * margin
    })
}

#[test]
fn separable_toy_is_fit_perfectly() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a: Vec<[f64; 2]> = (0..20).map(|_| [rng.random_range(1.5..4.0), rng.random_range(1.5..4.0)]).collect();
    let b: Vec<[f64; 2]> = (0..20).map(|_| [rng.random_range(-4.0..-1.5), rng.random_range(-4.0..-1.5)]).collect();
    assert!(separable_by_search(&a, &b, 1.0));
    let xs: Vec<_> = a.iter().chain(&b).map(|p| fv(p.to_vec())).collect();
    let ys: Vec<usize> = (0..40).map(|n| usize::from(n >= 20)).collect();
    let m = svm_fuse_train(&xs, &ys, 2, &SvmConfig::default()).unwrap();
    assert_eq!(m.accuracy(&xs, &ys).unwrap(), 1.0);
    // Two classes: the fused vector is the single calibrated probability and its complement.
    for x in &xs {
        let p = svm_fuse_predict(&m, x).unwrap();
        let q = m.pairwise_probs(x).unwrap()[0];
        assert!((p.get(0) - q).abs() < 1e-15 && (p.get(1) - (1.0 - q)).abs() < 1e-15);
    }
}

#[test]
fn separable_multiclass_blobs_are_fit_perfectly() {
    let (xs, ys) = blobs(7, 6, 8, 0.3, 21);
    let m = svm_fuse_train(&xs, &ys, 7, &SvmConfig { seed: 3, ..SvmConfig::default() }).unwrap();
    assert_eq!(m.accuracy(&xs, &ys).unwrap(), 1.0);
    assert!(m.pairs.iter().all(|p| p.calibration.a < 0.0));
}

#[test]
fn predictions_are_valid_probabilities() {
    let (xs, ys) = blobs(7, 5, 6, 2.0, 4);
    let m = svm_fuse_train(&xs, &ys, 7, &quick_cfg(5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..500 {
        let x = fv((0..6).map(|_| rng.random_range(-50.0..50.0)).collect());
        let p = svm_fuse_predict(&m, &x).unwrap();
        assert_eq!(p.len(), 7);
        assert!((p.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.as_slice().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }
    assert!(svm_fuse_predict(&m, &fv(vec![0.0; 5])).is_err());
}

#[test]
fn training_input_validation() {
    let (xs, mut ys) = blobs(3, 2, 2, 0.5, 1);
    ys[0] = 1;
    assert!(svm_fuse_train(&xs, &ys, 3, &quick_cfg(0)).is_err());
    assert!(svm_fuse_train(&xs[..3], &ys[..2], 3, &quick_cfg(0)).is_err());
}

#[test]
fn model_json_round_trip_and_determinism() {
    let (xs, ys) = blobs(4, 4, 3, 1.0, 8);
    let mut m = svm_fuse_train(&xs, &ys, 4, &quick_cfg(11)).unwrap();
    m.config_hash = Some("abc123".into());
    let text = serde_json::to_string(&m).unwrap();
    let back: SvmFusionModel<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, m);
    let again = svm_fuse_train(&xs, &ys, 4, &quick_cfg(11)).unwrap();
    assert_eq!(again.pairs, m.pairs);
}

#[test]
fn svm_golden() {
    let (xs, ys) = blobs(7, 5, 6, 1.5, 2024);
    let m = svm_fuse_train(&xs, &ys, 7, &SvmConfig { seed: 2024, ..SvmConfig::default() }).unwrap();
    let fixture = fv(vec![0.5, -1.0, 2.0, 0.0, 1.5, -0.5]);
    check_golden("svm_probs.json", svm_fuse_predict(&m, &fixture).unwrap().as_slice(), 1e-9);
}
