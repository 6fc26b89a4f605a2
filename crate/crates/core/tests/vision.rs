mod common;

use common::{check_golden, naive_conv, random_tensor};
use mmrec_core::kernels::{grad_check, ActivationKind, ConvSpec, Parameterized};
use mmrec_core::vision::*;
use mmrec_core::{Result, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn conv2d(kernel: Tensor<f64>) -> ConvSpec<f64> {
    ConvSpec::simple(kernel, ActivationKind::Identity).unwrap()
}

/// Nonzero positions of the block's response to a centered impulse.
fn impulse_support(block: &FactorizedBlock<f64>, h: usize, w: usize) -> (usize, usize) {
    let mut x = Tensor::zeros(&[1, h, w]);
    x.data_mut()[(h / 2) * w + w / 2] = 1.0;
    let y = factorized_forward(block, &x).unwrap();
    let (oh, ow) = (y.shape()[1], y.shape()[2]);
    let (mut rows, mut cols) = (Vec::new(), Vec::new());
    for i in 0..oh {
        for j in 0..ow {
            if y.data()[i * ow + j] != 0.0 {
                rows.push(i);
                cols.push(j);
            }
        }
    }
    let span = |v: &[usize]| v.iter().max().unwrap() - v.iter().min().unwrap() + 1;
    assert_eq!(rows.len(), span(&rows) * span(&cols), "support should be a full rectangle");
    (span(&rows), span(&cols))
}

#[test]
fn two_threes_have_five_by_five_impulse_support() {
    let ones = || conv2d(Tensor::full(&[1, 1, 3, 3], 1.0));
    let block = FactorizedBlock::new(FactorizationMode::FiveAsTwoThrees, [ones(), ones()]).unwrap();
    let single = conv2d(Tensor::full(&[1, 1, 5, 5], 1.0));
    // Outputs larger than 5x5, so the support is not just the output extent.
    for size in [11, 13, 15, 17] {
        assert_eq!(impulse_support(&block, size, size), (5, 5), "size {size}");
        let mut x = Tensor::zeros(&[1, size, size]);
        x.data_mut()[(size / 2) * size + size / 2] = 1.0;
        let direct = naive_conv(&x, &single);
        let nz = direct.iter().filter(|&&v| v != 0.0).count();
        assert_eq!(nz, 25);
    }
}

#[test]
fn asymmetric_pair_reproduces_separable_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [2, 3, 5] {
        let u = random_tensor(&[n], &mut rng);
        let v = random_tensor(&[n], &mut rng);
        let row = conv2d(Tensor::from_vec(vec![1, 1, 1, n], v.data().to_vec()).unwrap());
        let col = conv2d(Tensor::from_vec(vec![1, 1, n, 1], u.data().to_vec()).unwrap());
        let block = FactorizedBlock::new(FactorizationMode::AsymmetricPair(n), [row, col]).unwrap();
        let full: Vec<f64> = (0..n * n).map(|i| u.data()[i / n] * v.data()[i % n]).collect();
        let full = conv2d(Tensor::from_vec(vec![1, 1, n, n], full).unwrap());
        let x = random_tensor(&[1, 9, 8], &mut rng);
        let got = factorized_forward(&block, &x).unwrap();
        let want = naive_conv(&x, &full);
        assert_eq!(got.len(), want.len());
        for (a, b) in got.data().iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}

#[test]
fn factorized_counts_save_work() {
    assert!(multiply_count(5, 5, true) < multiply_count(5, 5, false));
    assert_eq!(multiply_count(5, 5, true), 18);
    assert_eq!((multiply_count(7, 7, true), multiply_count(7, 7, false)), (14, 49));
}

fn tiny_config() -> VisionConfig {
    VisionConfig {
        channels: 2,
        height: 5,
        width: 6,
        conv1_channels: 2,
        conv2_channels: 2,
        fc6: 5,
        fc7: 4,
        classes: 3,
        aux_weight: 0.3,
    }
}

fn fixture_clip(cfg: &VisionConfig, seed: u64) -> RgbClip<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = random_tensor(&[16, cfg.channels, cfg.height, cfg.width], &mut rng).map(|v| 0.5 + 0.5 * v);
    RgbClip::new(t).unwrap()
}

#[test]
fn whole_network_gradient_check() {
    let cfg = tiny_config();
    let net = VisionNet::<f64>::init(cfg.clone(), 8).unwrap();
    // Shift biases so few ReLU units sit near their kink.
    let mut net = net;
    net.conv1.bias.iter_mut().for_each(|b| *b = 0.05);
    net.conv2.bias.iter_mut().for_each(|b| *b = 0.05);
    let clip = fixture_clip(&cfg, 9);
    let loss = |flat: &Tensor<f64>| -> Result<(f64, Tensor<f64>)> {
        let mut n = net.clone();
        n.load_flat(flat.data())?;
        let (l, g) = n.loss_and_grads(&clip, 1)?;
        Ok((l, g.flatten()))
    };
    let err = grad_check(loss, &net.flatten(), 1e-6).unwrap();
    assert!(err < 1e-5, "{err}");
}

#[test]
fn seeded_net_matches_golden_probabilities() {
    let cfg = VisionConfig::default();
    let net = VisionNet::<f64>::init(cfg.clone(), 2024).unwrap();
    let clip = fixture_clip(&cfg, 77);
    let f = rgb_clip_features(&clip, &net).unwrap();
    check_golden("vision_probs.json", f.probs.as_slice(), 1e-12);
}

#[test]
fn clip_probabilities_are_valid_for_random_clips() {
    let cfg = VisionConfig::default();
    let net = VisionNet::<f64>::init(cfg.clone(), 3).unwrap();
    for seed in 0..10 {
        let f = rgb_clip_features(&fixture_clip(&cfg, seed), &net).unwrap();
        let s: f64 = f.probs.as_slice().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(f.probs.as_slice().iter().all(|&p| p >= 0.0));
    }
}

#[test]
fn video_features_average_clips() {
    let cfg = VisionConfig::default();
    let net = VisionNet::<f64>::init(cfg.clone(), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let video = random_tensor(&[20, 3, 8, 8], &mut rng).map(|v| v.abs());
    let vf = net.video_features(&video, 2).unwrap();
    let clips = video_to_clips(&video).unwrap();
    let picked: Vec<_> = [0, 2, 4].iter().map(|&i| rgb_clip_features(&clips[i], &net).unwrap().probs).collect();
    let mean = mmrec_core::ProbVector::mean(&picked).unwrap();
    for (a, b) in vf.probs.as_slice().iter().zip(mean.as_slice()) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(vf.fc7.len(), cfg.fc7);
}
