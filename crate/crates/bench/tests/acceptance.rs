//! Acceptance suite: one pass/fail line per criterion.
//!
//! Run with `cargo test -p mmrec-bench --test acceptance`. The lines go to
//! stderr unconditionally; the test fails if any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod oracles;
mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use mmrec_bench::cache::ProbabilityCache;
use mmrec_bench::cli;
use mmrec_bench::report::{ExperimentResult, METHODS, METHOD_FUSED_SVM, METHOD_RGB, METHOD_SKELETON};
use mmrec_core::audio::{dft_energy, hz_to_mel};
use mmrec_core::fusion::*;
use mmrec_core::kernels::*;
use mmrec_core::vision::{factorized_forward, multiply_count, FactorizationMode, FactorizedBlock};
use mmrec_core::{ProbVector, Tensor};
use oracles::{naive_conv, naive_dft_energy, random_conv_case, random_tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type LossFn<'a> = &'a dyn Fn(&Tensor<f64>) -> mmrec_core::Result<(f64, Tensor<f64>)>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn kernel_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);
    let mut worst = 0.0f64;
    let cases = 250;
    for case in 0..cases {
        let (x, spec) = random_conv_case(&mut rng);
        let got = conv_forward(&x, &spec).map_err(|e| e.to_string())?;
        let want = naive_conv(&x, &spec);
        ensure(got.len() == want.len(), || format!("case {case}: length mismatch"))?;
        for (a, b) in got.data().iter().zip(&want) {
            worst = worst.max((a - b).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-10, || format!("max abs error {worst:e}"))?;
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{cases} cases, max abs error {worst:.1e}, {:.2}s", elapsed.as_secs_f64()))
}

fn weighted_sum(values: &[f64], weights: &[f64]) -> f64 {
    values.iter().zip(weights).map(|(a, b)| a * b).sum()
}

fn gradient_suite() -> Outcome {
    const EPS: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let mut errs: Vec<(&str, f64)> = Vec::new();
    let check = |f: LossFn, at: &Tensor<f64>| {
        grad_check(f, at, EPS).map_err(|e| e.to_string())
    };

    let mut conv = 0.0f64;
    for _ in 0..10 {
        let (x, spec) = random_conv_case(&mut rng);
        let shape = spec.output_shape(x.shape()).map_err(|e| e.to_string())?;
        let r = random_tensor(&shape, &mut rng);
        let f = |k: &Tensor<f64>| {
            let s = ConvSpec { kernel: k.clone(), ..spec.clone() };
            let y = conv_forward(&x, &s)?;
            let g = conv_backward(&x, &s, &y, &r)?;
            Ok((weighted_sum(y.data(), r.data()), g.kernel))
        };
        conv = conv.max(check(&f, &spec.kernel)?);
        let f = |xi: &Tensor<f64>| {
            let y = conv_forward(xi, &spec)?;
            let g = conv_backward(xi, &spec, &y, &r)?;
            Ok((weighted_sum(y.data(), r.data()), g.input))
        };
        conv = conv.max(check(&f, &x)?);
    }
    errs.push(("conv", conv));

    let mut dense = 0.0f64;
    for act in [ActivationKind::Identity, ActivationKind::Tanh, ActivationKind::Sigmoid] {
        let layer = Dense::<f64>::init(5, 4, act, &mut rng);
        let x = random_tensor(&[5], &mut rng);
        let r = random_tensor(&[4], &mut rng);
        let f = |w: &Tensor<f64>| {
            let l = Dense { weights: w.clone(), ..layer.clone() };
            let y = l.forward(x.data())?;
            let mut g = DenseGrads::zeros_like(&l);
            l.backward(x.data(), &y, r.data(), &mut g);
            Ok((weighted_sum(&y, r.data()), g.weights))
        };
        dense = dense.max(check(&f, &layer.weights)?);
        let f = |xi: &Tensor<f64>| {
            let y = layer.forward(xi.data())?;
            let mut g = DenseGrads::zeros_like(&layer);
            let dx = layer.backward(xi.data(), &y, r.data(), &mut g);
            Ok((weighted_sum(&y, r.data()), Tensor::vector(dx)))
        };
        dense = dense.max(check(&f, &x)?);
    }
    errs.push(("dense", dense));

    let mut p = LstmParams::<f64>::init(3, 4, &mut rng);
    p.bias = random_tensor(&[16], &mut rng);
    let x = random_tensor(&[3], &mut rng);
    let h0 = random_tensor(&[4], &mut rng);
    let c0 = random_tensor(&[4], &mut rng);
    let (rh, rc) = (random_tensor(&[4], &mut rng), random_tensor(&[4], &mut rng));
    let step = |q: &LstmParams<f64>, x: &[f64], h: &[f64], c: &[f64]| {
        let cache = q.forward_cached(x, h, c)?;
        let loss = weighted_sum(&cache.h, rh.data()) + weighted_sum(&cache.c, rc.data());
        let mut g = LstmGrads::zeros_like(q);
        let back = q.backward(&cache, rh.data(), rc.data(), &mut g);
        Ok::<_, mmrec_core::Error>((loss, g, back))
    };
    let mut lstm = 0.0f64;
    let f = |w: &Tensor<f64>| {
        let (l, g, _) = step(&LstmParams { w_x: w.clone(), ..p.clone() }, x.data(), h0.data(), c0.data())?;
        Ok((l, g.w_x))
    };
    lstm = lstm.max(check(&f, &p.w_x)?);
    let f = |w: &Tensor<f64>| {
        let (l, g, _) = step(&LstmParams { w_h: w.clone(), ..p.clone() }, x.data(), h0.data(), c0.data())?;
        Ok((l, g.w_h))
    };
    lstm = lstm.max(check(&f, &p.w_h)?);
    let f = |b: &Tensor<f64>| {
        let (l, g, _) = step(&LstmParams { bias: b.clone(), ..p.clone() }, x.data(), h0.data(), c0.data())?;
        Ok((l, g.bias))
    };
    lstm = lstm.max(check(&f, &p.bias)?);
    let f = |xt: &Tensor<f64>| {
        let (l, _, (dx, _, _)) = step(&p, xt.data(), h0.data(), c0.data())?;
        Ok((l, Tensor::vector(dx)))
    };
    lstm = lstm.max(check(&f, &x)?);
    let f = |ht: &Tensor<f64>| {
        let (l, _, (_, dh, _)) = step(&p, x.data(), ht.data(), c0.data())?;
        Ok((l, Tensor::vector(dh)))
    };
    lstm = lstm.max(check(&f, &h0)?);
    let f = |ct: &Tensor<f64>| {
        let (l, _, (_, _, dc)) = step(&p, x.data(), h0.data(), ct.data())?;
        Ok((l, Tensor::vector(dc)))
    };
    lstm = lstm.max(check(&f, &c0)?);
    errs.push(("lstm step", lstm));

    let mut ce = 0.0f64;
    for label in 0..5 {
        let z = random_tensor(&[5], &mut rng).scale(3.0);
        let f = |zt: &Tensor<f64>| {
            let (l, g) = cross_entropy_with_grad(&softmax(zt)?, label);
            Ok((l, Tensor::vector(g)))
        };
        ce = ce.max(check(&f, &z)?);
    }
    errs.push(("softmax+ce", ce));

    let w = random_tensor(&[3, 4], &mut rng);
    let lambda = 0.37;
    let f = |wt: &Tensor<f64>| Ok((lambda * l2_penalty(wt), wt.scale(2.0 * lambda)));
    errs.push(("l2", check(&f, &w)?));

    let failed: Vec<String> = errs.iter().filter(|(_, e)| e.is_nan() || *e >= 1e-5).map(|(n, e)| format!("{n} {e:.1e}")).collect();
    ensure(failed.is_empty(), || format!("max relative error too large: {}", failed.join(", ")))?;
    Ok(errs.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect::<Vec<_>>().join(", "))
}

fn audio_math() -> Outcome {
    let mel = hz_to_mel(1000.0_f64).map_err(|e| e.to_string())?;
    ensure((mel - 999.99).abs() <= 0.01, || format!("hz_to_mel(1000) = {mel}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    let mut dft_err = 0.0f64;
    for n in 1..=64 {
        for _ in 0..3 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let got = dft_energy(&x).map_err(|e| e.to_string())?;
            let want = naive_dft_energy(&x);
            let peak = want.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            for (a, b) in got.iter().zip(&want) {
                dft_err = dft_err.max((a - b).abs() / peak);
            }
        }
    }
    ensure(dft_err <= 1e-9, || format!("dft relative error {dft_err:e}"))?;

    let mut parseval = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=400);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let spectral: f64 = dft_energy(&x).map_err(|e| e.to_string())?.iter().sum();
        let temporal = n as f64 * x.iter().map(|v| v * v).sum::<f64>();
        parseval = parseval.max((spectral - temporal).abs() / temporal);
    }
    ensure(parseval <= 1e-9, || format!("parseval relative error {parseval:e}"))?;
    Ok(format!("mel(1000) = {mel:.4}, dft err {dft_err:.1e}, parseval err {parseval:.1e}"))
}

fn impulse_support(block: &FactorizedBlock<f64>, size: usize) -> Result<(usize, usize), String> {
    let mut x = Tensor::zeros(&[1, size, size]);
    x.data_mut()[(size / 2) * size + size / 2] = 1.0;
    let y = factorized_forward(block, &x).map_err(|e| e.to_string())?;
    let (h, w) = (y.shape()[1], y.shape()[2]);
    let nz: Vec<(usize, usize)> = (0..h * w).filter(|&i| y.data()[i] != 0.0).map(|i| (i / w, i % w)).collect();
    let rows = nz.iter().map(|p| p.0).max().unwrap_or(0) - nz.iter().map(|p| p.0).min().unwrap_or(0) + 1;
    let cols = nz.iter().map(|p| p.1).max().unwrap_or(0) - nz.iter().map(|p| p.1).min().unwrap_or(0) + 1;
    ensure(nz.len() == rows * cols, || "support is not a full rectangle".into())?;
    Ok((rows, cols))
}

fn factorization() -> Outcome {
    let ones = |k: usize| ConvSpec::simple(Tensor::full(&[1, 1, k, k], 1.0), ActivationKind::Identity).unwrap();
    let block = FactorizedBlock::new(FactorizationMode::FiveAsTwoThrees, [ones(3), ones(3)]).map_err(|e| e.to_string())?;
    let five = ones(5);
    // Valid padding: every output here is larger than 5x5, so the support is
    // measured rather than forced by the output extent.
    let sizes = [11, 13, 16, 21];
    for size in sizes {
        let support = impulse_support(&block, size)?;
        ensure(support == (5, 5), || format!("size {size}: support {support:?}"))?;
        let mut x = Tensor::zeros(&[1, size, size]);
        x.data_mut()[(size / 2) * size + size / 2] = 1.0;
        let direct = naive_conv(&x, &five).iter().filter(|&&v| v != 0.0).count();
        ensure(direct == 25, || format!("size {size}: direct 5x5 support {direct}"))?;
    }
    let (fact, full) = (multiply_count(5, 5, true), multiply_count(5, 5, false));
    ensure(fact == 18 && full == 25, || format!("multiply counts {fact} / {full}"))?;
    Ok(format!("5x5 support on sizes {sizes:?}, multiplies {fact} < {full}"))
}

fn random_probs(k: usize, rng: &mut impl Rng) -> ProbVector<f64> {
    ProbVector::from_scores((0..k).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap()
}

fn fusion_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC5);
    let (one, zero) = (FusionConfig::new(1.0).unwrap(), FusionConfig::new(0.0).unwrap());
    let bits = |p: &ProbVector<f64>| p.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    for n in 0..1000 {
        let k = rng.random_range(2..=10);
        let (p, q) = (random_probs(k, &mut rng), random_probs(k, &mut rng));
        let r = |e: mmrec_core::Error| e.to_string();
        ensure(bits(&alpha_fuse(&p, &q, one).map_err(r)?) == bits(&p), || format!("pair {n}: alpha=1"))?;
        ensure(bits(&alpha_fuse(&p, &q, zero).map_err(r)?) == bits(&q), || format!("pair {n}: alpha=0"))?;
        let alpha = rng.random_range(0.0..=1.0);
        let f = alpha_fuse(&p, &q, FusionConfig::new(alpha).unwrap()).map_err(r)?;
        // Re-validate through the checked constructor.
        ProbVector::new(f.into_vec()).map_err(r)?;
    }
    let table = [
        ((true, true), FusionOutcome::Yield),
        ((true, false), FusionOutcome::NoYield),
        ((false, true), FusionOutcome::HumanReview),
        ((false, false), FusionOutcome::NoPedestrian),
    ];
    for ((img, voice), want) in table {
        let got = decision_fusion(img, voice).outcome;
        ensure(got == want, || format!("({img}, {voice}) -> {got}, want {want}"))?;
    }
    Ok("1000 random pairs, endpoints bitwise, 4/4 decision rules".into())
}

fn fv(v: Vec<f64>) -> FeatureVector<f64> {
    FeatureVector::new(v, FeatureSource::Fused).unwrap()
}

fn svm() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC6);
    let r = |e: mmrec_core::Error| e.to_string();
    // Seven well-separated blobs.
    let centers: Vec<Vec<f64>> = (0..7).map(|c| (0..7).map(|d| if c == d { 6.0 } else { 0.0 }).collect()).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..6 {
            xs.push(fv(center.iter().map(|m| m + rng.random_range(-1.0..1.0)).collect()));
            ys.push(c);
        }
    }
    let model = svm_fuse_train(&xs, &ys, 7, &SvmConfig { seed: 6, ..SvmConfig::default() }).map_err(r)?;
    ensure(model.pairs.len() == 21, || format!("{} pairwise classifiers", model.pairs.len()))?;
    let acc = model.accuracy(&xs, &ys).map_err(r)?;
    ensure(acc == 1.0, || format!("training accuracy {acc}"))?;
    for _ in 0..500 {
        let x = fv((0..7).map(|_| rng.random_range(-40.0..40.0)).collect());
        let p = svm_fuse_predict(&model, &x).map_err(r)?;
        ensure(p.len() == 7, || "wrong class count".into())?;
        ProbVector::new(p.into_vec()).map_err(r)?;
    }
    Ok("21 pairs, training accuracy 100%, 500 valid predictions".into())
}

/// Runs gen-data, train, eval, sweep-alpha and report into `root`.
fn full_pipeline(root: &Path) -> Result<(ExperimentResult, ProbabilityCache, Duration), String> {
    let start = Instant::now();
    let s = |e: mmrec_bench::HarnessError| e.to_string();
    let (data, models) = (root.join("data"), root.join("models"));
    cli::gen_data(&data, Some(42), None, false, None).map_err(s)?;
    cli::train(&data, &models, None).map_err(s)?;
    cli::eval(&data, &models).map_err(s)?;
    let result = cli::sweep(&models, None).map_err(s)?;
    cli::report(Some(&models), None, "csv", Some(&root.join("report"))).map_err(s)?;
    cli::report(Some(&models), None, "md", Some(&root.join("report"))).map_err(s)?;
    let elapsed = start.elapsed();
    let cache: ProbabilityCache =
        serde_json::from_str(&std::fs::read_to_string(models.join(cli::CACHE_FILE)).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    Ok((result, cache, elapsed))
}

/// Fused accuracy recomputed from the cached probabilities by hand.
fn oracle_fused_accuracy(cache: &ProbabilityCache, alpha: f64) -> f64 {
    let hits = (0..cache.len())
        .filter(|&i| {
            let fused: Vec<f64> = cache.rgb[i]
                .as_slice()
                .iter()
                .zip(cache.skeleton[i].as_slice())
                .map(|(p, q)| alpha * p + (1.0 - alpha) * q)
                .collect();
            let best = (0..fused.len()).fold(0, |b, c| if fused[c] > fused[b] { c } else { b });
            best == cache.labels[i]
        })
        .count();
    100.0 * hits as f64 / cache.len() as f64
}

fn experiment_shape() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (result, cache, t1) = full_pipeline(a.path())?;
    let (_, _, t2) = full_pipeline(b.path())?;
    let limit = Duration::from_secs(600);
    ensure(t1 < limit && t2 < limit, || format!("pipeline took {t1:?} / {t2:?}"))?;

    let differing = common::differing_files(a.path(), b.path());
    ensure(differing.is_empty(), || format!("runs differ in {differing:?}"))?;

    let rgb = result.accuracy(METHOD_RGB).unwrap_or(f64::NAN);
    let skel = result.accuracy(METHOD_SKELETON).unwrap_or(f64::NAN);
    let refused = result.accuracy(METHOD_FUSED_SVM).unwrap_or(f64::NAN);
    let first = result.curve.first().ok_or("empty alpha curve")?;
    let last = result.curve.last().ok_or("empty alpha curve")?;
    ensure(first.alpha == 0.0 && first.accuracy.to_bits() == skel.to_bits(), || {
        format!("alpha=0 point {} vs skeleton {skel}", first.accuracy)
    })?;
    ensure(last.alpha == 1.0 && last.accuracy.to_bits() == rgb.to_bits(), || {
        format!("alpha=1 point {} vs rgb {rgb}", last.accuracy)
    })?;
    for p in &result.curve {
        let want = oracle_fused_accuracy(&cache, p.alpha);
        ensure(p.accuracy == want, || format!("alpha {}: curve {} vs oracle {want}", p.alpha, p.accuracy))?;
    }
    let best = result.curve.iter().map(|p| p.accuracy).fold(f64::MIN, f64::max);
    let single = rgb.max(skel);
    ensure(best >= single, || format!("best fused {best} < best single {single}"))?;
    ensure(refused >= single - 2.0, || format!("fused+svm {refused} < best single {single} - 2"))?;

    let table = result.table_csv().map_err(|e| e.to_string())?;
    common::check_golden_text("table.csv", &table)?;
    Ok(format!(
        "rgb {rgb:.2}, skeleton {skel:.2}, best fused {best:.2}, fused+svm {refused:.2}; runs {:.0}s / {:.0}s, byte-identical",
        t1.as_secs_f64(),
        t2.as_secs_f64()
    ))
}

fn report_fidelity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let result = ExperimentResult::from_accuracies(0, "published", [45.73, 70.63, 70.83, 74.69]).map_err(|e| e.to_string())?;
    let path = dir.path().join("published.json");
    std::fs::write(&path, serde_json::to_string(&result).unwrap()).map_err(|e| e.to_string())?;
    let md = cli::report(None, Some(&path), "md", None).map_err(|e| e.to_string())?;
    let want = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/published_table.md"))
        .map_err(|e| e.to_string())?;
    ensure(md == want, || format!("rendered table differs:\n{md}"))?;
    let rows: Vec<&str> = md.lines().skip(2).collect();
    ensure(rows.len() == 4, || format!("{} rows", rows.len()))?;
    for (row, method) in rows.iter().zip(METHODS) {
        ensure(row.starts_with(&format!("| {method} |")), || format!("row {row:?} out of order"))?;
    }
    Ok("4 rows in published order, byte-identical to fixture".into())
}

/// Writes straight to stderr so the lines show even when output is captured.
fn report(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stderr(), "{line}");
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("kernel-oracle equivalence", kernel_oracle),
        ("gradient suite", gradient_suite),
        ("audio math", audio_math),
        ("factorization", factorization),
        ("fusion algebra", fusion_algebra),
        ("svm", svm),
        ("experiment shape", experiment_shape),
        ("report fidelity", report_fidelity),
    ];
    let mut failures = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => report(&format!("criterion {}: PASS {name} ({detail})", n + 1)),
            Err(why) => {
                failures += 1;
                report(&format!("criterion {}: FAIL {name} ({why})", n + 1));
            }
        }
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
