//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use mmrec_core::kernels::{ActivationKind, ConvSpec, Padding};
use mmrec_core::Tensor;
use rand::Rng;

/// Padding before the data along one axis, and the output extent.
fn axis_plan(d: usize, k: usize, s: usize, padding: Padding) -> (i64, usize) {
    match padding {
        Padding::Valid => (0, (d - k) / s + 1),
        Padding::Same => {
            let out = d.div_ceil(s);
            let need = (out - 1) * s + k;
            let total = need.saturating_sub(d);
            ((total / 2) as i64, out)
        }
    }
}

fn read(x: &[f64], dims: &[usize], c: usize, pos: &[i64]) -> f64 {
    let mut idx = c;
    for (a, &p) in pos.iter().enumerate() {
        if p < 0 || p as usize >= dims[a] {
            return 0.0;
        }
        idx = idx * dims[a] + p as usize;
    }
    x[idx]
}

/// Straightforward nested-loop convolution, one explicit loop per spatial
/// rank, written without reference to the library kernel.
pub fn naive_conv(input: &Tensor<f64>, spec: &ConvSpec<f64>) -> Vec<f64> {
    let ks = spec.kernel.shape();
    let (cout, cin) = (ks[0], ks[1]);
    let kd = &ks[2..];
    let dims = &input.shape()[1..];
    let n = dims.len();
    let plans: Vec<(i64, usize)> = (0..n)
        .map(|a| axis_plan(dims[a], kd[a], spec.stride[a], spec.padding))
        .collect();
    let w = spec.kernel.data();
    let x = input.data();
    let act = |v: f64| match spec.activation {
        ActivationKind::Identity => v,
        ActivationKind::Relu => v.max(0.0),
        ActivationKind::Tanh => v.tanh(),
        ActivationKind::Sigmoid => 1.0 / (1.0 + (-v).exp()),
    };
    let pos = |a: usize, o: usize, k: usize| (o * spec.stride[a] + k) as i64 - plans[a].0;
    let mut out = Vec::new();
    match n {
        1 => {
            for co in 0..cout {
                for o0 in 0..plans[0].1 {
                    let mut acc = spec.bias[co];
                    for ci in 0..cin {
                        for k0 in 0..kd[0] {
                            let wv = w[(co * cin + ci) * kd[0] + k0];
                            acc += wv * read(x, dims, ci, &[pos(0, o0, k0)]);
                        }
                    }
                    out.push(act(acc));
                }
            }
        }
        2 => {
            for co in 0..cout {
                for o0 in 0..plans[0].1 {
                    for o1 in 0..plans[1].1 {
                        let mut acc = spec.bias[co];
                        for ci in 0..cin {
                            for k0 in 0..kd[0] {
                                for k1 in 0..kd[1] {
                                    let wv = w[((co * cin + ci) * kd[0] + k0) * kd[1] + k1];
                                    acc += wv * read(x, dims, ci, &[pos(0, o0, k0), pos(1, o1, k1)]);
                                }
                            }
                        }
                        out.push(act(acc));
                    }
                }
            }
        }
        3 => {
            for co in 0..cout {
                for o0 in 0..plans[0].1 {
                    for o1 in 0..plans[1].1 {
                        for o2 in 0..plans[2].1 {
                            let mut acc = spec.bias[co];
                            for ci in 0..cin {
                                for k0 in 0..kd[0] {
                                    for k1 in 0..kd[1] {
                                        for k2 in 0..kd[2] {
                                            let wv = w[(((co * cin + ci) * kd[0] + k0) * kd[1] + k1) * kd[2] + k2];
                                            let p = [pos(0, o0, k0), pos(1, o1, k1), pos(2, o2, k2)];
                                            acc += wv * read(x, dims, ci, &p);
                                        }
                                    }
                                }
                            }
                            out.push(act(acc));
                        }
                    }
                }
            }
        }
        _ => panic!("oracle supports 1-3 spatial dims"),
    }
    out
}

/// Random convolution case: spatial rank 1-3, stride 1-2, either padding.
pub fn random_conv_case(rng: &mut impl Rng) -> (Tensor<f64>, ConvSpec<f64>) {
    let rank = rng.random_range(1..=3usize);
    let cin = rng.random_range(1..=3usize);
    let cout = rng.random_range(1..=3usize);
    let padding = if rng.random_bool(0.5) { Padding::Valid } else { Padding::Same };
    let acts = [ActivationKind::Identity, ActivationKind::Relu, ActivationKind::Tanh, ActivationKind::Sigmoid];
    let activation = acts[rng.random_range(0..acts.len())];
    let mut kdims = Vec::new();
    let mut dims = Vec::new();
    let mut stride = Vec::new();
    for _ in 0..rank {
        let k = rng.random_range(1..=3usize);
        kdims.push(k);
        dims.push(rng.random_range(k..=k + 4));
        stride.push(rng.random_range(1..=2usize));
    }
    let mut kshape = vec![cout, cin];
    kshape.extend(&kdims);
    let mut ishape = vec![cin];
    ishape.extend(&dims);
    let kernel = random_tensor(&kshape, rng);
    let input = random_tensor(&ishape, rng);
    let bias = (0..cout).map(|_| rng.random_range(-1.0..1.0)).collect();
    let spec = ConvSpec::new(kernel, bias, stride, padding, activation).unwrap();
    (input, spec)
}

pub fn random_tensor(shape: &[usize], rng: &mut impl Rng) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Direct O(n^2) DFT energy `|sum_i x_i e^{-2 pi j r i / n}|^2`.
pub fn naive_dft_energy(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|r| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                let angle = -2.0 * std::f64::consts::PI * (r * i) as f64 / n as f64;
                re += v * angle.cos();
                im += v * angle.sin();
            }
            re * re + im * im
        })
        .collect()
}

/// Compares `values` against a JSON golden file under `tests/golden/`.
/// Set `MMREC_REGEN_GOLDEN=1` to rewrite the file from the current values.
pub fn check_golden(name: &str, values: &[f64], tol: f64) {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("MMREC_REGEN_GOLDEN").is_some() {
        std::fs::write(&path, serde_json::to_string_pretty(values).unwrap()).unwrap();
        return;
    }
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("missing golden {}: {e}", path.display()));
    let want: Vec<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(want.len(), values.len(), "golden {name} length");
    for (i, (a, b)) in values.iter().zip(&want).enumerate() {
        assert!((a - b).abs() <= tol, "golden {name}[{i}]: {a} vs {b}");
    }
}
