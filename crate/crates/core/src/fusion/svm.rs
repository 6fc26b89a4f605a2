//! One-vs-one linear SVMs with sigmoid-calibrated pairwise probabilities.
//!
//! Each pair `(i, j)`, `i < j`, gets a soft-margin linear SVM trained by
//! seeded subgradient descent on `lambda/2 |w|^2 + hinge`, with class `i`
//! as the positive side. Its training margins are mapped to
//! `P(i | f) = 1 / (1 + exp(A f + B))` by Newton's method on the
//! regularized-target log loss. Class scores are pairwise vote sums,
//! normalized to one.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use crate::error::{Error, Result};
use crate::kernels::linalg::{axpy, dot};
use crate::kernels::ProbVector;
use crate::scalar::{from_usize, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub seed: u64,
    pub platt_iterations: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            epochs: 2000,
            learning_rate: 0.01,
            lambda: 0.001,
            seed: 0,
            platt_iterations: 100,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) || !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "svm needs learning_rate > 0 and lambda >= 0, got {} and {}",
                self.learning_rate, self.lambda
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LinearSvm<T = f64> {
    pub weights: Vec<T>,
    pub bias: T,
}

impl<T: Scalar> LinearSvm<T> {
    pub fn margin(&self, x: &[T]) -> T {
        dot(&self.weights, x) + self.bias
    }
}

/// `P(positive | f) = 1 / (1 + exp(a f + b))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattScaling {
    pub a: f64,
    pub b: f64,
}

/// Largest slope kept after fitting; `a` must stay negative so that larger
/// margins mean higher positive-class probability.
pub const MAX_PLATT_SLOPE: f64 = -1e-6;

impl PlattScaling {
    pub fn prob(&self, f: f64) -> f64 {
        let z = self.a * f + self.b;
        if z >= 0.0 {
            let e = (-z).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + z.exp())
        }
    }

    /// Newton iterations with backtracking line search on the log loss
    /// against the regularized targets `(N+ + 1)/(N+ + 2)` and `1/(N- + 2)`.
    pub fn fit(margins: &[f64], positive: &[bool], iterations: usize) -> Self {
        let n_pos = positive.iter().filter(|&&p| p).count() as f64;
        let n_neg = positive.len() as f64 - n_pos;
        let (hi, lo) = ((n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0));
        let t: Vec<f64> = positive.iter().map(|&p| if p { hi } else { lo }).collect();
        let loss = |a: f64, b: f64| -> f64 {
            margins
                .iter()
                .zip(&t)
                .map(|(&f, &ti)| {
                    let z = f * a + b;
                    if z >= 0.0 {
                        ti * z + (-z).exp().ln_1p()
                    } else {
                        (ti - 1.0) * z + z.exp().ln_1p()
                    }
                })
                .sum()
        };
        const SIGMA: f64 = 1e-12;
        let (mut a, mut b) = (0.0, ((n_neg + 1.0) / (n_pos + 1.0)).ln());
        let mut fval = loss(a, b);
        for _ in 0..iterations {
            let (mut h11, mut h22, mut h21, mut g1, mut g2) = (SIGMA, SIGMA, 0.0, 0.0, 0.0);
            for (&f, &ti) in margins.iter().zip(&t) {
                let p = PlattScaling { a, b }.prob(f);
                let d2 = p * (1.0 - p);
                h11 += f * f * d2;
                h22 += d2;
                h21 += f * d2;
                let d1 = ti - p;
                g1 += f * d1;
                g2 += d1;
            }
            if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
                break;
            }
            let det = h11 * h22 - h21 * h21;
            let da = -(h22 * g1 - h21 * g2) / det;
            let db = -(-h21 * g1 + h11 * g2) / det;
            let gd = g1 * da + g2 * db;
            let mut step = 1.0;
            let mut moved = false;
            while step >= 1e-10 {
                let (na, nb) = (a + step * da, b + step * db);
                let nf = loss(na, nb);
                if nf < fval + 1e-4 * step * gd {
                    (a, b, fval) = (na, nb, nf);
                    moved = true;
                    break;
                }
                step /= 2.0;
            }
            if !moved {
                break;
            }
        }
        PlattScaling {
            a: a.min(MAX_PLATT_SLOPE),
            b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PairClassifier<T = f64> {
    pub positive: usize,
    pub negative: usize,
    pub svm: LinearSvm<T>,
    pub calibration: PlattScaling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SvmFusionModel<T = f64> {
    pub classes: usize,
    /// Per-feature standardization fitted on the training set.
    pub offset: Vec<T>,
    pub scale: Vec<T>,
    pub pairs: Vec<PairClassifier<T>>,
    pub config: SvmConfig,
    #[serde(default)]
    pub config_hash: Option<String>,
}

fn train_pair<T: Scalar>(xs: &[&[T]], ys: &[T], cfg: &SvmConfig, seed: u64) -> LinearSvm<T> {
    let dim = xs.first().map_or(0, |x| x.len());
    let mut svm = LinearSvm {
        weights: vec![T::zero(); dim],
        bias: T::zero(),
    };
    let lr = T::of(cfg.learning_rate);
    let decay = T::one() - lr * T::of(cfg.lambda);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &n in &order {
            let (x, y) = (xs[n], ys[n]);
            let violated = y * svm.margin(x) < T::one();
            svm.weights.iter_mut().for_each(|w| *w *= decay);
            if violated {
                axpy(lr * y, x, &mut svm.weights);
                svm.bias += lr * y;
            }
        }
    }
    svm
}

/// Number of one-vs-one classifiers for `k` classes.
pub fn pair_count(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

pub fn svm_fuse_train<T: Scalar>(
    features: &[FeatureVector<T>],
    labels: &[usize],
    k: usize,
    cfg: &SvmConfig,
) -> Result<SvmFusionModel<T>> {
    cfg.validate()?;
    if k < 2 {
        return Err(Error::InvalidConfig(format!("svm fusion needs at least 2 classes, got {k}")));
    }
    if features.len() != labels.len() {
        return Err(Error::shape(
            "svm fuse train",
            format!("{} features for {} labels", features.len(), labels.len()),
        ));
    }
    let dim = features.first().map_or(0, |f| f.len());
    if dim == 0 {
        return Err(Error::Empty("svm fuse train features"));
    }
    if let Some(f) = features.iter().find(|f| f.len() != dim) {
        return Err(Error::shape("svm fuse train", format!("feature length {} != {dim}", f.len())));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::InvalidConfig(format!("label {l} out of range for {k} classes")));
    }
    for c in 0..k {
        let n = labels.iter().filter(|&&l| l == c).count();
        if n < 2 {
            return Err(Error::InsufficientData(format!("class {c} has {n} samples, need at least 2")));
        }
    }

    let count = from_usize::<T>(features.len());
    let mut offset = vec![T::zero(); dim];
    let mut scale = vec![T::zero(); dim];
    for f in features {
        axpy(T::one(), f.values(), &mut offset);
    }
    offset.iter_mut().for_each(|v| *v /= count);
    for f in features {
        for ((s, &v), &m) in scale.iter_mut().zip(f.values()).zip(&offset) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut scale {
        let sd = (*s / count).sqrt();
        *s = if sd > T::zero() { sd } else { T::one() };
    }
    let xs: Vec<Vec<T>> = features.iter().map(|f| standardize(f.values(), &offset, &scale)).collect();

    let mut pairs = Vec::with_capacity(pair_count(k));
    for i in 0..k {
        for j in i + 1..k {
            let idx: Vec<usize> = (0..xs.len()).filter(|&n| labels[n] == i || labels[n] == j).collect();
            let px: Vec<&[T]> = idx.iter().map(|&n| xs[n].as_slice()).collect();
            let py: Vec<T> = idx.iter().map(|&n| if labels[n] == i { T::one() } else { -T::one() }).collect();
            let seed = cfg.seed.wrapping_add(pairs.len() as u64);
            let svm = train_pair(&px, &py, cfg, seed);
            let margins: Vec<f64> = px.iter().map(|x| svm.margin(x).as_f64()).collect();
            let positive: Vec<bool> = idx.iter().map(|&n| labels[n] == i).collect();
            pairs.push(PairClassifier {
                positive: i,
                negative: j,
                svm,
                calibration: PlattScaling::fit(&margins, &positive, cfg.platt_iterations),
            });
        }
    }
    Ok(SvmFusionModel {
        classes: k,
        offset,
        scale,
        pairs,
        config: *cfg,
        config_hash: None,
    })
}

fn standardize<T: Scalar>(x: &[T], offset: &[T], scale: &[T]) -> Vec<T> {
    x.iter().zip(offset).zip(scale).map(|((&v, &o), &s)| (v - o) / s).collect()
}

impl<T: Scalar> SvmFusionModel<T> {
    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    /// Calibrated `P(positive | x)` for every pair, in training order.
    pub fn pairwise_probs(&self, feature: &FeatureVector<T>) -> Result<Vec<f64>> {
        if feature.len() != self.dim() {
            return Err(Error::shape(
                "svm fuse predict",
                format!("feature length {} != trained length {}", feature.len(), self.dim()),
            ));
        }
        let x = standardize(feature.values(), &self.offset, &self.scale);
        Ok(self
            .pairs
            .iter()
            .map(|p| p.calibration.prob(p.svm.margin(&x).as_f64()))
            .collect())
    }

    /// Fraction of `features` whose fused decision matches its label.
    pub fn accuracy(&self, features: &[FeatureVector<T>], labels: &[usize]) -> Result<f64> {
        let mut hits = 0;
        for (f, &l) in features.iter().zip(labels) {
            hits += usize::from(svm_fuse_predict(self, f)?.decision() == l);
        }
        Ok(hits as f64 / features.len().max(1) as f64)
    }
}

/// Couples pairwise probabilities by normalized vote sum.
pub fn couple_pairwise<T: Scalar>(k: usize, pairs: &[(usize, usize, f64)]) -> Result<ProbVector<T>> {
    let mut scores = vec![0.0; k];
    for &(i, j, p) in pairs {
        scores[i] += p;
        scores[j] += 1.0 - p;
    }
    ProbVector::from_scores(scores.into_iter().map(T::of).collect())
}

pub fn svm_fuse_predict<T: Scalar>(model: &SvmFusionModel<T>, feature: &FeatureVector<T>) -> Result<ProbVector<T>> {
    let probs = model.pairwise_probs(feature)?;
    let triples: Vec<(usize, usize, f64)> = model
        .pairs
        .iter()
        .zip(probs)
        .map(|(p, q)| (p.positive, p.negative, q))
        .collect();
    couple_pairwise(model.classes, &triples)
}
