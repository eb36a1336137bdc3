//! Supervised link-sign baselines: feature extraction and class-weighted
//! logistic regression.
//!
//! Two feature schemas are supported for a (buyer, seller) pair:
//!
//! - **degree** (4-dim): `[d⁺(buyer), d⁻(buyer), d⁺(seller), d⁻(seller)]`,
//!   with the pair's own edge removed from its matching counter when present
//!   (leave-one-out, so training features never encode the training label).
//! - **caterpillar** (8-dim): the pair's sign-pattern path counts in
//!   [`crate::caterpillars::CATERPILLAR_PATTERNS`] order. A pair's own edge
//!   is never part of its caterpillars, so no correction is needed.
//!
//! Training is full-batch gradient descent on the mean class-weighted
//! logistic loss with an L2 penalty on the weights (not the bias). Features
//! are z-scored from the training set; the model stores the means and
//! standard deviations and applies them at prediction time. Class weights
//! `w_c = N / (2·N_c)` rebalance skewed sign distributions (a 98%-positive
//! marketplace would otherwise teach the model to answer "positive" and
//! nothing else). The step size is halved whenever a step would increase the
//! loss, so the recorded loss sequence is non-increasing.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::caterpillars::count_caterpillars;
use crate::graph::{Side, Sign, SignedBipartiteGraph};
use crate::{Error, Result};

/// Which extraction produced a feature vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Degree,
    Caterpillar,
}

impl FeatureKind {
    pub fn dimension(self) -> usize {
        match self {
            FeatureKind::Degree => 4,
            FeatureKind::Caterpillar => 8,
        }
    }
}

/// A raw (un-standardized) feature vector for one pair.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Signed-degree features with the pair's own edge left out.
pub fn extract_degree_features(
    graph: &SignedBipartiteGraph,
    buyer: u32,
    seller: u32,
) -> Result<FeatureVector> {
    let (mut bp, mut bn) = graph.signed_degrees(Side::Buyer, buyer)?;
    let (mut sp, mut sn) = graph.signed_degrees(Side::Seller, seller)?;
    match graph.sign_of(buyer, seller) {
        Some(Sign::Positive) => {
            bp -= 1;
            sp -= 1;
        }
        Some(Sign::Negative) => {
            bn -= 1;
            sn -= 1;
        }
        None => {}
    }
    Ok(FeatureVector::new(vec![
        bp as f64, bn as f64, sp as f64, sn as f64,
    ]))
}

/// Caterpillar sign-pattern counts as an 8-dim feature vector.
pub fn extract_caterpillar_features(
    graph: &SignedBipartiteGraph,
    buyer: u32,
    seller: u32,
) -> Result<FeatureVector> {
    let profile = count_caterpillars(graph, buyer, seller)?;
    Ok(FeatureVector::new(profile.to_features().to_vec()))
}

/// Gradient-descent hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_penalty: f64,
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 500,
            l2_penalty: 1e-4,
            seed: 0,
        }
    }
}

impl LogisticConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.l2_penalty < 0.0 || !self.l2_penalty.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "l2 penalty must be non-negative, got {}",
                self.l2_penalty
            )));
        }
        Ok(())
    }
}

/// A trained logistic model plus everything needed to reproduce its
/// standardization at prediction time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub feature_kind: FeatureKind,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_means: Vec<f64>,
    pub feature_stds: Vec<f64>,
    pub class_weight_positive: f64,
    pub class_weight_negative: f64,
}

impl LogisticModel {
    /// Probability that the pair's sign is positive, plus the thresholded
    /// sign (`p ≥ 0.5` → positive).
    pub fn predict(&self, features: &FeatureVector) -> Result<(f64, Sign)> {
        if features.len() != self.weights.len() {
            return Err(Error::InvalidParameter(format!(
                "feature vector has length {}, model expects {}",
                features.len(),
                self.weights.len()
            )));
        }
        let mut score = self.bias;
        for ((&x, &mean), (&std, &w)) in features
            .values()
            .iter()
            .zip(&self.feature_means)
            .zip(self.feature_stds.iter().zip(&self.weights))
        {
            score += w * (x - mean) / std;
        }
        let probability = sigmoid(score);
        let sign = if probability >= 0.5 {
            Sign::Positive
        } else {
            Sign::Negative
        };
        Ok((probability, sign))
    }

    /// Serializes the model as a flat JSON record.
    pub fn write_json(&self, mut writer: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writeln!(writer)?;
        Ok(())
    }

    pub fn read_json(reader: impl Read) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^(-m)) without overflow for large |m|.
fn log1p_exp_neg(margin: f64) -> f64 {
    if margin > 0.0 {
        (-margin).exp().ln_1p()
    } else {
        -margin + margin.exp().ln_1p()
    }
}

/// Mean class-weighted logistic loss plus `(λ/2)·‖w‖²`, on already
/// standardized features. Public so the gradient can be checked against
/// finite differences of the actual training objective.
pub fn weighted_loss(
    weights: &[f64],
    bias: f64,
    features: &[Vec<f64>],
    labels: &[Sign],
    class_weights: (f64, f64),
    l2_penalty: f64,
) -> f64 {
    let n = features.len() as f64;
    let mut loss = 0.0;
    for (z, &label) in features.iter().zip(labels) {
        let f: f64 = bias + dot(weights, z);
        let weight = match label {
            Sign::Positive => class_weights.0,
            Sign::Negative => class_weights.1,
        };
        loss += weight * log1p_exp_neg(label.value() * f);
    }
    loss / n + 0.5 * l2_penalty * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`weighted_loss`] with respect to (weights, bias).
pub fn weighted_loss_gradient(
    weights: &[f64],
    bias: f64,
    features: &[Vec<f64>],
    labels: &[Sign],
    class_weights: (f64, f64),
    l2_penalty: f64,
) -> (Vec<f64>, f64) {
    let n = features.len() as f64;
    let mut grad_w = vec![0.0; weights.len()];
    let mut grad_b = 0.0;
    for (z, &label) in features.iter().zip(labels) {
        let f: f64 = bias + dot(weights, z);
        let y = label.value();
        let weight = match label {
            Sign::Positive => class_weights.0,
            Sign::Negative => class_weights.1,
        };
        let coef = -weight * y * sigmoid(-y * f);
        for (g, &zk) in grad_w.iter_mut().zip(z) {
            *g += coef * zk;
        }
        grad_b += coef;
    }
    for (g, &w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2_penalty * w;
    }
    (grad_w, grad_b / n)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Trains a logistic model by full-batch gradient descent.
///
/// Deterministic for a given `(features, labels, config)`: initialization is
/// a seeded draw and every later step is data-driven. Errors when the inputs
/// are empty, ragged, of the wrong dimension, or single-class.
pub fn train_logistic(
    kind: FeatureKind,
    features: &[FeatureVector],
    labels: &[Sign],
    config: &LogisticConfig,
) -> Result<LogisticModel> {
    config.validate()?;
    if features.is_empty() {
        return Err(Error::InvalidParameter(
            "no training examples".to_string(),
        ));
    }
    if features.len() != labels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} feature vectors but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let dim = kind.dimension();
    if let Some(bad) = features.iter().find(|f| f.len() != dim) {
        return Err(Error::InvalidParameter(format!(
            "feature vector of length {} where the {kind:?} schema needs {dim}",
            bad.len()
        )));
    }

    let n = features.len();
    let n_positive = labels.iter().filter(|l| l.is_positive()).count();
    let n_negative = n - n_positive;
    if n_positive == 0 || n_negative == 0 {
        return Err(Error::DegenerateLabels(format!(
            "all {n} training labels are {}",
            if n_positive > 0 { "positive" } else { "negative" }
        )));
    }
    let class_weights = (
        n as f64 / (2.0 * n_positive as f64),
        n as f64 / (2.0 * n_negative as f64),
    );

    // Standardize; constant columns get unit scale so they contribute 0.
    let mut means = vec![0.0; dim];
    for f in features {
        for (m, &x) in means.iter_mut().zip(f.values()) {
            *m += x;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let mut stds = vec![0.0; dim];
    for f in features {
        for ((s, &m), &x) in stds.iter_mut().zip(&means).zip(f.values()) {
            *s += (x - m) * (x - m);
        }
    }
    for s in &mut stds {
        *s = (*s / n as f64).sqrt();
        if *s < 1e-12 {
            *s = 1.0;
        }
    }
    let standardized: Vec<Vec<f64>> = features
        .iter()
        .map(|f| {
            f.values()
                .iter()
                .zip(means.iter().zip(&stds))
                .map(|(&x, (&m, &s))| (x - m) / s)
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut weights: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.01..0.01)).collect();
    let mut bias = 0.0;
    let mut rate = config.learning_rate;
    let mut loss = weighted_loss(
        &weights,
        bias,
        &standardized,
        labels,
        class_weights,
        config.l2_penalty,
    );

    for _ in 0..config.epochs {
        let (grad_w, grad_b) = weighted_loss_gradient(
            &weights,
            bias,
            &standardized,
            labels,
            class_weights,
            config.l2_penalty,
        );
        // Backtracking keeps the loss sequence non-increasing: if a step
        // overshoots, halve the rate and retry from the same point.
        loop {
            let trial_w: Vec<f64> = weights
                .iter()
                .zip(&grad_w)
                .map(|(w, g)| w - rate * g)
                .collect();
            let trial_b = bias - rate * grad_b;
            let trial_loss = weighted_loss(
                &trial_w,
                trial_b,
                &standardized,
                labels,
                class_weights,
                config.l2_penalty,
            );
            if trial_loss <= loss || rate < 1e-14 {
                weights = trial_w;
                bias = trial_b;
                if trial_loss <= loss {
                    loss = trial_loss;
                }
                break;
            }
            rate *= 0.5;
        }
    }

    Ok(LogisticModel {
        feature_kind: kind,
        weights,
        bias,
        feature_means: means,
        feature_stds: stds,
        class_weight_positive: class_weights.0,
        class_weight_negative: class_weights.1,
    })
}
