//! Hinge-loss matrix factorization for link-sign prediction, with an
//! optional balance-aware training stream.
//!
//! Every buyer `i` and seller `j` get a `d`-dimensional embedding; the score
//! for a pair is the dot product `uᵢ·vⱼ` and its sign is the predicted link
//! sign. Training minimizes a squared hinge per example,
//! `weight · max(0, 1 − target·uᵢ·vⱼ)²`, by SGD with L2 decay on the two
//! touched rows. The plain trainer ([`train_mf`]) fits only the observed
//! edges (targets ±1, weight 1).
//!
//! The balance-aware trainer ([`train_mf_wbt`]) additionally fits *implicit*
//! links taken from a [`BalanceSuggestionMatrix`]: the `k_pos` non-linked
//! pairs whose net balance gain is most positive (weight `alpha`) and the
//! `k_neg` whose gain is most negative (weight `beta`). Implicit targets are
//! the gain's sign by default, or the raw gain under
//! [`ImplicitTargetMode::Raw`]. Explicit and implicit examples are merged
//! into one stream and shuffled together each epoch. A group whose weight is
//! zero (or whose selection is empty) is left out of the stream entirely, so
//! with `alpha = beta = 0` — or `k_pos = k_neg = 0` — the balance-aware
//! trainer reproduces the plain one bit for bit.
//!
//! Training is deterministic for a given config: initialization draws from a
//! seeded generator and the same generator drives every epoch's shuffle. If
//! a run ends with a larger objective than it started with (or a non-finite
//! one), it is retried from the identical initialization at half the step
//! size, a few times, before giving up.

use std::cmp::Reverse;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::caterpillars::BalanceSuggestionMatrix;
use crate::graph::{Sign, SignedBipartiteGraph};
use crate::{Error, Result};

/// How the net balance gain of an implicit link becomes a regression target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImplicitTargetMode {
    /// Fit the gain's sign (±1).
    Sign,
    /// Fit the gain itself.
    Raw,
}

/// Hyperparameters for both trainers. `alpha`, `beta`, `k_pos`, `k_neg`, and
/// `target_mode` only matter to [`train_mf_wbt`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfConfig {
    pub dimension: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_penalty: f64,
    pub seed: u64,
    /// Weight of implicit positive examples.
    pub alpha: f64,
    /// Weight of implicit negative examples.
    pub beta: f64,
    /// How many of the strongest positive suggestions to fit.
    pub k_pos: usize,
    /// How many of the strongest negative suggestions to fit.
    pub k_neg: usize,
    pub target_mode: ImplicitTargetMode,
}

impl Default for MfConfig {
    fn default() -> Self {
        Self {
            dimension: 10,
            learning_rate: 0.05,
            epochs: 100,
            l2_penalty: 1e-3,
            seed: 0,
            alpha: 0.0,
            beta: 0.0,
            k_pos: 0,
            k_neg: 0,
            target_mode: ImplicitTargetMode::Sign,
        }
    }
}

impl MfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidParameter(
                "embedding dimension must be at least 1".to_string(),
            ));
        }
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
        for (name, value) in [("alpha", self.alpha), ("beta", self.beta)] {
            if value < 0.0 || !value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be non-negative, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// Learned buyer (`u`) and seller (`v`) embeddings, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingPair {
    dimension: usize,
    n_buyers: usize,
    n_sellers: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl EmbeddingPair {
    pub fn new(
        dimension: usize,
        n_buyers: usize,
        n_sellers: usize,
        u: Vec<f64>,
        v: Vec<f64>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter(
                "embedding dimension must be at least 1".to_string(),
            ));
        }
        if u.len() != n_buyers * dimension || v.len() != n_sellers * dimension {
            return Err(Error::InvalidParameter(format!(
                "embedding storage has {} + {} values; {} buyers and {} sellers at dimension {} need {} + {}",
                u.len(),
                v.len(),
                n_buyers,
                n_sellers,
                dimension,
                n_buyers * dimension,
                n_sellers * dimension,
            )));
        }
        Ok(Self {
            dimension,
            n_buyers,
            n_sellers,
            u,
            v,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn n_buyers(&self) -> usize {
        self.n_buyers
    }

    pub fn n_sellers(&self) -> usize {
        self.n_sellers
    }

    pub fn buyer_vector(&self, buyer: u32) -> Result<&[f64]> {
        let i = buyer as usize;
        if i >= self.n_buyers {
            return Err(Error::IndexOutOfRange {
                side: "buyer",
                index: i,
                limit: self.n_buyers,
            });
        }
        Ok(&self.u[i * self.dimension..(i + 1) * self.dimension])
    }

    pub fn seller_vector(&self, seller: u32) -> Result<&[f64]> {
        let j = seller as usize;
        if j >= self.n_sellers {
            return Err(Error::IndexOutOfRange {
                side: "seller",
                index: j,
                limit: self.n_sellers,
            });
        }
        Ok(&self.v[j * self.dimension..(j + 1) * self.dimension])
    }

    /// Dot-product score for a pair; its sign is the predicted link sign.
    pub fn score(&self, buyer: u32, seller: u32) -> Result<f64> {
        Ok(dot(self.buyer_vector(buyer)?, self.seller_vector(seller)?))
    }
}

/// Score and thresholded sign for a pair (`score ≥ 0` → positive).
pub fn predict_mf(embeddings: &EmbeddingPair, buyer: u32, seller: u32) -> Result<(f64, Sign)> {
    let score = embeddings.score(buyer, seller)?;
    Ok((score, Sign::from_score(score)))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn squared_norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

/// One training example's loss:
/// `weight · max(0, 1 − target·u·v)² + l2_penalty · (‖u‖² + ‖v‖²)`.
pub fn hinge_example_loss(u: &[f64], v: &[f64], target: f64, weight: f64, l2_penalty: f64) -> f64 {
    let margin = 1.0 - target * dot(u, v);
    let hinge = margin.max(0.0);
    weight * hinge * hinge + l2_penalty * (squared_norm(u) + squared_norm(v))
}

/// Gradient of [`hinge_example_loss`] with respect to `(u, v)`. At the hinge
/// kink (`target·u·v = 1`) this returns the zero-hinge branch.
pub fn hinge_example_gradient(
    u: &[f64],
    v: &[f64],
    target: f64,
    weight: f64,
    l2_penalty: f64,
) -> (Vec<f64>, Vec<f64>) {
    let margin = 1.0 - target * dot(u, v);
    let coef = if margin > 0.0 {
        -2.0 * weight * margin * target
    } else {
        0.0
    };
    let grad_u = u
        .iter()
        .zip(v)
        .map(|(ui, vi)| coef * vi + 2.0 * l2_penalty * ui)
        .collect();
    let grad_v = v
        .iter()
        .zip(u)
        .map(|(vi, ui)| coef * ui + 2.0 * l2_penalty * vi)
        .collect();
    (grad_u, grad_v)
}

/// Sum of per-edge squared hinges on the observed edges plus
/// `l2_penalty · (‖U‖² + ‖V‖²)`. The balance-aware trainer's internal
/// objective adds the weighted implicit examples to the first sum.
pub fn mf_objective(
    graph: &SignedBipartiteGraph,
    embeddings: &EmbeddingPair,
    l2_penalty: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for edge in graph.edges() {
        let score = embeddings.score(edge.buyer, edge.seller)?;
        let hinge = (1.0 - edge.sign.value() * score).max(0.0);
        total += hinge * hinge;
    }
    Ok(total + l2_penalty * (squared_norm(&embeddings.u) + squared_norm(&embeddings.v)))
}

#[derive(Clone, Copy, Debug)]
struct TrainingExample {
    buyer: u32,
    seller: u32,
    target: f64,
    weight: f64,
}

/// Picks the implicit links to fit: non-linked pairs with the `k_pos` most
/// positive and `k_neg` most negative net balance gains. Ties break toward
/// the lexicographically smaller `(buyer, seller)` pair; zero gains are never
/// selected. Returns `(positives, negatives)` as `(buyer, seller, gain)`.
pub fn select_implicit_links(
    suggestions: &BalanceSuggestionMatrix,
    k_pos: usize,
    k_neg: usize,
) -> (Vec<(u32, u32, i64)>, Vec<(u32, u32, i64)>) {
    let mut positives: Vec<(u32, u32, i64)> = suggestions
        .entries()
        .filter(|&(_, gain)| gain > 0)
        .map(|((b, s), gain)| (b, s, gain))
        .collect();
    // `entries()` is (buyer, seller)-ordered, so a stable sort on the gain
    // alone leaves ties in pair order.
    positives.sort_by_key(|&(_, _, gain)| Reverse(gain));
    positives.truncate(k_pos);

    let mut negatives: Vec<(u32, u32, i64)> = suggestions
        .entries()
        .filter(|&(_, gain)| gain < 0)
        .map(|((b, s), gain)| (b, s, gain))
        .collect();
    negatives.sort_by_key(|&(_, _, gain)| gain);
    negatives.truncate(k_neg);

    (positives, negatives)
}

/// Trains embeddings on the observed edges only.
pub fn train_mf(graph: &SignedBipartiteGraph, config: &MfConfig) -> Result<EmbeddingPair> {
    let stream = explicit_examples(graph);
    run_sgd(graph.n_buyers(), graph.n_sellers(), stream, config)
}

/// Trains embeddings on the observed edges plus implicit links drawn from
/// the balance-suggestion matrix (see the module docs).
pub fn train_mf_wbt(
    graph: &SignedBipartiteGraph,
    suggestions: &BalanceSuggestionMatrix,
    config: &MfConfig,
) -> Result<EmbeddingPair> {
    let mut stream = explicit_examples(graph);
    let (positives, negatives) = select_implicit_links(suggestions, config.k_pos, config.k_neg);
    if config.alpha > 0.0 {
        for (buyer, seller, gain) in positives {
            stream.push(TrainingExample {
                buyer,
                seller,
                target: implicit_target(gain, config.target_mode),
                weight: config.alpha,
            });
        }
    }
    if config.beta > 0.0 {
        for (buyer, seller, gain) in negatives {
            stream.push(TrainingExample {
                buyer,
                seller,
                target: implicit_target(gain, config.target_mode),
                weight: config.beta,
            });
        }
    }
    run_sgd(graph.n_buyers(), graph.n_sellers(), stream, config)
}

fn implicit_target(gain: i64, mode: ImplicitTargetMode) -> f64 {
    match mode {
        ImplicitTargetMode::Sign => {
            if gain > 0 {
                1.0
            } else {
                -1.0
            }
        }
        ImplicitTargetMode::Raw => gain as f64,
    }
}

fn explicit_examples(graph: &SignedBipartiteGraph) -> Vec<TrainingExample> {
    graph
        .edges()
        .iter()
        .map(|edge| TrainingExample {
            buyer: edge.buyer,
            seller: edge.seller,
            target: edge.sign.value(),
            weight: 1.0,
        })
        .collect()
}

const DIVERGENCE_RETRIES: usize = 8;

fn run_sgd(
    n_buyers: usize,
    n_sellers: usize,
    mut stream: Vec<TrainingExample>,
    config: &MfConfig,
) -> Result<EmbeddingPair> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::InvalidParameter(
            "no training examples (empty graph)".to_string(),
        ));
    }

    let d = config.dimension;
    let mut rate = config.learning_rate;
    let mut last_gap = f64::NAN;
    for _attempt in 0..=DIVERGENCE_RETRIES {
        // Re-seeding gives every attempt the identical initialization and
        // shuffle sequence; only the step size differs.
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let bound = 0.5 / (d as f64).sqrt();
        let mut u: Vec<f64> = (0..n_buyers * d)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        let mut v: Vec<f64> = (0..n_sellers * d)
            .map(|_| rng.random_range(-bound..bound))
            .collect();

        let initial = stream_objective(&stream, &u, &v, d, config.l2_penalty);
        let mut u_old = vec![0.0; d];
        for _ in 0..config.epochs {
            stream.shuffle(&mut rng);
            for ex in &stream {
                let ui = ex.buyer as usize * d;
                let vj = ex.seller as usize * d;
                let u_row = &u[ui..ui + d];
                let v_row = &v[vj..vj + d];
                let margin = 1.0 - ex.target * dot(u_row, v_row);
                let coef = if margin > 0.0 {
                    -2.0 * ex.weight * margin * ex.target
                } else {
                    0.0
                };
                u_old.copy_from_slice(u_row);
                let decay = 2.0 * config.l2_penalty;
                for k in 0..d {
                    u[ui + k] -= rate * (coef * v[vj + k] + decay * u[ui + k]);
                    v[vj + k] -= rate * (coef * u_old[k] + decay * v[vj + k]);
                }
            }
        }

        let residual = stream_objective(&stream, &u, &v, d, config.l2_penalty);
        if residual.is_finite() && residual <= initial {
            return EmbeddingPair::new(d, n_buyers, n_sellers, u, v);
        }
        last_gap = residual - initial;
        rate *= 0.5;
    }
    Err(Error::NoConvergence {
        iterations: config.epochs * (DIVERGENCE_RETRIES + 1),
        last_update: last_gap,
    })
}

fn stream_objective(
    stream: &[TrainingExample],
    u: &[f64],
    v: &[f64],
    d: usize,
    l2_penalty: f64,
) -> f64 {
    let mut total = 0.0;
    for ex in stream {
        let ui = ex.buyer as usize * d;
        let vj = ex.seller as usize * d;
        let score = dot(&u[ui..ui + d], &v[vj..vj + d]);
        let hinge = (1.0 - ex.target * score).max(0.0);
        total += ex.weight * hinge * hinge;
    }
    total + l2_penalty * (squared_norm(u) + squared_norm(v))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Stable 16-hex-digit digest of a config's JSON form, stored alongside
/// saved embeddings so a mismatched reload is detectable.
pub fn config_digest(config: &MfConfig) -> Result<String> {
    let json = serde_json::to_string(config)?;
    Ok(format!("{:016x}", fnv1a64(json.as_bytes())))
}

/// On-disk form of an [`EmbeddingPair`] plus the seed and a digest of the
/// configuration that trained it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub dimension: usize,
    pub n_buyers: usize,
    pub n_sellers: usize,
    pub seed: u64,
    pub config_digest: String,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl EmbeddingFile {
    pub fn into_pair(self) -> Result<EmbeddingPair> {
        EmbeddingPair::new(self.dimension, self.n_buyers, self.n_sellers, self.u, self.v)
    }
}

/// Saves embeddings as JSON (exact: floats round-trip bit for bit).
pub fn write_embeddings(
    embeddings: &EmbeddingPair,
    config: &MfConfig,
    mut writer: impl Write,
) -> Result<()> {
    let file = EmbeddingFile {
        dimension: embeddings.dimension,
        n_buyers: embeddings.n_buyers,
        n_sellers: embeddings.n_sellers,
        seed: config.seed,
        config_digest: config_digest(config)?,
        u: embeddings.u.clone(),
        v: embeddings.v.clone(),
    };
    serde_json::to_writer(&mut writer, &file)?;
    writeln!(writer)?;
    Ok(())
}

pub fn read_embeddings(reader: impl Read) -> Result<EmbeddingPair> {
    let file: EmbeddingFile = serde_json::from_reader(reader)?;
    file.into_pair()
}

/// Human-readable TSV dump: one row per node, `side<TAB>index<TAB>components…`.
pub fn write_embeddings_text(embeddings: &EmbeddingPair, mut writer: impl Write) -> Result<()> {
    writeln!(writer, "# side\tindex\tcomponents")?;
    for (side, count, data) in [
        ("buyer", embeddings.n_buyers, &embeddings.u),
        ("seller", embeddings.n_sellers, &embeddings.v),
    ] {
        let d = embeddings.dimension;
        for i in 0..count {
            write!(writer, "{side}\t{i}")?;
            for k in 0..d {
                write!(writer, "\t{:.6}", data[i * d + k])?;
            }
            writeln!(writer)?;
        }
    }
    Ok(())
}
