//! The evaluation harness: fitting any method on a training split, scoring
//! held-out pairs, grid search over validation AUC, and a planted-faction
//! generator for controlled benchmarks.
//!
//! The protocol is the same for every method:
//!
//! 1. [`crate::graph::split_edges`] partitions the edges; all models see only
//!    the training graph.
//! 2. [`fit`] trains the chosen [`Method`] on that graph.
//! 3. Each held-out pair is scored by [`score_with_fallback`]: a pair whose
//!    buyer or seller has **zero training degree** is unscorable and falls
//!    back to score `0.0` with the training-majority sign; everything else is
//!    scored by the fitted model.
//! 4. [`crate::metrics::auc`] and [`crate::metrics::f1`] summarize the
//!    records.
//!
//! [`grid_search`] repeats steps 2–4 on the *validation* edges for every
//! candidate configuration and keeps the first strict maximum of the
//! validation AUC; [`run_sweep`] then reruns the winner on the test edges,
//! so a one-point grid is exactly [`run_experiment`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::caterpillars::balance_suggestion_matrix;
use crate::classifier::{
    extract_caterpillar_features, extract_degree_features, train_logistic, FeatureKind,
    LogisticConfig, LogisticModel,
};
use crate::factorization::{predict_mf, train_mf, train_mf_wbt, EmbeddingPair, MfConfig};
use crate::graph::{
    split_edges, Side, Sign, SignedBipartiteGraph, SignedEdge, SplitSpec,
};
use crate::metrics::{auc, f1, Method, MetricsReport, PredictionRecord};
use crate::randomwalk::{
    assemble_system, build_projection, predict_rw, propagate_prediction_block, PredictionBlock,
    ProjectionGraph,
};
use crate::{Error, Result};

/// Walk-method hyperparameters (used by the projection walk; the lazy walk
/// keeps only `damping`, `tolerance`, and `max_iterations`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkConfig {
    pub omega: f64,
    pub delta_pos: i64,
    pub delta_neg: i64,
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            omega: 2.0,
            delta_pos: 0,
            delta_neg: 0,
            damping: 0.85,
            tolerance: 1e-8,
            max_iterations: 200,
        }
    }
}

/// One bundle of hyperparameters covering every method family; each method
/// reads only its own section.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub logistic: LogisticConfig,
    pub mf: MfConfig,
    pub walk: WalkConfig,
}

impl ExperimentConfig {
    /// The per-method defaults. They differ from `Self::default()` only for
    /// the balance-aware factorization, which needs implicit links switched
    /// on to be distinct from plain factorization.
    pub fn default_for(method: Method) -> Self {
        let mut config = Self::default();
        if method == Method::MfWbt {
            config.mf.alpha = 0.5;
            config.mf.beta = 0.5;
            config.mf.k_pos = 1000;
            config.mf.k_neg = 10000;
        }
        config
    }

    /// Overrides every trainer's seed (the walk methods are deterministic
    /// and have none).
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.logistic.seed = seed;
        self.mf.seed = seed;
        self
    }

    /// The factorization config a method actually trains with: the plain
    /// variant never fits implicit links, whatever the config says.
    pub fn effective_mf(&self, method: Method) -> MfConfig {
        if method == Method::Mf {
            MfConfig {
                alpha: 0.0,
                beta: 0.0,
                k_pos: 0,
                k_neg: 0,
                ..self.mf
            }
        } else {
            self.mf
        }
    }

    /// The hyperparameters a method effectively ran with, for reports.
    pub fn hyperparameters_for(&self, method: Method) -> serde_json::Value {
        match method {
            Method::ScDegree | Method::ScCaterpillar => {
                serde_json::to_value(self.logistic).expect("config serializes")
            }
            Method::Mf | Method::MfWbt => {
                serde_json::to_value(self.effective_mf(method)).expect("config serializes")
            }
            Method::LazyRw => serde_json::json!({
                "projections": "identity",
                "omega": 1.0,
                "damping": self.walk.damping,
                "tolerance": self.walk.tolerance,
                "max_iterations": self.walk.max_iterations,
            }),
            Method::Sbrw => serde_json::to_value(self.walk).expect("config serializes"),
        }
    }
}

/// A trained model of any method family.
#[derive(Clone, Debug, PartialEq)]
pub enum FittedMethod {
    Logistic(LogisticModel),
    Embeddings(EmbeddingPair),
    Walk(PredictionBlock),
}

/// Trains `method` on (exactly) the given graph.
pub fn fit(
    train: &SignedBipartiteGraph,
    method: Method,
    config: &ExperimentConfig,
) -> Result<FittedMethod> {
    match method {
        Method::ScDegree | Method::ScCaterpillar => {
            let kind = if method == Method::ScDegree {
                FeatureKind::Degree
            } else {
                FeatureKind::Caterpillar
            };
            let mut features = Vec::with_capacity(train.edge_count());
            for edge in train.edges() {
                features.push(match kind {
                    FeatureKind::Degree => {
                        extract_degree_features(train, edge.buyer, edge.seller)?
                    }
                    FeatureKind::Caterpillar => {
                        extract_caterpillar_features(train, edge.buyer, edge.seller)?
                    }
                });
            }
            let labels: Vec<Sign> = train.edges().iter().map(|e| e.sign).collect();
            Ok(FittedMethod::Logistic(train_logistic(
                kind,
                &features,
                &labels,
                &config.logistic,
            )?))
        }
        Method::Mf => Ok(FittedMethod::Embeddings(train_mf(
            train,
            &config.effective_mf(method),
        )?)),
        Method::MfWbt => {
            let suggestions = balance_suggestion_matrix(train);
            Ok(FittedMethod::Embeddings(train_mf_wbt(
                train,
                &suggestions,
                &config.mf,
            )?))
        }
        Method::LazyRw => {
            let pb = ProjectionGraph::identity(Side::Buyer, train.n_buyers());
            let ps = ProjectionGraph::identity(Side::Seller, train.n_sellers());
            let system = assemble_system(train, &pb, &ps, 1.0, config.walk.damping)?;
            Ok(FittedMethod::Walk(propagate_prediction_block(
                &system,
                config.walk.tolerance,
                config.walk.max_iterations,
            )?))
        }
        Method::Sbrw => {
            let pb = build_projection(
                train,
                Side::Buyer,
                config.walk.delta_pos,
                config.walk.delta_neg,
            )?;
            let ps = build_projection(
                train,
                Side::Seller,
                config.walk.delta_pos,
                config.walk.delta_neg,
            )?;
            let system =
                assemble_system(train, &pb, &ps, config.walk.omega, config.walk.damping)?;
            Ok(FittedMethod::Walk(propagate_prediction_block(
                &system,
                config.walk.tolerance,
                config.walk.max_iterations,
            )?))
        }
    }
}

/// Scores one pair with the fitted model; the model never sees the pair's
/// own edge (features and scores all come from the training graph).
pub fn score_pair(
    fitted: &FittedMethod,
    train: &SignedBipartiteGraph,
    buyer: u32,
    seller: u32,
) -> Result<(f64, Sign)> {
    match fitted {
        FittedMethod::Logistic(model) => {
            let features = match model.feature_kind {
                FeatureKind::Degree => extract_degree_features(train, buyer, seller)?,
                FeatureKind::Caterpillar => {
                    extract_caterpillar_features(train, buyer, seller)?
                }
            };
            model.predict(&features)
        }
        FittedMethod::Embeddings(embeddings) => predict_mf(embeddings, buyer, seller),
        FittedMethod::Walk(block) => predict_rw(block, buyer, seller),
    }
}

/// [`score_pair`], but pairs with an endpoint of zero training degree are
/// *unscorable*: no method has evidence about them, so they uniformly get
/// score `0.0` and the training-majority sign.
pub fn score_with_fallback(
    fitted: &FittedMethod,
    train: &SignedBipartiteGraph,
    buyer: u32,
    seller: u32,
) -> Result<(f64, Sign)> {
    let (bp, bn) = train.signed_degrees(Side::Buyer, buyer)?;
    let (sp, sn) = train.signed_degrees(Side::Seller, seller)?;
    if bp + bn == 0 || sp + sn == 0 {
        return Ok((0.0, train.majority_sign()));
    }
    score_pair(fitted, train, buyer, seller)
}

fn evaluate_edges(
    fitted: &FittedMethod,
    train: &SignedBipartiteGraph,
    edges: &[SignedEdge],
    method: Method,
) -> Result<Vec<PredictionRecord>> {
    let mut records = Vec::with_capacity(edges.len());
    for edge in edges {
        let (score, predicted_sign) =
            score_with_fallback(fitted, train, edge.buyer, edge.seller)?;
        records.push(PredictionRecord {
            buyer_id: train.buyer_id(edge.buyer).to_string(),
            seller_id: train.seller_id(edge.seller).to_string(),
            true_sign: edge.sign,
            score,
            predicted_sign,
            method,
        });
    }
    Ok(records)
}

/// A finished evaluation: the headline report plus every scored pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutcome {
    pub report: MetricsReport,
    pub predictions: Vec<PredictionRecord>,
}

/// Split → fit → score the **test** edges.
pub fn run_experiment(
    graph: &SignedBipartiteGraph,
    dataset: &str,
    method: Method,
    config: &ExperimentConfig,
    split: &SplitSpec,
) -> Result<ExperimentOutcome> {
    let parts = split_edges(graph, split)?;
    let fitted = fit(&parts.train, method, config)?;
    let predictions = evaluate_edges(&fitted, &parts.train, &parts.test, method)?;
    let auc_value = auc(&predictions)?;
    let f1_value = f1(&predictions);
    Ok(ExperimentOutcome {
        report: MetricsReport {
            method,
            dataset: dataset.to_string(),
            auc: auc_value,
            f1: f1_value,
            split_seed: split.seed,
            hyperparameters: config.hyperparameters_for(method),
        },
        predictions,
    })
}

/// Every candidate's validation report plus the index of the winner.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSearchOutcome {
    pub best_index: usize,
    pub validation_reports: Vec<MetricsReport>,
}

impl GridSearchOutcome {
    pub fn best(&self) -> &MetricsReport {
        &self.validation_reports[self.best_index]
    }
}

/// Fits every configuration on the (one, shared) training split and ranks
/// them by **validation** AUC. Ties keep the earliest candidate.
pub fn grid_search(
    graph: &SignedBipartiteGraph,
    dataset: &str,
    method: Method,
    grid: &[ExperimentConfig],
    split: &SplitSpec,
) -> Result<GridSearchOutcome> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(
            "grid search needs at least one candidate configuration".to_string(),
        ));
    }
    let parts = split_edges(graph, split)?;
    let mut validation_reports = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64)> = None;
    for (index, config) in grid.iter().enumerate() {
        let fitted = fit(&parts.train, method, config)?;
        let records = evaluate_edges(&fitted, &parts.train, &parts.validation, method)?;
        let auc_value = auc(&records)?;
        validation_reports.push(MetricsReport {
            method,
            dataset: dataset.to_string(),
            auc: auc_value,
            f1: f1(&records),
            split_seed: split.seed,
            hyperparameters: config.hyperparameters_for(method),
        });
        if best.is_none_or(|(_, incumbent)| auc_value > incumbent) {
            best = Some((index, auc_value));
        }
    }
    let (best_index, _) = best.expect("grid is non-empty");
    Ok(GridSearchOutcome {
        best_index,
        validation_reports,
    })
}

/// Grid search plus a final test-split run of the winning configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub search: GridSearchOutcome,
    pub best_config: ExperimentConfig,
    pub outcome: ExperimentOutcome,
}

pub fn run_sweep(
    graph: &SignedBipartiteGraph,
    dataset: &str,
    method: Method,
    grid: &[ExperimentConfig],
    split: &SplitSpec,
) -> Result<SweepOutcome> {
    let search = grid_search(graph, dataset, method, grid, split)?;
    let best_config = grid[search.best_index];
    let outcome = run_experiment(graph, dataset, method, &best_config, split)?;
    Ok(SweepOutcome {
        search,
        best_config,
        outcome,
    })
}

/// The stock search grid per method. Methods without a gridded axis get the
/// one-point grid of their defaults, so sweeping them is the same as
/// evaluating them.
pub fn default_grid(method: Method) -> Vec<ExperimentConfig> {
    let base = ExperimentConfig::default_for(method);
    match method {
        Method::ScDegree | Method::ScCaterpillar | Method::LazyRw => vec![base],
        Method::Mf => [1e-4, 1e-3, 1e-2]
            .into_iter()
            .map(|l2| {
                let mut c = base;
                c.mf.l2_penalty = l2;
                c
            })
            .collect(),
        Method::MfWbt => {
            let mut grid = Vec::new();
            for weight in [0.0, 0.25, 0.5, 1.0] {
                for k_pos in [0usize, 1000, 10000] {
                    for k_neg in [0usize, 1000, 10000] {
                        let mut c = base;
                        c.mf.alpha = weight;
                        c.mf.beta = weight;
                        c.mf.k_pos = k_pos;
                        c.mf.k_neg = k_neg;
                        grid.push(c);
                    }
                }
            }
            grid
        }
        Method::Sbrw => {
            let mut grid = Vec::new();
            for omega in [1.0, 2.0, 3.0, 5.0] {
                for delta_pos in [0, 25, 50, 75, 100] {
                    for delta_neg in [0, -25, -50, -75, -100] {
                        let mut c = base;
                        c.walk.omega = omega;
                        c.walk.delta_pos = delta_pos;
                        c.walk.delta_neg = delta_neg;
                        grid.push(c);
                    }
                }
            }
            grid
        }
    }
}

/// Grid axes as lists, for configuration files. An absent axis keeps the
/// base config's value; axes that don't apply to the chosen method are
/// ignored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub omega: Option<Vec<f64>>,
    pub delta_pos: Option<Vec<i64>>,
    pub delta_neg: Option<Vec<i64>>,
    pub alpha_beta: Option<Vec<f64>>,
    pub k_pos: Option<Vec<usize>>,
    pub k_neg: Option<Vec<usize>>,
    pub l2_penalty: Option<Vec<f64>>,
}

impl GridSpec {
    pub fn expand(&self, base: &ExperimentConfig, method: Method) -> Vec<ExperimentConfig> {
        match method {
            Method::LazyRw => vec![*base],
            Method::ScDegree | Method::ScCaterpillar => self
                .l2_penalty
                .clone()
                .unwrap_or_else(|| vec![base.logistic.l2_penalty])
                .into_iter()
                .map(|l2| {
                    let mut c = *base;
                    c.logistic.l2_penalty = l2;
                    c
                })
                .collect(),
            Method::Mf => self
                .l2_penalty
                .clone()
                .unwrap_or_else(|| vec![base.mf.l2_penalty])
                .into_iter()
                .map(|l2| {
                    let mut c = *base;
                    c.mf.l2_penalty = l2;
                    c
                })
                .collect(),
            Method::MfWbt => {
                let weights = self
                    .alpha_beta
                    .clone()
                    .unwrap_or_else(|| vec![base.mf.alpha]);
                let k_pos = self.k_pos.clone().unwrap_or_else(|| vec![base.mf.k_pos]);
                let k_neg = self.k_neg.clone().unwrap_or_else(|| vec![base.mf.k_neg]);
                let l2s = self
                    .l2_penalty
                    .clone()
                    .unwrap_or_else(|| vec![base.mf.l2_penalty]);
                let mut grid = Vec::new();
                for &weight in &weights {
                    for &kp in &k_pos {
                        for &kn in &k_neg {
                            for &l2 in &l2s {
                                let mut c = *base;
                                c.mf.alpha = weight;
                                c.mf.beta = weight;
                                c.mf.k_pos = kp;
                                c.mf.k_neg = kn;
                                c.mf.l2_penalty = l2;
                                grid.push(c);
                            }
                        }
                    }
                }
                grid
            }
            Method::Sbrw => {
                let omegas = self.omega.clone().unwrap_or_else(|| vec![base.walk.omega]);
                let dps = self
                    .delta_pos
                    .clone()
                    .unwrap_or_else(|| vec![base.walk.delta_pos]);
                let dns = self
                    .delta_neg
                    .clone()
                    .unwrap_or_else(|| vec![base.walk.delta_neg]);
                let mut grid = Vec::new();
                for &omega in &omegas {
                    for &dp in &dps {
                        for &dn in &dns {
                            let mut c = *base;
                            c.walk.omega = omega;
                            c.walk.delta_pos = dp;
                            c.walk.delta_neg = dn;
                            grid.push(c);
                        }
                    }
                }
                grid
            }
        }
    }
}

fn default_dataset_label() -> String {
    "dataset".to_string()
}

/// A full experiment description, loadable from JSON (the CLI's `--config`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub method: Method,
    #[serde(default = "default_dataset_label")]
    pub dataset: String,
    #[serde(default)]
    pub split: SplitSpec,
    /// When set, overrides `split.seed` and every trainer seed at once.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Absent means "the method's defaults" ([`ExperimentConfig::default_for`]).
    #[serde(default)]
    pub config: Option<ExperimentConfig>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
}

impl ExperimentSpec {
    /// Fills the config default and applies the `seed` override, returning
    /// the final split and config.
    pub fn resolve(&self) -> (SplitSpec, ExperimentConfig) {
        let mut split = self.split;
        let mut config = self
            .config
            .unwrap_or_else(|| ExperimentConfig::default_for(self.method));
        if let Some(seed) = self.seed {
            split.seed = seed;
            config = config.with_seed(seed);
        }
        (split, config)
    }
}

/// Generates a two-faction planted graph: each node joins one of two
/// factions by a fair coin; each (buyer, seller) pair gets an edge with
/// probability `density`; the edge is positive exactly when the factions
/// match, then flipped with probability `noise`.
///
/// Both the edge coin and the flip coin are drawn for *every* pair, so two
/// calls with the same seed but different `noise` produce the same topology
/// with differently corrupted signs. With `noise = 0` the sign matrix has
/// rank-one block structure, so every butterfly is balanced.
pub fn generate_planted_graph(
    n_buyers: usize,
    n_sellers: usize,
    density: f64,
    noise: f64,
    seed: u64,
) -> Result<SignedBipartiteGraph> {
    if !(density.is_finite() && density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    if !(noise.is_finite() && (0.0..0.5).contains(&noise)) {
        return Err(Error::InvalidParameter(format!(
            "noise must lie in [0, 0.5), got {noise}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let buyer_factions: Vec<bool> = (0..n_buyers).map(|_| rng.random_bool(0.5)).collect();
    let seller_factions: Vec<bool> = (0..n_sellers).map(|_| rng.random_bool(0.5)).collect();
    let mut edges = Vec::new();
    for (b, &bf) in buyer_factions.iter().enumerate() {
        for (s, &sf) in seller_factions.iter().enumerate() {
            // Both draws happen unconditionally so the edge set depends only
            // on (sizes, density, seed), never on the noise level.
            let present = rng.random_bool(density);
            let flip = rng.random_bool(noise);
            if present {
                let aligned = bf == sf;
                let positive = aligned != flip;
                edges.push(SignedEdge {
                    buyer: b as u32,
                    seller: s as u32,
                    sign: if positive { Sign::Positive } else { Sign::Negative },
                });
            }
        }
    }
    SignedBipartiteGraph::from_indexed_edges(n_buyers, n_sellers, edges)
}
