//! Evaluation: prediction records, rank AUC, positive-class F1, and the
//! method vocabulary shared by the harness and the CLI.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::Sign;
use crate::{Error, Result};

/// The six link-sign predictors this crate ships.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Logistic regression on signed-degree features.
    #[serde(rename = "SCd")]
    ScDegree,
    /// Logistic regression on caterpillar sign-pattern features.
    #[serde(rename = "SCsc")]
    ScCaterpillar,
    /// Hinge-loss matrix factorization on observed edges.
    #[serde(rename = "MF")]
    Mf,
    /// Matrix factorization with implicit balance-suggested links.
    #[serde(rename = "MFwBT")]
    MfWbt,
    /// Lazy signed random walk (identity projections, unit bipartite weight).
    #[serde(rename = "LazyRW")]
    LazyRw,
    /// Signed random walk over the bipartite graph plus thresholded
    /// projections.
    #[serde(rename = "SBRW")]
    Sbrw,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::ScDegree,
        Method::ScCaterpillar,
        Method::Mf,
        Method::MfWbt,
        Method::LazyRw,
        Method::Sbrw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::ScDegree => "SCd",
            Method::ScCaterpillar => "SCsc",
            Method::Mf => "MF",
            Method::MfWbt => "MFwBT",
            Method::LazyRw => "LazyRW",
            Method::Sbrw => "SBRW",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown method {s:?}; expected one of SCd, SCsc, MF, MFwBT, LazyRW, SBRW"
                ))
            })
    }
}

/// One scored held-out pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub buyer_id: String,
    pub seller_id: String,
    pub true_sign: Sign,
    pub score: f64,
    pub predicted_sign: Sign,
    pub method: Method,
}

/// One experiment's headline numbers, ready to serialize.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub method: Method,
    pub dataset: String,
    pub auc: f64,
    pub f1: f64,
    pub split_seed: u64,
    pub hyperparameters: serde_json::Value,
}

/// Rank AUC (Mann-Whitney): the probability that a uniformly random
/// positive pair outscores a uniformly random negative one, with ties
/// counting half. Computed from average ranks, so tied scores are handled
/// exactly.
pub fn auc(records: &[PredictionRecord]) -> Result<f64> {
    if let Some(bad) = records.iter().find(|r| !r.score.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "non-finite score {} for pair ({}, {})",
            bad.score, bad.buyer_id, bad.seller_id
        )));
    }
    let n_pos = records.iter().filter(|r| r.true_sign.is_positive()).count();
    let n_neg = records.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateMetric(format!(
            "AUC needs both true classes; got {n_pos} positive and {n_neg} negative records"
        )));
    }

    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| records[a].score.total_cmp(&records[b].score));

    let mut positive_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len()
            && records[order[end]].score == records[order[start]].score
        {
            end += 1;
        }
        // Ranks are 1-based; a tied block [start, end) shares the average.
        let average_rank = (start + 1 + end) as f64 / 2.0;
        for &index in &order[start..end] {
            if records[index].true_sign.is_positive() {
                positive_rank_sum += average_rank;
            }
        }
        start = end;
    }

    let n_pos = n_pos as f64;
    Ok((positive_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg as f64))
}

/// F1 of the positive class from the thresholded predictions. Returns 0 when
/// there are no true positives hit (the precision/recall product is then 0,
/// not undefined).
pub fn f1(records: &[PredictionRecord]) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fn_ = 0usize;
    for r in records {
        match (r.predicted_sign.is_positive(), r.true_sign.is_positive()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Dumps prediction records as TSV.
pub fn write_predictions(records: &[PredictionRecord], mut writer: impl Write) -> Result<()> {
    writeln!(
        writer,
        "# buyer_id\tseller_id\ttrue_sign\tscore\tpredicted_sign\tmethod"
    )?;
    for r in records {
        writeln!(
            writer,
            "{}\t{}\t{}\t{:.6}\t{}\t{}",
            r.buyer_id, r.seller_id, r.true_sign, r.score, r.predicted_sign, r.method
        )?;
    }
    Ok(())
}
