//! Signed score propagation over the bipartite graph and its one-mode
//! projections.
//!
//! The predictor assembles one signed transition matrix over the combined
//! node set (buyers first, then sellers):
//!
//! ```text
//!     Â = normalize ⎡ P̂_B     ω·B̂  ⎤
//!                   ⎣ ω·B̂ᵀ'   P̂_S  ⎦
//! ```
//!
//! where `B̂` is the sign matrix with each buyer row divided by the buyer's
//! degree, `B̂ᵀ'` is its transpose with each *seller* row divided by the
//! seller's degree, and `P̂_B`, `P̂_S` are same-side projection graphs, each
//! row divided by its total absolute weight. A projection connects two
//! same-side nodes by `v = (#common neighbors rated with agreeing signs) −
//! (#rated with disagreeing signs)`, kept only when `v` is nonzero and
//! outside the open band `(delta_neg, delta_pos)`. After assembly every row
//! is normalized once more so its absolute values sum to one (rows with no
//! entries stay zero); `ω` therefore sets the *ratio* of bipartite to
//! projection mass in a row, not an absolute scale.
//!
//! Scores come from the damped fixed point `Y = (1−c)·I + c·Â·Y`, solved
//! per column by iteration (the spectral radius is at most `c < 1`, so the
//! iteration contracts geometrically). The score of pair `(b, s)` is the
//! entry of `Y` at row `b`, column `n_buyers + s`; its sign is the predicted
//! link sign.
//!
//! Two standard configurations:
//!
//! - **Lazy walk**: identity projections and `ω = 1`, so every connected
//!   node keeps exactly half of its mass on itself and spreads the other
//!   half over its signed bipartite edges.
//! - **Projection walk**: thresholded projections and tunable `ω`, letting
//!   same-side agreement patterns carry mass between nodes that share no
//!   edge.

use std::io::Write;

use rayon::prelude::*;

use crate::graph::{Side, Sign, SignedBipartiteGraph};
use crate::{Error, Result};

/// A weighted same-side graph: node `a` links to node `b` with the net
/// agreement weight of their common neighborhoods.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionGraph {
    side: Side,
    n: usize,
    rows: Vec<Vec<(u32, i64)>>,
    delta_pos: i64,
    delta_neg: i64,
}

impl ProjectionGraph {
    /// The identity projection: every node carries a unit self-loop and
    /// nothing else. This is not a thresholding of any agreement count — it
    /// is the lazy walk's "stay put" mass, provided in projection form so
    /// both walk flavors assemble identically.
    pub fn identity(side: Side, n: usize) -> Self {
        Self {
            side,
            n,
            rows: (0..n as u32).map(|i| vec![(i, 1)]).collect(),
            delta_pos: 0,
            delta_neg: 0,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// The stored weight between two nodes (0 when absent).
    pub fn weight(&self, a: u32, b: u32) -> i64 {
        self.rows
            .get(a as usize)
            .and_then(|row| row.iter().find(|&&(j, _)| j == b))
            .map_or(0, |&(_, w)| w)
    }

    /// Number of stored directed entries (symmetric pairs count twice,
    /// self-loops once).
    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn neighbors(&self, a: u32) -> &[(u32, i64)] {
        &self.rows[a as usize]
    }
}

/// Builds the thresholded one-mode projection of `side`.
///
/// `delta_pos ≥ 0` and `delta_neg ≤ 0` bound an open suppression band:
/// a pair's net agreement `v` becomes an edge iff `v ≠ 0` and
/// `v ≥ delta_pos || v ≤ delta_neg`. With both thresholds 0, every nonzero
/// agreement survives.
pub fn build_projection(
    graph: &SignedBipartiteGraph,
    side: Side,
    delta_pos: i64,
    delta_neg: i64,
) -> Result<ProjectionGraph> {
    if delta_pos < 0 {
        return Err(Error::InvalidParameter(format!(
            "positive projection threshold must be non-negative, got {delta_pos}"
        )));
    }
    if delta_neg > 0 {
        return Err(Error::InvalidParameter(format!(
            "negative projection threshold must be non-positive, got {delta_neg}"
        )));
    }

    let n = match side {
        Side::Buyer => graph.n_buyers(),
        Side::Seller => graph.n_sellers(),
    };
    let neighbors = |i: u32| match side {
        Side::Buyer => graph.buyer_neighbors(i),
        Side::Seller => graph.seller_neighbors(i),
    };
    let cross_neighbors = |j: u32| match side {
        Side::Buyer => graph.seller_neighbors(j),
        Side::Seller => graph.buyer_neighbors(j),
    };

    let mut rows: Vec<Vec<(u32, i64)>> = vec![Vec::new(); n];
    let mut net: Vec<i64> = vec![0; n];
    let mut touched: Vec<u32> = Vec::new();
    for a in 0..n as u32 {
        for &(mid, sign_a) in neighbors(a) {
            for &(b, sign_b) in cross_neighbors(mid) {
                if b == a {
                    continue;
                }
                let delta = if sign_a == sign_b { 1 } else { -1 };
                if net[b as usize] == 0 {
                    touched.push(b);
                }
                net[b as usize] += delta;
            }
        }
        touched.sort_unstable();
        for &b in &touched {
            let v = net[b as usize];
            net[b as usize] = 0;
            if v != 0 && (v >= delta_pos || v <= delta_neg) {
                rows[a as usize].push((b, v));
            }
        }
        touched.clear();
    }

    Ok(ProjectionGraph {
        side,
        n,
        rows,
        delta_pos,
        delta_neg,
    })
}

/// The assembled, fully row-normalized signed transition matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagationSystem {
    n_buyers: usize,
    n_sellers: usize,
    rows: Vec<Vec<(u32, f64)>>,
    damping: f64,
}

impl PropagationSystem {
    pub fn n_buyers(&self) -> usize {
        self.n_buyers
    }

    pub fn n_sellers(&self) -> usize {
        self.n_sellers
    }

    pub fn node_count(&self) -> usize {
        self.n_buyers + self.n_sellers
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn row(&self, i: usize) -> &[(u32, f64)] {
        &self.rows[i]
    }
}

/// Builds the block matrix described in the module docs and row-normalizes
/// it. `omega` weighs bipartite edges against projection edges; `damping`
/// is the restart-complement `c` of the fixed point.
pub fn assemble_system(
    graph: &SignedBipartiteGraph,
    buyer_projection: &ProjectionGraph,
    seller_projection: &ProjectionGraph,
    omega: f64,
    damping: f64,
) -> Result<PropagationSystem> {
    if buyer_projection.side != Side::Buyer || buyer_projection.n != graph.n_buyers() {
        return Err(Error::InvalidParameter(format!(
            "buyer projection covers {} {} nodes; graph has {} buyers",
            buyer_projection.n,
            match buyer_projection.side {
                Side::Buyer => "buyer",
                Side::Seller => "seller",
            },
            graph.n_buyers()
        )));
    }
    if seller_projection.side != Side::Seller || seller_projection.n != graph.n_sellers() {
        return Err(Error::InvalidParameter(format!(
            "seller projection covers {} nodes; graph has {} sellers",
            seller_projection.n,
            graph.n_sellers()
        )));
    }
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "bipartite weight omega must be positive, got {omega}"
        )));
    }
    if !(damping.is_finite() && damping > 0.0 && damping < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "damping must lie strictly between 0 and 1, got {damping}"
        )));
    }

    let n_buyers = graph.n_buyers();
    let n_sellers = graph.n_sellers();
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(n_buyers + n_sellers);

    // Buyer rows: normalized projection block, then ω × normalized sign row.
    for b in 0..n_buyers as u32 {
        let mut row: Vec<(u32, f64)> = Vec::new();
        push_projection_entries(&mut row, buyer_projection.neighbors(b), 0);
        let edges = graph.buyer_neighbors(b);
        if !edges.is_empty() {
            let scale = omega / edges.len() as f64;
            for &(s, sign) in edges {
                row.push((n_buyers as u32 + s, sign.value() * scale));
            }
        }
        rows.push(normalize_row(row));
    }

    // Seller rows: ω × transpose block normalized by the *seller's* degree,
    // then the seller projection.
    for s in 0..n_sellers as u32 {
        let mut row: Vec<(u32, f64)> = Vec::new();
        let edges = graph.seller_neighbors(s);
        if !edges.is_empty() {
            let scale = omega / edges.len() as f64;
            for &(b, sign) in edges {
                row.push((b, sign.value() * scale));
            }
        }
        push_projection_entries(&mut row, seller_projection.neighbors(s), n_buyers as u32);
        rows.push(normalize_row(row));
    }

    Ok(PropagationSystem {
        n_buyers,
        n_sellers,
        rows,
        damping,
    })
}

fn push_projection_entries(row: &mut Vec<(u32, f64)>, entries: &[(u32, i64)], offset: u32) {
    let total: i64 = entries.iter().map(|&(_, w)| w.abs()).sum();
    if total == 0 {
        return;
    }
    let scale = 1.0 / total as f64;
    for &(j, w) in entries {
        row.push((offset + j, w as f64 * scale));
    }
}

fn normalize_row(mut row: Vec<(u32, f64)>) -> Vec<(u32, f64)> {
    let total: f64 = row.iter().map(|&(_, w)| w.abs()).sum();
    if total > 0.0 {
        for entry in &mut row {
            entry.1 /= total;
        }
    }
    row.sort_unstable_by_key(|&(j, _)| j);
    row
}

/// The full fixed-point matrix `Y`, indexed by combined node ids
/// (buyers `0..n_buyers`, sellers `n_buyers..`).
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    n_buyers: usize,
    n_sellers: usize,
    values: Vec<f64>, // row-major (n_buyers + n_sellers)²
}

impl ScoreMatrix {
    pub fn node_count(&self) -> usize {
        self.n_buyers + self.n_sellers
    }

    pub fn get(&self, row: usize, column: usize) -> f64 {
        self.values[row * self.node_count() + column]
    }

    /// The link-sign score of a (buyer, seller) pair.
    pub fn prediction_score(&self, buyer: u32, seller: u32) -> Result<f64> {
        check_pair(self.n_buyers, self.n_sellers, buyer, seller)?;
        Ok(self.get(buyer as usize, self.n_buyers + seller as usize))
    }

    /// Extracts the buyer-rows × seller-columns block used for prediction.
    pub fn prediction_block(&self) -> PredictionBlock {
        let mut values = Vec::with_capacity(self.n_buyers * self.n_sellers);
        for b in 0..self.n_buyers {
            for s in 0..self.n_sellers {
                values.push(self.get(b, self.n_buyers + s));
            }
        }
        PredictionBlock {
            n_buyers: self.n_buyers,
            n_sellers: self.n_sellers,
            values,
        }
    }
}

/// Just the buyer-row × seller-column corner of `Y` — all any link-sign
/// prediction needs, at a fraction of the full matrix's footprint.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionBlock {
    n_buyers: usize,
    n_sellers: usize,
    values: Vec<f64>, // row-major n_buyers × n_sellers
}

impl PredictionBlock {
    pub fn n_buyers(&self) -> usize {
        self.n_buyers
    }

    pub fn n_sellers(&self) -> usize {
        self.n_sellers
    }

    pub fn score(&self, buyer: u32, seller: u32) -> Result<f64> {
        check_pair(self.n_buyers, self.n_sellers, buyer, seller)?;
        Ok(self.values[buyer as usize * self.n_sellers + seller as usize])
    }
}

fn check_pair(n_buyers: usize, n_sellers: usize, buyer: u32, seller: u32) -> Result<()> {
    if buyer as usize >= n_buyers {
        return Err(Error::IndexOutOfRange {
            side: "buyer",
            index: buyer as usize,
            limit: n_buyers,
        });
    }
    if seller as usize >= n_sellers {
        return Err(Error::IndexOutOfRange {
            side: "seller",
            index: seller as usize,
            limit: n_sellers,
        });
    }
    Ok(())
}

/// Score and thresholded sign for a pair (`score ≥ 0` → positive).
pub fn predict_rw(block: &PredictionBlock, buyer: u32, seller: u32) -> Result<(f64, Sign)> {
    let score = block.score(buyer, seller)?;
    Ok((score, Sign::from_score(score)))
}

/// Solves `y = (1−c)·e_k + c·Â·y` for one unit column by fixed-point
/// iteration, returning the solution and the max-norm update trace.
fn solve_column(
    rows: &[Vec<(u32, f64)>],
    damping: f64,
    k: usize,
    tolerance: f64,
    max_iterations: usize,
) -> std::result::Result<(Vec<f64>, Vec<f64>), Error> {
    let n = rows.len();
    let mut y = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut trace = Vec::new();
    for _ in 0..max_iterations {
        let mut update: f64 = 0.0;
        for (i, row) in rows.iter().enumerate() {
            let mut acc = 0.0;
            for &(j, w) in row {
                acc += w * y[j as usize];
            }
            let value = damping * acc + if i == k { 1.0 - damping } else { 0.0 };
            update = update.max((value - y[i]).abs());
            next[i] = value;
        }
        std::mem::swap(&mut y, &mut next);
        trace.push(update);
        if update <= tolerance {
            return Ok((y, trace));
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
        last_update: trace.last().copied().unwrap_or(f64::NAN),
    })
}

/// Solves the fixed point for every column, producing the full `Y`.
///
/// Memory is quadratic in the node count; for prediction alone prefer
/// [`propagate_prediction_block`].
pub fn propagate(
    system: &PropagationSystem,
    tolerance: f64,
    max_iterations: usize,
) -> Result<ScoreMatrix> {
    check_iteration_parameters(tolerance, max_iterations)?;
    let n = system.node_count();
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            solve_column(&system.rows, system.damping, k, tolerance, max_iterations)
                .map(|(y, _)| y)
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut values = vec![0.0; n * n];
    for (k, column) in columns.iter().enumerate() {
        for (i, &value) in column.iter().enumerate() {
            values[i * n + k] = value;
        }
    }
    Ok(ScoreMatrix {
        n_buyers: system.n_buyers,
        n_sellers: system.n_sellers,
        values,
    })
}

/// Solves only the seller columns and keeps their buyer rows — the exact
/// set of entries link-sign prediction reads.
pub fn propagate_prediction_block(
    system: &PropagationSystem,
    tolerance: f64,
    max_iterations: usize,
) -> Result<PredictionBlock> {
    check_iteration_parameters(tolerance, max_iterations)?;
    let n_buyers = system.n_buyers;
    let n_sellers = system.n_sellers;
    let columns: Vec<Vec<f64>> = (0..n_sellers)
        .into_par_iter()
        .map(|s| {
            solve_column(
                &system.rows,
                system.damping,
                n_buyers + s,
                tolerance,
                max_iterations,
            )
            .map(|(y, _)| y)
        })
        .collect::<std::result::Result<_, _>>()?;
    let mut values = vec![0.0; n_buyers * n_sellers];
    for (s, column) in columns.iter().enumerate() {
        for b in 0..n_buyers {
            values[b * n_sellers + s] = column[b];
        }
    }
    Ok(PredictionBlock {
        n_buyers,
        n_sellers,
        values,
    })
}

fn check_iteration_parameters(tolerance: f64, max_iterations: usize) -> Result<()> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    if max_iterations == 0 {
        return Err(Error::InvalidParameter(
            "iteration budget must be at least 1".to_string(),
        ));
    }
    Ok(())
}

/// Dumps every pair's score as TSV (`buyer_id<TAB>seller_id<TAB>score`).
pub fn write_score_block(
    block: &PredictionBlock,
    graph: &SignedBipartiteGraph,
    mut writer: impl Write,
) -> Result<()> {
    if graph.n_buyers() != block.n_buyers || graph.n_sellers() != block.n_sellers {
        return Err(Error::InvalidParameter(format!(
            "score block is {}×{}, graph is {}×{}",
            block.n_buyers,
            block.n_sellers,
            graph.n_buyers(),
            graph.n_sellers()
        )));
    }
    writeln!(writer, "# buyer_id\tseller_id\tscore")?;
    for b in 0..block.n_buyers as u32 {
        for s in 0..block.n_sellers as u32 {
            writeln!(
                writer,
                "{}\t{}\t{:.6}",
                graph.buyer_id(b),
                graph.seller_id(s),
                block.score(b, s)?
            )?;
        }
    }
    Ok(())
}
