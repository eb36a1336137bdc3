//! Signed caterpillars and the balance-suggestion scores Ŝ.
//!
//! A *caterpillar* between buyer `b_i` and seller `s_j` is a simple 3-edge
//! path `b_i — s_k — b_l — s_j` on four distinct nodes (`s_k ≠ s_j`,
//! `b_l ≠ b_i`); it is one edge short of a butterfly, and adding the
//! `(b_i, s_j)` link would close it into one. A path is *balanced* when it
//! has an even number of negative edges: closing a balanced path with a
//! positive link — or an unbalanced path with a negative link — creates a
//! balanced butterfly.
//!
//! For a non-linked pair, the net effect of all its caterpillars is the
//! single integer
//!
//! ```text
//! Ŝ_ij = #balanced paths − #unbalanced paths = [B Bᵀ B]_ij   (B_ij = 0)
//! ```
//!
//! where `B` is the signed biadjacency matrix: each length-3 walk
//! `i → k → l → j` contributes the product of its three signs, and when
//! `(i, j)` is not an edge every such walk is automatically simple (a
//! backtracking walk would have to traverse the missing edge). The sign of
//! `Ŝ_ij` is the balance-theory-preferred sign for the link, and `|Ŝ_ij|` is
//! exactly the net gain in balanced-minus-unbalanced butterflies the link
//! would cause. [`balance_suggestion_matrix`] computes all non-linked entries
//! sparsely; [`count_caterpillars`] reports the full 8-way sign-pattern
//! profile for one pair (linked or not — a pair's own edge is never part of
//! its caterpillars, which is what makes the profile usable as a leak-free
//! feature for a supervised classifier).

use std::collections::BTreeMap;
use std::io::Write;

use crate::graph::{Sign, SignedBipartiteGraph};
use crate::{Error, Result};

/// Sign-pattern labels for the three path edges, in the order used by
/// [`CaterpillarProfile::counts`]: `(+,+,+)`, `(+,+,-)`, `(+,-,+)`,
/// `(+,-,-)`, `(-,+,+)`, `(-,+,-)`, `(-,-,+)`, `(-,-,-)`.
pub const CATERPILLAR_PATTERNS: [&str; 8] = [
    "(+,+,+)",
    "(+,+,-)",
    "(+,-,+)",
    "(+,-,-)",
    "(-,+,+)",
    "(-,+,-)",
    "(-,-,+)",
    "(-,-,-)",
];

/// Index of a sign triple in lexicographic order with `+` before `-`.
pub fn pattern_index(first: Sign, second: Sign, third: Sign) -> usize {
    let bit = |s: Sign| usize::from(!s.is_positive());
    bit(first) * 4 + bit(second) * 2 + bit(third)
}

/// Caterpillar counts for one (buyer, seller) pair, split by the sign
/// pattern of the path edges read from the buyer end.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CaterpillarProfile {
    counts: [u64; 8],
}

impl CaterpillarProfile {
    /// Counts in [`CATERPILLAR_PATTERNS`] order.
    pub fn counts(&self) -> [u64; 8] {
        self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Paths with an even number of negative edges.
    pub fn balanced_total(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .filter(|(i, _)| (i.count_ones() % 2) == 0)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn unbalanced_total(&self) -> u64 {
        self.total() - self.balanced_total()
    }

    /// `balanced_total − unbalanced_total` as a signed integer; for a
    /// non-linked pair this equals the Ŝ entry.
    pub fn net_balance(&self) -> i64 {
        self.balanced_total() as i64 - self.unbalanced_total() as i64
    }

    /// The counts as an 8-dimensional feature vector.
    pub fn to_features(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (slot, &c) in out.iter_mut().zip(self.counts.iter()) {
            *slot = c as f64;
        }
        out
    }
}

/// Enumerates the caterpillars of one pair directly: sellers adjacent to the
/// buyer, buyers adjacent to those sellers, filtered to land on `seller`.
/// Node-distinctness makes every counted path simple by construction.
pub fn count_caterpillars(
    graph: &SignedBipartiteGraph,
    buyer: u32,
    seller: u32,
) -> Result<CaterpillarProfile> {
    check_pair(graph, buyer, seller)?;
    let mut profile = CaterpillarProfile::default();
    for &(mid_seller, first) in graph.buyer_neighbors(buyer) {
        if mid_seller == seller {
            continue;
        }
        for &(mid_buyer, second) in graph.seller_neighbors(mid_seller) {
            if mid_buyer == buyer {
                continue;
            }
            if let Some(third) = graph.sign_of(mid_buyer, seller) {
                profile.counts[pattern_index(first, second, third)] += 1;
            }
        }
    }
    Ok(profile)
}

/// Sparse Ŝ: `net_gain` for every non-linked pair that has at least one
/// caterpillar (including pairs whose balanced and unbalanced counts cancel
/// to zero). Entries are ordered by (buyer, seller).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BalanceSuggestionMatrix {
    entries: BTreeMap<(u32, u32), i64>,
}

impl BalanceSuggestionMatrix {
    /// Builds a matrix from explicit `((buyer, seller), net_gain)` entries —
    /// useful for replaying a saved suggestion table. Later duplicates of a
    /// pair overwrite earlier ones.
    pub fn from_entries(entries: impl IntoIterator<Item = ((u32, u32), i64)>) -> Self {
        Self {
            entries: entries.into_iter().collect(),
        }
    }

    /// The stored entry, if the pair is non-linked and path-reachable.
    pub fn get(&self, buyer: u32, seller: u32) -> Option<i64> {
        self.entries.get(&(buyer, seller)).copied()
    }

    /// Net balanced-butterfly gain of adding the link; zero for pairs with
    /// no caterpillars.
    pub fn net_gain(&self, buyer: u32, seller: u32) -> i64 {
        self.get(buyer, seller).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All entries in (buyer, seller) order.
    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), i64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }
}

/// Computes Ŝ for every non-linked pair by accumulating signed length-3
/// walks from each buyer. Walks through the missing `(i, j)` edge cannot
/// exist, so each accumulated value counts exactly the simple paths.
pub fn balance_suggestion_matrix(graph: &SignedBipartiteGraph) -> BalanceSuggestionMatrix {
    let n_sellers = graph.n_sellers();
    let mut entries = BTreeMap::new();
    let mut scratch: Vec<i64> = vec![0; n_sellers];
    let mut reached: Vec<bool> = vec![false; n_sellers];
    let mut touched: Vec<u32> = Vec::new();

    for buyer in 0..graph.n_buyers() as u32 {
        for &(mid_seller, first) in graph.buyer_neighbors(buyer) {
            for &(mid_buyer, second) in graph.seller_neighbors(mid_seller) {
                if mid_buyer == buyer {
                    continue;
                }
                let two = first.product(second);
                for &(end_seller, third) in graph.buyer_neighbors(mid_buyer) {
                    let idx = end_seller as usize;
                    scratch[idx] += two.product(third).int();
                    if !reached[idx] {
                        reached[idx] = true;
                        touched.push(end_seller);
                    }
                }
            }
        }
        touched.sort_unstable();
        for &seller in &touched {
            if !graph.has_edge(buyer, seller) {
                entries.insert((buyer, seller), scratch[seller as usize]);
            }
            scratch[seller as usize] = 0;
            reached[seller as usize] = false;
        }
        touched.clear();
    }
    BalanceSuggestionMatrix { entries }
}

/// Writes Ŝ as `buyer_id<TAB>seller_id<TAB>net_gain` rows in (buyer, seller)
/// order.
pub fn write_suggestions(
    graph: &SignedBipartiteGraph,
    suggestions: &BalanceSuggestionMatrix,
    mut writer: impl Write,
) -> Result<()> {
    writeln!(writer, "# buyer_id\tseller_id\tnet_gain")?;
    for ((buyer, seller), gain) in suggestions.entries() {
        writeln!(
            writer,
            "{}\t{}\t{}",
            graph.buyer_id(buyer),
            graph.seller_id(seller),
            gain
        )?;
    }
    Ok(())
}

fn check_pair(graph: &SignedBipartiteGraph, buyer: u32, seller: u32) -> Result<()> {
    if buyer as usize >= graph.n_buyers() {
        return Err(Error::IndexOutOfRange {
            side: "buyer",
            index: buyer as usize,
            limit: graph.n_buyers(),
        });
    }
    if seller as usize >= graph.n_sellers() {
        return Err(Error::IndexOutOfRange {
            side: "seller",
            index: seller as usize,
            limit: graph.n_sellers(),
        });
    }
    Ok(())
}
