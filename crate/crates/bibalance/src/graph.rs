//! The signed bipartite graph: two node sets, signed edges, and seeded
//! train/validation/test splits.
//!
//! Nodes are addressed by dense `u32` indices per side; the original string
//! ids from the input file are kept for reporting. Adjacency is stored twice
//! (buyer → sellers and seller → buyers), each list sorted by neighbor index
//! so sign lookups are binary searches.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Edge label: agreement (`+1`) or disagreement (`-1`). There is no neutral
/// sign; an absent edge is simply absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    /// `+1.0` or `-1.0`.
    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }

    /// `+1` or `-1`.
    pub fn int(self) -> i64 {
        match self {
            Sign::Positive => 1,
            Sign::Negative => -1,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Sign::Positive
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }

    /// Sign of the product: positive iff the two agree.
    pub fn product(self, other: Sign) -> Sign {
        if self == other {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    /// Thresholds a real-valued score at zero; ties go to `Positive`.
    pub fn from_score(score: f64) -> Sign {
        if score >= 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "1",
            Sign::Negative => "-1",
        })
    }
}

impl FromStr for Sign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1" => Ok(Sign::Positive),
            "-1" => Ok(Sign::Negative),
            other => Err(format!("sign must be the literal 1 or -1, got {other:?}")),
        }
    }
}

/// One signed link, by dense indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignedEdge {
    pub buyer: u32,
    pub seller: u32,
    pub sign: Sign,
}

/// Which node set an index addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Buyer,
    Seller,
}

impl Side {
    pub(crate) fn label(self) -> &'static str {
        match self {
            Side::Buyer => "buyer",
            Side::Seller => "seller",
        }
    }
}

/// Immutable signed bipartite graph.
///
/// Construction validates that edges stay in range and that no (buyer,
/// seller) pair carries two signs; after that the graph is safe to share
/// across threads.
#[derive(Clone, Debug)]
pub struct SignedBipartiteGraph {
    buyer_ids: Vec<String>,
    seller_ids: Vec<String>,
    buyer_lookup: HashMap<String, u32>,
    seller_lookup: HashMap<String, u32>,
    edges: Vec<SignedEdge>,
    buyer_adjacency: Vec<Vec<(u32, Sign)>>,
    seller_adjacency: Vec<Vec<(u32, Sign)>>,
    positive_edges: usize,
}

impl SignedBipartiteGraph {
    /// Builds a graph from explicit id lists and an edge list. Ids must be
    /// unique per side; edges must be in range and pairwise distinct.
    pub fn new(
        buyer_ids: Vec<String>,
        seller_ids: Vec<String>,
        edges: Vec<SignedEdge>,
    ) -> Result<Self> {
        let buyer_lookup = build_lookup(&buyer_ids, "buyer")?;
        let seller_lookup = build_lookup(&seller_ids, "seller")?;

        let n_buyers = buyer_ids.len();
        let n_sellers = seller_ids.len();
        let mut buyer_adjacency = vec![Vec::new(); n_buyers];
        let mut seller_adjacency = vec![Vec::new(); n_sellers];
        let mut positive_edges = 0;

        for edge in &edges {
            if edge.buyer as usize >= n_buyers {
                return Err(Error::IndexOutOfRange {
                    side: "buyer",
                    index: edge.buyer as usize,
                    limit: n_buyers,
                });
            }
            if edge.seller as usize >= n_sellers {
                return Err(Error::IndexOutOfRange {
                    side: "seller",
                    index: edge.seller as usize,
                    limit: n_sellers,
                });
            }
            buyer_adjacency[edge.buyer as usize].push((edge.seller, edge.sign));
            seller_adjacency[edge.seller as usize].push((edge.buyer, edge.sign));
            if edge.sign.is_positive() {
                positive_edges += 1;
            }
        }

        for (buyer, row) in buyer_adjacency.iter_mut().enumerate() {
            row.sort_unstable_by_key(|&(seller, _)| seller);
            if let Some(w) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::DuplicateEdge {
                    buyer: buyer_ids[buyer].clone(),
                    seller: seller_ids[w[0].0 as usize].clone(),
                });
            }
        }
        for row in seller_adjacency.iter_mut() {
            row.sort_unstable_by_key(|&(buyer, _)| buyer);
        }

        Ok(Self {
            buyer_ids,
            seller_ids,
            buyer_lookup,
            seller_lookup,
            edges,
            buyer_adjacency,
            seller_adjacency,
            positive_edges,
        })
    }

    /// Builds a graph over `n_buyers × n_sellers` with synthetic ids
    /// (`b0, b1, …` / `s0, s1, …`).
    pub fn from_indexed_edges(
        n_buyers: usize,
        n_sellers: usize,
        edges: Vec<SignedEdge>,
    ) -> Result<Self> {
        let buyer_ids = (0..n_buyers).map(|i| format!("b{i}")).collect();
        let seller_ids = (0..n_sellers).map(|j| format!("s{j}")).collect();
        Self::new(buyer_ids, seller_ids, edges)
    }

    /// Parses the tab-separated edge-list format:
    ///
    /// ```text
    /// buyer_id<TAB>seller_id<TAB>sign
    /// ```
    ///
    /// with `sign` the literal `1` or `-1`. Blank lines and lines starting
    /// with `#` are skipped. Node indices are assigned in order of first
    /// appearance, independently per side.
    pub fn from_tsv_reader(reader: impl BufRead) -> Result<Self> {
        let mut buyer_ids: Vec<String> = Vec::new();
        let mut seller_ids: Vec<String> = Vec::new();
        let mut buyer_lookup: HashMap<String, u32> = HashMap::new();
        let mut seller_lookup: HashMap<String, u32> = HashMap::new();
        let mut edges: Vec<SignedEdge> = Vec::new();
        let mut seen: HashMap<(u32, u32), usize> = HashMap::new();

        for (index, line) in reader.lines().enumerate() {
            let line_no = index + 1;
            let line = line?;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let (buyer_id, seller_id, sign_token) =
                match (fields.next(), fields.next(), fields.next(), fields.next()) {
                    (Some(b), Some(s), Some(v), None) => (b.trim(), s.trim(), v.trim()),
                    _ => {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!(
                                "expected 3 tab-separated fields (buyer, seller, sign), got {:?}",
                                line
                            ),
                        })
                    }
                };
            if buyer_id.is_empty() || seller_id.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "empty node id".to_string(),
                });
            }
            let sign = Sign::from_str(sign_token).map_err(|message| Error::Parse {
                line: line_no,
                message,
            })?;

            let buyer = intern(buyer_id, &mut buyer_ids, &mut buyer_lookup);
            let seller = intern(seller_id, &mut seller_ids, &mut seller_lookup);
            if seen.insert((buyer, seller), line_no).is_some() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate edge ({buyer_id}, {seller_id})"),
                });
            }
            edges.push(SignedEdge { buyer, seller, sign });
        }

        Self::new(buyer_ids, seller_ids, edges)
    }

    /// Reads [`Self::from_tsv_reader`] input from a file path.
    pub fn from_tsv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_tsv_reader(std::io::BufReader::new(file))
    }

    /// Writes the graph back out in the edge-list format, one edge per line
    /// in insertion order.
    pub fn write_tsv(&self, mut writer: impl Write) -> Result<()> {
        for edge in &self.edges {
            writeln!(
                writer,
                "{}\t{}\t{}",
                self.buyer_ids[edge.buyer as usize],
                self.seller_ids[edge.seller as usize],
                edge.sign
            )?;
        }
        Ok(())
    }

    pub fn n_buyers(&self) -> usize {
        self.buyer_ids.len()
    }

    pub fn n_sellers(&self) -> usize {
        self.seller_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn positive_edge_count(&self) -> usize {
        self.positive_edges
    }

    pub fn negative_edge_count(&self) -> usize {
        self.edges.len() - self.positive_edges
    }

    /// Share of positive edges, `|E⁺| / |E|`; `0.0` for an edgeless graph.
    pub fn positive_fraction(&self) -> f64 {
        if self.edges.is_empty() {
            0.0
        } else {
            self.positive_edges as f64 / self.edges.len() as f64
        }
    }

    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    /// Sellers adjacent to `buyer`, sorted by seller index.
    pub fn buyer_neighbors(&self, buyer: u32) -> &[(u32, Sign)] {
        &self.buyer_adjacency[buyer as usize]
    }

    /// Buyers adjacent to `seller`, sorted by buyer index.
    pub fn seller_neighbors(&self, seller: u32) -> &[(u32, Sign)] {
        &self.seller_adjacency[seller as usize]
    }

    /// Sign of the (buyer, seller) link, if present.
    pub fn sign_of(&self, buyer: u32, seller: u32) -> Option<Sign> {
        let row = &self.buyer_adjacency[buyer as usize];
        row.binary_search_by_key(&seller, |&(s, _)| s)
            .ok()
            .map(|pos| row[pos].1)
    }

    pub fn has_edge(&self, buyer: u32, seller: u32) -> bool {
        self.sign_of(buyer, seller).is_some()
    }

    /// `(positive_degree, negative_degree)` of one node.
    pub fn signed_degrees(&self, side: Side, index: u32) -> Result<(usize, usize)> {
        let adjacency = match side {
            Side::Buyer => &self.buyer_adjacency,
            Side::Seller => &self.seller_adjacency,
        };
        let row = adjacency
            .get(index as usize)
            .ok_or(Error::IndexOutOfRange {
                side: side.label(),
                index: index as usize,
                limit: adjacency.len(),
            })?;
        let positive = row.iter().filter(|(_, sign)| sign.is_positive()).count();
        Ok((positive, row.len() - positive))
    }

    pub fn buyer_id(&self, buyer: u32) -> &str {
        &self.buyer_ids[buyer as usize]
    }

    pub fn seller_id(&self, seller: u32) -> &str {
        &self.seller_ids[seller as usize]
    }

    pub fn buyer_index(&self, id: &str) -> Option<u32> {
        self.buyer_lookup.get(id).copied()
    }

    pub fn seller_index(&self, id: &str) -> Option<u32> {
        self.seller_lookup.get(id).copied()
    }

    /// Majority training sign; ties go to positive.
    pub fn majority_sign(&self) -> Sign {
        if self.positive_edges * 2 >= self.edges.len() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    /// Returns a copy of the graph with one extra edge. Errors if the pair is
    /// already linked or out of range.
    pub fn with_added_edge(&self, buyer: u32, seller: u32, sign: Sign) -> Result<Self> {
        if buyer as usize >= self.n_buyers() {
            return Err(Error::IndexOutOfRange {
                side: "buyer",
                index: buyer as usize,
                limit: self.n_buyers(),
            });
        }
        if seller as usize >= self.n_sellers() {
            return Err(Error::IndexOutOfRange {
                side: "seller",
                index: seller as usize,
                limit: self.n_sellers(),
            });
        }
        if self.has_edge(buyer, seller) {
            return Err(Error::DuplicateEdge {
                buyer: self.buyer_id(buyer).to_string(),
                seller: self.seller_id(seller).to_string(),
            });
        }
        let mut edges = self.edges.clone();
        edges.push(SignedEdge { buyer, seller, sign });
        Self::new(self.buyer_ids.clone(), self.seller_ids.clone(), edges)
    }
}

fn build_lookup(ids: &[String], side: &'static str) -> Result<HashMap<String, u32>> {
    let mut lookup = HashMap::with_capacity(ids.len());
    for (index, id) in ids.iter().enumerate() {
        if lookup.insert(id.clone(), index as u32).is_some() {
            return Err(Error::InvalidParameter(format!(
                "duplicate {side} id {id:?}"
            )));
        }
    }
    Ok(lookup)
}

fn intern(id: &str, ids: &mut Vec<String>, lookup: &mut HashMap<String, u32>) -> u32 {
    if let Some(&index) = lookup.get(id) {
        return index;
    }
    let index = ids.len() as u32;
    ids.push(id.to_string());
    lookup.insert(id.to_string(), index);
    index
}

/// How to partition the edge set. Fractions must be strictly positive and sum
/// to 1; the same spec (including `seed`) always produces the same partition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub validation_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    /// The conventional 85/5/10 split.
    pub fn new(seed: u64) -> Self {
        Self {
            train_fraction: 0.85,
            validation_fraction: 0.05,
            test_fraction: 0.10,
            seed,
        }
    }

    pub fn with_fractions(train: f64, validation: f64, test: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            train_fraction: train,
            validation_fraction: validation,
            test_fraction: test,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let f = [
            self.train_fraction,
            self.validation_fraction,
            self.test_fraction,
        ];
        if f.iter().any(|x| !x.is_finite() || *x <= 0.0 || *x >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "split fractions must each lie in (0, 1), got {f:?}"
            )));
        }
        let sum: f64 = f.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "split fractions must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self::new(0)
    }
}

/// Result of [`split_edges`]: a training *graph* (same node sets, so isolated
/// nodes survive) plus held-out validation and test edge lists.
#[derive(Clone, Debug)]
pub struct EdgeSplit {
    pub train: SignedBipartiteGraph,
    pub validation: Vec<SignedEdge>,
    pub test: Vec<SignedEdge>,
}

/// Partitions the edges into train/validation/test.
///
/// Validation and test sizes are `round(|E| · fraction)`; the train partition
/// absorbs the rounding remainder. Selection is a seeded shuffle, so a given
/// `(graph, spec)` always yields the same partition.
pub fn split_edges(graph: &SignedBipartiteGraph, spec: &SplitSpec) -> Result<EdgeSplit> {
    spec.validate()?;
    let total = graph.edge_count();
    if total < 10 {
        return Err(Error::Split(format!(
            "need at least 10 edges to split, got {total}"
        )));
    }
    let n_validation = (total as f64 * spec.validation_fraction).round() as usize;
    let n_test = (total as f64 * spec.test_fraction).round() as usize;
    if n_validation + n_test >= total {
        return Err(Error::Split(format!(
            "held-out partitions ({n_validation} validation + {n_test} test) would leave no training edges out of {total}"
        )));
    }

    let mut order: Vec<usize> = (0..total).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);

    let mut validation_idx: Vec<usize> = order[..n_validation].to_vec();
    let mut test_idx: Vec<usize> = order[n_validation..n_validation + n_test].to_vec();
    validation_idx.sort_unstable();
    test_idx.sort_unstable();

    let edges = graph.edges();
    let validation: Vec<SignedEdge> = validation_idx.iter().map(|&i| edges[i]).collect();
    let test: Vec<SignedEdge> = test_idx.iter().map(|&i| edges[i]).collect();

    let mut held_out = vec![false; total];
    for &i in validation_idx.iter().chain(test_idx.iter()) {
        held_out[i] = true;
    }
    let train_edges: Vec<SignedEdge> = edges
        .iter()
        .zip(held_out.iter())
        .filter(|(_, &h)| !h)
        .map(|(e, _)| *e)
        .collect();

    let train = SignedBipartiteGraph::new(
        graph.buyer_ids.clone(),
        graph.seller_ids.clone(),
        train_edges,
    )?;
    Ok(EdgeSplit {
        train,
        validation,
        test,
    })
}

/// Writes the reproducibility manifest for a split: one line per edge of the
/// original graph, `buyer_id<TAB>seller_id<TAB>partition` with partition in
/// `{train, validation, test}`.
pub fn write_split_manifest(
    graph: &SignedBipartiteGraph,
    split: &EdgeSplit,
    mut writer: impl Write,
) -> Result<()> {
    use std::collections::HashSet;
    let validation: HashSet<(u32, u32)> = split
        .validation
        .iter()
        .map(|e| (e.buyer, e.seller))
        .collect();
    let test: HashSet<(u32, u32)> = split.test.iter().map(|e| (e.buyer, e.seller)).collect();
    writeln!(writer, "# buyer_id\tseller_id\tpartition")?;
    for edge in graph.edges() {
        let key = (edge.buyer, edge.seller);
        let partition = if validation.contains(&key) {
            "validation"
        } else if test.contains(&key) {
            "test"
        } else {
            "train"
        };
        writeln!(
            writer,
            "{}\t{}\t{}",
            graph.buyer_id(edge.buyer),
            graph.seller_id(edge.seller),
            partition
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_two_line_file() {
        let graph =
            SignedBipartiteGraph::from_tsv_reader("b1\ts1\t1\nb1\ts2\t-1\n".as_bytes()).unwrap();
        assert_eq!(graph.n_buyers(), 1);
        assert_eq!(graph.n_sellers(), 2);
        assert_eq!(graph.positive_edge_count(), 1);
        assert_eq!(graph.negative_edge_count(), 1);
        assert_eq!(graph.sign_of(0, 0), Some(Sign::Positive));
        assert_eq!(graph.sign_of(0, 1), Some(Sign::Negative));
        assert_eq!(graph.signed_degrees(Side::Buyer, 0).unwrap(), (1, 1));
    }

    #[test]
    fn parses_empty_input() {
        let graph = SignedBipartiteGraph::from_tsv_reader("".as_bytes()).unwrap();
        assert_eq!(graph.n_buyers(), 0);
        assert_eq!(graph.n_sellers(), 0);
        assert_eq!(graph.edge_count(), 0);
        assert_eq!(graph.positive_fraction(), 0.0);
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let input = "# a comment\n\nb1\ts1\t1\n   \n# another\nb2\ts1\t-1\n";
        let graph = SignedBipartiteGraph::from_tsv_reader(input.as_bytes()).unwrap();
        assert_eq!(graph.edge_count(), 2);
    }

    #[test]
    fn rejects_duplicate_edges() {
        let err = SignedBipartiteGraph::from_tsv_reader("b1\ts1\t1\nb1\ts1\t1\n".as_bytes())
            .unwrap_err();
        assert!(err.to_string().contains("duplicate edge"), "{err}");
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn rejects_malformed_sign() {
        let err = SignedBipartiteGraph::from_tsv_reader("b1\ts1\t2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("sign"), "{err}");
    }

    #[test]
    fn rejects_wrong_field_count() {
        let err = SignedBipartiteGraph::from_tsv_reader("b1\ts1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("3 tab-separated fields"), "{err}");
    }

    #[test]
    fn tsv_round_trip_preserves_graph() {
        let input = "b1\ts1\t1\nb2\ts1\t-1\nb1\ts2\t-1\n";
        let graph = SignedBipartiteGraph::from_tsv_reader(input.as_bytes()).unwrap();
        let mut out = Vec::new();
        graph.write_tsv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), input);
    }

    #[test]
    fn signed_degrees_on_isolated_node() {
        let graph = SignedBipartiteGraph::from_indexed_edges(3, 2, vec![]).unwrap();
        assert_eq!(graph.signed_degrees(Side::Buyer, 2).unwrap(), (0, 0));
        assert!(graph.signed_degrees(Side::Buyer, 3).is_err());
    }

    #[test]
    fn with_added_edge_rejects_existing_pair() {
        let graph = SignedBipartiteGraph::from_tsv_reader("b1\ts1\t1\n".as_bytes()).unwrap();
        assert!(graph.with_added_edge(0, 0, Sign::Negative).is_err());
    }

    fn line_graph(edges: usize) -> SignedBipartiteGraph {
        // A path-shaped graph with `edges` edges and no duplicate pairs.
        let list: Vec<SignedEdge> = (0..edges)
            .map(|i| SignedEdge {
                buyer: (i / 2) as u32,
                seller: ((i + 1) / 2) as u32,
                sign: if i % 3 == 0 {
                    Sign::Negative
                } else {
                    Sign::Positive
                },
            })
            .collect();
        SignedBipartiteGraph::from_indexed_edges(edges / 2 + 1, edges / 2 + 1, list).unwrap()
    }

    #[test]
    fn split_sizes_follow_rounding() {
        let graph = line_graph(100);
        let split = split_edges(&graph, &SplitSpec::new(7)).unwrap();
        assert_eq!(split.validation.len(), 5);
        assert_eq!(split.test.len(), 10);
        assert_eq!(split.train.edge_count(), 85);

        let graph = line_graph(20);
        let split = split_edges(&graph, &SplitSpec::new(7)).unwrap();
        assert_eq!(split.validation.len(), 1);
        assert_eq!(split.test.len(), 2);
        assert_eq!(split.train.edge_count(), 17);
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let graph = line_graph(40);
        let a = split_edges(&graph, &SplitSpec::new(7)).unwrap();
        let b = split_edges(&graph, &SplitSpec::new(7)).unwrap();
        assert_eq!(a.test, b.test);
        assert_eq!(a.validation, b.validation);
        let c = split_edges(&graph, &SplitSpec::new(8)).unwrap();
        assert!(a.test != c.test || a.validation != c.validation);
    }

    #[test]
    fn split_keeps_isolated_nodes_in_train_graph() {
        let graph = line_graph(30);
        let split = split_edges(&graph, &SplitSpec::new(1)).unwrap();
        assert_eq!(split.train.n_buyers(), graph.n_buyers());
        assert_eq!(split.train.n_sellers(), graph.n_sellers());
    }

    #[test]
    fn split_rejects_tiny_edge_sets() {
        let graph = line_graph(9);
        assert!(matches!(
            split_edges(&graph, &SplitSpec::new(0)),
            Err(Error::Split(_))
        ));
    }

    #[test]
    fn split_manifest_lists_every_edge_once() {
        let graph = line_graph(20);
        let split = split_edges(&graph, &SplitSpec::new(3)).unwrap();
        let mut out = Vec::new();
        write_split_manifest(&graph, &split, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 20);
        assert_eq!(
            rows.iter().filter(|r| r.ends_with("\ttest")).count(),
            split.test.len()
        );
        assert_eq!(
            rows.iter().filter(|r| r.ends_with("\tvalidation")).count(),
            split.validation.len()
        );
    }

    proptest! {
        #[test]
        fn adjacency_transpose_is_consistent(graph in crate::testutil::arb_graph(12, 12, 0.4)) {
            for buyer in 0..graph.n_buyers() as u32 {
                for &(seller, sign) in graph.buyer_neighbors(buyer) {
                    let row = graph.seller_neighbors(seller);
                    prop_assert!(row.contains(&(buyer, sign)));
                }
            }
            let buyer_total: usize = (0..graph.n_buyers() as u32)
                .map(|b| graph.buyer_neighbors(b).len())
                .sum();
            let seller_total: usize = (0..graph.n_sellers() as u32)
                .map(|s| graph.seller_neighbors(s).len())
                .sum();
            prop_assert_eq!(buyer_total, graph.edge_count());
            prop_assert_eq!(seller_total, graph.edge_count());
        }

        #[test]
        fn degree_sums_match_edge_counts(graph in crate::testutil::arb_graph(10, 14, 0.5)) {
            let mut pos = 0;
            let mut neg = 0;
            for buyer in 0..graph.n_buyers() as u32 {
                let (p, n) = graph.signed_degrees(Side::Buyer, buyer).unwrap();
                pos += p;
                neg += n;
            }
            prop_assert_eq!(pos, graph.positive_edge_count());
            prop_assert_eq!(neg, graph.negative_edge_count());
        }

        #[test]
        fn split_partitions_are_disjoint_and_exhaustive(
            graph in crate::testutil::arb_graph(10, 10, 0.6),
            seed in 0u64..1000,
        ) {
            prop_assume!(graph.edge_count() >= 10);
            let split = split_edges(&graph, &SplitSpec::new(seed)).unwrap();
            let mut all: Vec<SignedEdge> = split.train.edges().to_vec();
            all.extend_from_slice(&split.validation);
            all.extend_from_slice(&split.test);
            prop_assert_eq!(all.len(), graph.edge_count());
            let mut keys: Vec<(u32, u32)> = all.iter().map(|e| (e.buyer, e.seller)).collect();
            keys.sort_unstable();
            keys.dedup();
            prop_assert_eq!(keys.len(), graph.edge_count());
            let original: std::collections::HashSet<_> =
                graph.edges().iter().copied().collect();
            prop_assert!(all.iter().all(|e| original.contains(e)));
        }
    }
}
