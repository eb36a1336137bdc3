//! Shared helpers for in-crate tests: random-graph strategies and a seeded
//! uniform generator (distinct from the planted-faction generator in
//! `experiment`, which has structure by design).

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Sign, SignedBipartiteGraph, SignedEdge};

/// Proptest strategy: a graph with up to `max_buyers × max_sellers` nodes
/// where each pair is independently linked with probability `density` and
/// signs are fair coin flips.
pub fn arb_graph(
    max_buyers: usize,
    max_sellers: usize,
    density: f64,
) -> impl Strategy<Value = SignedBipartiteGraph> {
    (1..=max_buyers, 1..=max_sellers, any::<u64>()).prop_map(move |(n_b, n_s, seed)| {
        seeded_random_graph(n_b, n_s, density, 0.5, seed)
    })
}

/// Uniform random graph: every pair linked independently with probability
/// `density`, sign positive with probability `positive_fraction`.
pub fn seeded_random_graph(
    n_buyers: usize,
    n_sellers: usize,
    density: f64,
    positive_fraction: f64,
    seed: u64,
) -> SignedBipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for buyer in 0..n_buyers as u32 {
        for seller in 0..n_sellers as u32 {
            if rng.random_bool(density) {
                let sign = if rng.random_bool(positive_fraction) {
                    Sign::Positive
                } else {
                    Sign::Negative
                };
                edges.push(SignedEdge { buyer, seller, sign });
            }
        }
    }
    SignedBipartiteGraph::from_indexed_edges(n_buyers, n_sellers, edges).unwrap()
}
