//! Ranking non-linked pairs by how much balance a new link would create.
//!
//! The suggestion matrix Ŝ assigns every non-linked (buyer, seller) pair the
//! net number of balanced butterflies a positive link would create (negative
//! entries mean a *negative* link is the balance-increasing choice). This
//! example prints the strongest suggestions in both directions and confirms
//! the top one against a before/after census.

use bibalance::butterflies::count_butterflies;
use bibalance::caterpillars::balance_suggestion_matrix;
use bibalance::experiment::generate_planted_graph;
use bibalance::graph::Sign;

fn main() -> bibalance::Result<()> {
    let graph = generate_planted_graph(40, 30, 0.2, 0.05, 3)?;
    let suggestions = balance_suggestion_matrix(&graph);
    println!(
        "{} non-linked pairs have at least one caterpillar",
        suggestions.len()
    );

    // Sort by net gain: large positive entries want a + link, large
    // negative ones want a - link. Ties break on (buyer, seller) order
    // because the underlying entries are already pair-ordered.
    let mut ranked: Vec<((u32, u32), i64)> = suggestions.entries().collect();
    ranked.sort_by_key(|&(pair, gain)| (std::cmp::Reverse(gain), pair));

    println!("\nstrongest + suggestions:");
    for &((buyer, seller), gain) in ranked.iter().take(5) {
        println!(
            "  {} — {}: net gain {gain:+}",
            graph.buyer_id(buyer),
            graph.seller_id(seller)
        );
    }
    println!("strongest - suggestions:");
    for &((buyer, seller), gain) in ranked.iter().rev().take(5) {
        println!(
            "  {} — {}: net gain {gain:+} (so a negative link gains {:+})",
            graph.buyer_id(buyer),
            graph.seller_id(seller),
            -gain
        );
    }

    // Close the top suggestion with the sign it asks for and check the
    // census margin moves by exactly |gain|.
    let ((buyer, seller), gain) = ranked[0];
    let sign = if gain >= 0 { Sign::Positive } else { Sign::Negative };
    let before = count_butterflies(&graph);
    let after = count_butterflies(&graph.with_added_edge(buyer, seller, sign)?);
    let margin = |c: &bibalance::butterflies::ButterflyCensus| {
        c.balanced_total() as i64 - c.unbalanced_total() as i64
    };
    println!(
        "\nclosing ({}, {}) with sign {sign}: margin {} -> {} (shift {:+}, |gain| = {})",
        graph.buyer_id(buyer),
        graph.seller_id(seller),
        margin(&before),
        margin(&after),
        margin(&after) - margin(&before),
        gain.abs()
    );
    assert_eq!(margin(&after) - margin(&before), gain.abs());

    Ok(())
}
