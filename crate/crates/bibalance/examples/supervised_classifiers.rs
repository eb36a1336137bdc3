//! Supervised sign prediction: signed-degree vs caterpillar features.
//!
//! Both baselines are the same class-weighted logistic regression; they
//! differ only in what they see. `SCd` gets four signed degrees (how often
//! each endpoint agrees/disagrees overall), `SCsc` gets the eight
//! caterpillar sign-pattern counts between the endpoints — local path
//! structure instead of global popularity. On a two-faction graph the path
//! features carry far more signal.

use bibalance::classifier::{extract_caterpillar_features, extract_degree_features};
use bibalance::experiment::{generate_planted_graph, run_experiment, ExperimentConfig};
use bibalance::graph::SplitSpec;
use bibalance::metrics::Method;

fn main() -> bibalance::Result<()> {
    let graph = generate_planted_graph(80, 60, 0.15, 0.1, 5)?;
    println!(
        "planted graph: {}×{}, {} edges ({:.0}% positive)",
        graph.n_buyers(),
        graph.n_sellers(),
        graph.edge_count(),
        100.0 * graph.positive_fraction()
    );

    // What each model sees for one edge. Feature extraction is
    // leave-one-out: the pair's own edge never contributes to its features,
    // so training rows describe the *rest* of the graph.
    let edge = graph.edges()[0];
    let degree = extract_degree_features(&graph, edge.buyer, edge.seller)?;
    let paths = extract_caterpillar_features(&graph, edge.buyer, edge.seller)?;
    println!(
        "\nedge ({}, {}), true sign {}:",
        graph.buyer_id(edge.buyer),
        graph.seller_id(edge.seller),
        edge.sign
    );
    println!("  SCd  features (d+_b, d-_b, d+_s, d-_s): {:?}", degree.values());
    println!("  SCsc features (8 caterpillar patterns): {:?}", paths.values());

    // Same split, same seed, same trainer — only the features differ.
    let split = SplitSpec::new(5);
    for method in [Method::ScDegree, Method::ScCaterpillar] {
        let config = ExperimentConfig::default_for(method);
        let outcome = run_experiment(&graph, "planted", method, &config, &split)?;
        println!(
            "\n{}: test AUC {:.3}, positive-class F1 {:.3}",
            method, outcome.report.auc, outcome.report.f1
        );
    }

    Ok(())
}
