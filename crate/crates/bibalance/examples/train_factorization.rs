//! Matrix factorization for sign prediction, with and without balance hints.
//!
//! `MF` learns a low-rank embedding per node by SGD on a squared hinge loss:
//! the inner product u·v should exceed +1 for positive edges and fall below
//! -1 for negative ones. `MFwBT` trains the same model but also feeds it
//! *implicit* examples — the strongest entries of the balance-suggestion
//! matrix, i.e. non-linked pairs whose surrounding paths overwhelmingly want
//! a particular sign — so unobserved pairs pull the embedding toward a more
//! balanced completion.

use bibalance::caterpillars::balance_suggestion_matrix;
use bibalance::experiment::{generate_planted_graph, run_experiment, ExperimentConfig};
use bibalance::factorization::{mf_objective, predict_mf, select_implicit_links, train_mf};
use bibalance::graph::SplitSpec;
use bibalance::metrics::Method;

fn main() -> bibalance::Result<()> {
    let graph = generate_planted_graph(60, 45, 0.12, 0.1, 9)?;
    println!(
        "planted graph: {}×{}, {} edges",
        graph.n_buyers(),
        graph.n_sellers(),
        graph.edge_count()
    );

    // Train plain MF on the full graph and look at a few reconstructions.
    let config = ExperimentConfig::default_for(Method::Mf);
    let embeddings = train_mf(&graph, &config.mf)?;
    println!(
        "\nMF embeddings: dimension {}, final objective {:.4}",
        config.mf.dimension,
        mf_objective(&graph, &embeddings, config.mf.l2_penalty)?
    );
    for edge in graph.edges().iter().take(4) {
        let (score, sign) = predict_mf(&embeddings, edge.buyer, edge.seller)?;
        println!(
            "  ({}, {}): true {}, u·v = {score:+.3} -> predicted {sign}",
            graph.buyer_id(edge.buyer),
            graph.seller_id(edge.seller),
            edge.sign
        );
    }

    // What MFwBT adds: the top-k positive and negative balance suggestions
    // become weighted training examples for pairs that have no edge at all.
    let wbt = ExperimentConfig::default_for(Method::MfWbt);
    let suggestions = balance_suggestion_matrix(&graph);
    let (positive, negative) =
        select_implicit_links(&suggestions, wbt.mf.k_pos, wbt.mf.k_neg);
    println!(
        "\nMFwBT implicit examples: {} positive (weight {}), {} negative (weight {})",
        positive.len(),
        wbt.mf.alpha,
        negative.len(),
        wbt.mf.beta
    );

    // Head-to-head on held-out edges, same split.
    let split = SplitSpec::new(9);
    for method in [Method::Mf, Method::MfWbt] {
        let config = ExperimentConfig::default_for(method);
        let outcome = run_experiment(&graph, "planted", method, &config, &split)?;
        println!(
            "{}: test AUC {:.3}, positive-class F1 {:.3}",
            method, outcome.report.auc, outcome.report.f1
        );
    }

    Ok(())
}
