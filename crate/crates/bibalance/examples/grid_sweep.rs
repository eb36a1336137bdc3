//! Hyperparameter search: pick by validation AUC, report on test.
//!
//! A sweep expands a grid of candidate configurations, fits each one on the
//! training split, ranks them by AUC on the *validation* edges (ties keep
//! the earliest candidate), and only then runs the single winner on the test
//! edges — the test split never influences the choice. A one-point grid
//! degenerates to a plain evaluation, so `sweep` subsumes `evaluate`.

use bibalance::experiment::{
    generate_planted_graph, run_sweep, ExperimentConfig, GridSpec,
};
use bibalance::graph::SplitSpec;
use bibalance::metrics::Method;

fn main() -> bibalance::Result<()> {
    let graph = generate_planted_graph(60, 45, 0.15, 0.15, 17)?;
    let split = SplitSpec::new(17);

    // A modest walk grid: how strongly the ratings pull (ω) × how much
    // net agreement a projection edge needs to exist.
    let spec = GridSpec {
        omega: Some(vec![1.0, 2.0, 5.0]),
        delta_pos: Some(vec![0, 2]),
        delta_neg: Some(vec![0, -2]),
        ..GridSpec::default()
    };
    let base = ExperimentConfig::default_for(Method::Sbrw);
    let grid = spec.expand(&base, Method::Sbrw);
    println!("sweeping {} candidates over the validation split:", grid.len());

    let sweep = run_sweep(&graph, "planted", Method::Sbrw, &grid, &split)?;
    for (index, report) in sweep.search.validation_reports.iter().enumerate() {
        let marker = if index == sweep.search.best_index { "  <- best" } else { "" };
        println!(
            "  ω = {}, δ = (+{}, {}): validation AUC {:.3}{marker}",
            report.hyperparameters["omega"],
            report.hyperparameters["delta_pos"],
            report.hyperparameters["delta_neg"],
            report.auc
        );
    }

    println!(
        "\nwinner re-run on the held-out test edges: AUC {:.3}, F1 {:.3}",
        sweep.outcome.report.auc, sweep.outcome.report.f1
    );

    Ok(())
}
