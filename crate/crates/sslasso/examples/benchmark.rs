//! Replicated synthetic benchmark against a cross-validated LASSO baseline.
//!
//! Runs a reduced-size version of the high-dimensional block-correlated
//! scenario (use `--release` and more replications for the full picture) and
//! prints selection and estimation metrics side by side. Every replication
//! derives its own seed from the master seed, so the report is bit-identical
//! across runs and worker counts.
//!
//! ```text
//! cargo run --release --example benchmark
//! ```

use sslasso::bench::{run_benchmark, MethodSummary, SolverChoice};
use sslasso::sim::Preset;
use sslasso::solver::FitSettings;
use std::time::Instant;

fn print_row(name: &str, s: &MethodSummary) {
    println!(
        "{name:>6} {:>10.4} {:>10.3} {:>8.2} {:>9.4} {:>8.3} {:>8.3}",
        s.mse.mean, s.mpe.mean, s.model_size.mean, s.fdr.mean, s.fnr.mean, s.mcc.mean
    );
}

fn main() {
    let replications = 10;
    let config = Preset::Table1.sim_config(replications, 61001);
    let hyper = Preset::Table1.hyper();

    println!("=== Benchmark: n = 100, p = 1000, 6 signals in correlated blocks ===");
    println!("({replications} replications, noise variance 3)\n");

    let start = Instant::now();
    let report = run_benchmark(&config, SolverChoice::Ca, &hyper, &FitSettings::default()).unwrap();
    println!(
        "{:>6} {:>10} {:>10} {:>8} {:>9} {:>8} {:>8}",
        "", "mse", "mpe", "size", "fdr", "fnr", "mcc"
    );
    print_row("SSL", &report.ssl);
    print_row("LASSO", &report.lasso);
    println!("\nelapsed: {:.2?}", start.elapsed());

    println!("\nPer-replication detail:");
    println!(
        "{:>4} {:>10} {:>6} {:>7} {:>13} {:>11}",
        "rep", "ssl mse", "size", "mcc", "stabilized at", "lasso rate"
    );
    for row in &report.rows {
        println!(
            "{:>4} {:>10.4} {:>6} {:>7.3} {:>13} {:>11.1}",
            row.rep,
            row.ssl.mse,
            row.ssl.model_size,
            row.ssl.mcc,
            row.ssl_stabilized_at
                .map(|s| (s + 1).to_string())
                .unwrap_or_else(|| "-".into()),
            row.lasso_lambda
        );
    }
    println!(
        "\nThe adaptive two-rate penalty keeps the selected model near the true size six,\nwhile the single-rate baseline trades false positives for prediction error."
    );
}
