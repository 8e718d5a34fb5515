//! File-based workflow: write a CSV, load it back, fit, and predict on the
//! raw scale.
//!
//! The loader expects a header row whose first column is literally `y`;
//! every other column is a predictor. Fitted coefficients live on the
//! standardized scale internally and are mapped back (with a reconstructed
//! intercept) for raw-scale predictions.
//!
//! ```text
//! cargo run --example csv_workflow
//! ```

use sslasso::data::{destandardize, load_dataset, standardize};
use sslasso::solver::{fit_path, FitSettings};
use sslasso::SslHyperParams;

fn main() {
    let dir = std::env::temp_dir().join("sslasso_csv_workflow");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("measurements.csv");

    // Columns in wildly different units; only temp and flow matter.
    let mut text = String::from("y,temp,pressure,flow\n");
    let mut state = 0x2545F4914F6CDD1Du64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..60 {
        let temp = 250.0 + 40.0 * next();
        let pressure = 1.0 + 0.2 * next();
        let flow = 12.0 + 3.0 * next();
        let y = 0.05 * temp - 2.0 * flow + 10.0 + 0.5 * (next() - 0.5);
        text.push_str(&format!("{y},{temp},{pressure},{flow}\n"));
    }
    std::fs::write(&path, text).unwrap();
    println!("wrote {}", path.display());

    let raw = load_dataset(&path).unwrap();
    println!(
        "loaded n = {}, predictors = {:?}",
        raw.n(),
        raw.column_names
    );

    let design = standardize(&raw).unwrap();
    let hyper = SslHyperParams::defaults_for(design.p(), 1.0);
    let fit = fit_path(&design, &hyper, &FitSettings::default()).unwrap();
    let state = fit.final_state();
    let (beta_raw, intercept) = destandardize(&state.beta, &design).unwrap();

    println!("\nraw-scale model:");
    print!("  y = {intercept:.3}");
    for (j, name) in raw.column_names.iter().enumerate() {
        if beta_raw[j] != 0.0 {
            print!(" + {:.4} * {name}", beta_raw[j]);
        }
    }
    println!();
    println!("  (true generating model: y = 10 + 0.05 * temp - 2 * flow, pressure irrelevant)");

    let fitted0 = intercept + (0..3).map(|j| beta_raw[j] * raw.x[[0, j]]).sum::<f64>();
    println!(
        "\nfirst-row check: observed {:.3}, fitted {:.3}",
        raw.y[0], fitted0
    );
}
