//! Fit with the EM solver and compare it against coordinate ascent.
//!
//! The EM treats the mixture indicators as missing data: the E-step fills in
//! slab probabilities, the M-step solves an adaptive LASSO with weights
//! `sigma2 * lambda_star(beta_j)`. It never touches the selection threshold,
//! which is what makes the same scheme portable beyond Gaussian likelihoods.
//! Both solvers target the same posterior surface, so on well-behaved data
//! they land on the same mode.
//!
//! ```text
//! cargo run --example em_solver
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sslasso::data::{standardize, RawDataset};
use sslasso::sim::{gen_design, gen_response, Preset};
use sslasso::solver::{ca, em, FitSettings};

fn main() {
    let config = Preset::Sec33.sim_config(1, 3301);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let x = gen_design(&config, &mut rng);
    let y = gen_response(&x, &config.beta0(), config.sigma2, &mut rng);
    let raw = RawDataset::new(y, x, (1..=12).map(|j| format!("x{j}")).collect()).unwrap();
    let design = standardize(&raw).unwrap();
    let hyper = Preset::Sec33.hyper();
    let settings = FitSettings::default();

    let ca_path = ca::fit_path(&design, &hyper, &settings).unwrap();
    let em_path = em::em_fit(&design, &hyper, &settings).unwrap();
    let ca_state = ca_path.final_state();
    let em_state = em_path.final_state();

    println!("=== Coordinate ascent vs EM ===\n");
    println!("           {:>12} {:>12}", "CA", "EM");
    for j in 0..12 {
        println!(
            "  x{:<2}     {:>12.6} {:>12.6}",
            j + 1,
            ca_state.beta[j],
            em_state.beta[j]
        );
    }
    println!();
    println!(
        "support    {:>12} {:>12}",
        format!(
            "{:?}",
            ca_state.support().iter().map(|j| j + 1).collect::<Vec<_>>()
        ),
        format!(
            "{:?}",
            em_state.support().iter().map(|j| j + 1).collect::<Vec<_>>()
        ),
    );
    println!(
        "log post.  {:>12.5} {:>12.5}",
        ca_state.log_posterior, em_state.log_posterior
    );
    println!(
        "sigma2     {:>12.5} {:>12.5}",
        ca_state.sigma2, em_state.sigma2
    );

    let em_full = em::em_state_at(&design, &hyper, &settings).unwrap();
    println!("\nEM slab responsibilities of the final coefficients:");
    for j in 0..12 {
        println!(
            "  x{:<2} beta {:>9.5}  responsibility {:.6}",
            j + 1,
            em_full.beta[j],
            em_full.responsibilities[j]
        );
    }
}
