//! How close the van Trees bound with constant 2 comes to the averaging
//! estimator when the channel noise dominates.
//!
//! cargo run --release --example tightness -- [trials]

use fisherbound::bounds::van_trees_lower_bound_with_constant;
use fisherbound::distributed::{awgn_tightness_experiment, tightness_rows};
use fisherbound::RngStream;

fn main() -> fisherbound::Result<()> {
    let trials: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let (sigma, noise, n) = (0.1, 1.0, 10_000);
    let t = awgn_tightness_experiment(sigma, noise, n, trials, 10, RngStream::new(1))?;
    println!("closed-form ratio {:.4}, empirical ratio {:.4}", t.closed_form_ratio, t.empirical_ratio);
    for row in tightness_rows(&t) {
        println!("{row:?}");
    }

    let closed = t.result.closed_form_mse.unwrap_or(f64::NAN);
    let total_mi = t.result.total_mi.unwrap_or(f64::NAN);
    for c in [2.0, 1.9, 1.8, 1.5] {
        let lb = van_trees_lower_bound_with_constant(1, sigma, total_mi, c);
        println!("constant {c}: bound {lb:.4e} vs closed-form mse {closed:.4e} -> {}", if lb <= closed { "ok" } else { "contradiction" });
    }
    Ok(())
}
