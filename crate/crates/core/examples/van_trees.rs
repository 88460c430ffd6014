//! Minimax lower bounds from transcript information: the bound on the output
//! Fisher trace and the van Trees bound on squared error.

use fisherbound::bounds::{cor1_transcript_bound, van_trees_lower_bound};
use fisherbound::info::mi_gaussian_awgn;

fn main() -> fisherbound::Result<()> {
    let sigma = 1.0;
    println!("{:>6} {:>8} {:>12} {:>14} {:>12}", "n", "noise", "total MI", "Tr I_Pi <=", "mse >=");
    for n in [10, 100, 1000] {
        for noise in [0.5, 1.0, 4.0] {
            let mi = mi_gaussian_awgn(sigma, noise, n)?.value;
            let fisher = cor1_transcript_bound(1.0 / sigma, mi)?;
            let lb = van_trees_lower_bound(1, sigma, mi);
            println!("{n:>6} {noise:>8} {mi:>12.4} {fisher:>14.4} {lb:>12.6}");
        }
    }
    Ok(())
}
