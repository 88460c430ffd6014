//! Small-step behaviour of JS against the quadratic Fisher approximation.

use fisherbound::bounds::regularity_iv_taylor_check;
use fisherbound::{Channel, Model, ParamPoint};

fn main() -> fisherbound::Result<()> {
    let ch = Channel::bsc(0.25)?;
    for theta in [0.3, 0.5, 0.7] {
        let check = regularity_iv_taylor_check(&Model::bernoulli(), &ch, &ParamPoint::scalar(theta), &[0.1, 0.05, 0.025, 0.0125])?;
        println!("theta = {theta}");
        for row in &check.rows {
            println!("  delta={:<7} JS={:.3e} quad={:.3e} |JS-quad|/delta^3={:.5}", row.delta, row.js, row.quadratic, row.ratio);
        }
        println!("  spread {:.3}", check.spread());
    }
    Ok(())
}
