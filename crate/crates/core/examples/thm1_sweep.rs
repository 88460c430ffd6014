//! Checks `Tr I_Y ≤ 2N²·I(X;Y)` over the built-in grid of models and channels
//! and prints the tightest cases.

use fisherbound::bounds::{run_thm1_sweep, thm1_grid, thm1_verify, Verdict};
use fisherbound::info::MiMethod;
use fisherbound::{Channel, Model, ParamPoint, RngStream};

fn main() -> fisherbound::Result<()> {
    let r = thm1_verify(&Model::bernoulli(), &Channel::bsc(0.25)?, &ParamPoint::scalar(0.5), &MiMethod::Exact)?;
    println!("Bernoulli(0.5) + BSC(0.25): lhs={:.4} rhs={:.4} {:?}", r.lhs, r.rhs, r.verdict);

    let mut rows = run_thm1_sweep(&thm1_grid(100_000), RngStream::new(11))?;
    let held = rows.iter().filter(|r| r.verdict == Verdict::Holds).count();
    println!("{held}/{} cases hold", rows.len());

    rows.retain(|r| r.rhs.is_finite() && r.rhs > 0.0);
    rows.sort_by(|a, b| (b.lhs / b.rhs).total_cmp(&(a.lhs / a.rhs)));
    println!("tightest:");
    for r in rows.iter().take(8) {
        println!("  {:<24} {:>8.3} {:>8.3}  lhs/rhs={:.3}", r.name, r.param1, r.param2, r.lhs / r.rhs);
    }
    Ok(())
}
