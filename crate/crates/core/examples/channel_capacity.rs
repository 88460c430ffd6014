//! Blahut-Arimoto capacity of a few discrete channels.

use fisherbound::info::{binary_entropy, capacity_blahut_arimoto};
use fisherbound::{DiscreteChannel, RandomizedResponseChannel};

fn main() -> fisherbound::Result<()> {
    let ln2 = std::f64::consts::LN_2;
    let cases = [
        ("BSC(0.25)", DiscreteChannel::bsc(0.25)?, ln2 - binary_entropy(0.25)),
        ("BEC(0.3)", DiscreteChannel::bec(0.3)?, 0.7 * ln2),
        ("identity(4)", DiscreteChannel::identity(4)?, 4f64.ln()),
        ("RR(eps=1)", RandomizedResponseChannel::new(1.0)?.matrix(), ln2 - binary_entropy(1.0 / (1.0 + 1f64.exp()))),
    ];
    for (name, ch, closed) in cases {
        let c = capacity_blahut_arimoto(&ch, 1e-12, 10_000)?;
        println!(
            "{name:<12} C={:.9} nats  closed form {:.9}  gap {:.1e}  iters {}  p*={:?}",
            c.capacity,
            closed,
            (c.capacity - closed).abs(),
            c.iterations,
            c.input_pmf.iter().map(|p| (p * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
    }

    // Z channel: no symmetric shortcut
    let z = DiscreteChannel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]])?;
    let c = capacity_blahut_arimoto(&z, 1e-12, 10_000)?;
    println!("Z(0.5)       C={:.9} nats (upper bound {:.9})", c.capacity, c.upper_bound);
    Ok(())
}
