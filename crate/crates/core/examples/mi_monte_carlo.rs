//! Monte Carlo mutual information against exact values.

use fisherbound::channels::QuantizerChannel;
use fisherbound::info::{mi_exact, mi_monte_carlo};
use fisherbound::{Channel, Model, ParamPoint, RngStream};

fn main() -> fisherbound::Result<()> {
    let root = RngStream::new(2024);
    let cases = [
        ("gauss(1)+awgn(1)", Model::gaussian(1.0, 1)?, Channel::awgn(1.0)?, ParamPoint::scalar(0.0)),
        ("gauss(1,d=3)+awgn(0.5)", Model::gaussian(1.0, 3)?, Channel::awgn(0.5)?, ParamPoint::new(vec![0.1, -0.2, 0.3])),
        ("bern+bsc(0.25)", Model::bernoulli(), Channel::bsc(0.25)?, ParamPoint::scalar(0.5)),
        (
            "gauss(1)+dithered 2-bit",
            Model::gaussian(1.0, 1)?,
            Channel::Quantizer(QuantizerChannel::new(2, -1.0, 1.0, true)?),
            ParamPoint::scalar(0.2),
        ),
    ];
    for (i, (name, model, ch, theta)) in cases.iter().enumerate() {
        let exact = mi_exact(model, ch, theta)?;
        let mc = mi_monte_carlo(model, ch, theta, 1_000_000, root.substream(i as u64))?;
        let z = (mc.value - exact.value) / mc.std_error;
        println!(
            "{name:<24} exact {:.5} ({:?})  mc {:.5} ± {:.5}  z={z:+.2}  [{:.4} bits]",
            exact.value, exact.method, mc.value, mc.std_error, mc.bits()
        );
    }
    Ok(())
}
