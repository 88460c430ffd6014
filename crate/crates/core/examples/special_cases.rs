//! Quantized and privatized samples: the information bound specialised to
//! k-bit quantizers and randomized response, plus the twist-family shape.

use fisherbound::bounds::{quantizer_special_case, randomized_response_special_case, twist_bound_report};
use fisherbound::{Channel, DiscreteChannel, Model, ParamPoint, QuantizerChannel};

fn main() -> fisherbound::Result<()> {
    let gauss = Model::gaussian(1.0, 1)?;
    let theta = ParamPoint::scalar(0.25);
    for k in 1..=4 {
        let q = QuantizerChannel::new(k, -1.5, 1.5, false)?;
        let (bits, thm1) = quantizer_special_case(&gauss, q, &theta)?;
        println!(
            "{k}-bit: I={:.4} <= {:.4} nats {:?};  Tr I_Y={:.4} <= {:.4} {:?}",
            bits.lhs, bits.rhs, bits.verdict, thm1.lhs, thm1.rhs, thm1.verdict
        );
    }

    for eps in [0.1, 0.5, 1.0, 2.0, 3.0] {
        let r = randomized_response_special_case(eps, &ParamPoint::scalar(0.5))?;
        println!("RR eps={eps}: I={:.5} <= {eps}  I/eps^2={:.4}", r.lhs, r.components["mi_over_eps_sq"]);
    }

    let noisy = Channel::Discrete(DiscreteChannel::new(vec![
        vec![0.8, 0.1, 0.1],
        vec![0.1, 0.8, 0.1],
        vec![0.1, 0.1, 0.8],
    ])?);
    let tw = Model::twist(vec![0.25, 0.25, 0.5], vec![0.5, 0.25, 0.25])?;
    let r = twist_bound_report(&tw, &noisy, 4, 1.0, 16)?;
    println!("twist family, n=4, K=1: I(V;Pi)={:.5} vs {:.4} ({})", r.lhs, r.rhs, r.notes.join("; "));
    Ok(())
}
