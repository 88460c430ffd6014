//! JS divergence between the transcripts at two parameters, bounded by the
//! path integral of the mutual information.

use fisherbound::bounds::{thm2_js_bound, PathSpec, Thm2Options, DEFAULT_PATH_NODES};
use fisherbound::{Channel, Model, ParamPoint, RngStream};

fn main() -> fisherbound::Result<()> {
    let bern = Model::bernoulli();
    let bsc = Channel::bsc(0.25)?;
    for n in [1, 2, 4, 8] {
        let path = PathSpec::gauss_legendre(ParamPoint::scalar(0.4), ParamPoint::scalar(0.6), DEFAULT_PATH_NODES)?;
        let r = thm2_js_bound(&bern, &bsc, n, &path, &Thm2Options::default())?;
        println!("bernoulli [0.4,0.6] bsc(0.25) n={n}: JS={:.6e} <= {:.6e}  {:?}", r.lhs, r.rhs, r.verdict);
    }

    let gauss = Model::gaussian(1.0, 1)?;
    let path = PathSpec::gauss_legendre(ParamPoint::scalar(0.0), ParamPoint::scalar(0.5), DEFAULT_PATH_NODES)?;
    let opts = Thm2Options {
        js_samples: 1_000_000,
        stream: Some(RngStream::new(5)),
        ..Thm2Options::default()
    };
    let r = thm2_js_bound(&gauss, &Channel::awgn(1.0)?, 1, &path, &opts)?;
    println!(
        "gauss(1) awgn(1) theta 0 -> 0.5: JS={:.5} ± {:.5} <= {:.5}  {:?}",
        r.lhs, r.uncertainty, r.rhs, r.verdict
    );
    Ok(())
}
