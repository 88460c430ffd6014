//! KL and Jensen-Shannon divergences, exact and Monte Carlo.
//! JS here is KL(P‖M) + KL(Q‖M) with no ½, so it lives in [0, 2 ln 2].

use fisherbound::info::{js_divergence, js_divergence_mc, kl_divergence, kl_divergence_mc, mi_prior_from_js, IsotropicGaussian};
use fisherbound::RngStream;

fn main() -> fisherbound::Result<()> {
    let p = [0.5, 0.5];
    let q = [0.9, 0.1];
    let r = [0.2, 0.8];
    println!("KL(p||q) = {:.6}", kl_divergence(&p, &q)?.value);
    println!("JS(p,q)  = {:.6}", js_divergence(&p, &q)?.value);
    println!("JS of disjoint pmfs = {:.6} (2 ln 2 = {:.6})", js_divergence(&[1.0, 0.0], &[0.0, 1.0])?.value, 2.0 * std::f64::consts::LN_2);

    let d = |a: &[f64], b: &[f64]| js_divergence(a, b).map(|v| v.value.sqrt());
    println!("sqrt-JS triangle: d(p,r)={:.4} <= d(p,q)+d(q,r)={:.4}", d(&p, &r)?, d(&p, &q)? + d(&q, &r)?);

    let js = js_divergence(&q, &r)?.value;
    println!("uniform-prior MI between the two hypotheses: {:.6} nats", mi_prior_from_js(js)?);

    let g0 = IsotropicGaussian::new(vec![0.0], 1.0)?;
    let g1 = IsotropicGaussian::new(vec![1.0], 1.0)?;
    let kl = kl_divergence_mc(&g0, &g1, 200_000, RngStream::new(3))?;
    let js = js_divergence_mc(&g0, &g1, 200_000, RngStream::new(3))?;
    println!("N(0,1) vs N(1,1): KL ~ {:.4} ± {:.4} (exact 0.5), JS ~ {:.4} ± {:.4}", kl.value, kl.std_error, js.value, js.std_error);
    Ok(())
}
