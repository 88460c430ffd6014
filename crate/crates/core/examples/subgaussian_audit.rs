//! Audits the declared sub-Gaussian parameter of each model's score.

use fisherbound::models::{certify_subgaussian, standard_lambda_grid};
use fisherbound::{Model, ParamPoint, RngStream};

fn main() -> fisherbound::Result<()> {
    let models = [
        (Model::gaussian(0.5, 2)?, ParamPoint::new(vec![0.2, -0.4])),
        (Model::bernoulli(), ParamPoint::scalar(0.1)),
        (Model::bernoulli(), ParamPoint::scalar(0.5)),
        (Model::twist(vec![0.2, 0.3, 0.5], vec![0.4, 0.4, 0.2])?, ParamPoint::scalar(0.5)),
    ];
    for (i, (m, theta)) in models.iter().enumerate() {
        let n = m.subgaussian_param(theta)?;
        let audit = certify_subgaussian(m, theta, &standard_lambda_grid(n), 4, 200_000, RngStream::new(9).substream(i as u64))?;
        println!(
            "{:<9} theta={:?} N={n:.4} certified={} worst gap {:.3e} at lambda={:.3} ({} checks)",
            m.name(),
            theta.0,
            audit.certified,
            audit.max_gap,
            audit.worst_lambda,
            audit.checks
        );
    }
    Ok(())
}
