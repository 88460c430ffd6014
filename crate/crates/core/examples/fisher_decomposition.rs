//! Output Fisher information of Bernoulli samples seen through a BSC,
//! computed two ways: the exact pmf-gradient sum and the posterior-score
//! decomposition `E_Y‖E[S|Y]‖²`.

use fisherbound::fisher::{fisher_fd_check, fisher_input, fisher_output, fisher_trace_decomposition, DecompositionMethod};
use fisherbound::{Channel, Model, ParamPoint};

fn main() -> fisherbound::Result<()> {
    let model = Model::bernoulli();
    let theta = ParamPoint::scalar(0.3);
    println!("{:>6} {:>12} {:>12} {:>12}", "p", "I_X", "I_Y exact", "E|E[S|Y]|^2");
    for p in [0.0, 0.1, 0.25, 0.4, 0.5] {
        let ch = Channel::bsc(p)?;
        let ix = fisher_input(&model, &theta)?.trace;
        let iy = fisher_output(&model, &ch, &theta)?.trace;
        let dec = fisher_trace_decomposition(&model, &ch, &theta, DecompositionMethod::Exact)?;
        println!("{p:>6.2} {ix:>12.6} {iy:>12.6} {:>12.6}", dec.trace);
    }

    // per-symbol breakdown at p = 0.25
    let ch = Channel::bsc(0.25)?;
    let dec = fisher_trace_decomposition(&model, &ch, &theta, DecompositionMethod::Exact)?;
    for t in &dec.terms {
        println!("y={} p(y)={:.4} E[S|y]={:+.4} contribution={:.6}", t.y, t.p_y, t.conditional_score[0], t.contribution);
    }

    let fd = fisher_fd_check(&model, &ch, &theta, 1e-4)?;
    println!("finite-difference check: max relative deviation {:.2e}", fd.max_rel_deviation);
    Ok(())
}
