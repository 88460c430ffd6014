//! Mutual information, channel capacity, and KL / Jensen–Shannon divergences.
//!
//! Everything is in nats. The Jensen–Shannon divergence uses the unhalved
//! convention
//!
//! ```text
//! JS(P‖Q) = KL(P‖M) + KL(Q‖M),   M = (P + Q)/2
//! ```
//!
//! so it ranges over `[0, 2 ln 2]`, twice the more common halved definition.
//! The Fisher/divergence inequalities in [`crate::bounds`] are stated for this
//! convention, and the mutual information of a uniform binary prior with the
//! observation is `JS/2` (see [`mi_prior_from_js`]).

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, DiscreteChannel};
use crate::error::{Error, Result};
use crate::mc::{chunked_mean, Execution};
use crate::models::{Model, ParamPoint, Sample};
use crate::numeric::{log_sum_exp, HALF_LN_2PI};
use crate::pipeline::{gaussian_expectation, Pipeline};
use crate::rng::{RngStream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiMethodTag {
    ExactDiscrete,
    ClosedFormGaussian,
    Quadrature,
    MonteCarlo,
}

/// Mutual information in nats. Serializes as
/// `{quantity, value_nats, std_error, method, n_samples}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MIEstimate {
    pub quantity: String,
    #[serde(rename = "value_nats")]
    pub value: f64,
    pub std_error: f64,
    pub method: MiMethodTag,
    pub n_samples: usize,
}

impl MIEstimate {
    fn exact(quantity: &str, value: f64, method: MiMethodTag) -> Self {
        Self {
            quantity: quantity.to_string(),
            value,
            std_error: 0.0,
            method,
            n_samples: 0,
        }
    }

    pub fn bits(&self) -> f64 {
        self.value / LN_2
    }
}

/// How to evaluate `I_θ(X;Y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MiMethod {
    /// Exact sum, closed form, or deterministic quadrature, whichever the
    /// pipeline offers.
    Exact,
    MonteCarlo { n_samples: usize, stream: RngStream },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    Kl,
    Js,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceMethod {
    ExactDiscrete,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub kind: DivergenceKind,
    pub method: DivergenceMethod,
    pub std_error: f64,
}

/// Shannon entropy in nats.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// `I(X;Y)` for an input pmf `px` through `channel`.
pub fn mutual_information(px: &[f64], channel: &DiscreteChannel) -> Result<f64> {
    let py = crate::channels::push_forward_pmf(px, channel)?;
    let mut mi = 0.0;
    for (p, row) in px.iter().zip(channel.rows()) {
        if *p <= 0.0 {
            continue;
        }
        for (w, q) in row.iter().zip(&py) {
            if *w > 0.0 {
                mi += p * w * (w / q).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Exact `I_θ(X;Y)` for a finite-alphabet model through a matrix kernel.
pub fn mi_exact_discrete(model: &Model, channel: &DiscreteChannel, theta: &ParamPoint) -> Result<MIEstimate> {
    let px = model.pmf(theta)?;
    Ok(MIEstimate::exact(
        "I(X;Y)",
        mutual_information(&px, channel)?,
        MiMethodTag::ExactDiscrete,
    ))
}

/// Total information `(n/2)·ln(1 + σ²/σ²_noise)` of n independent scalar
/// AWGN observations of Gaussian samples.
pub fn mi_gaussian_awgn(sigma: f64, sigma_noise: f64, n: usize) -> Result<MIEstimate> {
    if !(sigma > 0.0) || !(sigma_noise > 0.0) {
        return Err(Error::Validation(format!(
            "variances must be positive (sigma = {sigma}, sigma_noise = {sigma_noise})"
        )));
    }
    let snr = (sigma / sigma_noise).powi(2);
    Ok(MIEstimate::exact(
        "I(X_1..X_n;Pi)",
        0.5 * n as f64 * snr.ln_1p(),
        MiMethodTag::ClosedFormGaussian,
    ))
}

/// `I_θ(X;Y)` by the most exact route the pipeline supports.
pub fn mi_exact(model: &Model, channel: &Channel, theta: &ParamPoint) -> Result<MIEstimate> {
    let pipe = Pipeline::new(model, channel)?;
    model.check_param(theta)?;
    match pipe {
        Pipeline::Discrete { matrix, .. } => mi_exact_discrete(model, &matrix, theta),
        Pipeline::GaussianAwgn { gauss, sigma_noise } => {
            if sigma_noise == 0.0 {
                return Ok(MIEstimate::exact("I(X;Y)", f64::INFINITY, MiMethodTag::ClosedFormGaussian));
            }
            let snr = (gauss.sigma / sigma_noise).powi(2);
            Ok(MIEstimate::exact(
                "I(X;Y)",
                0.5 * gauss.dim as f64 * snr.ln_1p(),
                MiMethodTag::ClosedFormGaussian,
            ))
        }
        Pipeline::GaussianQuantizer { gauss, quantizer } => {
            let law = pipe.output_law(model, theta)?;
            let h_y = entropy(&law.pmf);
            if !quantizer.dither {
                // deterministic kernel: I = H(Y)
                return Ok(MIEstimate::exact("I(X;Y)", h_y, MiMethodTag::ExactDiscrete));
            }
            let h_y_given_x =
                gaussian_expectation(gauss.sigma, theta.0[0], &quantizer, |x| entropy(&quantizer.pmf(x)));
            Ok(MIEstimate::exact(
                "I(X;Y)",
                (h_y - h_y_given_x).max(0.0),
                MiMethodTag::Quadrature,
            ))
        }
    }
}

/// Monte Carlo estimate: the sample mean of `ln p(Y|X) − ln p_θ(Y)` over
/// `(X, Y)` drawn from the joint law. The marginal in the denominator is exact
/// for every supported pipeline.
pub fn mi_monte_carlo(
    model: &Model,
    channel: &Channel,
    theta: &ParamPoint,
    n_samples: usize,
    stream: RngStream,
) -> Result<MIEstimate> {
    mi_monte_carlo_with(model, channel, theta, n_samples, stream, Execution::Parallel)
}

pub fn mi_monte_carlo_with(
    model: &Model,
    channel: &Channel,
    theta: &ParamPoint,
    n_samples: usize,
    stream: RngStream,
    exec: Execution,
) -> Result<MIEstimate> {
    let pipe = Pipeline::new(model, channel)?;
    model.check_param(theta)?;
    if n_samples < 2 {
        return Err(Error::Validation("Monte Carlo needs at least 2 samples".into()));
    }
    // probe the kernel once so degenerate kernels fail before sampling
    let mut probe_rng = stream.substream(u64::MAX).rng();
    let x0 = model.sample(theta, &mut probe_rng)?;
    let y0 = channel.sample(&x0, &mut probe_rng)?;
    channel.kernel_log_density(&x0, &y0)?;

    let log_marginal: Box<dyn Fn(&Sample) -> f64 + Sync> = match &pipe {
        Pipeline::Discrete { .. } | Pipeline::GaussianQuantizer { .. } => {
            let law = pipe.output_law(model, theta)?;
            let log_pmf: Vec<f64> = law.pmf.iter().map(|p| p.ln()).collect();
            Box::new(move |y: &Sample| log_pmf[y.as_symbol().expect("symbol output")])
        }
        Pipeline::GaussianAwgn { gauss, sigma_noise } => {
            let var = gauss.sigma * gauss.sigma + sigma_noise * sigma_noise;
            let mean = theta.0.clone();
            let norm = -(gauss.dim as f64) * (HALF_LN_2PI + 0.5 * var.ln());
            Box::new(move |y: &Sample| {
                let yv = y.as_real().expect("real output");
                let sq: f64 = yv.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum();
                norm - sq / (2.0 * var)
            })
        }
    };
    let est = chunked_mean(n_samples, stream, exec, |rng| {
        let x = model.sample_unchecked(theta, rng);
        let y = channel.sample_unchecked(&x, rng);
        channel.kernel_log_density(&x, &y).expect("kernel probed") - log_marginal(&y)
    });
    Ok(MIEstimate {
        quantity: "I(X;Y)".into(),
        value: est.mean,
        std_error: est.std_error,
        method: MiMethodTag::MonteCarlo,
        n_samples,
    })
}

/// Dispatches on [`MiMethod`].
pub fn mutual_information_with(model: &Model, channel: &Channel, theta: &ParamPoint, method: &MiMethod) -> Result<MIEstimate> {
    match method {
        MiMethod::Exact => mi_exact(model, channel, theta),
        MiMethod::MonteCarlo { n_samples, stream } => {
            mi_monte_carlo(model, channel, theta, *n_samples, *stream)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Capacity {
    /// Capacity in nats (the lower end of the final bracket).
    pub capacity: f64,
    pub upper_bound: f64,
    pub input_pmf: Vec<f64>,
    pub iterations: usize,
}

/// Blahut–Arimoto iteration from the uniform input, stopped when the
/// capacity bracket `[ln Σ r·c, ln max c]` is narrower than `tol`.
pub fn capacity_blahut_arimoto(channel: &DiscreteChannel, tol: f64, max_iter: usize) -> Result<Capacity> {
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tol must be positive, got {tol}")));
    }
    // re-validate in case the matrix was built by hand
    let channel = DiscreteChannel::new(channel.rows().to_vec())?;
    let nx = channel.input_size();
    let mut r = vec![1.0 / nx as f64; nx];
    let mut gap = f64::INFINITY;
    for it in 1..=max_iter {
        let q = crate::channels::push_forward_pmf(&r, &channel)?;
        // c(x) = exp(KL(W(·|x) ‖ q))
        let d: Vec<f64> = channel
            .rows()
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&q)
                    .filter(|(w, _)| **w > 0.0)
                    .map(|(w, qy)| w * (w / qy).ln())
                    .sum::<f64>()
            })
            .collect();
        let dmax = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // shift by dmax to keep the exponentials in range
        let c: Vec<f64> = d.iter().map(|v| (v - dmax).exp()).collect();
        let z: f64 = r.iter().zip(&c).map(|(a, b)| a * b).sum();
        let lower = dmax + z.ln();
        let upper = dmax;
        gap = upper - lower;
        if gap < tol {
            return Ok(Capacity {
                capacity: lower.max(0.0),
                upper_bound: upper,
                input_pmf: r,
                iterations: it,
            });
        }
        r = r.iter().zip(&c).map(|(a, b)| a * b / z).collect();
    }
    Err(Error::Convergence {
        iterations: max_iter,
        gap,
    })
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::Shape(format!("pmfs have lengths {} and {}", p.len(), q.len())));
    }
    for (name, v) in [("p", p), ("q", q)] {
        if v.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::Validation(format!("{name} has a negative or non-finite entry")));
        }
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!("{name} sums to {s}, not 1")));
        }
    }
    Ok(())
}

fn kl_raw(p: &[f64], q: &[f64]) -> Result<f64> {
    let mut kl = 0.0;
    for (index, (&a, &b)) in p.iter().zip(q).enumerate() {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return Err(Error::DivergenceInfinite { index, p_val: a });
        }
        kl += a * (a / b).ln();
    }
    Ok(kl.max(0.0))
}

/// `KL(p‖q)` for pmfs on a shared alphabet.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<DivergenceValue> {
    check_pair(p, q)?;
    Ok(DivergenceValue {
        value: kl_raw(p, q)?,
        kind: DivergenceKind::Kl,
        method: DivergenceMethod::ExactDiscrete,
        std_error: 0.0,
    })
}

/// `JS(p‖q) = KL(p‖m) + KL(q‖m)` (unhalved) for pmfs on a shared alphabet.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<DivergenceValue> {
    check_pair(p, q)?;
    Ok(DivergenceValue {
        value: js_raw(p, q),
        kind: DivergenceKind::Js,
        method: DivergenceMethod::ExactDiscrete,
        std_error: 0.0,
    })
}

/// Symmetric in its arguments term by term, so `js_raw(p, q) == js_raw(q, p)`
/// bit for bit.
pub(crate) fn js_raw(p: &[f64], q: &[f64]) -> f64 {
    let mut js = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = 0.5 * (a + b);
        let ta = if a > 0.0 { a * (a / m).ln() } else { 0.0 };
        let tb = if b > 0.0 { b * (b / m).ln() } else { 0.0 };
        js += ta + tb;
    }
    js.clamp(0.0, 2.0 * LN_2)
}

/// A law on `R^k` with an exact log-density and a sampler.
pub trait Density: Sync {
    fn dim(&self) -> usize;
    fn log_density(&self, x: &[f64]) -> f64;
    fn sample_into(&self, rng: &mut SimRng, out: &mut Vec<f64>);
}

/// `N(mean, var·I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicGaussian {
    pub mean: Vec<f64>,
    pub var: f64,
}

impl IsotropicGaussian {
    pub fn new(mean: Vec<f64>, var: f64) -> Result<Self> {
        if !(var > 0.0) || mean.is_empty() {
            return Err(Error::Validation("need a non-empty mean and positive variance".into()));
        }
        Ok(Self { mean, var })
    }
}

impl Density for IsotropicGaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let sq: f64 = x.iter().zip(&self.mean).map(|(a, b)| (a - b) * (a - b)).sum();
        -(self.mean.len() as f64) * (HALF_LN_2PI + 0.5 * self.var.ln()) - sq / (2.0 * self.var)
    }

    fn sample_into(&self, rng: &mut SimRng, out: &mut Vec<f64>) {
        out.clear();
        let sd = self.var.sqrt();
        out.extend(self.mean.iter().map(|m| {
            let z: f64 = rng.sample(StandardNormal);
            m + sd * z
        }));
    }
}

fn check_dims(p: &dyn Density, q: &dyn Density) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::Shape(format!("densities on R^{} and R^{}", p.dim(), q.dim())));
    }
    Ok(())
}

/// Monte Carlo `KL(P‖Q) = E_P[ln p − ln q]`.
pub fn kl_divergence_mc<P: Density, Q: Density>(p: &P, q: &Q, n_samples: usize, stream: RngStream) -> Result<DivergenceValue> {
    check_dims(p, q)?;
    let est = chunked_mean(n_samples, stream, Execution::Parallel, |rng| {
        let mut x = Vec::with_capacity(p.dim());
        p.sample_into(rng, &mut x);
        p.log_density(&x) - q.log_density(&x)
    });
    Ok(DivergenceValue {
        value: est.mean,
        kind: DivergenceKind::Kl,
        method: DivergenceMethod::MonteCarlo,
        std_error: est.std_error,
    })
}

/// Monte Carlo JS: `E_P[ln(2p/(p+q))] + E_Q[ln(2q/(p+q))]`, each term on its
/// own substream.
pub fn js_divergence_mc<P: Density, Q: Density>(p: &P, q: &Q, n_samples: usize, stream: RngStream) -> Result<DivergenceValue> {
    check_dims(p, q)?;
    let term = |first: &dyn Density, other: &dyn Density, s: RngStream| {
        chunked_mean(n_samples, s, Execution::Parallel, |rng| {
            let mut x = Vec::with_capacity(first.dim());
            first.sample_into(rng, &mut x);
            let lf = first.log_density(&x);
            let lo = other.log_density(&x);
            LN_2 + lf - log_sum_exp(lf, lo)
        })
    };
    let a = term(p, q, stream.substream(0));
    let b = term(q, p, stream.substream(1));
    Ok(DivergenceValue {
        value: a.mean + b.mean,
        kind: DivergenceKind::Js,
        method: DivergenceMethod::MonteCarlo,
        std_error: (a.std_error.powi(2) + b.std_error.powi(2)).sqrt(),
    })
}

/// `I(V;Π)` for a uniform binary prior over two parameters, given the JS
/// divergence of the two induced laws: half of it.
pub fn mi_prior_from_js(js_value: f64) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    if !(-SLACK..=2.0 * LN_2 + SLACK).contains(&js_value) {
        return Err(Error::Validation(format!(
            "JS value {js_value} outside [0, 2 ln 2]"
        )));
    }
    Ok((0.5 * js_value).clamp(0.0, LN_2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{QuantizerChannel, RandomizedResponseChannel};
    use proptest::prelude::*;
    use rand::Rng;

    fn bsc(p: f64) -> DiscreteChannel {
        DiscreteChannel::bsc(p).unwrap()
    }

    /// Brute-force oracle: H(Y) − H(Y|X) computed from the joint table.
    fn mi_oracle(px: &[f64], w: &DiscreteChannel) -> f64 {
        let ny = w.output_size();
        let mut py = vec![0.0; ny];
        let mut h_y_given_x = 0.0;
        for (x, p) in px.iter().enumerate() {
            for y in 0..ny {
                py[y] += p * w.entry(x, y);
            }
            h_y_given_x += p * entropy(&w.rows()[x]);
        }
        entropy(&py) - h_y_given_x
    }

    #[test]
    fn exact_discrete_examples() {
        let b = Model::bernoulli();
        let half = ParamPoint::scalar(0.5);
        let v = mi_exact_discrete(&b, &bsc(0.25), &half).unwrap();
        let closed = LN_2 - binary_entropy(0.25);
        assert!((v.value - closed).abs() < 1e-15);
        assert!((v.value - mi_oracle(&[0.5, 0.5], &bsc(0.25))).abs() < 1e-15);
        assert!((v.value - 0.1308).abs() < 1e-4);
        assert_eq!(v.std_error, 0.0);

        let id = mi_exact_discrete(&b, &DiscreteChannel::identity(2).unwrap(), &half).unwrap();
        assert!((id.value - LN_2).abs() < 1e-15);
        assert_eq!(mi_exact_discrete(&b, &bsc(0.5), &half).unwrap().value, 0.0);
    }

    #[test]
    fn gaussian_awgn_examples() {
        assert!((mi_gaussian_awgn(1.0, 1.0, 1).unwrap().value - 0.5 * LN_2).abs() < 1e-15);
        let v = mi_gaussian_awgn(1.0, 1.0, 100).unwrap().value;
        assert!((v - 50.0 * LN_2).abs() < 1e-12);
        assert!((v - 34.657).abs() < 1e-3);
        assert!(mi_gaussian_awgn(1.0, 1e8, 1).unwrap().value < 1e-15);
        assert!(mi_gaussian_awgn(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn monte_carlo_matches_oracles() {
        let g = Model::gaussian(1.0, 1).unwrap();
        let awgn = Channel::awgn(1.0).unwrap();
        let est = mi_monte_carlo(&g, &awgn, &ParamPoint::scalar(0.0), 1_000_000, RngStream::new(1)).unwrap();
        let exact = mi_gaussian_awgn(1.0, 1.0, 1).unwrap().value;
        assert!((est.value - exact).abs() < 4.0 * est.std_error, "{est:?}");
        assert!((est.value - 0.3466).abs() < 0.002);

        let b = Model::bernoulli();
        let ch = Channel::bsc(0.25).unwrap();
        let est = mi_monte_carlo(&b, &ch, &ParamPoint::scalar(0.5), 1_000_000, RngStream::new(2)).unwrap();
        assert!((est.value - 0.130812).abs() < 4.0 * est.std_error);
        assert!((est.value - 0.1308).abs() < 0.001);

        let ind = mi_monte_carlo(&b, &Channel::bsc(0.5).unwrap(), &ParamPoint::scalar(0.3), 100_000, RngStream::new(3)).unwrap();
        assert!(ind.value.abs() <= 3.0 * ind.std_error + 1e-15);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_thread_independent() {
        let g = Model::gaussian(0.7, 2).unwrap();
        let ch = Channel::awgn(0.4).unwrap();
        let t = ParamPoint::new(vec![0.1, -0.3]);
        let a = mi_monte_carlo_with(&g, &ch, &t, 100_000, RngStream::new(5), Execution::Sequential).unwrap();
        let b = mi_monte_carlo_with(&g, &ch, &t, 100_000, RngStream::new(5), Execution::Parallel).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a, b);
    }

    #[test]
    fn monte_carlo_rejects_point_mass_kernels() {
        let g = Model::gaussian(1.0, 1).unwrap();
        let q = Channel::Quantizer(QuantizerChannel::new(2, -1.0, 1.0, false).unwrap());
        let err = mi_monte_carlo(&g, &q, &ParamPoint::scalar(0.0), 1000, RngStream::new(1)).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
        // the exact route handles it
        assert!(mi_exact(&g, &q, &ParamPoint::scalar(0.0)).is_ok());
    }

    #[test]
    fn dithered_quantizer_mi_quadrature_vs_monte_carlo() {
        let g = Model::gaussian(0.8, 1).unwrap();
        let q = Channel::Quantizer(QuantizerChannel::new(2, -1.0, 1.0, true).unwrap());
        let t = ParamPoint::scalar(0.2);
        let exact = mi_exact(&g, &q, &t).unwrap();
        let mc = mi_monte_carlo(&g, &q, &t, 400_000, RngStream::new(8)).unwrap();
        assert!((exact.value - mc.value).abs() < 4.0 * mc.std_error, "{exact:?} {mc:?}");
        assert!(exact.value <= 2.0 * LN_2);
    }

    #[test]
    fn capacity_examples() {
        let c = capacity_blahut_arimoto(&bsc(0.25), 1e-10, 10_000).unwrap();
        assert!((c.capacity - (LN_2 - binary_entropy(0.25))).abs() < 1e-9);
        assert!((c.input_pmf[0] - 0.5).abs() < 1e-9);

        let c = capacity_blahut_arimoto(&DiscreteChannel::identity(2).unwrap(), 1e-10, 100).unwrap();
        assert!((c.capacity - LN_2).abs() < 1e-12);

        let c = capacity_blahut_arimoto(&DiscreteChannel::bec(0.3).unwrap(), 1e-10, 100).unwrap();
        assert!((c.capacity - 0.7 * LN_2).abs() < 1e-9);

        // asymmetric Z-channel: closed form ln(1 + (1−p) p^{p/(1−p)})
        let p: f64 = 0.4;
        let z = DiscreteChannel::new(vec![vec![1.0, 0.0], vec![p, 1.0 - p]]).unwrap();
        let c = capacity_blahut_arimoto(&z, 1e-12, 100_000).unwrap();
        let closed = (1.0 + (1.0 - p) * p.powf(p / (1.0 - p))).ln();
        assert!((c.capacity - closed).abs() < 1e-9, "{} vs {closed}", c.capacity);
    }

    #[test]
    fn capacity_errors() {
        let z = DiscreteChannel::new(vec![vec![1.0, 0.0], vec![0.4, 0.6]]).unwrap();
        assert!(matches!(
            capacity_blahut_arimoto(&z, 1e-14, 2),
            Err(Error::Convergence { iterations: 2, .. })
        ));
        assert!(capacity_blahut_arimoto(&z, 0.0, 2).is_err());
    }

    #[test]
    fn capacity_dominates_random_inputs() {
        use rand::Rng;
        let mut rng = RngStream::new(17).rng();
        for _ in 0..5 {
            let (nx, ny) = (rng.gen_range(2..6), rng.gen_range(2..6));
            let rows: Vec<Vec<f64>> = (0..nx)
                .map(|_| {
                    let r: Vec<f64> = (0..ny).map(|_| rng.gen::<f64>() + 0.01).collect();
                    let s: f64 = r.iter().sum();
                    r.into_iter().map(|v| v / s).collect()
                })
                .collect();
            let w = DiscreteChannel::new(rows).unwrap();
            let tol = 1e-9;
            let cap = capacity_blahut_arimoto(&w, tol, 100_000).unwrap();
            for _ in 0..20 {
                let r: Vec<f64> = (0..nx).map(|_| rng.gen::<f64>()).collect();
                let s: f64 = r.iter().sum();
                let px: Vec<f64> = r.into_iter().map(|v| v / s).collect();
                let mi = mutual_information(&px, &w).unwrap();
                assert!(mi <= cap.capacity + tol);
                assert!((mi - mi_oracle(&px, &w)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kl_and_js_examples() {
        let p = [0.75, 0.25];
        let q = [0.5, 0.5];
        assert_eq!(kl_divergence(&p, &p).unwrap().value, 0.0);
        let kl = kl_divergence(&p, &q).unwrap().value;
        assert!((kl - (0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln())).abs() < 1e-15);
        assert!((kl - 0.1308).abs() < 1e-4);
        assert!(matches!(
            kl_divergence(&[0.5, 0.5], &[1.0, 0.0]),
            Err(Error::DivergenceInfinite { index: 1, .. })
        ));

        assert_eq!(js_divergence(&p, &p).unwrap().value, 0.0);
        assert!((js_divergence(&[0.0, 1.0], &[1.0, 0.0]).unwrap().value - 2.0 * LN_2).abs() < 1e-15);
        let js = js_divergence(&[0.25, 0.75], &[0.75, 0.25]).unwrap().value;
        // four-term direct sum against m = (0.5, 0.5)
        let direct = 0.25 * (0.25f64 / 0.5).ln() + 0.75 * (0.75f64 / 0.5).ln() + 0.75 * (0.75f64 / 0.5).ln() + 0.25 * (0.25f64 / 0.5).ln();
        assert!((js - direct).abs() < 1e-15);
        assert!((js - 0.2616).abs() < 1e-4);
    }

    #[test]
    fn mc_divergences() {
        let p = IsotropicGaussian::new(vec![0.0], 1.0).unwrap();
        let q = IsotropicGaussian::new(vec![0.5], 1.0).unwrap();
        let kl = kl_divergence_mc(&p, &q, 400_000, RngStream::new(3)).unwrap();
        assert!((kl.value - 0.125).abs() < 4.0 * kl.std_error);
        let js = js_divergence_mc(&p, &p, 10_000, RngStream::new(3)).unwrap();
        assert!(js.value.abs() < 1e-15);
    }

    #[test]
    fn prior_mi_from_js() {
        assert_eq!(mi_prior_from_js(0.0).unwrap(), 0.0);
        assert!((mi_prior_from_js(2.0 * LN_2).unwrap() - LN_2).abs() < 1e-15);
        assert!((mi_prior_from_js(0.2616).unwrap() - 0.1308).abs() < 1e-15);
        assert!(mi_prior_from_js(-0.1).is_err());
        assert!(mi_prior_from_js(1.5).is_err());
    }

    #[test]
    fn randomized_response_mi_below_epsilon() {
        let b = Model::bernoulli();
        for i in 1..=30 {
            let eps = 0.1 * i as f64;
            let rr = RandomizedResponseChannel::new(eps).unwrap().matrix();
            for t in [0.1, 0.5, 0.9] {
                let mi = mi_exact_discrete(&b, &rr, &ParamPoint::scalar(t)).unwrap().value;
                assert!(mi <= eps);
            }
        }
    }

    fn pmf_strategy(max: usize) -> impl Strategy<Value = Vec<f64>> {
        (2..=max).prop_flat_map(|k| proptest::collection::vec(0.0f64..1.0, k)).prop_map(normalize)
    }

    fn normalize(v: Vec<f64>) -> Vec<f64> {
        let s: f64 = v.iter().sum::<f64>() + 1e-12;
        v.into_iter().map(|x| (x + 1e-12 / 8.0) / s).collect::<Vec<_>>()
    }

    proptest! {
        #[test]
        fn js_is_symmetric_and_bounded(p in pmf_strategy(8), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut q = p.clone();
            q.shuffle(&mut RngStream::new(seed).rng());
            let s: f64 = q.iter().sum();
            let a = js_raw(&p, &q);
            let b = js_raw(&q, &p);
            prop_assert_eq!(a.to_bits(), b.to_bits());
            prop_assert!((0.0..=2.0 * LN_2).contains(&a));
            prop_assert!((s - 1.0).abs() < 1e-9);
        }

        #[test]
        fn mi_is_bounded_by_entropies(px in pmf_strategy(5), seed in any::<u64>()) {
            let mut rng = RngStream::new(seed).rng();
            let ny = 3;
            let rows: Vec<Vec<f64>> = (0..px.len())
                .map(|_| normalize((0..ny).map(|_| rng.gen::<f64>()).collect()))
                .collect();
            let w = DiscreteChannel::new(rows).unwrap();
            let mi = mutual_information(&px, &w).unwrap();
            prop_assert!(mi >= 0.0);
            prop_assert!(mi <= entropy(&px) + 1e-12);
            prop_assert!(mi <= (ny as f64).ln() + 1e-12);
        }
    }
}
