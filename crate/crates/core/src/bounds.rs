//! Evaluators for the Fisher–information inequalities.
//!
//! Every check produces a [`BoundReport`] carrying both sides, the slack, the
//! ingredients and a verdict. Monte Carlo ingredients contribute a standard
//! error; verdicts allow a 4-standard-error guard band plus an absolute
//! tolerance of `1e-9` for floating-point noise in exact pipelines.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, QuantizerChannel, RandomizedResponseChannel};
use crate::error::{Error, Result};
use crate::fisher::fisher_output;
use crate::info::{
    js_divergence, js_divergence_mc, mi_exact, mi_exact_discrete, mi_prior_from_js, mutual_information_with,
    IsotropicGaussian, MiMethod, MIEstimate,
};
use crate::models::{Model, ParamPoint};
use crate::numeric::GaussLegendre;
use crate::pipeline::Pipeline;
use crate::rng::RngStream;

/// Absolute tolerance for exact comparisons.
pub const EXACT_TOL: f64 = 1e-9;
/// Width of the Monte Carlo guard band, in standard errors.
pub const GUARD_SE: f64 = 4.0;
/// Default Gauss–Legendre order for path integrals.
pub const DEFAULT_PATH_NODES: usize = 16;
/// Default Monte Carlo sample count for the JS side of path-bound checks.
pub const DEFAULT_JS_SAMPLES: usize = 1_000_000;
/// Largest joint output alphabet enumerated for exact n-node JS.
const MAX_JOINT_ALPHABET: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

/// `holds` iff `lhs ≤ rhs + 4u + 1e-9`; `inconclusive` when either side or
/// the uncertainty is not a finite number.
pub fn verdict(lhs: f64, rhs: f64, uncertainty: f64) -> Verdict {
    if lhs.is_nan() || rhs.is_nan() || !uncertainty.is_finite() || uncertainty < 0.0 {
        return Verdict::Inconclusive;
    }
    if rhs == f64::INFINITY {
        return if lhs.is_finite() { Verdict::Holds } else { Verdict::Inconclusive };
    }
    if !lhs.is_finite() || !rhs.is_finite() {
        return Verdict::Inconclusive;
    }
    if lhs <= rhs + GUARD_SE * uncertainty + EXACT_TOL {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub uncertainty: f64,
    pub components: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(name: &str, lhs: f64, rhs: f64, uncertainty: f64, components: BTreeMap<String, f64>) -> Self {
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            slack: rhs - lhs,
            verdict: verdict(lhs, rhs, uncertainty),
            uncertainty,
            components,
            notes: Vec::new(),
        }
    }

    fn note(mut self, text: &str) -> Self {
        self.notes.push(text.to_string());
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

fn components<const K: usize>(items: [(&str, f64); K]) -> BTreeMap<String, f64> {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// `Tr I_Y(θ) ≤ 2N²·I_θ(X;Y)`.
pub fn thm1_verify(model: &Model, channel: &Channel, theta: &ParamPoint, mi_method: &MiMethod) -> Result<BoundReport> {
    let n = model.subgaussian_param(theta)?;
    let fisher = fisher_output(model, channel, theta)?;
    let mi = mutual_information_with(model, channel, theta, mi_method)?;
    let scale = 2.0 * n * n;
    let mut comps = components([
        ("N", n),
        ("mi_nats", mi.value),
        ("mi_std_error", mi.std_error),
        ("fisher_output_trace", fisher.trace),
    ]);
    for (j, t) in theta.0.iter().enumerate() {
        comps.insert(format!("theta_{j}"), *t);
    }
    Ok(BoundReport::new(
        "thm1_fisher_mi",
        fisher.trace,
        scale * mi.value,
        scale * mi.std_error,
        comps,
    ))
}

fn check_mi(total_mi: f64) -> Result<()> {
    if total_mi.is_nan() || total_mi < 0.0 {
        return Err(Error::Validation(format!("mutual information must be ≥ 0, got {total_mi}")));
    }
    Ok(())
}

/// Transcript Fisher trace bound `2N²·I(X_1..X_n; Π)`.
pub fn cor1_transcript_bound(n_param: f64, total_mi: f64) -> Result<f64> {
    check_mi(total_mi)?;
    if !(n_param > 0.0) {
        return Err(Error::Validation(format!("N must be positive, got {n_param}")));
    }
    Ok(2.0 * n_param * n_param * total_mi)
}

/// Van Trees minimax lower bound `d² / ((2/σ²)·sup I + π²d)` on the squared
/// error over `[-1, 1]^d`.
pub fn van_trees_lower_bound(d: usize, sigma: f64, sup_total_mi: f64) -> f64 {
    van_trees_lower_bound_with_constant(d, sigma, sup_total_mi, 2.0)
}

/// The same expression with `constant` in place of 2 in the denominator.
pub fn van_trees_lower_bound_with_constant(d: usize, sigma: f64, sup_total_mi: f64, constant: f64) -> f64 {
    let d = d as f64;
    d * d / (constant / (sigma * sigma) * sup_total_mi + PI * PI * d)
}

/// Straight path `θ_λ = λθ₁ + (1−λ)θ₀` with a quadrature rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub theta0: ParamPoint,
    pub theta1: ParamPoint,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PathSpec {
    pub fn gauss_legendre(theta0: ParamPoint, theta1: ParamPoint, n_nodes: usize) -> Result<Self> {
        if theta0.dim() != theta1.dim() {
            return Err(Error::Shape(format!(
                "path endpoints have dimensions {} and {}",
                theta0.dim(),
                theta1.dim()
            )));
        }
        if n_nodes == 0 {
            return Err(Error::Validation("path quadrature needs at least one node".into()));
        }
        let gl = GaussLegendre::new(n_nodes);
        Ok(Self {
            theta0,
            theta1,
            nodes: gl.nodes,
            weights: gl.weights,
        })
    }

    pub fn at(&self, lambda: f64) -> ParamPoint {
        self.theta0.lerp(&self.theta1, lambda)
    }

    pub fn length_sq(&self) -> f64 {
        self.theta0.distance_sq(&self.theta1)
    }

    /// Checks the rule and that the endpoints and every node lie in Θ.
    pub fn validate(&self, model: &Model) -> Result<()> {
        let wsum: f64 = self.weights.iter().sum();
        if self.nodes.len() != self.weights.len() || (wsum - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "path rule needs matching nodes/weights summing to 1 (sum {wsum})"
            )));
        }
        let endpoints = [0.0, 1.0];
        for &lambda in endpoints.iter().chain(&self.nodes) {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(Error::Path {
                    lambda,
                    detail: "node outside [0, 1]".into(),
                });
            }
            model.check_param(&self.at(lambda)).map_err(|e| Error::Path {
                lambda,
                detail: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// `∫₀¹ f(θ_λ) dλ` by the path rule.
    pub fn integrate<F: FnMut(&ParamPoint) -> Result<f64>>(&self, mut f: F) -> Result<f64> {
        let mut total = 0.0;
        for (&l, &w) in self.nodes.iter().zip(&self.weights) {
            total += w * f(&self.at(l))?;
        }
        Ok(total)
    }
}

/// Largest declared sub-Gaussian parameter over the endpoints and nodes of
/// the path.
pub fn path_subgaussian(model: &Model, path: &PathSpec) -> Result<f64> {
    path.validate(model)?;
    let mut n: f64 = 0.0;
    for &lambda in [0.0, 1.0].iter().chain(&path.nodes) {
        n = n.max(model.subgaussian_param(&path.at(lambda))?);
    }
    Ok(n)
}

/// Output law of n independent nodes, as one pmf over the joint alphabet.
fn joint_output_pmf(pipe: &Pipeline, model: &Model, theta: &ParamPoint, n: usize) -> Result<Vec<f64>> {
    let single = pipe.output_law(model, theta)?.pmf;
    let size = single
        .len()
        .checked_pow(n as u32)
        .filter(|&s| s <= MAX_JOINT_ALPHABET)
        .ok_or_else(|| {
            Error::Capability(format!(
                "joint alphabet {}^{n} too large for exact JS",
                single.len()
            ))
        })?;
    let mut joint = vec![1.0];
    for _ in 0..n {
        joint = joint
            .iter()
            .flat_map(|a| single.iter().map(move |b| a * b))
            .collect();
    }
    debug_assert_eq!(joint.len(), size);
    Ok(joint)
}

/// Options for [`thm2_js_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm2Options {
    /// Sub-Gaussian parameter; `None` takes the largest declared value along
    /// the path.
    pub subgaussian_n: Option<f64>,
    pub mi_method: MiMethod,
    /// Samples per term of the Monte Carlo JS, for continuous transcripts.
    pub js_samples: usize,
    pub stream: Option<RngStream>,
}

impl Default for Thm2Options {
    fn default() -> Self {
        Self {
            subgaussian_n: None,
            mi_method: MiMethod::Exact,
            js_samples: DEFAULT_JS_SAMPLES,
            stream: None,
        }
    }
}

/// `JS(Q_θ₀‖Q_θ₁) ≤ (‖θ₁−θ₀‖²N²/2)·∫₀¹ I_{θ_λ}(X_1..X_n;Π) dλ` for n nodes
/// each sending one message through an independent copy of `channel`.
pub fn thm2_js_bound(model: &Model, channel: &Channel, n: usize, path: &PathSpec, opts: &Thm2Options) -> Result<BoundReport> {
    if n == 0 {
        return Err(Error::Validation("need at least one node".into()));
    }
    let pipe = Pipeline::new(model, channel)?;
    path.validate(model)?;
    let big_n = match opts.subgaussian_n {
        Some(v) if v > 0.0 => v,
        Some(v) => return Err(Error::Validation(format!("N must be positive, got {v}"))),
        None => path_subgaussian(model, path)?,
    };
    let mut mi_se_sq = 0.0;
    let integral = path.integrate(|t| {
        let mi = mutual_information_with(model, channel, t, &opts.mi_method)?;
        mi_se_sq += mi.std_error * mi.std_error;
        Ok(n as f64 * mi.value)
    })?;
    // weights are at most 1, so this over-covers the weighted sum's error
    let mi_se = n as f64 * mi_se_sq.sqrt();
    let dist_sq = path.length_sq();
    let scale = 0.5 * dist_sq * big_n * big_n;
    let rhs = scale * integral;

    let (lhs, lhs_se) = match &pipe {
        Pipeline::GaussianAwgn { gauss, sigma_noise } => {
            if dist_sq == 0.0 {
                (0.0, 0.0)
            } else {
                let stream = opts.stream.ok_or_else(|| {
                    Error::Validation("continuous transcripts need a seed for the Monte Carlo JS".into())
                })?;
                let var = gauss.sigma * gauss.sigma + sigma_noise * sigma_noise;
                let stack = |t: &ParamPoint| t.0.iter().copied().cycle().take(n * gauss.dim).collect::<Vec<_>>();
                let p = IsotropicGaussian::new(stack(&path.theta0), var)?;
                let q = IsotropicGaussian::new(stack(&path.theta1), var)?;
                let js = js_divergence_mc(&p, &q, opts.js_samples, stream)?;
                (js.value, js.std_error)
            }
        }
        _ => {
            let p = joint_output_pmf(&pipe, model, &path.theta0, n)?;
            let q = joint_output_pmf(&pipe, model, &path.theta1, n)?;
            (js_divergence(&p, &q)?.value, 0.0)
        }
    };
    let comps = components([
        ("N", big_n),
        ("n", n as f64),
        ("dist_sq", dist_sq),
        ("path_integral_nats", integral),
        ("path_nodes", path.nodes.len() as f64),
        ("lhs_std_error", lhs_se),
        ("integral_std_error", mi_se),
    ]);
    let uncertainty = (lhs_se * lhs_se + (scale * mi_se).powi(2)).sqrt();
    Ok(BoundReport::new("thm2_js_path", lhs, rhs, uncertainty, comps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorRow {
    pub delta: f64,
    pub js: f64,
    /// `¼·Δᵀ I Δ`
    pub quadratic: f64,
    /// `|JS − ¼ΔᵀIΔ| / ‖Δ‖³`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorCheck {
    pub rows: Vec<TaylorRow>,
    pub max_ratio: f64,
    pub min_ratio: f64,
}

impl TaylorCheck {
    /// `max_ratio / min_ratio`; 1 when every residual vanishes.
    pub fn spread(&self) -> f64 {
        if self.max_ratio == 0.0 {
            1.0
        } else {
            self.max_ratio / self.min_ratio
        }
    }
}

/// Compares `JS(Q_θ‖Q_{θ+Δe₁})` with its quadratic approximation `¼Δ²I_11`
/// on a grid of steps along the first coordinate.
pub fn regularity_iv_taylor_check(model: &Model, channel: &Channel, theta: &ParamPoint, delta_grid: &[f64]) -> Result<TaylorCheck> {
    let pipe = Pipeline::new(model, channel)?;
    let fisher = fisher_output(model, channel, theta)?;
    let p = pipe.output_law(model, theta)?.pmf;
    let mut rows = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        let quadratic = 0.25 * delta * delta * fisher.entries[0][0];
        if delta == 0.0 {
            rows.push(TaylorRow { delta, js: 0.0, quadratic, ratio: 0.0 });
            continue;
        }
        let q = pipe.output_law(model, &theta.shifted(0, delta))?.pmf;
        let js = js_divergence(&p, &q)?.value;
        let ratio = (js - quadratic).abs() / delta.abs().powi(3);
        rows.push(TaylorRow { delta, js, quadratic, ratio });
    }
    let nonzero: Vec<f64> = rows.iter().filter(|r| r.delta != 0.0).map(|r| r.ratio).collect();
    Ok(TaylorCheck {
        max_ratio: nonzero.iter().copied().fold(0.0, f64::max),
        min_ratio: nonzero.iter().copied().fold(f64::INFINITY, f64::min),
        rows,
    })
}

fn check_c(c: f64) -> Result<()> {
    if !(c >= 1.0) || !c.is_finite() {
        return Err(Error::Validation(format!("likelihood-ratio bound c must be ≥ 1, got {c}")));
    }
    Ok(())
}

/// `K·(ln c)²·∫₀¹ I_λ dλ`. `K` is not known numerically; the value is a shape
/// for comparison, not a certified bound.
pub fn twist_bound_rhs(c: f64, mi_path_integral: f64, k: f64) -> Result<f64> {
    check_c(c)?;
    check_mi(mi_path_integral)?;
    Ok(k * c.ln().powi(2) * mi_path_integral)
}

/// `K·c·β·min_v I_v(X_1..X_n;Π)`, the bounded-likelihood-ratio SDPI form.
/// Shape only: the universal constant `K` is user supplied.
pub fn sdpi_bound_rhs(k: f64, c: f64, beta: f64, min_mi: f64) -> Result<f64> {
    check_c(c)?;
    check_mi(min_mi)?;
    if !(beta >= 0.0) {
        return Err(Error::Validation(format!("SDPI constant must be ≥ 0, got {beta}")));
    }
    Ok(k * c * beta * min_mi)
}

/// `I(V;Π)` for a uniform prior on the two endpoints of a twist family against
/// `K·(ln c)²·∫ I_λ dλ`, for n nodes through independent copies of `channel`.
pub fn twist_bound_report(model: &Model, channel: &Channel, n: usize, k: f64, path_nodes: usize) -> Result<BoundReport> {
    let Model::Twist(tw) = model else {
        return Err(Error::Capability(format!("twist bound needs a twist model, got {}", model.name())));
    };
    let pipe = Pipeline::new(model, channel)?;
    let path = PathSpec::gauss_legendre(ParamPoint::scalar(0.0), ParamPoint::scalar(1.0), path_nodes)?;
    let integral = path.integrate(|t| Ok(n as f64 * mi_exact(model, channel, t)?.value))?;
    let p = joint_output_pmf(&pipe, model, &path.theta0, n)?;
    let q = joint_output_pmf(&pipe, model, &path.theta1, n)?;
    let js = js_divergence(&p, &q)?.value;
    let lhs = mi_prior_from_js(js)?;
    let c = tw.likelihood_ratio_bound();
    let rhs = twist_bound_rhs(c, integral, k)?;
    let comps = components([
        ("c", c),
        ("K", k),
        ("n", n as f64),
        ("path_integral_nats", integral),
        ("js", js),
    ]);
    Ok(BoundReport::new("twist_sdpi", lhs, rhs, 0.0, comps).note("shape-only: K is not specified numerically"))
}

/// `I(X;Y) ≤ k ln 2` for a k-bit quantizer, and the Fisher-information bound with the quantizer
/// information, whose rhs is then at most `2N²·k ln 2`.
pub fn quantizer_special_case(model: &Model, quantizer: QuantizerChannel, theta: &ParamPoint) -> Result<(BoundReport, BoundReport)> {
    let channel = Channel::Quantizer(quantizer);
    let mi = mi_exact(model, &channel, theta)?;
    let cap = quantizer.bits as f64 * LN_2;
    let bits = BoundReport::new(
        "quantizer_mi_bits",
        mi.value,
        cap,
        0.0,
        components([("bits", quantizer.bits as f64), ("mi_nats", mi.value)]),
    );
    let mut thm1 = thm1_verify(model, &channel, theta, &MiMethod::Exact)?;
    let n = thm1.components["N"];
    thm1.components.insert("rhs_cap".into(), 2.0 * n * n * cap);
    Ok((bits, thm1))
}

/// `I(X;Y) ≤ ε` for ε-randomized response on a Bernoulli input, with the
/// observed `I/ε²` reported.
pub fn randomized_response_special_case(epsilon: f64, theta: &ParamPoint) -> Result<BoundReport> {
    let rr = RandomizedResponseChannel::new(epsilon)?;
    let mi: MIEstimate = mi_exact_discrete(&Model::bernoulli(), &rr.matrix(), theta)?;
    Ok(BoundReport::new(
        "rr_mi_epsilon",
        mi.value,
        epsilon,
        0.0,
        components([
            ("epsilon", epsilon),
            ("mi_over_eps_sq", mi.value / (epsilon * epsilon)),
            ("theta", theta.0[0]),
        ]),
    ))
}

/// One grid point of a `Tr I_Y ≤ 2N²·I(X;Y)` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCase {
    pub family: String,
    pub param1: f64,
    pub param2: f64,
    pub model: Model,
    pub channel: Channel,
    pub theta: ParamPoint,
    /// Monte Carlo sample count for the MI, or `None` for the exact route.
    pub mc_samples: Option<usize>,
}

/// Flat sweep result: `name,param1,param2,lhs,rhs,slack,verdict`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub name: String,
    pub param1: f64,
    pub param2: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub verdict: Verdict,
}

/// Runs every case, in parallel, case `i` drawing from substream `i`.
pub fn run_thm1_sweep(cases: &[SweepCase], stream: RngStream) -> Result<Vec<SweepRow>> {
    cases
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let method = match c.mc_samples {
                Some(n_samples) => MiMethod::MonteCarlo {
                    n_samples,
                    stream: stream.substream(i as u64),
                },
                None => MiMethod::Exact,
            };
            let r = thm1_verify(&c.model, &c.channel, &c.theta, &method)?;
            Ok(SweepRow {
                name: c.family.clone(),
                param1: c.param1,
                param2: c.param2,
                lhs: r.lhs,
                rhs: r.rhs,
                slack: r.slack,
                verdict: r.verdict,
            })
        })
        .collect()
}

fn grid(start: f64, step: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| start + step * i as f64)
}

/// Bernoulli θ ∈ {0.1..0.9} through BSC p ∈ {0, 0.05, .., 0.5}.
pub fn bernoulli_bsc_cases() -> Vec<SweepCase> {
    let mut out = Vec::new();
    for t in grid(0.1, 0.1, 9) {
        for p in grid(0.0, 0.05, 11) {
            out.push(SweepCase {
                family: "bernoulli_bsc".into(),
                param1: t,
                param2: p,
                model: Model::bernoulli(),
                channel: Channel::bsc(p).expect("valid crossover"),
                theta: ParamPoint::scalar(t),
                mc_samples: None,
            });
        }
    }
    out
}

/// The full Fisher-information bound grid: Bernoulli×BSC, Gaussian×AWGN (Monte Carlo MI at
/// `awgn_mc_samples`), Gaussian×k-bit quantizers, Bernoulli×randomized
/// response.
pub fn thm1_grid(awgn_mc_samples: usize) -> Vec<SweepCase> {
    let mut out = bernoulli_bsc_cases();
    for sigma in [0.5, 1.0, 2.0] {
        let model = Model::gaussian(sigma, 1).expect("positive sigma");
        for sn in [0.25, 0.5, 1.0, 2.0, 4.0] {
            out.push(SweepCase {
                family: "gaussian_awgn".into(),
                param1: sigma,
                param2: sn,
                model: model.clone(),
                channel: Channel::awgn(sn).expect("positive noise"),
                theta: ParamPoint::scalar(0.0),
                mc_samples: Some(awgn_mc_samples),
            });
        }
        for bits in 1..=4u32 {
            for t in [-0.5, 0.0, 0.5] {
                out.push(SweepCase {
                    family: "gaussian_quantizer".into(),
                    param1: sigma,
                    param2: bits as f64,
                    model: model.clone(),
                    channel: Channel::Quantizer(QuantizerChannel::new(bits, -1.0, 1.0, false).expect("valid quantizer")),
                    theta: ParamPoint::scalar(t),
                    mc_samples: None,
                });
            }
        }
    }
    for eps in grid(0.1, 0.1, 30) {
        for t in [0.2, 0.5, 0.8] {
            out.push(SweepCase {
                family: "bernoulli_rr".into(),
                param1: t,
                param2: eps,
                model: Model::bernoulli(),
                channel: Channel::Discrete(RandomizedResponseChannel::new(eps).expect("positive epsilon").matrix()),
                theta: ParamPoint::scalar(t),
                mc_samples: None,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::binary_entropy;

    #[test]
    fn verdict_rule() {
        assert_eq!(verdict(1.0, 1.047, 0.0), Verdict::Holds);
        assert_eq!(verdict(1.0, 1.0 - 5e-10, 0.0), Verdict::Holds);
        assert_eq!(verdict(1.0, 0.9, 0.0), Verdict::Violated);
        assert_eq!(verdict(1.0, 0.9, 0.03), Verdict::Holds);
        assert_eq!(verdict(f64::NAN, 1.0, 0.0), Verdict::Inconclusive);
        assert_eq!(verdict(1.0, 2.0, f64::INFINITY), Verdict::Inconclusive);
        assert_eq!(verdict(1.0, f64::INFINITY, 0.0), Verdict::Holds);
    }

    #[test]
    fn thm1_examples() {
        let b = Model::bernoulli();
        let r = thm1_verify(&b, &Channel::bsc(0.25).unwrap(), &ParamPoint::scalar(0.5), &MiMethod::Exact).unwrap();
        let mi = LN_2 - binary_entropy(0.25);
        assert!((r.lhs - 1.0).abs() < 1e-14);
        assert!((r.rhs - 8.0 * mi).abs() < 1e-14);
        assert!((r.rhs - 1.047).abs() < 1e-3);
        assert!((r.slack - 0.0465).abs() < 1e-3);
        assert!(r.holds());

        let g = Model::gaussian(1.0, 1).unwrap();
        let r = thm1_verify(&g, &Channel::awgn(1.0).unwrap(), &ParamPoint::scalar(0.0), &MiMethod::Exact).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-15);
        assert!((r.rhs - LN_2).abs() < 1e-15);
        assert!(r.holds());

        let r = thm1_verify(&b, &Channel::bsc(0.5).unwrap(), &ParamPoint::scalar(0.3), &MiMethod::Exact).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.holds());

        assert!(matches!(
            thm1_verify(&g, &Channel::bsc(0.1).unwrap(), &ParamPoint::scalar(0.0), &MiMethod::Exact),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn cor1_and_van_trees() {
        assert!((cor1_transcript_bound(1.0, 34.657).unwrap() - 69.314).abs() < 1e-9);
        assert_eq!(cor1_transcript_bound(1.0, 0.0).unwrap(), 0.0);
        assert!((cor1_transcript_bound(1.0 / 0.1, 1.0).unwrap() - 200.0).abs() < 1e-9);
        assert!(cor1_transcript_bound(1.0, -1.0).is_err());

        let mi = 50.0 * LN_2;
        let lb = van_trees_lower_bound(1, 1.0, mi);
        assert!((lb - 1.0 / (100.0 * LN_2 + PI * PI)).abs() < 1e-15);
        assert!((lb - 0.0126288).abs() < 1e-6);
        assert_eq!(van_trees_lower_bound(1, 1.0, f64::INFINITY), 0.0);
        let mi = 5000.0 * 1.01f64.ln();
        let lb = van_trees_lower_bound(1, 0.1, mi);
        assert!((lb - 1.0040e-4).abs() < 1e-8, "{lb}");
        // strictly decreasing in the information
        let vals: Vec<f64> = (0..20).map(|i| van_trees_lower_bound(2, 0.5, i as f64)).collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn constant_below_two_contradicts_closed_form_mse() {
        let mi = 5000.0 * 1.01f64.ln();
        let mse = 0.01 / 1e4 * (1.0 + 100.0);
        assert!(van_trees_lower_bound(1, 0.1, mi) <= mse);
        assert!(van_trees_lower_bound_with_constant(1, 0.1, mi, 1.8) > mse);
    }

    #[test]
    fn thm2_discrete_path() {
        let b = Model::bernoulli();
        let ch = Channel::bsc(0.25).unwrap();
        let path = PathSpec::gauss_legendre(ParamPoint::scalar(0.4), ParamPoint::scalar(0.6), 16).unwrap();
        let r = thm2_js_bound(&b, &ch, 1, &path, &Thm2Options::default()).unwrap();
        assert!(r.holds(), "{r:?}");
        assert_eq!(r.components["N"], 2.5);
        // exact JS of the two BSC outputs, q = 0.45 and 0.55
        let direct = 2.0 * (0.45 * (0.45f64 / 0.5).ln() + 0.55 * (0.55f64 / 0.5).ln());
        assert!((r.lhs - direct).abs() < 1e-15);

        let r32 = thm2_js_bound(&b, &ch, 1, &PathSpec::gauss_legendre(ParamPoint::scalar(0.4), ParamPoint::scalar(0.6), 32).unwrap(), &Thm2Options::default()).unwrap();
        assert!((r32.rhs - r.rhs).abs() / r.rhs < 1e-3);

        let r3 = thm2_js_bound(&b, &ch, 3, &path, &Thm2Options::default()).unwrap();
        assert!(r3.holds() && r3.lhs > r.lhs);

        let same = PathSpec::gauss_legendre(ParamPoint::scalar(0.4), ParamPoint::scalar(0.4), 16).unwrap();
        let r0 = thm2_js_bound(&b, &ch, 1, &same, &Thm2Options::default()).unwrap();
        assert_eq!((r0.lhs, r0.rhs), (0.0, 0.0));
    }

    #[test]
    fn thm2_gaussian_path() {
        let g = Model::gaussian(1.0, 1).unwrap();
        let ch = Channel::awgn(1.0).unwrap();
        let path = PathSpec::gauss_legendre(ParamPoint::scalar(0.0), ParamPoint::scalar(0.5), 16).unwrap();
        let opts = Thm2Options {
            js_samples: 200_000,
            stream: Some(RngStream::new(4)),
            ..Thm2Options::default()
        };
        let r = thm2_js_bound(&g, &ch, 1, &path, &opts).unwrap();
        assert!((r.rhs - 0.125 * 0.5 * LN_2).abs() < 1e-12);
        assert!((r.rhs - 0.04332).abs() < 1e-5);
        assert!((r.lhs - 0.03125).abs() < 0.003, "{r:?}");
        assert!(r.holds());
        // no seed, no Monte Carlo
        assert!(thm2_js_bound(&g, &ch, 1, &path, &Thm2Options::default()).is_err());
    }

    #[test]
    fn path_outside_parameter_space() {
        let b = Model::bernoulli();
        let path = PathSpec::gauss_legendre(ParamPoint::scalar(0.5), ParamPoint::scalar(1.2), 4).unwrap();
        assert!(matches!(path.validate(&b), Err(Error::Path { .. })));
        let g = Model::gaussian(1.0, 1).unwrap();
        let path = PathSpec::gauss_legendre(ParamPoint::scalar(0.0), ParamPoint::scalar(2.0), 4).unwrap();
        assert!(matches!(
            thm2_js_bound(&g, &Channel::awgn(1.0).unwrap(), 1, &path, &Thm2Options::default()),
            Err(Error::Path { .. })
        ));
    }

    #[test]
    fn taylor_check() {
        let b = Model::bernoulli();
        let ch = Channel::bsc(0.25).unwrap();
        let grid = [0.1, 0.05, 0.025];
        for t in [0.2, 0.3, 0.4, 0.6, 0.7, 0.8] {
            let c = regularity_iv_taylor_check(&b, &ch, &ParamPoint::scalar(t), &grid).unwrap();
            assert!(c.spread() < 2.0, "theta={t} {c:?}");
        }
        // at the symmetric point the cubic term cancels; residuals still shrink
        let c = regularity_iv_taylor_check(&b, &ch, &ParamPoint::scalar(0.5), &grid).unwrap();
        assert!(c.rows.windows(2).all(|w| w[1].ratio < w[0].ratio));
        assert!(c.max_ratio < 1.0);

        let c = regularity_iv_taylor_check(&b, &ch, &ParamPoint::scalar(0.5), &[0.0]).unwrap();
        assert_eq!((c.rows[0].js, c.rows[0].quadratic), (0.0, 0.0));
        let c = regularity_iv_taylor_check(&b, &Channel::bsc(0.5).unwrap(), &ParamPoint::scalar(0.5), &grid).unwrap();
        assert!(c.rows.iter().all(|r| r.js == 0.0 && r.ratio == 0.0));
    }

    #[test]
    fn twist_shapes() {
        assert_eq!(twist_bound_rhs(1.0, 0.5, 3.0).unwrap(), 0.0);
        let v = twist_bound_rhs(1.5, 0.1308, 1.0).unwrap();
        assert!((v - 1.5f64.ln().powi(2) * 0.1308).abs() < 1e-15);
        assert!((v - 0.02151).abs() < 1e-5);
        assert_eq!(twist_bound_rhs(1.5, 0.1308, 2.0).unwrap(), 2.0 * v);
        assert!(twist_bound_rhs(0.9, 0.1, 1.0).is_err());
        assert_eq!(sdpi_bound_rhs(1.0, 2.0, 0.5, 0.3).unwrap(), 0.3);

        let tw = Model::twist(vec![0.25, 0.75], vec![0.375, 0.625]).unwrap();
        let r = twist_bound_report(&tw, &Channel::bsc(0.1).unwrap(), 2, 1.0, 16).unwrap();
        assert!(r.lhs > 0.0 && r.rhs > 0.0);
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn special_cases() {
        let g = Model::gaussian(1.0, 1).unwrap();
        for bits in 1..=4 {
            let q = QuantizerChannel::new(bits, -1.0, 1.0, false).unwrap();
            let (b, t) = quantizer_special_case(&g, q, &ParamPoint::scalar(0.0)).unwrap();
            assert!(b.holds() && t.holds());
            assert!(t.rhs <= t.components["rhs_cap"] + 1e-12);
        }
        for i in 1..=30 {
            let r = randomized_response_special_case(0.1 * i as f64, &ParamPoint::scalar(0.5)).unwrap();
            assert!(r.holds());
            assert!(r.components["mi_over_eps_sq"] < 0.5);
        }
    }

    #[test]
    fn sweep_csv_rows_hold() {
        let rows = run_thm1_sweep(&bernoulli_bsc_cases(), RngStream::new(1)).unwrap();
        assert_eq!(rows.len(), 99);
        assert!(rows.iter().all(|r| r.verdict == Verdict::Holds));
        assert!(thm1_grid(1000).len() >= 150);
    }

    #[test]
    fn report_json_shape() {
        let r = thm1_verify(&Model::bernoulli(), &Channel::bsc(0.25).unwrap(), &ParamPoint::scalar(0.5), &MiMethod::Exact).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in ["name", "lhs", "rhs", "slack", "verdict", "uncertainty", "components"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["verdict"], "holds");
        assert!(v.get("notes").is_none());
    }
}
