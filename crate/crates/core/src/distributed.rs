//! Blackboard protocols: n nodes, each holding one sample, post messages in
//! rounds; every message may depend on the node's sample and on everything
//! already on the board.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::van_trees_lower_bound;
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::info::mi_exact;
use crate::mc::Execution;
use crate::models::{Model, ParamPoint, Sample};
use crate::rng::RngStream;

/// Points per coordinate of the parameter box used for `sup_θ I_θ`.
pub const SUP_GRID_POINTS: usize = 11;
/// Normal quantile of the reported confidence half-width.
const CI_Z: f64 = 1.96;

/// Chooses the kernel for message `Y_{i,t}` given the board so far.
pub trait ChannelFactory: Sync {
    /// `prior` holds every earlier message in board order.
    fn channel<'a>(&'a self, node: usize, round: usize, prior: &[Sample]) -> Result<Cow<'a, Channel>>;

    /// True when every message is an independent one-round use of a fixed
    /// channel per node, so the transcript information is an exact per-node sum.
    fn independent(&self) -> bool {
        false
    }
}

/// Every node uses the same channel, ignoring the board.
#[derive(Debug, Clone, PartialEq)]
pub struct IndependentChannels {
    pub channel: Channel,
}

impl IndependentChannels {
    pub fn new(channel: Channel) -> Self {
        Self { channel }
    }
}

impl ChannelFactory for IndependentChannels {
    fn channel<'a>(&'a self, _node: usize, _round: usize, _prior: &[Sample]) -> Result<Cow<'a, Channel>> {
        Ok(Cow::Borrowed(&self.channel))
    }

    fn independent(&self) -> bool {
        true
    }
}

/// A factory backed by a closure; never treated as independent.
pub struct FnFactory<F>(pub F);

impl<F> ChannelFactory for FnFactory<F>
where
    F: Fn(usize, usize, &[Sample]) -> Result<Channel> + Sync,
{
    fn channel<'a>(&'a self, node: usize, round: usize, prior: &[Sample]) -> Result<Cow<'a, Channel>> {
        (self.0)(node, round, prior).map(Cow::Owned)
    }
}

pub struct ProtocolConfig<'f> {
    pub model: Model,
    pub theta: ParamPoint,
    pub n: usize,
    pub rounds: usize,
    pub factory: &'f dyn ChannelFactory,
}

impl<'f> ProtocolConfig<'f> {
    pub fn new(model: Model, theta: ParamPoint, n: usize, rounds: usize, factory: &'f dyn ChannelFactory) -> Result<Self> {
        if n == 0 || rounds == 0 {
            return Err(Error::Validation(format!("need n ≥ 1 and T ≥ 1 (got n = {n}, T = {rounds})")));
        }
        model.check_param(&theta)?;
        Ok(Self {
            model,
            theta,
            n,
            rounds,
            factory,
        })
    }
}

/// All `n × T` messages, round-major: `messages[t·n + i] = Y_{i,t}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub n: usize,
    pub rounds: usize,
    pub messages: Vec<Sample>,
}

impl Transcript {
    pub fn get(&self, node: usize, round: usize) -> &Sample {
        &self.messages[round * self.n + node]
    }

    pub fn round(&self, round: usize) -> &[Sample] {
        &self.messages[round * self.n..(round + 1) * self.n]
    }
}

/// Draws the samples, then every message in board order.
pub fn run_protocol(config: &ProtocolConfig, stream: RngStream) -> Result<Transcript> {
    config.model.check_param(&config.theta)?;
    let mut rng = stream.rng();
    let xs: Vec<Sample> = (0..config.n)
        .map(|_| config.model.sample_unchecked(&config.theta, &mut rng))
        .collect();
    let mut messages = Vec::with_capacity(config.n * config.rounds);
    if config.factory.independent() && config.rounds == 1 {
        let ch = config.factory.channel(0, 0, &[])?;
        for (node, x) in xs.iter().enumerate() {
            if !ch.accepts(x) {
                return Err(Error::Protocol {
                    node,
                    round: 0,
                    detail: format!("{} channel cannot take {x:?}", ch.kind()),
                });
            }
            messages.push(ch.sample_unchecked(x, &mut rng));
        }
        return Ok(Transcript { n: config.n, rounds: 1, messages });
    }
    for round in 0..config.rounds {
        for (node, x) in xs.iter().enumerate() {
            let ch = config.factory.channel(node, round, &messages)?;
            if !ch.accepts(x) {
                return Err(Error::Protocol {
                    node,
                    round,
                    detail: format!("{} channel cannot take {x:?}", ch.kind()),
                });
            }
            let y = ch.sample_unchecked(x, &mut rng);
            messages.push(y);
        }
    }
    Ok(Transcript {
        n: config.n,
        rounds: config.rounds,
        messages,
    })
}

/// `(1/n) Σ Y_i` over a one-round real-valued transcript.
pub fn averaging_estimator(transcript: &Transcript) -> Result<ParamPoint> {
    if transcript.rounds != 1 {
        return Err(Error::MessageType(format!(
            "averaging needs one round, transcript has {}",
            transcript.rounds
        )));
    }
    let mut sum: Vec<f64> = Vec::new();
    for (i, m) in transcript.messages.iter().enumerate() {
        let v = m
            .as_real()
            .ok_or_else(|| Error::MessageType(format!("message {i} is {m:?}, not real-valued")))?;
        if sum.is_empty() {
            sum = vec![0.0; v.len()];
        } else if v.len() != sum.len() {
            return Err(Error::MessageType(format!("message {i} has {} coordinates, expected {}", v.len(), sum.len())));
        }
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    let n = transcript.messages.len() as f64;
    Ok(ParamPoint::new(sum.into_iter().map(|s| s / n).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiLabel {
    /// Independent one-round channels: the per-node sum is the transcript MI.
    Exact,
    /// Transcript-dependent factory: the per-node first-round sum stands in.
    PerNodeSurrogate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub trials: usize,
    pub mse: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub estimator: String,
    pub n_trials: usize,
    pub empirical_mse: f64,
    pub mse_std_error: f64,
    /// 95% normal-approximation half-width.
    pub ci: f64,
    pub closed_form_mse: Option<f64>,
    /// Van Trees lower bound; Gaussian location models only.
    pub lower_bound: Option<f64>,
    pub total_mi: Option<f64>,
    pub mi_label: Option<MiLabel>,
    pub tightness_ratio: Option<f64>,
    pub mean_estimate: Vec<f64>,
    pub mean_estimate_std_error: Vec<f64>,
    pub groups: Vec<GroupSummary>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// `sup_θ Σ_i I_θ(X_i; Y_{i,1})` over an 11-point grid per coordinate of the
/// model's parameter box.
fn sup_total_mi(config: &ProtocolConfig) -> Result<(f64, MiLabel)> {
    let Model::GaussianLocation(g) = &config.model else {
        return Err(Error::Capability("transcript information bound needs a Gaussian location model".into()));
    };
    let b = g.theta_bound;
    let axis: Vec<f64> = (0..SUP_GRID_POINTS)
        .map(|k| -b + 2.0 * b * k as f64 / (SUP_GRID_POINTS - 1) as f64)
        .collect();
    let label = if config.factory.independent() && config.rounds == 1 {
        MiLabel::Exact
    } else {
        MiLabel::PerNodeSurrogate
    };
    let channels: Vec<Cow<Channel>> = (0..config.n)
        .map(|i| config.factory.channel(i, 0, &[]))
        .collect::<Result<_>>()?;
    let identical = config.factory.independent();
    let mut best: f64 = 0.0;
    let points = SUP_GRID_POINTS.pow(g.dim as u32);
    for idx in 0..points {
        let mut k = idx;
        let theta = ParamPoint::new(
            (0..g.dim)
                .map(|_| {
                    let v = axis[k % SUP_GRID_POINTS];
                    k /= SUP_GRID_POINTS;
                    v
                })
                .collect(),
        );
        let total = if identical {
            config.n as f64 * mi_exact(&config.model, &channels[0], &theta)?.value
        } else {
            channels
                .iter()
                .map(|c| mi_exact(&config.model, c, &theta).map(|m| m.value))
                .sum::<Result<f64>>()?
        };
        best = best.max(total);
    }
    Ok((best, label))
}

/// Monte Carlo risk of `estimator`, trial `k` on substream `k`, summarized
/// overall and over `groups` contiguous blocks of trials.
pub fn empirical_mse<E>(
    config: &ProtocolConfig,
    name: &str,
    estimator: E,
    n_trials: usize,
    groups: usize,
    stream: RngStream,
    exec: Execution,
) -> Result<EstimationResult>
where
    E: Fn(&Transcript) -> Result<ParamPoint> + Sync,
{
    if n_trials < 100 {
        return Err(Error::Validation(format!("need at least 100 trials, got {n_trials}")));
    }
    if groups == 0 || groups > n_trials {
        return Err(Error::Validation(format!("groups must be in 1..={n_trials}, got {groups}")));
    }
    let trial = |k: usize| -> Result<Vec<f64>> {
        let t = run_protocol(config, stream.substream(k as u64))?;
        let est = estimator(&t).map_err(|e| Error::Estimator {
            trial: k,
            detail: e.to_string(),
        })?;
        if est.dim() != config.theta.dim() {
            return Err(Error::Estimator {
                trial: k,
                detail: format!("estimate has dimension {}, θ has {}", est.dim(), config.theta.dim()),
            });
        }
        Ok(est.0)
    };
    let estimates: Vec<Vec<f64>> = match exec {
        Execution::Sequential => (0..n_trials).map(trial).collect::<Result<_>>()?,
        Execution::Parallel => (0..n_trials).into_par_iter().map(trial).collect::<Result<_>>()?,
    };
    let sq: Vec<f64> = estimates
        .iter()
        .map(|e| e.iter().zip(&config.theta.0).map(|(a, b)| (a - b) * (a - b)).sum())
        .collect();
    let (mse, se) = mean_se(&sq);
    let d = config.theta.dim();
    let (mean_estimate, mean_estimate_std_error) = (0..d)
        .map(|j| mean_se(&estimates.iter().map(|e| e[j]).collect::<Vec<_>>()))
        .unzip();
    let group_summaries = (0..groups)
        .map(|g| {
            let (lo, hi) = (g * n_trials / groups, (g + 1) * n_trials / groups);
            let (m, s) = mean_se(&sq[lo..hi]);
            GroupSummary {
                trials: hi - lo,
                mse: m,
                std_error: s,
            }
        })
        .collect();
    let (lower_bound, total_mi, mi_label) = match &config.model {
        Model::GaussianLocation(g) => {
            let (mi, label) = sup_total_mi(config)?;
            (Some(van_trees_lower_bound(g.dim, g.sigma, mi)), Some(mi), Some(label))
        }
        _ => (None, None, None),
    };
    Ok(EstimationResult {
        estimator: name.to_string(),
        n_trials,
        empirical_mse: mse,
        mse_std_error: se,
        ci: CI_Z * se,
        closed_form_mse: None,
        lower_bound,
        total_mi,
        mi_label,
        tightness_ratio: lower_bound.map(|lb| lb / mse),
        mean_estimate,
        mean_estimate_std_error,
        groups: group_summaries,
    })
}

/// `d·(σ² + σ_n²)/n`, the risk of averaging n AWGN-corrupted samples.
pub fn averaging_closed_form_mse(sigma: f64, sigma_noise: f64, n: usize, d: usize) -> f64 {
    d as f64 * (sigma * sigma + sigma_noise * sigma_noise) / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessResult {
    pub sigma: f64,
    pub sigma_noise: f64,
    pub n: usize,
    /// Lower bound over the closed-form averaging risk.
    pub closed_form_ratio: f64,
    /// Lower bound over the simulated risk.
    pub empirical_ratio: f64,
    pub result: EstimationResult,
}

/// One-round AWGN protocol on a scalar Gaussian location model at θ = 0,
/// estimated by averaging.
pub fn awgn_tightness_experiment(sigma: f64, sigma_noise: f64, n: usize, n_trials: usize, groups: usize, stream: RngStream) -> Result<TightnessResult> {
    if !(sigma_noise >= sigma) {
        return Err(Error::Validation(format!(
            "tightness regime needs sigma_noise ≥ sigma (got {sigma_noise} < {sigma})"
        )));
    }
    let factory = IndependentChannels::new(Channel::awgn(sigma_noise)?);
    let config = ProtocolConfig::new(Model::gaussian(sigma, 1)?, ParamPoint::scalar(0.0), n, 1, &factory)?;
    let mut result = empirical_mse(&config, "averaging", averaging_estimator, n_trials, groups, stream, Execution::Parallel)?;
    let closed = averaging_closed_form_mse(sigma, sigma_noise, n, 1);
    result.closed_form_mse = Some(closed);
    let lb = result.lower_bound.expect("gaussian model");
    Ok(TightnessResult {
        sigma,
        sigma_noise,
        n,
        closed_form_ratio: lb / closed,
        empirical_ratio: lb / result.empirical_mse,
        result,
    })
}

/// CSV-ready row: `trial_group,n,sigma,sigma_noise,mi_total_nats,lower_bound,empirical_mse,ci,ratio`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessRow {
    pub trial_group: String,
    pub n: usize,
    pub sigma: f64,
    pub sigma_noise: f64,
    pub mi_total_nats: f64,
    pub lower_bound: f64,
    pub empirical_mse: f64,
    pub ci: f64,
    pub ratio: f64,
}

/// One row per trial group, then an `all` row.
pub fn tightness_rows(t: &TightnessResult) -> Vec<TightnessRow> {
    let r = &t.result;
    let lb = r.lower_bound.unwrap_or(f64::NAN);
    let mi = r.total_mi.unwrap_or(f64::NAN);
    let row = |label: String, mse: f64, se: f64| TightnessRow {
        trial_group: label,
        n: t.n,
        sigma: t.sigma,
        sigma_noise: t.sigma_noise,
        mi_total_nats: mi,
        lower_bound: lb,
        empirical_mse: mse,
        ci: CI_Z * se,
        ratio: lb / mse,
    };
    let mut rows: Vec<TightnessRow> = r
        .groups
        .iter()
        .enumerate()
        .map(|(g, s)| row(g.to_string(), s.mse, s.std_error))
        .collect();
    rows.push(row("all".into(), r.empirical_mse, r.mse_std_error));
    rows
}
