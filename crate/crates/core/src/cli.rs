//! Command-line front end.
//!
//! Every subcommand can be driven by flags or by a JSON config (`--config`).
//! Exit status: 0 when every bound verdict holds, 1 on a violation or an
//! inconclusive verdict (unless `--allow-inconclusive`), 2 on a malformed
//! config or a failed computation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bounds::{
    run_thm1_sweep, thm1_grid, thm2_js_bound, thm1_verify, BoundReport, PathSpec, SweepCase,
    SweepRow, Thm2Options, Verdict, GUARD_SE,
};
use crate::channels::{Channel, ChannelSpec, DiscreteChannel};
use crate::distributed::{
    averaging_estimator, awgn_tightness_experiment, empirical_mse, tightness_rows, EstimationResult,
    IndependentChannels, ProtocolConfig, TightnessResult, TightnessRow,
};
use crate::error::Error;
use crate::info::{capacity_blahut_arimoto, MiMethod};
use crate::mc::Execution;
use crate::models::{Model, ParamPoint};
use crate::numeric::fmt_sig;
use crate::rng::RngStream;

/// Significant digits in CSV output.
pub const CSV_DIGITS: usize = 12;
const DEFAULT_MC_SAMPLES: usize = 1_000_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Config or descriptor does not validate; `path` locates the field.
    #[error("invalid config at `{path}`: {detail}")]
    Schema { path: String, detail: String },
    #[error(transparent)]
    Run(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

fn schema(path: &str, detail: impl Into<String>) -> CliError {
    CliError::Schema {
        path: path.to_string(),
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MiChoice {
    #[default]
    Exact,
    #[value(name = "mc")]
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// BSC crossover p ∈ {0, 0.05, .., 0.5} at the given θ.
    BscP,
    /// The full Fisher-information bound grid.
    Thm1Grid,
}

fn default_samples() -> usize {
    DEFAULT_MC_SAMPLES
}
fn default_tol() -> f64 {
    1e-10
}
fn default_max_iter() -> usize {
    100_000
}
fn default_one() -> usize {
    1
}
fn default_nodes() -> usize {
    16
}
fn default_trials() -> usize {
    100_000
}
fn default_groups() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    pub model: Model,
    #[serde(default)]
    pub theta: Option<ParamPoint>,
    #[serde(default)]
    pub channel: Option<Channel>,
    #[serde(default)]
    pub mi: MiChoice,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub sweep: Option<SweepKind>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySpec {
    pub channel: Channel,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsSpec {
    pub model: Model,
    pub channel: Channel,
    pub theta0: ParamPoint,
    pub theta1: ParamPoint,
    #[serde(default = "default_one")]
    pub n: usize,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub subgaussian_n: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub model: Model,
    pub channel: Channel,
    pub theta: ParamPoint,
    pub n: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_one")]
    pub groups: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TightnessSpec {
    pub sigma: f64,
    pub sigma_noise: f64,
    pub n: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_groups")]
    pub groups: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A parsed experiment, tagged by `command` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentSpec {
    VerifyFisherBound(VerifySpec),
    Capacity(CapacitySpec),
    JsBound(JsSpec),
    SimulateDistributed(SimulateSpec),
    Tightness(TightnessSpec),
}

impl ExperimentSpec {
    pub fn command(&self) -> &'static str {
        match self {
            ExperimentSpec::VerifyFisherBound(_) => "verify-fisher-bound",
            ExperimentSpec::Capacity(_) => "capacity",
            ExperimentSpec::JsBound(_) => "js-bound",
            ExperimentSpec::SimulateDistributed(_) => "simulate-distributed",
            ExperimentSpec::Tightness(_) => "tightness",
        }
    }
}

fn from_value<T: DeserializeOwned>(v: Value, prefix: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = match (prefix.is_empty(), inner.as_str()) {
            (true, _) => inner.clone(),
            (false, ".") => prefix.to_string(),
            (false, _) => format!("{prefix}.{inner}"),
        };
        schema(&path, e.into_inner().to_string())
    })
}

/// Parses one experiment object; `prefix` is prepended to error paths.
pub fn parse_experiment(mut v: Value, prefix: &str) -> Result<ExperimentSpec, CliError> {
    let at = |field: &str| if prefix.is_empty() { field.to_string() } else { format!("{prefix}.{field}") };
    let obj = v
        .as_object_mut()
        .ok_or_else(|| schema(if prefix.is_empty() { "." } else { prefix }, "expected a JSON object"))?;
    let command = match obj.remove("command") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(schema(&at("command"), "expected a string")),
        None => return Err(schema(&at("command"), "missing field")),
    };
    Ok(match command.as_str() {
        "verify-fisher-bound" => ExperimentSpec::VerifyFisherBound(from_value(v, prefix)?),
        "capacity" => ExperimentSpec::Capacity(from_value(v, prefix)?),
        "js-bound" => ExperimentSpec::JsBound(from_value(v, prefix)?),
        "simulate-distributed" => ExperimentSpec::SimulateDistributed(from_value(v, prefix)?),
        "tightness" => ExperimentSpec::Tightness(from_value(v, prefix)?),
        other => return Err(schema(&at("command"), format!("unknown command `{other}`"))),
    })
}

/// Reads a config file holding one experiment or `{"experiments": [...]}`.
pub fn load_config(path: &Path) -> Result<Vec<ExperimentSpec>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let v: Value = serde_json::from_str(&text).map_err(|e| schema(".", e.to_string()))?;
    match v {
        Value::Object(mut o) if o.contains_key("experiments") => {
            let list = o.remove("experiments").expect("checked");
            if !o.is_empty() {
                let extra: Vec<&String> = o.keys().collect();
                return Err(schema(extra[0], "unknown field next to `experiments`"));
            }
            let Value::Array(items) = list else {
                return Err(schema("experiments", "expected an array"));
            };
            items
                .into_iter()
                .enumerate()
                .map(|(i, e)| parse_experiment(e, &format!("experiments[{i}]")))
                .collect()
        }
        other => Ok(vec![parse_experiment(other, "")?]),
    }
}

/// `bernoulli`, `gaussian:<sigma>[:<dim>]`, or an inline JSON descriptor.
pub fn parse_model(s: &str) -> Result<Model, CliError> {
    if s.trim_start().starts_with('{') {
        return from_value(serde_json::from_str(s).map_err(|e| schema("model", e.to_string()))?, "model");
    }
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<f64, CliError> {
        parts[i]
            .parse::<f64>()
            .map_err(|_| schema("model", format!("`{}` is not a number", parts[i])))
    };
    match (parts[0], parts.len()) {
        ("bernoulli", 1) => Ok(Model::bernoulli()),
        ("gaussian", 2) => Ok(Model::gaussian(num(1)?, 1)?),
        ("gaussian", 3) => {
            let d = parts[2]
                .parse::<usize>()
                .map_err(|_| schema("model", format!("`{}` is not a dimension", parts[2])))?;
            Ok(Model::gaussian(num(1)?, d)?)
        }
        _ => Err(schema(
            "model",
            format!("unrecognized model `{s}` (bernoulli | gaussian:<sigma>[:<dim>] | JSON)"),
        )),
    }
}

/// `bsc:p`, `bec:e`, `awgn:s`, `identity:k`, `rr:eps`,
/// `quantizer:bits:lo:hi[:dither]`, or an inline JSON descriptor.
pub fn parse_channel(s: &str) -> Result<Channel, CliError> {
    if s.trim_start().starts_with('{') {
        return from_value(serde_json::from_str(s).map_err(|e| schema("channel", e.to_string()))?, "channel");
    }
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<f64, CliError> {
        parts
            .get(i)
            .ok_or_else(|| schema("channel", format!("`{s}` is missing a parameter")))?
            .parse::<f64>()
            .map_err(|_| schema("channel", format!("`{}` is not a number", parts[i])))
    };
    let spec = match (parts[0], parts.len()) {
        ("bsc", 2) => ChannelSpec::Bsc { p: num(1)? },
        ("bec", 2) => ChannelSpec::Bec { erasure: num(1)? },
        ("awgn", 2) => ChannelSpec::Awgn { sigma_noise: num(1)? },
        ("rr", 2) => ChannelSpec::Rr { epsilon: num(1)? },
        ("identity", 2) => ChannelSpec::Identity {
            size: parts[1]
                .parse()
                .map_err(|_| schema("channel", format!("`{}` is not a size", parts[1])))?,
        },
        ("quantizer", 4 | 5) => ChannelSpec::Quantizer {
            bits: parts[1]
                .parse()
                .map_err(|_| schema("channel", format!("`{}` is not a bit count", parts[1])))?,
            range: [num(2)?, num(3)?],
            dither: match parts.get(4) {
                None => false,
                Some(&"dither") => true,
                Some(other) => return Err(schema("channel", format!("unknown quantizer flag `{other}`"))),
            },
        },
        _ => {
            return Err(schema(
                "channel",
                format!("unrecognized channel `{s}` (bsc:p | bec:e | awgn:s | identity:k | rr:eps | quantizer:bits:lo:hi[:dither] | JSON)"),
            ))
        }
    };
    Ok(Channel::try_from(spec)?)
}

fn parse_point(s: &str) -> Result<ParamPoint, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect::<Result<Vec<_>, _>>()
        .map(ParamPoint::new)
}

#[derive(Debug, Parser)]
#[command(name = "fisherbound", version, about = "Fisher information and mutual information bounds for processed samples")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// JSON experiment config; replaces the descriptor flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every Monte Carlo draw; required when sampling is involved.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    pub format: Format,
    /// Also write the output here.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Exit 0 on inconclusive verdicts (still reported on stderr).
    #[arg(long, global = true)]
    pub allow_inconclusive: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check Tr I_Y(θ) ≤ 2N²·I_θ(X;Y) at one point or over a sweep.
    VerifyFisherBound(VerifyArgs),
    /// Channel capacity by Blahut–Arimoto.
    Capacity(CapacityArgs),
    /// Check the Jensen–Shannon path bound between two parameters.
    JsBound(JsArgs),
    /// Simulate a one-round blackboard protocol with the averaging estimator.
    SimulateDistributed(SimulateArgs),
    /// AWGN experiment comparing the van Trees bound with the averaging risk.
    Tightness(TightnessArgs),
    /// Run every experiment in a config file and emit one combined report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, value_parser = parse_point)]
    pub theta: Option<ParamPoint>,
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long, value_enum, default_value_t = MiChoice::Exact)]
    pub mi: MiChoice,
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    pub samples: usize,
    #[arg(long, value_enum)]
    pub sweep: Option<SweepKind>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CapacityArgs {
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long, default_value_t = default_tol())]
    pub tol: f64,
    #[arg(long, default_value_t = default_max_iter())]
    pub max_iter: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct JsArgs {
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long, value_parser = parse_point)]
    pub theta0: Option<ParamPoint>,
    #[arg(long, value_parser = parse_point)]
    pub theta1: Option<ParamPoint>,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Gauss–Legendre nodes on the path.
    #[arg(long, default_value_t = default_nodes())]
    pub nodes: usize,
    #[arg(long, default_value_t = DEFAULT_MC_SAMPLES)]
    pub samples: usize,
    #[arg(long)]
    pub subgaussian_n: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long, value_parser = parse_point)]
    pub theta: Option<ParamPoint>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = default_trials())]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub groups: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TightnessArgs {
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub sigma_noise: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = default_trials())]
    pub trials: usize,
    #[arg(long, default_value_t = default_groups())]
    pub groups: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
}

fn required<T>(v: Option<T>, field: &str) -> Result<T, CliError> {
    v.ok_or_else(|| schema(field, "required (pass the flag or use --config)"))
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::VerifyFisherBound(a) => &a.common,
            Command::Capacity(a) => &a.common,
            Command::JsBound(a) => &a.common,
            Command::SimulateDistributed(a) => &a.common,
            Command::Tightness(a) => &a.common,
            Command::Report(a) => &a.common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::VerifyFisherBound(_) => "verify-fisher-bound",
            Command::Capacity(_) => "capacity",
            Command::JsBound(_) => "js-bound",
            Command::SimulateDistributed(_) => "simulate-distributed",
            Command::Tightness(_) => "tightness",
            Command::Report(_) => "report",
        }
    }

    /// Builds the experiment list from the config file or the flags.
    pub fn specs(&self) -> Result<Vec<ExperimentSpec>, CliError> {
        let common = self.common();
        if let Some(path) = &common.config {
            let mut specs = load_config(path)?;
            if let Command::Report(_) = self {
                return Ok(specs);
            }
            if specs.len() != 1 || specs[0].command() != self.name() {
                return Err(schema(
                    "command",
                    format!("config must hold a single `{}` experiment (use `report` for lists)", self.name()),
                ));
            }
            // a --seed flag overrides the file
            if let Some(seed) = common.seed {
                set_seed(&mut specs[0], seed);
            }
            return Ok(specs);
        }
        let seed = common.seed;
        let spec = match self {
            Command::VerifyFisherBound(a) => ExperimentSpec::VerifyFisherBound(VerifySpec {
                model: parse_model(&required(a.model.clone(), "model")?)?,
                theta: a.theta.clone(),
                channel: a.channel.as_deref().map(parse_channel).transpose()?,
                mi: a.mi,
                samples: a.samples,
                sweep: a.sweep,
                seed,
            }),
            Command::Capacity(a) => ExperimentSpec::Capacity(CapacitySpec {
                channel: parse_channel(&required(a.channel.clone(), "channel")?)?,
                tol: a.tol,
                max_iter: a.max_iter,
            }),
            Command::JsBound(a) => ExperimentSpec::JsBound(JsSpec {
                model: parse_model(&required(a.model.clone(), "model")?)?,
                channel: parse_channel(&required(a.channel.clone(), "channel")?)?,
                theta0: required(a.theta0.clone(), "theta0")?,
                theta1: required(a.theta1.clone(), "theta1")?,
                n: a.n,
                nodes: a.nodes,
                samples: a.samples,
                subgaussian_n: a.subgaussian_n,
                seed,
            }),
            Command::SimulateDistributed(a) => ExperimentSpec::SimulateDistributed(SimulateSpec {
                model: parse_model(&required(a.model.clone(), "model")?)?,
                channel: parse_channel(&required(a.channel.clone(), "channel")?)?,
                theta: required(a.theta.clone(), "theta")?,
                n: required(a.n, "n")?,
                trials: a.trials,
                groups: a.groups,
                seed,
            }),
            Command::Tightness(a) => ExperimentSpec::Tightness(TightnessSpec {
                sigma: required(a.sigma, "sigma")?,
                sigma_noise: required(a.sigma_noise, "sigma_noise")?,
                n: required(a.n, "n")?,
                trials: a.trials,
                groups: a.groups,
                seed,
            }),
            Command::Report(_) => return Err(schema("config", "report needs --config")),
        };
        Ok(vec![spec])
    }
}

fn set_seed(spec: &mut ExperimentSpec, seed: u64) {
    match spec {
        ExperimentSpec::VerifyFisherBound(s) => s.seed = Some(seed),
        ExperimentSpec::JsBound(s) => s.seed = Some(seed),
        ExperimentSpec::SimulateDistributed(s) => s.seed = Some(seed),
        ExperimentSpec::Tightness(s) => s.seed = Some(seed),
        ExperimentSpec::Capacity(_) => {}
    }
}

fn need_seed(seed: Option<u64>, why: &str) -> Result<RngStream, CliError> {
    seed.map(RngStream::new)
        .ok_or_else(|| schema("seed", format!("required: {why} uses Monte Carlo")))
}

/// Capacity result in both units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    pub channel: Channel,
    pub capacity_nats: f64,
    pub capacity_bits: f64,
    pub upper_bound_nats: f64,
    pub input_pmf: Vec<f64>,
    pub iterations: usize,
}

/// What one experiment produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Output {
    Bound(BoundReport),
    Sweep(Vec<SweepRow>),
    Capacity(CapacityReport),
    Estimation(EstimationResult),
    Tightness(TightnessResult),
}

impl Output {
    /// Verdicts carried by the output. Estimation results contribute the
    /// lower-bound consistency check `lb ≤ mse + 4·se`.
    pub fn verdicts(&self) -> Vec<Verdict> {
        let lb_check = |r: &EstimationResult| match r.lower_bound {
            Some(lb) => vec![crate::bounds::verdict(lb, r.empirical_mse, r.mse_std_error)],
            None => vec![],
        };
        match self {
            Output::Bound(r) => vec![r.verdict],
            Output::Sweep(rows) => rows.iter().map(|r| r.verdict).collect(),
            Output::Capacity(_) => vec![],
            Output::Estimation(r) => lb_check(r),
            Output::Tightness(t) => lb_check(&t.result),
        }
    }

    fn inner_json(&self) -> Value {
        match self {
            Output::Bound(r) => serde_json::to_value(r),
            Output::Sweep(r) => serde_json::to_value(r),
            Output::Capacity(r) => serde_json::to_value(r),
            Output::Estimation(r) => serde_json::to_value(r),
            Output::Tightness(r) => serde_json::to_value(r),
        }
        .expect("plain data serializes")
    }

    /// CSV with 12 significant digits.
    pub fn to_csv(&self) -> Result<String, CliError> {
        let f = |x: f64| Cell::Num(x);
        match self {
            Output::Bound(r) => emit_plot_data(
                &["name", "lhs", "rhs", "slack", "verdict", "uncertainty"],
                &[vec![
                    Cell::Text(r.name.clone()),
                    f(r.lhs),
                    f(r.rhs),
                    f(r.slack),
                    Cell::Text(verdict_str(r.verdict).into()),
                    f(r.uncertainty),
                ]],
            ),
            Output::Sweep(rows) => emit_plot_data(SWEEP_COLUMNS, &rows.iter().map(sweep_cells).collect::<Vec<_>>()),
            Output::Capacity(c) => emit_plot_data(
                &["capacity_nats", "capacity_bits", "upper_bound_nats", "iterations"],
                &[vec![
                    f(c.capacity_nats),
                    f(c.capacity_bits),
                    f(c.upper_bound_nats),
                    Cell::Int(c.iterations as u64),
                ]],
            ),
            Output::Estimation(r) => emit_plot_data(
                &["estimator", "n_trials", "mi_total_nats", "lower_bound", "empirical_mse", "ci", "ratio"],
                &[vec![
                    Cell::Text(r.estimator.clone()),
                    Cell::Int(r.n_trials as u64),
                    f(r.total_mi.unwrap_or(f64::NAN)),
                    f(r.lower_bound.unwrap_or(f64::NAN)),
                    f(r.empirical_mse),
                    f(r.ci),
                    f(r.tightness_ratio.unwrap_or(f64::NAN)),
                ]],
            ),
            Output::Tightness(t) => emit_plot_data(
                TIGHTNESS_COLUMNS,
                &tightness_rows(t).iter().map(tightness_cells).collect::<Vec<_>>(),
            ),
        }
    }
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Violated => "violated",
        Verdict::Inconclusive => "inconclusive",
    }
}

pub const SWEEP_COLUMNS: &[&str] = &["name", "param1", "param2", "lhs", "rhs", "slack", "verdict"];
pub const TIGHTNESS_COLUMNS: &[&str] = &[
    "trial_group",
    "n",
    "sigma",
    "sigma_noise",
    "mi_total_nats",
    "lower_bound",
    "empirical_mse",
    "ci",
    "ratio",
];

fn sweep_cells(r: &SweepRow) -> Vec<Cell> {
    vec![
        Cell::Text(r.name.clone()),
        Cell::Num(r.param1),
        Cell::Num(r.param2),
        Cell::Num(r.lhs),
        Cell::Num(r.rhs),
        Cell::Num(r.slack),
        Cell::Text(verdict_str(r.verdict).into()),
    ]
}

fn tightness_cells(r: &TightnessRow) -> Vec<Cell> {
    vec![
        Cell::Text(r.trial_group.clone()),
        Cell::Int(r.n as u64),
        Cell::Num(r.sigma),
        Cell::Num(r.sigma_noise),
        Cell::Num(r.mi_total_nats),
        Cell::Num(r.lower_bound),
        Cell::Num(r.empirical_mse),
        Cell::Num(r.ci),
        Cell::Num(r.ratio),
    ]
}

/// A CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_sig(*x, CSV_DIGITS),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// One CSV row per record under a fixed header; an empty input gives the
/// header alone. Rows whose width differs from the header are rejected.
pub fn emit_plot_data(columns: &[&str], rows: &[Vec<Cell>]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(columns)?;
    for (i, row) in rows.iter().enumerate() {
        if row.len() != columns.len() {
            return Err(CliError::Run(Error::Validation(format!(
                "row {i} has {} fields, header has {}",
                row.len(),
                columns.len()
            ))));
        }
        w.write_record(row.iter().map(Cell::render))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Run(Error::Validation(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

/// CSV for a Fisher-information bound sweep.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    emit_plot_data(SWEEP_COLUMNS, &rows.iter().map(sweep_cells).collect::<Vec<_>>())
}

fn verify(s: &VerifySpec) -> Result<Output, CliError> {
    if let Some(kind) = s.sweep {
        let cases: Vec<SweepCase> = match kind {
            SweepKind::BscP => {
                if !matches!(s.model, Model::Bernoulli(_)) {
                    return Err(schema("model", "the bsc_p sweep runs on the bernoulli model"));
                }
                bsc_cases(required(s.theta.clone(), "theta")?)
            }
            SweepKind::Thm1Grid => thm1_grid(s.samples),
        };
        let needs_mc = cases.iter().any(|c| c.mc_samples.is_some());
        let stream = if needs_mc {
            need_seed(s.seed, "the AWGN part of the grid")?
        } else {
            RngStream::new(s.seed.unwrap_or(0))
        };
        return Ok(Output::Sweep(run_thm1_sweep(&cases, stream)?));
    }
    let theta = required(s.theta.clone(), "theta")?;
    let channel = required(s.channel.clone(), "channel")?;
    let method = match s.mi {
        MiChoice::Exact => MiMethod::Exact,
        MiChoice::MonteCarlo => MiMethod::MonteCarlo {
            n_samples: s.samples,
            stream: need_seed(s.seed, "--mi mc")?,
        },
    };
    Ok(Output::Bound(thm1_verify(&s.model, &channel, &theta, &method)?))
}

/// BSC crossover p ∈ {0, 0.05, .., 0.5} at a fixed Bernoulli θ.
fn bsc_cases(theta: ParamPoint) -> Vec<SweepCase> {
    (0..=10)
        .map(|k| {
            let p = 0.05 * k as f64;
            SweepCase {
                family: "bernoulli_bsc".into(),
                param1: theta.0[0],
                param2: p,
                model: Model::bernoulli(),
                channel: Channel::Discrete(DiscreteChannel::bsc(p).expect("valid crossover")),
                theta: theta.clone(),
                mc_samples: None,
            }
        })
        .collect()
}

fn capacity(s: &CapacitySpec) -> Result<Output, CliError> {
    let m = s
        .channel
        .as_matrix()
        .ok_or_else(|| schema("channel", format!("capacity needs a finite channel, got {}", s.channel.kind())))?;
    let c = capacity_blahut_arimoto(&m, s.tol, s.max_iter)?;
    Ok(Output::Capacity(CapacityReport {
        channel: s.channel.clone(),
        capacity_nats: c.capacity,
        capacity_bits: c.capacity / std::f64::consts::LN_2,
        upper_bound_nats: c.upper_bound,
        input_pmf: c.input_pmf,
        iterations: c.iterations,
    }))
}

fn js_bound(s: &JsSpec) -> Result<Output, CliError> {
    let path = PathSpec::gauss_legendre(s.theta0.clone(), s.theta1.clone(), s.nodes)?;
    let continuous = matches!((&s.model, &s.channel), (Model::GaussianLocation(_), Channel::Awgn(_)));
    let stream = if continuous && s.theta0 != s.theta1 {
        Some(need_seed(s.seed, "the Gaussian JS estimate")?)
    } else {
        None
    };
    let opts = Thm2Options {
        subgaussian_n: s.subgaussian_n,
        mi_method: MiMethod::Exact,
        js_samples: s.samples,
        stream,
    };
    Ok(Output::Bound(thm2_js_bound(&s.model, &s.channel, s.n, &path, &opts)?))
}

fn simulate(s: &SimulateSpec) -> Result<Output, CliError> {
    let stream = need_seed(s.seed, "simulate-distributed")?;
    let factory = IndependentChannels::new(s.channel.clone());
    let config = ProtocolConfig::new(s.model.clone(), s.theta.clone(), s.n, 1, &factory)?;
    let mut r = empirical_mse(&config, "averaging", averaging_estimator, s.trials, s.groups, stream, Execution::Parallel)?;
    if let (Model::GaussianLocation(g), Channel::Awgn(a)) = (&s.model, &s.channel) {
        r.closed_form_mse = Some(crate::distributed::averaging_closed_form_mse(g.sigma, a.sigma_noise, s.n, g.dim));
    }
    Ok(Output::Estimation(r))
}

fn tightness(s: &TightnessSpec) -> Result<Output, CliError> {
    let stream = need_seed(s.seed, "tightness")?;
    Ok(Output::Tightness(awgn_tightness_experiment(
        s.sigma,
        s.sigma_noise,
        s.n,
        s.trials,
        s.groups,
        stream,
    )?))
}

/// Runs one experiment.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Output, CliError> {
    match spec {
        ExperimentSpec::VerifyFisherBound(s) => verify(s),
        ExperimentSpec::Capacity(s) => capacity(s),
        ExperimentSpec::JsBound(s) => js_bound(s),
        ExperimentSpec::SimulateDistributed(s) => simulate(s),
        ExperimentSpec::Tightness(s) => tightness(s),
    }
}

/// Combined result of a `report` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub command: String,
    pub output: Output,
}

/// Exit code for a set of verdicts.
pub fn exit_code(verdicts: &[Verdict], allow_inconclusive: bool) -> i32 {
    let inconclusive = verdicts.contains(&Verdict::Inconclusive) && !allow_inconclusive;
    if verdicts.contains(&Verdict::Violated) || inconclusive {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}

/// Runs a parsed command, writing output to `out`; returns the exit code.
pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let common = cli.command.common();
    let specs = cli.command.specs()?;
    let is_report = matches!(cli.command, Command::Report(_));
    if is_report && common.format == Format::Csv {
        return Err(schema("format", "report output is JSON only"));
    }
    let mut outputs = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        let output = match run_experiment(spec) {
            Err(CliError::Schema { path, detail }) if is_report => {
                return Err(CliError::Schema {
                    path: format!("experiments[{i}].{path}"),
                    detail,
                })
            }
            r => r?,
        };
        outputs.push(ReportEntry {
            command: spec.command().to_string(),
            output,
        });
    }
    let text = if is_report {
        serde_json::to_string_pretty(&outputs).expect("plain data serializes") + "\n"
    } else {
        let o = &outputs[0].output;
        match common.format {
            Format::Json => serde_json::to_string_pretty(&o.inner_json()).expect("plain data serializes") + "\n",
            Format::Csv => o.to_csv()?,
        }
    };
    if let Some(path) = &common.output {
        fs::write(path, &text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })?;
    let verdicts: Vec<Verdict> = outputs.iter().flat_map(|e| e.output.verdicts()).collect();
    let code = exit_code(&verdicts, common.allow_inconclusive);
    for e in &outputs {
        if let Output::Bound(r) = &e.output {
            if r.verdict != Verdict::Holds {
                let _ = writeln!(err, "{} verdict {}: lhs {} rhs {} (guard {} se)", r.name, verdict_str(r.verdict), r.lhs, r.rhs, GUARD_SE);
            }
        }
    }
    if verdicts.contains(&Verdict::Inconclusive) && common.allow_inconclusive {
        let _ = writeln!(err, "warning: inconclusive verdicts allowed by --allow-inconclusive");
    }
    Ok(code)
}

/// Parses `args`, runs, and maps every failure to an exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_SCHEMA } else { EXIT_OK };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_SCHEMA
        }
    }
}
