//! Fisher information of raw samples and of channel outputs, and the
//! conditional-score decomposition
//!
//! ```text
//! Tr I_Y(θ) = E_Y ‖ E[S_θ(X) | Y] ‖²
//! ```

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, DiscreteChannel};
use crate::error::{Error, Result};
use crate::info::kl_divergence;
use crate::mc::{chunked_mean, Execution};
use crate::models::{Model, ParamPoint, Sample};
use crate::pipeline::{discrete_posterior, gaussian_expectation, OutputLaw, Pipeline, ZERO_MASS};
use crate::rng::RngStream;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FisherMethod {
    ClosedForm,
    ExactSum,
    FiniteDifference,
    Richardson,
}

/// A d×d Fisher information matrix evaluated at `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherMatrix {
    pub theta: ParamPoint,
    pub entries: Vec<Vec<f64>>,
    pub trace: f64,
    pub method: FisherMethod,
}

impl FisherMatrix {
    fn build(theta: &ParamPoint, mut entries: Vec<Vec<f64>>, method: FisherMethod) -> Result<Self> {
        let d = entries.len();
        // symmetrize away rounding before checking
        for i in 0..d {
            for j in (i + 1)..d {
                let (a, b) = (entries[i][j], entries[j][i]);
                if (a - b).abs() > 1e-10 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::Validation(format!(
                        "Fisher matrix asymmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                let m = 0.5 * (a + b);
                entries[i][j] = m;
                entries[j][i] = m;
            }
        }
        let fm = Self {
            theta: theta.clone(),
            trace: (0..d).map(|i| entries[i][i]).sum(),
            entries,
            method,
        };
        let min_eig = fm.min_eigenvalue();
        if min_eig < -1e-10 * (1.0 + fm.trace.abs()) {
            return Err(Error::Validation(format!(
                "Fisher matrix not PSD (min eigenvalue {min_eig})"
            )));
        }
        Ok(fm)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |i, j| self.entries[i][j]);
        SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Δᵀ I Δ`
    pub fn quadratic_form(&self, delta: &[f64]) -> f64 {
        let mut q = 0.0;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                q += delta[i] * v * delta[j];
            }
        }
        q
    }
}

fn scaled_identity(d: usize, v: f64) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { v } else { 0.0 }).collect())
        .collect()
}

/// `I_X(θ) = E[S Sᵀ]`.
pub fn fisher_input(model: &Model, theta: &ParamPoint) -> Result<FisherMatrix> {
    model.check_param(theta)?;
    match model {
        Model::GaussianLocation(g) => FisherMatrix::build(
            theta,
            scaled_identity(g.dim, 1.0 / (g.sigma * g.sigma)),
            FisherMethod::ClosedForm,
        ),
        Model::Bernoulli(_) => {
            let t = theta.0[0];
            FisherMatrix::build(theta, vec![vec![1.0 / (t * (1.0 - t))]], FisherMethod::ClosedForm)
        }
        Model::Twist(_) => {
            let p = model.pmf(theta)?;
            let mut i = 0.0;
            for (x, px) in p.iter().enumerate() {
                if *px > 0.0 {
                    let s = model.score(theta, &Sample::Symbol(x))?[0];
                    i += px * s * s;
                }
            }
            FisherMatrix::build(theta, vec![vec![i]], FisherMethod::ExactSum)
        }
    }
}

/// How `∂p_θ(y)/∂θ` is obtained for output Fisher information.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Derivative {
    #[default]
    Analytic,
    FiniteDifference { step: f64, richardson: bool },
}


/// `Σ_y ∇p ∇pᵀ / p` over cells with mass, dropping the rest with a warning.
fn fisher_from_law(theta: &ParamPoint, law: &OutputLaw, method: FisherMethod) -> Result<FisherMatrix> {
    let d = theta.dim();
    let mut entries = vec![vec![0.0; d]; d];
    let mut dropped = 0usize;
    for (p, g) in law.pmf.iter().zip(&law.grad) {
        if *p < ZERO_MASS {
            dropped += 1;
            continue;
        }
        for i in 0..d {
            for j in 0..d {
                entries[i][j] += g[i] * g[j] / p;
            }
        }
    }
    if dropped > 0 {
        warn!("dropped {dropped} zero-mass output cell(s) from the Fisher sum");
    }
    FisherMatrix::build(theta, entries, method)
}

/// Central-difference gradient of the output pmf, optionally Richardson
/// extrapolated from steps `h` and `h/2`.
fn fd_law(pipe: &Pipeline, model: &Model, theta: &ParamPoint, step: f64, richardson: bool) -> Result<OutputLaw> {
    if !(step > 0.0) {
        return Err(Error::Validation(format!("finite-difference step must be positive, got {step}")));
    }
    let center = pipe.output_law(model, theta)?;
    let d = theta.dim();
    let central = |h: f64| -> Result<Vec<Vec<f64>>> {
        let mut grad = vec![vec![0.0; d]; center.pmf.len()];
        for j in 0..d {
            let up = pipe.output_law(model, &theta.shifted(j, h))?.pmf;
            let dn = pipe.output_law(model, &theta.shifted(j, -h))?.pmf;
            for (y, g) in grad.iter_mut().enumerate() {
                g[j] = (up[y] - dn[y]) / (2.0 * h);
            }
        }
        Ok(grad)
    };
    let mut grad = central(step)?;
    if richardson {
        let half = central(0.5 * step)?;
        for (g, gh) in grad.iter_mut().zip(&half) {
            for (a, b) in g.iter_mut().zip(gh) {
                *a = (4.0 * b - *a) / 3.0;
            }
        }
    }
    Ok(OutputLaw {
        pmf: center.pmf,
        grad,
    })
}

/// `I_Y(θ)` for a finite-alphabet model through a matrix kernel.
pub fn fisher_output_exact(
    model: &Model,
    channel: &DiscreteChannel,
    theta: &ParamPoint,
    derivative: Derivative,
) -> Result<FisherMatrix> {
    fisher_output_with(model, &Channel::Discrete(channel.clone()), theta, derivative)
}

/// `I_Y(θ)` for any supported pipeline with analytic derivatives.
pub fn fisher_output(model: &Model, channel: &Channel, theta: &ParamPoint) -> Result<FisherMatrix> {
    fisher_output_with(model, channel, theta, Derivative::Analytic)
}

pub fn fisher_output_with(
    model: &Model,
    channel: &Channel,
    theta: &ParamPoint,
    derivative: Derivative,
) -> Result<FisherMatrix> {
    let pipe = Pipeline::new(model, channel)?;
    model.check_param(theta)?;
    if let Pipeline::GaussianAwgn { gauss, sigma_noise } = pipe {
        // Y ~ N(θ, (σ² + σ_n²) I)
        let var = gauss.sigma * gauss.sigma + sigma_noise * sigma_noise;
        return FisherMatrix::build(theta, scaled_identity(gauss.dim, 1.0 / var), FisherMethod::ClosedForm);
    }
    match derivative {
        Derivative::Analytic => {
            let law = pipe.output_law(model, theta)?;
            fisher_from_law(theta, &law, FisherMethod::ExactSum)
        }
        Derivative::FiniteDifference { step, richardson } => {
            let law = fd_law(&pipe, model, theta, step, richardson)?;
            let method = if richardson {
                FisherMethod::Richardson
            } else {
                FisherMethod::FiniteDifference
            };
            fisher_from_law(theta, &law, method)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMethodTag {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecompositionMethod {
    Exact,
    MonteCarlo { n_samples: usize, stream: RngStream },
}

/// One output symbol's contribution `p(y)·‖E[S|Y=y]‖²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionTerm {
    pub y: usize,
    pub p_y: f64,
    pub conditional_score: Vec<f64>,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceDecomposition {
    pub trace: f64,
    pub std_error: f64,
    pub method: DecompositionMethodTag,
    /// Empty for continuous outputs.
    pub terms: Vec<DecompositionTerm>,
}

/// `E[S_θ(X) | Y = y]` for every output symbol, by explicit posterior sums or
/// quadrature; never through the output pmf gradient.
fn conditional_scores(pipe: &Pipeline, model: &Model, theta: &ParamPoint) -> Result<Vec<(f64, Vec<f64>)>> {
    match pipe {
        Pipeline::Discrete { matrix, .. } => {
            let px = model.pmf(theta)?;
            let scores: Vec<Vec<f64>> = (0..px.len())
                .map(|x| model.score(theta, &Sample::Symbol(x)))
                .collect::<Result<_>>()?;
            Ok((0..matrix.output_size())
                .map(|y| {
                    let (py, post) = discrete_posterior(&px, matrix, y);
                    let mut cs = vec![0.0; theta.dim()];
                    for (w, s) in post.iter().zip(&scores) {
                        if *w > 0.0 {
                            for (c, v) in cs.iter_mut().zip(s) {
                                *c += w * v;
                            }
                        }
                    }
                    (py, cs)
                })
                .collect())
        }
        Pipeline::GaussianQuantizer { gauss, quantizer } => {
            let (s, t) = (gauss.sigma, theta.0[0]);
            let var = s * s;
            Ok((0..quantizer.levels())
                .map(|y| {
                    let py = gaussian_expectation(s, t, quantizer, |x| quantizer.pmf(x)[y]);
                    let num = gaussian_expectation(s, t, quantizer, |x| (x - t) / var * quantizer.pmf(x)[y]);
                    let cs = if py >= ZERO_MASS { num / py } else { 0.0 };
                    (py, vec![cs])
                })
                .collect())
        }
        Pipeline::GaussianAwgn { .. } => Err(Error::Capability(
            "continuous output has no per-symbol posterior table".into(),
        )),
    }
}

/// `E_Y‖E[S_θ(X)|Y]‖²`.
pub fn fisher_trace_decomposition(
    model: &Model,
    channel: &Channel,
    theta: &ParamPoint,
    method: DecompositionMethod,
) -> Result<TraceDecomposition> {
    let pipe = Pipeline::new(model, channel)?;
    model.check_param(theta)?;
    match (&pipe, method) {
        (Pipeline::GaussianAwgn { gauss, sigma_noise }, DecompositionMethod::Exact) => {
            // E[X|Y] = θ + σ²/(σ²+σ_n²)(Y − θ), so E[S|Y] = (Y − θ)/(σ²+σ_n²)
            // and E‖E[S|Y]‖² = d/(σ²+σ_n²)
            let var = gauss.sigma * gauss.sigma + sigma_noise * sigma_noise;
            Ok(TraceDecomposition {
                trace: gauss.dim as f64 / var,
                std_error: 0.0,
                method: DecompositionMethodTag::Exact,
                terms: Vec::new(),
            })
        }
        (Pipeline::GaussianAwgn { gauss, sigma_noise }, DecompositionMethod::MonteCarlo { n_samples, stream }) => {
            let var = gauss.sigma * gauss.sigma + sigma_noise * sigma_noise;
            let est = chunked_mean(n_samples, stream, Execution::Parallel, |rng| {
                let x = model.sample_unchecked(theta, rng);
                let y = channel.sample_unchecked(&x, rng);
                let yv = y.as_real().expect("real output");
                yv.iter()
                    .zip(&theta.0)
                    .map(|(a, b)| {
                        let c = (a - b) / var;
                        c * c
                    })
                    .sum::<f64>()
            });
            Ok(TraceDecomposition {
                trace: est.mean,
                std_error: est.std_error,
                method: DecompositionMethodTag::MonteCarlo,
                terms: Vec::new(),
            })
        }
        (_, DecompositionMethod::Exact) => {
            let table = conditional_scores(&pipe, model, theta)?;
            let terms: Vec<DecompositionTerm> = table
                .into_iter()
                .enumerate()
                .map(|(y, (p_y, cs))| {
                    let contribution = p_y * cs.iter().map(|v| v * v).sum::<f64>();
                    DecompositionTerm {
                        y,
                        p_y,
                        conditional_score: cs,
                        contribution,
                    }
                })
                .collect();
            Ok(TraceDecomposition {
                trace: terms.iter().map(|t| t.contribution).sum(),
                std_error: 0.0,
                method: DecompositionMethodTag::Exact,
                terms,
            })
        }
        (_, DecompositionMethod::MonteCarlo { n_samples, stream }) => {
            let table = conditional_scores(&pipe, model, theta)?;
            let sq: Vec<f64> = table.iter().map(|(_, cs)| cs.iter().map(|v| v * v).sum()).collect();
            let est = chunked_mean(n_samples, stream, Execution::Parallel, |rng| {
                let x = model.sample_unchecked(theta, rng);
                let y = channel.sample_unchecked(&x, rng);
                sq[y.as_symbol().expect("symbol output")]
            });
            Ok(TraceDecomposition {
                trace: est.mean,
                std_error: est.std_error,
                method: DecompositionMethodTag::MonteCarlo,
                terms: Vec::new(),
            })
        }
    }
}

/// Finite-difference audit of the output Fisher diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdCheck {
    pub h: f64,
    pub exact: Vec<f64>,
    /// `2·KL(p_θ ‖ p_{θ+h e_j}) / h²` per coordinate.
    pub kl_based: Vec<f64>,
    pub max_rel_deviation: f64,
}

/// Compares `I_Y(θ)_jj` with `2·KL(p_θ‖p_{θ+h e_j})/h²`.
pub fn fisher_fd_check(model: &Model, channel: &Channel, theta: &ParamPoint, h: f64) -> Result<FdCheck> {
    if !(h > 0.0) {
        return Err(Error::Validation(format!("h must be positive, got {h}")));
    }
    if h < 1e-7 {
        warn!("h = {h:e} is below 1e-7; the KL difference will lose digits to cancellation");
    }
    let pipe = Pipeline::new(model, channel)?;
    let fm = fisher_output(model, channel, theta)?;
    let p = pipe.output_law(model, theta)?.pmf;
    let mut exact = Vec::new();
    let mut kl_based = Vec::new();
    let mut worst: f64 = 0.0;
    for j in 0..theta.dim() {
        // step toward the interior when θ + h leaves Θ
        let shifted = theta.shifted(j, h);
        let q = match model.check_param(&shifted) {
            Ok(()) => pipe.output_law(model, &shifted)?.pmf,
            Err(_) => pipe.output_law(model, &theta.shifted(j, -h))?.pmf,
        };
        let kl = kl_divergence(&p, &q)?.value;
        let approx = 2.0 * kl / (h * h);
        let e = fm.entries[j][j];
        let dev = if e == 0.0 && approx == 0.0 {
            0.0
        } else {
            (approx - e).abs() / e.abs().max(f64::MIN_POSITIVE)
        };
        worst = worst.max(dev);
        exact.push(e);
        kl_based.push(approx);
    }
    Ok(FdCheck {
        h,
        exact,
        kl_based,
        max_rel_deviation: worst,
    })
}

/// Output Fisher trace of the B-fold product model: B independent draws
/// `X_b ~ P_{θ_b}`, each through its own copy of `channel`, observed jointly.
/// Built from the joint output pmf over the product alphabet.
pub fn product_output_trace(model: &Model, channel: &DiscreteChannel, thetas: &[ParamPoint]) -> Result<f64> {
    if thetas.is_empty() {
        return Err(Error::Validation("product model needs at least one block".into()));
    }
    let ch = Channel::Discrete(channel.clone());
    let pipe = Pipeline::new(model, &ch)?;
    let laws: Vec<OutputLaw> = thetas
        .iter()
        .map(|t| pipe.output_law(model, t))
        .collect::<Result<_>>()?;
    let ny = channel.output_size();
    let d = model.dim();
    let total = ny.pow(thetas.len() as u32);
    let mut trace = 0.0;
    let mut idx = vec![0usize; thetas.len()];
    for _ in 0..total {
        let p: f64 = idx.iter().zip(&laws).map(|(&y, l)| l.pmf[y]).product();
        if p >= ZERO_MASS {
            // ∂p/∂θ_{b,j} = (∏_{c≠b} p_c) · ∂p_b/∂θ_j
            for (b, law) in laws.iter().enumerate() {
                let others: f64 = idx
                    .iter()
                    .zip(&laws)
                    .enumerate()
                    .filter(|(c, _)| *c != b)
                    .map(|(_, (&y, l))| l.pmf[y])
                    .product();
                for j in 0..d {
                    let g = others * law.grad[idx[b]][j];
                    trace += g * g / p;
                }
            }
        }
        // odometer over the product alphabet
        for k in idx.iter_mut() {
            *k += 1;
            if *k < ny {
                break;
            }
            *k = 0;
        }
    }
    Ok(trace)
}
