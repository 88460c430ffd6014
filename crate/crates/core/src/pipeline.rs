//! Model/channel combinations with exact oracles.
//!
//! Every information or Fisher computation first resolves `(model, channel)`
//! into one of these pipelines; anything else is a capability error.

use crate::channels::{push_forward_pmf, Channel, DiscreteChannel, QuantizerChannel};
use crate::error::{Error, Result};
use crate::models::{GaussianLocation, Model, ParamPoint, Support};
use crate::numeric::{std_normal_cdf, std_normal_interval, std_normal_pdf, GaussLegendre};

/// Output probabilities below this are treated as zero-measure cells.
pub(crate) const ZERO_MASS: f64 = 1e-300;

#[derive(Debug, Clone)]
pub(crate) enum Pipeline<'a> {
    /// Finite-alphabet model through a matrix kernel.
    Discrete { matrix: DiscreteChannel },
    GaussianAwgn {
        gauss: &'a GaussianLocation,
        sigma_noise: f64,
    },
    /// Scalar Gaussian location model through a (possibly dithered) quantizer.
    GaussianQuantizer {
        gauss: &'a GaussianLocation,
        quantizer: QuantizerChannel,
    },
}

/// Discrete output law and its θ-gradient: `grad[y][j] = ∂p_θ(y)/∂θ_j`.
#[derive(Debug, Clone)]
pub(crate) struct OutputLaw {
    pub pmf: Vec<f64>,
    pub grad: Vec<Vec<f64>>,
}

impl<'a> Pipeline<'a> {
    pub fn new(model: &'a Model, channel: &Channel) -> Result<Self> {
        match (model, channel) {
            (Model::Bernoulli(_) | Model::Twist(_), _) => {
                let matrix = channel.as_matrix().ok_or_else(|| {
                    Error::Capability(format!(
                        "{} model with {} channel (finite-alphabet models need a matrix kernel)",
                        model.name(),
                        channel.kind()
                    ))
                })?;
                if let Support::Finite(k) = model.support() {
                    if k != matrix.input_size() {
                        return Err(Error::Shape(format!(
                            "model alphabet has {k} symbols, channel input has {}",
                            matrix.input_size()
                        )));
                    }
                }
                Ok(Pipeline::Discrete { matrix })
            }
            (Model::GaussianLocation(gauss), Channel::Awgn(a)) => Ok(Pipeline::GaussianAwgn {
                gauss,
                sigma_noise: a.sigma_noise,
            }),
            (Model::GaussianLocation(gauss), Channel::Quantizer(q)) if gauss.dim == 1 => {
                Ok(Pipeline::GaussianQuantizer {
                    gauss,
                    quantizer: *q,
                })
            }
            _ => Err(Error::Capability(format!(
                "{} model with {} channel",
                model.name(),
                channel.kind()
            ))),
        }
    }

    /// Exact output pmf and gradient, for pipelines with a finite output alphabet.
    pub fn output_law(&self, model: &Model, theta: &ParamPoint) -> Result<OutputLaw> {
        model.check_param(theta)?;
        match self {
            Pipeline::Discrete { matrix, .. } => {
                let px = model.pmf(theta)?;
                let gx = model.pmf_grad(theta)?;
                let pmf = push_forward_pmf(&px, matrix)?;
                let d = theta.dim();
                let mut grad = vec![vec![0.0; d]; matrix.output_size()];
                for (row, gxx) in matrix.rows().iter().zip(&gx) {
                    for (gy, w) in grad.iter_mut().zip(row) {
                        for j in 0..d {
                            gy[j] += w * gxx[j];
                        }
                    }
                }
                Ok(OutputLaw { pmf, grad })
            }
            Pipeline::GaussianQuantizer { gauss, quantizer } => {
                Ok(quantized_gaussian_law(gauss.sigma, theta.0[0], quantizer))
            }
            Pipeline::GaussianAwgn { .. } => Err(Error::Capability(
                "AWGN output is continuous; no output pmf".into(),
            )),
        }
    }
}

/// `zΦ(z) + φ(z)`, an antiderivative of Φ.
fn phi_integral(z: f64) -> f64 {
    if z == f64::INFINITY {
        return f64::INFINITY;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    z * std_normal_cdf(z) + std_normal_pdf(z)
}

/// Closed-form bin probabilities of `Q(X [+ U])` for `X ~ N(θ, σ²)` and
/// their θ-derivatives.
pub(crate) fn quantized_gaussian_law(sigma: f64, theta: f64, q: &QuantizerChannel) -> OutputLaw {
    let levels = q.levels();
    let mut pmf = Vec::with_capacity(levels);
    let mut grad = Vec::with_capacity(levels);
    if !q.dither {
        for j in 0..levels {
            let a = (q.edge(j) - theta) / sigma;
            let b = (q.edge(j + 1) - theta) / sigma;
            pmf.push(std_normal_interval(a, b));
            let pa = if a.is_finite() { std_normal_pdf(a) } else { 0.0 };
            let pb = if b.is_finite() { std_normal_pdf(b) } else { 0.0 };
            grad.push(vec![(pa - pb) / sigma]);
        }
        return OutputLaw { pmf, grad };
    }
    let w = q.bin_width();
    // CDF of Z = X + U at t, and its θ-derivative
    let cdf = |t: f64| -> (f64, f64) {
        if t == f64::NEG_INFINITY {
            return (0.0, 0.0);
        }
        if t == f64::INFINITY {
            return (1.0, 0.0);
        }
        let up = (t + 0.5 * w - theta) / sigma;
        let lo = (t - 0.5 * w - theta) / sigma;
        let f = sigma / w * (phi_integral(up) - phi_integral(lo));
        let df = -(std_normal_interval(lo, up)) / w;
        (f, df)
    };
    let mut prev = cdf(q.edge(0));
    for j in 0..levels {
        let next = cdf(q.edge(j + 1));
        pmf.push((next.0 - prev.0).max(0.0));
        grad.push(vec![next.1 - prev.1]);
        prev = next;
    }
    OutputLaw { pmf, grad }
}

/// Integrates `f(x)·φ_σ(x − θ)` over the real line by composite
/// Gauss–Legendre on `θ ± 14σ`, split at the quantizer's kernel breakpoints.
pub(crate) fn gaussian_expectation<F: FnMut(f64) -> f64>(
    sigma: f64,
    theta: f64,
    q: &QuantizerChannel,
    mut f: F,
) -> f64 {
    let gl = GaussLegendre::new(24);
    let mut breaks = q.interior_edges();
    if q.dither {
        let w = q.bin_width();
        let edges = breaks.clone();
        breaks = edges
            .iter()
            .flat_map(|e| [e - 0.5 * w, e + 0.5 * w])
            .collect();
    }
    let (a, b) = (theta - 14.0 * sigma, theta + 14.0 * sigma);
    gl.integrate_composite(a, b, &breaks, 0.25 * sigma, |x| {
        let z = (x - theta) / sigma;
        f(x) * std_normal_pdf(z) / sigma
    })
}

/// Kernel pmf row for a symbol input, used by the discrete posterior route.
pub(crate) fn discrete_posterior(
    px: &[f64],
    matrix: &DiscreteChannel,
    y: usize,
) -> (f64, Vec<f64>) {
    let joint: Vec<f64> = px
        .iter()
        .zip(matrix.rows())
        .map(|(p, row)| p * row[y])
        .collect();
    let py: f64 = joint.iter().sum();
    let post = if py > 0.0 {
        joint.iter().map(|j| j / py).collect()
    } else {
        vec![0.0; px.len()]
    };
    (py, post)
}
