//! Parametric families `P_θ` with exact log-densities, score functions,
//! samplers and a declared sub-Gaussian parameter for the score.
//!
//! Three families ship:
//!
//! - [`GaussianLocation`]: `N(θ, σ²I_d)`, score `(x − θ)/σ²`, declared `N = 1/σ`.
//! - [`BernoulliModel`]: `Bern(θ)` on `{0, 1}`, a discrete oracle family whose
//!   score is bounded, so `N = max(1/θ, 1/(1 − θ))`.
//! - [`TwistFamily`]: the exponential twist `f_θ ∝ f₁^θ f₀^{1−θ}` between two
//!   pmfs with bounded likelihood ratio `c`, declared `N = 2 ln c`.
//!
//! All logarithms are natural.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::mc::{chunked_mean, Execution};
use crate::numeric::HALF_LN_2PI;
use crate::rng::{RngStream, SimRng};

/// Distance from an open parameter boundary below which θ is rejected.
pub const BOUNDARY_EPS: f64 = 1e-9;

pub type RealVec = SmallVec<[f64; 4]>;

/// A sample, channel output or blackboard message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sample {
    Symbol(usize),
    Real(RealVec),
}

impl Sample {
    pub fn scalar(x: f64) -> Self {
        Sample::Real(smallvec::smallvec![x])
    }

    pub fn as_symbol(&self) -> Option<usize> {
        match self {
            Sample::Symbol(s) => Some(*s),
            Sample::Real(_) => None,
        }
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Sample::Real(v) => Some(v),
            Sample::Symbol(_) => None,
        }
    }
}

/// Model parameter θ ∈ Θ ⊆ R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamPoint(pub Vec<f64>);

impl ParamPoint {
    pub fn new(theta: Vec<f64>) -> Self {
        Self(theta)
    }

    pub fn scalar(theta: f64) -> Self {
        Self(vec![theta])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `(1 − λ)·self + λ·other`
    pub fn lerp(&self, other: &ParamPoint, lambda: f64) -> ParamPoint {
        ParamPoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - lambda) * a + lambda * b)
                .collect(),
        )
    }

    pub fn distance_sq(&self, other: &ParamPoint) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Copy with coordinate `j` shifted by `h`.
    pub fn shifted(&self, j: usize, h: f64) -> ParamPoint {
        let mut v = self.0.clone();
        v[j] += h;
        ParamPoint(v)
    }
}

/// Sample space of a model or channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// `{0, …, k−1}`
    Finite(usize),
    /// `R^k`
    Continuous(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianSpec")]
pub struct GaussianLocation {
    pub sigma: f64,
    pub dim: usize,
    /// Half-width of the parameter box `[−b, b]^d`.
    pub theta_bound: f64,
}

#[derive(Deserialize)]
struct GaussianSpec {
    sigma: f64,
    #[serde(default = "one_usize")]
    dim: usize,
    #[serde(default = "one_f64")]
    theta_bound: f64,
}

fn one_usize() -> usize {
    1
}

fn one_f64() -> f64 {
    1.0
}

impl TryFrom<GaussianSpec> for GaussianLocation {
    type Error = Error;

    fn try_from(s: GaussianSpec) -> Result<Self> {
        let mut g = GaussianLocation::new(s.sigma, s.dim)?;
        if !(s.theta_bound > 0.0) {
            return Err(Error::Validation(format!(
                "theta_bound must be positive, got {}",
                s.theta_bound
            )));
        }
        g.theta_bound = s.theta_bound;
        Ok(g)
    }
}

impl GaussianLocation {
    pub fn new(sigma: f64, dim: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Validation(format!("sigma must be positive, got {sigma}")));
        }
        if dim == 0 {
            return Err(Error::Validation("dim must be at least 1".into()));
        }
        Ok(Self {
            sigma,
            dim,
            theta_bound: 1.0,
        })
    }

    pub fn with_theta_bound(mut self, bound: f64) -> Self {
        self.theta_bound = bound;
        self
    }
}

/// `Bern(θ)`, θ ∈ (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BernoulliModel {}

/// Exponential twist between two strictly positive pmfs on a shared alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TwistSpec", into = "TwistSpec")]
pub struct TwistFamily {
    f0: Vec<f64>,
    f1: Vec<f64>,
    log_ratio: Vec<f64>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct TwistSpec {
    f0: Vec<f64>,
    f1: Vec<f64>,
}

impl TryFrom<TwistSpec> for TwistFamily {
    type Error = Error;

    fn try_from(s: TwistSpec) -> Result<Self> {
        TwistFamily::new(s.f0, s.f1)
    }
}

impl From<TwistFamily> for TwistSpec {
    fn from(t: TwistFamily) -> Self {
        TwistSpec { f0: t.f0, f1: t.f1 }
    }
}

/// `C_θ = Σ f₁^θ f₀^{1−θ}` and its θ-derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwistNormalizer {
    pub c_theta: f64,
    pub dc_dtheta: f64,
}

fn validate_pmf(p: &[f64], name: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Validation(format!("{name} is empty")));
    }
    if p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::Validation(format!("{name} has a negative or non-finite entry")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}

/// Normalizer of the twist `f₁^θ f₀^{1−θ}` by exact summation.
pub fn twist_normalizer(f0: &[f64], f1: &[f64], theta: f64) -> Result<TwistNormalizer> {
    if f0.len() != f1.len() {
        return Err(Error::Shape(format!(
            "f0 has {} symbols, f1 has {}",
            f0.len(),
            f1.len()
        )));
    }
    check_likelihood_ratio(f0, f1)?;
    if !(-BOUNDARY_EPS..=1.0 + BOUNDARY_EPS).contains(&theta) {
        return Err(Error::Parameter(format!("twist theta {theta} outside [0, 1]")));
    }
    Ok(normalizer_unchecked(f0, f1, theta))
}

fn check_likelihood_ratio(f0: &[f64], f1: &[f64]) -> Result<()> {
    for (index, (&a, &b)) in f0.iter().zip(f1).enumerate() {
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::LikelihoodRatio { index, f0: a, f1: b });
        }
    }
    Ok(())
}

fn normalizer_unchecked(f0: &[f64], f1: &[f64], theta: f64) -> TwistNormalizer {
    // endpoints are exact by construction
    if theta == 0.0 {
        return TwistNormalizer {
            c_theta: 1.0,
            dc_dtheta: f0.iter().zip(f1).map(|(a, b)| a * (b / a).ln()).sum(),
        };
    }
    if theta == 1.0 {
        return TwistNormalizer {
            c_theta: 1.0,
            dc_dtheta: f0.iter().zip(f1).map(|(a, b)| b * (b / a).ln()).sum(),
        };
    }
    let mut c = 0.0;
    let mut dc = 0.0;
    for (&a, &b) in f0.iter().zip(f1) {
        let lr = (b / a).ln();
        let w = (theta * b.ln() + (1.0 - theta) * a.ln()).exp();
        c += w;
        dc += w * lr;
    }
    TwistNormalizer {
        c_theta: c,
        dc_dtheta: dc,
    }
}

impl TwistFamily {
    pub fn new(f0: Vec<f64>, f1: Vec<f64>) -> Result<Self> {
        validate_pmf(&f0, "f0")?;
        validate_pmf(&f1, "f1")?;
        if f0.len() != f1.len() {
            return Err(Error::Shape(format!(
                "f0 has {} symbols, f1 has {}",
                f0.len(),
                f1.len()
            )));
        }
        check_likelihood_ratio(&f0, &f1)?;
        let log_ratio: Vec<f64> = f0.iter().zip(&f1).map(|(a, b)| (b / a).ln()).collect();
        let c = log_ratio.iter().fold(1.0f64, |m, lr| m.max(lr.abs().exp()));
        Ok(Self {
            f0,
            f1,
            log_ratio,
            c,
        })
    }

    pub fn f0(&self) -> &[f64] {
        &self.f0
    }

    pub fn f1(&self) -> &[f64] {
        &self.f1
    }

    /// Smallest `c ≥ 1` with `f₀/c ≤ f₁ ≤ c·f₀`.
    pub fn likelihood_ratio_bound(&self) -> f64 {
        self.c
    }

    pub fn normalizer(&self, theta: f64) -> TwistNormalizer {
        normalizer_unchecked(&self.f0, &self.f1, theta)
    }
}

/// A parametric family, tagged by `family` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Model {
    GaussianLocation(GaussianLocation),
    Bernoulli(BernoulliModel),
    Twist(TwistFamily),
}

impl Model {
    pub fn gaussian(sigma: f64, dim: usize) -> Result<Self> {
        Ok(Model::GaussianLocation(GaussianLocation::new(sigma, dim)?))
    }

    pub fn bernoulli() -> Self {
        Model::Bernoulli(BernoulliModel {})
    }

    pub fn twist(f0: Vec<f64>, f1: Vec<f64>) -> Result<Self> {
        Ok(Model::Twist(TwistFamily::new(f0, f1)?))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::GaussianLocation(_) => "gaussian_location",
            Model::Bernoulli(_) => "bernoulli",
            Model::Twist(_) => "twist",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::GaussianLocation(g) => g.dim,
            Model::Bernoulli(_) | Model::Twist(_) => 1,
        }
    }

    pub fn support(&self) -> Support {
        match self {
            Model::GaussianLocation(g) => Support::Continuous(g.dim),
            Model::Bernoulli(_) => Support::Finite(2),
            Model::Twist(t) => Support::Finite(t.f0.len()),
        }
    }

    /// Rejects θ of the wrong length or outside the admissible set.
    pub fn check_param(&self, theta: &ParamPoint) -> Result<()> {
        if theta.dim() != self.dim() {
            return Err(Error::Shape(format!(
                "theta has length {}, model dimension is {}",
                theta.dim(),
                self.dim()
            )));
        }
        if theta.0.iter().any(|t| !t.is_finite()) {
            return Err(Error::Parameter("theta has a non-finite coordinate".into()));
        }
        match self {
            Model::GaussianLocation(g) => {
                if let Some(t) = theta.0.iter().find(|t| t.abs() > g.theta_bound) {
                    return Err(Error::Parameter(format!(
                        "theta coordinate {t} outside [-{b}, {b}]",
                        b = g.theta_bound
                    )));
                }
            }
            Model::Bernoulli(_) => {
                let t = theta.0[0];
                if t <= BOUNDARY_EPS || t >= 1.0 - BOUNDARY_EPS {
                    return Err(Error::Parameter(format!(
                        "bernoulli theta {t} not in the open interval (0, 1)"
                    )));
                }
            }
            Model::Twist(_) => {
                let t = theta.0[0];
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::Parameter(format!("twist theta {t} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }

    /// Declared sub-Gaussian parameter of the score at θ.
    pub fn subgaussian_param(&self, theta: &ParamPoint) -> Result<f64> {
        self.check_param(theta)?;
        Ok(match self {
            Model::GaussianLocation(g) => 1.0 / g.sigma,
            Model::Bernoulli(_) => {
                let t = theta.0[0];
                (1.0 / t).max(1.0 / (1.0 - t))
            }
            Model::Twist(t) => 2.0 * t.c.ln(),
        })
    }

    fn check_sample(&self, x: &Sample) -> Result<()> {
        match (self.support(), x) {
            (Support::Finite(k), Sample::Symbol(s)) if *s < k => Ok(()),
            (Support::Continuous(k), Sample::Real(v)) if v.len() == k => Ok(()),
            (support, x) => Err(Error::Domain(format!("{x:?} not in {support:?}"))),
        }
    }

    /// ln p_θ(x)
    pub fn log_density(&self, theta: &ParamPoint, x: &Sample) -> Result<f64> {
        self.check_param(theta)?;
        self.check_sample(x)?;
        Ok(match (self, x) {
            (Model::GaussianLocation(g), Sample::Real(v)) => {
                let var = g.sigma * g.sigma;
                let sq: f64 = v.iter().zip(&theta.0).map(|(a, b)| (a - b) * (a - b)).sum();
                -(g.dim as f64) * (HALF_LN_2PI + g.sigma.ln()) - sq / (2.0 * var)
            }
            (Model::Bernoulli(_), Sample::Symbol(s)) => {
                let t = theta.0[0];
                if *s == 1 {
                    t.ln()
                } else {
                    (1.0 - t).ln()
                }
            }
            (Model::Twist(tw), Sample::Symbol(s)) => {
                let t = theta.0[0];
                let norm = tw.normalizer(t);
                t * tw.f1[*s].ln() + (1.0 - t) * tw.f0[*s].ln() - norm.c_theta.ln()
            }
            _ => unreachable!("checked by check_sample"),
        })
    }

    /// ∇_θ ln p_θ(x)
    pub fn score(&self, theta: &ParamPoint, x: &Sample) -> Result<Vec<f64>> {
        self.check_param(theta)?;
        self.check_sample(x)?;
        Ok(match (self, x) {
            (Model::GaussianLocation(g), Sample::Real(v)) => {
                let var = g.sigma * g.sigma;
                v.iter().zip(&theta.0).map(|(a, b)| (a - b) / var).collect()
            }
            (Model::Bernoulli(_), Sample::Symbol(s)) => {
                let t = theta.0[0];
                vec![if *s == 1 { 1.0 / t } else { -1.0 / (1.0 - t) }]
            }
            (Model::Twist(tw), Sample::Symbol(s)) => {
                let norm = tw.normalizer(theta.0[0]);
                vec![tw.log_ratio[*s] - norm.dc_dtheta / norm.c_theta]
            }
            _ => unreachable!("checked by check_sample"),
        })
    }

    /// Exact pmf over the finite alphabet.
    pub fn pmf(&self, theta: &ParamPoint) -> Result<Vec<f64>> {
        self.check_param(theta)?;
        match self {
            Model::GaussianLocation(_) => Err(Error::Capability(
                "gaussian_location has no finite pmf".into(),
            )),
            Model::Bernoulli(_) => {
                let t = theta.0[0];
                Ok(vec![1.0 - t, t])
            }
            Model::Twist(tw) => {
                let t = theta.0[0];
                if t == 0.0 {
                    return Ok(tw.f0.clone());
                }
                if t == 1.0 {
                    return Ok(tw.f1.clone());
                }
                let c = tw.normalizer(t).c_theta;
                Ok(tw
                    .f0
                    .iter()
                    .zip(&tw.f1)
                    .map(|(a, b)| (t * b.ln() + (1.0 - t) * a.ln()).exp() / c)
                    .collect())
            }
        }
    }

    /// Gradient of the pmf: entry `[x][j] = ∂p_θ(x)/∂θ_j = p_θ(x)·S_θ(x)_j`.
    pub fn pmf_grad(&self, theta: &ParamPoint) -> Result<Vec<Vec<f64>>> {
        let p = self.pmf(theta)?;
        p.iter()
            .enumerate()
            .map(|(x, &px)| {
                let s = self.score(theta, &Sample::Symbol(x))?;
                Ok(s.into_iter().map(|v| v * px).collect())
            })
            .collect()
    }

    /// One draw from P_θ.
    pub fn sample(&self, theta: &ParamPoint, rng: &mut SimRng) -> Result<Sample> {
        self.check_param(theta)?;
        Ok(self.sample_unchecked(theta, rng))
    }

    /// Draw without re-validating θ; callers validate once per run.
    pub(crate) fn sample_unchecked(&self, theta: &ParamPoint, rng: &mut SimRng) -> Sample {
        match self {
            Model::GaussianLocation(g) if theta.0.len() == 1 => {
                let z: f64 = rng.sample(StandardNormal);
                Sample::Real(smallvec::smallvec![theta.0[0] + g.sigma * z])
            }
            Model::GaussianLocation(g) => Sample::Real(
                theta
                    .0
                    .iter()
                    .map(|&m| {
                        let z: f64 = rng.sample(StandardNormal);
                        m + g.sigma * z
                    })
                    .collect(),
            ),
            Model::Bernoulli(_) => Sample::Symbol(usize::from(rng.gen::<f64>() < theta.0[0])),
            Model::Twist(_) => {
                let p = self.pmf(theta).expect("validated theta");
                Sample::Symbol(sample_pmf(&p, rng))
            }
        }
    }
}

/// Inverse-CDF draw from a pmf.
pub(crate) fn sample_pmf(p: &[f64], rng: &mut SimRng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += pi;
        if u < acc {
            return i;
        }
    }
    // rounding left u above the cumulative sum: last symbol with mass
    p.iter().rposition(|&v| v > 0.0).unwrap_or(p.len() - 1)
}

/// Outcome of a numerical audit of the declared sub-Gaussian parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgaussianAudit {
    /// Declared N that was audited.
    pub declared_n: f64,
    pub certified: bool,
    /// Largest `ln E[exp(λ⟨u,S⟩)] − λ²N²/2` over the grid.
    pub max_gap: f64,
    /// Standard error attached to `max_gap` (0 for exact expectations).
    pub max_gap_std_error: f64,
    pub worst_lambda: f64,
    pub checks: usize,
}

/// `{±0.5, ±1, ±2} / N`; falls back to unscaled values when N is 0.
pub fn standard_lambda_grid(n: f64) -> Vec<f64> {
    let scale = if n > 0.0 { 1.0 / n } else { 1.0 };
    [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]
        .iter()
        .map(|l| l * scale)
        .collect()
}

/// Checks `E[exp(λ⟨u, S_θ⟩)] ≤ exp(λ²N²/2)` for the declared N over a λ
/// grid and a set of unit directions (axis-aligned plus `direction_count`
/// random ones). Finite-alphabet models use exact expectations; continuous
/// models use `mc_samples` draws and a 4-standard-error allowance.
pub fn certify_subgaussian(
    model: &Model,
    theta: &ParamPoint,
    lambda_grid: &[f64],
    direction_count: usize,
    mc_samples: usize,
    stream: RngStream,
) -> Result<SubgaussianAudit> {
    let declared_n = model.subgaussian_param(theta)?;
    if lambda_grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::Validation("lambda grid must be finite".into()));
    }
    let d = model.dim();
    let mut directions: Vec<Vec<f64>> = (0..d)
        .map(|j| (0..d).map(|k| if j == k { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut dir_rng = stream.substream(u64::MAX).rng();
    for _ in 0..direction_count {
        let v: Vec<f64> = (0..d).map(|_| dir_rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            directions.push(v.into_iter().map(|x| x / norm).collect());
        }
    }

    let mut audit = SubgaussianAudit {
        declared_n,
        certified: true,
        max_gap: f64::NEG_INFINITY,
        max_gap_std_error: 0.0,
        worst_lambda: f64::NAN,
        checks: 0,
    };
    let sample_stream = stream.substream(0);
    for u in &directions {
        for &lambda in lambda_grid {
            let bound = 0.5 * lambda * lambda * declared_n * declared_n;
            let (mgf, se) = match model.support() {
                Support::Finite(k) => {
                    let p = model.pmf(theta)?;
                    let mut m = 0.0;
                    for (x, &px) in p.iter().enumerate().take(k) {
                        let s = model.score(theta, &Sample::Symbol(x))?;
                        let proj: f64 = s.iter().zip(u).map(|(a, b)| a * b).sum();
                        m += px * (lambda * proj).exp();
                    }
                    (m, 0.0)
                }
                Support::Continuous(_) => {
                    // common random numbers across (u, λ): same substream
                    let est = chunked_mean(mc_samples, sample_stream, Execution::Parallel, |rng| {
                        let x = model.sample_unchecked(theta, rng);
                        let s = model.score(theta, &x).expect("validated sample");
                        let proj: f64 = s.iter().zip(u).map(|(a, b)| a * b).sum();
                        (lambda * proj).exp()
                    });
                    (est.mean, est.std_error)
                }
            };
            let rel_se = if mgf > 0.0 { se / mgf } else { f64::INFINITY };
            if !mgf.is_finite() || !rel_se.is_finite() || rel_se > 0.25 {
                return Err(Error::MgfDiverged { lambda });
            }
            let gap = mgf.ln() - bound;
            audit.checks += 1;
            let allowance = if se > 0.0 { 4.0 * rel_se } else { 1e-12 };
            if gap > allowance {
                audit.certified = false;
            }
            if gap > audit.max_gap {
                audit.max_gap = gap;
                audit.max_gap_std_error = rel_se;
                audit.worst_lambda = lambda;
            }
        }
    }
    Ok(audit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    fn p(t: f64) -> ParamPoint {
        ParamPoint::scalar(t)
    }

    fn bern_twist() -> TwistFamily {
        // f0 = Bern(0.4), f1 = Bern(0.6) as pmfs over {0, 1}
        TwistFamily::new(vec![0.6, 0.4], vec![0.4, 0.6]).unwrap()
    }

    #[test]
    fn log_density_examples() {
        let g = Model::gaussian(1.0, 1).unwrap();
        let v = g.log_density(&p(0.0), &Sample::scalar(0.0)).unwrap();
        assert!((v + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);

        let b = Model::bernoulli();
        assert!((b.log_density(&p(0.5), &Sample::Symbol(1)).unwrap() + LN_2).abs() < 1e-15);

        let tw = Model::Twist(bern_twist());
        // oracle: direct two-term normalizer 2·sqrt(0.24)
        let c = 2.0 * 0.24f64.sqrt();
        let expected = ((0.6f64 * 0.4).sqrt() / c).ln();
        let v = tw.log_density(&p(0.5), &Sample::Symbol(1)).unwrap();
        assert!((v - expected).abs() < 1e-14);
        assert!((v + LN_2).abs() < 1e-14);
    }

    #[test]
    fn log_density_errors() {
        let b = Model::bernoulli();
        assert!(matches!(
            b.log_density(&p(1.0), &Sample::Symbol(1)),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            b.log_density(&p(0.5 * BOUNDARY_EPS), &Sample::Symbol(1)),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            b.log_density(&p(0.5), &Sample::Symbol(2)),
            Err(Error::Domain(_))
        ));
        let g = Model::gaussian(1.0, 2).unwrap();
        assert!(matches!(
            g.log_density(&ParamPoint::new(vec![0.0, 0.0]), &Sample::scalar(0.0)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            g.log_density(&ParamPoint::new(vec![0.0, 1.5]), &Sample::Real(smallvec::smallvec![0.0, 0.0])),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn score_examples() {
        let g = Model::gaussian(1.0, 1).unwrap();
        let s = g.score(&p(0.3), &Sample::scalar(1.0)).unwrap();
        assert!((s[0] - 0.7).abs() < 1e-15);

        let b = Model::bernoulli();
        assert_eq!(b.score(&p(0.5), &Sample::Symbol(0)).unwrap(), vec![-2.0]);

        let tw = bern_twist();
        // C'_{0.5} vanishes for this symmetric pair; confirm by central differences of C
        let h = 1e-6;
        let fd = (tw.normalizer(0.5 + h).c_theta - tw.normalizer(0.5 - h).c_theta) / (2.0 * h);
        assert!(fd.abs() < 1e-9);
        assert!(tw.normalizer(0.5).dc_dtheta.abs() < 1e-15);
        let s = Model::Twist(tw).score(&p(0.5), &Sample::Symbol(1)).unwrap();
        assert!((s[0] - 1.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn twist_normalizer_examples() {
        let f0 = [0.6, 0.4];
        let f1 = [0.4, 0.6];
        assert_eq!(twist_normalizer(&f0, &f1, 0.0).unwrap().c_theta, 1.0);
        assert_eq!(twist_normalizer(&f0, &f1, 1.0).unwrap().c_theta, 1.0);
        let c = twist_normalizer(&f0, &f1, 0.5).unwrap().c_theta;
        assert!((c - 2.0 * 0.24f64.sqrt()).abs() < 1e-15);
        assert!((c - 0.97980).abs() < 1e-5);

        let same = [0.2, 0.3, 0.5];
        for t in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let n = twist_normalizer(&same, &same, t).unwrap();
            assert!((n.c_theta - 1.0).abs() < 1e-15);
            assert!(n.dc_dtheta.abs() < 1e-15);
        }
    }

    #[test]
    fn twist_derivative_matches_finite_differences() {
        let f0 = [0.1, 0.2, 0.3, 0.4];
        let f1 = [0.25, 0.25, 0.3, 0.2];
        for t in [0.1, 0.3, 0.7, 0.95] {
            let h = 1e-6;
            let fd = (twist_normalizer(&f0, &f1, t + h).unwrap().c_theta
                - twist_normalizer(&f0, &f1, t - h).unwrap().c_theta)
                / (2.0 * h);
            let exact = twist_normalizer(&f0, &f1, t).unwrap().dc_dtheta;
            assert!((fd - exact).abs() < 1e-9, "t={t}: {fd} vs {exact}");
        }
    }

    #[test]
    fn twist_rejects_zero_mass() {
        assert!(matches!(
            TwistFamily::new(vec![1.0, 0.0], vec![0.5, 0.5]),
            Err(Error::LikelihoodRatio { index: 1, .. })
        ));
        assert!(matches!(
            twist_normalizer(&[0.5, 0.5], &[0.0, 1.0], 0.5),
            Err(Error::LikelihoodRatio { index: 0, .. })
        ));
    }

    #[test]
    fn twist_endpoints_and_score_bound() {
        let tw = TwistFamily::new(vec![0.1, 0.2, 0.3, 0.4], vec![0.25, 0.25, 0.3, 0.2]).unwrap();
        let m = Model::Twist(tw.clone());
        let p0 = m.pmf(&p(0.0)).unwrap();
        let p1 = m.pmf(&p(1.0)).unwrap();
        for x in 0..4 {
            assert!((p0[x] - tw.f0()[x]).abs() < 1e-12);
            assert!((p1[x] - tw.f1()[x]).abs() < 1e-12);
            // the log-density route agrees at the endpoints too
            let ld = m.log_density(&p(1.0), &Sample::Symbol(x)).unwrap();
            assert!((ld.exp() - tw.f1()[x]).abs() < 1e-12);
        }
        let bound = 2.0 * tw.likelihood_ratio_bound().ln();
        for i in 0..=40 {
            let t = i as f64 / 40.0;
            for x in 0..4 {
                let s = m.score(&p(t), &Sample::Symbol(x)).unwrap()[0];
                assert!(s.abs() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn discrete_scores_are_mean_zero() {
        let models = [
            Model::bernoulli(),
            Model::Twist(bern_twist()),
            Model::twist(vec![0.1, 0.2, 0.3, 0.4], vec![0.25, 0.25, 0.3, 0.2]).unwrap(),
        ];
        for m in &models {
            for t in [0.1, 0.37, 0.5, 0.9] {
                let pm = m.pmf(&p(t)).unwrap();
                assert!((pm.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let mean: f64 = pm
                    .iter()
                    .enumerate()
                    .map(|(x, px)| px * m.score(&p(t), &Sample::Symbol(x)).unwrap()[0])
                    .sum();
                assert!(mean.abs() < 1e-12, "{} at {t}: {mean}", m.name());
            }
        }
    }

    #[test]
    fn score_matches_central_differences() {
        let h = 1e-5;
        let check = |m: &Model, theta: &ParamPoint, x: &Sample| {
            let s = m.score(theta, x).unwrap();
            for j in 0..theta.dim() {
                let fd = (m.log_density(&theta.shifted(j, h), x).unwrap()
                    - m.log_density(&theta.shifted(j, -h), x).unwrap())
                    / (2.0 * h);
                let rel = (fd - s[j]).abs() / s[j].abs().max(1.0);
                assert!(rel <= 1e-5, "{} theta={theta:?}: fd {fd} vs {}", m.name(), s[j]);
            }
        };
        let g = Model::gaussian(0.7, 2).unwrap();
        for t in [-0.9, -0.2, 0.4, 0.8] {
            check(&g, &ParamPoint::new(vec![t, -t / 2.0]), &Sample::Real(smallvec::smallvec![0.3, -1.1]));
        }
        let b = Model::bernoulli();
        let tw = Model::twist(vec![0.1, 0.2, 0.3, 0.4], vec![0.25, 0.25, 0.3, 0.2]).unwrap();
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            for x in 0..2 {
                check(&b, &p(t), &Sample::Symbol(x));
            }
            for x in 0..4 {
                check(&tw, &p(t), &Sample::Symbol(x));
            }
        }
    }

    #[test]
    fn declared_subgaussian_params() {
        assert_eq!(Model::gaussian(0.5, 3).unwrap().subgaussian_param(&ParamPoint::new(vec![0.0; 3])).unwrap(), 2.0);
        assert_eq!(Model::bernoulli().subgaussian_param(&p(0.5)).unwrap(), 2.0);
        assert!((Model::bernoulli().subgaussian_param(&p(0.2)).unwrap() - 5.0).abs() < 1e-12);
        let tw = Model::Twist(bern_twist());
        assert!((tw.subgaussian_param(&p(0.3)).unwrap() - 2.0 * 1.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_mgf_is_exact() {
        // E[e^S] at θ = 0.5 is cosh(2) < e² = exp(λ²N²/2) with N = 2, λ = 1
        let audit = certify_subgaussian(&Model::bernoulli(), &p(0.5), &[1.0], 0, 0, RngStream::new(1)).unwrap();
        assert!(audit.certified);
        let expected_gap = 2.0f64.cosh().ln() - 2.0;
        assert!((audit.max_gap - expected_gap).abs() < 1e-14);
        assert!(2.0f64.cosh() < 2.0f64.exp() && (2.0f64.cosh() - 3.762).abs() < 1e-3);
    }

    #[test]
    fn gaussian_mgf_audit() {
        let g = Model::gaussian(1.0, 1).unwrap();
        let audit = certify_subgaussian(&g, &p(0.0), &[-2.0, -1.0, -0.5, 0.5, 1.0, 2.0], 0, 200_000, RngStream::new(3)).unwrap();
        assert!(audit.certified, "{audit:?}");
        assert!(audit.max_gap.abs() < 4.0 * audit.max_gap_std_error + 1e-3);

        let g3 = Model::gaussian(0.5, 3).unwrap();
        let theta = ParamPoint::new(vec![0.1, -0.2, 0.3]);
        let audit = certify_subgaussian(&g3, &theta, &standard_lambda_grid(2.0), 50, 100_000, RngStream::new(4)).unwrap();
        assert!(audit.certified, "{audit:?}");
        assert_eq!(audit.checks, 53 * 6);
    }

    #[test]
    fn mgf_divergence_is_reported() {
        let g = Model::gaussian(1.0, 1).unwrap();
        let err = certify_subgaussian(&g, &p(0.0), &[1.0, 12.0], 0, 10_000, RngStream::new(5)).unwrap_err();
        assert_eq!(err, Error::MgfDiverged { lambda: 12.0 });
    }

    #[test]
    fn every_family_certifies_on_standard_grid() {
        let cases = [
            (Model::bernoulli(), p(0.2)),
            (Model::bernoulli(), p(0.5)),
            (Model::Twist(bern_twist()), p(0.4)),
            (Model::gaussian(2.0, 2).unwrap(), ParamPoint::new(vec![0.5, -0.5])),
        ];
        for (m, t) in &cases {
            let n = m.subgaussian_param(t).unwrap();
            let audit = certify_subgaussian(m, t, &standard_lambda_grid(n), 8, 100_000, RngStream::new(9)).unwrap();
            assert!(audit.certified, "{}: {audit:?}", m.name());
        }
    }

    #[test]
    fn samplers_match_moments_and_are_deterministic() {
        let g = Model::gaussian(1.0, 1).unwrap();
        let mut rng = RngStream::new(42).rng();
        let n = 1_000_000;
        let mean: f64 = (0..n)
            .map(|_| g.sample(&p(0.0), &mut rng).unwrap().as_real().unwrap()[0])
            .sum::<f64>()
            / n as f64;
        assert!(mean.abs() < 0.004);

        let b = Model::bernoulli();
        let mut rng = RngStream::new(43).rng();
        let freq = (0..n)
            .filter(|_| b.sample(&p(0.5), &mut rng).unwrap() == Sample::Symbol(1))
            .count() as f64
            / n as f64;
        assert!((freq - 0.5).abs() < 0.002);

        let draw = |seed| {
            let mut r = RngStream::new(seed).rng();
            (0..32).map(|_| g.sample(&p(0.2), &mut r).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn model_json_descriptors() {
        let g: Model = serde_json::from_str(r#"{"family":"gaussian_location","sigma":1.0,"dim":1}"#).unwrap();
        assert_eq!(g, Model::gaussian(1.0, 1).unwrap());
        let b: Model = serde_json::from_str(r#"{"family":"bernoulli"}"#).unwrap();
        assert_eq!(b, Model::bernoulli());
        let t: Model = serde_json::from_str(r#"{"family":"twist","f0":[0.6,0.4],"f1":[0.4,0.6]}"#).unwrap();
        assert_eq!(t, Model::Twist(bern_twist()));
        let back: Model = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<Model>(r#"{"family":"twist","f0":[1.0,0.0],"f1":[0.5,0.5]}"#).is_err());
        assert!(serde_json::from_str::<Model>(r#"{"family":"gaussian_location","sigma":-1.0}"#).is_err());
    }
}
