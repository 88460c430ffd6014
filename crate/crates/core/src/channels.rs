//! Transition kernels `p(y|x)`: the information-constrained processing step.
//!
//! Discrete-output kernels (matrices, randomized response, quantizers) are
//! densities with respect to counting measure and expose [`Channel::output_pmf`].
//! The AWGN kernel is a density with respect to Lebesgue measure. A
//! deterministic quantizer is a point mass per input, so it has a pmf but no
//! density against a continuous reference; asking for one is an error.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{sample_pmf, Model, ParamPoint, Sample, Support};
use crate::numeric::HALF_LN_2PI;
use crate::rng::SimRng;

const ROW_TOL: f64 = 1e-9;

/// Row-stochastic `|X| × |Y|` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel {
    rows: Vec<Vec<f64>>,
}

impl DiscreteChannel {
    /// Validates non-negativity and row sums (within 1e−9), then rescales each
    /// row so it sums to one in floating point.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || width == 0 {
            return Err(Error::Validation("channel matrix is empty".into()));
        }
        let mut rows = rows;
        for (i, row) in rows.iter_mut().enumerate() {
            if row.len() != width {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::Validation(format!("row {i} has a negative or non-finite entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::Validation(format!("row {i} sums to {s}, not 1")));
            }
            if s != 1.0 {
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        Ok(Self { rows })
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Validation(format!("crossover {p} outside [0, 1]")));
        }
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; output symbol 2 is the erasure.
    pub fn bec(erasure: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&erasure) {
            return Err(Error::Validation(format!("erasure {erasure} outside [0, 1]")));
        }
        Self::new(vec![
            vec![1.0 - erasure, 0.0, erasure],
            vec![0.0, 1.0 - erasure, erasure],
        ])
    }

    pub fn identity(size: usize) -> Result<Self> {
        Self::new(
            (0..size)
                .map(|i| (0..size).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].len()
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    /// Kronecker product: the channel acting independently on each coordinate
    /// of a pair, with symbols encoded row-major.
    pub fn kron(&self, other: &DiscreteChannel) -> DiscreteChannel {
        let (ox, oy) = (other.input_size(), other.output_size());
        let mut rows = vec![vec![0.0; self.output_size() * oy]; self.input_size() * ox];
        for (x1, r1) in self.rows.iter().enumerate() {
            for (x2, r2) in other.rows.iter().enumerate() {
                let row = &mut rows[x1 * ox + x2];
                for (y1, a) in r1.iter().enumerate() {
                    for (y2, b) in r2.iter().enumerate() {
                        row[y1 * oy + y2] = a * b;
                    }
                }
            }
        }
        DiscreteChannel { rows }
    }
}

/// `Y = X + W`, `W ~ N(0, σ²_noise I)` in every input coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AwgnChannel {
    pub sigma_noise: f64,
}

/// `2^bits` equal-width bins on `[lo, hi]`, outer bins absorbing the tails,
/// ties at an edge going to the right bin. With `dither`, `U ~ Uniform(±w/2)`
/// (w the bin width) is added before binning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerChannel {
    pub bits: u32,
    pub lo: f64,
    pub hi: f64,
    pub dither: bool,
}

impl QuantizerChannel {
    pub fn new(bits: u32, lo: f64, hi: f64, dither: bool) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::Validation(format!("bits must be in 1..=16, got {bits}")));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Validation(format!("invalid range [{lo}, {hi}]")));
        }
        Ok(Self { bits, lo, hi, dither })
    }

    pub fn levels(&self) -> usize {
        1 << self.bits
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.levels() as f64
    }

    /// Interior edges `e_1 < … < e_{L−1}`; bin j is `[e_j, e_{j+1})` with
    /// `e_0 = −∞`, `e_L = +∞`.
    pub fn interior_edges(&self) -> Vec<f64> {
        let w = self.bin_width();
        (1..self.levels()).map(|j| self.lo + j as f64 * w).collect()
    }

    /// Edge `j` for `j ∈ 0..=L`, infinite at both ends.
    pub fn edge(&self, j: usize) -> f64 {
        if j == 0 {
            f64::NEG_INFINITY
        } else if j >= self.levels() {
            f64::INFINITY
        } else {
            self.lo + j as f64 * self.bin_width()
        }
    }

    pub fn bin(&self, z: f64) -> usize {
        let idx = ((z - self.lo) / self.bin_width()).floor();
        idx.clamp(0.0, (self.levels() - 1) as f64) as usize
    }

    /// `p(·|x)` over the bins.
    pub fn pmf(&self, x: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.levels()];
        if !self.dither {
            p[self.bin(x)] = 1.0;
            return p;
        }
        let w = self.bin_width();
        let (a, b) = (x - 0.5 * w, x + 0.5 * w);
        let (first, last) = (self.bin(a), self.bin(b));
        for (j, pj) in p.iter_mut().enumerate().take(last + 1).skip(first) {
            let lo = self.edge(j).max(a);
            let hi = self.edge(j + 1).min(b);
            if hi > lo {
                *pj = (hi - lo) / w;
            }
        }
        p
    }
}

/// Binary randomized response: keep the input bit with probability
/// `e^ε/(1+e^ε)`, flip it otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizedResponseChannel {
    pub epsilon: f64,
}

impl RandomizedResponseChannel {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::Validation(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    pub fn flip_probability(&self) -> f64 {
        1.0 / (1.0 + self.epsilon.exp())
    }

    pub fn matrix(&self) -> DiscreteChannel {
        let f = self.flip_probability();
        DiscreteChannel {
            rows: vec![vec![1.0 - f, f], vec![f, 1.0 - f]],
        }
    }
}

/// A transition kernel. JSON descriptors are tagged by `channel`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelSpec", into = "ChannelSpec")]
pub enum Channel {
    Discrete(DiscreteChannel),
    Awgn(AwgnChannel),
    Quantizer(QuantizerChannel),
    RandomizedResponse(RandomizedResponseChannel),
    /// Ignores its input and always emits the given message.
    Constant(Sample),
}

/// Serialized form of [`Channel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "channel", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Awgn { sigma_noise: f64 },
    Bsc { p: f64 },
    Bec { erasure: f64 },
    Identity { size: usize },
    Quantizer {
        bits: u32,
        range: [f64; 2],
        #[serde(default)]
        dither: bool,
    },
    Rr { epsilon: f64 },
    Matrix { rows: Vec<Vec<f64>> },
    Constant { value: Sample },
}

impl TryFrom<ChannelSpec> for Channel {
    type Error = Error;

    fn try_from(s: ChannelSpec) -> Result<Self> {
        Ok(match s {
            ChannelSpec::Awgn { sigma_noise } => Channel::awgn(sigma_noise)?,
            ChannelSpec::Bsc { p } => Channel::Discrete(DiscreteChannel::bsc(p)?),
            ChannelSpec::Bec { erasure } => Channel::Discrete(DiscreteChannel::bec(erasure)?),
            ChannelSpec::Identity { size } => Channel::Discrete(DiscreteChannel::identity(size)?),
            ChannelSpec::Quantizer { bits, range, dither } => {
                Channel::Quantizer(QuantizerChannel::new(bits, range[0], range[1], dither)?)
            }
            ChannelSpec::Rr { epsilon } => {
                Channel::RandomizedResponse(RandomizedResponseChannel::new(epsilon)?)
            }
            ChannelSpec::Matrix { rows } => Channel::Discrete(DiscreteChannel::new(rows)?),
            ChannelSpec::Constant { value } => Channel::Constant(value),
        })
    }
}

impl From<Channel> for ChannelSpec {
    fn from(c: Channel) -> Self {
        match c {
            Channel::Discrete(m) => ChannelSpec::Matrix { rows: m.rows },
            Channel::Awgn(a) => ChannelSpec::Awgn {
                sigma_noise: a.sigma_noise,
            },
            Channel::Quantizer(q) => ChannelSpec::Quantizer {
                bits: q.bits,
                range: [q.lo, q.hi],
                dither: q.dither,
            },
            Channel::RandomizedResponse(r) => ChannelSpec::Rr { epsilon: r.epsilon },
            Channel::Constant(value) => ChannelSpec::Constant { value },
        }
    }
}

impl Channel {
    /// `σ_noise = 0` is accepted (a noiseless pass-through) for simulation;
    /// density and information queries reject it.
    pub fn awgn(sigma_noise: f64) -> Result<Self> {
        if !(sigma_noise >= 0.0 && sigma_noise.is_finite()) {
            return Err(Error::Validation(format!(
                "sigma_noise must be non-negative, got {sigma_noise}"
            )));
        }
        Ok(Channel::Awgn(AwgnChannel { sigma_noise }))
    }

    pub fn bsc(p: f64) -> Result<Self> {
        Ok(Channel::Discrete(DiscreteChannel::bsc(p)?))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Channel::Discrete(_) => "matrix",
            Channel::Awgn(_) => "awgn",
            Channel::Quantizer(_) => "quantizer",
            Channel::RandomizedResponse(_) => "rr",
            Channel::Constant(_) => "constant",
        }
    }

    /// Whether `x` lies in the channel's input space.
    pub fn accepts(&self, x: &Sample) -> bool {
        match (self, x) {
            (Channel::Discrete(m), Sample::Symbol(s)) => *s < m.input_size(),
            (Channel::RandomizedResponse(_), Sample::Symbol(s)) => *s < 2,
            (Channel::Awgn(_), Sample::Real(v)) => !v.is_empty(),
            (Channel::Quantizer(_), Sample::Real(v)) => v.len() == 1,
            (Channel::Constant(_), _) => true,
            _ => false,
        }
    }

    /// Whether inputs drawn from `support` are accepted.
    pub fn accepts_support(&self, support: Support) -> bool {
        match (self, support) {
            (Channel::Discrete(m), Support::Finite(k)) => k == m.input_size(),
            (Channel::RandomizedResponse(_), Support::Finite(k)) => k == 2,
            (Channel::Awgn(_), Support::Continuous(_)) => true,
            (Channel::Quantizer(_), Support::Continuous(k)) => k == 1,
            (Channel::Constant(_), _) => true,
            _ => false,
        }
    }

    /// Number of output symbols for discrete-output channels.
    pub fn output_alphabet(&self) -> Option<usize> {
        match self {
            Channel::Discrete(m) => Some(m.output_size()),
            Channel::RandomizedResponse(_) => Some(2),
            Channel::Quantizer(q) => Some(q.levels()),
            Channel::Awgn(_) | Channel::Constant(_) => None,
        }
    }

    /// The kernel as a matrix when both input and output are finite.
    pub fn as_matrix(&self) -> Option<DiscreteChannel> {
        match self {
            Channel::Discrete(m) => Some(m.clone()),
            Channel::RandomizedResponse(r) => Some(r.matrix()),
            _ => None,
        }
    }

    fn check_input(&self, x: &Sample) -> Result<()> {
        if self.accepts(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("{x:?} is not a valid input to the {} channel", self.kind())))
        }
    }

    /// `p(·|x)` for discrete-output channels.
    pub fn output_pmf(&self, x: &Sample) -> Result<Vec<f64>> {
        self.check_input(x)?;
        match (self, x) {
            (Channel::Discrete(m), Sample::Symbol(s)) => Ok(m.rows[*s].clone()),
            (Channel::RandomizedResponse(r), Sample::Symbol(s)) => Ok(r.matrix().rows[*s].clone()),
            (Channel::Quantizer(q), Sample::Real(v)) => Ok(q.pmf(v[0])),
            _ => Err(Error::Unsupported(format!(
                "the {} channel has no output pmf",
                self.kind()
            ))),
        }
    }

    /// `ln p(y|x)` with respect to the channel's dominating measure.
    pub fn kernel_log_density(&self, x: &Sample, y: &Sample) -> Result<f64> {
        self.check_input(x)?;
        match (self, x, y) {
            (Channel::Discrete(m), Sample::Symbol(xs), Sample::Symbol(ys)) => {
                if *ys >= m.output_size() {
                    return Err(Error::Domain(format!("output symbol {ys} out of range")));
                }
                Ok(m.rows[*xs][*ys].ln())
            }
            (Channel::RandomizedResponse(r), Sample::Symbol(xs), Sample::Symbol(ys)) => {
                if *ys >= 2 {
                    return Err(Error::Domain(format!("output symbol {ys} out of range")));
                }
                let f = r.flip_probability();
                Ok(if xs == ys { (1.0 - f).ln() } else { f.ln() })
            }
            (Channel::Awgn(a), Sample::Real(xv), Sample::Real(yv)) => {
                if xv.len() != yv.len() {
                    return Err(Error::Shape(format!(
                        "input has {} coordinates, output {}",
                        xv.len(),
                        yv.len()
                    )));
                }
                if a.sigma_noise == 0.0 {
                    return Err(Error::Unsupported(
                        "noiseless AWGN has no density; use a deterministic pipeline".into(),
                    ));
                }
                let var = a.sigma_noise * a.sigma_noise;
                let sq: f64 = xv.iter().zip(yv.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                Ok(-(xv.len() as f64) * (HALF_LN_2PI + a.sigma_noise.ln()) - sq / (2.0 * var))
            }
            (Channel::Quantizer(q), Sample::Real(xv), Sample::Symbol(ys)) => {
                if !q.dither {
                    return Err(Error::Unsupported(
                        "deterministic quantizer is a point-mass kernel; use output_pmf".into(),
                    ));
                }
                if *ys >= q.levels() {
                    return Err(Error::Domain(format!("output symbol {ys} out of range")));
                }
                Ok(q.pmf(xv[0])[*ys].ln())
            }
            (Channel::Constant(_), _, _) => Err(Error::Unsupported(
                "constant channel is a point-mass kernel".into(),
            )),
            _ => Err(Error::Domain(format!(
                "{y:?} is not a valid output of the {} channel",
                self.kind()
            ))),
        }
    }

    /// One draw `Y ~ p(·|x)`.
    pub fn sample(&self, x: &Sample, rng: &mut SimRng) -> Result<Sample> {
        self.check_input(x)?;
        Ok(self.sample_unchecked(x, rng))
    }

    pub(crate) fn sample_unchecked(&self, x: &Sample, rng: &mut SimRng) -> Sample {
        match (self, x) {
            (Channel::Discrete(m), Sample::Symbol(s)) => Sample::Symbol(sample_pmf(&m.rows[*s], rng)),
            (Channel::RandomizedResponse(r), Sample::Symbol(s)) => {
                let flip = rng.gen::<f64>() < r.flip_probability();
                Sample::Symbol(if flip { 1 - s } else { *s })
            }
            (Channel::Awgn(a), Sample::Real(v)) if v.len() == 1 => {
                let z: f64 = rng.sample(StandardNormal);
                Sample::Real(smallvec::smallvec![v[0] + a.sigma_noise * z])
            }
            (Channel::Awgn(a), Sample::Real(v)) => Sample::Real(
                v.iter()
                    .map(|&xi| {
                        let z: f64 = rng.sample(StandardNormal);
                        xi + a.sigma_noise * z
                    })
                    .collect(),
            ),
            (Channel::Quantizer(q), Sample::Real(v)) => {
                let mut z = v[0];
                if q.dither {
                    z += q.bin_width() * (rng.gen::<f64>() - 0.5);
                }
                Sample::Symbol(q.bin(z))
            }
            (Channel::Constant(m), _) => m.clone(),
            _ => unreachable!("input validated by the caller"),
        }
    }
}

/// Output pmf `p_θ(y) = Σ_x p(y|x) p_θ(x)` for a finite-alphabet model.
pub fn push_forward_discrete(model: &Model, channel: &DiscreteChannel, theta: &ParamPoint) -> Result<Vec<f64>> {
    let px = model.pmf(theta)?;
    push_forward_pmf(&px, channel)
}

pub(crate) fn push_forward_pmf(px: &[f64], channel: &DiscreteChannel) -> Result<Vec<f64>> {
    if px.len() != channel.input_size() {
        return Err(Error::Shape(format!(
            "model alphabet has {} symbols, channel input has {}",
            px.len(),
            channel.input_size()
        )));
    }
    let mut py = vec![0.0; channel.output_size()];
    for (p, row) in px.iter().zip(&channel.rows) {
        for (acc, w) in py.iter_mut().zip(row) {
            *acc += p * w;
        }
    }
    Ok(py)
}
