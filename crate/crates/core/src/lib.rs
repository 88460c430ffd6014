//! Fisher information under communication constraints.
//!
//! Parametric models, noisy channels, exact and Monte Carlo information
//! quantities, and checks of the inequalities that tie the Fisher information
//! of a channel output to the mutual information it carries.
//!
//! ```
//! use fisherbound::bounds::thm1_verify;
//! use fisherbound::info::MiMethod;
//! use fisherbound::{Channel, Model, ParamPoint};
//!
//! let r = thm1_verify(&Model::bernoulli(), &Channel::bsc(0.25)?, &ParamPoint::scalar(0.5), &MiMethod::Exact)?;
//! assert!(r.holds());
//! assert!((r.rhs - 1.0465).abs() < 1e-4);
//! # Ok::<(), fisherbound::Error>(())
//! ```

pub mod bounds;
pub mod channels;
pub mod cli;
pub mod distributed;
pub mod error;
pub mod fisher;
pub mod info;
pub mod mc;
pub mod models;
pub mod numeric;
pub(crate) mod pipeline;
pub mod rng;

pub use channels::{Channel, ChannelSpec, DiscreteChannel, QuantizerChannel, RandomizedResponseChannel};
pub use error::{Error, Result};
pub use models::{Model, ParamPoint, Sample};
pub use rng::RngStream;
