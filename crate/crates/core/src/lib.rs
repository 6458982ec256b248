//! Link-level simulation and analytical outage engine for downlink symmetric
//! interference channels with opportunistic (max-SINR) scheduling.
//!
//! The crate is organised bottom-up:
//!
//! * [`config`] and [`channel`]: scenario parameters, Rayleigh channel draws and
//!   the real/imaginary stacking used by widely linear receivers.
//! * [`receivers`]: MMSE and WL-MMSE post-SINR, the eigen form and the
//!   minimum-eigenvalue lower bound.
//! * [`scheduler`]: max-SINR and sequential max-SINR user selection, stream plans
//!   for complex, real and mixed encodings.
//! * [`wishart`]: minimum-eigenvalue densities of complex and real Wishart
//!   matrices plus a sampling oracle.
//! * [`outage`]: closed-form transmitter outage probabilities, users-required
//!   laws and sum outage capacities.
//! * [`experiments`]: Monte Carlo estimators, sweeps, CSV records and the
//!   figure/table catalogue used by the command-line front end.

pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod outage;
pub mod quadrature;
pub mod receivers;
pub mod rng;
pub mod scheduler;
pub mod special;
pub mod wishart;

pub use channel::{draw_channel, stack_real, ChannelSample, WlChannelSample};
pub use config::{db_to_linear, linear_to_db, Encoding, SystemConfig};
pub use error::{Error, Result};
pub use experiments::records::ResultRecord;
pub use scheduler::{ScheduleDecision, StreamPlan};
pub use wishart::{MevCoefficients, WishartKind};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
