//! Geometry-based stochastic channel simulator for industrial automation
//! links.
//!
//! Each channel realization is a random field of twin-bounce clusters. Every
//! cluster carries a few specular multipath components (SMCs) and a larger
//! set of weak dense multipath components (DMCs). The pipeline is:
//!
//! 1. [`config`]: scenario parameters and presets for light/heavy clutter.
//! 2. [`cluster`]: draws cluster geometry, scatterer offsets and per-antenna
//!    visibility into an [`cluster::Environment`].
//! 3. [`propagation`]: delay and power laws, including the DMC power-ratio
//!    accounting, evaluated at any time instant.
//! 4. [`channel`]: complex path coefficients, impulse responses and transfer
//!    functions.
//! 5. [`stats`]: correlation functions, RMS delay spread, empirical CDFs and
//!    MMSE parameter fitting.
//!
//! [`ensemble`] ties these together into seeded, parallel Monte-Carlo runs
//! and [`export`] reads and writes the delimited text artifacts.

pub mod channel;
pub mod cluster;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod export;
pub mod geometry;
pub mod propagation;
pub mod stats;

pub use channel::{Channel, ChannelRealization, Path, PathKind};
pub use cluster::Environment;
pub use config::{Clutter, Condition, EtaReference, ScenarioParams};
pub use error::{Error, Result, ValidationError};
pub use geometry::{ArrayConfig, Trajectory, Vec3};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
