//! Seeded Monte-Carlo ensembles.
//!
//! Realization `i` of seed `s` draws from ChaCha8 seeded with `s` on stream
//! `i`, so any realization can be rebuilt alone and parallel runs are
//! bit-identical to serial ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{Channel, PathKind};
use crate::cluster::build_environment;
use crate::config::ScenarioParams;
use crate::error::{Error, Result};
use crate::geometry::{ArrayConfig, Trajectory, Vec3};
use crate::stats::rms_delay_spread;

/// Tx at the origin, Rx at `(distance, 0, 0)`, both moving horizontally.
pub fn link_arrays(params: &ScenarioParams) -> Result<(ArrayConfig, ArrayConfig)> {
    let l = &params.link;
    let heading = |speed: f64, deg: f64| {
        let h = deg.to_radians();
        Vec3::new(speed * h.cos(), speed * h.sin(), 0.0)
    };
    let tx = ArrayConfig::new(
        Trajectory {
            p0: Vec3::ZERO,
            v: heading(l.tx_speed, l.tx_heading_deg),
        },
        l.n_tx,
        params.element_spacing(),
        l.tx_orientation_deg[0].to_radians(),
        l.tx_orientation_deg[1].to_radians(),
    )?;
    let rx = ArrayConfig::new(
        Trajectory {
            p0: Vec3::new(l.distance, 0.0, 0.0),
            v: heading(l.rx_speed, l.rx_heading_deg),
        },
        l.n_rx,
        params.element_spacing(),
        l.rx_orientation_deg[0].to_radians(),
        l.rx_orientation_deg[1].to_radians(),
    )?;
    Ok((tx, rx))
}

pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn build_channel(params: &ScenarioParams, seed: u64, index: u64) -> Result<Channel> {
    let (tx, rx) = link_arrays(params)?;
    let env = build_environment(params, &tx, &rx, &mut realization_rng(seed, index))?;
    Ok(Channel::new(params.clone(), tx, rx, env))
}

/// Realizations `0..n`, in index order, built on the current rayon pool.
pub fn generate(params: &ScenarioParams, seed: u64, n: usize) -> Result<Vec<Channel>> {
    params.validate().map_err(Error::Validation)?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| build_channel(params, seed, i))
        .collect()
}

/// Which paths enter a delay-spread evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DsMode {
    /// LOS (if any) and SMCs.
    SmcOnly,
    /// Every path.
    All,
}

impl DsMode {
    pub fn label(self) -> &'static str {
        match self {
            DsMode::SmcOnly => "SMC",
            DsMode::All => "SMC+DMC",
        }
    }
}

/// RMS delay spread of antenna pair (q, p) at time `t`.
pub fn delay_spread(ch: &Channel, t: f64, q: usize, p: usize, mode: DsMode) -> Result<f64> {
    let pd: Vec<(f64, f64)> = ch
        .paths(t, q, p)?
        .into_iter()
        .filter(|x| mode == DsMode::All || x.kind != PathKind::Dmc)
        .map(|x| (x.power(), x.delay))
        .collect();
    rms_delay_spread(&pd)
}

/// One delay-spread sample per realization, taken at `t` on pair (0, 0).
pub fn delay_spread_samples(params: &ScenarioParams, seed: u64, n: usize, t: f64, mode: DsMode) -> Result<Vec<f64>> {
    params.validate().map_err(Error::Validation)?;
    (0..n as u64)
        .into_par_iter()
        .map(|i| delay_spread(&build_channel(params, seed, i)?, t, 0, 0, mode))
        .collect()
}
