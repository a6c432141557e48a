//! Delay and power laws for LOS, SMC and DMC paths.
//!
//! Powers are re-derived at every evaluation instant from the delays at that
//! instant and renormalized, so the LOS/SMC/DMC power split holds at every t.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterRealization, Environment, Scatterer};
use crate::config::{EtaReference, ScenarioParams};
use crate::error::{Error, Result};
use crate::geometry::{ArrayConfig, Vec3};
use crate::SPEED_OF_LIGHT;

/// sigma_tau = 10^X, X ~ N(mean_log_ds, std_log_ds).
pub fn draw_sigma_tau<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    10f64.powf(params.mean_log_ds + params.std_log_ds * z)
}

pub fn los_delay(a: Vec3, b: Vec3) -> Result<f64> {
    let d = (a - b).norm();
    if d == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(d / SPEED_OF_LIGHT)
}

/// -r_tau * sigma_tau * ln(mu).
pub fn virtual_delay(r_tau: f64, sigma_tau: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::OutOfDomain {
            name: "mu",
            range: "(0, 1)",
            value: mu,
        });
    }
    Ok(-r_tau * sigma_tau * mu.ln())
}

/// Geometric bounce delay of a scatterer plus the cluster's virtual delay,
/// without any intra-cluster offset.
fn bounce_delay(cluster: &ClusterRealization, s: &Scatterer, tx_center: Vec3, rx_center: Vec3, t: f64) -> f64 {
    let d_rx = (cluster.rx_point_at(s, t) - rx_center).norm();
    let d_tx = (cluster.tx_point_at(s, t) - tx_center).norm();
    (d_rx + d_tx) / SPEED_OF_LIGHT + cluster.virtual_delay
}

/// SMC delay at `t`: bounce distances over c plus virtual and intra-cluster
/// delays.
pub fn smc_delay(cluster: &ClusterRealization, s: &Scatterer, tx_center: Vec3, rx_center: Vec3, t: f64) -> f64 {
    bounce_delay(cluster, s, tx_center, rx_center, t) + s.rel_delay
}

/// DMC base delay: the DMC's own bounce geometry plus the intra-cluster
/// offset of the cluster's reference SMC.
pub fn dmc_base_delay(cluster: &ClusterRealization, s: &Scatterer, tx_center: Vec3, rx_center: Vec3, t: f64) -> f64 {
    bounce_delay(cluster, s, tx_center, rx_center, t) + cluster.smcs[cluster.reference_smc].rel_delay
}

/// base + xi * S_dmc * beta_dmc.
pub fn dmc_delay(smc_base_delay: f64, xi: f64, params: &ScenarioParams) -> Result<f64> {
    if !(0.0..1.0).contains(&xi) {
        return Err(Error::OutOfDomain {
            name: "xi",
            range: "[0, 1)",
            value: xi,
        });
    }
    Ok(smc_base_delay + xi * params.s_dmc_tau * params.beta_dmc)
}

pub fn smc_power_raw(tau_smc: f64, r_tau: f64, sigma_tau: f64, z_n_db: f64) -> f64 {
    (-tau_smc * (r_tau - 1.0) / (r_tau * sigma_tau)).exp() * 10f64.powf(-z_n_db / 10.0)
}

/// Divide every raw SMC power by the global sum over all clusters.
pub fn normalize_smc(raw: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let total: f64 = raw.iter().flatten().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroPower);
    }
    Ok(raw
        .iter()
        .map(|c| c.iter().map(|p| p / total).collect())
        .collect())
}

/// delay-profile raw DMC power with P_off applied as attenuation 10^(-P_off/10).
pub fn dmc_power_raw(strongest_smc_power: f64, tau_dmc: f64, tau_smc_base: f64, params: &ScenarioParams) -> Result<f64> {
    let excess = tau_dmc - tau_smc_base;
    if excess < 0.0 {
        return Err(Error::OutOfDomain {
            name: "DMC excess delay",
            range: "[0, inf)",
            value: excess,
        });
    }
    let p_off = 10f64.powf(-params.p_off_db / 10.0);
    Ok(strongest_smc_power * p_off * (-excess / params.beta_dmc).exp())
}

/// Total DMC power (1+K)eta / (1 - (K+1)eta) given normalized SMC power 1.
pub fn dmc_total_power(k_linear: f64, eta_dmc: f64) -> Result<f64> {
    let ke = (k_linear + 1.0) * eta_dmc;
    if ke >= 1.0 {
        return Err(Error::UndefinedDmcPower(ke));
    }
    Ok((1.0 + k_linear) * eta_dmc / (1.0 - ke))
}

/// Total DMC power under the scenario's eta reference.
pub fn scenario_dmc_total(params: &ScenarioParams) -> Result<f64> {
    match params.eta_reference {
        EtaReference::Total => dmc_total_power(params.k_linear(), params.eta_dmc),
        EtaReference::Nlos => dmc_total_power(0.0, params.eta_dmc),
    }
}

/// Scale each cluster's DMCs so cluster n carries p_dmc_total * P_n^SMC.
pub fn normalize_dmc(raw: &[Vec<f64>], cluster_smc_power: &[f64], p_dmc_total: f64) -> Result<Vec<Vec<f64>>> {
    raw.iter()
        .zip(cluster_smc_power)
        .map(|(dmcs, p_n)| {
            if dmcs.is_empty() {
                return Ok(Vec::new());
            }
            let sum: f64 = dmcs.iter().sum();
            if !(sum > 0.0) {
                return Err(Error::ZeroPower);
            }
            let scale = p_dmc_total * p_n / sum;
            Ok(dmcs.iter().map(|p| p * scale).collect())
        })
        .collect()
}

/// P_LOS = K (P_SMC + P_DMC) with P_SMC = 1.
pub fn los_power(k_linear: f64, p_dmc_total: f64) -> f64 {
    k_linear * (1.0 + p_dmc_total)
}

/// Per-path delays at one instant. Cluster-major nesting mirrors the
/// environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTiming {
    pub t: f64,
    /// LOS delay between array centers.
    pub tau_los: f64,
    pub smc: Vec<Vec<f64>>,
    pub dmc: Vec<Vec<f64>>,
    /// DMC base delays (excess = dmc - dmc_base).
    pub dmc_base: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLedger {
    pub p_los: f64,
    pub smc: Vec<Vec<f64>>,
    /// Un-normalized delay-profile DMC powers.
    pub dmc_raw: Vec<Vec<f64>>,
    pub dmc: Vec<Vec<f64>>,
    pub p_dmc_total: f64,
    /// DMC share of LOS + SMC + DMC power.
    pub realized_eta: f64,
    /// LOS over SMC + DMC power.
    pub realized_k: f64,
}

pub fn timing_at(env: &Environment, tx: &ArrayConfig, rx: &ArrayConfig, params: &ScenarioParams, t: f64) -> Result<PathTiming> {
    let txc = tx.center.position_at(t);
    let rxc = rx.center.position_at(t);
    let tau_los = los_delay(txc, rxc)?;
    let mut smc = Vec::with_capacity(env.clusters.len());
    let mut dmc = Vec::with_capacity(env.clusters.len());
    let mut dmc_base = Vec::with_capacity(env.clusters.len());
    for c in &env.clusters {
        smc.push(c.smcs.iter().map(|s| smc_delay(c, s, txc, rxc, t)).collect());
        let bases: Vec<f64> = c.dmcs.iter().map(|s| dmc_base_delay(c, s, txc, rxc, t)).collect();
        let delays = c
            .dmcs
            .iter()
            .zip(&bases)
            .map(|(s, b)| dmc_delay(*b, s.xi, params))
            .collect::<Result<Vec<_>>>()?;
        dmc.push(delays);
        dmc_base.push(bases);
    }
    Ok(PathTiming {
        t,
        tau_los,
        smc,
        dmc,
        dmc_base,
    })
}

pub fn power_ledger(env: &Environment, timing: &PathTiming, params: &ScenarioParams) -> Result<PowerLedger> {
    let raw_smc: Vec<Vec<f64>> = env
        .clusters
        .iter()
        .zip(&timing.smc)
        .map(|(c, taus)| {
            taus.iter()
                .map(|tau| smc_power_raw(*tau, params.r_tau, env.sigma_tau, c.shadowing_db))
                .collect()
        })
        .collect();
    let smc = normalize_smc(&raw_smc)?;
    let cluster_smc: Vec<f64> = smc.iter().map(|c| c.iter().sum()).collect();

    // delay-profile powers for the record. Within a cluster the strongest-SMC power
    // and P_off are common factors, so normalization runs on the excess-delay
    // profile alone; this keeps normalized powers bit-identical for any P_off.
    let mut dmc_raw = Vec::with_capacity(smc.len());
    let mut profile = Vec::with_capacity(smc.len());
    for (smc_n, (taus, bases)) in smc.iter().zip(timing.dmc.iter().zip(&timing.dmc_base)) {
        let strongest = smc_n.iter().cloned().fold(0.0, f64::max);
        let raw = taus
            .iter()
            .zip(bases)
            .map(|(tau, base)| dmc_power_raw(strongest, *tau, *base, params))
            .collect::<Result<Vec<_>>>()?;
        dmc_raw.push(raw);
        profile.push(
            taus.iter()
                .zip(bases)
                .map(|(tau, base)| (-(tau - base) / params.beta_dmc).exp())
                .collect::<Vec<_>>(),
        );
    }
    let p_dmc_total = scenario_dmc_total(params)?;
    let dmc = normalize_dmc(&profile, &cluster_smc, p_dmc_total)?;
    let p_los = los_power(params.k_linear(), p_dmc_total);

    let smc_sum: f64 = smc.iter().flatten().sum();
    let dmc_sum: f64 = dmc.iter().flatten().sum();
    Ok(PowerLedger {
        p_los,
        smc,
        dmc_raw,
        dmc,
        p_dmc_total,
        realized_eta: dmc_sum / (smc_sum + dmc_sum + p_los),
        realized_k: p_los / (smc_sum + dmc_sum),
    })
}
