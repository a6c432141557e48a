//! Random cluster field: counts, twin-bounce placement, angular draws,
//! scatterer offsets and per-antenna visibility.
//!
//! Every cluster draws from its own ChaCha stream keyed by the cluster
//! index, so two environments built from the same seed share their first
//! `min(N, N')` clusters even when the cluster counts differ.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::config::ScenarioParams;
use crate::error::{Error, Result};
use crate::geometry::{self, fold_elevation, unit_from_angles, ArrayConfig, Trajectory, Vec3};
use crate::propagation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScattererKind {
    Smc,
    Dmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub kind: ScattererKind,
    /// Angular offsets from the cluster travel angles, radians.
    pub azi_offset_rx: f64,
    pub ele_offset_rx: f64,
    pub azi_offset_tx: f64,
    pub ele_offset_tx: f64,
    /// tau_{s_n}: intra-cluster delay offset (SMC only), seconds.
    pub rel_delay: f64,
    /// U(0,1) draw behind the DMC additional delay (DMC only).
    pub xi: f64,
    /// tau_add = xi * S_dmc * beta_dmc (DMC only), seconds.
    pub add_delay: f64,
    /// Phi^VV, Phi^VH, Phi^HV, Phi^HH in [0, 2pi).
    pub phases: [f64; 4],
    /// Cross-polar leakage factor kappa.
    pub xpr: f64,
    /// Rx-side and Tx-side scatterer points at t = 0.
    pub rx_point: Vec3,
    pub tx_point: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRealization {
    pub id: usize,
    /// Travel angles (rx azimuth, rx elevation, tx azimuth, tx elevation).
    pub angles: ClusterAngles,
    /// Tx-side bounce; `v` is v_n^T.
    pub first_bounce: Trajectory,
    /// Rx-side bounce; `v` is v_n^R.
    pub last_bounce: Trajectory,
    pub virtual_delay: f64,
    /// Z_n, dB.
    pub shadowing_db: f64,
    pub smcs: Vec<Scatterer>,
    pub dmcs: Vec<Scatterer>,
    /// SMC with the smallest intra-cluster offset; DMC delays and delay-profile
    /// excess delays are referenced to it.
    pub reference_smc: usize,
    pub visible_tx: Vec<usize>,
    pub visible_rx: Vec<usize>,
}

impl ClusterRealization {
    pub fn is_visible(&self, q: usize, p: usize) -> bool {
        self.visible_rx.contains(&q) && self.visible_tx.contains(&p)
    }

    /// Rx-side position of a scatterer at time `t`.
    pub fn rx_point_at(&self, s: &Scatterer, t: f64) -> Vec3 {
        s.rx_point + self.last_bounce.v * t
    }

    pub fn tx_point_at(&self, s: &Scatterer, t: f64) -> Vec3 {
        s.tx_point + self.first_bounce.v * t
    }
}

/// One drawn cluster field plus the per-realization delay spread and LOS
/// phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub sigma_tau: f64,
    pub los_phase: f64,
    pub clusters: Vec<ClusterRealization>,
}

impl Environment {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("environment always serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterAngles {
    pub rx_azimuth: f64,
    pub rx_elevation: f64,
    pub tx_azimuth: f64,
    pub tx_elevation: f64,
}

/// Poisson count floored at one so every cluster owns an SMC.
fn clamped_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    poisson(mean, rng).max(1)
}

pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let d = Poisson::new(mean).expect("positive Poisson mean");
    d.sample(rng) as usize
}

/// (S_n, M_n) for one cluster.
pub fn draw_cluster_counts<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> (usize, usize) {
    let s = clamped_poisson(params.lambda_smc, rng);
    let m = poisson(params.lambda_dmc, rng);
    (s, m)
}

/// Counts for all `params.n_clusters` clusters from a single stream.
pub fn draw_counts<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> Vec<(usize, usize)> {
    (0..params.n_clusters)
        .map(|_| draw_cluster_counts(params, rng))
        .collect()
}

pub fn wrapped_gaussian<R: Rng + ?Sized>(mean: f64, std: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(rand_distr::StandardNormal);
    geometry::wrap_angle(mean + std * z)
}

/// Zero-mean Laplace draw with standard deviation `std` (scale std/sqrt 2).
pub fn laplace<R: Rng + ?Sized>(std: f64, rng: &mut R) -> f64 {
    let b = std / 2f64.sqrt();
    // u in (-1/2, 1/2); the endpoint -1/2 has probability 2^-53 and maps to
    // a finite value after the max below.
    let u: f64 = rng.random::<f64>() - 0.5;
    let tail = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
    -b * u.signum() * tail.ln()
}

/// LOS directions used as wrapped-Gaussian means: Rx looking at Tx and Tx
/// looking at Rx.
pub fn los_mean_angles(tx: &ArrayConfig, rx: &ArrayConfig) -> Result<ClusterAngles> {
    let tx0 = tx.center.position_at(0.0);
    let rx0 = rx.center.position_at(0.0);
    let (rx_azimuth, rx_elevation) = geometry::angles_of(tx0 - rx0)?;
    let (tx_azimuth, tx_elevation) = geometry::angles_of(rx0 - tx0)?;
    Ok(ClusterAngles {
        rx_azimuth,
        rx_elevation,
        tx_azimuth,
        tx_elevation,
    })
}

pub fn draw_cluster_angles<R: Rng + ?Sized>(
    params: &ScenarioParams,
    mean: &ClusterAngles,
    rng: &mut R,
) -> ClusterAngles {
    let std = params.angle_std.map(f64::to_radians);
    let ra = wrapped_gaussian(mean.rx_azimuth, std[0], rng);
    let re = wrapped_gaussian(mean.rx_elevation, std[1], rng);
    let ta = wrapped_gaussian(mean.tx_azimuth, std[2], rng);
    let te = wrapped_gaussian(mean.tx_elevation, std[3], rng);
    let (rx_azimuth, rx_elevation) = fold_elevation(ra, re);
    let (tx_azimuth, tx_elevation) = fold_elevation(ta, te);
    ClusterAngles {
        rx_azimuth,
        rx_elevation,
        tx_azimuth,
        tx_elevation,
    }
}

/// Returns (first bounce, last bounce) positions.
pub fn place_cluster(
    angles: &ClusterAngles,
    d_rx: f64,
    d_tx: f64,
    tx_center: Vec3,
    rx_center: Vec3,
) -> Result<(Vec3, Vec3)> {
    for (name, d) in [("d_rx", d_rx), ("d_tx", d_tx)] {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::OutOfDomain {
                name,
                range: "(0, inf)",
                value: d,
            });
        }
    }
    let last = rx_center + unit_from_angles(angles.rx_azimuth, angles.rx_elevation) * d_rx;
    let first = tx_center + unit_from_angles(angles.tx_azimuth, angles.tx_elevation) * d_tx;
    Ok((first, last))
}

/// Four Laplace offsets (rx az, rx el, tx az, tx el), radians.
pub fn draw_offsets<R: Rng + ?Sized>(kind: ScattererKind, params: &ScenarioParams, rng: &mut R) -> [f64; 4] {
    let std = match kind {
        ScattererKind::Smc => params.smc_offset_std_deg,
        ScattererKind::Dmc => params.dmc_offset_std_deg,
    }
    .to_radians();
    [(); 4].map(|_| laplace(std, rng))
}

/// Probability that a cluster seen by one element is also seen by its
/// neighbour `delta` meters away.
pub fn visibility_probability(delta: f64, params: &ScenarioParams) -> f64 {
    (-params.lambda_r * delta * params.wavelength() / params.d_c_s).exp()
}

/// Survival chain from element 0: element k is visible iff element k-1 is
/// and an independent Bernoulli(p(spacing)) succeeds.
pub fn visibility_chain<R: Rng + ?Sized>(
    n_elements: usize,
    spacing: f64,
    params: &ScenarioParams,
    rng: &mut R,
) -> Vec<usize> {
    let p = visibility_probability(spacing, params);
    let mut visible = Vec::with_capacity(n_elements);
    if n_elements == 0 {
        return visible;
    }
    visible.push(0);
    for k in 1..n_elements {
        if rng.random::<f64>() < p {
            visible.push(k);
        } else {
            break;
        }
    }
    visible
}

/// (Tx visible set, Rx visible set).
pub fn assign_visibility<R: Rng + ?Sized>(
    tx: &ArrayConfig,
    rx: &ArrayConfig,
    params: &ScenarioParams,
    rng: &mut R,
) -> (Vec<usize>, Vec<usize>) {
    let vt = visibility_chain(tx.n_elements, tx.spacing, params, rng);
    let vr = visibility_chain(rx.n_elements, rx.spacing, params, rng);
    (vt, vr)
}

fn horizontal_velocity<R: Rng + ?Sized>(speed: f64, rng: &mut R) -> Vec3 {
    if speed == 0.0 {
        return Vec3::ZERO;
    }
    let heading = rng.random::<f64>() * 2.0 * PI;
    Vec3::new(speed * heading.cos(), speed * heading.sin(), 0.0)
}

fn draw_phases<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    [(); 4].map(|_| rng.random::<f64>() * 2.0 * PI)
}

fn draw_xpr<R: Rng + ?Sized>(params: &ScenarioParams, rng: &mut R) -> f64 {
    let c = &params.clusters;
    let x = c.xpr_mean_db + c.xpr_std_db * rng.sample::<f64, _>(rand_distr::StandardNormal);
    10f64.powf(-x / 10.0)
}

/// Uniform draw in the open interval (0, 1).
pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

struct ClusterContext<'a> {
    params: &'a ScenarioParams,
    tx: &'a ArrayConfig,
    rx: &'a ArrayConfig,
    mean: ClusterAngles,
    sigma_tau: f64,
}

fn build_cluster(ctx: &ClusterContext<'_>, id: usize, rng: &mut ChaCha8Rng) -> Result<ClusterRealization> {
    let params = ctx.params;
    let (n_smc, n_dmc) = draw_cluster_counts(params, rng);
    let angles = draw_cluster_angles(params, &ctx.mean, rng);
    let cf = &params.clusters;
    let d_rx = rng.random_range(cf.d_min..=cf.d_max);
    let d_tx = rng.random_range(cf.d_min..=cf.d_max);
    let tx0 = ctx.tx.center.position_at(0.0);
    let rx0 = ctx.rx.center.position_at(0.0);
    let (first, last) = place_cluster(&angles, d_rx, d_tx, tx0, rx0)?;
    let shadowing_db = params.sigma_cluster_db * rng.sample::<f64, _>(rand_distr::StandardNormal);
    let v_rx = horizontal_velocity(cf.speed_rx, rng);
    let v_tx = horizontal_velocity(cf.speed_tx, rng);
    let virtual_delay = propagation::virtual_delay(params.r_tau, ctx.sigma_tau, open_unit(rng))?;

    let intra = (params.mean_intra_delay > 0.0)
        .then(|| Exp::new(1.0 / params.mean_intra_delay).expect("positive rate"));

    let make = |kind: ScattererKind, rng: &mut ChaCha8Rng| -> Scatterer {
        let off = draw_offsets(kind, params, rng);
        let (rel_delay, xi) = match kind {
            ScattererKind::Smc => (intra.as_ref().map_or(0.0, |e| e.sample(rng)), 0.0),
            ScattererKind::Dmc => (0.0, rng.random::<f64>()),
        };
        let phases = draw_phases(rng);
        let xpr = draw_xpr(params, rng);
        let (ra, re) = fold_elevation(angles.rx_azimuth + off[0], angles.rx_elevation + off[1]);
        let (ta, te) = fold_elevation(angles.tx_azimuth + off[2], angles.tx_elevation + off[3]);
        Scatterer {
            kind,
            azi_offset_rx: off[0],
            ele_offset_rx: off[1],
            azi_offset_tx: off[2],
            ele_offset_tx: off[3],
            rel_delay,
            xi,
            add_delay: xi * params.s_dmc_tau * params.beta_dmc,
            phases,
            xpr,
            rx_point: rx0 + unit_from_angles(ra, re) * d_rx,
            tx_point: tx0 + unit_from_angles(ta, te) * d_tx,
        }
    };
    let smcs: Vec<Scatterer> = (0..n_smc).map(|_| make(ScattererKind::Smc, rng)).collect();
    let dmcs: Vec<Scatterer> = (0..n_dmc).map(|_| make(ScattererKind::Dmc, rng)).collect();
    let reference_smc = smcs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.rel_delay.total_cmp(&b.1.rel_delay))
        .map(|(i, _)| i)
        .expect("at least one SMC");
    let (visible_tx, visible_rx) = assign_visibility(ctx.tx, ctx.rx, params, rng);

    Ok(ClusterRealization {
        id,
        angles,
        first_bounce: Trajectory { p0: first, v: v_tx },
        last_bounce: Trajectory { p0: last, v: v_rx },
        virtual_delay,
        shadowing_db,
        smcs,
        dmcs,
        reference_smc,
        visible_tx,
        visible_rx,
    })
}

/// Draw a complete cluster field for one realization.
pub fn build_environment<R: Rng + ?Sized>(
    params: &ScenarioParams,
    tx: &ArrayConfig,
    rx: &ArrayConfig,
    rng: &mut R,
) -> Result<Environment> {
    params.validate().map_err(Error::Validation)?;
    let sigma_tau = propagation::draw_sigma_tau(params, rng);
    let los_phase = rng.random::<f64>() * 2.0 * PI;
    let base: u64 = rng.random();
    let ctx = ClusterContext {
        params,
        tx,
        rx,
        mean: los_mean_angles(tx, rx)?,
        sigma_tau,
    };
    let clusters = (0..params.n_clusters)
        .map(|id| {
            let mut crng = ChaCha8Rng::seed_from_u64(base);
            crng.set_stream(id as u64 + 1);
            build_cluster(&ctx, id, &mut crng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Environment {
        sigma_tau,
        los_phase,
        clusters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Clutter, Condition};
    use crate::ensemble::link_arrays;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn nlos() -> ScenarioParams {
        ScenarioParams::preset(Clutter::Light, Condition::Nlos)
    }

    fn mean_std(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v.sqrt())
    }

    #[test]
    fn poisson_means() {
        let mut r = rng(1);
        let s: Vec<f64> = (0..100_000).map(|_| poisson(3.0, &mut r) as f64).collect();
        assert!((mean_std(&s).0 - 3.0).abs() < 0.05);
        let m: Vec<f64> = (0..100_000).map(|_| poisson(17.0, &mut r) as f64).collect();
        assert!((mean_std(&m).0 - 17.0).abs() < 0.2);
    }

    #[test]
    fn counts_clamp_smc_floor() {
        let mut p = nlos();
        p.lambda_smc = 1e-12;
        let mut r = rng(2);
        let counts = draw_counts(&p, &mut r);
        assert_eq!(counts.len(), p.n_clusters);
        assert!(counts.iter().all(|(s, _)| *s == 1));
    }

    #[test]
    fn degenerate_angles_equal_mean() {
        let mut p = nlos();
        p.angle_std = [0.0; 4];
        let mean = ClusterAngles {
            rx_azimuth: 2.5,
            rx_elevation: 0.1,
            tx_azimuth: -0.4,
            tx_elevation: -0.2,
        };
        let a = draw_cluster_angles(&p, &mean, &mut rng(3));
        assert_eq!(a, mean);
    }

    #[test]
    fn wrapped_gaussian_spread_and_range() {
        let mut r = rng(4);
        let std = 31.8f64.to_radians();
        let mean = PI; // wraps across the branch cut
        let draws: Vec<f64> = (0..100_000).map(|_| wrapped_gaussian(mean, std, &mut r)).collect();
        assert!(draws.iter().all(|a| *a > -PI && *a <= PI));
        let dev: Vec<f64> = draws.iter().map(|a| geometry::wrap_angle(a - mean)).collect();
        let s = mean_std(&dev).1.to_degrees();
        assert!((s - 31.8).abs() < 0.5, "{s}");
    }

    #[test]
    fn placement() {
        let a = ClusterAngles {
            rx_azimuth: 0.0,
            rx_elevation: 0.0,
            tx_azimuth: PI / 2.0,
            tx_elevation: 0.0,
        };
        let (first, last) = place_cluster(&a, 10.0, 2.0, Vec3::ZERO, Vec3::ZERO).unwrap();
        assert_eq!(last, Vec3::new(10.0, 0.0, 0.0));
        assert!((first - Vec3::new(0.0, 2.0, 0.0)).norm() < 1e-15);
        assert!(place_cluster(&a, 0.0, 1.0, Vec3::ZERO, Vec3::ZERO).is_err());
        assert!(place_cluster(&a, 1.0, -1.0, Vec3::ZERO, Vec3::ZERO).is_err());
    }

    #[test]
    fn placement_round_trip() {
        let p = nlos();
        let mean = ClusterAngles {
            rx_azimuth: PI,
            rx_elevation: 0.0,
            tx_azimuth: 0.0,
            tx_elevation: 0.0,
        };
        let rx0 = Vec3::new(1.0, 0.0, 0.0);
        let mut r = rng(5);
        for _ in 0..10_000 {
            let a = draw_cluster_angles(&p, &mean, &mut r);
            let d = r.random_range(1.0..30.0);
            let (_, last) = place_cluster(&a, d, d, Vec3::ZERO, rx0).unwrap();
            assert!(((last - rx0).norm() - d).abs() < 1e-9);
            let (az, el) = geometry::angles_of(last - rx0).unwrap();
            assert!(geometry::wrap_angle(az - a.rx_azimuth).abs() < 1e-9);
            assert!((el - a.rx_elevation).abs() < 1e-9);
        }
    }

    #[test]
    fn laplace_offsets() {
        let p = nlos();
        let mut r = rng(6);
        let smc: Vec<f64> = (0..250_000)
            .flat_map(|_| draw_offsets(ScattererKind::Smc, &p, &mut r))
            .map(f64::to_degrees)
            .collect();
        let (m, s) = mean_std(&smc);
        assert!((s - 1.0).abs() < 0.01, "{s}");
        assert!(m.abs() < 3.0 * s / (smc.len() as f64).sqrt());

        let mut p5 = p.clone();
        p5.dmc_offset_std_deg = 5.0;
        let dmc: Vec<f64> = (0..250_000)
            .flat_map(|_| draw_offsets(ScattererKind::Dmc, &p5, &mut r))
            .map(f64::to_degrees)
            .collect();
        let (m, s) = mean_std(&dmc);
        assert!((s - 5.0).abs() < 0.05, "{s}");
        assert!(m.abs() < 3.0 * s / (dmc.len() as f64).sqrt());
        let n = dmc.len() as f64;
        let skew = dmc.iter().map(|x| ((x - m) / s).powi(3)).sum::<f64>() / n;
        assert!(skew.abs() < 0.05, "skew {skew}");
    }

    #[test]
    fn visibility_probability_values() {
        let p = nlos();
        assert_eq!(visibility_probability(0.0, &p), 1.0);
        let half = p.wavelength() / 2.0;
        let v = visibility_probability(half, &p);
        let expect = (-20.0 * half * p.wavelength() / 100.0f64).exp();
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.99973).abs() < 1e-5, "{v}");
        let mut last = 1.0;
        for k in 0..100 {
            let cur = visibility_probability(k as f64 * 0.01, &p);
            assert!(cur <= last);
            last = cur;
        }
    }

    #[test]
    fn visibility_survival_chain() {
        let mut p = nlos();
        // exaggerate decay so the chain is observable
        p.lambda_r = 2.0e4;
        let spacing = p.wavelength() / 2.0;
        let pk = visibility_probability(spacing, &p);
        assert!(pk > 0.5 && pk < 0.9, "{pk}");
        let n = 6;
        let trials = 100_000;
        let mut hits = vec![0usize; n];
        let mut r = rng(7);
        for _ in 0..trials {
            let v = visibility_chain(n, spacing, &p, &mut r);
            for (i, k) in v.iter().enumerate() {
                assert_eq!(i, *k, "visible set must be a prefix");
                hits[*k] += 1;
            }
        }
        for (k, h) in hits.iter().enumerate() {
            let want = pk.powi(k as i32);
            let frac = *h as f64 / trials as f64;
            let sigma = (want * (1.0 - want) / trials as f64).sqrt().max(1e-12);
            assert!((frac - want).abs() <= 3.0 * sigma + 1e-12, "k={k} {frac} vs {want}");
        }
        assert_eq!(visibility_chain(1, spacing, &p, &mut r), vec![0]);
        assert_eq!(visibility_chain(8, 0.0, &p, &mut r), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn environment_is_deterministic_and_consistent() {
        let mut p = nlos();
        p.clusters.speed_rx = 0.5;
        p.link.n_rx = 4;
        let (tx, rx) = link_arrays(&p).unwrap();
        let a = build_environment(&p, &tx, &rx, &mut rng(9)).unwrap();
        let b = build_environment(&p, &tx, &rx, &mut rng(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.clusters.len(), p.n_clusters);
        for c in &a.clusters {
            assert!(c.virtual_delay >= 0.0);
            assert!(!c.smcs.is_empty());
            assert_eq!(c.visible_tx, vec![0]);
            assert_eq!(c.visible_rx[0], 0);
            let min = c.smcs.iter().map(|s| s.rel_delay).fold(f64::INFINITY, f64::min);
            assert_eq!(c.smcs[c.reference_smc].rel_delay, min);
            for s in c.smcs.iter().chain(&c.dmcs) {
                assert!(s.phases.iter().all(|ph| (0.0..2.0 * PI).contains(ph)));
                assert!(s.rel_delay >= 0.0 && s.add_delay >= 0.0 && s.xpr >= 0.0);
                // scatterers sit at the cluster's bounce distances
                let d_rx = (c.last_bounce.p0 - rx.center.p0).norm();
                assert!(((s.rx_point - rx.center.p0).norm() - d_rx).abs() < 1e-9);
            }
            for s in &c.dmcs {
                assert!(s.add_delay <= p.s_dmc_tau * p.beta_dmc);
            }
        }
    }

    #[test]
    fn cluster_streams_are_shared_across_counts() {
        let p = nlos();
        let mut more = p.clone();
        more.n_clusters = p.n_clusters + 10;
        let (tx, rx) = link_arrays(&p).unwrap();
        let a = build_environment(&p, &tx, &rx, &mut rng(10)).unwrap();
        let b = build_environment(&more, &tx, &rx, &mut rng(10)).unwrap();
        assert_eq!(a.sigma_tau, b.sigma_tau);
        assert_eq!(a.clusters[..], b.clusters[..p.n_clusters]);
    }

    #[test]
    fn mean_smc_count_matches_clamped_poisson() {
        let p = nlos();
        let (tx, rx) = link_arrays(&p).unwrap();
        let mut r = rng(11);
        let mut total = 0usize;
        let mut n = 0usize;
        for _ in 0..400 {
            let env = build_environment(&p, &tx, &rx, &mut r).unwrap();
            for c in &env.clusters {
                total += c.smcs.len();
                n += 1;
            }
        }
        // E[max(1, X)] = lambda + P(X = 0) for X ~ Poisson(lambda)
        let lam = p.lambda_smc;
        let expect = lam + (-lam).exp();
        let mean = total as f64 / n as f64;
        let se = (lam / n as f64).sqrt();
        assert!((mean - expect).abs() < 4.0 * se, "{mean} vs {expect}");
    }

    #[test]
    fn environment_json_round_trip() {
        let p = nlos();
        let (tx, rx) = link_arrays(&p).unwrap();
        let env = build_environment(&p, &tx, &rx, &mut rng(12)).unwrap();
        assert_eq!(Environment::from_json(&env.to_json()).unwrap(), env);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = nlos();
        p.beta_dmc = -1.0;
        let (tx, rx) = link_arrays(&nlos()).unwrap();
        assert!(matches!(
            build_environment(&p, &tx, &rx, &mut rng(0)),
            Err(Error::Validation(_))
        ));
    }
}
