//! Complex path coefficients, impulse responses and transfer functions.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterRealization, Environment, Scatterer};
use crate::config::{Condition, ScenarioParams};
use crate::error::{Error, Result};
use crate::geometry::{doppler_shift, ArrayConfig, Vec3};
use crate::propagation::{self, PathTiming, PowerLedger};

/// 2x2 complex matrix, row-major `[[VV, VH], [HV, HH]]`.
pub type PolMatrix = [[Complex64; 2]; 2];

/// Field pattern in the array's local frame, returning (F_V, F_H).
pub trait AntennaPattern: Send + Sync + std::fmt::Debug {
    fn field(&self, local_dir: Vec3) -> (Complex64, Complex64);
}

/// Direction-independent element with a fixed polarization slant; slant 0 is
/// pure vertical polarization.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Isotropic {
    pub slant: f64,
}

impl AntennaPattern for Isotropic {
    fn field(&self, _local_dir: Vec3) -> (Complex64, Complex64) {
        let (s, c) = self.slant.sin_cos();
        (Complex64::new(c, 0.0), Complex64::new(s, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathKind {
    Los,
    Smc,
    Dmc,
}

impl PathKind {
    pub fn tag(self) -> &'static str {
        match self {
            PathKind::Los => "LOS",
            PathKind::Smc => "SMC",
            PathKind::Dmc => "DMC",
        }
    }
}

/// One CIR tap: K-weighted coefficient and its delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub coefficient: Complex64,
    pub delay: f64,
    pub kind: PathKind,
    pub cluster: Option<usize>,
}

impl Path {
    pub fn power(&self) -> f64 {
        self.coefficient.norm_sqr()
    }
}

pub fn polarization_los(phase: f64) -> PolMatrix {
    let e = Complex64::from_polar(1.0, phase);
    [[e, Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), -e]]
}

pub fn polarization_nlos(phases: &[f64; 4], kappa: f64) -> PolMatrix {
    let k = kappa.sqrt();
    [
        [Complex64::from_polar(1.0, phases[0]), Complex64::from_polar(k, phases[1])],
        [Complex64::from_polar(k, phases[2]), Complex64::from_polar(1.0, phases[3])],
    ]
}

/// Geometry for one path at one instant, seen from Tx element p and Rx
/// element q.
#[derive(Debug, Clone, Copy)]
pub struct PathGeometry {
    /// Direction the Tx pattern is evaluated on.
    pub tx_dir: Vec3,
    /// Direction the Rx pattern is evaluated on.
    pub rx_dir: Vec3,
    /// Total Doppler shift, Hz.
    pub doppler: f64,
}

/// `[F^T]^T M [F^R] sqrt(power) exp(-j 2 pi f_D t)`.
pub fn path_coefficient(
    geom: &PathGeometry,
    tx: (&ArrayConfig, &dyn AntennaPattern),
    rx: (&ArrayConfig, &dyn AntennaPattern),
    pol: &PolMatrix,
    power: f64,
    t: f64,
) -> Result<Complex64> {
    let (ft_v, ft_h) = tx.1.field(tx.0.to_local(geom.tx_dir.unit()?));
    let (fr_v, fr_h) = rx.1.field(rx.0.to_local(geom.rx_dir.unit()?));
    let m_fr_v = pol[0][0] * fr_v + pol[0][1] * fr_h;
    let m_fr_h = pol[1][0] * fr_v + pol[1][1] * fr_h;
    let gain = ft_v * m_fr_v + ft_h * m_fr_h;
    Ok(gain * power.sqrt() * Complex64::from_polar(1.0, -2.0 * PI * geom.doppler * t))
}

/// Transfer function of a path set at frequency `f`:
/// `sum coeff * exp(-j 2 pi f tau)`.
pub fn transfer(paths: &[Path], f: f64) -> Complex64 {
    paths
        .iter()
        .map(|p| p.coefficient * Complex64::from_polar(1.0, -2.0 * PI * f * p.delay))
        .sum()
}

/// Delays and powers of every path at one instant; shared by all antenna
/// pairs.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub timing: PathTiming,
    pub ledger: PowerLedger,
}

/// One channel realization that can be evaluated at any instant.
#[derive(Debug, Clone)]
pub struct Channel {
    pub params: ScenarioParams,
    pub tx: ArrayConfig,
    pub rx: ArrayConfig,
    pub env: Environment,
    pub tx_pattern: Arc<dyn AntennaPattern>,
    pub rx_pattern: Arc<dyn AntennaPattern>,
}

impl Channel {
    /// Isotropic vertically polarized elements on both ends.
    pub fn new(params: ScenarioParams, tx: ArrayConfig, rx: ArrayConfig, env: Environment) -> Self {
        Self {
            params,
            tx,
            rx,
            env,
            tx_pattern: Arc::new(Isotropic::default()),
            rx_pattern: Arc::new(Isotropic::default()),
        }
    }

    pub fn with_patterns(mut self, tx: Arc<dyn AntennaPattern>, rx: Arc<dyn AntennaPattern>) -> Self {
        self.tx_pattern = tx;
        self.rx_pattern = rx;
        self
    }

    pub fn n_tx(&self) -> usize {
        self.tx.n_elements
    }

    pub fn n_rx(&self) -> usize {
        self.rx.n_elements
    }

    pub fn snapshot(&self, t: f64) -> Result<Snapshot> {
        let timing = propagation::timing_at(&self.env, &self.tx, &self.rx, &self.params, t)?;
        let ledger = propagation::power_ledger(&self.env, &timing, &self.params)?;
        Ok(Snapshot { timing, ledger })
    }

    fn k_weights(&self) -> (f64, f64) {
        let k = self.params.k_linear();
        ((k / (k + 1.0)).sqrt(), (1.0 / (k + 1.0)).sqrt())
    }

    fn scatterer_path(
        &self,
        cluster: &ClusterRealization,
        s: &Scatterer,
        a_q: Vec3,
        a_p: Vec3,
        t: f64,
        power: f64,
    ) -> Result<Complex64> {
        let lambda = self.params.wavelength();
        let s_rx = cluster.rx_point_at(s, t);
        let s_tx = cluster.tx_point_at(s, t);
        let f_rx = doppler_shift(s_rx - a_q, self.rx.center.v - cluster.last_bounce.v, lambda)?;
        let f_tx = doppler_shift(s_tx - a_p, self.tx.center.v - cluster.first_bounce.v, lambda)?;
        let geom = PathGeometry {
            tx_dir: s_tx - self.tx.center.position_at(t),
            rx_dir: s_rx - self.rx.center.position_at(t),
            doppler: f_rx + f_tx,
        };
        path_coefficient(
            &geom,
            (&self.tx, self.tx_pattern.as_ref()),
            (&self.rx, self.rx_pattern.as_ref()),
            &polarization_nlos(&s.phases, s.xpr),
            power,
            t,
        )
    }

    /// All paths between Tx element `p` and Rx element `q` at the snapshot's
    /// instant, with the K-factor weights applied.
    pub fn paths_at(&self, snap: &Snapshot, q: usize, p: usize) -> Result<Vec<Path>> {
        let t = snap.timing.t;
        let a_q = self.rx.element_position(q, t)?;
        let a_p = self.tx.element_position(p, t)?;
        let (w_los, w_nlos) = self.k_weights();
        let mut out = Vec::new();

        if self.params.condition == Condition::Los {
            let k = self.params.k_linear();
            let d = a_p - a_q;
            let doppler = doppler_shift(d, self.rx.center.v - self.tx.center.v, self.params.wavelength())?;
            let geom = PathGeometry {
                tx_dir: -d,
                rx_dir: d,
                doppler,
            };
            let h = path_coefficient(
                &geom,
                (&self.tx, self.tx_pattern.as_ref()),
                (&self.rx, self.rx_pattern.as_ref()),
                &polarization_los(self.env.los_phase),
                snap.ledger.p_los / k,
                t,
            )?;
            out.push(Path {
                coefficient: h * w_los,
                delay: propagation::los_delay(a_p, a_q)?,
                kind: PathKind::Los,
                cluster: None,
            });
        }

        for (n, c) in self.env.clusters.iter().enumerate() {
            if !c.is_visible(q, p) {
                continue;
            }
            for (i, s) in c.smcs.iter().enumerate() {
                let h = self.scatterer_path(c, s, a_q, a_p, t, snap.ledger.smc[n][i])?;
                out.push(Path {
                    coefficient: h * w_nlos,
                    delay: snap.timing.smc[n][i],
                    kind: PathKind::Smc,
                    cluster: Some(c.id),
                });
            }
            for (i, s) in c.dmcs.iter().enumerate() {
                let h = self.scatterer_path(c, s, a_q, a_p, t, snap.ledger.dmc[n][i])?;
                out.push(Path {
                    coefficient: h * w_nlos,
                    delay: snap.timing.dmc[n][i],
                    kind: PathKind::Dmc,
                    cluster: Some(c.id),
                });
            }
        }
        Ok(out)
    }

    pub fn paths(&self, t: f64, q: usize, p: usize) -> Result<Vec<Path>> {
        let snap = self.snapshot(t)?;
        self.paths_at(&snap, q, p)
    }

    /// Materialize the CIR on a time grid for every antenna pair.
    pub fn synthesize(&self, times: &[f64]) -> Result<ChannelRealization> {
        let (n_rx, n_tx) = (self.n_rx(), self.n_tx());
        let mut paths = Vec::with_capacity(times.len() * n_rx * n_tx);
        for &t in times {
            let snap = self.snapshot(t)?;
            for q in 0..n_rx {
                for p in 0..n_tx {
                    paths.push(self.paths_at(&snap, q, p)?);
                }
            }
        }
        Ok(ChannelRealization {
            times: times.to_vec(),
            n_rx,
            n_tx,
            paths,
        })
    }
}

/// Materialized CIR: path lists for each (t, q, p).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub times: Vec<f64>,
    pub n_rx: usize,
    pub n_tx: usize,
    /// Indexed `[(t * n_rx + q) * n_tx + p]`.
    pub paths: Vec<Vec<Path>>,
}

impl ChannelRealization {
    pub fn cell(&self, t_index: usize, q: usize, p: usize) -> &[Path] {
        &self.paths[(t_index * self.n_rx + q) * self.n_tx + p]
    }

    /// Compute H(t, f) for every (t, q, p) cell.
    pub fn transfer_function(&self, freqs: &[f64]) -> Result<Ctf> {
        if self.times.is_empty() || freqs.is_empty() {
            return Err(Error::Empty("time or frequency grid"));
        }
        let values = self
            .paths
            .iter()
            .flat_map(|cell| freqs.iter().map(move |f| transfer(cell, *f)))
            .collect();
        Ok(Ctf {
            times: self.times.clone(),
            freqs: freqs.to_vec(),
            n_rx: self.n_rx,
            n_tx: self.n_tx,
            values,
        })
    }
}

/// Time-varying transfer function on a (t, q, p, f) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Ctf {
    pub times: Vec<f64>,
    pub freqs: Vec<f64>,
    pub n_rx: usize,
    pub n_tx: usize,
    values: Vec<Complex64>,
}

impl Ctf {
    pub fn get(&self, t_index: usize, q: usize, p: usize, f_index: usize) -> Complex64 {
        let cell = (t_index * self.n_rx + q) * self.n_tx + p;
        self.values[cell * self.freqs.len() + f_index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Clutter;
    use crate::ensemble::{build_channel, link_arrays};
    use crate::geometry::Trajectory;
    use crate::SPEED_OF_LIGHT;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn static_arrays() -> (ArrayConfig, ArrayConfig) {
        let tx = ArrayConfig::new(Trajectory::fixed(Vec3::ZERO), 1, 0.01, 0.0, 0.0).unwrap();
        let rx = ArrayConfig::new(Trajectory::fixed(Vec3::new(1.0, 0.0, 0.0)), 1, 0.01, 0.0, 0.0).unwrap();
        (tx, rx)
    }

    #[test]
    fn los_polarization() {
        let m = polarization_los(0.0);
        assert_eq!(m, [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]]);
    }

    #[test]
    fn nlos_polarization_moduli() {
        let m = polarization_nlos(&[0.1, 0.2, 0.3, 0.4], 0.0);
        assert_eq!(m[0][1], c(0.0, 0.0));
        assert_eq!(m[1][0], c(0.0, 0.0));
        assert!((m[0][0].norm() - 1.0).abs() < 1e-15 && (m[1][1].norm() - 1.0).abs() < 1e-15);
        let kappa = 0.2;
        let m = polarization_nlos(&[1.0, 2.0, 3.0, 4.0], kappa);
        let mods = [m[0][0].norm(), m[0][1].norm(), m[1][0].norm(), m[1][1].norm()];
        let want = [1.0, kappa.sqrt(), kappa.sqrt(), 1.0];
        for (a, b) in mods.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn static_unit_coefficient() {
        let (tx, rx) = static_arrays();
        let iso = Isotropic::default();
        let geom = PathGeometry {
            tx_dir: Vec3::new(1.0, 0.0, 0.0),
            rx_dir: Vec3::new(-1.0, 0.0, 0.0),
            doppler: 0.0,
        };
        let pol = polarization_nlos(&[0.0, 1.0, 2.0, 3.0], 0.0);
        let h = path_coefficient(&geom, (&tx, &iso), (&rx, &iso), &pol, 1.0, 0.7).unwrap();
        assert!((h - c(1.0, 0.0)).norm() < 1e-15);
        let bad = PathGeometry {
            tx_dir: Vec3::ZERO,
            ..geom
        };
        assert!(matches!(
            path_coefficient(&bad, (&tx, &iso), (&rx, &iso), &pol, 1.0, 0.0),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn cross_polar_leakage_reaches_slanted_elements() {
        let (tx, rx) = static_arrays();
        let v = Isotropic::default();
        let h = Isotropic { slant: PI / 2.0 };
        let geom = PathGeometry {
            tx_dir: Vec3::new(1.0, 0.0, 0.0),
            rx_dir: Vec3::new(-1.0, 0.0, 0.0),
            doppler: 0.0,
        };
        let kappa = 0.1;
        let pol = polarization_nlos(&[0.0; 4], kappa);
        // V transmit, H receive picks up the VH entry only
        let g = path_coefficient(&geom, (&tx, &v), (&rx, &h), &pol, 1.0, 0.0).unwrap();
        assert!((g.norm() - kappa.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn magnitude_is_time_invariant_for_static_geometry() {
        let (tx, rx) = static_arrays();
        let iso = Isotropic::default();
        let geom = PathGeometry {
            tx_dir: Vec3::new(0.3, 1.0, 0.0),
            rx_dir: Vec3::new(-1.0, 0.2, 0.1),
            doppler: 12.5,
        };
        let pol = polarization_nlos(&[0.4, 1.0, 2.0, 3.0], 0.3);
        let a = path_coefficient(&geom, (&tx, &iso), (&rx, &iso), &pol, 0.25, 0.0).unwrap();
        for t in [1e-3, 0.37, 5.0] {
            let b = path_coefficient(&geom, (&tx, &iso), (&rx, &iso), &pol, 0.25, t).unwrap();
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        assert!((a.norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn doppler_rotation_rate_toward_scatterer() {
        // single SMC straight ahead on +x, Rx moving toward it at 1 m/s
        let mut p = ScenarioParams::preset(Clutter::Light, Condition::Nlos);
        p.n_clusters = 1;
        p.lambda_dmc = 1e-9;
        p.link.rx_speed = 1.0;
        p.link.rx_heading_deg = 0.0;
        let (tx, rx) = link_arrays(&p).unwrap();
        let mut ch = build_channel(&p, 1, 0).unwrap();
        let cl = &mut ch.env.clusters[0];
        cl.dmcs.clear();
        cl.smcs.truncate(1);
        cl.reference_smc = 0;
        cl.smcs[0].rx_point = rx.center.p0 + Vec3::new(10.0, 0.0, 0.0);
        cl.smcs[0].tx_point = tx.center.p0 + Vec3::new(0.0, 5.0, 0.0);
        let dt = 10e-6;
        let t0 = 1e-3;
        let a = ch.paths(t0, 0, 0).unwrap()[0].coefficient;
        let b = ch.paths(t0 + dt, 0, 0).unwrap()[0].coefficient;
        let rate = -(b / a).arg() / dt;
        let want = 2.0 * PI * p.f_c / SPEED_OF_LIGHT;
        assert!((rate / want - 1.0).abs() < 1e-3, "{rate} vs {want}");
        assert!((want / (2.0 * PI) - 19.34).abs() < 0.01);
    }

    #[test]
    fn synthesize_counts_and_determinism() {
        let mut p = ScenarioParams::preset(Clutter::Light, Condition::Los);
        p.link.n_rx = 3;
        p.link.n_tx = 2;
        let ch = build_channel(&p, 5, 2).unwrap();
        let times = [0.0, 1e-3, 2e-3];
        let r = ch.synthesize(&times).unwrap();
        assert_eq!(r, build_channel(&p, 5, 2).unwrap().synthesize(&times).unwrap());
        for ti in 0..times.len() {
            for q in 0..3 {
                for pp in 0..2 {
                    let cell = r.cell(ti, q, pp);
                    let want = 1 + ch
                        .env
                        .clusters
                        .iter()
                        .filter(|c| c.is_visible(q, pp))
                        .map(|c| c.smcs.len() + c.dmcs.len())
                        .sum::<usize>();
                    assert_eq!(cell.len(), want);
                    assert!(cell.iter().all(|x| x.coefficient.re.is_finite() && x.coefficient.im.is_finite()));
                    assert_eq!(cell.iter().filter(|x| x.kind == PathKind::Los).count(), 1);
                }
            }
        }
    }

    #[test]
    fn invisible_clusters_drop_out() {
        let mut p = ScenarioParams::preset(Clutter::Light, Condition::Nlos);
        p.link.n_rx = 4;
        let mut ch = build_channel(&p, 8, 0).unwrap();
        ch.env.clusters[0].visible_rx = vec![0];
        let far = ch.paths(0.0, 3, 0).unwrap();
        assert!(far.iter().all(|x| x.cluster != Some(0)));
        let near = ch.paths(0.0, 0, 0).unwrap();
        assert!(near.iter().any(|x| x.cluster == Some(0)));
    }

    #[test]
    fn large_k_suppresses_nlos() {
        let mut p = ScenarioParams::preset(Clutter::Light, Condition::Los);
        p.k_factor_db = 60.0;
        let ch = build_channel(&p, 3, 0).unwrap();
        let paths = ch.paths(0.0, 0, 0).unwrap();
        let total: f64 = paths.iter().map(Path::power).sum();
        let nlos: f64 = paths.iter().filter(|x| x.kind != PathKind::Los).map(Path::power).sum();
        assert!(nlos / total < 1e-5);
    }

    #[test]
    fn power_scaling_is_linear() {
        let (tx, rx) = static_arrays();
        let iso = Isotropic::default();
        let geom = PathGeometry {
            tx_dir: Vec3::new(1.0, 0.5, 0.0),
            rx_dir: Vec3::new(-1.0, 0.0, 0.3),
            doppler: 3.0,
        };
        let pol = polarization_nlos(&[0.4, 1.0, 2.0, 3.0], 0.3);
        let a = path_coefficient(&geom, (&tx, &iso), (&rx, &iso), &pol, 0.2, 0.1).unwrap();
        let b = path_coefficient(&geom, (&tx, &iso), (&rx, &iso), &pol, 0.2 * 7.0, 0.1).unwrap();
        assert!((b.norm_sqr() / a.norm_sqr() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn swapped_ends_conjugate_doppler() {
        // a scene mirrored about the link midpoint: forward and reverse links
        // see opposite Doppler rotation when the motion is reversed
        let lambda = 0.05;
        let d = Vec3::new(2.0, 1.0, 0.0);
        let v = Vec3::new(0.3, -0.2, 0.0);
        let fwd = doppler_shift(d, v, lambda).unwrap();
        let rev = doppler_shift(-d, v, lambda).unwrap();
        assert!((fwd + rev).abs() < 1e-12);
        let iso = Isotropic::default();
        let (tx, rx) = static_arrays();
        let pol = polarization_nlos(&[0.0; 4], 0.0);
        let t = 0.013;
        let g = |f: f64| {
            let geom = PathGeometry {
                tx_dir: Vec3::new(1.0, 0.0, 0.0),
                rx_dir: Vec3::new(-1.0, 0.0, 0.0),
                doppler: f,
            };
            path_coefficient(&geom, (&tx, &iso), (&rx, &iso), &pol, 1.0, t).unwrap()
        };
        assert!((g(fwd) - g(rev).conj()).norm() < 1e-12);
    }

    #[test]
    fn one_tap_transfer_is_flat() {
        let path = Path {
            coefficient: c(1.0, 0.0),
            delay: 42e-9,
            kind: PathKind::Smc,
            cluster: Some(0),
        };
        for f in [0.0, 1e6, 3.3e7, 1e8] {
            assert!((transfer(&[path], f).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_ray_nulls() {
        let dtau = 50e-9;
        let paths = [
            Path {
                coefficient: c(1.0, 0.0),
                delay: 10e-9,
                kind: PathKind::Smc,
                cluster: Some(0),
            },
            Path {
                coefficient: c(1.0, 0.0),
                delay: 10e-9 + dtau,
                kind: PathKind::Smc,
                cluster: Some(1),
            },
        ];
        // |H|^2 = 2 + 2 cos(2 pi f dtau): nulls at (k + 1/2)/dtau
        for k in 0..4 {
            let f = (k as f64 + 0.5) / dtau;
            assert!(transfer(&paths, f).norm_sqr() < 1e-20);
            let peak = k as f64 / dtau;
            assert!((transfer(&paths, peak).norm_sqr() - 4.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_frequency_is_coefficient_sum() {
        let ch = build_channel(&ScenarioParams::preset(Clutter::Heavy, Condition::Los), 4, 1).unwrap();
        let r = ch.synthesize(&[0.0, 1e-3]).unwrap();
        let ctf = r.transfer_function(&[0.0, 1e6]).unwrap();
        for ti in 0..2 {
            let sum: Complex64 = r.cell(ti, 0, 0).iter().map(|x| x.coefficient).sum();
            assert!((ctf.get(ti, 0, 0, 0) - sum).norm() < 1e-12);
        }
        assert!(r.transfer_function(&[]).is_err());
    }
}
