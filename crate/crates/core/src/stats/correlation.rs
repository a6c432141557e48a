//! Space-time-frequency correlation estimators.
//!
//! `R_ab(t, f; dt, df) = E[H_a(t, f) conj(H_b(t + dt, f + df))]` over an
//! ensemble of realizations, where `a` and `b` are (Rx, Tx) element pairs.
//! Two estimators share one interface:
//!
//! - [`Estimator::Theoretical`] multiplies full transfer functions.
//! - [`Estimator::Simulated`] correlates the LOS part with itself and adds
//!   the four NLOS cross sums (SMC-SMC, SMC-DMC, DMC-SMC, DMC-DMC), treating
//!   LOS and NLOS as uncorrelated.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{transfer, Channel, Path, PathKind};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    Theoretical,
    Simulated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    Raw,
    /// Divided by `sqrt(R_aa(0) R_bb(0))`.
    UnitAtZero,
}

/// Restrict path sums to one cluster (LOS excluded) or keep all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathFilter {
    All,
    Cluster(usize),
}

impl PathFilter {
    fn keep(self, p: &Path) -> bool {
        match self {
            PathFilter::All => true,
            PathFilter::Cluster(n) => p.cluster == Some(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lag {
    pub dt: f64,
    pub df: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatQuery {
    pub at_t: f64,
    pub at_f: f64,
    pub delta_t: f64,
    pub delta_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StfcfParts {
    pub los: Complex64,
    pub ss: Complex64,
    pub sm: Complex64,
    pub ms: Complex64,
    pub mm: Complex64,
}

impl StfcfParts {
    pub fn nlos(&self) -> Complex64 {
        self.ss + self.sm + self.ms + self.mm
    }

    pub fn total(&self) -> Complex64 {
        self.los + self.nlos()
    }

    fn add(&mut self, o: &StfcfParts) {
        self.los += o.los;
        self.ss += o.ss;
        self.sm += o.sm;
        self.ms += o.ms;
        self.mm += o.mm;
    }

    fn scale(&mut self, s: f64) {
        for v in [&mut self.los, &mut self.ss, &mut self.sm, &mut self.ms, &mut self.mm] {
            *v *= s;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub value: Complex64,
    pub normalization: Normalization,
    pub realizations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCurve {
    pub lags: Vec<Lag>,
    pub values: Vec<Complex64>,
    pub estimator: Estimator,
    pub normalization: Normalization,
    pub realizations: usize,
}

/// Per-kind transfer sums at one frequency.
fn split(paths: &[Path], f: f64, filter: PathFilter) -> (Complex64, Complex64, Complex64) {
    let (mut l, mut s, mut m) = (ZERO, ZERO, ZERO);
    for p in paths.iter().filter(|p| filter.keep(p)) {
        let v = p.coefficient * Complex64::from_polar(1.0, -2.0 * PI * f * p.delay);
        match p.kind {
            PathKind::Los => l += v,
            PathKind::Smc => s += v,
            PathKind::Dmc => m += v,
        }
    }
    (l, s, m)
}

fn filtered(paths: &[Path], filter: PathFilter) -> Vec<Path> {
    paths.iter().filter(|p| filter.keep(p)).copied().collect()
}

/// One realization's contribution at every lag.
#[derive(Debug, Clone)]
struct RealizationTerms {
    theo: Vec<Complex64>,
    parts: Vec<StfcfParts>,
    /// Zero-lag powers of pair a and pair b.
    norm_theo: (f64, f64),
    norm_sim: (f64, f64),
}

fn realization_terms(
    ch: &Channel,
    a: (usize, usize),
    b: (usize, usize),
    at_t: f64,
    at_f: f64,
    lags: &[Lag],
    filter: PathFilter,
) -> Result<RealizationTerms> {
    for (q, p) in [a, b] {
        if q >= ch.n_rx() {
            return Err(Error::IndexOutOfRange { index: q, len: ch.n_rx() });
        }
        if p >= ch.n_tx() {
            return Err(Error::IndexOutOfRange { index: p, len: ch.n_tx() });
        }
    }
    let snap = ch.snapshot(at_t)?;
    let pa = filtered(&ch.paths_at(&snap, a.0, a.1)?, filter);
    let pb0 = filtered(&ch.paths_at(&snap, b.0, b.1)?, filter);
    let ha = transfer(&pa, at_f);
    let hb = transfer(&pb0, at_f);
    let (la, sa, ma) = split(&pa, at_f, filter);
    let (lb, sb, mb) = split(&pb0, at_f, filter);
    let norm_theo = (ha.norm_sqr(), hb.norm_sqr());
    let norm_sim = (la.norm_sqr() + (sa + ma).norm_sqr(), lb.norm_sqr() + (sb + mb).norm_sqr());

    let mut theo = Vec::with_capacity(lags.len());
    let mut parts = Vec::with_capacity(lags.len());
    for lag in lags {
        let t2 = at_t + lag.dt;
        if t2 < 0.0 {
            return Err(Error::LagOutOfSpan { lag: lag.dt });
        }
        let pb = if lag.dt == 0.0 {
            pb0.clone()
        } else {
            filtered(&ch.paths(t2, b.0, b.1)?, filter)
        };
        let f2 = at_f + lag.df;
        theo.push(ha * transfer(&pb, f2).conj());
        let (l2, s2, m2) = split(&pb, f2, filter);
        parts.push(StfcfParts {
            los: la * l2.conj(),
            ss: sa * s2.conj(),
            sm: sa * m2.conj(),
            ms: ma * s2.conj(),
            mm: ma * m2.conj(),
        });
    }
    Ok(RealizationTerms {
        theo,
        parts,
        norm_theo,
        norm_sim,
    })
}

/// Per-realization correlation terms, kept so that curves and jackknife
/// errors come from the same draws.
#[derive(Debug, Clone)]
pub struct CorrelationSamples {
    pub lags: Vec<Lag>,
    terms: Vec<RealizationTerms>,
}

impl CorrelationSamples {
    pub fn collect(
        ensemble: &[Channel],
        a: (usize, usize),
        b: (usize, usize),
        at_t: f64,
        at_f: f64,
        lags: &[Lag],
        filter: PathFilter,
    ) -> Result<Self> {
        if ensemble.is_empty() {
            return Err(Error::Empty("ensemble"));
        }
        let terms = ensemble
            .par_iter()
            .map(|ch| realization_terms(ch, a, b, at_t, at_f, lags, filter))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lags: lags.to_vec(),
            terms,
        })
    }

    pub fn realizations(&self) -> usize {
        self.terms.len()
    }

    fn numerator(r: &RealizationTerms, est: Estimator, k: usize) -> Complex64 {
        match est {
            Estimator::Theoretical => r.theo[k],
            Estimator::Simulated => r.parts[k].total(),
        }
    }

    fn norm(r: &RealizationTerms, est: Estimator) -> (f64, f64) {
        match est {
            Estimator::Theoretical => r.norm_theo,
            Estimator::Simulated => r.norm_sim,
        }
    }

    fn norm_sums(&self, est: Estimator) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(a, b), r| {
            let (x, y) = Self::norm(r, est);
            (a + x, b + y)
        })
    }

    /// Ensemble means of the four NLOS cross sums and the LOS part, per lag.
    pub fn parts_mean(&self) -> Vec<StfcfParts> {
        let n = self.terms.len() as f64;
        (0..self.lags.len())
            .map(|k| {
                let mut acc = StfcfParts::default();
                for r in &self.terms {
                    acc.add(&r.parts[k]);
                }
                acc.scale(1.0 / n);
                acc
            })
            .collect()
    }

    pub fn curve(&self, est: Estimator, normalization: Normalization) -> CorrelationCurve {
        let n = self.terms.len() as f64;
        let denom = match normalization {
            Normalization::Raw => 1.0,
            Normalization::UnitAtZero => {
                let (a, b) = self.norm_sums(est);
                (a * b).sqrt() / n
            }
        };
        let values = (0..self.lags.len())
            .map(|k| self.terms.iter().map(|r| Self::numerator(r, est, k)).sum::<Complex64>() / n / denom)
            .collect();
        CorrelationCurve {
            lags: self.lags.clone(),
            values,
            estimator: est,
            normalization,
            realizations: self.terms.len(),
        }
    }

    /// Leave-one-out magnitudes of the unit-at-zero curve: `[lag][left out]`.
    fn loo_magnitudes(&self, est: Estimator) -> Vec<Vec<f64>> {
        let n = self.terms.len() as f64;
        let (sa, sb) = self.norm_sums(est);
        (0..self.lags.len())
            .map(|k| {
                let sum: Complex64 = self.terms.iter().map(|r| Self::numerator(r, est, k)).sum();
                self.terms
                    .iter()
                    .map(|r| {
                        let num = (sum - Self::numerator(r, est, k)) / (n - 1.0);
                        let (ra, rb) = Self::norm(r, est);
                        let den = ((sa - ra) * (sb - rb)).sqrt() / (n - 1.0);
                        (num / den).norm()
                    })
                    .collect()
            })
            .collect()
    }

    /// Normalized magnitude per lag with its jackknife standard error.
    pub fn magnitude_jackknife(&self, est: Estimator) -> Vec<(f64, f64)> {
        let c = self.curve(est, Normalization::UnitAtZero);
        self.loo_magnitudes(est)
            .iter()
            .zip(&c.values)
            .map(|(loo, v)| (v.norm(), jackknife_se(loo)))
            .collect()
    }

    /// Difference of normalized magnitudes `|rho_self| - |rho_other|` per lag
    /// with its paired jackknife standard error. Both sample sets must come
    /// from the same realizations in the same order.
    pub fn paired_magnitude_difference(&self, other: &Self, est: Estimator) -> Result<Vec<(f64, f64)>> {
        let n = self.terms.len();
        if n != other.terms.len() || self.lags.len() != other.lags.len() {
            return Err(Error::Parse("sample sets are not paired".into()));
        }
        if n < 2 {
            return Err(Error::Empty("jackknife needs two realizations"));
        }
        let a = self.curve(est, Normalization::UnitAtZero);
        let b = other.curve(est, Normalization::UnitAtZero);
        let la = self.loo_magnitudes(est);
        let lb = other.loo_magnitudes(est);
        Ok((0..self.lags.len())
            .map(|k| {
                let diffs: Vec<f64> = la[k].iter().zip(&lb[k]).map(|(x, y)| x - y).collect();
                (a.values[k].norm() - b.values[k].norm(), jackknife_se(&diffs))
            })
            .collect())
    }
}

/// Jackknife standard error from leave-one-out replicates.
pub fn jackknife_se(replicates: &[f64]) -> f64 {
    let n = replicates.len() as f64;
    let mean = replicates.iter().sum::<f64>() / n;
    ((n - 1.0) / n * replicates.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt()
}

pub fn stfcf(
    ensemble: &[Channel],
    a: (usize, usize),
    b: (usize, usize),
    query: StatQuery,
    est: Estimator,
    normalization: Normalization,
) -> Result<CorrelationEstimate> {
    let lag = Lag {
        dt: query.delta_t,
        df: query.delta_f,
    };
    let s = CorrelationSamples::collect(ensemble, a, b, query.at_t, query.at_f, &[lag], PathFilter::All)?;
    let c = s.curve(est, normalization);
    Ok(CorrelationEstimate {
        value: c.values[0],
        normalization,
        realizations: c.realizations,
    })
}

pub fn stfcf_parts(ensemble: &[Channel], a: (usize, usize), b: (usize, usize), query: StatQuery) -> Result<StfcfParts> {
    let lag = Lag {
        dt: query.delta_t,
        df: query.delta_f,
    };
    let s = CorrelationSamples::collect(ensemble, a, b, query.at_t, query.at_f, &[lag], PathFilter::All)?;
    Ok(s.parts_mean()[0])
}

/// Normalized temporal autocorrelation of one antenna pair.
pub fn acf(
    ensemble: &[Channel],
    pair: (usize, usize),
    at_t: f64,
    at_f: f64,
    dts: &[f64],
    est: Estimator,
    filter: PathFilter,
) -> Result<CorrelationCurve> {
    let lags: Vec<Lag> = dts.iter().map(|dt| Lag { dt: *dt, df: 0.0 }).collect();
    let s = CorrelationSamples::collect(ensemble, pair, pair, at_t, at_f, &lags, filter)?;
    Ok(s.curve(est, Normalization::UnitAtZero))
}

/// Normalized frequency correlation of one antenna pair.
pub fn fcf(
    ensemble: &[Channel],
    pair: (usize, usize),
    at_t: f64,
    at_f: f64,
    dfs: &[f64],
    est: Estimator,
) -> Result<CorrelationCurve> {
    let lags: Vec<Lag> = dfs.iter().map(|df| Lag { dt: 0.0, df: *df }).collect();
    let s = CorrelationSamples::collect(ensemble, pair, pair, at_t, at_f, &lags, PathFilter::All)?;
    Ok(s.curve(est, Normalization::UnitAtZero))
}

/// Spatial cross-correlation between Rx element 0 and each Rx element `q`
/// (Tx element 0), returned with the element separation in meters.
pub fn ccf(ensemble: &[Channel], at_t: f64, at_f: f64, est: Estimator) -> Result<Vec<(f64, CorrelationEstimate)>> {
    let first = ensemble.first().ok_or(Error::Empty("ensemble"))?;
    let zero = Lag { dt: 0.0, df: 0.0 };
    (0..first.n_rx())
        .map(|q| {
            let s = CorrelationSamples::collect(ensemble, (0, 0), (q, 0), at_t, at_f, &[zero], PathFilter::All)?;
            let c = s.curve(est, Normalization::UnitAtZero);
            Ok((
                q as f64 * first.rx.spacing,
                CorrelationEstimate {
                    value: c.values[0],
                    normalization: Normalization::UnitAtZero,
                    realizations: c.realizations,
                },
            ))
        })
        .collect()
}
