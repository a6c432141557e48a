//! MMSE fitting of scenario parameters to a reference delay-spread CDF.
//!
//! The search is a deterministic coarse-to-fine grid: each level lays a
//! regular grid over the current box, then shrinks the box to one grid step
//! around the best point. Every candidate is simulated with the same seed,
//! so the objective is smooth in the parameters.

use serde::{Deserialize, Serialize};

use super::cdf::{empirical_cdf, CdfCurve};
use crate::config::ScenarioParams;
use crate::ensemble::{delay_spread_samples, DsMode};
use crate::error::{Error, Result};

const QUANTILES: usize = 101;

/// Mean squared vertical difference between `sim` and `reference`, taken at
/// the reference's quantiles 0, 0.01, ..., 1.
pub fn cdf_distance(sim: &CdfCurve, reference: &CdfCurve) -> f64 {
    (0..QUANTILES)
        .map(|k| {
            let x = reference.quantile(k as f64 / (QUANTILES - 1) as f64);
            (sim.eval(x) - reference.eval(x)).powi(2)
        })
        .sum::<f64>()
        / QUANTILES as f64
}

/// One free parameter: a dotted [`ScenarioParams`] key and its bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParam {
    pub key: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub seed: u64,
    pub realizations: usize,
    /// Maximum number of simulated candidates.
    pub budget: usize,
    pub levels: usize,
    pub t: f64,
    pub mode: DsMode,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            realizations: 200,
            budget: 60,
            levels: 3,
            t: 0.0,
            mode: DsMode::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ScenarioParams,
    pub point: Vec<f64>,
    pub residual: f64,
    /// Residual of each accepted (improving) candidate, in order.
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || lo == hi {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Cartesian product of per-axis grids, first axis slowest.
fn product(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect()
    })
}

fn with_point(base: &ScenarioParams, space: &[FitParam], point: &[f64]) -> Result<ScenarioParams> {
    let mut p = base.clone();
    for (fp, v) in space.iter().zip(point) {
        p.set_f64(&fp.key, *v)?;
    }
    p.validated()
}

pub fn mmse_fit(reference: &CdfCurve, base: &ScenarioParams, space: &[FitParam], cfg: &FitConfig) -> Result<FitResult> {
    if reference.values.is_empty() {
        return Err(Error::Empty("reference CDF"));
    }
    for fp in space {
        if !(fp.lo <= fp.hi) || !fp.lo.is_finite() || !fp.hi.is_finite() {
            return Err(Error::OutOfDomain {
                name: "search bounds",
                range: "finite lo <= hi",
                value: fp.lo,
            });
        }
    }
    let mut evaluations = 0usize;
    let evaluate = |point: &[f64]| -> Option<(ScenarioParams, f64)> {
        let p = with_point(base, space, point).ok()?;
        let ds = delay_spread_samples(&p, cfg.seed, cfg.realizations, cfg.t, cfg.mode).ok()?;
        let cdf = empirical_cdf(&ds).ok()?;
        Some((p, cdf_distance(&cdf, reference)))
    };

    let mut best: Option<(ScenarioParams, Vec<f64>, f64)> = None;
    let mut trace = Vec::new();
    let mut accept = |params: ScenarioParams, point: Vec<f64>, r: f64, best: &mut Option<(ScenarioParams, Vec<f64>, f64)>| {
        if best.as_ref().is_none_or(|b| r < b.2) {
            trace.push(r);
            *best = Some((params, point, r));
        }
    };

    let degenerate = space.iter().all(|fp| fp.lo == fp.hi);
    if degenerate {
        let point: Vec<f64> = space.iter().map(|fp| fp.lo).collect();
        evaluations += 1;
        if let Some((p, r)) = evaluate(&point) {
            accept(p, point, r, &mut best);
        }
    } else {
        let levels = cfg.levels.max(1);
        let per_level = (cfg.budget / levels).max(1);
        let free = space.iter().filter(|fp| fp.lo < fp.hi).count();
        let per_axis = ((per_level as f64).powf(1.0 / free as f64).floor() as usize).max(2);
        let mut bounds: Vec<(f64, f64)> = space.iter().map(|fp| (fp.lo, fp.hi)).collect();
        'levels: for _ in 0..levels {
            let axes: Vec<Vec<f64>> = bounds.iter().map(|(lo, hi)| grid(*lo, *hi, per_axis)).collect();
            for point in product(&axes) {
                if evaluations >= cfg.budget {
                    break 'levels;
                }
                evaluations += 1;
                if let Some((p, r)) = evaluate(&point) {
                    accept(p, point, r, &mut best);
                }
            }
            let Some((_, centre, _)) = &best else { break };
            bounds = bounds
                .iter()
                .zip(centre)
                .zip(space)
                .map(|(((lo, hi), c), fp)| {
                    let step = (hi - lo) / (per_axis - 1) as f64;
                    ((c - step).max(fp.lo), (c + step).min(fp.hi))
                })
                .collect();
        }
    }

    let (params, point, residual) = best.ok_or(Error::NoEvaluableCandidate)?;
    Ok(FitResult {
        params,
        point,
        residual,
        trace,
        evaluations,
    })
}
