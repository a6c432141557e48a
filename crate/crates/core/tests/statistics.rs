mod common;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use common::{ctf_by_fft, exact_rms_delay_spread, mean_std, median};
use iiot_gbsm::channel::transfer;
use iiot_gbsm::ensemble::{build_channel, delay_spread_samples, generate, DsMode};
use iiot_gbsm::stats::{
    empirical_cdf, fcf, rms_delay_spread, CorrelationSamples, Estimator, Lag, PathFilter,
};
use iiot_gbsm::{Clutter, Condition, ScenarioParams};

#[test]
fn delay_spread_matches_exact_arithmetic() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let n = rng.random_range(1..60);
        let offset = rng.random::<f64>() * 1e-6;
        let paths: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random::<f64>().powi(3) + 1e-6, offset + rng.random::<f64>() * 300e-9))
            .collect();
        let exact = exact_rms_delay_spread(&paths);
        let got = rms_delay_spread(&paths).unwrap();
        if exact == 0.0 {
            assert!(got < 1e-20);
        } else {
            assert!((got - exact).abs() / exact < 1e-10, "{got} vs {exact}");
        }
    }
}

#[test]
fn transfer_function_matches_fft_of_gridded_response() {
    for (seed, cond) in [(1, Condition::Nlos), (2, Condition::Los)] {
        let ch = build_channel(&ScenarioParams::preset(Clutter::Heavy, cond), seed, 0).unwrap();
        let dtau = 0.5e-9;
        let n = 2048;
        let mut paths = ch.paths(2e-3, 0, 0).unwrap();
        let mut taps = Vec::new();
        for p in &mut paths {
            let k = (p.delay / dtau).round() as usize;
            p.delay = k as f64 * dtau;
            taps.push((p.coefficient, k));
        }
        let fft = ctf_by_fft(&taps, n);
        let df = 1.0 / (n as f64 * dtau);
        for (m, want) in fft.iter().enumerate().step_by(7) {
            let got = transfer(&paths, m as f64 * df);
            assert!((got - want).norm() <= 1e-9 * want.norm().max(1e-3), "bin {m}");
        }
    }
}

#[test]
fn mean_power_follows_power_accounting() {
    let p = ScenarioParams::preset(Clutter::Light, Condition::Nlos);
    let freqs: Vec<f64> = (0..100).map(|k| k as f64 * 2e6).collect();
    let ens = generate(&p, 10, 200).unwrap();
    let mut acc = 0.0;
    for ch in &ens {
        let paths = ch.paths(0.0, 0, 0).unwrap();
        let incoherent: f64 = paths.iter().map(|x| x.power()).sum();
        assert!((incoherent - 5.0 / 3.0).abs() < 1e-12);
        acc += freqs.iter().map(|f| transfer(&paths, *f).norm_sqr()).sum::<f64>();
    }
    let mean = acc / (ens.len() * freqs.len()) as f64;
    assert!((mean / (5.0 / 3.0) - 1.0).abs() < 0.02, "{mean}");
}

#[test]
fn empirical_cdf_tracks_normal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xs: Vec<f64> = (0..10_000).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
    let c = empirical_cdf(&xs).unwrap();
    let phi = Normal::standard();
    let worst = c
        .values
        .iter()
        .zip(&c.probs)
        .map(|(x, p)| {
            // both sides of each step
            let f = phi.cdf(*x);
            (p - f).abs().max((p - 1.0 / xs.len() as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(worst < 0.02, "{worst}");
}

#[test]
fn dmc_raise_mean_delay_spread() {
    let p = ScenarioParams::preset(Clutter::Light, Condition::Nlos);
    let all = delay_spread_samples(&p, 12, 300, 0.0, DsMode::All).unwrap();
    let smc = delay_spread_samples(&p, 12, 300, 0.0, DsMode::SmcOnly).unwrap();
    assert!(mean_std(&all).0 >= mean_std(&smc).0);
}

fn three_db_width(values: &[Complex64], dfs: &[f64]) -> f64 {
    let k = values.iter().position(|v| v.norm() < 0.5f64.sqrt()).unwrap_or(dfs.len() - 1);
    dfs[k]
}

#[test]
fn frequency_correlation_narrows_with_longer_dmc_decay() {
    let dfs: Vec<f64> = (0..200).map(|k| k as f64 * 0.25e6).collect();
    let width = |beta: f64| {
        let p = ScenarioParams::preset(Clutter::Light, Condition::Nlos).with_dmc_delay(5.0, beta);
        let e = generate(&p, 14, 300).unwrap();
        let c = fcf(&e, (0, 0), 0.0, 0.0, &dfs, Estimator::Theoretical).unwrap();
        three_db_width(&c.values, &dfs)
    };
    let w10 = width(10e-9);
    let w50 = width(50e-9);
    assert!(w50 < w10, "{w50} vs {w10}");
}

#[test]
fn moving_geometry_is_detected_as_non_stationary() {
    // same estimator as the acceptance check, with instants far enough apart
    // that the receiver has moved by several meters
    let mut p = ScenarioParams::preset(Clutter::Light, Condition::Nlos);
    p.link.rx_speed = 1.0;
    p.clusters.speed_rx = 1.0;
    let e = generate(&p, 15, 200).unwrap();
    let lags: Vec<Lag> = (0..=25).map(|k| Lag { dt: k as f64 * 2e-3, df: 0.0 }).collect();
    let a = CorrelationSamples::collect(&e, (0, 0), (0, 0), 0.0, 0.0, &lags, PathFilter::All).unwrap();
    let b = CorrelationSamples::collect(&e, (0, 0), (0, 0), 5.0, 0.0, &lags, PathFilter::All).unwrap();
    let z = a
        .paired_magnitude_difference(&b, Estimator::Simulated)
        .unwrap()
        .iter()
        .filter(|(_, se)| *se > 0.0)
        .map(|(d, se)| d.abs() / se)
        .fold(0.0, f64::max);
    assert!(z > 3.0, "{z}");
}

#[test]
fn heavier_clutter_and_nlos_spread_more() {
    let med = |c, k| median(&delay_spread_samples(&ScenarioParams::preset(c, k), 16, 300, 0.0, DsMode::All).unwrap());
    assert!(med(Clutter::Light, Condition::Nlos) > med(Clutter::Light, Condition::Los));
    assert!(med(Clutter::Heavy, Condition::Los) > med(Clutter::Light, Condition::Los));
}
