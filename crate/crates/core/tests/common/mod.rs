//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rustfft::FftPlanner;

/// Power-weighted RMS delay spread evaluated in exact rational arithmetic;
/// only the final square root is rounded.
pub fn exact_rms_delay_spread(paths: &[(f64, f64)]) -> f64 {
    let r = |x: f64| BigRational::from_float(x).expect("finite");
    let mut p_sum = BigRational::zero();
    let mut pt = BigRational::zero();
    let mut pt2 = BigRational::zero();
    for (p, t) in paths {
        let (p, t) = (r(*p), r(*t));
        pt2 += &p * &t * &t;
        pt += &p * &t;
        p_sum += p;
    }
    let mean = &pt / &p_sum;
    let var = &pt2 / &p_sum - &mean * &mean;
    var.to_f64().unwrap().max(0.0).sqrt()
}

/// Transfer function of taps sitting on the grid `k * dtau`, computed by an
/// FFT of the sampled impulse response. Returns `H(m / (n dtau))`, m < n.
pub fn ctf_by_fft(taps: &[(Complex64, usize)], n: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::zero(); n];
    for (c, k) in taps {
        h[*k] += *c;
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut h);
    h
}

/// Doppler of a terminal moving at `speed` with angle `theta` between its
/// velocity and the direction to the far end.
pub fn doppler_closed_form(speed: f64, theta: f64, f_c: f64) -> f64 {
    speed * theta.cos() * f_c / 299_792_458.0
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
