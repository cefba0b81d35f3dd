//! Seeded synthetic data: regression designs for benchmarks and calibration
//! checks, and a quarterly macro-panel snapshot with FRED-QD-style levels and
//! transform codes for end-to-end runs.

use ndarray::{Array1, Array2};
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::ingest::{SeriesSpec, TargetSpec};
use crate::quarter::Quarter;

/// Sparse-truth regression: intercept column, `dim-1` standard-normal
/// predictors, `n_signals` nonzero coefficients. Returns `(design, target)`.
pub fn gen_regression(
    t: usize,
    dim: usize,
    n_signals: usize,
    noise_sd: f64,
    seed: u64,
) -> (Array2<f64>, Array1<f64>) {
    let (f, y, _) = gen_regression_full(t, dim, n_signals, noise_sd, seed);
    (f, y)
}

/// Like [`gen_regression`] but also returns the generating coefficients.
pub fn gen_regression_full(
    t: usize,
    dim: usize,
    n_signals: usize,
    noise_sd: f64,
    seed: u64,
) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
    assert!(dim >= 1);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut f = Array2::<f64>::zeros((t, dim));
    for i in 0..t {
        f[[i, 0]] = 1.0;
        for j in 1..dim {
            f[[i, j]] = normal.sample(&mut rng);
        }
    }
    let pattern = [1.5, -2.0, 1.0, 0.8, -1.2];
    let mut beta = Array1::<f64>::zeros(dim);
    beta[0] = 0.5;
    for s in 0..n_signals.min(dim - 1) {
        beta[s + 1] = pattern[s % pattern.len()];
    }
    let noise: Array1<f64> = (0..t).map(|_| noise_sd * normal.sample(&mut rng)).collect();
    let y = f.dot(&beta) + &noise;
    (f, y, beta)
}

/// A generated macro snapshot: raw-levels CSV plus the matching series spec.
#[derive(Debug, Clone)]
pub struct SyntheticSnapshot {
    pub csv: String,
    pub specs: Vec<SeriesSpec>,
    pub target: TargetSpec,
}

/// Quarterly panel in levels with a one-factor structure: predictors load on
/// a persistent factor that drives next-quarter output growth, so direct
/// designs at short horizons carry dense, weak signal. Series cycle through
/// transform codes 5, 1, 2, 6 with names echoing the usual mnemonics.
pub fn gen_macro_snapshot(
    start: Quarter,
    end: Quarter,
    n_predictors: usize,
    seed: u64,
) -> SyntheticSnapshot {
    let t = (end.diff(&start) + 1) as usize;
    assert!(t > 8, "snapshot needs more than eight quarters");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();

    // Persistent common factor.
    let mut factor = vec![0.0f64; t];
    for i in 1..t {
        factor[i] = 0.7 * factor[i - 1] + 0.5 * normal.sample(&mut rng);
    }

    // Annualized quarterly growth: loads on the lagged factor plus an
    // occasional recession-like downdraft so tails matter.
    let mut growth = vec![0.0f64; t];
    for i in 0..t {
        let f_lag = if i == 0 { 0.0 } else { factor[i - 1] };
        let mut g = 2.5 + 1.8 * f_lag + 2.0 * normal.sample(&mut rng);
        if rng.random::<f64>() < 0.04 {
            g -= 6.0 + 4.0 * rng.random::<f64>();
        }
        growth[i] = g;
    }
    let mut gdp = vec![0.0f64; t];
    gdp[0] = 5000.0;
    for i in 1..t {
        gdp[i] = gdp[i - 1] * (growth[i] / 400.0).exp();
    }

    // Predictors: stationary signal s_jt = load_j · factor_t + noise, embedded
    // in levels consistent with each series' transform code.
    let tcodes: [u8; 4] = [5, 1, 2, 6];
    let name_for = |j: usize, tcode: u8| -> String {
        match tcode {
            5 => format!("ACT{j:02}"),  // activity, log-differenced
            1 => format!("SPREAD{j:02}"), // rates/spreads, levels
            2 => format!("RATE{j:02}"), // rates, first difference
            _ => format!("PRICE{j:02}"), // prices, second log difference
        }
    };
    let mut columns: Vec<(String, Vec<f64>)> = Vec::with_capacity(n_predictors);
    let mut specs = Vec::with_capacity(n_predictors + 1);
    for j in 0..n_predictors {
        let tcode = tcodes[j % tcodes.len()];
        let load = (0.35 + 0.65 * rng.random::<f64>()) * if j % 2 == 0 { 1.0 } else { -1.0 };
        let signal: Vec<f64> = (0..t)
            .map(|i| load * factor[i] + 0.7 * normal.sample(&mut rng))
            .collect();
        let mut level = vec![0.0f64; t];
        match tcode {
            5 => {
                level[0] = 100.0;
                for i in 1..t {
                    level[i] = level[i - 1] * (0.01 * signal[i]).exp();
                }
            }
            1 => {
                for i in 0..t {
                    level[i] = signal[i];
                }
            }
            2 => {
                level[0] = 5.0;
                for i in 1..t {
                    level[i] = level[i - 1] + signal[i];
                }
            }
            _ => {
                // Δ²log: integrate the signal twice into a log level.
                let mut pi = vec![0.0f64; t];
                for i in 1..t {
                    pi[i] = pi[i - 1] + 0.005 * signal[i];
                }
                level[0] = 50.0;
                for i in 1..t {
                    level[i] = level[i - 1] * pi[i].exp();
                }
            }
        }
        let name = name_for(j, tcode);
        specs.push(SeriesSpec {
            name: name.clone(),
            tcode,
            include: true,
        });
        columns.push((name, level));
    }

    let mut csv = String::from("date,GDPC1");
    for (name, _) in &columns {
        csv.push(',');
        csv.push_str(name);
    }
    csv.push('\n');
    for i in 0..t {
        csv.push_str(&format!("{},{:.6}", start.add(i as i64), gdp[i]));
        for (_, level) in &columns {
            csv.push_str(&format!(",{:.8}", level[i]));
        }
        csv.push('\n');
    }

    SyntheticSnapshot {
        csv,
        specs,
        target: TargetSpec::annualized("GDPC1"),
    }
}

/// ALD(q) noise via the normal-exponential mixture; used to simulate from
/// the working likelihood itself.
pub fn ald_noise<R: Rng + ?Sized>(rng: &mut R, q: f64, sigma: f64) -> f64 {
    let theta = (1.0 - 2.0 * q) / (q * (1.0 - q));
    let tau = (2.0 / (q * (1.0 - q))).sqrt();
    let nu: f64 = -(rng.random::<f64>()).ln() * sigma;
    let u: f64 = rng.sample(StandardNormal);
    theta * nu + tau * (sigma * nu).sqrt() * u
}
