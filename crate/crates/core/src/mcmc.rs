//! Gibbs-sampling reference implementation of the asymmetric-Laplace
//! quantile regression, used as the correctness oracle for the variational
//! engine and for the runtime comparison.
//!
//! The sampler follows the auxiliary-variable scheme that renders the model
//! conditionally Gaussian: coefficients are drawn from a Gaussian, each
//! latent scale from a GIG(1/2, ·, ·), the inverse ALD scale from a Gamma,
//! and the prior scales from their family conditionals. Supported families:
//! Ridge, Horseshoe, Normal-Gamma, Lasso (the ones with textbook
//! conditionals). Dirichlet-Laplace and Minnesota-Gamma have no oracle here.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::{Diag, SolveTriangular, UPLO};
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma as GammaDist, InverseGaussian, StandardNormal};

use crate::error::{CoreError, Result};
use crate::linalg::{design_weighted_rhs, weighted_gram, SpdFactor};
use crate::priors::PriorFamily;
use crate::vb::{vb_fit, QuantileContext, VbOptions, VbProblem};

const NU_FLOOR: f64 = 1e-12;

/// Posterior draws from one Gibbs run.
#[derive(Debug, Clone)]
pub struct GibbsDraws {
    pub beta_draws: Array2<f64>,
    pub sigma_draws: Array1<f64>,
    pub nu_draws: Option<Array2<f64>>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl GibbsDraws {
    pub fn n_draws(&self) -> usize {
        self.beta_draws.nrows()
    }

    pub fn beta_mean(&self) -> Array1<f64> {
        let n = self.n_draws() as f64;
        self.beta_draws.t().dot(&Array1::from_elem(self.n_draws(), 1.0 / n))
    }

    pub fn beta_sd(&self) -> Array1<f64> {
        let n = self.n_draws() as f64;
        let mean = self.beta_mean();
        let mut out = Array1::<f64>::zeros(self.beta_draws.ncols());
        for j in 0..self.beta_draws.ncols() {
            let s: f64 = self
                .beta_draws
                .column(j)
                .iter()
                .map(|v| (v - mean[j]).powi(2))
                .sum();
            out[j] = (s / (n - 1.0)).sqrt();
        }
        out
    }
}

/// Draw from GIG(p, a, b) with density ∝ x^{p-1} exp(−(a x + b/x)/2).
///
/// |p| = 1/2 uses the inverse-Gaussian representation; everything else goes
/// through a three-piece rejection envelope around the log-concave density of
/// ln X (uniform center, exponential tails hung at the points where the
/// normalized log-density reaches −1).
pub fn sample_gig<R: Rng + ?Sized>(rng: &mut R, p: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0, "GIG parameters must be positive");
    if p < 0.0 {
        return 1.0 / sample_gig(rng, -p, b, a);
    }
    if p == 0.5 {
        // X ~ GIG(1/2, a, b) <=> 1/X ~ InverseGaussian(√(a/b), a).
        let ig = InverseGaussian::new((a / b).sqrt(), a).expect("positive parameters");
        return 1.0 / ig.sample(rng);
    }
    let omega = (a * b).sqrt();
    let scale = (b / a).sqrt();
    scale * sample_gig_standard(rng, p, omega)
}

/// GIG(p, ω, ω) for p ≥ 0 via rejection on the log scale.
fn sample_gig_standard<R: Rng + ?Sized>(rng: &mut R, p: f64, omega: f64) -> f64 {
    let y_star = (p / omega).asinh();
    let amp = (omega * omega + p * p).sqrt();
    // Normalized log-density of v = ln x − y*: concave with g(0) = g'(0) = 0,
    // using ω cosh(y*) = amp and ω sinh(y*) = p.
    let g_fn = |v: f64| p * v - amp * (v.cosh() - 1.0) - p * v.sinh();
    let gp_fn = |v: f64| p - amp * v.sinh() - p * v.cosh();

    // g(t) = −1 on each side, by bisection (g is monotone away from 0).
    let solve = |dir: f64| -> f64 {
        let mut hi = 1.0f64;
        while g_fn(dir * hi) > -1.0 {
            hi *= 2.0;
            if hi > 1e9 {
                break;
            }
        }
        let mut lo = 0.0f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g_fn(dir * mid) > -1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let t = solve(1.0);
    let s = solve(-1.0);
    let rate_right = (-gp_fn(t)).max(1e-300);
    let rate_left = gp_fn(-s).max(1e-300);
    let w_center = t + s;
    let w_right = (-1.0f64).exp() / rate_right;
    let w_left = (-1.0f64).exp() / rate_left;
    let total = w_center + w_right + w_left;

    loop {
        let u = rng.random::<f64>() * total;
        let (v, log_env) = if u < w_center {
            let v = -s + rng.random::<f64>() * (t + s);
            (v, 0.0)
        } else if u < w_center + w_right {
            let e: f64 = -(rng.random::<f64>()).ln();
            let v = t + e / rate_right;
            (v, -1.0 - rate_right * (v - t))
        } else {
            let e: f64 = -(rng.random::<f64>()).ln();
            let v = -s - e / rate_left;
            (v, -1.0 - rate_left * (-s - v))
        };
        let u2: f64 = rng.random();
        if u2.ln() <= g_fn(v) - log_env {
            return (v + y_star).exp();
        }
    }
}

/// Prior scale state inside the Gibbs sweep (one per coefficient block).
struct GibbsPriorBlock {
    family: PriorFamily,
    psi: Vec<f64>,
    lambda: f64,
    aux_a: Vec<f64>,
    aux_b: f64,
}

impl GibbsPriorBlock {
    fn new(family: &PriorFamily, n: usize) -> Result<Self> {
        match family {
            PriorFamily::Ridge { .. }
            | PriorFamily::Horseshoe
            | PriorFamily::NormalGamma { .. }
            | PriorFamily::Lasso { .. } => Ok(GibbsPriorBlock {
                family: family.clone(),
                psi: vec![1.0; n],
                lambda: 0.01,
                aux_a: vec![1.0; n],
                aux_b: 1.0,
            }),
            other => Err(CoreError::config(format!(
                "no Gibbs conditionals for prior {:?}; supported: ridge, hs, ng, lasso",
                other.tag()
            ))),
        }
    }

    fn precision_diag(&self) -> impl Iterator<Item = f64> + '_ {
        self.psi.iter().map(move |psi| 1.0 / (self.lambda * psi))
    }

    fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R, beta: &[f64]) {
        let n = beta.len();
        let nf = n as f64;
        // X ~ InvGamma(shape, scale) <=> 1/X ~ Gamma(shape, rate = scale).
        let inv_gamma = |rng: &mut R, shape: f64, scale: f64| -> f64 {
            1.0 / GammaDist::new(shape, 1.0 / scale)
                .expect("positive shape")
                .sample(rng)
        };
        match self.family.clone() {
            PriorFamily::Ridge { e0, e1 } => {
                let ssq: f64 = beta.iter().map(|b| b * b).sum();
                self.lambda = inv_gamma(rng, e0 + nf / 2.0, e1 + ssq / 2.0);
            }
            PriorFamily::Horseshoe => {
                for j in 0..n {
                    self.psi[j] = inv_gamma(
                        rng,
                        1.0,
                        1.0 / self.aux_a[j] + beta[j] * beta[j] / (2.0 * self.lambda),
                    );
                    self.aux_a[j] = inv_gamma(rng, 1.0, 1.0 + 1.0 / self.psi[j]);
                }
                let cross: f64 = beta
                    .iter()
                    .zip(&self.psi)
                    .map(|(b, psi)| b * b / psi)
                    .sum();
                self.lambda = inv_gamma(rng, (nf + 1.0) / 2.0, 1.0 / self.aux_b + cross / 2.0);
                self.aux_b = inv_gamma(rng, 1.0, 1.0 + 1.0 / self.lambda);
            }
            PriorFamily::NormalGamma { c0, d0, .. } | PriorFamily::Lasso { c0, d0 } => {
                let theta = match self.family {
                    PriorFamily::NormalGamma { theta, .. } => theta,
                    _ => 1.0,
                };
                for j in 0..n {
                    let b = (beta[j] * beta[j] / self.lambda).max(NU_FLOOR);
                    self.psi[j] = sample_gig(rng, theta - 0.5, theta, b);
                }
                let cross: f64 = beta
                    .iter()
                    .zip(&self.psi)
                    .map(|(bj, psi)| bj * bj / psi)
                    .sum();
                self.lambda =
                    sample_gig(rng, c0 - nf / 2.0, 2.0 * d0, cross.max(NU_FLOOR));
            }
            _ => unreachable!("constructor rejects unsupported families"),
        }
    }
}

/// Coefficient draw given latents: Gaussian with the conditionally
/// heteroskedastic likelihood. Exposed for the conjugacy tests.
pub fn draw_coefficients<R: Rng + ?Sized>(
    rng: &mut R,
    f: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    ctx: &QuantileContext,
    nu: &Array1<f64>,
    sigma: f64,
    b0_inv: &Array1<f64>,
) -> Result<Array1<f64>> {
    let d = f.ncols();
    let w = nu.mapv(|v| 1.0 / (ctx.tau_sq * sigma * v.max(NU_FLOOR)));
    let mut a = weighted_gram(f, &w.view());
    for j in 0..d {
        a[[j, j]] += b0_inv[j];
    }
    let v = Array1::from_iter(
        y.iter()
            .zip(nu.iter())
            .zip(w.iter())
            .map(|((yt, nut), wt)| wt * (yt - ctx.theta * nut)),
    );
    let rhs = design_weighted_rhs(f, &v);
    let factor = SpdFactor::factor(&a)?;
    let mean = factor.solve_vec(&rhs)?;
    // draw = mean + L⁻ᵀ z since cov = (L Lᵀ)⁻¹.
    let z = Array1::from_iter((0..d).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let shift = factor
        .lower()
        .t()
        .solve_triangular(UPLO::Upper, Diag::NonUnit, &z)?;
    Ok(mean + shift)
}

/// Full Gibbs run. Draws are recorded after `burn_in` warm-up sweeps.
pub fn gibbs_fit(
    f: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    q: f64,
    prior: &PriorFamily,
    basis_split: (usize, usize),
    n_draws: usize,
    burn_in: usize,
    seed: u64,
) -> Result<GibbsDraws> {
    gibbs_fit_opts(f, y, q, prior, basis_split, n_draws, burn_in, seed, false)
}

#[allow(clippy::too_many_arguments)]
pub fn gibbs_fit_opts(
    f: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    q: f64,
    prior: &PriorFamily,
    basis_split: (usize, usize),
    n_draws: usize,
    burn_in: usize,
    seed: u64,
    keep_nu: bool,
) -> Result<GibbsDraws> {
    let t = f.nrows();
    let d = f.ncols();
    let (k, m) = basis_split;
    if k + m != d {
        return Err(CoreError::dimension(format!(
            "basis split ({k}, {m}) does not cover {d} design columns"
        )));
    }
    if n_draws == 0 {
        return Err(CoreError::config("n_draws must be >= 1"));
    }
    let mut warnings = Vec::new();
    if d > 2000 {
        warnings.push(format!(
            "{d} columns: dense Gibbs sweeps will be slow; the variational path is the intended estimator at this scale"
        ));
    }
    let ctx = QuantileContext::new(q)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let mut prior_lin = GibbsPriorBlock::new(prior, k)?;
    let mut prior_nl = GibbsPriorBlock::new(prior, m)?;
    let mut nu = Array1::<f64>::ones(t);
    let mut sigma = 1.0f64;

    let mut beta_draws = Array2::<f64>::zeros((n_draws, d));
    let mut sigma_draws = Array1::<f64>::zeros(n_draws);
    let mut nu_draws = keep_nu.then(|| Array2::<f64>::zeros((n_draws, t)));

    let a_nu_base = 2.0 + ctx.theta * ctx.theta / ctx.tau_sq;
    for sweep in 0..(burn_in + n_draws) {
        let mut b0_inv = Array1::<f64>::zeros(d);
        for (j, p) in prior_lin
            .precision_diag()
            .chain(prior_nl.precision_diag())
            .enumerate()
        {
            b0_inv[j] = p;
        }
        let beta = draw_coefficients(&mut rng, f, y, &ctx, &nu, sigma, &b0_inv)?;
        if beta.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::numerical(
                "gibbs coefficient draw",
                format!("non-finite draw at sweep {sweep}"),
            ));
        }

        let fitted = f.dot(&beta);
        let a_nu = a_nu_base / sigma;
        for i in 0..t {
            let resid = y[i] - fitted[i];
            let b = (resid * resid / (ctx.tau_sq * sigma)).max(NU_FLOOR);
            nu[i] = sample_gig(&mut rng, 0.5, a_nu, b).max(NU_FLOOR);
        }

        // 1/σ | • ~ Gamma(c0 + 1.5T, d0 + Σν + Σ(y − f'β − θν)²/(2τ²ν))
        let mut rate = 0.0;
        for i in 0..t {
            let resid = y[i] - fitted[i] - ctx.theta * nu[i];
            rate += nu[i] + resid * resid / (2.0 * ctx.tau_sq * nu[i]);
        }
        let shape = 1.5 * t as f64;
        let inv_sigma = GammaDist::new(shape, 1.0 / rate)
            .map_err(|e| CoreError::numerical("gibbs sigma draw", e.to_string()))?
            .sample(&mut rng);
        sigma = (1.0 / inv_sigma).max(1e-300);

        let beta_slice = beta.as_slice().unwrap();
        if k > 0 {
            prior_lin.draw(&mut rng, &beta_slice[..k]);
        }
        if m > 0 {
            prior_nl.draw(&mut rng, &beta_slice[k..]);
        }

        if sweep >= burn_in {
            let idx = sweep - burn_in;
            beta_draws.row_mut(idx).assign(&beta);
            sigma_draws[idx] = sigma;
            if let Some(nd) = nu_draws.as_mut() {
                nd.row_mut(idx).assign(&nu);
            }
        }
    }

    Ok(GibbsDraws {
        beta_draws,
        sigma_draws,
        nu_draws,
        seed,
        warnings,
    })
}

/// One row of the runtime comparison table.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BenchRow {
    pub dim: usize,
    pub vb_seconds: f64,
    pub mcmc_seconds: f64,
}

/// Wall-clock comparison of one variational fit against one Gibbs run across
/// design dimensions, on seeded synthetic data (T rows, 5 true signals).
pub fn runtime_benchmark(
    dims: &[usize],
    t: usize,
    n_draws: usize,
    burn_in: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(dims.len());
    for &dim in dims {
        let (f, y) = crate::synthetic::gen_regression(t, dim, 5, 1.0, seed ^ dim as u64);
        let problem = VbProblem {
            f: f.view(),
            y: y.view(),
            q: 0.5,
            family: PriorFamily::ridge(),
            basis_split: (dim, 0),
            intercept: false,
            minnesota: None,
            opts: VbOptions::default(),
        };
        let start = Instant::now();
        let fit = vb_fit(&problem)?;
        let vb_seconds = start.elapsed().as_secs_f64();
        let _ = fit.iterations;

        let start = Instant::now();
        let draws = gibbs_fit(
            &f.view(),
            &y.view(),
            0.5,
            &PriorFamily::ridge(),
            (dim, 0),
            n_draws,
            burn_in,
            seed ^ dim as u64,
        )?;
        let mcmc_seconds = start.elapsed().as_secs_f64();
        let _ = draws.n_draws();

        rows.push(BenchRow {
            dim,
            vb_seconds,
            mcmc_seconds,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    /// Quadrature CDF of GIG(p, a, b) at x, on the log scale.
    fn gig_cdf_quadrature(p: f64, a: f64, b: f64, x: f64) -> f64 {
        let log_pdf = |v: f64| (p - 1.0) * v.exp().ln() - 0.5 * (a * v.exp() + b / v.exp());
        let n = 100_000;
        let (lo, hi) = (-50.0, 50.0);
        let h = (hi - lo) / n as f64;
        let mut norm = 0.0;
        let mut mass = 0.0;
        for i in 0..=n {
            let u = lo + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            let pdf = (log_pdf(u) + u).exp();
            norm += w * pdf * h;
            if u.exp() <= x {
                mass += w * pdf * h;
            }
        }
        mass / norm
    }

    #[test]
    fn gig_sampler_matches_moments_and_cdf() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        for &(p, a, b) in &[(0.5, 1.0, 1.0), (2.3, 0.5, 4.0), (-0.7, 3.0, 0.2), (0.1, 1.0, 1.0)] {
            let n = 60_000;
            let draws: Vec<f64> = (0..n).map(|_| sample_gig(&mut rng, p, a, b)).collect();
            let mean: f64 = draws.iter().sum::<f64>() / n as f64;
            let mean_inv: f64 = draws.iter().map(|x| 1.0 / x).sum::<f64>() / n as f64;
            let expect = crate::gig::gig_moment_general(p, a, b, 1.0);
            let expect_inv = crate::gig::gig_moment_general(p, a, b, -1.0);
            assert_relative_eq!(mean, expect, max_relative = 0.03);
            assert_relative_eq!(mean_inv, expect_inv, max_relative = 0.03);

            // Empirical CDF vs quadrature at the empirical median.
            let mut sorted = draws.clone();
            sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let med = sorted[n / 2];
            let cdf = gig_cdf_quadrature(p, a, b, med);
            assert!(
                (cdf - 0.5).abs() < 0.02,
                "median CDF {cdf} far from 0.5 at ({p}, {a}, {b})"
            );
        }
    }

    #[test]
    fn same_seed_reproduces_draws() {
        let f = array![[1.0, 0.2], [0.5, -1.0], [0.3, 0.7], [1.5, 0.1], [0.2, 0.9]];
        let y = array![0.5, -0.2, 0.3, 1.0, 0.1];
        let run = || {
            gibbs_fit(
                &f.view(),
                &y.view(),
                0.25,
                &PriorFamily::ridge(),
                (2, 0),
                50,
                10,
                7,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.beta_draws, b.beta_draws);
        assert_eq!(a.sigma_draws, b.sigma_draws);
    }

    #[test]
    fn fixed_latents_reduce_to_bayesian_linear_regression() {
        // With ν ≡ 1 and σ = 1 the coefficient conditional is the conjugate
        // Gaussian posterior: precision F'F/τ² + B0⁻¹, mean Σ F'(y − θ)/τ².
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let t = 40;
        let f = Array2::from_shape_fn((t, 2), |_| rng.random::<f64>() - 0.5);
        let y = Array1::from_shape_fn(t, |i| f[[i, 0]] * 2.0 - f[[i, 1]] + 0.1);
        let ctx = QuantileContext::new(0.3).unwrap();
        let nu = Array1::<f64>::ones(t);
        let b0 = array![4.0, 4.0];

        let w = 1.0 / ctx.tau_sq;
        let mut a = f.t().dot(&f) * w;
        a[[0, 0]] += 4.0;
        a[[1, 1]] += 4.0;
        let shifted = y.mapv(|v| (v - ctx.theta) * w);
        let rhs = f.t().dot(&shifted);
        let factor = SpdFactor::factor(&a).unwrap();
        let mean_expect = factor.solve_vec(&rhs).unwrap();
        let inv_l = factor.inv_lower().unwrap();
        let cov = factor.inverse(&inv_l);

        let n = 40_000;
        let mut sums = [0.0f64; 2];
        let mut sq = [0.0f64; 2];
        for _ in 0..n {
            let draw = draw_coefficients(&mut rng, &f.view(), &y.view(), &ctx, &nu, 1.0, &b0)
                .unwrap();
            for j in 0..2 {
                sums[j] += draw[j];
                sq[j] += draw[j] * draw[j];
            }
        }
        for j in 0..2 {
            let mean = sums[j] / n as f64;
            let var = sq[j] / n as f64 - mean * mean;
            assert_relative_eq!(mean, mean_expect[j], epsilon = 0.01, max_relative = 0.05);
            assert_relative_eq!(var, cov[[j, j]], max_relative = 0.1);
        }
    }

    #[test]
    fn median_intercept_only_tracks_sample_median() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let t = 300;
        let f = Array2::<f64>::ones((t, 1));
        let y = Array1::from_shape_fn(t, |_| {
            // symmetric-ish mixture around 2.0
            2.0 + (rng.random::<f64>() - 0.5) * 4.0
        });
        let draws = gibbs_fit(
            &f.view(),
            &y.view(),
            0.5,
            &PriorFamily::ridge(),
            (1, 0),
            2000,
            500,
            11,
        )
        .unwrap();
        let mut sorted = y.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = 0.5 * (sorted[149] + sorted[150]);
        let post_mean = draws.beta_mean()[0];
        let post_sd = draws.beta_sd()[0];
        assert!(
            (post_mean - median).abs() < 4.0 * post_sd,
            "posterior mean {post_mean} vs median {median} (sd {post_sd})"
        );
    }

    #[test]
    fn posterior_concentrates_on_generating_coefficients() {
        // Loose recovery check: T = 400 draws from the ALD model itself.
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let t = 400;
        let q = 0.5;
        let f = Array2::from_shape_fn((t, 3), |(_, j)| {
            if j == 0 {
                1.0
            } else {
                rng.random::<f64>() * 2.0 - 1.0
            }
        });
        let beta_true = array![0.3, 1.5, -0.8];
        // ALD(q) noise via its mixture representation.
        let ctx = QuantileContext::new(q).unwrap();
        let y = Array1::from_shape_fn(t, |i| {
            let nu: f64 = -(rng.random::<f64>()).ln();
            let u: f64 = rng.sample(StandardNormal);
            f.row(i).dot(&beta_true) + ctx.theta * nu + ctx.tau_sq.sqrt() * (nu).sqrt() * u
        });
        let draws = gibbs_fit(
            &f.view(),
            &y.view(),
            q,
            &PriorFamily::horseshoe(),
            (3, 0),
            3000,
            1000,
            5,
        )
        .unwrap();
        let mean = draws.beta_mean();
        let sd = draws.beta_sd();
        for j in 0..3 {
            assert!(
                (mean[j] - beta_true[j]).abs() < 4.0 * sd[j],
                "coefficient {j}: {} vs {} (sd {})",
                mean[j],
                beta_true[j],
                sd[j]
            );
        }
    }

    #[test]
    fn unsupported_family_is_rejected() {
        let f = Array2::<f64>::ones((6, 1));
        let y = Array1::<f64>::ones(6);
        let err = gibbs_fit(
            &f.view(),
            &y.view(),
            0.5,
            &PriorFamily::dirichlet_laplace(),
            (1, 0),
            10,
            0,
            1,
        )
        .unwrap_err()
        .to_string();
        assert!(err.contains("no Gibbs conditionals"), "{err}");
    }

    #[test]
    fn tiny_benchmark_completes_quickly() {
        let start = Instant::now();
        let rows = runtime_benchmark(&[5, 20], 60, 50, 10, 3).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.vb_seconds > 0.0 && r.mcmc_seconds > 0.0));
        assert!(start.elapsed().as_secs_f64() < 10.0);
    }
}
