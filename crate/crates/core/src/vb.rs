//! Mean-field variational inference for the asymmetric-Laplace quantile
//! regression.
//!
//! The working likelihood uses the normal-exponential mixture
//! `ε_t = θ ν_t + τ √(σ ν_t) u_t` with `θ = (1-2q)/(q(1-q))`,
//! `τ² = 2/(q(1-q))`, `ν_t ~ Exp(1/σ)`, `u_t ~ N(0,1)`, which makes the model
//! conditionally Gaussian. The approximating factorization is
//! `q(β̃) q(σ) Π_t q(ν_t)` with:
//!
//! * Gaussian `q(β̃)`: precision `Σ_t f_t f_t' E(1/ν_t) E(1/σ)/τ² + B₀⁻¹`,
//!   mean `Σ̂ · E(1/σ)/τ² · Σ_t f_t (E(1/ν_t) y_t − θ)`.
//! * GIG(1/2, A, B_t) for each `ν_t` with
//!   `A = E(1/σ)(2 + θ²/τ²)` and
//!   `B_t = E(1/σ)/τ² [(y_t − f_t'E(β̃))² + f_t'Σ̂f_t]`.
//! * Gamma(c₁, d₁) for `1/σ` with `c₁ = c₀ + 1.5T` and the matching rate.
//!
//! Convergence is monitored on the maximum absolute change of `E(β̃)`; a
//! plug-in expected complete-data log-likelihood is tracked as a diagnostic
//! proxy for the ELBO (exact entropy terms for every prior family are not
//! evaluated).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::error::{CoreError, Result};
use crate::linalg::{design_weighted_rhs, weighted_gram, SpdFactor};
use crate::priors::{prior_precision, update_prior, Block, MinnesotaScaling, PriorFamily, PriorState};

/// Latent-scale floor keeping the GIG parameters well-defined when residual
/// and variance terms underflow.
const B_FLOOR: f64 = 1e-10;

/// Quantile-specific mixture constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileContext {
    pub q: f64,
    pub theta: f64,
    pub tau_sq: f64,
}

impl QuantileContext {
    pub fn new(q: f64) -> Result<Self> {
        let (theta, tau_sq) = ald_mixture_constants(q)?;
        Ok(QuantileContext { q, theta, tau_sq })
    }
}

/// `θ_q = (1-2q)/(q(1-q))`, `τ_q² = 2/(q(1-q))`.
pub fn ald_mixture_constants(q: f64) -> Result<(f64, f64)> {
    if !(q > 0.0 && q < 1.0) {
        return Err(CoreError::config(format!("quantile {q} outside (0, 1)")));
    }
    let denom = q * (1.0 - q);
    Ok(((1.0 - 2.0 * q) / denom, 2.0 / denom))
}

/// Stopping rule and scale-prior hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VbOptions {
    pub max_iter: usize,
    /// Tolerance on the max-abs change of `E(β̃)` between sweeps.
    pub tol: f64,
    /// Gamma prior on `1/σ`; both zero gives the flat prior.
    pub c0: f64,
    pub d0: f64,
}

impl Default for VbOptions {
    fn default() -> Self {
        VbOptions {
            max_iter: 1000,
            tol: 1e-6,
            c0: 0.0,
            d0: 0.0,
        }
    }
}

/// All variational expectations of one quantile fit.
#[derive(Debug, Clone)]
pub struct VbState {
    pub e_beta: Array1<f64>,
    pub sigma_beta: Array2<f64>,
    pub e_nu: Array1<f64>,
    pub e_inv_nu: Array1<f64>,
    pub e_inv_sigma: f64,
    pub c1: f64,
    pub d1: f64,
    pub elbo_proxy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub prior_linear: PriorState,
    pub prior_nonlinear: PriorState,
}

/// One quantile-regression problem: design, target, quantile, prior.
pub struct VbProblem<'a> {
    pub f: ArrayView2<'a, f64>,
    pub y: ArrayView1<'a, f64>,
    pub q: f64,
    pub family: PriorFamily,
    /// (columns of the linear block, columns of the nonlinear block).
    pub basis_split: (usize, usize),
    /// Column 0 is an effectively unpenalized intercept that stays outside
    /// the shrinkage hierarchy. It counts toward the linear block size.
    pub intercept: bool,
    /// Scaling for Minnesota-type priors on the linear block (excluding the
    /// intercept column when present).
    pub minnesota: Option<MinnesotaScaling>,
    pub opts: VbOptions,
}

/// Prior precision assigned to unpenalized intercept columns.
const FREE_PRECISION: f64 = 1e-8;

/// Gaussian coefficient update; returns the posterior mean and covariance.
pub fn update_coefficients(
    f: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    ctx: &QuantileContext,
    e_inv_nu: &Array1<f64>,
    e_inv_sigma: f64,
    b0_inv: &Array1<f64>,
) -> Result<(Array1<f64>, Array2<f64>)> {
    let step = coefficient_step(f, y, ctx, e_inv_nu, e_inv_sigma, b0_inv, true)?;
    let inv_l = step.factor.inv_lower()?;
    Ok((step.e_beta, step.factor.inverse(&inv_l)))
}

struct CoefficientStep {
    e_beta: Array1<f64>,
    factor: SpdFactor,
    /// `f_t' Σ̂ f_t` for every design row.
    quad_forms: Array1<f64>,
    /// Diagonal of Σ̂ (only when requested).
    diag_sigma: Option<Array1<f64>>,
}

fn coefficient_step(
    f: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    ctx: &QuantileContext,
    e_inv_nu: &Array1<f64>,
    e_inv_sigma: f64,
    b0_inv: &Array1<f64>,
    want_diag: bool,
) -> Result<CoefficientStep> {
    let (t, d) = (f.nrows(), f.ncols());
    if y.len() != t || e_inv_nu.len() != t || b0_inv.len() != d {
        return Err(CoreError::dimension(format!(
            "coefficient update: T={t}, d={d}, |y|={}, |E(1/ν)|={}, |B0|={}",
            y.len(),
            e_inv_nu.len(),
            b0_inv.len()
        )));
    }
    let scale = e_inv_sigma / ctx.tau_sq;
    let w = e_inv_nu.mapv(|v| v * scale);
    let mut a = weighted_gram(f, &w.view());
    for j in 0..d {
        a[[j, j]] += b0_inv[j];
    }
    // Σ_t f_t (E(1/ν_t) y_t − θ) · E(1/σ)/τ²
    let v = Array1::from_iter(
        y.iter()
            .zip(e_inv_nu.iter())
            .map(|(yt, wt)| scale * (wt * yt - ctx.theta)),
    );
    let rhs = design_weighted_rhs(f, &v);
    let factor = SpdFactor::factor(&a)?;
    let e_beta = factor.solve_vec(&rhs)?;
    if e_beta.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::numerical(
            "update_coefficients",
            "non-finite posterior mean",
        ));
    }
    let quad_forms = factor.quad_forms(f)?;
    let diag_sigma = if want_diag {
        let inv_l = factor.inv_lower()?;
        Some(factor.inverse_diag(&inv_l))
    } else {
        None
    };
    Ok(CoefficientStep {
        e_beta,
        factor,
        quad_forms,
        diag_sigma,
    })
}

/// GIG latent-scale update from the full covariance matrix.
pub fn update_latent_scales(
    f: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    ctx: &QuantileContext,
    e_beta: &Array1<f64>,
    sigma_beta: &Array2<f64>,
    e_inv_sigma: f64,
) -> Result<(Array1<f64>, Array1<f64>)> {
    let quads = quad_forms_from_sigma(f, sigma_beta);
    latent_step(f, y, ctx, e_beta, &quads, e_inv_sigma)
}

fn quad_forms_from_sigma(f: &ArrayView2<f64>, sigma_beta: &Array2<f64>) -> Array1<f64> {
    let fs = f.dot(sigma_beta); // T×d
    Array1::from_iter(
        fs.rows()
            .into_iter()
            .zip(f.rows())
            .map(|(a, b)| a.dot(&b)),
    )
}

fn latent_step(
    f: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    ctx: &QuantileContext,
    e_beta: &Array1<f64>,
    quad_forms: &Array1<f64>,
    e_inv_sigma: f64,
) -> Result<(Array1<f64>, Array1<f64>)> {
    let t = f.nrows();
    let a = e_inv_sigma * (2.0 + ctx.theta * ctx.theta / ctx.tau_sq);
    if !a.is_finite() || a <= 0.0 {
        return Err(CoreError::numerical(
            "update_latent_scales",
            format!("non-positive GIG parameter A = {a}"),
        ));
    }
    let fitted = f.dot(e_beta);
    let mut e_nu = Array1::<f64>::zeros(t);
    let mut e_inv_nu = Array1::<f64>::zeros(t);
    for i in 0..t {
        let resid = y[i] - fitted[i];
        let b = (e_inv_sigma / ctx.tau_sq * (resid * resid + quad_forms[i])).max(B_FLOOR);
        if !b.is_finite() {
            return Err(CoreError::numerical(
                "update_latent_scales",
                format!("non-finite GIG parameter B at t={i}"),
            ));
        }
        // Order-1/2 GIG closed forms: E(ν) = √(B/A) + 1/A, E(1/ν) = √(A/B).
        e_nu[i] = (b / a).sqrt() + 1.0 / a;
        e_inv_nu[i] = (a / b).sqrt();
    }
    Ok((e_nu, e_inv_nu))
}

/// Gamma update of the inverse ALD scale; returns `(c₁, d₁, E(1/σ))`.
pub fn update_sigma(
    f: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    ctx: &QuantileContext,
    e_beta: &Array1<f64>,
    sigma_beta: &Array2<f64>,
    e_nu: &Array1<f64>,
    e_inv_nu: &Array1<f64>,
    c0: f64,
    d0: f64,
) -> Result<(f64, f64, f64)> {
    let quads = quad_forms_from_sigma(f, sigma_beta);
    sigma_step(f, y, ctx, e_beta, &quads, e_nu, e_inv_nu, c0, d0)
}

#[allow(clippy::too_many_arguments)]
fn sigma_step(
    f: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    ctx: &QuantileContext,
    e_beta: &Array1<f64>,
    quad_forms: &Array1<f64>,
    e_nu: &Array1<f64>,
    e_inv_nu: &Array1<f64>,
    c0: f64,
    d0: f64,
) -> Result<(f64, f64, f64)> {
    let t = f.nrows();
    if t == 0 {
        let e = if d0 > 0.0 { c0 / d0 } else { 1.0 };
        return Ok((c0, d0, e));
    }
    let c1 = c0 + 1.5 * t as f64;
    let fitted = f.dot(e_beta);
    let mut acc = 0.0;
    for i in 0..t {
        let resid = y[i] - fitted[i];
        acc += e_inv_nu[i] * (resid * resid + quad_forms[i])
            + 2.0 * ctx.theta * (fitted[i] - y[i])
            + ctx.theta * ctx.theta * e_nu[i];
    }
    let d1 = d0 + e_nu.sum() + acc / (2.0 * ctx.tau_sq);
    if !(d1 > 0.0) {
        return Err(CoreError::numerical(
            "update_sigma",
            format!("non-positive rate d1 = {d1}"),
        ));
    }
    Ok((c1, d1, c1 / d1))
}

/// Stacked prior precision with `offset` leading intercept columns.
fn stacked_precision(
    offset: usize,
    prior_linear: &PriorState,
    prior_nonlinear: &PriorState,
) -> Array1<f64> {
    let tail = prior_precision(prior_linear, prior_nonlinear);
    if offset == 0 {
        return tail;
    }
    let mut out = Array1::<f64>::from_elem(offset + tail.len(), FREE_PRECISION);
    out.slice_mut(ndarray::s![offset..]).assign(&tail);
    out
}

/// Full coordinate-ascent fit for one quantile.
pub fn vb_fit(problem: &VbProblem) -> Result<VbState> {
    vb_fit_from(problem, None)
}

/// Fit with an optional warm start (used by the harness when sweeping the
/// quantile grid on a fixed design).
pub fn vb_fit_from(problem: &VbProblem, warm: Option<&VbState>) -> Result<VbState> {
    let f = &problem.f;
    let y = &problem.y;
    let t = f.nrows();
    let d = f.ncols();
    let (k, m) = problem.basis_split;
    if k + m != d {
        return Err(CoreError::dimension(format!(
            "basis split ({k}, {m}) does not cover {d} design columns"
        )));
    }
    if t < 5 {
        return Err(CoreError::data(format!("need at least 5 observations, got {t}")));
    }
    if f.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(CoreError::data("design or target contains non-finite values"));
    }
    let ctx = QuantileContext::new(problem.q)?;
    let opts = &problem.opts;
    // Intercept columns sit outside the shrinkage hierarchy.
    let offset = usize::from(problem.intercept);
    if k < offset {
        return Err(CoreError::dimension(
            "intercept requested but the linear block is empty".into(),
        ));
    }

    let mut prior_linear;
    let mut prior_nonlinear;
    let mut e_beta;
    let mut e_inv_nu;
    let mut e_nu;
    let mut e_inv_sigma;
    match warm {
        Some(w) if w.e_beta.len() == d => {
            prior_linear = w.prior_linear.clone();
            prior_nonlinear = w.prior_nonlinear.clone();
            e_beta = w.e_beta.clone();
            e_inv_nu = w.e_inv_nu.clone();
            e_nu = w.e_nu.clone();
            e_inv_sigma = w.e_inv_sigma;
        }
        _ => {
            prior_linear = PriorState::init(
                &problem.family,
                Block::Linear,
                k - offset,
                problem.minnesota.as_ref(),
            )?;
            prior_nonlinear = PriorState::init(&problem.family, Block::Nonlinear, m, None)?;
            e_beta = Array1::zeros(d);
            e_inv_nu = Array1::ones(t);
            e_nu = Array1::ones(t);
            e_inv_sigma = 1.0;
        }
    }

    let needs_diag = !matches!(problem.family, PriorFamily::MinnesotaFixed { .. });
    let mut converged = false;
    let mut iterations = 0;
    let mut last_step: Option<CoefficientStep> = None;
    let mut prev_delta = f64::INFINITY;
    for iter in 0..opts.max_iter {
        let b0_inv = stacked_precision(offset, &prior_linear, &prior_nonlinear);
        let step = coefficient_step(f, y, &ctx, &e_inv_nu, e_inv_sigma, &b0_inv, needs_diag)?;
        let delta = step
            .e_beta
            .iter()
            .zip(e_beta.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        e_beta = step.e_beta.clone();

        let (nu, inv_nu) = latent_step(f, y, &ctx, &e_beta, &step.quad_forms, e_inv_sigma)?;
        e_nu = nu;
        e_inv_nu = inv_nu;

        let (_, _, new_inv_sigma) = sigma_step(
            f,
            y,
            &ctx,
            &e_beta,
            &step.quad_forms,
            &e_nu,
            &e_inv_nu,
            opts.c0,
            opts.d0,
        )?;
        e_inv_sigma = new_inv_sigma;

        if let Some(diag) = &step.diag_sigma {
            let e_sq: Vec<f64> = e_beta
                .iter()
                .zip(diag.iter())
                .map(|(mu, var)| mu * mu + var)
                .collect();
            prior_linear = update_prior(&prior_linear, &e_sq[offset..k])?;
            prior_nonlinear = update_prior(&prior_nonlinear, &e_sq[k..])?;
        }

        iterations = iter + 1;
        last_step = Some(step);
        // Two consecutive sweeps below tol/4: the delta sequence is not
        // locally monotone, so the margin keeps a restarted fit within tol.
        if delta < 0.25 * opts.tol && prev_delta < 0.25 * opts.tol && iter > 0 {
            converged = true;
            break;
        }
        prev_delta = delta;
    }

    let step = last_step.expect("max_iter >= 1");
    let inv_l = step.factor.inv_lower()?;
    let sigma_beta = step.factor.inverse(&inv_l);
    let (c1, d1, e_inv_sigma) = sigma_step(
        f,
        y,
        &ctx,
        &e_beta,
        &step.quad_forms,
        &e_nu,
        &e_inv_nu,
        opts.c0,
        opts.d0,
    )?;
    let elbo_proxy = elbo_proxy(
        f,
        y,
        &ctx,
        &e_beta,
        &step.quad_forms,
        &e_nu,
        &e_inv_nu,
        c1,
        d1,
    );
    Ok(VbState {
        e_beta,
        sigma_beta,
        e_nu,
        e_inv_nu,
        e_inv_sigma,
        c1,
        d1,
        elbo_proxy,
        iterations,
        converged,
        prior_linear,
        prior_nonlinear,
    })
}

/// Plug-in expected complete-data log-likelihood (diagnostic only; entropy
/// and prior terms are omitted, and `E(ln ν)` uses `ln E(ν)`).
#[allow(clippy::too_many_arguments)]
fn elbo_proxy(
    f: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    ctx: &QuantileContext,
    e_beta: &Array1<f64>,
    quad_forms: &Array1<f64>,
    e_nu: &Array1<f64>,
    e_inv_nu: &Array1<f64>,
    c1: f64,
    d1: f64,
) -> f64 {
    let t = f.nrows();
    let e_ln_sigma = d1.ln() - digamma(c1);
    let e_inv_sigma = c1 / d1;
    let fitted = f.dot(e_beta);
    let mut ll = 0.0;
    for i in 0..t {
        let resid = y[i] - fitted[i];
        let quad = e_inv_nu[i] * (resid * resid + quad_forms[i])
            + 2.0 * ctx.theta * (fitted[i] - y[i])
            + ctx.theta * ctx.theta * e_nu[i];
        ll += -0.5 * ((2.0 * std::f64::consts::PI * ctx.tau_sq).ln() + e_ln_sigma + e_nu[i].ln())
            - e_inv_sigma * quad / (2.0 * ctx.tau_sq);
    }
    ll
}

/// Variational Bayes for a plain Gaussian-likelihood regression with the same
/// prior module (the linearized-posterior-summary path).
///
/// `y = f'α + ε`, `ε ~ N(0, σ²)`, `1/σ² ~ Gamma(c0, d0)`; returns the
/// coefficient posterior and `E(1/σ²)`.
pub fn gaussian_vb_fit(
    f: &ArrayView2<f64>,
    y: &ArrayView1<f64>,
    family: &PriorFamily,
    intercept: bool,
    opts: &VbOptions,
) -> Result<VbState> {
    let t = f.nrows();
    let d = f.ncols();
    if t < 5 {
        return Err(CoreError::data(format!("need at least 5 observations, got {t}")));
    }
    let offset = usize::from(intercept);
    if d < offset {
        return Err(CoreError::dimension("empty design with intercept".into()));
    }
    let mut prior = PriorState::init(family, Block::Linear, d - offset, None)?;
    let prior_nl = PriorState::init(family, Block::Nonlinear, 0, None)?;
    let mut e_beta = Array1::<f64>::zeros(d);
    let mut e_inv_sigma = 1.0;
    // Gaussian likelihood: a unit-scale mixture with θ = 0, τ² = 1, ν ≡ 1.
    let ctx = QuantileContext {
        q: 0.5,
        theta: 0.0,
        tau_sq: 1.0,
    };
    let ones = Array1::<f64>::ones(t);
    let (c0, d0) = (opts.c0.max(1e-3), opts.d0.max(1e-3));
    let mut converged = false;
    let mut iterations = 0;
    let mut last: Option<CoefficientStep> = None;
    let mut c1 = c0;
    let mut d1 = d0;
    for iter in 0..opts.max_iter {
        let b0_inv = stacked_precision(offset, &prior, &prior_nl);
        let step = coefficient_step(f, y, &ctx, &ones, e_inv_sigma, &b0_inv, true)?;
        let delta = step
            .e_beta
            .iter()
            .zip(e_beta.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        e_beta = step.e_beta.clone();

        // Conjugate Gamma update for the Gaussian error precision.
        let fitted = f.dot(&e_beta);
        let ssr: f64 = y
            .iter()
            .zip(fitted.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            + step.quad_forms.sum();
        c1 = c0 + t as f64 / 2.0;
        d1 = d0 + ssr / 2.0;
        e_inv_sigma = c1 / d1;

        let diag = step.diag_sigma.as_ref().expect("diag requested");
        let e_sq: Vec<f64> = e_beta
            .iter()
            .zip(diag.iter())
            .map(|(mu, var)| mu * mu + var)
            .collect();
        prior = update_prior(&prior, &e_sq[offset..])?;

        iterations = iter + 1;
        last = Some(step);
        if delta < opts.tol && iter > 0 {
            converged = true;
            break;
        }
    }
    let step = last.expect("max_iter >= 1");
    let inv_l = step.factor.inv_lower()?;
    let sigma_beta = step.factor.inverse(&inv_l);
    Ok(VbState {
        e_beta,
        sigma_beta,
        e_nu: Array1::ones(t),
        e_inv_nu: Array1::ones(t),
        e_inv_sigma,
        c1,
        d1,
        elbo_proxy: f64::NAN,
        iterations,
        converged,
        prior_linear: prior,
        prior_nonlinear: prior_nl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use ndarray::array;
    use rand::prelude::*;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn mixture_constants() {
        // q = 1/2: symmetry forces θ = 0, τ² = 2/(1/4) = 8.
        let (theta, tau_sq) = ald_mixture_constants(0.5).unwrap();
        assert_abs_diff_eq!(theta, 0.0);
        assert_abs_diff_eq!(tau_sq, 8.0);
        // q = 0.1: θ = 0.8/0.09, τ² = 2/0.09.
        let (theta, tau_sq) = ald_mixture_constants(0.1).unwrap();
        assert_relative_eq!(theta, 8.888888888888889, max_relative = 1e-14);
        assert_relative_eq!(tau_sq, 22.22222222222222, max_relative = 1e-14);
        // Antisymmetry.
        let (t25, _) = ald_mixture_constants(0.25).unwrap();
        let (t75, _) = ald_mixture_constants(0.75).unwrap();
        assert_abs_diff_eq!(t25, -t75, epsilon = 1e-14);
        assert!(ald_mixture_constants(0.0).is_err());
        assert!(ald_mixture_constants(1.0).is_err());
    }

    #[test]
    fn ald_density_quantile_oracle() {
        // ∫_{-∞}^0 q(1-q) exp(-ρ_q(ε)) dε = q, checked by quadrature at q=0.1.
        let q = 0.1;
        let rho = |e: f64| e * (q - if e < 0.0 { 1.0 } else { 0.0 });
        let density = |e: f64| q * (1.0 - q) * (-rho(e)).exp();
        let mut mass = 0.0;
        let n = 400_000;
        let (lo, hi) = (-80.0, 0.0);
        let h = (hi - lo) / n as f64;
        for i in 0..=n {
            let e = lo + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            mass += w * density(e) * h;
        }
        assert_relative_eq!(mass, q, max_relative = 1e-6);
    }

    #[test]
    fn coefficient_update_hand_example() {
        // One column, two observations, all scale expectations explicit.
        let f = array![[1.0], [2.0]];
        let y = array![1.5, 0.5];
        let ctx = QuantileContext::new(0.3).unwrap();
        let e_inv_nu = array![0.8, 1.4];
        let e_inv_sigma = 0.9;
        let b0 = array![2.5];
        let scale = e_inv_sigma / ctx.tau_sq;
        let a = scale * (0.8 * 1.0 + 1.4 * 4.0) + 2.5;
        let rhs = scale * (1.0 * (0.8 * 1.5 - ctx.theta) + 2.0 * (1.4 * 0.5 - ctx.theta));
        let (mu, sigma) = update_coefficients(&f.view(), &y.view(), &ctx, &e_inv_nu, e_inv_sigma, &b0).unwrap();
        assert_relative_eq!(mu[0], rhs / a, max_relative = 1e-12);
        assert_relative_eq!(sigma[[0, 0]], 1.0 / a, max_relative = 1e-12);
    }

    #[test]
    fn infinite_prior_precision_kills_coefficients() {
        let f = array![[1.0, 0.3], [0.5, -1.0], [2.0, 0.4]];
        let y = array![1.0, 2.0, 3.0];
        let ctx = QuantileContext::new(0.5).unwrap();
        let e_inv_nu = Array1::ones(3);
        let b0 = array![1e14, 1e14];
        let (mu, _) = update_coefficients(&f.view(), &y.view(), &ctx, &e_inv_nu, 1.0, &b0).unwrap();
        assert!(mu.iter().all(|v| v.abs() < 1e-10), "{mu:?}");
    }

    #[test]
    fn flat_prior_median_matches_weighted_least_squares() {
        // q = 0.5 (θ = 0) with constant latent scales reduces to ridge-free WLS.
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let t = 60;
        let f = Array2::from_shape_fn((t, 3), |_| rng.random::<f64>() - 0.5);
        let beta_true = array![1.0, -2.0, 0.5];
        let y = f.dot(&beta_true);
        let ctx = QuantileContext::new(0.5).unwrap();
        let e_inv_nu = Array1::ones(t);
        let b0 = Array1::from_elem(3, 1e-10);
        let (mu, _) = update_coefficients(&f.view(), &y.view(), &ctx, &e_inv_nu, 1.0, &b0).unwrap();
        for j in 0..3 {
            assert_relative_eq!(mu[j], beta_true[j], max_relative = 1e-6);
        }
    }

    /// Trapezoid quadrature of GIG(1/2, a, b) moments on the log scale.
    fn gig_moment_quadrature(j: f64, a: f64, b: f64) -> f64 {
        let log_pdf = |x: f64| -0.5 * x.ln() - 0.5 * (a * x + b / x);
        let n = 200_000;
        let (lo, hi) = (-60.0, 60.0); // u = ln x
        let h = (hi - lo) / n as f64;
        let mut norm = 0.0;
        let mut mom = 0.0;
        for i in 0..=n {
            let u = lo + i as f64 * h;
            let x = u.exp();
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            let p = (log_pdf(x) + u).exp(); // include Jacobian du = dx/x
            norm += w * p * h;
            mom += w * p * x.powf(j) * h;
        }
        mom / norm
    }

    #[test]
    fn latent_moments_match_quadrature() {
        // Fixed A = B = 1: compare both moments against 1e-6 quadrature.
        let e_nu = crate::gig::gig_moment(1.0, 1.0, 1.0);
        let e_inv = crate::gig::gig_moment(-1.0, 1.0, 1.0);
        assert_relative_eq!(e_nu, gig_moment_quadrature(1.0, 1.0, 1.0), max_relative = 1e-6);
        assert_relative_eq!(e_inv, gig_moment_quadrature(-1.0, 1.0, 1.0), max_relative = 1e-6);
    }

    #[test]
    fn latent_update_moment_inequality_and_variance_term() {
        let f = array![[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let y = array![0.2, -0.1, 0.4];
        let ctx = QuantileContext::new(0.2).unwrap();
        let e_beta = array![0.1, -0.2];
        let sigma = array![[0.05, 0.01], [0.01, 0.08]];
        let (e_nu, e_inv_nu) =
            update_latent_scales(&f.view(), &y.view(), &ctx, &e_beta, &sigma, 1.3).unwrap();
        for t in 0..3 {
            assert!(e_nu[t] * e_inv_nu[t] >= 1.0);
        }
        // Residual → 0 leaves B dominated by the quadratic-form term.
        let y_fit = f.dot(&e_beta);
        let (_, e_inv_nu0) =
            update_latent_scales(&f.view(), &y_fit.view(), &ctx, &e_beta, &sigma, 1.3).unwrap();
        let quads = quad_forms_from_sigma(&f.view(), &sigma);
        for t in 0..3 {
            let b_expect = 1.3 / ctx.tau_sq * quads[t];
            let a = 1.3 * (2.0 + ctx.theta * ctx.theta / ctx.tau_sq);
            assert_relative_eq!(e_inv_nu0[t], (a / b_expect).sqrt(), max_relative = 1e-10);
        }
    }

    #[test]
    fn sigma_update_degenerate_and_perfect_fit() {
        let ctx = QuantileContext::new(0.5).unwrap();
        // T = 0 returns the prior.
        let f0 = Array2::<f64>::zeros((0, 1));
        let y0 = Array1::<f64>::zeros(0);
        let (c1, d1, _) = update_sigma(
            &f0.view(),
            &y0.view(),
            &ctx,
            &array![0.0],
            &array![[0.0]],
            &Array1::zeros(0),
            &Array1::zeros(0),
            0.3,
            0.7,
        )
        .unwrap();
        assert_eq!((c1, d1), (0.3, 0.7));

        // Perfect fit at the median with Σ → 0: d1 = d0 + Σ E(ν).
        let f = array![[1.0], [2.0], [3.0]];
        let beta = array![0.5];
        let y = f.dot(&beta);
        let e_nu = array![1.1, 0.9, 1.3];
        let e_inv_nu = array![1.0, 1.2, 0.8];
        let (c1, d1, _) = update_sigma(
            &f.view(),
            &y.view(),
            &ctx,
            &beta,
            &array![[0.0]],
            &e_nu,
            &e_inv_nu,
            0.0,
            0.25,
        )
        .unwrap();
        assert_abs_diff_eq!(c1, 4.5);
        assert_relative_eq!(d1, 0.25 + 1.1 + 0.9 + 1.3, max_relative = 1e-12);
    }

    #[test]
    fn sigma_update_two_observation_hand_oracle() {
        let ctx = QuantileContext::new(0.3).unwrap();
        let f = array![[1.0], [2.0]];
        let y = array![0.7, -0.4];
        let beta = array![0.2];
        let sigma = array![[0.03]];
        let e_nu = array![1.4, 0.6];
        let e_inv_nu = array![0.9, 2.0];
        let (c0, d0) = (0.1, 0.2);
        // Scalar arithmetic, spelled out.
        let fitted = [0.2, 0.4];
        let quads = [0.03, 0.12];
        let mut acc = 0.0;
        for t in 0..2 {
            let r: f64 = y[t] - fitted[t];
            acc += e_inv_nu[t] * (r * r + quads[t])
                + 2.0 * ctx.theta * (fitted[t] - y[t])
                + ctx.theta * ctx.theta * e_nu[t];
        }
        let d1_expect = d0 + (1.4 + 0.6) + acc / (2.0 * ctx.tau_sq);
        let (c1, d1, e_inv_sigma) = update_sigma(
            &f.view(),
            &y.view(),
            &ctx,
            &beta,
            &sigma,
            &e_nu,
            &e_inv_nu,
            c0,
            d0,
        )
        .unwrap();
        assert_abs_diff_eq!(c1, 0.1 + 3.0);
        assert_relative_eq!(d1, d1_expect, max_relative = 1e-12);
        assert_relative_eq!(e_inv_sigma, c1 / d1, max_relative = 1e-14);
    }

    fn synthetic_problem(
        t: usize,
        seed: u64,
    ) -> (Array2<f64>, Array1<f64>, Array1<f64>) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let f = Array2::from_shape_fn((t, 4), |(_, j)| {
            if j == 0 {
                1.0
            } else {
                normal.sample(&mut rng)
            }
        });
        let beta_true = array![0.5, 2.0, -1.0, 0.0];
        let noise: Array1<f64> = (0..t).map(|_| 0.3 * normal.sample(&mut rng)).collect();
        let y = f.dot(&beta_true) + &noise;
        (f, y, beta_true)
    }

    #[test]
    fn strong_signal_matches_ols_at_median() {
        let (f, y, _) = synthetic_problem(400, 10);
        let problem = VbProblem {
            f: f.view(),
            y: y.view(),
            q: 0.5,
            family: PriorFamily::ridge(),
            basis_split: (4, 0),
            intercept: false,
            minnesota: None,
            opts: VbOptions::default(),
        };
        let fit = vb_fit(&problem).unwrap();
        assert!(fit.converged, "did not converge in {}", fit.iterations);
        // OLS oracle
        let xtx = f.t().dot(&f);
        let xty = f.t().dot(&y);
        let ols = SpdFactor::factor(&xtx).unwrap().solve_vec(&xty).unwrap();
        for j in 1..3 {
            assert_relative_eq!(fit.e_beta[j], ols[j], max_relative = 0.05);
        }
    }

    #[test]
    fn permutation_equivariance() {
        let (f, y, _) = synthetic_problem(120, 11);
        let perm = [2usize, 0, 3, 1];
        let mut f_perm = Array2::<f64>::zeros(f.raw_dim());
        for (new_j, &old_j) in perm.iter().enumerate() {
            f_perm
                .index_axis_mut(ndarray::Axis(1), new_j)
                .assign(&f.index_axis(ndarray::Axis(1), old_j));
        }
        let fit_a = vb_fit(&VbProblem {
            f: f.view(),
            y: y.view(),
            q: 0.3,
            family: PriorFamily::ridge(),
            basis_split: (4, 0),
            intercept: false,
            minnesota: None,
            opts: VbOptions {
                max_iter: 500,
                tol: 1e-8,
                ..VbOptions::default()
            },
        })
        .unwrap();
        let fit_b = vb_fit(&VbProblem {
            f: f_perm.view(),
            y: y.view(),
            q: 0.3,
            family: PriorFamily::ridge(),
            basis_split: (4, 0),
            intercept: false,
            minnesota: None,
            opts: VbOptions {
                max_iter: 500,
                tol: 1e-8,
                ..VbOptions::default()
            },
        })
        .unwrap();
        for (new_j, &old_j) in perm.iter().enumerate() {
            assert_relative_eq!(fit_b.e_beta[new_j], fit_a.e_beta[old_j], max_relative = 1e-6);
        }
    }

    #[test]
    fn median_fit_is_calibrated_on_symmetric_noise() {
        let (f, y, beta_true) = synthetic_problem(2000, 12);
        let problem = VbProblem {
            f: f.view(),
            y: y.view(),
            q: 0.5,
            family: PriorFamily::ridge(),
            basis_split: (4, 0),
            intercept: false,
            minnesota: None,
            opts: VbOptions::default(),
        };
        let fit = vb_fit(&problem).unwrap();
        // Conditional median = intercept at x = 0: noise is symmetric.
        assert_relative_eq!(fit.e_beta[0], beta_true[0], max_relative = 0.05);
        // In-sample coverage of the median line.
        let fitted = f.dot(&fit.e_beta);
        let below = y
            .iter()
            .zip(fitted.iter())
            .filter(|(a, b)| a <= b)
            .count() as f64
            / y.len() as f64;
        assert!((below - 0.5).abs() < 0.03, "coverage {below}");
    }

    #[test]
    fn rerun_from_fixed_point_stays_put() {
        let (f, y, _) = synthetic_problem(150, 13);
        let problem = VbProblem {
            f: f.view(),
            y: y.view(),
            q: 0.25,
            family: PriorFamily::horseshoe(),
            basis_split: (4, 0),
            intercept: false,
            minnesota: None,
            opts: VbOptions::default(),
        };
        let fit = vb_fit(&problem).unwrap();
        assert!(fit.converged);
        let refit = vb_fit_from(&problem, Some(&fit)).unwrap();
        let delta = refit
            .e_beta
            .iter()
            .zip(fit.e_beta.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(delta < problem.opts.tol, "moved by {delta}");
    }

    #[test]
    fn non_finite_input_names_the_failure() {
        let f = array![[1.0], [2.0], [3.0], [4.0], [5.0]];
        let mut y = array![1.0, 2.0, 3.0, 4.0, 5.0];
        y[2] = f64::NAN;
        let problem = VbProblem {
            f: f.view(),
            y: y.view(),
            q: 0.5,
            family: PriorFamily::ridge(),
            basis_split: (1, 0),
            intercept: false,
            minnesota: None,
            opts: VbOptions::default(),
        };
        let err = vb_fit(&problem).unwrap_err().to_string();
        assert!(err.contains("non-finite"), "{err}");
    }

    #[test]
    fn gaussian_path_recovers_regression() {
        let (f, y, beta_true) = synthetic_problem(300, 14);
        let fit = gaussian_vb_fit(
            &f.view(),
            &y.view(),
            &PriorFamily::horseshoe(),
            true,
            &VbOptions::default(),
        )
        .unwrap();
        for j in 0..3 {
            assert_relative_eq!(fit.e_beta[j], beta_true[j], max_relative = 0.1);
        }
        // Error precision near 1/0.09.
        assert_relative_eq!(fit.e_inv_sigma, 1.0 / 0.09, max_relative = 0.25);
    }
}
