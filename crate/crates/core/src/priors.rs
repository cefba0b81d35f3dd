//! Global-local shrinkage priors and their variational updates.
//!
//! Every family represents the coefficient prior as
//! `β_j | ψ_j, λ ~ N(0, λ ψ_j)` per block (linear and nonlinear blocks carry
//! independent states), so the prior precision contribution of column j is
//! always `E(1/λ) · E(1/ψ_j)`. The families differ in the mixing laws:
//!
//! * Ridge — ψ_j ≡ 1, λ ~ InvGamma(e0, e1).
//! * Horseshoe — √ψ_j, √λ half-Cauchy, handled through the inverse-Gamma
//!   mixture representation (a_j ~ IG(1/2, 1), ψ_j | a_j ~ IG(1/2, 1/a_j)).
//! * Normal-Gamma — ψ_j ~ G(ϑ, ϑ/2), λ ~ G(c0, d0); locals update through
//!   GIG conditionals. The Lasso is the ϑ = 1 special case.
//! * Dirichlet-Laplace — ψ_j = φ_j² ψ̃_j with φ ~ Dir(α,…,α), ψ̃_j ~ Exp(1/2),
//!   √λ ~ G(nα, 1/2); φ is refreshed from its conditional expectations and
//!   renormalized each sweep.
//! * Minnesota (fixed) — λ = λ₁, ψ_j = λ₂ σ_y²/σ_j² (λ₂ = 1 on the own lag);
//!   no updates.
//! * Minnesota-Gamma — the same scaling with λ₁, λ₂ given Gamma priors and
//!   GIG-conditional updates.
//!
//! The updates consume `E(β_j²) = E(β_j)² + Var(β_j)` from the current
//! coefficient approximation. The Dirichlet-Laplace φ update needs `E|β_j|`,
//! which is approximated by `√E(β_j²)` (exact in the signal limit where
//! |mean| ≫ sd; within √(2/π) of the exact folded-normal value at the null).

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::gig::{gig_moment, gig_moment_general};
use crate::ingest::Panel;
use crate::linalg::SpdFactor;

const B_FLOOR: f64 = 1e-12;

/// Prior family with hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum PriorFamily {
    Ridge { e0: f64, e1: f64 },
    Horseshoe,
    NormalGamma { theta: f64, c0: f64, d0: f64 },
    Lasso { c0: f64, d0: f64 },
    /// `alpha = None` uses the block dimension default 1/n.
    DirichletLaplace { alpha: Option<f64> },
    MinnesotaFixed { l1: f64, l2: f64 },
    MinnesotaGamma { a1: f64, b1: f64, a2: f64, b2: f64 },
}

impl PriorFamily {
    pub fn ridge() -> Self {
        PriorFamily::Ridge { e0: 0.01, e1: 0.01 }
    }

    pub fn horseshoe() -> Self {
        PriorFamily::Horseshoe
    }

    pub fn normal_gamma() -> Self {
        PriorFamily::NormalGamma {
            theta: 0.1,
            c0: 0.01,
            d0: 0.01,
        }
    }

    pub fn lasso() -> Self {
        PriorFamily::Lasso { c0: 0.01, d0: 0.01 }
    }

    pub fn dirichlet_laplace() -> Self {
        PriorFamily::DirichletLaplace { alpha: None }
    }

    pub fn minnesota_fixed() -> Self {
        PriorFamily::MinnesotaFixed { l1: 0.04, l2: 0.25 }
    }

    pub fn minnesota_gamma() -> Self {
        PriorFamily::MinnesotaGamma {
            a1: 0.01,
            b1: 0.01,
            a2: 0.01,
            b2: 0.01,
        }
    }

    /// Short identifier used in model ids and reports.
    pub fn tag(&self) -> &'static str {
        match self {
            PriorFamily::Ridge { .. } => "ridge",
            PriorFamily::Horseshoe => "hs",
            PriorFamily::NormalGamma { .. } => "ng",
            PriorFamily::Lasso { .. } => "lasso",
            PriorFamily::DirichletLaplace { .. } => "dl",
            PriorFamily::MinnesotaFixed { .. } => "minnfixed",
            PriorFamily::MinnesotaGamma { .. } => "minngamma",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        Ok(match tag {
            "ridge" => Self::ridge(),
            "hs" | "horseshoe" => Self::horseshoe(),
            "ng" | "normal_gamma" => Self::normal_gamma(),
            "lasso" => Self::lasso(),
            "dl" | "dirichlet_laplace" => Self::dirichlet_laplace(),
            "minnfixed" | "minnesota" => Self::minnesota_fixed(),
            "minngamma" | "minnesota_gamma" => Self::minnesota_gamma(),
            other => return Err(CoreError::config(format!("unknown prior tag {other:?}"))),
        })
    }

    pub fn needs_minnesota_scales(&self) -> bool {
        matches!(
            self,
            PriorFamily::MinnesotaFixed { .. } | PriorFamily::MinnesotaGamma { .. }
        )
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            PriorFamily::Ridge { e0, e1 } => e0 > 0.0 && e1 > 0.0,
            PriorFamily::Horseshoe => true,
            PriorFamily::NormalGamma { theta, c0, d0 } => theta > 0.0 && c0 > 0.0 && d0 > 0.0,
            PriorFamily::Lasso { c0, d0 } => c0 > 0.0 && d0 > 0.0,
            PriorFamily::DirichletLaplace { alpha } => alpha.map_or(true, |a| a > 0.0),
            PriorFamily::MinnesotaFixed { l1, l2 } => l1 > 0.0 && l2 > 0.0,
            PriorFamily::MinnesotaGamma { a1, b1, a2, b2 } => {
                a1 > 0.0 && b1 > 0.0 && a2 > 0.0 && b2 > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(CoreError::config(format!(
                "prior {:?} has a non-positive hyperparameter",
                self.tag()
            )))
        }
    }
}

/// Which coefficient block a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Linear,
    Nonlinear,
}

/// Minnesota variance scaling of one block: `ratios[j] = σ_y²/σ_j²` and the
/// own-lag column index, if the block contains it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinnesotaScaling {
    pub ratios: Vec<f64>,
    pub own_lag: Option<usize>,
}

impl MinnesotaScaling {
    pub fn unit(n: usize) -> Self {
        MinnesotaScaling {
            ratios: vec![1.0; n],
            own_lag: None,
        }
    }
}

/// Family-specific latent expectations.
#[derive(Debug, Clone, Serialize, Deserialize)]
enum Aux {
    None,
    Horseshoe {
        e_inv_a: Vec<f64>,
        e_inv_b: f64,
    },
    DirichletLaplace {
        phi: Vec<f64>,
        alpha: f64,
    },
    Minnesota {
        scaling: MinnesotaScaling,
        e_inv_l1: f64,
        e_inv_l2: f64,
        fixed: bool,
    },
}

/// Per-block prior state: the expectations that define the prior precision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriorState {
    pub family: PriorFamily,
    pub block: Block,
    /// E(1/ψ_j) per column.
    pub e_inv_psi: Vec<f64>,
    /// E(1/λ) for the block.
    pub e_inv_lambda: f64,
    aux: Aux,
}

impl PriorState {
    /// Fresh state in the documented high-shrinkage initialization:
    /// E(1/ψ) = 1 and E(1/λ) = 100, except Minnesota-type states which start
    /// at their (fixed or prior-mean) hyperparameter values.
    pub fn init(
        family: &PriorFamily,
        block: Block,
        n: usize,
        minnesota: Option<&MinnesotaScaling>,
    ) -> Result<Self> {
        family.validate()?;
        let default = PriorState {
            family: family.clone(),
            block,
            e_inv_psi: vec![1.0; n],
            e_inv_lambda: 100.0,
            aux: Aux::None,
        };
        let state = match family {
            PriorFamily::Ridge { .. } | PriorFamily::NormalGamma { .. } | PriorFamily::Lasso { .. } => {
                default
            }
            PriorFamily::Horseshoe => PriorState {
                aux: Aux::Horseshoe {
                    e_inv_a: vec![1.0; n],
                    e_inv_b: 1.0,
                },
                ..default
            },
            PriorFamily::DirichletLaplace { alpha } => {
                let a = alpha.unwrap_or(1.0 / n.max(1) as f64);
                PriorState {
                    aux: Aux::DirichletLaplace {
                        phi: vec![1.0 / n.max(1) as f64; n],
                        alpha: a,
                    },
                    ..default
                }
            }
            PriorFamily::MinnesotaFixed { l1, l2 } => {
                let scaling = resolve_scaling(minnesota, n)?;
                let e_inv_psi = minnesota_inv_psi(&scaling, 1.0 / l2);
                PriorState {
                    family: family.clone(),
                    block,
                    e_inv_psi,
                    e_inv_lambda: 1.0 / l1,
                    aux: Aux::Minnesota {
                        scaling,
                        e_inv_l1: 1.0 / l1,
                        e_inv_l2: 1.0 / l2,
                        fixed: true,
                    },
                }
            }
            PriorFamily::MinnesotaGamma { .. } => {
                let scaling = resolve_scaling(minnesota, n)?;
                let (l1, l2) = (0.04, 0.25);
                let e_inv_psi = minnesota_inv_psi(&scaling, 1.0 / l2);
                PriorState {
                    family: family.clone(),
                    block,
                    e_inv_psi,
                    e_inv_lambda: 1.0 / l1,
                    aux: Aux::Minnesota {
                        scaling,
                        e_inv_l1: 1.0 / l1,
                        e_inv_l2: 1.0 / l2,
                        fixed: false,
                    },
                }
            }
        };
        Ok(state)
    }

    pub fn dim(&self) -> usize {
        self.e_inv_psi.len()
    }

    /// Diagonal prior precision contribution of this block.
    pub fn precision_diag(&self) -> Array1<f64> {
        Array1::from_iter(self.e_inv_psi.iter().map(|p| p * self.e_inv_lambda))
    }

    /// Mean log prior variance of the block (the shrinkage diagnostic).
    pub fn mean_log_variance(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        let sum: f64 = self
            .e_inv_psi
            .iter()
            .map(|p| -(p * self.e_inv_lambda).ln())
            .sum();
        sum / self.dim() as f64
    }
}

fn resolve_scaling(minnesota: Option<&MinnesotaScaling>, n: usize) -> Result<MinnesotaScaling> {
    let scaling = minnesota.cloned().unwrap_or_else(|| MinnesotaScaling::unit(n));
    if scaling.ratios.len() != n {
        return Err(CoreError::dimension(format!(
            "Minnesota scaling has {} ratios for a block of {n} columns",
            scaling.ratios.len()
        )));
    }
    if scaling.ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(CoreError::data("Minnesota ratios must be positive"));
    }
    Ok(scaling)
}

/// E(1/ψ_j) under the Minnesota scaling: own lag gets λ₂ = 1.
fn minnesota_inv_psi(scaling: &MinnesotaScaling, e_inv_l2: f64) -> Vec<f64> {
    scaling
        .ratios
        .iter()
        .enumerate()
        .map(|(j, r)| {
            if Some(j) == scaling.own_lag {
                1.0 / r
            } else {
                e_inv_l2 / r
            }
        })
        .collect()
}

/// Stacked diagonal prior precision `B₀⁻¹` in (linear, nonlinear) order.
pub fn prior_precision(state_linear: &PriorState, state_nonlinear: &PriorState) -> Array1<f64> {
    let mut out = Array1::<f64>::zeros(state_linear.dim() + state_nonlinear.dim());
    out.slice_mut(ndarray::s![..state_linear.dim()])
        .assign(&state_linear.precision_diag());
    out.slice_mut(ndarray::s![state_linear.dim()..])
        .assign(&state_nonlinear.precision_diag());
    out
}

/// Variational update of the prior hyperparameters given the current second
/// moments `E(β_j²)` of the block's coefficients.
///
/// The closed-form expectation sweeps are iterated to the subproblem's fixed
/// point (the hyperparameter block is cheap next to the coefficient solve, and
/// exact subproblem solves are themselves valid coordinate ascent).
pub fn update_prior(state: &PriorState, e_coef_sq: &[f64]) -> Result<PriorState> {
    if e_coef_sq.len() != state.dim() {
        return Err(CoreError::dimension(format!(
            "E(β²) has {} entries for a block of {}",
            e_coef_sq.len(),
            state.dim()
        )));
    }
    if e_coef_sq.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(CoreError::numerical(
            "update_prior",
            "non-finite or negative E(coefficient²)",
        ));
    }
    if matches!(state.family, PriorFamily::MinnesotaFixed { .. }) {
        return Ok(state.clone());
    }
    let mut current = state.clone();
    for _ in 0..500 {
        let next = sweep_once(&current, e_coef_sq)?;
        let mut delta: f64 = rel_change(current.e_inv_lambda, next.e_inv_lambda);
        for (a, b) in current.e_inv_psi.iter().zip(&next.e_inv_psi) {
            delta = delta.max(rel_change(*a, *b));
        }
        current = next;
        if delta < 1e-13 {
            break;
        }
    }
    Ok(current)
}

fn rel_change(old: f64, new: f64) -> f64 {
    (new - old).abs() / (old.abs() + 1e-300)
}

/// One pass of the closed-form expectation updates.
fn sweep_once(state: &PriorState, e_coef_sq: &[f64]) -> Result<PriorState> {
    let n = state.dim();
    let nf = n as f64;
    let mut next = state.clone();
    match (&state.family, &state.aux) {
        (PriorFamily::Ridge { e0, e1 }, _) => {
            let ssq: f64 = e_coef_sq.iter().sum();
            next.e_inv_lambda = (e0 + nf / 2.0) / (e1 + ssq / 2.0);
        }
        (PriorFamily::Horseshoe, Aux::Horseshoe { e_inv_a, e_inv_b }) => {
            let mut new_inv_psi = Vec::with_capacity(n);
            let mut new_inv_a = Vec::with_capacity(n);
            for j in 0..n {
                let inv_psi = 1.0 / (e_inv_a[j] + 0.5 * state.e_inv_lambda * e_coef_sq[j]);
                new_inv_a.push(1.0 / (1.0 + inv_psi));
                new_inv_psi.push(inv_psi);
            }
            let cross: f64 = new_inv_psi
                .iter()
                .zip(e_coef_sq)
                .map(|(p, b)| p * b)
                .sum();
            let e_inv_lambda = ((nf + 1.0) / 2.0) / (e_inv_b + 0.5 * cross);
            next.e_inv_psi = new_inv_psi;
            next.e_inv_lambda = e_inv_lambda;
            next.aux = Aux::Horseshoe {
                e_inv_a: new_inv_a,
                e_inv_b: 1.0 / (1.0 + e_inv_lambda),
            };
        }
        (PriorFamily::NormalGamma { c0, d0, .. }, _) | (PriorFamily::Lasso { c0, d0 }, _) => {
            // The Lasso is the ϑ = 1 case of the Normal-Gamma hierarchy.
            let theta = match &state.family {
                PriorFamily::NormalGamma { theta, .. } => *theta,
                _ => 1.0,
            };
            let mut new_inv_psi = Vec::with_capacity(n);
            for &b_sq in e_coef_sq {
                let b = (state.e_inv_lambda * b_sq).max(B_FLOOR);
                new_inv_psi.push(gig_moment_general(theta - 0.5, theta, b, -1.0));
            }
            let cross: f64 = new_inv_psi
                .iter()
                .zip(e_coef_sq)
                .map(|(p, bsq)| p * bsq)
                .sum();
            next.e_inv_psi = new_inv_psi;
            next.e_inv_lambda =
                gig_moment_general(c0 - nf / 2.0, 2.0 * d0, cross.max(B_FLOOR), -1.0);
        }
        (PriorFamily::DirichletLaplace { .. }, Aux::DirichletLaplace { phi, alpha }) => {
            // E|β_j| ≈ √E(β_j²); see the module docs.
            let abs: Vec<f64> = e_coef_sq.iter().map(|v| v.sqrt().max(1e-10)).collect();
            let cross: f64 = abs.iter().zip(phi).map(|(a, p)| a / p.max(1e-300)).sum();
            // √λ ~ GIG(nα - n, 1, 2Σ|β_j|/φ_j): E(1/λ) is its -2nd moment.
            let e_inv_lambda = gig_moment_general(
                alpha * nf - nf,
                1.0,
                (2.0 * cross).max(B_FLOOR),
                -2.0,
            );
            // φ_j ∝ E(T_j), T_j ~ GIG(α-1, 1, 2|β_j|), renormalized.
            let mut t_means = Vec::with_capacity(n);
            for a in &abs {
                t_means.push(gig_moment_general(alpha - 1.0, 1.0, (2.0 * a).max(B_FLOOR), 1.0));
            }
            let total: f64 = t_means.iter().sum();
            let new_phi: Vec<f64> = t_means.iter().map(|t| (t / total).max(1e-12)).collect();
            // ψ̃_j ~ GIG(1/2, 1, E(β_j²)·E(1/λ)/φ_j²); combined ψ_j = φ_j² ψ̃_j.
            let mut new_inv_psi = Vec::with_capacity(n);
            for j in 0..n {
                let b = (e_coef_sq[j] * e_inv_lambda / (new_phi[j] * new_phi[j])).max(B_FLOOR);
                let e_inv_psi_tilde = gig_moment(-1.0, 1.0, b);
                new_inv_psi.push(e_inv_psi_tilde / (new_phi[j] * new_phi[j]));
            }
            next.e_inv_psi = new_inv_psi;
            next.e_inv_lambda = e_inv_lambda;
            next.aux = Aux::DirichletLaplace {
                phi: new_phi,
                alpha: *alpha,
            };
        }
        (
            PriorFamily::MinnesotaFixed { .. },
            Aux::Minnesota { .. },
        ) => {
            // Fixed hyperparameters: the update is the identity map.
        }
        (
            PriorFamily::MinnesotaGamma { a1, b1, a2, b2 },
            Aux::Minnesota {
                scaling,
                e_inv_l1,
                e_inv_l2,
                fixed: false,
            },
        ) => {
            let own = scaling.own_lag;
            let mut cross1 = 0.0; // Σ E(β²) E(1/l2_j) / ratio_j
            let mut n_other = 0.0;
            let mut cross2 = 0.0; // Σ_{j≠own} E(β²) E(1/l1) / ratio_j
            for j in 0..n {
                let r = scaling.ratios[j];
                if Some(j) == own {
                    cross1 += e_coef_sq[j] / r;
                } else {
                    cross1 += e_coef_sq[j] * e_inv_l2 / r;
                    cross2 += e_coef_sq[j] * e_inv_l1 / r;
                    n_other += 1.0;
                }
            }
            let new_inv_l1 =
                gig_moment_general(a1 - nf / 2.0, 2.0 * b1, cross1.max(B_FLOOR), -1.0);
            let new_inv_l2 = if n_other > 0.0 {
                gig_moment_general(a2 - n_other / 2.0, 2.0 * b2, cross2.max(B_FLOOR), -1.0)
            } else {
                *e_inv_l2
            };
            next.e_inv_lambda = new_inv_l1;
            next.e_inv_psi = minnesota_inv_psi(scaling, new_inv_l2);
            next.aux = Aux::Minnesota {
                scaling: scaling.clone(),
                e_inv_l1: new_inv_l1,
                e_inv_l2: new_inv_l2,
                fixed: false,
            };
        }
        _ => {
            return Err(CoreError::numerical(
                "update_prior",
                "inconsistent prior state",
            ))
        }
    }
    for v in next
        .e_inv_psi
        .iter()
        .chain(std::iter::once(&next.e_inv_lambda))
    {
        if !v.is_finite() || *v <= 0.0 {
            return Err(CoreError::numerical(
                "update_prior",
                format!("scale expectation left (0, inf): {v}"),
            ));
        }
    }
    Ok(next)
}

/// Residual-variance ratios `σ_y²/σ_i²` for the Minnesota scaling, from
/// AR(4)-plus-intercept regressions of every column and of the target over
/// the panel's rows.
pub fn minnesota_scales(panel: &Panel) -> Result<Vec<f64>> {
    if panel.len() < 20 {
        return Err(CoreError::data(
            "Minnesota scaling needs at least 20 observations",
        ));
    }
    let sigma_y = ar_resid_variance(panel.y.as_slice().unwrap())?;
    let mut out = Vec::with_capacity(panel.n_predictors());
    for j in 0..panel.n_predictors() {
        let col: Vec<f64> = panel.x.column(j).to_vec();
        let sigma_i = ar_resid_variance(&col)?;
        out.push(sigma_y / sigma_i);
    }
    Ok(out)
}

/// Residual variance of an AR(4) fit with intercept.
fn ar_resid_variance(series: &[f64]) -> Result<f64> {
    const P: usize = 4;
    let t = series.len();
    if t < P + 6 {
        return Err(CoreError::data("series too short for AR(4)"));
    }
    let rows = t - P;
    let cols = P + 1;
    let mut x = ndarray::Array2::<f64>::zeros((rows, cols));
    let mut y = Array1::<f64>::zeros(rows);
    for r in 0..rows {
        x[[r, 0]] = 1.0;
        for l in 1..=P {
            x[[r, l]] = series[r + P - l];
        }
        y[r] = series[r + P];
    }
    let xtx = x.t().dot(&x);
    let xty = x.t().dot(&y);
    let beta = SpdFactor::factor(&xtx)
        .map_err(|_| CoreError::data("singular AR design"))?
        .solve_vec(&xty)?;
    let resid = &y - &x.dot(&beta);
    let dof = (rows - cols).max(1) as f64;
    let var = resid.iter().map(|v| v * v).sum::<f64>() / dof;
    if var <= 0.0 || !var.is_finite() {
        return Err(CoreError::data("degenerate AR residual variance"));
    }
    Ok(var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::prelude::*;
    use rand_chacha::ChaCha20Rng;
    use rand_distr::{Distribution, Gamma, Normal};

    fn families() -> Vec<PriorFamily> {
        vec![
            PriorFamily::ridge(),
            PriorFamily::horseshoe(),
            PriorFamily::normal_gamma(),
            PriorFamily::lasso(),
            PriorFamily::dirichlet_laplace(),
            PriorFamily::minnesota_fixed(),
            PriorFamily::minnesota_gamma(),
        ]
    }

    #[test]
    fn ridge_update_matches_conjugate_closed_form() {
        let state = PriorState::init(&PriorFamily::ridge(), Block::Linear, 3, None).unwrap();
        let e_sq = [0.4, 1.1, 0.09];
        let next = update_prior(&state, &e_sq).unwrap();
        let expect = (0.01 + 1.5) / (0.01 + e_sq.iter().sum::<f64>() / 2.0);
        assert_abs_diff_eq!(next.e_inv_lambda, expect, epsilon = 1e-14);
        assert!(next.e_inv_psi.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn ridge_update_matches_gibbs_oracle() {
        // Draw λ | β from its conjugate conditional and compare Monte Carlo
        // E(1/λ) with the closed-form update on a 3-coefficient problem.
        let e_sq = [0.4, 1.1, 0.09];
        let (e0, e1) = (0.01, 0.01);
        let shape = e0 + 1.5;
        let rate = e1 + e_sq.iter().sum::<f64>() / 2.0;
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let g = Gamma::new(shape, 1.0 / rate).unwrap(); // 1/λ ~ Gamma(shape, rate)
        let n = 200_000;
        let mean_inv: f64 = (0..n).map(|_| g.sample(&mut rng)).sum::<f64>() / n as f64;
        let state = PriorState::init(&PriorFamily::ridge(), Block::Linear, 3, None).unwrap();
        let next = update_prior(&state, &e_sq).unwrap();
        assert_relative_eq!(mean_inv, next.e_inv_lambda, max_relative = 0.02);
    }

    #[test]
    fn ridge_scale_equivariance_identity() {
        // The denominator term e1 + ΣE(β²)/2 scales affinely in the inputs.
        let e_sq = [0.3, 0.7, 2.0];
        let c = 5.0;
        let scaled: Vec<f64> = e_sq.iter().map(|v| c * v).collect();
        let den = |v: &[f64]| 0.01 + v.iter().sum::<f64>() / 2.0;
        assert_abs_diff_eq!(den(&scaled) - 0.01, c * (den(&e_sq) - 0.01), epsilon = 1e-14);
        // And therefore the update reproduces the same identity.
        let state = PriorState::init(&PriorFamily::ridge(), Block::Linear, 3, None).unwrap();
        let a = update_prior(&state, &e_sq).unwrap().e_inv_lambda;
        let b = update_prior(&state, &scaled).unwrap().e_inv_lambda;
        assert_relative_eq!(
            1.0 / b - 0.01 / (0.01 + 1.5),
            c * (1.0 / a - 0.01 / (0.01 + 1.5)),
            max_relative = 1e-12
        );
    }

    #[test]
    fn horseshoe_signal_escapes_shrinkage() {
        let state = PriorState::init(&PriorFamily::horseshoe(), Block::Linear, 4, None).unwrap();
        let e_sq = [100.0, 0.01, 0.01, 0.01];
        let mut s = state;
        for _ in 0..200 {
            s = update_prior(&s, &e_sq).unwrap();
        }
        assert!(
            s.e_inv_psi[0] < 0.05 * s.e_inv_psi[1],
            "signal E(1/ψ) {} vs noise {}",
            s.e_inv_psi[0],
            s.e_inv_psi[1]
        );

        // Gibbs oracle on the same fixed coefficients shows the same ordering.
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let n = 4;
        let beta_sq = e_sq;
        let mut psi = vec![1.0; n];
        let mut a = vec![1.0; n];
        let mut lambda = 1.0f64;
        let mut b = 1.0f64;
        let mut sum_inv_psi = vec![0.0; n];
        let sweeps = 20_000;
        let ig = |rng: &mut ChaCha20Rng, shape: f64, scale: f64| -> f64 {
            // X ~ IG(shape, scale) <=> 1/X ~ Gamma(shape, rate = scale)
            1.0 / Gamma::new(shape, 1.0 / scale).unwrap().sample(rng)
        };
        for _ in 0..sweeps {
            for j in 0..n {
                psi[j] = ig(&mut rng, 1.0, 1.0 / a[j] + beta_sq[j] / (2.0 * lambda));
                a[j] = ig(&mut rng, 1.0, 1.0 + 1.0 / psi[j]);
            }
            let cross: f64 = (0..n).map(|j| beta_sq[j] / psi[j]).sum();
            lambda = ig(&mut rng, (n as f64 + 1.0) / 2.0, 1.0 / b + cross / 2.0);
            b = ig(&mut rng, 1.0, 1.0 + 1.0 / lambda);
            for j in 0..n {
                sum_inv_psi[j] += 1.0 / psi[j];
            }
        }
        let gibbs_inv_psi: Vec<f64> = sum_inv_psi.iter().map(|s| s / sweeps as f64).collect();
        assert!(
            gibbs_inv_psi[0] < 0.05 * gibbs_inv_psi[1],
            "gibbs: signal {} vs noise {}",
            gibbs_inv_psi[0],
            gibbs_inv_psi[1]
        );
    }

    #[test]
    fn minnesota_fixed_is_identity_and_precision_entries() {
        let scaling = MinnesotaScaling {
            ratios: vec![2.0, 0.5, 1.0],
            own_lag: Some(2),
        };
        let state = PriorState::init(
            &PriorFamily::minnesota_fixed(),
            Block::Linear,
            3,
            Some(&scaling),
        )
        .unwrap();
        let prec = state.precision_diag();
        // non-own: 1/(l1 l2 ratio); own: 1/l1
        assert_relative_eq!(prec[0], 1.0 / (0.04 * 0.25 * 2.0), max_relative = 1e-12);
        assert_relative_eq!(prec[1], 1.0 / (0.04 * 0.25 * 0.5), max_relative = 1e-12);
        assert_relative_eq!(prec[2], 1.0 / 0.04, max_relative = 1e-12);

        let next = update_prior(&state, &[5.0, 0.1, 3.0]).unwrap();
        assert_eq!(next.e_inv_psi, state.e_inv_psi);
        assert_eq!(next.e_inv_lambda, state.e_inv_lambda);
    }

    #[test]
    fn two_blocks_have_independent_global_scales() {
        let lin = PriorState::init(&PriorFamily::ridge(), Block::Linear, 2, None).unwrap();
        let mut nl = PriorState::init(&PriorFamily::ridge(), Block::Nonlinear, 2, None).unwrap();
        nl = update_prior(&nl, &[10.0, 10.0]).unwrap();
        let stacked = prior_precision(&lin, &nl);
        assert_eq!(stacked.len(), 4);
        assert_abs_diff_eq!(stacked[0], 100.0);
        assert!(stacked[2] < 1.0, "heavily loaded block relaxes: {}", stacked[2]);
    }

    #[test]
    fn fixed_point_under_repeated_updates() {
        for family in families() {
            let scaling = MinnesotaScaling {
                ratios: vec![1.0, 2.0, 0.7, 1.3],
                own_lag: Some(3),
            };
            let mut state = PriorState::init(
                &family,
                Block::Linear,
                4,
                family.needs_minnesota_scales().then_some(&scaling),
            )
            .unwrap();
            let e_sq = [0.5, 0.01, 2.2, 0.3];
            let mut prev = state.clone();
            for i in 0..100 {
                state = update_prior(&state, &e_sq).unwrap();
                if i == 99 {
                    let delta = state
                        .e_inv_psi
                        .iter()
                        .zip(&prev.e_inv_psi)
                        .map(|(a, b)| (a - b).abs())
                        .fold((state.e_inv_lambda - prev.e_inv_lambda).abs(), f64::max);
                    assert!(
                        delta < 1e-10,
                        "{}: still moving by {delta} after 100 sweeps",
                        family.tag()
                    );
                }
                prev = state.clone();
            }
        }
    }

    #[test]
    fn permutation_symmetry_of_equal_inputs() {
        for family in [
            PriorFamily::horseshoe(),
            PriorFamily::normal_gamma(),
            PriorFamily::lasso(),
            PriorFamily::dirichlet_laplace(),
        ] {
            let mut state = PriorState::init(&family, Block::Linear, 5, None).unwrap();
            for _ in 0..10 {
                state = update_prior(&state, &[0.37; 5]).unwrap();
            }
            for j in 1..5 {
                assert_abs_diff_eq!(state.e_inv_psi[j], state.e_inv_psi[0], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn expectations_stay_positive_over_random_cycles() {
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        for family in families() {
            let mut state = PriorState::init(
                &family,
                Block::Linear,
                6,
                family
                    .needs_minnesota_scales()
                    .then(|| MinnesotaScaling::unit(6))
                    .as_ref(),
            )
            .unwrap();
            for _ in 0..1000 {
                let e_sq: Vec<f64> = (0..6)
                    .map(|_| (rng.random::<f64>() * 6.0 - 3.0).exp())
                    .collect();
                state = update_prior(&state, &e_sq).unwrap();
                assert!(state.e_inv_lambda > 0.0 && state.e_inv_lambda.is_finite());
                assert!(state
                    .e_inv_psi
                    .iter()
                    .all(|p| *p > 0.0 && p.is_finite()));
            }
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let state = PriorState::init(&PriorFamily::ridge(), Block::Linear, 2, None).unwrap();
        assert!(update_prior(&state, &[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn minnesota_scales_white_noise_ratio() {
        // White-noise predictor with variance 4 vs unit-variance target:
        // ratio ≈ 1/4 at T = 200 within 20%.
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let t = 200;
        let normal = Normal::new(0.0, 1.0).unwrap();
        let y: Vec<f64> = (0..t).map(|_| normal.sample(&mut rng)).collect();
        let x: Vec<f64> = (0..t).map(|_| 2.0 * normal.sample(&mut rng)).collect();
        let sigma_y = ar_resid_variance(&y).unwrap();
        let sigma_x = ar_resid_variance(&x).unwrap();
        let ratio = sigma_y / sigma_x;
        assert!(
            (ratio - 0.25).abs() < 0.05,
            "ratio {ratio} not within 20% of 0.25"
        );
        // Target against itself is exactly 1.
        assert_abs_diff_eq!(sigma_y / sigma_y, 1.0);
    }

    #[test]
    fn minnesota_scales_constant_column_errors() {
        let series = vec![1.0; 50];
        assert!(ar_resid_variance(&series).is_err());
    }
}
