//! Nonlinear design blocks: elementwise polynomials, per-covariate B-spline
//! bases, and the Gaussian-process weight-space basis (lower Cholesky factor
//! of a squared-exponential kernel matrix).
//!
//! Polynomial and spline columns are re-standardized on the estimation window
//! so that a single global shrinkage scale is meaningful across heterogeneous
//! bases. The GP basis is left in kernel scale (its amplitude is `w1`).
//!
//! The GP kernel is treated as a nugget kernel: the stabilizing jitter is a
//! white-noise component that contributes to the covariance only at exactly
//! coincident inputs. Under that convention the out-of-sample map
//! `z_new' = k(x_new, X)' Z'^{-1}` reproduces training rows of `Z` exactly.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use ndarray_linalg::{Diag, SolveTriangular, UPLO};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::linalg::cholesky_with_jitter;

/// Knot quantiles used throughout the reference experiments (r = 9 columns).
pub const DEFAULT_KNOT_QUANTILES: [f64; 9] = [0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 1.0];

const SPLINE_DEGREE: usize = 3;

/// Which nonlinear block to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BasisKind {
    None,
    Polynomial {
        max_degree: usize,
    },
    Spline {
        knot_quantiles: Vec<f64>,
    },
    /// `w1` amplitude and `w2` inverse squared bandwidth; usually set by
    /// [`median_heuristic`].
    GaussianProcess {
        w1: f64,
        w2: f64,
    },
}

impl BasisKind {
    pub fn cubic_polynomial() -> Self {
        BasisKind::Polynomial { max_degree: 3 }
    }

    pub fn default_spline() -> Self {
        BasisKind::Spline {
            knot_quantiles: DEFAULT_KNOT_QUANTILES.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BasisKind::None => Ok(()),
            BasisKind::Polynomial { max_degree } => {
                if *max_degree < 2 {
                    Err(CoreError::config("polynomial max_degree must be >= 2"))
                } else {
                    Ok(())
                }
            }
            BasisKind::Spline { knot_quantiles } => {
                let k = knot_quantiles;
                let sorted = k.windows(2).all(|w| w[0] < w[1]);
                if k.len() < 2
                    || !sorted
                    || k.first() != Some(&0.0)
                    || k.last() != Some(&1.0)
                    || k.iter().any(|q| !(0.0..=1.0).contains(q))
                {
                    Err(CoreError::config(
                        "knot quantiles must be sorted within [0,1] and contain 0 and 1",
                    ))
                } else {
                    Ok(())
                }
            }
            BasisKind::GaussianProcess { w1, w2 } => {
                if *w1 > 0.0 && *w2 > 0.0 {
                    Ok(())
                } else {
                    Err(CoreError::config("GP hyperparameters w1, w2 must be > 0"))
                }
            }
        }
    }
}

/// Per-column metadata for polynomial evaluation.
#[derive(Debug, Clone)]
struct PolyColumn {
    src: usize,
    degree: u32,
    mean: f64,
    sd: f64,
}

/// Per-covariate spline state: knot sites plus the standardization constants
/// of its r columns. Covariates dropped as degenerate carry `None`.
#[derive(Debug, Clone)]
struct SplineCovariate {
    sites: Vec<f64>,
    means: Vec<f64>,
    sds: Vec<f64>,
}

#[derive(Debug, Clone)]
enum EvalState {
    None,
    Polynomial {
        columns: Vec<PolyColumn>,
    },
    Spline {
        per_covariate: Vec<Option<SplineCovariate>>,
        r: usize,
    },
    Gp {
        x_train: Array2<f64>,
        w1: f64,
        w2: f64,
        jitter: f64,
    },
}

/// A built nonlinear block: the `T×M` design `z` plus everything needed to
/// evaluate the same basis at out-of-sample points.
#[derive(Debug, Clone)]
pub struct BasisExpansion {
    pub kind: BasisKind,
    pub z: Array2<f64>,
    pub m: usize,
    pub warnings: Vec<String>,
    /// Jitter actually used by the GP Cholesky (None otherwise).
    pub jitter_used: Option<f64>,
    eval: EvalState,
}

/// JSON metadata stored alongside fitted models.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisMeta {
    pub kind: BasisKind,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knot_sites: Option<Vec<Vec<f64>>>,
}

impl BasisExpansion {
    /// Empty block (linear-only model).
    pub fn none(t: usize) -> Self {
        BasisExpansion {
            kind: BasisKind::None,
            z: Array2::zeros((t, 0)),
            m: 0,
            warnings: Vec::new(),
            jitter_used: None,
            eval: EvalState::None,
        }
    }

    pub fn metadata(&self) -> BasisMeta {
        let knot_sites = match &self.eval {
            EvalState::Spline { per_covariate, .. } => Some(
                per_covariate
                    .iter()
                    .map(|c| c.as_ref().map(|s| s.sites.clone()).unwrap_or_default())
                    .collect(),
            ),
            _ => None,
        };
        BasisMeta {
            kind: self.kind.clone(),
            m: self.m,
            jitter: self.jitter_used,
            knot_sites,
        }
    }

    /// Basis functions at `x_new` *before* re-standardization (polynomials and
    /// splines) — mainly for diagnostics and the partition-of-unity checks.
    pub fn raw_features(&self, x_new: &ArrayView1<f64>) -> Result<Array1<f64>> {
        match &self.eval {
            EvalState::None => Ok(Array1::zeros(0)),
            EvalState::Polynomial { columns } => {
                self.check_dim(x_new)?;
                Ok(Array1::from_iter(
                    columns.iter().map(|c| x_new[c.src].powi(c.degree as i32)),
                ))
            }
            EvalState::Spline { per_covariate, r } => {
                self.check_dim(x_new)?;
                let mut out = Vec::with_capacity(self.m);
                for (j, cov) in per_covariate.iter().enumerate() {
                    if let Some(cov) = cov {
                        out.extend(spline_row(&cov.sites, *r, x_new[j]));
                    }
                }
                Ok(Array1::from(out))
            }
            EvalState::Gp { .. } => self.evaluate(x_new),
        }
    }

    /// The out-of-sample basis map `x_new -> z_new` (length `M`).
    pub fn evaluate(&self, x_new: &ArrayView1<f64>) -> Result<Array1<f64>> {
        match &self.eval {
            EvalState::None => Ok(Array1::zeros(0)),
            EvalState::Polynomial { columns } => {
                self.check_dim(x_new)?;
                Ok(Array1::from_iter(columns.iter().map(|c| {
                    (x_new[c.src].powi(c.degree as i32) - c.mean) / c.sd
                })))
            }
            EvalState::Spline { per_covariate, r } => {
                self.check_dim(x_new)?;
                let mut out = Vec::with_capacity(self.m);
                for (j, cov) in per_covariate.iter().enumerate() {
                    if let Some(cov) = cov {
                        let raw = spline_row(&cov.sites, *r, x_new[j]);
                        for (i, v) in raw.iter().enumerate() {
                            out.push((v - cov.means[i]) / cov.sds[i]);
                        }
                    }
                }
                Ok(Array1::from(out))
            }
            EvalState::Gp {
                x_train,
                w1,
                w2,
                jitter,
            } => {
                if x_new.len() != x_train.ncols() {
                    return Err(CoreError::dimension(format!(
                        "x_new has {} entries, GP training inputs have {} columns",
                        x_new.len(),
                        x_train.ncols()
                    )));
                }
                let t = x_train.nrows();
                let mut k_new = Array1::<f64>::zeros(t);
                for s in 0..t {
                    let d2 = sq_dist(x_new, &x_train.row(s));
                    k_new[s] = w1 * (-0.5 * w2 * d2).exp();
                    // Nugget component: active only at exactly coincident inputs.
                    if d2 == 0.0 {
                        k_new[s] += jitter;
                    }
                }
                let z_new = self.z.solve_triangular(UPLO::Lower, Diag::NonUnit, &k_new)?;
                Ok(z_new)
            }
        }
    }

    fn check_dim(&self, x_new: &ArrayView1<f64>) -> Result<()> {
        let k = match &self.eval {
            EvalState::Polynomial { columns } => {
                columns.iter().map(|c| c.src + 1).max().unwrap_or(0)
            }
            EvalState::Spline { per_covariate, .. } => per_covariate.len(),
            _ => return Ok(()),
        };
        if x_new.len() < k {
            return Err(CoreError::dimension(format!(
                "x_new has {} entries, basis expects at least {k}",
                x_new.len()
            )));
        }
        Ok(())
    }
}

/// Build the block requested by `kind` (with the median heuristic already
/// resolved for GP kinds).
pub fn build_basis(x: &ArrayView2<f64>, kind: &BasisKind) -> Result<BasisExpansion> {
    kind.validate()?;
    match kind {
        BasisKind::None => Ok(BasisExpansion::none(x.nrows())),
        BasisKind::Polynomial { max_degree } => build_polynomial(x, *max_degree),
        BasisKind::Spline { knot_quantiles } => build_spline(x, knot_quantiles),
        BasisKind::GaussianProcess { w1, w2 } => build_gp(x, *w1, *w2, 1e-8 * w1),
    }
}

/// Elementwise power block `[X∘², …, X∘max_degree]`, columns re-standardized.
///
/// Degenerate power columns (constant on the window) contribute nothing and
/// are reported in `warnings`.
pub fn build_polynomial(x: &ArrayView2<f64>, max_degree: usize) -> Result<BasisExpansion> {
    if max_degree < 2 {
        return Err(CoreError::config("polynomial max_degree must be >= 2"));
    }
    let (t, k) = (x.nrows(), x.ncols());
    let mut columns = Vec::with_capacity((max_degree - 1) * k);
    let mut data: Vec<Array1<f64>> = Vec::with_capacity((max_degree - 1) * k);
    let mut warnings = Vec::new();
    for degree in 2..=max_degree {
        for j in 0..k {
            let raw = x.index_axis(Axis(1), j).mapv(|v| v.powi(degree as i32));
            match standardize_column(&raw) {
                Some((col, mean, sd)) => {
                    columns.push(PolyColumn {
                        src: j,
                        degree: degree as u32,
                        mean,
                        sd,
                    });
                    data.push(col);
                }
                None => warnings.push(format!(
                    "polynomial column (source {j}, degree {degree}) is degenerate; dropped"
                )),
            }
        }
    }
    let m = data.len();
    let mut z = Array2::<f64>::zeros((t, m));
    for (c, col) in data.into_iter().enumerate() {
        z.index_axis_mut(Axis(1), c).assign(&col);
    }
    Ok(BasisExpansion {
        kind: BasisKind::Polynomial { max_degree },
        z,
        m,
        warnings,
        jitter_used: None,
        eval: EvalState::Polynomial { columns },
    })
}

/// Per-covariate clamped cubic B-spline block with exactly
/// `r = knot_quantiles.len()` columns per covariate.
///
/// The raw clamped cubic basis on the knot sites has `r + 2` functions; the
/// two outermost pairs are merged so the count matches `r` while keeping
/// nonnegativity and the partition of unity. Covariates whose empirical knot
/// sites are not strictly increasing (constant columns, heavy ties) are
/// dropped with a warning.
pub fn build_spline(x: &ArrayView2<f64>, knot_quantiles: &[f64]) -> Result<BasisExpansion> {
    BasisKind::Spline {
        knot_quantiles: knot_quantiles.to_vec(),
    }
    .validate()?;
    let (t, k) = (x.nrows(), x.ncols());
    let r = knot_quantiles.len();
    if t <= r {
        return Err(CoreError::data(format!(
            "need more than {r} observations to place {r} knots (got {t})"
        )));
    }
    let mut per_covariate: Vec<Option<SplineCovariate>> = Vec::with_capacity(k);
    let mut blocks: Vec<Array2<f64>> = Vec::new();
    let mut warnings = Vec::new();
    for j in 0..k {
        let col = x.index_axis(Axis(1), j);
        let sites = empirical_quantiles(&col.to_owned(), knot_quantiles);
        if sites.windows(2).any(|w| w[1] <= w[0]) {
            warnings.push(format!(
                "covariate {j} has degenerate knot sites; contributes no spline columns"
            ));
            per_covariate.push(None);
            continue;
        }
        let mut raw = Array2::<f64>::zeros((t, r));
        for (i, &v) in col.iter().enumerate() {
            let row = spline_row(&sites, r, v);
            for (c, b) in row.iter().enumerate() {
                raw[[i, c]] = *b;
            }
        }
        let mut means = Vec::with_capacity(r);
        let mut sds = Vec::with_capacity(r);
        let mut std_block = Array2::<f64>::zeros((t, r));
        let mut ok = true;
        for c in 0..r {
            match standardize_column(&raw.index_axis(Axis(1), c).to_owned()) {
                Some((col_std, mean, sd)) => {
                    std_block.index_axis_mut(Axis(1), c).assign(&col_std);
                    means.push(mean);
                    sds.push(sd);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            warnings.push(format!(
                "covariate {j} yields a constant spline column; contributes no spline columns"
            ));
            per_covariate.push(None);
            continue;
        }
        per_covariate.push(Some(SplineCovariate { sites, means, sds }));
        blocks.push(std_block);
    }
    let m = blocks.len() * r;
    let mut z = Array2::<f64>::zeros((t, m));
    for (b, block) in blocks.iter().enumerate() {
        z.slice_mut(ndarray::s![.., b * r..(b + 1) * r]).assign(block);
    }
    Ok(BasisExpansion {
        kind: BasisKind::Spline {
            knot_quantiles: knot_quantiles.to_vec(),
        },
        z,
        m,
        warnings,
        jitter_used: None,
        eval: EvalState::Spline { per_covariate, r },
    })
}

/// Kernel bandwidth from the median pairwise squared distance:
/// `w2 = 1 / median_{t<s} ‖x_t − x_s‖²`, `w1 = 1`.
///
/// Pairs run over all rows, so duplicated rows shift the median.
pub fn median_heuristic(x: &ArrayView2<f64>) -> Result<(f64, f64)> {
    let t = x.nrows();
    if t < 2 {
        return Err(CoreError::data("median heuristic needs at least two rows"));
    }
    let mut d2: Vec<f64> = Vec::with_capacity(t * (t - 1) / 2);
    for a in 0..t {
        for b in (a + 1)..t {
            d2.push(sq_dist(&x.row(a), &x.row(b)));
        }
    }
    d2.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = d2.len();
    let med = if n % 2 == 1 {
        d2[n / 2]
    } else {
        0.5 * (d2[n / 2 - 1] + d2[n / 2])
    };
    if med <= 0.0 {
        return Err(CoreError::data("degenerate inputs for kernel bandwidth"));
    }
    Ok((1.0, 1.0 / med))
}

/// Squared-exponential kernel matrix and its lower Cholesky factor.
///
/// `jitter0` is the starting diagonal jitter; it escalates tenfold up to
/// `1e4 × jitter0` before failing.
pub fn build_gp(x: &ArrayView2<f64>, w1: f64, w2: f64, jitter0: f64) -> Result<BasisExpansion> {
    if w1 <= 0.0 || w2 <= 0.0 {
        return Err(CoreError::config("GP hyperparameters w1, w2 must be > 0"));
    }
    let t = x.nrows();
    let k_mat = kernel_matrix(x, w1, w2);
    let (z, jitter) = cholesky_with_jitter(&k_mat, jitter0, jitter0 * 1e4)?;
    Ok(BasisExpansion {
        kind: BasisKind::GaussianProcess { w1, w2 },
        z,
        m: t,
        warnings: Vec::new(),
        jitter_used: Some(jitter),
        eval: EvalState::Gp {
            x_train: x.to_owned(),
            w1,
            w2,
            jitter,
        },
    })
}

/// `K[t,s] = w1 · exp(−(w2/2)‖x_t − x_s‖²)` (no jitter).
pub fn kernel_matrix(x: &ArrayView2<f64>, w1: f64, w2: f64) -> Array2<f64> {
    let t = x.nrows();
    let mut k = Array2::<f64>::zeros((t, t));
    for a in 0..t {
        k[[a, a]] = w1;
        for b in (a + 1)..t {
            let v = w1 * (-0.5 * w2 * sq_dist(&x.row(a), &x.row(b))).exp();
            k[[a, b]] = v;
            k[[b, a]] = v;
        }
    }
    k
}

/// Spec-facing alias for [`BasisExpansion::evaluate`].
pub fn evaluate_basis(expansion: &BasisExpansion, x_new: &ArrayView1<f64>) -> Result<Array1<f64>> {
    expansion.evaluate(x_new)
}

fn sq_dist(a: &ArrayView1<f64>, b: &ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

fn standardize_column(col: &Array1<f64>) -> Option<(Array1<f64>, f64, f64)> {
    let n = col.len() as f64;
    let mean = col.sum() / n;
    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var <= 1e-24 || !var.is_finite() {
        return None;
    }
    let sd = var.sqrt();
    Some((col.mapv(|v| (v - mean) / sd), mean, sd))
}

/// Type-7 empirical quantiles (linear interpolation between order statistics).
fn empirical_quantiles(col: &Array1<f64>, probs: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = col.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    probs
        .iter()
        .map(|&p| {
            let h = p * (n as f64 - 1.0);
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            if lo == hi {
                sorted[lo]
            } else {
                sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
            }
        })
        .collect()
}

/// Raw (unstandardized) merged B-spline row for one covariate: clamped cubic
/// basis on `sites`, outermost pairs merged down to `r` columns; `x` beyond
/// the boundary sites is clamped.
fn spline_row(sites: &[f64], r: usize, x: f64) -> Vec<f64> {
    let full = bspline_basis_row(sites, SPLINE_DEGREE, x);
    // full.len() == sites.len() + degree - 1 == r + 2 for cubic
    debug_assert_eq!(full.len(), r + 2);
    let mut merged = Vec::with_capacity(r);
    merged.push(full[0] + full[1]);
    merged.extend_from_slice(&full[2..r]);
    merged.push(full[r] + full[r + 1]);
    merged
}

/// All B-spline basis functions of the given degree on a clamped extension of
/// `sites`, evaluated at `x` (clamped into the site range).
fn bspline_basis_row(sites: &[f64], degree: usize, x: f64) -> Vec<f64> {
    let n = sites.len();
    let a = sites[0];
    let b = sites[n - 1];
    let x = x.clamp(a, b);
    // Clamped knot vector: degree extra copies of each boundary.
    let mut knots = Vec::with_capacity(n + 2 * degree);
    knots.extend(std::iter::repeat(a).take(degree));
    knots.extend_from_slice(sites);
    knots.extend(std::iter::repeat(b).take(degree));
    let n_basis = knots.len() - degree - 1;

    // Knot span index (The NURBS Book A2.1, adapted for the clamped ends).
    let m = knots.len() - 1;
    let span = if x >= knots[m - degree] {
        m - degree - 1
    } else {
        let mut lo = degree;
        let mut hi = m - degree;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if x < knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    };

    // Basis values N_{span-degree..=span} (The NURBS Book A2.2).
    let mut vals = vec![0.0; degree + 1];
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    vals[0] = 1.0;
    for j in 1..=degree {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for rr in 0..j {
            let tmp = vals[rr] / (right[rr + 1] + left[j - rr]);
            vals[rr] = saved + right[rr + 1] * tmp;
            saved = left[j - rr] * tmp;
        }
        vals[j] = saved;
    }

    let mut row = vec![0.0; n_basis];
    for (offset, v) in vals.iter().enumerate() {
        row[span - degree + offset] = *v;
    }
    row
}
