//! Panel loading, stationarity transforms, standardization, and direct
//! forecast designs.
//!
//! The input is a quarterly CSV (header row, first column holds dates as
//! `YYYYQq` or ISO) plus a JSON spec listing one `{name, tcode, include}`
//! entry per series. Transform codes follow the FRED-QD convention:
//!
//! | tcode | transform        |
//! |-------|------------------|
//! | 1     | level            |
//! | 2     | Δx               |
//! | 3     | Δ²x              |
//! | 4     | ln x             |
//! | 5     | Δ ln x           |
//! | 6     | Δ² ln x          |
//! | 7     | Δ(x_t/x_{t-1}-1) |
//!
//! Leading rows invalidated by differencing (or by series that start late)
//! are trimmed to the largest complete rectangle; interior gaps are errors.

use std::path::Path;
use std::str::FromStr;

use ndarray::{s, Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::quarter::Quarter;

/// One predictor column: name, transform code, and whether it enters the panel.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SeriesSpec {
    pub name: String,
    pub tcode: u8,
    #[serde(default = "default_true")]
    pub include: bool,
}

fn default_true() -> bool {
    true
}

/// How the target series is turned into the modeled variable.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum TargetTransform {
    /// 400·Δln x — annualized quarterly log growth, the conventional target.
    AnnualizedLogGrowth,
    /// Apply a plain transform code instead.
    Tcode(u8),
}

impl Default for TargetTransform {
    fn default() -> Self {
        TargetTransform::AnnualizedLogGrowth
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TargetSpec {
    pub name: String,
    #[serde(default)]
    pub transform: TargetTransform,
}

impl TargetSpec {
    pub fn annualized(name: impl Into<String>) -> Self {
        TargetSpec {
            name: name.into(),
            transform: TargetTransform::AnnualizedLogGrowth,
        }
    }
}

/// Transformed (stationary) but not yet standardized panel.
///
/// The recursive harness keeps one of these and re-standardizes per
/// estimation window; [`load_panel`] standardizes over the full sample.
#[derive(Debug, Clone)]
pub struct TransformedPanel {
    pub dates: Vec<Quarter>,
    pub y: Array1<f64>,
    pub x: Array2<f64>,
    pub specs: Vec<SeriesSpec>,
    pub target: TargetSpec,
}

/// Column statistics used for standardization (sample variance, ddof = 1).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Number of leading rows the statistics were computed on.
    pub window: usize,
}

/// Standardized panel: every predictor column has mean 0 and unit sample
/// variance on the estimation window recorded in `scaler`.
#[derive(Debug, Clone)]
pub struct Panel {
    pub dates: Vec<Quarter>,
    /// Target in its own units (growth rates are not standardized).
    pub y: Array1<f64>,
    pub x: Array2<f64>,
    pub specs: Vec<SeriesSpec>,
    pub scaler: Scaler,
}

impl Panel {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_predictors(&self) -> usize {
        self.x.ncols()
    }

    pub fn names(&self) -> Vec<&str> {
        self.specs.iter().map(|s| s.name.as_str()).collect()
    }

    /// Audit CSV: full-precision dump of the standardized panel.
    pub fn to_audit_csv(&self) -> String {
        let mut out = String::from("date,y");
        for s in &self.specs {
            out.push(',');
            out.push_str(&s.name);
        }
        out.push('\n');
        for (i, d) in self.dates.iter().enumerate() {
            out.push_str(&format!("{d},{}", self.y[i]));
            for j in 0..self.x.ncols() {
                out.push_str(&format!(",{}", self.x[[i, j]]));
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`Panel::to_audit_csv`]: reads the dump back without
    /// re-transforming or re-standardizing, so the round trip is bit-exact.
    pub fn from_audit_csv(text: &str) -> Result<Panel> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || &headers[1] != "y" {
            return Err(CoreError::data("audit csv must start with date,y columns"));
        }
        let names: Vec<String> = headers.iter().skip(2).map(|h| h.to_string()).collect();
        let mut dates = Vec::new();
        let mut y = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            dates.push(Quarter::from_str(&rec[0])?);
            y.push(parse_cell(&rec[1], "y", dates.len())?.ok_or_else(|| {
                CoreError::data(format!("missing y value at row {}", dates.len()))
            })?);
            let mut row = Vec::with_capacity(names.len());
            for (j, name) in names.iter().enumerate() {
                row.push(parse_cell(&rec[j + 2], name, dates.len())?.ok_or_else(|| {
                    CoreError::data(format!("missing {name} value at row {}", dates.len()))
                })?);
            }
            rows.push(row);
        }
        let t = rows.len();
        let k = names.len();
        let mut x = Array2::<f64>::zeros((t, k));
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                x[[i, j]] = *v;
            }
        }
        Ok(Panel {
            dates,
            y: Array1::from(y),
            x,
            specs: names
                .into_iter()
                .map(|name| SeriesSpec {
                    name,
                    tcode: 1,
                    include: true,
                })
                .collect(),
            scaler: Scaler {
                means: vec![0.0; k],
                sds: vec![1.0; k],
                window: t,
            },
        })
    }
}

impl TransformedPanel {
    /// Load the raw CSV + series spec and apply stationarity transforms.
    pub fn load(csv_path: &Path, spec_path: &Path, target: &TargetSpec) -> Result<Self> {
        let spec_text = std::fs::read_to_string(spec_path)?;
        let specs: Vec<SeriesSpec> = serde_json::from_str(&spec_text)?;
        let csv_text = std::fs::read_to_string(csv_path)?;
        Self::from_csv_str(&csv_text, &specs, target)
    }

    pub fn from_csv_str(
        csv_text: &str,
        specs: &[SeriesSpec],
        target: &TargetSpec,
    ) -> Result<Self> {
        let included: Vec<SeriesSpec> = specs.iter().filter(|s| s.include).cloned().collect();
        for s in specs {
            if !(1..=7).contains(&s.tcode) {
                return Err(CoreError::data(format!(
                    "series {}: tcode {} outside 1..7",
                    s.name, s.tcode
                )));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for s in &included {
            if !seen.insert(s.name.clone()) {
                return Err(CoreError::data(format!("duplicate series name {}", s.name)));
            }
        }

        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(csv_text.as_bytes());
        let headers = rdr.headers()?.clone();
        let col_of = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| CoreError::data(format!("unknown series name {name:?}")))
        };
        let target_col = col_of(&target.name)?;
        let series_cols: Vec<usize> = included
            .iter()
            .map(|s| col_of(&s.name))
            .collect::<Result<_>>()?;

        let mut dates: Vec<Quarter> = Vec::new();
        let mut raw: Vec<Vec<Option<f64>>> = vec![Vec::new(); included.len() + 1];
        for rec in rdr.records() {
            let rec = rec?;
            let date = Quarter::from_str(&rec[0])?;
            if let Some(last) = dates.last() {
                if date <= *last {
                    return Err(CoreError::data(format!(
                        "dates not strictly increasing at {date}"
                    )));
                }
            }
            dates.push(date);
            raw[0].push(parse_cell(&rec[target_col], &target.name, dates.len())?);
            for (k, &c) in series_cols.iter().enumerate() {
                raw[k + 1].push(parse_cell(&rec[c], &included[k].name, dates.len())?);
            }
        }

        // Transform target and predictors.
        let y_t = match &target.transform {
            TargetTransform::AnnualizedLogGrowth => {
                let g = apply_tcode(&raw[0], 5, &target.name)?;
                g.into_iter().map(|v| v.map(|x| 400.0 * x)).collect()
            }
            TargetTransform::Tcode(tc) => apply_tcode(&raw[0], *tc, &target.name)?,
        };
        let mut cols_t: Vec<Vec<Option<f64>>> = Vec::with_capacity(included.len());
        for (k, spec) in included.iter().enumerate() {
            cols_t.push(apply_tcode(&raw[k + 1], spec.tcode, &spec.name)?);
        }

        // Largest complete rectangle: drop leading rows with any gap.
        let t_total = dates.len();
        let mut start = t_total;
        for i in 0..t_total {
            if y_t[i].is_some() && cols_t.iter().all(|c| c[i].is_some()) {
                start = i;
                break;
            }
        }
        if start >= t_total {
            return Err(CoreError::data("no complete rows after transformation"));
        }
        let t = t_total - start;
        if t < 40 {
            return Err(CoreError::data(format!(
                "fewer than 40 usable rows after transformation ({t})"
            )));
        }
        let mut y = Array1::<f64>::zeros(t);
        let mut x = Array2::<f64>::zeros((t, included.len()));
        for i in 0..t {
            y[i] = y_t[start + i].ok_or_else(|| {
                CoreError::data(format!(
                    "missing {} value at {} (interior gap)",
                    target.name,
                    dates[start + i]
                ))
            })?;
            for (j, col) in cols_t.iter().enumerate() {
                x[[i, j]] = col[start + i].ok_or_else(|| {
                    CoreError::data(format!(
                        "missing {} value at {} (interior gap)",
                        included[j].name,
                        dates[start + i]
                    ))
                })?;
            }
        }

        Ok(TransformedPanel {
            dates: dates[start..].to_vec(),
            y,
            x,
            specs: included,
            target: target.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    /// Standardize predictors with statistics from the first `window` rows
    /// and return the panel truncated to that window.
    ///
    /// Rows at and beyond `window` never influence the statistics, so designs
    /// built from the result are free of hold-out leakage.
    pub fn standardize(&self, window: usize) -> Result<Panel> {
        if window < 2 || window > self.len() {
            return Err(CoreError::data(format!(
                "standardization window {window} outside 2..={}",
                self.len()
            )));
        }
        let k = self.x.ncols();
        let head = self.x.slice(s![..window, ..]);
        let mut means = Vec::with_capacity(k);
        let mut sds = Vec::with_capacity(k);
        for j in 0..k {
            let col = head.index_axis(Axis(1), j);
            let m = col.mean().unwrap();
            let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (window as f64 - 1.0);
            if var <= 0.0 || !var.is_finite() {
                return Err(CoreError::data(format!(
                    "series {} is constant on the estimation window; cannot standardize",
                    self.specs[j].name
                )));
            }
            means.push(m);
            sds.push(var.sqrt());
        }
        let mut x = self.x.slice(s![..window, ..]).to_owned();
        for j in 0..k {
            let mut col = x.index_axis_mut(Axis(1), j);
            let (m, s) = (means[j], sds[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(Panel {
            dates: self.dates[..window].to_vec(),
            y: self.y.slice(s![..window]).to_owned(),
            x,
            specs: self.specs.clone(),
            scaler: Scaler { means, sds, window },
        })
    }

    pub fn standardize_full(&self) -> Result<Panel> {
        self.standardize(self.len())
    }
}

fn parse_cell(cell: &str, name: &str, row: usize) -> Result<Option<f64>> {
    let c = cell.trim();
    if c.is_empty() || c.eq_ignore_ascii_case("na") || c.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    c.parse::<f64>()
        .map(Some)
        .map_err(|_| CoreError::data(format!("non-numeric cell {c:?} in {name} (row {row})")))
}

/// Apply a FRED-QD transform code; leading entries consumed by differencing
/// become `None`.
fn apply_tcode(col: &[Option<f64>], tcode: u8, name: &str) -> Result<Vec<Option<f64>>> {
    let ln = |v: f64| -> Result<f64> {
        if v <= 0.0 {
            Err(CoreError::data(format!(
                "log transform of non-positive value {v} in {name}"
            )))
        } else {
            Ok(v.ln())
        }
    };
    let diff = |c: &[Option<f64>]| -> Vec<Option<f64>> {
        let mut out = vec![None; c.len()];
        for i in 1..c.len() {
            if let (Some(a), Some(b)) = (c[i], c[i - 1]) {
                out[i] = Some(a - b);
            }
        }
        out
    };
    let n = col.len();
    let out = match tcode {
        1 => col.to_vec(),
        2 => diff(col),
        3 => diff(&diff(col)),
        4 | 5 | 6 => {
            let mut lx = vec![None; n];
            for i in 0..n {
                if let Some(v) = col[i] {
                    lx[i] = Some(ln(v)?);
                }
            }
            match tcode {
                4 => lx,
                5 => diff(&lx),
                _ => diff(&diff(&lx)),
            }
        }
        7 => {
            let mut gr = vec![None; n];
            for i in 1..n {
                if let (Some(a), Some(b)) = (col[i], col[i - 1]) {
                    if b == 0.0 {
                        return Err(CoreError::data(format!(
                            "growth rate undefined (zero level) in {name}"
                        )));
                    }
                    gr[i] = Some(a / b - 1.0);
                }
            }
            diff(&gr)
        }
        _ => {
            return Err(CoreError::data(format!(
                "series {name}: tcode {tcode} outside 1..7"
            )))
        }
    };
    Ok(out)
}

/// Load, transform, trim, and standardize over the full sample.
pub fn load_panel(csv_path: &Path, spec_path: &Path, target: &TargetSpec) -> Result<Panel> {
    TransformedPanel::load(csv_path, spec_path, target)?.standardize_full()
}

/// Direct-forecast design: row `t` regresses `y_t` on information dated
/// `t - h`, and the linear block always ends with the lagged target.
#[derive(Debug, Clone)]
pub struct DirectDesign {
    pub horizon: usize,
    /// Target values aligned with the rows of `f`.
    pub y_h: Array1<f64>,
    /// `T-h` × `K` regressor matrix; column `K-1` is the lagged target.
    pub f: Array2<f64>,
    /// Columns of the linear block (predictors + lagged target).
    pub k: usize,
    /// Dates of the *target* observations (row `t` is dated `dates[t]`).
    pub dates: Vec<Quarter>,
}

impl DirectDesign {
    /// Index of the lagged-target column (the Minnesota "own lag").
    pub fn own_lag_index(&self) -> usize {
        self.k - 1
    }
}

pub fn build_direct_design(panel: &Panel, horizon: usize) -> Result<DirectDesign> {
    let t = panel.len();
    if horizon == 0 {
        return Err(CoreError::data("horizon must be >= 1"));
    }
    if horizon >= t {
        return Err(CoreError::data(format!(
            "horizon {horizon} >= panel length {t}"
        )));
    }
    let kx = panel.n_predictors();
    let k = kx + 1;
    let rows = t - horizon;
    let mut f = Array2::<f64>::zeros((rows, k));
    let mut y_h = Array1::<f64>::zeros(rows);
    let mut dates = Vec::with_capacity(rows);
    for r in 0..rows {
        let src = r; // information date t - h
        let tgt = r + horizon;
        for j in 0..kx {
            f[[r, j]] = panel.x[[src, j]];
        }
        f[[r, kx]] = panel.y[src];
        y_h[r] = panel.y[tgt];
        dates.push(panel.dates[tgt]);
    }
    Ok(DirectDesign {
        horizon,
        y_h,
        f,
        k,
        dates,
    })
}

/// Regressor vector dated at the panel's last row, used to forecast `h`
/// quarters beyond the end of the estimation window.
pub fn forecast_regressors(panel: &Panel) -> Array1<f64> {
    let t = panel.len() - 1;
    let kx = panel.n_predictors();
    let mut f = Array1::<f64>::zeros(kx + 1);
    for j in 0..kx {
        f[j] = panel.x[[t, j]];
    }
    f[kx] = panel.y[t];
    f
}
