//! Truncation sweeps over an n-grid and least-squares decay fits.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::constructions::build_named;
use crate::cycles::omega;
use crate::error::{Error, Result};
use crate::family::TruncationFamily;
use crate::fvs::{min_cycle_transversal, Optimality, DEFAULT_NODE_BUDGET};
use crate::linalg::DenseMatrix;
use crate::scalar::{Mode, Rational, Scalar};
use crate::spectral::{perron_root, DEFAULT_TOL};

/// Bumped whenever the row layout changes.
pub const SWEEP_FORMAT_VERSION: u32 = 1;

pub const SWEEP_COLUMNS: [&str; 11] = [
    "n",
    "lambda_n",
    "lambda_closed_form",
    "omega_n",
    "one_minus_lambda",
    "n_one_minus_lambda",
    "gap_to_limit",
    "fvs_size",
    "fvs_exact",
    "cycle_search_complete",
    "error",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOp {
    Lambda,
    Omega,
    Fvs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: String,
    #[serde(default)]
    pub params: serde_json::Value,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_ops")]
    pub ops: Vec<SweepOp>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Cycles visited per ω cell.
    #[serde(default = "default_cycle_budget")]
    pub cycle_budget: usize,
}

fn default_ops() -> Vec<SweepOp> {
    vec![SweepOp::Lambda, SweepOp::Omega, SweepOp::Fvs]
}

fn default_mode() -> Mode {
    Mode::Float
}

fn default_cycle_budget() -> usize {
    1_000_000
}

impl SweepSpec {
    pub fn new(family: &str, n_grid: Vec<usize>) -> Self {
        Self {
            family: family.to_string(),
            params: serde_json::Value::Null,
            n_grid,
            ops: default_ops(),
            seed: 0,
            mode: Mode::Float,
            cycle_budget: default_cycle_budget(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.first() == Some(&0) {
            return Err(Error::InvalidParameter("n-grid entries must be positive".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("n-grid must be strictly increasing".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub lambda_n: Option<f64>,
    pub lambda_closed_form: Option<f64>,
    pub omega_n: Option<f64>,
    pub one_minus_lambda: Option<f64>,
    pub n_one_minus_lambda: Option<f64>,
    pub gap_to_limit: Option<f64>,
    pub fvs_size: Option<usize>,
    pub fvs_exact: Option<bool>,
    pub cycle_search_complete: Option<bool>,
    pub error: Option<String>,
}

impl SweepRow {
    /// Fields in `SWEEP_COLUMNS` order; absent values are empty.
    pub fn fields(&self) -> Vec<String> {
        let f = |x: Option<f64>| x.map(|v| format!("{v:.17e}")).unwrap_or_default();
        vec![
            self.n.to_string(),
            f(self.lambda_n),
            f(self.lambda_closed_form),
            f(self.omega_n),
            f(self.one_minus_lambda),
            f(self.n_one_minus_lambda),
            f(self.gap_to_limit),
            self.fvs_size.map(|x| x.to_string()).unwrap_or_default(),
            self.fvs_exact.map(|x| x.to_string()).unwrap_or_default(),
            self.cycle_search_complete.map(|x| x.to_string()).unwrap_or_default(),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub version: u32,
    pub family: String,
    pub mode: Mode,
    pub seed: u64,
    pub declared_limit: Option<f64>,
    pub rows: Vec<SweepRow>,
}

/// Builds the family named in `spec` and sweeps it.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    run_sweep_with_progress(spec, &|_| {})
}

/// As [`run_sweep`], calling `progress(n)` as each cell finishes (in
/// completion order).
pub fn run_sweep_with_progress(spec: &SweepSpec, progress: &(dyn Fn(usize) + Sync)) -> Result<SweepTable> {
    spec.validate()?;
    match spec.mode {
        Mode::Exact => Ok(sweep_family_with_progress(&build_named::<Rational>(&spec.family, &spec.params)?, spec, progress)),
        Mode::Float => Ok(sweep_family_with_progress(&build_named::<f64>(&spec.family, &spec.params)?, spec, progress)),
    }
}

/// One row per n, in grid order; per-cell failures land in `error`.
pub fn sweep_family<T: Scalar>(f: &TruncationFamily<T>, spec: &SweepSpec) -> SweepTable {
    sweep_family_with_progress(f, spec, &|_| {})
}

fn sweep_family_with_progress<T: Scalar>(
    f: &TruncationFamily<T>,
    spec: &SweepSpec,
    progress: &(dyn Fn(usize) + Sync),
) -> SweepTable {
    let limit = f.limit().map(|l| l.value);
    let rows = crate::par::map(spec.n_grid.clone(), |n| {
        let row = sweep_cell(f, n, spec, limit);
        progress(n);
        row
    });
    SweepTable { version: SWEEP_FORMAT_VERSION, family: f.name().to_string(), mode: spec.mode, seed: spec.seed, declared_limit: limit, rows }
}

fn sweep_cell<T: Scalar>(f: &TruncationFamily<T>, n: usize, spec: &SweepSpec, limit: Option<f64>) -> SweepRow {
    let mut row = SweepRow { n, ..Default::default() };
    let d = match f.truncate(n) {
        Ok(d) => d,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let mut errors = Vec::new();
    if spec.ops.contains(&SweepOp::Lambda) {
        let lam = perron_root(&d, DEFAULT_TOL).value;
        row.lambda_n = Some(lam);
        row.lambda_closed_form = f.presentation().lambda_closed_form(n);
        row.one_minus_lambda = Some(1.0 - lam);
        row.n_one_minus_lambda = Some(n as f64 * (1.0 - lam));
        row.gap_to_limit = limit.map(|l| l - row.lambda_closed_form.unwrap_or(lam));
    }
    if spec.ops.contains(&SweepOp::Omega) {
        match omega(&d, n, false, Some(spec.cycle_budget)) {
            Ok(g) => {
                row.omega_n = Some(g.map_or(0.0, |g| g.value()));
                row.cycle_search_complete = Some(true);
            }
            Err(e) => {
                row.omega_n = e.partial.map(|g| g.value());
                row.cycle_search_complete = Some(false);
                errors.push(format!("cycle budget {} exhausted; omega_n is a lower bound", e.budget));
            }
        }
    }
    if spec.ops.contains(&SweepOp::Fvs) {
        let t = min_cycle_transversal(&d, DEFAULT_NODE_BUDGET);
        row.fvs_size = Some(t.size());
        row.fvs_exact = Some(t.optimality == Optimality::Exact);
    }
    if !errors.is_empty() {
        row.error = Some(errors.join("; "));
    }
    row
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    /// Exponent b in gap ≈ A·n^b (·(ln n)^c).
    pub slope: f64,
    pub slope_stderr: f64,
    /// 95% interval for the slope; absent without residual degrees of freedom.
    pub slope_ci95: Option<(f64, f64)>,
    pub intercept: f64,
    /// Coefficient c of ln ln n when the log correction is fitted.
    pub log_coefficient: Option<f64>,
    pub log_coefficient_ci95: Option<(f64, f64)>,
    pub points: usize,
    pub r_squared: f64,
}

/// Least squares of ln gap on ln n (and ln ln n with `log_correction`) over
/// `series[window]`.
pub fn fit_decay(series: &[(f64, f64)], window: Option<Range<usize>>, log_correction: bool) -> Result<DecayFit> {
    let window = window.unwrap_or(0..series.len());
    let pts = series
        .get(window.clone())
        .ok_or_else(|| Error::InvalidParameter(format!("window {window:?} exceeds {} points", series.len())))?;
    let k = if log_correction { 3 } else { 2 };
    if pts.len() < 3 || pts.len() < k {
        return Err(Error::InvalidParameter("a decay fit needs at least 3 points".into()));
    }
    if let Some((n, g)) = pts.iter().find(|(n, g)| !(*g > 0.0) || !(*n > 0.0) || (log_correction && *n <= 1.0)) {
        return Err(Error::InvalidParameter(format!("nonpositive gap or order in the window: ({n}, {g})")));
    }
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|(n, _)| {
            let mut r = vec![1.0, n.ln()];
            if log_correction {
                r.push(n.ln().ln());
            }
            r
        })
        .collect();
    let y: Vec<f64> = pts.iter().map(|(_, g)| g.ln()).collect();
    let mut xtx = DenseMatrix::<f64>::zeros(k);
    let mut xty = vec![0.0; k];
    for (r, yi) in rows.iter().zip(&y) {
        for i in 0..k {
            xty[i] += r[i] * yi;
            for j in 0..k {
                xtx[(i, j)] += r[i] * r[j];
            }
        }
    }
    let inv = xtx.inverse().map_err(|_| Error::InvalidParameter("degenerate n values in the window".into()))?;
    let beta: Vec<f64> = (0..k).map(|i| (0..k).map(|j| inv[(i, j)] * xty[j]).sum()).collect();
    let resid: Vec<f64> = rows.iter().zip(&y).map(|(r, yi)| yi - r.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>()).collect();
    let sse: f64 = resid.iter().map(|e| e * e).sum();
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let dof = pts.len() - k;
    let sigma2 = if dof > 0 { sse / dof as f64 } else { f64::NAN };
    let se = |i: usize| (sigma2 * inv[(i, i)]).max(0.0).sqrt();
    let t = (dof > 0).then(|| StudentsT::new(0.0, 1.0, dof as f64).expect("dof > 0").inverse_cdf(0.975));
    let ci = |i: usize| t.map(|t| (beta[i] - t * se(i), beta[i] + t * se(i)));
    Ok(DecayFit {
        slope: beta[1],
        slope_stderr: se(1),
        slope_ci95: ci(1),
        intercept: beta[0],
        log_coefficient: log_correction.then(|| beta[2]),
        log_coefficient_ci95: if log_correction { ci(2) } else { None },
        points: pts.len(),
        r_squared: if sst > 0.0 { 1.0 - sse / sst } else { 1.0 },
    })
}

/// `count` integers spread geometrically over [lo, hi], deduplicated.
pub fn log_grid(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count <= 1 || lo >= hi {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut g: Vec<usize> =
        (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize).collect();
    g.dedup();
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_slope() {
        let s: Vec<(f64, f64)> = [10.0, 100.0, 1000.0, 1e4].iter().map(|&n: &f64| (n, n.powf(-0.5))).collect();
        let fit = fit_decay(&s, None, false).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-6);
        let (lo, hi) = fit.slope_ci95.unwrap();
        assert!(lo <= -0.5 + 1e-6 && hi >= -0.5 - 1e-6);
    }

    #[test]
    fn log_over_n_needs_the_correction() {
        let s: Vec<(f64, f64)> = log_grid(100, 100_000, 12).into_iter().map(|n| (n as f64, (n as f64).ln() / n as f64)).collect();
        let plain = fit_decay(&s, None, false).unwrap();
        assert!(plain.slope > -1.0 && plain.slope < -0.8);
        let corr = fit_decay(&s, None, true).unwrap();
        assert!((corr.log_coefficient.unwrap() - 1.0).abs() < 1e-6);
        assert!((corr.slope + 1.0).abs() < 1e-6);
    }

    #[test]
    fn fit_errors() {
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 0.5)], None, false).is_err());
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.1)], None, false).is_err());
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 0.5), (3.0, 0.1)], Some(0..5), false).is_err());
    }

    #[test]
    fn empty_grid_gives_empty_table() {
        let t = run_sweep(&SweepSpec::new("example2", vec![])).unwrap();
        assert!(t.rows.is_empty());
        assert!(run_sweep(&SweepSpec::new("example2", vec![5, 5])).is_err());
    }

    #[test]
    fn example1_rows_and_cell_errors() {
        let mut spec = SweepSpec::new("finite", vec![1, 2, 3]);
        spec.params = serde_json::json!({"digraph": {"order": 2, "arcs": [[1, 2, "1/2"], [2, 1, "1/2"]]}});
        let t = run_sweep(&spec).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert!(t.rows[2].error.is_some());
        assert_eq!(t.rows[1].fvs_size, Some(1));
        assert!((t.rows[1].lambda_n.unwrap() - 0.5).abs() < 1e-12);
        assert!((t.rows[1].omega_n.unwrap() - 0.5).abs() < 1e-12);

        let t = run_sweep(&SweepSpec::new("example1", vec![10, 20, 40])).unwrap();
        for r in &t.rows {
            assert_eq!(r.fvs_size, Some(1));
            assert!(r.n_one_minus_lambda.unwrap() > 0.19);
            assert!(r.error.is_none());
        }
        assert_eq!(r_fields_len(&t), SWEEP_COLUMNS.len());
    }

    fn r_fields_len(t: &SweepTable) -> usize {
        t.rows[0].fields().len()
    }

    #[test]
    fn grid_helper() {
        assert_eq!(log_grid(10, 1000, 3), vec![10, 100, 1000]);
        assert_eq!(log_grid(5, 5, 4), vec![5]);
    }
}
