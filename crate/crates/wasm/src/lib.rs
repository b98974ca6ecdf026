//! WebAssembly bindings behind `www/index.html`. Each export returns a JSON
//! string; the plain functions underneath are usable from native code.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use substoch_core::constructions::{Example1, Example2};
use substoch_core::inequalities::{run_suite, Suite, SuiteSpec};
use substoch_core::scalar::Rational;
use substoch_core::spectral::{perron_root, DEFAULT_TOL};
use substoch_core::sweep::{fit_decay, log_grid};
use substoch_core::Result;

const MAX_LADDER_N: usize = 10_000_000;
const MAX_RATE_N: usize = 2000;
const MAX_SUITE_COUNT: usize = 500;
const MAX_SUITE_ORDER: usize = 10;

/// λ_n and λ − λ_n for the star with a_k = k^{−(1+ε)/2}, with the fitted
/// decay exponent of the gap.
pub fn example2_ladder(epsilon: f64, n_lo: usize, n_hi: usize, points: usize) -> Result<Value> {
    let e = Example2::power_law((1.0 + epsilon) / 2.0)?;
    let grid = log_grid(n_lo.max(2), n_hi.clamp(2, MAX_LADDER_N), points.clamp(2, 200));
    let rows: Vec<(usize, f64, f64)> = grid.iter().map(|&n| (n, e.lambda(n), e.gap(n))).collect();
    let series: Vec<(f64, f64)> = rows.iter().map(|&(n, _, g)| (n as f64, g)).collect();
    let fit = fit_decay(&series, None, false).ok();
    Ok(json!({
        "limit": e.limit_squared().sqrt(),
        "rows": rows.iter().map(|(n, l, g)| json!({"n": n, "lambda_n": l, "gap": g})).collect::<Vec<_>>(),
        "slope": fit.as_ref().map(|f| f.slope),
        "slope_ci95": fit.and_then(|f| f.slope_ci95),
    }))
}

/// n(1 − ω_n)/ln n from the closed form and n(1 − λ_n) from power iteration
/// on leading truncations, for f_n ∝ n^{−(1+ε)}.
pub fn example1_rates(epsilon: f64, n_max: usize, points: usize) -> Result<Value> {
    let e = Example1::power_law(epsilon)?;
    let f = e.family::<f64>()?;
    let grid = log_grid(2, n_max.clamp(2, MAX_RATE_N), points.clamp(2, 60));
    let mut rows = Vec::with_capacity(grid.len());
    for n in grid {
        let omega = e.omega_closed_form(n);
        let lambda = perron_root(&f.truncate(n)?, DEFAULT_TOL).value;
        let nf = n as f64;
        rows.push(json!({
            "n": n,
            "omega_n": omega,
            "lambda_n": lambda,
            "omega_rate": nf * (1.0 - omega) / nf.ln(),
            "lambda_rate": nf * (1.0 - lambda),
        }));
    }
    Ok(json!({ "det_lower_bound": e.det_lower_bound(), "rows": rows }))
}

/// One seeded inequality suite, exact or float.
pub fn inequality_check(suite: &str, seed: u64, count: usize, order_max: usize, exact: bool) -> Result<Value> {
    let suite: Suite = suite.parse()?;
    let spec = SuiteSpec {
        count: count.clamp(1, MAX_SUITE_COUNT),
        seed,
        order_min: 2,
        order_max: order_max.clamp(2, MAX_SUITE_ORDER),
        ..SuiteSpec::default()
    };
    let report = if exact { run_suite::<Rational>(suite, &spec) } else { run_suite::<f64>(suite, &spec) };
    let passed = report.passed();
    let mut v = serde_json::to_value(report)?;
    v["passed"] = json!(passed);
    Ok(v)
}

fn to_js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = example2Ladder)]
pub fn example2_ladder_js(epsilon: f64, n_lo: u32, n_hi: u32, points: u32) -> std::result::Result<String, JsError> {
    to_js(example2_ladder(epsilon, n_lo as usize, n_hi as usize, points as usize))
}

#[wasm_bindgen(js_name = example1Rates)]
pub fn example1_rates_js(epsilon: f64, n_max: u32, points: u32) -> std::result::Result<String, JsError> {
    to_js(example1_rates(epsilon, n_max as usize, points as usize))
}

#[wasm_bindgen(js_name = inequalityCheck)]
pub fn inequality_check_js(suite: &str, seed: u32, count: u32, order_max: u32, exact: bool) -> std::result::Result<String, JsError> {
    to_js(inequality_check(suite, seed as u64, count as usize, order_max as usize, exact))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_slope_near_minus_half() {
        let v = example2_ladder(0.5, 1000, 100_000, 12).unwrap();
        let s = v["slope"].as_f64().unwrap();
        assert!((-0.6..=-0.4).contains(&s), "{s}");
        assert_eq!(v["rows"].as_array().unwrap().len(), 12);
    }

    #[test]
    fn rates_stay_bounded() {
        let v = example1_rates(0.5, 400, 8).unwrap();
        for r in v["rows"].as_array().unwrap() {
            assert!(r["lambda_rate"].as_f64().unwrap() > 0.0);
            assert!(r["omega_rate"].as_f64().unwrap() < 2.0);
        }
    }

    #[test]
    fn suites_pass_in_both_modes() {
        for exact in [true, false] {
            let v = inequality_check("ksv", 9, 10, 6, exact).unwrap();
            assert_eq!(v["passed"], true);
            assert_eq!(v["instances_tested"], 10);
        }
        assert!(inequality_check("nope", 0, 1, 4, true).is_err());
        assert!(example2_ladder(0.0, 10, 100, 4).is_err());
    }
}
