//! WebAssembly exports for the static demo page in `www/`. Every export
//! takes plain numbers or strings and returns a JSON string; failures come
//! back as `{"error": "..."}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;
use wellness_core::report::histogram_counts;
use wellness_core::stats::{classify_strength, p_value, SIGNIFICANCE_LEVEL};
use wellness_core::{correlate, Method, PairedSeries, Variable};
use wellness_emu::{draw_values, EnvironmentProfile};

fn finish(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// Parses numbers separated by commas, whitespace or semicolons.
pub fn parse_numbers(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect()
}

pub fn correlate_text(x: &str, y: &str) -> Result<Value, String> {
    let s = PairedSeries::new(parse_numbers(x)?, parse_numbers(y)?).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for m in Method::ALL {
        match correlate(m, &s) {
            Ok(c) => rows.push(json!({
                "method": m.name(),
                "r": c.r,
                "p_value": c.p_value,
                "n": c.n,
                "strength": c.strength.to_string(),
                "significant": c.significant,
                "highlighted": c.highlighted(),
            })),
            Err(e) => rows.push(json!({ "method": m.name(), "error": e.to_string() })),
        }
    }
    Ok(json!({ "n": s.len(), "results": rows }))
}

/// Significance of a coefficient `r` from `n` tie-free pairs.
pub fn significance(method: &str, r: f64, n: usize) -> Result<Value, String> {
    let m = method.parse::<Method>().map_err(|e| e.to_string())?;
    if n < 3 {
        return Err("n must be at least 3".into());
    }
    // only the length and the tie structure of the series matter here
    let idx: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let s = PairedSeries::new(idx.clone(), idx).map_err(|e| e.to_string())?;
    let p = p_value(m, r, &s).map_err(|e| e.to_string())?;
    let strength = classify_strength(r).map_err(|e| e.to_string())?;
    Ok(json!({
        "method": m.name(),
        "r": r,
        "n": n,
        "p_value": p,
        "strength": strength.to_string(),
        "significant": p < SIGNIFICANCE_LEVEL,
    }))
}

/// Draws `n` readings of one variable from a builtin profile and bins them.
pub fn histogram(profile: &str, variable: &str, n: usize, bins: usize, seed: u64) -> Result<Value, String> {
    let mut p = EnvironmentProfile::builtin(profile).ok_or_else(|| format!("unknown profile `{profile}`"))?;
    let v = variable.parse::<Variable>().map_err(|e| e.to_string())?;
    if n == 0 || n > 1_000_000 || bins == 0 || bins > 500 {
        return Err("need 1..=1000000 draws and 1..=500 bins".into());
    }
    p.seed = seed;
    let values = draw_values(&p, v, n);
    let counts = histogram_counts(&values, bins);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = values.iter().sum::<f64>() / n as f64;
    Ok(json!({
        "profile": profile,
        "variable": v.name(),
        "label": v.label(),
        "n": n,
        "min": min,
        "max": max,
        "mean": mean,
        "counts": counts,
    }))
}

#[wasm_bindgen(js_name = correlateSeries)]
pub fn correlate_series(x: &str, y: &str) -> String {
    finish(correlate_text(x, y))
}

#[wasm_bindgen(js_name = significanceOf)]
pub fn significance_of(method: &str, r: f64, n: usize) -> String {
    finish(significance(method, r, n))
}

#[wasm_bindgen(js_name = profileHistogram)]
pub fn profile_histogram(profile: &str, variable: &str, n: usize, bins: usize, seed: u64) -> String {
    finish(histogram(profile, variable, n, bins, seed))
}

#[wasm_bindgen(js_name = profileNames)]
pub fn profile_names() -> String {
    json!(wellness_emu::BUILTIN_PROFILES).to_string()
}
