//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each exported function returns a flat `Float64Array`; the page draws it
//! on a canvas.

use wasm_bindgen::prelude::*;

use anneal_core::ensemble::{run_ensemble_with_workers, sweep_t, Mode};
use anneal_core::oracle::lz_sweep;
use anneal_core::{EnsembleConfig, QubitCount, SegmentSchedule};

/// Largest register the page will anneal, to keep the tab responsive.
pub const MAX_DEMO_QUBITS: u32 = 12;
pub const MAX_DEMO_RUNS: usize = 5000;

fn demo_qubits(n: u32) -> Result<QubitCount, String> {
    if n > MAX_DEMO_QUBITS {
        return Err(format!("the demo is limited to {MAX_DEMO_QUBITS} qubits"));
    }
    QubitCount::new(n).map_err(|e| e.to_string())
}

fn grid(tmin: f64, tmax: f64, points: usize) -> Result<Vec<f64>, String> {
    if points == 0 || points > 400 || !(tmin > 0.0 && tmax >= tmin && tmax.is_finite()) {
        return Err(format!("bad range [{tmin}, {tmax}] with {points} points"));
    }
    let step = if points > 1 {
        (tmax - tmin) / (points - 1) as f64
    } else {
        0.0
    };
    Ok((0..points).map(|i| tmin + step * i as f64).collect())
}

/// `[T0, P0, T1, P1, ...]` for the two-level sweep.
pub fn lz_curve_impl(delta: f64, tmin: f64, tmax: f64, points: usize) -> Result<Vec<f64>, String> {
    grid(tmin, tmax, points)?;
    let pts = lz_sweep(delta, tmin, tmax, points, &SegmentSchedule::default())
        .map_err(|e| e.to_string())?;
    Ok(pts.into_iter().flat_map(|(t, p)| [t, p]).collect())
}

/// Bin counts followed by the number of failed runs.
pub fn ensemble_histogram_impl(
    qubits: u32,
    time: f64,
    runs: usize,
    seed: u64,
    bins: usize,
) -> Result<Vec<f64>, String> {
    if runs > MAX_DEMO_RUNS {
        return Err(format!("the demo is limited to {MAX_DEMO_RUNS} runs"));
    }
    let mut cfg = EnsembleConfig::new(demo_qubits(qubits)?, time, runs, seed);
    cfg.bins = bins;
    let res = run_ensemble_with_workers(&cfg, 1).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = res.histogram.iter().map(|&c| c as f64).collect();
    out.push(res.failures.len() as f64);
    Ok(out)
}

/// `[T0, P0, ...]` for one instance; `P` is NaN where a point failed.
pub fn t_curve_impl(
    qubits: u32,
    seed: u64,
    tmin: f64,
    tmax: f64,
    points: usize,
    l_scale: f64,
) -> Result<Vec<f64>, String> {
    let n = demo_qubits(qubits)?;
    let times = grid(tmin, tmax, points)?;
    let mode = if l_scale > 0.0 {
        Mode::Lindblad { l_scale }
    } else {
        Mode::Unitary
    };
    let curve =
        sweep_t(n, seed, &times, mode, &SegmentSchedule::default()).map_err(|e| e.to_string())?;
    Ok(curve
        .times
        .iter()
        .zip(&curve.probabilities)
        .flat_map(|(&t, p)| [t, p.unwrap_or(f64::NAN)])
        .collect())
}

fn js(r: Result<Vec<f64>, String>) -> Result<Vec<f64>, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn lz_curve(delta: f64, tmin: f64, tmax: f64, points: usize) -> Result<Vec<f64>, JsValue> {
    js(lz_curve_impl(delta, tmin, tmax, points))
}

#[wasm_bindgen]
pub fn ensemble_histogram(
    qubits: u32,
    time: f64,
    runs: usize,
    seed: u32,
    bins: usize,
) -> Result<Vec<f64>, JsValue> {
    js(ensemble_histogram_impl(
        qubits,
        time,
        runs,
        u64::from(seed),
        bins,
    ))
}

#[wasm_bindgen]
pub fn t_curve(
    qubits: u32,
    seed: u32,
    tmin: f64,
    tmax: f64,
    points: usize,
    l_scale: f64,
) -> Result<Vec<f64>, JsValue> {
    js(t_curve_impl(
        qubits,
        u64::from(seed),
        tmin,
        tmax,
        points,
        l_scale,
    ))
}
