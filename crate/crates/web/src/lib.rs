//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string; errors come back as
//! `{"error": "..."}` so the page can show them inline.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use predsched::experiments::{run_experiment, ExperimentConfig, Grid, Setting, Spacing};
use predsched::query_pred::{ideal_consistency, robust_base};
use predsched::schedule::{acceleration_ratio, cr_br, ContractSchedule};
use predsched::time_pred::{buffered_schedule, h_thresholds, lemma_bound, SignedError};

#[derive(Serialize)]
struct Curves {
    t: Vec<f64>,
    baseline: Vec<f64>,
    buffered: Vec<f64>,
    /// `min(c_r (1+eta)/(1-p), r)` at each point for eta = |T/tau - 1|.
    bound: Vec<f64>,
}

#[derive(Serialize)]
struct Series {
    p: f64,
    values: Vec<f64>,
    overall_mean: f64,
    improvement_pct: f64,
    strong_improvement_pct: f64,
}

#[derive(Serialize)]
struct Experiment {
    t: Vec<f64>,
    baseline: Vec<f64>,
    series: Vec<Series>,
}

#[derive(Serialize)]
struct Bounds {
    c_r: f64,
    b_r: f64,
    h_lower: f64,
    h_dom: f64,
    lemma_consistency: f64,
    ideal_consistency: f64,
    robust_base: f64,
    robust_bound: f64,
}

fn to_json<T: Serialize>(result: predsched::Result<T>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).unwrap_or_else(|e| error_json(&e.to_string())),
        Err(e) => error_json(&e.to_string()),
    }
}

fn error_json(msg: &str) -> String {
    serde_json::json!({ "error": msg }).to_string()
}

fn log_grid(t_min: f64, t_max: f64, points: usize) -> Vec<f64> {
    Grid {
        t_min,
        t_max,
        points: points.max(2),
        spacing: Spacing::Log,
    }
    .values()
}

fn curves(r: f64, tau: f64, p: f64, t_max: f64, points: usize) -> predsched::Result<Curves> {
    let params = cr_br(r)?;
    let x = buffered_schedule(r, tau, p)?;
    let doubling = ContractSchedule::exponential(2.0)?;
    let t = log_grid(1.0, t_max.max(2.0), points);
    let mut out = Curves {
        t: Vec::with_capacity(t.len()),
        baseline: Vec::with_capacity(t.len()),
        buffered: Vec::with_capacity(t.len()),
        bound: Vec::with_capacity(t.len()),
    };
    for &ti in &t {
        out.baseline.push(acceleration_ratio(&doubling, ti)?.ratio);
        out.buffered.push(acceleration_ratio(&x, ti)?.ratio);
        let err = predsched::noise::error_of(tau, ti);
        let bound = if err.eta <= 1.0 {
            lemma_bound(&params, p, SignedError::new(err.eta, err.sign)?)
        } else {
            r
        };
        out.bound.push(bound);
    }
    out.t = t;
    Ok(out)
}

/// Acceleration ratio of the buffered schedule for prediction `tau` and of
/// the doubling schedule on a log grid of `[1, t_max]`.
#[wasm_bindgen]
pub fn ratio_curves(r: f64, tau: f64, p: f64, t_max: f64, points: usize) -> String {
    to_json(curves(r, tau, p, t_max, points))
}

#[allow(clippy::too_many_arguments)]
fn experiment(
    query: bool,
    h: f64,
    buffers: &[f64],
    points: usize,
    trials: usize,
    seed: u64,
    t_max: f64,
) -> predsched::Result<Experiment> {
    let mut cfg = ExperimentConfig::new(if query { Setting::Query } else { Setting::Time });
    cfg.error_bound = h;
    cfg.buffers = buffers.to_vec();
    cfg.grid.points = points;
    cfg.grid.t_max = t_max;
    cfg.trials = trials;
    cfg.seed = seed;
    let rep = run_experiment(&cfg)?;
    Ok(Experiment {
        t: rep.grid,
        baseline: rep.baseline,
        series: rep
            .rows
            .into_iter()
            .map(|r| Series {
                p: r.p,
                values: r.mean_ratio,
                overall_mean: r.overall_mean,
                improvement_pct: r.improvement_pct,
                strong_improvement_pct: r.strong_improvement_pct,
            })
            .collect(),
    })
}

/// Runs the time (`query = false`) or query experiment on a linear grid of
/// `[2, t_max]` and returns the mean ratio series per buffer value.
#[wasm_bindgen]
pub fn run_demo_experiment(
    query: bool,
    h: f64,
    buffers: &[f64],
    points: usize,
    trials: usize,
    seed: u64,
    t_max: f64,
) -> String {
    to_json(experiment(query, h, buffers, points, trials, seed, t_max))
}

fn bounds(r: f64, p: f64, n: u32) -> predsched::Result<Bounds> {
    let params = cr_br(r)?;
    let th = h_thresholds(&params);
    let rb = robust_base(&params, n, p);
    Ok(Bounds {
        c_r: params.c,
        b_r: params.b,
        h_lower: th.lower,
        h_dom: th.dominance,
        lemma_consistency: lemma_bound(&params, p.min(0.99), SignedError::zero()),
        ideal_consistency: ideal_consistency(&params, n),
        robust_base: rb.base,
        robust_bound: rb.bound,
    })
}

/// Closed-form values for robustness `r`, buffer `p` and `n` queries.
#[wasm_bindgen]
pub fn closed_form(r: f64, p: f64, n: u32) -> String {
    to_json(bounds(r, p, n))
}
