//! Experiment harness: noisy predictions over a grid of interruption times,
//! compared against the doubling schedule `(2^i)`.
//!
//! Every `(grid point, trial)` pair draws from its own keyed random stream,
//! which keeps results independent of evaluation order, thread count, and
//! of which other grid points are present.

mod lower_bound;
mod output;

pub use lower_bound::{
    family_consistency, lower_bound_search, lower_bound_search_capped, LowerBoundReport,
    DEFAULT_FAMILY_CAP,
};
pub use output::{
    emit_results, read_plotdata, read_results, read_summary, write_report, OutputFormat, PlotData,
    ResultRow, SummaryRecord,
};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{flip_count, sample_tau, NoiseKind, RngStream, TimeNoiseModel};
use crate::query_pred::{
    best_index, decode_robust_with, encode_answers, member_ratio, robust_family, AnswerBits,
    DecodeRule,
};
use crate::schedule::{largest_completed, ContractSchedule, RobustnessParams};
use crate::time_pred::buffered_schedule;

/// Strong improvement: the prediction schedule completes a contract at
/// least this factor longer than the baseline.
pub const STRONG_IMPROVEMENT_FACTOR: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Setting {
    Time,
    Query,
}

impl Setting {
    pub fn as_str(&self) -> &'static str {
        match self {
            Setting::Time => "time",
            Setting::Query => "query",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            t_min: 2.0,
            t_max: 2f64.powi(20),
            points: 1000,
            spacing: Spacing::Linear,
        }
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let steps = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                if k + 1 == self.points {
                    return self.t_max;
                }
                let frac = k as f64 / steps;
                match self.spacing {
                    Spacing::Linear => self.t_min + (self.t_max - self.t_min) * frac,
                    Spacing::Log => self.t_min * (self.t_max / self.t_min).powf(frac),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub setting: Setting,
    pub r: f64,
    pub grid: Grid,
    pub trials: usize,
    /// `H`: bound on the relative time error, or on the query error fraction.
    pub error_bound: f64,
    pub noise_kind: NoiseKind,
    /// Relative deviation for truncated-normal noise; `H / 2` when absent.
    pub sigma: Option<f64>,
    /// Number of binary queries in the query setting.
    pub queries: u32,
    /// Decoder used by ROBUST_p in the query setting.
    pub decode_rule: DecodeRule,
    /// Buffer parameters `p`, one summary row each.
    pub buffers: Vec<f64>,
    pub seed: u64,
    /// Worker cap; `None` uses every core.
    pub jobs: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(setting: Setting) -> Self {
        Self {
            setting,
            r: 4.0,
            grid: Grid::default(),
            trials: 1000,
            error_bound: 0.1,
            noise_kind: NoiseKind::TruncatedNormal,
            sigma: None,
            queries: 100,
            decode_rule: DecodeRule::ShiftedMinusOne,
            buffers: vec![0.05, 0.1, 0.2, 0.3],
            seed: 1,
            jobs: None,
        }
    }

    pub fn noise_model(&self) -> Result<TimeNoiseModel> {
        match self.noise_kind {
            NoiseKind::TruncatedNormal => {
                TimeNoiseModel::truncated_normal(self.error_bound, self.sigma)
            }
            NoiseKind::Uniform => TimeNoiseModel::uniform(self.error_bound),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        RobustnessParams::new(self.r).map_err(|e| Error::Config(e.to_string()))?;
        if self.grid.points < 2 {
            return bad(format!(
                "grid needs at least 2 points, got {}",
                self.grid.points
            ));
        }
        if !(self.grid.t_min >= 1.0 && self.grid.t_max > self.grid.t_min) {
            return bad(format!(
                "grid must satisfy 1 <= t_min < t_max, got [{}, {}]",
                self.grid.t_min, self.grid.t_max
            ));
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.error_bound) {
            return bad(format!("H must lie in [0, 1), got {}", self.error_bound));
        }
        if self.buffers.is_empty() {
            return bad("at least one buffer value p is required".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        self.noise_model()
            .map_err(|e| Error::Config(e.to_string()))?;
        match self.setting {
            Setting::Time => {
                for &p in &self.buffers {
                    if !(0.0..1.0).contains(&p) {
                        return bad(format!("buffer p must lie in [0, 1), got {p}"));
                    }
                    // smallest possible shifted prediction must stay >= 1
                    let lowest = self.grid.t_min * (1.0 - self.error_bound) * (1.0 - p);
                    if lowest < 1.0 {
                        return bad(format!(
                            "t_min too small: T(1-H)(1-p) = {lowest} < 1 for p = {p}"
                        ));
                    }
                }
            }
            Setting::Query => {
                if self.queries == 0 {
                    return bad("queries must be at least 1".into());
                }
                for &p in &self.buffers {
                    if !(0.0..=0.5).contains(&p) {
                        return bad(format!("buffer p must lie in [0, 1/2], got {p}"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-buffer outcome of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub p: f64,
    /// Mean acceleration ratio at each grid point.
    pub mean_ratio: Vec<f64>,
    pub overall_mean: f64,
    pub improvement_pct: f64,
    pub strong_improvement_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub grid: Vec<f64>,
    /// Acceleration ratio of `(2^i)` at each grid point.
    pub baseline: Vec<f64>,
    pub rows: Vec<SummaryRow>,
}

pub fn baseline_schedule() -> ContractSchedule {
    ContractSchedule::exponential(2.0).expect("base 2 is valid")
}

/// Percentages of grid points where `means` beats `baseline` strictly, and
/// where the baseline ratio is at least [`STRONG_IMPROVEMENT_FACTOR`] times
/// larger (the completed contract is at least 20% longer).
pub fn compare_to_baseline(means: &[f64], baseline: &[f64]) -> Result<(f64, f64)> {
    if means.len() != baseline.len() || means.is_empty() {
        return Err(Error::Config(format!(
            "series are not aligned: {} vs {} points",
            means.len(),
            baseline.len()
        )));
    }
    let n = means.len() as f64;
    let better = means.iter().zip(baseline).filter(|(m, b)| m < b).count() as f64;
    let strong = means
        .iter()
        .zip(baseline)
        .filter(|(m, b)| **m < **b && **b >= STRONG_IMPROVEMENT_FACTOR * **m)
        .count() as f64;
    Ok((100.0 * better / n, 100.0 * strong / n))
}

fn in_pool<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(work()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {j} workers: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

fn assemble(
    cfg: &ExperimentConfig,
    grid: Vec<f64>,
    per_point: Vec<(f64, Vec<f64>)>,
) -> Result<ExperimentReport> {
    let baseline: Vec<f64> = per_point.iter().map(|(b, _)| *b).collect();
    let rows = cfg
        .buffers
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let mean_ratio: Vec<f64> = per_point.iter().map(|(_, m)| m[k]).collect();
            let overall_mean = mean_ratio.iter().sum::<f64>() / mean_ratio.len() as f64;
            let (improvement_pct, strong_improvement_pct) =
                compare_to_baseline(&mean_ratio, &baseline)?;
            Ok(SummaryRow {
                p,
                mean_ratio,
                overall_mean,
                improvement_pct,
                strong_improvement_pct,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config: cfg.clone(),
        grid,
        baseline,
        rows,
    })
}

fn baseline_ratio(t: f64) -> Result<f64> {
    Ok(t / largest_completed(&baseline_schedule(), t)?)
}

/// Time-prediction experiment: at every grid point `T` and trial, sample a
/// prediction `tau` around `T`, build the buffered schedule from `tau`, and
/// evaluate it at the true `T`.
pub fn run_time_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.setting != Setting::Time {
        return Err(Error::Config("expected the time-prediction setting".into()));
    }
    cfg.validate()?;
    let model = cfg.noise_model()?;
    let grid = cfg.grid.values();
    let point = |t: f64| -> Result<(f64, Vec<f64>)> {
        let mut sums = vec![0.0; cfg.buffers.len()];
        for trial in 0..cfg.trials as u64 {
            let mut rng = RngStream::for_point(cfg.seed, t, trial).rng();
            let tau = sample_tau(t, &model, &mut rng)?.tau();
            for (sum, &p) in sums.iter_mut().zip(&cfg.buffers) {
                let x = buffered_schedule(cfg.r, tau, p)?;
                *sum += t / largest_completed(&x, t)?;
            }
        }
        let means = sums.iter().map(|s| s / cfg.trials as f64).collect();
        Ok((baseline_ratio(t)?, means))
    };
    let per_point = in_pool(cfg.jobs, || {
        grid.par_iter()
            .map(|&t| point(t))
            .collect::<Result<Vec<_>>>()
    })??;
    assemble(cfg, grid, per_point)
}

fn flip_positions<R: Rng + ?Sized>(rng: &mut R, n: usize, eta: f64) -> Vec<usize> {
    index::sample(rng, n, flip_count(eta, n)).into_vec()
}

/// Query-prediction experiment with ROBUST_p: encode the error-free answers
/// for the best member at `T`, corrupt a fraction `eta ~ U[0, H]` of them,
/// decode with buffer `p`, and evaluate the chosen member at `T`.
///
/// Within a trial every buffer value sees the same corrupted positions.
pub fn run_query_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    if cfg.setting != Setting::Query {
        return Err(Error::Config(
            "expected the query-prediction setting".into(),
        ));
    }
    cfg.validate()?;
    let n = cfg.queries as usize;
    let families = cfg
        .buffers
        .iter()
        .map(|&p| robust_family(cfg.r, cfg.queries, p))
        .collect::<Result<Vec<_>>>()?;
    let grid = cfg.grid.values();
    let point = |t: f64| -> Result<(f64, Vec<f64>)> {
        let answers = families
            .iter()
            .map(|f| encode_answers(best_index(f, t)?, n))
            .collect::<Result<Vec<_>>>()?;
        let mut sums = vec![0.0; families.len()];
        for trial in 0..cfg.trials as u64 {
            let mut rng = RngStream::for_point(cfg.seed, t, trial).rng();
            let eta = if cfg.error_bound > 0.0 {
                rng.random_range(0.0..=cfg.error_bound)
            } else {
                0.0
            };
            let flips = flip_positions(&mut rng, n, eta);
            for (k, family) in families.iter().enumerate() {
                let mut bits = answers[k].bits().to_vec();
                for &pos in &flips {
                    bits[pos] = !bits[pos];
                }
                let m =
                    decode_robust_with(&AnswerBits::new(bits), cfg.buffers[k], cfg.decode_rule)?;
                sums[k] += member_ratio(family, m, t)?;
            }
        }
        let means = sums.iter().map(|s| s / cfg.trials as f64).collect();
        Ok((baseline_ratio(t)?, means))
    };
    let per_point = in_pool(cfg.jobs, || {
        grid.par_iter()
            .map(|&t| point(t))
            .collect::<Result<Vec<_>>>()
    })??;
    assemble(cfg, grid, per_point)
}

/// Dispatches on `cfg.setting`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.setting {
        Setting::Time => run_time_experiment(cfg),
        Setting::Query => run_query_experiment(cfg),
    }
}
