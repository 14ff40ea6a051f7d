//! Contract schedules and their evaluation under interruptions.
//!
//! A schedule is an increasing sequence of contract lengths `x(1) < x(2) < ...`
//! executed back to back on one processor. Interrupting the system at time `T`
//! leaves the largest contract whose completion time does not exceed `T` as
//! the usable result; the acceleration ratio at `T` is `T` divided by that
//! length.
//!
//! Conventions used throughout the crate:
//!
//! * Interruptions only happen at `T >= 1`, and when nothing has completed by
//!   `T` the usable result is a unit-length contract (`ell = 1`). The same unit
//!   plays the role of the zeroth contract in [`empirical_robustness`].
//! * A contract completing exactly at `T` counts as completed. Completion
//!   times are compared with a relative tolerance of [`COMPLETION_TOL`] so
//!   that constructions which place a completion at a prescribed instant
//!   survive floating-point summation.
//! * Worst-case interruptions ("just before a completion") are taken at
//!   [`just_before`]`(c)`, a relative offset of [`WORST_CASE_EPS`].

use std::fmt;

use crate::error::{domain, Result};

/// Relative tolerance when deciding whether a completion time is `<= T`.
pub const COMPLETION_TOL: f64 = 1e-12;

/// Relative offset of a worst-case interruption before a completion time.
pub const WORST_CASE_EPS: f64 = 1e-9;

/// Hard cap on how many contracts a lazy query may materialize.
pub(crate) const MAX_CONTRACTS: usize = 1 << 20;

/// True when a contract completing at `completion` is usable at time `t`.
#[inline]
pub fn completes_by(completion: f64, t: f64) -> bool {
    completion <= t + COMPLETION_TOL * t.abs().max(1.0)
}

/// The worst-case interruption instant for a contract completing at `completion`.
#[inline]
pub fn just_before(completion: f64) -> f64 {
    completion * (1.0 - WORST_CASE_EPS)
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Explicit {
        lengths: Vec<f64>,
        completions: Vec<f64>,
    },
    Geometric {
        base: f64,
        scale: f64,
    },
}

/// An increasing sequence of contract lengths.
///
/// Either an explicit finite list or the infinite geometric sequence
/// `x(i) = scale * base^i`, whose contracts are generated on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractSchedule {
    kind: Kind,
}

/// One contract of a schedule together with its (1-based) position and
/// completion time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contract {
    pub index: usize,
    pub length: f64,
    pub completion: f64,
}

impl ContractSchedule {
    /// Builds a schedule from an explicit, strictly increasing list of
    /// positive lengths.
    pub fn explicit(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(domain("explicit schedule needs at least one contract"));
        }
        if lengths.iter().any(|x| !x.is_finite() || *x <= 0.0) {
            return Err(domain("contract lengths must be positive and finite"));
        }
        if lengths.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain("contract lengths must be strictly increasing"));
        }
        let completions = lengths
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            kind: Kind::Explicit {
                lengths,
                completions,
            },
        })
    }

    /// The schedule `x(i) = scale * base^i`.
    pub fn geometric(base: f64, scale: f64) -> Result<Self> {
        if !(base.is_finite() && base > 1.0) {
            return Err(domain(format!("geometric base must exceed 1, got {base}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(domain(format!(
                "geometric scale must be positive, got {scale}"
            )));
        }
        Ok(Self {
            kind: Kind::Geometric { base, scale },
        })
    }

    /// The exponential schedule `(base^i)`.
    pub fn exponential(base: f64) -> Result<Self> {
        Self::geometric(base, 1.0)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, Kind::Explicit { .. })
    }

    /// Number of contracts, `None` for the infinite geometric kind.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match &self.kind {
            Kind::Explicit { lengths, .. } => Some(lengths.len()),
            Kind::Geometric { .. } => None,
        }
    }

    /// `(base, scale)` for the geometric kind.
    pub fn geometric_params(&self) -> Option<(f64, f64)> {
        match self.kind {
            Kind::Geometric { base, scale } => Some((base, scale)),
            Kind::Explicit { .. } => None,
        }
    }

    /// Length of the `i`-th contract (1-based); `None` past the end of an
    /// explicit schedule or for `i == 0`.
    pub fn length(&self, i: usize) -> Option<f64> {
        if i == 0 {
            return None;
        }
        match &self.kind {
            Kind::Explicit { lengths, .. } => lengths.get(i - 1).copied(),
            Kind::Geometric { base, scale } => Some(scale * geometric_power(*base, i)),
        }
    }

    /// Completion time of the `i`-th contract, the sum of the first `i` lengths.
    pub fn completion(&self, i: usize) -> Option<f64> {
        if i == 0 {
            return Some(0.0);
        }
        match &self.kind {
            Kind::Explicit { completions, .. } => completions.get(i - 1).copied(),
            Kind::Geometric { .. } => self.contracts().nth(i - 1).map(|c| c.completion),
        }
    }

    /// Iterates over the contracts in execution order.
    pub fn contracts(&self) -> Contracts<'_> {
        Contracts {
            schedule: self,
            next: 1,
            elapsed: 0.0,
        }
    }

    /// Multiplies every contract length by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(domain(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        match &self.kind {
            Kind::Explicit { lengths, .. } => {
                Self::explicit(lengths.iter().map(|x| x * factor).collect())
            }
            Kind::Geometric { base, scale } => Self::geometric(*base, scale * factor),
        }
    }
}

impl fmt::Display for ContractSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Explicit { lengths, .. } => write!(f, "explicit(n={})", lengths.len()),
            Kind::Geometric { base, scale } => write!(f, "geometric(base={base},scale={scale})"),
        }
    }
}

// powi is exact for small exponents of dyadic bases; fall back to powf once
// the exponent no longer fits an i32.
fn geometric_power(base: f64, i: usize) -> f64 {
    match i32::try_from(i) {
        Ok(k) => base.powi(k),
        Err(_) => base.powf(i as f64),
    }
}

pub struct Contracts<'a> {
    schedule: &'a ContractSchedule,
    next: usize,
    elapsed: f64,
}

impl Iterator for Contracts<'_> {
    type Item = Contract;

    fn next(&mut self) -> Option<Contract> {
        let index = self.next;
        let (length, completion) = match &self.schedule.kind {
            Kind::Explicit {
                lengths,
                completions,
            } => (*lengths.get(index - 1)?, completions[index - 1]),
            Kind::Geometric { base, scale } => {
                let length = scale * geometric_power(*base, index);
                (length, self.elapsed + length)
            }
        };
        self.next += 1;
        self.elapsed = completion;
        Some(Contract {
            index,
            length,
            completion,
        })
    }
}

/// Robustness level `r >= 4` together with the two roots of
/// `x^2 - r x + r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RobustnessParams {
    pub r: f64,
    /// Smaller root; the best achievable consistency at robustness `r`.
    pub c: f64,
    /// Larger root; the base of the Pareto-optimal geometric schedule.
    pub b: f64,
}

impl RobustnessParams {
    pub fn new(r: f64) -> Result<Self> {
        cr_br(r)
    }
}

/// Computes `c_r = (r - sqrt(r^2 - 4r)) / 2` and `b_r = (r + sqrt(r^2 - 4r)) / 2`.
pub fn cr_br(r: f64) -> Result<RobustnessParams> {
    if !(r.is_finite() && r >= 4.0) {
        return Err(domain(format!("robustness must be at least 4, got {r}")));
    }
    let disc = (r * r - 4.0 * r).max(0.0).sqrt();
    Ok(RobustnessParams {
        r,
        c: (r - disc) / 2.0,
        b: (r + disc) / 2.0,
    })
}

/// Robustness `a^2 / (a - 1)` of the exponential schedule with base `a`.
pub fn exponential_robustness(base: f64) -> Result<f64> {
    if !(base.is_finite() && base > 1.0) {
        return Err(domain(format!(
            "exponential base must exceed 1, got {base}"
        )));
    }
    Ok(base * base / (base - 1.0))
}

fn check_interruption(t: f64) -> Result<()> {
    if t.is_finite() && t >= 1.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "interruption time must be at least 1 (an interruption can occur only after a unit of time), got {t}"
        )))
    }
}

/// Length of the largest contract completed by time `t`, or 1 if none has.
pub fn largest_completed(schedule: &ContractSchedule, t: f64) -> Result<f64> {
    check_interruption(t)?;
    let mut best = None;
    for c in schedule.contracts().take(MAX_CONTRACTS) {
        if !completes_by(c.completion, t) {
            break;
        }
        best = Some(c.length);
    }
    Ok(best.unwrap_or(1.0))
}

/// Result of evaluating a schedule at one interruption.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub t: f64,
    pub ell: f64,
    pub ratio: f64,
    pub schedule_id: String,
}

/// Pointwise acceleration ratio `T / ell(X, T)`.
pub fn acceleration_ratio(schedule: &ContractSchedule, t: f64) -> Result<EvalRecord> {
    let ell = largest_completed(schedule, t)?;
    Ok(EvalRecord {
        t,
        ell,
        ratio: t / ell,
        schedule_id: schedule.to_string(),
    })
}

/// `max_{1 <= i <= i_max} completion(i) / x(i-1)` with `x(0) = 1`.
///
/// Worst-case interruptions sit just before completions, so this is the
/// supremum of the acceleration ratio over the first `i_max` contracts.
pub fn empirical_robustness(schedule: &ContractSchedule, i_max: usize) -> f64 {
    let mut prev = 1.0;
    let mut worst = f64::NEG_INFINITY;
    for c in schedule.contracts().take(i_max) {
        worst = worst.max(c.completion / prev);
        prev = c.length;
    }
    worst
}

/// All contracts completing by `t_max`, plus the first one completing after it.
pub fn schedule_prefix(schedule: &ContractSchedule, t_max: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for c in schedule.contracts().take(MAX_CONTRACTS) {
        out.push((c.length, c.completion));
        if !completes_by(c.completion, t_max) {
            break;
        }
    }
    out
}
