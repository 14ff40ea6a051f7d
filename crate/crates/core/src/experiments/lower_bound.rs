//! Numeric corroboration of the consistency lower bound for `n` error-free
//! binary queries.
//!
//! With `n` bits the advice can only pick one of `2^n` schedules. This search
//! restricts the candidates to geometric schedules with a common base and
//! per-member offsets `base^o` on a grid of `o in [0, 1)`, and reports the
//! smallest worst-case consistency it finds when the advice always picks the
//! member with the largest completed contract. It is a heuristic check of the
//! bound, not a proof.

use crate::error::{domain, Error, Result};
use crate::schedule::{just_before, largest_completed, ContractSchedule, RobustnessParams};

/// Maximum number of candidate families evaluated by default.
pub const DEFAULT_FAMILY_CAP: u64 = 2_000_000;

/// Contract index at which worst-case interruptions are placed; deep enough
/// that `1 - base^-HORIZON` is negligible.
const HORIZON: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub min_consistency: f64,
    pub base: f64,
    /// Offsets (in units of one period of the base) of the best family.
    pub offsets: Vec<f64>,
    pub families_evaluated: u64,
}

/// Worst-case consistency of a family under best-member selection, measured
/// just before the `horizon`-th completion of every member.
pub fn family_consistency(members: &[ContractSchedule], horizon: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for m in members {
        let c = m
            .completion(horizon)
            .ok_or_else(|| domain("member schedule shorter than the horizon"))?;
        let t = just_before(c);
        let mut best = 0.0f64;
        for other in members {
            best = best.max(largest_completed(other, t)?);
        }
        worst = worst.max(t / best);
    }
    Ok(worst)
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

pub fn lower_bound_search(n: u32, r: f64, resolution: usize) -> Result<LowerBoundReport> {
    lower_bound_search_capped(n, r, resolution, DEFAULT_FAMILY_CAP)
}

pub fn lower_bound_search_capped(
    n: u32,
    r: f64,
    resolution: usize,
    cap: u64,
) -> Result<LowerBoundReport> {
    let params = RobustnessParams::new(r)?;
    if n > 2 {
        return Err(Error::Resource(format!(
            "search over 2^{n} members is not supported (n <= 2)"
        )));
    }
    if resolution == 0 {
        return Err(domain("resolution must be at least 1"));
    }
    let members = 1usize << n;
    let bases: Vec<f64> = if params.b - params.c < 1e-12 {
        vec![params.b]
    } else {
        (0..8)
            .map(|k| params.c + (params.b - params.c) * k as f64 / 7.0)
            .filter(|a| *a > 1.0)
            .collect()
    };
    // offsets o_1 <= ... <= o_{k-1} with o_0 = 0: multisets of size k-1
    let free = (members - 1) as u64;
    let per_base = if free == 0 {
        1
    } else {
        binomial(resolution as u64 + free - 1, free)
    };
    let total = per_base.saturating_mul(bases.len() as u64);
    if total > cap {
        return Err(Error::Resource(format!(
            "{total} candidate families exceed the cap of {cap}"
        )));
    }

    let mut best = LowerBoundReport {
        min_consistency: f64::INFINITY,
        base: bases[0],
        offsets: vec![0.0; members],
        families_evaluated: 0,
    };
    for &base in &bases {
        let mut idx = vec![0usize; members - 1];
        loop {
            let offsets: Vec<f64> = std::iter::once(0.0)
                .chain(idx.iter().map(|&g| g as f64 / resolution as f64))
                .collect();
            let family = offsets
                .iter()
                .map(|o| ContractSchedule::geometric(base, base.powf(*o)))
                .collect::<Result<Vec<_>>>()?;
            let value = family_consistency(&family, HORIZON)?;
            best.families_evaluated += 1;
            if value < best.min_consistency {
                best.min_consistency = value;
                best.base = base;
                best.offsets = offsets;
            }
            if !advance(&mut idx, resolution) {
                break;
            }
        }
    }
    Ok(best)
}

// Next nondecreasing index vector over 0..resolution; false when exhausted.
fn advance(idx: &mut [usize], resolution: usize) -> bool {
    let Some(pos) = idx.iter().rposition(|&g| g + 1 < resolution) else {
        return false;
    };
    let v = idx[pos] + 1;
    for g in &mut idx[pos..] {
        *g = v;
    }
    true
}
