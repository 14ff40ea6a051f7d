//! Schedules driven by a predicted interruption time.
//!
//! The central object is the scaled geometric schedule `(gamma * b_r^i)` in
//! which some contract completes exactly at the prediction. Shifting the
//! prediction earlier by a buffer `p` trades consistency for tolerance to
//! prediction errors.

use crate::error::{domain, Result};
use crate::schedule::{
    completes_by, empirical_robustness, largest_completed, ContractSchedule, RobustnessParams,
    MAX_CONTRACTS,
};

/// A predicted interruption time, optionally with a known bound on the
/// relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimePrediction {
    tau: f64,
    error_bound: Option<f64>,
}

impl TimePrediction {
    pub fn new(tau: f64, error_bound: Option<f64>) -> Result<Self> {
        if !(tau.is_finite() && tau >= 1.0) {
            return Err(domain(format!("prediction must be at least 1, got {tau}")));
        }
        if let Some(h) = error_bound {
            if !(0.0..=1.0).contains(&h) {
                return Err(domain(format!("error bound must lie in [0, 1], got {h}")));
            }
        }
        Ok(Self { tau, error_bound })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `None` means the schedule does not know a bound (H-oblivious).
    pub fn error_bound(&self) -> Option<f64> {
        self.error_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorSign {
    Positive,
    Negative,
    Zero,
}

/// Relative prediction error: `T = tau (1 + eta)` when positive,
/// `T = tau (1 - eta)` when negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedError {
    pub eta: f64,
    pub sign: ErrorSign,
}

impl SignedError {
    pub fn new(eta: f64, sign: ErrorSign) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(domain(format!(
                "error magnitude must lie in [0, 1], got {eta}"
            )));
        }
        if sign == ErrorSign::Zero && eta != 0.0 {
            return Err(domain("zero-sign error must have eta = 0"));
        }
        let sign = if eta == 0.0 { ErrorSign::Zero } else { sign };
        Ok(Self { eta, sign })
    }

    pub fn zero() -> Self {
        Self {
            eta: 0.0,
            sign: ErrorSign::Zero,
        }
    }

    /// The interruption time implied by this error around `tau`.
    pub fn interruption(&self, tau: f64) -> f64 {
        match self.sign {
            ErrorSign::Positive => tau * (1.0 + self.eta),
            ErrorSign::Negative => tau * (1.0 - self.eta),
            ErrorSign::Zero => tau,
        }
    }
}

/// The geometric schedule `(gamma * b_r^i)` with a contract completing at `tau`.
///
/// `gamma = tau / S_m` where `S_m = b + ... + b^m` and `m` is the smallest
/// index with `S_m >= tau`, so `gamma` lies in `(1/b_r, 1]`.
pub fn pareto_schedule(r: f64, tau: f64) -> Result<ContractSchedule> {
    let params = RobustnessParams::new(r)?;
    if !(tau.is_finite() && tau >= 1.0) {
        return Err(domain(format!("prediction must be at least 1, got {tau}")));
    }
    let b = params.b;
    let mut power = 1.0;
    let mut partial = 0.0;
    for _ in 0..MAX_CONTRACTS {
        power *= b;
        partial += power;
        if partial >= tau {
            return ContractSchedule::geometric(b, tau / partial);
        }
    }
    Err(domain(format!("prediction {tau} out of range")))
}

/// The Pareto schedule built for the shifted prediction `tau (1 - p)`.
pub fn buffered_schedule(r: f64, tau: f64, p: f64) -> Result<ContractSchedule> {
    if !(0.0..1.0).contains(&p) {
        return Err(domain(format!("buffer must lie in [0, 1), got {p}")));
    }
    let shifted = tau * (1.0 - p);
    if shifted.is_nan() || shifted < 1.0 {
        return Err(domain(format!(
            "shifted prediction tau(1-p) = {shifted} is below 1"
        )));
    }
    pareto_schedule(r, shifted)
}

/// The H-aware schedule, i.e. [`buffered_schedule`] with `p = H`.
pub fn h_aware_schedule(r: f64, prediction: &TimePrediction) -> Result<ContractSchedule> {
    let h = prediction
        .error_bound()
        .ok_or_else(|| domain("H-aware schedule needs a known error bound"))?;
    if h >= 1.0 {
        return Err(domain("H-aware schedule needs H < 1"));
    }
    buffered_schedule(r, prediction.tau(), h)
}

/// Upper bound on the acceleration ratio of the buffered schedule with
/// buffer `p` under prediction error `err`.
pub fn lemma_bound(params: &RobustnessParams, p: f64, err: SignedError) -> f64 {
    let scaled = |factor: f64| (params.c * factor / (1.0 - p)).min(params.r);
    match err.sign {
        ErrorSign::Positive => scaled(1.0 + err.eta),
        ErrorSign::Negative if err.eta <= p => scaled(1.0 - err.eta),
        ErrorSign::Negative => params.r,
        ErrorSign::Zero => scaled(1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HThresholds {
    /// Below this H no r-robust H-aware schedule beats the H-aware buffered one.
    pub lower: f64,
    /// Below this H no r-robust H-aware schedule dominates it.
    pub dominance: f64,
}

/// Solves `(1+H)/(1-H) = q` for `q = sqrt((c_r+1)/c_r)` and `q = (c_r+1)/c_r`.
pub fn h_thresholds(params: &RobustnessParams) -> HThresholds {
    let solve = |q: f64| (q - 1.0) / (q + 1.0);
    let q = (params.c + 1.0) / params.c;
    HThresholds {
        lower: solve(q.sqrt()),
        dominance: solve(q),
    }
}

/// Declared (robustness, consistency) of a sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Performance {
    pub robustness: f64,
    pub consistency: f64,
}

/// An increasing sequence of bids for online bidding.
#[derive(Debug, Clone, PartialEq)]
pub struct BiddingSequence {
    bids: ContractSchedule,
    performance: Performance,
}

impl BiddingSequence {
    pub fn new(bids: ContractSchedule, performance: Performance) -> Result<Self> {
        if !(performance.consistency >= 1.0 && performance.robustness >= 1.0) {
            return Err(domain("declared performance must be at least 1"));
        }
        Ok(Self { bids, performance })
    }

    pub fn bids(&self) -> &ContractSchedule {
        &self.bids
    }

    pub fn performance(&self) -> Performance {
        self.performance
    }

    /// Competitive ratio against target `u`: total of all bids up to and
    /// including the first bid `>= u`, divided by `u`.
    pub fn cost_ratio(&self, u: f64) -> Result<f64> {
        let hit = first_bid_at_least(&self.bids, u)?;
        Ok(hit.completion / u)
    }
}

fn first_bid_at_least(bids: &ContractSchedule, u: f64) -> Result<crate::schedule::Contract> {
    if !(u.is_finite() && u > 0.0) {
        return Err(domain(format!("target must be positive, got {u}")));
    }
    bids.contracts()
        .take(MAX_CONTRACTS)
        .find(|c| completes_by(u, c.length))
        .ok_or_else(|| domain(format!("no bid reaches the target {u}")))
}

/// Turns a bidding sequence with performance `(r, s)` at target `tau` into a
/// contract schedule with the same guarantees for prediction `tau`.
///
/// Bids are normalized so that the first bid `>= tau` equals `tau`, then
/// divided by `s`.
pub fn bidding_to_schedule(bidding: &BiddingSequence, tau: f64) -> Result<ContractSchedule> {
    if !(tau.is_finite() && tau >= 1.0) {
        return Err(domain(format!("prediction must be at least 1, got {tau}")));
    }
    let hit = first_bid_at_least(&bidding.bids, tau)?;
    let factor = tau / hit.length / bidding.performance.consistency;
    bidding.bids.scaled(factor)
}

/// The inverse map: contract lengths multiplied by `s` become bids.
///
/// `target` must be covered by the resulting bids; the declared robustness
/// is carried from `performance`.
pub fn schedule_to_bidding(
    schedule: &ContractSchedule,
    performance: Performance,
    target: f64,
) -> Result<BiddingSequence> {
    let bids = schedule.scaled(performance.consistency)?;
    first_bid_at_least(&bids, target)?;
    BiddingSequence::new(bids, performance)
}

/// Checks `ell(X, t) <= t / c_r` for a schedule known to be r-robust.
///
/// The schedule is first verified to be r-robust over the contracts that
/// matter at `t`; a schedule that fails that check is a domain error.
pub fn corollary2_check(
    schedule: &ContractSchedule,
    t: f64,
    params: &RobustnessParams,
) -> Result<bool> {
    let relevant = schedule
        .contracts()
        .take(MAX_CONTRACTS)
        .take_while(|c| completes_by(c.completion, t))
        .count()
        + 2;
    if empirical_robustness(schedule, relevant) > params.r + 1e-6 {
        return Err(domain(format!("schedule is not {}-robust", params.r)));
    }
    Ok(largest_completed(schedule, t)? <= t / params.c + 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{acceleration_ratio, cr_br, just_before};

    fn completes_at(x: &ContractSchedule, t: f64) -> bool {
        x.contracts()
            .take_while(|c| c.completion <= t * 2.0)
            .any(|c| ((c.completion - t) / t).abs() <= 1e-9)
    }

    #[test]
    fn pareto_examples() {
        let x = pareto_schedule(4.0, 10.0).unwrap();
        let (_, gamma) = x.geometric_params().unwrap();
        assert!((gamma - 10.0 / 14.0).abs() < 1e-15);
        assert!((x.completion(3).unwrap() - 10.0).abs() < 1e-12);
        assert!((acceleration_ratio(&x, 10.0).unwrap().ratio - 1.75).abs() < 1e-12);

        let x = pareto_schedule(4.0, 6.0).unwrap();
        assert_eq!(x.geometric_params(), Some((2.0, 1.0)));
        assert_eq!(acceleration_ratio(&x, 6.0).unwrap().ratio, 1.5);
        assert!(pareto_schedule(3.5, 6.0).is_err());
    }

    #[test]
    fn pareto_ratio_at_tau_within_consistency() {
        for r in [4.0, 4.5, 6.0, 10.0] {
            let c = cr_br(r).unwrap().c;
            for tau in [1.0, 1.7, 10.0, 333.3, 1e6] {
                let x = pareto_schedule(r, tau).unwrap();
                assert!(completes_at(&x, tau));
                assert!(acceleration_ratio(&x, tau).unwrap().ratio <= c + 1e-9);
            }
        }
    }

    #[test]
    fn buffered_examples() {
        let x = buffered_schedule(4.0, 1000.0, 0.1).unwrap();
        assert!(acceleration_ratio(&x, 1000.0).unwrap().ratio <= 2.0 / 0.9 + 1e-12);
        assert!(acceleration_ratio(&x, 950.0).unwrap().ratio <= 2.0 * 0.95 / 0.9 + 1e-12);
        assert_eq!(
            buffered_schedule(4.0, 1000.0, 0.0).unwrap(),
            pareto_schedule(4.0, 1000.0).unwrap()
        );
        assert!(buffered_schedule(4.0, 1.5, 0.5).is_err());
        assert!(buffered_schedule(4.0, 10.0, 1.0).is_err());
    }

    #[test]
    fn h_aware_is_buffer_h() {
        let pred = TimePrediction::new(500.0, Some(0.2)).unwrap();
        assert_eq!(
            h_aware_schedule(4.0, &pred).unwrap(),
            buffered_schedule(4.0, 500.0, 0.2).unwrap()
        );
        let oblivious = TimePrediction::new(500.0, None).unwrap();
        assert!(h_aware_schedule(4.0, &oblivious).is_err());
    }

    #[test]
    fn lemma_bound_examples() {
        let p4 = cr_br(4.0).unwrap();
        let pos = SignedError::new(0.1, ErrorSign::Positive).unwrap();
        assert!((lemma_bound(&p4, 0.1, pos) - 2.2 / 0.9).abs() < 1e-12);
        let neg = SignedError::new(0.08, ErrorSign::Negative).unwrap();
        assert_eq!(lemma_bound(&p4, 0.05, neg), 4.0);
        assert_eq!(lemma_bound(&p4, 0.0, SignedError::zero()), 2.0);
        // large buffers saturate at r
        assert_eq!(lemma_bound(&p4, 0.9, SignedError::zero()), 4.0);
    }

    #[test]
    fn threshold_examples() {
        let t = h_thresholds(&cr_br(4.0).unwrap());
        assert!((t.lower - 0.101).abs() < 5e-4);
        assert!((t.dominance - 0.2).abs() < 1e-12);
        let far = h_thresholds(&cr_br(1e9).unwrap());
        assert!((far.dominance - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn bidding_reduction_example() {
        let bids = BiddingSequence::new(
            ContractSchedule::exponential(2.0).unwrap(),
            Performance {
                robustness: 4.0,
                consistency: 2.0,
            },
        )
        .unwrap();
        let x = bidding_to_schedule(&bids, 8.0).unwrap();
        assert_eq!(x.geometric_params(), Some((2.0, 0.5)));
        // (2^{i-1}) = 1, 2, 4: the contract of length 4 completes at 7.
        assert_eq!(x.length(3), Some(4.0));
        assert_eq!(x.completion(3), Some(7.0));

        let back = schedule_to_bidding(&x, bids.performance(), 8.0).unwrap();
        assert_eq!(back.bids(), bids.bids());
    }

    #[test]
    fn explicit_bids_must_reach_target() {
        let bids = BiddingSequence::new(
            ContractSchedule::explicit(vec![1.0, 2.0, 4.0]).unwrap(),
            Performance {
                robustness: 4.0,
                consistency: 2.0,
            },
        )
        .unwrap();
        assert!(bidding_to_schedule(&bids, 5.0).is_err());
        assert!(bidding_to_schedule(&bids, 3.0).is_ok());
    }

    #[test]
    fn pareto_as_bidding_costs_at_most_two_tau() {
        let tau = 37.0;
        let x = pareto_schedule(4.0, tau).unwrap();
        let perf = Performance {
            robustness: 4.0,
            consistency: 2.0,
        };
        let b = schedule_to_bidding(&x, perf, tau).unwrap();
        assert!(b.cost_ratio(tau).unwrap() <= 2.0 + 1e-12);
    }

    #[test]
    fn corollary2_examples() {
        let p4 = cr_br(4.0).unwrap();
        let x = ContractSchedule::exponential(2.0).unwrap();
        // at the completion instant the bound is violated (ell = 4 > 3)
        assert!(!corollary2_check(&x, 6.0, &p4).unwrap());
        assert!(corollary2_check(&x, just_before(6.0), &p4).unwrap());
        // X*_tau completes gamma b^m at tau; ell * c_r / tau = 1 / (1 - b^-m),
        // so the bound is met only in the limit of large m.
        let tau = 1234.5;
        let star = pareto_schedule(4.0, tau).unwrap();
        let ell = largest_completed(&star, tau).unwrap();
        assert!((ell * 2.0 / tau - 1.0 / (1.0 - 2f64.powi(-10))).abs() < 1e-12);
        assert!(!corollary2_check(&star, tau, &p4).unwrap());
        assert!(corollary2_check(&star, just_before(tau), &p4).unwrap());
        // floor case: nothing completed, ell = 1 <= t / c_r
        let p45 = cr_br(4.5).unwrap();
        let triple = ContractSchedule::exponential(3.0).unwrap();
        assert!(corollary2_check(&triple, 2.0, &p45).unwrap());
        let fragile = ContractSchedule::explicit(vec![1.0, 10.0]).unwrap();
        assert!(corollary2_check(&fragile, 11.0, &p4).is_err());
    }

    #[test]
    fn signed_error_interruption() {
        let e = SignedError::new(0.25, ErrorSign::Negative).unwrap();
        assert_eq!(e.interruption(100.0), 75.0);
        assert!(SignedError::new(0.1, ErrorSign::Zero).is_err());
        assert_eq!(
            SignedError::new(0.0, ErrorSign::Positive).unwrap().sign,
            ErrorSign::Zero
        );
    }
}
