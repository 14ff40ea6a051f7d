//! Predictions given as answers to binary queries.
//!
//! Both families here are sets of near-exponential schedules with a common
//! base `d`, member `i` of a family of size `count` having contract lengths
//! `x(j) = d^(j + i/count)` for `j >= 1`:
//!
//! * IDEAL uses `2^n` members and reads the `n` answers as the binary index
//!   of the best member. One wrong bit can cost the full robustness.
//! * ROBUST_p uses `n` members. Query `i` asks whether the best member lies
//!   in `{X_0, ..., X_i}`, so error-free answers are a run of "no" followed
//!   by "yes". The decoder counts the "no" answers and steps back cyclically
//!   by `round(p n)` positions to absorb up to a `p` fraction of wrong answers.

use crate::error::{domain, Error, Result};
use crate::schedule::{
    completes_by, largest_completed, ContractSchedule, RobustnessParams, MAX_CONTRACTS,
};

/// Default cap on `n` for IDEAL families (`2^n` members).
pub const DEFAULT_MAX_IDEAL_QUERIES: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyMode {
    Ideal,
    Robust { buffer: f64 },
}

/// An indexed set of r-robust near-exponential schedules.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryFamily {
    queries: u32,
    params: RobustnessParams,
    mode: FamilyMode,
    base: f64,
    count: usize,
}

impl QueryFamily {
    pub fn queries(&self) -> u32 {
        self.queries
    }

    pub fn params(&self) -> &RobustnessParams {
        &self.params
    }

    pub fn mode(&self) -> FamilyMode {
        self.mode
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// Number of member schedules: `2^n` for IDEAL, `n` for ROBUST_p.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Member `i`, the schedule `(d^(j + i/count))_{j >= 1}`.
    pub fn member(&self, i: usize) -> Result<ContractSchedule> {
        if i >= self.count {
            return Err(domain(format!(
                "member index {i} out of range for a family of {}",
                self.count
            )));
        }
        ContractSchedule::geometric(self.base, self.member_scale(i))
    }

    fn member_scale(&self, i: usize) -> f64 {
        self.base.powf(i as f64 / self.count as f64)
    }

    /// Analytical robustness of every member, `d^2 / (d - 1)`.
    pub fn member_robustness(&self) -> f64 {
        self.base * self.base / (self.base - 1.0)
    }
}

/// IDEAL base: `b_r` when `r <= (1 + 2^n)^2 / 2^n`, else `1 + 2^n`.
pub fn ideal_base(params: &RobustnessParams, n: u32) -> f64 {
    let k = 2f64.powi(n as i32);
    if params.r <= (1.0 + k) * (1.0 + k) / k {
        params.b
    } else {
        1.0 + k
    }
}

pub fn ideal_family(r: f64, n: u32) -> Result<QueryFamily> {
    ideal_family_capped(r, n, DEFAULT_MAX_IDEAL_QUERIES)
}

pub fn ideal_family_capped(r: f64, n: u32, max_queries: u32) -> Result<QueryFamily> {
    let params = RobustnessParams::new(r)?;
    if n == 0 {
        return Err(domain("IDEAL needs at least one query"));
    }
    if n > max_queries {
        return Err(Error::Resource(format!(
            "IDEAL with n = {n} has 2^{n} members; cap is n <= {max_queries}"
        )));
    }
    Ok(QueryFamily {
        queries: n,
        params,
        mode: FamilyMode::Ideal,
        base: ideal_base(&params, n),
        count: 1usize << n,
    })
}

/// IDEAL's (robustness, consistency) pair: `(r, d^(1 + 1/2^n) / (d - 1))`.
pub fn ideal_consistency(params: &RobustnessParams, n: u32) -> f64 {
    let d = ideal_base(params, n);
    d.powf(1.0 + 0.5f64.powi(n as i32)) / (d - 1.0)
}

/// Answers to `n` binary queries; `true` means "yes".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerBits {
    bits: Vec<bool>,
    /// Fraction of answers declared corrupted, as a count out of `len()`.
    flipped: usize,
}

impl AnswerBits {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits, flipped: 0 }
    }

    pub(crate) fn with_flips(bits: Vec<bool>, flipped: usize) -> Self {
        Self { bits, flipped }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Declared corruption fraction.
    pub fn eta(&self) -> f64 {
        if self.bits.is_empty() {
            0.0
        } else {
            self.flipped as f64 / self.bits.len() as f64
        }
    }

    /// Number of "no" answers.
    pub fn no_count(&self) -> usize {
        self.bits.iter().filter(|b| !**b).count()
    }

    /// True when the answers form a run of "no" followed by a run of "yes".
    pub fn is_monotone(&self) -> bool {
        self.bits.windows(2).all(|w| !(w[0] && !w[1]))
    }

    pub fn hamming(&self, other: &AnswerBits) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Binary encoding of `index` on `n` bits, most significant bit first.
pub fn ideal_encode(index: usize, n: u32) -> Result<AnswerBits> {
    if n as usize >= usize::BITS as usize || index >= 1usize << n {
        return Err(domain(format!("index {index} does not fit in {n} bits")));
    }
    Ok(AnswerBits::new(
        (0..n).rev().map(|k| (index >> k) & 1 == 1).collect(),
    ))
}

/// Reads the answers as the binary index (most significant bit first) of
/// the member to run.
pub fn ideal_select(family: &QueryFamily, bits: &AnswerBits) -> Result<usize> {
    if family.mode != FamilyMode::Ideal {
        return Err(domain("ideal_select needs an IDEAL family"));
    }
    if bits.len() != family.queries as usize {
        return Err(domain(format!(
            "expected {} answers, got {}",
            family.queries,
            bits.len()
        )));
    }
    Ok(bits
        .bits()
        .iter()
        .fold(0usize, |acc, b| (acc << 1) | usize::from(*b)))
}

/// Lower bound `2^(1 + 1/2^n)` on the consistency of any 4-robust schedule
/// advised by `n` error-free bits.
pub fn consistency_lower_bound(n: u32) -> f64 {
    2f64.powf(1.0 + 0.5f64.powi(n as i32))
}

/// Base and ratio bound of ROBUST_p.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustBase {
    /// `(2 round(p n) + 1) / n`.
    pub k: f64,
    pub base: f64,
    /// `d^(1 + 1/n + 2p) / (d - 1)`.
    pub bound: f64,
}

/// `round(p n)`, rounding half away from zero.
pub fn buffer_shift(n: usize, p: f64) -> usize {
    (p * n as f64).round() as usize
}

pub fn robust_base(params: &RobustnessParams, n: u32, p: f64) -> RobustBase {
    let nf = f64::from(n);
    let k = (2.0 * buffer_shift(n as usize, p) as f64 + 1.0) / nf;
    let base = if params.r <= (1.0 + k) * (1.0 + k) / k {
        params.b
    } else {
        1.0 + k
    };
    RobustBase {
        k,
        base,
        bound: base.powf(1.0 + 1.0 / nf + 2.0 * p) / (base - 1.0),
    }
}

fn check_buffer(p: f64) -> Result<()> {
    if (0.0..=0.5).contains(&p) {
        Ok(())
    } else {
        Err(domain(format!("buffer p must lie in [0, 1/2], got {p}")))
    }
}

pub fn robust_family(r: f64, n: u32, p: f64) -> Result<QueryFamily> {
    let params = RobustnessParams::new(r)?;
    if n == 0 {
        return Err(domain("ROBUST_p needs at least one query"));
    }
    check_buffer(p)?;
    Ok(QueryFamily {
        queries: n,
        params,
        mode: FamilyMode::Robust { buffer: p },
        base: robust_base(&params, n, p).base,
        count: n as usize,
    })
}

/// Index of the member that has completed the largest contract by `t`,
/// smallest index on ties.
pub fn best_index(family: &QueryFamily, t: f64) -> Result<usize> {
    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..family.count {
        let ell = largest_completed(&family.member(i)?, t)?;
        if ell > best.1 {
            best = (i, ell);
        }
    }
    Ok(best.0)
}

/// Error-free answers when member `l` is best: "no" for queries `i < l`,
/// "yes" for `i >= l`.
pub fn encode_answers(l: usize, n: usize) -> Result<AnswerBits> {
    if l >= n {
        return Err(domain(format!(
            "best index {l} out of range for {n} queries"
        )));
    }
    Ok(AnswerBits::new((0..n).map(|i| i >= l).collect()))
}

/// How the decoder turns the "no" count into a member index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeRule {
    /// `m = (N - round(p n)) mod n`; the identity on error-free answers at `p = 0`.
    #[default]
    Shifted,
    /// `m = (N - 1 - round(p n)) mod n`, the literal published rule.
    ShiftedMinusOne,
}

pub fn decode_robust(bits: &AnswerBits, p: f64) -> Result<usize> {
    decode_robust_with(bits, p, DecodeRule::Shifted)
}

impl DecodeRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecodeRule::Shifted => "shifted",
            DecodeRule::ShiftedMinusOne => "shifted-minus-one",
        }
    }
}

pub fn decode_robust_with(bits: &AnswerBits, p: f64, rule: DecodeRule) -> Result<usize> {
    check_buffer(p)?;
    let n = bits.len();
    if n == 0 {
        return Err(domain("cannot decode an empty answer string"));
    }
    let extra = match rule {
        DecodeRule::Shifted => 0,
        DecodeRule::ShiftedMinusOne => 1,
    };
    let back = (buffer_shift(n, p) + extra) % n;
    Ok((bits.no_count() + n - back) % n)
}

/// `(l - m) mod n`: how far `m` sits below `l` in the cyclic order.
pub fn cyclic_distance_below(l: usize, m: usize, n: usize) -> usize {
    (l % n + n - m % n) % n
}

/// A half-open interval `[start, end)` of interruption times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

/// Breakpoints of the best-member function on `[1, t_max]`: the best member
/// only changes at completion times.
fn best_index_segments(family: &QueryFamily, t_max: f64) -> Result<Vec<(Interval, usize)>> {
    let mut events = vec![1.0];
    for i in 0..family.count {
        let member = family.member(i)?;
        for c in member.contracts().take(MAX_CONTRACTS) {
            if c.completion > t_max {
                break;
            }
            if c.completion > 1.0 {
                events.push(c.completion);
            }
        }
    }
    events.sort_by(f64::total_cmp);
    events.dedup();
    let mut segments: Vec<(Interval, usize)> = Vec::with_capacity(events.len());
    for (k, &start) in events.iter().enumerate() {
        let end = events
            .get(k + 1)
            .copied()
            .unwrap_or(f64::INFINITY)
            .min(t_max);
        let idx = best_index(family, start)?;
        match segments.last_mut() {
            Some((iv, prev)) if *prev == idx => iv.end = end,
            _ => segments.push((Interval { start, end }, idx)),
        }
    }
    if let Some((iv, _)) = segments.last_mut() {
        // close the last segment so that t_max itself is covered
        iv.end = f64::from_bits(t_max.to_bits() + 1);
    }
    Ok(segments)
}

/// For each ROBUST_p query `Q_i`, the set of interruptions in `[1, t_max]`
/// whose error-free answer is "yes", as merged half-open intervals.
pub fn partition_sets(family: &QueryFamily, t_max: f64) -> Result<Vec<Vec<Interval>>> {
    if !matches!(family.mode, FamilyMode::Robust { .. }) {
        return Err(domain("partition sets are defined for ROBUST_p families"));
    }
    if !(t_max.is_finite() && t_max >= 1.0) {
        return Err(domain(format!("t_max must be at least 1, got {t_max}")));
    }
    let segments = best_index_segments(family, t_max)?;
    let sets = (0..family.count)
        .map(|q| {
            let mut out: Vec<Interval> = Vec::new();
            for (iv, best) in &segments {
                if *best > q {
                    continue;
                }
                match out.last_mut() {
                    Some(last) if last.end == iv.start => last.end = iv.end,
                    _ => out.push(*iv),
                }
            }
            out
        })
        .collect();
    Ok(sets)
}

/// Acceleration ratio at `t` of the member selected by `index`.
pub fn member_ratio(family: &QueryFamily, index: usize, t: f64) -> Result<f64> {
    Ok(t / largest_completed(&family.member(index)?, t)?)
}

/// All member completion times in `[lo, hi]`, sorted.
pub fn member_completions(family: &QueryFamily, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..family.count {
        for c in family.member(i)?.contracts().take(MAX_CONTRACTS) {
            if !completes_by(c.completion, hi) {
                break;
            }
            if c.completion >= lo {
                out.push(c.completion);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{cr_br, empirical_robustness, just_before};

    fn p4() -> RobustnessParams {
        cr_br(4.0).unwrap()
    }

    #[test]
    fn ideal_base_examples() {
        assert_eq!(ideal_base(&p4(), 2), 2.0);
        assert_eq!(ideal_base(&cr_br(8.0).unwrap(), 1), 3.0);
        for n in 1..8 {
            assert_eq!(ideal_base(&p4(), n), 2.0);
            assert!((ideal_consistency(&p4(), n) - consistency_lower_bound(n)).abs() < 1e-12);
        }
    }

    #[test]
    fn ideal_family_members() {
        let fam = ideal_family(4.0, 1).unwrap();
        assert_eq!(fam.count(), 2);
        let x1 = fam.member(1).unwrap();
        assert!((x1.length(1).unwrap() - 2f64.powf(1.5)).abs() < 1e-12);
        let fam2 = ideal_family(4.0, 2).unwrap();
        for i in 0..4 {
            let (_, scale) = fam2.member(i).unwrap().geometric_params().unwrap();
            assert!((scale - 2f64.powf(i as f64 / 4.0)).abs() < 1e-15);
            assert!(empirical_robustness(&fam2.member(i).unwrap(), 40) <= 4.0 + 1e-4);
        }
        assert!(matches!(
            ideal_family(4.0, 21),
            Err(crate::Error::Resource(_))
        ));
        assert!(ideal_family_capped(4.0, 3, 2).is_err());
    }

    #[test]
    fn ideal_select_examples() {
        let fam = ideal_family(4.0, 2).unwrap();
        assert_eq!(
            ideal_select(&fam, &AnswerBits::new(vec![false, false])).unwrap(),
            0
        );
        assert_eq!(
            ideal_select(&fam, &AnswerBits::new(vec![true, true])).unwrap(),
            3
        );
        assert_eq!(
            ideal_select(&fam, &AnswerBits::new(vec![true, false])).unwrap(),
            2
        );
        assert!(ideal_select(&fam, &AnswerBits::new(vec![true])).is_err());
        for l in 0..4 {
            assert_eq!(ideal_select(&fam, &ideal_encode(l, 2).unwrap()).unwrap(), l);
        }
    }

    #[test]
    fn lower_bound_examples() {
        assert!((consistency_lower_bound(1) - 2f64.powf(1.5)).abs() < 1e-12);
        assert!((consistency_lower_bound(2) - 2.378414230005442).abs() < 1e-12);
        assert!((consistency_lower_bound(60) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn robust_base_examples() {
        let rb = robust_base(&p4(), 100, 0.1);
        assert!((rb.k - 0.21).abs() < 1e-12);
        assert_eq!(rb.base, 2.0);
        assert!((rb.bound - 2f64.powf(1.21)).abs() < 1e-12);
        let rb = robust_base(&cr_br(10.0).unwrap(), 10, 0.5);
        assert!((rb.k - 1.1).abs() < 1e-12);
        assert!((rb.base - 2.1).abs() < 1e-12);
    }

    #[test]
    fn best_index_examples() {
        let fam = robust_family(4.0, 4, 0.0).unwrap();
        // X_1's 3rd contract completes at 2^{1/4} * 14
        let c = 2f64.powf(0.25) * 14.0;
        assert_eq!(best_index(&fam, c).unwrap(), 1);
        // just before it, X_0's 3rd contract (length 8, done at 14) is best
        assert_eq!(best_index(&fam, just_before(c)).unwrap(), 0);
        let single = robust_family(4.0, 1, 0.0).unwrap();
        assert_eq!(best_index(&single, 77.0).unwrap(), 0);
    }

    #[test]
    fn encode_examples() {
        let b = encode_answers(0, 5).unwrap();
        assert!(b.bits().iter().all(|x| *x));
        let b = encode_answers(2, 5).unwrap();
        assert_eq!(b.bits(), &[false, false, true, true, true]);
        assert_eq!(b.no_count(), 2);
        let b = encode_answers(4, 5).unwrap();
        assert_eq!(b.no_count(), 4);
        assert!(encode_answers(5, 5).is_err());
    }

    #[test]
    fn decode_examples() {
        for l in 0..7 {
            assert_eq!(
                decode_robust(&encode_answers(l, 7).unwrap(), 0.0).unwrap(),
                l
            );
        }
        let five_no: Vec<bool> = (0..10).map(|i| i >= 5).collect();
        assert_eq!(decode_robust(&AnswerBits::new(five_no), 0.2).unwrap(), 3);
        let one_no: Vec<bool> = (0..10).map(|i| i >= 1).collect();
        assert_eq!(
            decode_robust(&AnswerBits::new(one_no.clone()), 0.3).unwrap(),
            8
        );
        assert_eq!(
            decode_robust_with(&AnswerBits::new(one_no), 0.3, DecodeRule::ShiftedMinusOne).unwrap(),
            7
        );
        assert!(decode_robust(&encode_answers(1, 4).unwrap(), 0.6).is_err());
    }

    #[test]
    fn partition_for_two_queries() {
        let fam = robust_family(4.0, 2, 0.0).unwrap();
        let sets = partition_sets(&fam, 1000.0).unwrap();
        let x0 = fam.member(0).unwrap();
        let x1 = fam.member(1).unwrap();
        // S_0 (best is X_0) starts at X_0 completions and ends at X_1 completions
        for iv in sets[0].iter().skip(1) {
            assert!(x0.contracts().take(20).any(|c| c.completion == iv.start));
            if iv.end < 1000.0 {
                assert!(x1.contracts().take(20).any(|c| c.completion == iv.end));
            }
        }
        assert_eq!(sets[1].len(), 1);
        assert_eq!(sets[1][0].start, 1.0);
        assert!(sets[1][0].contains(1000.0));
    }

    #[test]
    fn cyclic_distance_wraps() {
        assert_eq!(cyclic_distance_below(5, 3, 10), 2);
        assert_eq!(cyclic_distance_below(1, 8, 10), 3);
        assert_eq!(cyclic_distance_below(4, 4, 10), 0);
    }
}
