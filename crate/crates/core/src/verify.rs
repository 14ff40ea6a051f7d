//! Named invariant checks, run by `predsched verify` and the acceptance suite.
//!
//! Each check returns `Ok(detail)` on success and `Err(reason)` naming the
//! first counterexample it found. Random cases come from fixed seeds so a
//! failure is reproducible.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::experiments::{
    baseline_schedule, family_consistency, lower_bound_search, run_experiment, write_report,
    ExperimentConfig, Grid, OutputFormat, Setting, Spacing,
};
use crate::noise::{error_of, flip_bits, flip_count, sample_tau, RngStream, TimeNoiseModel};
use crate::query_pred::{
    best_index, buffer_shift, consistency_lower_bound, cyclic_distance_below, decode_robust,
    encode_answers, ideal_encode, ideal_family, ideal_select, member_completions, member_ratio,
    robust_base, robust_family, AnswerBits,
};
use crate::schedule::{
    acceleration_ratio, cr_br, empirical_robustness, exponential_robustness, just_before,
    largest_completed, ContractSchedule,
};
use crate::time_pred::{
    bidding_to_schedule, buffered_schedule, h_thresholds, lemma_bound, pareto_schedule,
    schedule_to_bidding, ErrorSign, Performance, SignedError,
};

type CheckFn = fn() -> Result<String, String>;

#[derive(Clone, Copy)]
pub struct Check {
    pub name: &'static str,
    run: CheckFn,
}

impl Check {
    pub fn run(&self) -> Outcome {
        let start = Instant::now();
        let result = (self.run)();
        Outcome {
            name: self.name,
            passed: result.is_ok(),
            detail: result.unwrap_or_else(|e| e),
            elapsed: start.elapsed(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

/// Every check, in a stable order.
pub fn checks() -> Vec<Check> {
    macro_rules! c {
        ($name:literal, $f:ident) => {
            Check {
                name: $name,
                run: $f,
            }
        };
    }
    vec![
        c!("schedule.monotonicity", monotonicity),
        c!("schedule.scale_invariance", scale_invariance),
        c!("schedule.exponential_robustness", exponential_agreement),
        c!("schedule.range_property", range_property),
        c!("schedule.worst_case_supremum", worst_case_supremum),
        c!("time.pareto_construction", pareto_construction),
        c!("time.lemma_grid", lemma_grid),
        c!("time.consistency_sharpness", consistency_sharpness),
        c!("time.bidding_round_trip", bidding_round_trip),
        c!("time.threshold_ordering", threshold_ordering),
        c!("query.monotone_answers", monotone_answers),
        c!("query.decode_identity", decode_identity),
        c!("query.cyclic_proximity", cyclic_proximity),
        c!("query.robust_bound", robust_bound),
        c!("query.ideal_tightness", ideal_tightness),
        c!("query.adversarial_bits", adversarial_bits),
        c!("noise.determinism", noise_determinism),
        c!("noise.bound_respect", bound_respect),
        c!("noise.flip_hamming", flip_hamming),
        c!("experiments.reproducibility", reproducibility),
        c!("experiments.grid_independence", grid_independence),
        c!("experiments.ordering", ordering),
        c!("experiments.baseline_sanity", baseline_sanity),
        c!("experiments.lower_bound_search", lower_bound),
    ]
}

/// Runs the checks whose name contains `filter` (all when `None`).
pub fn run_checks(filter: Option<&str>) -> Vec<Outcome> {
    checks()
        .iter()
        .filter(|c| filter.is_none_or(|f| c.name.contains(f)))
        .map(Check::run)
        .collect()
}

fn rng(tag: u64) -> ChaCha12Rng {
    RngStream::new(0x5eed, tag, 0).rng()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

trait Context<T> {
    fn ctx(self) -> Result<T, String>;
}

impl<T> Context<T> for crate::Result<T> {
    fn ctx(self) -> Result<T, String> {
        self.map_err(|e| e.to_string())
    }
}

fn random_schedule(rng: &mut ChaCha12Rng) -> ContractSchedule {
    if rng.random_bool(0.5) {
        let base = rng.random_range(1.2..4.0);
        let scale = rng.random_range(0.2..3.0);
        ContractSchedule::geometric(base, scale).expect("valid parameters")
    } else {
        let mut x = rng.random_range(0.5..2.0);
        let lengths = (0..30)
            .map(|_| {
                x *= rng.random_range(1.05..3.0);
                x
            })
            .collect();
        ContractSchedule::explicit(lengths).expect("increasing lengths")
    }
}

fn monotonicity() -> Result<String, String> {
    let mut rng = rng(1);
    for case in 0..500 {
        let x = random_schedule(&mut rng);
        let a = rng.random_range(1.0..1e6);
        let b = rng.random_range(1.0..1e6);
        let (t1, t2) = if a <= b { (a, b) } else { (b, a) };
        let l1 = largest_completed(&x, t1).ctx()?;
        let l2 = largest_completed(&x, t2).ctx()?;
        ensure(l1 <= l2, || {
            format!("case {case}: ell({t1}) = {l1} > ell({t2}) = {l2} for {x}")
        })?;
    }
    Ok("500 random schedules".into())
}

fn scale_invariance() -> Result<String, String> {
    let mut rng = rng(2);
    let mut tested = 0;
    for _ in 0..500 {
        let x = random_schedule(&mut rng);
        let t = rng.random_range(1.0..1e5);
        let lambda = 2f64.powi(rng.random_range(-3..=6));
        let y = x.scaled(lambda).ctx()?;
        if largest_completed(&x, t).ctx()? <= 1.0 || lambda * t < 1.0 {
            continue;
        }
        if largest_completed(&y, lambda * t).ctx()? <= 1.0 {
            continue;
        }
        let a = acceleration_ratio(&x, t).ctx()?.ratio;
        let b = acceleration_ratio(&y, lambda * t).ctx()?.ratio;
        ensure(a == b, || {
            format!("ratio {a} vs {b} after scaling {x} by {lambda} at T = {t}")
        })?;
        tested += 1;
    }
    Ok(format!("{tested} cases past the floor"))
}

fn exponential_agreement() -> Result<String, String> {
    for a in [1.5, 2.0, 2.5, 3.0] {
        let x = ContractSchedule::exponential(a).ctx()?;
        let emp = empirical_robustness(&x, 40);
        let exact = exponential_robustness(a).ctx()?;
        ensure((emp - exact).abs() <= 1e-4, || {
            format!("base {a}: empirical {emp} vs {exact}")
        })?;
    }
    Ok("bases 1.5, 2, 2.5, 3".into())
}

fn range_property() -> Result<String, String> {
    for r in [4.0, 4.5, 5.0, 6.0] {
        let p = cr_br(r).ctx()?;
        for k in 0..10 {
            let a = p.c + (p.b - p.c) * k as f64 / 9.0;
            if a <= 1.0 {
                continue;
            }
            let emp = empirical_robustness(&ContractSchedule::exponential(a).ctx()?, 40);
            ensure(emp <= r + 1e-4, || {
                format!("r = {r}, base {a}: robustness {emp}")
            })?;
        }
    }
    Ok("r in {4, 4.5, 5, 6}, 10 bases each".into())
}

fn worst_case_supremum() -> Result<String, String> {
    let mut rng = rng(3);
    for case in 0..100 {
        let x = random_schedule(&mut rng);
        let i_max = 25;
        let emp = empirical_robustness(&x, i_max);
        let mut sup = f64::NEG_INFINITY;
        for c in x.contracts().take(i_max) {
            let t = just_before(c.completion);
            if t >= 1.0 {
                sup = sup.max(acceleration_ratio(&x, t).ctx()?.ratio);
            } else {
                // interruptions happen after one unit; ell is the floor there
                sup = sup.max(c.completion);
            }
        }
        ensure((emp - sup).abs() <= 1e-6 * emp.max(1.0), || {
            format!("case {case}: formula {emp} vs sampled supremum {sup} for {x}")
        })?;
    }
    Ok("100 random schedules, 25 contracts".into())
}

fn completes_near(x: &ContractSchedule, t: f64) -> bool {
    x.contracts()
        .take_while(|c| c.completion <= 2.0 * t)
        .any(|c| ((c.completion - t) / t).abs() <= 1e-9)
}

fn pareto_construction() -> Result<String, String> {
    let mut rng = rng(4);
    for _ in 0..20 {
        let r = rng.random_range(4.0..12.0);
        let tau = 10f64.powf(rng.random_range(0.0..7.0));
        let x = pareto_schedule(r, tau).ctx()?;
        ensure(completes_near(&x, tau), || {
            format!("r = {r}, tau = {tau}: no completion at tau")
        })?;
        let emp = empirical_robustness(&x, 40);
        ensure(emp <= r + 1e-4, || {
            format!("r = {r}, tau = {tau}: robustness {emp}")
        })?;
    }
    Ok("20 random (r, tau)".into())
}

fn lemma_grid() -> Result<String, String> {
    let params = cr_br(4.0).ctx()?;
    let tau = 1e4;
    let mut evaluated = 0;
    for p in [0.05, 0.1, 0.2, 0.3] {
        let x = buffered_schedule(4.0, tau, p).ctx()?;
        for k in 0..100 {
            let eta = k as f64 / 99.0;
            for sign in [ErrorSign::Positive, ErrorSign::Negative] {
                let err = SignedError::new(eta, sign).ctx()?;
                let t = err.interruption(tau);
                if t < 1.0 {
                    continue;
                }
                let ratio = acceleration_ratio(&x, t).ctx()?.ratio;
                let bound = lemma_bound(&params, p, err);
                ensure(ratio <= bound + 1e-6, || {
                    format!("p = {p}, eta = {eta} ({sign:?}): ratio {ratio} > bound {bound}")
                })?;
                evaluated += 1;
            }
        }
    }
    Ok(format!("{evaluated} (p, eta, sign) points"))
}

// The finite geometric prefix leaves a gap of order b^-m in the ratio at tau,
// so the closed form is only reached to 1e-6 for very large tau. Once
// p >= 1 - 1/b the following contract also completes by tau and the closed
// form is only an upper bound.
fn consistency_sharpness() -> Result<String, String> {
    let params = cr_br(4.0).ctx()?;
    let tau = 1e9;
    for p in [0.0, 0.05, 0.1, 0.2, 0.3, 0.45, 0.6, 0.8] {
        let x = buffered_schedule(4.0, tau, p).ctx()?;
        let ratio = acceleration_ratio(&x, tau).ctx()?.ratio;
        let expected = (params.c / (1.0 - p)).min(params.r);
        if p < 1.0 - 1.0 / params.b {
            ensure((ratio - expected).abs() <= 1e-6, || {
                format!("p = {p}: ratio at tau {ratio} vs {expected}")
            })?;
        } else {
            ensure(ratio <= expected + 1e-6, || {
                format!("p = {p}: ratio at tau {ratio} above {expected}")
            })?;
        }
    }
    Ok("tau = 1e9; equality below p = 1 - 1/b, bound above".into())
}

fn bidding_round_trip() -> Result<String, String> {
    let mut rng = rng(5);
    for case in 0..50 {
        let x = random_schedule(&mut rng);
        let perf = Performance {
            robustness: 4.0,
            consistency: rng.random_range(1.0..4.0),
        };
        let tau = rng.random_range(1.0..50.0);
        let target = x.length(3).expect("at least three contracts") * perf.consistency;
        let bidding = schedule_to_bidding(&x, perf, target).ctx()?;
        let back = bidding_to_schedule(&bidding, tau).ctx()?;
        let factor = back.length(1).expect("non-empty") / x.length(1).expect("non-empty");
        for (a, b) in x.contracts().zip(back.contracts()).take(30) {
            let rel = (b.length - factor * a.length).abs() / b.length;
            ensure(rel <= 1e-9, || {
                format!("case {case}: contract {} off by {rel} relative", a.index)
            })?;
        }
    }
    Ok("50 random schedules".into())
}

fn threshold_ordering() -> Result<String, String> {
    for k in 0..=160 {
        let r = 4.0 + k as f64 * 0.1;
        let h = h_thresholds(&cr_br(r).ctx()?);
        ensure(h.lower < h.dominance, || {
            format!("r = {r}: lower {} >= dominance {}", h.lower, h.dominance)
        })?;
    }
    Ok("r on [4, 20], step 0.1".into())
}

fn monotone_answers() -> Result<String, String> {
    let mut rng = rng(6);
    let family = robust_family(4.0, 100, 0.1).ctx()?;
    for _ in 0..1000 {
        let t = rng.random_range(1.0..2f64.powi(20));
        let l = best_index(&family, t).ctx()?;
        let bits = encode_answers(l, 100).ctx()?;
        ensure(bits.is_monotone() && bits.no_count() == l, || {
            format!("T = {t}: answers for l = {l} are not a no-run then a yes-run")
        })?;
    }
    Ok("1000 random T, n = 100".into())
}

fn decode_identity() -> Result<String, String> {
    for n in 1..=256 {
        for l in 0..n {
            let m = decode_robust(&encode_answers(l, n).ctx()?, 0.0).ctx()?;
            ensure(m == l, || format!("n = {n}: decoded {m} for l = {l}"))?;
        }
    }
    Ok("all l < n <= 256".into())
}

const PROXIMITY_BUFFERS: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.5];

fn proximity_ok(l: usize, flipped: &AnswerBits, flips: usize, p: f64) -> Result<(), String> {
    let n = flipped.len();
    let shift = buffer_shift(n, p);
    if flips > shift {
        return Ok(());
    }
    let m = decode_robust(flipped, p).ctx()?;
    let d = cyclic_distance_below(l, m, n);
    ensure(d <= flips + shift && d <= 2 * shift, || {
        format!("n = {n}, p = {p}, l = {l}, {flips} flips: decoded {m} at distance {d}")
    })
}

fn cyclic_proximity() -> Result<String, String> {
    let mut patterns = 0u64;
    for n in 1..=12usize {
        for l in 0..n {
            let clean = encode_answers(l, n).ctx()?;
            for mask in 0u32..(1 << n) {
                let bits: Vec<bool> = clean
                    .bits()
                    .iter()
                    .enumerate()
                    .map(|(i, b)| *b ^ (mask >> i & 1 == 1))
                    .collect();
                let flipped = AnswerBits::new(bits);
                for p in PROXIMITY_BUFFERS {
                    proximity_ok(l, &flipped, mask.count_ones() as usize, p)?;
                }
                patterns += 1;
            }
        }
    }
    let mut rng = rng(7);
    for _ in 0..10_000 {
        let l = rng.random_range(0..100);
        let p = PROXIMITY_BUFFERS[rng.random_range(0..PROXIMITY_BUFFERS.len())];
        let eta = rng.random_range(0.0..=p);
        let flipped = flip_bits(&encode_answers(l, 100).ctx()?, eta, &mut rng).ctx()?;
        proximity_ok(l, &flipped, flip_count(eta, 100), p)?;
    }
    Ok(format!(
        "{patterns} exhaustive patterns for n <= 12, 10000 random for n = 100"
    ))
}

fn robust_bound() -> Result<String, String> {
    let params = cr_br(4.0).ctx()?;
    let mut rng = rng(8);
    let mut evaluated = 0u64;
    for n in [10u32, 100] {
        for p in [0.1, 0.2, 0.3] {
            let family = robust_family(4.0, n, p).ctx()?;
            let bound = robust_base(&params, n, p).bound;
            let shift = buffer_shift(n as usize, p);
            // one full period of the base past the floor region
            let lo = family.base().powi(8);
            let all = member_completions(&family, lo, lo * family.base().powi(2)).ctx()?;
            let step = (all.len() / 1000).max(1);
            for &c in all.iter().step_by(step) {
                let t = just_before(c);
                let l = best_index(&family, t).ctx()?;
                let clean = encode_answers(l, n as usize).ctx()?;
                for _ in 0..200 {
                    let eta = rng.random_range(0.0..=p);
                    let bits = flip_bits(&clean, eta, &mut rng).ctx()?;
                    let m = decode_robust(&bits, p).ctx()?;
                    let d = cyclic_distance_below(l, m, n as usize);
                    ensure(d <= 2 * shift, || {
                        format!("n = {n}, p = {p}, T = {t}: decoded {m} for best {l}")
                    })?;
                    let ratio = member_ratio(&family, m, t).ctx()?;
                    ensure(ratio <= bound + 1e-6, || {
                        format!("n = {n}, p = {p}, T = {t}: ratio {ratio} > bound {bound}")
                    })?;
                    evaluated += 1;
                }
            }
        }
    }
    Ok(format!("{evaluated} (T, pattern) evaluations"))
}

/// Worst-case error-free ratio of IDEAL with `n` queries, each interruption
/// answered with the encoded best member.
pub fn ideal_worst_case(r: f64, n: u32, horizon: usize) -> crate::Result<f64> {
    let family = ideal_family(r, n)?;
    let members = (0..family.count())
        .map(|i| family.member(i))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for m in &members {
        let c = m
            .completion(horizon)
            .expect("geometric schedules are infinite");
        let t = just_before(c);
        let l = best_index(&family, t)?;
        let chosen = ideal_select(&family, &ideal_encode(l, n)?)?;
        worst = worst.max(member_ratio(&family, chosen, t)?);
    }
    Ok(worst)
}

fn ideal_tightness() -> Result<String, String> {
    let mut details = Vec::new();
    for n in 1..=3u32 {
        let v = ideal_worst_case(4.0, n, 40).ctx()?;
        let target = 2f64.powf(1.0 + 0.5f64.powi(n as i32));
        ensure((v - target).abs() <= 1e-4, || {
            format!("n = {n}: worst case {v} vs {target}")
        })?;
        ensure((consistency_lower_bound(n) - target).abs() <= 1e-12, || {
            format!("n = {n}: lower bound disagrees")
        })?;
        let family = ideal_family(4.0, n).ctx()?;
        let members = (0..family.count())
            .map(|i| family.member(i))
            .collect::<crate::Result<Vec<_>>>()
            .ctx()?;
        let via_search = family_consistency(&members, 40).ctx()?;
        ensure((via_search - v).abs() <= 1e-9, || {
            format!("n = {n}: best-member evaluation {via_search} vs decoded {v}")
        })?;
        details.push(format!("n={n}: {v:.6}"));
    }
    Ok(details.join(", "))
}

fn adversarial_bits() -> Result<String, String> {
    let mut rng = rng(9);
    let r = 4.0;
    for n in 1..=6u32 {
        let family = ideal_family(r, n).ctx()?;
        for _ in 0..50 {
            let bits = AnswerBits::new((0..n).map(|_| rng.random_bool(0.5)).collect());
            let i = ideal_select(&family, &bits).ctx()?;
            let emp = empirical_robustness(&family.member(i).ctx()?, 40);
            ensure(emp <= r + 1e-4, || {
                format!("IDEAL n = {n}: member {i} has robustness {emp}")
            })?;
        }
    }
    for p in [0.0, 0.1, 0.3, 0.5] {
        let family = robust_family(r, 100, p).ctx()?;
        for _ in 0..200 {
            let bits = AnswerBits::new((0..100).map(|_| rng.random_bool(0.5)).collect());
            let m = decode_robust(&bits, p).ctx()?;
            let emp = empirical_robustness(&family.member(m).ctx()?, 40);
            ensure(emp <= r + 1e-4, || {
                format!("ROBUST p = {p}: member {m} has robustness {emp}")
            })?;
        }
    }
    Ok("random bits for IDEAL n <= 6 and ROBUST n = 100".into())
}

fn small_config(setting: Setting, jobs: Option<usize>) -> ExperimentConfig {
    ExperimentConfig {
        grid: Grid {
            t_min: 2.0,
            t_max: 1e5,
            points: 25,
            spacing: Spacing::Linear,
        },
        trials: 30,
        jobs,
        ..ExperimentConfig::new(setting)
    }
}

fn csv_bytes(cfg: &ExperimentConfig) -> Result<Vec<u8>, String> {
    let report = run_experiment(cfg).ctx()?;
    let mut out = Vec::new();
    write_report(&report, OutputFormat::Csv, &mut out).map_err(|e| e.to_string())?;
    Ok(out)
}

fn noise_determinism() -> Result<String, String> {
    let model = TimeNoiseModel::truncated_normal(0.1, None).ctx()?;
    for key in 0..100u64 {
        let draw = || -> crate::Result<f64> {
            let mut rng = RngStream::new(42, key, key * 7).rng();
            Ok(sample_tau(1e3, &model, &mut rng)?.tau())
        };
        let (a, b) = (draw().ctx()?, draw().ctx()?);
        ensure(a.to_bits() == b.to_bits(), || {
            format!("key {key}: {a} vs {b}")
        })?;
    }
    for setting in [Setting::Time, Setting::Query] {
        let one = csv_bytes(&small_config(setting, Some(1)))?;
        let many = csv_bytes(&small_config(setting, Some(4)))?;
        ensure(one == many, || {
            format!(
                "{} results differ between 1 and 4 workers",
                setting.as_str()
            )
        })?;
    }
    Ok("100 keyed draws; 1 vs 4 workers byte-equal".into())
}

fn bound_respect() -> Result<String, String> {
    let mut rng = rng(10);
    for h in [0.0, 0.05, 0.1, 0.3] {
        for model in [
            TimeNoiseModel::truncated_normal(h, None).ctx()?,
            TimeNoiseModel::uniform(h).ctx()?,
        ] {
            for _ in 0..5000 {
                let t = rng.random_range(2.0..1e6);
                let tau = sample_tau(t, &model, &mut rng).ctx()?.tau();
                let delta = tau / t - 1.0;
                ensure(delta.abs() <= h * (1.0 + 1e-12), || {
                    format!("H = {h}, {:?}: T = {t}, tau = {tau}", model.kind())
                })?;
                let err = error_of(tau, t);
                // eta is measured relative to tau
                ensure(err.eta <= h / (1.0 - h) + 1e-12, || {
                    format!("H = {h}: eta {} out of range", err.eta)
                })?;
            }
        }
    }
    Ok("H in {0, 0.05, 0.1, 0.3}, both models".into())
}

fn flip_hamming() -> Result<String, String> {
    let mut rng = rng(11);
    for n in 1..=16usize {
        for l in 0..n {
            let clean = encode_answers(l, n).ctx()?;
            for k in 0..=n {
                for eta in [k as f64 / n as f64, (k as f64 + 0.5) / n as f64] {
                    if eta > 1.0 {
                        continue;
                    }
                    let out = flip_bits(&clean, eta, &mut rng).ctx()?;
                    let expected = (eta * n as f64 + 1e-9).floor() as usize;
                    ensure(out.hamming(&clean) == expected, || {
                        format!("n = {n}, eta = {eta}: distance {}", out.hamming(&clean))
                    })?;
                }
            }
        }
    }
    Ok("every n <= 16, l < n, k <= n".into())
}

fn reproducibility() -> Result<String, String> {
    for setting in [Setting::Time, Setting::Query] {
        let cfg = small_config(setting, None);
        let a = csv_bytes(&cfg)?;
        let b = csv_bytes(&cfg)?;
        ensure(a == b, || format!("{} runs differ", setting.as_str()))?;
        let other = csv_bytes(&ExperimentConfig { seed: 2, ..cfg })?;
        ensure(a != other, || {
            format!("{} results ignore the seed", setting.as_str())
        })?;
    }
    Ok("byte-equal CSV for both settings".into())
}

fn grid_independence() -> Result<String, String> {
    for setting in [Setting::Time, Setting::Query] {
        let wide = small_config(setting, None);
        let narrow = ExperimentConfig {
            grid: Grid {
                points: 2,
                ..wide.grid.clone()
            },
            ..wide.clone()
        };
        let a = run_experiment(&wide).ctx()?;
        let b = run_experiment(&narrow).ctx()?;
        for (k, t) in b.grid.iter().enumerate() {
            let j = a
                .grid
                .iter()
                .position(|x| x == t)
                .ok_or("grid endpoint missing")?;
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                ensure(
                    ra.mean_ratio[j].to_bits() == rb.mean_ratio[k].to_bits(),
                    || {
                        format!(
                            "{} T = {t}, p = {}: value depends on the grid",
                            setting.as_str(),
                            ra.p
                        )
                    },
                )?;
            }
        }
    }
    Ok("endpoints agree between 25- and 2-point grids".into())
}

fn ordering() -> Result<String, String> {
    let cfg = ExperimentConfig {
        grid: Grid {
            points: 100,
            ..Grid::default()
        },
        trials: 100,
        ..ExperimentConfig::new(Setting::Time)
    };
    let report = run_experiment(&cfg).ctx()?;
    let at = |p: f64| {
        report
            .rows
            .iter()
            .find(|r| r.p == p)
            .map(|r| r.overall_mean)
            .ok_or(format!("no row for p = {p}"))
    };
    let aware = at(0.1)?;
    for p in [0.05, 0.2, 0.3] {
        let other = at(p)?;
        ensure(aware < other, || {
            format!("p = 0.1 mean {aware} is not below p = {p} mean {other}")
        })?;
    }
    Ok(format!("p = H mean {aware:.4} is the smallest"))
}

fn baseline_sanity() -> Result<String, String> {
    let x = baseline_schedule();
    let mut worst = 0.0f64;
    for t in Grid::default().values() {
        worst = worst.max(acceleration_ratio(&x, t).ctx()?.ratio);
    }
    ensure(worst <= 4.0 + 1e-6, || {
        format!("baseline ratio reaches {worst}")
    })?;
    Ok(format!("max baseline ratio {worst:.6}"))
}

fn lower_bound() -> Result<String, String> {
    let one = lower_bound_search(1, 4.0, 200).ctx()?;
    let target = consistency_lower_bound(1) - 0.05;
    ensure(one.min_consistency >= target, || {
        format!("n = 1: found {} < {target}", one.min_consistency)
    })?;
    let two = lower_bound_search(2, 4.0, 16).ctx()?;
    let target2 = consistency_lower_bound(2) - 0.05;
    ensure(two.min_consistency >= target2, || {
        format!("n = 2: found {} < {target2}", two.min_consistency)
    })?;
    Ok(format!(
        "n = 1: {:.4} over {} families; n = 2: {:.4} over {}",
        one.min_consistency, one.families_evaluated, two.min_consistency, two.families_evaluated
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        let mut names: Vec<_> = checks().iter().map(|c| c.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), checks().len());
    }

    #[test]
    fn filter_selects_by_substring() {
        let out = run_checks(Some("threshold_ordering"));
        assert_eq!(out.len(), 1);
        assert!(out[0].passed, "{}", out[0].detail);
    }
}
