// Library results against straightforward reimplementations.

use predsched::experiments::{
    compare_to_baseline, emit_results, read_plotdata, read_summary, run_experiment,
    ExperimentConfig, Grid, OutputFormat, Setting, Spacing,
};
use predsched::noise::{flip_bits, RngStream};
use predsched::query_pred::{
    best_index, decode_robust, encode_answers, ideal_consistency, ideal_family, member_ratio,
    robust_base, robust_family,
};
use predsched::schedule::{
    acceleration_ratio, cr_br, empirical_robustness, largest_completed, ContractSchedule,
};
use predsched::time_pred::{h_thresholds, pareto_schedule};

fn bisect(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let neg_at_lo = f(lo) < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == neg_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn roots_match_bisection() {
    for r in [4.5, 5.0, 6.0, 10.0, 37.0] {
        let p = cr_br(r).unwrap();
        let q = |x: f64| x * x - r * x + r;
        let c = bisect(1.0, r / 2.0, q);
        let b = bisect(r / 2.0, r, q);
        assert!((p.c - c).abs() < 1e-10, "r = {r}");
        assert!((p.b - b).abs() < 1e-10, "r = {r}");
    }
}

#[test]
fn thresholds_match_bisection() {
    for r in [4.0, 5.0, 8.0] {
        let p = cr_br(r).unwrap();
        let h = h_thresholds(&p);
        let ratio = |x: f64| (1.0 + x) / (1.0 - x);
        let q = (p.c + 1.0) / p.c;
        let lower = bisect(0.0, 0.99, |x| ratio(x) - q.sqrt());
        let dom = bisect(0.0, 0.99, |x| ratio(x) - q);
        assert!((h.lower - lower).abs() < 1e-10);
        assert!((h.dominance - dom).abs() < 1e-10);
    }
}

fn ell_by_enumeration(lengths: &[f64], t: f64) -> f64 {
    let mut elapsed = 0.0;
    let mut best = 1.0;
    for &x in lengths {
        elapsed += x;
        if elapsed > t * (1.0 + 1e-12) {
            break;
        }
        best = x;
    }
    best
}

#[test]
fn largest_completed_matches_prefix_sums() {
    let lengths: Vec<f64> = (0..25).map(|i| 0.7 * 1.8f64.powi(i) + i as f64).collect();
    let x = ContractSchedule::explicit(lengths.clone()).unwrap();
    let mut t = 1.0;
    while t < 1e6 {
        assert_eq!(
            largest_completed(&x, t).unwrap(),
            ell_by_enumeration(&lengths, t)
        );
        t *= 1.37;
    }
}

#[test]
fn pareto_scale_from_partial_sums() {
    for (r, tau) in [(4.0, 10.0), (4.0, 1000.0), (5.0, 77.0), (9.0, 3.5)] {
        let b = cr_br(r).unwrap().b;
        let mut m = 1;
        let sum = |m: i32| (1..=m).map(|i| b.powi(i)).sum::<f64>();
        while sum(m) < tau {
            m += 1;
        }
        let (base, gamma) = pareto_schedule(r, tau).unwrap().geometric_params().unwrap();
        assert_eq!(base, b);
        assert!((gamma - tau / sum(m)).abs() < 1e-12 * gamma.max(1.0));
    }
}

// Supremum of T / ell over a fine sweep of one period, with every member
// allowed and the best one chosen at each T.
fn best_member_sweep(members: &[ContractSchedule], lo: f64, hi: f64) -> f64 {
    let mut worst = 0.0f64;
    for m in members {
        for c in m.contracts().take(200) {
            if c.completion < lo {
                continue;
            }
            if c.completion > hi {
                break;
            }
            let t = c.completion * (1.0 - 1e-9);
            let best = members
                .iter()
                .map(|x| largest_completed(x, t).unwrap())
                .fold(0.0, f64::max);
            worst = worst.max(t / best);
        }
    }
    worst
}

#[test]
fn ideal_consistency_by_sweep() {
    for n in 1..=3 {
        let fam = ideal_family(4.0, n).unwrap();
        let members: Vec<_> = (0..fam.count()).map(|i| fam.member(i).unwrap()).collect();
        let swept = best_member_sweep(&members, 1e6, 1e7);
        let closed = ideal_consistency(fam.params(), n);
        assert!(
            (swept - closed).abs() < 1e-6,
            "n = {n}: {swept} vs {closed}"
        );
    }
}

#[test]
fn best_index_by_direct_search() {
    let fam = robust_family(4.0, 20, 0.1).unwrap();
    for t in [3.0, 17.5, 1234.0, 98765.4] {
        let ells: Vec<f64> = (0..20)
            .map(|i| largest_completed(&fam.member(i).unwrap(), t).unwrap())
            .collect();
        let max = ells.iter().copied().fold(0.0, f64::max);
        let first = ells.iter().position(|e| *e == max).unwrap();
        assert_eq!(best_index(&fam, t).unwrap(), first);
    }
}

#[test]
fn robust_decode_by_counting() {
    let mut rng = RngStream::new(9, 9, 9).rng();
    for n in [7usize, 30, 100] {
        for p in [0.0, 0.1, 0.3] {
            for l in [0, n / 3, n - 1] {
                let bits = flip_bits(&encode_answers(l, n).unwrap(), p / 2.0, &mut rng).unwrap();
                let no = bits.bits().iter().filter(|b| !**b).count() as i64;
                let shift = (p * n as f64).round() as i64;
                let expected = (no - shift).rem_euclid(n as i64) as usize;
                assert_eq!(decode_robust(&bits, p).unwrap(), expected);
            }
        }
    }
}

#[test]
fn robust_base_formula() {
    let params = cr_br(4.0).unwrap();
    for (n, p) in [(100u32, 0.1), (10, 0.3), (3, 0.5)] {
        let k = (2.0 * (p * n as f64).round() + 1.0) / n as f64;
        let d = if 4.0 <= (1.0 + k).powi(2) / k {
            2.0
        } else {
            1.0 + k
        };
        let rb = robust_base(&params, n, p);
        assert!((rb.base - d).abs() < 1e-12);
        assert!((rb.bound - d.powf(1.0 + 1.0 / n as f64 + 2.0 * p) / (d - 1.0)).abs() < 1e-12);
    }
}

#[test]
fn member_robustness_matches_sweep() {
    let fam = robust_family(5.0, 10, 0.2).unwrap();
    for i in 0..10 {
        let emp = empirical_robustness(&fam.member(i).unwrap(), 60);
        assert!(emp <= fam.member_robustness() + 1e-9);
        assert!(emp <= 5.0 + 1e-9);
    }
}

#[test]
fn improvement_percentages_by_hand() {
    let base = [4.0, 3.0, 2.0, 3.6, 1.5];
    let means = [2.0, 3.1, 1.9, 3.0, 1.0];
    // better: 0, 2, 3, 4; strong (b >= 1.2 m): 0 (4 >= 2.4), 3 (3.6 >= 3.6), 4 (1.5 >= 1.2)
    let (imp, strong) = compare_to_baseline(&means, &base).unwrap();
    assert!((imp - 80.0).abs() < 1e-12);
    assert!((strong - 60.0).abs() < 1e-12);
}

#[test]
fn time_means_from_per_point_series() {
    let cfg = ExperimentConfig {
        grid: Grid {
            t_min: 3.0,
            t_max: 3000.0,
            points: 12,
            spacing: Spacing::Log,
        },
        trials: 15,
        ..ExperimentConfig::new(Setting::Time)
    };
    let rep = run_experiment(&cfg).unwrap();
    for (k, &t) in rep.grid.iter().enumerate() {
        let baseline = acceleration_ratio(&ContractSchedule::exponential(2.0).unwrap(), t)
            .unwrap()
            .ratio;
        assert_eq!(rep.baseline[k], baseline);
    }
    for row in &rep.rows {
        let mean = row.mean_ratio.iter().sum::<f64>() / row.mean_ratio.len() as f64;
        assert!((row.overall_mean - mean).abs() < 1e-12);
    }
}

#[test]
fn noiseless_query_run_picks_the_best_member() {
    let cfg = ExperimentConfig {
        grid: Grid {
            t_min: 2.0,
            t_max: 5000.0,
            points: 30,
            spacing: Spacing::Linear,
        },
        trials: 3,
        error_bound: 0.0,
        buffers: vec![0.0],
        queries: 16,
        decode_rule: predsched::query_pred::DecodeRule::Shifted,
        ..ExperimentConfig::new(Setting::Query)
    };
    let rep = run_experiment(&cfg).unwrap();
    let fam = robust_family(4.0, 16, 0.0).unwrap();
    for (k, &t) in rep.grid.iter().enumerate() {
        let opt = (0..16)
            .map(|i| member_ratio(&fam, i, t).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(rep.rows[0].mean_ratio[k], opt);
    }
}

#[test]
fn summary_and_plotdata_round_trip() {
    let cfg = ExperimentConfig {
        grid: Grid {
            t_min: 2.0,
            t_max: 900.0,
            points: 7,
            spacing: Spacing::Linear,
        },
        trials: 5,
        ..ExperimentConfig::new(Setting::Query)
    };
    let rep = run_experiment(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s.csv");
    let p = dir.path().join("deep/p.csv");
    emit_results(&rep, OutputFormat::Summary, &s).unwrap();
    emit_results(&rep, OutputFormat::Plotdata, &p).unwrap();
    let summary = read_summary(&s).unwrap();
    for (a, b) in summary.iter().zip(&rep.rows) {
        assert_eq!(a.setting, "query");
        assert_eq!(a.overall_mean.to_bits(), b.overall_mean.to_bits());
        assert_eq!(a.strong_improvement_pct, b.strong_improvement_pct);
    }
    let plot = read_plotdata(&p).unwrap();
    assert_eq!(plot.t, rep.grid);
    assert_eq!(plot.baseline, rep.baseline);
    assert_eq!(plot.series.len(), cfg.buffers.len());
    for ((p, s), row) in plot.series.iter().zip(&rep.rows) {
        assert_eq!(*p, row.p);
        assert_eq!(s, &row.mean_ratio);
    }
}
