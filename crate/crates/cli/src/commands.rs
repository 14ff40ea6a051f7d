use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use predsched::experiments::{
    emit_results, run_experiment, ExperimentConfig, Grid, OutputFormat, Setting, Spacing,
};
use predsched::noise::NoiseKind;
use predsched::query_pred::{
    consistency_lower_bound, ideal_base, ideal_consistency, ideal_family, robust_base,
    robust_family, DecodeRule,
};
use predsched::schedule::{
    acceleration_ratio, completes_by, cr_br, exponential_robustness, ContractSchedule,
};
use predsched::time_pred::{
    buffered_schedule, h_thresholds, lemma_bound, pareto_schedule, ErrorSign, SignedError,
};
use predsched::verify::run_checks;

use crate::args::{
    BoundsOpts, DecodeArg, EvalOpts, ExperimentOpts, Kind, NoiseArg, ScheduleOpts, SettingArg,
    SpacingArg, VerifyOpts,
};
use crate::usage;

const SEED_ENV: &str = "PREDSCHED_SEED";
const MAX_PRINTED: usize = 100_000;

fn echo<T: Serialize>(resolved: &T) -> Result<()> {
    let text = toml::to_string(resolved).context("cannot serialize the resolved config")?;
    eprint!("# resolved configuration\n{text}");
    Ok(())
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(usage(msg()))
    }
}

/// Fails when a flag was given that the resolved options do not use.
fn reject_unused<T: Serialize>(given: &T, used: &T, context: &str) -> Result<()> {
    let given = toml::Table::try_from(given)?;
    let used = toml::Table::try_from(used)?;
    for key in given.keys() {
        require(used.contains_key(key), || {
            format!("--{key} is not used by {context}")
        })?;
    }
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn check_r(r: f64) -> Result<()> {
    require(r.is_finite() && r >= 4.0, || {
        format!("--r must be at least 4, got {r}")
    })
}

fn check_h(h: f64) -> Result<()> {
    require((0.0..1.0).contains(&h), || {
        format!("--H must lie in [0, 1), got {h}")
    })
}

fn check_n(n: u32) -> Result<()> {
    require(n >= 1, || "--n must be at least 1".into())
}

/// Shared schedule selection of `schedule` and `eval`.
struct Selection {
    kind: Kind,
    r: Option<f64>,
    tau: Option<f64>,
    p: Option<f64>,
    h: Option<f64>,
    n: Option<u32>,
    base: Option<f64>,
    index: Option<usize>,
}

impl Selection {
    /// Fills the defaults of the chosen kind and clears every field it ignores.
    fn resolve(self) -> Result<Selection> {
        let kind = self.kind;
        let flag = |name: &str| format!("--{name} is required for --kind {kind:?}").to_lowercase();
        let mut out = Selection {
            kind,
            r: None,
            tau: None,
            p: None,
            h: None,
            n: None,
            base: None,
            index: None,
        };
        match kind {
            Kind::Exp => {
                let base = self.base.unwrap_or(2.0);
                require(base.is_finite() && base > 1.0, || {
                    format!("--base must exceed 1, got {base}")
                })?;
                out.base = Some(base);
            }
            Kind::Pareto | Kind::Buffered => {
                out.r = Some(self.r.unwrap_or(4.0));
                let tau = self.tau.ok_or_else(|| usage(flag("tau")))?;
                require(tau.is_finite() && tau >= 1.0, || {
                    format!("--tau must be at least 1, got {tau}")
                })?;
                out.tau = Some(tau);
                if kind == Kind::Buffered {
                    // an explicit buffer wins; otherwise the H-aware choice p = H
                    match (self.p, self.h) {
                        (Some(p), _) => out.p = Some(p),
                        (None, Some(h)) => out.h = Some(h),
                        (None, None) => out.p = Some(0.1),
                    }
                    if let Some(h) = out.h {
                        check_h(h)?;
                    }
                    let p = out.p.or(out.h).expect("one of p, H is set");
                    require((0.0..1.0).contains(&p), || {
                        format!("--p must lie in [0, 1), got {p}")
                    })?;
                    require(tau * (1.0 - p) >= 1.0, || {
                        format!(
                            "--tau times (1 - p) must be at least 1, got {}",
                            tau * (1.0 - p)
                        )
                    })?;
                }
            }
            Kind::Ideal => {
                out.r = Some(self.r.unwrap_or(4.0));
                out.n = Some(self.n.ok_or_else(|| usage(flag("n")))?);
                out.index = Some(self.index.unwrap_or(0));
            }
            Kind::Robust => {
                out.r = Some(self.r.unwrap_or(4.0));
                out.n = Some(self.n.unwrap_or(100));
                let p = self.p.unwrap_or(0.1);
                require((0.0..=0.5).contains(&p), || {
                    format!("--p must lie in [0, 1/2] for --kind robust, got {p}")
                })?;
                out.p = Some(p);
                out.index = Some(self.index.unwrap_or(0));
            }
        }
        if let Some(r) = out.r {
            check_r(r)?;
        }
        if let Some(n) = out.n {
            check_n(n)?;
        }
        Ok(out)
    }

    fn build(&self) -> Result<ContractSchedule> {
        let member = |family: predsched::Result<predsched::query_pred::QueryFamily>| -> Result<_> {
            let family = family?;
            let i = self.index.expect("resolved");
            require(i < family.count(), || {
                format!("--index must be below {}, got {i}", family.count())
            })?;
            Ok(family.member(i)?)
        };
        Ok(match self.kind {
            Kind::Exp => ContractSchedule::exponential(self.base.expect("resolved"))?,
            Kind::Pareto => {
                pareto_schedule(self.r.expect("resolved"), self.tau.expect("resolved"))?
            }
            Kind::Buffered => buffered_schedule(
                self.r.expect("resolved"),
                self.tau.expect("resolved"),
                self.p.or(self.h).expect("resolved"),
            )?,
            Kind::Ideal => member(ideal_family(
                self.r.expect("resolved"),
                self.n.expect("resolved"),
            ))?,
            Kind::Robust => member(robust_family(
                self.r.expect("resolved"),
                self.n.expect("resolved"),
                self.p.expect("resolved"),
            ))?,
        })
    }
}

pub fn schedule(opts: ScheduleOpts) -> Result<bool> {
    let kind = opts
        .kind
        .ok_or_else(|| usage("--kind is required (exp, pareto, buffered, ideal, robust)"))?;
    let sel = Selection {
        kind,
        r: opts.r,
        tau: opts.tau,
        p: opts.p,
        h: opts.h,
        n: opts.n,
        base: opts.base,
        index: opts.index,
    }
    .resolve()?;
    let tmax = opts.tmax.unwrap_or(1000.0);
    require(tmax.is_finite() && tmax >= 1.0, || {
        format!("--tmax must be at least 1, got {tmax}")
    })?;
    let resolved = ScheduleOpts {
        kind: Some(kind),
        r: sel.r,
        tau: sel.tau,
        p: sel.p,
        h: sel.h,
        n: sel.n,
        tmax: Some(tmax),
        base: sel.base,
        index: sel.index,
        out: opts.out.clone(),
    };
    reject_unused(&opts, &resolved, &format!("--kind {}", kind_name(kind)))?;
    echo(&resolved)?;

    let x = sel.build()?;
    println!("# {x}");
    println!("index length completion");
    let mut rows = Vec::new();
    for c in x.contracts().take(MAX_PRINTED) {
        if !completes_by(c.completion, tmax) {
            break;
        }
        println!("{} {} {}", c.index, c.length, c.completion);
        rows.push(vec![
            c.index.to_string(),
            c.length.to_string(),
            c.completion.to_string(),
        ]);
    }
    if let Some(path) = &opts.out {
        write_csv(path, &["index", "length", "completion"], &rows)?;
    }
    Ok(true)
}

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Exp => "exp",
        Kind::Pareto => "pareto",
        Kind::Buffered => "buffered",
        Kind::Ideal => "ideal",
        Kind::Robust => "robust",
    }
}

pub fn eval(opts: EvalOpts) -> Result<bool> {
    let kind = opts
        .kind
        .ok_or_else(|| usage("--kind is required (exp, pareto, buffered, ideal, robust)"))?;
    let t = opts.t.ok_or_else(|| usage("--T is required"))?;
    require(t.is_finite() && t >= 1.0, || {
        format!("--T must be at least 1, got {t}")
    })?;
    let sel = Selection {
        kind,
        r: opts.r,
        tau: opts.tau,
        p: opts.p,
        h: opts.h,
        n: opts.n,
        base: opts.base,
        index: opts.index,
    }
    .resolve()?;
    let resolved = EvalOpts {
        kind: Some(kind),
        r: sel.r,
        tau: sel.tau,
        p: sel.p,
        h: sel.h,
        n: sel.n,
        base: sel.base,
        index: sel.index,
        t: Some(t),
        out: opts.out.clone(),
    };
    reject_unused(&opts, &resolved, &format!("--kind {}", kind_name(kind)))?;
    echo(&resolved)?;

    let rec = acceleration_ratio(&sel.build()?, t)?;
    println!(
        "T={} ell={} ratio={} schedule={}",
        rec.t, rec.ell, rec.ratio, rec.schedule_id
    );
    if let Some(path) = &opts.out {
        write_csv(
            path,
            &["T", "ell", "ratio", "schedule"],
            &[vec![
                rec.t.to_string(),
                rec.ell.to_string(),
                rec.ratio.to_string(),
                rec.schedule_id,
            ]],
        )?;
    }
    Ok(true)
}

pub fn bounds(opts: BoundsOpts) -> Result<bool> {
    let resolved = BoundsOpts {
        r: Some(opts.r.unwrap_or(4.0)),
        p: Some(opts.p.unwrap_or(0.1)),
        h: Some(opts.h.unwrap_or(0.1)),
        n: Some(opts.n.unwrap_or(100)),
        out: opts.out.clone(),
    };
    let (r, p, h, n) = (
        resolved.r.expect("set"),
        resolved.p.expect("set"),
        resolved.h.expect("set"),
        resolved.n.expect("set"),
    );
    check_r(r)?;
    check_h(h)?;
    check_n(n)?;
    require((0.0..=0.5).contains(&p), || {
        format!("--p must lie in [0, 1/2], got {p}")
    })?;
    echo(&resolved)?;

    let params = cr_br(r)?;
    let th = h_thresholds(&params);
    let signed = |sign| SignedError::new(h, sign);
    let rb = robust_base(&params, n, p);
    let mut values: Vec<(String, f64)> = vec![
        ("r".into(), r),
        ("c_r".into(), params.c),
        ("b_r".into(), params.b),
        (
            "exp_robustness_b_r".into(),
            exponential_robustness(params.b)?,
        ),
        ("h_lower".into(), th.lower),
        ("h_dom".into(), th.dominance),
        ("p".into(), p),
        ("H".into(), h),
        (
            "lemma_consistency".into(),
            lemma_bound(&params, p, SignedError::zero()),
        ),
        (
            "lemma_late".into(),
            lemma_bound(&params, p, signed(ErrorSign::Positive)?),
        ),
        (
            "lemma_early".into(),
            lemma_bound(&params, p, signed(ErrorSign::Negative)?),
        ),
        ("n".into(), f64::from(n)),
    ];
    if r == 4.0 {
        values.push(("query_lower_bound".into(), consistency_lower_bound(n)));
    }
    values.extend([
        ("ideal_base".into(), ideal_base(&params, n)),
        ("ideal_consistency".into(), ideal_consistency(&params, n)),
        ("robust_base".into(), rb.base),
        ("robust_bound".into(), rb.bound),
    ]);
    for (k, v) in &values {
        println!("{k}={v}");
    }
    if let Some(path) = &opts.out {
        let rows: Vec<Vec<String>> = values
            .iter()
            .map(|(k, v)| vec![k.clone(), v.to_string()])
            .collect();
        write_csv(path, &["quantity", "value"], &rows)?;
    }
    Ok(true)
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("{SEED_ENV} must be an unsigned integer, got {s:?}"))),
        Err(_) => Ok(None),
    }
}

fn resolve_experiment(opts: &ExperimentOpts) -> Result<(ExperimentOpts, ExperimentConfig)> {
    let setting = opts.setting.unwrap_or(SettingArg::Time);
    let mut cfg = ExperimentConfig::new(match setting {
        SettingArg::Time => Setting::Time,
        SettingArg::Query => Setting::Query,
    });
    let grid = Grid::default();
    cfg.r = opts.r.unwrap_or(cfg.r);
    cfg.seed = match opts.seed {
        Some(s) => s,
        None => env_seed()?.unwrap_or(cfg.seed),
    };
    cfg.trials = opts.trials.unwrap_or(cfg.trials);
    cfg.grid = Grid {
        t_min: opts.tmin.unwrap_or(grid.t_min),
        t_max: opts.tmax.unwrap_or(grid.t_max),
        points: opts.points.unwrap_or(grid.points),
        spacing: match opts.spacing {
            Some(SpacingArg::Log) => Spacing::Log,
            Some(SpacingArg::Linear) | None => Spacing::Linear,
        },
    };
    cfg.error_bound = opts.h.unwrap_or(cfg.error_bound);
    cfg.noise_kind = match opts.noise {
        Some(NoiseArg::Uniform) => NoiseKind::Uniform,
        Some(NoiseArg::TruncatedNormal) | None => NoiseKind::TruncatedNormal,
    };
    cfg.sigma = opts.sigma;
    cfg.queries = opts.n.unwrap_or(cfg.queries);
    if let Some(b) = &opts.buffers {
        cfg.buffers = b.clone();
    }
    cfg.decode_rule = match opts.decode {
        Some(DecodeArg::Shifted) => DecodeRule::Shifted,
        Some(DecodeArg::ShiftedMinusOne) => DecodeRule::ShiftedMinusOne,
        None => cfg.decode_rule,
    };
    cfg.jobs = opts.jobs;

    check_r(cfg.r)?;
    check_h(cfg.error_bound)?;
    require(cfg.trials >= 1, || "--trials must be at least 1".into())?;
    require(cfg.grid.points >= 2, || {
        format!("--points must be at least 2, got {}", cfg.grid.points)
    })?;
    require(
        cfg.grid.t_min >= 1.0 && cfg.grid.t_max > cfg.grid.t_min,
        || {
            format!(
                "--tmin and --tmax must satisfy 1 <= tmin < tmax, got {} and {}",
                cfg.grid.t_min, cfg.grid.t_max
            )
        },
    )?;
    require(!cfg.buffers.is_empty(), || {
        "--buffers needs at least one value".into()
    })?;
    require(cfg.jobs != Some(0), || "--jobs must be at least 1".into())?;
    if setting == SettingArg::Query {
        check_n(cfg.queries)?;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;

    let query = setting == SettingArg::Query;
    let time = !query;
    let resolved = ExperimentOpts {
        setting: Some(setting),
        r: Some(cfg.r),
        seed: Some(cfg.seed),
        trials: Some(cfg.trials),
        points: Some(cfg.grid.points),
        tmin: Some(cfg.grid.t_min),
        tmax: Some(cfg.grid.t_max),
        spacing: Some(opts.spacing.unwrap_or(SpacingArg::Linear)),
        h: Some(cfg.error_bound),
        noise: time.then(|| opts.noise.unwrap_or(NoiseArg::TruncatedNormal)),
        sigma: if time { cfg.sigma } else { None },
        n: query.then_some(cfg.queries),
        buffers: Some(cfg.buffers.clone()),
        decode: query.then_some(match cfg.decode_rule {
            DecodeRule::Shifted => DecodeArg::Shifted,
            DecodeRule::ShiftedMinusOne => DecodeArg::ShiftedMinusOne,
        }),
        jobs: cfg.jobs,
        out: opts.out.clone(),
    };
    reject_unused(
        opts,
        &resolved,
        &format!("the {} setting", cfg.setting.as_str()),
    )?;
    Ok((resolved, cfg))
}

pub fn experiment(opts: ExperimentOpts) -> Result<bool> {
    let (resolved, cfg) = resolve_experiment(&opts)?;
    echo(&resolved)?;
    let report = run_experiment(&cfg)?;
    println!("setting p overall_mean improvement_pct strong_improvement_pct");
    for row in &report.rows {
        println!(
            "{} {} {:.6} {:.2} {:.2}",
            cfg.setting.as_str(),
            row.p,
            row.overall_mean,
            row.improvement_pct,
            row.strong_improvement_pct
        );
    }
    if let Some(dir) = &opts.out {
        for format in [
            OutputFormat::Csv,
            OutputFormat::Summary,
            OutputFormat::Plotdata,
        ] {
            let path: PathBuf =
                dir.join(format!("{}_{}", cfg.setting.as_str(), format.file_suffix()));
            emit_results(&report, format, &path)?;
        }
    }
    Ok(true)
}

pub fn verify(opts: VerifyOpts) -> Result<bool> {
    echo(&opts)?;
    let outcomes = run_checks(opts.filter.as_deref());
    require(!outcomes.is_empty(), || {
        format!(
            "--filter {:?} matches no check",
            opts.filter.as_deref().unwrap_or("")
        )
    })?;
    let mut failed = 0;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!o.passed);
        println!(
            "[{tag}] {} ({:.2}s): {}",
            o.name,
            o.elapsed.as_secs_f64(),
            o.detail
        );
    }
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    if let Some(path) = &opts.out {
        let rows: Vec<Vec<String>> = outcomes
            .iter()
            .map(|o| vec![o.name.to_string(), o.passed.to_string(), o.detail.clone()])
            .collect();
        write_csv(path, &["check", "passed", "detail"], &rows)?;
    }
    Ok(failed == 0)
}
