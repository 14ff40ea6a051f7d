//! CSV persistence of experiment reports.
//!
//! Floats are written with 17 significant digits so that reading a file back
//! reproduces the in-memory values bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ExperimentReport, Setting};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    /// One row per `(p, T)`: `setting,r,p,H,noise_kind,T,mean_ratio,baseline_ratio`.
    Csv,
    /// One row per `p`: `setting,p,overall_mean,improvement_pct,strong_improvement_pct`.
    Summary,
    /// Wide table for plotting: `T,baseline_ratio,p=<p>...`, one column per series.
    Plotdata,
}

impl OutputFormat {
    pub fn file_suffix(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "results.csv",
            OutputFormat::Summary => "summary.csv",
            OutputFormat::Plotdata => "plotdata.csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub setting: String,
    pub r: f64,
    pub p: f64,
    pub h: f64,
    pub noise_kind: String,
    pub t: f64,
    pub mean_ratio: f64,
    pub baseline_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRecord {
    pub setting: String,
    pub p: f64,
    pub overall_mean: f64,
    pub improvement_pct: f64,
    pub strong_improvement_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub t: Vec<f64>,
    pub baseline: Vec<f64>,
    /// `(p, mean ratio at each T)`.
    pub series: Vec<(f64, Vec<f64>)>,
}

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn noise_label(report: &ExperimentReport) -> &'static str {
    match report.config.setting {
        Setting::Time => report.config.noise_kind.as_str(),
        Setting::Query => "bit-flip",
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `report` to `path` in the given format, creating parent directories.
pub fn emit_results(report: &ExperimentReport, format: OutputFormat, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_report(report, format, file).map_err(csv_err(path))
}

/// Serializes `report` into any writer; [`emit_results`] is the file variant.
pub fn write_report<W: Write>(
    report: &ExperimentReport,
    format: OutputFormat,
    out: W,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let cfg = &report.config;
    match format {
        OutputFormat::Csv => {
            w.write_record([
                "setting",
                "r",
                "p",
                "H",
                "noise_kind",
                "T",
                "mean_ratio",
                "baseline_ratio",
            ])?;
            for row in &report.rows {
                for (k, &t) in report.grid.iter().enumerate() {
                    w.write_record([
                        cfg.setting.as_str().to_string(),
                        fmt_f64(cfg.r),
                        fmt_f64(row.p),
                        fmt_f64(cfg.error_bound),
                        noise_label(report).to_string(),
                        fmt_f64(t),
                        fmt_f64(row.mean_ratio[k]),
                        fmt_f64(report.baseline[k]),
                    ])?;
                }
            }
        }
        OutputFormat::Summary => {
            w.write_record([
                "setting",
                "p",
                "overall_mean",
                "improvement_pct",
                "strong_improvement_pct",
            ])?;
            for row in &report.rows {
                w.write_record([
                    cfg.setting.as_str().to_string(),
                    fmt_f64(row.p),
                    fmt_f64(row.overall_mean),
                    fmt_f64(row.improvement_pct),
                    fmt_f64(row.strong_improvement_pct),
                ])?;
            }
        }
        OutputFormat::Plotdata => {
            let mut header = vec!["T".to_string(), "baseline_ratio".to_string()];
            header.extend(report.rows.iter().map(|r| format!("p={}", r.p)));
            w.write_record(&header)?;
            for (k, &t) in report.grid.iter().enumerate() {
                let mut rec = vec![fmt_f64(t), fmt_f64(report.baseline[k])];
                rec.extend(report.rows.iter().map(|r| fmt_f64(r.mean_ratio[k])));
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_f64(path: &Path, field: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("not a number: {field:?}"),
        ),
    })
}

fn records(path: &Path) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rdr.headers().map_err(csv_err(path))?.clone();
    let rows = rdr
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_err(path))?;
    Ok((header, rows))
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let (_, rows) = records(path)?;
    rows.iter()
        .map(|r| {
            Ok(ResultRow {
                setting: r[0].to_string(),
                r: parse_f64(path, &r[1])?,
                p: parse_f64(path, &r[2])?,
                h: parse_f64(path, &r[3])?,
                noise_kind: r[4].to_string(),
                t: parse_f64(path, &r[5])?,
                mean_ratio: parse_f64(path, &r[6])?,
                baseline_ratio: parse_f64(path, &r[7])?,
            })
        })
        .collect()
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRecord>> {
    let (_, rows) = records(path)?;
    rows.iter()
        .map(|r| {
            Ok(SummaryRecord {
                setting: r[0].to_string(),
                p: parse_f64(path, &r[1])?,
                overall_mean: parse_f64(path, &r[2])?,
                improvement_pct: parse_f64(path, &r[3])?,
                strong_improvement_pct: parse_f64(path, &r[4])?,
            })
        })
        .collect()
}

pub fn read_plotdata(path: &Path) -> Result<PlotData> {
    let (header, rows) = records(path)?;
    let mut series: Vec<(f64, Vec<f64>)> = header
        .iter()
        .skip(2)
        .map(|h| Ok((parse_f64(path, h.trim_start_matches("p="))?, Vec::new())))
        .collect::<Result<_>>()?;
    let mut t = Vec::with_capacity(rows.len());
    let mut baseline = Vec::with_capacity(rows.len());
    for r in &rows {
        t.push(parse_f64(path, &r[0])?);
        baseline.push(parse_f64(path, &r[1])?);
        for (k, (_, s)) in series.iter_mut().enumerate() {
            s.push(parse_f64(path, &r[k + 2])?);
        }
    }
    Ok(PlotData {
        t,
        baseline,
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_time_experiment, ExperimentConfig, Grid, Spacing};

    fn tiny() -> ExperimentReport {
        let cfg = ExperimentConfig {
            grid: Grid {
                t_min: 2.0,
                t_max: 100.0,
                points: 2,
                spacing: Spacing::Linear,
            },
            trials: 1,
            buffers: vec![0.1],
            ..ExperimentConfig::new(Setting::Time)
        };
        run_time_experiment(&cfg).unwrap()
    }

    #[test]
    fn minimal_csv_has_header_and_two_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/out.csv");
        let rep = tiny();
        emit_results(&rep, OutputFormat::Csv, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("setting,r,p,H,noise_kind,T,mean_ratio,baseline_ratio\n"));
        let rows = read_results(&path).unwrap();
        assert_eq!(rows[1].t, rep.grid[1]);
        assert_eq!(rows[1].mean_ratio, rep.rows[0].mean_ratio[1]);
        assert_eq!(rows[0].baseline_ratio, rep.baseline[0]);
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_results(&tiny(), OutputFormat::Csv, &blocker.join("out.csv")).unwrap_err();
        assert!(err.to_string().contains("file"));
    }
}
