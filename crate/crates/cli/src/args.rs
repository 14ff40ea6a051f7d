//! Flag definitions. Every subcommand's options are all optional so that a
//! config file can supply them; flags win over the file.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "predsched",
    version,
    about = "Contract schedules with untrusted predictions"
)]
pub struct Cli {
    /// TOML file whose keys mirror the subcommand's flags.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the contracts of a schedule that complete by --tmax.
    Schedule(ScheduleOpts),
    /// Evaluate a schedule at the interruption --T.
    Eval(EvalOpts),
    /// Print closed-form quantities for the given parameters.
    Bounds(BoundsOpts),
    /// Run the noisy-prediction experiment against the doubling baseline.
    Experiment(ExperimentOpts),
    /// Run the invariant suites and the lower-bound search.
    Verify(VerifyOpts),
}

macro_rules! options {
    ($(#[$m:meta])* $name:ident { $( $(#[$fm:meta])* $field:ident : $ty:ty ),* $(,)? }) => {
        $(#[$m])*
        #[derive(clap::Args, Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
        #[serde(deny_unknown_fields)]
        pub struct $name {
            $( $(#[$fm])* pub $field: Option<$ty>, )*
        }

        impl $name {
            /// Field-wise `self` or else `fallback`.
            pub fn or(self, fallback: Self) -> Self {
                Self { $( $field: self.$field.or(fallback.$field), )* }
            }
        }
    };
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    /// Exponential schedule (base^i); uses --base.
    Exp,
    /// Pareto-optimal schedule for prediction --tau; uses --r.
    Pareto,
    /// Pareto schedule for tau(1-p); uses --r, --tau, --p (or --H).
    Buffered,
    /// Member --index of the IDEAL family; uses --r, --n.
    Ideal,
    /// Member --index of ROBUST_p; uses --r, --n, --p.
    Robust,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingArg {
    Time,
    Query,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpacingArg {
    Linear,
    Log,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseArg {
    TruncatedNormal,
    Uniform,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecodeArg {
    Shifted,
    ShiftedMinusOne,
}

options! {
    ScheduleOpts {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Robustness level (>= 4).
        #[arg(long)]
        r: f64,
        /// Predicted interruption time.
        #[arg(long)]
        tau: f64,
        /// Buffer parameter.
        #[arg(long)]
        p: f64,
        /// Error bound; the buffer for --kind buffered when --p is absent.
        #[arg(long = "H")]
        #[serde(rename = "H")]
        h: f64,
        /// Number of binary queries.
        #[arg(long)]
        n: u32,
        /// Print contracts completing by this time.
        #[arg(long)]
        tmax: f64,
        /// Base of the exponential schedule.
        #[arg(long)]
        base: f64,
        /// Family member to print.
        #[arg(long)]
        index: usize,
        /// Also write the output as CSV to this path.
        #[arg(long)]
        out: PathBuf,
    }
}

options! {
    EvalOpts {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        p: f64,
        #[arg(long = "H")]
        #[serde(rename = "H")]
        h: f64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        base: f64,
        #[arg(long)]
        index: usize,
        /// Interruption time.
        #[arg(long = "T")]
        #[serde(rename = "T")]
        t: f64,
        #[arg(long)]
        out: PathBuf,
    }
}

options! {
    BoundsOpts {
        #[arg(long)]
        r: f64,
        /// Buffer parameter for the lemma and ROBUST_p values.
        #[arg(long)]
        p: f64,
        /// Prediction error for the lemma values.
        #[arg(long = "H")]
        #[serde(rename = "H")]
        h: f64,
        /// Number of queries for the IDEAL and ROBUST_p values.
        #[arg(long)]
        n: u32,
        #[arg(long)]
        out: PathBuf,
    }
}

options! {
    ExperimentOpts {
        #[arg(long, value_enum)]
        setting: SettingArg,
        #[arg(long)]
        r: f64,
        /// Random seed; defaults to $PREDSCHED_SEED, then 1.
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: usize,
        /// Number of interruption times on the grid.
        #[arg(long)]
        points: usize,
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, value_enum)]
        spacing: SpacingArg,
        /// Error bound H (relative time error, or flipped-bit fraction).
        #[arg(long = "H")]
        #[serde(rename = "H")]
        h: f64,
        #[arg(long, value_enum)]
        noise: NoiseArg,
        /// Relative deviation of truncated-normal noise; defaults to H/2.
        #[arg(long)]
        sigma: f64,
        /// Number of queries in the query setting.
        #[arg(long)]
        n: u32,
        /// Comma-separated buffer values p.
        #[arg(long, value_delimiter = ',')]
        buffers: Vec<f64>,
        #[arg(long, value_enum)]
        decode: DecodeArg,
        /// Worker threads; all cores when absent.
        #[arg(long)]
        jobs: usize,
        /// Directory for results, summary and plot CSV files.
        #[arg(long)]
        out: PathBuf,
    }
}

options! {
    VerifyOpts {
        /// Run only checks whose name contains this text.
        #[arg(long)]
        filter: String,
        #[arg(long)]
        out: PathBuf,
    }
}
