//! Contract scheduling with untrusted predictions.
//!
//! A contract algorithm must be told its running time in advance; running a
//! sequence of contracts of increasing length turns it into an interruptible
//! one. This crate builds such schedules when a (possibly wrong) prediction
//! about the interruption is available and measures how they behave.
//!
//! * [`schedule`]: schedules, acceleration ratio, robustness.
//! * [`time_pred`]: schedules for a predicted interruption time.
//! * [`query_pred`]: schedule families selected by binary query answers.
//! * [`noise`]: prediction error models and keyed random streams.
//! * [`experiments`]: grid experiments against the doubling baseline.
//! * [`verify`]: executable invariant suites.
//!
//! ```
//! use predsched::schedule::{acceleration_ratio, ContractSchedule};
//! use predsched::time_pred::pareto_schedule;
//!
//! let doubling = ContractSchedule::exponential(2.0).unwrap();
//! assert_eq!(acceleration_ratio(&doubling, 6.0).unwrap().ratio, 1.5);
//!
//! // a contract of the 4-robust Pareto schedule completes exactly at tau = 10
//! let x = pareto_schedule(4.0, 10.0).unwrap();
//! assert!((acceleration_ratio(&x, 10.0).unwrap().ratio - 1.75).abs() < 1e-12);
//! ```

pub mod error;
pub mod experiments;
pub mod noise;
pub mod query_pred;
pub mod schedule;
pub mod time_pred;
pub mod verify;

pub use error::{Error, Result};
