//! Arbitrary-order, unconditionally conservative and positivity-preserving
//! time integration for production–destruction systems.
//!
//! The main entry points are [`mpdec::mpdec_step`] and
//! [`mpdec::integrate`]; [`problems`] holds the benchmark systems and
//! [`harness`] the convergence machinery used by the `mpdec` CLI.
//!
//! ```
//! use mpdec_core::mpdec::{integrate, MPDeCConfig};
//! use mpdec_core::problems::linear_problem;
//!
//! let problem = linear_problem();
//! let config = MPDeCConfig::from_order(5).unwrap();
//! let schedule = problem.default_schedule().unwrap();
//! let traj = integrate(&problem.system, &problem.c0, &schedule, &config).unwrap();
//! assert_eq!(traj.len(), 8);
//! assert!(traj.min_entry() > 0.0);
//! assert!(traj.max_relative_sum_drift() < 1e-14);
//! ```

pub mod baselines;
pub mod dec_tables;
pub mod error;
pub mod harness;
pub mod linear_solve;
pub mod mpdec;
pub mod pds;
pub mod problems;

pub use error::{Error, Result};
