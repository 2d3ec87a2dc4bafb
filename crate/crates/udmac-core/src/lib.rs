//! Delay-tolerant UAV MAC toolkit.
//!
//! A ground unit collects data from a UAV swarm. UAVs heading home to charge
//! can physically carry packets for the others (store-carry-and-forward),
//! and the MAC gives those couriers strict priority on the control channel,
//! rebalancing through a post-success freezing period.
//!
//! The crate provides, in matching layers:
//!
//! * [`geometry`] — closed-form probability that a hovering UAV finds a
//!   courier within its waiting time, for 1-D, 2-D and 3-D activity spaces;
//! * [`oracle`] — a seeded Monte Carlo scatter that cross-checks the closed
//!   forms;
//! * [`markov`] — the two-priority saturation-throughput model built on the
//!   backoff chain;
//! * [`sim`] — slot-accurate simulators of the priority MAC and of a
//!   class-partitioned TDMA baseline;
//! * [`config`] / [`sweep`] — the experiment harness behind the `udmac` CLI.

pub mod config;
pub mod error;
pub mod geometry;
pub mod markov;
pub mod oracle;
pub mod sim;
pub mod sweep;

pub use error::{Result, UdmacError};
