//! Exact event-driven simulation of the swarm.

mod config;
mod engine;
mod montecarlo;
pub mod output;

pub use config::{scenario, InitialCondition, SimConfig};
pub use engine::{run, EventCounts, MetricsRow, SimOutcome, Sojourn, SojournLog, TimeSeries};
pub use montecarlo::{monte_carlo_drift, DriftEstimate};
