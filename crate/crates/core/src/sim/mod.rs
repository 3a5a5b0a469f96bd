//! Closed-loop simulation harness, run configuration and power figures.

pub mod actuator;
pub mod config;
pub mod harness;
pub mod power;

pub use actuator::actuator_delay;
pub use config::{ConfigError, RunConfig};
pub use harness::{power_report, read_trace, simulate, write_trace, Outcome, Phase, SafetyTables, SimError, SimResult, TraceRow};
pub use power::PowerReport;
