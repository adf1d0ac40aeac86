//! Scenario harness: presets, the joint simulation, traces and metrics.

pub mod checks;
mod metrics;
mod scenario;
mod simulation;
mod trace;

pub use metrics::{summarize, MetricsRecord};
pub use scenario::{
    builtin, builtin_case1, builtin_case2, builtin_case3, case3_kd_sweep, parse_range, InputSignal, MetricsConfig,
    ReferenceSpec, ScenarioSpec,
};
pub use checks::{run_all as run_checks, CheckOutcome};
pub use simulation::{run_scenario, run_scenario_with, Probe, RunOptions, Simulation};
pub use trace::{SampleDiagnostics, Trace, TraceRow};
