//! Reproduction harness: configuration, the true/corrupted/relaxed runs,
//! theta sweeps, schedule studies and CSV output.

mod config;
mod metrics;
mod output;
mod runs;

pub use config::{config_from_settings, parse_config_text, Example, ExperimentConfig};
pub use metrics::{
    linf_distance, relative_l2_error, variance_ratio, weighted_variance, MetricsReport, PhaseStats,
};
pub use output::{Cell, Table};
pub use runs::{
    gamma_schedule_study, gamma_table, metrics_table, run_example, standard_gamma_schedule,
    theta_sweep, ExperimentOutput, GammaRow, ADI_TRACE_HEADER, EX3_CENTER, GAMMA_HEADER,
    METRICS_HEADER, T_VECTOR_HEADER,
};
