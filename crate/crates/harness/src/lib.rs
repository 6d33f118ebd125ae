//! Experiment harness for hybrid SLNR beamforming simulations: config
//! ingestion, seeded Monte Carlo sweeps, GA convergence traces, beam-pattern
//! exports, and the GA-versus-exhaustive-search check. The `slnrsim` binary
//! wraps these drivers in a CLI.

pub mod config;
pub mod error;
pub mod experiments;
pub mod export;

pub use config::{ChannelModel, ExperimentConfig, GaSettings, Scheme};
pub use error::HarnessError;
pub use experiments::{
    oracle_check, run_beam_pattern, run_convergence_trace, run_sum_rate_sweep, BeamTable,
    OracleCheckParams, OracleCheckReport, ResultTable, TraceTable,
};
