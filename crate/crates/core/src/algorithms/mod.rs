//! Sampling, amplitude estimation and amplitude amplification over
//! simulated preparation unitaries, and the distinguishers built on the
//! reduction circuits.

mod amplify;
mod distinguish;
mod estimate;
mod oracle;
pub mod reduction;

pub use amplify::{amplitude_amplify, amplitude_amplify_with, AmplifyConfig, AmplifyOutcome};
pub use distinguish::{
    distinguish_by_amplification, distinguish_by_estimation, distinguish_naive, estimation_via_amplification,
    naive_shots, run_trial, run_trials, Decision, Engine, Method, TrialRow,
};
pub use estimate::{amplitude_estimate, amplitude_estimate_with, naive_estimate, AeConfig};
pub use oracle::{PreparationOracle, QueryCounts};
pub use reduction::{build_t_sec4, reduction_state_check, ReductionCheck, ReductionCircuit, Variant};
