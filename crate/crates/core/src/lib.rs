//! Polarization-qubit to spin transfer through an imperfect nanophotonic
//! interface: device fidelity from cavity and reflector physics, the analytic
//! rate-fidelity trade-off over a lossy link, and a Monte Carlo replay of the
//! heralded protocol.

pub mod cavity;
pub mod device;
pub mod error;
pub mod fidelity;
pub mod montecarlo;
pub mod numeric;
pub mod rate;
pub mod scenario;
pub mod state;
pub mod sweep;

pub use cavity::{cavity_reflection, large_cooperativity_reflection, CavityParams};
pub use device::{
    effective_reflection, loss_balance_residual, ComplexAmplitude, EffectiveReflections, PdrParams, PolarizerParams,
    ReflectionPhase,
};
pub use error::{Error, Result};
pub use fidelity::{fidelity_from_reflections, transfer_fidelity, FidelityReport, TargetState};
pub use montecarlo::{simulate_rate, simulate_trial, McConfig, McEstimate, RateEstimator, TrialResult};
pub use rate::{
    attempt_probabilities, classify_regime, error_probability_given_click, expected_failure_time,
    expected_success_time, max_attempts, protocol_fidelity, repeaterless_bound, sequence_error_probability,
    transfer_rate, AttemptProbabilities, LinkParams, MaxAttempts, ProtocolTiming, RateOptions, RateResult, Regime,
    SuccessTimeModel,
};
pub use scenario::Scenario;
pub use state::{evolve_joint_state, herald_spin_state, JointState, Outcome, PhotonQubit, SpinState};
pub use sweep::{run_sweep, sweep_fidelity_cavity, sweep_fidelity_pdr, sweep_rate_vs_loss, SweepResult, SweepSpec};
