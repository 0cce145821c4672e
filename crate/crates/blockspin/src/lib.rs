//! Exact Gibbs laws, MCMC sampling, and limit-law verification for
//! mean-field spin blocks coupled through a thin bottleneck.
//!
//! Two fully connected Curie–Weiss blocks joined by a vanishing matching
//! (perfect or Bernoulli-diluted), or two large blocks joined through a small
//! middle block, undergo a phase transition in the joint block magnetization
//! as the coupling strength scales with system size. This crate computes the
//! finite-size laws exactly, samples them by MCMC when exact summation is out
//! of reach, and checks the limiting mixtures predicted for each coupling
//! regime.

pub mod cli;
pub mod error;
pub mod exact;
pub mod fixedpoint;
pub mod harness;
pub mod model;
pub mod plot;
pub mod predictions;
pub mod sampler;
pub mod util;
pub mod verify;

pub use error::{Error, Result};
pub use exact::{
    exact_diluted, exact_table, exact_three_block, exact_two_block, pair_count_law,
    well_masses_exact, Budget, LogWeightTable, PairCountLaw, WellMassReport, WellSpec,
};
pub use harness::{
    run_experiment, tv_distance, ConvergenceRow, ExperimentConfig, ExperimentOutcome, Method,
};
pub use fixedpoint::{free_energy, m_of_c, solve_cw, solve_cw_field, LimitConstant};
pub use model::{
    DilutedSpec, MagnetizationPoint, ModelSpec, SpinConfig, ThreeBlockSpec, TwoBlockSpec,
};
pub use predictions::{
    a_weight, classify, limit_law, LimitLaw, LimitRegime, RegimeClassification, ScheduleModel,
    ScheduleSpec,
};
pub use sampler::{run_chain, sample_conditional_uniform, sample_mask, ChainConfig, Trajectory};
pub use verify::{enumerate_block_probabilities, verify_suite, CheckOutcome, Level, VerifyReport};
