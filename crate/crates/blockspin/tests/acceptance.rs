//! Acceptance gate: every release-blocking check at full strength, one test
//! per check so failures are individually visible. Each test prints its
//! pass/fail line (`cargo test --test acceptance -- --nocapture` to see all
//! of them on success).
//!
//! The same checks back `blockspin verify --level full`; this target exists
//! so `cargo test` alone exercises the gate.

use blockspin::verify::{self, CheckOutcome, Level};

fn gate(outcome: CheckOutcome) {
    println!("{}", outcome.line());
    assert!(outcome.passed, "{}", outcome.line());
}

#[test]
fn exact_tables_match_exhaustive_enumeration() {
    gate(verify::check_tables_match_enumeration(Level::Full));
}

#[test]
fn zero_coupling_factorizes_into_independent_blocks() {
    gate(verify::check_zero_coupling_factorization(Level::Full));
}

#[test]
fn pair_count_law_is_normalized_with_the_predicted_mode() {
    gate(verify::check_pair_count_normalization_and_mode(Level::Full));
}

#[test]
fn cross_term_at_the_mode_tracks_the_overlap_product() {
    gate(verify::check_cross_term_at_the_mode(Level::Full));
}

#[test]
fn two_block_law_concentrates_on_aligned_wells() {
    gate(verify::check_two_block_aligned_convergence(Level::Full));
}

#[test]
fn two_block_law_decouples_under_fast_decay() {
    gate(verify::check_two_block_decoupled_convergence(Level::Full));
}

#[test]
fn diluted_law_follows_the_quenched_mask_density() {
    gate(verify::check_diluted_quenched_alignment(Level::Full));
}

#[test]
fn three_block_sign_weights_match_the_bottleneck_formula() {
    gate(verify::check_three_block_sign_weights(Level::Full));
}

#[test]
fn middle_block_marginal_peaks_at_the_tilted_fixed_point() {
    gate(verify::check_middle_block_field_peak(Level::Full));
}

#[test]
fn tilted_pair_expectation_approaches_its_linear_rate() {
    gate(verify::check_tilted_expectation_decay(Level::Full));
}

#[test]
fn chains_balance_exactly_and_reproduce_the_exact_law() {
    gate(verify::check_mcmc_balance_and_histogram(Level::Full));
}

#[test]
fn sign_weight_algebra_normalizes_and_hits_both_limits() {
    gate(verify::check_sign_weight_algebra(Level::Full));
}
