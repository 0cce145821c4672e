//! Exact finite-size machinery: log-domain numerics, the matched-pair
//! counting law, dense Gibbs tables, and well-mass accounting.

pub mod numerics;
pub mod paircount;
pub mod tables;
pub mod wells;

pub use numerics::{log_binomial, log_sum_exp, LogFactorials, LogSumExp};
pub use paircount::{
    cross_term_value, gamma_star, gamma_star_star, pair_count_law, PairCountLaw,
};
pub use tables::{
    exact_diluted, exact_table, exact_three_block, exact_two_block, Budget, LogWeightTable,
};
pub use wells::{well_masses_empirical, well_masses_exact, WellMassReport, WellSpec};
