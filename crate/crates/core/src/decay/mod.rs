//! Binomial decay, log-periodic limits and the level coefficients of the
//! mean-entropy recursions.

mod alpha;
mod binomial;
mod fourier;
mod partition;
mod profile;
mod roots;

pub use alpha::{
    alpha_equal_table, alpha_table, alpha_uniform_table, equal_recursion_residual, uniform_allocation_weights,
    uniform_recursion_residual, AlphaTable, ALPHA_ARITY_CAP, ALPHA_N_CAP,
};
pub use binomial::{
    binomial_decay_table, binomial_pmf, tied_winner_probability, DecayParams, DecayTable, TABLE_CAP, WINDOW_SIGMAS, WINDOW_TAIL_MAX,
};
pub use fourier::{composite_limit_a, log_periodic_limit_l, Coefficient, FourierLimit, Oscillation, DEFAULT_HARMONICS};
pub use partition::{partition_decay_expected_counts, SimEstimate};
pub use profile::{log_periodic_profile, table_profile, uniform_x_grid, LogPeriodicProfile};
pub use roots::{falling_factorial_roots, hypergeometric_solution, hypergeometric_solution_check, RootSet, ROOTS_ARITY_CAP};
