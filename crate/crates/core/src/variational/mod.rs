//! One-dimensional variational problems around the functional
//! Phi(rho) = double integral of |x1 - x2| rho(x1) rho(x2): interval sets,
//! gap-closing rearrangement, bin-constrained minimization and the
//! two-dimensional bound probes.

mod binned;
mod intervals;
mod probes;
mod rearrange;

pub use binned::{
    minimize_binned, minimize_binned_intervals, minimize_binned_on_grid, phi_binned,
    BinConstraints, MAX_ACTIVE_BINS,
};
pub use intervals::{phi_intervals, IntervalSet};
pub use probes::{
    abs_x_moment, bound_probe_log, bound_probe_log_suite, bound_probe_petal,
    bound_probe_petal_with, random_shape, LogProbe, LogProbeSummary,
};
pub use rearrange::{
    gap_close, lemma_oned_certify, sym_diff_weight, LemmaCertificate, RearrangeMove,
    RearrangeTrace,
};
