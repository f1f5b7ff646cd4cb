//! Vortex patches on the cylinder S = R x T.
//!
//! The crate covers the cylindrical Biot-Savart law, the conserved
//! functionals of patch solutions, the one-dimensional variational
//! machinery around the functional Phi, and contour-dynamics experiments
//! probing the stability of the rectangular patch [-L, L] x T.

pub mod biot_savart;
pub mod certify;
pub mod dynamics;
mod error;
pub mod functionals;
pub mod geometry;
pub mod numeric;
pub mod par;
pub mod variational;

pub use error::{Error, Result};

pub use biot_savart::{
    fiber_log_integral, gamma, kernel_K, kernel_k, lattice_sum_oracle, velocity_contour,
    velocity_quadrature, KernelValue, VelocityField, VelocityMethod,
};
pub use functionals::{
    center_of_mass_x, check_hypotheses, energy_decomposition, mass, phi_of_density,
    regularized_energy, EnergyReport, HypothesisCheck,
};
pub use geometry::{
    patch_area, point_of_centering, reduce_y, vertical_average, weighted_sym_diff, Contour,
    Density1D, Patch, StripPoint, UniformGrid, WeightedSymDiff,
};
pub use variational::{
    bound_probe_log, bound_probe_petal, gap_close, lemma_oned_certify, minimize_binned,
    phi_binned, phi_intervals, BinConstraints, IntervalSet, RearrangeTrace,
};

/// 2 pi.
pub const TWO_PI: f64 = std::f64::consts::TAU;
