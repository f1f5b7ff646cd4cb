//! The cylindrical Green's function, the Biot-Savart kernel and velocity
//! evaluation for patches.

mod kernels;
mod lattice;
mod velocity;

pub use kernels::{
    d_factor, gamma, kernel_K, kernel_k, kernel_k1, log_d, rectangle_kernel_integral, KernelValue,
};
pub use lattice::{fiber_log_integral, lattice_sum_oracle, LatticeSum};
pub use velocity::{
    contour_method_validated, validate_contour_method, velocity_contour, velocity_quadrature,
    ContourSegments, VelocityField, VelocityMethod, CONTOUR_GATE_TOL,
};
