//! Grids, quadrature rules, the backward heat kernel, the smooth cutoff
//! bump and the envelope integral. All operations here are pure functions
//! of immutable inputs; rules are immutable after construction and safe to
//! share across workers.

pub mod cutoff;
pub mod envelope;
pub mod grid;
pub mod kernel;
pub mod quadrature;

pub use cutoff::{cutoff_phi, cutoff_phi_gradient, cutoff_phi_radial, smoothstep};
pub use envelope::error_integral;
pub use grid::{
    dist, dot, norm, point_from, unit_ball_volume, unit_sphere_area, CartesianGrid, Point,
    RadialGrid, SpaceTimeGrid, MAX_DIM,
};
pub use kernel::{
    backward_heat_kernel, backward_heat_kernel_gradient, kernel_tail_mass, truncation_radius,
    KernelConvention, LayerIntegral, LayerQuadrature, LayerSide,
};
pub use quadrature::{
    annulus_integral, ball_integral, gauss_legendre, integrate_1d, sphere_integral,
    QuadratureConfig, SphereQuadrature,
};
