//! Line integrals and sup-line search, slice mixed norms, the projection-slice
//! check, and the two energy computations.

pub mod energy;
pub mod line;
pub mod mixed_norm;
pub mod slice;
pub mod sup_line;

pub use energy::{
    calibration, coincidence_mass, energy_delta, energy_quadrature, EnergyMethod, EnergyResult,
};
pub use line::{line_integral, line_integral_closed, max_admissible_step, Line};
pub use mixed_norm::{mixed_norm_bound, mixed_norm_upper, MixedNormSweep};
pub use slice::{projection_slice_check, SliceCheck, SliceFunction};
pub use sup_line::{sup_line_lower_bound, SupLineConfig, SupLineResult};
