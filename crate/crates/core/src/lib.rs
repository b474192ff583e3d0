//! Construction and numerical certification of a log R-loss counterexample for
//! weighted L^2 bounds of Fourier extension operators by X-ray transforms.
//!
//! Layout follows the pipeline: [`geometry`] builds lacunary points on a
//! hypersurface, [`incidence`] checks their directional separation, the
//! [`construction`] module forms the subset-sum weight and the cap system,
//! [`transforms`] computes line integrals, mixed norms and energies,
//! [`estimates`] verifies the discrete X-ray inequality exactly, and
//! [`experiment`] runs the ratio sweep.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod construction;
pub mod error;
pub mod estimates;
pub mod experiment;
pub mod geometry;
pub mod incidence;
pub mod numeric;
pub mod transforms;

pub use error::{Error, Result};
