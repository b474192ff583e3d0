//! Subset-sum lattice, mollifier tables, the exponential-sum weight and caps.

pub mod caps;
pub mod decay;
pub mod lattice;
pub mod mollifier;
pub mod weight;

pub use caps::{build_caps, Cap, CapSystem};
pub use decay::DecayBound;
pub use lattice::{build_lattice, shifted_membership, SubsetSumLattice};
pub use mollifier::{Mollifier, RadialTables};
pub use weight::{weight_eval, ExpSumWeight};
