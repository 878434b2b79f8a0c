//! Monte Carlo laboratory for the Newtonian capacity of Wiener sausages in
//! four dimensions.
//!
//! The crate builds sausages from δ-skeletons of Brownian paths, estimates
//! capacities with an exact walk-on-spheres hitting simulator, evaluates the
//! potential functionals that govern their asymptotics, and runs seeded,
//! reproducible experiment sweeps.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimate;
pub mod experiments;
pub mod geometry;
pub mod capacity;
pub mod functionals;
pub mod par;
pub mod paths;
pub mod rng;

pub use error::{Error, Result};
pub use estimate::{Estimate, Tally};
