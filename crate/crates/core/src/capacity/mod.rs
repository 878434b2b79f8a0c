//! Walk-on-spheres hitting simulation and the capacity estimators built on it.

mod blocking;
mod estimators;
mod wos;

pub use blocking::{blocking_decomposition, blocking_radius, BlockingRecord};
pub use estimators::{
    cap_estimate, cap_estimate_diag, cap_intersection_estimate, cap_estimate_parts, chi_estimate, cross_estimate,
    cross_estimate_parts, decomp_residual, decomposition, eps_estimate, launch_radius,
    sample_walkers, CrossTerms, Decomposition, Diagnostics, Measured, CHUNK,
    MAX_EXHAUSTED_RATE, MIN_WALKERS,
};
pub(crate) use wos::{walk, walk_timed};
pub use wos::{
    wos_hit, wos_hit_parts, wos_hit_timed, HitKind, HitOutcome, RestartMode, Target, TimedHit,
    WosParams, ESCAPE_FACTOR, EPS_HIT, MAX_STEPS,
};
