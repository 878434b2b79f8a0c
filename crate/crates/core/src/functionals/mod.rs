//! Potential functionals of Brownian paths: `D_x[0,t]`, its skeleton
//! version, the pair functional `R[0,t]` and concentration summaries.

mod occupation;
mod pair;

pub use occupation::{
    d0_adaptive, d0_concentration, d0_functional, dx_delta_functional, dx_zeta_functional,
    Concentration, FunctionalSample, ZetaSample, ADAPTIVE_H0,
};
pub use pair::{r_pair_functional, r_pair_mean, PairOutcome};
