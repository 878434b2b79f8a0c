//! Points, balls, potential kernels and indexed ball unions in four dimensions.

mod kernels;
mod point;
mod union;

pub use kernels::{
    ball_capacity, ball_hit_prob, ball_sample, ball_volume, cond_hit_bound,
    exterior_harmonic_sample, green_g, green_radial, gstar, sphere_sample, unit_direction,
    TWO_PI_SQ, UNIT_BALL_VOLUME,
};
pub use point::{Ball, Point4};
pub use union::{dist_to_union, BallUnion, DistanceBound};
