//! Brownian paths in four dimensions: fixed-step Gaussian paths, δ-skeletons,
//! dyadic shell records and sausage volumes.

mod exit_time;
mod gaussian;
mod shells;
mod skeleton;
mod volume;

pub use exit_time::{
    bessel_j, bessel_j1_zeros, sample_exit_time_fine_step, sample_exit_time_unit_ball,
    ExitTimeLaw, H_EXIT,
};
pub use gaussian::{gauss_increment, gauss_step_path};
pub use shells::{dyadic_shell_record, ShellRecord, G_CLIP};
pub use skeleton::{build_sausage, sample_skeleton, skeleton_from_fine_path, PathSkeleton};
pub use volume::{sausage_volume_estimate, union_volume_estimate, volume_hit_or_miss};
