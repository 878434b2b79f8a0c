use super::skeleton::{build_sausage, PathSkeleton};
use crate::estimate::{Estimate, Tally};
use crate::geometry::{ball_sample, ball_volume, BallUnion, Point4};
use crate::rng::RngStream;
use crate::{Error, Result};

const MIN_PROBES: u64 = 1000;

fn check_probes(n_probe: u64) -> Result<()> {
    if n_probe < MIN_PROBES {
        return Err(Error::Precondition(format!(
            "at least {MIN_PROBES} probes are required, got {n_probe}"
        )));
    }
    Ok(())
}

/// Volume of a ball union by coverage weighting.
///
/// A probe is drawn uniformly from a uniformly chosen ball and scored
/// `n·|B| / N(x)`, where `N(x)` counts the balls covering it. The score is an
/// unbiased estimate of the union volume with far smaller variance than
/// hit-or-miss sampling of a bounding ball, whose hit rate collapses for
/// long thin sausages.
pub fn union_volume_estimate(rng: &mut RngStream, union: &BallUnion, n_probe: u64) -> Result<Estimate> {
    check_probes(n_probe)?;
    if union.is_empty() {
        return Ok(Estimate::exact(0.0, n_probe, rng.seed()));
    }
    let r = union.radius();
    let total = union.len() as f64 * ball_volume(r);
    let centers = union.centers();
    let mut tally = Tally::new();
    for _ in 0..n_probe {
        let k = ((rng.uniform() * centers.len() as f64) as usize).min(centers.len() - 1);
        let x = ball_sample(rng, centers[k], r);
        let covered = union.count_within(x, r).max(1);
        tally.push(total / covered as f64);
    }
    Ok(tally.estimate(rng.seed()))
}

/// Hit-or-miss volume: the fraction of uniform probes in the origin-centred
/// bounding ball that land in the union, times the bounding-ball volume.
pub fn volume_hit_or_miss(rng: &mut RngStream, union: &BallUnion, n_probe: u64) -> Result<Estimate> {
    check_probes(n_probe)?;
    if union.is_empty() {
        return Ok(Estimate::exact(0.0, n_probe, rng.seed()));
    }
    let rb = union.bounding_radius();
    let vb = ball_volume(rb);
    let tally: Tally = (0..n_probe)
        .map(|_| {
            if union.contains(ball_sample(rng, Point4::ORIGIN, rb)) {
                vb
            } else {
                0.0
            }
        })
        .collect();
    Ok(tally.estimate(rng.seed()))
}

/// Volume of `W_r^δ`, the radius-`r` sausage of a skeleton.
pub fn sausage_volume_estimate(
    rng: &mut RngStream,
    skeleton: &PathSkeleton,
    r: f64,
    n_probe: u64,
) -> Result<Estimate> {
    check_probes(n_probe)?;
    let union = build_sausage(skeleton, r)?;
    union_volume_estimate(rng, &union, n_probe)
}
