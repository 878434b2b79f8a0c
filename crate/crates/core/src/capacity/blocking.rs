use serde::{Deserialize, Serialize};

use super::estimators::{cap_estimate_parts, cross_estimate_parts, Diagnostics};
use super::wos::{Target, WosParams};
use crate::estimate::Estimate;
use crate::geometry::BallUnion;
use crate::paths::PathSkeleton;
use crate::rng::RngStream;
use crate::{Error, Result};

/// Radius `√t·log t` of the sphere used for the cross terms.
pub fn blocking_radius(t: f64) -> f64 {
    t.sqrt() * t.ln()
}

/// Dyadic block decomposition of one sausage capacity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockingRecord {
    pub cap_total: Estimate,
    /// Sum of the block capacities.
    pub s_sum: Estimate,
    /// Sum of χ over all sibling pairs of the dyadic tree.
    pub xi_sum: Estimate,
    /// Sum of ε over all sibling pairs.
    pub upsilon_sum: Estimate,
    /// `cap_total − (S − Ξ − Υ)`.
    pub residual: Estimate,
    pub diag: Diagnostics,
}

/// Splits `[0, t]` into `2^levels` blocks and estimates every term of
/// `Cap(W[0,t]) = S − Ξ − Υ` for the radius-`r_sausage` sausage of `skeleton`.
///
/// Returns `None` when the sausage is not contained in the ball of radius
/// [`blocking_radius`], the event on which the identity is stated.
pub fn blocking_decomposition(
    rng: &RngStream,
    skeleton: &PathSkeleton,
    r_sausage: f64,
    levels: u32,
    n: u64,
    params: &WosParams,
) -> Result<Option<BlockingRecord>> {
    let blocks = 1usize
        .checked_shl(levels)
        .filter(|&b| b <= skeleton.len() / 4)
        .ok_or_else(|| {
            Error::Precondition(format!(
                "2^{levels} blocks need at least {} skeleton points, got {}",
                4usize.saturating_mul(1usize.checked_shl(levels).unwrap_or(usize::MAX)),
                skeleton.len()
            ))
        })?;
    let t = skeleton.horizon;
    let r = blocking_radius(t);
    let leaves: Vec<BallUnion> = (0..blocks)
        .map(|k| {
            let a = t * k as f64 / blocks as f64;
            let b = t * (k + 1) as f64 / blocks as f64;
            BallUnion::new(skeleton.points[skeleton.window(a, b)].to_vec(), r_sausage)
        })
        .collect::<Result<_>>()?;
    let bounding = leaves.iter().map(|u| u.bounding_radius()).fold(0.0, f64::max);
    if !(bounding <= r) {
        log::info!("sausage leaves B(0, {r:.3}) (bounding radius {bounding:.3}); sample discarded");
        return Ok(None);
    }
    let refs: Vec<&BallUnion> = leaves.iter().collect();
    let seed = rng.seed();
    let total = cap_estimate_parts(&rng.child(0), Target::new(&refs), n, params)?;
    let mut diag = total.diag;
    if blocks == 1 {
        let zero = Estimate::exact(0.0, n, seed);
        return Ok(Some(BlockingRecord {
            cap_total: total.estimate,
            s_sum: total.estimate,
            xi_sum: zero,
            upsilon_sum: zero,
            residual: zero,
            diag,
        }));
    }
    let mut leaf_caps = Vec::with_capacity(blocks);
    for (k, leaf) in refs.iter().enumerate() {
        let m = cap_estimate_parts(&rng.child(1 + k as u64), Target::new(std::slice::from_ref(leaf)), n, params)?;
        diag.merge(&m.diag);
        leaf_caps.push(m.estimate);
    }
    let mut chis = Vec::new();
    let mut epss = Vec::new();
    let mut sums = Vec::new();
    let mut node = 0u64;
    for level in 1..=levels {
        let size = 1usize << level;
        let half = size / 2;
        for start in (0..blocks).step_by(size) {
            let left = Target::new(&refs[start..start + half]);
            let right = Target::new(&refs[start + half..start + size]);
            let stream = rng.child((1 << 32) + node);
            let c = cross_estimate_parts(&stream, left, right, r, n, params)?;
            diag.merge(&c.diag);
            chis.push(c.chi);
            epss.push(c.eps);
            sums.push(c.sum);
            node += 1;
        }
    }
    let sum = |v: &[Estimate]| Estimate {
        n,
        seed,
        ..Estimate::sum_independent(v.iter().map(|e| (1.0, e)))
    };
    let s_sum = sum(&leaf_caps);
    let cross = sum(&sums);
    let residual = Estimate {
        n,
        seed,
        ..Estimate::sum_independent([(1.0, &total.estimate), (-1.0, &s_sum), (1.0, &cross)])
    };
    Ok(Some(BlockingRecord {
        cap_total: total.estimate,
        s_sum,
        xi_sum: sum(&chis),
        upsilon_sum: sum(&epss),
        residual,
        diag,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point4;
    use crate::paths::sample_skeleton;

    fn params(t: f64) -> WosParams {
        WosParams::for_bounding_radius(2.0 * blocking_radius(t))
    }

    #[test]
    fn zero_levels_has_no_residual() {
        let mut rng = RngStream::new(1, 0);
        let sk = sample_skeleton(&mut rng, Point4::ORIGIN, 20.0, 0.2).unwrap();
        let rec = blocking_decomposition(&RngStream::new(2, 0), &sk, 1.0, 0, 2000, &params(20.0))
            .unwrap()
            .unwrap();
        assert_eq!(rec.residual.mean, 0.0);
        assert_eq!(rec.s_sum, rec.cap_total);
    }

    #[test]
    fn too_many_levels() {
        let mut rng = RngStream::new(1, 0);
        let sk = sample_skeleton(&mut rng, Point4::ORIGIN, 1.0, 0.2).unwrap();
        assert!(blocking_decomposition(&RngStream::new(2, 0), &sk, 1.0, 10, 2000, &params(1.0)).is_err());
    }

    #[test]
    fn one_level_identity() {
        let mut rng = RngStream::new(3, 0);
        let t = 50.0;
        let sk = sample_skeleton(&mut rng, Point4::ORIGIN, t, 0.2).unwrap();
        let rec = blocking_decomposition(&RngStream::new(4, 0), &sk, 1.0, 1, 20_000, &params(t))
            .unwrap()
            .expect("contained");
        assert!(rec.residual.within_sigma(0.0, 3.0), "{rec:?}");
        assert!(rec.xi_sum.mean > 0.0);
    }
}
