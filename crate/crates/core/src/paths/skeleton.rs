use serde::{Deserialize, Serialize};

use super::exit_time::ExitTimeLaw;
use crate::geometry::{sphere_sample, BallUnion, Point4};
use crate::rng::RngStream;
use crate::{Error, Result};

/// Positions and times at which a Brownian path leaves successive balls of
/// radius `delta`, up to a horizon.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSkeleton {
    pub points: Vec<Point4>,
    pub times: Vec<f64>,
    pub delta: f64,
    pub horizon: f64,
    /// Exit time of the last recorded ball; the first one past the horizon.
    pub next_time: f64,
}

impl PathSkeleton {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Time the path spends attached to entry `i`: `τ_{i+1}∧t − τ_i∧t`.
    pub fn dwell(&self, i: usize) -> f64 {
        let next = self.times.get(i + 1).copied().unwrap_or(self.next_time);
        next.min(self.horizon) - self.times[i].min(self.horizon)
    }

    /// Index range of the entries with `τ_i` in `[a, b)`, or `[a, b]` when
    /// `b` is the horizon.
    pub fn window(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let lo = self.times.partition_point(|&s| s < a);
        let hi = if b >= self.horizon {
            self.times.len()
        } else {
            self.times.partition_point(|&s| s < b)
        };
        lo..hi.max(lo)
    }

    /// The skeleton of `λ·β(·/λ²)`: positions scaled by `lambda`, times by `lambda²`.
    pub fn scaled(&self, lambda: f64) -> PathSkeleton {
        let l2 = lambda * lambda;
        PathSkeleton {
            points: self.points.iter().map(|&p| p * lambda).collect(),
            times: self.times.iter().map(|&s| s * l2).collect(),
            delta: self.delta * lambda,
            horizon: self.horizon * l2,
            next_time: self.next_time * l2,
        }
    }
}

/// δ-skeleton of a Brownian path from `start` on `[0, t]`.
///
/// Each exit position is uniform on the sphere around the previous one and the
/// holding times are `δ²` times independent unit-ball exit times.
pub fn sample_skeleton(rng: &mut RngStream, start: Point4, t: f64, delta: f64) -> Result<PathSkeleton> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("horizon must be positive, got {t}")));
    }
    let law = ExitTimeLaw::get();
    let d2 = delta * delta;
    let cap = (4.0 * t / d2 * 1.05) as usize + 16;
    let mut points = Vec::with_capacity(cap);
    let mut times = Vec::with_capacity(cap);
    let mut z = start;
    let mut s = 0.0;
    loop {
        points.push(z);
        times.push(s);
        let next = s + d2 * law.sample(rng);
        if next > t {
            return Ok(PathSkeleton {
                points,
                times,
                delta,
                horizon: t,
                next_time: next,
            });
        }
        s = next;
        z = sphere_sample(rng, z, delta);
    }
}

/// The sausage `∪ B(Z_i, r)` of a skeleton.
pub fn build_sausage(skeleton: &PathSkeleton, r: f64) -> Result<BallUnion> {
    if skeleton.is_empty() {
        return Err(Error::Precondition("skeleton is empty".into()));
    }
    BallUnion::new(skeleton.points.clone(), r)
}

/// δ-skeleton read off a discretely sampled path.
///
/// An exit is registered at the first sample outside the current ball; the
/// exit point and time are interpolated linearly to the sphere. Used to compare
/// skeleton functionals with fine-step functionals of the same path.
pub fn skeleton_from_fine_path(path: &[(f64, Point4)], delta: f64) -> Result<PathSkeleton> {
    let Some(&(t0, start)) = path.first() else {
        return Err(Error::Precondition("path is empty".into()));
    };
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let horizon = path.last().map(|p| p.0).unwrap_or(t0);
    let mut points = vec![start];
    let mut times = vec![t0];
    let mut center = start;
    let mut prev = path[0];
    for &(s, x) in &path[1..] {
        let (mut ps, mut px) = prev;
        // a coarse step can leave several balls
        while x.dist(center) >= delta {
            let r0 = px.dist(center);
            let r1 = x.dist(center);
            let theta = ((delta - r0) / (r1 - r0)).clamp(0.0, 1.0);
            let dir = px + (x - px) * theta - center;
            center += dir * (delta / dir.norm());
            ps += theta * (s - ps);
            px = center;
            points.push(center);
            times.push(ps);
        }
        prev = (s, x);
    }
    // the last ball is left after the horizon
    Ok(PathSkeleton {
        points,
        times,
        delta,
        horizon,
        next_time: f64::INFINITY,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::gauss_step_path;
    use crate::Tally;

    #[test]
    fn steps_have_length_delta_and_times_increase() {
        let mut rng = RngStream::new(7, 0);
        for &delta in &[0.05, 0.1, 0.2] {
            let sk = sample_skeleton(&mut rng, Point4::on_axis(1.0), 10.0, delta).unwrap();
            assert_eq!(sk.points[0], Point4::on_axis(1.0));
            assert_eq!(sk.times[0], 0.0);
            for w in sk.points.windows(2) {
                assert!((w[0].dist(w[1]) - delta).abs() < 1e-12);
            }
            for w in sk.times.windows(2) {
                assert!(w[1] > w[0]);
            }
            assert!(*sk.times.last().unwrap() <= 10.0);
            assert!(sk.next_time > 10.0);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut rng = RngStream::new(7, 0);
        assert!(sample_skeleton(&mut rng, Point4::ORIGIN, 1.0, 0.0).is_err());
        assert!(sample_skeleton(&mut rng, Point4::ORIGIN, 0.0, 0.1).is_err());
    }

    #[test]
    fn dwell_times_sum_to_horizon() {
        let mut rng = RngStream::new(8, 0);
        let sk = sample_skeleton(&mut rng, Point4::ORIGIN, 3.0, 0.1).unwrap();
        let total: f64 = (0..sk.len()).map(|i| sk.dwell(i)).sum();
        assert!((total - 3.0).abs() < 1e-9);
    }

    #[test]
    fn mean_point_count_matches_wald() {
        // E[#points] = 1 + E[#gaps completed by t] ≈ 4t/δ² + O(1)
        let mut rng = RngStream::new(9, 0);
        let (t, delta) = (5.0, 0.1);
        let counts: Tally = (0..1000)
            .map(|_| sample_skeleton(&mut rng, Point4::ORIGIN, t, delta).unwrap().len() as f64)
            .collect();
        let target = 4.0 * t / (delta * delta);
        assert!((counts.mean() / target - 1.0).abs() < 0.05, "{}", counts.mean());
    }

    #[test]
    fn window_partitions_entries() {
        let mut rng = RngStream::new(10, 0);
        let sk = sample_skeleton(&mut rng, Point4::ORIGIN, 4.0, 0.2).unwrap();
        let a = sk.window(0.0, 2.0);
        let b = sk.window(2.0, 4.0);
        assert_eq!(a.start, 0);
        assert_eq!(a.end, b.start);
        assert_eq!(b.end, sk.len());
    }

    #[test]
    fn sandwich_membership() {
        let mut rng = RngStream::new(11, 0);
        for _ in 0..100 {
            let sk = sample_skeleton(&mut rng, Point4::ORIGIN, 2.0, 0.1).unwrap();
            let inner = build_sausage(&sk, 1.0).unwrap();
            let outer = build_sausage(&sk, 1.1).unwrap();
            for _ in 0..100 {
                let p = crate::geometry::ball_sample(&mut rng, Point4::ORIGIN, 4.0);
                if inner.contains(p) {
                    assert!(outer.contains(p));
                }
            }
        }
    }

    #[test]
    fn single_point_skeleton_is_one_ball() {
        let sk = PathSkeleton {
            points: vec![Point4::ORIGIN],
            times: vec![0.0],
            delta: 0.1,
            horizon: 0.001,
            next_time: 0.01,
        };
        let u = build_sausage(&sk, 1.0).unwrap();
        assert_eq!(u.len(), 1);
        assert!(u.contains(Point4::on_axis(0.999)));
        assert!(!u.contains(Point4::on_axis(1.001)));
    }

    #[test]
    fn fine_path_skeleton_has_exact_steps() {
        let mut rng = RngStream::new(12, 0);
        let path = gauss_step_path(&mut rng, Point4::ORIGIN, 2.0, 1e-3).unwrap();
        let sk = skeleton_from_fine_path(&path, 0.1).unwrap();
        assert!(sk.len() > 100);
        for w in sk.points.windows(2) {
            assert!((w[0].dist(w[1]) - 0.1).abs() < 1e-12);
        }
        for w in sk.times.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }
}
