use crate::geometry::Point4;
use crate::rng::RngStream;
use crate::{Error, Result};

/// Centered Gaussian increment with per-coordinate standard deviation `sd`.
#[inline]
pub fn gauss_increment(rng: &mut RngStream, sd: f64) -> Point4 {
    Point4::new(rng.normal(), rng.normal(), rng.normal(), rng.normal()) * sd
}

/// Positions at times `0, h, 2h, ..., ⌈t/h⌉h` of a Brownian path from `start`.
pub fn gauss_step_path(
    rng: &mut RngStream,
    start: Point4,
    t: f64,
    h: f64,
) -> Result<Vec<(f64, Point4)>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Config(vec![format!("step h must be positive, got {h}")]));
    }
    if !(t >= h) || !t.is_finite() {
        return Err(Error::Config(vec![format!(
            "horizon t = {t} must be finite and at least the step h = {h}"
        )]));
    }
    let steps = (t / h).ceil() as usize;
    let sd = h.sqrt();
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = start;
    out.push((0.0, x));
    for k in 1..=steps {
        x += gauss_increment(rng, sd);
        out.push((k as f64 * h, x));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_steps() {
        let mut rng = RngStream::new(1, 0);
        assert!(matches!(gauss_step_path(&mut rng, Point4::ORIGIN, 1.0, 0.0), Err(Error::Config(_))));
        assert!(matches!(gauss_step_path(&mut rng, Point4::ORIGIN, 1.0, -1.0), Err(Error::Config(_))));
        assert!(gauss_step_path(&mut rng, Point4::ORIGIN, 0.5, 1.0).is_err());
    }

    #[test]
    fn grid_and_start() {
        let mut rng = RngStream::new(1, 0);
        let p = gauss_step_path(&mut rng, Point4::on_axis(2.0), 1.05, 0.1).unwrap();
        assert_eq!(p.len(), 12);
        assert_eq!(p[0], (0.0, Point4::on_axis(2.0)));
        assert!((p[11].0 - 1.1).abs() < 1e-12);
    }

    #[test]
    fn marginal_variance_and_martingale() {
        let mut rng = RngStream::new(2, 0);
        let n = 100_000;
        let z = Point4::new(1.0, -2.0, 0.5, 3.0);
        let (t, h) = (2.0, 0.5);
        let mut s = [0.0f64; 4];
        let mut sq = 0.0;
        let mut mid = 0.0;
        for _ in 0..n {
            let p = gauss_step_path(&mut rng, z, t, h).unwrap();
            let end = p.last().unwrap().1;
            for (acc, x) in s.iter_mut().zip(end.0) {
                *acc += x;
            }
            sq += (end.0[0] - z.0[0]).powi(2);
            mid += p[2].1 .0[1];
        }
        let nf = n as f64;
        // Var((x-z)²) = 2t² for a Gaussian coordinate
        let var = sq / nf;
        assert!((var - t).abs() < 4.0 * (2.0 * t * t / nf).sqrt(), "{var}");
        let se = (t / nf).sqrt();
        for (acc, zk) in s.iter().zip(z.0) {
            assert!((acc / nf - zk).abs() < 4.0 * se);
        }
        assert!((mid / nf - z.0[1]).abs() < 4.0 * (1.0 / nf).sqrt());
    }

    #[test]
    fn confinement_tail_is_log_concave_in_r_squared() {
        let mut rng = RngStream::new(3, 0);
        let n = 20_000;
        let t = 1.0;
        let radii = [1.0, 2.0, 3.0, 4.0];
        let mut exceed = [0usize; 4];
        for _ in 0..n {
            let p = gauss_step_path(&mut rng, Point4::ORIGIN, t, 0.01).unwrap();
            let m = p.iter().map(|(_, x)| x.norm()).fold(0.0, f64::max);
            for (k, &r) in radii.iter().enumerate() {
                if m > r {
                    exceed[k] += 1;
                }
            }
        }
        let logp: Vec<f64> = exceed.iter().map(|&c| (c as f64 / n as f64).ln()).collect();
        for k in 1..4 {
            assert!(logp[k] < logp[k - 1]);
        }
        // slopes against r² become steeper (or stay equal): concavity
        let slope = |a: usize, b: usize| (logp[b] - logp[a]) / (radii[b].powi(2) - radii[a].powi(2));
        assert!(slope(1, 2) <= slope(0, 1) + 0.05);
        assert!(slope(2, 3) <= slope(1, 2) + 0.05);
    }
}
