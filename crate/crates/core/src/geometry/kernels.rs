//! Potential-theoretic kernels of four-dimensional Brownian motion and the
//! sampling primitives built on them.

use std::f64::consts::PI;

use super::point::Point4;
use crate::rng::RngStream;
use crate::{Error, Result};

/// `2π²`, the surface area of the unit 3-sphere and the capacity of the unit ball.
pub const TWO_PI_SQ: f64 = 2.0 * PI * PI;

/// Volume of the unit ball in four dimensions, `π²/2`.
pub const UNIT_BALL_VOLUME: f64 = PI * PI / 2.0;

/// Green's function `G(x) = 1 / (2π² ‖x‖²)`.
pub fn green_g(x: Point4) -> Result<f64> {
    let r2 = x.norm_sq();
    if r2 == 0.0 {
        return Err(Error::Domain("green_g is singular at the origin".into()));
    }
    Ok(green_radial(r2.sqrt()))
}

/// `G` as a function of the radius; infinite at zero.
#[inline]
pub fn green_radial(rho: f64) -> f64 {
    1.0 / (TWO_PI_SQ * rho * rho)
}

/// Potential of the unit ball with unit density, `∫_{B(z,1)} G(w) dw` at `‖z‖ = rho`.
///
/// Outside the ball this is `|B(0,1)| G(z) = 1/(4 rho²)`; inside, radial
/// integration of `ΔG = -2δ` gives `1/2 - rho²/4`. Both branches meet at
/// `rho = 1` with value and slope continuous.
#[inline]
pub fn gstar(rho: f64) -> f64 {
    debug_assert!(rho >= 0.0);
    if rho <= 1.0 {
        0.5 - 0.25 * rho * rho
    } else {
        0.25 / (rho * rho)
    }
}

/// Probability that Brownian motion started at `z` ever hits `B(0, r)`.
pub fn ball_hit_prob(z: Point4, r: f64) -> f64 {
    debug_assert!(r > 0.0);
    let n2 = z.norm_sq();
    if n2 <= r * r {
        1.0
    } else {
        r * r / n2
    }
}

/// Upper bound `Cap(A) / (2π² d(x,A)²)` on the probability of ever hitting a
/// set of capacity `cap` from a point at distance `dist`.
pub fn cond_hit_bound(cap: f64, dist: f64) -> Result<f64> {
    if !(dist > 0.0) {
        return Err(Error::Domain(format!(
            "distance to the target must be positive, got {dist}"
        )));
    }
    Ok(cap / (TWO_PI_SQ * dist * dist))
}

/// Volume of a four-dimensional ball of radius `r`.
pub fn ball_volume(r: f64) -> f64 {
    UNIT_BALL_VOLUME * r.powi(4)
}

/// Capacity of a four-dimensional ball of radius `r`.
pub fn ball_capacity(r: f64) -> f64 {
    TWO_PI_SQ * r * r
}

/// Uniform direction on the unit 3-sphere.
#[inline]
pub fn unit_direction(rng: &mut RngStream) -> Point4 {
    loop {
        let g = Point4::new(rng.normal(), rng.normal(), rng.normal(), rng.normal());
        let n2 = g.norm_sq();
        if n2 > 1e-200 {
            return g * (1.0 / n2.sqrt());
        }
    }
}

/// Uniform point on the sphere `∂B(center, rho)`.
#[inline]
pub fn sphere_sample(rng: &mut RngStream, center: Point4, rho: f64) -> Point4 {
    center + unit_direction(rng) * rho
}

/// Uniform point in the ball `B(center, rho)`.
pub fn ball_sample(rng: &mut RngStream, center: Point4, rho: f64) -> Point4 {
    let radial = rho * rng.uniform().powf(0.25);
    center + unit_direction(rng) * radial
}

/// Where Brownian motion started at `x`, with `‖x‖ > rho`, first hits
/// `∂B(0, rho)`, conditioned on hitting it.
///
/// The conditional law has density proportional to `‖x - y‖⁻⁴` with respect
/// to the uniform measure, sampled by rejection from the uniform proposal.
pub fn exterior_harmonic_sample(rng: &mut RngStream, x: Point4, rho: f64) -> Point4 {
    let nx = x.norm();
    debug_assert!(nx > rho);
    let gap = nx - rho;
    loop {
        let y = sphere_sample(rng, Point4::ORIGIN, rho);
        let ratio = gap * gap / x.dist_sq(y);
        if rng.uniform() < ratio * ratio {
            return y;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn green_reference_values() {
        let g1 = green_g(Point4::on_axis(1.0)).unwrap();
        assert!((g1 - 0.050_660_591_821_168_88).abs() < 1e-15);
        let g2 = green_g(Point4::new(0.0, 0.0, 2.0, 0.0)).unwrap();
        assert!((g2 - 1.0 / (8.0 * PI * PI)).abs() < 1e-16);
        assert!(matches!(green_g(Point4::ORIGIN), Err(Error::Domain(_))));
    }

    proptest! {
        #[test]
        fn green_scaling(x in prop::array::uniform4(-10.0..10.0f64), lambda in 0.01..100.0f64) {
            let x = Point4(x);
            prop_assume!(x.norm() > 1e-3);
            let lhs = lambda * lambda * green_g(x * lambda).unwrap();
            let rhs = green_g(x).unwrap();
            prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
        }

        #[test]
        fn gstar_outside_is_scaled_green(rho in 1.000001..1e3f64) {
            let g = green_radial(rho) * UNIT_BALL_VOLUME;
            prop_assert!(((gstar(rho) - g) / g).abs() < 1e-13);
        }

        #[test]
        fn gstar_nonincreasing(a in 0.0..5.0f64, b in 0.0..5.0f64) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(gstar(lo) >= gstar(hi));
        }
    }

    #[test]
    fn green_scaling_lambda_three() {
        let x = Point4::new(0.3, -1.2, 0.7, 2.0);
        let lhs = 9.0 * green_g(x * 3.0).unwrap();
        assert!((lhs - green_g(x).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn gstar_reference_values() {
        assert_eq!(gstar(0.0), 0.5);
        assert_eq!(gstar(1.0), 0.25);
        assert_eq!(gstar(2.0), 0.0625);
        let (below, above) = (gstar(1.0 - 1e-12), gstar(1.0 + 1e-12));
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn ball_hit_probability() {
        assert_eq!(ball_hit_prob(Point4::on_axis(2.0), 1.0), 0.25);
        assert_eq!(ball_hit_prob(Point4::on_axis(1.5), 1.5), 1.0);
        assert_eq!(ball_hit_prob(Point4::on_axis(0.2), 1.0), 1.0);
        for &n in &[10.0, 1e3, 1e6] {
            let z = Point4::new(0.0, n, 0.0, 0.0);
            assert!((ball_hit_prob(z, 0.7) * n * n - 0.49).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_hit_bound() {
        assert!((cond_hit_bound(TWO_PI_SQ, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // unit ball seen from distance 1 (‖z‖ = 2): bound 1, exact 1/4
        let bound = cond_hit_bound(TWO_PI_SQ, 1.0).unwrap();
        assert!(bound >= ball_hit_prob(Point4::on_axis(2.0), 1.0));
        assert_eq!(cond_hit_bound(0.0, 3.0).unwrap(), 0.0);
        assert!(cond_hit_bound(1.0, 0.0).is_err());
        assert!(cond_hit_bound(1.0, -1.0).is_err());
    }

    #[test]
    fn covering_constant() {
        let c1 = ball_capacity(4.0) / ball_volume(4.0 / 3.0);
        assert!((c1 - 20.25).abs() < 1e-12);
    }

    #[test]
    fn sphere_samples_lie_on_sphere() {
        let mut rng = RngStream::new(3, 0);
        let c = Point4::new(1.0, -2.0, 3.0, 0.5);
        for &rho in &[1e-3, 1.0, 250.0] {
            for _ in 0..10_000 {
                let p = sphere_sample(&mut rng, c, rho);
                assert!((p.dist(c) - rho).abs() < 1e-12 * rho);
            }
        }
    }

    #[test]
    fn sphere_samples_are_isotropic() {
        let mut rng = RngStream::new(4, 0);
        let n = 1_000_000;
        let mut sum = [0.0; 4];
        let mut sq0 = 0.0;
        for _ in 0..n {
            let p = sphere_sample(&mut rng, Point4::ORIGIN, 1.0);
            for (acc, x) in sum.iter_mut().zip(p.0) {
                *acc += x;
            }
            sq0 += p.0[0] * p.0[0];
        }
        // each coordinate has variance 1/4 on the unit 3-sphere
        let se = (0.25 / n as f64).sqrt();
        for s in sum {
            assert!((s / n as f64).abs() < 4.0 * se);
        }
        // Var(x0²) = E x0⁴ - 1/16 = 1/8 - 1/16
        let se_sq = (1.0 / 16.0 / n as f64).sqrt();
        assert!((sq0 / n as f64 - 0.25).abs() < 4.0 * se_sq);
    }

    #[test]
    fn ball_samples_fill_ball_uniformly() {
        let mut rng = RngStream::new(5, 0);
        let n = 200_000;
        let mut inner = 0usize;
        for _ in 0..n {
            let p = ball_sample(&mut rng, Point4::ORIGIN, 2.0);
            assert!(p.norm() <= 2.0 + 1e-12);
            if p.norm() <= 1.0 {
                inner += 1;
            }
        }
        // P(‖p‖ ≤ 1) = (1/2)^4
        let frac = inner as f64 / n as f64;
        let se = (0.0625 * 0.9375 / n as f64).sqrt();
        assert!((frac - 0.0625).abs() < 4.0 * se);
    }

    #[test]
    fn exterior_harmonic_sample_matches_poisson_kernel() {
        // Conditional hitting law from x has density ∝ ‖x-y‖⁻⁴; its mean first
        // coordinate is compared with a direct quadrature over the polar angle.
        let mut rng = RngStream::new(6, 0);
        let (rho, d) = (1.0, 3.0);
        let x = Point4::on_axis(d);
        let n = 200_000;
        let mut m = 0.0;
        for _ in 0..n {
            let y = exterior_harmonic_sample(&mut rng, x, rho);
            assert!((y.norm() - rho).abs() < 1e-12);
            m += y.0[0];
        }
        m /= n as f64;
        // polar angle θ has weight sin²θ on the 3-sphere
        let steps = 20_000;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..steps {
            let th = PI * (i as f64 + 0.5) / steps as f64;
            let dist2 = d * d + rho * rho - 2.0 * d * rho * th.cos();
            let w = th.sin().powi(2) / (dist2 * dist2);
            num += w * rho * th.cos();
            den += w;
        }
        let exact = num / den;
        assert!((m - exact).abs() < 4.0 * (1.0 / n as f64).sqrt() * 0.6, "{m} vs {exact}");
    }
}
