//! Quadrature oracles shared by the test targets.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Closed form of the unit-ball potential `∫_{B(z,1)} G`.
pub fn potential_closed(rho: f64) -> f64 {
    if rho <= 1.0 {
        0.5 - rho * rho / 4.0
    } else {
        1.0 / (4.0 * rho * rho)
    }
}

/// `E R[0,t]/G(z)` with the second path run forever, by two-dimensional
/// quadrature over the position of the first path at time `u`.
pub fn pair_ratio(z_norm: f64, t: f64) -> f64 {
    let hi = (60.0 * t).sqrt();
    let inner = |rho: f64| {
        simpson(
            |th: f64| {
                let d2 = rho * rho + z_norm * z_norm - 2.0 * rho * z_norm * th.cos();
                (2.0 / PI) * th.sin().powi(2) * potential_closed(d2.max(0.0).sqrt())
            },
            0.0,
            PI,
            400,
        )
    };
    let er = simpson(|rho| rho * inner(rho) * (-rho * rho / (2.0 * t)).exp(), 0.0, hi, 4000);
    er * 2.0 * PI * PI * z_norm * z_norm
}
