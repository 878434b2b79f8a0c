//! First exit time of four-dimensional Brownian motion from the unit ball.
//!
//! Started at the center, the exit time has survival function
//!
//! ```text
//! P(τ > t) = Σ_k exp(-j_k² t / 2) / J₂(j_k)
//! ```
//!
//! where `j_k` are the positive zeros of `J₁`. The production sampler inverts a
//! quantile table built once from this series; the exit position is uniform
//! on the sphere and independent of the time. A fine-step Gaussian sampler is
//! kept as the reference discretization.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::geometry::Point4;
use crate::rng::RngStream;

/// Default step of the fine-step reference sampler.
pub const H_EXIT: f64 = 1e-3;

const SERIES_TERMS: usize = 80;
const TABLE_SIZE: usize = 1 << 16;
/// Above this quantile only the leading eigenmode matters.
const TAIL_QUANTILE: f64 = 1.0 - 1e-4;
/// Below this time the truncated series is not resolved, while the true
/// survival differs from 1 by less than `e^{-90}`.
const T_SERIES: f64 = 0.005;

/// Bessel function of the first kind of integer order.
///
/// Trapezoidal rule on the periodic integral representation
/// `J_n(x) = (1/2π) ∫ cos(nθ - x sin θ) dθ`, which converges geometrically
/// once the node count exceeds `|x| + n`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    let m = ((x.abs() + n as f64) as usize + 64).next_power_of_two();
    let step = 2.0 * PI / m as f64;
    let nf = n as f64;
    let s: f64 = (0..m)
        .map(|k| {
            let th = k as f64 * step;
            (nf * th - x * th.sin()).cos()
        })
        .sum();
    s / m as f64
}

/// First `count` positive zeros of `J₁`.
pub fn bessel_j1_zeros(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|k| {
            let beta = (k as f64 + 0.25) * PI;
            let mut x = beta - 3.0 / (8.0 * beta);
            for _ in 0..50 {
                let j1 = bessel_j(1, x);
                let dj1 = bessel_j(0, x) - j1 / x;
                let dx = j1 / dj1;
                x -= dx;
                if dx.abs() < 1e-14 * x {
                    break;
                }
            }
            x
        })
        .collect()
}

/// Eigen-expansion of the exit-time law from the unit ball.
#[derive(Debug)]
pub struct ExitTimeLaw {
    rates: Vec<f64>,
    weights: Vec<f64>,
    quantiles: Vec<f64>,
}

impl ExitTimeLaw {
    fn build() -> Self {
        let zeros = bessel_j1_zeros(SERIES_TERMS);
        let rates: Vec<f64> = zeros.iter().map(|j| 0.5 * j * j).collect();
        let weights: Vec<f64> = zeros.iter().map(|&j| 1.0 / bessel_j(2, j)).collect();
        let mut law = ExitTimeLaw {
            rates,
            weights,
            quantiles: Vec::new(),
        };
        law.quantiles = law.tabulate();
        law
    }

    /// Shared instance, built on first use.
    pub fn get() -> &'static ExitTimeLaw {
        static LAW: OnceLock<ExitTimeLaw> = OnceLock::new();
        LAW.get_or_init(ExitTimeLaw::build)
    }

    /// `P(τ > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= T_SERIES {
            return 1.0;
        }
        self.rates
            .iter()
            .zip(&self.weights)
            .map(|(r, w)| w * (-r * t).exp())
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// `E[τ] = ∫ P(τ > t) dt`, which equals 1/4.
    pub fn mean(&self) -> f64 {
        T_SERIES
            + self
                .rates
                .iter()
                .zip(&self.weights)
                .map(|(r, w)| w / r * (-r * T_SERIES).exp())
                .sum::<f64>()
    }

    fn tail_time(&self, survival: f64) -> f64 {
        (self.weights[0] / survival).ln() / self.rates[0]
    }

    fn tabulate(&self) -> Vec<f64> {
        // CDF on a fine grid, then inverted by a monotone walk.
        let t_max = self.tail_time(1.0 - TAIL_QUANTILE) * 1.05;
        let grid = 400_000;
        let dt = t_max / grid as f64;
        let cdf: Vec<f64> = (0..=grid)
            .map(|i| 1.0 - self.survival(i as f64 * dt))
            .collect();
        // enforce monotonicity against round-off in the series
        let mut cdf = cdf;
        for i in 1..cdf.len() {
            if cdf[i] < cdf[i - 1] {
                cdf[i] = cdf[i - 1];
            }
        }
        let mut out = Vec::with_capacity(TABLE_SIZE + 1);
        let mut j = 0usize;
        for i in 0..=TABLE_SIZE {
            let u = TAIL_QUANTILE * i as f64 / TABLE_SIZE as f64;
            while j + 1 < cdf.len() && cdf[j + 1] < u {
                j += 1;
            }
            let (f0, f1) = (cdf[j], cdf[(j + 1).min(grid)]);
            let frac = if f1 > f0 { ((u - f0) / (f1 - f0)).clamp(0.0, 1.0) } else { 0.0 };
            out.push((j as f64 + frac) * dt);
        }
        out
    }

    /// Inverse CDF.
    pub fn quantile(&self, u: f64) -> f64 {
        if u >= TAIL_QUANTILE {
            return self.tail_time((1.0 - u).max(f64::MIN_POSITIVE));
        }
        let pos = u / TAIL_QUANTILE * TABLE_SIZE as f64;
        let i = (pos as usize).min(TABLE_SIZE - 1);
        let frac = pos - i as f64;
        self.quantiles[i] + frac * (self.quantiles[i + 1] - self.quantiles[i])
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.quantile(rng.uniform())
    }
}

/// A sample of the exit time of standard Brownian motion from the unit ball.
#[inline]
pub fn sample_exit_time_unit_ball(rng: &mut RngStream) -> f64 {
    ExitTimeLaw::get().sample(rng)
}

/// Exit time from the unit ball by Gaussian stepping with step `h_exit`,
/// the crossing instant interpolated linearly in the radius between the last
/// interior and the first exterior step.
pub fn sample_exit_time_fine_step(rng: &mut RngStream, h_exit: f64) -> f64 {
    let sd = h_exit.sqrt();
    let mut x = Point4::ORIGIN;
    let mut r = 0.0;
    let mut t = 0.0;
    loop {
        let next = x + Point4::new(rng.normal(), rng.normal(), rng.normal(), rng.normal()) * sd;
        let rn = next.norm();
        if rn >= 1.0 {
            let theta = (1.0 - r) / (rn - r);
            return t + theta * h_exit;
        }
        x = next;
        r = rn;
        t += h_exit;
    }
}
