use serde::{Deserialize, Serialize};

use crate::estimate::Tally;
use crate::geometry::{gstar, Point4};
use crate::par::map_units;
use crate::paths::{gauss_increment, PathSkeleton};
use crate::rng::RngStream;
use crate::{Error, Result};

/// One realisation of a path functional.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSample {
    pub value: f64,
    pub t: f64,
    pub step: f64,
    pub seed: u64,
}

/// Base step of [`d0_adaptive`].
pub const ADAPTIVE_H0: f64 = 0.01;

fn check_horizon(t: f64, h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Config(vec![format!("step must be positive, got {h}")]));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("horizon must be nonnegative, got {t}")));
    }
    Ok(())
}

/// `D_x[0,t] = ∫_0^t G*(x, β_s) ds` by a left Riemann sum with fixed step `h`
/// along a fresh path from the origin. The last step is shortened to end at `t`.
pub fn d0_functional(rng: &mut RngStream, x: Point4, t: f64, h: f64) -> Result<FunctionalSample> {
    check_horizon(t, h)?;
    let mut b = Point4::ORIGIN;
    let mut s = 0.0;
    let mut v = 0.0;
    let sd = h.sqrt();
    while s < t {
        let dt = h.min(t - s);
        v += dt * gstar(b.dist(x));
        b += gauss_increment(rng, sd);
        s += h;
    }
    Ok(FunctionalSample {
        value: v,
        t,
        step: h,
        seed: rng.seed(),
    })
}

/// `D_x[0,t]` with the step `h0·max(‖β − x‖, 1)²` adapted to the distance.
///
/// Outside the unit ball `G*` is a multiple of the harmonic function `G`, so a
/// left Riemann sum over a step of length `h` is unbiased unless the step
/// reaches the unit ball around `x`; with the step proportional to the squared
/// distance that has probability of order `exp(-1/(2h0))`. The number of steps
/// then grows like `log t / h0` instead of `t / h0`.
pub fn d0_adaptive(rng: &mut RngStream, x: Point4, t: f64, h0: f64) -> Result<FunctionalSample> {
    check_horizon(t, h0)?;
    let mut b = Point4::ORIGIN;
    let mut s = 0.0;
    let mut v = 0.0;
    while s < t {
        let rho = b.dist(x);
        let h = h0 * rho.max(1.0).powi(2);
        let dt = h.min(t - s);
        v += dt * gstar(rho);
        b += gauss_increment(rng, h.sqrt());
        s += h;
    }
    Ok(FunctionalSample {
        value: v,
        t,
        step: h0,
        seed: rng.seed(),
    })
}

/// `D_x^δ[0,t] = Σ_i (τ_{i+1}∧t − τ_i∧t) G*(x, Z_i)`, exact on the skeleton.
pub fn dx_delta_functional(skeleton: &PathSkeleton, x: Point4) -> Result<FunctionalSample> {
    if skeleton.is_empty() {
        return Err(Error::Precondition("skeleton is empty".into()));
    }
    let value = skeleton
        .points
        .iter()
        .enumerate()
        .map(|(i, z)| skeleton.dwell(i) * gstar(z.dist(x)))
        .sum();
    Ok(FunctionalSample {
        value,
        t: skeleton.horizon,
        step: skeleton.delta,
        seed: 0,
    })
}

/// `D_x[0,t]` for several `x` and the functional
/// `ζ = ∫ 1/(‖β_s‖³ ∨ 1) ds`, all along one fixed-step path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaSample {
    pub d: Vec<f64>,
    pub zeta: f64,
}

pub fn dx_zeta_functional(rng: &mut RngStream, xs: &[Point4], t: f64, h: f64) -> Result<ZetaSample> {
    check_horizon(t, h)?;
    let mut b = Point4::ORIGIN;
    let mut s = 0.0;
    let mut d = vec![0.0; xs.len()];
    let mut zeta = 0.0;
    let sd = h.sqrt();
    while s < t {
        let dt = h.min(t - s);
        for (acc, &x) in d.iter_mut().zip(xs) {
            *acc += dt * gstar(b.dist(x));
        }
        zeta += dt / b.norm().powi(3).max(1.0);
        b += gauss_increment(rng, sd);
        s += h;
    }
    Ok(ZetaSample { d, zeta })
}

/// Distribution summary of `D_0[0,t]` normalised by its sample mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Concentration {
    pub t: f64,
    pub n: u64,
    pub mean: f64,
    pub std_error: f64,
    /// Fraction of samples within ±25% of the mean.
    pub within_25: f64,
    /// Quantiles of `D/mean` at 5, 25, 50, 75 and 95 percent.
    pub quantiles: [f64; 5],
    /// Sample skewness.
    pub skewness: f64,
}

/// Samples `n` values of `D_0[0,t]` (adaptive steps) and summarises them.
pub fn d0_concentration(rng: &RngStream, t: f64, n: u64) -> Result<Concentration> {
    if n < 1000 {
        return Err(Error::Precondition(format!("at least 1000 samples are required, got {n}")));
    }
    let values = d0_samples(rng, t, n)?;
    Ok(Concentration::from_samples(t, &values, rng.seed()))
}

/// `n` adaptive samples of `D_0[0,t]`, sample `i` on child stream `i`.
pub(crate) fn d0_samples(rng: &RngStream, t: f64, n: u64) -> Result<Vec<f64>> {
    map_units(n as usize, |i| {
        d0_adaptive(&mut rng.child(i as u64), Point4::ORIGIN, t, ADAPTIVE_H0).map(|s| s.value)
    })
    .into_iter()
    .collect()
}

impl Concentration {
    /// Summary of samples of `D_0[0,t]`; `values` must be nonempty.
    pub fn from_samples(t: f64, values: &[f64], seed: u64) -> Concentration {
        let tally: Tally = values.iter().copied().collect();
        let mean = tally.mean();
        let sd = tally.std_dev();
        let mut norm: Vec<f64> = values.iter().map(|v| v / mean).collect();
        norm.sort_by(f64::total_cmp);
        let q = |p: f64| norm[((p * (norm.len() - 1) as f64).round() as usize).min(norm.len() - 1)];
        let within = norm.iter().filter(|&&v| (v - 1.0).abs() <= 0.25).count() as f64 / norm.len() as f64;
        let skewness = if sd > 0.0 {
            values.iter().map(|v| ((v - mean) / sd).powi(3)).sum::<f64>() / values.len() as f64
        } else {
            0.0
        };
        Concentration {
            t,
            n: values.len() as u64,
            mean,
            std_error: tally.estimate(seed).std_error,
            within_25: within,
            quantiles: [q(0.05), q(0.25), q(0.5), q(0.75), q(0.95)],
            skewness,
        }
    }
}
