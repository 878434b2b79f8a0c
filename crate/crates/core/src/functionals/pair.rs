use super::occupation::FunctionalSample;
use crate::capacity::{Diagnostics, Measured};
use crate::estimate::Tally;
use crate::geometry::{exterior_harmonic_sample, sphere_sample, BallUnion, Point4};
use crate::par::map_units;
use crate::paths::{gauss_increment, sample_exit_time_unit_ball};
use crate::rng::RngStream;
use crate::{Error, Result};

/// Steps allowed to one second-path walker.
const MAX_STEPS: u64 = 10_000_000;
/// Far-field jumps are used once the walker is this many step lengths from
/// the sausage.
const JUMP_STEPS: f64 = 3.0;

/// Radius-1 sausage of a fixed-step path from the origin, each center
/// standing for `h` units of time.
struct FirstPath {
    union: BallUnion,
    h: f64,
    /// Radius of an origin-centred ball containing the sausage.
    outer: f64,
}

impl FirstPath {
    fn sample(rng: &mut RngStream, start: Point4, t: f64, h: f64) -> Result<Self> {
        let n = (t / h).round().max(1.0) as usize;
        let sd = h.sqrt();
        let mut pts = Vec::with_capacity(n);
        let mut b = start;
        for _ in 0..n {
            pts.push(b);
            b += gauss_increment(rng, sd);
        }
        let union = BallUnion::new(pts, 1.0)?;
        let outer = union.bounding_radius();
        Ok(FirstPath { union, h: t / n as f64, outer })
    }

    /// Time the first path spends within distance 1 of `y`.
    fn density(&self, y: Point4) -> f64 {
        self.h * self.union.count_within(y, 1.0) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairOutcome {
    pub value: f64,
    pub exhausted: bool,
}

/// Integrates the occupation density of `first` along a Brownian path from
/// `start`, up to `horizon` or forever.
///
/// Far from the sausage the walker jumps to the boundary of the largest ball
/// that avoids it, contributing nothing; near it the walker takes Gaussian
/// steps of length `h` and scores a left Riemann sum. With an infinite
/// horizon a walker farther than twice `first.outer` survives with the exact
/// return probability and re-enters from the exact conditional hitting law.
fn second_path(rng: &mut RngStream, first: &FirstPath, start: Point4, h: f64, horizon: Option<f64>) -> PairOutcome {
    let jump_min = JUMP_STEPS * (4.0 * h).sqrt();
    let sd = h.sqrt();
    let restart = 2.0 * first.outer;
    let mut y = start;
    let mut time = 0.0;
    let mut acc = 0.0;
    for _ in 0..MAX_STEPS {
        // distance to the radius-1 sausage
        let d = first.union.distance_bound(y, jump_min).lower;
        if d > jump_min {
            match horizon {
                None => {
                    let n2 = y.norm_sq();
                    if n2 > restart * restart {
                        if rng.uniform() >= first.outer * first.outer / n2 {
                            return PairOutcome { value: acc, exhausted: false };
                        }
                        y = exterior_harmonic_sample(rng, y, first.outer);
                        continue;
                    }
                }
                Some(end) => {
                    time += d * d * sample_exit_time_unit_ball(rng);
                    if time >= end {
                        return PairOutcome { value: acc, exhausted: false };
                    }
                }
            }
            y = sphere_sample(rng, y, d);
        } else {
            let mut dt = h;
            if let Some(end) = horizon {
                dt = dt.min(end - time);
            }
            acc += dt * first.density(y);
            time += h;
            if horizon.is_some_and(|end| time >= end) {
                return PairOutcome { value: acc, exhausted: false };
            }
            y += gauss_increment(rng, sd);
        }
    }
    PairOutcome { value: acc, exhausted: true }
}

/// `R[0,t] = ∫_0^{t̃} ds ∫_0^t 1(‖β̃_s − β_u‖ ≤ 1) du` for a path `β` from
/// the origin and an independent path `β̃` from `z`, both discretized with
/// step `h` where they are close.
pub fn r_pair_functional(rng: &mut RngStream, z: Point4, t: f64, t_tilde: f64, h: f64) -> Result<FunctionalSample> {
    check(t, h)?;
    if !(t_tilde >= 0.0) {
        return Err(Error::Domain(format!("second horizon must be nonnegative, got {t_tilde}")));
    }
    let seed = rng.seed();
    if t == 0.0 || t_tilde == 0.0 {
        return Ok(FunctionalSample { value: 0.0, t, step: h, seed });
    }
    let first = FirstPath::sample(rng, Point4::ORIGIN, t, h)?;
    let out = second_path(rng, &first, z, h, Some(t_tilde));
    Ok(FunctionalSample { value: out.value, t, step: h, seed })
}

fn check(t: f64, h: f64) -> Result<()> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::Config(vec![format!("pair step must lie in (0, 1], got {h}")]));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("horizon must be nonnegative, got {t}")));
    }
    Ok(())
}

/// `E[R[0,t]]` with the second path run forever.
///
/// Each of `n_outer` first paths is paired with `n_inner` second paths. A
/// second path from `z` outside the sausage's bounding ball `B(0, ρ)` is
/// replaced by one started from the exact conditional hitting law on
/// `∂B(0, ρ)`, weighted by the hitting probability `ρ²/‖z‖²`. The sample is
/// the inner average, so the estimate's error reflects both paths.
pub fn r_pair_mean(rng: &RngStream, z: Point4, t: f64, h: f64, n_outer: u64, n_inner: u64) -> Result<Measured> {
    check(t, h)?;
    if n_outer == 0 || n_inner == 0 {
        return Err(Error::Precondition("pair sample counts must be positive".into()));
    }
    let seed = rng.seed();
    if t == 0.0 {
        return Ok(Measured::exact(0.0, n_outer, seed));
    }
    let parts = map_units(n_outer as usize, |i| -> Result<(f64, u64)> {
        let mut g = rng.child(i as u64);
        let first = FirstPath::sample(&mut g, Point4::ORIGIN, t, h)?;
        let rho = first.outer;
        let (weight, outside) = if z.norm() > rho {
            ((rho / z.norm()).powi(2), true)
        } else {
            (1.0, false)
        };
        let mut sum = 0.0;
        let mut exhausted = 0;
        for _ in 0..n_inner {
            let start = if outside { exterior_harmonic_sample(&mut g, z, rho) } else { z };
            let out = second_path(&mut g, &first, start, h, None);
            sum += out.value;
            exhausted += out.exhausted as u64;
        }
        Ok((weight * sum / n_inner as f64, exhausted))
    });
    let mut tally = Tally::new();
    let mut diag = Diagnostics::default();
    for p in parts {
        let (v, e) = p?;
        tally.push(v);
        diag.walkers += n_inner;
        diag.exhausted += e;
    }
    Ok(Measured { estimate: tally.estimate(seed), diag })
}
