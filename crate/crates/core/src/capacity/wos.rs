//! Walk-on-spheres simulation of Brownian hitting of ball unions.

use serde::{Deserialize, Serialize};

use crate::geometry::{exterior_harmonic_sample, sphere_sample, Ball, BallUnion, Point4};
use crate::paths::sample_exit_time_unit_ball;
use crate::rng::RngStream;
use crate::{Error, Result};

/// What a walker does once it is farther than `r_escape` from the origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartMode {
    /// Survive with the exact return probability, restart with weight 1.
    #[default]
    RussianRoulette,
    /// Always restart, multiplying the weight by the return probability.
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WosParams {
    /// Absorption tolerance.
    pub eps_hit: f64,
    /// Escape radius, measured from the origin.
    pub r_escape: f64,
    pub max_steps: u64,
    pub restart_mode: RestartMode,
}

/// Default absorption tolerance.
pub const EPS_HIT: f64 = 1e-3;
/// Default escape radius in units of the target's bounding radius.
pub const ESCAPE_FACTOR: f64 = 64.0;
pub const MAX_STEPS: u64 = 100_000;
/// Weighted walkers below this weight play roulette.
const WEIGHT_FLOOR: f64 = 1e-3;

impl WosParams {
    /// Defaults for a target of the given bounding radius.
    pub fn for_bounding_radius(bounding: f64) -> Self {
        WosParams {
            eps_hit: EPS_HIT,
            r_escape: ESCAPE_FACTOR * bounding.max(f64::MIN_POSITIVE),
            max_steps: MAX_STEPS,
            restart_mode: RestartMode::RussianRoulette,
        }
    }

    /// Checks the parameters against a target and its launch sphere.
    pub fn validate(&self, ball_radius: f64, launch_radius: f64) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.eps_hit > 0.0) {
            errs.push(format!("eps_hit must be positive, got {}", self.eps_hit));
        } else if self.eps_hit >= ball_radius {
            errs.push(format!(
                "eps_hit = {} must be smaller than the ball radius {ball_radius}",
                self.eps_hit
            ));
        }
        if !(self.r_escape > launch_radius) {
            errs.push(format!(
                "r_escape = {} must exceed the launch radius {launch_radius}",
                self.r_escape
            ));
        }
        if self.max_steps == 0 {
            errs.push("max_steps must be at least 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HitKind {
    HitA,
    HitB,
    HitTie,
    Escaped,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HitOutcome {
    pub kind: HitKind,
    pub position: Point4,
    pub steps: u64,
    /// Statistical weight; below 1 only in weighted restart mode.
    pub weight: f64,
    /// Whether the walker was stopped by `max_steps`.
    pub exhausted: bool,
}

impl HitOutcome {
    pub fn is_hit(&self) -> bool {
        self.kind != HitKind::Escaped
    }
}

/// A target made of several ball unions, treated as their union.
#[derive(Clone, Copy, Debug)]
pub struct Target<'a> {
    parts: &'a [&'a BallUnion],
}

impl<'a> Target<'a> {
    pub fn new(parts: &'a [&'a BallUnion]) -> Self {
        Target { parts }
    }

    pub fn parts(&self) -> &'a [&'a BallUnion] {
        self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.iter().all(|p| p.is_empty())
    }

    pub fn bounding_radius(&self) -> f64 {
        self.parts.iter().map(|p| p.bounding_radius()).fold(0.0, f64::max)
    }

    /// Smallest ball radius among the parts.
    pub fn ball_radius(&self) -> f64 {
        self.parts
            .iter()
            .filter(|p| !p.is_empty())
            .map(|p| p.radius())
            .fold(f64::INFINITY, f64::min)
    }

    /// Lower bound on the distance, exact when at most `exact_below`.
    #[inline]
    pub fn distance_bound(&self, p: Point4, exact_below: f64) -> f64 {
        self.parts
            .iter()
            .map(|u| u.distance_bound(p, exact_below).lower)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, p: Point4) -> bool {
        self.parts.iter().any(|u| u.contains(p))
    }
}

/// Walker state shared by the untimed and timed walks.
struct Walker<'r> {
    rng: &'r mut RngStream,
    x: Point4,
    steps: u64,
    weight: f64,
}

impl Walker<'_> {
    /// Handles a walker beyond the escape radius; `false` if it is lost.
    fn restart(&mut self, sphere: &Ball, mode: RestartMode) -> bool {
        let n2 = self.x.norm_sq();
        let p = sphere.radius * sphere.radius / n2;
        match mode {
            RestartMode::RussianRoulette => {
                if self.rng.uniform() >= p {
                    return false;
                }
            }
            RestartMode::Weighted => {
                self.weight *= p;
                if self.weight < WEIGHT_FLOOR {
                    if self.rng.uniform() * WEIGHT_FLOOR >= self.weight {
                        return false;
                    }
                    self.weight = WEIGHT_FLOOR;
                }
            }
        }
        self.x = sphere.center + exterior_harmonic_sample(self.rng, self.x - sphere.center, sphere.radius);
        true
    }
}

fn check_outside(z: Point4, a: &Target, b: &Target) -> Result<()> {
    if a.contains(z) || b.contains(z) {
        return Err(Error::Precondition(format!(
            "walker start {:?} lies inside a target",
            z.0
        )));
    }
    Ok(())
}

/// Walk from `z` until the first hit of `a` or `b` (within `eps_hit`), or escape.
///
/// Jumps go to a uniform point on the largest sphere around the walker that
/// avoids both targets. Beyond `r_escape` the walker returns to `sphere` with
/// the exact probability `ρ²/‖x‖²` and re-enters at a point drawn from the
/// exact conditional hitting law, so the only approximation is the
/// absorption layer.
pub fn wos_hit_parts(
    rng: &mut RngStream,
    z: Point4,
    a: Target,
    b: Target,
    sphere: &Ball,
    params: &WosParams,
) -> Result<HitOutcome> {
    check_outside(z, &a, &b)?;
    Ok(walk(rng, z, a, b, sphere, params))
}

pub(crate) fn walk(
    rng: &mut RngStream,
    z: Point4,
    a: Target,
    b: Target,
    sphere: &Ball,
    params: &WosParams,
) -> HitOutcome {
    let eps = params.eps_hit;
    let r_esc_sq = params.r_escape * params.r_escape;
    let mut w = Walker {
        rng,
        x: z,
        steps: 0,
        weight: 1.0,
    };
    let outcome = |w: &Walker, kind, exhausted| HitOutcome {
        kind,
        position: w.x,
        steps: w.steps,
        weight: w.weight,
        exhausted,
    };
    if a.is_empty() && b.is_empty() {
        return outcome(&w, HitKind::Escaped, false);
    }
    loop {
        let da = a.distance_bound(w.x, eps);
        let db = b.distance_bound(w.x, eps);
        let (ha, hb) = (da <= eps, db <= eps);
        if ha || hb {
            let kind = match (ha, hb) {
                (true, true) => HitKind::HitTie,
                (true, false) => HitKind::HitA,
                _ => HitKind::HitB,
            };
            return outcome(&w, kind, false);
        }
        if w.steps >= params.max_steps {
            return outcome(&w, HitKind::Escaped, true);
        }
        w.steps += 1;
        if w.x.norm_sq() > r_esc_sq {
            if !w.restart(sphere, params.restart_mode) {
                return outcome(&w, HitKind::Escaped, false);
            }
            continue;
        }
        let d = da.min(db);
        w.x = sphere_sample(w.rng, w.x, d);
    }
}

/// Walk from `z` until it is within `eps_hit` of both `a` and `b`, or escapes.
///
/// `max(d_A, d_B)` never exceeds the distance to `A ∩ B`, so this is
/// walk-on-spheres for the intersection, with the same absorption layer as the
/// tie test of [`walk`].
pub(crate) fn walk_both(
    rng: &mut RngStream,
    z: Point4,
    a: Target,
    b: Target,
    sphere: &Ball,
    params: &WosParams,
) -> HitOutcome {
    let eps = params.eps_hit;
    let r_esc_sq = params.r_escape * params.r_escape;
    let mut w = Walker {
        rng,
        x: z,
        steps: 0,
        weight: 1.0,
    };
    let outcome = |w: &Walker, kind, exhausted| HitOutcome {
        kind,
        position: w.x,
        steps: w.steps,
        weight: w.weight,
        exhausted,
    };
    if a.is_empty() || b.is_empty() {
        return outcome(&w, HitKind::Escaped, false);
    }
    loop {
        let d = a.distance_bound(w.x, eps).max(b.distance_bound(w.x, eps));
        if d <= eps {
            return outcome(&w, HitKind::HitTie, false);
        }
        if w.steps >= params.max_steps {
            return outcome(&w, HitKind::Escaped, true);
        }
        w.steps += 1;
        if w.x.norm_sq() > r_esc_sq {
            if !w.restart(sphere, params.restart_mode) {
                return outcome(&w, HitKind::Escaped, false);
            }
            continue;
        }
        w.x = sphere_sample(w.rng, w.x, d);
    }
}

/// Single-union walk-on-spheres, see [`wos_hit_parts`]. `b` may be empty.
pub fn wos_hit(
    rng: &mut RngStream,
    z: Point4,
    a: &BallUnion,
    b: Option<&BallUnion>,
    sphere: &Ball,
    params: &WosParams,
) -> Result<HitOutcome> {
    let pa = [a];
    let pb: Vec<&BallUnion> = b.into_iter().collect();
    wos_hit_parts(rng, z, Target::new(&pa), Target::new(&pb), sphere, params)
}

/// Whether Brownian motion from `z` hits `a` before time `t_max`, and when.
///
/// Each jump to the sphere of radius `d` takes `d²` times a unit-ball exit
/// time, and no hit can occur inside a jump ball, so the horizon cut is exact
/// up to the absorption layer. There is no escape radius: a walker lives
/// until it hits, runs out of time or out of steps.
pub fn wos_hit_timed(
    rng: &mut RngStream,
    z: Point4,
    a: Target,
    t_max: f64,
    params: &WosParams,
) -> Result<TimedHit> {
    check_outside(z, &a, &Target::new(&[]))?;
    Ok(walk_timed(rng, z, a, t_max, params))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimedHit {
    Hit { time: f64, position: Point4 },
    Timeout,
    Exhausted,
}

pub(crate) fn walk_timed(
    rng: &mut RngStream,
    z: Point4,
    a: Target,
    t_max: f64,
    params: &WosParams,
) -> TimedHit {
    if a.is_empty() {
        return TimedHit::Timeout;
    }
    let eps = params.eps_hit;
    let mut x = z;
    let mut time = 0.0;
    for _ in 0..params.max_steps {
        let d = a.distance_bound(x, eps);
        if d <= eps {
            return TimedHit::Hit { time, position: x };
        }
        time += d * d * sample_exit_time_unit_ball(rng);
        if time > t_max {
            return TimedHit::Timeout;
        }
        x = sphere_sample(rng, x, d);
    }
    TimedHit::Exhausted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ball_hit_prob;

    #[test]
    fn empty_targets_escape_immediately() {
        let mut rng = RngStream::new(1, 0);
        let e = BallUnion::empty(1.0).unwrap();
        let sphere = Ball::centered(2.0).unwrap();
        let p = WosParams::for_bounding_radius(1.0);
        let out = wos_hit(&mut rng, Point4::on_axis(2.0), &e, Some(&e), &sphere, &p).unwrap();
        assert_eq!(out.kind, HitKind::Escaped);
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn start_inside_is_rejected() {
        let mut rng = RngStream::new(1, 0);
        let a = BallUnion::single(Point4::ORIGIN, 1.0).unwrap();
        let sphere = Ball::centered(2.0).unwrap();
        let p = WosParams::for_bounding_radius(1.0);
        assert!(matches!(
            wos_hit(&mut rng, Point4::on_axis(0.5), &a, None, &sphere, &p),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn hit_probability_of_unit_ball() {
        let mut rng = RngStream::new(2, 0);
        let a = BallUnion::single(Point4::ORIGIN, 1.0).unwrap();
        let sphere = Ball::centered(2.0).unwrap();
        let p = WosParams::for_bounding_radius(1.0);
        let n = 40_000;
        let z = Point4::new(0.0, 0.0, 3.0, 0.0);
        let hits = (0..n)
            .filter(|_| wos_hit(&mut rng, z, &a, None, &sphere, &p).unwrap().is_hit())
            .count();
        let f = hits as f64 / n as f64;
        let exact = ball_hit_prob(z, 1.0);
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        assert!((f - exact).abs() < 4.0 * se + 2.0 * p.eps_hit * exact, "{f} vs {exact}");
    }

    #[test]
    fn weighted_mode_matches_roulette() {
        let a = BallUnion::single(Point4::ORIGIN, 1.0).unwrap();
        let sphere = Ball::centered(2.0).unwrap();
        let mut p = WosParams::for_bounding_radius(1.0);
        p.r_escape = 4.0;
        p.restart_mode = RestartMode::Weighted;
        let mut rng = RngStream::new(3, 0);
        let n = 40_000;
        let z = Point4::on_axis(2.0);
        let mean: f64 = (0..n)
            .map(|_| {
                let o = wos_hit(&mut rng, z, &a, None, &sphere, &p).unwrap();
                if o.is_hit() { o.weight } else { 0.0 }
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.25).abs() < 0.01, "{mean}");
    }

    #[test]
    fn hits_are_within_eps() {
        let mut rng = RngStream::new(4, 0);
        let a = BallUnion::new(vec![Point4::ORIGIN, Point4::on_axis(1.5)], 1.0).unwrap();
        let b = BallUnion::single(Point4::on_axis(-3.0), 0.5).unwrap();
        let sphere = Ball::centered(8.0).unwrap();
        let p = WosParams::for_bounding_radius(4.0);
        for _ in 0..2000 {
            let z = sphere_sample(&mut rng, Point4::ORIGIN, 8.0);
            let o = wos_hit(&mut rng, z, &a, Some(&b), &sphere, &p).unwrap();
            match o.kind {
                HitKind::HitA => assert!(dist(&a, o.position) <= p.eps_hit),
                HitKind::HitB => assert!(dist(&b, o.position) <= p.eps_hit),
                HitKind::HitTie => panic!("disjoint targets tied"),
                HitKind::Escaped => {}
            }
        }
    }

    fn dist(u: &BallUnion, x: Point4) -> f64 {
        u.signed_distance(x).unwrap()
    }

    #[test]
    fn timed_walk_respects_horizon() {
        // P(hit B(0,1) from ‖z‖ = 2 before t) increases to 1/4
        let a = BallUnion::single(Point4::ORIGIN, 1.0).unwrap();
        let parts = [&a];
        let p = WosParams::for_bounding_radius(1.0);
        let mut rng = RngStream::new(5, 0);
        let z = Point4::on_axis(2.0);
        let frac = |t: f64, rng: &mut RngStream| {
            (0..20_000)
                .filter(|_| matches!(wos_hit_timed(rng, z, Target::new(&parts), t, &p).unwrap(), TimedHit::Hit { .. }))
                .count() as f64
                / 20_000.0
        };
        let f1 = frac(1.0, &mut rng);
        let f100 = frac(100.0, &mut rng);
        assert!(f1 < f100);
        assert!(f100 < 0.25 + 0.015 && f100 > 0.25 - 0.03, "{f100}");
    }
}
