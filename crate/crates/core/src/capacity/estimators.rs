use serde::{Deserialize, Serialize};

use super::wos::{walk, walk_both, HitKind, Target, WosParams};
use crate::estimate::{Estimate, Tally};
use crate::geometry::{sphere_sample, Ball, BallUnion, TWO_PI_SQ};
use crate::par::{chunks, map_units};
use crate::rng::RngStream;
use crate::{Error, Result};

/// Walkers per deterministic work unit.
pub const CHUNK: u64 = 4096;
/// Smallest walker count accepted by the estimators.
pub const MIN_WALKERS: u64 = 1000;
/// Largest tolerated fraction of walkers stopped by `max_steps`.
pub const MAX_EXHAUSTED_RATE: f64 = 1e-3;

/// Run diagnostics carried next to every estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub walkers: u64,
    /// Walkers stopped by `max_steps`.
    pub exhausted: u64,
    /// Integrand evaluations clipped by path functionals.
    pub clip_count: u64,
    /// Samples discarded by a conditioning event.
    pub discarded: u64,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.walkers += other.walkers;
        self.exhausted += other.exhausted;
        self.clip_count += other.clip_count;
        self.discarded += other.discarded;
    }

    pub fn escape_rate(&self) -> f64 {
        if self.walkers == 0 {
            0.0
        } else {
            self.exhausted as f64 / self.walkers as f64
        }
    }

    pub fn is_valid(&self) -> bool {
        self.escape_rate() <= MAX_EXHAUSTED_RATE
    }
}

/// An estimate with its run diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub estimate: Estimate,
    pub diag: Diagnostics,
}

impl Measured {
    pub fn exact(value: f64, n: u64, seed: u64) -> Self {
        Measured {
            estimate: Estimate::exact(value, n, seed),
            diag: Diagnostics::default(),
        }
    }
}

/// Runs `n` walkers in fixed chunks with per-chunk child streams of `rng`
/// and folds the `K` scores of each walker into tallies in chunk order.
pub fn sample_walkers<const K: usize>(
    rng: &RngStream,
    n: u64,
    f: impl Fn(&mut RngStream) -> ([f64; K], bool) + Sync + Send,
) -> ([Tally; K], Diagnostics) {
    let units = chunks(n, CHUNK);
    let parts = map_units(units.len(), |u| {
        let (idx, len) = units[u];
        let mut r = rng.child(idx);
        let mut tallies = [Tally::new(); K];
        let mut diag = Diagnostics::default();
        for _ in 0..len {
            let (scores, exhausted) = f(&mut r);
            for (t, s) in tallies.iter_mut().zip(scores) {
                t.push(s);
            }
            diag.walkers += 1;
            diag.exhausted += exhausted as u64;
        }
        (tallies, diag)
    });
    let mut tallies = [Tally::new(); K];
    let mut diag = Diagnostics::default();
    for (t, d) in &parts {
        for (acc, x) in tallies.iter_mut().zip(t) {
            acc.merge(x);
        }
        diag.merge(d);
    }
    (tallies, diag)
}

fn check_walkers(n: u64) -> Result<()> {
    if n < MIN_WALKERS {
        return Err(Error::Precondition(format!(
            "at least {MIN_WALKERS} walkers are required, got {n}"
        )));
    }
    Ok(())
}

/// Launch radius used for a standalone capacity estimate.
pub fn launch_radius(bounding: f64) -> f64 {
    2.0 * bounding
}

/// `Cap(A) = 2π²ρ² · P(hit A)` for walkers started uniformly on `∂B(0, ρ)`
/// with `ρ` twice the bounding radius.
pub fn cap_estimate_parts(rng: &RngStream, a: Target, n: u64, params: &WosParams) -> Result<Measured> {
    check_walkers(n)?;
    if a.is_empty() {
        return Ok(Measured::exact(0.0, n, rng.seed()));
    }
    let rho = launch_radius(a.bounding_radius());
    params.validate(a.ball_radius(), rho)?;
    let sphere = Ball::centered(rho)?;
    let scale = TWO_PI_SQ * rho * rho;
    let empty = Target::new(&[]);
    let ([t], diag) = sample_walkers(rng, n, |r| {
        let z = sphere_sample(r, sphere.center, rho);
        let o = walk(r, z, a, empty, &sphere, params);
        ([if o.is_hit() { scale * o.weight } else { 0.0 }], o.exhausted)
    });
    Ok(Measured {
        estimate: t.estimate(rng.seed()),
        diag,
    })
}

pub fn cap_estimate_diag(rng: &RngStream, a: &BallUnion, n: u64, params: &WosParams) -> Result<Measured> {
    cap_estimate_parts(rng, Target::new(&[a]), n, params)
}

/// Capacity of a ball union.
pub fn cap_estimate(rng: &RngStream, a: &BallUnion, n: u64, params: &WosParams) -> Result<Estimate> {
    cap_estimate_diag(rng, a, n, params).map(|m| m.estimate)
}

/// χ_r, ε_r and their sum, estimated from one set of walkers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossTerms {
    pub chi: Estimate,
    pub eps: Estimate,
    /// `χ + ε` with the error of the per-walker sum.
    pub sum: Estimate,
    pub diag: Diagnostics,
}

/// Joint estimate of the ordered-hit term `χ_r(A, B)` and the tie term
/// `ε_r(A, B)` from walkers launched on `∂B(0, r)`.
///
/// A walker that first hits one target is continued towards the other one
/// alone; it contributes to χ if it reaches it. A walker within `eps_hit` of
/// both targets at its first hit contributes to ε.
pub fn cross_estimate_parts(
    rng: &RngStream,
    a: Target,
    b: Target,
    r: f64,
    n: u64,
    params: &WosParams,
) -> Result<CrossTerms> {
    check_walkers(n)?;
    let seed = rng.seed();
    if a.is_empty() || b.is_empty() {
        let zero = Estimate::exact(0.0, n, seed);
        return Ok(CrossTerms {
            chi: zero,
            eps: zero,
            sum: zero,
            diag: Diagnostics::default(),
        });
    }
    let bounding = a.bounding_radius().max(b.bounding_radius());
    if !(r >= bounding) {
        return Err(Error::Precondition(format!(
            "sphere radius {r} does not contain the targets (bounding radius {bounding})"
        )));
    }
    params.validate(a.ball_radius().min(b.ball_radius()), r)?;
    let sphere = Ball::centered(r)?;
    let scale = TWO_PI_SQ * r * r;
    let empty = Target::new(&[]);
    let ([chi, eps, sum], diag) = sample_walkers(rng, n, |g| {
        let z = sphere_sample(g, sphere.center, r);
        let first = walk(g, z, a, b, &sphere, params);
        let (c, e, exhausted) = match first.kind {
            HitKind::Escaped => (0.0, 0.0, first.exhausted),
            HitKind::HitTie => (0.0, first.weight, false),
            HitKind::HitA | HitKind::HitB => {
                let other = if first.kind == HitKind::HitA { b } else { a };
                let second = walk(g, first.position, other, empty, &sphere, params);
                let c = if second.is_hit() { first.weight * second.weight } else { 0.0 };
                (c, 0.0, second.exhausted)
            }
        };
        ([scale * c, scale * e, scale * (c + e)], exhausted)
    });
    Ok(CrossTerms {
        chi: chi.estimate(seed),
        eps: eps.estimate(seed),
        sum: sum.estimate(seed),
        diag,
    })
}

pub fn cross_estimate(
    rng: &RngStream,
    a: &BallUnion,
    b: &BallUnion,
    r: f64,
    n: u64,
    params: &WosParams,
) -> Result<CrossTerms> {
    cross_estimate_parts(rng, Target::new(&[a]), Target::new(&[b]), r, n, params)
}

/// `χ_r(A, B) = 2π²r² ∫ (P_z[H_A < H_B < ∞] + P_z[H_B < H_A < ∞]) dλ_r(z)`.
pub fn chi_estimate(
    rng: &RngStream,
    a: &BallUnion,
    b: &BallUnion,
    r: f64,
    n: u64,
    params: &WosParams,
) -> Result<Estimate> {
    cross_estimate(rng, a, b, r, n, params).map(|c| c.chi)
}

/// `ε_r(A, B) = 2π²r² ∫ P_z[H_A = H_B < ∞] dλ_r(z)`.
pub fn eps_estimate(
    rng: &RngStream,
    a: &BallUnion,
    b: &BallUnion,
    r: f64,
    n: u64,
    params: &WosParams,
) -> Result<Estimate> {
    cross_estimate(rng, a, b, r, n, params).map(|c| c.eps)
}

/// Capacity of `A ∩ B`, up to the absorption layer: walkers are absorbed
/// where they are within `eps_hit` of both targets. This is the event scored
/// by ε, so `ε_r(A, B) ≤ Cap(A ∩ B)` holds for the two estimators as well.
pub fn cap_intersection_estimate(
    rng: &RngStream,
    a: &BallUnion,
    b: &BallUnion,
    n: u64,
    params: &WosParams,
) -> Result<Measured> {
    check_walkers(n)?;
    if a.is_empty() || b.is_empty() {
        return Ok(Measured::exact(0.0, n, rng.seed()));
    }
    let rho = launch_radius(a.bounding_radius().max(b.bounding_radius()));
    params.validate(a.radius().min(b.radius()), rho)?;
    let sphere = Ball::centered(rho)?;
    let scale = TWO_PI_SQ * rho * rho;
    let (pa, pb) = ([a], [b]);
    let (ta, tb) = (Target::new(&pa), Target::new(&pb));
    let ([t], diag) = sample_walkers(rng, n, |r| {
        let z = sphere_sample(r, sphere.center, rho);
        let o = walk_both(r, z, ta, tb, &sphere, params);
        ([if o.is_hit() { scale * o.weight } else { 0.0 }], o.exhausted)
    });
    Ok(Measured {
        estimate: t.estimate(rng.seed()),
        diag,
    })
}

/// All terms of one decomposition check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub cap_union: Estimate,
    pub cap_a: Estimate,
    pub cap_b: Estimate,
    pub cross: CrossTerms,
    /// `Cap(A∪B) − Cap(A) − Cap(B) + χ_r + ε_r`, expected to vanish.
    pub residual: Estimate,
    pub diag: Diagnostics,
}

/// Decomposition identity check with `r` twice the bounding radius of `A∪B`.
/// Every term uses its own child stream of `rng`.
pub fn decomposition(rng: &RngStream, a: &BallUnion, b: &BallUnion, n: u64, params: &WosParams) -> Result<Decomposition> {
    check_walkers(n)?;
    let seed = rng.seed();
    let both = [a, b];
    let (cap_union, cap_a, cap_b, cross);
    if a.is_empty() || b.is_empty() {
        // Cap(A ∪ ∅) is Cap(A) itself, so the identity holds term by term
        let single = if a.is_empty() { b } else { a };
        let m = cap_estimate_diag(&rng.child(1), single, n, params)?;
        cap_union = m;
        cap_a = if a.is_empty() { Measured::exact(0.0, n, seed) } else { m };
        cap_b = if b.is_empty() { Measured::exact(0.0, n, seed) } else { m };
        cross = cross_estimate(&rng.child(3), a, b, 1.0, n, params)?;
        let diag = m.diag;
        return Ok(Decomposition {
            cap_union: cap_union.estimate,
            cap_a: cap_a.estimate,
            cap_b: cap_b.estimate,
            cross,
            residual: Estimate::exact(0.0, n, seed),
            diag,
        });
    }
    cap_union = cap_estimate_parts(&rng.child(0), Target::new(&both), n, params)?;
    cap_a = cap_estimate_diag(&rng.child(1), a, n, params)?;
    cap_b = cap_estimate_diag(&rng.child(2), b, n, params)?;
    let r = launch_radius(a.bounding_radius().max(b.bounding_radius()));
    cross = cross_estimate(&rng.child(3), a, b, r, n, params)?;
    let residual = Estimate::sum_independent([
        (1.0, &cap_union.estimate),
        (-1.0, &cap_a.estimate),
        (-1.0, &cap_b.estimate),
        (1.0, &cross.sum),
    ]);
    let mut diag = cap_union.diag;
    diag.merge(&cap_a.diag);
    diag.merge(&cap_b.diag);
    diag.merge(&cross.diag);
    Ok(Decomposition {
        cap_union: cap_union.estimate,
        cap_a: cap_a.estimate,
        cap_b: cap_b.estimate,
        cross,
        residual: Estimate { n, seed, ..residual },
        diag,
    })
}

/// Residual of the decomposition identity.
pub fn decomp_residual(rng: &RngStream, a: &BallUnion, b: &BallUnion, n: u64, params: &WosParams) -> Result<Estimate> {
    decomposition(rng, a, b, n, params).map(|d| d.residual)
}
