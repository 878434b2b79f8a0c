//! The experiment runner.
//!
//! Work units are `(kind, t index, unit index)` triples, each with its own
//! random stream, and every fold runs in unit order. Rows are therefore
//! identical for any number of workers.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::battery::decomp_battery;
use super::config::{ExperimentConfig, Kind};
use super::results::{ResultRow, INVALID_MARK};
use crate::capacity::{
    blocking_decomposition, blocking_radius, cap_estimate_diag, cap_intersection_estimate,
    decomposition, launch_radius, sample_walkers, walk, walk_timed, Diagnostics, Target, TimedHit,
};
use crate::estimate::{Estimate, Tally};
use crate::functionals::{d0_adaptive, r_pair_mean, Concentration};
use crate::geometry::{green_g, Ball, BallUnion, Point4};
use crate::par::{map_units, with_workers};
use crate::paths::{build_sausage, sample_skeleton, sausage_volume_estimate};
use crate::rng::RngStream;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowTiming {
    pub experiment: String,
    pub wall_time_s: f64,
}

/// Everything needed to reproduce and interpret a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub version: String,
    pub config: ExperimentConfig,
    pub valid: bool,
    pub wall_time_s: f64,
    pub rows: Vec<RowTiming>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    /// False when any row is marked invalid.
    pub valid: bool,
    pub meta: RunMeta,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
}

impl Ctx<'_> {
    fn stream(&self, t_index: usize, unit: usize) -> RngStream {
        RngStream::for_unit(self.seed, &[self.cfg.kind.code(), t_index as u64, unit as u64])
    }

    fn row(&self, label: &str, t: f64, e: Estimate, diag: &Diagnostics, since: Instant) -> ResultRow {
        let mut experiment = format!("{}/{label}", self.cfg.experiment_name());
        if !diag.is_valid() {
            experiment.push_str(INVALID_MARK);
        }
        ResultRow {
            experiment,
            kind: self.cfg.kind.name().into(),
            t,
            delta: self.cfg.delta,
            r_sausage: self.cfg.r_sausage,
            n_paths: self.cfg.n_paths,
            n_walkers: self.cfg.n_walkers,
            seed: self.seed,
            mean: e.mean,
            std_error: e.std_error,
            n: e.n,
            wall_time_s: since.elapsed().as_secs_f64(),
            diag_escape_rate: diag.escape_rate(),
            diag_clip_count: diag.clip_count,
        }
    }

    fn estimate(&self, t: &Tally) -> Estimate {
        t.estimate(self.seed)
    }

    fn exact(&self, value: f64, n: u64) -> Estimate {
        Estimate::exact(value, n, self.seed)
    }
}

/// Runs a validated configuration on a pool of `cfg.workers` threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let seed = cfg
        .seed
        .ok_or_else(|| Error::Config(vec!["a seed is required for result-bearing runs".into()]))?;
    let cx = Ctx { cfg, seed };
    let start = Instant::now();
    let mut rows = with_workers(cfg.workers, || match cfg.kind {
        Kind::Cap => run_cap(&cx),
        Kind::Lln => run_lln(&cx),
        Kind::Decomp => run_decomp(&cx),
        Kind::D0Sweep => run_d0(&cx),
        Kind::Volume => run_volume(&cx),
        Kind::Intersect => run_intersect(&cx),
        Kind::Blocking => run_blocking(&cx),
        Kind::PairFunctional => run_pair(&cx),
    })?;
    let timings = rows
        .iter()
        .map(|r| RowTiming {
            experiment: r.experiment.clone(),
            wall_time_s: r.wall_time_s,
        })
        .collect();
    if !cfg.record_wall_time {
        for r in &mut rows {
            r.wall_time_s = 0.0;
        }
    }
    let valid = rows.iter().all(|r| !r.is_invalid());
    for r in rows.iter().filter(|r| r.is_invalid()) {
        log::warn!("{}: walker step exhaustion rate {:.2e}", r.experiment, r.diag_escape_rate);
    }
    let meta = RunMeta {
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        valid,
        wall_time_s: start.elapsed().as_secs_f64(),
        rows: timings,
    };
    Ok(RunOutput { rows, valid, meta })
}

/// Ball capacities and the hitting probability from twice the radius.
fn run_cap(cx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = cx.cfg;
    let mut rows = Vec::new();
    for (i, &rho) in cfg.cap.radii.iter().enumerate() {
        let timer = Instant::now();
        let ball = BallUnion::single(Point4::ORIGIN, rho)?;
        let params = cfg.wos.params(launch_radius(rho));
        let m = cap_estimate_diag(&cx.stream(0, i), &ball, cfg.n_walkers, &params)?;
        rows.push(cx.row(&format!("ball_cap_rho={rho}"), 0.0, m.estimate, &m.diag, timer));

        let timer = Instant::now();
        let z = Point4::on_axis(2.0 * rho);
        let sphere = Ball::centered(2.0 * rho)?;
        let parts = [&ball];
        let target = Target::new(&parts);
        let empty = Target::new(&[]);
        let ([hits], diag) = sample_walkers(&cx.stream(1, i), cfg.n_walkers, |g| {
            let o = walk(g, z, target, empty, &sphere, &params);
            ([if o.is_hit() { 1.0 } else { 0.0 }], o.exhausted)
        });
        rows.push(cx.row(&format!("ball_hit_rho={rho}"), 0.0, cx.estimate(&hits), &diag, timer));
    }
    Ok(rows)
}

/// Scaled sausage capacities `log(t/r²)·Cap/t` and their spread over paths.
fn run_lln(cx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = cx.cfg;
    let r = cfg.r_sausage;
    let mut rows = Vec::new();
    for (ti, &t) in cfg.t_grid.iter().enumerate() {
        let timer = Instant::now();
        let (mut scaled, mut caps) = (Tally::new(), Tally::new());
        let mut diag = Diagnostics::default();
        for p in 0..cfg.n_paths as usize {
            let base = cx.stream(ti, p);
            let union = {
                let skel = sample_skeleton(&mut base.child(0), Point4::ORIGIN, t, cfg.delta)?;
                build_sausage(&skel, r)?
            };
            let params = cfg.wos.params(launch_radius(union.bounding_radius()));
            let m = cap_estimate_diag(&base.child(1), &union, cfg.n_walkers, &params)?;
            diag.merge(&m.diag);
            caps.push(m.estimate.mean);
            scaled.push(m.estimate.mean * (t / (r * r)).ln() / t);
            log::debug!("lln t={t} path {p}: cap {:.4}", m.estimate.mean);
        }
        let n = caps.count();
        let var = caps.variance();
        let spread = if caps.mean() > 0.0 { caps.std_dev() / caps.mean() } else { 0.0 };
        let dof = (2.0 * (n.max(2) - 1) as f64).sqrt();
        rows.push(cx.row("scaled_cap", t, cx.estimate(&scaled), &diag, timer));
        rows.push(cx.row("cap", t, cx.estimate(&caps), &diag, timer));
        let var_se = if n > 1 { 2.0 * var / dof } else { 0.0 };
        rows.push(cx.row("cap_variance", t, Estimate { std_error: var_se, ..cx.exact(var, n) }, &diag, timer));
        rows.push(cx.row(
            "cap_spread",
            t,
            Estimate { std_error: if n > 1 { spread / dof } else { 0.0 }, ..cx.exact(spread, n) },
            &diag,
            timer,
        ));
    }
    Ok(rows)
}

/// Every term of the decomposition identity on the fixed battery, and the
/// intersection capacity bounding ε on overlapping pairs.
fn run_decomp(cx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = cx.cfg;
    let n = cfg.n_walkers;
    let mut rows = Vec::new();
    for (i, case) in decomp_battery()?.iter().enumerate() {
        let timer = Instant::now();
        let bounding = case.a.bounding_radius().max(case.b.bounding_radius());
        let params = cfg.wos.params(launch_radius(bounding));
        let d = decomposition(&cx.stream(0, i), &case.a, &case.b, n, &params)?;
        let l = &case.label;
        for (name, e) in [
            ("residual", d.residual),
            ("cap_union", d.cap_union),
            ("cap_a", d.cap_a),
            ("cap_b", d.cap_b),
            ("chi", d.cross.chi),
            ("eps", d.cross.eps),
        ] {
            rows.push(cx.row(&format!("{l}/{name}"), 0.0, e, &d.diag, timer));
        }
        if case.class.overlaps() {
            let timer = Instant::now();
            let m = cap_intersection_estimate(&cx.stream(1, i), &case.a, &case.b, n, &params)?;
            rows.push(cx.row(&format!("{l}/cap_intersection"), 0.0, m.estimate, &m.diag, timer));
        }
    }
    Ok(rows)
}

/// `D_0[0,t]`: mean, concentration and second moment per horizon, then the
/// least-squares slope of the mean against `log t`.
fn run_d0(cx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = cx.cfg;
    let n = cfg.n_paths as usize;
    let mut rows = Vec::new();
    let mut fit = Vec::new();
    let whole = Instant::now();
    for (ti, &t) in cfg.t_grid.iter().enumerate() {
        let timer = Instant::now();
        let values: Vec<f64> = map_units(n, |i| {
            d0_adaptive(&mut cx.stream(ti, i), Point4::ORIGIN, t, cfg.d0.h0).map(|s| s.value)
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let c = Concentration::from_samples(t, &values, cx.seed);
        let diag = Diagnostics {
            walkers: n as u64,
            ..Diagnostics::default()
        };
        let mean = Estimate {
            mean: c.mean,
            std_error: c.std_error,
            n: n as u64,
            seed: cx.seed,
        };
        fit.push((t.ln(), mean));
        rows.push(cx.row("mean", t, mean, &diag, timer));
        let p = c.within_25;
        let within = Estimate {
            std_error: (p * (1.0 - p) / n as f64).sqrt(),
            ..cx.exact(p, n as u64)
        };
        rows.push(cx.row("within_25", t, within, &diag, timer));
        rows.push(cx.row("second_moment_ratio", t, second_moment_ratio(&values, cx.seed), &diag, timer));
    }
    if let Some((slope, intercept)) = weighted_line(&fit) {
        let diag = Diagnostics::default();
        rows.push(cx.row("slope", 0.0, slope, &diag, whole));
        rows.push(cx.row("intercept", 0.0, intercept, &diag, whole));
    }
    Ok(rows)
}

/// `E[D²]/E[D]²` with a delta-method error.
fn second_moment_ratio(values: &[f64], seed: u64) -> Estimate {
    let n = values.len() as f64;
    let m1 = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| v * v).sum::<f64>() / n;
    if !(m1 > 0.0) {
        return Estimate::exact(0.0, values.len() as u64, seed);
    }
    let ratio = m2 / (m1 * m1);
    let infl: Tally = values
        .iter()
        .map(|v| (v * v - m2) / (m1 * m1) - 2.0 * m2 * (v - m1) / (m1 * m1 * m1))
        .collect();
    Estimate {
        mean: ratio,
        std_error: (infl.variance() / n).sqrt(),
        n: values.len() as u64,
        seed,
    }
}

/// Ordinary least squares of `y` on `x`, with errors propagated from the
/// independent errors of the points. `None` with fewer than two points.
fn weighted_line(points: &[(f64, Estimate)]) -> Option<(Estimate, Estimate)> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / k;
    let ybar = points.iter().map(|p| p.1.mean).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    let slope = points.iter().map(|p| (p.0 - xbar) * (p.1.mean - ybar)).sum::<f64>() / sxx;
    let intercept = ybar - slope * xbar;
    // both are linear in the y values
    let slope_w = |x: f64| (x - xbar) / sxx;
    let icpt_w = |x: f64| 1.0 / k - xbar * slope_w(x);
    let se = |w: &dyn Fn(f64) -> f64| points.iter().map(|p| (w(p.0) * p.1.std_error).powi(2)).sum::<f64>().sqrt();
    let n = points.iter().map(|p| p.1.n).sum();
    let seed = points[0].1.seed;
    Some((
        Estimate { mean: slope, std_error: se(&slope_w), n, seed },
        Estimate { mean: intercept, std_error: se(&icpt_w), n, seed },
    ))
}

/// `|W^δ[0,t]|/t`, one volume estimate per path.
fn run_volume(cx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = cx.cfg;
    let mut rows = Vec::new();
    for (ti, &t) in cfg.t_grid.iter().enumerate() {
        let timer = Instant::now();
        let per_path: Tally = map_units(cfg.n_paths as usize, |p| -> Result<f64> {
            let base = cx.stream(ti, p);
            let skel = sample_skeleton(&mut base.child(0), Point4::ORIGIN, t, cfg.delta)?;
            let v = sausage_volume_estimate(&mut base.child(1), &skel, cfg.r_sausage, cfg.volume.n_probe)?;
            Ok(v.mean / t)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();
        let diag = Diagnostics {
            walkers: per_path.count(),
            ..Diagnostics::default()
        };
        rows.push(cx.row("volume_per_t", t, cx.estimate(&per_path), &diag, timer));
    }
    Ok(rows)
}

/// Probability that a path from `z` hits the radius-`2r` sausage of a path
/// from 0 before the design horizon, for one and for two independent paths.
fn run_intersect(cx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = cx.cfg;
    let sec = &cfg.intersect;
    let k = sec.z_scales.len();
    let mut rows = Vec::new();
    for (ti, &t) in cfg.t_grid.iter().enumerate() {
        let timer = Instant::now();
        let horizon = sec.horizon_factor * t;
        let mut single = vec![Tally::new(); k];
        let mut double = vec![Tally::new(); k];
        let mut tail = Tally::new();
        let mut diag = Diagnostics::default();
        for p in 0..cfg.n_paths as usize {
            let base = cx.stream(ti, p);
            let union = {
                let skel = sample_skeleton(&mut base.child(0), Point4::ORIGIN, t, cfg.delta)?;
                build_sausage(&skel, 2.0 * sec.r_intersect)?
            };
            let b = union.bounding_radius();
            // E‖γ_T‖⁻² ≤ 1/(2T) for a path from anywhere, so hitting B(0, b)
            // after the horizon has probability at most b²/(2T)
            tail.push((b * b / (2.0 * horizon)).min(1.0));
            let params = cfg.wos.params(launch_radius(b));
            let parts = [&union];
            let target = Target::new(&parts);
            let hit_fraction = |rng: &RngStream, z: Point4, diag: &mut Diagnostics| -> f64 {
                if union.contains(z) {
                    return 1.0;
                }
                let ([h], d) = sample_walkers(rng, cfg.n_walkers, |g| match walk_timed(g, z, target, horizon, &params) {
                    TimedHit::Hit { .. } => ([1.0], false),
                    TimedHit::Timeout => ([0.0], false),
                    TimedHit::Exhausted => ([0.0], true),
                });
                diag.merge(&d);
                h.mean()
            };
            for (j, &c) in sec.z_scales.iter().enumerate() {
                let dist = c * t.sqrt();
                let z = Point4::on_axis(dist);
                let z2 = Point4::new(0.0, dist, 0.0, 0.0);
                let p1 = hit_fraction(&base.child(1 + 2 * j as u64), z, &mut diag);
                let p2 = hit_fraction(&base.child(2 + 2 * j as u64), z2, &mut diag);
                single[j].push(p1);
                double[j].push(p1 * p2);
            }
        }
        let lt = t.ln();
        for (j, &c) in sec.z_scales.iter().enumerate() {
            rows.push(cx.row(&format!("single_z={c}sqrt_t"), t, cx.estimate(&single[j]), &diag, timer));
            rows.push(cx.row(&format!("double_z={c}sqrt_t"), t, cx.estimate(&double[j]), &diag, timer));
            if lt > 1.0 {
                let far = (1.0 / (c * c)).min(1.0);
                let ll = lt.ln();
                let n = single[j].count();
                rows.push(cx.row(&format!("norm_single_z={c}sqrt_t"), t, cx.exact(far * ll * ll / lt, n), &diag, timer));
                rows.push(cx.row(
                    &format!("norm_double_z={c}sqrt_t"),
                    t,
                    cx.exact(far * far * ll.powi(4) / (lt * lt), n),
                    &diag,
                    timer,
                ));
            }
        }
        rows.push(cx.row("tail_bound", t, cx.estimate(&tail), &diag, timer));
    }
    Ok(rows)
}

/// Terms of the dyadic blocking decomposition, averaged over paths.
fn run_blocking(cx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = cx.cfg;
    let mut rows = Vec::new();
    for (ti, &t) in cfg.t_grid.iter().enumerate() {
        let timer = Instant::now();
        let params = cfg.wos.params(2.0 * blocking_radius(t));
        let mut tallies = [Tally::new(); 6];
        let mut diag = Diagnostics::default();
        let mut discarded = 0u64;
        for p in 0..cfg.n_paths as usize {
            let base = cx.stream(ti, p);
            let skel = sample_skeleton(&mut base.child(0), Point4::ORIGIN, t, cfg.delta)?;
            let rec = blocking_decomposition(&base.child(1), &skel, cfg.r_sausage, cfg.blocking.levels, cfg.n_walkers, &params)?;
            let Some(rec) = rec else {
                discarded += 1;
                continue;
            };
            diag.merge(&rec.diag);
            let s = rec.s_sum.mean;
            let values = [
                rec.residual.mean,
                rec.cap_total.mean,
                s,
                rec.xi_sum.mean,
                rec.upsilon_sum.mean,
                if s > 0.0 { rec.xi_sum.mean / s } else { 0.0 },
            ];
            for (acc, v) in tallies.iter_mut().zip(values) {
                acc.push(v);
            }
        }
        diag.discarded = discarded;
        for (name, tally) in ["residual", "cap_total", "s_sum", "xi_sum", "upsilon_sum", "xi_over_s"].iter().zip(&tallies) {
            rows.push(cx.row(name, t, cx.estimate(tally), &diag, timer));
        }
        rows.push(cx.row("discarded", t, cx.exact(discarded as f64, cfg.n_paths), &diag, timer));
    }
    Ok(rows)
}

/// `E[R[0,t]]/G(z)` and the same divided by `t`.
fn run_pair(cx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = cx.cfg;
    let z = Point4::on_axis(cfg.pair.z_norm);
    let g = green_g(z)?;
    let mut rows = Vec::new();
    for (ti, &t) in cfg.t_grid.iter().enumerate() {
        let timer = Instant::now();
        let h = cfg.pair.h.min(t);
        let m = r_pair_mean(&cx.stream(ti, 0), z, t, h, cfg.n_paths, cfg.n_walkers)?;
        rows.push(cx.row("r_over_g", t, m.estimate.scale(1.0 / g), &m.diag, timer));
        rows.push(cx.row("r_over_g_t", t, m.estimate.scale(1.0 / (g * t)), &m.diag, timer));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_recovers_exact_line() {
        let pts: Vec<(f64, Estimate)> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&x| (x, Estimate { mean: 0.5 + 0.125 * x, std_error: 0.01, n: 10, seed: 1 }))
            .collect();
        let (s, i) = weighted_line(&pts).unwrap();
        assert!((s.mean - 0.125).abs() < 1e-14);
        assert!((i.mean - 0.5).abs() < 1e-14);
        assert!(s.std_error > 0.0);
        assert!(weighted_line(&pts[..1]).is_none());
    }

    #[test]
    fn seed_is_required() {
        let cfg = ExperimentConfig::defaults(Kind::Cap);
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }
}
