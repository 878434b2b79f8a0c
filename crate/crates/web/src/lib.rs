//! Browser demo: draws a sausage and estimates its capacity, and traces the
//! growth of the occupation functional `D_0[0,t]`.

use sausage_core::capacity::{cap_estimate_diag, launch_radius};
use sausage_core::experiments::WosSection;
use sausage_core::functionals::{d0_adaptive, ADAPTIVE_H0};
use sausage_core::geometry::Point4;
use sausage_core::paths::{build_sausage, sample_skeleton};
use sausage_core::rng::RngStream;
use sausage_core::Tally;
use wasm_bindgen::prelude::*;

/// Largest number of points handed to the page for drawing.
const MAX_DRAWN: usize = 20_000;

fn js(e: sausage_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// δ-skeleton of a path on `[0, t]`, projected on its first two coordinates
/// and thinned to at most 20 000 points: `[x0, y0, x1, y1, ...]`.
#[wasm_bindgen]
pub fn sausage_projection(seed: u64, t: f64, delta: f64) -> Result<Vec<f32>, JsError> {
    let skel = sample_skeleton(&mut RngStream::new(seed, 0), Point4::ORIGIN, t, delta).map_err(js)?;
    let stride = skel.len().div_ceil(MAX_DRAWN).max(1);
    Ok(skel
        .points
        .iter()
        .step_by(stride)
        .flat_map(|p| [p.0[0] as f32, p.0[1] as f32])
        .collect())
}

/// Capacity of the unit sausage of the same path as [`sausage_projection`]:
/// `[Cap, standard error, log t · Cap / t]`.
#[wasm_bindgen]
pub fn sausage_capacity(seed: u64, t: f64, delta: f64, walkers: u32) -> Result<Vec<f64>, JsError> {
    let skel = sample_skeleton(&mut RngStream::new(seed, 0), Point4::ORIGIN, t, delta).map_err(js)?;
    let union = build_sausage(&skel, 1.0).map_err(js)?;
    let params = WosSection::default().params(launch_radius(union.bounding_radius()));
    let m = cap_estimate_diag(&RngStream::new(seed, 1), &union, walkers as u64, &params).map_err(js)?;
    let e = m.estimate;
    Ok(vec![e.mean, e.std_error, e.mean * t.ln() / t])
}

/// Mean of `D_0[0,t]` over `samples` paths at each horizon of `ts`:
/// `[mean_0, se_0, mean_1, se_1, ...]`.
#[wasm_bindgen]
pub fn d0_curve(seed: u64, ts: Vec<f64>, samples: u32) -> Result<Vec<f64>, JsError> {
    let mut out = Vec::with_capacity(2 * ts.len());
    for (k, &t) in ts.iter().enumerate() {
        let base = RngStream::for_unit(seed, &[k as u64]);
        let mut tally = Tally::new();
        for i in 0..samples as u64 {
            let s = d0_adaptive(&mut base.child(i), Point4::ORIGIN, t, ADAPTIVE_H0).map_err(js)?;
            tally.push(s.value);
        }
        let e = tally.estimate(seed);
        out.extend([e.mean, e.std_error]);
    }
    Ok(out)
}
