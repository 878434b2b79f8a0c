//! The fixed battery of union pairs used by the decomposition experiment.

use crate::geometry::{unit_direction, BallUnion, Point4};
use crate::rng::RngStream;
use crate::Result;

/// The battery does not depend on the run seed.
const BATTERY_SEED: u64 = 0x0dec_0b05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairClass {
    Disjoint,
    /// Overlapping balls, none of them shared.
    Overlapping,
    /// Some balls belong to both unions.
    Shared,
    /// `B` lies inside `A`.
    Nested,
}

impl PairClass {
    pub fn name(self) -> &'static str {
        match self {
            PairClass::Disjoint => "disjoint",
            PairClass::Overlapping => "overlapping",
            PairClass::Shared => "shared",
            PairClass::Nested => "nested",
        }
    }

    /// Whether `A ∩ B` has nonempty interior.
    pub fn overlaps(self) -> bool {
        self != PairClass::Disjoint
    }
}

#[derive(Clone, Debug)]
pub struct BatteryCase {
    pub label: String,
    pub class: PairClass,
    pub a: BallUnion,
    pub b: BallUnion,
}

/// Centers of a chain of unit-step random directions starting at `start`.
fn chain(rng: &mut RngStream, start: Point4, len: usize) -> Vec<Point4> {
    let mut out = vec![start];
    while out.len() < len {
        let last = out[out.len() - 1];
        out.push(last + unit_direction(rng));
    }
    out
}

fn extent(centers: &[Point4], from: Point4) -> f64 {
    centers.iter().map(|c| c.dist(from)).fold(0.0, f64::max)
}

/// Twenty pairs, five of each class, with one to five unit balls per union.
pub fn decomp_battery() -> Result<Vec<BatteryCase>> {
    let mut rng = RngStream::new(BATTERY_SEED, 0);
    let mut out = Vec::new();
    for class in [PairClass::Disjoint, PairClass::Overlapping, PairClass::Shared, PairClass::Nested] {
        for i in 0..5usize {
            let g = &mut rng;
            let n = 1 + i;
            let a = chain(g, Point4::ORIGIN, n);
            let (b, rb) = match class {
                PairClass::Disjoint => {
                    let b0 = chain(g, Point4::ORIGIN, 1 + (i + 2) % 5);
                    let gap = 2.0 + 0.5 * i as f64 + 0.1;
                    let shift = extent(&a, Point4::ORIGIN) + extent(&b0, Point4::ORIGIN) + gap;
                    let b = b0.into_iter().map(|c| c + Point4::on_axis(shift)).collect();
                    (b, 1.0)
                }
                PairClass::Overlapping => {
                    let last = a[a.len() - 1];
                    let start = last + unit_direction(g) * (1.2 + 0.15 * i as f64);
                    (chain(g, start, 1 + (i + 1) % 5), 1.0)
                }
                PairClass::Shared => {
                    let k = 1 + i / 2;
                    let mut b: Vec<Point4> = a[a.len().saturating_sub(k)..].to_vec();
                    let last = b[b.len() - 1];
                    b.extend(chain(g, last, 1 + i % 3).into_iter().skip(1));
                    (b, 1.0)
                }
                PairClass::Nested => {
                    let b = a.iter().map(|&c| c + unit_direction(g) * (0.4 * g.uniform())).collect();
                    (b, 0.5)
                }
            };
            out.push(BatteryCase {
                label: format!("{}_{i}", class.name()),
                class,
                a: BallUnion::new(a, 1.0)?,
                b: BallUnion::new(b, rb)?,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_have_the_promised_geometry() {
        let battery = decomp_battery().unwrap();
        assert_eq!(battery.len(), 20);
        for c in &battery {
            let gap = c
                .a
                .centers()
                .iter()
                .flat_map(|p| c.b.centers().iter().map(move |q| p.dist(*q)))
                .fold(f64::INFINITY, f64::min)
                - c.a.radius()
                - c.b.radius();
            let shared = c.a.centers().iter().any(|p| c.b.centers().contains(p));
            match c.class {
                PairClass::Disjoint => assert!(gap > 0.0, "{}", c.label),
                PairClass::Overlapping => assert!(gap < 0.0 && !shared, "{}", c.label),
                PairClass::Shared => assert!(shared, "{}", c.label),
                PairClass::Nested => {
                    for q in c.b.centers() {
                        let inner = c.a.centers().iter().any(|p| p.dist(*q) + c.b.radius() < c.a.radius());
                        assert!(inner, "{}", c.label);
                    }
                }
            }
        }
    }

    #[test]
    fn battery_is_fixed() {
        let a = decomp_battery().unwrap();
        let b = decomp_battery().unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.a.centers(), y.a.centers());
            assert_eq!(x.b.centers(), y.b.centers());
        }
    }
}
