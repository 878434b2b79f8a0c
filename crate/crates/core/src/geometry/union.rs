//! Finite unions of equal-radius balls with an exact nearest-center index.
//!
//! Centers are organised in a bounding-box tree: each node stores the tight
//! axis-aligned box of its centers and is split at the median of its widest
//! axis. Nearest-center queries are best-first searches over the boxes. They
//! are exact, and the exact answer is bitwise equal to a brute-force scan
//! because both take the minimum of the same `‖p - c‖ - r` expressions.
//! Queries far from every center can stop early with a certified lower bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::point::Point4;
use crate::{Error, Result};

/// Centers per leaf.
const LEAF: usize = 8;
const NONE: u32 = u32::MAX;

/// A union of closed balls `∪ B(c_i, radius)` with a spatial index.
#[derive(Clone, Debug)]
pub struct BallUnion {
    centers: Vec<Point4>,
    radius: f64,
    bounding_radius: f64,
    index: Option<Tree>,
}

#[derive(Clone, Debug)]
struct Node {
    lo: [f64; 4],
    hi: [f64; 4],
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

#[derive(Clone, Debug)]
struct Tree {
    nodes: Vec<Node>,
    /// Centers in tree order.
    sorted: Vec<Point4>,
    /// Original index of each entry of `sorted`.
    order: Vec<u32>,
}

/// Result of a bounded distance query, see [`BallUnion::distance_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceBound {
    /// A lower bound on the signed distance to the union.
    pub lower: f64,
    /// Whether `lower` is the exact signed distance.
    pub exact: bool,
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    key: f64,
    node: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // min-heap on the squared box distance
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Squared distances from `p` to the nearest and farthest points of a box.
#[inline]
fn box_dist_sq(p: Point4, n: &Node) -> f64 {
    let mut s = 0.0;
    for k in 0..4 {
        let x = p.0[k];
        let d = if x < n.lo[k] {
            n.lo[k] - x
        } else if x > n.hi[k] {
            x - n.hi[k]
        } else {
            0.0
        };
        s += d * d;
    }
    s
}

#[inline]
fn box_far_sq(p: Point4, n: &Node) -> f64 {
    let mut s = 0.0;
    for k in 0..4 {
        let d = (p.0[k] - n.lo[k]).abs().max((p.0[k] - n.hi[k]).abs());
        s += d * d;
    }
    s
}

/// Largest supported ratio of center norm to radius.
const MAX_SPAN: f64 = 1e15;

impl BallUnion {
    /// Builds the union of `B(c, radius)` over all `centers`.
    pub fn new(centers: Vec<Point4>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!(
                "union radius must be positive and finite, got {radius}"
            )));
        }
        let mut max_norm: f64 = 0.0;
        for c in &centers {
            if !c.is_finite() {
                return Err(Error::Domain("union center is not finite".into()));
            }
            max_norm = max_norm.max(c.norm());
        }
        if max_norm / radius > MAX_SPAN {
            return Err(Error::Domain(format!(
                "centers span {max_norm}, too far for balls of radius {radius}"
            )));
        }
        if centers.len() >= NONE as usize {
            return Err(Error::Domain(format!("too many centers: {}", centers.len())));
        }
        let index = if centers.is_empty() {
            None
        } else {
            Some(Tree::build(&centers))
        };
        Ok(BallUnion {
            bounding_radius: if centers.is_empty() {
                0.0
            } else {
                max_norm + radius
            },
            centers,
            radius,
            index,
        })
    }

    /// A union of zero balls.
    pub fn empty(radius: f64) -> Result<Self> {
        Self::new(Vec::new(), radius)
    }

    pub fn single(center: Point4, radius: f64) -> Result<Self> {
        Self::new(vec![center], radius)
    }

    pub fn centers(&self) -> &[Point4] {
        &self.centers
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Radius of the smallest origin-centred ball containing the union.
    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    /// Same centers, new common radius.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::new(self.centers.clone(), radius)
    }

    /// Union scaled by `lambda` about the origin (centers and radius).
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(
            self.centers.iter().map(|&c| c * lambda).collect(),
            self.radius * lambda,
        )
    }

    /// Signed distance `min_i ‖p - c_i‖ - radius`, or `None` for an empty union.
    pub fn signed_distance(&self, p: Point4) -> Option<f64> {
        let index = self.index.as_ref()?;
        Some(index.nearest_sq(p).sqrt() - self.radius)
    }

    /// Brute-force signed distance, the reference for the index.
    pub fn signed_distance_brute(&self, p: Point4) -> Option<f64> {
        self.centers
            .iter()
            .map(|&c| (p - c).norm() - self.radius)
            .min_by(f64::total_cmp)
    }

    /// Lower bound on the signed distance that is cheap far from the union.
    ///
    /// The bound is exact whenever it is at most `exact_below`; otherwise it is
    /// at least half of the true distance. Returns `+∞` for an empty union.
    pub fn distance_bound(&self, p: Point4, exact_below: f64) -> DistanceBound {
        let Some(index) = self.index.as_ref() else {
            return DistanceBound {
                lower: f64::INFINITY,
                exact: true,
            };
        };
        index.bound(p, self.radius, exact_below)
    }

    /// Whether `p` lies in the closed union.
    pub fn contains(&self, p: Point4) -> bool {
        let mut inside = false;
        self.for_each_within(p, self.radius, |_| {
            inside = true;
            false
        });
        inside
    }

    /// Calls `f(i)` for each center `i` with `‖p - c_i‖ ≤ reach`, until `f`
    /// returns `false`.
    pub fn for_each_within(&self, p: Point4, reach: f64, mut f: impl FnMut(usize) -> bool) {
        if let Some(index) = self.index.as_ref() {
            index.within(p, reach, &mut f);
        }
    }

    /// Number of centers within `reach` of `p`.
    pub fn count_within(&self, p: Point4, reach: f64) -> usize {
        let mut n = 0;
        self.for_each_within(p, reach, |_| {
            n += 1;
            true
        });
        n
    }
}

/// Signed distance from `p` to the union; `+∞` when the union is empty.
pub fn dist_to_union(p: Point4, u: &BallUnion) -> f64 {
    u.signed_distance(p).unwrap_or(f64::INFINITY)
}

impl Tree {
    fn build(centers: &[Point4]) -> Self {
        let mut items: Vec<(Point4, u32)> = centers
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32))
            .collect();
        let mut nodes = Vec::with_capacity(2 * centers.len() / LEAF + 2);
        Self::build_node(&mut items, 0, &mut nodes);
        let (sorted, order) = items.into_iter().unzip();
        Tree {
            nodes,
            sorted,
            order,
        }
    }

    fn build_node(items: &mut [(Point4, u32)], offset: usize, nodes: &mut Vec<Node>) -> u32 {
        let mut lo = [f64::INFINITY; 4];
        let mut hi = [f64::NEG_INFINITY; 4];
        for (c, _) in items.iter() {
            for k in 0..4 {
                lo[k] = lo[k].min(c.0[k]);
                hi[k] = hi[k].max(c.0[k]);
            }
        }
        let id = nodes.len() as u32;
        nodes.push(Node {
            lo,
            hi,
            start: offset as u32,
            end: (offset + items.len()) as u32,
            left: NONE,
            right: NONE,
        });
        if items.len() > LEAF {
            let axis = (0..4)
                .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
                .unwrap_or(0);
            let mid = items.len() / 2;
            items.select_nth_unstable_by(mid, |a, b| {
                a.0 .0[axis].total_cmp(&b.0 .0[axis]).then(a.1.cmp(&b.1))
            });
            let (l, r) = items.split_at_mut(mid);
            let left = Self::build_node(l, offset, nodes);
            let right = Self::build_node(r, offset + mid, nodes);
            nodes[id as usize].left = left;
            nodes[id as usize].right = right;
        }
        id
    }

    #[inline]
    fn scan(&self, n: &Node, p: Point4, best: &mut f64) {
        for &c in &self.sorted[n.start as usize..n.end as usize] {
            let d = (p - c).norm_sq();
            if d < *best {
                *best = d;
            }
        }
    }

    /// Exact squared distance to the nearest center, depth first with the
    /// nearer child visited first.
    fn nearest_sq(&self, p: Point4) -> f64 {
        let mut best = f64::INFINITY;
        let mut stack: Vec<(f64, u32)> = Vec::with_capacity(64);
        stack.push((box_dist_sq(p, &self.nodes[0]), 0));
        while let Some((key, id)) = stack.pop() {
            if key >= best {
                continue;
            }
            let n = &self.nodes[id as usize];
            if n.left == NONE {
                self.scan(n, p, &mut best);
                continue;
            }
            let kl = box_dist_sq(p, &self.nodes[n.left as usize]);
            let kr = box_dist_sq(p, &self.nodes[n.right as usize]);
            if kl <= kr {
                stack.push((kr, n.right));
                stack.push((kl, n.left));
            } else {
                stack.push((kl, n.left));
                stack.push((kr, n.right));
            }
        }
        best
    }

    /// Best-first search that stops once the smallest unexplored box
    /// distance exceeds `exact_below` and half of a certified upper bound.
    fn bound(&self, p: Point4, r: f64, exact_below: f64) -> DistanceBound {
        let root = &self.nodes[0];
        let mut upper_sq = box_far_sq(p, root);
        let mut best = f64::INFINITY;
        let mut heap = BinaryHeap::with_capacity(64);
        heap.push(Entry {
            key: box_dist_sq(p, root),
            node: 0,
        });
        while let Some(Entry { key, node }) = heap.pop() {
            if key >= best {
                break;
            }
            let lower = key.sqrt() - r;
            if lower > exact_below && lower >= 0.5 * (upper_sq.min(best).sqrt() - r) {
                return DistanceBound {
                    lower,
                    exact: false,
                };
            }
            let n = &self.nodes[node as usize];
            if n.left == NONE {
                self.scan(n, p, &mut best);
                continue;
            }
            for child in [n.left, n.right] {
                let c = &self.nodes[child as usize];
                let k = box_dist_sq(p, c);
                if k < best {
                    upper_sq = upper_sq.min(box_far_sq(p, c));
                    heap.push(Entry { key: k, node: child });
                }
            }
        }
        DistanceBound {
            lower: best.sqrt() - r,
            exact: true,
        }
    }

    fn within(&self, p: Point4, reach: f64, f: &mut dyn FnMut(usize) -> bool) {
        let reach_sq = reach * reach;
        let mut stack = Vec::with_capacity(64);
        stack.push(0u32);
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id as usize];
            if box_dist_sq(p, n) > reach_sq {
                continue;
            }
            if n.left == NONE {
                let range = n.start as usize..n.end as usize;
                for (c, &i) in self.sorted[range.clone()].iter().zip(&self.order[range]) {
                    if (p - *c).norm_sq() <= reach_sq && !f(i as usize) {
                        return;
                    }
                }
            } else {
                stack.push(n.right);
                stack.push(n.left);
            }
        }
    }
}
