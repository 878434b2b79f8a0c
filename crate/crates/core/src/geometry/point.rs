use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A position in four-dimensional Euclidean space, in units of the unit sausage radius.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point4(pub [f64; 4]);

impl Point4 {
    pub const ORIGIN: Point4 = Point4([0.0; 4]);

    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        Point4([x0, x1, x2, x3])
    }

    /// The point `(r, 0, 0, 0)`.
    pub const fn on_axis(r: f64) -> Self {
        Point4([r, 0.0, 0.0, 0.0])
    }

    #[inline]
    pub fn dot(self, other: Point4) -> f64 {
        let (a, b) = (self.0, other.0);
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn dist_sq(self, other: Point4) -> f64 {
        (self - other).norm_sq()
    }

    #[inline]
    pub fn dist(self, other: Point4) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Add for Point4 {
    type Output = Point4;
    #[inline]
    fn add(self, o: Point4) -> Point4 {
        let (a, b) = (self.0, o.0);
        Point4([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl AddAssign for Point4 {
    #[inline]
    fn add_assign(&mut self, o: Point4) {
        *self = *self + o;
    }
}

impl Sub for Point4 {
    type Output = Point4;
    #[inline]
    fn sub(self, o: Point4) -> Point4 {
        let (a, b) = (self.0, o.0);
        Point4([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
    }
}

impl Mul<f64> for Point4 {
    type Output = Point4;
    #[inline]
    fn mul(self, s: f64) -> Point4 {
        let a = self.0;
        Point4([a[0] * s, a[1] * s, a[2] * s, a[3] * s])
    }
}

impl Neg for Point4 {
    type Output = Point4;
    fn neg(self) -> Point4 {
        self * -1.0
    }
}

/// A closed ball.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point4,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point4, radius: f64) -> crate::Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(crate::Error::Domain(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Ball { center, radius })
    }

    pub fn centered(radius: f64) -> crate::Result<Self> {
        Ball::new(Point4::ORIGIN, radius)
    }

    pub fn contains(&self, p: Point4) -> bool {
        self.center.dist(p) <= self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn point() -> impl Strategy<Value = Point4> {
        prop::array::uniform4(-1e3..1e3f64).prop_map(Point4)
    }

    proptest! {
        #[test]
        fn norm_is_absolutely_homogeneous(p in point(), lambda in -50.0..50.0f64) {
            let lhs = (p * lambda).norm();
            let rhs = lambda.abs() * p.norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn norm_vanishes_only_at_origin(p in point()) {
            prop_assume!(p != Point4::ORIGIN);
            prop_assert!(p.norm() > 0.0);
        }
    }

    #[test]
    fn origin_has_zero_norm() {
        assert_eq!(Point4::ORIGIN.norm(), 0.0);
    }

    #[test]
    fn ball_rejects_nonpositive_radius() {
        assert!(Ball::centered(0.0).is_err());
        assert!(Ball::centered(-1.0).is_err());
        assert!(Ball::centered(f64::NAN).is_err());
        assert!(Ball::centered(2.0).unwrap().contains(Point4::on_axis(2.0)));
    }
}
