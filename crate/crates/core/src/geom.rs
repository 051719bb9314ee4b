//! Planar vectors, line of sight and the perpendicular used by the evader's
//! randomised side-step.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Absolute tolerance used when checking that a direction is a unit vector.
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// A point or velocity in the plane.
///
/// Serialised as a two-element JSON array `[x, y]`; deserialisation rejects
/// non-finite components.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    /// Unchecked constructor for values computed from finite inputs.
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Checked constructor: rejects NaN and infinite components.
    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(Error::InvalidArgument(format!(
                "vector components must be finite, got ({x}, {y})"
            )))
        }
    }

    /// Unit vector at `angle` radians from the x axis.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (other - self).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// `self` scaled to unit length, or `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        if n > 0.0 && n.is_finite() {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    /// Counter-clockwise rotation by a right angle.
    pub fn rotate_ccw(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

impl TryFrom<[f64; 2]> for Vec2 {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Vec2::try_new(v[0], v[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Which way the evader side-steps relative to the line of sight.
///
/// `Ccw` is θ = +1 (counter-clockwise perpendicular), `Cw` is θ = −1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Ccw,
    Cw,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Ccw => 1.0,
            Side::Cw => -1.0,
        }
    }

    pub fn from_bit(bit: bool) -> Side {
        if bit {
            Side::Cw
        } else {
            Side::Ccw
        }
    }
}

/// Unit vector from the pursuer to the evader.
pub fn line_of_sight(pursuer: Vec2, evader: Vec2) -> Result<Vec2> {
    (evader - pursuer)
        .normalized()
        .ok_or(Error::DegenerateDirection)
}

/// `θ·r⊥`, with `r⊥` the counter-clockwise rotation of the unit vector `r`.
pub fn perp(r: Vec2, side: Side) -> Result<Vec2> {
    if !r.is_finite() || (r.norm() - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "perp expects a unit vector, got |r| = {}",
            r.norm()
        )));
    }
    Ok(r.rotate_ccw() * side.sign())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn line_of_sight_examples() {
        let r = line_of_sight(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(r, Vec2::new(1.0, 0.0));
        let r = line_of_sight(Vec2::new(0.0, 0.0), Vec2::new(3.0, 4.0)).unwrap();
        assert_abs_diff_eq!(r.x, 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(r.y, 0.8, epsilon = 1e-15);
        assert_eq!(
            line_of_sight(Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)),
            Err(Error::DegenerateDirection)
        );
    }

    #[test]
    fn perp_examples() {
        let x = Vec2::new(1.0, 0.0);
        assert_eq!(perp(x, Side::Ccw).unwrap(), Vec2::new(0.0, 1.0));
        assert_eq!(perp(x, Side::Cw).unwrap(), Vec2::new(0.0, -1.0));
        let p = perp(Vec2::new(0.6, 0.8), Side::Ccw).unwrap();
        assert_abs_diff_eq!(p.x, -0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y, 0.6, epsilon = 1e-15);
        assert!(matches!(
            perp(Vec2::new(2.0, 0.0), Side::Ccw),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn json_rejects_non_finite() {
        let v: Vec2 = serde_json::from_str("[1.5, -2]").unwrap();
        assert_eq!(v, Vec2::new(1.5, -2.0));
        assert_eq!(serde_json::to_string(&v).unwrap(), "[1.5,-2.0]");
        assert!(Vec2::try_new(f64::NAN, 0.0).is_err());
        assert!(Vec2::try_new(0.0, f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn perp_is_orthogonal_unit(angle in 0.0..std::f64::consts::TAU, ccw in any::<bool>()) {
            let r = Vec2::from_angle(angle);
            let side = if ccw { Side::Ccw } else { Side::Cw };
            let p = perp(r, side).unwrap();
            prop_assert!(p.dot(r).abs() <= 1e-12);
            prop_assert!((p.norm() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn line_of_sight_is_unit(ax in -10.0..10.0f64, ay in -10.0..10.0f64,
                                 bx in -10.0..10.0f64, by in -10.0..10.0f64) {
            prop_assume!(Vec2::new(ax, ay).distance(Vec2::new(bx, by)) > 1e-6);
            let r = line_of_sight(Vec2::new(ax, ay), Vec2::new(bx, by)).unwrap();
            prop_assert!((r.norm() - 1.0).abs() <= 1e-12);
        }
    }
}
