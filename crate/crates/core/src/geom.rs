//! Vectors, planes and angle helpers in the pitching coordinate frame.
//!
//! World axes: `x` points from the rubber toward home plate, `z` is vertical
//! up and `y = z × x` completes a right-handed frame. Lengths are in feet and
//! angles are reported in degrees.

use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

/// Norm below which a direction is treated as undefined (ft).
pub const DEGENERATE_NORM: f64 = 1e-9;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum GeomError {
    #[error("degenerate vector (norm {0:e} below threshold)")]
    DegenerateVector(f64),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[T; 3]", into = "[T; 3]")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct Vec3<T = f64> {
    pub x: T,
    pub y: T,
    pub z: T,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Vec2<T = f64> {
    pub a: T,
    pub b: T,
}

impl<T: Real> From<[T; 3]> for Vec3<T> {
    fn from([x, y, z]: [T; 3]) -> Self {
        Self { x, y, z }
    }
}

impl<T: Real> From<Vec3<T>> for [T; 3] {
    fn from(v: Vec3<T>) -> Self {
        [v.x, v.y, v.z]
    }
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn unit_x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    #[inline]
    pub fn unit_y() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    #[inline]
    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    /// Unit vector, or `DegenerateVector` when the norm is below 1e-9.
    pub fn try_normalize(self) -> Result<Self, GeomError> {
        let n = self.norm();
        if n < T::lit(DEGENERATE_NORM) || !n.is_finite() {
            return Err(GeomError::DegenerateVector(n.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(self / n)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn midpoint(self, o: Self) -> Self {
        (self + o) * T::lit(0.5)
    }

    /// Rotation about the vertical axis by `deg` degrees.
    pub fn rotate_z(self, deg: T) -> Self {
        let (s, c) = deg.to_radians().sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }

    /// Reflection across the x–z plane (`y → −y`).
    #[inline]
    pub fn reflect_y(self) -> Self {
        Self::new(self.x, -self.y, self.z)
    }

    pub fn max_abs_diff(self, o: Self) -> T {
        let d = self - o;
        d.x.abs().max(d.y.abs()).max(d.z.abs())
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        match i {
            0 => &mut self.x,
            1 => &mut self.y,
            2 => &mut self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<T: Real> Vec2<T> {
    #[inline]
    pub fn new(a: T, b: T) -> Self {
        Self { a, b }
    }

    #[inline]
    pub fn norm(self) -> T {
        self.a.hypot(self.b)
    }
}

/// Anatomical projection planes of the world frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    /// y–z plane, viewed from home plate.
    FrontalYz,
    /// x–z plane, viewed from the side.
    SagittalXz,
    /// x–y plane, viewed from above.
    HorizontalXy,
}

/// Unsigned angle between two vectors in degrees, in `[0, 180]`.
pub fn angle_between<T: Real>(u: Vec3<T>, v: Vec3<T>) -> Result<T, GeomError> {
    let u = u.try_normalize()?;
    let v = v.try_normalize()?;
    let c = u.dot(v).max(-T::one()).min(T::one());
    Ok(c.acos().to_degrees())
}

/// Drops the coordinate orthogonal to `plane`, keeping the others in axis order.
pub fn project_to_plane<T: Real>(v: Vec3<T>, plane: Plane) -> Vec2<T> {
    match plane {
        Plane::FrontalYz => Vec2::new(v.y, v.z),
        Plane::SagittalXz => Vec2::new(v.x, v.z),
        Plane::HorizontalXy => Vec2::new(v.x, v.y),
    }
}

/// `atan2(v.y, v.x)` in degrees, in `(−180, 180]`.
pub fn signed_horizontal_angle<T: Real>(v: Vec3<T>) -> Result<T, GeomError> {
    let h = Vec2::new(v.x, v.y).norm();
    if h < T::lit(DEGENERATE_NORM) || !h.is_finite() {
        return Err(GeomError::DegenerateVector(h.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(normalize_degrees(v.y.atan2(v.x).to_degrees()))
}

/// Signed angle of a projected vector measured from its second axis (the
/// vertical for frontal/sagittal projections), positive toward the first axis.
pub fn tilt_from_vertical<T: Real>(p: Vec2<T>) -> Result<T, GeomError> {
    let n = p.norm();
    if n < T::lit(DEGENERATE_NORM) || !n.is_finite() {
        return Err(GeomError::DegenerateVector(n.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(normalize_degrees(p.a.atan2(p.b).to_degrees()))
}

/// Wraps an angle into `(−180, 180]`.
pub fn normalize_degrees<T: Real>(deg: T) -> T {
    let full = T::lit(360.0);
    let half = T::lit(180.0);
    let mut a = deg % full;
    if a <= -half {
        a = a + full;
    } else if a > half {
        a = a - full;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn angle_between_examples() {
        assert!((angle_between(v(1., 0., 0.), v(0., 1., 0.)).unwrap() - 90.0).abs() < 1e-12);
        assert_eq!(angle_between(v(1., 0., 0.), v(1., 0., 0.)).unwrap(), 0.0);
        // acos(clamp(-1 - rounding)) must be exactly 180, not NaN
        let a = angle_between(v(1., 0., 0.), v(-1., 1e-20, 0.)).unwrap();
        assert!(!a.is_nan());
        assert!((a - 180.0).abs() < 1e-12);
    }

    #[test]
    fn angle_between_rejects_degenerate() {
        assert!(matches!(
            angle_between(v(0., 0., 0.), v(1., 0., 0.)),
            Err(GeomError::DegenerateVector(_))
        ));
        assert!(angle_between(v(1., 0., 0.), v(1e-10, 0., 0.)).is_err());
    }

    #[test]
    fn plane_projection_examples() {
        let p = project_to_plane(v(1., 2., 3.), Plane::SagittalXz);
        assert_eq!((p.a, p.b), (1., 3.));
        let p = project_to_plane(v(1., 2., 3.), Plane::FrontalYz);
        assert_eq!((p.a, p.b), (2., 3.));
        let p = project_to_plane(v(0., 0., 1.), Plane::HorizontalXy);
        assert_eq!((p.a, p.b), (0., 0.));
    }

    #[test]
    fn horizontal_angle_examples() {
        assert_eq!(signed_horizontal_angle(v(1., 0., 0.)).unwrap(), 0.0);
        assert_eq!(signed_horizontal_angle(v(0., -1., 0.)).unwrap(), -90.0);
        // reference table: atan2(-1, -1) = -3π/4
        assert!((signed_horizontal_angle(v(-1., -1., 0.)).unwrap() + 135.0).abs() < 1e-12);
        assert_eq!(signed_horizontal_angle(v(-1., 0., 0.)).unwrap(), 180.0);
        assert!(signed_horizontal_angle(v(0., 0., 5.)).is_err());
    }

    #[test]
    fn works_for_f32() {
        let a = angle_between(Vec3::<f32>::unit_x(), Vec3::<f32>::unit_y()).unwrap();
        assert!((a - 90.0).abs() < 1e-4);
    }

    fn arb_vec() -> impl Strategy<Value = Vec3> {
        (-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64)
            .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 1e-3)
            .prop_map(|(x, y, z)| v(x, y, z))
    }

    proptest! {
        #[test]
        fn angle_symmetric_and_scale_invariant(u in arb_vec(), w in arb_vec(), a in 0.01..100.0f64, b in 0.01..100.0f64) {
            let base = angle_between(u, w).unwrap();
            prop_assert!((base - angle_between(w, u).unwrap()).abs() < 1e-9);
            prop_assert!((base - angle_between(u * a, w * b).unwrap()).abs() < 1e-6);
        }

        #[test]
        fn angle_supplementary(u in arb_vec(), w in arb_vec()) {
            let s = angle_between(u, w).unwrap() + angle_between(u, -w).unwrap();
            prop_assert!((s - 180.0).abs() < 1e-9);
        }

        #[test]
        fn horizontal_angle_rotation_equivariant(u in arb_vec(), theta in -720.0..720.0f64) {
            prop_assume!(u.x.hypot(u.y) > 1e-3);
            let d = signed_horizontal_angle(u.rotate_z(theta)).unwrap() - signed_horizontal_angle(u).unwrap();
            let r = normalize_degrees(d - theta);
            prop_assert!(r.abs() < 1e-9 || (r.abs() - 360.0).abs() < 1e-9);
        }
    }
}
