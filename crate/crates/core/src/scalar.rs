//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the solvers are written against: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Smallest constraint tolerance the type can honour reliably.
    const TOL_FLOOR: f64;

    /// Converts an `f64` literal, panicking only on non-representable values.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }
}

impl Real for f32 {
    const TOL_FLOOR: f64 = 1e-5;
}

impl Real for f64 {
    const TOL_FLOOR: f64 = 1e-14;
}

/// Planar vector in the object frame.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2<T> {
    pub x: T,
    pub z: T,
}

impl<T: Real> Vec2<T> {
    #[inline]
    pub fn new(x: T, z: T) -> Self {
        Self { x, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Unit vector at `angle` radians from +x.
    #[inline]
    pub fn from_angle(angle: T) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.z * o.z
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.z - self.z * o.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.z)
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.z * s)
    }

    /// Counter-clockwise rotation by `angle` radians.
    #[inline]
    pub fn rotate(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.z, s * self.x + c * self.z)
    }

    /// Rotation by +90 degrees.
    #[inline]
    pub fn perp(self) -> Self {
        Self::new(-self.z, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.z.is_finite()
    }

    /// Unsigned angle between two nonzero vectors, in radians.
    pub fn angle_to(self, o: Self) -> T {
        self.cross(o).atan2(self.dot(o)).abs()
    }

    pub fn cast<U: Real>(self) -> Vec2<U> {
        Vec2::new(U::lit(self.x.to_f64_lossy()), U::lit(self.z.to_f64_lossy()))
    }
}

impl<T: Real> std::ops::Add for Vec2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.z + o.z)
    }
}

impl<T: Real> std::ops::Sub for Vec2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.z - o.z)
    }
}

impl<T: Real> std::ops::Neg for Vec2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.z)
    }
}

impl<T: Real> std::ops::Mul<T> for Vec2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

#[inline]
pub fn deg_to_rad<T: Real>(deg: T) -> T {
    deg * T::PI() / T::lit(180.0)
}

#[inline]
pub fn rad_to_deg<T: Real>(rad: T) -> T {
    rad * T::lit(180.0) / T::PI()
}
