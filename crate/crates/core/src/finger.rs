//! Constant-curvature soft finger: pressure to curvature, arc kinematics, hand
//! placement and the ground-clamped nominal fingertip path.
//!
//! Frames: the object frame has its origin at contact #1 with +x toward the
//! object tip and +z up; the tabletop is `z = 0`.

use crate::error::{Error, Result};
use crate::scalar::{deg_to_rad, Real, Vec2};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FingerSpec<T> {
    /// Finger length (mm).
    pub arc_length: T,
    /// Curvature per unit pressure (mm^-1 MPa^-1).
    pub pressure_gain: T,
    /// Curvature at zero pressure (mm^-1).
    pub curvature_offset: T,
    /// Operating pressure cap (MPa).
    pub max_pressure: T,
}

impl<T: Real> Default for FingerSpec<T> {
    fn default() -> Self {
        Self {
            arc_length: T::lit(90.0),
            pressure_gain: T::lit(0.1),
            curvature_offset: T::zero(),
            max_pressure: T::lit(0.3),
        }
    }
}

impl<T: Real> FingerSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.arc_length > T::zero()) || !(self.max_pressure > T::zero()) {
            return Err(Error::InvalidSpec("finger length and max pressure must be positive".into()));
        }
        // affine in pressure, so the endpoints bound the whole range
        let lo = self.curvature_offset;
        let hi = self.pressure_gain * self.max_pressure + self.curvature_offset;
        if lo < T::zero() || hi < T::zero() || !hi.is_finite() {
            return Err(Error::InvalidSpec("finger curvature must stay nonnegative over the pressure range".into()));
        }
        Ok(())
    }

    pub fn curvature_at(&self, pressure: T) -> T {
        self.pressure_gain * pressure + self.curvature_offset
    }
}

/// Curvature `a P + b` of the finger at pressure `pressure` (MPa).
pub fn curvature_from_pressure<T: Real>(finger: &FingerSpec<T>, pressure: T) -> Result<T> {
    if !(pressure >= T::zero() && pressure <= finger.max_pressure) {
        return Err(Error::PressureOutOfRange {
            pressure: pressure.to_f64_lossy(),
            max: finger.max_pressure.to_f64_lossy(),
        });
    }
    Ok(finger.curvature_at(pressure))
}

/// Which side of the base tangent the palm is on; the finger curls toward it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PalmSide {
    /// Counter-clockwise curl.
    Left,
    /// Clockwise curl.
    Right,
}

/// Finger base: position, tangent heading (rad from +x) and curl side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasePose<T> {
    pub origin: Vec2<T>,
    pub heading: T,
    pub palm: PalmSide,
}

impl<T: Real> BasePose<T> {
    /// Maps a point from the base frame (x along the tangent, y toward the palm).
    pub fn to_world(&self, local: Vec2<T>) -> Vec2<T> {
        let t = Vec2::from_angle(self.heading);
        let n = match self.palm {
            PalmSide::Left => t.perp(),
            PalmSide::Right => -t.perp(),
        };
        self.origin + t.scale(local.x) + n.scale(local.z)
    }

    /// Rigid rotation by `angle` about `pivot`.
    pub fn rotated_about(&self, pivot: Vec2<T>, angle: T) -> Self {
        Self { origin: pivot + (self.origin - pivot).rotate(angle), heading: self.heading + angle, palm: self.palm }
    }
}

/// Tip of a uniform arc of length `length` and curvature `kappa` in the base
/// frame, with a series expansion near `kappa = 0`.
pub fn arc_offset<T: Real>(length: T, kappa: T) -> Vec2<T> {
    let a = kappa * length;
    if a.abs() < T::lit(1e-6) {
        let a2 = a * a;
        Vec2::new(length * (T::one() - a2 / T::lit(6.0)), length * a * (T::lit(0.5) - a2 / T::lit(24.0)))
    } else {
        let half = (a * T::lit(0.5)).sin();
        Vec2::new(a.sin() / kappa, T::lit(2.0) * half * half / kappa)
    }
}

/// Fingertip position for curvature `kappa` (mm^-1) from `base`.
pub fn fingertip_position<T: Real>(finger: &FingerSpec<T>, kappa: T, base: &BasePose<T>) -> Vec2<T> {
    base.to_world(arc_offset(finger.arc_length, kappa))
}

/// Points along the finger arc from base to tip.
pub fn finger_arc<T: Real>(finger: &FingerSpec<T>, kappa: T, base: &BasePose<T>, samples: usize) -> Vec<Vec2<T>> {
    let n = samples.max(2);
    (0..n)
        .map(|i| {
            let s = finger.arc_length * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1);
            base.to_world(arc_offset(s, kappa))
        })
        .collect()
}

/// Hand placement. `x` and `z` locate the wrist point relative to the object
/// tip (`x` toward contact #1, `z` up); `theta` tilts the hand counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandConfig<T> {
    /// Horizontal distance from the object tip (mm).
    pub x: T,
    /// Height above the tabletop (mm).
    pub z: T,
    /// Wrist angle (deg).
    pub theta_deg: T,
    /// Extra positioning margin between the object tip and the finger #2 contact (mm).
    pub delta: T,
    /// Angle between the two finger bases (deg).
    pub inter_finger_angle_deg: T,
}

impl<T: Real> HandConfig<T> {
    pub fn new(x: T, z: T, theta_deg: T) -> Self {
        Self { x, z, theta_deg, delta: T::zero(), inter_finger_angle_deg: T::lit(90.0) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= T::zero()) {
            return Err(Error::InvalidSpec("delta must be nonnegative".into()));
        }
        if !(self.x.is_finite() && self.z.is_finite() && self.theta_deg.is_finite()) {
            return Err(Error::InvalidSpec("hand configuration must be finite".into()));
        }
        if !(self.inter_finger_angle_deg > T::zero() && self.inter_finger_angle_deg < T::lit(180.0)) {
            return Err(Error::InvalidSpec("inter-finger angle must lie in (0, 180) degrees".into()));
        }
        Ok(())
    }

    /// Inside the tested experiment extents (x 30..90 mm, z 116..135 mm, theta 0..12 deg).
    pub fn within_experiment_range(&self) -> bool {
        let inside = |v: T, lo: f64, hi: f64| v >= T::lit(lo) && v <= T::lit(hi);
        inside(self.x, 30.0, 90.0) && inside(self.z, 116.0, 135.0) && inside(self.theta_deg, 0.0, 12.0)
    }
}

/// Fixed hand dimensions that are not part of the tested configuration.
///
/// Finger #2 is turned `inter_finger_angle` counter-clockwise from finger #1.
/// With the defaults both bases hang 60 mm below the wrist point, 30 mm apart,
/// finger #1 pointing 20 degrees past vertical away from the object tip and
/// finger #2 pointing 20 degrees below horizontal toward it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandGeometry<T> {
    /// Finger #1 base relative to the wrist point at zero tilt (mm).
    pub finger1_base: Vec2<T>,
    /// Finger #2 base relative to the wrist point at zero tilt (mm).
    pub finger2_base: Vec2<T>,
    /// Base heading of finger #1 at zero tilt (deg).
    pub finger1_heading_deg: T,
    /// Contact #1 to object tip distance (mm).
    pub object_length: T,
}

impl<T: Real> Default for HandGeometry<T> {
    fn default() -> Self {
        Self {
            finger1_base: Vec2::new(T::lit(-15.0), T::lit(-60.0)),
            finger2_base: Vec2::new(T::lit(15.0), T::lit(-60.0)),
            finger1_heading_deg: T::lit(-110.0),
            object_length: T::lit(125.0),
        }
    }
}

impl<T: Real> HandGeometry<T> {
    pub fn object_tip(&self) -> Vec2<T> {
        Vec2::new(self.object_length, T::zero())
    }

    pub fn validate(&self) -> Result<()> {
        let finite =
            self.finger1_base.is_finite() && self.finger2_base.is_finite() && self.finger1_heading_deg.is_finite();
        if !finite || !(self.object_length > T::zero()) {
            return Err(Error::InvalidSpec("hand geometry must be finite with a positive object length".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HandPoses<T> {
    pub wrist: Vec2<T>,
    pub finger1: BasePose<T>,
    pub finger2: BasePose<T>,
}

/// Base poses of both fingers in the object frame. The wrist point sits at
/// `(L - x, z)`; tilting by `theta` rotates the whole hand counter-clockwise
/// about it. Finger #1 curls counter-clockwise and finger #2 clockwise, toward
/// each other.
pub fn hand_to_base_poses<T: Real>(cfg: &HandConfig<T>, geom: &HandGeometry<T>) -> HandPoses<T> {
    let wrist = geom.object_tip() + Vec2::new(-cfg.x, cfg.z);
    let h1 = deg_to_rad(geom.finger1_heading_deg);
    let f1 = BasePose { origin: wrist + geom.finger1_base, heading: h1, palm: PalmSide::Left };
    let f2 = BasePose {
        origin: wrist + geom.finger2_base,
        heading: h1 + deg_to_rad(cfg.inter_finger_angle_deg),
        palm: PalmSide::Right,
    };
    let tilt = deg_to_rad(cfg.theta_deg);
    HandPoses { wrist, finger1: f1.rotated_about(wrist, tilt), finger2: f2.rotated_about(wrist, tilt) }
}

/// Monotone pressure schedule (MPa).
#[derive(Clone, Debug, PartialEq)]
pub struct PressureRamp<T> {
    pub samples: Vec<T>,
}

impl<T: Real> PressureRamp<T> {
    /// `count` evenly spaced pressures from `start` to `end` inclusive.
    pub fn linear(start: T, end: T, count: usize) -> Self {
        let n = count.max(1);
        let samples = (0..n)
            .map(|i| {
                if n == 1 {
                    start
                } else {
                    start + (end - start) * T::from_usize_lossy(i) / T::from_usize_lossy(n - 1)
                }
            })
            .collect();
        Self { samples }
    }

    pub fn validate(&self, finger: &FingerSpec<T>) -> Result<()> {
        let ok = self.samples.len() >= 2
            && self.samples.iter().all(|p| *p >= T::zero() && *p <= finger.max_pressure)
            && self.samples.windows(2).all(|w| w[1] >= w[0]);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidRamp { max: finger.max_pressure.to_f64_lossy() })
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Nominal fingertip trajectory of finger #2 in the object frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FingertipPath<T> {
    pub pressures: Vec<T>,
    pub points: Vec<Vec2<T>>,
    /// The unconstrained tip was below the tabletop and has been projected onto it.
    pub clamped: Vec<bool>,
    /// Finger #2 base, kept for pocket geometry.
    pub base: BasePose<T>,
}

impl<T: Real> FingertipPath<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn clamped_fraction(&self) -> T {
        let n = self.clamped.iter().filter(|c| **c).count();
        T::from_usize_lossy(n) / T::from_usize_lossy(self.clamped.len().max(1))
    }
}

/// Tip of finger #2 along `ramp`, projected onto the tabletop where it would
/// penetrate it.
pub fn nominal_tip_path<T: Real>(
    finger: &FingerSpec<T>,
    cfg: &HandConfig<T>,
    ramp: &PressureRamp<T>,
    geom: &HandGeometry<T>,
) -> Result<FingertipPath<T>> {
    finger.validate()?;
    cfg.validate()?;
    ramp.validate(finger)?;
    let base = hand_to_base_poses(cfg, geom).finger2;
    let mut points = Vec::with_capacity(ramp.len());
    let mut clamped = Vec::with_capacity(ramp.len());
    for &p in &ramp.samples {
        let mut tip = fingertip_position(finger, curvature_from_pressure(finger, p)?, &base);
        let below = tip.z < T::zero();
        if below {
            tip.z = T::zero();
        }
        points.push(tip);
        clamped.push(below);
    }
    Ok(FingertipPath { pressures: ramp.samples.clone(), points, clamped, base })
}
