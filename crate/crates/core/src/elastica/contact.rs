//! Contact reaction at the pinned end and the friction it requires.

use super::{ContactSolution, RodShape, RodSpec};
use crate::error::{Error, Result};
use crate::scalar::{Real, Vec2};

/// Lower bound on the friction coefficient needed to hold contact #2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FrictionBound<T> {
    Bounded(T),
    /// The force pulls the rod away from the finger; no coefficient suffices.
    Infeasible,
}

impl<T: Real> FrictionBound<T> {
    pub fn value(self) -> Option<T> {
        match self {
            FrictionBound::Bounded(v) => Some(v),
            FrictionBound::Infeasible => None,
        }
    }

    /// `true` when a finger with friction coefficient `mu` keeps the contact.
    pub fn admits(self, mu: T) -> bool {
        matches!(self, FrictionBound::Bounded(v) if v <= mu)
    }
}

/// Contact normal at the free end pointing from the finger into the rod.
///
/// This is the end tangent rotated by +90 degrees, the side that faces finger #2
/// once the strip has curled up off the table.
pub fn pressing_normal<T: Real>(shape: &RodShape<T>) -> Vec2<T> {
    shape.end_tangent().perp()
}

pub(crate) fn friction_bound<T: Real>(shape: &RodShape<T>, force: Vec2<T>) -> FrictionBound<T> {
    bound_from_frame(force, shape.end_tangent(), pressing_normal(shape))
}

fn bound_from_frame<T: Real>(force: Vec2<T>, tangent: Vec2<T>, normal: Vec2<T>) -> FrictionBound<T> {
    if force.norm() == T::zero() {
        return FrictionBound::Bounded(T::zero());
    }
    let fn_ = force.dot(normal);
    if fn_ > T::zero() {
        FrictionBound::Bounded(force.dot(tangent).abs() / fn_)
    } else {
        FrictionBound::Infeasible
    }
}

/// Reaction force on the rod from finger #2 (N), the endpoint Lagrange multipliers.
pub fn compute_contact_force<T: Real>(sol: &ContactSolution<T>, rod: &RodSpec<T>) -> Result<Vec2<T>> {
    if !sol.converged {
        return Err(Error::Unconverged);
    }
    if sol.shape.segments() != rod.segments {
        return Err(Error::InvalidSpec("solution does not belong to this rod".into()));
    }
    Ok(sol.contact_force)
}

/// `|f . t| / (f . n)`, the tangent of the angle between the force and the
/// pressing normal at contact #2.
pub fn min_friction_coefficient<T: Real>(sol: &ContactSolution<T>) -> Result<T> {
    if !sol.converged {
        return Err(Error::Unconverged);
    }
    bound_from_frame(sol.contact_force, sol.shape.end_tangent(), pressing_normal(&sol.shape))
        .value()
        .ok_or(Error::ContactInfeasible)
}
