//! Flex-phase simulation, outcome classification, lattice sweeps and the
//! feasibility band fit.

mod classify;
mod fit;
mod flex;
mod sweep;

pub use classify::{
    classify_attempt, distance_to_polygon, pocket_contains, pocket_polygon, AttemptOutcome, OutcomeLabel,
};
pub use fit::{fit_affine, AffineFit};
pub use flex::{flip_direction_check, separation_point, simulate_flex_phase, FlexStep, FlexTrace, Termination};
pub use sweep::{
    feasible_x_interval, feasible_x_interval_from_counts, feasible_x_interval_with, sweep, Axis, Lattice, SweepResult,
    DEFAULT_FEASIBLE_FRACTION,
};

use crate::elastica::{RodSpec, SolverConfig};
use crate::error::{Error, Result};
use crate::finger::{FingerSpec, HandGeometry, PressureRamp};
use crate::scalar::Real;

/// Everything an attempt depends on except the hand placement.
#[derive(Clone, Debug, PartialEq)]
pub struct GraspModel<T> {
    pub rod: RodSpec<T>,
    pub finger: FingerSpec<T>,
    pub geometry: HandGeometry<T>,
    pub ramp: PressureRamp<T>,
    pub mu_available: T,
    pub thresholds: Thresholds<T>,
    pub solver: SolverConfig<T>,
}

impl<T: Real> GraspModel<T> {
    /// Defaults for a strip of the given length, rigidity and discretisation.
    pub fn with_rod(rod: RodSpec<T>) -> Self {
        let finger = FingerSpec::default();
        Self {
            rod,
            ramp: PressureRamp::linear(T::zero(), finger.max_pressure, 61),
            finger,
            geometry: HandGeometry::default(),
            mu_available: T::lit(0.6),
            thresholds: Thresholds::default(),
            solver: SolverConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rod.validate()?;
        self.finger.validate()?;
        self.ramp.validate(&self.finger)?;
        self.thresholds.validate()?;
        self.solver.validate()?;
        if !(self.mu_available >= T::zero()) {
            return Err(Error::InvalidSpec("available friction coefficient must be nonnegative".into()));
        }
        self.geometry.validate()?;
        Ok(())
    }
}

/// Calibration knobs of the coupled model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds<T> {
    /// Fingertip within this distance of the strip counts as touching it (mm).
    pub engagement_tol: T,
    /// Largest fraction of the ramp the tip may spend pressed on the tabletop.
    pub dwell_fraction: T,
    /// Minimum angle between recoil and the negative energy gradient (deg).
    pub flip_angle_deg: T,
    /// Kinetic energy of finger #2 (N mm); `None` separates at the ramp end.
    pub ke_budget: Option<T>,
    /// Arc samples used for the pocket polygon.
    pub pocket_samples: usize,
}

impl<T: Real> Default for Thresholds<T> {
    fn default() -> Self {
        Self {
            engagement_tol: T::lit(2.0),
            dwell_fraction: T::lit(0.5),
            flip_angle_deg: T::lit(15.0),
            ke_budget: None,
            pocket_samples: 48,
        }
    }
}

impl<T: Real> Thresholds<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.engagement_tol >= T::zero()) {
            return Err(Error::InvalidSpec("engagement tolerance must be nonnegative".into()));
        }
        if !(self.dwell_fraction >= T::zero() && self.dwell_fraction <= T::one()) {
            return Err(Error::InvalidSpec("dwell fraction must lie in [0, 1]".into()));
        }
        if !(self.flip_angle_deg >= T::zero() && self.flip_angle_deg <= T::lit(180.0)) {
            return Err(Error::InvalidSpec("flip angle threshold must lie in [0, 180] degrees".into()));
        }
        if matches!(self.ke_budget, Some(b) if !(b >= T::zero())) {
            return Err(Error::InvalidSpec("kinetic energy budget must be nonnegative".into()));
        }
        if self.pocket_samples < 3 {
            return Err(Error::InvalidSpec("pocket polygon needs at least 3 arc samples".into()));
        }
        Ok(())
    }
}
