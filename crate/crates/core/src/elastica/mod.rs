//! Planar inextensible elastica clamped at contact #1 and pinned at contact #2.
//!
//! The rod is discretised by its tangent angle at `N + 1` nodes. Segment `j`
//! points along `phi[j]`, so the node positions are
//! `r_i = h * sum_{j<i} (cos phi_j, sin phi_j)` and arc length is preserved by
//! construction. The flexural energy is `U = R_f / (2 h) * sum (phi_{i+1} - phi_i)^2`.

mod contact;
mod field;
mod solver;

pub use contact::{compute_contact_force, min_friction_coefficient, FrictionBound};
pub use field::{
    compute_energy_field, energy_gradient_field, finite_difference_gradient, EnergyField, FieldCell, GridSpec,
};
pub use solver::{solve_from, solve_min_energy_shape, SolveError};

use crate::error::{Error, Result};
use crate::scalar::{Real, Vec2};

/// Deformable linear object: arc length, flexural rigidity and discretisation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RodSpec<T> {
    /// Arc length from contact #1 to contact #2 (mm).
    pub length: T,
    /// Flexural rigidity (N mm^2).
    pub rigidity: T,
    pub segments: usize,
}

impl<T: Real> RodSpec<T> {
    pub const MIN_SEGMENTS: usize = 8;

    pub fn new(length: T, rigidity: T, segments: usize) -> Result<Self> {
        let spec = Self { length, rigidity, segments };
        spec.validate()?;
        Ok(spec)
    }

    /// Unit length and unit rigidity.
    pub fn nondimensional(segments: usize) -> Result<Self> {
        Self::new(T::one(), T::one(), segments)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > T::zero()) || !self.length.is_finite() {
            return Err(Error::InvalidSpec(format!("rod length must be positive, got {}", self.length)));
        }
        if !(self.rigidity > T::zero()) || !self.rigidity.is_finite() {
            return Err(Error::InvalidSpec(format!("flexural rigidity must be positive, got {}", self.rigidity)));
        }
        if self.segments < Self::MIN_SEGMENTS {
            return Err(Error::InvalidSpec(format!(
                "need at least {} segments, got {}",
                Self::MIN_SEGMENTS,
                self.segments
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn seg_len(&self) -> T {
        self.length / T::from_usize_lossy(self.segments)
    }

    /// Whether the discrete rod can put its free end at `endpoint`, with a
    /// relative slack on the radius.
    ///
    /// The first segment lies flat on the table, so the reachable set is the
    /// upper half of the disk of radius `L - h` about `(h, 0)`; it tends to the
    /// half-disk of radius `L` as the segment count grows.
    pub fn reaches(&self, endpoint: Vec2<T>, rel_slack: T) -> bool {
        let h = self.seg_len();
        endpoint.is_finite()
            && endpoint.z >= T::zero()
            && (endpoint - Vec2::new(h, T::zero())).norm() <= (self.length - h) + self.length * rel_slack
    }
}

/// Discretised rod shape in tangent-angle form. `phi[0]` is the clamped tangent.
#[derive(Clone, Debug, PartialEq)]
pub struct RodShape<T> {
    pub phi: Vec<T>,
    pub seg_len: T,
}

impl<T: Real> RodShape<T> {
    pub fn straight(segments: usize, seg_len: T) -> Self {
        Self { phi: vec![T::zero(); segments + 1], seg_len }
    }

    /// Builds a shape from a tangent-angle function sampled at `s_i = i h`.
    pub fn from_fn(segments: usize, length: T, f: impl Fn(T) -> T) -> Self {
        let h = length / T::from_usize_lossy(segments);
        let phi = (0..=segments).map(|i| f(h * T::from_usize_lossy(i))).collect();
        Self { phi, seg_len: h }
    }

    pub fn segments(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn length(&self) -> T {
        self.seg_len * T::from_usize_lossy(self.segments())
    }

    /// Node positions `r_0 = 0, ..., r_N` (mm).
    pub fn nodes(&self) -> Vec<Vec2<T>> {
        let mut out = Vec::with_capacity(self.phi.len());
        let mut r = Vec2::zero();
        out.push(r);
        for &p in &self.phi[..self.phi.len() - 1] {
            r = r + Vec2::from_angle(p).scale(self.seg_len);
            out.push(r);
        }
        out
    }

    pub fn endpoint(&self) -> Vec2<T> {
        self.phi[..self.phi.len() - 1].iter().fold(Vec2::zero(), |r, &p| r + Vec2::from_angle(p)).scale(self.seg_len)
    }

    /// Unit tangent at the free end.
    pub fn end_tangent(&self) -> Vec2<T> {
        Vec2::from_angle(self.phi[self.phi.len() - 1])
    }

    /// `kappa_i = (phi_{i+1} - phi_i) / h` for `i = 0..N`.
    pub fn curvatures(&self) -> Vec<T> {
        self.phi.windows(2).map(|w| (w[1] - w[0]) / self.seg_len).collect()
    }

    /// Flexural energy for rigidity `rigidity`.
    pub fn energy(&self, rigidity: T) -> T {
        let sum = self.phi.windows(2).fold(T::zero(), |acc, w| acc + (w[1] - w[0]) * (w[1] - w[0]));
        T::lit(0.5) * rigidity * sum / self.seg_len
    }

    pub fn is_finite(&self) -> bool {
        self.phi.iter().all(|p| p.is_finite()) && self.seg_len.is_finite()
    }
}

/// Strict sign changes of the discrete curvature, ignoring `|kappa| <= noise_floor`.
pub fn inflection_count_with_floor<T: Real>(shape: &RodShape<T>, noise_floor: T) -> usize {
    let mut last_sign: Option<bool> = None;
    let mut changes = 0;
    for k in shape.curvatures() {
        if k.abs() <= noise_floor {
            continue;
        }
        let positive = k > T::zero();
        if let Some(prev) = last_sign {
            if prev != positive {
                changes += 1;
            }
        }
        last_sign = Some(positive);
    }
    changes
}

/// Inflection count with the default noise floor `tol_g / h`.
pub fn inflection_count<T: Real>(shape: &RodShape<T>) -> usize {
    let floor = SolverConfig::<T>::default().tol_g / shape.seg_len;
    inflection_count_with_floor(shape, floor)
}

/// Tolerances and iteration limits for the continuation solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T> {
    /// Endpoint constraint tolerance as a fraction of the rod length.
    pub tol_c: T,
    /// Stationarity tolerance on the scaled KKT gradient.
    pub tol_g: T,
    /// Newton iterations allowed per continuation step.
    pub max_iter: usize,
    /// Nominal number of homotopy steps from the flat state.
    pub continuation_steps: usize,
    /// Seed for randomised multi-start cross-checks.
    pub restart_seed: u64,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            tol_c: T::lit(1e-8_f64.max(T::TOL_FLOOR)),
            tol_g: T::lit(1e-6_f64.max(100.0 * T::TOL_FLOOR)),
            max_iter: 200,
            continuation_steps: 20,
            restart_seed: 0x5eed,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_c > T::zero()) || !(self.tol_g > T::zero()) {
            return Err(Error::InvalidSpec("solver tolerances must be positive".into()));
        }
        if self.continuation_steps == 0 {
            return Err(Error::InvalidSpec("continuation_steps must be at least 1".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidSpec("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// Minimum-energy shape pinned at a given endpoint, with its reaction force.
#[derive(Clone, Debug, PartialEq)]
pub struct ContactSolution<T> {
    pub shape: RodShape<T>,
    /// Prescribed endpoint (mm).
    pub endpoint: Vec2<T>,
    /// Flexural energy (N mm).
    pub energy: T,
    /// Force the finger applies on the rod (N); equals dU*/d(endpoint).
    pub contact_force: Vec2<T>,
    pub mu_min: FrictionBound<T>,
    /// Max endpoint mismatch as a fraction of the rod length.
    pub constraint_residual: T,
    /// Scaled max-norm of the Lagrangian gradient.
    pub stationarity_residual: T,
    pub iterations: usize,
    pub converged: bool,
    /// Endpoint within `tol_c` of full extension away from the axis.
    pub near_singular: bool,
}

impl<T: Real> ContactSolution<T> {
    /// Curvature at the free end (mm^-1).
    pub fn end_curvature(&self) -> T {
        let k = self.shape.curvatures();
        k[k.len() - 1]
    }
}
