use super::classify::{classify_attempt, AttemptOutcome, OutcomeLabel};
use super::GraspModel;
use crate::error::{Error, Result};
use crate::finger::HandConfig;
use crate::scalar::Real;
use rayon::prelude::*;

/// Evenly spaced inclusive range `min, min + step, ..., max`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis<T> {
    pub min: T,
    pub max: T,
    pub step: T,
}

impl<T: Real> Axis<T> {
    pub fn new(min: T, max: T, step: T) -> Self {
        Self { min, max, step }
    }

    pub fn single(v: T) -> Self {
        Self { min: v, max: v, step: T::one() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step > T::zero()) {
            return Err(Error::InvalidSpec(format!("invalid axis {}..{} step {}", self.min, self.max, self.step)));
        }
        if self.max < self.min {
            return Err(Error::EmptyLattice);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            return 0;
        }
        let span = ((self.max - self.min) / self.step).to_f64_lossy();
        // snap to the nearest count so 116..135 step 1 gives 20 points under rounding noise
        (span + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        self.max < self.min
    }

    pub fn value(&self, i: usize) -> T {
        self.min + self.step * T::from_usize_lossy(i)
    }

    pub fn values(&self) -> Vec<T> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }
}

/// Hand placements to sweep: `x` outermost, then `z`, then `theta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice<T> {
    pub x: Axis<T>,
    pub z: Axis<T>,
    pub theta: Axis<T>,
    pub delta: T,
}

impl<T: Real> Default for Lattice<T> {
    /// x 30..90 step 10, z 116..135 step 1, theta 0..12 step 1 (mm, mm, deg).
    fn default() -> Self {
        Self {
            x: Axis::new(T::lit(30.0), T::lit(90.0), T::lit(10.0)),
            z: Axis::new(T::lit(116.0), T::lit(135.0), T::one()),
            theta: Axis::new(T::zero(), T::lit(12.0), T::one()),
            delta: T::zero(),
        }
    }
}

impl<T: Real> Lattice<T> {
    pub fn single(x: T, z: T, theta_deg: T) -> Self {
        Self { x: Axis::single(x), z: Axis::single(z), theta: Axis::single(theta_deg), delta: T::zero() }
    }

    pub fn validate(&self) -> Result<()> {
        self.x.validate()?;
        self.z.validate()?;
        self.theta.validate()?;
        if !(self.delta >= T::zero()) {
            return Err(Error::InvalidSpec("delta must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.z.len() * self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn config(&self, idx: usize) -> HandConfig<T> {
        let (nz, nt) = (self.z.len(), self.theta.len());
        let (i, rem) = (idx / (nz * nt), idx % (nz * nt));
        let mut cfg = HandConfig::new(self.x.value(i), self.z.value(rem / nt), self.theta.value(rem % nt));
        cfg.delta = self.delta;
        cfg
    }

    pub fn configs(&self) -> Vec<HandConfig<T>> {
        (0..self.len()).map(|i| self.config(i)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult<T> {
    pub lattice: Lattice<T>,
    /// One entry per lattice point in `Lattice::config` order.
    pub outcomes: Vec<AttemptOutcome<T>>,
    pub success_mask: Vec<bool>,
}

impl<T: Real> SweepResult<T> {
    /// Builds a result from labels alone, e.g. for synthetic studies.
    pub fn from_outcomes(lattice: Lattice<T>, outcomes: Vec<AttemptOutcome<T>>) -> Result<Self> {
        if outcomes.len() != lattice.len() {
            return Err(Error::InvalidSpec(format!(
                "{} outcomes for {} lattice points",
                outcomes.len(),
                lattice.len()
            )));
        }
        let success_mask = outcomes.iter().map(AttemptOutcome::is_success).collect();
        Ok(Self { lattice, outcomes, success_mask })
    }

    pub fn configs(&self) -> impl Iterator<Item = HandConfig<T>> + '_ {
        (0..self.outcomes.len()).map(|i| self.lattice.config(i))
    }

    /// `(z, theta)` of every success.
    pub fn success_points(&self) -> Vec<(T, T)> {
        self.configs().zip(&self.success_mask).filter(|(_, s)| **s).map(|(c, _)| (c.z, c.theta_deg)).collect()
    }

    pub fn count(&self, label: OutcomeLabel) -> usize {
        self.outcomes.iter().filter(|o| o.label == label).count()
    }

    /// Success count for each x value of the lattice.
    pub fn successes_per_x(&self) -> Vec<(T, usize)> {
        let block = self.lattice.z.len() * self.lattice.theta.len();
        self.lattice
            .x
            .values()
            .into_iter()
            .enumerate()
            .map(|(i, x)| (x, self.success_mask[i * block..(i + 1) * block].iter().filter(|s| **s).count()))
            .collect()
    }
}

/// Classifies every lattice point. The result does not depend on the rayon
/// pool size.
pub fn sweep<T: Real>(model: &GraspModel<T>, lattice: &Lattice<T>) -> Result<SweepResult<T>> {
    model.validate()?;
    lattice.validate()?;
    if lattice.is_empty() {
        return Err(Error::EmptyLattice);
    }
    let outcomes = (0..lattice.len())
        .into_par_iter()
        .map(|i| classify_attempt(model, &lattice.config(i)))
        .collect::<Result<Vec<_>>>()?;
    SweepResult::from_outcomes(*lattice, outcomes)
}

/// Share of the best per-x success count an x value needs to count as feasible.
pub const DEFAULT_FEASIBLE_FRACTION: f64 = 0.8;

/// Widest contiguous run of x values whose success counts reach
/// `DEFAULT_FEASIBLE_FRACTION` of the best one; ties go to the smaller x.
pub fn feasible_x_interval<T: Real>(result: &SweepResult<T>) -> Result<(T, T)> {
    feasible_x_interval_with(result, T::lit(DEFAULT_FEASIBLE_FRACTION))
}

pub fn feasible_x_interval_with<T: Real>(result: &SweepResult<T>, fraction: T) -> Result<(T, T)> {
    feasible_x_interval_from_counts(&result.successes_per_x(), fraction)
}

/// The interval rule applied to `(x, success count)` pairs in increasing x.
pub fn feasible_x_interval_from_counts<T: Real>(counts: &[(T, usize)], fraction: T) -> Result<(T, T)> {
    let best = counts.iter().map(|c| c.1).max().unwrap_or(0);
    if best == 0 {
        return Err(Error::NoSuccesses);
    }
    let cut = fraction * T::from_usize_lossy(best);
    let ok: Vec<bool> = counts.iter().map(|(_, c)| *c > 0 && T::from_usize_lossy(*c) >= cut).collect();
    let mut best_run: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < ok.len() {
        if !ok[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < ok.len() && ok[i] {
            i += 1;
        }
        if best_run.is_none_or(|(s, e)| i - start > e - s) {
            best_run = Some((start, i));
        }
    }
    let (s, e) = best_run.ok_or(Error::NoSuccesses)?;
    Ok((counts[s].0, counts[e - 1].0))
}
