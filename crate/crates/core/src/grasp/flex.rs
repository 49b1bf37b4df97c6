use super::Thresholds;
use crate::elastica::{
    solve_from, solve_min_energy_shape, ContactSolution, FrictionBound, RodSpec, SolveError, SolverConfig,
};
use crate::error::{Error, Result};
use crate::finger::FingertipPath;
use crate::scalar::{rad_to_deg, Real, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Termination {
    RampEnd,
    FrictionSlip,
    NoInteraction,
    StuckOnGround,
    Unconverged,
}

/// One quasistatic step with contact #2 pinned under the fingertip.
#[derive(Clone, Debug, PartialEq)]
pub struct FlexStep<T> {
    pub path_index: usize,
    pub pressure: T,
    /// Fingertip in the object frame (mm).
    pub tip: Vec2<T>,
    pub solution: ContactSolution<T>,
    pub mu_min: FrictionBound<T>,
    /// Fingertip pressed on the tabletop; the ground shares the contact load.
    pub grounded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlexTrace<T> {
    pub steps: Vec<FlexStep<T>>,
    pub termination: Termination,
    /// Path index at which the fingertip first touched the strip.
    pub touchdown: Option<usize>,
    /// Object tip to touchdown point along the strip (mm).
    pub delta: T,
}

impl<T: Real> FlexTrace<T> {
    fn empty(termination: Termination) -> Self {
        Self { steps: Vec::new(), termination, touchdown: None, delta: T::zero() }
    }

    /// Largest friction lower bound over the steps that needed friction alone.
    pub fn mu_min_max(&self) -> Option<FrictionBound<T>> {
        self.steps.iter().filter(|s| !s.grounded).map(|s| s.mu_min).fold(None, |acc, m| match (acc, m) {
            (Some(FrictionBound::Infeasible), _) | (_, FrictionBound::Infeasible) => Some(FrictionBound::Infeasible),
            (Some(FrictionBound::Bounded(a)), FrictionBound::Bounded(b)) => Some(FrictionBound::Bounded(a.max(b))),
            (None, b) => Some(b),
        })
    }
}

fn longest_run(flags: &[bool]) -> usize {
    flags.split(|f| !*f).map(<[bool]>::len).max().unwrap_or(0)
}

/// Distance from `q` to the flat strip `[0, L] x {0}`.
fn distance_to_strip<T: Real>(q: Vec2<T>, length: T) -> T {
    let x = q.x.max(T::zero()).min(length);
    (q - Vec2::new(x, T::zero())).norm()
}

/// Drives contact #2 along `path` and records the quasistatic energy and
/// friction demand at every reachable point after touchdown.
///
/// Contact #2 follows the fingertip displacement from the touchdown point and
/// cannot go below the tabletop. A fingertip pinned on the tabletop for a
/// contiguous run longer than `dwell_fraction` of the ramp is stuck there.
/// Steps where the tip rests on the tabletop are not checked against
/// `mu_available`.
pub fn simulate_flex_phase<T: Real>(
    rod: &RodSpec<T>,
    path: &FingertipPath<T>,
    mu_available: T,
    thresholds: &Thresholds<T>,
    cfg: &SolverConfig<T>,
) -> Result<FlexTrace<T>> {
    rod.validate()?;
    thresholds.validate()?;
    if !(mu_available >= T::zero()) {
        return Err(Error::InvalidSpec("available friction coefficient must be nonnegative".into()));
    }
    if path.is_empty() {
        return Ok(FlexTrace::empty(Termination::NoInteraction));
    }
    let l = rod.length;
    let touchdown = path.points.iter().position(|q| distance_to_strip(*q, l) <= thresholds.engagement_tol);
    let dwell = longest_run(&path.clamped);
    if T::from_usize_lossy(dwell) > thresholds.dwell_fraction * T::from_usize_lossy(path.len()) {
        return Ok(FlexTrace::empty(Termination::StuckOnGround));
    }
    let Some(td) = touchdown else {
        return Ok(FlexTrace::empty(Termination::NoInteraction));
    };
    let anchor = path.points[td];
    let delta = (l - anchor.x).max(T::zero());
    let mut trace = FlexTrace { steps: Vec::new(), termination: Termination::RampEnd, touchdown: Some(td), delta };
    let mut prev: Option<(ContactSolution<T>, bool)> = None;
    for i in td..path.len() {
        let q = path.points[i];
        let mut p = Vec2::new(l, T::zero()) + (q - anchor);
        // the strip end rests on the tabletop whenever the tip is at or below touchdown height
        let grounded = path.clamped[i] || p.z <= T::zero();
        p.z = p.z.max(T::zero());
        if !rod.reaches(p, cfg.tol_c) {
            continue;
        }
        // lift-off switches to the branch reached from the flat strip, the one
        // the energy field describes; tracking through it would keep the tip
        // pointing into the table
        let solved = match &prev {
            Some((s, g)) if *g == grounded => solve_from(rod, s, p, cfg),
            _ => solve_min_energy_shape(rod, p, cfg),
        };
        let sol = match solved {
            Ok(s) => s,
            Err(SolveError::NoConvergence(_)) => {
                trace.termination = Termination::Unconverged;
                return Ok(trace);
            }
            Err(e) => return Err(e.into()),
        };
        let step = FlexStep {
            path_index: i,
            pressure: path.pressures[i],
            tip: q,
            mu_min: sol.mu_min,
            solution: sol.clone(),
            grounded,
        };
        let slips = !grounded && !step.mu_min.admits(mu_available);
        trace.steps.push(step);
        prev = Some((sol, grounded));
        if slips {
            trace.termination = Termination::FrictionSlip;
            return Ok(trace);
        }
    }
    if trace.steps.is_empty() {
        trace.termination = Termination::NoInteraction;
    }
    Ok(trace)
}

/// Earliest step whose flexural energy reaches `ke_budget`, else the last step.
pub fn separation_point<T: Real>(trace: &FlexTrace<T>, ke_budget: Option<T>) -> Result<(usize, T)> {
    let last = trace.steps.len().checked_sub(1).ok_or(Error::NoEngagedSteps)?;
    let idx = match ke_budget {
        Some(b) => trace.steps.iter().position(|s| s.solution.energy >= b).unwrap_or(last),
        None => last,
    };
    Ok((idx, trace.steps[idx].solution.energy))
}

/// Angle (deg) between the fingertip recoil direction at `sep` and the
/// negative energy gradient there, and whether it clears `threshold_deg`.
pub fn flip_direction_check<T: Real>(trace: &FlexTrace<T>, sep: usize, threshold_deg: T) -> Result<(T, bool)> {
    let step = trace.steps.get(sep).ok_or(Error::NoEngagedSteps)?;
    if !step.solution.converged {
        return Err(Error::Unconverged);
    }
    let descent = -step.solution.contact_force;
    if descent.norm() == T::zero() {
        return Err(Error::ZeroGradient);
    }
    let recoil = -path_tangent(trace, sep).ok_or(Error::NoEngagedSteps)?;
    let angle = rad_to_deg(recoil.angle_to(descent));
    Ok((angle, angle >= threshold_deg))
}

/// Direction of fingertip motion arriving at step `sep`.
fn path_tangent<T: Real>(trace: &FlexTrace<T>, sep: usize) -> Option<Vec2<T>> {
    let tip = trace.steps[sep].tip;
    let back = trace.steps[..sep].iter().rev().map(|s| tip - s.tip).find(|d| d.norm() > T::zero());
    back.or_else(|| trace.steps[sep + 1..].iter().map(|s| s.tip - tip).find(|d| d.norm() > T::zero()))
}
