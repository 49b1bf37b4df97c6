use super::flex::{flip_direction_check, separation_point, simulate_flex_phase, Termination};
use super::GraspModel;
use crate::elastica::FrictionBound;
use crate::error::{Error, Result};
use crate::finger::{curvature_from_pressure, finger_arc, nominal_tip_path, FingerSpec, HandConfig};
use crate::scalar::{Real, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OutcomeLabel {
    Success,
    NoInteraction,
    StuckOnGround,
    PocketMiss,
    FrictionSlip,
    Unconverged,
}

impl OutcomeLabel {
    pub const ALL: [OutcomeLabel; 6] = [
        OutcomeLabel::Success,
        OutcomeLabel::NoInteraction,
        OutcomeLabel::StuckOnGround,
        OutcomeLabel::PocketMiss,
        OutcomeLabel::FrictionSlip,
        OutcomeLabel::Unconverged,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeLabel::Success => "Success",
            OutcomeLabel::NoInteraction => "NoInteraction",
            OutcomeLabel::StuckOnGround => "StuckOnGround",
            OutcomeLabel::PocketMiss => "PocketMiss",
            OutcomeLabel::FrictionSlip => "FrictionSlip",
            OutcomeLabel::Unconverged => "Unconverged",
        }
    }
}

impl std::fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for OutcomeLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown outcome label {s:?}")))
    }
}

/// Result of one grasp attempt. Quantities are `None` when the stage that
/// produces them was not reached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttemptOutcome<T> {
    pub label: OutcomeLabel,
    /// Flexural energy stored at separation (N mm).
    pub energy_at_separation: Option<T>,
    /// Largest friction demand over the friction-supported flex steps.
    pub mu_min_max: Option<FrictionBound<T>>,
    /// Recoil vs. negative gradient angle (deg).
    pub flip_angle_deg: Option<T>,
}

impl<T: Real> AttemptOutcome<T> {
    fn bare(label: OutcomeLabel) -> Self {
        Self { label, energy_at_separation: None, mu_min_max: None, flip_angle_deg: None }
    }

    pub fn is_success(&self) -> bool {
        self.label == OutcomeLabel::Success
    }
}

/// Region enclosed by the finger #2 arc at curvature `kappa` and its chord.
pub fn pocket_polygon<T: Real>(
    finger: &FingerSpec<T>,
    kappa: T,
    base: &crate::finger::BasePose<T>,
    samples: usize,
) -> Vec<Vec2<T>> {
    finger_arc(finger, kappa, base, samples.max(3))
}

/// Even-odd point-in-polygon test; the closing edge is implicit.
pub fn pocket_contains<T: Real>(polygon: &[Vec2<T>], q: Vec2<T>) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[j]);
        if (a.z > q.z) != (b.z > q.z) {
            let x = a.x + (q.z - a.z) * (b.x - a.x) / (b.z - a.z);
            if q.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `q` to the closed polygon boundary.
pub fn distance_to_polygon<T: Real>(polygon: &[Vec2<T>], q: Vec2<T>) -> T {
    let n = polygon.len();
    (0..n)
        .map(|i| {
            let (a, b) = (polygon[i], polygon[(i + 1) % n]);
            let ab = b - a;
            let len2 = ab.dot(ab);
            let s = if len2 > T::zero() { ((q - a).dot(ab) / len2).max(T::zero()).min(T::one()) } else { T::zero() };
            (q - (a + ab.scale(s))).norm()
        })
        .fold(T::infinity(), T::min)
}

/// Runs one attempt end to end and labels it by the first stage that fails.
pub fn classify_attempt<T: Real>(model: &GraspModel<T>, cfg: &HandConfig<T>) -> Result<AttemptOutcome<T>> {
    let GraspModel { rod, finger, geometry, ramp, mu_available, thresholds, solver } = model;
    let mu_available = *mu_available;
    let path = nominal_tip_path(finger, cfg, ramp, geometry)?;
    let trace = simulate_flex_phase(rod, &path, mu_available, thresholds, solver)?;
    let mu_min_max = trace.mu_min_max();
    let label = match trace.termination {
        Termination::RampEnd => None,
        Termination::FrictionSlip => Some(OutcomeLabel::FrictionSlip),
        Termination::NoInteraction => Some(OutcomeLabel::NoInteraction),
        Termination::StuckOnGround => Some(OutcomeLabel::StuckOnGround),
        Termination::Unconverged => Some(OutcomeLabel::Unconverged),
    };
    if let Some(label) = label {
        return Ok(AttemptOutcome { mu_min_max, ..AttemptOutcome::bare(label) });
    }
    let (sep, energy) = separation_point(&trace, thresholds.ke_budget)?;
    let mut out = AttemptOutcome {
        mu_min_max,
        energy_at_separation: Some(energy),
        ..AttemptOutcome::bare(OutcomeLabel::PocketMiss)
    };
    if !(energy > T::zero()) {
        return Ok(out);
    }
    let flips = match flip_direction_check(&trace, sep, thresholds.flip_angle_deg) {
        Ok((angle, ok)) => {
            out.flip_angle_deg = Some(angle);
            ok
        }
        Err(Error::ZeroGradient) => false,
        Err(e) => return Err(e),
    };
    if !flips {
        return Ok(out);
    }
    let step = &trace.steps[sep];
    let kappa = curvature_from_pressure(finger, step.pressure)?;
    let pocket = pocket_polygon(finger, kappa, &path.base, thresholds.pocket_samples);
    let reach = cfg.delta + trace.delta;
    let object_tip = step.tip + step.solution.shape.end_tangent().scale(reach);
    // the fingertip itself is a pocket vertex, so a vanishing offset counts as captured
    let on_edge = distance_to_polygon(&pocket, object_tip) <= T::lit(T::TOL_FLOOR.sqrt()) * rod.length;
    if object_tip.z >= T::zero() && (on_edge || pocket_contains(&pocket, object_tip)) {
        out.label = OutcomeLabel::Success;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_round_trip() {
        for l in OutcomeLabel::ALL {
            assert_eq!(l.as_str().parse::<OutcomeLabel>().unwrap(), l);
        }
        assert!("Bogus".parse::<OutcomeLabel>().is_err());
    }

    #[test]
    fn square_membership() {
        let sq = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        assert!(pocket_contains(&sq, Vec2::new(0.5, 0.5)));
        assert!(!pocket_contains(&sq, Vec2::new(1.5, 0.5)));
        assert!(!pocket_contains(&sq[..2], Vec2::new(0.5, 0.0)));
    }

    #[test]
    fn half_curled_finger_encloses_its_centre_side() {
        let f = FingerSpec::<f64>::default();
        let base = crate::finger::BasePose { origin: Vec2::zero(), heading: 0.0, palm: crate::finger::PalmSide::Left };
        let kappa = std::f64::consts::PI / f.arc_length;
        let poly = pocket_polygon(&f, kappa, &base, 64);
        let r = 1.0 / kappa;
        assert!(pocket_contains(&poly, Vec2::new(0.5 * r, r)));
        assert!(!pocket_contains(&poly, Vec2::new(0.0, -1.0)));
        assert!(!pocket_contains(&poly, Vec2::new(-1.0, r)));
    }
}
