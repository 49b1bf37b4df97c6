use flexflip_core::elastica::RodSpec;
use flexflip_core::finger::{nominal_tip_path, HandConfig};
use flexflip_core::grasp::{
    classify_attempt, feasible_x_interval, fit_affine, separation_point, simulate_flex_phase, sweep, AttemptOutcome,
    Axis, GraspModel, Lattice, OutcomeLabel, SweepResult, Termination,
};
use flexflip_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SLOPE: f64 = -0.90;
const INTERCEPT: f64 = 120.5;

fn line(z: f64) -> f64 {
    SLOPE * z + INTERCEPT
}

fn model(segments: usize) -> GraspModel<f64> {
    GraspModel::with_rod(RodSpec::new(125.0, 1.0, segments).unwrap())
}

fn labelled(label: OutcomeLabel) -> AttemptOutcome<f64> {
    AttemptOutcome { label, energy_at_separation: None, mu_min_max: None, flip_angle_deg: None }
}

#[test]
fn noiseless_line_is_recovered() {
    let pts: Vec<(f64, f64)> = (116..=135).map(|z| (z as f64, line(z as f64))).collect();
    let fit = fit_affine(&pts).unwrap();
    assert!((fit.slope - SLOPE).abs() <= 1e-9);
    assert!((fit.intercept - INTERCEPT).abs() <= 1e-9);
    assert_eq!(fit.n_points, 20);
    let two = fit_affine(&[(116.0, 16.1), (135.0, -1.0)]).unwrap();
    assert!((two.slope - SLOPE).abs() <= 1e-9 && (two.intercept - INTERCEPT).abs() <= 1e-9);
}

#[test]
fn noisy_band_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (mut slopes, mut intercepts) = (0.0, 0.0);
    for _ in 0..100 {
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|_| {
                let z = rng.gen_range(116.0..=135.0);
                (z, line(z) + rng.gen_range(-0.5..=0.5))
            })
            .collect();
        let fit = fit_affine(&pts).unwrap();
        assert!((fit.slope - SLOPE).abs() <= 0.05, "slope {}", fit.slope);
        assert!((fit.intercept - INTERCEPT).abs() <= 2.0, "intercept {}", fit.intercept);
        slopes += fit.slope;
        intercepts += fit.intercept;
    }
    assert!((slopes / 100.0 - SLOPE).abs() <= 0.01);
    assert!((intercepts / 100.0 - INTERCEPT).abs() <= 0.5);
}

#[test]
fn single_z_is_degenerate() {
    assert_eq!(fit_affine(&[(120.0, 1.0), (120.0, 3.0)]), Err(Error::DegenerateFit));
}

/// Successes exactly where `50 <= x <= 70` and theta is within a degree of the line.
fn synthetic_sweep() -> SweepResult<f64> {
    let lattice = Lattice::default();
    let outcomes = lattice
        .configs()
        .iter()
        .map(|c| {
            let ok = (50.0..=70.0).contains(&c.x) && (c.theta_deg - line(c.z)).abs() <= 1.0;
            labelled(if ok { OutcomeLabel::Success } else { OutcomeLabel::PocketMiss })
        })
        .collect();
    SweepResult::from_outcomes(lattice, outcomes).unwrap()
}

#[test]
fn synthetic_rule_gives_the_feasible_interval() {
    let r = synthetic_sweep();
    assert_eq!(feasible_x_interval(&r).unwrap(), (50.0, 70.0));
    let fit = fit_affine(&r.success_points()).unwrap();
    assert!(fit.slope < 0.0);
}

#[test]
fn no_successes_is_an_error() {
    let lattice = Lattice::default();
    let outcomes = vec![labelled(OutcomeLabel::FrictionSlip); lattice.len()];
    let r = SweepResult::from_outcomes(lattice, outcomes).unwrap();
    assert_eq!(feasible_x_interval(&r), Err(Error::NoSuccesses));
}

#[test]
fn inverted_axis_is_an_empty_lattice() {
    let lattice = Lattice { z: Axis::new(130.0, 120.0, 1.0), ..Lattice::default() };
    assert_eq!(sweep(&model(40), &lattice).unwrap_err(), Error::EmptyLattice);
}

#[test]
fn reference_success_flexes_through_the_whole_ramp() {
    let m = model(100);
    let cfg = HandConfig::new(60.0, 130.0, 3.0);
    let path = nominal_tip_path(&m.finger, &cfg, &m.ramp, &m.geometry).unwrap();
    let trace = simulate_flex_phase(&m.rod, &path, m.mu_available, &m.thresholds, &m.solver).unwrap();
    assert_eq!(trace.termination, Termination::RampEnd);
    assert!(trace.steps.len() > 5);
    for w in trace.steps.windows(2) {
        let (a, b) = (w[0].solution.energy, w[1].solution.energy);
        assert!(b >= a - 1e-9 * a.max(1.0), "energy fell from {a} to {b}");
    }
    let (sep, energy) = separation_point(&trace, None).unwrap();
    assert_eq!(sep, trace.steps.len() - 1);
    assert!(energy > 0.0);
    let outcome = classify_attempt(&m, &cfg).unwrap();
    assert_eq!(outcome.label, OutcomeLabel::Success);
    assert!(outcome.flip_angle_deg.unwrap() >= m.thresholds.flip_angle_deg);
    assert!(outcome.mu_min_max.unwrap().admits(m.mu_available));
}

#[test]
fn hand_far_above_the_strip_never_touches_it() {
    let m = model(40);
    let outcome = classify_attempt(&m, &HandConfig::new(60.0, 250.0, 0.0)).unwrap();
    assert_eq!(outcome.label, OutcomeLabel::NoInteraction);
}

#[test]
fn frictionless_finger_never_succeeds() {
    let mut m = model(40);
    m.mu_available = 0.0;
    let lattice = Lattice {
        x: Axis::single(60.0),
        z: Axis::new(124.0, 132.0, 2.0),
        theta: Axis::new(0.0, 12.0, 3.0),
        delta: 0.0,
    };
    let r = sweep(&m, &lattice).unwrap();
    assert_eq!(r.count(OutcomeLabel::Success), 0);
    assert_eq!(feasible_x_interval(&r), Err(Error::NoSuccesses));
}

#[test]
fn sweep_entries_equal_single_attempts() {
    let m = model(40);
    let lattice = Lattice {
        x: Axis::new(50.0, 70.0, 10.0),
        z: Axis::new(122.0, 130.0, 4.0),
        theta: Axis::new(0.0, 12.0, 6.0),
        delta: 0.0,
    };
    let r = sweep(&m, &lattice).unwrap();
    assert_eq!(r.outcomes.len(), 27);
    for (cfg, o) in r.configs().zip(&r.outcomes) {
        assert_eq!(classify_attempt(&m, &cfg).unwrap(), *o);
    }
}

#[test]
fn sweep_is_independent_of_pool_size() {
    let m = model(40);
    let lattice = Lattice {
        x: Axis::single(60.0),
        z: Axis::new(120.0, 134.0, 2.0),
        theta: Axis::new(0.0, 12.0, 2.0),
        delta: 0.0,
    };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| sweep(&m, &lattice).unwrap())
    };
    assert_eq!(run(1), run(3));
}
