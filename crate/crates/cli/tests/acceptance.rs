//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use flexflip_core::elastica::{
    compute_energy_field, solve_from, solve_min_energy_shape, EnergyField, FrictionBound, GridSpec, RodSpec,
    SolverConfig,
};
use flexflip_core::finger::{
    arc_offset, fingertip_position, nominal_tip_path, BasePose, FingerSpec, HandGeometry, PalmSide, PressureRamp,
};
use flexflip_core::grasp::{
    feasible_x_interval, feasible_x_interval_from_counts, fit_affine, AttemptOutcome, Lattice, OutcomeLabel,
    SweepResult, DEFAULT_FEASIBLE_FRACTION,
};
use flexflip_core::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cfg() -> SolverConfig<f64> {
    SolverConfig::default()
}

fn unit(n: usize) -> RodSpec<f64> {
    RodSpec::nondimensional(n).unwrap()
}

fn random_reachable(n: usize, seed: u64) -> Vec<Vec2<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = rng.gen_range(0.2..0.9);
            let a = rng.gen_range(0.05..PI - 0.05);
            Vec2::new(r * a.cos(), r * a.sin())
        })
        .collect()
}

fn undeformed() -> Check {
    let t0 = Instant::now();
    let sol = solve_min_energy_shape(&unit(100), Vec2::new(1.0, 0.0), &cfg()).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let f = sol.contact_force.norm();
    ensure(sol.energy <= 1e-10 && f <= 1e-8 && secs < 1.0, format!("U={:.2e} |f|={f:.2e} in {secs:.3}s", sol.energy))
}

fn scaling() -> Check {
    let t0 = Instant::now();
    let rf = 2.0;
    let dim = RodSpec::new(125.0, rf, 100).unwrap();
    let mut worst = 0.0_f64;
    for p in random_reachable(10, 101) {
        let u1 = solve_min_energy_shape(&unit(100), p, &cfg()).map_err(|e| e.to_string())?.energy;
        let u = solve_min_energy_shape(&dim, p.scale(125.0), &cfg()).map_err(|e| e.to_string())?.energy;
        worst = worst.max((u - rf / 125.0 * u1).abs() / (rf / 125.0 * u1));
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(worst <= 1e-6 && secs < 10.0, format!("max rel err {worst:.2e} on 10 endpoints in {secs:.1}s"))
}

fn sensitivity() -> Check {
    let t0 = Instant::now();
    let rod = unit(100);
    let h = 1e-4 * rod.length;
    let mut worst = 0.0_f64;
    for p in random_reachable(20, 202) {
        let sol = solve_min_energy_shape(&rod, p, &cfg()).map_err(|e| e.to_string())?;
        let energy =
            |x: f64, z: f64| solve_from(&rod, &sol, Vec2::new(x, z), &cfg()).map(|s| s.energy).unwrap_or(f64::NAN);
        let (gx, gz) = common::central_gradient(energy, (p.x, p.z), h);
        let err = (sol.contact_force - Vec2::new(gx, gz)).norm() / gx.hypot(gz);
        worst = if err.is_nan() { f64::INFINITY } else { worst.max(err) };
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(worst <= 1e-3 && secs < 30.0, format!("max rel err {worst:.2e} on 20 endpoints in {secs:.1}s"))
}

fn oracle() -> Check {
    const ENDPOINTS: [(f64, f64); 10] = [
        (0.8, 0.2),
        (0.9, 0.05),
        (0.6, 0.5),
        (0.3, 0.3),
        (0.0, 0.7),
        (-0.3, 0.5),
        (-0.6, 0.2),
        (0.5, 0.05),
        (0.2, 0.85),
        (-0.4, 0.75),
    ];
    let t0 = Instant::now();
    let rod = unit(16);
    let mut worst = 0.0_f64;
    for (i, &(x, z)) in ENDPOINTS.iter().enumerate() {
        let u = solve_min_energy_shape(&rod, Vec2::new(x, z), &cfg()).map_err(|e| e.to_string())?.energy;
        let o = common::multistart_penalty_energy(16, (x, z), 200, 1000 + i as u64)
            .ok_or_else(|| format!("oracle found nothing at ({x},{z})"))?;
        worst = worst.max((u - o).abs() / o);
    }
    let secs = t0.elapsed().as_secs_f64();
    ensure(worst <= 0.02 && secs < 120.0, format!("max rel diff {:.3}% on 10 endpoints in {secs:.1}s", 100.0 * worst))
}

fn s_shape() -> Check {
    let t0 = Instant::now();
    let grid = GridSpec { x_min: -0.95, x_max: 0.95, nx: 20, z_min: 0.05, z_max: 0.95, nz: 10 };
    let field = compute_energy_field(&unit(100), &grid, &cfg()).map_err(|e| e.to_string())?;
    let converged = field.cells.iter().filter(|c| c.converged).count();
    let worst = field.cells.iter().filter_map(|c| c.inflections()).max().unwrap_or(0);
    let secs = t0.elapsed().as_secs_f64();
    ensure(
        worst <= 1 && secs < 60.0,
        format!(
            "max inflections {worst} over {converged} converged of {} reachable cells ({} failed) in {secs:.1}s",
            field.reachable(),
            field.failures()
        ),
    )
}

fn on_reachable_boundary(field: &EnergyField<f64>, i: usize, j: usize) -> bool {
    let g = &field.grid;
    (-1i64..=1).any(|dj| {
        (-1i64..=1).any(|di| {
            let (ii, jj) = (i as i64 + di, j as i64 + dj);
            ii < 0
                || jj < 0
                || ii >= g.nx as i64
                || jj >= g.nz as i64
                || !field.cell(ii as usize, jj as usize).reachable
        })
    })
}

fn friction_map() -> Check {
    let t0 = Instant::now();
    let grid = GridSpec::half_disk(1.0, 30, 15);
    let field = compute_energy_field(&unit(100), &grid, &cfg()).map_err(|e| e.to_string())?;
    let secs = t0.elapsed().as_secs_f64();
    let tip_ok = field.cell(grid.nx - 1, 0).mu_min == Some(FrictionBound::Bounded(0.0));
    let (mut finite, mut infeasible, mut interior_infeasible, mut bad) = (0, 0, 0, 0);
    for j in 0..grid.nz {
        for i in 0..grid.nx {
            let c = field.cell(i, j);
            if !c.converged {
                continue;
            }
            match c.mu_min {
                Some(FrictionBound::Bounded(v)) if v.is_finite() && v >= 0.0 => finite += 1,
                Some(FrictionBound::Infeasible) => {
                    infeasible += 1;
                    if !on_reachable_boundary(&field, i, j) {
                        interior_infeasible += 1;
                    }
                }
                _ => bad += 1,
            }
        }
    }
    ensure(
        tip_ok && bad == 0 && interior_infeasible == 0 && secs < 120.0,
        format!(
            "mu(L,0)=0: {tip_ok}; {finite} finite, {infeasible} infeasible ({interior_infeasible} off the boundary), \
             {bad} invalid, {} failed, in {secs:.1}s",
            field.failures()
        ),
    )
}

fn finger() -> Check {
    let f = FingerSpec { max_pressure: 1.0, ..FingerSpec::default() };
    let l = f.arc_length;
    let base = BasePose { origin: Vec2::zero(), heading: 0.0, palm: PalmSide::Left };
    let quarter = (fingertip_position(&f, PI / (2.0 * l), &base) - Vec2::new(2.0 * l / PI, 2.0 * l / PI)).norm();
    let full = fingertip_position(&f, 2.0 * PI / l, &base).norm();
    let straight = Vec2::new(l, 0.0);
    let continuity = [0.0, 1e-12, 0.999_999e-6 / l, 1.000_001e-6 / l]
        .iter()
        .map(|&k| (arc_offset(l, k) - straight).norm())
        .fold(0.0_f64, f64::max);
    let spec = FingerSpec::default();
    let ramp = PressureRamp::linear(0.0, spec.max_pressure, 61);
    let mut lowest = f64::INFINITY;
    for c in Lattice::default().configs() {
        let path = nominal_tip_path(&spec, &c, &ramp, &HandGeometry::default()).map_err(|e| e.to_string())?;
        lowest = path.points.iter().map(|p| p.z).fold(lowest, f64::min);
    }
    ensure(
        quarter <= 1e-9 * l && full <= 1e-9 * l && continuity <= 1e-6 * l && lowest >= 0.0,
        format!(
            "quarter {quarter:.1e} mm, full {full:.1e} mm, straight limit {continuity:.1e} mm, lowest path z {lowest}"
        ),
    )
}

fn band_fit() -> Check {
    let line = |z: f64| -0.90 * z + 120.5;
    let pts: Vec<(f64, f64)> = (116..=135).map(|z| (z as f64, line(z as f64))).collect();
    let exact = fit_affine(&pts).map_err(|e| e.to_string())?;
    let exact_err = (exact.slope + 0.90).abs().max((exact.intercept - 120.5).abs());
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let (mut ds, mut di) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let pts: Vec<(f64, f64)> = (0..200)
            .map(|_| {
                let z = rng.gen_range(116.0..=135.0);
                (z, line(z) + rng.gen_range(-0.5..=0.5))
            })
            .collect();
        let fit = fit_affine(&pts).map_err(|e| e.to_string())?;
        ds = ds.max((fit.slope + 0.90).abs());
        di = di.max((fit.intercept - 120.5).abs());
    }
    ensure(
        exact_err <= 1e-9 && ds <= 0.05 && di <= 2.0,
        format!("noiseless err {exact_err:.1e}; 100 noisy resamples: max |dslope| {ds:.4}, max |dintercept| {di:.3}"),
    )
}

fn interval_rule() -> Check {
    let lattice = Lattice::<f64>::default();
    let outcomes = lattice
        .configs()
        .iter()
        .map(|c| {
            let ok = (50.0..=70.0).contains(&c.x) && (c.theta_deg - (-0.90 * c.z + 120.5)).abs() <= 1.0;
            let label = if ok { OutcomeLabel::Success } else { OutcomeLabel::PocketMiss };
            AttemptOutcome { label, energy_at_separation: None, mu_min_max: None, flip_angle_deg: None }
        })
        .collect();
    let r = SweepResult::from_outcomes(lattice, outcomes).map_err(|e| e.to_string())?;
    let iv = feasible_x_interval(&r).map_err(|e| e.to_string())?;
    ensure(iv == (50.0, 70.0), format!("interval [{}, {}] mm", iv.0, iv.1))
}

fn run_sweep(out: &Path, threads: &str) -> Result<Vec<u8>, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_flexflip"))
        .args(["sweep", "--threads", threads, "--out", out.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("sweep exited with {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
    }
    std::fs::read(out.join("sweep.csv")).map_err(|e| e.to_string())
}

fn bookkeeping(dir: &Path) -> (Check, Option<Vec<u8>>) {
    let t0 = Instant::now();
    let a = match run_sweep(&dir.join("t1"), "1") {
        Ok(a) => a,
        Err(e) => return (Err(e), None),
    };
    let b = match run_sweep(&dir.join("t4"), "4") {
        Ok(b) => b,
        Err(e) => return (Err(e), Some(a)),
    };
    let rows = a.iter().filter(|c| **c == b'\n').count() - 1;
    let same = a == b;
    let check = ensure(
        rows == 1820 && same,
        format!("{rows} rows; threads 1 vs 4 byte-identical: {same}; {:.1}s", t0.elapsed().as_secs_f64()),
    );
    (check, Some(a))
}

/// Successes at one x, as lattice indices `(z, theta)`, after dropping the
/// lattice boundary, must form one 8-connected component.
fn single_band(points: &BTreeSet<(usize, usize)>, nz: usize, nt: usize) -> bool {
    let inner: BTreeSet<_> =
        points.iter().copied().filter(|&(z, t)| z > 0 && t > 0 && z + 1 < nz && t + 1 < nt).collect();
    let Some(&start) = inner.iter().next() else { return false };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some((z, t)) = stack.pop() {
        for dz in -1i64..=1 {
            for dt in -1i64..=1 {
                let n = ((z as i64 + dz) as usize, (t as i64 + dt) as usize);
                if inner.contains(&n) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
    }
    seen.len() == inner.len()
}

fn coupled(csv: Option<&[u8]>) -> Check {
    let csv = csv.ok_or("no sweep output")?;
    let text = std::str::from_utf8(csv).map_err(|e| e.to_string())?;
    let lattice = Lattice::<f64>::default();
    let (nz, nt) = (lattice.z.len(), lattice.theta.len());
    let mut per_x: BTreeMap<i64, BTreeSet<(usize, usize)>> = BTreeMap::new();
    let mut points = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (x, z, t): (f64, f64, f64) = (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap());
        let entry = per_x.entry(x.round() as i64).or_default();
        if f[3] == "Success" {
            let zi = ((z - lattice.z.min) / lattice.z.step).round() as usize;
            let ti = ((t - lattice.theta.min) / lattice.theta.step).round() as usize;
            entry.insert((zi, ti));
            points.push((z, t));
        }
    }
    let counts: Vec<(f64, usize)> = per_x.iter().map(|(x, s)| (*x as f64, s.len())).collect();
    let (lo, hi) =
        feasible_x_interval_from_counts(&counts, DEFAULT_FEASIBLE_FRACTION).map_err(|e| format!("interval: {e}"))?;
    let banded: Vec<String> = per_x
        .iter()
        .filter(|(x, _)| (lo..=hi).contains(&(**x as f64)))
        .map(|(x, s)| format!("x={x}:{}", if single_band(s, nz, nt) { "band" } else { "split" }))
        .collect();
    let all_banded = banded.iter().all(|b| b.ends_with("band"));
    let fit = fit_affine(&points).map_err(|e| e.to_string())?;
    ensure(
        all_banded && fit.slope < 0.0,
        format!(
            "feasible x [{lo}, {hi}] ({}); fit theta = {:.3} z + {:.2} over {} successes",
            banded.join(" "),
            fit.slope,
            fit.intercept,
            fit.n_points
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut results: Vec<(&str, Check)> = vec![
        ("1 undeformed rod", undeformed()),
        ("2 scaling law", scaling()),
        ("3 sensitivity identity", sensitivity()),
        ("4 oracle equivalence", oracle()),
        ("5 single inflection", s_shape()),
        ("6 friction map", friction_map()),
        ("7 finger kinematics", finger()),
        ("8 band fit", band_fit()),
        ("9 feasible x interval", interval_rule()),
    ];
    let (check, csv) = bookkeeping(dir.path());
    results.push(("10 sweep bookkeeping", check));
    results.push(("11 coupled band", coupled(csv.as_deref())));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
