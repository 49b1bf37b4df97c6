use std::path::Path;

use anyhow::{anyhow, bail, Context};
use flexflip_core::elastica::{compute_energy_field, FrictionBound};
use flexflip_core::finger::nominal_tip_path;
use flexflip_core::grasp::{feasible_x_interval_from_counts, fit_affine, sweep, AttemptOutcome, OutcomeLabel};
use flexflip_core::Error;

use crate::config::{config_error, RunConfig};
use crate::output::{format_sig, OutDir, Table};

pub const FIELD_COLUMNS: [&str; 8] =
    ["px_mm", "pz_mm", "energy", "grad_x", "grad_y", "mu_min", "reachable", "converged"];
pub const SHAPE_COLUMNS: [&str; 5] = ["px_mm", "pz_mm", "node", "x_mm", "z_mm"];
pub const PATH_COLUMNS: [&str; 4] = ["pressure_mpa", "tip_x_mm", "tip_z_mm", "clamped"];
pub const SWEEP_COLUMNS: [&str; 7] =
    ["x_mm", "z_mm", "theta_deg", "label", "energy_at_sep", "mu_min_max", "flip_angle_deg"];
pub const FIT_COLUMNS: [&str; 5] = ["slope", "intercept", "rms", "n", "status"];
pub const INTERVAL_COLUMNS: [&str; 3] = ["x_min_mm", "x_max_mm", "status"];

/// Failed solves or attempts, against the number that were tried.
#[derive(Clone, Copy, Debug)]
pub struct FailureCount {
    pub failed: usize,
    pub attempted: usize,
}

impl FailureCount {
    pub fn none() -> Self {
        Self { failed: 0, attempted: 0 }
    }

    pub fn fraction(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.failed as f64 / self.attempted as f64
        }
    }
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.into()
}

fn mu_cell(m: Option<FrictionBound<f64>>, digits: usize) -> String {
    match m {
        Some(FrictionBound::Bounded(v)) => format_sig(v, digits),
        Some(FrictionBound::Infeasible) => "inf".into(),
        None => String::new(),
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|v| format_sig(v, digits)).unwrap_or_default()
}

/// Energy (and optionally friction) field over the upper half-disk.
pub fn field(cfg: &RunConfig, out: &mut OutDir, with_friction: bool) -> anyhow::Result<FailureCount> {
    let digits = cfg.output.precision;
    let rod = cfg.rod_spec()?;
    let grid = cfg.grid();
    let f = compute_energy_field(&rod, &grid, &cfg.solver_config())?;
    let mut table = Table::new(&FIELD_COLUMNS);
    for c in &f.cells {
        let g = c.gradient;
        table.push(vec![
            format_sig(c.point.x, digits),
            format_sig(c.point.z, digits),
            opt(c.energy, digits),
            opt(g.map(|g| g.x), digits),
            opt(g.map(|g| g.z), digits),
            if with_friction { mu_cell(c.mu_min, digits) } else { String::new() },
            flag(c.reachable),
            flag(c.converged),
        ]);
    }
    let name = if with_friction { "friction_field.csv" } else { "energy_field.csv" };
    out.write_table(name, &table)?;

    let stride = cfg.field.shape_stride;
    if !with_friction && stride > 0 {
        let mut shapes = Table::new(&SHAPE_COLUMNS);
        for (idx, c) in f.cells.iter().enumerate() {
            let (i, j) = (idx % grid.nx, idx / grid.nx);
            let Some(shape) = c.shape.as_ref().filter(|_| i % stride == 0 && j % stride == 0) else { continue };
            for (k, n) in shape.nodes().iter().enumerate() {
                shapes.push(vec![
                    format_sig(c.point.x, digits),
                    format_sig(c.point.z, digits),
                    k.to_string(),
                    format_sig(n.x, digits),
                    format_sig(n.z, digits),
                ]);
            }
        }
        out.write_table("shapes.csv", &shapes)?;
    }
    Ok(FailureCount { failed: f.failures(), attempted: f.reachable() })
}

/// Parses `x,z,theta`.
pub fn parse_hand(s: &str) -> anyhow::Result<[f64; 3]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("hand placement {s:?} is not x,z,theta"))?;
    <[f64; 3]>::try_from(v).map_err(|_| anyhow!("hand placement {s:?} needs exactly three values"))
}

/// One nominal fingertip path file per hand placement, numbered from 1.
pub fn finger_paths(cfg: &RunConfig, hands: &[[f64; 3]], out: &mut OutDir) -> anyhow::Result<FailureCount> {
    if hands.is_empty() {
        return Err(config_error(anyhow!("no hand placements given")));
    }
    let digits = cfg.output.precision;
    let (finger, ramp, geom) = (cfg.finger_spec(), cfg.ramp(), cfg.geometry());
    for (k, &[x, z, theta]) in hands.iter().enumerate() {
        let hand = cfg.hand_config(x, z, theta);
        if !hand.within_experiment_range() {
            log::warn!("placement ({x}, {z}, {theta}) lies outside the tested range; computing anyway");
        }
        let path = nominal_tip_path(&finger, &hand, &ramp, &geom).map_err(|e| match e {
            Error::InvalidSpec(_) | Error::InvalidRamp { .. } | Error::PressureOutOfRange { .. } => config_error(e),
            e => e.into(),
        })?;
        let mut table = Table::new(&PATH_COLUMNS);
        for ((p, q), c) in path.pressures.iter().zip(&path.points).zip(&path.clamped) {
            table.push(vec![format_sig(*p, digits), format_sig(q.x, digits), format_sig(q.z, digits), flag(*c)]);
        }
        out.write_table(&format!("path_{}.csv", k + 1), &table)?;
    }
    Ok(FailureCount::none())
}

fn outcome_row(x: f64, z: f64, theta: f64, o: &AttemptOutcome<f64>, digits: usize) -> Vec<String> {
    vec![
        format_sig(x, digits),
        format_sig(z, digits),
        format_sig(theta, digits),
        o.label.to_string(),
        opt(o.energy_at_separation, digits),
        mu_cell(o.mu_min_max, digits),
        opt(o.flip_angle_deg, digits),
    ]
}

/// Classifies every lattice point and writes the sweep table with its fit report.
pub fn run_sweep(cfg: &RunConfig, out: &mut OutDir) -> anyhow::Result<FailureCount> {
    let digits = cfg.output.precision;
    let model = cfg.model()?;
    let lattice = cfg.lattice();
    let result = sweep(&model, &lattice).map_err(|e| match e {
        Error::EmptyLattice | Error::InvalidSpec(_) | Error::InvalidRamp { .. } => config_error(e),
        e => e.into(),
    })?;
    let mut table = Table::new(&SWEEP_COLUMNS);
    for (c, o) in result.configs().zip(&result.outcomes) {
        table.push(outcome_row(c.x, c.z, c.theta_deg, o, digits));
    }
    out.write_table("sweep.csv", &table)?;
    let counts: Vec<(f64, usize)> = result.successes_per_x();
    write_fit(out, &result.success_points(), &counts, cfg.sweep.feasible_fraction, digits)?;
    Ok(FailureCount { failed: result.count(OutcomeLabel::Unconverged), attempted: result.outcomes.len() })
}

/// Rebuilds the fit report from a sweep table on disk.
pub fn fit_from_csv(cfg: &RunConfig, input: &Path, out: &mut OutDir) -> anyhow::Result<FailureCount> {
    let mut reader = csv::Reader::from_path(input)
        .with_context(|| format!("cannot read sweep table {}", input.display()))
        .map_err(config_error)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| config_error(anyhow!("sweep table lacks column {name}")))
    };
    let (ix, iz, it, il) = (col("x_mm")?, col("z_mm")?, col("theta_deg")?, col("label")?);
    let mut points = Vec::new();
    let mut counts: Vec<(f64, usize)> = Vec::new();
    let mut unconverged = 0;
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec?;
        let num = |i: usize| -> anyhow::Result<f64> {
            rec[i].parse::<f64>().with_context(|| format!("bad number {:?} in {}", &rec[i], input.display()))
        };
        let (x, z, theta) = (num(ix)?, num(iz)?, num(it)?);
        let label: OutcomeLabel = rec[il].parse()?;
        rows += 1;
        let ok = label == OutcomeLabel::Success;
        unconverged += usize::from(label == OutcomeLabel::Unconverged);
        match counts.iter_mut().find(|c| c.0 == x) {
            Some(c) => c.1 += usize::from(ok),
            None => counts.push((x, usize::from(ok))),
        }
        if ok {
            points.push((z, theta));
        }
    }
    if rows == 0 {
        bail!("sweep table {} has no rows", input.display());
    }
    counts.sort_by(|a, b| a.0.total_cmp(&b.0));
    write_fit(out, &points, &counts, cfg.sweep.feasible_fraction, cfg.output.precision)?;
    Ok(FailureCount { failed: unconverged, attempted: rows })
}

fn write_fit(
    out: &mut OutDir,
    points: &[(f64, f64)],
    counts: &[(f64, usize)],
    fraction: f64,
    digits: usize,
) -> anyhow::Result<()> {
    let mut fit = Table::new(&FIT_COLUMNS);
    match fit_affine(points) {
        Ok(f) => {
            log::info!("fit theta = {:.3} z + {:.2} over {} successes", f.slope, f.intercept, f.n_points);
            fit.push(vec![
                format_sig(f.slope, digits),
                format_sig(f.intercept, digits),
                format_sig(f.residual_rms, digits),
                f.n_points.to_string(),
                "ok".into(),
            ])
        }
        Err(e) => {
            let status = if points.is_empty() { "NoSuccesses" } else { status_of(&e) };
            fit.push(vec![String::new(), String::new(), String::new(), points.len().to_string(), status.into()]);
        }
    }
    out.write_table("fit.csv", &fit)?;

    let mut interval = Table::new(&INTERVAL_COLUMNS);
    match feasible_x_interval_from_counts(counts, fraction) {
        Ok((lo, hi)) => interval.push(vec![format_sig(lo, digits), format_sig(hi, digits), "ok".into()]),
        Err(e) => interval.push(vec![String::new(), String::new(), status_of(&e).into()]),
    }
    out.write_table("feasible_x.csv", &interval)
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::NoSuccesses => "NoSuccesses",
        Error::DegenerateFit => "DegenerateFit",
        _ => "Error",
    }
}
