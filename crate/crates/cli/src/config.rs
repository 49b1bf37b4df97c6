//! Run configuration: TOML tables with defaults for every key, `--set`
//! overrides and conversion into the model types.

use std::path::Path;

use anyhow::{anyhow, bail, Context};
use flexflip_core::elastica::{GridSpec, RodSpec, SolverConfig};
use flexflip_core::finger::{FingerSpec, HandConfig, HandGeometry, PressureRamp};
use flexflip_core::grasp::{Axis, GraspModel, Lattice, Thresholds};
use flexflip_core::Vec2;
use serde::{Deserialize, Serialize};

/// Marks errors that should exit with the configuration status code.
#[derive(Debug)]
pub struct ConfigError(pub anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(e: impl Into<anyhow::Error>) -> anyhow::Error {
    ConfigError(e.into()).into()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rod: RodBlock,
    pub finger: FingerBlock,
    pub hand: HandBlock,
    pub solver: SolverBlock,
    pub field: FieldBlock,
    pub path: PathBlock,
    pub sweep: SweepBlock,
    pub output: OutputBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RodBlock {
    pub length_mm: f64,
    /// Flexural rigidity (N mm^2).
    pub rigidity: f64,
    pub segments: usize,
}

impl Default for RodBlock {
    fn default() -> Self {
        Self { length_mm: 125.0, rigidity: 1.0, segments: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FingerBlock {
    pub arc_length_mm: f64,
    /// mm^-1 per MPa.
    pub pressure_gain: f64,
    /// mm^-1.
    pub curvature_offset: f64,
    pub max_pressure_mpa: f64,
}

impl Default for FingerBlock {
    fn default() -> Self {
        let f = FingerSpec::<f64>::default();
        Self {
            arc_length_mm: f.arc_length,
            pressure_gain: f.pressure_gain,
            curvature_offset: f.curvature_offset,
            max_pressure_mpa: f.max_pressure,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HandBlock {
    /// Finger #1 base relative to the wrist point at zero tilt, `[x, z]` (mm).
    pub finger1_base_mm: [f64; 2],
    pub finger2_base_mm: [f64; 2],
    pub finger1_heading_deg: f64,
    pub inter_finger_angle_deg: f64,
}

impl Default for HandBlock {
    fn default() -> Self {
        let g = HandGeometry::<f64>::default();
        Self {
            finger1_base_mm: [g.finger1_base.x, g.finger1_base.z],
            finger2_base_mm: [g.finger2_base.x, g.finger2_base.z],
            finger1_heading_deg: g.finger1_heading_deg,
            inter_finger_angle_deg: 90.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverBlock {
    pub tol_constraint: f64,
    pub tol_gradient: f64,
    pub max_iter: usize,
    pub continuation_steps: usize,
    pub seed: u64,
    /// Share of failed solves or unconverged attempts tolerated before exit code 3.
    pub max_failure_fraction: f64,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let s = SolverConfig::<f64>::default();
        Self {
            tol_constraint: s.tol_c,
            tol_gradient: s.tol_g,
            max_iter: s.max_iter,
            continuation_steps: s.continuation_steps,
            seed: s.restart_seed,
            max_failure_fraction: 0.05,
        }
    }
}

/// Lattice for the energy and friction fields: the upper half-disk of radius
/// `rod.length_mm` sampled `nx` by `nz`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldBlock {
    pub nx: usize,
    pub nz: usize,
    /// Export the rod shape of every `shape_stride`-th column and row; 0 disables.
    pub shape_stride: usize,
}

impl Default for FieldBlock {
    fn default() -> Self {
        Self { nx: 61, nz: 31, shape_stride: 6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathBlock {
    /// Hand placements `[x_mm, z_mm, theta_deg]`, one path file each.
    pub configs: Vec<[f64; 3]>,
}

impl Default for PathBlock {
    /// Five placements at x = 60 mm along the band theta = -0.90 z + 120.5.
    fn default() -> Self {
        let configs = [122.0, 124.0, 126.0, 128.0, 130.0].map(|z: f64| [60.0, z, -0.90 * z + 120.5]).to_vec();
        Self { configs }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisBlock {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl From<AxisBlock> for Axis<f64> {
    fn from(a: AxisBlock) -> Self {
        Axis::new(a.min, a.max, a.step)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RampBlock {
    pub start_mpa: f64,
    pub end_mpa: f64,
    pub samples: usize,
}

impl Default for RampBlock {
    fn default() -> Self {
        Self { start_mpa: 0.0, end_mpa: 0.3, samples: 61 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdBlock {
    pub engagement_tol_mm: f64,
    pub dwell_fraction: f64,
    pub flip_angle_deg: f64,
    /// Finger kinetic energy (N mm); omitted means separation at the ramp end.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ke_budget: Option<f64>,
    pub pocket_samples: usize,
}

impl Default for ThresholdBlock {
    fn default() -> Self {
        let t = Thresholds::<f64>::default();
        Self {
            engagement_tol_mm: t.engagement_tol,
            dwell_fraction: t.dwell_fraction,
            flip_angle_deg: t.flip_angle_deg,
            ke_budget: t.ke_budget,
            pocket_samples: t.pocket_samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepBlock {
    pub x: AxisBlock,
    pub z: AxisBlock,
    pub theta: AxisBlock,
    pub delta_mm: f64,
    pub mu_available: f64,
    /// Share of the best per-x success count that makes an x value feasible.
    pub feasible_fraction: f64,
    pub ramp: RampBlock,
    pub thresholds: ThresholdBlock,
}

impl Default for SweepBlock {
    fn default() -> Self {
        let l = Lattice::<f64>::default();
        let axis = |a: Axis<f64>| AxisBlock { min: a.min, max: a.max, step: a.step };
        Self {
            x: axis(l.x),
            z: axis(l.z),
            theta: axis(l.theta),
            delta_mm: l.delta,
            mu_available: 0.6,
            feasible_fraction: flexflip_core::grasp::DEFAULT_FEASIBLE_FRACTION,
            ramp: RampBlock::default(),
            thresholds: ThresholdBlock::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: String,
    /// Significant digits of every number written to CSV.
    pub precision: usize,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: "out".into(), precision: 9 }
    }
}

/// Reads `path` (or starts from defaults), applies `key=value` overrides and
/// deserializes. Every failure here is a configuration error.
pub fn load(path: Option<&Path>, overrides: &[String]) -> anyhow::Result<RunConfig> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("cannot read config {}", p.display()))
                .map_err(config_error)?;
            text.parse::<toml::Table>()
                .with_context(|| format!("cannot parse config {}", p.display()))
                .map_err(config_error)?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        apply_override(&mut table, o).map_err(config_error)?;
    }
    let cfg: RunConfig = toml::Value::Table(table).try_into().context("invalid configuration").map_err(config_error)?;
    cfg.validate().map_err(config_error)?;
    Ok(cfg)
}

/// `a.b.c=value`, where `value` is read as a TOML value and falls back to a bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> anyhow::Result<()> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| anyhow!("override {spec:?} is not key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|k| k.is_empty()) {
        bail!("override {spec:?} has an empty key");
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let (last, parents) = path.split_last().expect("nonempty key");
    let mut node = table;
    for k in parents {
        let entry = node.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(|| anyhow!("override {spec:?}: {k} is not a table"))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Unit length and unit rigidity; energies become dimensionless.
    pub fn nondimensionalize(&mut self) {
        self.rod.length_mm = 1.0;
        self.rod.rigidity = 1.0;
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.rod_spec()?;
        self.solver_config().validate()?;
        self.finger_spec().validate()?;
        self.ramp().validate(&self.finger_spec())?;
        self.model()?.validate()?;
        self.lattice().validate()?;
        if !(0.0..=1.0).contains(&self.solver.max_failure_fraction) {
            bail!("solver.max_failure_fraction must lie in [0, 1]");
        }
        if !(self.sweep.feasible_fraction > 0.0 && self.sweep.feasible_fraction <= 1.0) {
            bail!("sweep.feasible_fraction must lie in (0, 1]");
        }
        if self.field.nx < 2 || self.field.nz < 2 {
            bail!("field.nx and field.nz must be at least 2");
        }
        if !(1..=17).contains(&self.output.precision) {
            bail!("output.precision must lie in 1..=17");
        }
        Ok(())
    }

    pub fn rod_spec(&self) -> flexflip_core::Result<RodSpec<f64>> {
        RodSpec::new(self.rod.length_mm, self.rod.rigidity, self.rod.segments)
    }

    pub fn solver_config(&self) -> SolverConfig<f64> {
        SolverConfig {
            tol_c: self.solver.tol_constraint,
            tol_g: self.solver.tol_gradient,
            max_iter: self.solver.max_iter,
            continuation_steps: self.solver.continuation_steps,
            restart_seed: self.solver.seed,
        }
    }

    pub fn finger_spec(&self) -> FingerSpec<f64> {
        FingerSpec {
            arc_length: self.finger.arc_length_mm,
            pressure_gain: self.finger.pressure_gain,
            curvature_offset: self.finger.curvature_offset,
            max_pressure: self.finger.max_pressure_mpa,
        }
    }

    pub fn geometry(&self) -> HandGeometry<f64> {
        let [b1x, b1z] = self.hand.finger1_base_mm;
        let [b2x, b2z] = self.hand.finger2_base_mm;
        HandGeometry {
            finger1_base: Vec2::new(b1x, b1z),
            finger2_base: Vec2::new(b2x, b2z),
            finger1_heading_deg: self.hand.finger1_heading_deg,
            object_length: self.rod.length_mm,
        }
    }

    pub fn ramp(&self) -> PressureRamp<f64> {
        let r = &self.sweep.ramp;
        PressureRamp::linear(r.start_mpa, r.end_mpa, r.samples)
    }

    pub fn hand_config(&self, x: f64, z: f64, theta_deg: f64) -> HandConfig<f64> {
        HandConfig {
            delta: self.sweep.delta_mm,
            inter_finger_angle_deg: self.hand.inter_finger_angle_deg,
            ..HandConfig::new(x, z, theta_deg)
        }
    }

    pub fn grid(&self) -> GridSpec<f64> {
        GridSpec::half_disk(self.rod.length_mm, self.field.nx, self.field.nz)
    }

    pub fn lattice(&self) -> Lattice<f64> {
        Lattice {
            x: self.sweep.x.into(),
            z: self.sweep.z.into(),
            theta: self.sweep.theta.into(),
            delta: self.sweep.delta_mm,
        }
    }

    pub fn model(&self) -> flexflip_core::Result<GraspModel<f64>> {
        let t = &self.sweep.thresholds;
        Ok(GraspModel {
            rod: self.rod_spec()?,
            finger: self.finger_spec(),
            geometry: self.geometry(),
            ramp: self.ramp(),
            mu_available: self.sweep.mu_available,
            thresholds: Thresholds {
                engagement_tol: t.engagement_tol_mm,
                dwell_fraction: t.dwell_fraction,
                flip_angle_deg: t.flip_angle_deg,
                ke_budget: t.ke_budget,
                pocket_samples: t.pocket_samples,
            },
            solver: self.solver_config(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.lattice().len(), 1820);
        cfg.validate().unwrap();
    }

    #[test]
    fn shipped_config_matches_defaults() {
        let text = include_str!("../../../configs/default.toml");
        let mut cfg: RunConfig = toml::from_str(text).unwrap();
        let def = RunConfig::default();
        for (a, b) in cfg.path.configs.iter().zip(&def.path.configs) {
            assert!(a.iter().zip(b).all(|(u, v)| (u - v).abs() < 1e-9), "{a:?} vs {b:?}");
        }
        cfg.path = def.path.clone();
        assert_eq!(cfg, def);
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let mut t = toml::Table::new();
        apply_override(&mut t, "sweep.thresholds.ke_budget=0.5").unwrap();
        apply_override(&mut t, "rod.segments = 40").unwrap();
        apply_override(&mut t, "output.dir=results/a").unwrap();
        let cfg: RunConfig = toml::Value::Table(t).try_into().unwrap();
        assert_eq!(cfg.sweep.thresholds.ke_budget, Some(0.5));
        assert_eq!(cfg.rod.segments, 40);
        assert_eq!(cfg.output.dir, "results/a");
    }

    #[test]
    fn integer_literals_fill_float_fields() {
        let cfg: RunConfig = toml::from_str("[rod]\nlength_mm = 125\n").unwrap();
        assert_eq!(cfg.rod.length_mm, 125.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[rod]\nlenght_mm = 1.0\n").is_err());
        let mut t = toml::Table::new();
        assert!(apply_override(&mut t, "novalue").is_err());
        assert!(apply_override(&mut t, "a..b=1").is_err());
    }

    #[test]
    fn invalid_values_fail_validation() {
        let mut cfg = RunConfig::default();
        cfg.sweep.ramp.samples = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.rod.segments = 2;
        assert!(cfg.validate().is_err());
    }
}
