//! Run configuration: one TOML document per run. Unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::barriers::Chain;
use crate::obstacle::{ScenarioKind, ScenarioSpec, SolveOptions};
use crate::ot::{DualOptions, ShapeName, ShapeSpec, TAU};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Obstacle-problem solve, verification and density extraction.
    Solve,
    /// Transport ladder, singular graph and displacement frames.
    Ot,
    /// Barrier inequality chains and constant searches.
    Barrier,
    /// Monge–Ampère measure of a sampled closed-form function.
    Measure,
    /// Displacement frames from a single transport solve.
    Interp,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Ot => "ot",
            Command::Barrier => "barrier",
            Command::Measure => "measure",
            Command::Interp => "interp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Write SVG figures next to the CSV artifacts.
    #[serde(default = "yes")]
    pub figures: bool,
    /// Scenario parameters; missing keys take the preset of `kind`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSpec>,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default)]
    pub ot: OtConfig,
    #[serde(default)]
    pub barrier: BarrierConfig,
    #[serde(default)]
    pub measure: MeasureConfig,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OtConfig {
    pub example: ShapeName,
    /// Coarse site count; the ladder adds a level with four times as many.
    pub sites: usize,
    /// Jump threshold for singular edges.
    pub tau: f64,
    pub frames: Vec<f64>,
    /// Source samples per cell in each frame.
    pub per_cell: usize,
    pub tol: f64,
    pub max_steps: usize,
    pub lambda: f64,
    pub m: f64,
    pub e: f64,
    pub r2: f64,
    pub polygon_count: usize,
    pub source: Vec<[f64; 2]>,
    pub target: Vec<[f64; 2]>,
}

impl Default for OtConfig {
    fn default() -> Self {
        let shape = ShapeSpec::default();
        let dual = DualOptions::default();
        OtConfig {
            example: shape.name,
            sites: 4000,
            tau: TAU,
            frames: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            per_cell: 4,
            tol: dual.tol,
            max_steps: dual.max_steps,
            lambda: shape.lambda,
            m: shape.m,
            e: shape.e,
            r2: shape.r2,
            polygon_count: shape.polygon_count,
            source: shape.source,
            target: shape.target,
        }
    }
}

impl OtConfig {
    pub fn shape(&self) -> ShapeSpec {
        ShapeSpec {
            name: self.example,
            lambda: self.lambda,
            m: self.m,
            e: self.e,
            r2: self.r2,
            polygon_count: self.polygon_count,
            source: self.source.clone(),
            target: self.target.clone(),
        }
    }

    pub fn dual(&self) -> DualOptions {
        DualOptions {
            tol: self.tol,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierMode {
    /// Inequality chain behind a lower barrier.
    Admissibility,
    /// Smallest constant of the four-dimensional interaction barrier.
    CStar,
    /// Logarithmic or constant growth of `W_n − r²/2`.
    Growth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierConfig {
    pub mode: BarrierMode,
    pub chain: Chain,
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub rho: f64,
    pub alpha: f64,
    /// Sample grid `[lo, hi]⁴` with `points` per axis for the constant search.
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_points: usize,
    /// Radius ladder for the growth fit.
    pub radii: Vec<f64>,
}

impl Default for BarrierConfig {
    fn default() -> Self {
        BarrierConfig {
            mode: BarrierMode::Admissibility,
            chain: Chain::Line,
            n: 2,
            k: 1,
            eps: 0.2,
            rho: 0.5,
            alpha: 0.5,
            grid_lo: -1.0,
            grid_hi: 1.0,
            grid_points: 9,
            radii: vec![2.0, 4.0, 8.0, 16.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampledFunction {
    /// The radial barrier `W₂`.
    W2,
    /// `(x² + y²)/2 + |x|`.
    Caffarelli,
    /// `(x² + y²)/2`.
    Paraboloid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureConfig {
    pub function: SampledFunction,
    /// Lattice spacing of the sampling.
    pub mesh: f64,
    /// The function is sampled on the disk of this radius.
    pub domain_radius: f64,
    /// The measured region: the disk of this radius when positive, otherwise
    /// the square `[−half_width, half_width]²`.
    pub region_radius: f64,
    pub half_width: f64,
    /// Also measure at half the mesh and report the error ratio.
    pub refine: bool,
    /// Relative tolerance on the measured mass.
    pub tol: f64,
    /// Relative tolerance on the extracted line density.
    pub line_tol: f64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            function: SampledFunction::W2,
            mesh: 0.02,
            domain_radius: 2.0,
            region_radius: 1.0,
            half_width: 0.5,
            refine: false,
            tol: 0.05,
            line_tol: 0.05,
        }
    }
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            output: default_output(),
            figures: true,
            scenario: None,
            solver: SolveOptions::default(),
            ot: OtConfig::default(),
            barrier: BarrierConfig::default(),
            measure: MeasureConfig::default(),
        }
    }

    /// Parses a TOML document. Scenario tables are layered over the preset
    /// of their `kind` and `n`.
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(value) = doc.remove("scenario") {
            let toml::Value::Table(user) = value else {
                return Err(Error::Config("scenario must be a table".into()));
            };
            let kind: ScenarioKind = match user.get("kind") {
                Some(v) => v.clone().try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?,
                None => ScenarioKind::Segment,
            };
            let n = match user.get("n") {
                Some(toml::Value::Integer(n)) if (2..=3).contains(n) => *n as usize,
                Some(v) => return Err(Error::Config(format!("scenario n must be 2 or 3, got {v}"))),
                None => 2,
            };
            let preset = ScenarioSpec::preset(kind, n);
            let mut merged = toml::Table::try_from(&preset).map_err(|e| Error::Config(e.to_string()))?;
            merged.extend(user);
            doc.insert("scenario".into(), toml::Value::Table(merged));
        }
        let config: RunConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    /// The configuration as TOML; parsing it back gives the same value.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    /// Scenario of a `solve` run: the given one or the segment preset.
    pub fn scenario_spec(&self) -> ScenarioSpec {
        self.scenario
            .clone()
            .unwrap_or_else(|| ScenarioSpec::preset(ScenarioKind::Segment, 2))
    }

    pub fn validate(&self) -> Result<()> {
        match self.command {
            Command::Solve => {
                self.scenario_spec().validate()?;
                if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
                    return Err(Error::Config("solver tol and max_iter must be positive".into()));
                }
            }
            Command::Ot | Command::Interp => {
                self.ot.shape().validate()?;
                if !(self.ot.tau > 0.0) {
                    return Err(Error::Config(format!("tau must be positive, got {}", self.ot.tau)));
                }
                if !(self.ot.tol > 0.0) || self.ot.max_steps == 0 || self.ot.per_cell == 0 {
                    return Err(Error::Config("ot tol, max_steps and per_cell must be positive".into()));
                }
                if let Some(t) = self.ot.frames.iter().find(|t| !(0.0..=1.0).contains(*t)) {
                    return Err(Error::Config(format!("frame time {t} is outside [0, 1]")));
                }
            }
            Command::Barrier => {
                let b = &self.barrier;
                if b.mode == BarrierMode::CStar && (b.grid_points < 2 || !(b.grid_lo < b.grid_hi)) {
                    return Err(Error::Config("the constant search needs grid_lo < grid_hi and 2+ points".into()));
                }
            }
            Command::Measure => {
                let m = &self.measure;
                let positive = [
                    ("mesh", m.mesh),
                    ("domain_radius", m.domain_radius),
                    ("tol", m.tol),
                    ("line_tol", m.line_tol),
                ];
                for (name, v) in positive {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(Error::Config(format!("measure {name} must be positive, got {v}")));
                    }
                }
                let reach = if m.region_radius > 0.0 {
                    m.region_radius
                } else {
                    m.half_width * 2f64.sqrt()
                };
                if !(reach > 0.0 && reach < m.domain_radius) {
                    return Err(Error::Config("the measured region must lie inside the sampled disk".into()));
                }
                if m.domain_radius / m.mesh > 2000.0 {
                    return Err(Error::Config(format!("mesh {} is too fine for radius {}", m.mesh, m.domain_radius)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_reference_values() {
        let c = RunConfig::from_toml("command = \"ot\"").unwrap();
        assert_eq!(c.ot.lambda, 0.8);
        assert_eq!(c.ot.m, 2.0);
        assert_eq!(c.ot.e, 5.0);
        assert_eq!(c.ot.r2, 2.0 / 15.0);
        assert_eq!(c.barrier.alpha, 0.5);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("command = \"ot\"\n[ot]\nlamda = 0.7\n").unwrap_err().is_config());
        assert!(RunConfig::from_toml("command = \"solve\"\nverbose = true\n").is_err());
        assert!(RunConfig::from_toml("command = \"solve\"\n[scenario]\nkind = \"cross\"\nepsilon = 1\n").is_err());
    }

    #[test]
    fn scenario_tables_layer_over_presets() {
        let c = RunConfig::from_toml("command = \"solve\"\n[scenario]\nkind = \"polytope_skeleton\"\nh_min = 0.02\n").unwrap();
        let s = c.scenario.unwrap();
        assert_eq!(s.alpha, 0.9);
        assert_eq!(s.h_min, 0.02);
    }

    #[test]
    fn echo_round_trips() {
        let c = RunConfig::from_toml("command = \"solve\"\n[scenario]\nkind = \"cross\"\n").unwrap();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
