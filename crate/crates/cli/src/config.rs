//! Scenario files.
//!
//! A scenario is a TOML document with `schema = 1` and the sections
//! `[scenario]`, `[wall]` (single moving wall) or `[cavity2]` (two walls),
//! `[seed]` and `[numeric]`:
//!
//! ```toml
//! schema = 1
//!
//! [scenario]
//! name = "n2-resonance"
//! analysis = "classical-energy"
//! output_dir = "out/n2"
//!
//! [wall]
//! kind = "sinusoidal"      # static | sinusoidal | harmonic | tabulated
//! L = 1.0
//! dL_over_L = 0.01         # or dL
//! N = 2                    # or omega, or omega_over_omegaN (= ωL/π)
//!
//! [seed]
//! kind = "gaussian"
//! width = 0.2
//!
//! [numeric]
//! n_max = 100
//! scan_domega = false     # resonance: also scan Δω/ω over [scan_min, scan_max]
//! ```
//!
//! Two-wall cavities use `[cavity2]` with `mode` one of `breathing`,
//! `translational`, `harmonic` or `custom`; custom walls are given as
//! `[cavity2.right]` and `[cavity2.left]` tables with the `[wall]` keys.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dce_core::profile::{Interpolation, SeedParams, SeedProfile, SeedRegistry};
use dce_core::twowall::{HarmonicPair, TwoWallCavity};
use dce_core::WallTrajectory;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn field_error(field: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {message}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    #[serde(default)]
    pub scenario: ScenarioSection,
    pub wall: Option<WallSection>,
    pub cavity2: Option<CavitySection>,
    #[serde(default)]
    pub seed: SeedSection,
    #[serde(default)]
    pub numeric: NumericSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default = "default_name")]
    pub name: String,
    pub analysis: Option<String>,
    pub output_dir: Option<PathBuf>,
}

fn default_name() -> String {
    "scenario".into()
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            name: default_name(),
            analysis: None,
            output_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WallSection {
    #[serde(default = "default_wall_kind")]
    pub kind: String,
    #[serde(rename = "L", default = "one")]
    pub length: f64,
    #[serde(rename = "dL")]
    pub dl: Option<f64>,
    #[serde(rename = "dL_over_L")]
    pub dl_over_l: Option<f64>,
    pub omega: Option<f64>,
    #[serde(rename = "omega_over_omegaN")]
    pub omega_over_omega_n: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub delta: f64,
    pub table: Option<PathBuf>,
}

fn default_wall_kind() -> String {
    "sinusoidal".into()
}

fn one() -> f64 {
    1.0
}

impl Default for WallSection {
    /// The N = 2 resonance with `ΔL/L = 0.01`.
    fn default() -> Self {
        WallSection {
            kind: default_wall_kind(),
            length: 1.0,
            dl: None,
            dl_over_l: Some(0.01),
            omega: None,
            omega_over_omega_n: None,
            n: Some(2),
            phase: 0.0,
            t0: 0.0,
            delta: 0.0,
            table: None,
        }
    }
}

impl WallSection {
    pub fn amplitude(&self, prefix: &str) -> Result<f64> {
        match (self.dl, self.dl_over_l) {
            (Some(_), Some(_)) => Err(field_error(
                &format!("{prefix}.dL"),
                "give either dL or dL_over_L, not both",
            )),
            (Some(d), None) => Ok(d),
            (None, Some(r)) => Ok(r * self.length),
            (None, None) => Err(field_error(
                &format!("{prefix}.dL"),
                "missing amplitude (dL or dL_over_L)",
            )),
        }
    }

    pub fn omega(&self, prefix: &str) -> Result<f64> {
        match (self.omega, self.omega_over_omega_n, self.n) {
            (Some(w), None, None) => Ok(w),
            (None, Some(r), None) => Ok(r * PI / self.length),
            (None, None, Some(n)) => Ok(n as f64 * PI / self.length),
            (None, None, None) => Err(field_error(
                &format!("{prefix}.omega"),
                "missing frequency (omega, omega_over_omegaN or N)",
            )),
            _ => Err(field_error(
                &format!("{prefix}.omega"),
                "give exactly one of omega, omega_over_omegaN, N",
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub mode: String,
    #[serde(rename = "L", default = "one")]
    pub length: f64,
    #[serde(rename = "dL")]
    pub dl: Option<f64>,
    #[serde(rename = "dL1")]
    pub dl1: Option<f64>,
    #[serde(rename = "dL2")]
    pub dl2: Option<f64>,
    #[serde(rename = "omegaL")]
    pub omega_left: Option<f64>,
    #[serde(rename = "omegaR")]
    pub omega_right: Option<f64>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(default)]
    pub delta: f64,
    pub right: Option<WallSection>,
    pub left: Option<WallSection>,
}

impl CavitySection {
    fn amplitudes(&self) -> Result<(f64, f64)> {
        let a1 = self
            .dl1
            .or(self.dl)
            .ok_or_else(|| field_error("cavity2.dL1", "missing amplitude"))?;
        let a2 = self
            .dl2
            .or(self.dl)
            .ok_or_else(|| field_error("cavity2.dL2", "missing amplitude"))?;
        Ok((a1, a2))
    }

    fn omegas(&self) -> Result<(f64, f64)> {
        let from_n = self.n.map(|n| n as f64 * PI / self.length);
        let right = self
            .omega_right
            .or(from_n)
            .ok_or_else(|| field_error("cavity2.omegaR", "missing frequency (omegaR or N)"))?;
        let left = self
            .omega_left
            .or(from_n)
            .ok_or_else(|| field_error("cavity2.omegaL", "missing frequency (omegaL or N)"))?;
        Ok((right, left))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedSection {
    #[serde(default = "default_seed_kind")]
    pub kind: String,
    #[serde(default = "default_interpolation")]
    pub interpolation: String,
    #[serde(default = "default_seed_samples")]
    pub samples: usize,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

fn default_seed_kind() -> String {
    "gaussian".into()
}
fn default_interpolation() -> String {
    "cubic-monotone".into()
}
fn default_seed_samples() -> usize {
    4097
}

impl Default for SeedSection {
    fn default() -> Self {
        SeedSection {
            kind: default_seed_kind(),
            interpolation: default_interpolation(),
            samples: default_seed_samples(),
            params: BTreeMap::new(),
        }
    }
}

impl SeedSection {
    pub fn interpolation(&self) -> Result<Interpolation> {
        match self.interpolation.as_str() {
            "cubic-monotone" => Ok(Interpolation::CubicMonotone),
            "linear" => Ok(Interpolation::Linear),
            other => Err(field_error(
                "seed.interpolation",
                format!("unknown interpolation `{other}` (linear, cubic-monotone)"),
            )),
        }
    }

    pub fn build(&self, length: f64) -> Result<Box<dyn SeedProfile>> {
        let params: SeedParams = self.params.clone();
        SeedRegistry::default()
            .build(&self.kind, &params, length)
            .map_err(|e| field_error("seed", e))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericSection {
    /// Root tolerance relative to the rest length.
    pub root_tolerance: f64,
    pub quad_rel_tol: f64,
    pub n_max: usize,
    pub t_max: f64,
    pub nx: usize,
    pub nt: usize,
    pub n_probe: usize,
    pub samples_per_period: usize,
    pub k_check: usize,
    pub tau: f64,
    pub n: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub samples: usize,
    pub scan_min: f64,
    pub scan_max: f64,
    pub scan_step: f64,
    /// Also scan detunings in the `resonance` analysis.
    pub scan_domega: bool,
    pub horizon: f64,
    pub moore_normalization: String,
}

impl Default for NumericSection {
    fn default() -> Self {
        NumericSection {
            root_tolerance: 1e-12,
            quad_rel_tol: 1e-10,
            n_max: 100,
            t_max: 40.0,
            nx: 200,
            nt: 200,
            n_probe: 64,
            samples_per_period: 4096,
            k_check: 3,
            tau: 0.0,
            n: 50,
            tau_min: -1.0,
            tau_max: 5.0,
            samples: 601,
            scan_min: -0.02,
            scan_max: 0.02,
            scan_step: 1e-3,
            scan_domega: false,
            horizon: 20.0,
            moore_normalization: "linear".into(),
        }
    }
}

/// Wall kinds selectable by name.
type WallBuilder = fn(&WallSection, &str, &Path) -> Result<WallTrajectory>;

pub struct TrajectoryRegistry {
    builders: BTreeMap<&'static str, WallBuilder>,
}

impl Default for TrajectoryRegistry {
    fn default() -> Self {
        let mut r = TrajectoryRegistry {
            builders: BTreeMap::new(),
        };
        r.register("static", |w, _, _| {
            Ok(WallTrajectory::static_wall(w.length)?)
        });
        r.register("sinusoidal", |w, p, _| {
            Ok(WallTrajectory::sinusoidal(
                w.length,
                w.amplitude(p)?,
                w.omega(p)?,
                w.phase,
                w.t0,
            )?)
        });
        r.register("harmonic", |w, p, _| {
            Ok(WallTrajectory::two_wall_component(
                w.length,
                w.amplitude(p)?,
                w.omega(p)?,
                w.delta,
            )?)
        });
        r.register("tabulated", |w, p, base| {
            let table = w.table.as_ref().ok_or_else(|| {
                field_error(&format!("{p}.table"), "tabulated walls need a table path")
            })?;
            let path = base.join(table);
            let (ts, ls) = read_table(&path)?;
            Ok(WallTrajectory::tabulated(ts, ls, None)?)
        });
        r
    }
}

impl TrajectoryRegistry {
    pub fn register(&mut self, name: &'static str, builder: WallBuilder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.builders.keys().copied()
    }

    /// `prefix` names the section in diagnostics; `base` resolves table paths.
    pub fn build(&self, wall: &WallSection, prefix: &str, base: &Path) -> Result<WallTrajectory> {
        let builder = self.builders.get(wall.kind.as_str()).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            field_error(
                &format!("{prefix}.kind"),
                format!(
                    "unknown wall kind `{}` (known: {})",
                    wall.kind,
                    known.join(", ")
                ),
            )
        })?;
        builder(wall, prefix, base).map_err(|e| match e {
            CliError::Config(m) if !m.starts_with("field") => field_error(prefix, m),
            other => other,
        })
    }
}

/// Two-column `t,L` CSV; a header row is optional.
fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .from_reader(file);
    let (mut ts, mut ls) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let parse = |j: usize| record.get(j).and_then(|s| s.trim().parse::<f64>().ok());
        match (parse(0), parse(1)) {
            (Some(t), Some(l)) => {
                ts.push(t);
                ls.push(l);
            }
            _ if i == 0 => continue,
            _ => {
                return Err(CliError::Config(format!(
                    "{}: row {} is not a `t,L` pair",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok((ts, ls))
}

/// The cavity a scenario describes.
pub enum Cavity {
    Single(WallTrajectory),
    Two(TwoWallCavity),
}

impl Cavity {
    pub fn rest_length(&self) -> f64 {
        match self {
            Cavity::Single(w) => w.rest_length(),
            Cavity::Two(c) => c.rest_length(),
        }
    }
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
            let msg = e.message().trim().to_string();
            CliError::Config(match line {
                Some(l) => format!("line {l}: {msg}"),
                None => msg,
            })
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// The built-in scenario used when no config file is given.
    pub fn default_scenario() -> Self {
        Scenario {
            schema: SCHEMA_VERSION,
            scenario: ScenarioSection::default(),
            wall: Some(WallSection::default()),
            cavity2: None,
            seed: SeedSection::default(),
            numeric: NumericSection::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(field_error(
                "schema",
                format!(
                    "unsupported schema {} (expected {SCHEMA_VERSION})",
                    self.schema
                ),
            ));
        }
        if self.numeric.moore_normalization != "linear" {
            return Err(field_error(
                "numeric.moore_normalization",
                format!(
                    "only the linear static branch R(τ) = τ/L is supported, got `{}`",
                    self.numeric.moore_normalization
                ),
            ));
        }
        if self.wall.is_some() && self.cavity2.is_some() {
            return Err(field_error(
                "cavity2",
                "give either [wall] or [cavity2], not both",
            ));
        }
        self.seed.interpolation()?;
        Ok(())
    }

    /// Builds the cavity, checking every trajectory constraint.
    pub fn cavity(&self, base: &Path) -> Result<Cavity> {
        let registry = TrajectoryRegistry::default();
        if let Some(c) = &self.cavity2 {
            return Ok(Cavity::Two(build_two_wall(c, &registry, base)?));
        }
        let wall = self.wall.clone().unwrap_or_default();
        Ok(Cavity::Single(registry.build(&wall, "wall", base)?))
    }

    /// Resonance order `N` when the drive sits on (or near) `ω_N`.
    pub fn resonance_order(&self) -> Option<usize> {
        if let Some(c) = &self.cavity2 {
            if let Some(n) = c.n {
                return Some(n);
            }
            let w = c.omega_right.or(c.omega_left)?;
            return nearest_order(w * c.length / PI);
        }
        let wall = self.wall.clone().unwrap_or_default();
        match wall.kind.as_str() {
            "sinusoidal" | "harmonic" => nearest_order(wall.omega("wall").ok()? * wall.length / PI),
            _ => None,
        }
    }
}

fn nearest_order(ratio: f64) -> Option<usize> {
    let n = ratio.round();
    (n >= 1.0 && (ratio - n).abs() < 0.25).then_some(n as usize)
}

fn build_two_wall(
    c: &CavitySection,
    registry: &TrajectoryRegistry,
    base: &Path,
) -> Result<TwoWallCavity> {
    let cavity =
        match c.mode.as_str() {
            "breathing" => {
                let (a, _) = c.amplitudes()?;
                let n = c.n.ok_or_else(|| {
                    field_error("cavity2.N", "breathing mode needs the resonance order N")
                })?;
                TwoWallCavity::breathing(c.length, a, n)?
            }
            "translational" => {
                let (a, _) = c.amplitudes()?;
                TwoWallCavity::translational(c.length, a)?
            }
            "harmonic" => {
                let (a1, a2) = c.amplitudes()?;
                let (w1, w2) = c.omegas()?;
                TwoWallCavity::harmonic(HarmonicPair {
                    length: c.length,
                    amplitude_right: a1,
                    amplitude_left: a2,
                    omega_right: w1,
                    omega_left: w2,
                    dephasing: c.delta,
                })?
            }
            "custom" => {
                let right = c.right.as_ref().ok_or_else(|| {
                    field_error("cavity2.right", "custom mode needs [cavity2.right]")
                })?;
                let left = c.left.as_ref().ok_or_else(|| {
                    field_error("cavity2.left", "custom mode needs [cavity2.left]")
                })?;
                TwoWallCavity::custom(
                    registry.build(right, "cavity2.right", base)?,
                    registry.build(left, "cavity2.left", base)?,
                )?
            }
            other => {
                return Err(field_error(
                    "cavity2.mode",
                    format!("unknown mode `{other}` (breathing, translational, harmonic, custom)"),
                ))
            }
        };
    Ok(cavity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::parse(
            "schema = 1\n[wall]\nkind = \"sinusoidal\"\nL = 1\ndL_over_L = 0.01\nN = 2\n",
        )
        .unwrap();
        assert_eq!(s.resonance_order(), Some(2));
        match s.cavity(Path::new(".")).unwrap() {
            Cavity::Single(w) => assert!((w.harmonic().unwrap().omega - 2.0 * PI).abs() < 1e-15),
            Cavity::Two(_) => panic!("expected a single wall"),
        }
    }

    #[test]
    fn reports_line_of_unknown_field() {
        let err =
            Scenario::parse("schema = 1\n[wall]\nkind = \"static\"\nspeed = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 4") && msg.contains("speed"), "{msg}");
    }

    #[test]
    fn rejects_conflicting_amplitudes_and_superluminal_walls() {
        let s = Scenario::parse("schema = 1\n[wall]\ndL = 0.1\ndL_over_L = 0.1\nN = 1\n").unwrap();
        let msg = s.cavity(Path::new(".")).err().unwrap().to_string();
        assert!(msg.contains("wall.dL"), "{msg}");
        let s = Scenario::parse("schema = 1\n[wall]\ndL_over_L = 0.4\nN = 1\n").unwrap();
        let msg = s.cavity(Path::new(".")).err().unwrap().to_string();
        assert!(msg.contains("subluminal"), "{msg}");
    }

    #[test]
    fn rejects_other_normalizations_and_schemas() {
        assert!(Scenario::parse("schema = 2\n").is_err());
        assert!(
            Scenario::parse("schema = 1\n[numeric]\nmoore_normalization = \"affine\"\n").is_err()
        );
    }

    #[test]
    fn two_wall_modes() {
        let s = Scenario::parse(
            "schema = 1\n[cavity2]\nmode = \"breathing\"\nL = 1\ndL = 0.01\nN = 2\n",
        )
        .unwrap();
        assert!(matches!(s.cavity(Path::new(".")).unwrap(), Cavity::Two(_)));
        let s = Scenario::parse("schema = 1\n[cavity2]\nmode = \"wobble\"\n").unwrap();
        assert!(s.cavity(Path::new(".")).is_err());
        let s = Scenario::parse(
            "schema = 1\n[cavity2]\nmode = \"custom\"\n[cavity2.right]\nkind = \"static\"\nL = 0.5\n[cavity2.left]\nkind = \"static\"\nL = 0.5\n",
        )
        .unwrap();
        assert!(matches!(s.cavity(Path::new(".")).unwrap(), Cavity::Two(_)));
    }
}
