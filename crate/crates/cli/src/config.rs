//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! tasks = ["basis", "rse", "exact-triple"]
//!
//! [geometry]
//! a = 1.0
//! gamma = 3.0
//!
//! [basis]
//! target_m = 800        # or: radius = 40.0
//!
//! [perturbation]
//! spikes = [{ position = 0.0, strength = 3.0 }]
//! # or: lattice = { n = 4, strength = 10.0 }
//!
//! [output]
//! directory = "out"
//! ```

use std::path::{Path, PathBuf};

use rse1d_core::basis::SystemGeometry;
use rse1d_core::rse::{DeltaSpike, Perturbation};
use serde::{Deserialize, Serialize};

use crate::ConfigError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Basis,
    Rse,
    ExactTriple,
    KpBands,
    Converge,
    LatticeSweep,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Basis => "basis",
            Task::Rse => "rse",
            Task::ExactTriple => "exact-triple",
            Task::KpBands => "kp-bands",
            Task::Converge => "converge",
            Task::LatticeSweep => "lattice-sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub a: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub radius: Option<f64>,
    pub target_m: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpikeConfig {
    pub position: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub n: usize,
    pub strength: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    #[serde(default)]
    pub spikes: Vec<SpikeConfig>,
    pub lattice: Option<LatticeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    /// Basis sizes of the convergence ladder.
    pub m_ladder: Vec<usize>,
    /// Basis size of a separate self-convergence reference. Defaults to the
    /// largest ladder entry when no exact reference exists.
    pub reference_m: Option<usize>,
    /// Evaluation window as a fraction of the basis radius.
    pub window: f64,
    pub gap_factor: f64,
    /// Band padding; defaults to `0.05 pi / d`.
    pub pad: Option<f64>,
    /// Largest matching distance, in units of `1/a`.
    pub max_dist: f64,
    /// Upper end of the band scan; defaults to the evaluation window.
    pub k_max: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            m_ladder: Vec::new(),
            reference_m: None,
            window: 0.5,
            gap_factor: 1.5,
            pad: None,
            max_dist: std::f64::consts::PI / 8.0,
            k_max: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Spike counts `N` of the swept lattices.
    pub n_values: Vec<usize>,
    /// Spike strengths; every lattice spike and both double-well spikes share it.
    pub gamma_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Any of `csv`, `json`, `gnuplot`.
    pub formats: Vec<String>,
    /// Wall-clock timings in `run.json`; off by default so that repeated
    /// runs are byte-identical.
    pub record_timing: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec!["csv".into(), "json".into(), "gnuplot".into()],
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub tasks: Vec<Task>,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    pub fn has(&self, task: Task) -> bool {
        self.tasks.contains(&task)
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f == format)
    }

    pub fn geometry(&self) -> SystemGeometry {
        SystemGeometry {
            a: self.geometry.a,
            gamma: self.geometry.gamma,
        }
    }

    /// Inner lattice spacing `d = 2a/(N-1)`, if a lattice is configured.
    pub fn lattice_period(&self) -> Option<f64> {
        self.perturbation
            .lattice
            .as_ref()
            .map(|l| 2.0 * self.geometry.a / (l.n as f64 - 1.0))
    }

    pub fn perturbation(&self) -> Perturbation {
        let a = self.geometry.a;
        let mut spikes: Vec<DeltaSpike> = self
            .perturbation
            .spikes
            .iter()
            .map(|s| DeltaSpike::new(s.position, s.strength))
            .collect();
        if let Some(l) = &self.perturbation.lattice {
            if let Ok(p) = Perturbation::lattice(l.n, l.strength, a) {
                spikes.extend_from_slice(p.spikes());
            }
        }
        Perturbation::new(spikes)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.geometry;
        if !(g.a > 0.0 && g.a.is_finite()) {
            return Err(bad("geometry.a", format!("must be positive, got {}", g.a)));
        }
        if !(g.gamma != 0.0 && g.gamma.is_finite()) {
            return Err(bad("geometry.gamma", format!("must be finite and nonzero, got {}", g.gamma)));
        }
        if self.tasks.is_empty() {
            return Err(bad("tasks", "at least one task is required"));
        }
        match (self.basis.radius, self.basis.target_m) {
            (Some(_), Some(_)) => return Err(bad("basis", "give either radius or target_m, not both")),
            (Some(r), None) if !(r > 0.0 && r.is_finite()) => {
                return Err(bad("basis.radius", format!("must be positive, got {r}")))
            }
            (None, Some(0)) => return Err(bad("basis.target_m", "must be positive")),
            (None, None) if self.needs_basis() => {
                return Err(bad("basis", "one of radius or target_m is required"))
            }
            _ => {}
        }
        for s in &self.perturbation.spikes {
            if !(s.position.abs() < g.a) {
                return Err(bad(
                    "perturbation.position",
                    format!("spike at {} is not strictly inside |x| < {}", s.position, g.a),
                ));
            }
            if !s.strength.is_finite() {
                return Err(bad("perturbation.strength", "must be finite"));
            }
        }
        if let Some(l) = &self.perturbation.lattice {
            if l.n < 2 {
                return Err(bad("perturbation.lattice.n", format!("must be at least 2, got {}", l.n)));
            }
            if !(l.strength.is_finite() && l.strength != 0.0) {
                return Err(bad("perturbation.lattice.strength", "must be finite and nonzero"));
            }
        }
        if self.has(Task::ExactTriple) {
            let p = self.perturbation();
            if p.spikes().len() != 1 || p.spikes()[0].strength == 0.0 {
                return Err(bad(
                    "perturbation",
                    "exact-triple needs exactly one spike with nonzero strength",
                ));
            }
        }
        if self.has(Task::KpBands) && self.perturbation.lattice.is_none() {
            return Err(bad("perturbation.lattice", "kp-bands needs a lattice"));
        }
        let an = &self.analysis;
        if self.has(Task::Converge) {
            if an.m_ladder.len() < 2 {
                return Err(bad("analysis.m_ladder", "needs at least two basis sizes"));
            }
            if an.m_ladder.windows(2).any(|w| w[0] >= w[1]) || an.m_ladder[0] == 0 {
                return Err(bad("analysis.m_ladder", "must be positive and strictly increasing"));
            }
        }
        if let Some(m) = an.reference_m {
            if an.m_ladder.last().is_some_and(|&last| m <= last) {
                return Err(bad("analysis.reference_m", "must exceed every ladder entry"));
            }
        }
        if !(an.window > 0.0 && an.window <= 1.0) {
            return Err(bad("analysis.window", format!("must lie in (0, 1], got {}", an.window)));
        }
        if !(an.gap_factor > 0.0 && an.gap_factor.is_finite()) {
            return Err(bad("analysis.gap_factor", "must be positive"));
        }
        if an.pad.is_some_and(|p| !(p >= 0.0 && p.is_finite())) {
            return Err(bad("analysis.pad", "must be nonnegative"));
        }
        if !(an.max_dist > 0.0 && an.max_dist.is_finite()) {
            return Err(bad("analysis.max_dist", "must be positive"));
        }
        if an.k_max.is_some_and(|k| !(k > 0.0 && k.is_finite())) {
            return Err(bad("analysis.k_max", "must be positive"));
        }
        if self.has(Task::LatticeSweep) {
            if self.sweep.n_values.is_empty() || self.sweep.gamma_values.is_empty() {
                return Err(bad("sweep", "n_values and gamma_values must be nonempty"));
            }
            if self.sweep.n_values.iter().any(|&n| n < 2) {
                return Err(bad("sweep.n_values", "every N must be at least 2"));
            }
            if self.sweep.gamma_values.iter().any(|g| !(g.is_finite() && *g != 0.0)) {
                return Err(bad("sweep.gamma_values", "must be finite and nonzero"));
            }
        }
        for f in &self.output.formats {
            if !matches!(f.as_str(), "csv" | "json" | "gnuplot") {
                return Err(bad("output.formats", format!("unknown format {f:?}")));
            }
        }
        Ok(())
    }

    fn needs_basis(&self) -> bool {
        self.tasks
            .iter()
            .any(|t| matches!(t, Task::Basis | Task::Rse | Task::ExactTriple | Task::LatticeSweep))
            || (self.has(Task::KpBands) && self.analysis.k_max.is_none())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
tasks = ["basis"]
[geometry]
a = 1.0
gamma = 3.0
[basis]
radius = 20.0
"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = ScenarioConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.tasks, vec![Task::Basis]);
        assert_eq!(cfg.analysis.window, 0.5);
        assert!(cfg.wants("csv"));
    }

    #[test]
    fn spike_on_the_boundary_names_the_key() {
        let text = format!("{MINIMAL}[perturbation]\nspikes = [{{ position = 1.0, strength = 3.0 }}]\n");
        match ScenarioConfig::from_toml(&text) {
            Err(ConfigError::Invalid { key, .. }) => assert_eq!(key, "perturbation.position"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("radius = 20.0", "radius = 20.0\nradios = 3");
        assert!(matches!(ScenarioConfig::from_toml(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn lattice_positions() {
        let text = format!("{MINIMAL}[perturbation]\nlattice = {{ n = 4, strength = 10.0 }}\n");
        let cfg = ScenarioConfig::from_toml(&text).unwrap();
        let pos: Vec<f64> = cfg.perturbation().spikes().iter().map(|s| s.position).collect();
        assert_eq!(pos.len(), 2);
        assert!((pos[0] + 1.0 / 3.0).abs() < 1e-15 && (pos[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((cfg.lattice_period().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn ladder_must_increase() {
        let text = MINIMAL.replace("tasks = [\"basis\"]", "tasks = [\"converge\"]")
            + "[analysis]\nm_ladder = [200, 100]\n";
        match ScenarioConfig::from_toml(&text) {
            Err(ConfigError::Invalid { key, .. }) => assert_eq!(key, "analysis.m_ladder"),
            other => panic!("{other:?}"),
        }
    }
}
