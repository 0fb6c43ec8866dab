use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use ids_lab_core::ids::linspace;
use ids_lab_core::{Boundary, Model};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    pub experiments: Vec<Experiment>,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    #[serde(default = "yes")]
    pub plots: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { seed: 0, workers: None, output_dir: default_output_dir(), plots: true }
    }
}

fn default_output_dir() -> String {
    "ids-lab-out".into()
}

fn yes() -> bool {
    true
}

/// Either an explicit list or `linspace(start, stop, points)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    Linspace { start: f64, stop: f64, points: usize },
    List(Vec<f64>),
}

impl LambdaGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            LambdaGrid::Linspace { start, stop, points } => linspace(*start, *stop, *points),
            LambdaGrid::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// Exhaustion on centered boxes of the given radii.
    Ids {
        name: String,
        lambdas: LambdaGrid,
        radii: Vec<u32>,
        #[serde(default)]
        bc: Boundary,
        /// θ-grid for the oracle column; only used for periodic models.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        oracle_theta: Option<usize>,
    },
    Oracle {
        name: String,
        lambdas: LambdaGrid,
        theta_samples: usize,
    },
    Bracket {
        name: String,
        lambdas: LambdaGrid,
        samples: usize,
    },
    Trace {
        name: String,
        lambdas: LambdaGrid,
        radius: u32,
        samples: usize,
        #[serde(default)]
        bc: Boundary,
    },
    Wegner {
        name: String,
        energy: f64,
        epsilons: Vec<f64>,
        /// Side lengths `L` of the anchored boxes; `|J| = L^d`.
        sides: Vec<u32>,
        samples: usize,
    },
    Selfavg {
        name: String,
        lambda: f64,
        radii: Vec<u32>,
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Ids,
    Oracle,
    Bracket,
    Trace,
    Wegner,
    Selfavg,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Ids => "ids",
            Kind::Oracle => "oracle",
            Kind::Bracket => "bracket",
            Kind::Trace => "trace",
            Kind::Wegner => "wegner",
            Kind::Selfavg => "selfavg",
        };
        f.write_str(s)
    }
}

impl Experiment {
    pub fn name(&self) -> &str {
        match self {
            Experiment::Ids { name, .. }
            | Experiment::Oracle { name, .. }
            | Experiment::Bracket { name, .. }
            | Experiment::Trace { name, .. }
            | Experiment::Wegner { name, .. }
            | Experiment::Selfavg { name, .. } => name,
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            Experiment::Ids { .. } => Kind::Ids,
            Experiment::Oracle { .. } => Kind::Oracle,
            Experiment::Bracket { .. } => Kind::Bracket,
            Experiment::Trace { .. } => Kind::Trace,
            Experiment::Wegner { .. } => Kind::Wegner,
            Experiment::Selfavg { .. } => Kind::Selfavg,
        }
    }

    fn grid(&self) -> Option<&LambdaGrid> {
        match self {
            Experiment::Ids { lambdas, .. }
            | Experiment::Oracle { lambdas, .. }
            | Experiment::Bracket { lambdas, .. }
            | Experiment::Trace { lambdas, .. } => Some(lambdas),
            _ => None,
        }
    }

    /// Default experiment of `kind` for `model`, on a grid that covers a
    /// Gershgorin enclosure of a small sample.
    pub fn default_for(kind: Kind, model: &Model, seed: u64) -> Experiment {
        let (lo, hi) = spectral_window(model, seed);
        let lambdas = LambdaGrid::Linspace { start: lo, stop: hi, points: 41 };
        let mid = 0.5 * (lo + hi);
        let name = format!("default-{kind}");
        let d = model.dim();
        match kind {
            Kind::Ids => Experiment::Ids {
                name,
                lambdas,
                radii: match d {
                    1 => vec![8, 16, 32, 64],
                    2 => vec![2, 4, 8, 16],
                    _ => vec![1, 2, 3],
                },
                bc: Boundary::Dirichlet,
                oracle_theta: None,
            },
            Kind::Oracle => Experiment::Oracle { name, lambdas, theta_samples: if d == 1 { 4096 } else { 64 } },
            Kind::Bracket => Experiment::Bracket { name, lambdas, samples: 500 },
            Kind::Trace => Experiment::Trace {
                name,
                lambdas,
                radius: if d == 1 { 16 } else { 2 },
                samples: 20,
                bc: Boundary::Dirichlet,
            },
            Kind::Wegner => Experiment::Wegner {
                name,
                energy: mid,
                epsilons: vec![0.02, 0.05, 0.1, 0.2],
                sides: match d {
                    1 => vec![16, 32, 64],
                    2 => vec![4, 6, 8],
                    _ => vec![2, 3, 4],
                },
                samples: 200,
            },
            Kind::Selfavg => Experiment::Selfavg {
                name,
                lambda: mid,
                radii: if d == 1 { vec![4, 8, 16, 32] } else { vec![1, 2, 4] },
                samples: 100,
            },
        }
    }
}

fn spectral_window(model: &Model, seed: u64) -> (f64, f64) {
    use ids_lab_core::lattice::build_region;
    use ids_lab_core::operator::assemble;
    let region = build_region(model.cell(), &ids_lab_core::CellSet::centered_box(model.dim(), 1));
    let omega = model.realize(seed, &region);
    match assemble(&region, &omega, model, Boundary::Neumann) {
        Ok(op) => {
            let (lo, hi) = op.gershgorin();
            (lo.min(0.0) - 0.5, hi + 0.5)
        }
        Err(_) => (-0.5, 10.0),
    }
}

/// A config problem, located by its field path and, for syntax errors, its
/// line and column.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.path.as_str()) {
            (Some(line), ".") => write!(f, "line {line}: {}", self.message),
            (Some(line), path) => write!(f, "line {line}, field `{path}`: {}", self.message),
            (None, path) => write!(f, "field `{path}`: {}", self.message),
        }
    }
}

fn at(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError { path: path.into(), line: None, message: message.into() }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| ConfigError {
            path: e.path().to_string(),
            line: Some(e.inner().line()),
            message: e.inner().to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| at(".", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks that serde cannot express: unique file-safe names, strictly
    /// increasing grids, positive sizes.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut names = BTreeSet::new();
        for (k, e) in self.experiments.iter().enumerate() {
            let here = |field: &str| format!("experiments[{k}].{field}");
            let name = e.name();
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(at(here("name"), "names may use only ASCII letters, digits, '-' and '_'"));
            }
            if !names.insert(name) {
                return Err(at(here("name"), format!("duplicate experiment name `{name}`")));
            }
            if let Some(grid) = e.grid() {
                let values = grid.values();
                if values.is_empty() {
                    return Err(at(here("lambdas"), "lambda grid is empty"));
                }
                if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(at(here("lambdas"), "lambda grid must be finite and strictly increasing"));
                }
            }
            match e {
                Experiment::Ids { radii, .. } => {
                    if radii.is_empty() || radii.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(at(here("radii"), "radii must be nonempty and strictly increasing"));
                    }
                }
                Experiment::Oracle { theta_samples, .. } if *theta_samples == 0 => {
                    return Err(at(here("theta_samples"), "must be positive"));
                }
                Experiment::Bracket { samples, .. } if *samples < 2 => {
                    return Err(at(here("samples"), "bracketing needs at least 2 samples"));
                }
                Experiment::Trace { samples, .. } if *samples == 0 => {
                    return Err(at(here("samples"), "must be positive"));
                }
                Experiment::Wegner { epsilons, sides, samples, energy, .. } => {
                    if !energy.is_finite() {
                        return Err(at(here("energy"), "must be finite"));
                    }
                    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
                        return Err(at(here("epsilons"), "epsilons must be nonempty and positive"));
                    }
                    if sides.is_empty() || sides.contains(&0) {
                        return Err(at(here("sides"), "sides must be nonempty and positive"));
                    }
                    if *samples == 0 {
                        return Err(at(here("samples"), "must be positive"));
                    }
                }
                Experiment::Selfavg { radii, samples, lambda, .. } => {
                    if radii.is_empty() {
                        return Err(at(here("radii"), "radii must be nonempty"));
                    }
                    if *samples < 10 {
                        return Err(at(here("samples"), "self-averaging needs at least 10 samples"));
                    }
                    if !lambda.is_finite() {
                        return Err(at(here("lambda"), "must be finite"));
                    }
                }
                _ => {}
            }
        }
        if self.run.workers == Some(0) {
            return Err(at("run.workers", "must be positive"));
        }
        Ok(())
    }

    /// Hash of everything that determines the numbers: model, experiments
    /// and seed. Worker count, output directory and plotting are excluded.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            model: &'a Model,
            experiments: &'a [Experiment],
            seed: u64,
        }
        let json = serde_json::to_string(&Key { model: &self.model, experiments: &self.experiments, seed: self.run.seed })
            .expect("config serializes");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }
}

/// Seed of one experiment, derived from the master seed and its name so
/// that filtering the experiment list leaves it unchanged.
pub fn experiment_seed(master: u64, name: &str) -> u64 {
    let digest = Sha256::digest(name.as_bytes());
    let stream = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
    ids_lab_core::fields::derive_seed(master, stream)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE: &str = r#"{
      "model": {
        "cell": { "dim": 1, "vertex_weights": [1.0], "cross_bonds": [{ "from": 0, "offset": [1], "to": 0 }] },
        "potential": {
          "coupling": { "kind": "uniform", "a": 0.0, "b": 1.0 },
          "single_site": [{ "offset": [0], "vertex": 0, "value": 1.0 }]
        }
      },
      "experiments": [
        { "estimator": "bracket", "name": "b", "lambdas": { "start": 0.0, "stop": 5.0, "points": 11 }, "samples": 20 },
        { "estimator": "wegner", "name": "w", "energy": 2.0, "epsilons": [0.1, 0.2], "sides": [8, 16], "samples": 10 }
      ],
      "run": { "seed": 7 }
    }"#;

    #[test]
    fn round_trip() {
        let c = ExperimentConfig::from_json(LINE).unwrap();
        let again = ExperimentConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
        assert_eq!(c.run.output_dir, "ids-lab-out");
    }

    #[test]
    fn hash_ignores_workers_but_not_seed() {
        let c = ExperimentConfig::from_json(LINE).unwrap();
        let mut w = c.clone();
        w.run.workers = Some(8);
        assert_eq!(c.hash(), w.hash());
        w.run.seed = 8;
        assert_ne!(c.hash(), w.hash());
    }

    #[test]
    fn non_monotone_grid_is_named() {
        let bad = LINE.replace(r#"{ "start": 0.0, "stop": 5.0, "points": 11 }"#, "[0.0, 2.0, 1.0]");
        let err = ExperimentConfig::from_json(&bad).unwrap_err();
        assert_eq!(err.path, "experiments[0].lambdas");
    }

    #[test]
    fn unknown_and_invalid_fields_are_located() {
        let err = ExperimentConfig::from_json(&LINE.replace("\"samples\": 20", "\"samplez\": 20")).unwrap_err();
        assert!(err.path.starts_with("experiments[0]"), "{err}");
        let err = ExperimentConfig::from_json(&LINE.replace("\"vertex_weights\": [1.0]", "\"vertex_weights\": [-1.0]"))
            .unwrap_err();
        assert!(err.path.starts_with("model"), "{err}");
        assert!(err.line.is_some());
    }

    #[test]
    fn seeds_depend_on_name_only() {
        assert_eq!(experiment_seed(1, "a"), experiment_seed(1, "a"));
        assert_ne!(experiment_seed(1, "a"), experiment_seed(1, "b"));
        assert_ne!(experiment_seed(1, "a"), experiment_seed(2, "a"));
    }
}
