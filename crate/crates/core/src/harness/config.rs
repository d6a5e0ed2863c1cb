use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{Engine, Method};
use crate::error::{param, Error, Result};
use crate::oracle_sim::DEFAULT_KEY_CAP;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    VerifyLemmas,
    Separation,
    Endtoend,
    Concentration,
    CircuitRun,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::VerifyLemmas => "verify-lemmas",
            ExperimentKind::Separation => "separation",
            ExperimentKind::Endtoend => "endtoend",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::CircuitRun => "circuit-run",
        }
    }
}

/// Parameter grid. Axes a command does not use are ignored. An empty `d`
/// means `d = C/ε²` for the commands that need calibrated dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub eps: Vec<f64>,
    #[serde(default)]
    pub d: Vec<usize>,
    pub q: Vec<u32>,
    #[serde(default)]
    pub n: Vec<usize>,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
}

impl Default for Options {
    fn default() -> Self {
        Options { engine: Engine::default(), methods: default_methods() }
    }
}

fn default_methods() -> Vec<Method> {
    vec![Method::Estimation, Method::Amplification, Method::Naive]
}

fn default_cap() -> usize {
    DEFAULT_KEY_CAP
}

/// One experiment, as read from a TOML file:
///
/// ```toml
/// kind = "separation"
/// seed = 7
/// cap = 200000          # optional, histogram key cap
/// output = "out"        # optional
///
/// [grid]
/// eps = [0.05, 0.1, 0.2]
/// d = [3]
/// q = [8]
/// n = [1, 2, 3, 4, 5, 6]
/// trials = 20
///
/// [options]             # optional
/// engine = "subspace"   # or "statevector"
/// methods = ["estimation", "amplification", "naive", "lifted"]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub grid: Grid,
    #[serde(default)]
    pub options: Options,
}

impl ExperimentConfig {
    /// The default desk-scale experiment for `kind`.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let grid = match kind {
            ExperimentKind::VerifyLemmas => Grid {
                eps: vec![0.0, 0.1, 0.25, 0.45],
                d: vec![],
                q: vec![8, 64, 257, 1024],
                n: vec![],
                trials: 1,
            },
            ExperimentKind::Separation => Grid {
                eps: vec![0.0, 0.05, 0.1, 0.2],
                d: vec![3],
                q: vec![8],
                n: (1..=6).collect(),
                trials: 20,
            },
            ExperimentKind::Endtoend => Grid { eps: vec![0.05], d: vec![], q: vec![257], n: vec![], trials: 400 },
            ExperimentKind::Concentration => {
                Grid { eps: vec![0.2, 0.1, 0.05], d: vec![], q: vec![257], n: vec![], trials: 1000 }
            }
            ExperimentKind::CircuitRun => Grid { eps: vec![0.05, 0.1, 0.2], d: vec![], q: vec![], n: vec![], trials: 1 },
        };
        ExperimentConfig { kind, seed: 0, cap: DEFAULT_KEY_CAP, output: None, grid, options: Options::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            Error::Parse { line, msg: e.message().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        self.validate()?;
        toml::to_string(self).map_err(|e| Error::Parameter(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.trials == 0 {
            return param("grid.trials must be at least 1");
        }
        if g.eps.is_empty() {
            return param("grid.eps is empty");
        }
        if let Some(e) = g.eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return param(format!("grid.eps value {e} outside [0, 1]"));
        }
        if self.seed > i64::MAX as u64 {
            return param(format!("seed {} does not fit a TOML integer (max {})", self.seed, i64::MAX));
        }
        if self.cap == 0 {
            return param("cap must be positive");
        }
        let need_q = self.kind != ExperimentKind::CircuitRun;
        if need_q && g.q.is_empty() {
            return param("grid.q is empty");
        }
        if let Some(q) = g.q.iter().find(|&&q| q < 2) {
            return param(format!("grid.q value {q} below 2"));
        }
        if self.kind == ExperimentKind::Separation {
            if g.d.is_empty() || g.n.is_empty() {
                return param("separation needs non-empty grid.d and grid.n");
            }
            for &q in &g.q {
                if let Some(n) = g.n.iter().find(|&&n| n > q as usize) {
                    return param(format!("query count n = {n} exceeds q = {q}"));
                }
            }
        }
        if self.kind == ExperimentKind::Endtoend && self.options.methods.is_empty() {
            return param("options.methods is empty");
        }
        Ok(())
    }
}
