//! Sweep configuration and the built-in presets.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Te,
    Age,
    Ge,
    Unis,
    Eecb,
    Tel,
}

impl Algorithm {
    pub const GPSI: [Algorithm; 4] = [Algorithm::Te, Algorithm::Age, Algorithm::Ge, Algorithm::Unis];
    pub const LBGI: [Algorithm; 2] = [Algorithm::Eecb, Algorithm::Tel];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Te => "te",
            Algorithm::Age => "age",
            Algorithm::Ge => "ge",
            Algorithm::Unis => "unis",
            Algorithm::Eecb => "eecb",
            Algorithm::Tel => "tel",
        }
    }

    pub fn is_lbgi(self) -> bool {
        matches!(self, Algorithm::Eecb | Algorithm::Tel)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    VaryN,
    VaryK,
    WeightSweep,
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::VaryN => "vary_n",
            Preset::VaryK => "vary_k",
            Preset::WeightSweep => "weight_sweep",
            Preset::Custom => "custom",
        }
    }
}

/// How Pareto-set instances are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Plain rejection from i.i.d. uniform tensors.
    #[default]
    Rejection,
    /// Metropolis chain over the feasible set; see `gen_random_gpsi_mcmc`.
    Mcmc,
}

/// Parameter lists of a sweep. Which fields are read depends on the preset:
/// `vary_n` iterates `n_groups`, `vary_k` iterates `n_arms`, `weight_sweep`
/// iterates `weights` on a single instance, `custom` iterates `instances`
/// (crossed with `weights` for the weighted algorithms).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub n_groups: Vec<usize>,
    pub n_arms: Vec<usize>,
    pub n_dims: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    /// Pareto-optimal groups per instance; `vary_n` defaults to `ceil(0.3 N)`.
    pub pareto_count: Option<usize>,
    pub instances: Vec<PathBuf>,
}

fn default_beta_scale() -> f64 {
    1.0
}

fn default_max_rounds() -> u64 {
    bgi_core::te::DEFAULT_MAX_ROUNDS
}

fn default_mcmc_steps() -> u64 {
    20_000
}

fn default_attempt_budget() -> u64 {
    bgi_core::environment::DEFAULT_ATTEMPT_BUDGET
}

fn default_delta_min() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub algorithms: Vec<Algorithm>,
    pub delta: f64,
    pub epsilon: f64,
    #[serde(default = "default_beta_scale")]
    pub beta_scale: f64,
    pub replications: u32,
    #[serde(default)]
    pub master_seed: u64,
    pub grid: Grid,
    pub output_dir: PathBuf,

    #[serde(default = "default_max_rounds")]
    pub max_rounds: u64,
    #[serde(default)]
    pub sampler: Sampler,
    #[serde(default = "default_mcmc_steps")]
    pub mcmc_steps: u64,
    #[serde(default = "default_attempt_budget")]
    pub attempt_budget: u64,
    /// Minimum weighted gap of generated weighted instances.
    #[serde(default = "default_delta_min")]
    pub delta_min: f64,
    /// Draw a fresh instance for every replication instead of one per grid point.
    #[serde(default)]
    pub regenerate_per_replication: bool,
    /// All algorithms of a replication draw from the same per-arm reward
    /// streams, so the n-th pull of an arm returns the same reward in each.
    #[serde(default)]
    pub common_random_numbers: bool,
    /// Fill the `wall_clock_ms` column. Off by default since it breaks
    /// byte-identical output.
    #[serde(default)]
    pub timing: bool,
    /// Worker threads; `None` uses rayon's default.
    #[serde(default)]
    pub threads: Option<usize>,
}

/// The five weight vectors of the weighted comparison.
pub fn paper_weights() -> Vec<Vec<f64>> {
    vec![
        vec![0.1, 0.1, 1.0],
        vec![1.0, 1.0, 0.1],
        vec![0.1, 1.0, 1.0],
        vec![1.0, 1.0, 1.0],
        vec![1.0, 2.0, 3.0],
    ]
}

pub const PRESET_NAMES: [&str; 6] = [
    "desk-vary-n",
    "desk-vary-k",
    "desk-weight-sweep",
    "paper-vary-n",
    "paper-vary-k",
    "paper-weight-sweep",
];

impl ExperimentConfig {
    fn base(preset: Preset, algorithms: Vec<Algorithm>, grid: Grid, output_dir: &str) -> Self {
        ExperimentConfig {
            preset,
            algorithms,
            delta: 0.1,
            epsilon: 0.05,
            beta_scale: 1.0,
            replications: 10,
            master_seed: 0,
            grid,
            output_dir: PathBuf::from(output_dir),
            max_rounds: default_max_rounds(),
            sampler: Sampler::Mcmc,
            mcmc_steps: default_mcmc_steps(),
            attempt_budget: default_attempt_budget(),
            delta_min: default_delta_min(),
            regenerate_per_replication: false,
            common_random_numbers: true,
            timing: false,
            threads: None,
        }
    }

    /// Built-in configurations. The `paper-*` ones use the published
    /// accuracy and confidence and take hours.
    pub fn named(name: &str) -> Option<Self> {
        let gpsi = Algorithm::GPSI.to_vec();
        let lbgi = Algorithm::LBGI.to_vec();
        let cfg = match name {
            "desk-vary-n" => Self::base(
                Preset::VaryN,
                gpsi,
                Grid {
                    n_groups: vec![3, 4, 5],
                    n_arms: vec![6],
                    n_dims: vec![3],
                    ..Grid::default()
                },
                "results/desk-vary-n",
            ),
            "desk-vary-k" => Self::base(
                Preset::VaryK,
                gpsi,
                Grid {
                    n_groups: vec![5],
                    n_arms: vec![2, 4, 6],
                    n_dims: vec![3],
                    pareto_count: Some(2),
                    ..Grid::default()
                },
                "results/desk-vary-k",
            ),
            "desk-weight-sweep" => ExperimentConfig {
                replications: 5,
                ..Self::base(
                    Preset::WeightSweep,
                    lbgi,
                    Grid {
                        n_groups: vec![5],
                        n_arms: vec![5],
                        n_dims: vec![3],
                        weights: paper_weights(),
                        ..Grid::default()
                    },
                    "results/desk-weight-sweep",
                )
            },
            "paper-vary-n" => ExperimentConfig {
                delta: 0.01,
                epsilon: 0.01,
                replications: 20,
                ..Self::base(
                    Preset::VaryN,
                    gpsi,
                    Grid {
                        n_groups: vec![4, 6, 8, 10],
                        n_arms: vec![6],
                        n_dims: vec![3],
                        ..Grid::default()
                    },
                    "results/paper-vary-n",
                )
            },
            "paper-vary-k" => ExperimentConfig {
                delta: 0.01,
                epsilon: 0.01,
                replications: 20,
                ..Self::base(
                    Preset::VaryK,
                    gpsi,
                    Grid {
                        n_groups: vec![5],
                        n_arms: vec![2, 4, 6, 8, 10],
                        n_dims: vec![3],
                        pareto_count: Some(2),
                        ..Grid::default()
                    },
                    "results/paper-vary-k",
                )
            },
            "paper-weight-sweep" => ExperimentConfig {
                delta: 0.01,
                epsilon: 0.01,
                replications: 20,
                ..Self::base(
                    Preset::WeightSweep,
                    lbgi,
                    Grid {
                        n_groups: vec![5],
                        n_arms: vec![5],
                        n_dims: vec![3],
                        weights: paper_weights(),
                        ..Grid::default()
                    },
                    "results/paper-weight-sweep",
                )
            },
            _ => return None,
        };
        Some(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("algorithms must not be empty".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.beta_scale > 0.0) || !self.beta_scale.is_finite() {
            return bad(format!("beta_scale must be positive, got {}", self.beta_scale));
        }
        if self.max_rounds == 0 {
            return bad("max_rounds must be positive".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        let g = &self.grid;
        let single = |name: &str, v: &[usize]| -> Result<(), HarnessError> {
            match v {
                [x] if *x > 0 => Ok(()),
                _ => Err(HarnessError::Config(format!("grid.{name} must hold exactly one positive value for this preset"))),
            }
        };
        let nonempty = |name: &str, v: &[usize]| -> Result<(), HarnessError> {
            if v.is_empty() || v.contains(&0) {
                return Err(HarnessError::Config(format!("grid.{name} must be a non-empty list of positive values")));
            }
            Ok(())
        };
        let problem_ok = |lbgi: bool| -> Result<(), HarnessError> {
            match self.algorithms.iter().find(|a| a.is_lbgi() != lbgi) {
                Some(a) => Err(HarnessError::Config(format!(
                    "algorithm {} is not valid for preset {}",
                    a.name(),
                    self.preset.name()
                ))),
                None => Ok(()),
            }
        };
        match self.preset {
            Preset::VaryN => {
                nonempty("n_groups", &g.n_groups)?;
                single("n_arms", &g.n_arms)?;
                single("n_dims", &g.n_dims)?;
                problem_ok(false)?;
            }
            Preset::VaryK => {
                single("n_groups", &g.n_groups)?;
                nonempty("n_arms", &g.n_arms)?;
                single("n_dims", &g.n_dims)?;
                problem_ok(false)?;
            }
            Preset::WeightSweep => {
                single("n_groups", &g.n_groups)?;
                single("n_arms", &g.n_arms)?;
                single("n_dims", &g.n_dims)?;
                if g.weights.is_empty() {
                    return bad("grid.weights must not be empty".into());
                }
                if let Some(w) = g.weights.iter().find(|w| w.len() != g.n_dims[0]) {
                    return bad(format!("weight vector {w:?} does not have {} entries", g.n_dims[0]));
                }
                problem_ok(true)?;
            }
            Preset::Custom => {
                if g.instances.is_empty() {
                    return bad("grid.instances must not be empty".into());
                }
                if self.algorithms.iter().any(|a| a.is_lbgi()) && g.weights.is_empty() {
                    return bad("weighted algorithms need grid.weights".into());
                }
            }
        }
        if let Some(w) = g.weights.iter().flatten().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return bad(format!("weights must be positive and finite, got {w}"));
        }
        Ok(())
    }
}
