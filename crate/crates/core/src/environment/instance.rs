use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::ArmMeansTensor;
use crate::vector::RewardVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Each objective gets its own Gaussian deviate.
    IndependentGaussian,
    /// One Gaussian deviate drives every objective; objective `d` is the
    /// first one shifted by `mu_d - mu_1`.
    FullyDependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// Standard deviation of the Gaussian deviates; 0 gives deterministic rewards.
    pub scale: f64,
}

impl NoiseModel {
    pub fn standard_gaussian() -> Self {
        NoiseModel {
            kind: NoiseKind::IndependentGaussian,
            scale: 1.0,
        }
    }

    pub fn fully_dependent() -> Self {
        NoiseModel {
            kind: NoiseKind::FullyDependent,
            scale: 1.0,
        }
    }

    pub fn noiseless() -> Self {
        NoiseModel {
            kind: NoiseKind::IndependentGaussian,
            scale: 0.0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.scale == 0.0
    }
}

/// A sampled environment: ground-truth means plus a reward noise model.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub tensor: ArmMeansTensor,
    pub noise: NoiseModel,
    pub label: String,
}

impl Instance {
    pub fn new(tensor: ArmMeansTensor, noise: NoiseModel, label: impl Into<String>) -> Result<Self> {
        if !(noise.scale >= 0.0) || !noise.scale.is_finite() {
            return Err(Error::arg(format!(
                "noise scale must be finite and non-negative, got {}",
                noise.scale
            )));
        }
        Ok(Instance {
            tensor,
            noise,
            label: label.into(),
        })
    }

    /// Same means and label with a different noise model.
    pub fn with_noise(&self, noise: NoiseModel) -> Result<Self> {
        Instance::new(self.tensor.clone(), noise, self.label.clone())
    }

    pub fn n_groups(&self) -> usize {
        self.tensor.n_groups()
    }

    pub fn n_arms(&self) -> usize {
        self.tensor.n_arms()
    }

    pub fn n_dims(&self) -> usize {
        self.tensor.n_dims()
    }

    /// One reward vector from arm `(group, arm)`.
    pub fn sample<R: Rng + ?Sized>(&self, group: usize, arm: usize, rng: &mut R) -> Result<RewardVector> {
        self.tensor.check_indices(group, arm)?;
        let mut out = vec![0.0; self.n_dims()];
        self.sample_into(group, arm, rng, &mut out);
        Ok(RewardVector::new(out))
    }

    /// Writes one reward vector into `out` (length D). Indices are not checked.
    pub fn sample_into<R: Rng + ?Sized>(&self, group: usize, arm: usize, rng: &mut R, out: &mut [f64]) {
        let mu = self.tensor.arm(group, arm);
        let scale = self.noise.scale;
        match self.noise.kind {
            NoiseKind::IndependentGaussian => {
                for (o, &m) in out.iter_mut().zip(mu) {
                    let g: f64 = rng.sample(StandardNormal);
                    *o = m + scale * g;
                }
            }
            NoiseKind::FullyDependent => {
                let g: f64 = rng.sample(StandardNormal);
                let first = mu[0] + scale * g;
                out[0] = first;
                for d in 1..mu.len() {
                    out[d] = first + (mu[d] - mu[0]);
                }
            }
        }
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            n_groups: self.n_groups(),
            n_arms_per_group: self.n_arms(),
            n_dims: self.n_dims(),
            means: self.tensor.to_nested(),
            noise: self.noise,
            label: self.label.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::arg(format!("malformed instance JSON: {e}")))?;
        file.into_instance()
    }

    pub fn load(path: &Path) -> std::io::Result<Result<Self>> {
        Ok(Self::from_json(&std::fs::read_to_string(path)?))
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_json() + "\n")
    }
}

/// On-disk instance layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n_groups: usize,
    pub n_arms_per_group: usize,
    pub n_dims: usize,
    pub means: Vec<Vec<Vec<f64>>>,
    pub noise: NoiseModel,
    pub label: String,
}

impl InstanceFile {
    pub fn into_instance(self) -> Result<Instance> {
        let tensor = ArmMeansTensor::from_nested(&self.means)?;
        if (tensor.n_groups(), tensor.n_arms(), tensor.n_dims())
            != (self.n_groups, self.n_arms_per_group, self.n_dims)
        {
            return Err(Error::InvalidTensor(format!(
                "declared shape {}x{}x{} does not match means {}x{}x{}",
                self.n_groups,
                self.n_arms_per_group,
                self.n_dims,
                tensor.n_groups(),
                tensor.n_arms(),
                tensor.n_dims()
            )));
        }
        Instance::new(tensor, self.noise, self.label)
    }
}
