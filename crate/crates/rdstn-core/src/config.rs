// f64 math comes from the Float trait under no_std; std builds have
// inherent methods and see this as unused.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, CoreResult};

/// Architecture of the residual dense shifted-window encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    /// Input image channels (1 for grayscale ultrasound).
    pub channels: usize,
    /// Embedding / feature dimension `d`.
    pub dim: usize,
    /// Number of hierarchical stages `N`.
    pub stages: usize,
    /// Shifted-window transformer blocks per stage `D`.
    pub blocks_per_stage: usize,
    /// Attention window side `M`.
    pub window: usize,
    /// Attention heads `h`; must divide `dim`.
    pub heads: usize,
    /// Hidden width of each block's MLP as a multiple of `dim`.
    pub mlp_ratio: f64,
    /// Local feature fusion: concat a stage's input with its block-stack
    /// output and recover channels with a 1x1 conv.
    pub use_lff: bool,
    /// Global feature fusion: concat all stage outputs with the embedded
    /// input, 1x1 conv, then the residual to the embedded input.
    pub use_gff: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        // Paper-shaped defaults: four stages of six blocks. dim/window/heads
        // are unpublished; these land the parameter count near 3.2M.
        Self {
            channels: 1,
            dim: 120,
            stages: 4,
            blocks_per_stage: 6,
            window: 8,
            heads: 6,
            mlp_ratio: 2.0,
            use_lff: true,
            use_gff: true,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> CoreResult<()> {
        if self.channels == 0 {
            return Err(invalid_arg!("channels must be >= 1"));
        }
        if self.dim == 0 || self.heads == 0 || self.dim % self.heads != 0 {
            return Err(invalid_arg!(
                "dim {} must be a positive multiple of heads {}",
                self.dim,
                self.heads
            ));
        }
        if self.window < 2 {
            return Err(invalid_arg!("window must be >= 2, got {}", self.window));
        }
        if self.stages == 0 || self.blocks_per_stage == 0 {
            return Err(invalid_arg!("stages and blocks_per_stage must be >= 1"));
        }
        if self.mlp_ratio <= 0.0 {
            return Err(invalid_arg!("mlp_ratio must be positive"));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.dim / self.heads
    }

    pub fn mlp_hidden(&self) -> usize {
        ((self.dim as f64) * self.mlp_ratio).round() as usize
    }
}

/// Shape of the implicit decoder MLP and its optional query features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    /// Hidden layer widths; the output layer (to `channels`) is implied.
    pub hidden: Vec<usize>,
    /// Feed the query cell size to the MLP alongside the offset.
    pub cell_decoding: bool,
    /// Concatenate the 3x3 latent neighborhood instead of a single code.
    pub feature_unfolding: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self { hidden: vec![256, 256, 256, 256], cell_decoding: false, feature_unfolding: false }
    }
}

impl DecoderConfig {
    /// MLP input width for a latent dimension `d`.
    pub fn input_dim(&self, dim: usize) -> usize {
        let code = if self.feature_unfolding { 9 * dim } else { dim };
        code + 2 + if self.cell_decoding { 2 } else { 0 }
    }

    pub fn validate(&self) -> CoreResult<()> {
        if self.hidden.iter().any(|&w| w == 0) {
            return Err(invalid_arg!("decoder hidden widths must be positive"));
        }
        Ok(())
    }
}

/// The four feature-fusion settings of the ablation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AblationSetting {
    /// LFF off, GFF off.
    S1,
    /// LFF off, GFF on.
    S2,
    /// LFF on, GFF off.
    S3,
    /// LFF on, GFF on (the full model).
    S4,
}

impl AblationSetting {
    pub const ALL: [AblationSetting; 4] =
        [AblationSetting::S1, AblationSetting::S2, AblationSetting::S3, AblationSetting::S4];

    pub fn flags(self) -> (bool, bool) {
        match self {
            AblationSetting::S1 => (false, false),
            AblationSetting::S2 => (false, true),
            AblationSetting::S3 => (true, false),
            AblationSetting::S4 => (true, true),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AblationSetting::S1 => "S1",
            AblationSetting::S2 => "S2",
            AblationSetting::S3 => "S3",
            AblationSetting::S4 => "S4",
        }
    }

    pub fn parse(s: &str) -> CoreResult<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" => Ok(AblationSetting::S1),
            "S2" => Ok(AblationSetting::S2),
            "S3" => Ok(AblationSetting::S3),
            "S4" => Ok(AblationSetting::S4),
            other => Err(invalid_arg!("unknown ablation setting '{other}' (expected S1..S4)")),
        }
    }
}

/// Toggles the fusion flags of an encoder config per an ablation setting.
pub fn apply_ablation_setting(setting: AblationSetting, base: &EncoderConfig) -> EncoderConfig {
    let (lff, gff) = setting.flags();
    EncoderConfig { use_lff: lff, use_gff: gff, ..base.clone() }
}

/// Everything the training loop needs besides the dataset itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Continuous training scale is drawn uniformly from [scale_min, scale_max).
    pub scale_min: f64,
    pub scale_max: f64,
    /// LR patch side fed to the encoder.
    pub patch: usize,
    /// Query coordinates sampled per pair.
    pub k_samples: usize,
    /// Pairs per optimizer step.
    pub batch: usize,
    /// Total optimizer steps.
    pub steps: usize,
    /// Initial learning rate.
    pub lr: f64,
    /// Fractions of `steps` at which the LR is multiplied by `lr_decay_factor`.
    pub lr_decay_milestones: Vec<f64>,
    pub lr_decay_factor: f64,
    /// Master seed; drives splitting, sampling and init.
    pub seed: u64,
    pub ablation: AblationSetting,
    /// Evaluate on the held-out split every this many steps (0 = never).
    pub eval_every: usize,
    /// Scales used for held-out evaluation during training.
    pub eval_scales: Vec<f64>,
    /// Random horizontal/vertical flips during pair synthesis.
    pub augment_flips: bool,
    /// Queries per decoding batch during evaluation (bounds memory).
    pub query_batch: usize,
    /// Number of loader worker threads used for pair prefetching.
    pub loader_workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            scale_min: 1.0,
            scale_max: 4.0,
            patch: 48,
            k_samples: 2304,
            batch: 16,
            steps: 1000,
            lr: 1e-4,
            lr_decay_milestones: vec![0.5, 0.75, 0.9],
            lr_decay_factor: 0.5,
            seed: 0,
            ablation: AblationSetting::S4,
            eval_every: 0,
            eval_scales: vec![2.0, 3.0, 4.0],
            augment_flips: false,
            query_batch: 16384,
            loader_workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> CoreResult<()> {
        if !(self.scale_min >= 1.0 && self.scale_min < self.scale_max) {
            return Err(invalid_arg!(
                "need 1 <= scale_min < scale_max, got [{}, {})",
                self.scale_min,
                self.scale_max
            ));
        }
        if self.patch == 0 || self.k_samples == 0 || self.batch == 0 || self.steps == 0 {
            return Err(invalid_arg!("patch, k_samples, batch and steps must be positive"));
        }
        if self.lr <= 0.0 {
            return Err(invalid_arg!("learning rate must be positive"));
        }
        if self.query_batch == 0 {
            return Err(invalid_arg!("query_batch must be positive"));
        }
        Ok(())
    }

    /// Learning rate in effect at `step` (0-based), per the milestone decays.
    pub fn lr_at(&self, step: usize) -> f64 {
        let mut lr = self.lr;
        for &frac in &self.lr_decay_milestones {
            if (step as f64) >= frac * (self.steps as f64) {
                lr *= self.lr_decay_factor;
            }
        }
        lr
    }
}

/// Structured identifier carried in checkpoints/reports so runs are
/// traceable back to a config + dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RunMetadata {
    pub dataset_id: String,
    pub split_seed: u64,
}
