//! Checkpoint container: JSON metadata + named little-endian f32 arrays.
//!
//! Layout: 8-byte magic, u64 LE metadata length, metadata JSON, raw tensor
//! blob. The metadata carries the configs, step, metric history, a shape
//! directory for every tensor, and a SHA-256 of the blob; a truncated or
//! bit-flipped file fails closed before anything is loaded. Optimizer
//! moments ride along under reserved `optim.` names so resumed runs
//! continue bit-identically.

use std::fs;
use std::path::Path;

use rdstn_core::config::{DecoderConfig, EncoderConfig, TrainConfig};
use rdstn_core::model::RdstnModel;
use rdstn_core::optim::Adam;
use rdstn_core::tensor::Tensor;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_err, AppError, AppResult};

const MAGIC: &[u8; 8] = b"RDSTNCP1";
const FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub scale: f64,
    /// Mean PSNR in dB; `None` flags identical images (infinite PSNR).
    pub psnr_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub step: usize,
    pub train_loss: Option<f64>,
    #[serde(default)]
    pub eval: Vec<EvalPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    /// Byte offset into the data blob.
    pub offset: u64,
    /// Element count.
    pub len: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub format: u32,
    pub encoder: EncoderConfig,
    pub decoder: DecoderConfig,
    pub train: Option<TrainConfig>,
    pub step: usize,
    #[serde(default)]
    pub metrics: Vec<MetricRecord>,
    pub best_psnr: Option<f64>,
    pub optimizer_step: Option<u64>,
    pub tensors: Vec<TensorEntry>,
    pub data_len: u64,
    pub data_sha256: String,
}

#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    tensors: Vec<(String, Tensor<f32>)>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Checkpoint {
    pub fn from_model(
        model: &RdstnModel<f32>,
        train: Option<TrainConfig>,
        step: usize,
        metrics: Vec<MetricRecord>,
        best_psnr: Option<f64>,
        optimizer: Option<&Adam<f32>>,
    ) -> Self {
        let mut tensors: Vec<(String, Tensor<f32>)> = model
            .store()
            .entries()
            .iter()
            .map(|e| (e.name.clone(), e.tensor.clone()))
            .collect();
        let mut optimizer_step = None;
        if let Some(opt) = optimizer {
            let (t, m, v) = opt.state();
            optimizer_step = Some(t);
            for (entry, tensor) in model.store().entries().iter().zip(m) {
                tensors.push((format!("optim.m.{}", entry.name), tensor.clone()));
            }
            for (entry, tensor) in model.store().entries().iter().zip(v) {
                tensors.push((format!("optim.v.{}", entry.name), tensor.clone()));
            }
        }
        let meta = CheckpointMeta {
            format: FORMAT,
            encoder: model.encoder_config().clone(),
            decoder: model.decoder_config().clone(),
            train,
            step,
            metrics,
            best_psnr,
            optimizer_step,
            tensors: Vec::new(), // filled on save
            data_len: 0,
            data_sha256: String::new(),
        };
        Self { meta, tensors }
    }

    pub fn tensor(&self, name: &str) -> Option<&Tensor<f32>> {
        self.tensors.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn save(&self, path: &Path) -> AppResult<()> {
        let mut blob: Vec<u8> = Vec::new();
        let mut directory = Vec::with_capacity(self.tensors.len());
        for (name, tensor) in &self.tensors {
            let offset = blob.len() as u64;
            for v in tensor.data() {
                blob.extend_from_slice(&v.to_le_bytes());
            }
            directory.push(TensorEntry {
                name: name.clone(),
                shape: tensor.shape().to_vec(),
                offset,
                len: tensor.numel() as u64,
            });
        }
        let mut meta = self.meta.clone();
        meta.tensors = directory;
        meta.data_len = blob.len() as u64;
        meta.data_sha256 = hex(&Sha256::digest(&blob));

        let json = serde_json::to_vec(&meta)?;
        let mut out = Vec::with_capacity(MAGIC.len() + 8 + json.len() + blob.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        out.extend_from_slice(&blob);
        fs::write(path, out).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let bytes = fs::read(path).map_err(io_err(path))?;
        let fail = |why: &str| AppError::CorruptCheckpoint(format!("{}: {why}", path.display()));
        if bytes.len() < MAGIC.len() + 8 || &bytes[..MAGIC.len()] != MAGIC {
            return Err(fail("bad magic"));
        }
        let json_len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let data_start = 16 + json_len;
        if bytes.len() < data_start {
            return Err(fail("truncated metadata"));
        }
        let meta: CheckpointMeta = serde_json::from_slice(&bytes[16..data_start])
            .map_err(|e| fail(&format!("metadata: {e}")))?;
        if meta.format != FORMAT {
            return Err(fail(&format!("unsupported format {}", meta.format)));
        }
        let blob = &bytes[data_start..];
        if blob.len() as u64 != meta.data_len {
            return Err(fail(&format!(
                "data blob is {} bytes, directory says {}",
                blob.len(),
                meta.data_len
            )));
        }
        let digest = hex(&Sha256::digest(blob));
        if digest != meta.data_sha256 {
            return Err(AppError::ChecksumMismatch(format!(
                "{}: stored {} computed {digest}",
                path.display(),
                meta.data_sha256
            )));
        }
        let mut tensors = Vec::with_capacity(meta.tensors.len());
        for entry in &meta.tensors {
            let start = entry.offset as usize;
            let end = start + entry.len as usize * 4;
            if end > blob.len() {
                return Err(fail(&format!("tensor {} overruns the blob", entry.name)));
            }
            let data: Vec<f32> = blob[start..end]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            if entry.shape.iter().product::<usize>() != entry.len as usize {
                return Err(fail(&format!("tensor {} shape/len mismatch", entry.name)));
            }
            tensors.push((entry.name.clone(), Tensor::new(&entry.shape, data)));
        }
        Ok(Self { meta, tensors })
    }

    /// Rebuilds the model from the embedded configs and loads every
    /// parameter by name. Missing or reshaped tensors are structured
    /// config-mismatch errors, not partial loads.
    pub fn into_model(&self) -> AppResult<RdstnModel<f32>> {
        let mut model = RdstnModel::new(self.meta.encoder.clone(), self.meta.decoder.clone(), 0)
            .map_err(|e| AppError::ConfigMismatch(e.to_string()))?;
        let names: Vec<String> =
            model.store().entries().iter().map(|e| e.name.clone()).collect();
        for name in names {
            let tensor = self.tensor(&name).ok_or_else(|| {
                AppError::ConfigMismatch(format!("checkpoint lacks parameter '{name}'"))
            })?;
            model
                .store_mut()
                .set_by_name(&name, tensor.clone())
                .map_err(|e| AppError::ConfigMismatch(e.to_string()))?;
        }
        Ok(model)
    }

    /// Restores optimizer moments for a resumed run.
    pub fn restore_optimizer(&self, model: &RdstnModel<f32>) -> AppResult<Option<Adam<f32>>> {
        let Some(t) = self.meta.optimizer_step else { return Ok(None) };
        let mut opt = Adam::new(model.store());
        let mut m = Vec::new();
        let mut v = Vec::new();
        for entry in model.store().entries() {
            let get = |prefix: &str| {
                self.tensor(&format!("{prefix}.{}", entry.name)).cloned().ok_or_else(|| {
                    AppError::ConfigMismatch(format!(
                        "checkpoint lacks optimizer state for '{}'",
                        entry.name
                    ))
                })
            };
            m.push(get("optim.m")?);
            v.push(get("optim.v")?);
        }
        opt.restore(t, m, v);
        Ok(Some(opt))
    }

    /// Errors when the checkpoint's architecture differs from an expected
    /// config (used when a config file accompanies `--resume`).
    pub fn verify_configs(&self, enc: &EncoderConfig, dec: &DecoderConfig) -> AppResult<()> {
        if &self.meta.encoder != enc {
            return Err(AppError::ConfigMismatch(format!(
                "encoder config differs from checkpoint: expected {enc:?}, found {:?}",
                self.meta.encoder
            )));
        }
        if &self.meta.decoder != dec {
            return Err(AppError::ConfigMismatch(format!(
                "decoder config differs from checkpoint: expected {dec:?}, found {:?}",
                self.meta.decoder
            )));
        }
        Ok(())
    }
}
