//! The full network: encoder + implicit decoder behind one parameter store.

// f64 math comes from the Float trait under no_std; std builds have
// inherent methods and see this as unused.
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

use crate::config::{DecoderConfig, EncoderConfig};
use crate::coords::make_coord_grid;
use crate::decoder::{attach_decode, DecoderParams};
use crate::encoder::{attach_encode_image, encode, EncoderParams, LatentGrid};
use crate::error::{invalid_arg, CoreResult};
use crate::graph::{Graph, NodeId};
use crate::image::Image;
use crate::pairs::TrainingPair;
use crate::params::{Bound, ParamStore};
use crate::real::Real;
use crate::rng::{stream_rng, Stream};

/// Encoder, decoder and their shared parameter store.
#[derive(Debug, Clone)]
pub struct RdstnModel<T> {
    store: ParamStore<T>,
    encoder: EncoderParams,
    decoder: DecoderParams,
    enc_cfg: EncoderConfig,
    dec_cfg: DecoderConfig,
}

impl<T: Real> RdstnModel<T> {
    /// Fresh model with seed-deterministic initialization.
    pub fn new(enc_cfg: EncoderConfig, dec_cfg: DecoderConfig, seed: u64) -> CoreResult<Self> {
        enc_cfg.validate()?;
        dec_cfg.validate()?;
        let mut rng = stream_rng(seed, Stream::Init, 0);
        let mut store = ParamStore::new();
        let encoder = EncoderParams::init(&mut store, &mut rng, &enc_cfg);
        let decoder = DecoderParams::init(&mut store, &mut rng, &dec_cfg, enc_cfg.dim, enc_cfg.channels);
        Ok(Self { store, encoder, decoder, enc_cfg, dec_cfg })
    }

    pub fn encoder_config(&self) -> &EncoderConfig {
        &self.enc_cfg
    }

    pub fn decoder_config(&self) -> &DecoderConfig {
        &self.dec_cfg
    }

    pub fn store(&self) -> &ParamStore<T> {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.store
    }

    pub fn encoder_params(&self) -> &EncoderParams {
        &self.encoder
    }

    pub fn decoder_params(&self) -> &DecoderParams {
        &self.decoder
    }

    /// Total learnable scalar count.
    pub fn count_parameters(&self) -> usize {
        self.store.total_scalars()
    }

    /// Runs the encoder over frozen parameters.
    pub fn encode(&self, img: &Image<T>) -> CoreResult<LatentGrid<T>> {
        encode(&self.store, &self.encoder, &self.enc_cfg, img)
    }

    /// Builds the training loss for one pair inside an existing graph.
    pub fn attach_pair_loss(
        &self,
        g: &mut Graph<T>,
        bound: &Bound,
        pair: &TrainingPair<T>,
    ) -> CoreResult<NodeId> {
        let lr = &pair.lr_patch;
        if lr.channels() != self.enc_cfg.channels {
            return Err(invalid_arg!(
                "model expects {} channels, pair has {}",
                self.enc_cfg.channels,
                lr.channels()
            ));
        }
        let latent = attach_encode_image(g, bound, &self.encoder, &self.enc_cfg, lr)?;
        let cell = self.dec_cfg.cell_decoding.then(|| {
            let s = T::two() / T::of_usize(pair.hr_side);
            [s, s]
        });
        let pred = attach_decode(
            g,
            bound,
            &self.decoder,
            &self.dec_cfg,
            latent,
            lr.height(),
            lr.width(),
            &pair.query_coords,
            cell,
            true,
        );
        let target = g.constant(pair.targets.clone());
        let diff = g.sub(pred, target);
        let abs = g.abs(diff);
        Ok(g.mean_all(abs))
    }

    /// Arbitrary-scale upscaling: encode once, then decode the full target
    /// coordinate grid in bounded batches. `use_ensemble = false` selects
    /// the single-nearest-code path (the chessboard ablation).
    pub fn upscale(
        &self,
        img: &Image<T>,
        target_h: usize,
        target_w: usize,
        use_ensemble: bool,
        query_batch: usize,
    ) -> CoreResult<Image<T>> {
        if target_h == 0 || target_w == 0 {
            return Err(invalid_arg!("target size must be positive, got {target_h}x{target_w}"));
        }
        let batch = query_batch.max(1);
        let latent = self.encode(img)?;
        let grid = make_coord_grid(target_h, target_w)?;
        let coords = grid.points::<T>();
        let cell = self.dec_cfg.cell_decoding.then(|| {
            [T::two() / T::of_usize(target_h), T::two() / T::of_usize(target_w)]
        });
        let channels = self.enc_cfg.channels;
        let mut out = Image::zeros(channels, target_h, target_w);
        for (chunk_i, chunk) in coords.chunks(batch).enumerate() {
            let pred = crate::decoder::decode_queries(
                &self.store,
                &self.decoder,
                &self.dec_cfg,
                &latent,
                chunk,
                cell,
                use_ensemble,
            )?;
            let offset = chunk_i * batch;
            for (k, row) in pred.data().chunks(channels).enumerate() {
                let t = offset + k;
                let (y, x) = (t / target_w, t % target_w);
                for (c, &v) in row.iter().enumerate() {
                    out.set(c, y, x, v);
                }
            }
        }
        out.clamp_in_place();
        Ok(out)
    }

    /// Upscale by a real factor; the output side is `round(s * dim)`.
    pub fn upscale_by(
        &self,
        img: &Image<T>,
        scale: f64,
        use_ensemble: bool,
        query_batch: usize,
    ) -> CoreResult<Image<T>> {
        if scale <= 0.0 {
            return Err(invalid_arg!("scale must be positive, got {scale}"));
        }
        let th = (scale * img.height() as f64).round().max(1.0) as usize;
        let tw = (scale * img.width() as f64).round().max(1.0) as usize;
        self.upscale(img, th, tw, use_ensemble, query_batch)
    }

    /// Parameter names in checkpoint order.
    pub fn param_names(&self) -> Vec<&str> {
        self.store.entries().iter().map(|e| e.name.as_str()).collect()
    }
}
