//! Deterministic training-pair loader with optional worker prefetch.
//!
//! The pair for global index `i` is a pure function of `(seed, i)` and the
//! image list: every random decision (image pick, scale, crop, flips, query
//! sampling) is drawn from streams derived from the index. Workers merely
//! race to compute different indices, so the consumed sequence is identical
//! for any worker count.

use std::collections::BinaryHeap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{sync_channel, Receiver};
use std::sync::Arc;
use std::thread::JoinHandle;

use rand::Rng;
use rdstn_core::config::TrainConfig;
use rdstn_core::image::Image;
use rdstn_core::pairs::{synthesize_training_pair, TrainingPair};
use rdstn_core::rng::{stream_rng, Stream};
use rdstn_core::train::sample_scale;
use rdstn_core::CoreError;

use crate::error::{AppError, AppResult};

/// How often to retry with a different image when one is too small for the
/// requested crop before giving up.
const MAX_ATTEMPTS: usize = 64;

/// Computes the training pair for one global index.
pub fn pair_for_index(
    images: &[Arc<Image<f32>>],
    cfg: &TrainConfig,
    index: u64,
) -> AppResult<TrainingPair<f32>> {
    let mut scale_rng = stream_rng(cfg.seed, Stream::Scale, index);
    let scale = sample_scale(&mut scale_rng, cfg.scale_min, cfg.scale_max)?;
    let mut rng = stream_rng(cfg.seed, Stream::Pair, index);
    for _ in 0..MAX_ATTEMPTS {
        let img_idx = rng.gen_range(0..images.len());
        match synthesize_training_pair(
            &images[img_idx],
            cfg.patch,
            cfg.k_samples,
            scale,
            cfg.augment_flips,
            &mut rng,
        ) {
            Ok(pair) => return Ok(pair),
            Err(CoreError::ImageTooSmall { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(AppError::InvalidArgument(format!(
        "no training image can host a {}-pixel crop at scale {scale:.2}",
        (scale * cfg.patch as f64).round()
    )))
}

struct Indexed(u64, AppResult<TrainingPair<f32>>);

impl PartialEq for Indexed {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}
impl Eq for Indexed {}
impl PartialOrd for Indexed {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Indexed {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // reversed: BinaryHeap is a max-heap, we pop the smallest index
        other.0.cmp(&self.0)
    }
}

/// Streams pairs in global-index order, prefetched by `loader_workers`
/// threads.
pub struct PairLoader {
    rx: Option<Receiver<Indexed>>,
    pending: BinaryHeap<Indexed>,
    next_index: u64,
    end_index: u64,
    handles: Vec<JoinHandle<()>>,
    // single-worker fallback computes inline
    inline: Option<(Arc<Vec<Arc<Image<f32>>>>, TrainConfig)>,
}

impl PairLoader {
    /// `start_index` is the first global pair index (step * batch);
    /// `end_index` is exclusive.
    pub fn new(
        images: Arc<Vec<Arc<Image<f32>>>>,
        cfg: &TrainConfig,
        start_index: u64,
        end_index: u64,
    ) -> Self {
        let workers = cfg.loader_workers.max(1);
        if workers == 1 {
            return Self {
                rx: None,
                pending: BinaryHeap::new(),
                next_index: start_index,
                end_index,
                handles: Vec::new(),
                inline: Some((images, cfg.clone())),
            };
        }
        let (tx, rx) = sync_channel(workers * cfg.batch.max(1) * 2);
        let counter = Arc::new(AtomicUsize::new(0));
        let mut handles = Vec::with_capacity(workers);
        for _ in 0..workers {
            let tx = tx.clone();
            let counter = counter.clone();
            let images = images.clone();
            let cfg = cfg.clone();
            handles.push(std::thread::spawn(move || loop {
                let offset = counter.fetch_add(1, Ordering::SeqCst) as u64;
                let index = start_index + offset;
                if index >= end_index {
                    break;
                }
                let pair = pair_for_index(&images, &cfg, index);
                if tx.send(Indexed(index, pair)).is_err() {
                    break;
                }
            }));
        }
        Self {
            rx: Some(rx),
            pending: BinaryHeap::new(),
            next_index: start_index,
            end_index,
            handles,
            inline: None,
        }
    }

    /// Next pair in index order.
    pub fn next_pair(&mut self) -> AppResult<TrainingPair<f32>> {
        assert!(self.next_index < self.end_index, "loader exhausted");
        if let Some((images, cfg)) = &self.inline {
            let pair = pair_for_index(images, cfg, self.next_index);
            self.next_index += 1;
            return pair;
        }
        loop {
            if let Some(head) = self.pending.peek() {
                if head.0 == self.next_index {
                    let Indexed(_, pair) = self.pending.pop().unwrap();
                    self.next_index += 1;
                    return pair;
                }
            }
            let item = self
                .rx
                .as_ref()
                .unwrap()
                .recv()
                .map_err(|_| AppError::Internal("pair loader workers died".into()))?;
            self.pending.push(item);
        }
    }
}

impl Drop for PairLoader {
    fn drop(&mut self) {
        self.rx.take(); // unblock senders
        for h in self.handles.drain(..) {
            let _ = h.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;
    use rdstn_core::rng::{stream_rng, Stream};

    fn images() -> Arc<Vec<Arc<Image<f32>>>> {
        let mut out = Vec::new();
        for s in 0..3u64 {
            let mut rng = stream_rng(s, Stream::Init, 0);
            let side = 40 + 8 * s as usize;
            let data = (0..side * side).map(|_| rng.gen_range(0.0..1.0)).collect();
            out.push(Arc::new(Image::new(1, side, side, data).unwrap()));
        }
        Arc::new(out)
    }

    fn cfg(workers: usize) -> TrainConfig {
        TrainConfig {
            patch: 12,
            k_samples: 16,
            batch: 4,
            steps: 4,
            seed: 77,
            scale_min: 1.0,
            scale_max: 2.5,
            loader_workers: workers,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn sequence_is_identical_for_any_worker_count() {
        let imgs = images();
        let collect = |workers: usize| -> Vec<TrainingPair<f32>> {
            let c = cfg(workers);
            let mut loader = PairLoader::new(imgs.clone(), &c, 0, 16);
            (0..16).map(|_| loader.next_pair().unwrap()).collect()
        };
        let one = collect(1);
        let four = collect(4);
        assert_eq!(one.len(), four.len());
        for (a, b) in one.iter().zip(&four) {
            assert_eq!(a.lr_patch, b.lr_patch);
            assert_eq!(a.query_coords, b.query_coords);
            assert_eq!(a.targets, b.targets);
            assert_eq!(a.scale, b.scale);
        }
    }

    #[test]
    fn resumed_loader_continues_the_same_sequence() {
        let imgs = images();
        let c = cfg(1);
        let mut full = PairLoader::new(imgs.clone(), &c, 0, 12);
        let all: Vec<_> = (0..12).map(|_| full.next_pair().unwrap()).collect();
        let mut tail = PairLoader::new(imgs, &c, 8, 12);
        for expect in all.iter().skip(8) {
            let got = tail.next_pair().unwrap();
            assert_eq!(got.lr_patch, expect.lr_patch);
            assert_eq!(got.targets, expect.targets);
        }
    }

    #[test]
    fn oversized_patch_reports_a_clear_error() {
        let imgs = images();
        let c = TrainConfig { patch: 200, ..cfg(1) };
        let err = pair_for_index(&imgs, &c, 0).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
