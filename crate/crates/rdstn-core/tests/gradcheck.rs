//! Central-finite-difference spot check of the analytic gradients on the
//! toy model. The exhaustive per-parameter sweep lives in the acceptance
//! suite; this samples a few hundred coordinates to keep the dev loop fast.

use rand::Rng;
use rdstn_core::config::{DecoderConfig, EncoderConfig};
use rdstn_core::image::Image;
use rdstn_core::model::RdstnModel;
use rdstn_core::pairs::{synthesize_training_pair, TrainingPair};
use rdstn_core::rng::{stream_rng, Stream};
use rdstn_core::train::{batch_loss, parameter_gradients};

fn toy_model(seed: u64) -> RdstnModel<f64> {
    let enc = EncoderConfig {
        channels: 1,
        dim: 8,
        stages: 1,
        blocks_per_stage: 2,
        window: 4,
        heads: 2,
        mlp_ratio: 2.0,
        use_lff: true,
        use_gff: true,
    };
    let dec = DecoderConfig { hidden: vec![32, 32], ..DecoderConfig::default() };
    RdstnModel::new(enc, dec, seed).unwrap()
}

fn toy_pair(seed: u64) -> TrainingPair<f64> {
    let mut rng = stream_rng(seed, Stream::Init, 5);
    let img = Image::new(1, 24, 24, (0..24 * 24).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap();
    let mut prng = stream_rng(seed, Stream::Pair, 0);
    synthesize_training_pair(&img, 6, 12, 1.7, false, &mut prng).unwrap()
}

#[test]
fn sampled_parameters_match_central_differences() {
    let model = toy_model(101);
    let pairs = [toy_pair(102)];
    let (_, grads) = parameter_gradients(&model, &pairs).unwrap();

    let entry_count = model.store().len();
    let mut rng = stream_rng(103, Stream::Init, 9);
    let eps = 1e-5;
    let mut checked = 0;
    let mut max_rel = 0.0f64;
    while checked < 250 {
        let e = rng.gen_range(0..entry_count);
        let n = model.store().tensor_at(e).numel();
        let j = rng.gen_range(0..n);

        let mut perturbed = model.clone();
        let orig = perturbed.store().tensor_at(e).data()[j];
        perturbed.store_mut().tensor_at_mut(e).data_mut()[j] = orig + eps;
        let hi = batch_loss(&perturbed, &pairs).unwrap();
        perturbed.store_mut().tensor_at_mut(e).data_mut()[j] = orig - eps;
        let lo = batch_loss(&perturbed, &pairs).unwrap();
        let numeric = (hi - lo) / (2.0 * eps);

        let analytic = grads[e].as_ref().map(|g| g.data()[j]).unwrap_or(0.0);
        let denom = analytic.abs().max(numeric.abs());
        if denom > 1e-7 {
            let rel = (analytic - numeric).abs() / denom;
            max_rel = max_rel.max(rel);
            assert!(
                rel < 1e-4,
                "entry {} ({}) index {j}: analytic {analytic} vs numeric {numeric} (rel {rel})",
                model.store().entries()[e].name,
                e
            );
        } else {
            assert!(
                (analytic - numeric).abs() < 1e-8,
                "near-zero gradient mismatch at {}[{j}]",
                model.store().entries()[e].name
            );
        }
        checked += 1;
    }
    println!("checked {checked} coordinates, max relative error {max_rel:.3e}");
}
