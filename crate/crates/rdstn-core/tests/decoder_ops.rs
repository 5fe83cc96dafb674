//! Implicit decoder contracts: nearest-code lookup, bilinear ensemble
//! weights against a direct oracle, continuity of the local ensemble, and
//! full-image upscaling.

use rand::Rng;
use rdstn_core::config::{DecoderConfig, EncoderConfig};
use rdstn_core::coords::axis_coord;
use rdstn_core::decoder::{
    decode_point, decode_queries, ensemble_weights, local_ensemble_decode, nearest_latent,
    DecoderParams,
};
use rdstn_core::encoder::LatentGrid;
use rdstn_core::image::Image;
use rdstn_core::model::RdstnModel;
use rdstn_core::params::ParamStore;
use rdstn_core::rng::{stream_rng, Stream};
use rdstn_core::tensor::Tensor;

fn grid_2x2(d: usize) -> LatentGrid<f64> {
    let mut data = Vec::new();
    for cell in 0..4 {
        for c in 0..d {
            data.push(cell as f64 + 0.1 * c as f64);
        }
    }
    LatentGrid { features: Tensor::new(&[4, d], data), height: 2, width: 2 }
}

fn small_decoder(latent_dim: usize, hidden: Vec<usize>) -> (ParamStore<f64>, DecoderParams, DecoderConfig) {
    let cfg = DecoderConfig { hidden, cell_decoding: false, feature_unfolding: false };
    let mut store = ParamStore::new();
    let mut rng = stream_rng(50, Stream::Init, 0);
    let params = DecoderParams::init(&mut store, &mut rng, &cfg, latent_dim, 1);
    (store, params, cfg)
}

// --- nearest latent ------------------------------------------------------------

#[test]
fn nearest_latent_uses_cell_membership() {
    let grid = grid_2x2(3);
    let (code, center, cell) = nearest_latent(&grid, [0.9, 0.9]);
    assert_eq!(cell, (1, 1));
    assert_eq!(center, [0.5, 0.5]);
    assert_eq!(code, grid.code(1, 1));
}

#[test]
fn nearest_latent_at_exact_center() {
    let grid = grid_2x2(2);
    let (_, center, cell) = nearest_latent(&grid, [-0.5, 0.5]);
    assert_eq!(cell, (0, 1));
    assert_eq!(center, [-0.5, 0.5]);
}

#[test]
fn nearest_latent_tie_breaks_to_lower_index() {
    let grid = grid_2x2(1);
    let (_, center, cell) = nearest_latent(&grid, [0.0, 0.0]);
    assert_eq!(cell, (0, 0));
    assert_eq!(center, [-0.5, -0.5]);
}

// --- ensemble weights ------------------------------------------------------------

#[test]
fn weight_collapses_onto_an_exact_corner() {
    let ew = ensemble_weights(4, 4, [axis_coord::<f64>(4, 1), axis_coord::<f64>(4, 2)]);
    let weights = ew.weights();
    assert_eq!(weights[0], 1.0);
    assert_eq!(&weights[1..], &[0.0, 0.0, 0.0]);
    assert_eq!((ew.corners[0].row, ew.corners[0].col), (1, 2));
}

#[test]
fn center_of_four_corners_is_uniform() {
    // midpoint of the 2x2 center block of a 4x4 grid
    let y = (axis_coord::<f64>(4, 1) + axis_coord::<f64>(4, 2)) / 2.0;
    let ew = ensemble_weights(4, 4, [y, y]);
    for w in ew.weights() {
        assert!((w - 0.25).abs() < 1e-15);
    }
}

/// Direct bilinear formula on the un-normalized cell positions; written
/// independently of the corner bookkeeping in the implementation.
fn bilinear_oracle(h: usize, w: usize, q: [f64; 2]) -> [f64; 4] {
    let ty = (q[0] + 1.0) * 0.5 * h as f64 - 0.5;
    let tx = (q[1] + 1.0) * 0.5 * w as f64 - 0.5;
    let (fy, fx) = (ty.floor(), tx.floor());
    let (uy, ux) = (ty - fy, tx - fx);
    [(1.0 - uy) * (1.0 - ux), (1.0 - uy) * ux, uy * (1.0 - ux), uy * ux]
}

#[test]
fn weights_match_bilinear_oracle_on_ten_thousand_queries() {
    let mut rng = stream_rng(51, Stream::Init, 0);
    let mut max_diff = 0.0f64;
    let mut max_sum_err = 0.0f64;
    for i in 0..10_000 {
        let (h, w) = (2 + i % 13, 2 + i % 7);
        let q = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let ew = ensemble_weights(h, w, q);
        let oracle = bilinear_oracle(h, w, q);
        for (a, b) in ew.weights().iter().zip(oracle) {
            max_diff = max_diff.max((a - b).abs());
            assert!(*a >= 0.0 && *a <= 1.0);
        }
        let sum: f64 = ew.weights().iter().sum();
        max_sum_err = max_sum_err.max((sum - 1.0).abs());
    }
    assert!(max_diff < 1e-12, "max |weights - bilinear| = {max_diff}");
    assert!(max_sum_err < 1e-15, "max |sum - 1| = {max_sum_err}");
}

#[test]
fn edge_clamped_queries_keep_weight_sum_one() {
    // queries in the half-cell margin beyond the outermost centers
    for q in [[-0.999f64, 0.2], [0.999, -0.999], [0.3, 0.9999], [-1.0, 1.0]] {
        let ew = ensemble_weights(3, 5, q);
        let sum: f64 = ew.weights().iter().sum();
        assert!((sum - 1.0).abs() < 1e-15, "q {q:?} sum {sum}");
        for c in ew.corners {
            assert!(c.row < 3 && c.col < 5);
            assert!(c.weight >= 0.0);
        }
    }
}

// --- decode_point ------------------------------------------------------------

#[test]
fn decode_at_center_feeds_zero_offset() {
    let (store, params, cfg) = small_decoder(3, vec![8]);
    let grid = grid_2x2(3);
    let q = [0.5, 0.5];
    let out = decode_point(&store, &params, &cfg, &grid, q, None).unwrap();

    // manual MLP([code, 0, 0]) evaluation
    let mut input = grid.code(1, 1).to_vec();
    input.extend_from_slice(&[0.0, 0.0]);
    let w0 = store.get(params.layers[0].weight);
    let b0 = store.get(params.layers[0].bias.unwrap());
    let mut hid = vec![0.0; 8];
    for o in 0..8 {
        let mut acc = b0.data()[o];
        for (i, &v) in input.iter().enumerate() {
            acc += v * w0.data()[i * 8 + o];
        }
        hid[o] = acc.max(0.0);
    }
    let w1 = store.get(params.layers[1].weight);
    let b1 = store.get(params.layers[1].bias.unwrap());
    let mut expect = b1.data()[0];
    for (i, &v) in hid.iter().enumerate() {
        expect += v * w1.data()[i];
    }
    assert!((out[0] - expect).abs() < 1e-12);
}

#[test]
fn zero_mlp_with_bias_is_constant() {
    let (mut store, params, cfg) = small_decoder(2, vec![4]);
    rdstn_core::encoder::zero_params_matching(&mut store, "decoder");
    store.set_by_name("decoder.fc1.bias", Tensor::new(&[1], vec![0.37])).unwrap();
    let grid = grid_2x2(2);
    for q in [[-0.9, -0.9], [0.0, 0.0], [0.7, -0.3]] {
        assert_eq!(decode_point(&store, &params, &cfg, &grid, q, None).unwrap(), vec![0.37]);
        assert_eq!(
            local_ensemble_decode(&store, &params, &cfg, &grid, q, None).unwrap(),
            vec![0.37]
        );
    }
}

#[test]
fn identical_cell_and_offset_give_identical_outputs() {
    let (store, params, cfg) = small_decoder(2, vec![6]);
    // two latent cells with the same code value
    let mut data = vec![0.0; 2 * 2 * 2];
    for cell in 0..4 {
        data[cell * 2] = if cell % 2 == 0 { 0.4 } else { 0.9 };
        data[cell * 2 + 1] = 0.2;
    }
    let grid = LatentGrid { features: Tensor::new(&[4, 2], data), height: 2, width: 2 };
    // same offset from the centers of cells (0,0) and (1,0) — same code too
    let d = 0.15;
    let a = decode_point(&store, &params, &cfg, &grid, [-0.5 + d, -0.5 + d], None).unwrap();
    let b = decode_point(&store, &params, &cfg, &grid, [0.5 + d, -0.5 + d], None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn out_of_domain_queries_are_rejected() {
    let (store, params, cfg) = small_decoder(2, vec![4]);
    let grid = grid_2x2(2);
    assert!(decode_point(&store, &params, &cfg, &grid, [1.5, 0.0], None).is_err());
}

// --- local ensemble ------------------------------------------------------------

#[test]
fn ensemble_equals_plain_decode_at_latent_centers() {
    let (store, params, cfg) = small_decoder(2, vec![8, 8]);
    let grid = grid_2x2(2);
    for (r, c) in [(0usize, 0usize), (0, 1), (1, 0), (1, 1)] {
        let q = [axis_coord::<f64>(2, r), axis_coord::<f64>(2, c)];
        let plain = decode_point(&store, &params, &cfg, &grid, q, None).unwrap();
        let ens = local_ensemble_decode(&store, &params, &cfg, &grid, q, None).unwrap();
        assert_eq!(plain, ens);
    }
}

#[test]
fn ensemble_is_continuous_across_cell_boundaries_where_plain_decode_jumps() {
    let (store, params, cfg) = small_decoder(4, vec![16, 16]);
    // random latent grid so neighboring codes genuinely differ
    let mut rng = stream_rng(52, Stream::Init, 0);
    let data: Vec<f64> = (0..6 * 6 * 4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let grid = LatentGrid { features: Tensor::new(&[36, 4], data), height: 6, width: 6 };

    // x crosses the boundary between columns 2 and 3 at x = 0
    let eps = 1e-6;
    let y = axis_coord::<f64>(6, 2);
    let left = [y, -eps];
    let right = [y, eps];

    let e_l = local_ensemble_decode(&store, &params, &cfg, &grid, left, None).unwrap()[0];
    let e_r = local_ensemble_decode(&store, &params, &cfg, &grid, right, None).unwrap()[0];
    let p_l = decode_point(&store, &params, &cfg, &grid, left, None).unwrap()[0];
    let p_r = decode_point(&store, &params, &cfg, &grid, right, None).unwrap()[0];

    let ensemble_jump = (e_l - e_r).abs();
    let plain_jump = (p_l - p_r).abs();
    assert!(ensemble_jump < 1e-4, "ensemble jump {ensemble_jump}");
    assert!(plain_jump > 10.0 * ensemble_jump, "plain {plain_jump} vs ensemble {ensemble_jump}");
}

// --- upscale ------------------------------------------------------------

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
    let dec = DecoderConfig { hidden: vec![16, 16], ..DecoderConfig::default() };
    RdstnModel::new(enc, dec, seed).unwrap()
}

fn random_image(h: usize, w: usize, seed: u64) -> Image<f64> {
    let mut rng = stream_rng(seed, Stream::Init, 7);
    Image::new(1, h, w, (0..h * w).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()
}

#[test]
fn upscale_shapes_follow_the_scale() {
    let model = toy_model(60);
    let img = random_image(32, 32, 61);
    let out = model.upscale_by(&img, 2.5, true, 4096).unwrap();
    assert_eq!((out.height(), out.width()), (80, 80));
    assert!(out.in_range());
}

#[test]
fn extreme_scale_stays_in_range() {
    let model = toy_model(62);
    let img = random_image(8, 8, 63);
    let out = model.upscale_by(&img, 10.0, true, 2048).unwrap();
    assert_eq!((out.height(), out.width()), (80, 80));
    assert!(out.in_range());
}

#[test]
fn query_batching_does_not_change_output() {
    let model = toy_model(64);
    let img = random_image(12, 12, 65);
    let full = model.upscale(&img, 30, 30, true, 30 * 30).unwrap();
    for batch in [1usize, 7, 64, 257] {
        let chunked = model.upscale(&img, 30, 30, true, batch).unwrap();
        assert_eq!(chunked, full, "batch {batch}");
    }
}

#[test]
fn disabling_the_ensemble_raises_boundary_jumps() {
    let model = toy_model(66);
    let img = random_image(12, 12, 67);
    let s = 4usize;
    let (th, tw) = (12 * s, 12 * s);
    let with = model.upscale(&img, th, tw, true, 16384).unwrap();
    let without = model.upscale(&img, th, tw, false, 16384).unwrap();

    // max jump between horizontally adjacent output pixels that straddle an
    // LR cell boundary
    let boundary_jump = |im: &Image<f64>| {
        let mut max = 0.0f64;
        for y in 0..th {
            for x in (s..tw).step_by(s) {
                max = max.max((im.get(0, y, x) - im.get(0, y, x - 1)).abs());
            }
        }
        max
    };
    let j_with = boundary_jump(&with);
    let j_without = boundary_jump(&without);
    assert!(
        j_without > j_with,
        "expected larger boundary jumps without the ensemble: {j_without} vs {j_with}"
    );
}

#[test]
fn decode_queries_rows_align_with_coords() {
    let (store, params, cfg) = small_decoder(2, vec![4]);
    let grid = grid_2x2(2);
    let coords = [[-0.5, -0.5], [0.5, 0.5], [0.0, 0.0]];
    let batch = decode_queries(&store, &params, &cfg, &grid, &coords, None, true).unwrap();
    assert_eq!(batch.shape(), &[3, 1]);
    for (i, &q) in coords.iter().enumerate() {
        let single = local_ensemble_decode(&store, &params, &cfg, &grid, q, None).unwrap();
        assert_eq!(batch.data()[i], single[0]);
    }
}
