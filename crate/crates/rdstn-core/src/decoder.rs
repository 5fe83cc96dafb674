//! Local enhanced implicit-representation upscaling.
//!
//! A query coordinate is decoded as `MLP([code, offset])` against its
//! nearest latent code; the local ensemble instead decodes against all four
//! surrounding codes and blends the results with bilinear rectangle weights,
//! which removes the chessboard discontinuities that the single-code path
//! shows at cell boundaries. Offsets are scaled per axis by the latent grid
//! resolution so they span roughly [-1, 1] at any image size.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use crate::config::DecoderConfig;
use crate::coords::{axis_coord, axis_index, axis_position};
use crate::encoder::LatentGrid;
use crate::error::{invalid_arg, CoreResult};
use crate::graph::{Graph, NodeId};
use crate::params::{Bound, Init, LinearIds, ParamStore};
use crate::real::Real;
use crate::tensor::Tensor;

/// One of the four latent cells surrounding a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleCorner<T> {
    pub row: usize,
    pub col: usize,
    /// Center coordinate of the (clamped) cell, `[y, x]`.
    pub center: [T; 2],
    pub weight: T,
}

/// Bilinear rectangle weights over the four surrounding latent cells.
/// Corners are ordered (y0x0, y0x1, y1x0, y1x1); indices clamp at the grid
/// edge, so duplicated corners simply carry their own share of the weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleWeights<T> {
    pub corners: [EnsembleCorner<T>; 4],
}

impl<T: Real> EnsembleWeights<T> {
    pub fn weights(&self) -> [T; 4] {
        [
            self.corners[0].weight,
            self.corners[1].weight,
            self.corners[2].weight,
            self.corners[3].weight,
        ]
    }
}

/// Computes the four surrounding cells of `q` on an `h x w` latent grid and
/// their normalized rectangle weights (they sum to 1).
pub fn ensemble_weights<T: Real>(h: usize, w: usize, q: [T; 2]) -> EnsembleWeights<T> {
    let ty = axis_position(h, q[0]);
    let tx = axis_position(w, q[1]);
    let fy = ty.floor();
    let fx = tx.floor();
    let uy = ty - fy;
    let ux = tx - fx;
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let (y0, y1) = (clamp(fy.to_f64_lossy() as isize, h), clamp(fy.to_f64_lossy() as isize + 1, h));
    let (x0, x1) = (clamp(fx.to_f64_lossy() as isize, w), clamp(fx.to_f64_lossy() as isize + 1, w));
    let mut weights = [
        (T::one() - uy) * (T::one() - ux),
        (T::one() - uy) * ux,
        uy * (T::one() - ux),
        uy * ux,
    ];
    let total: T = weights.iter().copied().sum();
    for wv in &mut weights {
        *wv = *wv / total;
    }
    let cells = [(y0, x0), (y0, x1), (y1, x0), (y1, x1)];
    let corners = core::array::from_fn(|i| {
        let (r, c) = cells[i];
        EnsembleCorner {
            row: r,
            col: c,
            center: [axis_coord(h, r), axis_coord(w, c)],
            weight: weights[i],
        }
    });
    EnsembleWeights { corners }
}

/// Latent code nearest to `q` (cell membership, ties toward the lower
/// index) together with its center coordinate and cell.
pub fn nearest_latent<'a, T: Real>(grid: &'a LatentGrid<T>, q: [T; 2]) -> (&'a [T], [T; 2], (usize, usize)) {
    let r = axis_index(grid.height, q[0]);
    let c = axis_index(grid.width, q[1]);
    (grid.code(r, c), [axis_coord(grid.height, r), axis_coord(grid.width, c)], (r, c))
}

/// Decoder MLP parameters.
#[derive(Debug, Clone)]
pub struct DecoderParams {
    pub layers: Vec<LinearIds>,
}

impl DecoderParams {
    pub fn init<T: Real>(
        store: &mut ParamStore<T>,
        rng: &mut impl Rng,
        cfg: &DecoderConfig,
        latent_dim: usize,
        channels: usize,
    ) -> Self {
        let mut widths = alloc::vec![cfg.input_dim(latent_dim)];
        widths.extend_from_slice(&cfg.hidden);
        widths.push(channels);
        let layers: Vec<LinearIds> = (0..widths.len() - 1)
            .map(|i| {
                LinearIds::init(store, rng, &format!("decoder.fc{i}"), widths[i], widths[i + 1], Init::HeNormal)
            })
            .collect();
        // start predictions at mid-gray so early training is well-scaled
        if let Some(bias) = layers.last().and_then(|l| l.bias) {
            *store.get_mut(bias) = Tensor::full(&[channels], T::half());
        }
        Self { layers }
    }

    fn attach<T: Real>(&self, g: &mut Graph<T>, bound: &Bound, mut x: NodeId) -> NodeId {
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            x = layer.attach(g, bound, x);
            if i < last {
                x = g.relu(x);
            }
        }
        x
    }
}

/// Gather map pulling each query's latent code (or 3x3 unfolded
/// neighborhood) for a fixed corner choice.
fn code_gather_map<T: Real>(
    h: usize,
    w: usize,
    d: usize,
    cells: &[(usize, usize)],
    unfold: bool,
) -> Vec<u32> {
    let _ = T::zero();
    let per = if unfold { 9 * d } else { d };
    let mut idx = Vec::with_capacity(cells.len() * per);
    for &(r, c) in cells {
        if unfold {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let rr = (r as isize + dy).clamp(0, h as isize - 1) as usize;
                    let cc = (c as isize + dx).clamp(0, w as isize - 1) as usize;
                    let base = ((rr * w + cc) * d) as u32;
                    for ch in 0..d as u32 {
                        idx.push(base + ch);
                    }
                }
            }
        } else {
            let base = ((r * w + c) * d) as u32;
            for ch in 0..d as u32 {
                idx.push(base + ch);
            }
        }
    }
    idx
}

/// Decodes `coords` against a latent node already in the graph. Returns a
/// `(K, channels)` node. `cell` is the target pixel footprint `(2/out_h,
/// 2/out_w)` fed to the MLP when cell decoding is enabled.
#[allow(clippy::too_many_arguments)]
pub(crate) fn attach_decode<T: Real>(
    g: &mut Graph<T>,
    bound: &Bound,
    dec: &DecoderParams,
    cfg: &DecoderConfig,
    latent: NodeId,
    h: usize,
    w: usize,
    coords: &[[T; 2]],
    cell: Option<[T; 2]>,
    use_ensemble: bool,
) -> NodeId {
    let d = g.shape(latent)[1];
    let k = coords.len();
    let hs = T::of_usize(h);
    let ws = T::of_usize(w);

    let cell_cols = cell.map(|cv| {
        let mut data = Vec::with_capacity(k * 2);
        for _ in 0..k {
            data.push(cv[0] * hs);
            data.push(cv[1] * ws);
        }
        Tensor::new(&[k, 2], data)
    });

    let decode_against = |g: &mut Graph<T>,
                          cells: &[(usize, usize)],
                          centers: &[[T; 2]]|
     -> NodeId {
        let codes = g.reindex(
            latent,
            &[k, if cfg.feature_unfolding { 9 * d } else { d }],
            Arc::new(code_gather_map::<T>(h, w, d, cells, cfg.feature_unfolding)),
        );
        let mut rel = Vec::with_capacity(k * 2);
        for (q, ctr) in coords.iter().zip(centers) {
            rel.push((q[0] - ctr[0]) * hs);
            rel.push((q[1] - ctr[1]) * ws);
        }
        let rel = g.constant(Tensor::new(&[k, 2], rel));
        let mut parts = alloc::vec![codes, rel];
        if let Some(cc) = &cell_cols {
            let cc = g.constant(cc.clone());
            parts.push(cc);
        }
        let input = g.concat_cols(&parts);
        dec.attach(g, bound, input)
    };

    if use_ensemble {
        let mut acc: Option<NodeId> = None;
        for corner in 0..4 {
            let mut cells = Vec::with_capacity(k);
            let mut centers = Vec::with_capacity(k);
            let mut weights = Vec::with_capacity(k);
            for &q in coords {
                let ew = ensemble_weights(h, w, q);
                let c = ew.corners[corner];
                cells.push((c.row, c.col));
                centers.push(c.center);
                weights.push(c.weight);
            }
            let decoded = decode_against(g, &cells, &centers);
            let wnode = g.constant(Tensor::new(&[k], weights));
            let weighted = g.mul_rows(decoded, wnode);
            acc = Some(match acc {
                Some(a) => g.add(a, weighted),
                None => weighted,
            });
        }
        acc.expect("four corners")
    } else {
        let mut cells = Vec::with_capacity(k);
        let mut centers = Vec::with_capacity(k);
        for &q in coords {
            let r = axis_index(h, q[0]);
            let c = axis_index(w, q[1]);
            cells.push((r, c));
            centers.push([axis_coord(h, r), axis_coord(w, c)]);
        }
        decode_against(g, &cells, &centers)
    }
}

fn check_query<T: Real>(q: [T; 2]) -> CoreResult<()> {
    if q.iter().any(|v| *v < -T::one() || *v > T::one()) {
        return Err(invalid_arg!("query coordinates must lie in [-1, 1]^2"));
    }
    Ok(())
}

/// Batch decode over frozen parameters; `(K, channels)` output rows align
/// with `coords`.
pub fn decode_queries<T: Real>(
    store: &ParamStore<T>,
    dec: &DecoderParams,
    cfg: &DecoderConfig,
    grid: &LatentGrid<T>,
    coords: &[[T; 2]],
    cell: Option<[T; 2]>,
    use_ensemble: bool,
) -> CoreResult<Tensor<T>> {
    for &q in coords {
        check_query(q)?;
    }
    let mut g = Graph::new();
    let bound = store.bind(&mut g, false);
    let latent = g.constant(grid.features.clone());
    let out = attach_decode(
        &mut g,
        &bound,
        dec,
        cfg,
        latent,
        grid.height,
        grid.width,
        coords,
        cell,
        use_ensemble,
    );
    Ok(g.value(out).clone())
}

/// Single-query nearest-code decode: `MLP([C(q), q - x*])`.
pub fn decode_point<T: Real>(
    store: &ParamStore<T>,
    dec: &DecoderParams,
    cfg: &DecoderConfig,
    grid: &LatentGrid<T>,
    q: [T; 2],
    cell: Option<[T; 2]>,
) -> CoreResult<Vec<T>> {
    Ok(decode_queries(store, dec, cfg, grid, &[q], cell, false)?.into_data())
}

/// Single-query local-ensemble decode: the weighted sum of the four
/// neighbor decodings.
pub fn local_ensemble_decode<T: Real>(
    store: &ParamStore<T>,
    dec: &DecoderParams,
    cfg: &DecoderConfig,
    grid: &LatentGrid<T>,
    q: [T; 2],
    cell: Option<[T; 2]>,
) -> CoreResult<Vec<T>> {
    Ok(decode_queries(store, dec, cfg, grid, &[q], cell, true)?.into_data())
}
