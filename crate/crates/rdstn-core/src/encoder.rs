//! Residual dense shifted-window transformer encoder.
//!
//! Feature maps are token matrices `(H*W, d)`, row-major over pixels, so the
//! per-pixel embedding and both 1x1 fusion convolutions are plain matmuls.
//! Spatial resolution is preserved end to end: non-multiple-of-window inputs
//! are reflect-padded before each block and cropped after, which keeps one
//! latent code per LR pixel.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use crate::config::EncoderConfig;
use crate::error::{invalid_arg, shape_mismatch, CoreResult};
use crate::graph::{BcastGroup, Graph, NodeId};
use crate::image::Image;
use crate::params::{Bound, Init, LayerNormIds, LinearIds, ParamId, ParamStore};
use crate::real::Real;
use crate::resample::reflect_index;
use crate::tensor::Tensor;

/// Additive pre-softmax penalty for cross-region pairs in shifted windows.
pub const MASK_NEG: f64 = -1e4;

/// Encoder output: one latent code per LR pixel.
#[derive(Debug, Clone)]
pub struct LatentGrid<T> {
    /// `(height * width, dim)` feature matrix.
    pub features: Tensor<T>,
    pub height: usize,
    pub width: usize,
}

impl<T: Real> LatentGrid<T> {
    pub fn dim(&self) -> usize {
        self.features.shape()[1]
    }

    pub fn code(&self, row: usize, col: usize) -> &[T] {
        let d = self.dim();
        let t = row * self.width + col;
        &self.features.data()[t * d..(t + 1) * d]
    }
}

/// Flattens a (C, H, W) image into `(H*W, C)` tokens.
pub fn image_to_tokens<T: Real>(img: &Image<T>) -> Tensor<T> {
    let (c, h, w) = (img.channels(), img.height(), img.width());
    let mut data = Vec::with_capacity(c * h * w);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                data.push(img.get(ch, y, x));
            }
        }
    }
    Tensor::new(&[h * w, c], data)
}

/// Per-pixel affine projection into `d` channels; `weight` is `(C, d)`.
pub fn linear_embed<T: Real>(
    img: &Image<T>,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
) -> CoreResult<Tensor<T>> {
    if weight.shape()[0] != img.channels() {
        return Err(invalid_arg!(
            "embedding expects {} input channels, image has {}",
            weight.shape()[0],
            img.channels()
        ));
    }
    let tokens = image_to_tokens(img);
    let mut out = tokens.matmul(weight);
    let d = weight.shape()[1];
    if bias.shape() != [d] {
        return Err(shape_mismatch!(&[d], bias.shape()));
    }
    for r in 0..out.shape()[0] {
        for j in 0..d {
            out.data_mut()[r * d + j] += bias.data()[j];
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// index maps: every data movement in the encoder is one gather
// ---------------------------------------------------------------------------

fn roll_index(h: usize, w: usize, d: usize, dy: isize, dx: isize) -> Vec<u32> {
    let mut idx = Vec::with_capacity(h * w * d);
    for y in 0..h as isize {
        let sy = (y - dy).rem_euclid(h as isize) as usize;
        for x in 0..w as isize {
            let sx = (x - dx).rem_euclid(w as isize) as usize;
            let base = ((sy * w + sx) * d) as u32;
            for c in 0..d as u32 {
                idx.push(base + c);
            }
        }
    }
    idx
}

fn pad_reflect_map(h: usize, w: usize, hp: usize, wp: usize, d: usize) -> Vec<u32> {
    let mut idx = Vec::with_capacity(hp * wp * d);
    for y in 0..hp {
        let sy = reflect_index(y as isize, h);
        for x in 0..wp {
            let sx = reflect_index(x as isize, w);
            let base = ((sy * w + sx) * d) as u32;
            for c in 0..d as u32 {
                idx.push(base + c);
            }
        }
    }
    idx
}

fn crop_map(_hp: usize, wp: usize, h: usize, w: usize, d: usize) -> Vec<u32> {
    let mut idx = Vec::with_capacity(h * w * d);
    for y in 0..h {
        for x in 0..w {
            let base = ((y * wp + x) * d) as u32;
            for c in 0..d as u32 {
                idx.push(base + c);
            }
        }
    }
    idx
}

fn partition_map(h: usize, w: usize, m: usize, d: usize) -> Vec<u32> {
    let (wy_n, wx_n) = (h / m, w / m);
    let mut idx = Vec::with_capacity(h * w * d);
    for wy in 0..wy_n {
        for wx in 0..wx_n {
            for ty in 0..m {
                for tx in 0..m {
                    let base = (((wy * m + ty) * w + wx * m + tx) * d) as u32;
                    for c in 0..d as u32 {
                        idx.push(base + c);
                    }
                }
            }
        }
    }
    idx
}

fn reverse_map(h: usize, w: usize, m: usize, d: usize) -> Vec<u32> {
    let wx_n = w / m;
    let m2 = m * m;
    let mut idx = Vec::with_capacity(h * w * d);
    for y in 0..h {
        for x in 0..w {
            let win = (y / m) * wx_n + x / m;
            let tok = (y % m) * m + x % m;
            let base = ((win * m2 + tok) * d) as u32;
            for c in 0..d as u32 {
                idx.push(base + c);
            }
        }
    }
    idx
}

/// `(nW*M^2, 3d) -> (nW*heads, M^2, dh)` for one of q/k/v.
fn qkv_head_map(nw: usize, m2: usize, heads: usize, dh: usize, which: usize) -> Vec<u32> {
    let d = heads * dh;
    let mut idx = Vec::with_capacity(nw * heads * m2 * dh);
    for win in 0..nw {
        for head in 0..heads {
            for t in 0..m2 {
                let base = ((win * m2 + t) * 3 * d + which * d + head * dh) as u32;
                for c in 0..dh as u32 {
                    idx.push(base + c);
                }
            }
        }
    }
    idx
}

/// `(nW*heads, M^2, dh) -> (nW*M^2, d)`, concatenating heads.
fn head_merge_map(nw: usize, m2: usize, heads: usize, dh: usize) -> Vec<u32> {
    let mut idx = Vec::with_capacity(nw * m2 * heads * dh);
    for win in 0..nw {
        for t in 0..m2 {
            for head in 0..heads {
                let base = (((win * heads + head) * m2 + t) * dh) as u32;
                for c in 0..dh as u32 {
                    idx.push(base + c);
                }
            }
        }
    }
    idx
}

/// Gathers the `((2M-1)^2, heads)` bias table into `(heads, M^2, M^2)`.
fn bias_gather_map(m: usize, heads: usize) -> Vec<u32> {
    let m2 = m * m;
    let span = 2 * m - 1;
    let mut idx = Vec::with_capacity(heads * m2 * m2);
    for head in 0..heads {
        for i in 0..m2 {
            let (yi, xi) = (i / m, i % m);
            for j in 0..m2 {
                let (yj, xj) = (j / m, j % m);
                let row = (yi + m - 1 - yj) * span + (xi + m - 1 - xj);
                idx.push((row * heads + head) as u32);
            }
        }
    }
    idx
}

// ---------------------------------------------------------------------------
// value-level window ops
// ---------------------------------------------------------------------------

fn check_tokens<T: Real>(fm: &Tensor<T>, h: usize, w: usize) -> CoreResult<usize> {
    if fm.shape().len() != 2 || fm.shape()[0] != h * w {
        return Err(shape_mismatch!(&[h * w], fm.shape()));
    }
    Ok(fm.shape()[1])
}

/// Splits `(h*w, d)` tokens into `( (h/m)*(w/m)*m^2, d )` window-major
/// tokens. `h` and `w` must be multiples of `m` (callers pad first).
pub fn window_partition<T: Real>(fm: &Tensor<T>, h: usize, w: usize, m: usize) -> CoreResult<Tensor<T>> {
    let d = check_tokens(fm, h, w)?;
    if m == 0 || h % m != 0 || w % m != 0 {
        return Err(invalid_arg!("window {m} must divide {h}x{w}"));
    }
    let idx = partition_map(h, w, m, d);
    let data = idx.iter().map(|&i| fm.data()[i as usize]).collect();
    Ok(Tensor::new(&[h * w, d], data))
}

/// Exact inverse of [`window_partition`].
pub fn window_reverse<T: Real>(windows: &Tensor<T>, m: usize, h: usize, w: usize) -> CoreResult<Tensor<T>> {
    let d = check_tokens(windows, h, w)?;
    if m == 0 || h % m != 0 || w % m != 0 {
        return Err(invalid_arg!("window {m} must divide {h}x{w}"));
    }
    let idx = reverse_map(h, w, m, d);
    let data = idx.iter().map(|&i| windows.data()[i as usize]).collect();
    Ok(Tensor::new(&[h * w, d], data))
}

/// Toroidal roll of the spatial grid by `(dy, dx)`.
pub fn cyclic_shift<T: Real>(fm: &Tensor<T>, h: usize, w: usize, dy: isize, dx: isize) -> CoreResult<Tensor<T>> {
    let d = check_tokens(fm, h, w)?;
    let idx = roll_index(h, w, d, dy, dx);
    let data = idx.iter().map(|&i| fm.data()[i as usize]).collect();
    Ok(Tensor::new(&[h * w, d], data))
}

/// Additive attention mask for shifted windows: `(nW, M^2, M^2)` with 0 for
/// same-region token pairs and [`MASK_NEG`] across regions. All zeros when
/// `shift == 0`.
pub fn build_attention_mask<T: Real>(h: usize, w: usize, m: usize, shift: usize) -> CoreResult<Tensor<T>> {
    if m == 0 || h % m != 0 || w % m != 0 {
        return Err(invalid_arg!("window {m} must divide {h}x{w}"));
    }
    if shift != 0 && shift != m / 2 {
        return Err(invalid_arg!("shift must be 0 or {}, got {shift}", m / 2));
    }
    let nw = (h / m) * (w / m);
    let m2 = m * m;
    if shift == 0 {
        return Ok(Tensor::zeros(&[nw, m2, m2]));
    }
    // region bands in the post-shift frame: wrapped content occupies the
    // last `shift` rows/cols, the band before it is the unwrapped remainder
    // of the final window row/col
    let band = |v: usize, n: usize| {
        if v < n - m {
            0
        } else if v < n - shift {
            1
        } else {
            2
        }
    };
    let mut region = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            region.push(band(y, h) * 3 + band(x, w));
        }
    }
    let part = partition_map(h, w, m, 1);
    let win_region: Vec<usize> = part.iter().map(|&i| region[i as usize]).collect();
    let mut mask = Tensor::zeros(&[nw, m2, m2]);
    let neg = T::of(MASK_NEG);
    for win in 0..nw {
        let ids = &win_region[win * m2..(win + 1) * m2];
        let plane = &mut mask.data_mut()[win * m2 * m2..(win + 1) * m2 * m2];
        for i in 0..m2 {
            for j in 0..m2 {
                if ids[i] != ids[j] {
                    plane[i * m2 + j] = neg;
                }
            }
        }
    }
    Ok(mask)
}

// ---------------------------------------------------------------------------
// parameters
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct AttentionIds {
    pub qkv: LinearIds,
    pub proj: LinearIds,
    /// Relative-position bias table, `((2M-1)^2, heads)`.
    pub rel_bias: ParamId,
}

impl AttentionIds {
    pub fn init<T: Real>(
        store: &mut ParamStore<T>,
        rng: &mut impl Rng,
        prefix: &str,
        dim: usize,
        heads: usize,
        window: usize,
    ) -> Self {
        let qkv = LinearIds::init(store, rng, &format!("{prefix}.qkv"), dim, 3 * dim, Init::Normal(0.02));
        let proj = LinearIds::init(store, rng, &format!("{prefix}.proj"), dim, dim, Init::Normal(0.02));
        let span = 2 * window - 1;
        let rel_bias = store.add(
            format!("{prefix}.rel_bias"),
            crate::params::init_tensor(&[span * span, heads], Init::Normal(0.02), span * span, rng),
        );
        Self { qkv, proj, rel_bias }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BlockIds {
    pub norm1: LayerNormIds,
    pub attn: AttentionIds,
    pub norm2: LayerNormIds,
    pub fc1: LinearIds,
    pub fc2: LinearIds,
}

impl BlockIds {
    fn init<T: Real>(store: &mut ParamStore<T>, rng: &mut impl Rng, prefix: &str, cfg: &EncoderConfig) -> Self {
        let d = cfg.dim;
        let hidden = cfg.mlp_hidden();
        Self {
            norm1: LayerNormIds::init(store, rng, &format!("{prefix}.norm1"), d),
            attn: AttentionIds::init(store, rng, &format!("{prefix}.attn"), d, cfg.heads, cfg.window),
            norm2: LayerNormIds::init(store, rng, &format!("{prefix}.norm2"), d),
            fc1: LinearIds::init(store, rng, &format!("{prefix}.mlp.fc1"), d, hidden, Init::Normal(0.02)),
            fc2: LinearIds::init(store, rng, &format!("{prefix}.mlp.fc2"), hidden, d, Init::Normal(0.02)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct StageIds {
    pub blocks: Vec<BlockIds>,
    /// 1x1 conv recovering `d` channels from `[input, block output]` (LFF).
    pub fuse: Option<LinearIds>,
}

#[derive(Debug, Clone)]
pub struct EncoderParams {
    pub embed: LinearIds,
    pub stages: Vec<StageIds>,
    /// 1x1 conv over `[F_in, F_1, ..., F_N]` (GFF).
    pub fuse: Option<LinearIds>,
}

impl EncoderParams {
    pub fn init<T: Real>(store: &mut ParamStore<T>, rng: &mut impl Rng, cfg: &EncoderConfig) -> Self {
        let d = cfg.dim;
        let embed = LinearIds::init(store, rng, "encoder.embed", cfg.channels, d, Init::Normal(0.02));
        let mut stages = Vec::with_capacity(cfg.stages);
        for s in 0..cfg.stages {
            let prefix = format!("encoder.stage{s}");
            let blocks = (0..cfg.blocks_per_stage)
                .map(|b| BlockIds::init(store, rng, &format!("{prefix}.block{b}"), cfg))
                .collect();
            let fuse = cfg
                .use_lff
                .then(|| LinearIds::init(store, rng, &format!("{prefix}.fuse"), 2 * d, d, Init::Normal(0.02)));
            stages.push(StageIds { blocks, fuse });
        }
        let fuse = cfg.use_gff.then(|| {
            LinearIds::init(store, rng, "encoder.fuse", (cfg.stages + 1) * d, d, Init::Normal(0.02))
        });
        Self { embed, stages, fuse }
    }
}

// ---------------------------------------------------------------------------
// graph assembly
// ---------------------------------------------------------------------------

pub(crate) fn attach_window_attention<T: Real>(
    g: &mut Graph<T>,
    bound: &Bound,
    ids: &AttentionIds,
    x: NodeId,
    nw: usize,
    m: usize,
    heads: usize,
    mask: Option<&Tensor<T>>,
) -> NodeId {
    let d = g.shape(x)[1];
    let dh = d / heads;
    let m2 = m * m;

    let qkv = ids.qkv.attach(g, bound, x);
    let q = g.reindex(qkv, &[nw * heads, m2, dh], Arc::new(qkv_head_map(nw, m2, heads, dh, 0)));
    let k = g.reindex(qkv, &[nw * heads, m2, dh], Arc::new(qkv_head_map(nw, m2, heads, dh, 1)));
    let v = g.reindex(qkv, &[nw * heads, m2, dh], Arc::new(qkv_head_map(nw, m2, heads, dh, 2)));

    let q = g.scale(q, T::one() / T::of_usize(dh).sqrt());
    let mut scores = g.bmm_nt(q, k);

    let bias_node = g.reindex(
        bound.node(ids.rel_bias),
        &[heads, m2, m2],
        Arc::new(bias_gather_map(m, heads)),
    );
    scores = g.bcast_add(scores, bias_node, BcastGroup::Inner);

    if let Some(mask) = mask {
        debug_assert_eq!(mask.shape(), &[nw, m2, m2]);
        let mask_node = g.constant(mask.clone());
        scores = g.bcast_add(scores, mask_node, BcastGroup::Outer);
    }

    let attn = g.softmax(scores);
    let ctx = g.bmm(attn, v);
    let merged = g.reindex(ctx, &[nw * m2, d], Arc::new(head_merge_map(nw, m2, heads, dh)));
    ids.proj.attach(g, bound, merged)
}

pub(crate) fn attach_swin_block<T: Real>(
    g: &mut Graph<T>,
    bound: &Bound,
    ids: &BlockIds,
    x: NodeId,
    h: usize,
    w: usize,
    m: usize,
    heads: usize,
    shifted: bool,
) -> NodeId {
    let d = g.shape(x)[1];
    let hp = h.div_ceil(m) * m;
    let wp = w.div_ceil(m) * m;
    // shifting is meaningless when one window already covers the map
    let shift = if shifted && h.min(w) > m { m / 2 } else { 0 };
    let nw = (hp / m) * (wp / m);
    let m2 = m * m;

    let shortcut = x;
    let mut y = ids.norm1.attach(g, bound, x);
    if (hp, wp) != (h, w) {
        y = g.reindex(y, &[hp * wp, d], Arc::new(pad_reflect_map(h, w, hp, wp, d)));
    }
    let mask = if shift > 0 {
        Some(build_attention_mask::<T>(hp, wp, m, shift).expect("mask dims validated by padding"))
    } else {
        None
    };
    if shift > 0 {
        let s = shift as isize;
        y = g.reindex(y, &[hp * wp, d], Arc::new(roll_index(hp, wp, d, -s, -s)));
    }
    y = g.reindex(y, &[nw * m2, d], Arc::new(partition_map(hp, wp, m, d)));
    y = attach_window_attention(g, bound, &ids.attn, y, nw, m, heads, mask.as_ref());
    y = g.reindex(y, &[hp * wp, d], Arc::new(reverse_map(hp, wp, m, d)));
    if shift > 0 {
        let s = shift as isize;
        y = g.reindex(y, &[hp * wp, d], Arc::new(roll_index(hp, wp, d, s, s)));
    }
    if (hp, wp) != (h, w) {
        y = g.reindex(y, &[h * w, d], Arc::new(crop_map(hp, wp, h, w, d)));
    }
    let x = g.add(shortcut, y);

    let mut y = ids.norm2.attach(g, bound, x);
    y = ids.fc1.attach(g, bound, y);
    y = g.gelu(y);
    y = ids.fc2.attach(g, bound, y);
    g.add(x, y)
}

pub(crate) fn attach_stage<T: Real>(
    g: &mut Graph<T>,
    bound: &Bound,
    stage: &StageIds,
    x: NodeId,
    h: usize,
    w: usize,
    cfg: &EncoderConfig,
) -> NodeId {
    let mut y = x;
    for (i, block) in stage.blocks.iter().enumerate() {
        y = attach_swin_block(g, bound, block, y, h, w, cfg.window, cfg.heads, i % 2 == 1);
    }
    match &stage.fuse {
        Some(fuse) => {
            let cat = g.concat_cols(&[x, y]);
            fuse.attach(g, bound, cat)
        }
        None => y,
    }
}

pub(crate) fn attach_encode<T: Real>(
    g: &mut Graph<T>,
    bound: &Bound,
    enc: &EncoderParams,
    img_tokens: NodeId,
    h: usize,
    w: usize,
    cfg: &EncoderConfig,
) -> NodeId {
    let f_in = enc.embed.attach(g, bound, img_tokens);
    let mut features = alloc::vec![f_in];
    let mut x = f_in;
    for stage in &enc.stages {
        x = attach_stage(g, bound, stage, x, h, w, cfg);
        features.push(x);
    }
    match &enc.fuse {
        Some(fuse) => {
            let cat = g.concat_cols(&features);
            let fused = fuse.attach(g, bound, cat);
            g.add(f_in, fused)
        }
        None => g.add(f_in, x),
    }
}

/// Attaches the encoder over an image, returning the latent node.
pub(crate) fn attach_encode_image<T: Real>(
    g: &mut Graph<T>,
    bound: &Bound,
    enc: &EncoderParams,
    cfg: &EncoderConfig,
    img: &Image<T>,
) -> CoreResult<NodeId> {
    if img.channels() != cfg.channels {
        return Err(invalid_arg!(
            "encoder expects {} channels, image has {}",
            cfg.channels,
            img.channels()
        ));
    }
    let tokens = g.constant(image_to_tokens(img));
    Ok(attach_encode(g, bound, enc, tokens, img.height(), img.width(), cfg))
}

// ---------------------------------------------------------------------------
// value-level wrappers over the graph builders
// ---------------------------------------------------------------------------

/// Windowed multi-head self-attention over partitioned tokens
/// `(nW*M^2, d)`, with relative-position bias and an optional additive mask.
pub fn window_attention<T: Real>(
    store: &ParamStore<T>,
    ids: &AttentionIds,
    heads: usize,
    m: usize,
    windows: &Tensor<T>,
    mask: Option<&Tensor<T>>,
) -> CoreResult<Tensor<T>> {
    let d = windows.shape().get(1).copied().unwrap_or(0);
    if d == 0 || d % heads != 0 {
        return Err(invalid_arg!("token dim {d} must be a positive multiple of heads {heads}"));
    }
    let m2 = m * m;
    if windows.shape()[0] % m2 != 0 {
        return Err(invalid_arg!("token count {} is not a multiple of M^2 = {m2}", windows.shape()[0]));
    }
    let nw = windows.shape()[0] / m2;
    let mut g = Graph::new();
    let bound = store.bind(&mut g, false);
    let x = g.constant(windows.clone());
    let y = attach_window_attention(&mut g, &bound, ids, x, nw, m, heads, mask);
    Ok(g.value(y).clone())
}

/// One pre-norm shifted-window transformer block on `(h*w, d)` tokens.
pub fn swin_block<T: Real>(
    store: &ParamStore<T>,
    ids: &BlockIds,
    fm: &Tensor<T>,
    h: usize,
    w: usize,
    m: usize,
    heads: usize,
    shifted: bool,
) -> CoreResult<Tensor<T>> {
    check_tokens(fm, h, w)?;
    let mut g = Graph::new();
    let bound = store.bind(&mut g, false);
    let x = g.constant(fm.clone());
    let y = attach_swin_block(&mut g, &bound, ids, x, h, w, m, heads, shifted);
    Ok(g.value(y).clone())
}

/// One encoder stage: `D` swin blocks, then local feature fusion (a 1x1
/// conv over `[input, block output]`) when configured.
pub fn rst_block<T: Real>(
    store: &ParamStore<T>,
    stage: &StageIds,
    fm: &Tensor<T>,
    h: usize,
    w: usize,
    cfg: &EncoderConfig,
) -> CoreResult<Tensor<T>> {
    check_tokens(fm, h, w)?;
    let mut g = Graph::new();
    let bound = store.bind(&mut g, false);
    let x = g.constant(fm.clone());
    let y = attach_stage(&mut g, &bound, stage, x, h, w, cfg);
    Ok(g.value(y).clone())
}

/// Full encoder: embed, N stages, global fusion plus the embedded-input
/// residual. Output spatial size always equals the input's.
pub fn encode<T: Real>(
    store: &ParamStore<T>,
    enc: &EncoderParams,
    cfg: &EncoderConfig,
    img: &Image<T>,
) -> CoreResult<LatentGrid<T>> {
    if img.channels() != cfg.channels {
        return Err(invalid_arg!(
            "encoder expects {} channels, image has {}",
            cfg.channels,
            img.channels()
        ));
    }
    let (h, w) = (img.height(), img.width());
    let mut g = Graph::new();
    let bound = store.bind(&mut g, false);
    let tokens = g.constant(image_to_tokens(img));
    let out = attach_encode(&mut g, &bound, enc, tokens, h, w, cfg);
    Ok(LatentGrid { features: g.value(out).clone(), height: h, width: w })
}

/// Builds a fresh store + params for the given encoder config (used by
/// tests and by the full model).
pub fn init_encoder<T: Real>(
    cfg: &EncoderConfig,
    rng: &mut impl Rng,
) -> CoreResult<(ParamStore<T>, EncoderParams)> {
    cfg.validate()?;
    let mut store = ParamStore::new();
    let params = EncoderParams::init(&mut store, rng, cfg);
    Ok((store, params))
}

/// Overwrites every tensor whose name contains `fragment` with zeros.
/// Test helper for the "zero weights make residual blocks the identity"
/// family of checks; exposed because the companion crate's tests use it too.
pub fn zero_params_matching<T: Real>(store: &mut ParamStore<T>, fragment: &str) {
    let names: Vec<String> = store
        .entries()
        .iter()
        .filter(|e| e.name.contains(fragment))
        .map(|e| e.name.clone())
        .collect();
    for name in names {
        let id = store.find(&name).unwrap();
        let zero = Tensor::zeros(store.get(id).shape());
        *store.get_mut(id) = zero;
    }
}
