//! Desk-scale Transformer encoder for the dictionary route.
//!
//! Token + learned positional embeddings feed a stack of post-norm attention
//! blocks (multi-head scaled dot-product attention with key-side padding
//! masks, then a position-wise feed-forward, each wrapped in residual +
//! layer norm). The class-token output at position 0 is pooled into the same
//! dense regression head the token model uses.
//!
//! The backward pass is hand-written, mirroring the forward sweep exactly;
//! `nn::grad_check` validates it against central finite differences.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::checkpoint::ModelArch;
use crate::nn::{DenseStack, DropoutPlan, ParamId, ParamVec, Regressor};
use crate::rng::Rng;
use crate::tokenize::TokenSequence;

const LN_EPS: f64 = 1e-5;

/// Encoder hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderConfig {
    pub vocab_size: usize,
    pub layers: usize,
    pub heads: usize,
    pub model_dim: usize,
    pub ff_dim: usize,
    pub max_len: usize,
    /// Dropout rate applied inside blocks (after attention output and after
    /// the feed-forward), 0.1 by default.
    pub block_dropout: f64,
    /// Learned positional embeddings; disabling them makes the pooled output
    /// permutation-invariant over real tokens.
    pub positional: bool,
}

impl EncoderConfig {
    pub fn new(vocab_size: usize) -> Self {
        EncoderConfig {
            vocab_size,
            layers: 2,
            heads: 4,
            model_dim: 64,
            ff_dim: 256,
            max_len: 128,
            block_dropout: 0.1,
            positional: true,
        }
    }

    pub fn validate(&self) -> bool {
        self.layers >= 1 && self.heads >= 1 && self.model_dim.is_multiple_of(self.heads)
    }
}

/// Dictionary-model hyperparameters: the encoder plus the regression head.
#[derive(Debug, Clone, PartialEq)]
pub struct DictModelConfig {
    pub encoder: EncoderConfig,
    pub hidden: Vec<usize>,
    pub head_dropout: f64,
    pub train_encoder: bool,
}

impl DictModelConfig {
    pub fn new(vocab_size: usize) -> Self {
        DictModelConfig {
            encoder: EncoderConfig::new(vocab_size),
            hidden: vec![128, 64, 32],
            head_dropout: 0.5,
            train_encoder: true,
        }
    }
}

struct BlockSlots {
    wq: ParamId,
    bq: ParamId,
    wk: ParamId,
    bk: ParamId,
    wv: ParamId,
    bv: ParamId,
    wo: ParamId,
    bo: ParamId,
    ln1_g: ParamId,
    ln1_b: ParamId,
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
    ln2_g: ParamId,
    ln2_b: ParamId,
}

/// Transformer regressor over subword sequences.
pub struct DictModel {
    pub cfg: DictModelConfig,
    params: ParamVec,
    tok_emb: ParamId,
    pos_emb: ParamId,
    blocks: Vec<BlockSlots>,
    head: DenseStack,
}

struct LnCache {
    rstd: Vec<f64>,
    norm: Vec<f64>,
}

struct BlockCache {
    x_in: Vec<f64>,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    attn: Vec<f64>,
    ctx: Vec<f64>,
    attn_drop: Option<Vec<f64>>,
    ln1: LnCache,
    y1: Vec<f64>,
    f1: Vec<f64>,
    ff_drop: Option<Vec<f64>>,
    ln2: LnCache,
}

struct EncodeCache {
    t_len: usize,
    blocks: Vec<BlockCache>,
    x_out: Vec<f64>,
    /// Smallest |pre-activation| across the feed-forward ReLUs.
    kink_margin: f64,
}

struct AttnPass {
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    attn: Vec<f64>,
    ctx: Vec<f64>,
    out: Vec<f64>,
}

fn layer_norm(x: &[f64], dim: usize, gamma: &[f64], beta: &[f64], out: &mut [f64]) -> LnCache {
    let rows = x.len() / dim;
    let mut cache = LnCache {
        rstd: vec![0.0; rows],
        norm: vec![0.0; rows * dim],
    };
    for r in 0..rows {
        let row = &x[r * dim..(r + 1) * dim];
        let mean: f64 = row.iter().sum::<f64>() / dim as f64;
        let var: f64 = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / dim as f64;
        let rstd = 1.0 / libm::sqrt(var + LN_EPS);
        cache.rstd[r] = rstd;
        for c in 0..dim {
            let n = (row[c] - mean) * rstd;
            cache.norm[r * dim + c] = n;
            out[r * dim + c] = gamma[c] * n + beta[c];
        }
    }
    cache
}

/// Backward through layer norm; accumulates gamma/beta grads and returns the
/// gradient with respect to the input.
fn layer_norm_backward(
    g_out: &[f64],
    cache: &LnCache,
    dim: usize,
    gamma: &[f64],
    g_gamma: &mut [f64],
    g_beta: &mut [f64],
) -> Vec<f64> {
    let rows = g_out.len() / dim;
    let mut g_in = vec![0.0; rows * dim];
    for r in 0..rows {
        let go = &g_out[r * dim..(r + 1) * dim];
        let n = &cache.norm[r * dim..(r + 1) * dim];
        let rstd = cache.rstd[r];
        let mut gn = vec![0.0; dim];
        for c in 0..dim {
            g_gamma[c] += go[c] * n[c];
            g_beta[c] += go[c];
            gn[c] = go[c] * gamma[c];
        }
        let mean_gn: f64 = gn.iter().sum::<f64>() / dim as f64;
        let mean_gn_n: f64 = gn.iter().zip(n).map(|(g, nv)| g * nv).sum::<f64>() / dim as f64;
        for c in 0..dim {
            g_in[r * dim + c] = rstd * (gn[c] - mean_gn - n[c] * mean_gn_n);
        }
    }
    g_in
}

/// Per-position affine map `out[t] = W x[t] + b` with W stored `[out, in]`.
fn project(w: &[f64], b: &[f64], x: &[f64], in_dim: usize, out_dim: usize, out: &mut [f64]) {
    let rows = x.len() / in_dim;
    for t in 0..rows {
        let xr = &x[t * in_dim..(t + 1) * in_dim];
        let or = &mut out[t * out_dim..(t + 1) * out_dim];
        for j in 0..out_dim {
            let wr = &w[j * in_dim..(j + 1) * in_dim];
            let mut acc = b[j];
            for (wv, xv) in wr.iter().zip(xr) {
                acc += wv * xv;
            }
            or[j] = acc;
        }
    }
}

/// Backward of [`project`]: accumulates weight/bias grads and the input
/// gradient.
#[allow(clippy::too_many_arguments)]
fn project_backward(
    w: &[f64],
    x: &[f64],
    g_out: &[f64],
    in_dim: usize,
    out_dim: usize,
    g_w: &mut [f64],
    g_b: &mut [f64],
    g_x: &mut [f64],
) {
    let rows = x.len() / in_dim;
    for t in 0..rows {
        let xr = &x[t * in_dim..(t + 1) * in_dim];
        let gor = &g_out[t * out_dim..(t + 1) * out_dim];
        let gxr = &mut g_x[t * in_dim..(t + 1) * in_dim];
        for j in 0..out_dim {
            let go = gor[j];
            if go == 0.0 {
                continue;
            }
            g_b[j] += go;
            let wr = &w[j * in_dim..(j + 1) * in_dim];
            let gwr = &mut g_w[j * in_dim..(j + 1) * in_dim];
            for c in 0..in_dim {
                gwr[c] += go * xr[c];
                gxr[c] += go * wr[c];
            }
        }
    }
}

impl DictModel {
    pub fn new(cfg: DictModelConfig, rng: &mut Rng) -> Self {
        assert!(cfg.encoder.validate(), "invalid encoder config");
        let e = &cfg.encoder;
        let d = e.model_dim;
        let mut b = ParamVec::builder();
        let tok_emb = b.alloc("encoder.tok_emb", &[e.vocab_size, d]);
        let pos_emb = b.alloc("encoder.pos_emb", &[e.max_len, d]);
        {
            // uniform embedding init with a pinned zero pad row
            let spec_off = d; // skip the pad row
            let mut init = vec![0.0; e.vocab_size * d];
            for v in init.iter_mut().skip(spec_off) {
                *v = rng.uniform(-0.05, 0.05);
            }
            b.copy_into(tok_emb, &init);
            b.fill(pos_emb, || rng.uniform(-0.05, 0.05));
        }
        let mut blocks = Vec::with_capacity(e.layers);
        for l in 0..e.layers {
            let p = |suffix: &str| format!("encoder.l{l}.{suffix}");
            let wq = b.alloc(&p("attn.wq"), &[d, d]);
            let bq = b.alloc(&p("attn.bq"), &[d]);
            let wk = b.alloc(&p("attn.wk"), &[d, d]);
            let bk = b.alloc(&p("attn.bk"), &[d]);
            let wv = b.alloc(&p("attn.wv"), &[d, d]);
            let bv = b.alloc(&p("attn.bv"), &[d]);
            let wo = b.alloc(&p("attn.wo"), &[d, d]);
            let bo = b.alloc(&p("attn.bo"), &[d]);
            for id in [wq, wk, wv, wo] {
                b.glorot(id, d, d, rng);
            }
            let ln1_g = b.alloc(&p("ln1.g"), &[d]);
            let ln1_b = b.alloc(&p("ln1.b"), &[d]);
            b.fill(ln1_g, || 1.0);
            let w1 = b.alloc(&p("ff.w1"), &[e.ff_dim, d]);
            let b1 = b.alloc(&p("ff.b1"), &[e.ff_dim]);
            let w2 = b.alloc(&p("ff.w2"), &[d, e.ff_dim]);
            let b2 = b.alloc(&p("ff.b2"), &[d]);
            b.glorot(w1, d, e.ff_dim, rng);
            b.glorot(w2, e.ff_dim, d, rng);
            let ln2_g = b.alloc(&p("ln2.g"), &[d]);
            let ln2_b = b.alloc(&p("ln2.b"), &[d]);
            b.fill(ln2_g, || 1.0);
            blocks.push(BlockSlots {
                wq,
                bq,
                wk,
                bk,
                wv,
                bv,
                wo,
                bo,
                ln1_g,
                ln1_b,
                w1,
                b1,
                w2,
                b2,
                ln2_g,
                ln2_b,
            });
        }
        let head = DenseStack::build(&mut b, "head", d, &cfg.hidden, cfg.head_dropout, rng);
        DictModel {
            cfg,
            params: b.finish(),
            tok_emb,
            pos_emb,
            blocks,
            head,
        }
    }

    fn embed(&self, seq: &TokenSequence) -> Vec<f64> {
        let d = self.cfg.encoder.model_dim;
        let table = self.params.get(self.tok_emb);
        let pos = self.params.get(self.pos_emb);
        let t_len = seq.len();
        let mut x = vec![0.0; t_len * d];
        for (t, &id) in seq.ids().iter().enumerate() {
            let row = &table[id as usize * d..(id as usize + 1) * d];
            let xr = &mut x[t * d..(t + 1) * d];
            xr.copy_from_slice(row);
            if self.cfg.encoder.positional {
                for (xv, pv) in xr.iter_mut().zip(&pos[t * d..(t + 1) * d]) {
                    *xv += pv;
                }
            }
        }
        x
    }

    /// Multi-head scaled dot-product attention over `x` with key-side
    /// padding masks.
    fn attention(&self, block: &BlockSlots, x: &[f64], mask: &[bool]) -> AttnPass {
        let e = &self.cfg.encoder;
        let d = e.model_dim;
        let heads = e.heads;
        let dh = d / heads;
        let t_len = mask.len();
        let inv_scale = 1.0 / libm::sqrt(dh as f64);
        let p = &self.params;

        let mut q = vec![0.0; t_len * d];
        let mut k = vec![0.0; t_len * d];
        let mut v = vec![0.0; t_len * d];
        project(p.get(block.wq), p.get(block.bq), x, d, d, &mut q);
        project(p.get(block.wk), p.get(block.bk), x, d, d, &mut k);
        project(p.get(block.wv), p.get(block.bv), x, d, d, &mut v);

        let mut attn = vec![0.0; heads * t_len * t_len];
        let mut ctx = vec![0.0; t_len * d];
        for h in 0..heads {
            let off = h * dh;
            for i in 0..t_len {
                let qi = &q[i * d + off..i * d + off + dh];
                let arow = &mut attn[(h * t_len + i) * t_len..(h * t_len + i + 1) * t_len];
                let mut max_score = f64::NEG_INFINITY;
                for j in 0..t_len {
                    if !mask[j] {
                        continue;
                    }
                    let kj = &k[j * d + off..j * d + off + dh];
                    let mut dot = 0.0;
                    for (qv, kv) in qi.iter().zip(kj) {
                        dot += qv * kv;
                    }
                    let s = dot * inv_scale;
                    arow[j] = s;
                    if s > max_score {
                        max_score = s;
                    }
                }
                let mut sum = 0.0;
                for j in 0..t_len {
                    if mask[j] {
                        let ex = libm::exp(arow[j] - max_score);
                        arow[j] = ex;
                        sum += ex;
                    } else {
                        arow[j] = 0.0;
                    }
                }
                for j in 0..t_len {
                    arow[j] /= sum;
                }
                let cr = &mut ctx[i * d + off..i * d + off + dh];
                for j in 0..t_len {
                    let a = arow[j];
                    if a != 0.0 {
                        let vj = &v[j * d + off..j * d + off + dh];
                        for (cv, vv) in cr.iter_mut().zip(vj) {
                            *cv += a * vv;
                        }
                    }
                }
            }
        }
        let mut out = vec![0.0; t_len * d];
        project(p.get(block.wo), p.get(block.bo), &ctx, d, d, &mut out);
        AttnPass {
            q,
            k,
            v,
            attn,
            ctx,
            out,
        }
    }

    fn forward_encoder(&self, seq: &TokenSequence, plan: &mut DropoutPlan) -> EncodeCache {
        let e = &self.cfg.encoder;
        let d = e.model_dim;
        let t_len = seq.len();
        assert!(
            t_len <= e.max_len,
            "sequence length {t_len} exceeds max {}",
            e.max_len
        );
        let mask = seq.mask();
        let mut x = self.embed(seq);
        let mut blocks = Vec::with_capacity(self.blocks.len());
        let mut kink_margin = f64::INFINITY;
        for block in &self.blocks {
            let x_in = x.clone();
            let AttnPass {
                q,
                k,
                v,
                attn,
                ctx,
                out,
            } = self.attention(block, &x, mask);
            let mut attn_out = out;
            let attn_drop = {
                let factors = plan_factors(plan, attn_out.len(), e.block_dropout);
                if let Some(f) = &factors {
                    for (av, fv) in attn_out.iter_mut().zip(f) {
                        *av *= fv;
                    }
                }
                factors
            };
            let mut r1 = x_in.clone();
            for (rv, av) in r1.iter_mut().zip(&attn_out) {
                *rv += av;
            }
            let mut y1 = vec![0.0; t_len * d];
            let ln1 = layer_norm(
                &r1,
                d,
                self.params.get(block.ln1_g),
                self.params.get(block.ln1_b),
                &mut y1,
            );

            let mut f1 = vec![0.0; t_len * e.ff_dim];
            project(
                self.params.get(block.w1),
                self.params.get(block.b1),
                &y1,
                d,
                e.ff_dim,
                &mut f1,
            );
            for fv in f1.iter_mut() {
                if fv.abs() < kink_margin {
                    kink_margin = fv.abs();
                }
                *fv = crate::nn::relu(*fv);
            }
            let mut f2 = vec![0.0; t_len * d];
            project(
                self.params.get(block.w2),
                self.params.get(block.b2),
                &f1,
                e.ff_dim,
                d,
                &mut f2,
            );
            let ff_drop = {
                let factors = plan_factors(plan, f2.len(), e.block_dropout);
                if let Some(f) = &factors {
                    for (av, fv) in f2.iter_mut().zip(f) {
                        *av *= fv;
                    }
                }
                factors
            };
            let mut r2 = y1.clone();
            for (rv, fv) in r2.iter_mut().zip(&f2) {
                *rv += fv;
            }
            let mut x_next = vec![0.0; t_len * d];
            let ln2 = layer_norm(
                &r2,
                d,
                self.params.get(block.ln2_g),
                self.params.get(block.ln2_b),
                &mut x_next,
            );

            blocks.push(BlockCache {
                x_in,
                q,
                k,
                v,
                attn,
                ctx,
                attn_drop,
                ln1,
                y1,
                f1,
                ff_drop,
                ln2,
            });
            x = x_next;
        }
        EncodeCache {
            t_len,
            blocks,
            x_out: x,
            kink_margin,
        }
    }

    /// Contextual matrix for a sequence (inference dropout); the public
    /// encode surface.
    pub fn encode(&self, seq: &TokenSequence) -> Vec<f64> {
        let cache = self.forward_encoder(seq, &mut DropoutPlan::infer());
        cache.x_out
    }

    /// Pool a contextual matrix (class-token position 0) through the dense
    /// regression head. `encode` followed by this equals `predict_one`.
    pub fn pool_and_regress(&self, contextual: &[f64], plan: &mut DropoutPlan) -> f64 {
        let d = self.cfg.encoder.model_dim;
        assert!(
            contextual.len() >= d,
            "contextual matrix shorter than one position"
        );
        let (out, _) = self.head.forward(&self.params, &contextual[0..d], plan);
        out
    }

    /// Attention weight tensors per layer (`heads * t * t`, row-major by
    /// head then query), computed in inference mode.
    pub fn attention_maps(&self, seq: &TokenSequence) -> Vec<Vec<f64>> {
        let cache = self.forward_encoder(seq, &mut DropoutPlan::infer());
        cache.blocks.into_iter().map(|b| b.attn).collect()
    }

    /// Per-position normalized layer-norm activations (before the affine
    /// rescale) of the final block, for invariant checks.
    pub fn final_ln_norms(&self, seq: &TokenSequence) -> Vec<f64> {
        let cache = self.forward_encoder(seq, &mut DropoutPlan::infer());
        cache
            .blocks
            .last()
            .map(|b| b.ln2.norm.clone())
            .unwrap_or_default()
    }

    fn forward_one(
        &self,
        seq: &TokenSequence,
        plan: &mut DropoutPlan,
    ) -> (f64, EncodeCache, crate::nn::DenseCache) {
        let cache = self.forward_encoder(seq, plan);
        let d = self.cfg.encoder.model_dim;
        let cls = &cache.x_out[0..d];
        let (out, head_cache) = self.head.forward(&self.params, cls, plan);
        (out, cache, head_cache)
    }

    fn backward_one(
        &self,
        seq: &TokenSequence,
        cache: &EncodeCache,
        head_cache: &crate::nn::DenseCache,
        g_out: f64,
        grad: &mut [f64],
    ) {
        let e = &self.cfg.encoder;
        let d = e.model_dim;
        let heads = e.heads;
        let dh = d / heads;
        let t_len = cache.t_len;
        let inv_scale = 1.0 / libm::sqrt(dh as f64);
        let p = &self.params;

        let g_cls = self.head.backward(p, head_cache, g_out, grad);
        let mut g_x = vec![0.0; t_len * d];
        g_x[0..d].copy_from_slice(&g_cls);

        for (block, bc) in self.blocks.iter().zip(&cache.blocks).rev() {
            // LN2
            let mut g_ln2_g = vec![0.0; d];
            let mut g_ln2_b = vec![0.0; d];
            let g_r2 = layer_norm_backward(
                &g_x,
                &bc.ln2,
                d,
                p.get(block.ln2_g),
                &mut g_ln2_g,
                &mut g_ln2_b,
            );
            add_into(grad, p.range(block.ln2_g), &g_ln2_g);
            add_into(grad, p.range(block.ln2_b), &g_ln2_b);

            // r2 = y1 + dropout(f2)
            let mut g_f2 = g_r2.clone();
            if let Some(f) = &bc.ff_drop {
                for (g, fv) in g_f2.iter_mut().zip(f) {
                    *g *= fv;
                }
            }
            let mut g_y1 = g_r2;

            // f2 = W2 * f1 + b2
            let mut g_f1 = vec![0.0; t_len * e.ff_dim];
            {
                let mut g_w2 = vec![0.0; d * e.ff_dim];
                let mut g_b2 = vec![0.0; d];
                project_backward(
                    p.get(block.w2),
                    &bc.f1,
                    &g_f2,
                    e.ff_dim,
                    d,
                    &mut g_w2,
                    &mut g_b2,
                    &mut g_f1,
                );
                add_into(grad, p.range(block.w2), &g_w2);
                add_into(grad, p.range(block.b2), &g_b2);
            }
            // relu on f1 (cache holds post-relu values)
            for (g, fv) in g_f1.iter_mut().zip(&bc.f1) {
                if *fv <= 0.0 {
                    *g = 0.0;
                }
            }
            // f1_pre = W1 * y1 + b1
            {
                let mut g_w1 = vec![0.0; e.ff_dim * d];
                let mut g_b1 = vec![0.0; e.ff_dim];
                let mut g_y1_ff = vec![0.0; t_len * d];
                project_backward(
                    p.get(block.w1),
                    &bc.y1,
                    &g_f1,
                    d,
                    e.ff_dim,
                    &mut g_w1,
                    &mut g_b1,
                    &mut g_y1_ff,
                );
                add_into(grad, p.range(block.w1), &g_w1);
                add_into(grad, p.range(block.b1), &g_b1);
                for (g, gf) in g_y1.iter_mut().zip(&g_y1_ff) {
                    *g += gf;
                }
            }

            // LN1
            let mut g_ln1_g = vec![0.0; d];
            let mut g_ln1_b = vec![0.0; d];
            let g_r1 = layer_norm_backward(
                &g_y1,
                &bc.ln1,
                d,
                p.get(block.ln1_g),
                &mut g_ln1_g,
                &mut g_ln1_b,
            );
            add_into(grad, p.range(block.ln1_g), &g_ln1_g);
            add_into(grad, p.range(block.ln1_b), &g_ln1_b);

            // r1 = x_in + dropout(attn_out)
            let mut g_attn_out = g_r1.clone();
            if let Some(f) = &bc.attn_drop {
                for (g, fv) in g_attn_out.iter_mut().zip(f) {
                    *g *= fv;
                }
            }
            let mut g_x_in = g_r1;

            // attn_out = Wo * ctx + bo
            let mut g_ctx = vec![0.0; t_len * d];
            {
                let mut g_wo = vec![0.0; d * d];
                let mut g_bo = vec![0.0; d];
                project_backward(
                    p.get(block.wo),
                    &bc.ctx,
                    &g_attn_out,
                    d,
                    d,
                    &mut g_wo,
                    &mut g_bo,
                    &mut g_ctx,
                );
                add_into(grad, p.range(block.wo), &g_wo);
                add_into(grad, p.range(block.bo), &g_bo);
            }

            // attention core
            let mask = seq.mask();
            let mut g_q = vec![0.0; t_len * d];
            let mut g_k = vec![0.0; t_len * d];
            let mut g_v = vec![0.0; t_len * d];
            for h in 0..heads {
                let off = h * dh;
                for i in 0..t_len {
                    let arow = &bc.attn[(h * t_len + i) * t_len..(h * t_len + i + 1) * t_len];
                    let g_ci = &g_ctx[i * d + off..i * d + off + dh];
                    // gV and gA
                    let mut g_arow = vec![0.0; t_len];
                    for j in 0..t_len {
                        let a = arow[j];
                        if a != 0.0 {
                            let vj = &bc.v[j * d + off..j * d + off + dh];
                            let gvj = &mut g_v[j * d + off..j * d + off + dh];
                            let mut dot = 0.0;
                            for c in 0..dh {
                                gvj[c] += a * g_ci[c];
                                dot += g_ci[c] * vj[c];
                            }
                            g_arow[j] = dot;
                        }
                    }
                    // softmax backward
                    let inner: f64 = arow.iter().zip(&g_arow).map(|(a, g)| a * g).sum();
                    let qi = &bc.q[i * d + off..i * d + off + dh];
                    let gqi = &mut g_q[i * d + off..i * d + off + dh];
                    for j in 0..t_len {
                        let a = arow[j];
                        if a == 0.0 {
                            continue;
                        }
                        let gs = a * (g_arow[j] - inner) * inv_scale;
                        if gs == 0.0 {
                            continue;
                        }
                        let kj = &bc.k[j * d + off..j * d + off + dh];
                        let gkj = &mut g_k[j * d + off..j * d + off + dh];
                        for c in 0..dh {
                            gqi[c] += gs * kj[c];
                            gkj[c] += gs * qi[c];
                        }
                    }
                    let _ = mask;
                }
            }

            // project Q, K, V back to x_in
            {
                let mut g_w = vec![0.0; d * d];
                let mut g_b = vec![0.0; d];
                project_backward(
                    p.get(block.wq),
                    &bc.x_in,
                    &g_q,
                    d,
                    d,
                    &mut g_w,
                    &mut g_b,
                    &mut g_x_in,
                );
                add_into(grad, p.range(block.wq), &g_w);
                add_into(grad, p.range(block.bq), &g_b);
            }
            {
                let mut g_w = vec![0.0; d * d];
                let mut g_b = vec![0.0; d];
                project_backward(
                    p.get(block.wk),
                    &bc.x_in,
                    &g_k,
                    d,
                    d,
                    &mut g_w,
                    &mut g_b,
                    &mut g_x_in,
                );
                add_into(grad, p.range(block.wk), &g_w);
                add_into(grad, p.range(block.bk), &g_b);
            }
            {
                let mut g_w = vec![0.0; d * d];
                let mut g_b = vec![0.0; d];
                project_backward(
                    p.get(block.wv),
                    &bc.x_in,
                    &g_v,
                    d,
                    d,
                    &mut g_w,
                    &mut g_b,
                    &mut g_x_in,
                );
                add_into(grad, p.range(block.wv), &g_w);
                add_into(grad, p.range(block.bv), &g_b);
            }
            g_x = g_x_in;
        }

        // embeddings
        let tok_range = p.range(self.tok_emb);
        let pos_range = p.range(self.pos_emb);
        for (t, &id) in seq.ids().iter().enumerate() {
            let gr = &g_x[t * d..(t + 1) * d];
            let row = tok_range.start + id as usize * d;
            for (c, g) in gr.iter().enumerate() {
                grad[row + c] += g;
            }
            if self.cfg.encoder.positional {
                let prow = pos_range.start + t * d;
                for (c, g) in gr.iter().enumerate() {
                    grad[prow + c] += g;
                }
            }
        }
    }
}

fn plan_factors(plan: &mut DropoutPlan, n: usize, rate: f64) -> Option<Vec<f64>> {
    plan.next_factors(n, rate)
}

fn add_into(grad: &mut [f64], range: Range<usize>, values: &[f64]) {
    for (g, v) in grad[range].iter_mut().zip(values) {
        *g += v;
    }
}

impl Regressor for DictModel {
    fn arch(&self) -> ModelArch {
        ModelArch::Dictionary(self.cfg.clone())
    }

    fn params(&self) -> &ParamVec {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamVec {
        &mut self.params
    }

    fn frozen_ranges(&self) -> Vec<Range<usize>> {
        let mut ranges = Vec::new();
        let d = self.cfg.encoder.model_dim;
        let tok = self.params.spec(self.tok_emb);
        if self.cfg.train_encoder {
            ranges.push(tok.offset..tok.offset + d); // pad row
        } else {
            // freeze everything up to the head (encoder params are laid out
            // first, ending with the last block's ln2.b)
            let head_start = self
                .params
                .specs()
                .iter()
                .find(|s| s.name.starts_with("head."))
                .map(|s| s.offset)
                .unwrap_or(0);
            ranges.push(0..head_start);
        }
        ranges
    }

    fn predict_one(&self, seq: &TokenSequence, plan: &mut DropoutPlan) -> f64 {
        let (out, _, _) = self.forward_one(seq, plan);
        out
    }

    fn kink_margin(&self, seqs: &[&TokenSequence], plan: &mut DropoutPlan) -> f64 {
        let mut margin = f64::INFINITY;
        for seq in seqs {
            let (_, enc, head) = self.forward_one(seq, plan);
            margin = margin.min(enc.kink_margin).min(head.kink_margin);
        }
        margin
    }

    fn batch_grad(
        &self,
        seqs: &[&TokenSequence],
        targets: &[f64],
        plan: &mut DropoutPlan,
        grad: &mut [f64],
    ) -> f64 {
        debug_assert_eq!(seqs.len(), targets.len());
        let batch = seqs.len();
        let mut loss = 0.0;
        for (seq, &y) in seqs.iter().zip(targets) {
            let (pred, enc_cache, head_cache) = self.forward_one(seq, plan);
            let err = pred - y;
            loss += err * err;
            let g_out = 2.0 * err / batch as f64;
            self.backward_one(seq, &enc_cache, &head_cache, g_out, grad);
        }
        loss / batch as f64
    }
}
