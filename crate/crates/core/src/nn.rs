//! Minimal dense neural-network core with hand-written reverse-mode
//! gradients.
//!
//! All trainable parameters of a model live in one flat [`ParamVec`] with a
//! named layout. That keeps Adam, finite-difference checking, and checkpoint
//! serialization trivial: they all walk the same flat array in the same
//! declared order.
//!
//! Dropout is inverted (kept units scale by `1/(1-rate)` at train time), so
//! inference needs no rescaling and Monte-Carlo sampling can run the train
//! path unchanged.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::checkpoint::ModelArch;
use crate::embed::EmbeddingMatrix;
use crate::rng::Rng;
use crate::tokenize::TokenSequence;

/// Shaped container for a parameter or activation block.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, NnError> {
        let expect: usize = shape.iter().product();
        if expect != data.len() {
            return Err(NnError::ShapeMismatch {
                context: format!(
                    "tensor of shape {shape:?} needs {expect} values, got {}",
                    data.len()
                ),
            });
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NnError {
    ShapeMismatch { context: String },
    EmptyInput,
    NonFinite { context: String },
}

impl fmt::Display for NnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NnError::ShapeMismatch { context } => write!(f, "shape mismatch: {context}"),
            NnError::EmptyInput => write!(f, "empty input"),
            NnError::NonFinite { context } => write!(f, "non-finite value in {context}"),
        }
    }
}

impl core::error::Error for NnError {}

/// Handle to one named parameter block inside a [`ParamVec`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(usize);

#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub len: usize,
}

/// Flat storage for every trainable parameter of one model, in declaration
/// order. Checkpoint payloads serialize this buffer front to back.
#[derive(Debug, Clone)]
pub struct ParamVec {
    specs: Vec<ParamSpec>,
    data: Vec<f64>,
}

impl ParamVec {
    pub fn builder() -> ParamBuilder {
        ParamBuilder {
            specs: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn specs(&self) -> &[ParamSpec] {
        &self.specs
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, id: ParamId) -> &[f64] {
        let s = &self.specs[id.0];
        &self.data[s.offset..s.offset + s.len]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut [f64] {
        let s = &self.specs[id.0];
        &mut self.data[s.offset..s.offset + s.len]
    }

    pub fn spec(&self, id: ParamId) -> &ParamSpec {
        &self.specs[id.0]
    }

    pub fn range(&self, id: ParamId) -> Range<usize> {
        let s = &self.specs[id.0];
        s.offset..s.offset + s.len
    }

    pub fn tensor(&self, id: ParamId) -> Tensor {
        let s = &self.specs[id.0];
        Tensor {
            shape: s.shape.clone(),
            data: self.get(id).to_vec(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub struct ParamBuilder {
    specs: Vec<ParamSpec>,
    data: Vec<f64>,
}

impl ParamBuilder {
    pub fn alloc(&mut self, name: &str, shape: &[usize]) -> ParamId {
        let len: usize = shape.iter().product();
        let offset = self.data.len();
        self.specs.push(ParamSpec {
            name: name.to_owned(),
            shape: shape.to_vec(),
            offset,
            len,
        });
        self.data.extend(core::iter::repeat_n(0.0, len));
        ParamId(self.specs.len() - 1)
    }

    pub fn fill(&mut self, id: ParamId, mut f: impl FnMut() -> f64) {
        let s = &self.specs[id.0];
        for v in &mut self.data[s.offset..s.offset + s.len] {
            *v = f();
        }
    }

    /// Uniform Glorot init scaled by fan-in and fan-out.
    pub fn glorot(&mut self, id: ParamId, fan_in: usize, fan_out: usize, rng: &mut Rng) {
        let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
        self.fill(id, || rng.uniform(-limit, limit));
    }

    pub fn copy_into(&mut self, id: ParamId, values: &[f64]) {
        let s = &self.specs[id.0];
        debug_assert_eq!(s.len, values.len());
        self.data[s.offset..s.offset + s.len].copy_from_slice(values);
    }

    pub fn finish(self) -> ParamVec {
        ParamVec {
            specs: self.specs,
            data: self.data,
        }
    }
}

/// Dropout behavior for one forward pass.
///
/// `Sample` draws fresh inverted-dropout factors and records them on a tape;
/// `Replay` re-applies a recorded tape (used by the finite-difference
/// oracle, which must hold masks fixed); `Infer` is the identity.
pub struct DropoutPlan {
    inner: PlanInner,
}

enum PlanInner {
    Infer,
    Sample { rng: Rng, tape: Vec<Vec<f64>> },
    Replay { tape: Vec<Vec<f64>>, cursor: usize },
}

impl DropoutPlan {
    pub fn infer() -> Self {
        DropoutPlan {
            inner: PlanInner::Infer,
        }
    }

    pub fn train(rng: Rng) -> Self {
        DropoutPlan {
            inner: PlanInner::Sample {
                rng,
                tape: Vec::new(),
            },
        }
    }

    pub fn replay(tape: Vec<Vec<f64>>) -> Self {
        DropoutPlan {
            inner: PlanInner::Replay { tape, cursor: 0 },
        }
    }

    pub fn is_train(&self) -> bool {
        !matches!(self.inner, PlanInner::Infer)
    }

    /// Recorded factor vectors, in application order.
    pub fn into_tape(self) -> Vec<Vec<f64>> {
        match self.inner {
            PlanInner::Infer => Vec::new(),
            PlanInner::Sample { tape, .. } => tape,
            PlanInner::Replay { tape, .. } => tape,
        }
    }

    /// Factors for one dropout application over `n` units, or `None` for
    /// the identity (inference, or rate 0).
    pub(crate) fn next_factors(&mut self, n: usize, rate: f64) -> Option<Vec<f64>> {
        if rate <= 0.0 {
            return None;
        }
        match &mut self.inner {
            PlanInner::Infer => None,
            PlanInner::Sample { rng, tape } => {
                let scale = 1.0 / (1.0 - rate);
                let factors: Vec<f64> = (0..n)
                    .map(|_| if rng.bernoulli(rate) { 0.0 } else { scale })
                    .collect();
                tape.push(factors.clone());
                Some(factors)
            }
            PlanInner::Replay { tape, cursor } => {
                let factors = tape[*cursor].clone();
                *cursor += 1;
                debug_assert_eq!(factors.len(), n);
                Some(factors)
            }
        }
    }
}

pub(crate) fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Mean squared error over paired predictions and targets.
pub fn mse_loss(pred: &[f64], target: &[f64]) -> Result<f64, NnError> {
    if pred.is_empty() {
        return Err(NnError::EmptyInput);
    }
    if pred.len() != target.len() {
        return Err(NnError::ShapeMismatch {
            context: format!("{} predictions vs {} targets", pred.len(), target.len()),
        });
    }
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// ReLU hidden layers of decreasing width, dropout after each, and a single
/// linear output unit. The regression head shared by both model families.
#[derive(Debug, Clone)]
pub struct DenseStack {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    layers: Vec<(ParamId, ParamId)>,
    out: (ParamId, ParamId),
}

/// Per-pass activations needed by the backward sweep.
pub struct DenseCache {
    inputs: Vec<Vec<f64>>,
    pub(crate) preacts: Vec<Vec<f64>>,
    factors: Vec<Option<Vec<f64>>>,
    pub(crate) final_hidden: Vec<f64>,
    /// Smallest |pre-activation| among kept ReLU units; finite-difference
    /// checks are only valid when this stays well above the step size.
    pub(crate) kink_margin: f64,
}

impl DenseStack {
    pub fn build(
        b: &mut ParamBuilder,
        prefix: &str,
        input_dim: usize,
        hidden: &[usize],
        dropout: f64,
        rng: &mut Rng,
    ) -> Self {
        let mut layers = Vec::new();
        let mut fan_in = input_dim;
        for (i, &width) in hidden.iter().enumerate() {
            let w = b.alloc(&format!("{prefix}.dense{i}.w"), &[width, fan_in]);
            let bias = b.alloc(&format!("{prefix}.dense{i}.b"), &[width]);
            b.glorot(w, fan_in, width, rng);
            layers.push((w, bias));
            fan_in = width;
        }
        let out_w = b.alloc(&format!("{prefix}.out.w"), &[1, fan_in]);
        let out_b = b.alloc(&format!("{prefix}.out.b"), &[1]);
        b.glorot(out_w, fan_in, 1, rng);
        DenseStack {
            input_dim,
            hidden: hidden.to_vec(),
            dropout,
            layers,
            out: (out_w, out_b),
        }
    }

    pub fn forward(
        &self,
        params: &ParamVec,
        input: &[f64],
        plan: &mut DropoutPlan,
    ) -> (f64, DenseCache) {
        debug_assert_eq!(input.len(), self.input_dim);
        let mut cache = DenseCache {
            inputs: Vec::with_capacity(self.layers.len()),
            preacts: Vec::with_capacity(self.layers.len()),
            factors: Vec::with_capacity(self.layers.len()),
            final_hidden: Vec::new(),
            kink_margin: f64::INFINITY,
        };
        let mut h = input.to_vec();
        for &(w_id, b_id) in &self.layers {
            let w = params.get(w_id);
            let b = params.get(b_id);
            let width = b.len();
            let in_dim = h.len();
            let mut z = vec![0.0; width];
            for (j, zj) in z.iter_mut().enumerate() {
                let row = &w[j * in_dim..(j + 1) * in_dim];
                let mut acc = b[j];
                for (wv, hv) in row.iter().zip(&h) {
                    acc += wv * hv;
                }
                *zj = acc;
            }
            let mut a: Vec<f64> = z.iter().copied().map(relu).collect();
            let factors = plan.next_factors(width, self.dropout);
            if let Some(f) = &factors {
                for (av, fv) in a.iter_mut().zip(f) {
                    *av *= fv;
                }
            }
            for (j, zj) in z.iter().enumerate() {
                let kept = factors.as_ref().is_none_or(|f| f[j] != 0.0);
                if kept && zj.abs() < cache.kink_margin {
                    cache.kink_margin = zj.abs();
                }
            }
            cache.inputs.push(h);
            cache.preacts.push(z);
            cache.factors.push(factors);
            h = a;
        }
        let (ow_id, ob_id) = self.out;
        let ow = params.get(ow_id);
        let ob = params.get(ob_id);
        let mut out = ob[0];
        for (wv, hv) in ow.iter().zip(&h) {
            out += wv * hv;
        }
        cache.final_hidden = h;
        (out, cache)
    }

    /// Accumulate parameter gradients for upstream scalar gradient `g_out`;
    /// returns the gradient with respect to the stack input.
    pub fn backward(
        &self,
        params: &ParamVec,
        cache: &DenseCache,
        g_out: f64,
        grad: &mut [f64],
    ) -> Vec<f64> {
        let (ow_id, ob_id) = self.out;
        let ow = params.get(ow_id);
        {
            let r = params.range(ow_id);
            for (g, hv) in grad[r].iter_mut().zip(&cache.final_hidden) {
                *g += g_out * hv;
            }
            grad[params.range(ob_id)][0] += g_out;
        }
        let mut gh: Vec<f64> = ow.iter().map(|w| w * g_out).collect();
        for (i, &(w_id, b_id)) in self.layers.iter().enumerate().rev() {
            if let Some(f) = &cache.factors[i] {
                for (g, fv) in gh.iter_mut().zip(f) {
                    *g *= fv;
                }
            }
            let z = &cache.preacts[i];
            let gz: Vec<f64> = gh
                .iter()
                .zip(z)
                .map(|(g, zv)| if *zv > 0.0 { *g } else { 0.0 })
                .collect();
            let input = &cache.inputs[i];
            let in_dim = input.len();
            let w = params.get(w_id);
            {
                let wr = params.range(w_id);
                let gw = &mut grad[wr];
                for (j, gzj) in gz.iter().enumerate() {
                    if *gzj != 0.0 {
                        let row = &mut gw[j * in_dim..(j + 1) * in_dim];
                        for (gv, iv) in row.iter_mut().zip(input) {
                            *gv += gzj * iv;
                        }
                    }
                }
            }
            {
                let br = params.range(b_id);
                for (g, gzj) in grad[br].iter_mut().zip(&gz) {
                    *g += gzj;
                }
            }
            let mut gin = vec![0.0; in_dim];
            for (j, gzj) in gz.iter().enumerate() {
                if *gzj != 0.0 {
                    let row = &w[j * in_dim..(j + 1) * in_dim];
                    for (gv, wv) in gin.iter_mut().zip(row) {
                        *gv += gzj * wv;
                    }
                }
            }
            gh = gin;
        }
        gh
    }
}

/// A trainable scalar regressor over token sequences.
///
/// Both model families implement this; the trainer, Monte-Carlo predictor,
/// gradient checker, and checkpoint writer only see this surface.
pub trait Regressor {
    fn arch(&self) -> ModelArch;
    fn params(&self) -> &ParamVec;
    fn params_mut(&mut self) -> &mut ParamVec;
    /// Parameter index ranges excluded from optimizer updates (the padding
    /// embedding row, plus any frozen blocks).
    fn frozen_ranges(&self) -> Vec<Range<usize>>;
    /// Scalar prediction for one sequence under the given dropout plan.
    fn predict_one(&self, seq: &TokenSequence, plan: &mut DropoutPlan) -> f64;
    /// Accumulate MSE gradients over a batch; returns the batch MSE.
    fn batch_grad(
        &self,
        seqs: &[&TokenSequence],
        targets: &[f64],
        plan: &mut DropoutPlan,
        grad: &mut [f64],
    ) -> f64;

    /// Batch MSE without gradients, consuming the plan in the same order as
    /// [`Regressor::batch_grad`].
    fn batch_loss(&self, seqs: &[&TokenSequence], targets: &[f64], plan: &mut DropoutPlan) -> f64 {
        let preds: Vec<f64> = seqs.iter().map(|s| self.predict_one(s, plan)).collect();
        mse_loss(&preds, targets).unwrap_or(f64::INFINITY)
    }

    /// Smallest |ReLU pre-activation| among kept units over the batch.
    ///
    /// Central differences are invalid within the step size of a ReLU kink;
    /// gradient-check harnesses redraw instances whose margin is too small.
    fn kink_margin(&self, seqs: &[&TokenSequence], plan: &mut DropoutPlan) -> f64;
}

/// Character-n-gram regression model: trainable embedding table, masked mean
/// pooling, then the dense stack.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenModelConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub train_embeddings: bool,
}

impl TokenModelConfig {
    pub fn new(vocab_size: usize) -> Self {
        TokenModelConfig {
            vocab_size,
            embed_dim: 300,
            hidden: vec![128, 64, 32],
            dropout: 0.5,
            train_embeddings: true,
        }
    }
}

#[derive(Clone)]
pub struct TokenModel {
    pub cfg: TokenModelConfig,
    params: ParamVec,
    embedding: ParamId,
    stack: DenseStack,
}

impl TokenModel {
    /// Fresh model with seeded uniform embeddings.
    pub fn new(cfg: TokenModelConfig, rng: &mut Rng) -> Self {
        let matrix = EmbeddingMatrix::random(cfg.vocab_size, cfg.embed_dim, rng);
        Self::with_embeddings(cfg, &matrix, rng)
    }

    /// Fresh model with the embedding table initialized from `matrix`
    /// (typically loaded from a pre-trained vector file).
    pub fn with_embeddings(cfg: TokenModelConfig, matrix: &EmbeddingMatrix, rng: &mut Rng) -> Self {
        assert_eq!(matrix.vocab_size, cfg.vocab_size);
        assert_eq!(matrix.dim, cfg.embed_dim);
        let mut b = ParamVec::builder();
        let embedding = b.alloc("embedding", &[cfg.vocab_size, cfg.embed_dim]);
        b.copy_into(embedding, &matrix.weights);
        let stack = DenseStack::build(&mut b, "head", cfg.embed_dim, &cfg.hidden, cfg.dropout, rng);
        TokenModel {
            cfg,
            params: b.finish(),
            embedding,
            stack,
        }
    }

    pub fn embedding_id(&self) -> ParamId {
        self.embedding
    }

    fn pool(&self, seq: &TokenSequence) -> (Vec<f64>, usize) {
        let table = self.params.get(self.embedding);
        let d = self.cfg.embed_dim;
        let mut pooled = vec![0.0; d];
        let mut n_real = 0usize;
        for (&id, &keep) in seq.ids().iter().zip(seq.mask()) {
            if keep {
                let row = &table[id as usize * d..(id as usize + 1) * d];
                for (p, v) in pooled.iter_mut().zip(row) {
                    *p += v;
                }
                n_real += 1;
            }
        }
        if n_real > 0 {
            for p in &mut pooled {
                *p /= n_real as f64;
            }
        }
        (pooled, n_real)
    }
}

impl Regressor for TokenModel {
    fn arch(&self) -> ModelArch {
        ModelArch::Token(self.cfg.clone())
    }

    fn params(&self) -> &ParamVec {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamVec {
        &mut self.params
    }

    #[allow(clippy::single_range_in_vec_init)]
    fn frozen_ranges(&self) -> Vec<Range<usize>> {
        let spec = self.params.spec(self.embedding);
        if self.cfg.train_embeddings {
            // pad row only
            vec![spec.offset..spec.offset + self.cfg.embed_dim]
        } else {
            vec![spec.offset..spec.offset + spec.len]
        }
    }

    fn predict_one(&self, seq: &TokenSequence, plan: &mut DropoutPlan) -> f64 {
        let (pooled, _) = self.pool(seq);
        let (out, _) = self.stack.forward(&self.params, &pooled, plan);
        out
    }

    fn kink_margin(&self, seqs: &[&TokenSequence], plan: &mut DropoutPlan) -> f64 {
        let mut margin = f64::INFINITY;
        for seq in seqs {
            let (pooled, _) = self.pool(seq);
            let (_, cache) = self.stack.forward(&self.params, &pooled, plan);
            margin = margin.min(cache.kink_margin);
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
        debug_assert_eq!(grad.len(), self.params.len());
        let batch = seqs.len();
        let mut loss = 0.0;
        let d = self.cfg.embed_dim;
        let embed_range = self.params.range(self.embedding);
        for (seq, &y) in seqs.iter().zip(targets) {
            let (pooled, n_real) = self.pool(seq);
            let (pred, cache) = self.stack.forward(&self.params, &pooled, plan);
            let err = pred - y;
            loss += err * err;
            let g_out = 2.0 * err / batch as f64;
            let g_pool = self.stack.backward(&self.params, &cache, g_out, grad);
            if n_real > 0 {
                let scale = 1.0 / n_real as f64;
                let gtable = &mut grad[embed_range.clone()];
                for (&id, &keep) in seq.ids().iter().zip(seq.mask()) {
                    if keep {
                        let row = &mut gtable[id as usize * d..(id as usize + 1) * d];
                        for (gv, gp) in row.iter_mut().zip(&g_pool) {
                            *gv += gp * scale;
                        }
                    }
                }
            }
        }
        loss / batch as f64
    }
}

/// Adam with the usual defaults and bias correction.
#[derive(Debug, Clone)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n_params: usize) -> Self {
        AdamState {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn step(&mut self, cfg: &AdamConfig, params: &mut [f64], grads: &[f64]) {
        debug_assert_eq!(params.len(), self.m.len());
        debug_assert_eq!(params.len(), grads.len());
        self.t += 1;
        let t = self.t as f64;
        let bc1 = 1.0 - libm::pow(cfg.beta1, t);
        let bc2 = 1.0 - libm::pow(cfg.beta2, t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * g;
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= cfg.lr * m_hat / (libm::sqrt(v_hat) + cfg.eps);
        }
    }
}

/// Result of comparing analytic gradients against central finite
/// differences.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_param: String,
    pub n_checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_err < tolerance
    }
}

/// Unit-floored relative error: `|a - n| / max(1, |a|, |n|)`.
///
/// Relative for gradients above unit scale, absolute below it. The floor
/// keeps central-difference cancellation noise (around `eps * loss / h`) on
/// near-zero gradients from registering as disagreement while still
/// flagging any dropped term of visible magnitude.
fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0)
}

/// Compare analytic gradients for an MSE batch against central finite
/// differences with step `h`, holding any sampled dropout masks fixed.
pub fn grad_check<M: Regressor>(
    model: &mut M,
    seqs: &[&TokenSequence],
    targets: &[f64],
    h: f64,
    dropout_rng: Option<Rng>,
) -> GradCheckReport {
    let n = model.params().len();
    let mut grad = vec![0.0; n];

    // Sample masks once (if requested), then replay them for every
    // evaluation so the loss stays a fixed deterministic function.
    let tape = match dropout_rng {
        Some(rng) => {
            let mut plan = DropoutPlan::train(rng);
            let _ = model.batch_loss(seqs, targets, &mut plan);
            plan.into_tape()
        }
        None => Vec::new(),
    };
    let fresh_plan = |tape: &Vec<Vec<f64>>| {
        if tape.is_empty() {
            DropoutPlan::infer()
        } else {
            DropoutPlan::replay(tape.clone())
        }
    };

    let mut plan = fresh_plan(&tape);
    model.batch_grad(seqs, targets, &mut plan, &mut grad);

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_param: String::new(),
        n_checked: n,
    };
    for i in 0..n {
        let original = model.params().data()[i];
        model.params_mut().data_mut()[i] = original + h;
        let mut plan = fresh_plan(&tape);
        let up = model.batch_loss(seqs, targets, &mut plan);
        model.params_mut().data_mut()[i] = original - h;
        let mut plan = fresh_plan(&tape);
        let down = model.batch_loss(seqs, targets, &mut plan);
        model.params_mut().data_mut()[i] = original;
        let numeric = (up - down) / (2.0 * h);
        let err = rel_err(grad[i], numeric);
        if err > report.max_rel_err {
            report.max_rel_err = err;
            report.worst_param = model
                .params()
                .specs()
                .iter()
                .find(|s| (s.offset..s.offset + s.len).contains(&i))
                .map(|s| s.name.clone())
                .unwrap_or_default();
        }
    }
    report
}
