//! Forward pass with cached intermediates for the backward pass.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::Parameters;
use super::ModelConfig;
use crate::error::{Error, Result};
use crate::tensor::{dot, seeded_rng, Matrix, Real};
use crate::tokenizer::Batch;

/// Deterministic dropout for one training step. Masks are drawn in a fixed
/// order from a generator seeded with `seed`, so the same step re-runs bit
/// for bit. Evaluation passes `None` and the forward is a pure function.
#[derive(Clone, Copy, Debug)]
pub struct DropoutPlan {
    pub rate: f64,
    pub seed: u64,
}

struct DropoutState {
    rng: ChaCha8Rng,
    rate: f64,
}

impl DropoutState {
    fn new(plan: &DropoutPlan) -> DropoutState {
        DropoutState {
            rng: seeded_rng(plan.seed),
            rate: plan.rate,
        }
    }

    /// Inverted-dropout mask: entries are `0` or `1/(1-rate)`.
    fn mask<T: Real>(&mut self, rows: usize, cols: usize) -> Matrix<T> {
        let keep_scale = T::from_f64(1.0 / (1.0 - self.rate));
        let mut m = Matrix::zeros(rows, cols);
        for v in m.as_mut_slice() {
            let u: f64 = self.rng.random();
            if u >= self.rate {
                *v = keep_scale;
            }
        }
        m
    }
}

fn apply_mask<T: Real>(x: &mut Matrix<T>, mask: &Matrix<T>) {
    for (v, &m) in x.as_mut_slice().iter_mut().zip(mask.iter()) {
        *v *= m;
    }
}

/// Per-row normalization statistics kept for the backward pass.
#[derive(Clone, Debug)]
pub struct LayerNormCache<T> {
    /// `(x - μ) · rstd`, before scale and shift.
    pub normed: Matrix<T>,
    /// `1 / sqrt(var + ε)` per row.
    pub rstd: Vec<T>,
}

/// `y = γ ⊙ x̂ + β` per row, with `x̂ = (x − μ)/√(var + ε)`.
pub(super) fn layernorm_forward<T: Real>(
    x: &Matrix<T>,
    scale: &Matrix<T>,
    shift: &Matrix<T>,
    epsilon: f64,
) -> (Matrix<T>, LayerNormCache<T>) {
    let (rows, cols) = x.shape();
    let n = T::from_f64(cols as f64);
    let eps = T::from_f64(epsilon);
    let mut normed = Matrix::zeros(rows, cols);
    let mut out = Matrix::zeros(rows, cols);
    let mut rstds = Vec::with_capacity(rows);
    for r in 0..rows {
        let row = x.row(r);
        let mean = row.iter().copied().sum::<T>() / n;
        let var = row
            .iter()
            .map(|&v| {
                let d = v - mean;
                d * d
            })
            .sum::<T>()
            / n;
        let rstd = T::one() / (var + eps).sqrt();
        rstds.push(rstd);
        let normed_row = normed.row_mut(r);
        for (j, &v) in row.iter().enumerate() {
            normed_row[j] = (v - mean) * rstd;
        }
        let out_row = out.row_mut(r);
        for (j, (&nv, (&g, &b))) in normed_row
            .iter()
            .zip(scale.row(0).iter().zip(shift.row(0)))
            .enumerate()
        {
            out_row[j] = g * nv + b;
        }
    }
    (out, LayerNormCache { normed, rstd: rstds })
}

/// GELU, tanh approximation: `0.5·u·(1 + tanh(√(2/π)·(u + 0.044715·u³)))`.
pub(super) fn gelu<T: Real>(u: T) -> T {
    let c = T::from_f64(0.7978845608028654); // √(2/π)
    let k = T::from_f64(0.044715);
    let half = T::from_f64(0.5);
    let t = (c * (u + k * u * u * u)).tanh();
    half * u * (T::one() + t)
}

pub(super) fn gelu_grad<T: Real>(u: T) -> T {
    let c = T::from_f64(0.7978845608028654);
    let k = T::from_f64(0.044715);
    let half = T::from_f64(0.5);
    let three = T::from_f64(3.0);
    let inner = c * (u + k * u * u * u);
    let t = inner.tanh();
    let sech2 = T::one() - t * t;
    half * (T::one() + t) + half * u * sech2 * c * (T::one() + three * k * u * u)
}

pub fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// Numerically stable binary cross-entropy on a single logit:
/// `loss = softplus(logit) − label·logit`, `dLoss/dLogit = σ(logit) − label`.
pub fn bce_loss<T: Real>(logit: T, label: u8) -> (T, T) {
    let softplus = logit.max(T::zero()) + (T::one() + (-logit.abs()).exp()).ln();
    let y = if label != 0 { T::one() } else { T::zero() };
    (softplus - y * logit, sigmoid(logit) - y)
}

/// Everything one encoder layer must remember for its backward pass.
#[derive(Clone, Debug)]
pub struct LayerCache<T> {
    /// Layer input `x`, shape `(B·S, H)`.
    pub input: Matrix<T>,
    pub q: Matrix<T>,
    pub k: Matrix<T>,
    pub v: Matrix<T>,
    /// Attention probabilities after softmax, before dropout. Rows are
    /// `(b·A + a)·S + s`; masked key columns are exactly zero.
    pub probs: Matrix<T>,
    pub probs_mask: Option<Matrix<T>>,
    /// Head-concatenated context, `(B·S, H)`.
    pub context: Matrix<T>,
    pub attn_out_mask: Option<Matrix<T>>,
    pub attn_ln: LayerNormCache<T>,
    /// Output of the attention sublayer norm; input to the FFN.
    pub x1: Matrix<T>,
    /// FFN pre-activation `u = x1·W1 + b1`, `(B·S, F)`.
    pub ffn_pre: Matrix<T>,
    /// `gelu(u)`.
    pub ffn_act: Matrix<T>,
    pub ffn_out_mask: Option<Matrix<T>>,
    pub ffn_ln: LayerNormCache<T>,
}

#[derive(Clone, Debug)]
pub struct TrunkCache<T> {
    pub batch: Batch,
    pub emb_ln: LayerNormCache<T>,
    pub emb_mask: Option<Matrix<T>>,
    pub layers: Vec<LayerCache<T>>,
    /// Final-layer hidden states, `(B·S, H)`.
    pub hidden: Matrix<T>,
}

#[derive(Clone, Debug)]
pub struct ClassifierCache<T> {
    /// `[CLS]` rows of the final hidden states, `(B, H)`.
    pub cls_hidden: Matrix<T>,
    /// `tanh(cls·Wp + bp)`, before dropout.
    pub pooled: Matrix<T>,
    pub pooled_mask: Option<Matrix<T>>,
    /// Pooled vector actually fed to the classifier.
    pub pooled_used: Matrix<T>,
}

#[derive(Clone, Debug)]
pub struct ForwardCache<T> {
    pub trunk: TrunkCache<T>,
    pub head: ClassifierCache<T>,
}

fn validate_batch(config: &ModelConfig, batch: &Batch) -> Result<()> {
    if batch.size == 0 {
        return Err(Error::EmptyBatch);
    }
    if batch.seq_len > config.max_position {
        return Err(Error::SequenceTooLong {
            len: batch.seq_len,
            max_position: config.max_position,
        });
    }
    if let Some(&id) = batch
        .token_ids
        .iter()
        .find(|&&id| id as usize >= config.vocab_size)
    {
        return Err(Error::TokenIdOutOfRange {
            id,
            vocab_size: config.vocab_size,
        });
    }
    Ok(())
}

/// Run embeddings and all encoder layers, returning the cached
/// intermediates (including the final hidden states).
pub fn forward_trunk<T: Real>(
    params: &Parameters<T>,
    config: &ModelConfig,
    batch: &Batch,
    dropout: Option<&DropoutPlan>,
) -> Result<TrunkCache<T>> {
    config.validate()?;
    validate_batch(config, batch)?;
    let mut drop_state = dropout.map(DropoutState::new);
    let (b, s, h) = (batch.size, batch.seq_len, config.hidden_size);
    let rows = b * s;

    // Embedding sum: token + segment + position.
    let mut summed = Matrix::zeros(rows, h);
    for r in 0..rows {
        let pos = r % s;
        let token = batch.token_ids[r] as usize;
        let segment = batch.segment_ids[r] as usize;
        let row = summed.row_mut(r);
        for (j, out) in row.iter_mut().enumerate() {
            *out = params.token_embedding.get(token, j)
                + params.segment_embedding.get(segment, j)
                + params.position_embedding.get(pos, j);
        }
    }
    let (mut x, emb_ln) = layernorm_forward(
        &summed,
        &params.emb_ln_scale,
        &params.emb_ln_shift,
        config.layernorm_epsilon,
    );
    let emb_mask = drop_state.as_mut().map(|d| d.mask::<T>(rows, h));
    if let Some(mask) = &emb_mask {
        apply_mask(&mut x, mask);
    }

    let heads = config.num_heads;
    let dh = config.head_dim();
    let scale = T::from_f64(1.0 / (dh as f64).sqrt());

    let mut layer_caches = Vec::with_capacity(config.num_layers);
    for layer in &params.layers {
        let input = x.clone();

        let mut q = input.matmul(&layer.attn_query_w);
        q.add_row_broadcast(&layer.attn_query_b);
        let mut k = input.matmul(&layer.attn_key_w);
        k.add_row_broadcast(&layer.attn_key_b);
        let mut v = input.matmul(&layer.attn_value_w);
        v.add_row_broadcast(&layer.attn_value_b);

        // Attention probabilities per (batch row, head, query position).
        let mut probs = Matrix::zeros(b * heads * s, s);
        for bi in 0..b {
            let mask_row = batch.row_mask(bi);
            for a in 0..heads {
                let col0 = a * dh;
                for s1 in 0..s {
                    let q_row = &q.row(bi * s + s1)[col0..col0 + dh];
                    let prow = probs.row_mut((bi * heads + a) * s + s1);
                    // Scaled dot products against unmasked keys only.
                    let mut max = T::neg_infinity();
                    for s2 in 0..s {
                        if mask_row[s2] == 1 {
                            let k_row = &k.row(bi * s + s2)[col0..col0 + dh];
                            let score = dot(q_row, k_row) * scale;
                            prow[s2] = score;
                            if score > max {
                                max = score;
                            }
                        }
                    }
                    let mut sum = T::zero();
                    for s2 in 0..s {
                        if mask_row[s2] == 1 {
                            let e = (prow[s2] - max).exp();
                            prow[s2] = e;
                            sum += e;
                        } else {
                            prow[s2] = T::zero();
                        }
                    }
                    if sum > T::zero() {
                        for p in prow.iter_mut() {
                            *p /= sum;
                        }
                    }
                }
            }
        }

        let probs_mask = drop_state.as_mut().map(|d| d.mask::<T>(b * heads * s, s));
        let mut probs_used = probs.clone();
        if let Some(mask) = &probs_mask {
            apply_mask(&mut probs_used, mask);
        }

        // context[s1, head block] = Σ_s2 probs[s1, s2] · v[s2, head block]
        let mut context = Matrix::zeros(rows, h);
        for bi in 0..b {
            for a in 0..heads {
                let col0 = a * dh;
                for s1 in 0..s {
                    let prow = probs_used.row((bi * heads + a) * s + s1);
                    for s2 in 0..s {
                        let p = prow[s2];
                        if p != T::zero() {
                            let v_row = &v.row(bi * s + s2)[col0..col0 + dh];
                            let c_row = &mut context.row_mut(bi * s + s1)[col0..col0 + dh];
                            for (c, &vv) in c_row.iter_mut().zip(v_row) {
                                *c += p * vv;
                            }
                        }
                    }
                }
            }
        }

        let mut attn_out = context.matmul(&layer.attn_output_w);
        attn_out.add_row_broadcast(&layer.attn_output_b);
        let attn_out_mask = drop_state.as_mut().map(|d| d.mask::<T>(rows, h));
        if let Some(mask) = &attn_out_mask {
            apply_mask(&mut attn_out, mask);
        }

        // Residual + post-layernorm.
        attn_out.add_scaled(&input, T::one());
        let (x1, attn_ln) = layernorm_forward(
            &attn_out,
            &layer.attn_ln_scale,
            &layer.attn_ln_shift,
            config.layernorm_epsilon,
        );

        let mut ffn_pre = x1.matmul(&layer.ffn_inter_w);
        ffn_pre.add_row_broadcast(&layer.ffn_inter_b);
        let mut ffn_act = ffn_pre.clone();
        for u in ffn_act.as_mut_slice() {
            *u = gelu(*u);
        }
        let mut ffn_out = ffn_act.matmul(&layer.ffn_output_w);
        ffn_out.add_row_broadcast(&layer.ffn_output_b);
        let ffn_out_mask = drop_state.as_mut().map(|d| d.mask::<T>(rows, h));
        if let Some(mask) = &ffn_out_mask {
            apply_mask(&mut ffn_out, mask);
        }

        ffn_out.add_scaled(&x1, T::one());
        let (x2, ffn_ln) = layernorm_forward(
            &ffn_out,
            &layer.ffn_ln_scale,
            &layer.ffn_ln_shift,
            config.layernorm_epsilon,
        );

        layer_caches.push(LayerCache {
            input,
            q,
            k,
            v,
            probs,
            probs_mask,
            context,
            attn_out_mask,
            attn_ln,
            x1,
            ffn_pre,
            ffn_act,
            ffn_out_mask,
            ffn_ln,
        });
        x = x2;
    }

    Ok(TrunkCache {
        batch: batch.clone(),
        emb_ln,
        emb_mask,
        layers: layer_caches,
        hidden: x,
    })
}

/// Full classification forward: one logit per batch row, from the pooled
/// final-layer `[CLS]` state.
pub fn forward<T: Real>(
    params: &Parameters<T>,
    config: &ModelConfig,
    batch: &Batch,
    dropout: Option<&DropoutPlan>,
) -> Result<(Vec<T>, ForwardCache<T>)> {
    let trunk = forward_trunk(params, config, batch, dropout)?;
    // The head draws its dropout mask from a separate stream so trunk and
    // head stay independent of each other's mask shapes.
    let mut head_drop = dropout
        .map(|p| DropoutPlan {
            rate: p.rate,
            seed: p.seed ^ 0x506f_6f6c, // "Pool"
        })
        .map(|p| DropoutState::new(&p));

    let (b, s, h) = (batch.size, batch.seq_len, config.hidden_size);
    let mut cls_hidden = Matrix::zeros(b, h);
    for bi in 0..b {
        cls_hidden
            .row_mut(bi)
            .copy_from_slice(trunk.hidden.row(bi * s));
    }
    let mut pooled = cls_hidden.matmul(&params.pooler_w);
    pooled.add_row_broadcast(&params.pooler_b);
    for v in pooled.as_mut_slice() {
        *v = v.tanh();
    }
    let pooled_mask = head_drop.as_mut().map(|d| d.mask::<T>(b, h));
    let mut pooled_used = pooled.clone();
    if let Some(mask) = &pooled_mask {
        apply_mask(&mut pooled_used, mask);
    }

    let mut logits = Vec::with_capacity(b);
    let w_col: Vec<T> = (0..h).map(|j| params.classifier_w.get(j, 0)).collect();
    let bias = params.classifier_b.get(0, 0);
    for bi in 0..b {
        logits.push(dot(pooled_used.row(bi), &w_col) + bias);
    }

    Ok((
        logits,
        ForwardCache {
            trunk,
            head: ClassifierCache {
                cls_hidden,
                pooled,
                pooled_mask,
                pooled_used,
            },
        },
    ))
}

/// Masked-token cross-entropy through the weight-tied output projection
/// (`logits = h · Eᵀ`, no bias).
///
/// `targets` pairs a row of `hidden` (`b·S + position`) with the original
/// token id to reconstruct. Returns the mean loss over targets, the gradient
/// with respect to `hidden`, and the gradient contribution to the token
/// embedding table from the output projection.
pub fn mlm_loss<T: Real>(
    params: &Parameters<T>,
    hidden: &Matrix<T>,
    targets: &[(usize, u32)],
) -> (T, Matrix<T>, Matrix<T>) {
    let mut d_hidden = hidden.zeros_like();
    let mut d_token_embedding = params.token_embedding.zeros_like();
    if targets.is_empty() {
        return (T::zero(), d_hidden, d_token_embedding);
    }
    let vocab_size = params.token_embedding.rows();
    let inv_n = T::from_f64(1.0 / targets.len() as f64);
    let mut total = T::zero();
    let mut logits = vec![T::zero(); vocab_size];
    for &(row, target_id) in targets {
        let h_row = hidden.row(row);
        let mut max = T::neg_infinity();
        for (v, logit) in logits.iter_mut().enumerate() {
            *logit = dot(params.token_embedding.row(v), h_row);
            if *logit > max {
                max = *logit;
            }
        }
        let mut sum = T::zero();
        for logit in &logits {
            sum += (*logit - max).exp();
        }
        let log_sum = max + sum.ln();
        total += log_sum - logits[target_id as usize];

        // dলoss/dlogit = softmax − onehot, scaled by 1/N.
        for (v, &logit) in logits.iter().enumerate() {
            let mut d = (logit - log_sum).exp();
            if v == target_id as usize {
                d -= T::one();
            }
            let d = d * inv_n;
            if d != T::zero() {
                let e_row = params.token_embedding.row(v);
                let dh_row = d_hidden.row_mut(row);
                for (dh, &e) in dh_row.iter_mut().zip(e_row) {
                    *dh += d * e;
                }
                let de_row = d_token_embedding.row_mut(v);
                for (de, &hv) in de_row.iter_mut().zip(h_row) {
                    *de += d * hv;
                }
            }
        }
    }
    (total * inv_n, d_hidden, d_token_embedding)
}
