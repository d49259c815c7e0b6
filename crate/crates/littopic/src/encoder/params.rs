//! Named parameter tensors and seeded initialization.

use rand_chacha::ChaCha8Rng;

use super::ModelConfig;
use crate::error::{Error, Result};
use crate::tensor::{seeded_rng, Matrix, Real};

/// Per-layer weights. Linear maps use the `y = x·W + b` convention with `W`
/// shaped `(in, out)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams<T> {
    pub attn_query_w: Matrix<T>,
    pub attn_query_b: Matrix<T>,
    pub attn_key_w: Matrix<T>,
    pub attn_key_b: Matrix<T>,
    pub attn_value_w: Matrix<T>,
    pub attn_value_b: Matrix<T>,
    pub attn_output_w: Matrix<T>,
    pub attn_output_b: Matrix<T>,
    pub attn_ln_scale: Matrix<T>,
    pub attn_ln_shift: Matrix<T>,
    pub ffn_inter_w: Matrix<T>,
    pub ffn_inter_b: Matrix<T>,
    pub ffn_output_w: Matrix<T>,
    pub ffn_output_b: Matrix<T>,
    pub ffn_ln_scale: Matrix<T>,
    pub ffn_ln_shift: Matrix<T>,
}

/// The full weight set. Field order is the canonical tensor order used by
/// checkpoints and the optimizer.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters<T> {
    pub token_embedding: Matrix<T>,
    pub segment_embedding: Matrix<T>,
    pub position_embedding: Matrix<T>,
    pub emb_ln_scale: Matrix<T>,
    pub emb_ln_shift: Matrix<T>,
    pub layers: Vec<LayerParams<T>>,
    pub pooler_w: Matrix<T>,
    pub pooler_b: Matrix<T>,
    pub classifier_w: Matrix<T>,
    pub classifier_b: Matrix<T>,
}

/// Gradients are shape-parallel to [`Parameters`] and share its tensor names.
pub type Gradients<T> = Parameters<T>;

/// Suffix names of the 16 per-layer tensors, in canonical order.
const LAYER_TENSORS: [&str; 16] = [
    "attention.query.weight",
    "attention.query.bias",
    "attention.key.weight",
    "attention.key.bias",
    "attention.value.weight",
    "attention.value.bias",
    "attention.output.weight",
    "attention.output.bias",
    "attention.layernorm.scale",
    "attention.layernorm.shift",
    "ffn.intermediate.weight",
    "ffn.intermediate.bias",
    "ffn.output.weight",
    "ffn.output.bias",
    "ffn.layernorm.scale",
    "ffn.layernorm.shift",
];

/// The documented tensor name/shape schema for a config, in canonical order.
pub fn tensor_schema(config: &ModelConfig) -> Vec<(String, (usize, usize))> {
    let h = config.hidden_size;
    let f = config.intermediate_size;
    let mut schema = vec![
        ("embeddings.token".to_string(), (config.vocab_size, h)),
        ("embeddings.segment".to_string(), (config.type_vocab, h)),
        ("embeddings.position".to_string(), (config.max_position, h)),
        ("embeddings.layernorm.scale".to_string(), (1, h)),
        ("embeddings.layernorm.shift".to_string(), (1, h)),
    ];
    for i in 0..config.num_layers {
        let shapes = [
            (h, h),
            (1, h),
            (h, h),
            (1, h),
            (h, h),
            (1, h),
            (h, h),
            (1, h),
            (1, h),
            (1, h),
            (h, f),
            (1, f),
            (f, h),
            (1, h),
            (1, h),
            (1, h),
        ];
        for (name, shape) in LAYER_TENSORS.iter().zip(shapes) {
            schema.push((format!("layer{i}.{name}"), shape));
        }
    }
    schema.push(("pooler.weight".to_string(), (h, h)));
    schema.push(("pooler.bias".to_string(), (1, h)));
    schema.push(("classifier.weight".to_string(), (h, 1)));
    schema.push(("classifier.bias".to_string(), (1, 1)));
    schema
}

impl<T: Real> LayerParams<T> {
    fn zeros(config: &ModelConfig) -> LayerParams<T> {
        let h = config.hidden_size;
        let f = config.intermediate_size;
        LayerParams {
            attn_query_w: Matrix::zeros(h, h),
            attn_query_b: Matrix::zeros(1, h),
            attn_key_w: Matrix::zeros(h, h),
            attn_key_b: Matrix::zeros(1, h),
            attn_value_w: Matrix::zeros(h, h),
            attn_value_b: Matrix::zeros(1, h),
            attn_output_w: Matrix::zeros(h, h),
            attn_output_b: Matrix::zeros(1, h),
            attn_ln_scale: Matrix::zeros(1, h),
            attn_ln_shift: Matrix::zeros(1, h),
            ffn_inter_w: Matrix::zeros(h, f),
            ffn_inter_b: Matrix::zeros(1, f),
            ffn_output_w: Matrix::zeros(f, h),
            ffn_output_b: Matrix::zeros(1, h),
            ffn_ln_scale: Matrix::zeros(1, h),
            ffn_ln_shift: Matrix::zeros(1, h),
        }
    }

    fn field(&self, suffix: &str) -> Option<&Matrix<T>> {
        let idx = LAYER_TENSORS.iter().position(|&n| n == suffix)?;
        Some(self.fields()[idx])
    }

    fn field_mut(&mut self, suffix: &str) -> Option<&mut Matrix<T>> {
        let idx = LAYER_TENSORS.iter().position(|&n| n == suffix)?;
        Some(self.fields_mut().into_iter().nth(idx).unwrap())
    }

    fn fields(&self) -> [&Matrix<T>; 16] {
        [
            &self.attn_query_w,
            &self.attn_query_b,
            &self.attn_key_w,
            &self.attn_key_b,
            &self.attn_value_w,
            &self.attn_value_b,
            &self.attn_output_w,
            &self.attn_output_b,
            &self.attn_ln_scale,
            &self.attn_ln_shift,
            &self.ffn_inter_w,
            &self.ffn_inter_b,
            &self.ffn_output_w,
            &self.ffn_output_b,
            &self.ffn_ln_scale,
            &self.ffn_ln_shift,
        ]
    }

    fn fields_mut(&mut self) -> [&mut Matrix<T>; 16] {
        [
            &mut self.attn_query_w,
            &mut self.attn_query_b,
            &mut self.attn_key_w,
            &mut self.attn_key_b,
            &mut self.attn_value_w,
            &mut self.attn_value_b,
            &mut self.attn_output_w,
            &mut self.attn_output_b,
            &mut self.attn_ln_scale,
            &mut self.attn_ln_shift,
            &mut self.ffn_inter_w,
            &mut self.ffn_inter_b,
            &mut self.ffn_output_w,
            &mut self.ffn_output_b,
            &mut self.ffn_ln_scale,
            &mut self.ffn_ln_shift,
        ]
    }
}

impl<T: Real> Parameters<T> {
    /// All tensors zero; used for gradients and optimizer moments.
    pub fn zeros(config: &ModelConfig) -> Parameters<T> {
        let h = config.hidden_size;
        Parameters {
            token_embedding: Matrix::zeros(config.vocab_size, h),
            segment_embedding: Matrix::zeros(config.type_vocab, h),
            position_embedding: Matrix::zeros(config.max_position, h),
            emb_ln_scale: Matrix::zeros(1, h),
            emb_ln_shift: Matrix::zeros(1, h),
            layers: (0..config.num_layers)
                .map(|_| LayerParams::zeros(config))
                .collect(),
            pooler_w: Matrix::zeros(h, h),
            pooler_b: Matrix::zeros(1, h),
            classifier_w: Matrix::zeros(h, 1),
            classifier_b: Matrix::zeros(1, 1),
        }
    }

    pub fn zeros_like(&self) -> Parameters<T> {
        let mut out = self.clone();
        out.for_each_mut(|_, t| *t = t.zeros_like());
        out
    }

    /// Visit every tensor in canonical order.
    pub fn for_each<'a>(&'a self, mut f: impl FnMut(&str, &'a Matrix<T>)) {
        f("embeddings.token", &self.token_embedding);
        f("embeddings.segment", &self.segment_embedding);
        f("embeddings.position", &self.position_embedding);
        f("embeddings.layernorm.scale", &self.emb_ln_scale);
        f("embeddings.layernorm.shift", &self.emb_ln_shift);
        for (i, layer) in self.layers.iter().enumerate() {
            for (suffix, tensor) in LAYER_TENSORS.iter().zip(layer.fields()) {
                f(&format!("layer{i}.{suffix}"), tensor);
            }
        }
        f("pooler.weight", &self.pooler_w);
        f("pooler.bias", &self.pooler_b);
        f("classifier.weight", &self.classifier_w);
        f("classifier.bias", &self.classifier_b);
    }

    /// Visit every tensor mutably in canonical order.
    pub fn for_each_mut(&mut self, mut f: impl FnMut(&str, &mut Matrix<T>)) {
        f("embeddings.token", &mut self.token_embedding);
        f("embeddings.segment", &mut self.segment_embedding);
        f("embeddings.position", &mut self.position_embedding);
        f("embeddings.layernorm.scale", &mut self.emb_ln_scale);
        f("embeddings.layernorm.shift", &mut self.emb_ln_shift);
        for (i, layer) in self.layers.iter_mut().enumerate() {
            for (suffix, tensor) in LAYER_TENSORS.iter().zip(layer.fields_mut()) {
                f(&format!("layer{i}.{suffix}"), tensor);
            }
        }
        f("pooler.weight", &mut self.pooler_w);
        f("pooler.bias", &mut self.pooler_b);
        f("classifier.weight", &mut self.classifier_w);
        f("classifier.bias", &mut self.classifier_b);
    }

    /// Look a tensor up by its schema name.
    pub fn get(&self, name: &str) -> Option<&Matrix<T>> {
        match name {
            "embeddings.token" => Some(&self.token_embedding),
            "embeddings.segment" => Some(&self.segment_embedding),
            "embeddings.position" => Some(&self.position_embedding),
            "embeddings.layernorm.scale" => Some(&self.emb_ln_scale),
            "embeddings.layernorm.shift" => Some(&self.emb_ln_shift),
            "pooler.weight" => Some(&self.pooler_w),
            "pooler.bias" => Some(&self.pooler_b),
            "classifier.weight" => Some(&self.classifier_w),
            "classifier.bias" => Some(&self.classifier_b),
            other => {
                let rest = other.strip_prefix("layer")?;
                let (idx, suffix) = rest.split_once('.')?;
                let idx: usize = idx.parse().ok()?;
                self.layers.get(idx)?.field(suffix)
            }
        }
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Matrix<T>> {
        match name {
            "embeddings.token" => Some(&mut self.token_embedding),
            "embeddings.segment" => Some(&mut self.segment_embedding),
            "embeddings.position" => Some(&mut self.position_embedding),
            "embeddings.layernorm.scale" => Some(&mut self.emb_ln_scale),
            "embeddings.layernorm.shift" => Some(&mut self.emb_ln_shift),
            "pooler.weight" => Some(&mut self.pooler_w),
            "pooler.bias" => Some(&mut self.pooler_b),
            "classifier.weight" => Some(&mut self.classifier_w),
            "classifier.bias" => Some(&mut self.classifier_b),
            other => {
                let rest = other.strip_prefix("layer")?;
                let (idx, suffix) = rest.split_once('.')?;
                let idx: usize = idx.parse().ok()?;
                self.layers.get_mut(idx)?.field_mut(suffix)
            }
        }
    }

    /// Total number of scalar parameters.
    pub fn num_values(&self) -> usize {
        let mut n = 0;
        self.for_each(|_, t| n += t.len());
        n
    }

    /// Cast every tensor through `f64` into another scalar type.
    pub fn cast<U: Real>(&self) -> Parameters<U> {
        let mut names = Vec::new();
        self.for_each(|name, t| names.push((name.to_string(), t.cast::<U>())));
        // Rebuild through the mutable visitor to keep a single source of
        // truth for field order.
        let config_free = ParametersBuilder { tensors: names };
        config_free.into_parameters(self)
    }
}

struct ParametersBuilder<U> {
    tensors: Vec<(String, Matrix<U>)>,
}

impl<U: Real> ParametersBuilder<U> {
    fn into_parameters<T: Real>(self, template: &Parameters<T>) -> Parameters<U> {
        let mut out = Parameters {
            token_embedding: Matrix::zeros(1, 1),
            segment_embedding: Matrix::zeros(1, 1),
            position_embedding: Matrix::zeros(1, 1),
            emb_ln_scale: Matrix::zeros(1, 1),
            emb_ln_shift: Matrix::zeros(1, 1),
            layers: (0..template.layers.len())
                .map(|_| LayerParams {
                    attn_query_w: Matrix::zeros(1, 1),
                    attn_query_b: Matrix::zeros(1, 1),
                    attn_key_w: Matrix::zeros(1, 1),
                    attn_key_b: Matrix::zeros(1, 1),
                    attn_value_w: Matrix::zeros(1, 1),
                    attn_value_b: Matrix::zeros(1, 1),
                    attn_output_w: Matrix::zeros(1, 1),
                    attn_output_b: Matrix::zeros(1, 1),
                    attn_ln_scale: Matrix::zeros(1, 1),
                    attn_ln_shift: Matrix::zeros(1, 1),
                    ffn_inter_w: Matrix::zeros(1, 1),
                    ffn_inter_b: Matrix::zeros(1, 1),
                    ffn_output_w: Matrix::zeros(1, 1),
                    ffn_output_b: Matrix::zeros(1, 1),
                    ffn_ln_scale: Matrix::zeros(1, 1),
                    ffn_ln_shift: Matrix::zeros(1, 1),
                })
                .collect(),
            pooler_w: Matrix::zeros(1, 1),
            pooler_b: Matrix::zeros(1, 1),
            classifier_w: Matrix::zeros(1, 1),
            classifier_b: Matrix::zeros(1, 1),
        };
        let mut iter = self.tensors.into_iter();
        out.for_each_mut(|name, slot| {
            let (src_name, tensor) = iter.next().expect("tensor count mismatch");
            debug_assert_eq!(name, src_name);
            *slot = tensor;
        });
        out
    }
}

/// Initialize parameters for a config: weights from `normal(0, 0.02²)`,
/// biases and layernorm shifts zero, layernorm scales one. Deterministic
/// given the seed (tensors are filled in canonical order).
pub fn init_params<T: Real>(config: &ModelConfig, seed: u64) -> Result<Parameters<T>> {
    config.validate()?;
    let mut rng = seeded_rng(seed);
    let mut params = Parameters::zeros(config);
    params.for_each_mut(|name, tensor| {
        if name.ends_with(".bias") || name.ends_with("layernorm.shift") {
            // already zero
        } else if name.ends_with("layernorm.scale") {
            *tensor = Matrix::filled(tensor.rows(), tensor.cols(), T::one());
        } else {
            *tensor = init_weight(tensor, &mut rng);
        }
    });
    Ok(params)
}

fn init_weight<T: Real>(tensor: &Matrix<T>, rng: &mut ChaCha8Rng) -> Matrix<T> {
    Matrix::seeded_normal(tensor.rows(), tensor.cols(), 0.02, rng)
}

/// Error if any gradient entry is non-finite, naming the offending tensor.
pub fn check_finite<T: Real>(grads: &Gradients<T>) -> Result<()> {
    let mut bad: Option<(String, usize)> = None;
    grads.for_each(|name, tensor| {
        if bad.is_none() {
            if let Some(idx) = tensor.iter().position(|v| !v.is_finite()) {
                bad = Some((name.to_string(), idx));
            }
        }
    });
    match bad {
        Some((tensor, index)) => Err(Error::NonFiniteGradient { tensor, index }),
        None => Ok(()),
    }
}
