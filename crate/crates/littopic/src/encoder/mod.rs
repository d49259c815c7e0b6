//! Compact BERT-style transformer encoder.
//!
//! Embeddings (token + segment + learned absolute position), post-layernorm
//! residual blocks of multi-head scaled-dot-product self-attention and a GELU
//! feed-forward network, a tanh pooler over the final `[CLS]` state, and a
//! single-logit classifier head. The backward pass is fully analytic; the
//! whole stack is generic over the scalar type so the production `f32` path
//! and the `f64` finite-difference oracle share one implementation.

mod backward;
mod checkpoint;
mod forward;
mod params;

pub use backward::{backward, backward_trunk};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_MAGIC};
pub use forward::{
    bce_loss, forward, forward_trunk, mlm_loss, ClassifierCache, DropoutPlan, ForwardCache,
    LayerCache, LayerNormCache, TrunkCache,
};
pub use params::{init_params, tensor_schema, Gradients, LayerParams, Parameters};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Architecture hyperparameters. Every tensor shape in [`Parameters`] is a
/// function of this struct.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub num_layers: usize,
    pub hidden_size: usize,
    pub num_heads: usize,
    pub intermediate_size: usize,
    pub vocab_size: usize,
    pub max_position: usize,
    #[serde(default = "default_type_vocab")]
    pub type_vocab: usize,
    #[serde(default = "default_dropout")]
    pub dropout_rate: f64,
    #[serde(default = "default_layernorm_epsilon")]
    pub layernorm_epsilon: f64,
}

fn default_type_vocab() -> usize {
    2
}

fn default_dropout() -> f64 {
    0.1
}

fn default_layernorm_epsilon() -> f64 {
    1e-12
}

impl ModelConfig {
    /// Two-layer, 64-wide preset for tests and bundled fixtures.
    pub fn toy(vocab_size: usize) -> ModelConfig {
        ModelConfig {
            num_layers: 2,
            hidden_size: 64,
            num_heads: 4,
            intermediate_size: 256,
            vocab_size,
            max_position: 128,
            type_vocab: 2,
            dropout_rate: 0.1,
            layernorm_epsilon: 1e-12,
        }
    }

    /// Eight-layer preset shaped like a compact biomedical encoder. The
    /// hidden width is a stand-in, not a claim about any released model.
    pub fn bioformer8l_like(vocab_size: usize) -> ModelConfig {
        ModelConfig {
            num_layers: 8,
            hidden_size: 512,
            num_heads: 8,
            intermediate_size: 2048,
            vocab_size,
            max_position: 512,
            type_vocab: 2,
            dropout_rate: 0.1,
            layernorm_epsilon: 1e-12,
        }
    }

    pub fn preset(name: &str, vocab_size: usize) -> Result<ModelConfig> {
        match name {
            "toy" => Ok(ModelConfig::toy(vocab_size)),
            "bioformer8l-like" => Ok(ModelConfig::bioformer8l_like(vocab_size)),
            other => Err(Error::InvalidConfig(format!(
                "unknown model preset `{other}` (expected toy or bioformer8l-like)"
            ))),
        }
    }

    pub fn head_dim(&self) -> usize {
        self.hidden_size / self.num_heads
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden_size == 0
            || self.num_layers == 0
            || self.num_heads == 0
            || self.intermediate_size == 0
            || self.vocab_size == 0
            || self.max_position == 0
        {
            return Err(Error::InvalidConfig("all sizes must be ≥ 1".to_string()));
        }
        if self.hidden_size % self.num_heads != 0 {
            return Err(Error::InvalidConfig(format!(
                "hidden_size {} not divisible by num_heads {}",
                self.hidden_size, self.num_heads
            )));
        }
        if self.type_vocab != 2 {
            return Err(Error::InvalidConfig(format!(
                "type_vocab must be 2, got {}",
                self.type_vocab
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::InvalidConfig(format!(
                "dropout_rate must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        if self.layernorm_epsilon <= 0.0 {
            return Err(Error::InvalidConfig(
                "layernorm_epsilon must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_indivisible_heads() {
        let mut config = ModelConfig::toy(9);
        config.hidden_size = 10;
        config.num_heads = 4;
        assert!(matches!(config.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn presets_resolve_by_name() {
        let toy = ModelConfig::preset("toy", 9).unwrap();
        assert_eq!(toy.num_layers, 2);
        assert_eq!(toy.hidden_size, 64);
        let big = ModelConfig::preset("bioformer8l-like", 30000).unwrap();
        assert_eq!(big.num_layers, 8);
        assert_eq!(big.max_position, 512);
        assert!(ModelConfig::preset("huge", 9).is_err());
    }
}
