//! Training, sampling and persistence of the sequence model over minimum
//! DFS codes.

mod checkpoint;
mod generate;
mod train;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{encode_sequence, VocabSpec};
use crate::error::{Error, Result};
use crate::neural::{AdamConfig, Network, NetworkDims};
use crate::{DfsCode, Scalar};

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, ResumeState, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use generate::{generate, generate_graphs, sample_sequence, RESAMPLE_FACTOR};
pub use train::{
    resume_training, teacher_forced_accuracy, train, Accuracy, EpochRecord, TrainHistory, Trainer,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub layers: usize,
    pub hidden: usize,
    pub embedding: usize,
    pub mlp_hidden: usize,
    pub dropout: f64,
    pub optimizer: AdamConfig,
    pub batch_size: usize,
    /// Upper bound on training epochs.
    pub epochs: usize,
    /// Epochs without a sufficient validation improvement before stopping.
    pub patience: usize,
    /// Relative validation-loss decrease that counts as an improvement.
    pub min_rel_improvement: f64,
    /// Generation length cap; `None` means max training edge count + 1.
    pub max_len: Option<usize>,
    pub seed: u64,
}

impl TrainConfig {
    /// Full-size hyperparameters.
    pub fn full() -> Self {
        TrainConfig {
            layers: 4,
            hidden: 256,
            embedding: 92,
            mlp_hidden: 512,
            dropout: 0.2,
            optimizer: AdamConfig::default(),
            batch_size: 32,
            epochs: 10_000,
            patience: 20,
            min_rel_improvement: 0.0005,
            max_len: None,
            seed: 0,
        }
    }

    /// Small profile that trains on one CPU core.
    pub fn desk() -> Self {
        TrainConfig { layers: 2, hidden: 64, mlp_hidden: 128, epochs: 500, ..Self::full() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("layers", self.layers),
            ("hidden", self.hidden),
            ("embedding", self.embedding),
            ("mlp_hidden", self.mlp_hidden),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
            ("patience", self.patience),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Precondition(format!("{name} must be positive")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Precondition(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.min_rel_improvement > 0.0 && self.min_rel_improvement < 1.0) {
            return Err(Error::Precondition("early-stop threshold must be in (0, 1)".into()));
        }
        let o = &self.optimizer;
        if !(o.lr > 0.0 && o.eps > 0.0 && o.weight_decay >= 0.0 && (0.0..1.0).contains(&o.beta1) && (0.0..1.0).contains(&o.beta2)) {
            return Err(Error::Precondition("invalid optimizer settings".into()));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::desk()
    }
}

/// Vocabulary, network and the configuration it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeModel<T> {
    pub vocab: VocabSpec,
    pub network: Network<T>,
    pub config: TrainConfig,
    /// Default generation length cap.
    pub max_len: usize,
}

impl<T: Scalar> GenerativeModel<T> {
    /// Freshly initialized model for a vocabulary.
    pub fn new(vocab: VocabSpec, config: TrainConfig, max_len: usize) -> Result<Self> {
        config.validate()?;
        let dims = NetworkDims {
            block_dims: vocab.dims(),
            embedding: config.embedding,
            hidden: config.hidden,
            layers: config.layers,
            mlp_hidden: config.mlp_hidden,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let network = Network::new(dims, config.dropout, &mut rng);
        Ok(GenerativeModel { vocab, network, config, max_len })
    }

    /// Teacher-forced loss of one code (terminal EOS step included).
    pub fn code_loss(&self, code: &DfsCode) -> Result<f64> {
        let seq = encode_sequence(code, &self.vocab)?;
        Ok(self.network.sequence_loss(&seq.steps)?.as_f64())
    }
}
