//! Dense numerics for the sequence model: arrays, an LSTM stack, softmax
//! heads, the elementwise BCE loss, backpropagation through time and Adam.

mod adam;
mod array;
mod gradcheck;
mod layers;
mod loss;
mod network;

pub use adam::{adam_step, grad_norm, AdamConfig, AdamState};
pub use array::{Param, ValueArray};
pub use gradcheck::{finite_difference_check, jitter_biases, relative_error, GradCheckReport, ParamCheck, FD_STEP, REL_ERROR_FLOOR};
pub use layers::{softmax, EmbeddingMap, LstmLayer, LstmStack, LstmState, MlpHead};
pub use loss::{bce_loss, PROB_CLAMP};
pub use network::{HeadOutputs, Network, NetworkDims};
