//! Minimal deterministic numerics core.
//!
//! Dense tensors, Xavier initialization, Adam, inverted dropout, LSTM
//! sequence forward/backward, and central-difference gradient checking.
//! All floating-point work is generic over [`Real`] so the same code
//! runs in 32-bit mode (training speed) and 64-bit mode (gradient
//! checks, determinism tests). There is no general autodiff tape:
//! gradients are hand-derived per architecture and verified against
//! [`grad_check`].

mod checkpoint;
mod gradcheck;
mod lstm;
mod ops;
mod real;
mod rng;
mod store;
mod tensor;

pub use checkpoint::{config_hash, fnv1a64, ArrayData, Checkpoint};
pub use gradcheck::grad_check;
pub use lstm::{
    init_lstm_params, lstm_param_names, lstm_sequence_backward, lstm_sequence_forward, Direction,
    LstmCache, LstmDims,
};
pub use ops::{
    dropout_apply, dropout_mask, log_sum_exp, sigmoid, softmax, softmax_backward, xavier_init,
};
pub use real::Real;
pub use rng::SeedStream;
pub use store::{AdamConfig, Gradients, ParamStore};
pub use tensor::Tensor;
