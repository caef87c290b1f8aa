//! Dense linear algebra, attention kernels, a tape-based reverse-mode
//! autodiff engine, seeded initialization and plain gradient descent.

pub mod attention;
pub mod gradcheck;
mod matrix;
mod optim;
mod params;
mod rng;
mod tape;
mod twofloat;

pub use attention::{
    attend, attend_multi_head, multi_head_attention, scaled_dot_attention, AttentionBlock,
};
pub use gradcheck::{grad_check, grad_check_extended, relative_error, GradCheckReport};
pub use matrix::{linear_forward, softmax, Axis, Matrix};
pub use optim::sgd_step;
pub use params::ParamStore;
pub use rng::{glorot_bound, glorot_init, splitmix64_next, Rng};
pub use tape::{Gradients, NodeId, Tape};
pub use twofloat::TwoFloat;
