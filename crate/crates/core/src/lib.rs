//! Multi-source spatial feature fusion on a small reverse-mode autodiff tape,
//! plus the room-acoustics metrics (RT60, RTE, MCD) used to score generated
//! audio.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and everything else that touches the OS lives in the companion
//! `spatial-fusion` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod acoustics;
mod error;
pub mod fusion;
pub mod knowledge;
pub(crate) mod math;
pub mod numerics;

pub use error::{Error, Result};
pub use numerics::{Axis, Matrix, ParamStore, Rng};
