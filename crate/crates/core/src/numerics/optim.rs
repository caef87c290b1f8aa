use super::ParamStore;
use crate::{Error, Result};

/// Plain gradient descent: `θ ← θ − lr·g` for every parameter in registry order.
pub fn sgd_step(params: &mut ParamStore, grads: &ParamStore, lr: f64) -> Result<()> {
    if !lr.is_finite() || lr < 0.0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "learning rate must be finite and non-negative, got {lr}"
        )));
    }
    params.axpy(-lr, grads)
}
