//! Central finite-difference gradient checking.

use alloc::string::{String, ToString};

use super::{ParamStore, TwoFloat};
use crate::{Error, Result};

/// Worst coordinate found by [`grad_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_param: String,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub coordinates: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err <= tol
    }
}

/// Relative error with the denominator floored at `1e-12`, so coordinates
/// whose true gradient is zero compare cleanly.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12)
}

/// Compares `analytic` against `(f(θ+eps) − f(θ−eps)) / 2eps` for every
/// scalar in `params`.
pub fn grad_check<F>(
    mut f: F,
    params: &ParamStore,
    analytic: &ParamStore,
    eps: f64,
) -> Result<GradCheckReport>
where
    F: FnMut(&ParamStore) -> f64,
{
    scan(
        params,
        analytic,
        eps,
        |probe, _, _| f(probe),
        |plus, minus, _, _| (plus - minus) / (2.0 * eps),
    )
}

/// Same central difference, with `f` evaluated in double-double precision.
///
/// In plain `f64` the difference `f(θ+eps) − f(θ−eps)` carries a rounding
/// error of a few ulps of `f`, which dominates once a gradient is below
/// roughly `1e-16 · |f| / eps`. Here the difference is formed from ~32-digit
/// values and divided by the exact distance between the two perturbed
/// parameters as they are stored.
pub fn grad_check_extended<F>(
    mut f: F,
    params: &ParamStore,
    analytic: &ParamStore,
    eps: f64,
) -> Result<GradCheckReport>
where
    F: FnMut(&ParamStore) -> TwoFloat,
{
    scan(
        params,
        analytic,
        eps,
        |probe, _, _| f(probe),
        |plus: TwoFloat, minus, up, down| {
            ((plus - minus) / (TwoFloat::from_f64(up) - TwoFloat::from_f64(down))).to_f64()
        },
    )
}

fn scan<T, E, D>(
    params: &ParamStore,
    analytic: &ParamStore,
    eps: f64,
    mut eval: E,
    diff: D,
) -> Result<GradCheckReport>
where
    E: FnMut(&ParamStore, usize, usize) -> T,
    D: Fn(T, T, f64, f64) -> f64,
{
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "finite-difference step must be positive, got {eps}"
        )));
    }
    params.check_compatible(analytic)?;

    let mut probe = params.clone();
    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_param: String::new(),
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        coordinates: 0,
    };
    for p in 0..params.len() {
        for k in 0..params.by_index(p).len() {
            let original = params.by_index(p).as_slice()[k];
            let (up, down) = (original + eps, original - eps);
            probe.by_index_mut(p).as_mut_slice()[k] = up;
            let plus = eval(&probe, p, k);
            probe.by_index_mut(p).as_mut_slice()[k] = down;
            let minus = eval(&probe, p, k);
            probe.by_index_mut(p).as_mut_slice()[k] = original;

            let numeric = diff(plus, minus, up, down);
            let a = analytic.by_index(p).as_slice()[k];
            let err = relative_error(a, numeric);
            report.coordinates += 1;
            if err > report.max_rel_err || report.worst_param.is_empty() {
                report.max_rel_err = err;
                report.worst_param = params.name(p).to_string();
                report.worst_index = k;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    #[test]
    fn zero_step_rejected() {
        let mut p = ParamStore::new();
        p.register("x", Matrix::row(&[1.0])).unwrap();
        let g = p.zeros_like();
        assert!(grad_check(|_| 0.0, &p, &g, 0.0).is_err());
        assert!(grad_check(|_| 0.0, &p, &g, -1e-6).is_err());
    }

    #[test]
    fn dead_parameter_compares_as_zero() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
    }

    #[test]
    fn detects_a_wrong_gradient() {
        let mut p = ParamStore::new();
        p.register("x", Matrix::row(&[1.5, -0.5])).unwrap();
        let mut wrong = p.zeros_like();
        wrong
            .by_index_mut(0)
            .as_mut_slice()
            .copy_from_slice(&[3.0, 0.0]);
        let f = |q: &ParamStore| q.by_index(0).as_slice().iter().map(|v| v * v).sum::<f64>();
        let r = grad_check(f, &p, &wrong, 1e-6).unwrap();
        assert_eq!(r.worst_index, 1);
        assert!(r.max_rel_err > 0.99);
    }

    #[test]
    fn extended_check_resolves_gradients_below_f64_noise() {
        // f = 1 + 1e-9·x² at x = 0.3: df/dx = 6e-10, far below what an f64
        // difference of two values near 1 can resolve at eps = 1e-6.
        let mut p = ParamStore::new();
        p.register("x", Matrix::row(&[0.3])).unwrap();
        let mut g = p.zeros_like();
        g.by_index_mut(0).as_mut_slice()[0] = 2e-9 * 0.3;
        let plain = grad_check(
            |q| 1.0 + 1e-9 * q.by_index(0).as_slice()[0].powi(2),
            &p,
            &g,
            1e-6,
        )
        .unwrap();
        assert!(plain.max_rel_err > 1e-2);
        let ext = grad_check_extended(
            |q| {
                let x = TwoFloat::from_f64(q.by_index(0).as_slice()[0]);
                TwoFloat::ONE + TwoFloat::from_f64(1e-9) * x * x
            },
            &p,
            &g,
            1e-6,
        )
        .unwrap();
        assert!(ext.max_rel_err < 1e-9, "{ext:?}");
    }
}
