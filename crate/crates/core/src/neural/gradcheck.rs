use super::{loss, Gradients, ModelParams, ParamGroup, PrefixSample};
use crate::error::{Error, Result};

/// Central-difference estimate of the loss gradient, one parameter at a time.
pub fn finite_diff_grad(params: &ModelParams, batch: &[PrefixSample<'_>], h: f64) -> Result<Gradients> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::arg(format!("finite-difference step must be positive, got {h}")));
    }
    let mut probe = params.clone();
    let mut grad = Gradients::zeros(params.config);
    for k in 0..params.len() {
        let orig = params.as_slice()[k];
        probe.as_mut_slice()[k] = orig + h;
        let up = loss(&probe, batch)?;
        probe.as_mut_slice()[k] = orig - h;
        let down = loss(&probe, batch)?;
        probe.as_mut_slice()[k] = orig;
        grad.as_mut_slice()[k] = (up - down) / (2.0 * h);
    }
    Ok(grad)
}

/// Entry-wise relative error `|a - n| / max(|a|, |n|, 1e-6)`; the floor keeps
/// entries that are zero in both estimates from dominating.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

/// Largest entry-wise relative error, optionally restricted to one group.
pub fn max_relative_error(analytic: &Gradients, numeric: &Gradients) -> f64 {
    analytic
        .as_slice()
        .iter()
        .zip(numeric.as_slice())
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}

pub fn group_relative_error(analytic: &Gradients, numeric: &Gradients, group: ParamGroup) -> f64 {
    analytic
        .group(group)
        .iter()
        .zip(numeric.group(group))
        .map(|(&a, &n)| relative_error(a, n))
        .fold(0.0, f64::max)
}
