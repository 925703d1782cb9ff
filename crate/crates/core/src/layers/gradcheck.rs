//! Central finite-difference checks of tape gradients.

use alloc::string::String;
use alloc::vec::Vec;

use super::{ParamId, ParamStore, Scope};
use crate::math;
use crate::numerics::{Tensor, Var};
use crate::Result;

/// Gradient norms below this are compared in absolute terms.
pub const NORM_FLOOR: f64 = 1e-6;

const SMOOTH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Largest `‖analytic − numeric‖ / max(‖analytic‖, ‖numeric‖, floor)`
    /// over parameter tensors.
    pub max_rel_error: f64,
    /// Name of the tensor attaining it.
    pub worst: Option<String>,
    pub coordinates: usize,
    /// Coordinates left out because the stencil crossed a relu kink or
    /// another non-smooth point.
    pub skipped: usize,
}

/// Compare `analytic` (one tensor per parameter in store order) against
/// central differences of `eval`, perturbing the parameters reached through
/// `params`. `pattern` is the relu sign pattern at the unperturbed point.
pub(crate) fn compare<S>(
    state: &mut S,
    params: fn(&mut S) -> &mut ParamStore,
    analytic: &[Tensor],
    pattern: &[bool],
    step: f64,
    eval: &mut dyn FnMut(&S) -> Result<(f64, Vec<bool>)>,
) -> Result<GradCheckReport> {
    let mut report = GradCheckReport { max_rel_error: 0.0, worst: None, coordinates: 0, skipped: 0 };
    for (k, a) in analytic.iter().enumerate() {
        let id = ParamId(k);
        let mut diff = 0.0;
        let mut na = 0.0;
        let mut nn = 0.0;
        for j in 0..a.len() {
            let mut central = |h: f64| -> Result<Option<f64>> {
                let orig = params(state).get(id).data()[j];
                params(state).get_mut(id).data_mut()[j] = orig + h;
                let (lp, pp) = eval(state)?;
                params(state).get_mut(id).data_mut()[j] = orig - h;
                let (lm, pm) = eval(state)?;
                params(state).get_mut(id).data_mut()[j] = orig;
                Ok((pp == pattern && pm == pattern).then(|| (lp - lm) / (2.0 * h)))
            };
            let Some(numeric) = central(step)? else {
                report.skipped += 1;
                continue;
            };
            let g = a.data()[j];
            // A disagreement is only trusted if halving the step reproduces
            // the difference quotient; otherwise the stencil straddles a
            // point where the loss is not smooth (e.g. a cosine of a
            // vanishing row).
            if (g - numeric).abs() > SMOOTH_TOL * numeric.abs().max(1.0) {
                let Some(half) = central(0.5 * step)? else {
                    report.skipped += 1;
                    continue;
                };
                if (half - numeric).abs() > SMOOTH_TOL.sqrt() * numeric.abs().max(1.0) {
                    report.skipped += 1;
                    continue;
                }
            }
            diff += (g - numeric) * (g - numeric);
            na += g * g;
            nn += numeric * numeric;
            report.coordinates += 1;
        }
        let rel = math::sqrt(diff) / math::sqrt(na).max(math::sqrt(nn)).max(NORM_FLOOR);
        if report.worst.is_none() || rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst = Some(String::from(params(state).name(id)));
        }
    }
    Ok(report)
}

/// Compare the tape gradient of the scalar built by `loss` against central
/// differences with step `step`, for every scalar in `store`.
pub fn check_gradients<F>(store: &mut ParamStore, step: f64, mut loss: F) -> Result<GradCheckReport>
where
    F: for<'p> FnMut(&mut Scope<'p>) -> Result<Var>,
{
    let (analytic, pattern) = {
        let mut scope = Scope::new(store);
        let l = loss(&mut scope)?;
        let g = scope.graph.backward(l)?;
        (scope.param_grads(&g), scope.graph.relu_pattern())
    };
    let mut eval = |store: &ParamStore| -> Result<(f64, Vec<bool>)> {
        let mut scope = Scope::new(store);
        let l = loss(&mut scope)?;
        Ok((scope.graph.scalar(l), scope.graph.relu_pattern()))
    };
    compare(store, |s| s, &analytic, &pattern, step, &mut eval)
}
