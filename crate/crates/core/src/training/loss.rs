use crate::model::Labels;
use crate::numerics::bce_with_logits as bce;
use crate::{Error, Result};

/// Negative log-likelihood of one session split by task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub click: f64,
    pub scroll: f64,
    pub positions: usize,
}

/// `Σ_t BCE(logit_c, c_t) + BCE(logit_s, s_t)` over every exposed position.
///
/// Exposure is the mask: unexposed positions never appear in a session, and
/// the final position always carries its scroll label. With `click_only` the
/// scroll term is dropped.
pub fn session_nll(logits: &[(f64, f64)], labels: &[Labels], click_only: bool) -> Result<LossBreakdown> {
    if logits.len() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "logits vs labels",
            left: logits.len(),
            right: labels.len(),
        });
    }
    let mut click = 0.0;
    let mut scroll = 0.0;
    for (&(lc, ls), l) in logits.iter().zip(labels) {
        click += bce(lc, l.click as u8 as f64);
        if !click_only {
            scroll += bce(ls, l.scroll as u8 as f64);
        }
    }
    Ok(LossBreakdown {
        total: click + scroll,
        click,
        scroll,
        positions: logits.len(),
    })
}
