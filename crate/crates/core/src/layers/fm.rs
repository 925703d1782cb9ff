use alloc::format;
use alloc::vec::Vec;

use super::{ParamId, ParamStore, Scope};
use crate::numerics::{Tensor, Var};
use crate::{Error, Result};

/// Second-order factorization machine over a fixed number of fields.
///
/// Every field contributes a scalar value `x_i` and a factor row `v_i`
/// (`[N × k]`, one row per example). The output is `[N × 1]`:
/// `Σ_i w_i x_i + ½ Σ_f [(Σ_i x_i v_if)² − Σ_i (x_i v_if)²]`,
/// which equals the pairwise sum over distinct fields.
#[derive(Debug, Clone)]
pub struct FactorizationMachine {
    /// `[fields × 1]` first-order weights.
    pub first_order: ParamId,
    pub fields: usize,
}

impl FactorizationMachine {
    pub fn new(store: &mut ParamStore, name: &str, fields: usize) -> Self {
        Self {
            first_order: store.add_zeros(format!("{name}.w"), fields, 1),
            fields,
        }
    }

    pub fn forward(&self, scope: &mut Scope, fields: &[(f64, Var)]) -> Result<Var> {
        if fields.len() != self.fields {
            return Err(Error::LengthMismatch {
                what: "fm fields",
                left: fields.len(),
                right: self.fields,
            });
        }
        let rows = scope.graph.dims(fields[0].1).0;
        let w = scope.param(self.first_order);
        let values: Vec<f64> = (0..rows).flat_map(|_| fields.iter().map(|f| f.0)).collect();
        let x = scope.graph.constant(Tensor::matrix(rows, self.fields, values)?)?;
        let first = scope.graph.matmul(x, w)?;

        let g = &mut scope.graph;
        let mut sum: Option<Var> = None;
        let mut sum_sq: Option<Var> = None;
        for &(value, factor) in fields {
            let xv = if value == 1.0 { factor } else { g.scale(factor, value)? };
            let sq = g.mul(xv, xv)?;
            sum = Some(match sum {
                Some(s) => g.add(s, xv)?,
                None => xv,
            });
            sum_sq = Some(match sum_sq {
                Some(s) => g.add(s, sq)?,
                None => sq,
            });
        }
        let (sum, sum_sq) = (sum.expect("non-empty"), sum_sq.expect("non-empty"));
        let square_of_sum = g.mul(sum, sum)?;
        let diff = g.sub(square_of_sum, sum_sq)?;
        let pair = g.row_sum(diff)?;
        let pair = g.scale(pair, 0.5)?;
        g.add(first, pair)
    }
}
