use alloc::vec::Vec;

use super::{ParamId, ParamStore, Scope};
use crate::numerics::Var;
use crate::rng::SimRng;
use crate::{Error, Result};

/// Lookup table of `vocab` rows of width `dim`.
///
/// A clamping table maps any id past the end onto its last row; this is how
/// the position table handles sessions longer than the slate budget. Other
/// tables reject out-of-range ids.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub table: ParamId,
    pub vocab: usize,
    pub dim: usize,
    pub clamp: bool,
}

impl Embedding {
    pub fn new(store: &mut ParamStore, name: &str, vocab: usize, dim: usize, clamp: bool, rng: &mut SimRng) -> Self {
        let table = store.add_uniform(name, vocab, dim, rng);
        Self { table, vocab, dim, clamp }
    }

    pub fn resolve(&self, id: usize) -> Result<usize> {
        if id < self.vocab {
            Ok(id)
        } else if self.clamp {
            Ok(self.vocab - 1)
        } else {
            Err(Error::Lookup { index: id, vocab: self.vocab })
        }
    }

    /// `[ids.len() × dim]`, one row per id.
    pub fn lookup(&self, scope: &mut Scope, ids: &[usize]) -> Result<Var> {
        let rows = ids.iter().map(|&i| self.resolve(i)).collect::<Result<Vec<_>>>()?;
        let t = scope.param(self.table);
        scope.graph.gather_rows(t, &rows)
    }
}
