use serde::Serialize;

use crate::algorithm::{BilinearAlgorithm, Dims};
use crate::error::{Error, Result};
use crate::ops::{compose, substitute_blocks, BlockEmbedding};
use crate::verifier::{verify_exact, DEFAULT_BUDGET};

use super::{gen_new25_decomposed, Generated};

/// Two recursive steps of the merged algorithm, with every pair of
/// off-diagonal cancellation cells optionally recomputed by a 4x4x4
/// replacement algorithm. Kept lazy: the composed matrices are only built on
/// request.
#[derive(Clone, Debug)]
pub struct New25b {
    pub m0: usize,
    pub base: Generated,
    pub replacement: Option<BilinearAlgorithm>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct New25bReport {
    pub m0: usize,
    pub n0: usize,
    pub base_rank: u128,
    /// Pairs of off-diagonal cells, each a 4x4x4 sub-problem of rank 49.
    pub tagged_blocks: u128,
    pub substituted: bool,
    pub rank: u128,
}

/// Builds the two-step algorithm for base size `m0`. A replacement must be
/// a correct 4x4x4 algorithm; it is checked exactly here.
pub fn gen_new25b(m0: usize, replacement: Option<BilinearAlgorithm>) -> Result<New25b> {
    if let Some(r) = &replacement {
        if r.dims() != Dims::square(4) {
            return Err(Error::Substitution(format!(
                "replacement multiplies {:?}, expected 4x4x4",
                r.dims()
            )));
        }
        if !verify_exact(r, DEFAULT_BUDGET)? {
            return Err(Error::Substitution(
                "replacement is not a correct 4x4x4 algorithm".into(),
            ));
        }
    }
    Ok(New25b {
        m0,
        base: gen_new25_decomposed(m0)?,
        replacement,
    })
}

impl New25b {
    pub fn dims(&self) -> Dims {
        Dims::square(self.m0 * self.m0)
    }

    /// Number of off-diagonal cells of one step.
    pub fn h(&self) -> usize {
        self.base.cells.len()
    }

    pub fn tagged_blocks(&self) -> u128 {
        (self.h() as u128).pow(2)
    }

    pub fn rank(&self) -> u128 {
        let t = self.base.t() as u128;
        match &self.replacement {
            None => t * t,
            Some(r) => t * t - self.tagged_blocks() * (49 - r.t() as u128),
        }
    }

    pub fn report(&self) -> New25bReport {
        New25bReport {
            m0: self.m0,
            n0: self.m0 * self.m0,
            base_rank: self.base.t() as u128,
            tagged_blocks: self.tagged_blocks(),
            substituted: self.replacement.is_some(),
            rank: self.rank(),
        }
    }

    /// The 4x4x4 blocks of the full composition, embeddings in plain
    /// operand coordinates.
    pub fn blocks(&self) -> Result<Vec<BlockEmbedding>> {
        let cells = self.base.full_cells()?;
        let dims = self.base.decomposed.dims();
        let t = self.base.t();
        let mut out = Vec::with_capacity(cells.len() * cells.len());
        for outer in &cells {
            for inner in &cells {
                out.push(BlockEmbedding::from_cells(outer, inner, dims, dims, t)?);
            }
        }
        Ok(out)
    }

    /// Materializes the composed algorithm, with substitutions applied.
    /// Only sensible for small `m0`.
    pub fn materialize(&self) -> Result<BilinearAlgorithm> {
        let base = self.base.to_full()?;
        let composed = compose(&base, &base);
        match &self.replacement {
            None => Ok(composed),
            Some(r) => substitute_blocks(&composed, &self.blocks()?, r),
        }
    }
}
