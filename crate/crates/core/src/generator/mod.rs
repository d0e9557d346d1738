//! Trilinear-aggregation constructions.
//!
//! Every algorithm here is first built in transformed coordinates (rows of
//! length `s0 = (n0+2)^2`) and optionally pulled back through the basis
//! transformation to act on plain `n0 x n0` operands.
//!
//! Row order: first-table products, second-table products (unbarred before
//! barred for each triple), diagonal blocks by index, then off-diagonal
//! cancellation cells in row-major order, seven slots each.

mod context;
mod new25b;
mod rows;

pub use context::{build_phi, AggregationContext, Phi};
pub use new25b::{gen_new25b, New25b};
pub use rows::{aggregation_rows, cancellation_cells, cell_embeddings, correction_block, RowSet};

use serde::{Deserialize, Serialize};

use crate::algorithm::{BilinearAlgorithm, RowTag, TraceCell};
use crate::decomposed::DecomposedAlgorithm;
use crate::dense::Matrix;
use crate::error::Result;
use crate::ops::{find_kin_pairs, merge_kin};
use crate::rational::Rational;
use crate::strassen::{strassen, with_prescribed_rows};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Diagonal traces kept separate from the diagonal aggregation products.
    Pan,
    /// Diagonal traces merged into the aggregation products.
    New25,
}

/// A generated algorithm in transformed coordinates together with the
/// metadata of its off-diagonal cancellation cells.
#[derive(Clone, Debug)]
pub struct Generated {
    pub family: Family,
    pub decomposed: DecomposedAlgorithm,
    /// Off-diagonal cells, embeddings in transformed coordinates.
    pub cells: Vec<TraceCell>,
}

impl Generated {
    pub fn t(&self) -> usize {
        self.decomposed.t()
    }

    pub fn to_full(&self) -> Result<BilinearAlgorithm> {
        self.decomposed.to_full()
    }

    /// Cells with embeddings in plain operand coordinates.
    pub fn full_cells(&self) -> Result<Vec<TraceCell>> {
        let phi = self.decomposed.phi();
        self.cells.iter().map(|c| c.pulled_back(phi)).collect()
    }
}

/// The 2x2x2 algorithm used on diagonal cells: its first U and V rows are
/// `(-1/gamma, 1, 1, 0)` and `(1, gamma, 1, 0)`, so that after scaling by
/// the cell embeddings its first product coincides in U and V with the
/// diagonal second-table product.
pub fn diagonal_local(ctx: &AggregationContext) -> Result<BilinearAlgorithm> {
    let g = ctx.gamma().clone();
    let k_u = Matrix::from_vec(
        2,
        2,
        vec![-g.recip(), Rational::one(), Rational::one(), Rational::zero()],
    )?;
    let k_v = Matrix::from_vec(2, 2, vec![Rational::one(), g, Rational::one(), Rational::zero()])?;
    with_prescribed_rows(&k_u, &k_v)
}

fn assemble(
    ctx: &AggregationContext,
    family: Family,
    mut rows: RowSet,
    chooser: &dyn Fn((usize, usize)) -> BilinearAlgorithm,
) -> Result<Generated> {
    let (cancel, cells) = cancellation_cells(ctx, chooser, rows.len())?;
    rows.extend(cancel);
    let phi = build_phi(ctx.n0())?.matrix;
    let (u, v, w, tags) = rows.into_matrices(ctx.s0());
    let decomposed = DecomposedAlgorithm::new(ctx.n0(), phi, u, v, w, tags)?;
    Ok(Generated {
        family,
        decomposed,
        cells,
    })
}

/// The unmerged variant with a custom off-diagonal chooser.
pub fn gen_pan_with(n0: usize, chooser: &dyn Fn((usize, usize)) -> BilinearAlgorithm) -> Result<Generated> {
    let ctx = AggregationContext::new(n0)?;
    let mut rows = aggregation_rows(&ctx, true);
    let local = diagonal_local(&ctx)?;
    for i in 0..ctx.d() {
        let (r, _) = rows::cell_rows(&ctx, (i, i), local.clone(), rows.len(), |slot| {
            RowTag::CorrectionDiag { i, slot }
        })?;
        rows.extend(r);
    }
    assemble(&ctx, Family::Pan, rows, chooser)
}

/// The merged construction with a custom off-diagonal chooser.
pub fn gen_new25_with(n0: usize, chooser: &dyn Fn((usize, usize)) -> BilinearAlgorithm) -> Result<Generated> {
    let ctx = AggregationContext::new(n0)?;
    let mut rows = aggregation_rows(&ctx, false);
    for i in 0..ctx.d() {
        rows.extend(correction_block(&ctx, i));
    }
    assemble(&ctx, Family::New25, rows, chooser)
}

fn default_chooser(_: (usize, usize)) -> BilinearAlgorithm {
    strassen()
}

/// Pan-style algorithm in transformed coordinates.
pub fn gen_pan_decomposed(n0: usize) -> Result<Generated> {
    gen_pan_with(n0, &default_chooser)
}

/// The merged algorithm in transformed coordinates.
pub fn gen_new25_decomposed(n0: usize) -> Result<Generated> {
    gen_new25_with(n0, &default_chooser)
}

pub fn gen_pan(n0: usize) -> Result<BilinearAlgorithm> {
    gen_pan_decomposed(n0)?.to_full()
}

pub fn gen_new25(n0: usize) -> Result<BilinearAlgorithm> {
    gen_new25_decomposed(n0)?.to_full()
}

/// Kin pairs of the Pan-style algorithm that join a diagonal second-table
/// product with the first slot of the same index's diagonal trace.
pub fn targeted_pairs(alg: &BilinearAlgorithm, pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    pairs
        .iter()
        .copied()
        .filter(|&(a, b)| {
            let is_diag = |r: usize| match alg.tags()[r] {
                RowTag::Aggregation {
                    table: 2,
                    triple: (i, j, k),
                    barred: false,
                } if i == j && j == k => Some(i),
                _ => None,
            };
            let is_slot0 = |r: usize| match alg.tags()[r] {
                RowTag::CorrectionDiag { i, slot: 0 } => Some(i),
                _ => None,
            };
            matches!((is_diag(a), is_slot0(b)), (Some(x), Some(y)) if x == y)
                || matches!((is_diag(b), is_slot0(a)), (Some(x), Some(y)) if x == y)
        })
        .collect()
}

/// The second construction path: merge the targeted kin pairs of a
/// Pan-style algorithm (in whatever coordinates it is given).
pub fn merge_targeted(pan: &BilinearAlgorithm) -> Result<BilinearAlgorithm> {
    let pairs = targeted_pairs(pan, &find_kin_pairs(pan));
    merge_kin(pan, &pairs)
}

/// The transformed-coordinate part of a decomposed algorithm viewed as an
/// algorithm on `(n0+2) x (n0+2)` operands, so the algebra operations
/// (kin search, merging) can act on it directly.
pub fn transformed_view(g: &Generated) -> Result<BilinearAlgorithm> {
    let side = g.decomposed.n0() + 2;
    BilinearAlgorithm::with_tags(
        crate::algorithm::Dims::square(side),
        g.decomposed.u_phi().clone(),
        g.decomposed.v_phi().clone(),
        g.decomposed.w_phi().clone(),
        g.decomposed.tags().to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{t_new, t_pan};
    use crate::verifier::verify_exact;

    #[test]
    fn ranks_match_closed_forms() {
        for n0 in [2, 4, 6, 8, 10, 12, 20] {
            assert_eq!(gen_pan_decomposed(n0).unwrap().t() as u128, t_pan(n0).unwrap());
            assert_eq!(gen_new25_decomposed(n0).unwrap().t() as u128, t_new(n0).unwrap());
        }
    }

    #[test]
    fn small_instances_are_exact() {
        for n0 in [2, 4] {
            assert!(verify_exact(&gen_pan(n0).unwrap(), 1 << 26).unwrap(), "pan {n0}");
            assert!(verify_exact(&gen_new25(n0).unwrap(), 1 << 26).unwrap(), "new25 {n0}");
        }
    }

    #[test]
    fn diagonal_local_first_rows() {
        let ctx = AggregationContext::new(44).unwrap();
        let g = ctx.gamma().clone();
        let loc = diagonal_local(&ctx).unwrap();
        assert_eq!(g, Rational::new(14, 23));
        let u0: Vec<Rational> = (0..4).map(|c| loc.u().get(0, c)).collect();
        let v0: Vec<Rational> = (0..4).map(|c| loc.v().get(0, c)).collect();
        assert_eq!(u0, vec![-g.recip(), Rational::one(), Rational::one(), Rational::zero()]);
        assert_eq!(v0, vec![Rational::one(), g, Rational::one(), Rational::zero()]);
    }

    #[test]
    fn merge_path_equals_literal_path() {
        for n0 in [2, 4, 6] {
            let pan = transformed_view(&gen_pan_decomposed(n0).unwrap()).unwrap();
            let merged = merge_targeted(&pan).unwrap();
            let literal = transformed_view(&gen_new25_decomposed(n0).unwrap()).unwrap();
            assert_eq!(merged.t(), literal.t());
            let key = |a: &BilinearAlgorithm| {
                let mut rows: Vec<_> = (0..a.t())
                    .map(|r| (a.u().row(r).to_owned_row(), a.v().row(r).to_owned_row(), a.w().row(r).to_owned_row()))
                    .collect();
                rows.sort_by(|x, y| format!("{x:?}").cmp(&format!("{y:?}")));
                rows
            };
            assert_eq!(key(&merged), key(&literal), "n0 = {n0}");
        }
    }
}
