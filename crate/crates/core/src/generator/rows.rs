use crate::algorithm::{BilinearAlgorithm, Dims, RowTag, TraceCell};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sparse::{SparseMatrix, SparseRow};

use super::context::AggregationContext;

/// Rows in transformed coordinates, accumulated in emission order.
#[derive(Clone, Debug, Default)]
pub struct RowSet {
    pub u: Vec<SparseRow>,
    pub v: Vec<SparseRow>,
    pub w: Vec<SparseRow>,
    pub tags: Vec<RowTag>,
}

/// Sorts, merges repeated coordinates and drops zeros.
fn normalize(mut terms: Vec<(usize, Rational)>) -> SparseRow {
    terms.sort_by_key(|t| t.0);
    let mut out: SparseRow = Vec::with_capacity(terms.len());
    for (c, v) in terms {
        match out.last_mut() {
            Some((lc, lv)) if *lc as usize == c => *lv += &v,
            _ => out.push((c as u32, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

impl RowSet {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn push(
        &mut self,
        u: Vec<(usize, Rational)>,
        v: Vec<(usize, Rational)>,
        w: Vec<(usize, Rational)>,
        tag: RowTag,
    ) {
        self.u.push(normalize(u));
        self.v.push(normalize(v));
        self.w.push(normalize(w));
        self.tags.push(tag);
    }

    pub fn push_rows(&mut self, u: SparseRow, v: SparseRow, w: SparseRow, tag: RowTag) {
        self.u.push(u);
        self.v.push(v);
        self.w.push(w);
        self.tags.push(tag);
    }

    pub fn extend(&mut self, other: RowSet) {
        self.u.extend(other.u);
        self.v.extend(other.v);
        self.w.extend(other.w);
        self.tags.extend(other.tags);
    }

    pub fn into_matrices(self, s0: usize) -> (SparseMatrix, SparseMatrix, SparseMatrix, Vec<RowTag>) {
        (
            SparseMatrix::from_rows(s0, self.u),
            SparseMatrix::from_rows(s0, self.v),
            SparseMatrix::from_rows(s0, self.w),
            self.tags,
        )
    }
}

fn one() -> Rational {
    Rational::one()
}

fn neg_one() -> Rational {
    -Rational::one()
}

/// Rows of the two aggregation tables. The second table omits the
/// unbarred diagonal triples unless `with_diagonal` is set.
pub fn aggregation_rows(ctx: &AggregationContext, with_diagonal: bool) -> RowSet {
    let mut rows = RowSet::default();
    let c = |p, q| ctx.coord(p, q);
    for (i, j, k) in ctx.first_table() {
        for barred in [false, true] {
            let (a, b, e) = if barred {
                (ctx.bar(i), ctx.bar(j), ctx.bar(k))
            } else {
                (i, j, k)
            };
            rows.push(
                vec![(c(a, b), one()), (c(b, e), one()), (c(e, a), one())],
                vec![(c(b, e), one()), (c(e, a), one()), (c(a, b), one())],
                vec![(c(e, a), one()), (c(a, b), one()), (c(b, e), one())],
                RowTag::Aggregation {
                    table: 1,
                    triple: (i, j, k),
                    barred,
                },
            );
        }
    }
    for (i, j, k) in ctx.second_table() {
        for barred in [false, true] {
            if !barred && !with_diagonal && i == j && j == k {
                continue;
            }
            let (a, b, e) = if barred {
                (ctx.bar(i), ctx.bar(j), ctx.bar(k))
            } else {
                (i, j, k)
            };
            let (ab, bb, eb) = (ctx.bar(a), ctx.bar(b), ctx.bar(e));
            rows.push(
                vec![(c(a, b), neg_one()), (c(bb, e), one()), (c(e, ab), one())],
                vec![(c(b, eb), one()), (c(e, a), one()), (c(ab, b), one())],
                vec![(c(eb, a), neg_one()), (c(a, bb), one()), (c(b, e), one())],
                RowTag::Aggregation {
                    table: 2,
                    triple: (i, j, k),
                    barred,
                },
            );
        }
    }
    rows
}

/// The seven products correcting diagonal index `i`: the diagonal
/// second-table product merged with the scaled diagonal 2x2 trace.
pub fn correction_block(ctx: &AggregationContext, i: usize) -> RowSet {
    let g = ctx.gamma().clone();
    let d = Rational::from(ctx.d() as i64);
    let ib = ctx.bar(i);
    let (ii, i_b, b_i, bb) = (
        ctx.coord(i, i),
        ctx.coord(i, ib),
        ctx.coord(ib, i),
        ctx.coord(ib, ib),
    );
    let gi = g.recip();
    let gi2 = &gi * &gi;
    let g1 = &g + &one(); // g + 1
    let gm1 = &g - &one(); // g - 1
    let mut rows = RowSet::default();
    let mut push = |slot: u8, u: Vec<(usize, Rational)>, v: Vec<(usize, Rational)>, w: Vec<(usize, Rational)>| {
        rows.push(u, v, w, RowTag::CorrectionDiag { i, slot })
    };
    push(
        0,
        vec![(b_i, one()), (i_b, one()), (ii, neg_one())],
        vec![(b_i, one()), (i_b, one()), (ii, one())],
        vec![
            (bb, &d * &(&one() - &g) * &gi),
            (b_i, -(&g - &d) * &gi),
            (i_b, -(&d - &g) * &gi),
            (ii, &one() - &d),
        ],
    );
    push(
        1,
        vec![(i_b, one())],
        vec![
            (bb, -&g1 * &gi),
            (b_i, -gi.clone()),
            (i_b, &one() - &gi2),
            (ii, &gm1 * &gi),
        ],
        vec![(bb, d.clone()), (b_i, d.clone()), (i_b, &d * &gi), (ii, d.clone())],
    );
    push(
        2,
        vec![(i_b, one()), (ii, g.clone())],
        vec![
            (bb, &g1 * &gi),
            (b_i, &g1 * &gi),
            (i_b, gi2.clone()),
            (ii, gi.clone()),
        ],
        vec![(i_b, &d * &gi), (ii, d.clone())],
    );
    push(
        3,
        vec![(b_i, one()), (ii, -g1.clone())],
        vec![(bb, one()), (b_i, one()), (i_b, gi.clone()), (ii, one())],
        vec![(i_b, &d * &gi2), (ii, &d + &(&d * &gi))],
    );
    push(
        4,
        vec![(bb, one()), (b_i, one()), (i_b, -gi.clone()), (ii, neg_one())],
        vec![(bb, -g1.clone()), (i_b, -gi.clone())],
        vec![(bb, &d * &gm1 * &gi), (b_i, -(&d * &gi))],
    );
    push(
        5,
        vec![(b_i, one()), (ii, neg_one())],
        vec![
            (bb, -g1.clone()),
            (b_i, neg_one()),
            (i_b, -&g1 * &gi),
            (ii, neg_one()),
        ],
        vec![
            (bb, &d * &(&one() - &g) * &gi),
            (b_i, &d * &gi),
            (i_b, -(&d * &gm1 * &gi2)),
            (ii, &d * &gi),
        ],
    );
    push(
        6,
        vec![(bb, one()), (i_b, -&g1 * &gi)],
        vec![(bb, neg_one()), (i_b, &gm1 * &gi)],
        vec![(bb, &d * &gi), (b_i, &d + &(&d * &gi))],
    );
    rows
}

/// Embeddings of cell `(i, j)`: the local operands are
/// `[[X_ij, X_(i~)j], [X_i(j~), X_(i~)(j~)]]` for A and B and the same
/// pattern with signs `(+, -, -, +)` and factor `-d` for C. Diagonal cells
/// carry the extra scaling `gamma` on A's first and C's last entry and
/// `1/gamma` on B's second entry.
pub fn cell_embeddings(
    ctx: &AggregationContext,
    (i, j): (usize, usize),
) -> (SparseMatrix, SparseMatrix, SparseMatrix) {
    let (ib, jb) = (ctx.bar(i), ctx.bar(j));
    let coords = [
        ctx.coord(i, j),
        ctx.coord(ib, j),
        ctx.coord(i, jb),
        ctx.coord(ib, jb),
    ];
    let d = Rational::from(ctx.d() as i64);
    let (sa, sb, sc) = if i == j {
        let g = ctx.gamma().clone();
        (
            [g.clone(), one(), one(), one()],
            [one(), g.recip(), one(), one()],
            [-d.clone(), d.clone(), d.clone(), -(&d * &g)],
        )
    } else {
        (
            [one(), one(), one(), one()],
            [one(), one(), one(), one()],
            [-d.clone(), d.clone(), d.clone(), -d.clone()],
        )
    };
    let embed = |scales: [Rational; 4]| {
        let rows = coords
            .iter()
            .zip(scales)
            .map(|(&c, s)| vec![(c as u32, s)])
            .collect();
        SparseMatrix::from_rows(ctx.s0(), rows)
    };
    (embed(sa), embed(sb), embed(sc))
}

fn require_2227(alg: &BilinearAlgorithm, cell: (usize, usize)) -> Result<()> {
    if alg.dims() != Dims::square(2) || alg.t() != 7 {
        return Err(Error::Dimension(format!(
            "cell {cell:?} needs a 2x2x2 rank-7 algorithm, got {:?} with rank {}",
            alg.dims(),
            alg.t()
        )));
    }
    Ok(())
}

/// Rows of a 2x2 trace cell through its embeddings, with tags built by `tag`.
pub fn cell_rows(
    ctx: &AggregationContext,
    cell: (usize, usize),
    local: BilinearAlgorithm,
    first_row: usize,
    tag: impl Fn(u8) -> RowTag,
) -> Result<(RowSet, TraceCell)> {
    require_2227(&local, cell)?;
    let (e_a, e_b, e_c) = cell_embeddings(ctx, cell);
    let tc = TraceCell {
        cell,
        e_a,
        e_b,
        e_c,
        local,
        first_row,
    };
    let (u, v, w) = tc.rows()?;
    let mut rows = RowSet::default();
    for s in 0..7 {
        rows.push_rows(
            u.row(s).to_owned_row(),
            v.row(s).to_owned_row(),
            w.row(s).to_owned_row(),
            tag(s as u8),
        );
    }
    Ok((rows, tc))
}

/// Seven rows per off-diagonal cell, each cell computed by the algorithm
/// the chooser assigns to it. `first_row` is the index the first emitted
/// row will have in the final algorithm.
pub fn cancellation_cells(
    ctx: &AggregationContext,
    chooser: &dyn Fn((usize, usize)) -> BilinearAlgorithm,
    first_row: usize,
) -> Result<(RowSet, Vec<TraceCell>)> {
    let mut rows = RowSet::default();
    let mut cells = Vec::new();
    for cell in ctx.off_diagonal_cells() {
        let (r, tc) = cell_rows(ctx, cell, chooser(cell), first_row + rows.len(), |slot| {
            RowTag::Cancellation { cell, slot }
        })?;
        rows.extend(r);
        cells.push(tc);
    }
    Ok((rows, cells))
}
