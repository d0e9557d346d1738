//! Exact sparse matrices in compressed-row form.
//!
//! Entries are kept row-major with strictly increasing columns inside each row
//! and no stored zeros, so two matrices are equal iff their buffers are equal.

use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A sparse row: strictly increasing column indices, nonzero values.
pub type SparseRow = Vec<(u32, Rational)>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Rational>,
}

/// Borrowed view of one row.
#[derive(Clone, Copy, Debug)]
pub struct RowView<'a> {
    pub cols: &'a [u32],
    pub vals: &'a [Rational],
}

impl<'a> RowView<'a> {
    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &'a Rational)> + 'a {
        let cols = self.cols;
        let vals = self.vals;
        cols.iter().map(|&c| c as usize).zip(vals.iter())
    }

    pub fn get(&self, col: usize) -> Option<&'a Rational> {
        self.cols
            .binary_search(&(col as u32))
            .ok()
            .map(|k| &self.vals[k])
    }

    pub fn to_owned_row(&self) -> SparseRow {
        self.cols.iter().copied().zip(self.vals.iter().cloned()).collect()
    }
}

impl PartialEq for RowView<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cols == other.cols && self.vals == other.vals
    }
}

impl Eq for RowView<'_> {}

impl Hash for RowView<'_> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.cols.hash(state);
        self.vals.hash(state);
    }
}

/// Dense scratch accumulator for building sparse rows from linear combinations.
pub struct RowAccumulator {
    dense: Vec<Rational>,
    touched: Vec<u32>,
    mark: Vec<bool>,
}

impl RowAccumulator {
    pub fn new(width: usize) -> Self {
        RowAccumulator {
            dense: vec![Rational::zero(); width],
            touched: Vec::new(),
            mark: vec![false; width],
        }
    }

    #[inline]
    pub fn add(&mut self, col: usize, v: &Rational) {
        if !self.mark[col] {
            self.mark[col] = true;
            self.touched.push(col as u32);
        }
        self.dense[col] += v;
    }

    pub fn add_scaled_row(&mut self, scale: &Rational, row: RowView<'_>) {
        for (c, v) in row.iter() {
            self.add(c, &(scale * v));
        }
    }

    /// Drains the accumulator into a canonical sparse row.
    pub fn take(&mut self) -> SparseRow {
        self.touched.sort_unstable();
        let mut out = Vec::with_capacity(self.touched.len());
        for &c in &self.touched {
            let v = std::mem::take(&mut self.dense[c as usize]);
            self.mark[c as usize] = false;
            if !v.is_zero() {
                out.push((c, v));
            }
        }
        self.touched.clear();
        out
    }
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(n, (0..n).map(|i| vec![(i as u32, Rational::one())]).collect())
    }

    /// Builds from canonical rows. Rows are trusted to be sorted, duplicate free
    /// and zero free; this is checked in debug builds.
    pub fn from_rows(ncols: usize, rows: Vec<SparseRow>) -> Self {
        let nrows = rows.len();
        let nnz: usize = rows.iter().map(|r| r.len()).sum();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for (c, v) in row {
                debug_assert!((c as usize) < ncols && !v.is_zero());
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Strict constructor: rejects out-of-range and duplicate coordinates,
    /// drops explicit zeros and sorts into canonical order.
    pub fn from_entries(
        nrows: usize,
        ncols: usize,
        mut entries: Vec<(usize, usize, Rational)>,
    ) -> Result<Self> {
        for (r, c, _) in &entries {
            if *r >= nrows || *c >= ncols {
                return Err(Error::Format(format!(
                    "entry ({r}, {c}) outside a {nrows}x{ncols} matrix"
                )));
            }
        }
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(Error::Format(format!(
                "duplicate entry at ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut rows: Vec<SparseRow> = vec![Vec::new(); nrows];
        for (r, c, v) in entries {
            if !v.is_zero() {
                rows[r].push((c as u32, v));
            }
        }
        Ok(Self::from_rows(ncols, rows))
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(
            ncols,
            rows.iter()
                .map(|r| {
                    assert_eq!(r.len(), ncols, "ragged dense matrix");
                    r.iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(c, v)| (c as u32, v.clone()))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let dense: Vec<Vec<Rational>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Rational::from(x)).collect())
            .collect();
        Self::from_dense(&dense)
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut out = vec![vec![Rational::zero(); self.ncols]; self.nrows];
        for (r, c, v) in self.iter() {
            out[r][c] = v.clone();
        }
        out
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Number of stored entries outside {-1, 0, 1}.
    pub fn nns(&self) -> usize {
        self.vals.iter().filter(|v| !v.is_singleton()).count()
    }

    pub fn row(&self, i: usize) -> RowView<'_> {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        RowView {
            cols: &self.cols[s..e],
            vals: &self.vals[s..e],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = RowView<'_>> + '_ {
        (0..self.nrows).map(move |i| self.row(i))
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        self.row(r).get(c).cloned().unwrap_or_default()
    }

    /// Row-major iteration over stored entries.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).iter().map(move |(c, v)| (r, c, v)))
    }

    pub fn values(&self) -> &[Rational] {
        &self.vals
    }

    pub fn to_rows(&self) -> Vec<SparseRow> {
        self.rows().map(|r| r.to_owned_row()).collect()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut rows: Vec<SparseRow> = vec![Vec::new(); self.ncols];
        for (r, c, v) in self.iter() {
            rows[c].push((r as u32, v.clone()));
        }
        Self::from_rows(self.nrows, rows)
    }

    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut acc = RowAccumulator::new(other.ncols);
        let rows = self
            .rows()
            .map(|row| {
                for (k, v) in row.iter() {
                    acc.add_scaled_row(v, other.row(k));
                }
                acc.take()
            })
            .collect();
        Ok(Self::from_rows(other.ncols, rows))
    }

    /// Kronecker product; row `i*B.nrows + k`, column `j*B.ncols + l`.
    pub fn kron(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut rows = Vec::with_capacity(self.nrows * other.nrows);
        for a in self.rows() {
            for b in other.rows() {
                let mut row = Vec::with_capacity(a.len() * b.len());
                for (j, x) in a.iter() {
                    for (l, y) in b.iter() {
                        row.push(((j * other.ncols + l) as u32, x * y));
                    }
                }
                rows.push(row);
            }
        }
        Self::from_rows(self.ncols * other.ncols, rows)
    }

    /// Relabels columns: old column `c` becomes `perm[c]`.
    pub fn permute_cols(&self, perm: &[usize]) -> SparseMatrix {
        assert_eq!(perm.len(), self.ncols);
        let rows = self
            .rows()
            .map(|row| {
                let mut r: SparseRow = row
                    .iter()
                    .map(|(c, v)| (perm[c] as u32, v.clone()))
                    .collect();
                r.sort_unstable_by_key(|e| e.0);
                r
            })
            .collect();
        Self::from_rows(self.ncols, rows)
    }

    pub fn select_rows(&self, idx: &[usize]) -> SparseMatrix {
        Self::from_rows(self.ncols, idx.iter().map(|&i| self.row(i).to_owned_row()).collect())
    }

    pub fn scale(&self, s: &Rational) -> SparseMatrix {
        if s.is_zero() {
            return Self::zeros(self.nrows, self.ncols);
        }
        let rows = self
            .rows()
            .map(|row| row.iter().map(|(c, v)| (c as u32, v * s)).collect())
            .collect();
        Self::from_rows(self.ncols, rows)
    }

    pub fn vstack(parts: &[&SparseMatrix]) -> Result<SparseMatrix> {
        let ncols = parts.first().map_or(0, |m| m.ncols);
        if parts.iter().any(|m| m.ncols != ncols) {
            return Err(Error::Dimension("vstack with differing column counts".into()));
        }
        let rows = parts.iter().flat_map(|m| m.to_rows()).collect();
        Ok(Self::from_rows(ncols, rows))
    }

    /// Applies the matrix to a dense rational vector.
    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.ncols);
        self.rows()
            .map(|row| {
                let mut acc = Rational::zero();
                for (c, v) in row.iter() {
                    acc += v * &x[c];
                }
                acc
            })
            .collect()
    }

    /// Checks the canonical-storage invariant.
    pub fn is_canonical(&self) -> bool {
        self.row_ptr.len() == self.nrows + 1
            && self.rows().all(|r| {
                r.cols.windows(2).all(|w| w[0] < w[1])
                    && r.cols.iter().all(|&c| (c as usize) < self.ncols)
                    && r.vals.iter().all(|v| !v.is_zero() && v.is_canonical())
            })
    }
}

/// Sum of two sparse rows.
pub fn add_rows(a: RowView<'_>, b: RowView<'_>) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a.cols[i] < b.cols[j]) {
            out.push((a.cols[i], a.vals[i].clone()));
            i += 1;
        } else if i == a.len() || b.cols[j] < a.cols[i] {
            out.push((b.cols[j], b.vals[j].clone()));
            j += 1;
        } else {
            let s = &a.vals[i] + &b.vals[j];
            if !s.is_zero() {
                out.push((a.cols[i], s));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    #[test]
    fn strict_constructor_rejects_bad_coordinates() {
        assert!(SparseMatrix::from_entries(2, 2, vec![(2, 0, r(1))]).is_err());
        assert!(SparseMatrix::from_entries(2, 2, vec![(0, 1, r(1)), (0, 1, r(2))]).is_err());
        let m = SparseMatrix::from_entries(2, 3, vec![(1, 2, r(5)), (0, 1, r(0)), (0, 0, r(1))])
            .unwrap();
        assert_eq!(m.nnz(), 2);
        assert!(m.is_canonical());
        assert_eq!(m.get(1, 2), r(5));
    }

    #[test]
    fn kron_and_matmul_agree_with_dense() {
        let a = SparseMatrix::from_i64(&[&[1, 2], &[0, -1]]);
        let b = SparseMatrix::from_i64(&[&[0, 3], &[4, 0]]);
        let k = a.kron(&b);
        assert_eq!(k.get(0, 1), r(3));
        assert_eq!(k.get(1, 2), r(8));
        assert_eq!(k.get(3, 2), r(-4));
        assert_eq!(k.nnz(), 6);
        let p = a.matmul(&b).unwrap();
        assert_eq!(p.to_dense(), vec![vec![r(8), r(3)], vec![r(-4), r(0)]]);
        assert_eq!(p.transpose().transpose(), p);
    }

    #[test]
    fn row_sum_cancels() {
        let m = SparseMatrix::from_i64(&[&[1, -1, 0], &[-1, 1, 2]]);
        assert_eq!(add_rows(m.row(0), m.row(1)), vec![(2, r(2))]);
    }

    #[test]
    fn nns_counts_non_singletons() {
        let m = SparseMatrix::from_dense(&[vec![r(1), r(-1), Rational::new(1, 2), r(3)]]);
        assert_eq!(m.nnz(), 4);
        assert_eq!(m.nns(), 2);
    }
}
