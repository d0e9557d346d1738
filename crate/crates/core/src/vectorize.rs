//! Recursive block-row-major flattening of matrices.
//!
//! A matrix of size `m0^l x n0^l` is split into an `m0 x n0` grid of blocks;
//! the blocks are taken in row-major order and each block is flattened the
//! same way. At `l = 1` this is plain row-major order.

use crate::dense::Matrix;
use crate::error::{Error, Result};

/// Returns `l` with `base^l == n`, if any. `base = 1` only matches `n = 1` (l = 0).
pub fn exact_level(n: usize, base: usize) -> Option<u32> {
    if base == 0 {
        return None;
    }
    if base == 1 {
        return (n == 1).then_some(0);
    }
    let mut l = 0;
    let mut x = 1usize;
    while x < n {
        x = x.checked_mul(base)?;
        l += 1;
    }
    (x == n).then_some(l)
}

fn levels_for(rows: usize, cols: usize, m0: usize, n0: usize) -> Result<u32> {
    let l = if m0 >= 2 {
        exact_level(rows, m0)
    } else if n0 >= 2 {
        exact_level(cols, n0)
    } else {
        Some(0)
    };
    match l {
        Some(l) if m0.checked_pow(l) == Some(rows) && n0.checked_pow(l) == Some(cols) => Ok(l),
        _ => Err(Error::Dimension(format!(
            "{rows}x{cols} is not {m0}^l x {n0}^l for a common l"
        ))),
    }
}

/// Position of entry (i, j) in the recursive flattening.
fn position(mut i: usize, mut j: usize, m0: usize, n0: usize, level: u32) -> usize {
    let mut pos = 0usize;
    let mut bh = m0.pow(level);
    let mut bw = n0.pow(level);
    for _ in 0..level {
        bh /= m0;
        bw /= n0;
        let (bi, bj) = (i / bh, j / bw);
        pos = pos * (m0 * n0) + bi * n0 + bj;
        i %= bh;
        j %= bw;
    }
    pos
}

pub fn vectorize<T: Clone>(a: &Matrix<T>, m0: usize, n0: usize) -> Result<Vec<T>> {
    let l = levels_for(a.rows(), a.cols(), m0, n0)?;
    let mut out: Vec<Option<T>> = vec![None; a.rows() * a.cols()];
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out[position(i, j, m0, n0, l)] = Some(a.get(i, j).clone());
        }
    }
    Ok(out.into_iter().map(|x| x.expect("bijective layout")).collect())
}

pub fn matricize<T: Clone>(v: &[T], m0: usize, n0: usize, level: u32) -> Result<Matrix<T>> {
    let (rows, cols) = (m0.pow(level), n0.pow(level));
    if v.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "vector of length {} cannot form a {rows}x{cols} matrix",
            v.len()
        )));
    }
    Ok(Matrix::from_fn(rows, cols, |i, j| {
        v[position(i, j, m0, n0, level)].clone()
    }))
}
