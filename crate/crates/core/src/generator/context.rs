use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sparse::SparseMatrix;

/// Index bookkeeping shared by all constructions for one base size `n0`.
///
/// Transformed operands are `(n0+2) x (n0+2)`, made of four `d x d`
/// quadrants with `d = n0/2 + 1`. Entry `(p, q)` of a transformed operand
/// has coordinate `p * (n0+2) + q`.
#[derive(Clone, Debug)]
pub struct AggregationContext {
    n0: usize,
    d: usize,
    gamma: Rational,
}

impl AggregationContext {
    pub fn new(n0: usize) -> Result<Self> {
        if n0 < 2 || n0 % 2 == 1 || n0 == 16 {
            return Err(Error::Degenerate(n0));
        }
        let d = n0 / 2 + 1;
        let gamma = Rational::one() - Rational::new(9, d as i64);
        Ok(AggregationContext { n0, d, gamma })
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Quadrant size `n0/2 + 1`.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Side of the transformed operands, `n0 + 2`.
    pub fn side(&self) -> usize {
        2 * self.d
    }

    pub fn s0(&self) -> usize {
        self.side() * self.side()
    }

    /// Diagonal-cell scaling `1 - 9/d`.
    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }

    /// The partner index in the other quadrant: `i + d mod 2d`.
    #[inline]
    pub fn bar(&self, i: usize) -> usize {
        (i + self.d) % (2 * self.d)
    }

    #[inline]
    pub fn coord(&self, p: usize, q: usize) -> usize {
        p * self.side() + q
    }

    /// Triples of the first aggregation table: `i <= j < k` or `k < j <= i`.
    pub fn first_table(&self) -> Vec<(usize, usize, usize)> {
        let d = self.d;
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if (i <= j && j < k) || (k < j && j <= i) {
                        out.push((i, j, k));
                    }
                }
            }
        }
        out
    }

    /// All triples of `[d]^3` (the second table ranges over these, each
    /// used unbarred and barred).
    pub fn second_table(&self) -> Vec<(usize, usize, usize)> {
        let d = self.d;
        let mut out = Vec::with_capacity(d * d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    out.push((i, j, k));
                }
            }
        }
        out
    }

    /// Off-diagonal cells `(i, j)`, `i != j`, in row-major order.
    pub fn off_diagonal_cells(&self) -> Vec<(usize, usize)> {
        let d = self.d;
        (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect()
    }
}

/// The left and right factors and the matrix of `X -> (I2 (x) L) X (I2 (x) R)`
/// on row-major coordinates.
pub struct Phi {
    pub left: Matrix<Rational>,
    pub right: Matrix<Rational>,
    pub matrix: SparseMatrix,
}

/// `L = [I; -1^T]` is `d x (d-1)` and `R = [I - J/d | -1/d]` is `(d-1) x d`,
/// so `R L = I` and every quadrant of the image has zero row and column sums.
pub fn build_phi(n0: usize) -> Result<Phi> {
    let ctx = AggregationContext::new(n0)?;
    let d = ctx.d();
    let h = d - 1;
    let inv_d = Rational::new(1, d as i64);
    let left = Matrix::from_fn(d, h, |r, c| {
        if r == h {
            -Rational::one()
        } else if r == c {
            Rational::one()
        } else {
            Rational::zero()
        }
    });
    let right = Matrix::from_fn(h, d, |r, c| {
        let diag = if r == c { Rational::one() } else { Rational::zero() };
        if c == h {
            -&inv_d
        } else {
            diag - &inv_d
        }
    });
    let big_l = Matrix::identity(2).kron(&left);
    let big_r = Matrix::identity(2).kron(&right);
    let side = ctx.side();
    let mut rows = Vec::with_capacity(side * side);
    for p in 0..side {
        for q in 0..side {
            let mut row = Vec::new();
            for a in 0..n0 {
                let l = big_l.get(p, a);
                if l.is_zero() {
                    continue;
                }
                for b in 0..n0 {
                    let r = big_r.get(b, q);
                    if !r.is_zero() {
                        row.push(((a * n0 + b) as u32, l * r));
                    }
                }
            }
            rows.push(row);
        }
    }
    Ok(Phi {
        left,
        right,
        matrix: SparseMatrix::from_rows(n0 * n0, rows),
    })
}
