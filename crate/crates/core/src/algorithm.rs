//! The bilinear-algorithm data model.
//!
//! An algorithm for `m x n` times `n x p` is a triple of sparse matrices
//! `U` (t x mn), `V` (t x np), `W` (t x pm) such that for all A (m x n),
//! B (n x p) and C (p x m)
//!
//! ```text
//! tr(ABC) = sum_r (U vec A)_r (V vec B)_r (W vec C)_r
//! ```
//!
//! with row-major vectorization. Reading off the coefficient of `C[k][i]`
//! gives the product entry `(AB)[i][k]`, so decoding uses column `k*m + i`
//! of `W`.

use serde::{Deserialize, Serialize};

use crate::dense::Matrix;
use crate::domain::{Domain, RationalDomain};
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sparse::SparseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
    pub p: usize,
}

impl Dims {
    pub fn new(m: usize, n: usize, p: usize) -> Self {
        Dims { m, n, p }
    }

    pub fn square(n: usize) -> Self {
        Dims { m: n, n, p: n }
    }

    pub fn a_len(&self) -> usize {
        self.m * self.n
    }

    pub fn b_len(&self) -> usize {
        self.n * self.p
    }

    pub fn c_len(&self) -> usize {
        self.p * self.m
    }

    /// Dimensions of the rotated algorithm.
    pub fn rotated(&self) -> Dims {
        Dims::new(self.n, self.p, self.m)
    }
}

/// Where a row of a generated algorithm came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowTag {
    /// A product of an aggregation table; `table` is 1 or 2.
    Aggregation {
        table: u8,
        triple: (usize, usize, usize),
        barred: bool,
    },
    /// Slot of the diagonal correction block for index `i`.
    CorrectionDiag { i: usize, slot: u8 },
    /// Slot of the 2x2 trace that cancels cell `(i, j)`.
    Cancellation { cell: (usize, usize), slot: u8 },
    Composed {
        left: Box<RowTag>,
        right: Box<RowTag>,
    },
    Untagged,
}

/// Verification metadata. Only the verifier creates the base variants; the
/// algebra operations wrap existing certificates in `Derived`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Certificate {
    Exact,
    Brent,
    Random { trials: u32, prime: u64, seed: u64 },
    Multiply { samples: u32, levels: u32, seed: u64 },
    Derived { op: String, from: Vec<Certificate> },
}

impl Certificate {
    pub(crate) fn derive(op: &str, from: &[Option<&Certificate>]) -> Option<Certificate> {
        let from: Option<Vec<Certificate>> = from.iter().map(|c| c.cloned()).collect();
        from.map(|from| Certificate::Derived {
            op: op.to_string(),
            from,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearAlgorithm {
    dims: Dims,
    u: SparseMatrix,
    v: SparseMatrix,
    w: SparseMatrix,
    tags: Vec<RowTag>,
    certificate: Option<Certificate>,
}

impl BilinearAlgorithm {
    pub fn new(dims: Dims, u: SparseMatrix, v: SparseMatrix, w: SparseMatrix) -> Result<Self> {
        let t = u.nrows();
        Self::with_tags(dims, u, v, w, vec![RowTag::Untagged; t])
    }

    pub fn with_tags(
        dims: Dims,
        u: SparseMatrix,
        v: SparseMatrix,
        w: SparseMatrix,
        tags: Vec<RowTag>,
    ) -> Result<Self> {
        let t = u.nrows();
        if v.nrows() != t || w.nrows() != t || tags.len() != t {
            return Err(Error::Dimension(format!(
                "row counts differ: U {t}, V {}, W {}, tags {}",
                v.nrows(),
                w.nrows(),
                tags.len()
            )));
        }
        for (name, mat, want) in [
            ("U", &u, dims.a_len()),
            ("V", &v, dims.b_len()),
            ("W", &w, dims.c_len()),
        ] {
            if mat.ncols() != want {
                return Err(Error::Dimension(format!(
                    "{name} has {} columns, expected {want} for dims {}x{}x{}",
                    mat.ncols(),
                    dims.m,
                    dims.n,
                    dims.p
                )));
            }
        }
        Ok(BilinearAlgorithm {
            dims,
            u,
            v,
            w,
            tags,
            certificate: None,
        })
    }

    /// The trivial algorithm for scalar multiplication.
    pub fn unit() -> Self {
        let one = SparseMatrix::identity(1);
        Self::new(Dims::square(1), one.clone(), one.clone(), one).expect("shapes agree")
    }

    /// The schoolbook algorithm with `m*n*p` products.
    pub fn naive(dims: Dims) -> Self {
        let Dims { m, n, p } = dims;
        let mut u = Vec::new();
        let mut v = Vec::new();
        let mut w = Vec::new();
        for i in 0..m {
            for j in 0..n {
                for k in 0..p {
                    u.push(vec![((i * n + j) as u32, Rational::one())]);
                    v.push(vec![((j * p + k) as u32, Rational::one())]);
                    w.push(vec![((k * m + i) as u32, Rational::one())]);
                }
            }
        }
        Self::new(
            dims,
            SparseMatrix::from_rows(m * n, u),
            SparseMatrix::from_rows(n * p, v),
            SparseMatrix::from_rows(p * m, w),
        )
        .expect("shapes agree")
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Rank: the number of multiplications.
    pub fn t(&self) -> usize {
        self.u.nrows()
    }

    pub fn u(&self) -> &SparseMatrix {
        &self.u
    }

    pub fn v(&self) -> &SparseMatrix {
        &self.v
    }

    pub fn w(&self) -> &SparseMatrix {
        &self.w
    }

    pub fn tags(&self) -> &[RowTag] {
        &self.tags
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        self.certificate.as_ref()
    }

    pub fn is_verified(&self) -> bool {
        self.certificate.is_some()
    }

    pub(crate) fn set_certificate(&mut self, c: Option<Certificate>) {
        self.certificate = c;
    }

    /// Drops verification metadata, e.g. after an external edit.
    pub fn without_certificate(mut self) -> Self {
        self.certificate = None;
        self
    }

    pub fn into_parts(self) -> (Dims, SparseMatrix, SparseMatrix, SparseMatrix, Vec<RowTag>) {
        (self.dims, self.u, self.v, self.w, self.tags)
    }

    /// `<U vec A, V vec B, W vec C>` over an arbitrary domain.
    pub fn trilinear_in<D: Domain>(
        &self,
        d: &D,
        a: &Matrix<D::Elem>,
        b: &Matrix<D::Elem>,
        c: &Matrix<D::Elem>,
    ) -> Result<D::Elem> {
        let Dims { m, n, p } = self.dims;
        check_shape("A", a, m, n)?;
        check_shape("B", b, n, p)?;
        check_shape("C", c, p, m)?;
        let ua = apply_rows(d, &self.u, a.data())?;
        let vb = apply_rows(d, &self.v, b.data())?;
        let wc = apply_rows(d, &self.w, c.data())?;
        let mut acc = d.zero();
        for r in 0..self.t() {
            acc = d.add(&acc, &d.mul(&d.mul(&ua[r], &vb[r]), &wc[r]));
        }
        Ok(acc)
    }

    pub fn trilinear_value(
        &self,
        a: &Matrix<Rational>,
        b: &Matrix<Rational>,
        c: &Matrix<Rational>,
    ) -> Result<Rational> {
        self.trilinear_in(&RationalDomain, a, b, c)
    }

    /// One level of the algorithm applied to scalar operands: returns `A*B`.
    pub fn apply_in<D: Domain>(
        &self,
        d: &D,
        a: &Matrix<D::Elem>,
        b: &Matrix<D::Elem>,
    ) -> Result<Matrix<D::Elem>> {
        let Dims { m, n, p } = self.dims;
        check_shape("A", a, m, n)?;
        check_shape("B", b, n, p)?;
        let ua = apply_rows(d, &self.u, a.data())?;
        let vb = apply_rows(d, &self.v, b.data())?;
        let prods: Vec<D::Elem> = ua.iter().zip(&vb).map(|(x, y)| d.mul(x, y)).collect();
        let mut c = Matrix::filled(m, p, d.zero());
        for (r, prod) in prods.iter().enumerate() {
            for (col, coef) in self.w.row(r).iter() {
                // column k*m + i holds product entry (i, k)
                let (k, i) = (col / m, col % m);
                let x = d.mul(&d.from_rational(coef)?, prod);
                let cur = d.add(c.get(i, k), &x);
                c.set(i, k, cur);
            }
        }
        Ok(c)
    }

    pub fn apply_bilinear(&self, a: &Matrix<Rational>, b: &Matrix<Rational>) -> Result<Matrix<Rational>> {
        self.apply_in(&RationalDomain, a, b)
    }

    /// Whether rows `i` and `j` agree in at least two of U, V, W.
    pub fn are_kin(&self, i: usize, j: usize) -> bool {
        let eq_u = self.u.row(i) == self.u.row(j);
        let eq_v = self.v.row(i) == self.v.row(j);
        let eq_w = self.w.row(i) == self.w.row(j);
        (eq_u as u8 + eq_v as u8 + eq_w as u8) >= 2
    }

    /// Debug check of the canonical-storage invariant of all three matrices.
    pub fn is_canonical(&self) -> bool {
        self.u.is_canonical() && self.v.is_canonical() && self.w.is_canonical()
    }
}

fn check_shape<T: Clone>(name: &str, x: &Matrix<T>, r: usize, c: usize) -> Result<()> {
    if x.rows() != r || x.cols() != c {
        return Err(Error::Dimension(format!(
            "{name} is {}x{}, expected {r}x{c}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

fn apply_rows<D: Domain>(d: &D, m: &SparseMatrix, x: &[D::Elem]) -> Result<Vec<D::Elem>> {
    m.rows()
        .map(|row| {
            let mut acc = d.zero();
            for (c, v) in row.iter() {
                acc = d.add(&acc, &d.mul(&d.from_rational(v)?, &x[c]));
            }
            Ok(acc)
        })
        .collect()
}

/// One cancellation (or diagonal) 2x2 trace of a generated algorithm: the
/// local algorithm applied to four scaled entries of the transformed
/// operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceCell {
    pub cell: (usize, usize),
    /// 4 x s0 maps from transformed coordinates to the local operands.
    pub e_a: SparseMatrix,
    pub e_b: SparseMatrix,
    pub e_c: SparseMatrix,
    pub local: BilinearAlgorithm,
    /// Index of the cell's first row in the generated algorithm.
    pub first_row: usize,
}

impl TraceCell {
    /// The rows this cell contributes, in transformed coordinates.
    pub fn rows(&self) -> Result<(SparseMatrix, SparseMatrix, SparseMatrix)> {
        Ok((
            self.local.u().matmul(&self.e_a)?,
            self.local.v().matmul(&self.e_b)?,
            self.local.w().matmul(&self.e_c)?,
        ))
    }

    /// The same maps pulled back through a basis transformation.
    pub fn pulled_back(&self, phi: &SparseMatrix) -> Result<TraceCell> {
        Ok(TraceCell {
            cell: self.cell,
            e_a: self.e_a.matmul(phi)?,
            e_b: self.e_b.matmul(phi)?,
            e_c: self.e_c.matmul(phi)?,
            local: self.local.clone(),
            first_row: self.first_row,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_algorithm_multiplies() {
        let alg = BilinearAlgorithm::naive(Dims::new(2, 3, 4));
        assert_eq!(alg.t(), 24);
        let a = Matrix::from_fn(2, 3, |i, j| Rational::from((i * 3 + j) as i64 - 2));
        let b = Matrix::from_fn(3, 4, |i, j| Rational::new((i + 2 * j) as i64, 3));
        let c = Matrix::from_fn(4, 2, |i, j| Rational::from((i * j) as i64 + 1));
        let ab = a.mul(&b).unwrap();
        assert_eq!(alg.apply_bilinear(&a, &b).unwrap(), ab);
        assert_eq!(alg.trilinear_value(&a, &b, &c).unwrap(), ab.mul(&c).unwrap().trace());
    }

    #[test]
    fn shape_errors() {
        let alg = BilinearAlgorithm::unit();
        let a = Matrix::<Rational>::zeros(2, 2);
        assert!(matches!(alg.apply_bilinear(&a, &a), Err(Error::Dimension(_))));
        let bad = BilinearAlgorithm::new(
            Dims::square(2),
            SparseMatrix::zeros(1, 4),
            SparseMatrix::zeros(1, 4),
            SparseMatrix::zeros(1, 3),
        );
        assert!(bad.is_err());
    }

    #[test]
    fn tags_serialize_tagged() {
        let t = RowTag::Aggregation {
            table: 1,
            triple: (0, 1, 2),
            barred: true,
        };
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"kind\":\"aggregation\""));
        assert_eq!(serde_json::from_str::<RowTag>(&s).unwrap(), t);
    }
}
