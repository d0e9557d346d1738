//! 2x2x2 algorithms of rank 7: Strassen's instance and members of its
//! de Groote orbit with prescribed first encoding rows.

use crate::algorithm::{BilinearAlgorithm, Dims};
use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::ops::{degroote_transform, rotate};
use crate::rational::Rational;
use crate::sparse::SparseMatrix;

const U_STR: [[i64; 4]; 7] = [
    [1, 0, 0, 1],
    [0, 0, 0, 1],
    [0, 1, 0, 1],
    [1, -1, 0, 0],
    [1, 0, 1, 0],
    [1, 0, 0, 0],
    [0, 0, 1, -1],
];
const V_STR: [[i64; 4]; 7] = [
    [1, 0, 0, 1],
    [1, 0, 1, 0],
    [0, 0, -1, 1],
    [0, 0, 0, 1],
    [1, -1, 0, 0],
    [0, -1, 0, -1],
    [1, 0, 0, 0],
];
const W_STR: [[i64; 4]; 7] = [
    [1, 0, 0, 1],
    [-1, 1, 0, 0],
    [-1, 0, 0, 0],
    [-1, 0, -1, 0],
    [0, 0, 0, -1],
    [0, 0, -1, 1],
    [0, 1, 0, 1],
];

fn from_table(t: &[[i64; 4]; 7]) -> SparseMatrix {
    let rows: Vec<&[i64]> = t.iter().map(|r| &r[..]).collect();
    SparseMatrix::from_i64(&rows)
}

pub fn strassen() -> BilinearAlgorithm {
    BilinearAlgorithm::new(
        Dims::square(2),
        from_table(&U_STR),
        from_table(&V_STR),
        from_table(&W_STR),
    )
    .expect("constant shapes")
}

/// The 2x2 matrix whose row-major vectorization is the given row.
pub fn row_matrix(m: &SparseMatrix, r: usize) -> Matrix<Rational> {
    Matrix::from_fn(2, 2, |i, j| m.get(r, 2 * i + j))
}

fn require_2227(alg: &BilinearAlgorithm) -> Result<()> {
    if alg.dims() != Dims::square(2) || alg.t() != 7 {
        return Err(Error::Dimension(format!(
            "expected a 2x2x2 rank-7 algorithm, got {:?} with rank {}",
            alg.dims(),
            alg.t()
        )));
    }
    Ok(())
}

/// Moves `alg` within its de Groote orbit so that its first U row becomes
/// `vec(k)`, leaving W untouched.
pub fn with_first_row_u(alg: &BilinearAlgorithm, k: &Matrix<Rational>) -> Result<BilinearAlgorithm> {
    require_2227(alg)?;
    k.inverse()
        .map_err(|_| Error::Singular("prescribed first row is singular".into()))?;
    let t_u = row_matrix(alg.u(), 0);
    let t_u_inv_t = t_u
        .inverse()
        .map_err(|_| Error::Singular("first U row of the input is singular".into()))?
        .transpose();
    let r = k.transpose().mul(&t_u_inv_t)?;
    degroote_transform(alg, &r)
}

/// A 2x2x2 rank-7 algorithm whose first U row is `vec(k_u)` and first V row
/// is `vec(k_v)`, obtained from Strassen's algorithm by two orbit moves.
pub fn with_prescribed_rows(k_u: &Matrix<Rational>, k_v: &Matrix<Rational>) -> Result<BilinearAlgorithm> {
    let step = with_first_row_u(&strassen(), k_u)?;
    // in the rotated algorithm V plays the role of U and U that of W
    let rotated = with_first_row_u(&rotate(&step), k_v)?;
    Ok(rotate(&rotate(&rotated)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rm(v: [i64; 4]) -> Matrix<Rational> {
        Matrix::from_i64(2, 2, &v)
    }

    #[test]
    fn first_rows_of_strassen() {
        let s = strassen();
        assert_eq!(row_matrix(s.u(), 0), rm([1, 0, 0, 1]));
        assert_eq!(row_matrix(s.v(), 0), rm([1, 0, 0, 1]));
    }

    #[test]
    fn identity_move_is_noop() {
        let s = strassen();
        assert_eq!(with_first_row_u(&s, &row_matrix(s.u(), 0)).unwrap(), s);
        let same = with_prescribed_rows(&rm([1, 0, 0, 1]), &rm([1, 0, 0, 1])).unwrap();
        assert_eq!(same, s);
    }

    #[test]
    fn swap_first_row() {
        let s = strassen();
        let out = with_first_row_u(&s, &rm([0, 1, 1, 0])).unwrap();
        assert_eq!(row_matrix(out.u(), 0), rm([0, 1, 1, 0]));
        assert_eq!(out.w(), s.w());
    }

    #[test]
    fn singular_inputs_rejected() {
        assert!(matches!(
            with_prescribed_rows(&rm([1, 1, 1, 1]), &rm([1, 0, 0, 1])),
            Err(Error::Singular(_))
        ));
    }
}
