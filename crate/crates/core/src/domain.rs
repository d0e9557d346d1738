//! Scalar domains for executing and checking algorithms, and sparse matrices
//! whose coefficients have been projected into a domain.

use std::fmt;

use rand::Rng;

use crate::error::Result;
use crate::field::PrimeField;
use crate::rational::Rational;
use crate::sparse::SparseMatrix;

pub trait Domain: Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn name(&self) -> &'static str;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn from_rational(&self, r: &Rational) -> Result<Self::Elem>;
    /// A random element suitable for identity testing.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
    /// Whether results are exact (and so can be compared with `==`).
    fn is_exact(&self) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RationalDomain;

impl Domain for RationalDomain {
    type Elem = Rational;

    fn name(&self) -> &'static str {
        "rational"
    }
    fn zero(&self) -> Rational {
        Rational::zero()
    }
    fn one(&self) -> Rational {
        Rational::one()
    }
    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }
    fn sub(&self, a: &Rational, b: &Rational) -> Rational {
        a - b
    }
    fn neg(&self, a: &Rational) -> Rational {
        -a
    }
    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }
    fn from_rational(&self, r: &Rational) -> Result<Rational> {
        Ok(r.clone())
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Rational {
        Rational::new(rng.gen_range(-20..=20), rng.gen_range(1..=6))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PrimeDomain(pub PrimeField);

impl Domain for PrimeDomain {
    type Elem = u64;

    fn name(&self) -> &'static str {
        "prime"
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        self.0.add(*a, *b)
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        self.0.sub(*a, *b)
    }
    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        self.0.neg(*a)
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.0.mul(*a, *b)
    }
    fn from_rational(&self, r: &Rational) -> Result<u64> {
        self.0.from_rational(r)
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.0.random(rng)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct FloatDomain;

impl Domain for FloatDomain {
    type Elem = f64;

    fn name(&self) -> &'static str {
        "float"
    }
    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn sub(&self, a: &f64, b: &f64) -> f64 {
        a - b
    }
    fn neg(&self, a: &f64) -> f64 {
        -a
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn from_rational(&self, r: &Rational) -> Result<f64> {
        Ok(r.to_f64())
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.gen_range(-1.0..1.0)
    }
    fn is_exact(&self) -> bool {
        false
    }
}

/// A coefficient after projection; unit coefficients are kept symbolic so
/// that applying them costs an addition only.
#[derive(Clone, Debug, PartialEq)]
pub enum Coef<E> {
    One,
    MinusOne,
    Scaled(E),
}

/// A sparse matrix with coefficients in a domain, in compressed-row form.
#[derive(Clone, Debug)]
pub struct CompiledMatrix<E> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    coefs: Vec<Coef<E>>,
}

impl<E: Clone + Send + Sync> CompiledMatrix<E> {
    pub fn compile<D: Domain<Elem = E>>(d: &D, m: &SparseMatrix) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(m.nrows() + 1);
        let mut cols = Vec::with_capacity(m.nnz());
        let mut coefs = Vec::with_capacity(m.nnz());
        row_ptr.push(0);
        for row in m.rows() {
            for (c, v) in row.iter() {
                cols.push(c as u32);
                coefs.push(if v.is_one() {
                    Coef::One
                } else if (-v).is_one() {
                    Coef::MinusOne
                } else {
                    Coef::Scaled(d.from_rational(v)?)
                });
            }
            row_ptr.push(cols.len());
        }
        Ok(CompiledMatrix {
            nrows: m.nrows(),
            ncols: m.ncols(),
            row_ptr,
            cols,
            coefs,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn transpose(&self) -> Self {
        let mut rows: Vec<Vec<(u32, Coef<E>)>> = vec![Vec::new(); self.ncols];
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                rows[self.cols[k] as usize].push((r as u32, self.coefs[k].clone()));
            }
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut coefs = Vec::with_capacity(self.cols.len());
        for row in rows {
            for (c, v) in row {
                cols.push(c);
                coefs.push(v);
            }
            row_ptr.push(cols.len());
        }
        CompiledMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            cols,
            coefs,
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, &Coef<E>)> + '_ {
        let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.cols[s..e]
            .iter()
            .map(|&c| c as usize)
            .zip(self.coefs[s..e].iter())
    }

    pub fn row_len(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    /// Linear operations needed to apply this matrix once: per nonempty row,
    /// one addition fewer than its length, plus one multiplication per
    /// non-unit coefficient.
    pub fn linear_cost(&self) -> u64 {
        let adds: u64 = (0..self.nrows)
            .map(|r| self.row_len(r).saturating_sub(1) as u64)
            .sum();
        let muls = self
            .coefs
            .iter()
            .filter(|c| matches!(c, Coef::Scaled(_)))
            .count() as u64;
        adds + muls
    }

    /// `y = M x` over the domain.
    pub fn apply<D: Domain<Elem = E>>(&self, d: &D, x: &[E]) -> Vec<E> {
        assert_eq!(x.len(), self.ncols, "operand length");
        (0..self.nrows)
            .map(|r| {
                let mut acc = d.zero();
                for (c, k) in self.row(r) {
                    acc = match k {
                        Coef::One => d.add(&acc, &x[c]),
                        Coef::MinusOne => d.sub(&acc, &x[c]),
                        Coef::Scaled(v) => d.add(&acc, &d.mul(v, &x[c])),
                    };
                }
                acc
            })
            .collect()
    }
}

/// Projects a dense rational vector into a domain.
pub fn project<D: Domain>(d: &D, v: &[Rational]) -> Result<Vec<D::Elem>> {
    v.iter().map(|x| d.from_rational(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compiled_apply_matches_rational() {
        let m = SparseMatrix::from_dense(&[
            vec![Rational::one(), Rational::new(-1, 1), Rational::new(3, 2)],
            vec![Rational::zero(), Rational::zero(), Rational::zero()],
        ]);
        let x = vec![Rational::from(4), Rational::from(1), Rational::from(2)];
        let rd = RationalDomain;
        let c = CompiledMatrix::compile(&rd, &m).unwrap();
        assert_eq!(c.apply(&rd, &x), m.mul_vec(&x));
        assert_eq!(c.linear_cost(), 3);
        let pd = PrimeDomain(PrimeField::new(101).unwrap());
        let cp = CompiledMatrix::compile(&pd, &m).unwrap();
        let xp = project(&pd, &x).unwrap();
        assert_eq!(cp.apply(&pd, &xp), vec![6, 0]);
        assert_eq!(cp.transpose().transpose().apply(&pd, &xp), vec![6, 0]);
    }
}
