//! Modular evaluation of algorithms that may be too large to materialize:
//! plain, decomposed, lazily composed, and two-step algorithms with
//! substituted 4x4x4 blocks.

use crate::algorithm::{BilinearAlgorithm, Dims};
use crate::decomposed::DecomposedAlgorithm;
use crate::domain::{CompiledMatrix, PrimeDomain};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::generator::{Generated, New25b};
use crate::ops::kron_to_row_major;
use crate::sparse::SparseMatrix;

/// Something whose trilinear form can be evaluated modulo a prime.
pub trait Scheme: Sync {
    fn dims(&self) -> Dims;
    fn rank(&self) -> u128;
    fn evaluator(&self, f: PrimeField) -> Result<Box<dyn Evaluator + '_>>;
}

/// Encoders of a scheme with coefficients projected into a prime field.
/// Operands are row-major.
pub trait Evaluator {
    fn encode_a(&self, a: &[u64]) -> Vec<u64>;
    fn encode_b(&self, b: &[u64]) -> Vec<u64>;
    fn encode_c(&self, c: &[u64]) -> Vec<u64>;
    fn field(&self) -> PrimeField;

    /// `sum_r (U a)_r (V b)_r (W c)_r`.
    fn trilinear(&self, a: &[u64], b: &[u64], c: &[u64]) -> u64 {
        let f = self.field();
        let (x, y, z) = (self.encode_a(a), self.encode_b(b), self.encode_c(c));
        dot3(&f, &x, &y, &z)
    }
}

pub(crate) fn dot3(f: &PrimeField, x: &[u64], y: &[u64], z: &[u64]) -> u64 {
    x.iter()
        .zip(y)
        .zip(z)
        .fold(0, |acc, ((a, b), c)| f.add(acc, f.mul(f.mul(*a, *b), *c)))
}

struct MatrixEval {
    f: PrimeField,
    d: PrimeDomain,
    u: CompiledMatrix<u64>,
    v: CompiledMatrix<u64>,
    w: CompiledMatrix<u64>,
    /// Optional shared transformation applied before the three encoders.
    pre: Option<CompiledMatrix<u64>>,
}

impl MatrixEval {
    fn new(
        f: PrimeField,
        u: &SparseMatrix,
        v: &SparseMatrix,
        w: &SparseMatrix,
        pre: Option<&SparseMatrix>,
    ) -> Result<Self> {
        let d = PrimeDomain(f);
        Ok(MatrixEval {
            f,
            d,
            u: CompiledMatrix::compile(&d, u)?,
            v: CompiledMatrix::compile(&d, v)?,
            w: CompiledMatrix::compile(&d, w)?,
            pre: pre.map(|p| CompiledMatrix::compile(&d, p)).transpose()?,
        })
    }

    fn run(&self, m: &CompiledMatrix<u64>, x: &[u64]) -> Vec<u64> {
        match &self.pre {
            Some(p) => m.apply(&self.d, &p.apply(&self.d, x)),
            None => m.apply(&self.d, x),
        }
    }
}

impl Evaluator for MatrixEval {
    fn encode_a(&self, a: &[u64]) -> Vec<u64> {
        self.run(&self.u, a)
    }
    fn encode_b(&self, b: &[u64]) -> Vec<u64> {
        self.run(&self.v, b)
    }
    fn encode_c(&self, c: &[u64]) -> Vec<u64> {
        self.run(&self.w, c)
    }
    fn field(&self) -> PrimeField {
        self.f
    }
}

impl Scheme for BilinearAlgorithm {
    fn dims(&self) -> Dims {
        BilinearAlgorithm::dims(self)
    }
    fn rank(&self) -> u128 {
        self.t() as u128
    }
    fn evaluator(&self, f: PrimeField) -> Result<Box<dyn Evaluator + '_>> {
        Ok(Box::new(MatrixEval::new(f, self.u(), self.v(), self.w(), None)?))
    }
}

impl Scheme for DecomposedAlgorithm {
    fn dims(&self) -> Dims {
        DecomposedAlgorithm::dims(self)
    }
    fn rank(&self) -> u128 {
        self.t() as u128
    }
    fn evaluator(&self, f: PrimeField) -> Result<Box<dyn Evaluator + '_>> {
        Ok(Box::new(MatrixEval::new(
            f,
            self.u_phi(),
            self.v_phi(),
            self.w_phi(),
            Some(self.phi()),
        )?))
    }
}

impl Scheme for Generated {
    fn dims(&self) -> Dims {
        self.decomposed.dims()
    }
    fn rank(&self) -> u128 {
        self.t() as u128
    }
    fn evaluator(&self, f: PrimeField) -> Result<Box<dyn Evaluator + '_>> {
        self.decomposed.evaluator(f)
    }
}

/// Kronecker composition evaluated without building the composed matrices.
pub struct LazyCompose<'a> {
    pub outer: &'a dyn Scheme,
    pub inner: &'a dyn Scheme,
}

struct ComposeEval<'a> {
    outer: Box<dyn Evaluator + 'a>,
    inner: Box<dyn Evaluator + 'a>,
    d1: Dims,
    d2: Dims,
}

impl ComposeEval<'_> {
    /// `x` is a row-major `(r1 r2) x (c1 c2)` operand; `enc_*` pick the
    /// matching encoder of each factor.
    fn encode(
        &self,
        x: &[u64],
        (r1, c1, r2, c2): (usize, usize, usize, usize),
        enc_outer: &dyn Fn(&[u64]) -> Vec<u64>,
        enc_inner: &dyn Fn(&[u64]) -> Vec<u64>,
    ) -> Vec<u64> {
        let width = c1 * c2;
        let mut inner_out: Vec<Vec<u64>> = Vec::with_capacity(r1 * c1);
        let mut block = vec![0u64; r2 * c2];
        for bi in 0..r1 {
            for bj in 0..c1 {
                for ii in 0..r2 {
                    for ij in 0..c2 {
                        block[ii * c2 + ij] = x[(bi * r2 + ii) * width + bj * c2 + ij];
                    }
                }
                inner_out.push(enc_inner(&block));
            }
        }
        let t2 = inner_out[0].len();
        let mut column = vec![0u64; r1 * c1];
        let mut out: Vec<u64> = Vec::new();
        let mut t1 = 0;
        for r2i in 0..t2 {
            for (o, y) in inner_out.iter().enumerate() {
                column[o] = y[r2i];
            }
            let z = enc_outer(&column);
            if out.is_empty() {
                t1 = z.len();
                out = vec![0; t1 * t2];
            }
            for (r1i, v) in z.into_iter().enumerate() {
                out[r1i * t2 + r2i] = v;
            }
        }
        debug_assert_eq!(out.len(), t1 * t2);
        out
    }
}

impl Evaluator for ComposeEval<'_> {
    fn encode_a(&self, a: &[u64]) -> Vec<u64> {
        let s = (self.d1.m, self.d1.n, self.d2.m, self.d2.n);
        self.encode(a, s, &|x| self.outer.encode_a(x), &|x| self.inner.encode_a(x))
    }
    fn encode_b(&self, b: &[u64]) -> Vec<u64> {
        let s = (self.d1.n, self.d1.p, self.d2.n, self.d2.p);
        self.encode(b, s, &|x| self.outer.encode_b(x), &|x| self.inner.encode_b(x))
    }
    fn encode_c(&self, c: &[u64]) -> Vec<u64> {
        let s = (self.d1.p, self.d1.m, self.d2.p, self.d2.m);
        self.encode(c, s, &|x| self.outer.encode_c(x), &|x| self.inner.encode_c(x))
    }
    fn field(&self) -> PrimeField {
        self.outer.field()
    }
}

impl Scheme for LazyCompose<'_> {
    fn dims(&self) -> Dims {
        let (a, b) = (self.outer.dims(), self.inner.dims());
        Dims::new(a.m * b.m, a.n * b.n, a.p * b.p)
    }
    fn rank(&self) -> u128 {
        self.outer.rank() * self.inner.rank()
    }
    fn evaluator(&self, f: PrimeField) -> Result<Box<dyn Evaluator + '_>> {
        Ok(Box::new(ComposeEval {
            outer: self.outer.evaluator(f)?,
            inner: self.inner.evaluator(f)?,
            d1: self.outer.dims(),
            d2: self.inner.dims(),
        }))
    }
}

/// Two-step algorithm: the lazy self-composition, minus every block of
/// cell-pair rows, plus the replacement applied to each block's operands.
struct New25bEval<'a> {
    f: PrimeField,
    main: ComposeEval<'a>,
    /// Composition of the stacked cell embeddings: yields all 4x4 block
    /// operands at once.
    blocks: Option<ComposeEval<'a>>,
    replacement: Option<MatrixEval>,
    cell_rows: Vec<bool>,
    h: usize,
}

fn stack(cells: &[crate::algorithm::TraceCell], pick: impl Fn(&crate::algorithm::TraceCell) -> &SparseMatrix) -> SparseMatrix {
    let parts: Vec<&SparseMatrix> = cells.iter().map(pick).collect();
    SparseMatrix::vstack(&parts).expect("equal widths")
}

impl Evaluator for New25bEval<'_> {
    fn encode_a(&self, a: &[u64]) -> Vec<u64> {
        self.main.encode_a(a)
    }
    fn encode_b(&self, b: &[u64]) -> Vec<u64> {
        self.main.encode_b(b)
    }
    fn encode_c(&self, c: &[u64]) -> Vec<u64> {
        self.main.encode_c(c)
    }
    fn field(&self) -> PrimeField {
        self.f
    }

    fn trilinear(&self, a: &[u64], b: &[u64], c: &[u64]) -> u64 {
        let f = self.f;
        let (x, y, z) = (self.encode_a(a), self.encode_b(b), self.encode_c(c));
        let mut total = dot3(&f, &x, &y, &z);
        let (Some(blocks), Some(rep)) = (&self.blocks, &self.replacement) else {
            return total;
        };
        let t = self.cell_rows.len();
        for r1 in (0..t).filter(|&r| self.cell_rows[r]) {
            for r2 in (0..t).filter(|&r| self.cell_rows[r]) {
                let k = r1 * t + r2;
                total = f.sub(total, f.mul(f.mul(x[k], y[k]), z[k]));
            }
        }
        let (ga, gb, gc) = (blocks.encode_a(a), blocks.encode_b(b), blocks.encode_c(c));
        let w = 4 * self.h;
        let perm = kron_to_row_major(2, 2, 2, 2);
        let mut ops = [vec![0u64; 16], vec![0u64; 16], vec![0u64; 16]];
        for c1 in 0..self.h {
            for c2 in 0..self.h {
                for rho in 0..4 {
                    for rho2 in 0..4 {
                        let src = (4 * c1 + rho) * w + 4 * c2 + rho2;
                        let dst = perm[rho * 4 + rho2];
                        ops[0][dst] = ga[src];
                        ops[1][dst] = gb[src];
                        ops[2][dst] = gc[src];
                    }
                }
                total = f.add(total, rep.trilinear(&ops[0], &ops[1], &ops[2]));
            }
        }
        total
    }
}

impl Scheme for New25b {
    fn dims(&self) -> Dims {
        New25b::dims(self)
    }
    fn rank(&self) -> u128 {
        New25b::rank(self)
    }
    fn evaluator(&self, f: PrimeField) -> Result<Box<dyn Evaluator + '_>> {
        let base = &self.base;
        let d = base.decomposed.dims();
        let main = ComposeEval {
            outer: base.evaluator(f)?,
            inner: base.evaluator(f)?,
            d1: d,
            d2: d,
        };
        let mut cell_rows = vec![false; base.t()];
        for c in &base.cells {
            if c.local.t() != 7 {
                return Err(Error::Substitution("cell with a non rank-7 local algorithm".into()));
            }
            for r in c.first_row..c.first_row + 7 {
                cell_rows[r] = true;
            }
        }
        let (blocks, replacement) = match &self.replacement {
            None => (None, None),
            Some(r) => {
                let phi = base.decomposed.phi();
                let stacked = || -> Result<Box<dyn Evaluator>> {
                    Ok(Box::new(MatrixEval::new(
                        f,
                        &stack(&base.cells, |c| &c.e_a),
                        &stack(&base.cells, |c| &c.e_b),
                        &stack(&base.cells, |c| &c.e_c),
                        Some(phi),
                    )?))
                };
                (
                    Some(ComposeEval {
                        outer: stacked()?,
                        inner: stacked()?,
                        d1: d,
                        d2: d,
                    }),
                    Some(MatrixEval::new(f, r.u(), r.v(), r.w(), None)?),
                )
            }
        };
        Ok(Box::new(New25bEval {
            f,
            main,
            blocks,
            replacement,
            cell_rows,
            h: base.cells.len(),
        }))
    }
}
