//! Recursive execution of bilinear algorithms over a scalar domain.
//!
//! Operands are flattened once into the recursive block layout; every level
//! then works on contiguous chunks. Decoding applies `W^T` and so yields the
//! flattened transpose of the product, which is undone at the very end.

use rayon::prelude::*;
use serde::Serialize;

use crate::algorithm::{BilinearAlgorithm, Dims};
use crate::decomposed::DecomposedAlgorithm;
use crate::dense::{naive_product, Matrix};
use crate::domain::{Coef, CompiledMatrix, Domain};
use crate::error::{Error, Result};
use crate::vectorize::{matricize, vectorize};

/// Chunks smaller than this are multiplied sequentially.
const PARALLEL_CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCount {
    pub multiplications: u128,
    /// Additions, subtractions and scalings by non-unit coefficients.
    pub linear: u128,
}

impl OpCount {
    pub fn total(&self) -> u128 {
        self.multiplications + self.linear
    }
}

impl std::ops::Add for OpCount {
    type Output = OpCount;
    fn add(self, o: OpCount) -> OpCount {
        OpCount {
            multiplications: self.multiplications + o.multiplications,
            linear: self.linear + o.linear,
        }
    }
}

impl std::iter::Sum for OpCount {
    fn sum<I: Iterator<Item = OpCount>>(it: I) -> OpCount {
        it.fold(OpCount::default(), |a, b| a + b)
    }
}

/// `y = M x` where `x` consists of `M.ncols()` chunks of length `chunk`.
fn apply_chunked<D: Domain>(d: &D, m: &CompiledMatrix<D::Elem>, x: &[D::Elem], chunk: usize) -> Vec<D::Elem> {
    debug_assert_eq!(x.len(), m.ncols() * chunk);
    let mut out = Vec::with_capacity(m.nrows() * chunk);
    for r in 0..m.nrows() {
        let start = out.len();
        out.resize(start + chunk, d.zero());
        let acc = &mut out[start..];
        let mut first = true;
        for (c, k) in m.row(r) {
            let src = &x[c * chunk..(c + 1) * chunk];
            for (y, s) in acc.iter_mut().zip(src) {
                *y = match (k, first) {
                    (Coef::One, true) => s.clone(),
                    (Coef::MinusOne, true) => d.neg(s),
                    (Coef::Scaled(v), true) => d.mul(v, s),
                    (Coef::One, false) => d.add(y, s),
                    (Coef::MinusOne, false) => d.sub(y, s),
                    (Coef::Scaled(v), false) => d.add(y, &d.mul(v, s)),
                };
            }
            first = false;
        }
    }
    out
}

struct Plan<E> {
    u: CompiledMatrix<E>,
    v: CompiledMatrix<E>,
    wt: CompiledMatrix<E>,
    /// Sizes of one level's operand and result vectors.
    a_len: usize,
    b_len: usize,
    c_len: usize,
    /// Operand shapes, for naive multiplication at the bottom.
    dims: Option<Dims>,
    t: usize,
}

impl<E: Clone + Send + Sync> Plan<E> {
    fn level_cost(&self, level: u32) -> u128 {
        let below = level - 1;
        self.u.linear_cost() as u128 * (self.a_len as u128).pow(below)
            + self.v.linear_cost() as u128 * (self.b_len as u128).pow(below)
            + self.wt.linear_cost() as u128 * (self.c_len as u128).pow(below)
    }
}

fn naive_level<D: Domain>(d: &D, dims: Dims, a: &[D::Elem], b: &[D::Elem], level: u32) -> Result<(Vec<D::Elem>, OpCount)> {
    let Dims { m, n, p } = dims;
    let am = matricize(a, m, n, level)?;
    let bm = matricize(b, n, p, level)?;
    let c = naive_product(&am, &bm, d.zero(), |x, y| d.add(x, y), |x, y| d.mul(x, y))?;
    let out = vectorize(&c.transpose(), p, m)?;
    let (mm, nn, pp) = (
        (m as u128).pow(level),
        (n as u128).pow(level),
        (p as u128).pow(level),
    );
    Ok((
        out,
        OpCount {
            multiplications: mm * nn * pp,
            linear: mm * pp * (nn - 1),
        },
    ))
}

fn recurse<D: Domain>(
    d: &D,
    plan: &Plan<D::Elem>,
    a: &[D::Elem],
    b: &[D::Elem],
    level: u32,
    base_levels: u32,
) -> Result<(Vec<D::Elem>, OpCount)> {
    if level == 0 {
        return Ok((
            vec![d.mul(&a[0], &b[0])],
            OpCount {
                multiplications: 1,
                linear: 0,
            },
        ));
    }
    if level <= base_levels {
        if let Some(dims) = plan.dims {
            return naive_level(d, dims, a, b, level);
        }
    }
    let (ca, cb) = (a.len() / plan.a_len, b.len() / plan.b_len);
    let cc = plan.c_len.pow(level - 1);
    let ea = apply_chunked(d, &plan.u, a, ca);
    let eb = apply_chunked(d, &plan.v, b, cb);
    let sub = |r: usize| recurse(d, plan, &ea[r * ca..(r + 1) * ca], &eb[r * cb..(r + 1) * cb], level - 1, base_levels);
    let results: Vec<(Vec<D::Elem>, OpCount)> = if ca >= PARALLEL_CHUNK {
        (0..plan.t).into_par_iter().map(sub).collect::<Result<_>>()?
    } else {
        (0..plan.t).map(sub).collect::<Result<_>>()?
    };
    let mut count = OpCount {
        multiplications: 0,
        linear: plan.level_cost(level),
    };
    let mut prods = Vec::with_capacity(plan.t * cc);
    for (v, c) in results {
        prods.extend(v);
        count = count + c;
    }
    Ok((apply_chunked(d, &plan.wt, &prods, cc), count))
}

fn compile_plan<D: Domain>(
    d: &D,
    u: &crate::sparse::SparseMatrix,
    v: &crate::sparse::SparseMatrix,
    w: &crate::sparse::SparseMatrix,
    dims: Option<Dims>,
) -> Result<Plan<D::Elem>> {
    Ok(Plan {
        a_len: u.ncols(),
        b_len: v.ncols(),
        c_len: w.ncols(),
        t: u.nrows(),
        u: CompiledMatrix::compile(d, u)?,
        v: CompiledMatrix::compile(d, v)?,
        wt: CompiledMatrix::compile(d, w)?.transpose(),
        dims,
    })
}

fn check_levels(levels: u32, base_levels: u32) -> Result<()> {
    if levels < 1 {
        return Err(Error::Dimension("at least one recursion level is needed".into()));
    }
    if base_levels > levels {
        return Err(Error::Dimension(format!(
            "{base_levels} naive levels exceed the {levels} recursion levels"
        )));
    }
    Ok(())
}

fn check_operands<E: Clone>(dims: Dims, a: &Matrix<E>, b: &Matrix<E>, levels: u32) -> Result<()> {
    let Dims { m, n, p } = dims;
    let want = |x: usize| x.checked_pow(levels).unwrap_or(usize::MAX);
    if (a.rows(), a.cols()) != (want(m), want(n)) || (b.rows(), b.cols()) != (want(n), want(p)) {
        return Err(Error::Dimension(format!(
            "operands {}x{} and {}x{} do not fit {levels} levels of a {m}x{n}x{p} algorithm",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// `A * B` by `levels` recursive applications of `alg`; the bottom
/// `base_levels` levels use schoolbook multiplication. Also returns the
/// operations actually performed.
pub fn recursive_multiply_counted<D: Domain>(
    d: &D,
    alg: &BilinearAlgorithm,
    a: &Matrix<D::Elem>,
    b: &Matrix<D::Elem>,
    levels: u32,
    base_levels: u32,
) -> Result<(Matrix<D::Elem>, OpCount)> {
    check_levels(levels, base_levels)?;
    let dims = alg.dims();
    check_operands(dims, a, b, levels)?;
    let plan = compile_plan(d, alg.u(), alg.v(), alg.w(), Some(dims))?;
    let va = vectorize(a, dims.m, dims.n)?;
    let vb = vectorize(b, dims.n, dims.p)?;
    let (vc, count) = recurse(d, &plan, &va, &vb, levels, base_levels)?;
    Ok((matricize(&vc, dims.p, dims.m, levels)?.transpose(), count))
}

pub fn recursive_multiply<D: Domain>(
    d: &D,
    alg: &BilinearAlgorithm,
    a: &Matrix<D::Elem>,
    b: &Matrix<D::Elem>,
    levels: u32,
    base_levels: u32,
) -> Result<Matrix<D::Elem>> {
    Ok(recursive_multiply_counted(d, alg, a, b, levels, base_levels)?.0)
}

/// `(M kron ... kron M) x` with `levels` factors, outermost factor on the
/// most significant index.
fn kron_apply<D: Domain>(d: &D, m: &CompiledMatrix<D::Elem>, x: &[D::Elem], levels: u32) -> (Vec<D::Elem>, u128) {
    if levels == 0 {
        return (x.to_vec(), 0);
    }
    let chunk = x.len() / m.ncols();
    let mut z = Vec::new();
    let mut cost = 0;
    for c in 0..m.ncols() {
        let (y, k) = kron_apply(d, m, &x[c * chunk..(c + 1) * chunk], levels - 1);
        z.extend(y);
        cost += k;
    }
    let inner = z.len() / m.ncols();
    cost += m.linear_cost() as u128 * inner as u128;
    (apply_chunked(d, m, &z, inner), cost)
}

/// `A * B` through the basis transformation: each operand is transformed
/// once for all levels, the sparse factors run the recursion, and the
/// result is transformed back.
pub fn decomposed_multiply<D: Domain>(
    d: &D,
    alg: &DecomposedAlgorithm,
    a: &Matrix<D::Elem>,
    b: &Matrix<D::Elem>,
    levels: u32,
) -> Result<(Matrix<D::Elem>, OpCount)> {
    check_levels(levels, 0)?;
    let n0 = alg.n0();
    check_operands(alg.dims(), a, b, levels)?;
    let phi = CompiledMatrix::compile(d, alg.phi())?;
    let phi_t = phi.transpose();
    let plan = compile_plan(d, alg.u_phi(), alg.v_phi(), alg.w_phi(), None)?;
    let (ta, ka) = kron_apply(d, &phi, &vectorize(a, n0, n0)?, levels);
    let (tb, kb) = kron_apply(d, &phi, &vectorize(b, n0, n0)?, levels);
    let (tc, mut count) = recurse(d, &plan, &ta, &tb, levels, 0)?;
    let (vc, kc) = kron_apply(d, &phi_t, &tc, levels);
    count.linear += ka + kb + kc;
    Ok((matricize(&vc, n0, n0, levels)?.transpose(), count))
}

/// Operations of `recursive_multiply` with full recursion, without running it.
pub fn count_operations(alg: &BilinearAlgorithm, levels: u32) -> Result<OpCount> {
    check_levels(levels, 0)?;
    let d = crate::domain::RationalDomain;
    let plan = compile_plan(&d, alg.u(), alg.v(), alg.w(), None)?;
    let mut c = OpCount {
        multiplications: 1,
        linear: 0,
    };
    for l in 1..=levels {
        c = OpCount {
            multiplications: c.multiplications * plan.t as u128,
            linear: c.linear * plan.t as u128 + plan.level_cost(l),
        };
    }
    Ok(c)
}

/// Operations of `decomposed_multiply`, without running it.
pub fn count_operations_decomposed(alg: &DecomposedAlgorithm, levels: u32) -> Result<OpCount> {
    check_levels(levels, 0)?;
    let d = crate::domain::RationalDomain;
    let plan = compile_plan(&d, alg.u_phi(), alg.v_phi(), alg.w_phi(), None)?;
    let phi = CompiledMatrix::compile(&d, alg.phi())?;
    let phi_t = phi.transpose();
    let mut c = OpCount {
        multiplications: 1,
        linear: 0,
    };
    for l in 1..=levels {
        c = OpCount {
            multiplications: c.multiplications * plan.t as u128,
            linear: c.linear * plan.t as u128 + plan.level_cost(l),
        };
    }
    // one level of a transform of k levels costs q * r^(j-1) * c^(k-j)
    let (s0, n2) = (alg.s0() as u128, (alg.n0() * alg.n0()) as u128);
    let transform = |m: &CompiledMatrix<_>, rows: u128, cols: u128| -> u128 {
        (1..=levels)
            .map(|j| m.linear_cost() as u128 * rows.pow(j - 1) * cols.pow(levels - j))
            .sum()
    };
    c.linear += 2 * transform(&phi, s0, n2) + transform(&phi_t, n2, s0);
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{FloatDomain, PrimeDomain, RationalDomain};
    use crate::field::PrimeField;
    use crate::generator::gen_new25_decomposed;
    use crate::rational::Rational;
    use crate::strassen::strassen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random<D: Domain>(d: &D, r: usize, c: usize, seed: u64) -> Matrix<D::Elem> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_fn(r, c, |_, _| d.sample(&mut rng))
    }

    fn naive<D: Domain>(d: &D, a: &Matrix<D::Elem>, b: &Matrix<D::Elem>) -> Matrix<D::Elem> {
        naive_product(a, b, d.zero(), |x, y| d.add(x, y), |x, y| d.mul(x, y)).unwrap()
    }

    #[test]
    fn strassen_three_levels() {
        let d = RationalDomain;
        let s = strassen();
        let (a, b) = (random(&d, 8, 8, 1), random(&d, 8, 8, 2));
        let (c, count) = recursive_multiply_counted(&d, &s, &a, &b, 3, 0).unwrap();
        assert_eq!(c, naive(&d, &a, &b));
        assert_eq!(count, count_operations(&s, 3).unwrap());
        assert_eq!(count.multiplications, 343);
        assert_eq!(count_operations(&s, 2).unwrap().multiplications, 49);
        for base in 1..=3 {
            assert_eq!(recursive_multiply(&d, &s, &a, &b, 3, base).unwrap(), c);
        }
    }

    #[test]
    fn one_level_is_apply() {
        let d = RationalDomain;
        let s = strassen();
        let (a, b) = (random(&d, 2, 2, 3), random(&d, 2, 2, 4));
        assert_eq!(recursive_multiply(&d, &s, &a, &b, 1, 0).unwrap(), s.apply_bilinear(&a, &b).unwrap());
    }

    #[test]
    fn rectangular_naive_algorithm() {
        let d = RationalDomain;
        let alg = BilinearAlgorithm::naive(Dims::new(2, 3, 2));
        let (a, b) = (random(&d, 4, 9, 5), random(&d, 9, 4, 6));
        assert_eq!(recursive_multiply(&d, &alg, &a, &b, 2, 0).unwrap(), naive(&d, &a, &b));
    }

    #[test]
    fn bad_shapes() {
        let d = RationalDomain;
        let s = strassen();
        let a = random(&d, 4, 4, 1);
        assert!(recursive_multiply(&d, &s, &a, &a, 3, 0).is_err());
        assert!(recursive_multiply(&d, &s, &a, &a, 0, 0).is_err());
    }

    #[test]
    fn decomposed_path_agrees() {
        let g = gen_new25_decomposed(4).unwrap();
        let full = g.to_full().unwrap();
        let pd = PrimeDomain(PrimeField::new(1_000_003).unwrap());
        for levels in [1, 2] {
            let n = 4usize.pow(levels);
            let (a, b) = (random(&pd, n, n, 7), random(&pd, n, n, 8));
            let (c1, k1) = decomposed_multiply(&pd, &g.decomposed, &a, &b, levels).unwrap();
            let c2 = recursive_multiply(&pd, &full, &a, &b, levels, 0).unwrap();
            assert_eq!(c1, naive(&pd, &a, &b));
            assert_eq!(c1, c2);
            assert_eq!(k1, count_operations_decomposed(&g.decomposed, levels).unwrap());
        }
        let rd = RationalDomain;
        let (a, b) = (random(&rd, 4, 4, 9), random(&rd, 4, 4, 10));
        assert_eq!(decomposed_multiply(&rd, &g.decomposed, &a, &b, 1).unwrap().0, naive(&rd, &a, &b));
    }

    #[test]
    fn decomposed_count_matches_closed_form() {
        for n0 in [4, 6] {
            let g = gen_new25_decomposed(n0).unwrap();
            for levels in [1, 2] {
                let k = count_operations_decomposed(&g.decomposed, levels).unwrap();
                let f = crate::analysis::additive_complexity(&g.decomposed, (n0 as u128).pow(levels)).unwrap();
                assert_eq!(Rational::from(k.total() as i64), f, "n0 {n0} levels {levels}");
            }
        }
    }

    #[test]
    fn floats_close() {
        let d = FloatDomain;
        let s = strassen();
        let (a, b) = (random(&d, 8, 8, 11), random(&d, 8, 8, 12));
        let c = recursive_multiply(&d, &s, &a, &b, 3, 0).unwrap();
        let e = naive(&d, &a, &b);
        for (x, y) in c.data().iter().zip(e.data()) {
            assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()));
        }
    }
}
