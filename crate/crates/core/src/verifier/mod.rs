//! Exact and probabilistic checks that an algorithm multiplies matrices.

mod scheme;

pub use scheme::{Evaluator, LazyCompose, Scheme};

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algorithm::{BilinearAlgorithm, Certificate, Dims};
use crate::dense::Matrix;
use crate::domain::{Domain, PrimeDomain, RationalDomain};
use crate::engine::recursive_multiply;
use crate::error::{Error, Result};
use crate::field::{PrimeField, MERSENNE_61};
use crate::rational::Rational;
use crate::sparse::SparseMatrix;

/// Default cap on accumulated terms for exact expansion.
pub const DEFAULT_BUDGET: u128 = 100_000_000;
pub const DEFAULT_TRIALS: u32 = 20;
pub const DEFAULT_PRIME: u64 = MERSENNE_61;

/// Support of the matrix multiplication tensor: `(n*i + j, p*j + k, m*k + i)`
/// over `i < m`, `j < n`, `k < p`, i.e. coordinates of `A[i][j]`, `B[j][k]`
/// and `C[k][i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MmTensor {
    pub dims: Dims,
    pub support: Vec<(usize, usize, usize)>,
}

pub fn mm_tensor(m: usize, n: usize, p: usize) -> MmTensor {
    let mut support = Vec::with_capacity(m * n * p);
    for i in 0..m {
        for j in 0..n {
            for k in 0..p {
                support.push((n * i + j, p * j + k, m * k + i));
            }
        }
    }
    support.sort_unstable();
    MmTensor {
        dims: Dims::new(m, n, p),
        support,
    }
}

impl MmTensor {
    pub fn as_map(&self) -> BTreeMap<(usize, usize, usize), Rational> {
        self.support.iter().map(|&k| (k, Rational::one())).collect()
    }
}

/// Number of rank-one terms touched by an exact expansion.
pub fn expansion_cost(alg: &BilinearAlgorithm) -> u128 {
    (0..alg.t())
        .map(|r| alg.u().row(r).len() as u128 * alg.v().row(r).len() as u128 * alg.w().row(r).len() as u128)
        .sum()
}

fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(())
}

/// Common denominator of a matrix if it fits comfortably in an `i64`.
fn common_denominator(m: &SparseMatrix) -> Option<i128> {
    let mut l = BigInt::one();
    for v in m.values() {
        l = l.lcm(&v.denom());
        if l.bits() > 62 {
            return None;
        }
    }
    l.to_i128()
}

type IntRows = Vec<Vec<(u32, i128)>>;

fn integer_rows(m: &SparseMatrix, den: i128) -> Option<IntRows> {
    m.rows()
        .map(|row| {
            row.iter()
                .map(|(c, v)| {
                    let scaled = v * &Rational::from(den as i64);
                    let (n, d) = scaled.as_small()?;
                    (d == 1).then_some((c as u32, n as i128))
                })
                .collect()
        })
        .collect()
}

/// Visits the tensor slice by slice (one slice per column of U). The
/// callback receives the column, the dense `|b| x |c|` slice and the
/// scale by which every entry has been multiplied.
fn for_each_slice(
    alg: &BilinearAlgorithm,
    mut visit: impl FnMut(usize, &dyn Fn(usize, usize) -> Rational) -> bool,
) -> bool {
    let (nb, nc) = (alg.v().ncols(), alg.w().ncols());
    let ut = alg.u().transpose();
    let dens = (
        common_denominator(alg.u()),
        common_denominator(alg.v()),
        common_denominator(alg.w()),
    );
    if let (Some(du), Some(dv), Some(dw)) = dens {
        if let (Some(ui), Some(vi), Some(wi)) = (
            integer_rows(&ut, du),
            integer_rows(alg.v(), dv),
            integer_rows(alg.w(), dw),
        ) {
            // the largest partial sum is bounded by the l1 norms of the
            // scaled factors; fall back to rationals if that might overflow
            let norm = |rows: &IntRows| -> f64 {
                rows.iter()
                    .map(|r| r.iter().map(|e| e.1.unsigned_abs() as f64).sum::<f64>())
                    .fold(0.0, f64::max)
            };
            let bound = norm(&ui) * norm(&vi) * norm(&wi) * alg.t() as f64;
            if bound < 1e36 {
                let scale = Rational::from_big(num_rational::BigRational::from_integer(
                    BigInt::from(du) * BigInt::from(dv) * BigInt::from(dw),
                ));
                let mut slice = vec![0i128; nb * nc];
                for (a, col) in ui.iter().enumerate() {
                    slice.iter_mut().for_each(|x| *x = 0);
                    for &(r, x) in col {
                        let r = r as usize;
                        for &(b, y) in &vi[r] {
                            let xy = x * y;
                            let base = b as usize * nc;
                            for &(c, z) in &wi[r] {
                                slice[base + c as usize] += xy * z;
                            }
                        }
                    }
                    let get = |b: usize, c: usize| Rational::from_big(num_rational::BigRational::from_integer(BigInt::from(slice[b * nc + c]))) / &scale;
                    if !visit(a, &get) {
                        return false;
                    }
                }
                return true;
            }
        }
    }
    let mut slice = vec![Rational::zero(); nb * nc];
    for a in 0..ut.nrows() {
        slice.iter_mut().for_each(|x| *x = Rational::zero());
        for (r, x) in ut.row(a).iter() {
            for (b, y) in alg.v().row(r).iter() {
                let xy = x * y;
                for (c, z) in alg.w().row(r).iter() {
                    slice[b * nc + c] += &xy * z;
                }
            }
        }
        let get = |b: usize, c: usize| slice[b * nc + c].clone();
        if !visit(a, &get) {
            return false;
        }
    }
    true
}

/// Exact sum of the rank-one terms, zeros dropped.
pub fn expand_tensor(
    alg: &BilinearAlgorithm,
    budget: u128,
) -> Result<BTreeMap<(usize, usize, usize), Rational>> {
    check_budget(expansion_cost(alg), budget)?;
    let (nb, nc) = (alg.v().ncols(), alg.w().ncols());
    let mut out = BTreeMap::new();
    for_each_slice(alg, |a, get| {
        for b in 0..nb {
            for c in 0..nc {
                let v = get(b, c);
                if !v.is_zero() {
                    out.insert((a, b, c), v);
                }
            }
        }
        true
    });
    Ok(out)
}

/// True iff the expanded tensor equals the matrix multiplication tensor.
pub fn verify_exact(alg: &BilinearAlgorithm, budget: u128) -> Result<bool> {
    check_budget(expansion_cost(alg), budget)?;
    let Dims { m, n, p } = alg.dims();
    let (nb, nc) = (alg.v().ncols(), alg.w().ncols());
    // slices are visited in column order of U, i.e. a = n*i + j
    Ok(for_each_slice(alg, |a, get| {
        let (i, j) = (a / n, a % n);
        for b in 0..nb {
            let (jb, k) = (b / p, b % p);
            for c in 0..nc {
                let (kc, ic) = (c / m, c % m);
                let expect = jb == j && kc == k && ic == i;
                let v = get(b, c);
                if (expect && !v.is_one()) || (!expect && !v.is_zero()) {
                    return false;
                }
            }
        }
        true
    }))
}

/// A violated Brent equation: the coefficient of `A[i][j] B[j2][k] C[k2][i2]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BrentViolation {
    pub i: usize,
    pub j: usize,
    pub j2: usize,
    pub k: usize,
    pub k2: usize,
    pub i2: usize,
    pub value: Rational,
    pub expected: Rational,
}

/// Checks every Brent equation directly; returns the first violation.
pub fn brent_violation(alg: &BilinearAlgorithm, budget: u128) -> Result<Option<BrentViolation>> {
    let Dims { m, n, p } = alg.dims();
    let mnp = (m * n * p) as u128;
    check_budget(mnp * mnp * alg.t() as u128, budget)?;
    let (u, v, w) = (
        Matrix::from_sparse(alg.u()),
        Matrix::from_sparse(alg.v()),
        Matrix::from_sparse(alg.w()),
    );
    for i in 0..m {
        for j in 0..n {
            for j2 in 0..n {
                for k in 0..p {
                    for k2 in 0..p {
                        for i2 in 0..m {
                            let (a, b, c) = (i * n + j, j2 * p + k, k2 * m + i2);
                            let mut value = Rational::zero();
                            for r in 0..alg.t() {
                                let x = u.get(r, a);
                                if x.is_zero() {
                                    continue;
                                }
                                value += &(x * v.get(r, b)) * w.get(r, c);
                            }
                            let expected = if i == i2 && j == j2 && k == k2 {
                                Rational::one()
                            } else {
                                Rational::zero()
                            };
                            if value != expected {
                                return Ok(Some(BrentViolation {
                                    i,
                                    j,
                                    j2,
                                    k,
                                    k2,
                                    i2,
                                    value,
                                    expected,
                                }));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

pub fn verify_brent(alg: &BilinearAlgorithm, budget: u128) -> Result<bool> {
    Ok(brent_violation(alg, budget)?.is_none())
}

/// Outcome of randomized identity testing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RandomOutcome {
    pub passed: bool,
    /// Index of the first failing trial.
    pub failed_trial: Option<u32>,
}

/// `tr(ABC)` over the field for row-major operands.
fn trace_product(f: &PrimeField, dims: Dims, a: &[u64], b: &[u64], c: &[u64]) -> u64 {
    let Dims { m, n, p } = dims;
    let mut total = 0;
    let mut row = vec![0u64; p];
    for i in 0..m {
        row.iter_mut().for_each(|x| *x = 0);
        for j in 0..n {
            let x = a[i * n + j];
            if x == 0 {
                continue;
            }
            for k in 0..p {
                row[k] = f.add(row[k], f.mul(x, b[j * p + k]));
            }
        }
        for k in 0..p {
            total = f.add(total, f.mul(row[k], c[k * m + i]));
        }
    }
    total
}

/// Compares the trilinear form with `tr(ABC)` at random points of the
/// field. A wrong algorithm passes one trial with probability at most
/// `3/p`.
pub fn verify_random(scheme: &dyn Scheme, trials: u32, prime: u64, seed: u64) -> Result<RandomOutcome> {
    let f = PrimeField::new(prime)?;
    let eval = scheme.evaluator(f)?;
    let dims = scheme.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let mut draw = |len: usize| -> Vec<u64> { (0..len).map(|_| f.random(&mut rng)).collect() };
        let a = draw(dims.a_len());
        let b = draw(dims.b_len());
        let c = draw(dims.c_len());
        if eval.trilinear(&a, &b, &c) != trace_product(&f, dims, &a, &b, &c) {
            return Ok(RandomOutcome {
                passed: false,
                failed_trial: Some(trial),
            });
        }
    }
    Ok(RandomOutcome {
        passed: true,
        failed_trial: None,
    })
}

/// Where `verify_multiply` runs the recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum MultiplyDomain {
    Rational,
    Prime { p: u64 },
}

/// Runs the recursive algorithm on random operands of size `n0^levels` and
/// compares with the schoolbook product.
pub fn verify_multiply(
    alg: &BilinearAlgorithm,
    samples: u32,
    levels: u32,
    domain: MultiplyDomain,
    seed: u64,
) -> Result<bool> {
    fn run<D: Domain>(d: &D, alg: &BilinearAlgorithm, samples: u32, levels: u32, seed: u64) -> Result<bool> {
        let Dims { m, n, p } = alg.dims();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (rm, rn, rp) = (m.pow(levels), n.pow(levels), p.pow(levels));
        for _ in 0..samples {
            let a = Matrix::from_fn(rm, rn, |_, _| d.sample(&mut rng));
            let b = Matrix::from_fn(rn, rp, |_, _| d.sample(&mut rng));
            let fast = recursive_multiply(d, alg, &a, &b, levels, 0)?;
            let slow = crate::dense::naive_product(&a, &b, d.zero(), |x, y| d.add(x, y), |x, y| d.mul(x, y))?;
            if fast != slow {
                return Ok(false);
            }
        }
        Ok(true)
    }
    match domain {
        MultiplyDomain::Rational => run(&RationalDomain, alg, samples, levels, seed),
        MultiplyDomain::Prime { p } => run(&PrimeDomain(PrimeField::new(p)?), alg, samples, levels, seed),
    }
}

/// Verification request, as recorded in reports and certificates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum VerifyMode {
    Exact { budget: u128 },
    Brent { budget: u128 },
    Random { trials: u32, prime: u64, seed: u64 },
    Multiply { samples: u32, levels: u32, domain: MultiplyDomain, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    #[serde(flatten)]
    pub mode: VerifyMode,
    pub dims: Dims,
    pub rank: u128,
    pub result: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub timing_ms: f64,
}

impl VerificationReport {
    /// The report without its timing, for reproducibility comparisons.
    pub fn deterministic_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        if let Some(o) = v.as_object_mut() {
            o.remove("timing_ms");
        }
        v
    }
}

/// Runs a check on a scheme that may not be materialized (random mode only
/// for lazy schemes).
pub fn run_scheme(scheme: &dyn Scheme, mode: &VerifyMode) -> Result<VerificationReport> {
    let start = Instant::now();
    let (result, detail) = match mode {
        VerifyMode::Random { trials, prime, seed } => {
            let o = verify_random(scheme, *trials, *prime, *seed)?;
            (o.passed, o.failed_trial.map(|t| format!("trial {t} failed")))
        }
        _ => {
            return Err(Error::Dimension(
                "only randomized verification is available for lazy schemes".into(),
            ))
        }
    };
    Ok(VerificationReport {
        mode: mode.clone(),
        dims: scheme.dims(),
        rank: scheme.rank(),
        result,
        detail,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Runs a check and, on success, attaches the matching certificate.
pub fn certify(alg: &mut BilinearAlgorithm, mode: &VerifyMode) -> Result<VerificationReport> {
    let start = Instant::now();
    let (result, detail, cert) = match mode {
        VerifyMode::Exact { budget } => (verify_exact(alg, *budget)?, None, Certificate::Exact),
        VerifyMode::Brent { budget } => {
            let v = brent_violation(alg, *budget)?;
            let detail = v.as_ref().map(|v| {
                format!(
                    "coefficient of A[{}][{}] B[{}][{}] C[{}][{}] is {}, expected {}",
                    v.i, v.j, v.j2, v.k, v.k2, v.i2, v.value, v.expected
                )
            });
            (v.is_none(), detail, Certificate::Brent)
        }
        VerifyMode::Random { trials, prime, seed } => {
            let o = verify_random(alg, *trials, *prime, *seed)?;
            (
                o.passed,
                o.failed_trial.map(|t| format!("trial {t} failed")),
                Certificate::Random {
                    trials: *trials,
                    prime: *prime,
                    seed: *seed,
                },
            )
        }
        VerifyMode::Multiply {
            samples,
            levels,
            domain,
            seed,
        } => (
            verify_multiply(alg, *samples, *levels, *domain, *seed)?,
            None,
            Certificate::Multiply {
                samples: *samples,
                levels: *levels,
                seed: *seed,
            },
        ),
    };
    if result {
        alg.set_certificate(Some(cert));
    }
    Ok(VerificationReport {
        mode: mode.clone(),
        dims: alg.dims(),
        rank: alg.t() as u128,
        result,
        detail,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Randomized certification of a decomposed algorithm.
pub fn certify_decomposed(
    alg: &mut crate::decomposed::DecomposedAlgorithm,
    trials: u32,
    prime: u64,
    seed: u64,
) -> Result<bool> {
    let ok = verify_random(alg, trials, prime, seed)?.passed;
    if ok {
        alg.set_certificate(Some(Certificate::Random { trials, prime, seed }));
    }
    Ok(ok)
}
