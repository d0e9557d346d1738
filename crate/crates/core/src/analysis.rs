//! Closed-form ranks, exponents, base-case search and additive complexity.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::algorithm::BilinearAlgorithm;
use crate::decomposed::DecomposedAlgorithm;
use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sparse::SparseMatrix;

fn check_base(n0: usize) -> Result<u128> {
    if n0 < 2 || n0 % 2 == 1 || n0 == 16 {
        return Err(Error::Degenerate(n0));
    }
    Ok(n0 as u128)
}

fn exact_div(num: u128, den: u128, n0: usize) -> Result<u128> {
    if num % den != 0 {
        return Err(Error::Degenerate(n0));
    }
    Ok(num / den)
}

/// Rank of the unmerged construction: `n^3/3 + 15n^2/4 + 32n/3 + 9`.
pub fn t_pan(n0: usize) -> Result<u128> {
    let n = check_base(n0)?;
    exact_div(4 * n * n * n + 45 * n * n + 128 * n + 108, 12, n0)
}

/// Rank of the merged construction: `n^3/3 + 15n^2/4 + 61n/6 + 8`.
pub fn t_new(n0: usize) -> Result<u128> {
    let n = check_base(n0)?;
    exact_div(4 * n * n * n + 45 * n * n + 122 * n + 96, 12, n0)
}

/// Number of off-diagonal cancellation cells of one step.
pub fn cells(n0: usize) -> Result<u128> {
    let d = check_base(n0)? / 2 + 1;
    Ok(d * d - d)
}

/// Rank of two merged steps with every pair of off-diagonal cells
/// recomputed by a 48-multiplication 4x4x4 algorithm; acts on
/// `m0^2 x m0^2` matrices.
pub fn t_new25b(m0: usize) -> Result<u128> {
    let t = t_new(m0)?;
    let h = cells(m0)?;
    Ok(t * t - h * h)
}

/// `log t / log n0`.
pub fn exponent(n0: u128, t: u128) -> f64 {
    (t as f64).ln() / (n0 as f64).ln()
}

/// Rounds half-to-even at six decimals, as printed in tables.
pub fn round6(x: f64) -> f64 {
    let s = x * 1e6;
    let r = s.round();
    let r = if (s - s.trunc()).abs() == 0.5 && r % 2.0 != 0.0 {
        r - s.signum()
    } else {
        r
    };
    r / 1e6
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchFamily {
    New25,
    New25b,
}

/// Result of the exhaustive base-case search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseSearch {
    pub family: SearchFamily,
    /// Size of the matrices multiplied by the base algorithm.
    pub n0: u128,
    /// Size of the single-step base (equals `n0` for `New25`).
    pub step: usize,
    pub rank: u128,
    pub exponent: f64,
    /// Lower bound on the exponent of every base beyond the search range.
    pub tail_bound: f64,
    /// Whether the tail bound exceeds the best exponent found.
    pub tail_excluded: bool,
}

/// Search limit for single-step bases.
pub const SEARCH_LIMIT: usize = 243;

/// Every valid step size below the search limit with its matrix size, rank
/// and exponent.
pub fn candidates(family: SearchFamily) -> Vec<(usize, u128, u128, f64)> {
    (2..SEARCH_LIMIT)
        .step_by(2)
        .filter(|&k| k != 16)
        .map(|k| {
            let (n, t) = match family {
                SearchFamily::New25 => (k as u128, t_new(k).expect("valid base")),
                SearchFamily::New25b => ((k * k) as u128, t_new25b(k).expect("valid base")),
            };
            (k, n, t, exponent(n, t))
        })
        .collect()
}

pub fn optimal_base(family: SearchFamily) -> BaseSearch {
    let (step, n0, rank, exp) = candidates(family)
        .into_iter()
        .min_by(|a, b| a.3.total_cmp(&b.3))
        .expect("nonempty search range");
    // the rank is at least n^3/3, so the exponent is above 3 - ln 3 / ln n,
    // which is increasing in n; evaluate it at the first excluded size
    let first_out = match family {
        SearchFamily::New25 => SEARCH_LIMIT as f64,
        SearchFamily::New25b => (SEARCH_LIMIT as f64).powi(2),
    };
    let tail_bound = 3.0 - 3f64.ln() / first_out.ln();
    BaseSearch {
        family,
        n0,
        step,
        rank,
        exponent: exp,
        tail_bound,
        tail_excluded: tail_bound > exp,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MatrixStats {
    pub nnz: usize,
    /// Entries other than 0 and +-1.
    pub nns: usize,
    pub nrows: usize,
    pub ncols: usize,
}

impl MatrixStats {
    pub fn of(m: &SparseMatrix) -> Self {
        MatrixStats {
            nnz: m.nnz(),
            nns: m.nns(),
            nrows: m.nrows(),
            ncols: m.ncols(),
        }
    }

    /// Linear operations to apply the matrix: `nnz + nns - nrows`.
    pub fn q_rows(&self) -> i128 {
        self.nnz as i128 + self.nns as i128 - self.nrows as i128
    }

    /// Linear operations to apply the transpose: `nnz + nns - ncols`.
    pub fn q_cols(&self) -> i128 {
        self.nnz as i128 + self.nns as i128 - self.ncols as i128
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlgorithmStats {
    pub t: usize,
    pub u: MatrixStats,
    pub v: MatrixStats,
    pub w: MatrixStats,
    pub q_u: i128,
    pub q_v: i128,
    /// Decoding applies the transpose, so this one subtracts the column count.
    pub q_w: i128,
    /// Size of the transformed basis, for decomposed algorithms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s0: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<MatrixStats>,
}

impl AlgorithmStats {
    pub fn from_matrices(u: &SparseMatrix, v: &SparseMatrix, w: &SparseMatrix) -> Self {
        let (u, v, w) = (MatrixStats::of(u), MatrixStats::of(v), MatrixStats::of(w));
        AlgorithmStats {
            t: u.nrows,
            q_u: u.q_rows(),
            q_v: v.q_rows(),
            q_w: w.q_cols(),
            u,
            v,
            w,
            s0: None,
            phi: None,
        }
    }

    pub fn q_sum(&self) -> i128 {
        self.q_u + self.q_v + self.q_w
    }
}

pub fn stats(alg: &BilinearAlgorithm) -> AlgorithmStats {
    AlgorithmStats::from_matrices(alg.u(), alg.v(), alg.w())
}

pub fn decomposed_stats(alg: &DecomposedAlgorithm) -> AlgorithmStats {
    let mut s = AlgorithmStats::from_matrices(alg.u_phi(), alg.v_phi(), alg.w_phi());
    s.s0 = Some(alg.s0());
    s.phi = Some(MatrixStats::of(alg.phi()));
    s
}

/// Leading coefficient of the additive complexity from the q-values, rank
/// and transformed size: `q / (t0 - s0) + 1`.
pub fn leading_coefficient_from(q: i128, t0: usize, s0: usize) -> Result<Rational> {
    if t0 == s0 {
        return Err(Error::Dimension(format!(
            "rank equals transformed size ({t0}); the leading coefficient is undefined"
        )));
    }
    let q = Rational::from(i64::try_from(q).map_err(|_| Error::Dimension("q out of range".into()))?);
    Ok(q / Rational::from(t0 as i64 - s0 as i64) + Rational::one())
}

pub fn leading_coefficient(alg: &DecomposedAlgorithm) -> Result<Rational> {
    let s = decomposed_stats(alg);
    leading_coefficient_from(s.q_sum(), alg.t(), alg.s0())
}

/// Exact arithmetic operation count (multiplications included) of the
/// recursive decomposed execution on `n x n` operands:
/// `c t0^l + (Q/(s0 - n0^2) - q/(t0 - s0)) s0^l - Q/(s0 - n0^2) n0^(2l)`
/// where `q` sums the three encoding/decoding costs and `Q` counts two
/// forward and one transposed application of the transformation.
pub fn additive_complexity(alg: &DecomposedAlgorithm, n: u128) -> Result<Rational> {
    let n0 = alg.n0() as u128;
    let l = (1..64)
        .find(|&l| n0.checked_pow(l) == Some(n))
        .ok_or_else(|| Error::Dimension(format!("{n} is not a positive power of {n0}")))?;
    let s = decomposed_stats(alg);
    let phi = s.phi.expect("decomposed stats carry the transformation");
    let (t0, s0) = (alg.t(), alg.s0());
    let c = leading_coefficient_from(s.q_sum(), t0, s0)?;
    let big = |x: usize| Rational::from_big(num_rational::BigRational::from_integer(x.into()));
    let pow = |x: usize| {
        Rational::from_big(num_rational::BigRational::from_integer(
            num_bigint::BigInt::from(x).pow(l),
        ))
    };
    let q = Rational::from(s.q_sum() as i64);
    let q_phi = Rational::from((2 * phi.q_rows() + phi.q_cols()) as i64);
    if s0 == (n0 * n0) as usize {
        return Err(Error::Dimension("transformation does not change the size".into()));
    }
    let tr = &q_phi / &(big(s0) - big((n0 * n0) as usize));
    let enc = &q / &(big(t0) - big(s0));
    Ok(&c * &pow(t0) + &(&tr - &enc) * &pow(s0) - &tr * &pow((n0 * n0) as usize))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table1Row {
    pub n0: usize,
    pub t_previous: u128,
    pub t_here: u128,
    pub exp_previous: f64,
    pub exp_here: f64,
}

pub const TABLE_BASES: [usize; 13] = [28, 30, 32, 34, 36, 38, 40, 42, 44, 46, 48, 50, 60];

pub fn table1() -> Vec<Table1Row> {
    TABLE_BASES
        .iter()
        .map(|&n0| {
            let (p, h) = (t_pan(n0).expect("valid"), t_new(n0).expect("valid"));
            Table1Row {
                n0,
                t_previous: p,
                t_here: h,
                exp_previous: exponent(n0 as u128, p),
                exp_here: exponent(n0 as u128, h),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table2Row {
    pub m0: usize,
    pub n0: u128,
    pub t_previous: u128,
    pub t_merged: u128,
    pub t_substituted: u128,
    pub exp_previous: f64,
    pub exp_merged: f64,
    pub exp_substituted: f64,
}

pub fn table2() -> Vec<Table2Row> {
    TABLE_BASES
        .iter()
        .map(|&m0| {
            let n0 = (m0 * m0) as u128;
            let p = t_pan(m0).expect("valid").pow(2);
            let h = t_new(m0).expect("valid").pow(2);
            let s = t_new25b(m0).expect("valid");
            Table2Row {
                m0,
                n0,
                t_previous: p,
                t_merged: h,
                t_substituted: s,
                exp_previous: exponent(n0, p),
                exp_merged: exponent(n0, h),
                exp_substituted: exponent(n0, s),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table4Row {
    pub n0: usize,
    pub stats: AlgorithmStats,
    pub t0: usize,
    pub s0: usize,
    pub leading_coefficient: f64,
}

pub fn table4_row(alg: &DecomposedAlgorithm) -> Result<Table4Row> {
    Ok(Table4Row {
        n0: alg.n0(),
        stats: decomposed_stats(alg),
        t0: alg.t(),
        s0: alg.s0(),
        leading_coefficient: leading_coefficient(alg)?.to_f64(),
    })
}

pub fn render_table1(rows: &[Table1Row]) -> String {
    let mut s = String::from("n0\tprevious\there\texp_previous\texp_here\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{:.6}\t{:.6}",
            r.n0, r.t_previous, r.t_here, r.exp_previous, r.exp_here
        );
    }
    s
}

pub fn render_table2(rows: &[Table2Row]) -> String {
    let mut s = String::from("m0\tn0\tprevious\tmerged\tsubstituted\texp_previous\texp_merged\texp_substituted\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}",
            r.m0, r.n0, r.t_previous, r.t_merged, r.t_substituted, r.exp_previous, r.exp_merged, r.exp_substituted
        );
    }
    s
}

pub fn render_table4(rows: &[Table4Row]) -> String {
    let mut s = String::from("n0\tnnzU\tnnsU\tnnzV\tnnsV\tnnzW\tnnsW\tt0\ts0\tc\n");
    for r in rows {
        let st = &r.stats;
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.3}",
            r.n0, st.u.nnz, st.u.nns, st.v.nnz, st.v.nns, st.w.nnz, st.w.nns, r.t0, r.s0, r.leading_coefficient
        );
    }
    s
}
