//! Algebra of bilinear algorithms: rotation, composition, symmetrization,
//! kin-row merging, de Groote transforms and sub-algorithm substitution.

use std::collections::{HashMap, HashSet};

use crate::algorithm::{BilinearAlgorithm, Certificate, Dims, RowTag, TraceCell};
use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::sparse::{add_rows, RowView, SparseMatrix, SparseRow};

/// Cyclic rotation `(U, V, W) -> (V, W, U)`.
pub fn rotate(alg: &BilinearAlgorithm) -> BilinearAlgorithm {
    let mut out = BilinearAlgorithm::with_tags(
        alg.dims().rotated(),
        alg.v().clone(),
        alg.w().clone(),
        alg.u().clone(),
        alg.tags().to_vec(),
    )
    .expect("rotation preserves shapes");
    out.set_certificate(Certificate::derive("rotate", &[alg.certificate()]));
    out
}

/// Maps a Kronecker column index of an `(r1 x c1) (x) (r2 x c2)` operand pair
/// to the row-major index of the `(r1 r2) x (c1 c2)` block matrix.
pub fn kron_to_row_major(r1: usize, c1: usize, r2: usize, c2: usize) -> Vec<usize> {
    let mut perm = vec![0; r1 * c1 * r2 * c2];
    for bi in 0..r1 {
        for bj in 0..c1 {
            for ii in 0..r2 {
                for ij in 0..c2 {
                    let kron = (bi * c1 + bj) * (r2 * c2) + ii * c2 + ij;
                    perm[kron] = (bi * r2 + ii) * (c1 * c2) + bj * c2 + ij;
                }
            }
        }
    }
    perm
}

/// Kronecker composition: the outer algorithm acts on blocks, the inner one
/// inside each block. Output columns are row-major in the big operands.
pub fn compose(outer: &BilinearAlgorithm, inner: &BilinearAlgorithm) -> BilinearAlgorithm {
    let (d1, d2) = (outer.dims(), inner.dims());
    let dims = Dims::new(d1.m * d2.m, d1.n * d2.n, d1.p * d2.p);
    let u = outer
        .u()
        .kron(inner.u())
        .permute_cols(&kron_to_row_major(d1.m, d1.n, d2.m, d2.n));
    let v = outer
        .v()
        .kron(inner.v())
        .permute_cols(&kron_to_row_major(d1.n, d1.p, d2.n, d2.p));
    let w = outer
        .w()
        .kron(inner.w())
        .permute_cols(&kron_to_row_major(d1.p, d1.m, d2.p, d2.m));
    let mut tags = Vec::with_capacity(outer.t() * inner.t());
    for a in outer.tags() {
        for b in inner.tags() {
            tags.push(RowTag::Composed {
                left: Box::new(a.clone()),
                right: Box::new(b.clone()),
            });
        }
    }
    let mut out = BilinearAlgorithm::with_tags(dims, u, v, w, tags).expect("shapes agree");
    out.set_certificate(Certificate::derive(
        "compose",
        &[outer.certificate(), inner.certificate()],
    ));
    out
}

/// `compose(alg, compose(rotate(alg), rotate(rotate(alg))))`: a square
/// algorithm of size `mnp` and rank `t^3`.
pub fn symmetrize(alg: &BilinearAlgorithm) -> BilinearAlgorithm {
    let r1 = rotate(alg);
    let r2 = rotate(&r1);
    compose(alg, &compose(&r1, &r2))
}

/// Greedy disjoint kin pairs in row order: each unmatched row is paired with
/// the first later unmatched row agreeing with it in two of U, V, W.
pub fn find_kin_pairs(alg: &BilinearAlgorithm) -> Vec<(usize, usize)> {
    type Key<'a> = (RowView<'a>, RowView<'a>);
    let t = alg.t();
    let mut buckets: [HashMap<Key<'_>, Vec<usize>>; 3] = Default::default();
    for r in 0..t {
        let (u, v, w) = (alg.u().row(r), alg.v().row(r), alg.w().row(r));
        buckets[0].entry((u, v)).or_default().push(r);
        buckets[1].entry((u, w)).or_default().push(r);
        buckets[2].entry((v, w)).or_default().push(r);
    }
    let mut matched = vec![false; t];
    let mut pairs = Vec::new();
    for r in 0..t {
        if matched[r] {
            continue;
        }
        let (u, v, w) = (alg.u().row(r), alg.v().row(r), alg.w().row(r));
        let keys = [(u, v), (u, w), (v, w)];
        let mut best: Option<usize> = None;
        for (b, key) in buckets.iter().zip(keys) {
            let list = &b[&key];
            if list.len() < 2 {
                continue;
            }
            if let Some(&j) = list.iter().find(|&&j| j > r && !matched[j]) {
                best = Some(best.map_or(j, |x: usize| x.min(j)));
            }
        }
        if let Some(j) = best {
            matched[r] = true;
            matched[j] = true;
            pairs.push((r, j));
        }
    }
    pairs
}

/// Merges disjoint kin pairs. For a pair `(i, j)`, the matrix in which the
/// rows disagree gets row `i` replaced by the sum of rows `i` and `j`; row
/// `j` is removed and row `i` keeps its tag.
pub fn merge_kin(alg: &BilinearAlgorithm, pairs: &[(usize, usize)]) -> Result<BilinearAlgorithm> {
    let t = alg.t();
    let mut seen = HashSet::new();
    let mut partner: HashMap<usize, usize> = HashMap::new();
    for &(a, b) in pairs {
        if a >= t || b >= t {
            return Err(Error::Dimension(format!("kin pair ({a}, {b}) out of range")));
        }
        if a == b || !alg.are_kin(a, b) {
            return Err(Error::NotKin(a, b));
        }
        for x in [a, b] {
            if !seen.insert(x) {
                return Err(Error::OverlappingPairs(x));
            }
        }
        let (i, j) = (a.min(b), a.max(b));
        partner.insert(i, j);
    }
    let removed: HashSet<usize> = partner.values().copied().collect();
    let (mut u, mut v, mut w, mut tags) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for r in 0..t {
        if removed.contains(&r) {
            continue;
        }
        let (mut ur, mut vr, mut wr): (SparseRow, SparseRow, SparseRow) = (
            alg.u().row(r).to_owned_row(),
            alg.v().row(r).to_owned_row(),
            alg.w().row(r).to_owned_row(),
        );
        if let Some(&j) = partner.get(&r) {
            let eq_u = alg.u().row(r) == alg.u().row(j);
            let eq_v = alg.v().row(r) == alg.v().row(j);
            if eq_u && eq_v {
                wr = add_rows(alg.w().row(r), alg.w().row(j));
            } else if eq_u {
                vr = add_rows(alg.v().row(r), alg.v().row(j));
            } else {
                ur = add_rows(alg.u().row(r), alg.u().row(j));
            }
        }
        u.push(ur);
        v.push(vr);
        w.push(wr);
        tags.push(alg.tags()[r].clone());
    }
    let mut out = BilinearAlgorithm::with_tags(
        alg.dims(),
        SparseMatrix::from_rows(alg.u().ncols(), u),
        SparseMatrix::from_rows(alg.v().ncols(), v),
        SparseMatrix::from_rows(alg.w().ncols(), w),
        tags,
    )?;
    out.set_certificate(Certificate::derive("merge_kin", &[alg.certificate()]));
    Ok(out)
}

/// Sandwich transform by an invertible `n x n` matrix `K`:
/// `U' = U (I_m (x) K^T)`, `V' = V (K^-1 (x) I_p)`, `W' = W`.
/// Equivalently the algorithm now multiplies `A K` by `K^-1 B`.
pub fn degroote_transform(alg: &BilinearAlgorithm, k: &Matrix<crate::Rational>) -> Result<BilinearAlgorithm> {
    let Dims { m, n, p } = alg.dims();
    if k.rows() != n || k.cols() != n {
        return Err(Error::Dimension(format!(
            "transform matrix is {}x{}, middle dimension is {n}",
            k.rows(),
            k.cols()
        )));
    }
    let kinv = k.inverse()?;
    let left = Matrix::identity(m).kron(&k.transpose()).to_sparse();
    let right = kinv.kron(&Matrix::identity(p)).to_sparse();
    let mut out = BilinearAlgorithm::with_tags(
        alg.dims(),
        alg.u().matmul(&left)?,
        alg.v().matmul(&right)?,
        alg.w().clone(),
        alg.tags().to_vec(),
    )?;
    out.set_certificate(Certificate::derive("degroote", &[alg.certificate()]));
    Ok(out)
}

/// A 4x4 sub-problem inside a composed algorithm: maps from the composed
/// operand coordinates to the 16 row-major entries of the local 4x4
/// operands, and the 49-row local algorithm currently computing it.
#[derive(Clone, Debug)]
pub struct BlockEmbedding {
    pub e_a: SparseMatrix,
    pub e_b: SparseMatrix,
    pub e_c: SparseMatrix,
    pub local: BilinearAlgorithm,
    /// Rows of the composed algorithm produced by this block.
    pub rows: Vec<usize>,
}

impl BlockEmbedding {
    /// Builds the block for an outer and an inner trace cell of a
    /// composition `compose(outer_alg, inner_alg)`. The cells' embeddings
    /// must already be in the full operand coordinates of their algorithms.
    pub fn from_cells(
        outer: &TraceCell,
        inner: &TraceCell,
        outer_dims: Dims,
        inner_dims: Dims,
        inner_t: usize,
    ) -> Result<Self> {
        let (d1, d2) = (outer_dims, inner_dims);
        let local_perm = kron_to_row_major(2, 2, 2, 2);
        let embed = |eo: &SparseMatrix, ei: &SparseMatrix, (r1, c1, r2, c2): (usize, usize, usize, usize)| {
            let k = eo.kron(ei).permute_cols(&kron_to_row_major(r1, c1, r2, c2));
            let mut order = vec![0; 16];
            for (kr, &rm) in local_perm.iter().enumerate() {
                order[rm] = kr;
            }
            k.select_rows(&order)
        };
        let e_a = embed(&outer.e_a, &inner.e_a, (d1.m, d1.n, d2.m, d2.n));
        let e_b = embed(&outer.e_b, &inner.e_b, (d1.n, d1.p, d2.n, d2.p));
        let e_c = embed(&outer.e_c, &inner.e_c, (d1.p, d1.m, d2.p, d2.m));
        let local = compose(&outer.local, &inner.local);
        let mut rows = Vec::with_capacity(outer.local.t() * inner.local.t());
        for s1 in 0..outer.local.t() {
            for s2 in 0..inner.local.t() {
                rows.push((outer.first_row + s1) * inner_t + inner.first_row + s2);
            }
        }
        Ok(BlockEmbedding {
            e_a,
            e_b,
            e_c,
            local,
            rows,
        })
    }
}

/// Replaces each block's rows by `replacement` pushed through the block's
/// embeddings. Each block's rows must factor exactly as `local * E`; the
/// replacement must be a verified 4x4x4 algorithm. New rows take the place
/// of each block's first row; the rest of the block is removed.
pub fn substitute_blocks(
    alg: &BilinearAlgorithm,
    blocks: &[BlockEmbedding],
    replacement: &BilinearAlgorithm,
) -> Result<BilinearAlgorithm> {
    if replacement.dims() != Dims::square(4) {
        return Err(Error::Substitution("replacement must multiply 4x4 matrices".into()));
    }
    if !crate::verifier::verify_exact(replacement, crate::verifier::DEFAULT_BUDGET)? {
        return Err(Error::Substitution("replacement is not a correct 4x4x4 algorithm".into()));
    }
    let mut owner: HashMap<usize, (usize, bool)> = HashMap::new();
    for (b, blk) in blocks.iter().enumerate() {
        if blk.rows.len() != blk.local.t() {
            return Err(Error::Substitution(format!(
                "block {b} lists {} rows for a rank-{} local algorithm",
                blk.rows.len(),
                blk.local.t()
            )));
        }
        for (s, &r) in blk.rows.iter().enumerate() {
            if r >= alg.t() {
                return Err(Error::Substitution(format!("row {r} out of range")));
            }
            if owner.insert(r, (b, s == 0)).is_some() {
                return Err(Error::OverlappingPairs(r));
            }
        }
        let expect = [
            blk.local.u().matmul(&blk.e_a)?,
            blk.local.v().matmul(&blk.e_b)?,
            blk.local.w().matmul(&blk.e_c)?,
        ];
        for (s, &r) in blk.rows.iter().enumerate() {
            let got = [alg.u().row(r), alg.v().row(r), alg.w().row(r)];
            if expect.iter().zip(got).any(|(e, g)| e.row(s) != g) {
                return Err(Error::Substitution(format!(
                    "row {r} does not factor through block {b}"
                )));
            }
        }
    }
    let (mut u, mut v, mut w, mut tags) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for r in 0..alg.t() {
        match owner.get(&r) {
            None => {
                u.push(alg.u().row(r).to_owned_row());
                v.push(alg.v().row(r).to_owned_row());
                w.push(alg.w().row(r).to_owned_row());
                tags.push(alg.tags()[r].clone());
            }
            Some(&(b, true)) => {
                let blk = &blocks[b];
                let nu = replacement.u().matmul(&blk.e_a)?;
                let nv = replacement.v().matmul(&blk.e_b)?;
                let nw = replacement.w().matmul(&blk.e_c)?;
                u.extend(nu.to_rows());
                v.extend(nv.to_rows());
                w.extend(nw.to_rows());
                tags.extend(std::iter::repeat(RowTag::Untagged).take(replacement.t()));
            }
            Some(_) => {}
        }
    }
    let mut out = BilinearAlgorithm::with_tags(
        alg.dims(),
        SparseMatrix::from_rows(alg.u().ncols(), u),
        SparseMatrix::from_rows(alg.v().ncols(), v),
        SparseMatrix::from_rows(alg.w().ncols(), w),
        tags,
    )?;
    out.set_certificate(Certificate::derive(
        "substitute",
        &[alg.certificate(), replacement.certificate()],
    ));
    Ok(out)
}

/// Single-block form of [`substitute_blocks`].
pub fn substitute_subalgorithm(
    alg: &BilinearAlgorithm,
    block: &BlockEmbedding,
    replacement: &BilinearAlgorithm,
) -> Result<BilinearAlgorithm> {
    substitute_blocks(alg, std::slice::from_ref(block), replacement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;
    use crate::strassen::strassen;

    fn toy() -> BilinearAlgorithm {
        let u = SparseMatrix::from_i64(&[&[1], &[1]]);
        let v = SparseMatrix::from_i64(&[&[2], &[2]]);
        let w = SparseMatrix::from_i64(&[&[1], &[3]]);
        BilinearAlgorithm::new(Dims::square(1), u, v, w).unwrap()
    }

    #[test]
    fn kin_toy() {
        let alg = toy();
        assert_eq!(find_kin_pairs(&alg), vec![(0, 1)]);
        let merged = merge_kin(&alg, &[(0, 1)]).unwrap();
        assert_eq!(merged.t(), 1);
        assert_eq!(merged.w().get(0, 0), Rational::from(4));
    }

    #[test]
    fn kin_errors() {
        let s = strassen();
        assert!(find_kin_pairs(&s).is_empty());
        assert!(matches!(merge_kin(&s, &[(0, 1)]), Err(Error::NotKin(0, 1))));
        let toy = toy();
        assert!(matches!(
            merge_kin(&toy, &[(0, 1), (1, 0)]),
            Err(Error::OverlappingPairs(_))
        ));
    }

    #[test]
    fn rotation_has_period_three() {
        let s = strassen();
        assert_eq!(rotate(&rotate(&rotate(&s))), s);
        let naive = BilinearAlgorithm::naive(Dims::new(2, 3, 4));
        assert_eq!(rotate(&naive).dims(), Dims::new(3, 4, 2));
    }

    #[test]
    fn compose_with_unit_is_identity() {
        let s = strassen();
        let c = compose(&BilinearAlgorithm::unit(), &s);
        assert_eq!((c.u(), c.v(), c.w(), c.dims()), (s.u(), s.v(), s.w(), s.dims()));
        let c = compose(&s, &s);
        assert_eq!((c.t(), c.dims()), (49, Dims::square(4)));
    }

    #[test]
    fn symmetrize_ranks() {
        assert_eq!(symmetrize(&BilinearAlgorithm::unit()), {
            let mut u = compose(&BilinearAlgorithm::unit(), &BilinearAlgorithm::unit());
            u = compose(&BilinearAlgorithm::unit(), &u);
            u
        });
        let s = symmetrize(&strassen());
        assert_eq!((s.t(), s.dims()), (343, Dims::square(8)));
    }

    #[test]
    fn degroote_identity_and_singular() {
        let s = strassen();
        assert_eq!(degroote_transform(&s, &Matrix::identity(2)).unwrap(), s);
        let sing = Matrix::from_i64(2, 2, &[1, 1, 1, 1]);
        assert!(matches!(degroote_transform(&s, &sing), Err(Error::Singular(_))));
    }
}
