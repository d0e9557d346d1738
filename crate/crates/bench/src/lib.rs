//! Shared fixtures for the benchmarks.

use triagg_core::generator::gen_new25_decomposed;
use triagg_core::{BilinearAlgorithm, DecomposedAlgorithm, Domain, Matrix, PrimeDomain, PrimeField};

pub fn prime_domain() -> PrimeDomain {
    PrimeDomain(PrimeField::new(triagg_core::verifier::DEFAULT_PRIME).expect("default prime"))
}

/// Deterministic dense operand with small pseudo-random entries.
pub fn operand<D: Domain>(d: &D, n: usize, salt: u64) -> Matrix<D::Elem> {
    let mut x = salt.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    Matrix::from_fn(n, n, |_, _| {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        let r = triagg_core::Rational::new((x % 19) as i64 - 9, 1);
        d.from_rational(&r).expect("small integers embed")
    })
}

pub fn new25(n0: usize) -> (BilinearAlgorithm, DecomposedAlgorithm) {
    let g = gen_new25_decomposed(n0).expect("valid base");
    (g.to_full().expect("expands"), g.decomposed)
}
