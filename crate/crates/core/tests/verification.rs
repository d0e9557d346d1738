use proptest::prelude::*;
use triagg_core::generator::gen_new25_decomposed;
use triagg_core::ops::{compose, rotate, symmetrize};
use triagg_core::strassen::strassen;
use triagg_core::verifier::*;
use triagg_core::{BilinearAlgorithm, DecomposedAlgorithm, Error, Rational, SparseMatrix};

fn bump(m: &SparseMatrix, k: usize) -> SparseMatrix {
    let mut e: Vec<_> = m.iter().map(|(r, c, v)| (r, c, v.clone())).collect();
    e[k].2 = &e[k].2 + &Rational::one();
    if e[k].2.is_zero() {
        e[k].2 = Rational::from(2);
    }
    SparseMatrix::from_entries(m.nrows(), m.ncols(), e).unwrap()
}

fn corrupt(d: &DecomposedAlgorithm, which: usize, k: usize) -> DecomposedAlgorithm {
    let (mut u, mut v, mut w) = (d.u_phi().clone(), d.v_phi().clone(), d.w_phi().clone());
    match which {
        0 => u = bump(&u, k % u.nnz()),
        1 => v = bump(&v, k % v.nnz()),
        _ => w = bump(&w, k % w.nnz()),
    }
    DecomposedAlgorithm::new(d.n0(), d.phi().clone(), u, v, w, d.tags().to_vec()).unwrap()
}

#[test]
fn checks_agree_on_small_algorithms() {
    let s = strassen();
    for alg in [s.clone(), compose(&s, &s), symmetrize(&s), rotate(&s)] {
        assert!(verify_exact(&alg, DEFAULT_BUDGET).unwrap());
        assert!(verify_brent(&alg, DEFAULT_BUDGET).unwrap());
        assert!(verify_random(&alg, 3, DEFAULT_PRIME, 1).unwrap().passed);
        assert!(verify_multiply(&alg, 1, 2, MultiplyDomain::Rational, 2).unwrap());
    }
}

#[test]
fn corrupted_coefficients_detected() {
    let g = gen_new25_decomposed(20).unwrap();
    for (which, k) in [(0, 0), (1, 777), (2, 4242), (0, 9999), (2, 1)] {
        let bad = corrupt(&g.decomposed, which, k);
        let out = verify_random(&bad, 20, DEFAULT_PRIME, 5).unwrap();
        assert!(!out.passed, "corruption {which}/{k} missed");
    }
}

#[test]
fn denominators_must_be_invertible() {
    // the diagonal scaling at n0 = 44 is 14/23
    let g = gen_new25_decomposed(44).unwrap();
    assert!(matches!(verify_random(&g, 1, 23, 0), Err(Error::BadPrime(23))));
    assert!(matches!(verify_random(&g, 1, 24, 0), Err(Error::NotPrime(24))));
}

#[test]
fn randomized_runs_are_reproducible() {
    let mut a = strassen();
    let mut b = strassen();
    let mode = VerifyMode::Random { trials: 4, prime: DEFAULT_PRIME, seed: 77 };
    let ra = certify(&mut a, &mode).unwrap();
    let rb = certify(&mut b, &mode).unwrap();
    assert_eq!(ra.deterministic_json(), rb.deterministic_json());
    assert_eq!(a.certificate(), b.certificate());
}

#[test]
fn brent_reports_the_violation() {
    let s = strassen();
    let (dims, u, v, w, _) = s.into_parts();
    let w = bump(&w, 0);
    let bad = BilinearAlgorithm::new(dims, u, v, w).unwrap();
    let viol = brent_violation(&bad, DEFAULT_BUDGET).unwrap().expect("violation");
    assert_ne!(viol.value, viol.expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn expansion_ignores_row_order(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let s = strassen();
        let s2 = compose(&s, &s);
        let mut order: Vec<usize> = (0..s2.t()).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let p = BilinearAlgorithm::new(
            s2.dims(),
            s2.u().select_rows(&order),
            s2.v().select_rows(&order),
            s2.w().select_rows(&order),
        ).unwrap();
        prop_assert_eq!(expand_tensor(&p, DEFAULT_BUDGET).unwrap(), expand_tensor(&s2, DEFAULT_BUDGET).unwrap());
    }
}
