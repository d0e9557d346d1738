//! Acceptance gate: one line per criterion.
//!
//! Criteria needing a 4x4x4 rank-48 algorithm read it from the path in
//! `TRIAGG_444_48` or from `tests/fixtures/alg444_48.json`. Without it those
//! checks are reported as failed and blocked on input; the process only
//! exits nonzero for failures that are not blocked.

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use triagg_core::analysis::*;
use triagg_core::dense::naive_product;
use triagg_core::engine::{count_operations, recursive_multiply, recursive_multiply_counted};
use triagg_core::generator::*;
use triagg_core::io;
use triagg_core::ops::{compose, find_kin_pairs, merge_kin, symmetrize};
use triagg_core::strassen::strassen;
use triagg_core::verifier::*;
use triagg_core::*;

const PRIME: u64 = (1 << 61) - 1;
const TRIALS: u32 = 20;
const EXP_TOL: f64 = 1e-6;
const LC_TOL: f64 = 0.05;

enum Outcome {
    Pass(String),
    Fail(String),
    /// Failed because an external input is missing.
    Blocked(String),
}

struct Check {
    failures: Vec<String>,
    blocked: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check {
            failures: vec![],
            blocked: vec![],
            notes: vec![],
        }
    }

    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(self) -> Outcome {
        let mut msg = self.notes.join("; ");
        if !self.failures.is_empty() {
            return Outcome::Fail(format!("{}; failed: {}", msg, self.failures.join(", ")));
        }
        if !self.blocked.is_empty() {
            msg.push_str(&format!("; blocked: {}", self.blocked.join(", ")));
            return Outcome::Blocked(msg);
        }
        Outcome::Pass(msg)
    }
}

fn replacement_48() -> Option<Result<BilinearAlgorithm>> {
    let path = std::env::var_os("TRIAGG_444_48")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/alg444_48.json"));
    path.exists().then(|| io::read_bilinear(&path))
}

const MISSING_48: &str = "no verified 4x4x4 rank-48 algorithm file (set TRIAGG_444_48)";

// n0, previous, here, exp previous, exp here
const TABLE1: [(usize, u128, u128, f64, f64); 13] = [
    (28, 10556, 10550, 2.780277, 2.780106),
    (30, 12704, 12688, 2.778337, 2.777967),
    (32, 15113, 15096, 2.776701, 2.776376),
    (34, 17808, 17790, 2.775498, 2.775211),
    (36, 20805, 20786, 2.774633, 2.774378),
    (38, 24120, 24100, 2.774037, 2.773809),
    (40, 27769, 27748, 2.773655, 2.77345),
    (42, 31768, 31746, 2.773444, 2.773258),
    (44, 36133, 36110, 2.773372, 2.773203),
    (46, 40880, 40856, 2.773412, 2.773258),
    (48, 46025, 46000, 2.773543, 2.773403),
    (50, 51584, 51558, 2.773749, 2.77362),
    (60, 86149, 86118, 2.775496, 2.775408),
];

// m0, previous squared, merged squared, substituted, three exponents
const TABLE2: [(usize, u128, u128, u128, f64, f64, f64); 13] = [
    (28, 111619225, 111302500, 111258400, 2.780533, 2.780106, 2.780047),
    (30, 161391616, 160985344, 160927744, 2.778337, 2.777967, 2.777914),
    (32, 228402769, 227889216, 227815232, 2.776701, 2.776376, 2.776329),
    (34, 317124864, 316484100, 316390464, 2.775498, 2.775211, 2.775169),
    (36, 432848025, 432057796, 431940832, 2.774633, 2.774378, 2.774340),
    (38, 581774400, 580810000, 580665600, 2.774037, 2.773809, 2.773775),
    (40, 771117361, 769951504, 769775104, 2.773655, 2.773450, 2.773418),
    (42, 1009205824, 1007808516, 1007595072, 2.773444, 2.773258, 2.773230),
    (44, 1305593689, 1303932100, 1303676064, 2.773372, 2.773203, 2.773177),
    (46, 1671174400, 1669212736, 1668908032, 2.773412, 2.773258, 2.773234),
    (48, 2118300625, 2116000000, 2115640000, 2.773543, 2.773403, 2.773381),
    (50, 2660909056, 2658227364, 2657804864, 2.773749, 2.773620, 2.773600),
    (60, 7421650201, 7416309924, 7415445024, 2.775496, 2.775408, 2.775394),
];

// n0, nnz/nns of U, V, W, t0, s0, c
const TABLE4: [(usize, [usize; 6], usize, usize, f64); 9] = [
    (20, [12089, 44, 12166, 154, 12133, 1540], 4378, 484, 8.419),
    (30, [35824, 64, 35936, 224, 35888, 3200], 12688, 1024, 8.265),
    (40, [79359, 84, 79506, 294, 79443, 5460], 27748, 1764, 8.193),
    (42, [90970, 88, 91124, 308, 91058, 5984], 31746, 1936, 8.183),
    (44, [103661, 92, 103822, 322, 103753, 6532], 36110, 2116, 8.174),
    (46, [117480, 96, 117648, 336, 117576, 7104], 40856, 2304, 8.165),
    (48, [132475, 100, 132650, 350, 132575, 7700], 46000, 2500, 8.158),
    (50, [148694, 104, 148876, 364, 148798, 8320], 51558, 2704, 8.151),
    (60, [249829, 124, 250046, 434, 249953, 11780], 86118, 3844, 8.124),
];

fn criterion_1() -> Result<Outcome> {
    let mut c = Check::new();
    let mut slowest = 0f64;
    for &(n0, previous, here, _, _) in &TABLE1 {
        let start = Instant::now();
        let new = gen_new25_decomposed(n0)?.t() as u128;
        let pan = gen_pan_decomposed(n0)?.t() as u128;
        slowest = slowest.max(start.elapsed().as_secs_f64());
        c.expect(new == here, format!("new25({n0}) = {new}, expected {here}"));
        if n0 == 28 {
            // the printed previous best at 28 comes from a different
            // construction and is below this family's count
            c.expect(pan == t_pan(n0)?, format!("pan({n0}) = {pan}"));
            c.note(format!("pan(28) = {pan} (printed previous best {previous})"));
        } else {
            c.expect(pan == previous, format!("pan({n0}) = {pan}, expected {previous}"));
        }
    }
    // the full-basis generator agrees at the featured base
    let full = gen_new25(44)?;
    c.expect(full.t() == 36110, "full-basis new25(44)");
    c.expect(slowest < 60.0, format!("slowest base took {slowest:.1}s"));
    c.note(format!("13 bases, slowest {slowest:.2}s"));
    Ok(c.finish())
}

fn criterion_2() -> Result<Outcome> {
    let mut c = Check::new();
    let mut worst = 0f64;
    let mut cmp = |c: &mut Check, what: String, got: f64, want: f64| {
        let err = (got - want).abs();
        worst = worst.max(err);
        c.expect(err <= EXP_TOL, format!("{what}: {got:.7} vs {want}"));
    };
    for &(n0, previous, here, ep, eh) in &TABLE1 {
        cmp(&mut c, format!("table 1 previous {n0}"), exponent(n0 as u128, previous), ep);
        cmp(&mut c, format!("table 1 here {n0}"), exponent(n0 as u128, here), eh);
    }
    for &(m0, p2, h2, s, ep, eh, es) in &TABLE2 {
        let n0 = (m0 * m0) as u128;
        c.expect(t_pan(m0)?.pow(2) == p2, format!("table 2 previous rank {m0}"));
        c.expect(t_new(m0)?.pow(2) == h2, format!("table 2 merged rank {m0}"));
        c.expect(t_new25b(m0)? == s, format!("table 2 substituted rank {m0}"));
        cmp(&mut c, format!("table 2 previous {m0}"), exponent(n0, p2), ep);
        cmp(&mut c, format!("table 2 merged {m0}"), exponent(n0, h2), eh);
        cmp(&mut c, format!("table 2 substituted {m0}"), exponent(n0, s), es);
    }
    cmp(&mut c, "strassen".into(), exponent(2, 7), 2.807355);
    let a = optimal_base(SearchFamily::New25);
    c.expect(a.n0 == 44, format!("new25 optimum at {}", a.n0));
    cmp(&mut c, "new25 optimum".into(), a.exponent, 2.773203);
    c.expect(a.tail_excluded, "new25 tail bound");
    let b = optimal_base(SearchFamily::New25b);
    c.expect(b.n0 == 1936, format!("new25b optimum at {}", b.n0));
    cmp(&mut c, "new25b optimum".into(), b.exponent, 2.773177);
    c.expect(b.tail_excluded, "new25b tail bound");
    // brute-force oracle over the same range
    for fam in [SearchFamily::New25, SearchFamily::New25b] {
        let mut best = (0u128, f64::INFINITY);
        for k in (2..243usize).step_by(2).filter(|&k| k != 16) {
            let (n, t) = match fam {
                SearchFamily::New25 => (k as u128, t_new(k)?),
                SearchFamily::New25b => ((k * k) as u128, t_new(k)?.pow(2) - ((k / 2 + 1) * (k / 2)).pow(2) as u128),
            };
            let e = (t as f64).ln() / (n as f64).ln();
            if e < best.1 {
                best = (n, e);
            }
        }
        c.expect(best.0 == optimal_base(fam).n0, format!("{fam:?} oracle disagrees"));
    }
    c.note(format!(
        "max deviation {worst:.1e}; optima (44, {:.6}) and (1936, {:.6})",
        a.exponent, b.exponent
    ));
    Ok(c.finish())
}

fn criterion_3() -> Result<Outcome> {
    let mut c = Check::new();
    let s = strassen();
    let s2 = compose(&s, &s);
    let sym = symmetrize(&s);
    for (name, alg) in [("strassen", &s), ("strassen^2", &s2), ("symmetrized", &sym)] {
        c.expect(verify_exact(alg, DEFAULT_BUDGET)?, format!("exact {name}"));
    }
    for n0 in [6, 8, 10, 12] {
        c.expect(verify_exact(&gen_pan(n0)?, DEFAULT_BUDGET)?, format!("exact pan({n0})"));
        c.expect(verify_exact(&gen_new25(n0)?, DEFAULT_BUDGET)?, format!("exact new25({n0})"));
    }
    let small = [
        ("strassen", s.clone()),
        ("strassen^2", s2.clone()),
        ("pan(2)", gen_pan(2)?),
        ("new25(2)", gen_new25(2)?),
        ("pan(4)", gen_pan(4)?),
        ("new25(4)", gen_new25(4)?),
    ];
    for (name, alg) in &small {
        c.expect(verify_brent(alg, DEFAULT_BUDGET)?, format!("brent {name}"));
    }
    c.note(format!("11 exact and {} Brent checks", small.len()));
    Ok(c.finish())
}

/// Perturbs one coefficient: a sign flip or an off-by-one.
fn perturbed(alg: &BilinearAlgorithm, rng: &mut ChaCha8Rng) -> Result<BilinearAlgorithm> {
    let which = rng.gen_range(0..3);
    let (dims, mut u, mut v, mut w, _) = alg.clone().into_parts();
    let target = match which {
        0 => &mut u,
        1 => &mut v,
        _ => &mut w,
    };
    let mut e: Vec<_> = target.iter().map(|(r, c, x)| (r, c, x.clone())).collect();
    let k = rng.gen_range(0..e.len());
    e[k].2 = if rng.gen_bool(0.5) { -&e[k].2 } else { &e[k].2 + &Rational::one() };
    if e[k].2.is_zero() {
        e[k].2 = Rational::from(2);
    }
    *target = SparseMatrix::from_entries(target.nrows(), target.ncols(), e)?;
    BilinearAlgorithm::new(dims, u, v, w)
}

fn criterion_4() -> Result<Outcome> {
    let mut c = Check::new();
    let s = strassen();
    let g44 = gen_new25(44)?;
    let g20 = gen_new25(20)?;
    c.expect(verify_random(&g44, TRIALS, PRIME, 1)?.passed, "new25(44)");
    c.expect(verify_random(&g20, TRIALS, PRIME, 2)?.passed, "new25(20)");
    let lazy = LazyCompose { outer: &s, inner: &g44 };
    c.expect(lazy.rank() == 252770, format!("composed rank {}", lazy.rank()));
    c.expect(verify_random(&lazy, TRIALS, PRIME, 3)?.passed, "strassen x new25(44)");
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut detected = 0;
    for k in 0..8 {
        let bad = perturbed(&g20, &mut rng)?;
        let out = verify_random(&bad, TRIALS, PRIME, 100 + k)?;
        c.expect(!out.passed, format!("corruption {k} undetected"));
        detected += !out.passed as u32;
    }
    c.note(format!("4 schemes, {detected}/8 corruptions detected"));
    match replacement_48() {
        None => c.blocked.push(format!("new25b(20) with replacement: {MISSING_48}")),
        Some(rep) => {
            let b = gen_new25b(20, Some(rep?))?;
            c.expect(b.rank() == 19154784, format!("new25b(20) rank {}", b.rank()));
            c.expect(verify_random(&b, TRIALS, PRIME, 5)?.passed, "new25b(20)");
        }
    }
    Ok(c.finish())
}

fn criterion_5() -> Result<Outcome> {
    let mut c = Check::new();
    let b = gen_new25b(44, None)?;
    let r = b.report();
    c.expect(r.rank == 1303932100, format!("rank {}", r.rank));
    c.expect(r.tagged_blocks == 256036, format!("tagged blocks {}", r.tagged_blocks));
    c.note(format!("rank {} with {} tagged blocks", r.rank, r.tagged_blocks));
    match replacement_48() {
        None => c.blocked.push(format!("substituted rank: {MISSING_48}")),
        Some(rep) => {
            let rep = rep?;
            c.expect(rep.t() == 48, format!("replacement rank {}", rep.t()));
            let b = gen_new25b(44, Some(rep))?;
            c.expect(b.rank() == 1303676064, format!("substituted rank {}", b.rank()));
        }
    }
    Ok(c.finish())
}

fn criterion_6() -> Result<Outcome> {
    let mut c = Check::new();
    let mut deviations = 0;
    let mut worst = 0f64;
    for &(n0, counts, t0, s0, want) in &TABLE4 {
        let g = gen_new25_decomposed(n0)?;
        let st = decomposed_stats(&g.decomposed);
        let got = [st.u.nnz, st.u.nns, st.v.nnz, st.v.nns, st.w.nnz, st.w.nns];
        if got != counts || (st.t, g.decomposed.s0()) != (t0, s0) {
            deviations += 1;
            c.note(format!("n0 {n0}: counts {got:?} differ from {counts:?}"));
        }
        let lc = leading_coefficient(&g.decomposed)?.to_f64();
        worst = worst.max((lc - want).abs());
        c.expect((lc - want).abs() <= LC_TOL, format!("c({n0}) = {lc:.4}, expected {want}"));
    }
    // worked example from the printed n0 = 44 statistics
    let (q_u, q_v, q_w) = (103661 + 92 - 36110, 103822 + 322 - 36110, 103753 + 6532 - 2116);
    c.expect((q_u, q_v, q_w) == (67643, 68034, 108169), "worked q values");
    let lc = leading_coefficient_from(q_u + q_v + q_w, 36110, 2116)?.to_f64();
    c.expect((lc - 8.174).abs() <= LC_TOL, format!("worked c = {lc}"));
    c.note(format!("{deviations} count deviations, max |c - printed| {worst:.4}"));
    Ok(c.finish())
}

fn criterion_7() -> Result<Outcome> {
    let mut c = Check::new();
    let g20 = gen_new25(20)?;
    let pd = PrimeDomain(PrimeField::new(PRIME)?);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = Matrix::from_fn(400, 400, |_, _| pd.sample(&mut rng));
    let b = Matrix::from_fn(400, 400, |_, _| pd.sample(&mut rng));
    let start = Instant::now();
    let (fast, count) = recursive_multiply_counted(&pd, &g20, &a, &b, 2, 0)?;
    let took = start.elapsed().as_secs_f64();
    let slow = naive_product(&a, &b, 0, |x, y| pd.add(x, y), |x, y| pd.mul(x, y))?;
    c.expect(fast == slow, "new25(20) two levels over the prime field");
    c.expect(count.multiplications == 4378u128.pow(2), format!("{} multiplications", count.multiplications));
    c.expect(count == count_operations(&g20, 2)?, "instrumented and predicted counts");
    let rd = RationalDomain;
    let s = strassen();
    let a = Matrix::from_fn(8, 8, |_, _| rd.sample(&mut rng));
    let b = Matrix::from_fn(8, 8, |_, _| rd.sample(&mut rng));
    let fast = recursive_multiply(&rd, &s, &a, &b, 3, 0)?;
    c.expect(fast == a.mul(&b)?, "strassen three levels over the rationals");
    c.expect(count_operations(&s, 3)?.multiplications == 343, "strassen count");
    c.expect(count_operations(&gen_new25(44)?, 1)?.multiplications == 36110, "new25(44) count");
    c.note(format!("400x400 product in {took:.1}s"));
    Ok(c.finish())
}

fn criterion_8() -> Result<Outcome> {
    let mut c = Check::new();
    let pan = gen_pan(44)?;
    let pairs = find_kin_pairs(&pan);
    let targeted = targeted_pairs(&pan, &pairs);
    c.expect(targeted.len() >= 23, format!("{} targeted pairs", targeted.len()));
    let merged = merge_kin(&pan, &targeted)?;
    c.expect(merged.t() == 36110, format!("merged rank {}", merged.t()));
    c.expect(verify_random(&pan, TRIALS, PRIME, 8)?.passed, "precursor verification");
    c.expect(verify_random(&merged, TRIALS, PRIME, 8)?.passed, "merged verification");
    c.note(format!("{} kin pairs, {} targeted, {} rows", pairs.len(), targeted.len(), merged.t()));
    Ok(c.finish())
}

fn criterion_9() -> Result<Outcome> {
    let mut c = Check::new();
    let mode = VerifyMode::Random {
        trials: 5,
        prime: PRIME,
        seed: 42,
    };
    let run = || -> Result<(String, String, serde_json::Value)> {
        let mut g = gen_new25(20)?;
        let report = certify(&mut g, &mode)?;
        let dec = gen_new25_decomposed(20)?;
        Ok((io::to_json(&g), io::decomposed_to_json(&dec.decomposed), report.deterministic_json()))
    };
    let (f1, d1, r1) = run()?;
    let (f2, d2, r2) = run()?;
    c.expect(f1 == f2, "algorithm files differ between runs");
    c.expect(d1 == d2, "decomposed files differ between runs");
    c.expect(r1 == r2, "reports differ between runs");
    let back = io::from_json(&f1)?;
    c.expect(io::to_json(&back) == f1, "export after import");
    c.expect(back.is_verified(), "certificate survives");
    let dback = io::decomposed_from_json(&d1)?;
    c.expect(io::decomposed_to_json(&dback) == d1, "decomposed export after import");
    let s = strassen();
    c.expect(io::from_json(&io::to_json(&s))? == s, "strassen round trip");
    c.note(format!("{} byte file reproduced", f1.len()));
    Ok(c.finish())
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 9] = [
        ("rank reproduction", criterion_1),
        ("exponent reproduction", criterion_2),
        ("exact correctness", criterion_3),
        ("probabilistic correctness", criterion_4),
        ("two-step accounting", criterion_5),
        ("leading coefficient", criterion_6),
        ("execution", criterion_7),
        ("kin machinery", criterion_8),
        ("round trip and determinism", criterion_9),
    ];
    let only: Option<usize> = std::env::var("TRIAGG_CRITERION").ok().and_then(|s| s.parse().ok());
    let (mut hard, mut blocked) = (0, 0);
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome::Fail(format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        let (tag, msg) = match outcome {
            Outcome::Pass(m) => ("PASS", m),
            Outcome::Fail(m) => {
                hard += 1;
                ("FAIL", m)
            }
            Outcome::Blocked(m) => {
                blocked += 1;
                ("FAIL", m)
            }
        };
        println!("criterion {}: {tag} [{name}] ({secs:.1}s) {msg}", i + 1);
    }
    println!("summary: {hard} failed, {blocked} failed on missing input");
    if hard > 0 {
        std::process::exit(1);
    }
}
