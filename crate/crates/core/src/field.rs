//! Arithmetic modulo a 64-bit prime, used for randomized verification and as
//! an exact execution domain.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// 2^61 - 1, the default verification modulus.
pub const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    mersenne: bool,
}

impl PrimeField {
    /// Moduli must be prime and below 2^63 so that sums of two residues fit.
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 63 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField {
            p,
            mersenne: p == MERSENNE_61,
        })
    }

    pub fn mersenne61() -> Self {
        PrimeField {
            p: MERSENNE_61,
            mersenne: true,
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let z = a as u128 * b as u128;
        if self.mersenne {
            let lo = (z as u64) & MERSENNE_61;
            let hi = (z >> 61) as u64;
            let r = lo + hi;
            if r >= MERSENNE_61 {
                r - MERSENNE_61
            } else {
                r
            }
        } else {
            (z % self.p as u128) as u64
        }
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    pub fn from_i64(&self, v: i64) -> u64 {
        let r = (v as i128).rem_euclid(self.p as i128);
        r as u64
    }

    fn from_bigint(&self, v: &BigInt) -> u64 {
        let m = BigInt::from(self.p);
        let mut r = v % &m;
        if r.is_negative() {
            r += &m;
        }
        r.to_u64().expect("residue fits in u64")
    }

    /// Projects a rational; fails when the denominator vanishes modulo p.
    pub fn from_rational(&self, r: &Rational) -> Result<u64> {
        let (n, d) = match r.as_small() {
            Some((n, d)) => (self.from_i64(n), self.from_i64(d)),
            None => (self.from_bigint(&r.numer()), self.from_bigint(&r.denom())),
        };
        let dinv = self.inv(d).ok_or(Error::BadPrime(self.p))?;
        Ok(self.mul(n, dinv))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }

    /// Maps a residue to the symmetric range, for display.
    pub fn to_signed(&self, a: u64) -> i128 {
        if a > self.p / 2 {
            a as i128 - self.p as i128
        } else {
            a as i128
        }
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n % q == 0 {
            return n == q;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primality() {
        assert!(is_prime(MERSENNE_61));
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
        assert!(!is_prime(1));
        assert!(is_prime(2));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2, 3, 5, 7
        assert!(PrimeField::new(15).is_err());
    }

    #[test]
    fn rational_projection() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.from_rational(&Rational::new(1, 2)).unwrap(), 4);
        assert_eq!(f.from_rational(&Rational::new(-3, 1)).unwrap(), 4);
        assert!(matches!(
            f.from_rational(&Rational::new(1, 14)),
            Err(Error::BadPrime(7))
        ));
    }

    proptest! {
        #[test]
        fn mersenne_mul_matches_generic(a in 0..MERSENNE_61, b in 0..MERSENNE_61) {
            let f = PrimeField::mersenne61();
            let expect = ((a as u128 * b as u128) % MERSENNE_61 as u128) as u64;
            prop_assert_eq!(f.mul(a, b), expect);
        }

        #[test]
        fn inverse(a in 1..MERSENNE_61) {
            let f = PrimeField::mersenne61();
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }
}
