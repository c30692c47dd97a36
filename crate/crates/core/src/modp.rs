//! Word-size prime fields and rational reconstruction.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::diffpoly::Rational;

/// Arithmetic modulo a prime below 2^63.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fp {
    pub p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Self {
        Fp { p }
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
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Inverse of a nonzero element.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a != 0);
        self.pow(a, self.p - 2)
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        let r = (x as i128).rem_euclid(self.p as i128);
        r as u64
    }

    pub fn from_bigint(&self, x: &BigInt) -> u64 {
        let r = x.mod_floor(&BigInt::from(self.p));
        r.to_u64().expect("reduced residue fits")
    }

    /// Image of a rational, `None` when the denominator vanishes mod p.
    pub fn from_rational(&self, x: &Rational) -> Option<u64> {
        let d = self.from_bigint(x.denom());
        if d == 0 {
            return None;
        }
        Some(self.mul(self.from_bigint(x.numer()), self.inv(d)))
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let f = Fp::new(n);
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The `count` largest primes below 2^62, in decreasing order.
pub fn primes(count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut c = (1u64 << 62) - 1;
    while out.len() < count {
        if is_prime_u64(c) {
            out.push(c);
        }
        c -= 2;
    }
    out
}

/// Chinese remaindering of `(r1 mod m1)` and `(r2 mod m2)` for coprime moduli.
pub fn crt(r1: &BigInt, m1: &BigInt, r2: u64, m2: u64) -> BigInt {
    let m2b = BigInt::from(m2);
    let f = Fp::new(m2);
    let r1m = f.from_bigint(r1);
    let m1m = f.from_bigint(m1);
    let t = f.mul(f.sub(r2, r1m), f.inv(m1m));
    r1 + m1 * BigInt::from(t)
        .mod_floor(&m2b)
}

/// Finds `a/b ≡ r (mod m)` with `|a|, |b| ≤ sqrt(m/2)`.
pub fn rational_reconstruct(r: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), r.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if r1.gcd(&t1) != BigInt::one() && !r1.is_zero() {
        return None;
    }
    let (num, den) = if t1.sign() == Sign::Minus { (-r1, -t1) } else { (r1, t1) };
    Some(Rational::new(num, den))
}
