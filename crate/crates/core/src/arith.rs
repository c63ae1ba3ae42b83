//! Exact modular arithmetic with 128-bit intermediates, primality,
//! primitive roots and prime enumeration.

use std::sync::OnceLock;

use crate::{Error, Result};

/// Largest prime accepted for single evaluations.
pub const MAX_PRIME: u64 = 1_000_000_000;

/// Largest prime for which sweeps over the whole of `[0, p^2)` are allowed.
pub const EXHAUSTIVE_PRIME_CAP: u64 = 1_000_000;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `base^exp mod modulus`. The exponent is 128 bits wide so that `w * p`
/// never overflows for `w, p < 2^64`.
pub fn pow_mod(base: u64, exp: u128, modulus: u64) -> Result<u64> {
    if modulus == 0 {
        return Err(Error::invalid("modulus must be positive"));
    }
    Ok(pow_mod_unchecked(base, exp, modulus))
}

#[inline]
pub(crate) fn pow_mod_unchecked(base: u64, mut exp: u128, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Inverse of `a` modulo `p` (any modulus coprime to `a` works).
pub fn inv_mod(a: u64, p: u64) -> Result<u64> {
    if p == 0 {
        return Err(Error::invalid("modulus must be positive"));
    }
    let (mut old_r, mut r) = ((a % p) as i128, p as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 {
        return Err(Error::NotInvertible { a, modulus: p });
    }
    Ok(old_s.rem_euclid(p as i128) as u64)
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

/// Deterministic Miller-Rabin; the first twelve primes are a witness set
/// valid for every `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod_unchecked(a, d as u128, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors of `n`, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut f = 2u64;
    while f * f <= n {
        if n.is_multiple_of(f) {
            out.push(f);
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest generator of the multiplicative group mod `p`.
pub fn primitive_root(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    if p == 2 {
        return Ok(1);
    }
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| {
            factors
                .iter()
                .all(|&f| pow_mod_unchecked(g, ((p - 1) / f) as u128, p) != 1)
        })
        .ok_or_else(|| Error::Internal(format!("no primitive root found for {p}")))
}

/// All primes `<= x`, ascending (sieve of Eratosthenes).
pub fn primes_up_to(x: u64) -> Vec<u64> {
    if x < 2 {
        return Vec::new();
    }
    let n = x as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Odd primes in `[lo, hi]`.
pub fn odd_primes_between(lo: u64, hi: u64) -> Vec<u64> {
    primes_up_to(hi).into_iter().filter(|&p| p >= lo && p > 2).collect()
}

/// An odd prime `p` together with `p^2`, its smallest primitive root and a
/// lazily built table of inverses mod `p`.
#[derive(Debug)]
pub struct PrimeContext {
    p: u64,
    p_sq: u64,
    gamma: u64,
    inverses: OnceLock<Vec<u32>>,
}

impl Clone for PrimeContext {
    fn clone(&self) -> Self {
        PrimeContext {
            p: self.p,
            p_sq: self.p_sq,
            gamma: self.gamma,
            inverses: OnceLock::new(),
        }
    }
}

impl PrimeContext {
    pub fn new(p: u64) -> Result<Self> {
        if p > MAX_PRIME {
            return Err(Error::limit(format!("p = {p} exceeds {MAX_PRIME}")));
        }
        if p.is_multiple_of(2) || !is_prime(p) {
            return Err(Error::invalid(format!("{p} is not an odd prime")));
        }
        Ok(PrimeContext {
            p,
            p_sq: p * p,
            gamma: primitive_root(p)?,
            inverses: OnceLock::new(),
        })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn p_sq(&self) -> u64 {
        self.p_sq
    }

    /// Smallest primitive root.
    #[inline]
    pub fn gamma(&self) -> u64 {
        self.gamma
    }

    pub fn require_exhaustive(&self) -> Result<()> {
        if self.p > EXHAUSTIVE_PRIME_CAP {
            return Err(Error::limit(format!(
                "p = {} exceeds {EXHAUSTIVE_PRIME_CAP} for exhaustive sweeps",
                self.p
            )));
        }
        Ok(())
    }

    /// `a^{-1} mod p`. Uses the inverse table when `p` is within the
    /// exhaustive cap, extended Euclid otherwise.
    pub fn inv(&self, a: u64) -> Result<u64> {
        let a = a % self.p;
        if a == 0 {
            return Err(Error::NotInvertible { a, modulus: self.p });
        }
        if self.p <= EXHAUSTIVE_PRIME_CAP {
            Ok(self.inverse_table()[a as usize] as u64)
        } else {
            inv_mod(a, self.p)
        }
    }

    /// Inverses of `0..p` (entry 0 is 0). Built on first use.
    pub fn inverse_table(&self) -> &[u32] {
        self.inverses.get_or_init(|| {
            let p = self.p as usize;
            let mut inv = vec![0u32; p];
            if p > 1 {
                inv[1] = 1;
            }
            for i in 2..p {
                // i * (p / i) + p % i = p, so i^{-1} = -(p / i) * (p % i)^{-1}
                let t = (p / i) as u64 * inv[p % i] as u64 % self.p;
                inv[i] = ((self.p - t) % self.p) as u32;
            }
            inv
        })
    }

    /// `(a - b) mod p` for residues.
    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b % self.p) % self.p
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }
}
