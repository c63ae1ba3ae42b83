//! Quotients in `F_q[X]/(P)`.
//!
//! `F_q = F_p[a]/(c(a))` for a monic irreducible conductor `c` of degree
//! `r`; an element is stored as the integer whose base-`p` digits are its
//! coefficients on `1, a, a^2, ...`. Polynomials over `F_q` are coefficient
//! vectors of such integers, ascending, with trailing zeros trimmed.
//!
//! For an irreducible `P` of degree `n >= 2` and `w >= 1`,
//! `q_{P,w}(A) = (A^w - A^{w q^n}) / P mod P`, computed in `F_q[X]/(P^2)`
//! with the division by `P` checked to be exact.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;

use crate::arith::{gcd, is_prime, mul_mod};
use crate::{Error, Exec, Result};

/// Largest `q^n` for exhaustive enumeration of `F_q[X]/(P)`.
pub const EXHAUSTIVE_RING_CAP: u64 = 1_000_000;

/// Largest extension degree of `F_q` over `F_p`.
pub const MAX_EXTENSION_DEGREE: usize = 32;

/// Largest `q^n` for which a ring handle can be built at all.
const RING_SIZE_CAP: u64 = 1 << 48;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteField {
    p: u64,
    r: usize,
    q: u64,
    /// Monic, degree `r`; `[0, 1]` for the prime field.
    conductor: Vec<u64>,
}

type Digits = [u64; MAX_EXTENSION_DEGREE];

impl FiniteField {
    pub fn prime(p: u64) -> Result<Self> {
        check_odd_prime(p)?;
        Ok(FiniteField {
            p,
            r: 1,
            q: p,
            conductor: vec![0, 1],
        })
    }

    /// `F_p[a]/(conductor)`; the conductor is normalised to be monic and
    /// must be irreducible over `F_p`.
    pub fn with_conductor(p: u64, conductor: &[u64]) -> Result<Self> {
        let fp = FiniteField::prime(p)?;
        let c = PolyFq::from_fp(p, conductor);
        let r = c
            .degree()
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::invalid("conductor must have degree at least 1"))?;
        if r > MAX_EXTENSION_DEGREE {
            return Err(Error::limit(format!(
                "extension degree {r} exceeds {MAX_EXTENSION_DEGREE}"
            )));
        }
        let q = (p as u128).pow(r as u32);
        if q > u32::MAX as u128 {
            return Err(Error::limit(format!("field size {p}^{r} is too large")));
        }
        if !is_irreducible(&fp, &c) {
            return Err(Error::invalid(format!(
                "conductor {} is reducible over F_{p}",
                c.display(&fp)
            )));
        }
        let c = fp.make_monic(&c);
        Ok(FiniteField {
            p,
            r,
            q: q as u64,
            conductor: c.coeffs,
        })
    }

    /// `F_{p^r}` with the smallest monic irreducible conductor.
    pub fn smallest(p: u64, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("extension degree must be at least 1"));
        }
        if r == 1 {
            return FiniteField::prime(p);
        }
        let fp = FiniteField::prime(p)?;
        let c = find_irreducible(&fp, r)?;
        FiniteField::with_conductor(p, &c.coeffs)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// The conductor's coefficients over `F_p`, or `None` for the prime field.
    pub fn conductor(&self) -> Option<&[u64]> {
        (self.r > 1).then_some(&self.conductor[..])
    }

    fn digits(&self, mut a: u64) -> Digits {
        let mut d = [0u64; MAX_EXTENSION_DEGREE];
        for slot in d.iter_mut().take(self.r) {
            *slot = a % self.p;
            a /= self.p;
        }
        d
    }

    fn pack_digits(&self, d: &[u64]) -> u64 {
        d.iter().take(self.r).rev().fold(0, |acc, &x| acc * self.p + x % self.p)
    }

    /// Element with the given `F_p` coordinates (extra digits must vanish
    /// after reduction by the conductor; they are folded in here).
    pub fn element(&self, digits: &[u64]) -> u64 {
        if digits.len() <= self.r {
            return self.pack_digits(digits);
        }
        // reduce a longer a-polynomial by the conductor
        let mut v: Vec<u64> = digits.iter().map(|&x| x % self.p).collect();
        for k in (self.r..v.len()).rev() {
            let c = v[k];
            if c != 0 {
                for j in 0..self.r {
                    let t = mul_mod(c, self.conductor[j], self.p);
                    v[k - self.r + j] = (v[k - self.r + j] + self.p - t) % self.p;
                }
                v[k] = 0;
            }
        }
        self.pack_digits(&v[..self.r])
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.r == 1 {
            return (a + b) % self.p;
        }
        let (x, y) = (self.digits(a), self.digits(b));
        let mut z = [0u64; MAX_EXTENSION_DEGREE];
        for i in 0..self.r {
            z[i] = (x[i] + y[i]) % self.p;
        }
        self.pack_digits(&z)
    }

    pub fn neg(&self, a: u64) -> u64 {
        if self.r == 1 {
            return (self.p - a) % self.p;
        }
        let mut x = self.digits(a);
        for v in x.iter_mut().take(self.r) {
            *v = (self.p - *v) % self.p;
        }
        self.pack_digits(&x)
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.r == 1 {
            return mul_mod(a, b, self.p);
        }
        if a == 0 || b == 0 {
            return 0;
        }
        let (x, y) = (self.digits(a), self.digits(b));
        let r = self.r;
        let mut prod = [0u64; 2 * MAX_EXTENSION_DEGREE];
        for i in 0..r {
            if x[i] == 0 {
                continue;
            }
            for j in 0..r {
                prod[i + j] = (prod[i + j] + x[i] * y[j]) % self.p;
            }
        }
        for k in (r..2 * r - 1).rev() {
            let c = prod[k];
            if c != 0 {
                for j in 0..r {
                    let t = c * self.conductor[j] % self.p;
                    prod[k - r + j] = (prod[k - r + j] + self.p - t) % self.p;
                }
            }
        }
        self.pack_digits(&prod[..r])
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if a == 0 {
            return Err(Error::NotInvertible { a, modulus: self.q });
        }
        Ok(self.pow(a, self.q - 2))
    }

    /// `"d0;d1;..."`, the element's `F_p` coordinates.
    pub fn format_element(&self, a: u64) -> String {
        if self.r == 1 {
            return a.to_string();
        }
        let d = self.digits(a);
        let len = (1..=self.r).rev().find(|&i| d[i - 1] != 0).unwrap_or(1);
        d[..len].iter().map(u64::to_string).collect::<Vec<_>>().join(";")
    }

    fn make_monic(&self, f: &PolyFq) -> PolyFq {
        match f.lead() {
            Some(l) if l != 1 => {
                let inv = self.inv(l).expect("nonzero leading coefficient");
                f.scale(self, inv)
            }
            _ => f.clone(),
        }
    }
}

fn check_odd_prime(p: u64) -> Result<()> {
    if p.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "characteristic {p} is even; only odd primes are supported"
        )));
    }
    if !is_prime(p) {
        return Err(Error::invalid(format!("{p} is not prime")));
    }
    Ok(())
}

/// Polynomial over an `F_q`, ascending coefficients, trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyFq {
    coeffs: Vec<u64>,
}

impl PolyFq {
    pub fn new(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        PolyFq { coeffs }
    }

    pub fn zero() -> Self {
        PolyFq::default()
    }

    pub fn one() -> Self {
        PolyFq { coeffs: vec![1] }
    }

    /// The variable `X`.
    pub fn x() -> Self {
        PolyFq { coeffs: vec![0, 1] }
    }

    fn from_fp(p: u64, coeffs: &[u64]) -> Self {
        PolyFq::new(coeffs.iter().map(|c| c % p).collect())
    }

    /// Builds a polynomial from `F_p`-coordinate lists, one per coefficient.
    pub fn from_digit_lists(field: &FiniteField, coeffs: &[Vec<u64>]) -> Self {
        PolyFq::new(coeffs.iter().map(|d| field.element(d)).collect())
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn lead(&self) -> Option<u64> {
        self.coeffs.last().copied()
    }

    pub fn add(&self, f: &FiniteField, other: &PolyFq) -> PolyFq {
        let len = self.coeffs.len().max(other.coeffs.len());
        PolyFq::new((0..len).map(|i| f.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn sub(&self, f: &FiniteField, other: &PolyFq) -> PolyFq {
        let len = self.coeffs.len().max(other.coeffs.len());
        PolyFq::new((0..len).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn scale(&self, f: &FiniteField, c: u64) -> PolyFq {
        PolyFq::new(self.coeffs.iter().map(|&a| f.mul(a, c)).collect())
    }

    pub fn mul(&self, f: &FiniteField, other: &PolyFq) -> PolyFq {
        if self.is_zero() || other.is_zero() {
            return PolyFq::zero();
        }
        let mut out = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        PolyFq::new(out)
    }

    /// Euclidean division by a nonzero divisor.
    pub fn div_rem(&self, f: &FiniteField, divisor: &PolyFq) -> Result<(PolyFq, PolyFq)> {
        let d = divisor
            .degree()
            .ok_or_else(|| Error::invalid("division by the zero polynomial"))?;
        let lead_inv = f.inv(divisor.coeffs[d])?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return Ok((PolyFq::zero(), self.clone()));
        }
        let mut quot = vec![0u64; rem.len() - d];
        for k in (d..rem.len()).rev() {
            let c = f.mul(rem[k], lead_inv);
            if c == 0 {
                continue;
            }
            quot[k - d] = c;
            for (j, &b) in divisor.coeffs.iter().enumerate() {
                rem[k - d + j] = f.sub(rem[k - d + j], f.mul(c, b));
            }
        }
        rem.truncate(d);
        Ok((PolyFq::new(quot), PolyFq::new(rem)))
    }

    pub fn rem(&self, f: &FiniteField, modulus: &PolyFq) -> PolyFq {
        self.div_rem(f, modulus).expect("nonzero modulus").1
    }

    fn mul_mod(&self, f: &FiniteField, other: &PolyFq, modulus: &PolyFq) -> PolyFq {
        self.mul(f, other).rem(f, modulus)
    }

    /// `self^e mod modulus`, square-and-multiply over the bits of `e`.
    pub fn pow_mod(&self, f: &FiniteField, e: &BigUint, modulus: &PolyFq) -> PolyFq {
        let base = self.rem(f, modulus);
        let mut acc = PolyFq::one().rem(f, modulus);
        for i in (0..e.bits()).rev() {
            acc = acc.mul_mod(f, &acc, modulus);
            if e.bit(i) {
                acc = acc.mul_mod(f, &base, modulus);
            }
        }
        acc
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, f: &FiniteField, other: &PolyFq) -> PolyFq {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(f, &b);
            a = b;
            b = r;
        }
        f.make_monic(&a)
    }

    fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// Wire format: `,`-separated coefficients, each as `;`-separated
    /// `F_p` digits.
    pub fn display<'a>(&'a self, field: &'a FiniteField) -> impl fmt::Display + 'a {
        DisplayPoly { poly: self, field }
    }
}

struct DisplayPoly<'a> {
    poly: &'a PolyFq,
    field: &'a FiniteField,
}

impl fmt::Display for DisplayPoly<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (i, &c) in self.poly.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&self.field.format_element(c))?;
        }
        Ok(())
    }
}

/// Parses the wire format into per-coefficient digit lists. Negative
/// digits are reduced later, modulo `p`.
pub fn parse_digit_lists(text: &str, p: u64) -> Result<Vec<Vec<u64>>> {
    text.split(',')
        .map(|coeff| {
            coeff
                .split(';')
                .map(|d| {
                    let d = d.trim();
                    d.parse::<i128>()
                        .map(|v| v.rem_euclid(p as i128) as u64)
                        .map_err(|_| Error::invalid(format!("bad digit {d:?} in {text:?}")))
                })
                .collect()
        })
        .collect()
}

/// Irreducibility over `field`: no factor of `X^{q^i} - X` for
/// `1 <= i <= deg/2`.
pub fn is_irreducible(field: &FiniteField, f: &PolyFq) -> bool {
    let Some(n) = f.degree() else { return false };
    if n == 0 {
        return false;
    }
    let q = BigUint::from(field.q());
    let x = PolyFq::x();
    let mut h = x.rem(field, f);
    for _ in 1..=n / 2 {
        h = h.pow_mod(field, &q, f);
        let g = f.gcd(field, &h.sub(field, &x));
        if g.degree() != Some(0) {
            return false;
        }
    }
    true
}

/// Smallest monic irreducible of degree `n`, ordering candidates by their
/// coefficient tuple read from `X^{n-1}` down to the constant term.
pub fn find_irreducible(field: &FiniteField, n: usize) -> Result<PolyFq> {
    if n == 0 {
        return Err(Error::invalid("degree must be at least 1"));
    }
    let q = field.q() as u128;
    let count = q.checked_pow(n as u32).filter(|&c| c <= u64::MAX as u128);
    let Some(count) = count else {
        return Err(Error::limit(format!("search space {}^{n} is too large", field.q())));
    };
    for k in 0..count as u64 {
        let mut coeffs = Vec::with_capacity(n + 1);
        let mut rest = k;
        for _ in 0..n {
            coeffs.push(rest % field.q());
            rest /= field.q();
        }
        coeffs.push(1);
        let f = PolyFq::new(coeffs);
        if is_irreducible(field, &f) {
            return Ok(f);
        }
    }
    Err(Error::Internal(format!(
        "no irreducible polynomial of degree {n} found"
    )))
}

/// The ring `F_q[X]/(P)` together with `P^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldRing {
    field: FiniteField,
    modulus: PolyFq,
    modulus_sq: PolyFq,
    n: usize,
    size: u64,
}

/// Builds `F_q[X]/(P)` with `q = p^r`. The conductor must be given exactly
/// when `r > 1`; `modulus` lists `P`'s coefficients as `F_p` digit lists.
pub fn make_field_ring(p: u64, r: usize, conductor: Option<&[u64]>, modulus: &[Vec<u64>]) -> Result<FieldRing> {
    check_odd_prime(p)?;
    let field = match (r, conductor) {
        (0, _) => return Err(Error::invalid("extension degree must be at least 1")),
        (1, None) => FiniteField::prime(p)?,
        (1, Some(_)) => return Err(Error::invalid("a conductor is only used when r > 1")),
        (_, None) => return Err(Error::invalid("r > 1 requires a conductor")),
        (r, Some(c)) => {
            let field = FiniteField::with_conductor(p, c)?;
            if field.r() != r {
                return Err(Error::invalid(format!(
                    "conductor has degree {}, expected {r}",
                    field.r()
                )));
            }
            field
        }
    };
    let modulus = PolyFq::from_digit_lists(&field, modulus);
    FieldRing::new(field, modulus)
}

impl FieldRing {
    pub fn new(field: FiniteField, modulus: PolyFq) -> Result<Self> {
        let n = modulus.degree().unwrap_or(0);
        if n < 2 {
            return Err(Error::invalid("P must have degree at least 2"));
        }
        let size = (field.q() as u128)
            .checked_pow(n as u32)
            .filter(|&s| s <= RING_SIZE_CAP as u128)
            .ok_or_else(|| Error::limit(format!("ring size {}^{n} is too large", field.q())))?
            as u64;
        if !is_irreducible(&field, &modulus) {
            return Err(Error::invalid(format!(
                "P = {} is reducible over F_{}",
                modulus.display(&field),
                field.q()
            )));
        }
        let modulus_sq = modulus.mul(&field, &modulus);
        Ok(FieldRing {
            field,
            modulus,
            modulus_sq,
            n,
            size,
        })
    }

    /// `F_{p^r}[X]/(P)` for the smallest conductor and smallest `P`.
    pub fn smallest(p: u64, r: usize, n: usize) -> Result<Self> {
        let field = FiniteField::smallest(p, r)?;
        let modulus = find_irreducible(&field, n)?;
        FieldRing::new(field, modulus)
    }

    pub fn field(&self) -> &FiniteField {
        &self.field
    }

    pub fn modulus(&self) -> &PolyFq {
        &self.modulus
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `q^n`, the number of residues mod `P`.
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn reduce(&self, a: &PolyFq) -> PolyFq {
        a.rem(&self.field, &self.modulus)
    }

    /// Index of a residue of degree `< n`, base `q` with the constant term
    /// least significant.
    pub fn encode(&self, a: &PolyFq) -> u64 {
        a.coeffs.iter().rev().fold(0, |acc, &c| acc * self.field.q() + c)
    }

    pub fn decode(&self, mut idx: u64) -> PolyFq {
        let q = self.field.q();
        let mut coeffs = Vec::with_capacity(self.n);
        for _ in 0..self.n {
            coeffs.push(idx % q);
            idx /= q;
        }
        PolyFq::new(coeffs)
    }

    fn q_pow_n(&self) -> BigUint {
        BigUint::from(self.field.q()).pow(self.n as u32)
    }

    /// Whether `q_{P,w}` vanishes identically (`p | w`).
    pub fn is_zero_map(&self, w: u64) -> bool {
        w.is_multiple_of(self.field.p())
    }

    /// `(A^w - A^{w q^n}) / P mod P`.
    pub fn quotient(&self, a: &PolyFq, w: u64) -> Result<FfQuotient> {
        if w == 0 {
            return Err(Error::invalid("w must be positive"));
        }
        if self.is_zero_map(w) {
            return Ok(FfQuotient {
                value: PolyFq::zero(),
                zero_map: true,
            });
        }
        let f = &self.field;
        let a = self.reduce(a);
        let exp_big = BigUint::from(w) * self.q_pow_n();
        let lo = a.pow_mod(f, &BigUint::from(w), &self.modulus_sq);
        let hi = a.pow_mod(f, &exp_big, &self.modulus_sq);
        let value = self.exact_div(&lo.sub(f, &hi))?;
        Ok(FfQuotient { value, zero_map: false })
    }

    /// `(A^{q^n - 1} - 1) / P mod P`, and `0` when `P | A`.
    pub fn fermat_quotient(&self, a: &PolyFq) -> Result<PolyFq> {
        let f = &self.field;
        let a = self.reduce(a);
        if a.is_zero() {
            return Ok(PolyFq::zero());
        }
        let order = self.q_pow_n() - BigUint::one();
        let t = a.pow_mod(f, &order, &self.modulus_sq);
        self.exact_div(&t.sub(f, &PolyFq::one()))
    }

    fn exact_div(&self, num: &PolyFq) -> Result<PolyFq> {
        let (quot, rem) = num.div_rem(&self.field, &self.modulus)?;
        if !rem.is_zero() {
            return Err(Error::Internal(format!(
                "division by P left remainder {}",
                rem.display(&self.field)
            )));
        }
        Ok(self.reduce(&quot))
    }

    /// `A^e mod P`.
    pub fn pow(&self, a: &PolyFq, e: u64) -> PolyFq {
        a.pow_mod(&self.field, &BigUint::from(e), &self.modulus)
    }

    pub fn mul(&self, a: &PolyFq, b: &PolyFq) -> PolyFq {
        a.mul(&self.field, b).rem(&self.field, &self.modulus)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FfQuotient {
    pub value: PolyFq,
    pub zero_map: bool,
}

pub fn poly_fermat_quotient(ring: &FieldRing, a: &PolyFq, w: u64) -> Result<FfQuotient> {
    ring.quotient(a, w)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageStats {
    pub w: u64,
    /// `q^n`.
    pub domain_size: u64,
    pub image_size: u64,
    pub zero_fiber_size: u64,
    /// `q_{P,w}(A) = w A^{w-1} q_{P,1}(A)` for every `A`.
    pub relation_ok: bool,
    /// `q_{P,w}(A) = -w A^w q_P(A)` for every `A` coprime to `P`.
    pub companion_ok: bool,
    /// First `A` (by index) breaking either relation.
    pub first_failure: Option<u64>,
}

/// Encoded `q_{P,w}(A)` for every residue `A`, in index order.
pub fn quotient_table(ring: &FieldRing, w: u64) -> Result<Vec<u64>> {
    quotient_table_with(Exec::default(), ring, w)
}

pub fn quotient_table_with(exec: Exec, ring: &FieldRing, w: u64) -> Result<Vec<u64>> {
    require_enumerable(ring)?;
    exec.map_range(0..ring.size() as usize, |i| {
        ring.quotient(&ring.decode(i as u64), w).map(|r| ring.encode(&r.value))
    })
    .into_iter()
    .collect()
}

fn require_enumerable(ring: &FieldRing) -> Result<()> {
    if ring.size() > EXHAUSTIVE_RING_CAP {
        return Err(Error::limit(format!(
            "q^n = {} exceeds {EXHAUSTIVE_RING_CAP}",
            ring.size()
        )));
    }
    Ok(())
}

pub fn image_kernel_stats(ring: &FieldRing, w: u64) -> Result<ImageStats> {
    image_kernel_stats_with(Exec::default(), ring, w)
}

pub fn image_kernel_stats_with(exec: Exec, ring: &FieldRing, w: u64) -> Result<ImageStats> {
    require_enumerable(ring)?;
    if w == 0 {
        return Err(Error::invalid("w must be positive"));
    }
    let f = ring.field();
    let wq = f.element(&[w % f.p()]);
    let per_a = exec.map_range(0..ring.size() as usize, |i| -> Result<(u64, bool, bool)> {
        let a = ring.decode(i as u64);
        let qw = ring.quotient(&a, w)?.value;
        let q1 = ring.quotient(&a, 1)?.value;
        let rhs = ring.mul(&ring.pow(&a, w - 1), &q1).scale(f, wq);
        let relation = rhs == qw;
        let companion = if a.is_zero() {
            true
        } else {
            let qp = ring.fermat_quotient(&a)?;
            let rhs = ring.mul(&ring.pow(&a, w), &qp).scale(f, f.neg(wq));
            rhs == qw
        };
        Ok((ring.encode(&qw), relation, companion))
    });
    let mut seen = vec![false; ring.size() as usize];
    let mut stats = ImageStats {
        w,
        domain_size: ring.size(),
        image_size: 0,
        zero_fiber_size: 0,
        relation_ok: true,
        companion_ok: true,
        first_failure: None,
    };
    for (i, item) in per_a.into_iter().enumerate() {
        let (value, relation, companion) = item?;
        if !seen[value as usize] {
            seen[value as usize] = true;
            stats.image_size += 1;
        }
        if value == 0 {
            stats.zero_fiber_size += 1;
        }
        stats.relation_ok &= relation;
        stats.companion_ok &= companion;
        if (!relation || !companion) && stats.first_failure.is_none() {
            stats.first_failure = Some(i as u64);
        }
    }
    Ok(stats)
}

/// `ceil(n / p)`, the kernel dimension of `q_{P,1}`.
pub fn kernel_dimension(ring: &FieldRing) -> u64 {
    (ring.n() as u64).div_ceil(ring.field().p())
}

/// Image size over the three constant-free lower-bound shapes
/// `gcd(w, q^n-1) / (q n^2)`, `gcd(w-1, q^n-1) / q^{ceil(n/p)}` and
/// `q^{ceil(n/p)} / gcd(w-1, q^n-1)`.
pub fn image_bound_ratios(ring: &FieldRing, w: u64, image_size: u64) -> [f64; 3] {
    let q = ring.field().q() as f64;
    let n = ring.n() as f64;
    let order = ring.size() - 1;
    let g0 = gcd(w, order) as f64;
    let g1 = gcd(w - 1, order) as f64;
    let qk = q.powi(kernel_dimension(ring) as i32);
    let img = image_size as f64;
    [img / (g0 / (q * n * n)), img / (g1 / qk), img / (qk / g1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, r: usize, n: usize) -> FieldRing {
        FieldRing::smallest(p, r, n).unwrap()
    }

    /// Root search over every field element.
    fn has_root(field: &FiniteField, f: &PolyFq) -> bool {
        (0..field.q()).any(|x| {
            f.coeffs()
                .iter()
                .rev()
                .fold(0, |acc, &c| field.add(field.mul(acc, x), c))
                == 0
        })
    }

    #[test]
    fn field_arithmetic_f9() {
        let f = FiniteField::with_conductor(3, &[1, 0, 1]).unwrap();
        assert_eq!(f.q(), 9);
        // a^2 = -1, so (1 + 2a)(1 + a) = 1 + 3a + 2a^2 = 1 - 2 = 2
        let a = f.element(&[1, 2]);
        let b = f.element(&[1, 1]);
        assert_eq!(f.mul(a, b), f.element(&[2]));
        for x in 1..9 {
            assert_eq!(f.mul(x, f.inv(x).unwrap()), 1);
            assert_eq!(f.pow(x, 8), 1);
        }
        assert_eq!(f.format_element(a), "1;2");
        assert_eq!(f.format_element(0), "0");
        assert_eq!(f.element(&[0, 0, 1]), f.element(&[2]));
    }

    #[test]
    fn make_ring_examples() {
        let lists = |s: &str| parse_digit_lists(s, 3).unwrap();
        let r = make_field_ring(3, 1, None, &lists("1,0,1")).unwrap();
        assert!(!has_root(r.field(), r.modulus()));
        assert_eq!(r.size(), 9);
        assert!(matches!(
            make_field_ring(3, 1, None, &lists("-1,0,1")),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            make_field_ring(4, 1, None, &lists("1,0,1")),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            make_field_ring(2, 1, None, &lists("1,1,1")),
            Err(Error::InvalidArgument(_))
        ));
        assert!(make_field_ring(3, 2, None, &lists("1,0,1")).is_err());
        assert!(make_field_ring(3, 1, Some(&[1, 0, 1]), &lists("1,0,1")).is_err());
        assert!(make_field_ring(3, 2, Some(&[2, 0, 1]), &lists("1,0,1")).is_err());

        let f9 = FiniteField::with_conductor(3, &[1, 0, 1]).unwrap();
        let p = find_irreducible(&f9, 2).unwrap();
        assert!(!has_root(&f9, &p));
        let text = p.display(&f9).to_string();
        let r = make_field_ring(3, 2, Some(&[1, 0, 1]), &parse_digit_lists(&text, 3).unwrap()).unwrap();
        assert_eq!(r.field().q(), 9);
        assert_eq!(r.size(), 81);
    }

    #[test]
    fn find_irreducible_examples() {
        let f3 = FiniteField::prime(3).unwrap();
        assert_eq!(find_irreducible(&f3, 2).unwrap().coeffs(), &[1, 0, 1]);
        let f5 = FiniteField::prime(5).unwrap();
        assert_eq!(find_irreducible(&f5, 2).unwrap().coeffs(), &[2, 0, 1]);
        // enumeration oracle for quadratics: irreducible iff no root
        for p in [3u64, 5, 7, 11] {
            let fp = FiniteField::prime(p).unwrap();
            let first = (0..p * p)
                .map(|k| PolyFq::new(vec![k % p, k / p, 1]))
                .find(|f| !has_root(&fp, f))
                .unwrap();
            assert_eq!(find_irreducible(&fp, 2).unwrap(), first);
        }
        for (p, r, n) in [(3u64, 1usize, 3usize), (3, 2, 2), (5, 1, 3), (7, 2, 2)] {
            let field = FiniteField::smallest(p, r).unwrap();
            let f = find_irreducible(&field, n).unwrap();
            assert!(is_irreducible(&field, &f));
            assert!(FieldRing::new(field, f).is_ok());
        }
    }

    #[test]
    fn cubic_irreducibility_matches_root_search() {
        // a cubic is reducible iff it has a root
        let f3 = FiniteField::prime(3).unwrap();
        for k in 0..81u64 {
            let f = PolyFq::new(vec![k % 3, k / 3 % 3, k / 9 % 3, 1]);
            assert_eq!(is_irreducible(&f3, &f), !has_root(&f3, &f), "{f:?}");
        }
    }

    #[test]
    fn quotient_small_values() {
        let r = ring(3, 1, 2);
        for w in [1u64, 2, 4, 8] {
            assert!(r.quotient(&PolyFq::zero(), w).unwrap().value.is_zero());
        }
        assert!(r.quotient(&PolyFq::one(), 8).unwrap().value.is_zero());
        assert!(r.fermat_quotient(&PolyFq::one()).unwrap().is_zero());
        let z = r.quotient(&PolyFq::x(), 3).unwrap();
        assert!(z.zero_map && z.value.is_zero());
    }

    #[test]
    fn quotient_of_x_over_f3() {
        // P = x^2 + 1: x^8 = (P - 1)^4 = 1 - 4P mod P^2, so
        // (x - x^9) / P = 4x = x mod (3, P).
        let r = ring(3, 1, 2);
        let field = r.field();
        let x = PolyFq::x();
        let x9 = x.pow_mod(field, &BigUint::from(9u32), &r.modulus_sq);
        let direct = x.sub(field, &x9).div_rem(field, r.modulus()).unwrap();
        assert!(direct.1.is_zero());
        assert_eq!(r.quotient(&x, 1).unwrap().value, PolyFq::x());
        assert_eq!(direct.0.rem(field, r.modulus()), PolyFq::x());
    }

    #[test]
    fn image_and_kernel_sizes() {
        for (p, r, n) in [(3u64, 1usize, 2usize), (3, 1, 3), (5, 1, 2), (3, 2, 2)] {
            let ring = ring(p, r, n);
            let q = ring.field().q();
            let k = kernel_dimension(&ring) as u32;
            let stats = image_kernel_stats(&ring, 1).unwrap();
            assert_eq!(stats.image_size, q.pow(n as u32 - k), "{p} {r} {n}");
            assert_eq!(stats.zero_fiber_size, q.pow(k));
            assert_eq!(stats.image_size * stats.zero_fiber_size, ring.size());
            assert!(stats.relation_ok && stats.companion_ok);
        }
        let r = ring(3, 1, 2);
        assert_eq!(image_kernel_stats(&r, 3).unwrap().image_size, 1);
        assert_eq!(image_kernel_stats(&r, 1).unwrap().image_size, 3);
        assert_eq!(image_kernel_stats(&ring(3, 1, 3), 1).unwrap().image_size, 9);
    }

    #[test]
    fn relations_for_general_w() {
        let r = ring(5, 1, 2);
        for w in [2u64, 3, 4, 6, 7, 24, 25, 26] {
            let s = image_kernel_stats(&r, w).unwrap();
            assert!(s.relation_ok && s.companion_ok, "w = {w}");
        }
    }

    #[test]
    fn linearity_of_first_quotient() {
        let r = ring(3, 2, 2);
        let f = r.field();
        let table = quotient_table(&r, 1).unwrap();
        for i in 0..r.size() {
            for j in 0..r.size() {
                let sum = r.decode(i).add(f, &r.decode(j));
                let expect = r.decode(table[i as usize]).add(f, &r.decode(table[j as usize]));
                assert_eq!(r.decode(table[r.encode(&sum) as usize]), expect);
            }
            for c in 0..f.q() {
                let scaled = r.encode(&r.decode(i).scale(f, c));
                assert_eq!(
                    r.decode(table[scaled as usize]),
                    r.decode(table[i as usize]).scale(f, c)
                );
            }
        }
    }

    #[test]
    fn caps() {
        let big = ring(101, 1, 3);
        assert!(matches!(image_kernel_stats(&big, 1), Err(Error::LimitExceeded(_))));
    }

    #[test]
    fn wire_format_round_trip() {
        let f9 = FiniteField::with_conductor(3, &[1, 0, 1]).unwrap();
        let lists = parse_digit_lists("1;2,0,2;1,1", 3).unwrap();
        let poly = PolyFq::from_digit_lists(&f9, &lists);
        assert_eq!(poly.display(&f9).to_string(), "1;2,0,2;1,1");
        assert!(parse_digit_lists("1,x", 3).is_err());
    }
}
