//! Value sets, interpolation counts, cyclotomic classes, first nonzero
//! index, covering index and the prime histogram of `q_p`.

use crate::arith::{gcd, mul_mod, primes_up_to, PrimeContext};
use crate::quotient::{batch_quotients, check_range, fermat_quotient, poly_quotient};
use crate::{Error, Result};

/// Polynomial over `F_p`, ascending coefficients, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyOverFp {
    p: u64,
    coeffs: Vec<u64>,
}

impl PolyOverFp {
    pub fn new(p: u64, coeffs: impl IntoIterator<Item = u64>) -> Self {
        let mut coeffs: Vec<u64> = coeffs.into_iter().map(|c| c % p).collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        PolyOverFp { p, coeffs }
    }

    /// Parses `"c0,c1,..."`. Negative entries are taken mod `p`.
    pub fn parse(p: u64, text: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            let c: i128 = part
                .parse()
                .map_err(|_| Error::invalid(format!("bad coefficient {part:?}")))?;
            coeffs.push(c.rem_euclid(p as i128) as u64);
        }
        Ok(PolyOverFp::new(p, coeffs))
    }

    pub fn identity(p: u64) -> Self {
        PolyOverFp::new(p, [0, 1])
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: u64) -> u64 {
        let x = x % self.p;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| (mul_mod(acc, x, self.p) + c) % self.p)
    }

    pub fn scaled(&self, c: u64) -> Self {
        PolyOverFp::new(self.p, self.coeffs.iter().map(|&a| mul_mod(a, c % self.p, self.p)))
    }
}

/// Frequencies of `q_{p,w}` on `[0, N)`: `freq[d]` counts the `u` with
/// `q_{p,w}(u) = d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueProfile {
    pub p: u64,
    pub w: u64,
    pub n: u64,
    pub freq: Vec<u64>,
    /// Size of the value set.
    pub v: u64,
}

impl ValueProfile {
    pub fn from_values(p: u64, w: u64, values: &[u64]) -> Self {
        let mut freq = vec![0u64; p as usize];
        for &q in values {
            freq[q as usize] += 1;
        }
        let v = freq.iter().filter(|&&c| c > 0).count() as u64;
        ValueProfile {
            p,
            w,
            n: values.len() as u64,
            freq,
            v,
        }
    }

    /// Attained values, ascending.
    pub fn values(&self) -> Vec<u64> {
        (0..self.p).filter(|&d| self.freq[d as usize] > 0).collect()
    }

    /// `max_d M_d`.
    pub fn max_multiplicity(&self) -> u64 {
        self.freq.iter().copied().max().unwrap_or(0)
    }
}

pub fn value_profile(ctx: &PrimeContext, w: u64, n: u64) -> Result<ValueProfile> {
    ctx.require_exhaustive()?;
    let values = batch_quotients(ctx, w, n)?;
    Ok(ValueProfile::from_values(ctx.p(), w, &values))
}

/// Number of `u < N` with `q_{p,w}(u) = f(u)`.
pub fn interpolation_count(ctx: &PrimeContext, w: u64, n: u64, f: &PolyOverFp) -> Result<u64> {
    let values = batch_quotients(ctx, w, n)?;
    Ok(count_agreements(&values, f))
}

pub(crate) fn count_agreements(values: &[u64], f: &PolyOverFp) -> u64 {
    values
        .iter()
        .enumerate()
        .filter(|&(u, &q)| f.eval(u as u64) == q)
        .count() as u64
}

/// Fixed points of `q_{p,w}` on `[0, N)`.
pub fn fixed_points(ctx: &PrimeContext, w: u64, n: u64) -> Result<u64> {
    interpolation_count(ctx, w, n, &PolyOverFp::identity(ctx.p()))
}

/// The `(p - 1) / d` cosets of the subgroup of order `d` in `F_p^*`:
/// `C_j = { gamma^{j + i (p-1)/d} : 0 <= i < d }`, each sorted ascending.
pub fn cyclotomic_classes(ctx: &PrimeContext, d: u64) -> Result<Vec<Vec<u64>>> {
    let p = ctx.p();
    if d == 0 || !(p - 1).is_multiple_of(d) {
        return Err(Error::invalid(format!("{d} does not divide p - 1 = {}", p - 1)));
    }
    ctx.require_exhaustive()?;
    let count = (p - 1) / d;
    let step = crate::arith::pow_mod_unchecked(ctx.gamma(), count as u128, p);
    let mut classes = Vec::with_capacity(count as usize);
    let mut leader = 1u64;
    for _ in 0..count {
        let mut class = Vec::with_capacity(d as usize);
        let mut x = leader;
        for _ in 0..d {
            class.push(x);
            x = mul_mod(x, step, p);
        }
        class.sort_unstable();
        classes.push(class);
        leader = mul_mod(leader, ctx.gamma(), p);
    }
    Ok(classes)
}

/// Smallest `l >= 1` with `q_{p,w}(l) != 0`, searching `l < p^2`; `None`
/// for the zero map.
pub fn smallest_nonzero(ctx: &PrimeContext, w: u64) -> Option<u64> {
    if w.is_multiple_of(ctx.p()) {
        return None;
    }
    (1..ctx.p_sq()).find(|&u| poly_quotient(ctx, w, u) != 0)
}

/// Smallest `L` with `{ q_p(1), ..., q_p(L) } = F_p`, searching up to `p^2`.
pub fn lambda_p(ctx: &PrimeContext) -> Result<Option<u64>> {
    ctx.require_exhaustive()?;
    let p = ctx.p() as usize;
    let mut seen = vec![false; p];
    let mut covered = 0usize;
    for u in 1..=ctx.p_sq() {
        let q = fermat_quotient(ctx, u) as usize;
        if !seen[q] {
            seen[q] = true;
            covered += 1;
            if covered == p {
                return Ok(Some(u));
            }
        }
    }
    Ok(None)
}

/// `Q[a]` counts the primes `l < N` with `q_p(l) = a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeHistogram {
    pub p: u64,
    pub n: u64,
    pub q: Vec<u64>,
    /// `pi(N - 1)`.
    pub pi: u64,
}

impl PrimeHistogram {
    pub fn sum_of_squares(&self) -> u64 {
        self.q.iter().map(|&c| c * c).sum()
    }

    /// `pi(N-1) + p - 2`, the bound on the number of colliding prime pairs.
    pub fn collision_bound(&self) -> u64 {
        self.pi + self.p - 2
    }
}

pub fn prime_quotient_histogram(ctx: &PrimeContext, n: u64) -> Result<PrimeHistogram> {
    check_range(ctx, n)?;
    if n < 2 {
        return Err(Error::invalid("N must be at least 2"));
    }
    ctx.require_exhaustive()?;
    let mut q = vec![0u64; ctx.p() as usize];
    let primes = primes_up_to(n - 1);
    for &l in &primes {
        q[fermat_quotient(ctx, l) as usize] += 1;
    }
    Ok(PrimeHistogram {
        p: ctx.p(),
        n,
        q,
        pi: primes.len() as u64,
    })
}

/// `gcd(w, p - 1)`, with `gcd(0, m) = m`.
pub fn gcd_with_group_order(w: u64, p: u64) -> u64 {
    gcd(w, p - 1)
}
