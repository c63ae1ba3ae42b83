//! Fermat and polynomial quotients.
//!
//! `q_{p,w}(u)` is evaluated directly from `u^w - u^{wp}` modulo `p^2`.
//! For `u` coprime to `p` it also equals `-u^w * w * q_p(u) mod p`; debug
//! builds (or the `dual-eval` feature) compute both and insist they agree.

use crate::arith::{mul_mod, pow_mod_unchecked, PrimeContext};
use crate::{Error, Exec, Result};

/// Largest `N` for which whole quotient vectors are materialised.
pub const MAX_BATCH: u64 = 10_000_000;

/// `q_p(u) = (u^{p-1} - 1) / p mod p`, and `0` when `p | u`.
pub fn fermat_quotient(ctx: &PrimeContext, u: u64) -> u64 {
    let p = ctx.p();
    let u = u % ctx.p_sq();
    if u.is_multiple_of(p) {
        return 0;
    }
    let t = pow_mod_unchecked(u, (p - 1) as u128, ctx.p_sq());
    // t = 1 mod p by Fermat's little theorem
    (t - 1) / p
}

/// `q_{p,w}(u)` straight from the defining difference `u^w - u^{wp}`.
pub fn poly_quotient_direct(ctx: &PrimeContext, w: u64, u: u64) -> u64 {
    let p = ctx.p();
    let p_sq = ctx.p_sq();
    let u = u % p_sq;
    let a = pow_mod_unchecked(u, w as u128, p_sq);
    let b = pow_mod_unchecked(a, p as u128, p_sq);
    let diff = (a + p_sq - b) % p_sq;
    debug_assert_eq!(diff % p, 0);
    diff / p
}

/// `-u^w * w * q_p(u) mod p`; `None` when `p | u`, where the relation does
/// not apply.
pub fn poly_quotient_via_fermat(ctx: &PrimeContext, w: u64, u: u64) -> Option<u64> {
    let p = ctx.p();
    if u.is_multiple_of(p) {
        return None;
    }
    let uw = pow_mod_unchecked(u % p, w as u128, p);
    let t = mul_mod(mul_mod(uw, w % p, p), fermat_quotient(ctx, u), p);
    Some((p - t) % p)
}

/// `q_{p,w}(u) = (u^w - u^{wp}) / p mod p`.
pub fn poly_quotient(ctx: &PrimeContext, w: u64, u: u64) -> u64 {
    let value = poly_quotient_direct(ctx, w, u);
    if cfg!(any(debug_assertions, feature = "dual-eval")) {
        if let Some(other) = poly_quotient_via_fermat(ctx, w, u) {
            assert_eq!(value, other, "quotient paths disagree at p={} w={w} u={u}", ctx.p());
        }
    }
    value
}

/// Reduction data for `w = w1 + w2 (p - 1)` with `1 <= w1 <= p - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reduction {
    pub w1: u64,
    pub w2: u64,
    /// `w1^{-1} (w1 - w2) mod p`, never zero.
    pub scale: u64,
}

/// An exponent `w` reduced against a prime.
///
/// On `[0, p)` the quotient `q_{p,w}` is `scale * q_{p,w1}`; when `p | w`
/// the map is identically zero and there is no reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientSpec {
    pub p: u64,
    pub w: u64,
    pub reduction: Option<Reduction>,
}

impl QuotientSpec {
    pub fn is_zero_map(&self) -> bool {
        self.reduction.is_none()
    }
}

pub fn reduce_exponent(ctx: &PrimeContext, w: u64) -> Result<QuotientSpec> {
    if w == 0 {
        return Err(Error::invalid("w must be positive"));
    }
    let p = ctx.p();
    if w.is_multiple_of(p) {
        return Ok(QuotientSpec { p, w, reduction: None });
    }
    let w1 = (w - 1) % (p - 1) + 1;
    let w2 = (w - w1) / (p - 1);
    let diff = ctx.sub(w1, w2 % p);
    // w = w1 - w2 mod p, so diff != 0 whenever p does not divide w
    let scale = ctx.mul(ctx.inv(w1)?, diff);
    Ok(QuotientSpec {
        p,
        w,
        reduction: Some(Reduction { w1, w2, scale }),
    })
}

/// `sum_{i=1}^{p-1} x^i / i mod p`, by Horner's rule.
pub fn truncated_log(ctx: &PrimeContext, x: u64) -> u64 {
    let p = ctx.p();
    let x = x % p;
    if x == 0 {
        return 0;
    }
    let inv = ctx.inverse_table();
    let mut acc = 0u64;
    for i in (1..p as usize).rev() {
        acc = (mul_mod(acc, x, p) + inv[i] as u64) % p;
    }
    mul_mod(acc, x, p)
}

/// Truncated logarithm of every residue, for sweeps that need many values.
pub fn truncated_log_table(ctx: &PrimeContext) -> Vec<u64> {
    Exec::default().map_range(0..ctx.p() as usize, |x| truncated_log(ctx, x as u64))
}

/// `[q_{p,w}(0), ..., q_{p,w}(n - 1)]` for `1 <= n <= p`.
pub fn batch_quotients(ctx: &PrimeContext, w: u64, n: u64) -> Result<Vec<u64>> {
    batch_quotients_with(Exec::default(), ctx, w, n)
}

pub fn batch_quotients_with(exec: Exec, ctx: &PrimeContext, w: u64, n: u64) -> Result<Vec<u64>> {
    check_range(ctx, n)?;
    if n > MAX_BATCH {
        return Err(Error::limit(format!("N = {n} exceeds {MAX_BATCH}")));
    }
    if w.is_multiple_of(ctx.p()) {
        return Ok(vec![0; n as usize]);
    }
    Ok(exec.map_range(0..n as usize, |u| poly_quotient(ctx, w, u as u64)))
}

pub(crate) fn check_range(ctx: &PrimeContext, n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    if n > ctx.p() {
        return Err(Error::invalid(format!("N = {n} exceeds p = {}", ctx.p())));
    }
    Ok(())
}
