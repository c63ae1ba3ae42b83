//! Additive character sums `S(a) = sum_{u<N} e(a q_{p,w}(u) / p)`.
//!
//! Sums are accumulated from the frequency vector, so each character costs
//! one pass over the attained values instead of over `[0, N)`.

use std::f64::consts::TAU;

use crate::arith::PrimeContext;
use crate::spectrum::{value_profile, ValueProfile};
use crate::{Error, Exec, Result};

/// Largest prime for which the full profile over all `a` is computed.
pub const CHARSUM_PRIME_CAP: u64 = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CharSumProfile {
    pub p: u64,
    pub w: u64,
    pub n: u64,
    /// `|S(a)|` for `a = 0..p`.
    pub magnitudes: Vec<f64>,
    pub max_nontrivial: f64,
    /// Smallest `a != 0` attaining the maximum.
    pub argmax: u64,
}

/// Unit roots `e(k / p)` as `(cos, sin)` pairs.
fn root_table(p: u64) -> Vec<(f64, f64)> {
    (0..p)
        .map(|k| {
            let t = TAU * k as f64 / p as f64;
            (t.cos(), t.sin())
        })
        .collect()
}

fn sum_for(support: &[(u64, u64)], roots: &[(f64, f64)], p: u64, a: u64) -> (f64, f64) {
    let mut re = 0.0;
    let mut im = 0.0;
    for &(y, count) in support {
        let (c, s) = roots[(a * y % p) as usize];
        re += count as f64 * c;
        im += count as f64 * s;
    }
    (re, im)
}

fn support(profile: &ValueProfile) -> Vec<(u64, u64)> {
    profile
        .freq
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(y, &c)| (y as u64, c))
        .collect()
}

/// `S(a)` as `(re, im)` for a single character.
pub fn character_sum(ctx: &PrimeContext, w: u64, n: u64, a: u64) -> Result<(f64, f64)> {
    let profile = value_profile(ctx, w, n)?;
    let p = ctx.p();
    let a = a % p;
    let support = support(&profile);
    let (re, im) = support.iter().fold((0.0, 0.0), |(re, im), &(y, count)| {
        let t = TAU * ((a * y % p) as f64) / p as f64;
        (re + count as f64 * t.cos(), im + count as f64 * t.sin())
    });
    Ok((re, im))
}

pub fn character_sum_profile(ctx: &PrimeContext, w: u64, n: u64) -> Result<CharSumProfile> {
    character_sum_profile_with(Exec::default(), ctx, w, n)
}

pub fn character_sum_profile_with(exec: Exec, ctx: &PrimeContext, w: u64, n: u64) -> Result<CharSumProfile> {
    if ctx.p() > CHARSUM_PRIME_CAP {
        return Err(Error::limit(format!(
            "p = {} exceeds the character sum cap {CHARSUM_PRIME_CAP}",
            ctx.p()
        )));
    }
    let profile = value_profile(ctx, w, n)?;
    Ok(profile_from_values(exec, &profile))
}

pub fn profile_from_values(exec: Exec, profile: &ValueProfile) -> CharSumProfile {
    let p = profile.p;
    let roots = root_table(p);
    let support = support(profile);
    let mut magnitudes = exec.map_range(0..p as usize, |a| {
        let (re, im) = sum_for(&support, &roots, p, a as u64);
        re.hypot(im)
    });
    magnitudes[0] = profile.n as f64;
    let (argmax, max_nontrivial) = magnitudes
        .iter()
        .enumerate()
        .skip(1)
        .fold((0usize, 0.0f64), |best, (a, &m)| if m > best.1 { (a, m) } else { best });
    CharSumProfile {
        p,
        w: profile.w,
        n: profile.n,
        magnitudes,
        max_nontrivial,
        argmax: argmax as u64,
    }
}
