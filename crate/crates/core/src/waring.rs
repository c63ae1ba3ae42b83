//! Iterated sumsets of quotient values, the Waring number, exact
//! representation counts and the Cauchy-Davenport floor.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::arith::PrimeContext;
use crate::spectrum::{smallest_nonzero, value_profile, ValueProfile};
use crate::{Error, Result};

/// Largest prime for the schoolbook convolution in [`representation_counts`].
pub const CONVOLUTION_PRIME_CAP: u64 = 4096;

/// Subset of `Z/pZ` stored as a `p`-bit bitset.
#[derive(Clone, PartialEq, Eq)]
pub struct ResidueSet {
    modulus: usize,
    words: Vec<u64>,
}

impl fmt::Debug for ResidueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl ResidueSet {
    pub fn empty(modulus: usize) -> Self {
        ResidueSet {
            modulus,
            words: vec![0; modulus.div_ceil(64)],
        }
    }

    pub fn from_residues(modulus: usize, residues: impl IntoIterator<Item = usize>) -> Self {
        let mut set = ResidueSet::empty(modulus);
        for r in residues {
            set.insert(r % modulus);
        }
        set
    }

    pub fn insert(&mut self, r: usize) {
        self.words[r / 64] |= 1 << (r % 64);
    }

    pub fn contains(&self, r: usize) -> bool {
        self.words[r / 64] >> (r % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.modulus
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.modulus).filter(|&r| self.contains(r))
    }

    fn clear_tail(&mut self) {
        let extra = self.words.len() * 64 - self.modulus;
        if extra > 0 {
            let last = self.words.len() - 1;
            self.words[last] &= u64::MAX >> extra;
        }
    }

    /// `self |= src << k` on the bit vector, dropping bits past `modulus`.
    fn or_shifted_up(&mut self, src: &ResidueSet, k: usize) {
        let (word_shift, bit_shift) = (k / 64, k % 64);
        for i in (word_shift..self.words.len()).rev() {
            let j = i - word_shift;
            let mut v = src.words[j] << bit_shift;
            if bit_shift > 0 && j > 0 {
                v |= src.words[j - 1] >> (64 - bit_shift);
            }
            self.words[i] |= v;
        }
        self.clear_tail();
    }

    /// `self |= src >> k`.
    fn or_shifted_down(&mut self, src: &ResidueSet, k: usize) {
        let (word_shift, bit_shift) = (k / 64, k % 64);
        let n = self.words.len();
        for i in 0..n.saturating_sub(word_shift) {
            let j = i + word_shift;
            let mut v = src.words[j] >> bit_shift;
            if bit_shift > 0 && j + 1 < n {
                v |= src.words[j + 1] << (64 - bit_shift);
            }
            self.words[i] |= v;
        }
    }

    /// `self |= src + a`, translation in `Z/pZ`.
    pub fn or_translate(&mut self, src: &ResidueSet, a: usize) {
        let a = a % self.modulus;
        if a == 0 {
            for (d, s) in self.words.iter_mut().zip(&src.words) {
                *d |= s;
            }
            return;
        }
        self.or_shifted_up(src, a);
        self.or_shifted_down(src, self.modulus - a);
    }

    /// The sumset `self + other`.
    pub fn sumset(&self, other: &ResidueSet) -> ResidueSet {
        let mut out = ResidueSet::empty(self.modulus);
        for b in other.iter() {
            out.or_translate(self, b);
            if out.is_full() {
                break;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WaringNumber {
    Finite(u64),
    Infinite,
}

impl WaringNumber {
    pub fn finite(self) -> Option<u64> {
        match self {
            WaringNumber::Finite(g) => Some(g),
            WaringNumber::Infinite => None,
        }
    }
}

impl fmt::Display for WaringNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaringNumber::Finite(g) => write!(f, "{g}"),
            WaringNumber::Infinite => f.write_str("infinite"),
        }
    }
}

/// Sizes `#W_1, #W_2, ...` of the iterated sumsets of quotient values.
///
/// The sequence stops at the first `s` with `W_s = F_p`, or at `W_1` when
/// the sumsets cannot grow (`W_1 = {0}`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaringTrajectory {
    pub p: u64,
    pub w: u64,
    pub n: u64,
    pub sizes: Vec<u64>,
    pub g: WaringNumber,
    pub ell: Option<u64>,
}

pub fn waring_number(ctx: &PrimeContext, w: u64, n: u64) -> Result<WaringTrajectory> {
    let profile = value_profile(ctx, w, n)?;
    Ok(trajectory_from_profile(ctx, &profile))
}

pub fn trajectory_from_profile(ctx: &PrimeContext, profile: &ValueProfile) -> WaringTrajectory {
    let p = ctx.p() as usize;
    let w1 = ResidueSet::from_residues(p, profile.values().into_iter().map(|v| v as usize));
    let mut sizes = vec![w1.len() as u64];
    let mut current = w1.clone();
    let g = loop {
        if current.is_full() {
            break WaringNumber::Finite(sizes.len() as u64);
        }
        let next = current.sumset(&w1);
        // 0 lies in W_1, so W_s is contained in W_{s+1}
        if next.len() == current.len() {
            break WaringNumber::Infinite;
        }
        sizes.push(next.len() as u64);
        current = next;
    };
    WaringTrajectory {
        p: ctx.p(),
        w: profile.w,
        n: profile.n,
        sizes,
        g,
        ell: smallest_nonzero(ctx, profile.w),
    }
}

/// `counts[y]` is the number of `(u_1, ..., u_s)` in `[0, N)^s` with
/// `q(u_1) + ... + q(u_s) = y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepCountVector {
    pub p: u64,
    pub w: u64,
    pub n: u64,
    pub s: u64,
    pub counts: Vec<BigUint>,
}

impl RepCountVector {
    /// Every residue is represented.
    pub fn covers_all(&self) -> bool {
        self.counts.iter().all(|c| !c.is_zero())
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }
}

pub fn representation_counts(ctx: &PrimeContext, w: u64, n: u64, s: u64) -> Result<RepCountVector> {
    if ctx.p() > CONVOLUTION_PRIME_CAP {
        return Err(Error::limit(format!(
            "p = {} exceeds the convolution cap {CONVOLUTION_PRIME_CAP}",
            ctx.p()
        )));
    }
    if s == 0 {
        return Err(Error::invalid("s must be at least 1"));
    }
    let profile = value_profile(ctx, w, n)?;
    Ok(RepCountVector {
        p: ctx.p(),
        w,
        n,
        s,
        counts: convolution_power(&profile.freq, s),
    })
}

/// `s`-fold cyclic self-convolution of `freq`, exact.
pub fn convolution_power(freq: &[u64], s: u64) -> Vec<BigUint> {
    let p = freq.len();
    let support: Vec<(usize, u64)> = freq
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c > 0)
        .map(|(a, &c)| (a, c))
        .collect();
    let mut current: Vec<BigUint> = freq.iter().map(|&c| BigUint::from(c)).collect();
    for _ in 1..s {
        let mut next = vec![BigUint::zero(); p];
        for (y, slot) in next.iter_mut().enumerate() {
            for &(a, c) in &support {
                let prev = &current[(y + p - a) % p];
                if !prev.is_zero() {
                    *slot += prev * c;
                }
            }
        }
        current = next;
    }
    current
}

/// A step where `#W_s < min{ s (#W_1 - 1) + 1, p }`, or where `g` exceeds
/// `ceil((p - 1) / (#W_1 - 1))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdViolation {
    pub s: u64,
    pub size: Option<u64>,
    pub floor: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdCheck {
    /// `ceil((p - 1) / (#W_1 - 1))`, when `#W_1 >= 2`.
    pub ceiling: Option<u64>,
    pub violation: Option<CdViolation>,
}

impl CdCheck {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks a sumset trajectory against the Cauchy-Davenport floor.
pub fn cauchy_davenport_floor(sizes: &[u64], p: u64) -> CdCheck {
    let Some(&w1) = sizes.first() else {
        return CdCheck {
            ceiling: None,
            violation: None,
        };
    };
    if w1 < 2 {
        return CdCheck {
            ceiling: None,
            violation: None,
        };
    }
    for (i, &size) in sizes.iter().enumerate() {
        let s = i as u64 + 1;
        let floor = (s * (w1 - 1) + 1).min(p);
        if size < floor {
            return CdCheck {
                ceiling: Some((p - 1).div_ceil(w1 - 1)),
                violation: Some(CdViolation {
                    s,
                    size: Some(size),
                    floor,
                }),
            };
        }
    }
    let ceiling = (p - 1).div_ceil(w1 - 1);
    let reached = sizes.iter().position(|&sz| sz == p).map(|i| i as u64 + 1);
    let violation = match reached {
        Some(g) if g <= ceiling => None,
        Some(g) => Some(CdViolation {
            s: g,
            size: Some(p),
            floor: p,
        }),
        // the floor forces coverage by s = ceiling, so a trajectory that
        // stops short of p is itself a witness
        None => Some(CdViolation {
            s: sizes.len() as u64 + 1,
            size: None,
            floor: ((sizes.len() as u64 + 1) * (w1 - 1) + 1).min(p),
        }),
    };
    CdCheck {
        ceiling: Some(ceiling),
        violation,
    }
}

/// `N^s` as a big integer.
pub fn expected_total(n: u64, s: u64) -> BigUint {
    let mut acc = BigUint::one();
    for _ in 0..s {
        acc *= n;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quotient::batch_quotients;
    use proptest::prelude::*;

    fn ctx(p: u64) -> PrimeContext {
        PrimeContext::new(p).unwrap()
    }

    /// Counts by enumerating every tuple.
    fn brute_counts(values: &[u64], p: u64, s: u32) -> Vec<u64> {
        let n = values.len();
        let mut counts = vec![0u64; p as usize];
        for idx in 0..n.pow(s) {
            let mut rest = idx;
            let mut sum = 0;
            for _ in 0..s {
                sum += values[rest % n];
                rest /= n;
            }
            counts[(sum % p) as usize] += 1;
        }
        counts
    }

    /// Sumset by explicit pairwise addition.
    fn brute_sumset(a: &[usize], b: &[usize], p: usize) -> Vec<usize> {
        let mut out: Vec<usize> = a.iter().flat_map(|&x| b.iter().map(move |&y| (x + y) % p)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    #[test]
    fn waring_examples() {
        let c = ctx(5);
        let t = waring_number(&c, 4, 5).unwrap();
        assert_eq!(brute_sumset(&[0, 1, 3], &[0, 1, 3], 5), vec![0, 1, 2, 3, 4]);
        assert_eq!(t.g, WaringNumber::Finite(2));
        assert_eq!(t.sizes, vec![3, 5]);
        assert_eq!(t.ell, Some(2));
        let zero = waring_number(&c, 10, 5).unwrap();
        assert_eq!(zero.g, WaringNumber::Infinite);
        assert_eq!(zero.sizes, vec![1]);
        assert_eq!(zero.ell, None);
        assert_eq!(waring_number(&ctx(31), 3, 1).unwrap().g, WaringNumber::Infinite);
        assert!(waring_number(&c, 4, 6).is_err());
    }

    #[test]
    fn g_is_at_most_p_minus_one_past_ell() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23] {
            let c = ctx(p);
            for w in 1..p {
                let ell = smallest_nonzero(&c, w).unwrap();
                for n in 1..=p {
                    let t = waring_number(&c, w, n).unwrap();
                    if n > ell {
                        assert!(t.g.finite().unwrap() < p);
                    } else {
                        assert_eq!(t.g, WaringNumber::Infinite);
                    }
                }
            }
        }
    }

    #[test]
    fn rep_count_examples() {
        let c = ctx(5);
        let to_u64 = |v: &RepCountVector| v.counts.iter().map(|x| x.try_into().unwrap()).collect::<Vec<u64>>();
        assert_eq!(
            to_u64(&representation_counts(&c, 4, 5, 1).unwrap()),
            vec![2, 2, 0, 1, 0]
        );
        let values = batch_quotients(&c, 4, 5).unwrap();
        assert_eq!(brute_counts(&values, 5, 2), vec![4, 9, 4, 4, 4]);
        assert_eq!(
            to_u64(&representation_counts(&c, 4, 5, 2).unwrap()),
            vec![4, 9, 4, 4, 4]
        );
        assert!(matches!(
            representation_counts(&ctx(4099), 1, 5, 2),
            Err(Error::LimitExceeded(_))
        ));
        assert!(representation_counts(&c, 4, 5, 0).is_err());
    }

    #[test]
    fn rep_counts_match_enumeration() {
        for (p, w, n, s) in [(7u64, 1u64, 7u64, 3u32), (11, 2, 6, 3), (13, 12, 13, 2), (5, 5, 5, 4)] {
            let c = ctx(p);
            let values = batch_quotients(&c, w, n).unwrap();
            let got = representation_counts(&c, w, n, s as u64).unwrap();
            let want = brute_counts(&values, p, s);
            let got: Vec<u64> = got.counts.iter().map(|x| x.try_into().unwrap()).collect();
            assert_eq!(got, want, "p={p} w={w} n={n} s={s}");
        }
    }

    #[test]
    fn cd_examples() {
        let check = cauchy_davenport_floor(&[3, 5], 5);
        assert!(check.passed());
        assert_eq!(check.ceiling, Some(2));
        let vacuous = cauchy_davenport_floor(&[1], 5);
        assert!(vacuous.passed());
        assert_eq!(vacuous.ceiling, None);
        let bad = cauchy_davenport_floor(&[3, 4], 5);
        assert_eq!(bad.violation.unwrap().s, 2);
    }

    #[test]
    fn fermat_waring_at_most_three() {
        for p in crate::arith::odd_primes_between(5, 199) {
            let t = waring_number(&ctx(p), p - 1, p).unwrap();
            assert!(t.g.finite().unwrap() <= 3, "p = {p}");
        }
        assert_eq!(waring_number(&ctx(5), 4, 5).unwrap().g, WaringNumber::Finite(2));
    }

    proptest! {
        #[test]
        fn sumset_matches_pairwise(p in 2usize..300, a in prop::collection::vec(0usize..300, 1..20), b in prop::collection::vec(0usize..300, 1..20)) {
            let sa = ResidueSet::from_residues(p, a.iter().copied());
            let sb = ResidueSet::from_residues(p, b.iter().copied());
            let a: Vec<usize> = sa.iter().collect();
            let b: Vec<usize> = sb.iter().collect();
            prop_assert_eq!(sa.sumset(&sb).iter().collect::<Vec<_>>(), brute_sumset(&a, &b, p));
        }

        #[test]
        fn coverage_iff_positive_counts(p_idx in 0usize..6, w in 1u64..200, n_frac in 0.0f64..1.0, extra in 0u64..2) {
            let p = [5u64, 7, 11, 13, 31, 61][p_idx];
            let c = ctx(p);
            let n = ((p as f64 * n_frac) as u64).clamp(1, p);
            let t = waring_number(&c, w, n).unwrap();
            let s = t.g.finite().map_or(2, |g| g + extra).max(1);
            let counts = representation_counts(&c, w, n, s).unwrap();
            prop_assert_eq!(counts.total(), expected_total(n, s));
            let covered = t.g.finite().is_some_and(|g| g <= s);
            prop_assert_eq!(counts.covers_all(), covered);
            if let Some(g) = t.g.finite() {
                if g > 1 {
                    prop_assert!(!representation_counts(&c, w, n, g - 1).unwrap().covers_all());
                }
            }
            prop_assert!(cauchy_davenport_floor(&t.sizes, p).passed());
        }
    }
}
