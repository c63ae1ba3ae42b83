//! Identity suites (exact, hard pass/fail with a witness) and bound sweeps
//! (exact statistic next to a constant-free bound expression).

use std::fmt;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{gcd, mul_mod, odd_primes_between, pow_mod_unchecked, PrimeContext};
use crate::charsum::profile_from_values;
use crate::funcfield::{image_kernel_stats, kernel_dimension, quotient_table, FieldRing};
use crate::quotient::{
    batch_quotients, fermat_quotient, poly_quotient, poly_quotient_direct, poly_quotient_via_fermat, reduce_exponent,
    truncated_log_table,
};
use crate::spectrum::{
    count_agreements, cyclotomic_classes, lambda_p, prime_quotient_histogram, smallest_nonzero, value_profile,
    PolyOverFp, ValueProfile,
};
use crate::waring::{cauchy_davenport_floor, convolution_power, expected_total, trajectory_from_profile, WaringNumber};
use crate::{Error, Exec, Result};

/// Primes and function-field rings an identity run covers. Each suite
/// applies its own upper bound on `p` to `primes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub primes: Vec<u64>,
    /// `(p, r, n)`: `F_{p^r}[X]/(P)` with the smallest conductor and `P`.
    pub rings: Vec<(u64, usize, usize)>,
}

impl Default for Grid {
    fn default() -> Self {
        let mut primes = odd_primes_between(3, 199);
        primes.extend([257, 509]);
        Grid {
            primes,
            rings: vec![(3, 1, 2), (3, 1, 3), (5, 1, 2), (3, 2, 2)],
        }
    }
}

impl Grid {
    pub fn empty() -> Self {
        Grid {
            primes: Vec::new(),
            rings: Vec::new(),
        }
    }

    /// Primes from a list such as `"3..31,101"`; ranges keep their odd
    /// primes, single entries must be odd primes. Rings are left at their
    /// defaults only when the list covers `p = 3` and `p = 5`.
    pub fn parse(text: &str) -> Result<Self> {
        let primes = parse_prime_list(text)?;
        let rings = Grid::default()
            .rings
            .into_iter()
            .filter(|(p, _, _)| primes.contains(p))
            .collect();
        Ok(Grid { primes, rings })
    }

    fn primes_in(&self, lo: u64, hi: u64) -> Vec<u64> {
        self.primes.iter().copied().filter(|&p| p >= lo && p <= hi).collect()
    }
}

/// Parses `"a..b"` ranges and single values, comma separated.
pub fn parse_prime_list(text: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: u64 = lo
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad range {part:?}")))?;
            let hi: u64 = hi
                .trim()
                .trim_start_matches('=')
                .parse()
                .map_err(|_| Error::invalid(format!("bad range {part:?}")))?;
            out.extend(odd_primes_between(lo, hi));
        } else {
            let p: u64 = part
                .parse()
                .map_err(|_| Error::invalid(format!("bad prime {part:?}")))?;
            PrimeContext::new(p)?;
            out.push(p);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    /// Number of individual comparisons performed.
    pub checks: u64,
    /// First counterexample, in grid order.
    pub witness: Option<String>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

type Check = std::result::Result<u64, String>;

pub const SUITES: &[&str] = &[
    "two-path",
    "specialization",
    "homomorphism",
    "addition-law",
    "binomial",
    "power-image",
    "cyclotomic",
    "reduction",
    "prime-collision",
    "pigeonhole",
    "waring-coverage",
    "cauchy-davenport",
    "fermat-waring",
    "charsum",
    "covering",
    "funcfield",
];

/// Runs every suite on `grid`. An empty grid yields an empty list.
pub fn run_identity_suite(grid: &Grid) -> Vec<SuiteOutcome> {
    if grid.primes.is_empty() && grid.rings.is_empty() {
        return Vec::new();
    }
    SUITES
        .iter()
        .map(|name| run_suite(name, grid, Exec::default()).expect("registered suite"))
        .collect()
}

pub fn run_suite(name: &str, grid: &Grid, exec: Exec) -> Result<SuiteOutcome> {
    let (name, result): (&'static str, Check) = match name {
        "two-path" => (
            "two-path",
            two_path_with(&grid.primes_in(3, 31), exec, &poly_quotient_direct),
        ),
        "specialization" => (
            "specialization",
            per_prime(&grid.primes_in(3, 31), exec, specialization),
        ),
        "homomorphism" => ("homomorphism", per_prime(&grid.primes_in(3, 50), exec, homomorphism)),
        "addition-law" => ("addition-law", per_prime(&grid.primes_in(3, 31), exec, addition_law)),
        "binomial" => ("binomial", per_prime(&grid.primes_in(3, 101), exec, binomial)),
        "power-image" => ("power-image", per_prime(&grid.primes_in(3, 31), exec, power_image)),
        "cyclotomic" => ("cyclotomic", per_prime(&grid.primes_in(3, 31), exec, cyclotomic)),
        "reduction" => ("reduction", per_prime(&grid.primes_in(3, 31), exec, reduction)),
        "prime-collision" => (
            "prime-collision",
            per_prime(&grid.primes_in(5, 199), exec, prime_collision),
        ),
        "pigeonhole" => ("pigeonhole", per_prime(&grid.primes_in(3, 101), exec, pigeonhole)),
        "waring-coverage" => (
            "waring-coverage",
            per_prime(&grid.primes_in(3, 101), exec, waring_coverage),
        ),
        "cauchy-davenport" => (
            "cauchy-davenport",
            per_prime(&grid.primes_in(3, 101), exec, cauchy_davenport),
        ),
        "fermat-waring" => ("fermat-waring", per_prime(&grid.primes_in(5, 199), exec, fermat_waring)),
        "charsum" => ("charsum", per_prime(&grid.primes_in(3, 509), exec, charsum)),
        "covering" => ("covering", per_prime(&grid.primes_in(3, 101), exec, covering)),
        "funcfield" => ("funcfield", funcfield(&grid.rings, exec)),
        other => return Err(Error::invalid(format!("unknown suite {other:?}"))),
    };
    Ok(match result {
        Ok(checks) => SuiteOutcome {
            name,
            checks,
            witness: None,
        },
        Err(witness) => SuiteOutcome {
            name,
            checks: 0,
            witness: Some(witness),
        },
    })
}

fn per_prime(primes: &[u64], exec: Exec, check: fn(&PrimeContext) -> Check) -> Check {
    let results = exec.map_slice(primes, |&p| {
        let ctx = PrimeContext::new(p).map_err(|e| format!("p={p}: {e}"))?;
        check(&ctx)
    });
    results.into_iter().sum()
}

fn half(p: u64) -> u64 {
    p.div_ceil(2)
}

/// Two-path agreement with a caller-supplied evaluator of the defining
/// formula, compared against `-u^w w q_p(u)`.
pub fn two_path_with(primes: &[u64], exec: Exec, direct: &(dyn Fn(&PrimeContext, u64, u64) -> u64 + Sync)) -> Check {
    let results = exec.map_slice(primes, |&p| {
        let ctx = PrimeContext::new(p).map_err(|e| e.to_string())?;
        let mut checks = 0;
        for w in 1..p {
            for u in (0..ctx.p_sq()).filter(|u| u % p != 0) {
                let a = direct(&ctx, w, u);
                let b = poly_quotient_via_fermat(&ctx, w, u).expect("u coprime to p");
                if a != b {
                    return Err(format!("p={p} w={w} u={u} direct={a} via_fermat={b}"));
                }
                checks += 1;
            }
        }
        Ok(checks)
    });
    results.into_iter().sum()
}

fn specialization(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let mut checks = 0;
    for u in 0..ctx.p_sq() {
        let (a, b) = (poly_quotient(ctx, p - 1, u), fermat_quotient(ctx, u));
        if a != b {
            return Err(format!("p={p} u={u} q_(p,p-1)={a} q_p={b}"));
        }
        checks += 1;
    }
    for k in 0..p {
        for w in 1..p {
            let got = poly_quotient(ctx, w, k * p);
            let want = if w == 1 { k % p } else { 0 };
            if got != want {
                return Err(format!("p={p} w={w} u={} got={got} want={want}", k * p));
            }
            checks += 1;
        }
    }
    Ok(checks)
}

fn homomorphism(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let p_sq = ctx.p_sq();
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    let mut draw = || loop {
        let u = rng.gen_range(1..p_sq);
        if u % p != 0 {
            return u;
        }
    };
    for _ in 0..10_000 {
        let (u, v) = (draw(), draw());
        let lhs = fermat_quotient(ctx, mul_mod(u, v, p_sq));
        let rhs = (fermat_quotient(ctx, u) + fermat_quotient(ctx, v)) % p;
        if lhs != rhs {
            return Err(format!("p={p} u={u} v={v} q(uv)={lhs} q(u)+q(v)={rhs}"));
        }
    }
    let kernel = (1..p_sq)
        .filter(|u| u % p != 0 && fermat_quotient(ctx, *u) == 0)
        .count() as u64;
    if kernel != p - 1 {
        return Err(format!("p={p} zero-fiber size {kernel}, expected {}", p - 1));
    }
    Ok(10_001)
}

fn addition_law(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let p_sq = ctx.p_sq();
    let q1: Vec<u64> = (0..p_sq).map(|u| poly_quotient(ctx, 1, u)).collect();
    let tlog = truncated_log_table(ctx);
    let mut checks = 0;
    for a in 1..=p_sq {
        if a % p == 0 {
            continue;
        }
        for c in 1..=p_sq {
            if c % p == 0 || (a + c) % p == 0 {
                continue;
            }
            let x = ctx.sub(0, ctx.mul(a % p, ctx.inv(c).expect("c coprime to p")));
            let rhs = (q1[(a % p_sq) as usize] + q1[(c % p_sq) as usize] + mul_mod(c % p, tlog[x as usize], p)) % p;
            let lhs = q1[((a + c) % p_sq) as usize];
            if lhs != rhs {
                return Err(format!("p={p} a={a} c={c} lhs={lhs} rhs={rhs}"));
            }
            checks += 1;
        }
    }
    Ok(checks)
}

fn binomial(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let mut c = 1u128;
    for i in 1..p {
        c = c * (p - i + 1) as u128 / i as u128;
        let lhs = ((c / p as u128) % p as u128) as u64;
        let inv = ctx.inv(i).expect("i < p");
        let rhs = if i % 2 == 1 { inv } else { (p - inv) % p };
        if lhs != rhs {
            return Err(format!("p={p} i={i} C(p,i)/p={lhs} expected={rhs}"));
        }
    }
    Ok(p - 1)
}

fn power_image(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let image = |e: u64| {
        let mut v: Vec<u64> = (1..p).map(|u| pow_mod_unchecked(u, e as u128, p)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    for w in 1..2 * p {
        let d = gcd(w, p - 1);
        if image(w) != image(d) {
            return Err(format!("p={p} w={w} gcd={d}: power images differ"));
        }
    }
    Ok(2 * p - 1)
}

fn cyclotomic(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let mut checks = 0;
    for w in 1..p {
        let d = gcd(w, p - 1);
        let classes = cyclotomic_classes(ctx, d).map_err(|e| e.to_string())?;
        let mut all: Vec<u64> = classes.concat();
        all.sort_unstable();
        if all != (1..p).collect::<Vec<_>>() {
            return Err(format!("p={p} d={d}: classes do not partition F_p^*"));
        }
        for class in &classes {
            let first = pow_mod_unchecked(class[0], w as u128, p);
            if let Some(&u) = class.iter().find(|&&u| pow_mod_unchecked(u, w as u128, p) != first) {
                return Err(format!("p={p} w={w} u={u}: u^w differs within its class"));
            }
            checks += class.len() as u64;
        }
    }
    Ok(checks)
}

fn reduction(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let polys = [PolyOverFp::identity(p), PolyOverFp::new(p, [1, 0, 1])];
    let mut checks = 0;
    for w1 in 1..p {
        let base = batch_quotients(ctx, w1, p).map_err(|e| e.to_string())?;
        for w2 in 1..=3u64 {
            let w = w1 + w2 * (p - 1);
            let spec = reduce_exponent(ctx, w).map_err(|e| e.to_string())?;
            let Some(r) = spec.reduction else { continue };
            let lifted = batch_quotients(ctx, w, p).map_err(|e| e.to_string())?;
            let unscale = ctx.inv(r.scale).map_err(|e| e.to_string())?;
            for n in 1..=p {
                let nu = n as usize;
                let (pa, pb) = (
                    ValueProfile::from_values(p, w, &lifted[..nu]),
                    ValueProfile::from_values(p, w1, &base[..nu]),
                );
                if pa.v != pb.v {
                    return Err(format!("p={p} w={w} N={n}: V={} but V(w1={w1})={}", pa.v, pb.v));
                }
                for f in &polys {
                    let fa = count_agreements(&lifted[..nu], f);
                    let fb = count_agreements(&base[..nu], &f.scaled(unscale));
                    if fa != fb {
                        return Err(format!("p={p} w={w} N={n} f={:?}: F={fa} vs {fb}", f.coeffs()));
                    }
                }
                let (ga, gb) = (trajectory_from_profile(ctx, &pa).g, trajectory_from_profile(ctx, &pb).g);
                if ga != gb {
                    return Err(format!("p={p} w={w} N={n}: g={ga} vs g(w1)={gb}"));
                }
                checks += 4;
            }
        }
    }
    Ok(checks)
}

fn prime_collision(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let mut checks = 0;
    for n in [half(p), p] {
        let hist = prime_quotient_histogram(ctx, n).map_err(|e| e.to_string())?;
        let v = value_profile(ctx, p - 1, n).map_err(|e| e.to_string())?.v;
        let total: u64 = hist.q.iter().sum();
        if total != hist.pi {
            return Err(format!("p={p} N={n}: sum Q = {total} != pi = {}", hist.pi));
        }
        if hist.sum_of_squares() > hist.collision_bound() {
            return Err(format!(
                "p={p} N={n}: sum Q^2 = {} > pi + p - 2 = {}",
                hist.sum_of_squares(),
                hist.collision_bound()
            ));
        }
        // (sum Q)^2 <= V * sum Q^2 <= V (pi + p - 2)
        if hist.pi * hist.pi > v * hist.sum_of_squares() || hist.pi * hist.pi > v * hist.collision_bound() {
            return Err(format!("p={p} N={n}: V={v} below pi^2/(pi+p-2) with pi={}", hist.pi));
        }
        checks += 4;
    }
    Ok(checks)
}

fn pigeonhole(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let mut checks = 0;
    for n in [half(p), p] {
        let fermat = value_profile(ctx, p - 1, n).map_err(|e| e.to_string())?.v;
        for w in 1..p {
            let prof = value_profile(ctx, w, n).map_err(|e| e.to_string())?;
            let g = gcd(w, p - 1);
            if prof.v * (p - 1) < fermat * g {
                return Err(format!(
                    "p={p} w={w} N={n}: V={} < V(p-1)={fermat} * {g}/{}",
                    prof.v,
                    p - 1
                ));
            }
            if prof.v * prof.max_multiplicity() < n {
                return Err(format!("p={p} w={w} N={n}: V * max M_d < N"));
            }
            checks += 2;
        }
    }
    Ok(checks)
}

fn waring_exponents(p: u64) -> Vec<u64> {
    let mut ws = vec![1, 2, (p - 1) / 2, p - 1];
    ws.sort_unstable();
    ws.dedup();
    ws
}

fn waring_coverage(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let mut checks = 0;
    for w in waring_exponents(p) {
        for n in [half(p), p] {
            let prof = value_profile(ctx, w, n).map_err(|e| e.to_string())?;
            let traj = trajectory_from_profile(ctx, &prof);
            let only_zero = prof.v == 1 && prof.freq[0] > 0;
            if traj.g.finite().is_none() != only_zero {
                return Err(format!("p={p} w={w} N={n}: g={} but W_1 = {:?}", traj.g, prof.values()));
            }
            let Some(g) = traj.g.finite() else {
                checks += 1;
                continue;
            };
            for s in 1..=g + 1 {
                let counts = convolution_power(&prof.freq, s);
                let total: num_bigint::BigUint = counts.iter().sum();
                if total != expected_total(n, s) {
                    return Err(format!("p={p} w={w} N={n} s={s}: sum of N_s = {total} != N^s"));
                }
                let positive = counts.iter().all(|c| c > &num_bigint::BigUint::ZERO);
                if positive != (s >= g) {
                    return Err(format!("p={p} w={w} N={n} s={s} g={g}: positivity {positive}"));
                }
                checks += 2;
            }
        }
    }
    Ok(checks)
}

fn cauchy_davenport(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let mut checks = 0;
    for w in 1..p {
        let values = batch_quotients(ctx, w, p).map_err(|e| e.to_string())?;
        for n in [half(p), p] {
            let prof = ValueProfile::from_values(p, w, &values[..n as usize]);
            let traj = trajectory_from_profile(ctx, &prof);
            let check = cauchy_davenport_floor(&traj.sizes, p);
            if let Some(v) = check.violation {
                return Err(format!(
                    "p={p} w={w} N={n} sizes={:?}: violation at s={}",
                    traj.sizes, v.s
                ));
            }
            if let (Some(g), Some(ceiling)) = (traj.g.finite(), check.ceiling) {
                if g > ceiling {
                    return Err(format!("p={p} w={w} N={n}: g={g} > ceiling {ceiling}"));
                }
            }
            checks += traj.sizes.len() as u64 + 1;
        }
    }
    Ok(checks)
}

fn fermat_waring(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let prof = value_profile(ctx, p - 1, p).map_err(|e| e.to_string())?;
    let g = trajectory_from_profile(ctx, &prof).g;
    if g > WaringNumber::Finite(3) {
        return Err(format!("p={p}: g(p-1,p,p) = {g} > 3"));
    }
    if p == 5 && g != WaringNumber::Finite(2) {
        return Err(format!("p=5: g(4,5,5) = {g}, expected 2"));
    }
    Ok(1)
}

fn charsum(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let mut checks = 0;
    for w in waring_exponents(p) {
        for n in [half(p), p] {
            let prof = value_profile(ctx, w, n).map_err(|e| e.to_string())?;
            let cs = profile_from_values(Exec::Sequential, &prof);
            if cs.magnitudes[0] != n as f64 {
                return Err(format!("p={p} w={w} N={n}: |S(0)| = {}", cs.magnitudes[0]));
            }
            let slack = 1e-9 * n as f64;
            for a in 1..p as usize {
                let m = cs.magnitudes[a];
                if m > n as f64 + slack || (m - cs.magnitudes[p as usize - a]).abs() > slack {
                    return Err(format!("p={p} w={w} N={n} a={a}: |S(a)| = {m}"));
                }
            }
            let lhs: f64 = cs.magnitudes.iter().map(|m| m * m).sum();
            let rhs = p as f64 * prof.freq.iter().map(|&f| (f * f) as f64).sum::<f64>();
            if (lhs - rhs).abs() > 1e-6 * rhs {
                return Err(format!("p={p} w={w} N={n}: Parseval {lhs} vs {rhs}"));
            }
            checks += p + 1;
        }
    }
    Ok(checks)
}

fn covering(ctx: &PrimeContext) -> Check {
    let p = ctx.p();
    let lambda = lambda_p(ctx).map_err(|e| e.to_string())?;
    match lambda {
        Some(l) if l <= ctx.p_sq() => {}
        other => return Err(format!("p={p}: Lambda_p = {other:?} not within p^2")),
    }
    if p == 5 && lambda != Some(9) {
        return Err(format!("p=5: Lambda_5 = {lambda:?}, expected 9"));
    }
    for w in 1..p {
        let ell = smallest_nonzero(ctx, w);
        if ell.is_none() {
            return Err(format!("p={p} w={w}: no nonzero value below p^2"));
        }
        if p == 5 && w == 4 && ell != Some(2) {
            return Err(format!("p=5: ell(4) = {ell:?}, expected 2"));
        }
    }
    Ok(p)
}

fn funcfield(rings: &[(u64, usize, usize)], exec: Exec) -> Check {
    let mut checks = 0;
    for &(p, r, n) in rings {
        let tag = format!("p={p} r={r} n={n}");
        let ring = FieldRing::smallest(p, r, n).map_err(|e| format!("{tag}: {e}"))?;
        let q = ring.field().q();
        let k = kernel_dimension(&ring) as u32;
        let stats = image_kernel_stats(&ring, 1).map_err(|e| format!("{tag}: {e}"))?;
        if stats.image_size != q.pow(n as u32 - k) || stats.zero_fiber_size != q.pow(k) {
            return Err(format!(
                "{tag}: image {} zero-fiber {}, expected {} and {}",
                stats.image_size,
                stats.zero_fiber_size,
                q.pow(n as u32 - k),
                q.pow(k)
            ));
        }
        checks += 2;
        for w in relation_exponents(&ring) {
            let s = image_kernel_stats(&ring, w).map_err(|e| format!("{tag} w={w}: {e}"))?;
            if !s.relation_ok || !s.companion_ok {
                return Err(format!("{tag} w={w}: relation fails at A index {:?}", s.first_failure));
            }
            checks += 2 * s.domain_size;
        }
        if ring.size() <= 729 {
            checks += linearity(&ring, exec).map_err(|e| format!("{tag}: {e}"))?;
        }
    }
    Ok(checks)
}

fn relation_exponents(ring: &FieldRing) -> Vec<u64> {
    let p = ring.field().p();
    let order = ring.size() - 1;
    let mut ws: Vec<u64> = [1, 2, 3, p - 1, p + 1, order / 2, order - 1, order]
        .into_iter()
        .filter(|&w| w >= 1)
        .collect();
    ws.sort_unstable();
    ws.dedup();
    ws
}

fn linearity(ring: &FieldRing, exec: Exec) -> Check {
    let f = ring.field();
    let table = quotient_table(ring, 1).map_err(|e| e.to_string())?;
    let size = ring.size();
    let results = exec.map_range(0..size as usize, |i| -> Check {
        let a = ring.decode(i as u64);
        let qa = ring.decode(table[i]);
        for j in 0..size {
            let sum = ring.encode(&a.add(f, &ring.decode(j)));
            let expect = qa.add(f, &ring.decode(table[j as usize]));
            if ring.decode(table[sum as usize]) != expect {
                return Err(format!("additivity fails at A={i} B={j}"));
            }
        }
        for c in 0..f.q() {
            let scaled = ring.encode(&a.scale(f, c));
            if ring.decode(table[scaled as usize]) != qa.scale(f, c) {
                return Err(format!("homogeneity fails at A={i} c={c}"));
            }
        }
        Ok(size + f.q())
    });
    results.into_iter().sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exact {
    Int(u64),
    Real(f64),
    Infinite,
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exact::Int(v) => write!(f, "{v}"),
            Exact::Real(v) => write!(f, "{v}"),
            Exact::Infinite => f.write_str("infinite"),
        }
    }
}

impl Exact {
    fn as_f64(self) -> Option<f64> {
        match self {
            Exact::Int(v) => Some(v as f64),
            Exact::Real(v) => Some(v),
            Exact::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RowFlag {
    Ok,
    /// The bound is weaker than the trivial one at this point.
    BoundTrivial,
    /// The bound expression is zero or undefined (e.g. `log N = 0`).
    BoundUndefined,
    /// A constant-free chain asserted by the sweep failed.
    ChainViolated,
}

impl RowFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            RowFlag::Ok => "ok",
            RowFlag::BoundTrivial => "bound-trivial",
            RowFlag::BoundUndefined => "bound-undefined",
            RowFlag::ChainViolated => "chain-violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theorem: u8,
    pub p: u64,
    pub w: u64,
    pub n: u64,
    pub stat: String,
    pub exact: Exact,
    /// `None` when the bound is undefined at this point.
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    pub flag: RowFlag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepMeta {
    pub theorem: u8,
    pub grid: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub meta: SweepMeta,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn chain_failures(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.flag == RowFlag::ChainViolated)
    }
}

/// Parameter points for a bound sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepGrid {
    pub primes: Vec<u64>,
    /// Exponents; defaults per prime to `{1, 2, (p-1)/2, p-1, p-2}`.
    pub exponents: Option<Vec<u64>>,
    /// Interval lengths; defaults to `{ceil(p/2), p}`. Values above `p` are dropped.
    pub lengths: Option<Vec<u64>>,
    /// Polynomial family for interpolation sweeps, ascending coefficients.
    pub polys: Vec<Vec<i64>>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            primes: vec![101, 257, 509],
            exponents: None,
            lengths: None,
            polys: vec![vec![0, 1], vec![1, 0, 1]],
        }
    }
}

impl SweepGrid {
    fn exponents_for(&self, p: u64) -> Vec<u64> {
        let mut ws = match &self.exponents {
            Some(ws) => ws.clone(),
            None => vec![1, 2, (p - 1) / 2, p - 1, p - 2],
        };
        ws.retain(|&w| w >= 1);
        ws.sort_unstable();
        ws.dedup();
        ws
    }

    fn lengths_for(&self, p: u64) -> Vec<u64> {
        let mut ns = match &self.lengths {
            Some(ns) => ns.clone(),
            None => vec![half(p), p],
        };
        ns.retain(|&n| n >= 1 && n <= p);
        ns.sort_unstable();
        ns.dedup();
        ns
    }

    fn describe(&self) -> String {
        let primes: Vec<String> = self.primes.iter().map(u64::to_string).collect();
        let ws = match &self.exponents {
            Some(ws) => ws.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            None => "1,2,(p-1)/2,p-1,p-2".into(),
        };
        let ns = match &self.lengths {
            Some(ns) => ns.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            None => "ceil(p/2),p".into(),
        };
        format!("p={} w={ws} N={ns}", primes.join(","))
    }
}

pub const SWEEP_PRIME_CAP: u64 = 4096;

/// A sweep that stopped early; `partial` holds the rows computed before the
/// offending grid point.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct SweepFailure {
    pub error: Error,
    pub partial: SweepReport,
}

/// Exact statistics against the bound shapes of the given theorem (1-6),
/// evaluated with implied constant 1 and `eps = 0`.
pub fn run_bound_sweep(theorem: u8, grid: &SweepGrid) -> std::result::Result<SweepReport, SweepFailure> {
    run_bound_sweep_with(Exec::default(), theorem, grid)
}

pub fn run_bound_sweep_with(
    exec: Exec,
    theorem: u8,
    grid: &SweepGrid,
) -> std::result::Result<SweepReport, SweepFailure> {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut report = SweepReport {
        meta: SweepMeta {
            theorem,
            grid: grid.describe(),
            timestamp,
        },
        rows: Vec::new(),
    };
    if !(1..=6).contains(&theorem) {
        return Err(SweepFailure {
            error: Error::invalid(format!("theorem must be 1..6, got {theorem}")),
            partial: report,
        });
    }
    let mut primes = grid.primes.clone();
    primes.sort_unstable();
    primes.dedup();
    let mut stop = None;
    let mut points = Vec::new();
    for &p in &primes {
        let checked = if p > SWEEP_PRIME_CAP {
            Err(Error::limit(format!("sweep prime {p} exceeds {SWEEP_PRIME_CAP}")))
        } else {
            PrimeContext::new(p).map(|_| ())
        };
        if let Err(e) = checked {
            stop = Some(e);
            break;
        }
        for w in grid.exponents_for(p) {
            for n in grid.lengths_for(p) {
                points.push((p, w, n));
            }
        }
    }
    let per_point = exec.map_slice(&points, |&(p, w, n)| sweep_point(theorem, p, w, n, &grid.polys));
    for r in per_point {
        match r {
            Ok(rows) => report.rows.extend(rows),
            Err(e) => {
                stop.get_or_insert(e);
                break;
            }
        }
    }
    report.rows.sort_by_key(|a| (a.theorem, a.p, a.w, a.n));
    match stop {
        Some(error) => Err(SweepFailure { error, partial: report }),
        None => Ok(report),
    }
}

struct RowBuilder {
    theorem: u8,
    p: u64,
    w: u64,
    n: u64,
}

impl RowBuilder {
    fn row(&self, stat: impl Into<String>, exact: Exact, bound: f64, flag: RowFlag) -> SweepRow {
        let defined = bound.is_finite() && bound > 0.0;
        let bound = defined.then_some(bound);
        let flag = if !defined && flag != RowFlag::ChainViolated {
            RowFlag::BoundUndefined
        } else {
            flag
        };
        SweepRow {
            theorem: self.theorem,
            p: self.p,
            w: self.w,
            n: self.n,
            stat: stat.into(),
            exact,
            ratio: bound.and_then(|b| exact.as_f64().map(|e| e / b)),
            bound,
            flag,
        }
    }
}

fn trivial_if(cond: bool) -> RowFlag {
    if cond {
        RowFlag::BoundTrivial
    } else {
        RowFlag::Ok
    }
}

fn chain_flag(holds: bool) -> RowFlag {
    if holds {
        RowFlag::Ok
    } else {
        RowFlag::ChainViolated
    }
}

fn sweep_point(theorem: u8, p: u64, w: u64, n: u64, polys: &[Vec<i64>]) -> Result<Vec<SweepRow>> {
    let ctx = PrimeContext::new(p)?;
    let b = RowBuilder { theorem, p, w, n };
    let (pf, nf) = (p as f64, n as f64);
    let ln_n = nf.ln();
    let g0 = gcd(w, p - 1) as f64;
    let g1 = gcd(w.wrapping_sub(1) % (p - 1), p - 1) as f64;
    let values = batch_quotients(&ctx, w, n)?;
    let prof = ValueProfile::from_values(p, w, &values);
    let mut rows = Vec::new();
    match theorem {
        1 => {
            for coeffs in polys {
                let f = PolyOverFp::new(p, coeffs.iter().map(|&c| c.rem_euclid(p as i64) as u64));
                let count = count_agreements(&values, &f);
                let label: Vec<String> = coeffs.iter().map(i64::to_string).collect();
                let bound = match f.degree() {
                    Some(d) if d > 0 => {
                        let d = d as f64;
                        let e = pf - 1.0 - w as f64 + d;
                        let sq = nf.sqrt();
                        [
                            e.powf(0.25) * sq * pf.powf(1.0 / 3.0),
                            e.powf(0.125) * sq * pf.powf(0.375),
                            d.powf(0.25) * sq * pf.powf(4.0 / 3.0) / g0,
                            d.powf(0.125) * sq * pf.powf(11.0 / 8.0) / g0,
                        ]
                        .into_iter()
                        .fold(f64::INFINITY, f64::min)
                    }
                    _ => 0.0,
                };
                rows.push(b.row(
                    format!("F[{}]", label.join(";")),
                    Exact::Int(count),
                    bound,
                    trivial_if(bound >= nf),
                ));
            }
        }
        2 => {
            let fixed = count_agreements(&values, &PolyOverFp::identity(p));
            let bound = pf.powf(1.5) / g1;
            rows.push(b.row("F_fixed", Exact::Int(fixed), bound, trivial_if(bound >= nf)));
        }
        3 => {
            let bound = g0 * (nf / (pf * ln_n)).powi(2);
            rows.push(b.row("V", Exact::Int(prof.v), bound, trivial_if(bound <= 1.0)));
            let fermat = value_profile(&ctx, p - 1, n)?.v;
            let pig = fermat as f64 * g0 / (pf - 1.0);
            rows.push(b.row(
                "V_pigeonhole",
                Exact::Int(prof.v),
                pig,
                chain_flag(prof.v * (p - 1) >= fermat * gcd(w, p - 1)),
            ));
            if w == p - 1 && n >= 2 {
                let hist = prime_quotient_histogram(&ctx, n)?;
                let pi = hist.pi;
                let fermat_bound = nf * nf / (pf * ln_n * ln_n);
                rows.push(b.row(
                    "V_fermat",
                    Exact::Int(prof.v),
                    fermat_bound,
                    trivial_if(fermat_bound <= 1.0),
                ));
                let holds =
                    hist.sum_of_squares() <= hist.collision_bound() && pi * pi <= prof.v * hist.collision_bound();
                rows.push(b.row(
                    "V_prime_collision",
                    Exact::Int(prof.v),
                    (pi * pi) as f64 / hist.collision_bound() as f64,
                    chain_flag(holds),
                ));
            }
        }
        4 => {
            let bound = g1 * nf.sqrt() / pf.powf(4.0 / 3.0);
            rows.push(b.row("V", Exact::Int(prof.v), bound, trivial_if(bound <= 1.0)));
        }
        5 => {
            let traj = trajectory_from_profile(&ctx, &prof);
            let trivial = g0 < pf.powf(7.0 / 8.0);
            let condition = |s: f64| {
                // log of gcd^{s-1} / (p^{11s/8+1/4} N^{-s/2-1} log^2 N)
                (s - 1.0) * g0.ln() - ((11.0 * s / 8.0 + 0.25) * pf.ln() - (s / 2.0 + 1.0) * ln_n + 2.0 * ln_n.ln())
            };
            let exact = traj.g.finite().map_or(Exact::Infinite, Exact::Int);
            let s_star = (3..p).find(|&s| condition(s as f64) >= 0.0);
            match s_star {
                Some(s) => rows.push(b.row("g", exact, s as f64, trivial_if(trivial))),
                None => rows.push(b.row("g", exact, (p - 1) as f64, RowFlag::BoundTrivial)),
            }
            let s = traj.g.finite().unwrap_or(3).max(3) as f64;
            let margin = condition(s);
            rows.push(b.row("cond_lhs_over_rhs", Exact::Real(margin.exp()), 1.0, trivial_if(trivial)));
            let cs = profile_from_values(Exec::Sequential, &prof);
            let bound = nf.sqrt() * pf.powf(11.0 / 8.0) / g0;
            rows.push(b.row(
                "charsum_max",
                Exact::Real(cs.max_nontrivial),
                bound,
                trivial_if(bound >= nf),
            ));
        }
        6 => {
            let traj = trajectory_from_profile(&ctx, &prof);
            let exact = traj.g.finite().map_or(Exact::Infinite, Exact::Int);
            let bound = (pf.powi(3) * pf.ln().powi(2) / (nf * nf * g0)).min(pf.powf(7.0 / 3.0) / (nf.sqrt() * g1));
            rows.push(b.row("g", exact, bound, trivial_if(bound >= pf - 1.0)));
            let cd = cauchy_davenport_floor(&traj.sizes, p);
            let ceiling = cd.ceiling.map_or(0.0, |c| c as f64);
            rows.push(b.row("g_cd_ceiling", exact, ceiling, chain_flag(cd.passed())));
        }
        _ => unreachable!("validated above"),
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_prime_list("3..13").unwrap(), vec![3, 5, 7, 11, 13]);
        assert_eq!(parse_prime_list("101, 5,5").unwrap(), vec![5, 101]);
        assert!(parse_prime_list("9").is_err());
        assert!(parse_prime_list("2").is_err());
        assert!(parse_prime_list("x..5").is_err());
        assert!(parse_prime_list("").unwrap().is_empty());
        let g = Grid::parse("3..5").unwrap();
        assert_eq!(g.rings.len(), 4);
        assert!(Grid::parse("7").unwrap().rings.is_empty());
    }

    #[test]
    fn empty_grid_runs_nothing() {
        assert!(run_identity_suite(&Grid::empty()).is_empty());
    }

    #[test]
    fn small_grid_passes() {
        let grid = Grid::parse("3..13").unwrap();
        for outcome in run_identity_suite(&grid) {
            assert!(outcome.passed(), "{}: {:?}", outcome.name, outcome.witness);
        }
    }

    #[test]
    fn corrupted_evaluator_is_caught() {
        let corrupt = |ctx: &PrimeContext, w: u64, u: u64| {
            let v = poly_quotient_direct(ctx, w, u);
            if w == 2 && u == 7 {
                (v + 1) % ctx.p()
            } else {
                v
            }
        };
        let err = two_path_with(&[5, 7], Exec::Sequential, &corrupt).unwrap_err();
        assert!(err.starts_with("p=5 w=2 u=7"), "{err}");
        assert!(two_path_with(&[5, 7], Exec::Parallel, &poly_quotient_direct).is_ok());
    }

    #[test]
    fn unknown_suite() {
        assert!(run_suite("nope", &Grid::default(), Exec::Sequential).is_err());
    }

    fn small(p: u64, w: u64, n: u64) -> SweepGrid {
        SweepGrid {
            primes: vec![p],
            exponents: Some(vec![w]),
            lengths: Some(vec![n]),
            ..SweepGrid::default()
        }
    }

    #[test]
    fn theorem6_example() {
        let report = run_bound_sweep(6, &small(5, 4, 5)).unwrap();
        let row = report.rows.iter().find(|r| r.stat == "g_cd_ceiling").unwrap();
        assert_eq!(row.exact, Exact::Int(2));
        assert_eq!(row.bound, Some(2.0));
        assert_eq!(row.ratio, Some(1.0));
        assert_eq!(row.flag, RowFlag::Ok);
        assert_eq!(report.chain_failures().count(), 0);
    }

    #[test]
    fn theorem3_example() {
        let report = run_bound_sweep(3, &small(5, 4, 5)).unwrap();
        let row = report.rows.iter().find(|r| r.stat == "V_pigeonhole").unwrap();
        assert_eq!(row.exact, Exact::Int(3));
        assert_eq!(row.bound, Some(3.0));
        assert_eq!(row.flag, RowFlag::Ok);
        assert!(report
            .rows
            .iter()
            .any(|r| r.stat == "V_prime_collision" && r.flag == RowFlag::Ok));
    }

    #[test]
    fn theorem5_small_gcd_is_trivial() {
        let report = run_bound_sweep(5, &small(101, 2, 101)).unwrap();
        assert!(report
            .rows
            .iter()
            .filter(|r| r.stat == "g")
            .all(|r| r.flag == RowFlag::BoundTrivial));
    }

    #[test]
    fn log_of_one_is_undefined() {
        let report = run_bound_sweep(3, &small(7, 3, 1)).unwrap();
        assert_eq!(report.rows[0].flag, RowFlag::BoundUndefined);
        assert_eq!(report.rows[0].bound, None);
    }

    #[test]
    fn sweeps_are_deterministic() {
        let grid = SweepGrid {
            primes: vec![31, 61],
            ..SweepGrid::default()
        };
        for theorem in 1..=6 {
            let a = run_bound_sweep_with(Exec::Sequential, theorem, &grid).unwrap();
            let b = run_bound_sweep_with(Exec::Parallel, theorem, &grid).unwrap();
            assert_eq!(a.rows, b.rows);
            let keys: Vec<_> = a.rows.iter().map(|r| (r.theorem, r.p, r.w, r.n)).collect();
            let mut sorted = keys.clone();
            sorted.sort();
            assert_eq!(keys, sorted);
            assert!(a.rows.iter().all(|r| r.bound.is_none_or(|b| b > 0.0)));
        }
        assert!(run_bound_sweep(7, &grid).is_err());
    }

    #[test]
    fn cap_keeps_partial_rows() {
        let grid = SweepGrid {
            primes: vec![31, 5003],
            ..SweepGrid::default()
        };
        let failure = run_bound_sweep(2, &grid).unwrap_err();
        assert!(matches!(failure.error, Error::LimitExceeded(_)));
        assert!(!failure.partial.rows.is_empty());
        assert!(failure.partial.rows.iter().all(|r| r.p == 31));
    }
}
