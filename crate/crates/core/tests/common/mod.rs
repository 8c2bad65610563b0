//! Independent oracles, generators and property checks shared by the
//! integration suites. Nothing here uses the order-matrix machinery of the
//! library; matrices are rebuilt entry by entry and inverted by elimination.

#![allow(dead_code)]

use std::collections::BTreeMap;

use etaq::factor::{self, SearchConfig};
use etaq::orders::{is_holomorphic, order_vector};
use etaq::qoracle::{qexp, SeriesConfig};
use etaq::transforms::{atkin_lehner, compose, lower};
use etaq::EtaQuotient;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

pub fn q(s: &str) -> EtaQuotient {
    s.parse().expect("fixture parses")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}
#[allow(unused_imports)]
pub(crate) use ensure;

// ---------------------------------------------------------------------------
// elementary arithmetic, written out independently

pub fn divisors_sorted(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n.is_multiple_of(*d)).collect()
}

pub fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn rad(n: u64) -> u64 {
    prime_factors(n).iter().map(|&(p, _)| p).product()
}

pub fn phi(n: u64) -> u64 {
    (1..=n).filter(|&k| k.gcd(&n) == 1).count() as u64
}

pub fn psi(n: u64) -> u64 {
    prime_factors(n)
        .iter()
        .map(|&(p, e)| p.pow(e - 1) * (p + 1))
        .product()
}

/// `N·∏(p − 1/p) = ∏ p^{e−1}(p² − 1)`.
pub fn phihat(n: u64) -> u64 {
    prime_factors(n)
        .iter()
        .map(|&(p, e)| p.pow(e - 1) * (p * p - 1))
        .product()
}

pub fn is_exact(d: u64, n: u64) -> bool {
    n.is_multiple_of(d) && d.gcd(&(n / d)) == 1
}

/// Greatest common exact divisor, by scan.
pub fn gcexd(m: u64, n: u64) -> u64 {
    divisors_sorted(m.gcd(&n))
        .into_iter()
        .filter(|&d| is_exact(d, m) && is_exact(d, n))
        .max()
        .unwrap_or(1)
}

// ---------------------------------------------------------------------------
// order matrices, entry by entry

/// 24-scaled order of `η_d` at the cusp `1/t` of Γ₀(M).
pub fn order_entry(m: u64, t: u64, d: u64) -> i64 {
    let g = d.gcd(&t) as u128;
    let num = m as u128 * g * g;
    let den = d as u128 * ((t as u128 * t as u128).gcd(&(m as u128)));
    assert_eq!(num % den, 0);
    (num / den) as i64
}

pub fn matrix(m: u64) -> Vec<Vec<BigRational>> {
    let divs = divisors_sorted(m);
    divs.iter()
        .map(|&t| {
            divs.iter()
                .map(|&d| BigRational::from_integer(order_entry(m, t, d).into()))
                .collect()
        })
        .collect()
}

/// Gauss–Jordan inverse over ℚ.
pub fn invert(a: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = a.len();
    let mut aug: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !aug[r][col].is_zero()).expect("invertible");
        aug.swap(col, piv);
        let p = aug[col][col].clone();
        for x in aug[col].iter_mut() {
            *x = &*x / &p;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for c in 0..2 * n {
                    let v = &aug[col][c] * &factor;
                    aug[r][c] -= v;
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn mat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = b[0].len();
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b).map(|(x, br)| x * &br[j]).sum())
                .collect()
        })
        .collect()
}

/// Orders of `f` on Γ₀(M) by the entry formula, keyed by `t`.
pub fn orders_naive(f: &EtaQuotient, m: u64) -> BTreeMap<u64, BigInt> {
    divisors_sorted(m)
        .into_iter()
        .map(|t| {
            let s = f
                .iter()
                .map(|(d, x)| x * BigInt::from(order_entry(m, t, d)))
                .sum();
            (t, s)
        })
        .collect()
}

/// The closed formula for the least integralizing multiplier of column `t`
/// of the inverse order matrix.
pub fn m_formula(n: u64, t: u64) -> u64 {
    let t1 = t / gcexd(n, t);
    let t2 = divisors_sorted(n)
        .into_iter()
        .find(|&e| is_exact(e, n) && e % t1 == 0)
        .expect("n itself qualifies");
    phihat(n / t2) * phihat(t2 * rad(t1) / t1.gcd(&(t2 / t1)))
}

/// Least `s > 0` making column `c` of `inv` integral.
pub fn column_multiplier(inv: &[Vec<BigRational>], c: usize) -> u64 {
    inv.iter()
        .map(|row| row[c].denom().clone())
        .fold(BigInt::one(), |acc, d| acc.lcm(&d))
        .to_u64()
        .unwrap()
}

// ---------------------------------------------------------------------------
// brute-force factorization on Γ₀(M)

pub struct Naive {
    pub divs: Vec<u64>,
    den: i128,
    /// `den · A_M^{-1}`.
    scaled: Vec<Vec<i128>>,
}

impl Naive {
    pub fn new(m: u64) -> Self {
        let inv = invert(&matrix(m));
        let den = inv
            .iter()
            .flatten()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let scaled = inv
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| (x * BigRational::from_integer(den.clone())).to_integer().to_i128().unwrap())
                    .collect()
            })
            .collect();
        Naive {
            divs: divisors_sorted(m),
            den: den.to_i128().unwrap(),
            scaled,
        }
    }

    /// Exponents of the quotient with order vector `b`, if integral.
    pub fn solve(&self, b: &[i64]) -> Option<Vec<i64>> {
        self.scaled
            .iter()
            .map(|row| {
                let s: i128 = row.iter().zip(b).map(|(&x, &y)| x * y as i128).sum();
                (s % self.den == 0).then(|| (s / self.den) as i64)
            })
            .collect()
    }

    pub fn eta(&self, y: &[i64]) -> EtaQuotient {
        EtaQuotient::from_pairs(self.divs.iter().zip(y).map(|(&d, &x)| (d, BigInt::from(x)))).unwrap()
    }
}

pub fn box_volume(a: &[i64]) -> u128 {
    a.iter().map(|&x| x as u128 + 1).product()
}

/// Every integral `b` with `0 ≤ b ≤ a`, as `(b, exponents)`.
pub fn box_scan(naive: &Naive, a: &[i64]) -> Vec<(Vec<i64>, Vec<i64>)> {
    let n = a.len();
    let mut b = vec![0i64; n];
    let mut out = Vec::new();
    loop {
        if let Some(y) = naive.solve(&b) {
            out.push((b.clone(), y));
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if b[i] < a[i] {
                b[i] += 1;
                break;
            }
            b[i] = 0;
        }
    }
}

/// Least-weight nontrivial factor, closest to the proportional share of the
/// orders, ties to the lexicographically least order vector in the
/// library's canonical divisor order.
pub fn naive_factorize(f: &EtaQuotient, m: u64) -> Option<(EtaQuotient, EtaQuotient)> {
    let naive = Naive::new(m);
    let orders = orders_naive(f, m);
    let a: Vec<i64> = naive.divs.iter().map(|t| orders[t].to_i64().unwrap()).collect();
    let k = f.weight2().to_i64().unwrap();
    let canon = etaq::numth::divisors(m);
    let pos: Vec<usize> = canon
        .iter()
        .map(|t| naive.divs.iter().position(|d| d == t).unwrap())
        .collect();
    let mut best: Option<(i64, i128, Vec<i64>, Vec<i64>)> = None;
    for (b, y) in box_scan(&naive, &a) {
        let w: i64 = y.iter().sum();
        if w <= 0 || w >= k {
            continue;
        }
        let dist: i128 = b
            .iter()
            .zip(&a)
            .map(|(&bi, &ai)| {
                let d = k as i128 * bi as i128 - w as i128 * ai as i128;
                d * d
            })
            .sum();
        let canon_b: Vec<i64> = pos.iter().map(|&i| b[i]).collect();
        let key = (w, dist, canon_b);
        if best
            .as_ref()
            .is_none_or(|(bw, bd, bb, _)| key < (*bw, *bd, bb.clone()))
        {
            best = Some((key.0, key.1, key.2, y));
        }
    }
    best.map(|(_, _, _, y)| {
        let g = naive.eta(&y);
        let h = f / &g;
        (g, h)
    })
}

// ---------------------------------------------------------------------------
// generators

pub fn random_quotient<R: Rng>(rng: &mut R, max_level: u64) -> EtaQuotient {
    let m = rng.gen_range(1..=max_level);
    let divs = divisors_sorted(m);
    let count = rng.gen_range(1..=divs.len().min(4));
    let pairs: Vec<(u64, BigInt)> = divs
        .choose_multiple(rng, count)
        .map(|&d| (d, BigInt::from(rng.gen_range(-4..=4))))
        .collect();
    EtaQuotient::from_pairs(pairs).unwrap()
}

/// A random nonconstant holomorphic quotient with level at most
/// `max_level` and doubled weight at most `max_w2`.
pub fn random_holomorphic<R: Rng>(rng: &mut R, max_level: u64, max_w2: i64) -> EtaQuotient {
    loop {
        let m = rng.gen_range(1..=max_level);
        let divs = divisors_sorted(m);
        let mut pairs = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            pairs.push((*divs.choose(rng).unwrap(), BigInt::from(rng.gen_range(1..=4))));
        }
        for _ in 0..rng.gen_range(0..=3) {
            pairs.push((*divs.choose(rng).unwrap(), BigInt::from(-rng.gen_range(1..=3))));
        }
        let f = EtaQuotient::from_pairs(pairs).unwrap();
        let w = f.weight2();
        if w.is_positive() && w <= BigInt::from(max_w2) && is_holomorphic(&f) {
            return f;
        }
    }
}

pub fn random_multiple<R: Rng>(rng: &mut R, n: u64, max: u64) -> u64 {
    let choices: Vec<u64> = (1..=max / n).map(|k| k * n).collect();
    *choices.choose(rng).unwrap_or(&n)
}

pub fn exact_divisors(n: u64) -> Vec<u64> {
    divisors_sorted(n).into_iter().filter(|&d| is_exact(d, n)).collect()
}

// ---------------------------------------------------------------------------
// property checks, each on one random case

pub fn valence(f: &EtaQuotient, m: u64) -> Check {
    let a = order_vector(f, m).map_err(|e| e.to_string())?;
    let lhs: BigInt = a
        .iter()
        .map(|(t, x)| x * BigInt::from(phi(t.gcd(&(m / t)))))
        .sum();
    let rhs = f.weight2() * BigInt::from(psi(m));
    ensure!(lhs == rhs, "valence fails for {f} on {m}: {lhs} vs {rhs}");
    Ok(())
}

pub fn order_compat(f: &EtaQuotient, n: u64, n2: u64) -> Check {
    let a = order_vector(f, n).map_err(|e| e.to_string())?;
    let a2 = order_vector(f, n2).map_err(|e| e.to_string())?;
    for t in divisors_sorted(n) {
        let w = n / (t * t).gcd(&n);
        let w2 = n2 / (t * t).gcd(&n2);
        ensure!(
            a2.get(t).unwrap() * BigInt::from(w) == a.get(t).unwrap() * BigInt::from(w2),
            "orders of {f} at 1/{t} incompatible between {n} and {n2}"
        );
    }
    Ok(())
}

pub fn orders_match_formula(f: &EtaQuotient, m: u64) -> Check {
    let a = order_vector(f, m).map_err(|e| e.to_string())?;
    for (t, x) in orders_naive(f, m) {
        ensure!(a.get(t) == Some(&x), "order of {f} at 1/{t} on {m}");
    }
    Ok(())
}

fn lowered_eta(f: &EtaQuotient, m: u64, n: u64) -> Result<EtaQuotient, String> {
    lower(f, m, n)
        .map_err(|e| e.to_string())?
        .to_eta()
        .ok_or_else(|| format!("lowering {f} from {m} to {n} is not integral"))
}

/// Lowering fixes quotients whose level divides the target.
pub fn lowering_fixes(f: &EtaQuotient, n: u64, m: u64) -> Check {
    ensure!(n.is_multiple_of(f.level()) && m.is_multiple_of(n), "bad case");
    let low = lowered_eta(f, m, n)?;
    ensure!(low == *f, "P_{{{m},{n}}}({f}) = {low}");
    Ok(())
}

/// Exact targets: integral image and the same weight.
pub fn lowering_exact(f: &EtaQuotient, m: u64, n: u64) -> Check {
    let low = lowered_eta(f, m, n)?;
    ensure!(low.weight2() == f.weight2(), "weight changes lowering {f}");
    ensure!(m.is_multiple_of(low.level().max(1)) && n.is_multiple_of(low.level()), "level of image");
    Ok(())
}

/// `P_{M,N} = P_{N',N} ∘ P_{M,N'}` for `N' ‖ M`, `N | N'`.
pub fn lowering_factors(f: &EtaQuotient, m: u64, n1: u64, n: u64) -> Check {
    let direct = lower(f, m, n).map_err(|e| e.to_string())?;
    let mid = lowered_eta(f, m, n1)?;
    let two = lower(&mid, n1, n).map_err(|e| e.to_string())?;
    ensure!(direct == two, "two-step lowering of {f} differs ({m} → {n1} → {n})");
    Ok(())
}

/// Holomorphic inputs lower to nonnegative orders for every `N | M`.
pub fn lowering_holomorphic(f: &EtaQuotient, m: u64, n: u64) -> Check {
    let low = lower(f, m, n).map_err(|e| e.to_string())?;
    ensure!(
        low.orders24().iter().all(|x| !x.is_negative()),
        "P_{{{m},{n}}}({f}) has a pole"
    );
    Ok(())
}

pub fn atkin_lehner_laws(f: &EtaQuotient, g: &EtaQuotient, n: u64, level: u64) -> Check {
    let al = |x: &EtaQuotient| atkin_lehner(x, n, level).map_err(|e| e.to_string());
    ensure!(al(&al(f)?)? == *f, "al_{{{n},{level}}} is not an involution on {f}");
    ensure!(al(&(f * g))? == &al(f)? * &al(g)?, "al not multiplicative on {f}, {g}");
    ensure!(
        is_holomorphic(f) == is_holomorphic(&al(f)?),
        "holomorphy not preserved by al on {f}"
    );
    Ok(())
}

/// `al_{m,M}(f) = (al_{n,N}(f))_{m/n}` with `n = gcd(m, N)`.
pub fn rescaling_law(f: &EtaQuotient, n_level: u64, m_level: u64, m: u64) -> Check {
    let n = m.gcd(&n_level);
    let lhs = atkin_lehner(f, m, m_level).map_err(|e| e.to_string())?;
    let rhs = atkin_lehner(f, n, n_level).map_err(|e| e.to_string())?.rescale(m / n);
    ensure!(lhs == rhs, "rescaling law fails for {f}: {lhs} vs {rhs}");
    Ok(())
}

pub fn fricke_rescale(f: &EtaQuotient, nu: u64) -> Check {
    let n = f.level();
    let lhs = atkin_lehner(&f.rescale(nu), nu * n, nu * n).map_err(|e| e.to_string())?;
    let rhs = atkin_lehner(f, n, n).map_err(|e| e.to_string())?;
    ensure!(lhs == rhs, "Fricke–rescale law fails for {f}, ν = {nu}");
    Ok(())
}

/// `P_{M,N} ∘ al_{m,M} = al_{gcd(m,N),N} ∘ P_{M,N}` for `N ‖ M`, `m ‖ M`.
pub fn lower_commutes_with_al(f: &EtaQuotient, big: u64, n: u64, m: u64) -> Check {
    let lhs = lowered_eta(&atkin_lehner(f, m, big).map_err(|e| e.to_string())?, big, n)?;
    let rhs = atkin_lehner(&lowered_eta(f, big, n)?, m.gcd(&n), n).map_err(|e| e.to_string())?;
    ensure!(lhs == rhs, "lowering does not commute with al for {f}");
    Ok(())
}

/// Orders of `f ⊛ g` on Γ₀(MN) are products of the operands' orders.
pub fn compose_kronecker(f: &EtaQuotient, g: &EtaQuotient) -> Check {
    let (m, n) = (f.level(), g.level());
    let fg = compose(f, g).map_err(|e| e.to_string())?;
    let a = order_vector(f, m).map_err(|e| e.to_string())?;
    let b = order_vector(g, n).map_err(|e| e.to_string())?;
    let c = order_vector(&fg, m * n).map_err(|e| e.to_string())?;
    for (t, x) in a.iter() {
        for (s, y) in b.iter() {
            ensure!(c.get(t * s) == Some(&(x * y)), "Kronecker law fails at {t}·{s}");
        }
    }
    Ok(())
}

/// Any witness is sound and lies in a valid weight layer.
pub fn witness_sound(f: &EtaQuotient, m: u64, cfg: &SearchConfig) -> Check {
    let Some(w) = factor::factorize_on(f, m, cfg).map_err(|e| e.to_string())? else {
        return Ok(());
    };
    ensure!(w.verifies(f), "witness for {f} on {m} does not verify");
    let b = order_vector(&w.g, m).map_err(|e| e.to_string())?;
    let weighted: BigInt = b
        .iter()
        .map(|(t, x)| x * BigInt::from(phi(t.gcd(&(m / t)))))
        .sum();
    ensure!(
        (&weighted % BigInt::from(psi(m))).is_zero(),
        "weighted orders not divisible by ψ"
    );
    ensure!(
        w.g.weight2().is_positive() && w.g.weight2() < f.weight2(),
        "factor weight out of range"
    );
    Ok(())
}

pub fn al_equivariance(f: &EtaQuotient, n: u64, cfg: &SearchConfig) -> Check {
    let level = f.level();
    let g = atkin_lehner(f, n, level).map_err(|e| e.to_string())?;
    let x = factor::factorize_on(f, level, cfg).map_err(|e| e.to_string())?;
    let y = factor::factorize_on(&g, level, cfg).map_err(|e| e.to_string())?;
    ensure!(x.is_some() == y.is_some(), "factorizability of {f} vs al_{n}: differs");
    Ok(())
}

pub fn series_homomorphism(f: &EtaQuotient, g: &EtaQuotient, terms: usize) -> Check {
    let cfg = SeriesConfig::default();
    let lhs = qexp(&(f * g), terms, &cfg).map_err(|e| e.to_string())?;
    let rhs = qexp(f, terms, &cfg)
        .map_err(|e| e.to_string())?
        .mul(&qexp(g, terms, &cfg).map_err(|e| e.to_string())?);
    ensure!(lhs == rhs, "q-expansion not multiplicative for {f}, {g}");
    Ok(())
}

pub fn leading_exponent(f: &EtaQuotient) -> Check {
    let s = qexp(f, 48, &SeriesConfig::default()).map_err(|e| e.to_string())?;
    let a = order_vector(f, f.level()).map_err(|e| e.to_string())?;
    ensure!(
        BigInt::from(s.offset24) == *a.get(f.level()).unwrap(),
        "leading exponent of {f} differs from its order at infinity"
    );
    ensure!(!s.coeffs[0].is_zero(), "leading coefficient vanishes");
    Ok(())
}

/// Partition numbers from Euler's pentagonal recurrence.
pub fn partitions_pentagonal(n: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); n + 1];
    p[0] = BigInt::one();
    for i in 1..=n {
        let mut acc = BigInt::zero();
        for k in 1.. {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > i {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc += &p[i - g1] * sign;
            let g2 = k * (3 * k + 1) / 2;
            if g2 <= i {
                acc += &p[i - g2] * sign;
            }
        }
        p[i] = acc;
    }
    p
}

/// Partition numbers from the parts-bounded recurrence `p(n, k)`.
pub fn partitions_bounded(n: usize) -> Vec<BigInt> {
    // table[i][k]: partitions of i into parts of size at most k
    let mut table = vec![vec![BigInt::zero(); n + 1]; n + 1];
    for k in 0..=n {
        table[0][k] = BigInt::one();
    }
    for i in 1..=n {
        for k in 1..=n {
            let without = table[i][k - 1].clone();
            let with = if k <= i { table[i - k][k].clone() } else { BigInt::zero() };
            table[i][k] = without + with;
        }
    }
    (0..=n).map(|i| table[i][n].clone()).collect()
}

/// Holomorphic quotients with level dividing `n` and doubled weight at most
/// `max_w2`, from exponents in `-r..=r`.
pub fn enumerate_holomorphic(n: u64, r: i64, max_w2: i64) -> Vec<EtaQuotient> {
    let divs = divisors_sorted(n);
    let mut x = vec![-r; divs.len()];
    let mut out = Vec::new();
    loop {
        let w: i64 = x.iter().sum();
        if (1..=max_w2).contains(&w) {
            let f = EtaQuotient::from_pairs(divs.iter().zip(&x).map(|(&d, &e)| (d, BigInt::from(e))))
                .unwrap();
            if is_holomorphic(&f) {
                out.push(f);
            }
        }
        let mut i = 0;
        loop {
            if i == x.len() {
                return out;
            }
            if x[i] < r {
                x[i] += 1;
                break;
            }
            x[i] = -r;
            i += 1;
        }
    }
}
