//! Explicit bounds on factor levels and least factorization levels.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::eta::EtaQuotient;
use crate::numth;
use crate::orders::is_holomorphic;

/// Exact bounds are materialized only up to this many bits.
pub const MAX_EXACT_BITS: f64 = 1.0e6;

/// `R_k(N) = k·∏_{p^m ‖ N} ((p+1)/(p−1))^{min(2,m)}`.
pub fn r_k(k: u64, n: u64) -> BigRational {
    let mut r = BigRational::from_integer(k.into());
    for (p, m) in numth::factorize(n) {
        let ratio = BigRational::new((p + 1).into(), (p - 1).into());
        for _ in 0..m.min(2) {
            r *= &ratio;
        }
    }
    r
}

/// `Υ(x) = 1` for `x < 2`, else `∏_{1 ≤ j ≤ x−1} (x−j)^{2^{j−1}}`. Only
/// integral `x ≥ 2` is accepted on the second branch.
pub fn upsilon(x: &BigRational) -> Result<BigUint> {
    if *x <= BigRational::one() {
        return Err(Error::Domain(format!("upsilon is defined for x > 1, got {x}")));
    }
    if *x < BigRational::from_integer(2.into()) {
        return Ok(BigUint::one());
    }
    if !x.is_integer() {
        return Err(Error::Domain(format!(
            "upsilon needs an integral argument at or above 2, got {x}"
        )));
    }
    let x = x
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::Domain("upsilon argument too large".into()))?;
    if upsilon_log2(x) > MAX_EXACT_BITS {
        return Err(Error::Domain(format!("upsilon({x}) is too large to materialize")));
    }
    Ok(upsilon_int(x))
}

fn upsilon_int(x: u64) -> BigUint {
    (1..x).fold(BigUint::one(), |acc, j| {
        acc * BigUint::from(x - j).pow(1u32 << (j - 1))
    })
}

fn upsilon_log2(x: u64) -> f64 {
    (1..x)
        .map(|j| 2f64.powi((j - 1) as i32) * ((x - j) as f64).log2())
        .sum()
}

/// `κ(N) = φ(rad N)·∏_{p^m ‖ N} ((m−1)(p−1) + 2)`.
pub fn kappa(n: u64) -> u64 {
    let factors = numth::factorize(n);
    let rad: u64 = factors.iter().map(|&(p, _)| p).product();
    factors
        .iter()
        .map(|&(p, m)| (m as u64 - 1) * (p - 1) + 2)
        .product::<u64>()
        * numth::phi(rad)
}

/// Known Mersmann levels `M_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MersmannTable(BTreeMap<u64, u64>);

impl Default for MersmannTable {
    fn default() -> Self {
        MersmannTable(BTreeMap::from([(1, 12)]))
    }
}

impl MersmannTable {
    pub fn with(mut self, k: u64, level: u64) -> Self {
        self.0.insert(k, level);
        self
    }

    pub fn level(&self, k: u64) -> Result<u64> {
        if k == 0 {
            return Err(Error::Domain("Mersmann levels are indexed from 1".into()));
        }
        self.0.get(&k).copied().ok_or(Error::UnknownMersmannLevel(k))
    }
}

pub fn mersmann_level(k: u64) -> Result<u64> {
    MersmannTable::default().level(k)
}

/// `lcm(N, M_{k−1})`: the levels of all factors of `f` divide this.
pub fn factor_level_bound(f: &EtaQuotient) -> Result<u64> {
    if !is_holomorphic(f) {
        return Err(Error::NotHolomorphic);
    }
    let k = f
        .weight2()
        .to_u64()
        .filter(|&k| k >= 2)
        .ok_or_else(|| Error::Domain("factor level bound needs doubled weight at least 2".into()))?;
    Ok(f.level().lcm(&mersmann_level(k - 1)?))
}

/// The least-factorization-level bound
/// `(2Nk)^{2^{⌈R⌉−1}}·Υ(⌈R⌉)` with `R = R_{k−1}(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: u64,
    /// Doubled weight used in the bound.
    pub k: u64,
    pub r: BigRational,
    pub r_ceil: u64,
    /// `2Nk`.
    pub base: u64,
    /// `Υ(⌈R⌉)`, when small enough to hold exactly.
    pub upsilon: Option<BigUint>,
    /// The bound itself, when small enough to hold exactly.
    pub bound: Option<BigUint>,
    pub log2_bound: f64,
}

impl BoundReport {
    /// True iff the bound is at most `cap`.
    pub fn is_at_most(&self, cap: u64) -> bool {
        self.bound.as_ref().is_some_and(|b| *b <= BigUint::from(cap))
    }
}

impl Serialize for BoundReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("N", &self.n)?;
        map.serialize_entry("k", &self.k)?;
        map.serialize_entry("R", &self.r.to_string())?;
        map.serialize_entry("R_ceil", &self.r_ceil)?;
        map.serialize_entry("base", &self.base)?;
        map.serialize_entry("upsilon", &self.upsilon.as_ref().map(|u| u.to_string()))?;
        map.serialize_entry("bound", &self.bound.as_ref().map(|b| b.to_string()))?;
        map.serialize_entry("log2_bound", &self.log2_bound)?;
        map.end()
    }
}

fn ceil_u64(r: &BigRational) -> Result<u64> {
    r.ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| Error::Domain(format!("R = {r} is out of range")))
}

/// Bound on the least `M` on which a reducible holomorphic quotient of level
/// `N` and doubled weight `k` factors.
pub fn least_level_bound(n: u64, k: u64) -> Result<BoundReport> {
    if n == 0 || k < 2 {
        return Err(Error::Domain(format!(
            "the factorization level bound needs N >= 1 and k >= 2 (got N={n}, k={k})"
        )));
    }
    let r = r_k(k - 1, n);
    let r_ceil = ceil_u64(&r)?;
    let base = 2 * n * k;
    let exp_log2 = r_ceil - 1;
    let log2_upsilon = if r_ceil < 2 { 0.0 } else { upsilon_log2(r_ceil) };
    let log2_bound = 2f64.powi(exp_log2.min(i32::MAX as u64) as i32) * (base as f64).log2() + log2_upsilon;
    let upsilon = (log2_upsilon <= MAX_EXACT_BITS).then(|| {
        if r_ceil < 2 {
            BigUint::one()
        } else {
            upsilon_int(r_ceil)
        }
    });
    let bound = match &upsilon {
        Some(u) if log2_bound <= MAX_EXACT_BITS => {
            Some(BigUint::from(base).pow(1u32 << exp_log2) * u)
        }
        _ => None,
    };
    Ok(BoundReport {
        n,
        k,
        r,
        r_ceil,
        base,
        upsilon,
        bound,
        log2_bound,
    })
}

/// The weight-free variant: `k` replaced by `κ(N)`.
pub fn weight_free_bound(n: u64) -> Result<BoundReport> {
    least_level_bound(n, kappa(n).max(2))
}

/// `log₂ x` for a big integer, accurate to double precision.
pub fn log2_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_u64().expect("64 bits");
    (top as f64).log2() + shift as f64
}
