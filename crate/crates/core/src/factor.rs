//! Factorization of holomorphic eta quotients and irreducibility verdicts.
//!
//! On Γ₀(M) an eta quotient is determined by its 24-scaled order vector, so
//! the holomorphic factors of `f` on Γ₀(M) are exactly the integer vectors
//! `0 ≤ b ≤ a` (with `a` the order vector of `f`) for which `A_M^{-1}·b` is
//! integral, i.e. the lattice points of `A_M·ℤⁿ` in that box. The search
//! walks the box coordinate by coordinate in canonical divisor order; a
//! lower-triangular Hermite basis of the lattice pins each coordinate to one
//! residue class given the earlier ones, so non-integral points are never
//! visited.
//!
//! `factorize_on` searches by weight layers: the doubled weight `w` of a
//! factor fixes `Σ φ(gcd(t,M/t))·b_t = w·ψ(M)`. The first layer holding a
//! factor gives the least-weight factor, which is necessarily irreducible on
//! Γ₀(M). Within that layer the witness is the one whose order vector is
//! closest to the proportional share `(w/k)·a` (`k` the doubled weight of
//! `f`), ties broken by the lexicographically least `b`.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::bounds;
use crate::error::{Error, Result};
use crate::eta::EtaQuotient;
use crate::numth::{self, DivisorLattice};
use crate::orders::{
    bn_eta, inverse_and_b, is_holomorphic, order_lattice, order_matrix, order_vector, OrderLattice,
};
use crate::transforms::lower;

/// Limits for the lattice-point searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Maximum number of coordinate assignments visited by one search.
    pub budget: u64,
    /// Split the top level of the search across rayon workers.
    pub parallel: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 100_000_000,
            parallel: true,
        }
    }
}

impl SearchConfig {
    pub fn with_budget(budget: u64) -> Self {
        SearchConfig {
            budget,
            ..Default::default()
        }
    }
}

/// `f = g·h` with `g`, `h` nonconstant and holomorphic on Γ₀(on_level).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorizationWitness {
    pub g: EtaQuotient,
    pub h: EtaQuotient,
    #[serde(rename = "on")]
    pub on_level: u64,
}

impl FactorizationWitness {
    /// True iff this witness factors `f` as claimed.
    pub fn verifies(&self, f: &EtaQuotient) -> bool {
        &(&self.g * &self.h) == f
            && !self.g.is_constant()
            && !self.h.is_constant()
            && self.on_level.is_multiple_of(self.g.level())
            && self.on_level.is_multiple_of(self.h.level())
            && is_factor(&self.g, f)
            && is_factor(&self.h, f)
    }
}

/// Which result justifies an irreducibility verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerdictMethod {
    /// Prime-power level: reducible quotients of level `p^n` factor on Γ₀(p^n).
    PrimePower,
    /// Doubled weight 1 admits no nontrivial factor; doubled weight 2 has all
    /// factors on Γ₀(lcm(N, 12)).
    WeightOne,
    /// `P_{N,n}(f)` is irreducible for the exact divisor `n = to`.
    LowerProjection { to: u64, inner: Box<VerdictMethod> },
    /// Every admissible level up to the explicit bound was searched.
    BoundExhausted,
}

impl VerdictMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            VerdictMethod::PrimePower => "prime-power",
            VerdictMethod::WeightOne => "weight-one",
            VerdictMethod::LowerProjection { .. } => "lower-projection",
            VerdictMethod::BoundExhausted => "bound-exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IrreducibilityVerdict {
    Reducible(FactorizationWitness),
    Irreducible(VerdictMethod),
    /// No factorization on any admissible Γ₀(M) with `M ≤ cap`.
    UnknownUpTo(u64),
}

pub type Verdict = IrreducibilityVerdict;

impl IrreducibilityVerdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Reducible(_) => "reducible",
            Verdict::Irreducible(_) => "irreducible",
            Verdict::UnknownUpTo(_) => "unknown",
        }
    }

    pub fn is_irreducible(&self) -> bool {
        matches!(self, Verdict::Irreducible(_))
    }

    pub fn is_reducible(&self) -> bool {
        matches!(self, Verdict::Reducible(_))
    }
}

impl Serialize for IrreducibilityVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("verdict", self.kind())?;
        match self {
            Verdict::Reducible(w) => map.serialize_entry("witness", w)?,
            Verdict::Irreducible(method) => {
                map.serialize_entry("method", method.tag())?;
                if let VerdictMethod::LowerProjection { to, inner } = method {
                    map.serialize_entry("via", to)?;
                    map.serialize_entry("inner", inner.tag())?;
                }
            }
            Verdict::UnknownUpTo(cap) => map.serialize_entry("cap", cap)?,
        }
        map.end()
    }
}

/// `g` is a factor of `f` when `g`, `f` and `f/g` are all holomorphic.
pub fn is_factor(g: &EtaQuotient, f: &EtaQuotient) -> bool {
    is_holomorphic(g) && is_holomorphic(f) && is_holomorphic(&(f / g))
}

/// Orders beyond `i64` range would need more visits than any budget allows.
fn require_holomorphic_on(f: &EtaQuotient, level: u64, config: &SearchConfig) -> Result<Vec<i64>> {
    if !level.is_multiple_of(f.level()) {
        return Err(Error::LevelMismatch {
            level: f.level(),
            target: level,
        });
    }
    let a = order_vector(f, level)?;
    if !a.is_nonnegative() {
        return Err(Error::NotHolomorphic);
    }
    a.orders()
        .iter()
        .map(|x| x.to_i64().filter(|&v| v < i64::MAX / 4))
        .collect::<Option<Vec<_>>>()
        .ok_or(Error::BudgetExhausted {
            budget: config.budget,
        })
}

/// Precomputed data for walking the box `0 ≤ b ≤ a` on Γ₀(M).
struct Engine {
    n: usize,
    a: Vec<i64>,
    mult: Vec<i64>,
    /// Hermite basis of the order lattice, row-major.
    h: Arc<OrderLattice>,
    /// `Σ_{j ≥ k} mult_j·a_j`.
    suffix_cap: Vec<i64>,
}

impl Engine {
    fn new(level: u64, a: Vec<i64>) -> Self {
        let mat = order_matrix(level);
        let n = mat.size();
        let mult: Vec<i64> = mat.cusp_mult.iter().map(|&m| m as i64).collect();
        let mut suffix_cap = vec![0i64; n + 1];
        for k in (0..n).rev() {
            suffix_cap[k] = suffix_cap[k + 1] + mult[k] * a[k];
        }
        Engine {
            n,
            a,
            mult,
            h: order_lattice(level),
            suffix_cap,
        }
    }

    /// Range of `b_k` compatible with the box and the remaining weighted sum.
    fn range(&self, k: usize, rem: Option<i64>) -> Option<(i64, i64)> {
        let Some(rem) = rem else {
            return Some((0, self.a[k]));
        };
        let m = self.mult[k];
        let lo = Integer::div_ceil(&(rem - self.suffix_cap[k + 1]).max(0), &m);
        let hi = self.a[k].min(rem.div_euclid(m));
        (lo <= hi).then_some((lo, hi))
    }
}

trait Sink {
    fn leaf(&mut self, b: &[i64]);
}

/// Depth-first walk over lattice points: with `b = H·z`, fixing `z_0..z_{k-1}`
/// leaves `b_k` in a single residue class modulo `h_kk`, so only integral
/// points are ever visited.
struct Walker<'e, S> {
    engine: &'e Engine,
    b: Vec<i64>,
    z: Vec<i128>,
    pending: u64,
    counter: &'e AtomicU64,
    budget: u64,
    sink: S,
}

impl<'e, S: Sink> Walker<'e, S> {
    fn new(engine: &'e Engine, counter: &'e AtomicU64, budget: u64, sink: S) -> Self {
        Walker {
            engine,
            b: vec![0; engine.n],
            z: vec![0; engine.n],
            pending: 0,
            counter,
            budget,
            sink,
        }
    }

    fn flush(&mut self) -> Result<()> {
        let total = self.counter.fetch_add(self.pending, Ordering::Relaxed) + self.pending;
        self.pending = 0;
        if total > self.budget {
            return Err(Error::BudgetExhausted {
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// Assigns the admissible `b_k` in `[lo, hi]` and recurses.
    fn walk_range(&mut self, k: usize, lo: i64, hi: i64, rem: Option<i64>) -> Result<()> {
        let e = self.engine;
        let offset: i128 = (0..k).map(|j| e.h.get(k, j) as i128 * self.z[j]).sum();
        let step = e.h.get(k, k) as i128;
        let zlo = Integer::div_ceil(&(lo as i128 - offset), &step);
        let zhi = (hi as i128 - offset).div_euclid(step);
        for zk in zlo..=zhi {
            self.pending += 1;
            if self.pending >= 4096 {
                self.flush()?;
            }
            let v = (offset + step * zk) as i64;
            self.b[k] = v;
            self.z[k] = zk;
            if k + 1 == e.n {
                if rem.is_none_or(|r| r == e.mult[k] * v) {
                    self.sink.leaf(&self.b);
                }
            } else {
                self.walk(k + 1, rem.map(|r| r - e.mult[k] * v))?;
            }
        }
        self.b[k] = 0;
        self.z[k] = 0;
        Ok(())
    }

    fn walk(&mut self, k: usize, rem: Option<i64>) -> Result<()> {
        match self.engine.range(k, rem) {
            Some((lo, hi)) => self.walk_range(k, lo, hi, rem),
            None => Ok(()),
        }
    }
}

/// Best candidate under the witness ordering.
struct Best {
    key: Option<(i128, Vec<i64>)>,
    total_weight: i64,
    layer_weight: i64,
    a: Vec<i64>,
}

impl Best {
    fn new(a: &[i64], total_weight: i64, layer_weight: i64) -> Self {
        Best {
            key: None,
            total_weight,
            layer_weight,
            a: a.to_vec(),
        }
    }

    fn merge(mut self, other: Best) -> Best {
        if let Some(k) = other.key {
            self.offer(k);
        }
        self
    }

    fn offer(&mut self, key: (i128, Vec<i64>)) {
        if self.key.as_ref().is_none_or(|cur| key < *cur) {
            self.key = Some(key);
        }
    }
}

impl Sink for Best {
    fn leaf(&mut self, b: &[i64]) {
        let dist = b
            .iter()
            .zip(&self.a)
            .map(|(&bi, &ai)| {
                let d = self.total_weight as i128 * bi as i128 - self.layer_weight as i128 * ai as i128;
                d * d
            })
            .sum();
        if self.key.as_ref().is_some_and(|(k, v)| (dist, b) >= (*k, v.as_slice())) {
            return;
        }
        self.key = Some((dist, b.to_vec()));
    }
}

struct Collect(Vec<Vec<i64>>);

impl Sink for Collect {
    fn leaf(&mut self, b: &[i64]) {
        self.0.push(b.to_vec());
    }
}

fn eta_from_b(lattice: &DivisorLattice, level: u64, b: &[i64]) -> EtaQuotient {
    let inv = inverse_and_b(level);
    let b: Vec<BigInt> = b.iter().map(|&x| BigInt::from(x)).collect();
    let y = inv.solve_integral(&b).expect("search only yields integral points");
    EtaQuotient::from_vector(lattice, &y)
}

/// Least-weight factorization of `f` on Γ₀(M), canonicalized as described in
/// the module docs; `None` if `f` is not factorizable on Γ₀(M).
pub fn factorize_on(
    f: &EtaQuotient,
    level: u64,
    config: &SearchConfig,
) -> Result<Option<FactorizationWitness>> {
    let a = require_holomorphic_on(f, level, config)?;
    let k = f.weight2().to_i64().ok_or(Error::BudgetExhausted {
        budget: config.budget,
    })?;
    if k < 2 {
        return Ok(None);
    }
    let engine = Engine::new(level, a);
    let psi = order_matrix(level).psi as i64;
    let counter = AtomicU64::new(0);
    for w in 1..=k / 2 {
        let target = w * psi;
        let best = search_layer(&engine, target, k, w, &counter, config)?;
        if let Some((_, b)) = best.key {
            let lattice = order_matrix(level).lattice.clone();
            let g = eta_from_b(&lattice, level, &b);
            let h = f / &g;
            return Ok(Some(FactorizationWitness {
                g,
                h,
                on_level: level,
            }));
        }
    }
    Ok(None)
}

fn search_layer(
    engine: &Engine,
    target: i64,
    total_weight: i64,
    layer_weight: i64,
    counter: &AtomicU64,
    config: &SearchConfig,
) -> Result<Best> {
    let fresh = || Best::new(&engine.a, total_weight, layer_weight);
    let Some((lo, hi)) = engine.range(0, Some(target)) else {
        return Ok(fresh());
    };
    if !config.parallel || engine.n == 1 || hi == lo {
        let mut walker = Walker::new(engine, counter, config.budget, fresh());
        walker.walk_range(0, lo, hi, Some(target))?;
        walker.flush()?;
        return Ok(walker.sink);
    }
    let step = engine.h.get(0, 0);
    (Integer::div_ceil(&lo, &step)..=hi.div_euclid(step))
        .map(|z| z * step)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|v| {
            let mut walker = Walker::new(engine, counter, config.budget, fresh());
            walker.walk_range(0, v, v, Some(target))?;
            walker.flush()?;
            Ok(walker.sink)
        })
        .try_reduce(fresh, |x, y| Ok(x.merge(y)))
}

/// Every holomorphic `g` on Γ₀(M) with `f/g` holomorphic, including 1 and
/// `f`, ordered lexicographically by order vector.
pub fn all_factors_on(f: &EtaQuotient, level: u64, config: &SearchConfig) -> Result<Vec<EtaQuotient>> {
    let a = require_holomorphic_on(f, level, config)?;
    let volume = a
        .iter()
        .try_fold(1u64, |acc, &x| acc.checked_mul(x as u64 + 1))
        .filter(|&v| v <= config.budget);
    if volume.is_none() {
        return Err(Error::BudgetExhausted {
            budget: config.budget,
        });
    }
    let engine = Engine::new(level, a);
    let counter = AtomicU64::new(0);
    let mut walker = Walker::new(&engine, &counter, config.budget, Collect(Vec::new()));
    walker.walk(0, None)?;
    walker.flush()?;
    let lattice = order_matrix(level).lattice.clone();
    Ok(walker
        .sink
        .0
        .iter()
        .map(|b| eta_from_b(&lattice, level, b))
        .collect())
}

/// Not factorizable on Γ₀(level(f)).
pub fn quasi_irreducible(f: &EtaQuotient, config: &SearchConfig) -> Result<bool> {
    require_nonconstant_holomorphic(f)?;
    Ok(factorize_on(f, f.level(), config)?.is_none())
}

fn require_nonconstant_holomorphic(f: &EtaQuotient) -> Result<()> {
    if f.is_constant() {
        return Err(Error::Constant);
    }
    if !is_holomorphic(f) {
        return Err(Error::NotHolomorphic);
    }
    Ok(())
}

/// Multiples `M ≤ cap` of `n` with `rad(M) = rad(n)`, ascending.
pub fn rad_preserving_multiples(n: u64, cap: u64) -> Vec<u64> {
    let r = numth::rad(n);
    (1..=cap / n)
        .filter(|&k| r.is_multiple_of(numth::rad(k)))
        .map(|k| n * k)
        .collect()
}

/// Least `M ≤ cap` with `level(f) | M`, `rad(M) = rad(level(f))` on which `f`
/// factors.
pub fn min_factorization_level(
    f: &EtaQuotient,
    cap: u64,
    config: &SearchConfig,
) -> Result<Option<u64>> {
    require_nonconstant_holomorphic(f)?;
    if cap < f.level() {
        return Err(Error::Domain(format!(
            "cap {cap} is below the level {}",
            f.level()
        )));
    }
    for m in rad_preserving_multiples(f.level(), cap) {
        if factorize_on(f, m, config)?.is_some() {
            return Ok(Some(m));
        }
    }
    Ok(None)
}

fn prime_power(n: u64) -> bool {
    numth::factorize(n).len() == 1
}

/// Steps of the verdict cascade that settle the question without searching
/// beyond a single fixed level.
fn direct_verdict(f: &EtaQuotient, config: &SearchConfig) -> Result<Option<Verdict>> {
    let k = f.weight2();
    let level = f.level();
    // prime-power levels first: at weight ½ the search is empty anyway
    if prime_power(level) {
        return Ok(Some(match factorize_on(f, level, config)? {
            Some(w) => Verdict::Reducible(w),
            None => Verdict::Irreducible(VerdictMethod::PrimePower),
        }));
    }
    if k.is_one() {
        return Ok(Some(Verdict::Irreducible(VerdictMethod::WeightOne)));
    }
    if k == BigInt::from(2) {
        // every factor has level dividing lcm(N, M_1); try Γ₀(N) first so
        // quasi-reducible inputs get a witness on their own level
        let m = level.lcm(&bounds::mersmann_level(1)?);
        let mut levels = vec![level];
        if m != level {
            levels.push(m);
        }
        for on in levels {
            if let Some(w) = factorize_on(f, on, config)? {
                return Ok(Some(Verdict::Reducible(w)));
            }
        }
        return Ok(Some(Verdict::Irreducible(VerdictMethod::WeightOne)));
    }
    Ok(None)
}

/// Decides irreducibility of `f`, searching levels up to `cap` when no
/// structural shortcut applies.
pub fn decide_irreducible(f: &EtaQuotient, cap: u64, config: &SearchConfig) -> Result<Verdict> {
    require_nonconstant_holomorphic(f)?;
    let level = f.level();
    if cap < level {
        return Err(Error::Domain(format!("cap {cap} is below the level {level}")));
    }
    if let Some(v) = direct_verdict(f, config)? {
        return Ok(v);
    }
    for n1 in numth::exact_divisors(level) {
        if n1 == level {
            continue;
        }
        let lowered = lower(f, level, n1)?
            .to_eta()
            .expect("exact divisors lower integrally");
        if lowered.is_constant() {
            continue;
        }
        if let Some(Verdict::Irreducible(inner)) = direct_verdict(&lowered, config)? {
            return Ok(Verdict::Irreducible(VerdictMethod::LowerProjection {
                to: n1,
                inner: Box::new(inner),
            }));
        }
    }
    let mut searched = level;
    for m in rad_preserving_multiples(level, cap) {
        if let Some(w) = factorize_on(f, m, config)? {
            return Ok(Verdict::Reducible(w));
        }
        searched = m;
    }
    let k = f.weight2().to_u64().expect("positive weight");
    let report = bounds::least_level_bound(level, k)?;
    if report.is_at_most(cap) {
        Ok(Verdict::Irreducible(VerdictMethod::BoundExhausted))
    } else {
        Ok(Verdict::UnknownUpTo(searched))
    }
}

/// The quotients `η^{B_N(·,t)}`, `t | N`, that divide `f`.
pub fn structured_factor_search(f: &EtaQuotient) -> Result<Vec<EtaQuotient>> {
    require_nonconstant_holomorphic(f)?;
    let level = f.level();
    numth::divisors(level)
        .into_iter()
        .map(|t| bn_eta(level, t))
        .filter(|g| g.as_ref().map_or(true, |g| is_factor(g, f)))
        .collect()
}
