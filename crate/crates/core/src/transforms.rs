//! Structural maps on eta quotients: Atkin–Lehner involutions, the
//! level-lowering maps `P_{M,N}` and composition of coprime-level quotients.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::eta::EtaQuotient;
use crate::numth::{self, coprime_part, is_exact_divisor, odot};
use crate::orders::order_matrix;

/// `al_{n,N}`: sends `η_d` to `η_{n⊙d}`.
pub fn atkin_lehner(f: &EtaQuotient, n: u64, level: u64) -> Result<EtaQuotient> {
    if !is_exact_divisor(n, level) {
        return Err(Error::NotExactDivisor { d: n, n: level });
    }
    check_divides(f.level(), level)?;
    EtaQuotient::from_pairs(f.iter().map(|(d, x)| (odot(n, d), x.clone())))
}

fn check_divides(level: u64, target: u64) -> Result<()> {
    if !target.is_multiple_of(level) {
        return Err(Error::LevelMismatch { level, target });
    }
    Ok(())
}

/// Image of an eta quotient under `P_{M,N}`: exponents are rational in
/// general and integral whenever `N ‖ M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoweredQuotient {
    pub level: u64,
    exps: BTreeMap<u64, BigRational>,
}

impl LoweredQuotient {
    pub fn exponents(&self) -> &BTreeMap<u64, BigRational> {
        &self.exps
    }

    pub fn is_integral(&self) -> bool {
        self.exps.values().all(|x| x.is_integer())
    }

    pub fn to_eta(&self) -> Option<EtaQuotient> {
        if !self.is_integral() {
            return None;
        }
        Some(
            EtaQuotient::from_pairs(self.exps.iter().map(|(&d, x)| (d, x.to_integer())))
                .expect("positive indices"),
        )
    }

    pub fn weight2(&self) -> BigRational {
        self.exps.values().sum()
    }

    /// 24-scaled orders on Γ₀(level), indexed by the canonical divisors.
    pub fn orders24(&self) -> Vec<BigRational> {
        let a = order_matrix(self.level);
        let n = a.size();
        let mut y = vec![BigRational::zero(); n];
        for (&d, x) in &self.exps {
            y[a.lattice.index_of(d).expect("d | level")] = x.clone();
        }
        (0..n)
            .map(|r| {
                (0..n)
                    .map(|c| &y[c] * BigRational::from_integer(a.get(r, c).into()))
                    .sum()
            })
            .collect()
    }
}

/// `P_{M,N}(f)` with `(P_{M,N}X)_d = d·Σ_{t|M, gcd(t,N)=d} (t_d/t)·X_t`, where
/// `t_d` is the largest divisor of `t` coprime to `d`.
pub fn lower(f: &EtaQuotient, from: u64, to: u64) -> Result<LoweredQuotient> {
    if to == 0 || !from.is_multiple_of(to) {
        return Err(Error::NotDivisor { d: to, n: from });
    }
    check_divides(f.level(), from)?;
    let mut exps: BTreeMap<u64, BigRational> = BTreeMap::new();
    for (t, x) in f.iter() {
        let d = t.gcd(&to);
        let coeff = Ratio::new(BigInt::from(d * coprime_part(t, d)), BigInt::from(t));
        *exps.entry(d).or_insert_with(BigRational::zero) += coeff * BigRational::from_integer(x.clone());
    }
    exps.retain(|_, x| !x.is_zero());
    Ok(LoweredQuotient { level: to, exps })
}

/// The matrix of `P_{M,N}`: rows indexed by divisors of `N`, columns by
/// divisors of `M`, both in canonical order.
pub fn lowering_matrix(from: u64, to: u64) -> Result<Vec<Vec<Ratio<i64>>>> {
    if to == 0 || !from.is_multiple_of(to) {
        return Err(Error::NotDivisor { d: to, n: from });
    }
    let rows = numth::divisors(to);
    let cols = numth::divisors(from);
    Ok(rows
        .iter()
        .map(|&d| {
            cols.iter()
                .map(|&t| {
                    if t.gcd(&to) == d {
                        Ratio::new((d * coprime_part(t, d)) as i64, t as i64)
                    } else {
                        Ratio::zero()
                    }
                })
                .collect()
        })
        .collect())
}

/// `f ⊛ g`: exponent at `d·d'` is `X_d·Y_{d'}`. Levels must be coprime.
pub fn compose(f: &EtaQuotient, g: &EtaQuotient) -> Result<EtaQuotient> {
    let (m, n) = (f.level(), g.level());
    if m.gcd(&n) != 1 {
        return Err(Error::NonCoprimeLevels(m, n));
    }
    EtaQuotient::from_pairs(
        f.iter()
            .flat_map(|(d, x)| g.iter().map(move |(e, y)| (d * e, x * y))),
    )
}
