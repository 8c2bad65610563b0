//! The eta quotient value type.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Div, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numth::{self, DivisorLattice};

/// A finite product `∏ η(dz)^{X_d}` with integer exponents.
///
/// Stored sparsely: only indices with nonzero exponent are kept, so two
/// quotients are equal exactly when their maps are equal. The empty map is
/// the constant 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct EtaQuotient {
    exps: BTreeMap<u64, BigInt>,
}

impl EtaQuotient {
    pub fn one() -> Self {
        Self::default()
    }

    /// `η_d`.
    pub fn eta(d: u64) -> Self {
        Self::from_pairs([(d, 1)]).expect("positive index")
    }

    /// Builds a quotient from `(d, X_d)` pairs; duplicate indices are summed.
    pub fn from_pairs<I, E>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, E)>,
        E: Into<BigInt>,
    {
        let mut exps: BTreeMap<u64, BigInt> = BTreeMap::new();
        for (d, x) in pairs {
            if d == 0 {
                return Err(Error::ZeroIndex);
            }
            *exps.entry(d).or_default() += x.into();
        }
        exps.retain(|_, x| !x.is_zero());
        Ok(EtaQuotient { exps })
    }

    /// Builds a quotient from an exponent vector indexed by `lattice`.
    pub fn from_vector(lattice: &DivisorLattice, xs: &[BigInt]) -> Self {
        debug_assert_eq!(lattice.len(), xs.len());
        let exps = lattice
            .divisors()
            .iter()
            .zip(xs)
            .filter(|(_, x)| !x.is_zero())
            .map(|(&d, x)| (d, x.clone()))
            .collect();
        EtaQuotient { exps }
    }

    /// The exponent vector over `lattice`, or an error if the level does not
    /// divide `lattice.n()`.
    pub fn to_vector(&self, lattice: &DivisorLattice) -> Result<Vec<BigInt>> {
        let level = self.level();
        if !lattice.n().is_multiple_of(level) {
            return Err(Error::LevelMismatch {
                level,
                target: lattice.n(),
            });
        }
        let mut v = vec![BigInt::zero(); lattice.len()];
        for (&d, x) in &self.exps {
            v[lattice.index_of(d).expect("d | level | n")] = x.clone();
        }
        Ok(v)
    }

    pub fn exponent(&self, d: u64) -> BigInt {
        self.exps.get(&d).cloned().unwrap_or_default()
    }

    /// `(d, X_d)` for every nonzero exponent, `d` ascending.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigInt)> + '_ {
        self.exps.iter().map(|(&d, x)| (d, x))
    }

    pub fn is_constant(&self) -> bool {
        self.exps.is_empty()
    }

    /// lcm of the indices with nonzero exponent; 1 for the constant.
    pub fn level(&self) -> u64 {
        self.exps.keys().fold(1u64, |acc, d| acc.lcm(d))
    }

    /// `Σ X_d`, twice the weight.
    pub fn weight2(&self) -> BigInt {
        self.exps.values().sum()
    }

    /// `X + sign·Y`.
    pub fn combine(&self, other: &EtaQuotient, sign: i8) -> EtaQuotient {
        assert!(sign == 1 || sign == -1, "sign must be ±1");
        let mut exps = self.exps.clone();
        for (&d, y) in &other.exps {
            let e = exps.entry(d).or_default();
            if sign > 0 {
                *e += y;
            } else {
                *e -= y;
            }
        }
        exps.retain(|_, x| !x.is_zero());
        EtaQuotient { exps }
    }

    /// `f^n`.
    pub fn pow(&self, n: i64) -> EtaQuotient {
        let exps = if n == 0 {
            BTreeMap::new()
        } else {
            self.exps.iter().map(|(&d, x)| (d, x * n)).collect()
        };
        EtaQuotient { exps }
    }

    /// `f(vz)`: every index multiplied by `v`.
    pub fn rescale(&self, v: u64) -> EtaQuotient {
        assert!(v > 0, "rescaling factor must be positive");
        let exps = self.exps.iter().map(|(&d, x)| (d * v, x.clone())).collect();
        EtaQuotient { exps }
    }

    /// The primitive quotient `f₀` and the factor `v` with `f = f₀(vz)`.
    pub fn extract(&self) -> Result<(EtaQuotient, u64)> {
        if self.is_constant() {
            return Err(Error::ConstantQuotient);
        }
        let v = self.exps.keys().fold(0u64, |acc, d| acc.gcd(d));
        let exps = self.exps.iter().map(|(&d, x)| (d / v, x.clone())).collect();
        Ok((EtaQuotient { exps }, v))
    }

    pub fn is_primitive(&self) -> bool {
        self.exps.keys().fold(0u64, |acc, d| acc.gcd(d)) <= 1
    }

    /// Canonical text: `d:e` pairs in canonical divisor order of the level,
    /// or `1` for the constant.
    pub fn format(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<Self> {
        Parser::new(text).parse()
    }
}

impl fmt::Display for EtaQuotient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return f.write_str("1");
        }
        let mut first = true;
        for d in numth::divisors(self.level()) {
            if let Some(x) = self.exps.get(&d) {
                if !first {
                    f.write_str(",")?;
                }
                first = false;
                write!(f, "{d}:{x}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for EtaQuotient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Mul for &EtaQuotient {
    type Output = EtaQuotient;

    fn mul(self, rhs: &EtaQuotient) -> EtaQuotient {
        self.combine(rhs, 1)
    }
}

impl Div for &EtaQuotient {
    type Output = EtaQuotient;

    fn div(self, rhs: &EtaQuotient) -> EtaQuotient {
        self.combine(rhs, -1)
    }
}

impl Mul for EtaQuotient {
    type Output = EtaQuotient;

    fn mul(self, rhs: EtaQuotient) -> EtaQuotient {
        &self * &rhs
    }
}

impl Div for EtaQuotient {
    type Output = EtaQuotient;

    fn div(self, rhs: EtaQuotient) -> EtaQuotient {
        &self / &rhs
    }
}

impl Serialize for EtaQuotient {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for EtaQuotient {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Grammar: `etaq := "" | "1" | pair ("," pair)*`, `pair := uint ":" int`.
/// Whitespace is ignored anywhere.
struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str) -> Self {
        let chars: Vec<(usize, char)> = text
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .collect();
        Parser {
            chars,
            pos: 0,
            end: text.len(),
        }
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.end, |&(i, _)| i)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn digits(&mut self) -> Result<String> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected digits");
        }
        Ok(self.chars[start..self.pos].iter().map(|&(_, c)| c).collect())
    }

    fn parse(mut self) -> Result<EtaQuotient> {
        if self.chars.is_empty() {
            return Ok(EtaQuotient::one());
        }
        if self.chars.len() == 1 && self.peek() == Some('1') {
            return Ok(EtaQuotient::one());
        }
        let mut pairs = Vec::new();
        loop {
            let index_at = self.offset();
            let d: u64 = match self.digits()?.parse() {
                Ok(d) => d,
                Err(_) => {
                    return Err(Error::Syntax {
                        pos: index_at,
                        msg: "rescaling index out of range".into(),
                    })
                }
            };
            if d == 0 {
                return Err(Error::ZeroIndex);
            }
            if self.peek() != Some(':') {
                return self.err("expected ':'");
            }
            self.pos += 1;
            let negative = match self.peek() {
                Some('-') => {
                    self.pos += 1;
                    true
                }
                Some('+') => {
                    self.pos += 1;
                    false
                }
                _ => false,
            };
            let mut x: BigInt = self.digits()?.parse().expect("ascii digits");
            if negative {
                x = -x;
            }
            pairs.push((d, x));
            match self.peek() {
                None => break,
                Some(',') => self.pos += 1,
                Some(c) => return self.err(format!("unexpected '{c}'")),
            }
        }
        EtaQuotient::from_pairs(pairs)
    }
}
