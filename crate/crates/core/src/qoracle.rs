//! Exact truncated q-expansions on the `q^{1/24}` grid.
//!
//! Independent of the order matrices: series are built from Euler products
//! alone, so they can cross-check orders at ∞ and certify identities.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::eta::EtaQuotient;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesConfig {
    /// Largest admissible grid index `T`.
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig { max_terms: 100_000 }
    }
}

/// `Σ_i coeffs[i]·q^{(offset24 + i)/24}` for `i = 0..=T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    pub offset24: i64,
    pub coeffs: Vec<BigInt>,
}

impl QSeries {
    /// Window length minus one.
    pub fn terms(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficient of `q^{e/24}`, if `e` lies in the window.
    pub fn coeff_at(&self, e: i64) -> Option<&BigInt> {
        usize::try_from(e - self.offset24)
            .ok()
            .and_then(|i| self.coeffs.get(i))
    }

    /// Product, truncated to the shorter window.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        QSeries {
            offset24: self.offset24 + other.offset24,
            coeffs: mul_trunc(&self.coeffs, &other.coeffs, n, 1),
        }
    }
}

fn check_budget(t: usize, cfg: &SeriesConfig) -> Result<()> {
    if t > cfg.max_terms {
        return Err(Error::SeriesBudget {
            requested: t,
            budget: cfg.max_terms,
        });
    }
    Ok(())
}

/// `∏_{n≥1}(1 − qⁿ)` through `q^deg`, via the pentagonal-number theorem.
fn euler(deg: usize) -> Vec<BigInt> {
    let mut e = vec![BigInt::zero(); deg + 1];
    e[0] = BigInt::one();
    for k in 1.. {
        let g1 = k * (3 * k - 1) / 2;
        if g1 > deg {
            break;
        }
        let sign = if k % 2 == 0 { 1 } else { -1 };
        e[g1] = BigInt::from(sign);
        let g2 = k * (3 * k + 1) / 2;
        if g2 <= deg {
            e[g2] = BigInt::from(sign);
        }
    }
    e
}

/// Truncated product of two dense series whose nonzero terms sit on
/// multiples of `stride`.
fn mul_trunc(a: &[BigInt], b: &[BigInt], n: usize, stride: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); n];
    for (i, x) in a.iter().enumerate().take(n).step_by(stride) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i).step_by(stride) {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    out
}

/// Inverse of a series with constant term 1, by Newton iteration
/// `b ← b·(2 − a·b)`.
fn invert(a: &[BigInt]) -> Vec<BigInt> {
    let n = a.len();
    let mut b = vec![BigInt::one()];
    let mut prec = 1;
    while prec < n {
        prec = (2 * prec).min(n);
        let ab = mul_trunc(&a[..prec], &b, prec, 1);
        let mut corr: Vec<BigInt> = ab.into_iter().map(|x| -x).collect();
        corr[0] += 2;
        b = mul_trunc(&b, &corr, prec, 1);
    }
    b.truncate(n);
    b
}

fn pow_trunc(base: &[BigInt], mut e: u64) -> Vec<BigInt> {
    let n = base.len();
    let mut acc = vec![BigInt::zero(); n];
    acc[0] = BigInt::one();
    let mut sq = base.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_trunc(&acc, &sq, n, 1);
        }
        e >>= 1;
        if e > 0 {
            sq = mul_trunc(&sq, &sq, n, 1);
        }
    }
    acc
}

/// Expansion of `f` through grid index `T`.
pub fn qexp(f: &EtaQuotient, t: usize, cfg: &SeriesConfig) -> Result<QSeries> {
    check_budget(t, cfg)?;
    let n = t + 1;
    let mut coeffs = vec![BigInt::zero(); n];
    coeffs[0] = BigInt::one();
    let mut offset24 = BigInt::zero();
    for (d, x) in f.iter() {
        offset24 += BigInt::from(d) * x;
        let stride = 24usize.saturating_mul(usize::try_from(d).unwrap_or(usize::MAX));
        let deg = t / stride;
        if deg == 0 {
            continue;
        }
        let e = euler(deg);
        let base = if x.is_negative() { invert(&e) } else { e };
        let k = x
            .abs()
            .to_u64()
            .ok_or_else(|| Error::Domain(format!("exponent {x} too large for expansion")))?;
        let powd = pow_trunc(&base, k);
        let mut spread = vec![BigInt::zero(); n];
        for (i, c) in powd.into_iter().enumerate() {
            spread[i * stride] = c;
        }
        coeffs = mul_trunc(&coeffs, &spread, n, 1);
    }
    let offset24 = offset24
        .to_i64()
        .ok_or_else(|| Error::Domain("order at infinity out of range".into()))?;
    Ok(QSeries { offset24, coeffs })
}

/// True iff `lhs` and the product of `rhs` agree through grid index `T`.
pub fn verify_identity(
    lhs: &EtaQuotient,
    rhs: &[EtaQuotient],
    t: usize,
    cfg: &SeriesConfig,
) -> Result<bool> {
    let left = qexp(lhs, t, cfg)?;
    let mut right = qexp(&EtaQuotient::one(), t, cfg)?;
    for g in rhs {
        right = right.mul(&qexp(g, t, cfg)?);
    }
    Ok(left == right)
}
