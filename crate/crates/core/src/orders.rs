//! Cusp orders of eta quotients on Γ₀(M).
//!
//! Orders are kept 24-scaled so they are integers: `a_t = 24·ord_{1/t}(f; Γ₀(M))`.
//! Cusps are identified by their denominator `t | M`; the φ(gcd(t, M/t))
//! cusps sharing a denominator all carry the same order.
//!
//! The order matrix `A_M(t, d) = M·gcd(d,t)² / (d·gcd(t²,M))` and its inverse
//! are assembled as Kronecker products of prime-power blocks. The canonical
//! divisor order (see [`crate::numth::divisors`]) puts the largest prime's
//! exponent outermost, so `A_M = A_{p_k^{n_k}} ⊗ … ⊗ A_{p_1^{n_1}}`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::eta::EtaQuotient;
use crate::numth::{self, DivisorLattice};

/// `A_M(t, d)` straight from the formula.
pub fn order_entry(m: u64, t: u64, d: u64) -> u64 {
    let (m128, t128, d128) = (m as u128, t as u128, d as u128);
    let g = d.gcd(&t) as u128;
    let num = m128 * g * g;
    let den = d128 * (t128 * t128).gcd(&m128);
    debug_assert_eq!(num % den, 0);
    (num / den) as u64
}

/// Width of the cusp `1/t` of Γ₀(M).
pub fn cusp_width(m: u64, t: u64) -> u64 {
    let t = t as u128;
    (m as u128 / (t * t).gcd(&(m as u128))) as u64
}

pub(crate) fn kron<T>(a: &[T], an: usize, b: &[T], bn: usize) -> Vec<T>
where
    T: Copy + std::ops::Mul<Output = T>,
{
    let n = an * bn;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..an {
        for k in 0..bn {
            for j in 0..an {
                let aij = a[i * an + j];
                for l in 0..bn {
                    out.push(aij * b[k * bn + l]);
                }
            }
        }
    }
    out
}

/// `A_{p^n}`, indexed by exponents `0..=n`.
fn order_block(p: u64, n: u32) -> Vec<i64> {
    let size = n as usize + 1;
    let mut out = Vec::with_capacity(size * size);
    for alpha in 0..=n {
        for beta in 0..=n {
            let e = n as i64 + 2 * alpha.min(beta) as i64 - beta as i64 - (2 * alpha).min(n) as i64;
            out.push((p as i64).pow(e as u32));
        }
    }
    out
}

/// `φ̂(p^n)·A_{p^n}^{-1}`, tridiagonal.
fn scaled_inverse_block(p: u64, n: u32) -> Vec<i64> {
    let size = n as usize + 1;
    let p = p as i64;
    let n = n as i64;
    let mut out = vec![0i64; size * size];
    for i in 0..=n {
        for j in 0..=n {
            let v = if i == j && (i == 0 || i == n) {
                p
            } else if (i - j).abs() == 1 {
                -p.pow(j.min(n - j) as u32)
            } else if i == j {
                p.pow((j - 1).min(n - j - 1) as u32) * (p * p + 1)
            } else {
                0
            };
            out[(i * (n + 1) + j) as usize] = v;
        }
    }
    out
}

/// The order matrix `A_M` with its cusp metadata.
#[derive(Debug, Clone)]
pub struct OrderMatrix {
    pub level: u64,
    pub lattice: Arc<DivisorLattice>,
    /// Row-major, rows indexed by cusp denominator `t`, columns by `d`.
    pub entries: Vec<i64>,
    /// `φ(gcd(t, M/t))`, the number of cusps with denominator `t`.
    pub cusp_mult: Vec<u64>,
    pub widths: Vec<u64>,
    pub psi: u64,
}

impl OrderMatrix {
    fn build(level: u64) -> Self {
        let lattice = Arc::new(DivisorLattice::new(level));
        let mut entries = vec![1i64];
        let mut size = 1usize;
        for &(p, e) in lattice.factors() {
            let block = order_block(p, e);
            entries = kron(&block, e as usize + 1, &entries, size);
            size *= e as usize + 1;
        }
        let cusp_mult = lattice
            .divisors()
            .iter()
            .map(|&t| numth::phi(t.gcd(&(level / t))))
            .collect();
        let widths = lattice
            .divisors()
            .iter()
            .map(|&t| cusp_width(level, t))
            .collect();
        OrderMatrix {
            level,
            lattice,
            entries,
            cusp_mult,
            widths,
            psi: numth::psi(level),
        }
    }

    pub fn size(&self) -> usize {
        self.lattice.len()
    }

    pub fn divisors(&self) -> &[u64] {
        self.lattice.divisors()
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.entries[row * self.size() + col]
    }

    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        let n = self.size();
        (0..n)
            .map(|r| {
                self.entries[r * n..(r + 1) * n]
                    .iter()
                    .zip(x)
                    .filter(|(_, xi)| !xi.is_zero())
                    .map(|(&a, xi)| xi * a)
                    .sum()
            })
            .collect()
    }
}

/// `A_M^{-1}` with the column normalization `B_M(·, t) = m_{t,M}·A_M^{-1}(·, t)`.
#[derive(Debug, Clone)]
pub struct NormalizedInverse {
    pub level: u64,
    pub lattice: Arc<DivisorLattice>,
    /// Common denominator `φ̂(M)`.
    pub denom: i64,
    /// `φ̂(M)·A_M^{-1}`, row-major.
    pub scaled: Vec<i64>,
    /// Least positive scalars making the columns of `A_M^{-1}` integral.
    pub m: Vec<u64>,
    /// `B_M`, row-major.
    pub b: Vec<i64>,
}

impl NormalizedInverse {
    fn build(level: u64) -> Self {
        let lattice = Arc::new(DivisorLattice::new(level));
        let mut scaled = vec![1i64];
        let mut size = 1usize;
        for &(p, e) in lattice.factors() {
            let block = scaled_inverse_block(p, e);
            scaled = kron(&block, e as usize + 1, &scaled, size);
            size *= e as usize + 1;
        }
        let denom = numth::phihat(level) as i64;
        let mut m = Vec::with_capacity(size);
        let mut b = vec![0i64; size * size];
        for col in 0..size {
            let g = (0..size).fold(denom, |g, row| g.gcd(&scaled[row * size + col]));
            let mt = denom / g;
            m.push(mt as u64);
            for row in 0..size {
                b[row * size + col] = scaled[row * size + col] / g;
            }
        }
        NormalizedInverse {
            level,
            lattice,
            denom,
            scaled,
            m,
            b,
        }
    }

    pub fn size(&self) -> usize {
        self.lattice.len()
    }

    /// `A_M^{-1}(row, col)` as an exact fraction.
    pub fn inv(&self, row: usize, col: usize) -> Ratio<i64> {
        Ratio::new(self.scaled[row * self.size() + col], self.denom)
    }

    pub fn inv_matrix(&self) -> Vec<Vec<Ratio<i64>>> {
        let n = self.size();
        (0..n)
            .map(|r| (0..n).map(|c| self.inv(r, c)).collect())
            .collect()
    }

    pub fn b_entry(&self, row: usize, col: usize) -> i64 {
        self.b[row * self.size() + col]
    }

    /// `A_M^{-1}·a` if integral.
    pub fn solve_integral(&self, a: &[BigInt]) -> Option<Vec<BigInt>> {
        let n = self.size();
        let denom = BigInt::from(self.denom);
        (0..n)
            .map(|r| {
                let s: BigInt = self.scaled[r * n..(r + 1) * n]
                    .iter()
                    .zip(a)
                    .filter(|(_, ai)| !ai.is_zero())
                    .map(|(&c, ai)| ai * c)
                    .sum();
                let (q, rem) = s.div_rem(&denom);
                rem.is_zero().then_some(q)
            })
            .collect()
    }
}

type Cache<T> = RwLock<HashMap<u64, Arc<T>>>;

fn cached<T>(cache: &'static OnceLock<Cache<T>>, level: u64, build: fn(u64) -> T) -> Arc<T> {
    let cache = cache.get_or_init(Default::default);
    if let Some(v) = cache.read().expect("cache poisoned").get(&level) {
        return v.clone();
    }
    let built = Arc::new(build(level));
    cache
        .write()
        .expect("cache poisoned")
        .entry(level)
        .or_insert(built)
        .clone()
}

/// `A_M`, shared per level.
pub fn order_matrix(level: u64) -> Arc<OrderMatrix> {
    assert!(level > 0, "level must be positive");
    static CACHE: OnceLock<Cache<OrderMatrix>> = OnceLock::new();
    cached(&CACHE, level, OrderMatrix::build)
}

/// `A_M^{-1}`, the scalars `m_{t,M}` and `B_M`, shared per level.
pub fn inverse_and_b(level: u64) -> Arc<NormalizedInverse> {
    assert!(level > 0, "level must be positive");
    static CACHE: OnceLock<Cache<NormalizedInverse>> = OnceLock::new();
    cached(&CACHE, level, NormalizedInverse::build)
}

/// Lower-triangular Hermite basis `H` of the lattice `A_M·ℤⁿ` of order
/// vectors of eta quotients on Γ₀(M): positive diagonal, entries left of the
/// diagonal reduced into `[0, h_kk)`. An integer vector `b` is an order
/// vector iff `b = H·z` for an integer `z`.
#[derive(Debug, Clone)]
pub struct OrderLattice {
    pub level: u64,
    n: usize,
    /// Row-major.
    pub h: Vec<i64>,
}

impl OrderLattice {
    fn build(level: u64) -> Self {
        let a = order_matrix(level);
        let n = a.size();
        let mut h: Vec<Vec<BigInt>> = (0..n)
            .map(|r| (0..n).map(|c| BigInt::from(a.get(r, c))).collect())
            .collect();
        // column operations: h[..][j] ← x·h[..][i] + y·h[..][j], etc.
        let combine = |h: &mut Vec<Vec<BigInt>>, i: usize, j: usize, m: [&BigInt; 4]| {
            for row in h.iter_mut() {
                let (ci, cj) = (row[i].clone(), row[j].clone());
                row[i] = m[0] * &ci + m[1] * &cj;
                row[j] = m[2] * &ci + m[3] * &cj;
            }
        };
        for i in 0..n {
            for j in i + 1..n {
                if h[i][j].is_zero() {
                    continue;
                }
                let e = h[i][i].extended_gcd(&h[i][j]);
                let (p, q) = (&h[i][i] / &e.gcd, &h[i][j] / &e.gcd);
                let nq = -q;
                combine(&mut h, i, j, [&e.x, &e.y, &nq, &p]);
            }
            if h[i][i] < BigInt::zero() {
                for row in h.iter_mut() {
                    row[i] = -row[i].clone();
                }
            }
            for j in 0..i {
                let f = h[i][j].div_floor(&h[i][i]);
                if !f.is_zero() {
                    for row in h.iter_mut() {
                        let v = &f * &row[i];
                        row[j] -= v;
                    }
                }
            }
        }
        let h = h
            .into_iter()
            .flatten()
            .map(|x| x.to_i64().expect("Hermite entries fit in i64"))
            .collect();
        OrderLattice { level, n, h }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.h[row * self.n + col]
    }
}

/// Hermite basis of the order-vector lattice, shared per level.
pub fn order_lattice(level: u64) -> Arc<OrderLattice> {
    assert!(level > 0, "level must be positive");
    static CACHE: OnceLock<Cache<OrderLattice>> = OnceLock::new();
    cached(&CACHE, level, OrderLattice::build)
}

/// The 24-scaled orders of an eta quotient at the cusps of Γ₀(M).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderVector {
    pub level: u64,
    lattice: Arc<DivisorLattice>,
    orders: Vec<BigInt>,
}

impl OrderVector {
    /// Wraps raw orders indexed by the canonical divisors of `level`.
    pub fn from_orders(level: u64, orders: Vec<BigInt>) -> Result<Self> {
        let lattice = order_matrix(level).lattice.clone();
        if orders.len() != lattice.len() {
            return Err(Error::Domain(format!(
                "expected {} orders for level {level}, got {}",
                lattice.len(),
                orders.len()
            )));
        }
        Ok(OrderVector {
            level,
            lattice,
            orders,
        })
    }

    pub fn divisors(&self) -> &[u64] {
        self.lattice.divisors()
    }

    pub fn orders(&self) -> &[BigInt] {
        &self.orders
    }

    /// The order at the cusp `1/t`.
    pub fn get(&self, t: u64) -> Option<&BigInt> {
        self.lattice.index_of(t).map(|i| &self.orders[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &BigInt)> + '_ {
        self.divisors().iter().copied().zip(&self.orders)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.orders.iter().all(|a| !a.is_negative())
    }

    /// `w_t = M / gcd(t², M)`.
    pub fn width(&self, t: u64) -> u64 {
        cusp_width(self.level, t)
    }
}

impl Serialize for OrderVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Orders<'a>(&'a OrderVector);
        impl Serialize for Orders<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some(self.0.orders.len()))?;
                for (t, a) in self.0.iter() {
                    map.serialize_entry(&t.to_string(), &crate::json_int(a))?;
                }
                map.end()
            }
        }
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("level", &self.level)?;
        map.serialize_entry("orders24", &Orders(self))?;
        map.end()
    }
}

/// `a = A_M·X`: the 24-scaled orders of `f` on Γ₀(M).
pub fn order_vector(f: &EtaQuotient, level: u64) -> Result<OrderVector> {
    let a = order_matrix(level);
    let x = f.to_vector(&a.lattice)?;
    Ok(OrderVector {
        level,
        lattice: a.lattice.clone(),
        orders: a.apply(&x),
    })
}

/// True iff `f` has no pole at any cusp of Γ₀(level(f)).
pub fn is_holomorphic(f: &EtaQuotient) -> bool {
    order_vector(f, f.level())
        .expect("level divides itself")
        .is_nonnegative()
}

/// Doubled weight recovered from orders via `Σ φ(gcd(t,M/t))·a_t = k·ψ(M)`.
pub fn weight_from_orders(a: &OrderVector) -> Result<BigInt> {
    let mat = order_matrix(a.level);
    let total: BigInt = a
        .orders
        .iter()
        .zip(&mat.cusp_mult)
        .map(|(x, &c)| x * c)
        .sum();
    let (k, rem) = total.div_rem(&BigInt::from(mat.psi));
    if rem.is_zero() {
        Ok(k)
    } else {
        Err(Error::NonIntegralWeight)
    }
}

/// The eta quotient with the given orders, when one with integer exponents
/// exists. Order vectors determine eta quotients uniquely.
pub fn eta_from_orders(a: &OrderVector) -> Option<EtaQuotient> {
    let inv = inverse_and_b(a.level);
    let y = inv.solve_integral(&a.orders)?;
    Some(EtaQuotient::from_vector(&inv.lattice, &y))
}

/// `η^{B_N(·, t)}`: holomorphic, with 24-scaled orders `m_{t,N}·e_t`.
pub fn bn_eta(level: u64, t: u64) -> Result<EtaQuotient> {
    let inv = inverse_and_b(level);
    let col = inv
        .lattice
        .index_of(t)
        .ok_or(Error::NotDivisor { d: t, n: level })?;
    let n = inv.size();
    let xs: Vec<BigInt> = (0..n).map(|r| BigInt::from(inv.b_entry(r, col))).collect();
    Ok(EtaQuotient::from_vector(&inv.lattice, &xs))
}
