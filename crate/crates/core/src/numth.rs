//! Multiplicative arithmetic over the divisor lattice.
//!
//! Everything here works on `u64` and uses trial division; levels handled by
//! the rest of the crate are desk-scale.

use std::collections::HashMap;

use num_integer::Integer;
use serde::Serialize;

/// Prime factorization of `n` as `(p, e)` pairs with `p` ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0, "factorize(0)");
    let mut out = Vec::new();
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    push(5, &mut n);
    // 2*3*5 wheel
    const GAPS: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut p = 7u64;
    let mut i = 0;
    while p.saturating_mul(p) <= n {
        push(p, &mut n);
        p += GAPS[i];
        i = (i + 1) % GAPS.len();
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All divisors of `n` in canonical order.
///
/// Divisors are ordered lexicographically by their prime-exponent tuples,
/// primes ascending, with the exponent of the largest prime most significant:
/// `divisors(12) == [1, 2, 4, 3, 6, 12]`. Matrices indexed by divisors are
/// laid out in this order, which makes them Kronecker products of their
/// prime-power blocks.
pub fn divisors(n: u64) -> Vec<u64> {
    divisors_from_factors(&factorize(n))
}

pub(crate) fn divisors_from_factors(factors: &[(u64, u32)]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &(p, e) in factors {
        let base = out.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            out.extend(base.iter().map(|d| d * pk));
        }
    }
    out
}

/// The divisors of a fixed `n` together with a reverse index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorLattice {
    n: u64,
    factors: Vec<(u64, u32)>,
    divisors: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl DivisorLattice {
    pub fn new(n: u64) -> Self {
        let factors = factorize(n);
        let divisors = divisors_from_factors(&factors);
        let index = divisors.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        DivisorLattice {
            n,
            factors,
            divisors,
            index,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn divisors(&self) -> &[u64] {
        &self.divisors
    }

    pub fn len(&self) -> usize {
        self.divisors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of `d` in the canonical order, if `d | n`.
    pub fn index_of(&self, d: u64) -> Option<usize> {
        self.index.get(&d).copied()
    }
}

/// Arithmetic functions of `n` consumed by the order and bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ArithProfile {
    pub n: u64,
    pub rad: u64,
    pub omega: u32,
    pub phi: u64,
    /// Index of Γ₀(n) in SL₂(ℤ): `n ∏ (1 + 1/p)`.
    pub psi: u64,
    /// `n ∏ (p − 1/p)`.
    pub phihat: u64,
}

pub fn arith_profile(n: u64) -> ArithProfile {
    let factors = factorize(n);
    let mut prof = ArithProfile {
        n,
        rad: 1,
        omega: factors.len() as u32,
        phi: 1,
        psi: 1,
        phihat: 1,
    };
    for (p, e) in factors {
        let pe1 = p.pow(e - 1);
        prof.rad *= p;
        prof.phi *= pe1 * (p - 1);
        prof.psi *= pe1 * (p + 1);
        prof.phihat *= pe1 * (p * p - 1);
    }
    prof
}

pub fn rad(n: u64) -> u64 {
    factorize(n).iter().map(|&(p, _)| p).product()
}

pub fn phi(n: u64) -> u64 {
    arith_profile(n).phi
}

pub fn psi(n: u64) -> u64 {
    arith_profile(n).psi
}

pub fn phihat(n: u64) -> u64 {
    arith_profile(n).phihat
}

/// `lcm(a, b) / gcd(a, b)`; on the exact divisors of any `N` this is the
/// group law of a boolean group with identity 1.
pub fn odot(a: u64, b: u64) -> u64 {
    let g = a.gcd(&b);
    (a / g) * (b / g)
}

/// `d ‖ n`: `d` divides `n` and `gcd(d, n/d) = 1`.
pub fn is_exact_divisor(d: u64, n: u64) -> bool {
    d != 0 && n.is_multiple_of(d) && d.gcd(&(n / d)) == 1
}

/// Greatest common exact divisor of `m` and `n`.
pub fn gcexd(m: u64, n: u64) -> u64 {
    let g = m.gcd(&n);
    factorize(g)
        .into_iter()
        .filter_map(|(p, _)| {
            let vm = valuation(m, p);
            (vm == valuation(n, p)).then(|| p.pow(vm))
        })
        .product()
}

/// Exponent of the prime `p` in `n`.
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// The exact divisors of `n`, in canonical divisor order.
pub fn exact_divisors(n: u64) -> Vec<u64> {
    let pp: Vec<(u64, u32)> = factorize(n)
        .into_iter()
        .map(|(p, e)| (p.pow(e), 1))
        .collect();
    divisors_from_factors(&pp)
}

/// Largest divisor of `t` coprime to `d`.
pub(crate) fn coprime_part(mut t: u64, d: u64) -> u64 {
    loop {
        let g = t.gcd(&d);
        if g == 1 {
            return t;
        }
        t /= g;
    }
}
