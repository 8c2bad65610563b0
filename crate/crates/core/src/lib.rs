//! Exact arithmetic for holomorphic eta quotients.
//!
//! - [`numth`]: divisors, exact divisors, `⊙` and the arithmetic functions
//!   φ, ψ, φ̂ used by the order formulas
//! - [`eta`]: the [`EtaQuotient`] value type and its text format
//! - [`orders`]: order matrices `A_M`, their inverses, `B_M`, cusp orders
//! - [`transforms`]: Atkin–Lehner involutions, level lowering, composition
//! - [`factor`]: factorization on Γ₀(M) and the irreducibility verdicts
//! - [`bounds`]: explicit level bounds
//! - [`qoracle`]: truncated q-expansions for independent verification

pub mod bounds;
pub mod error;
pub mod eta;
pub mod factor;
pub mod numth;
pub mod orders;
pub mod qoracle;
pub mod transforms;

pub use error::{Error, Result};
pub use eta::EtaQuotient;
pub use factor::{FactorizationWitness, IrreducibilityVerdict, SearchConfig, Verdict, VerdictMethod};
pub use orders::{OrderMatrix, OrderVector};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// A big integer as a JSON number when it fits in `i64`, otherwise as a
/// decimal string.
pub fn json_int(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => v.into(),
        None => x.to_string().into(),
    }
}
