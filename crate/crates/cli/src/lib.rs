//! Command-line front end for the `etaq` library.
//!
//! [`run`] parses an argument vector, dispatches to the library and returns
//! the exit code together with the JSON document and a human-readable
//! rendering; `main` only prints one of them.

use std::ffi::OsString;
use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand};
use etaq::bounds::{self, BoundReport};
use etaq::factor::{self, SearchConfig};
use etaq::orders::{self, OrderVector};
use etaq::qoracle::{self, SeriesConfig};
use etaq::transforms;
use etaq::{json_int, Error, EtaQuotient};
use serde_json::{json, Map, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Environment variable overriding the enumeration budget.
pub const BUDGET_ENV: &str = "ETAQ_BUDGET";

#[derive(Debug, Clone, PartialEq)]
pub struct CommandResult {
    pub exit_code: i32,
    /// The machine-readable document; on failure `{"error": ...}`.
    pub json: Value,
    /// Human-readable rendering (or the error / usage message).
    pub text: String,
}

#[derive(Parser, Debug)]
#[command(name = "etaq", version, about = "Factorization and irreducibility of holomorphic eta quotients")]
struct Cli {
    /// Emit JSON instead of a table.
    #[arg(long, global = true)]
    json: bool,
    /// Enumeration budget (coordinate visits); overrides ETAQ_BUDGET.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Cap {
    /// Largest level searched (default 4·level).
    #[arg(long)]
    cap: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Level, doubled weight, holomorphy and orders on the level.
    Info { f: String },
    /// 24-scaled orders at the cusps of Γ₀(M).
    Orders {
        f: String,
        #[arg(long)]
        on: u64,
    },
    /// Least-weight factorization on Γ₀(M).
    Factorize {
        f: String,
        #[arg(long)]
        on: u64,
    },
    /// All holomorphic factors on Γ₀(M).
    Factors {
        f: String,
        #[arg(long)]
        on: u64,
    },
    /// Whether f fails to factor on its own level.
    Quasi { f: String },
    /// Irreducibility verdict.
    Irreducible {
        f: String,
        #[command(flatten)]
        cap: Cap,
    },
    /// Least level on which f factors.
    Minlevel {
        f: String,
        #[command(flatten)]
        cap: Cap,
    },
    /// Level-lowering map from Γ₀(M) to Γ₀(N).
    Lower {
        f: String,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    /// Atkin–Lehner involution.
    Atkin {
        f: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        level: u64,
    },
    /// Rescale d ↦ νd.
    Rescale {
        f: String,
        #[arg(long)]
        by: u64,
    },
    /// Composition of quotients with coprime levels.
    Compose { f: String, g: String },
    /// Primitive quotient and rescaling factor.
    Extract { f: String },
    /// Least-factorization-level bound.
    Bound {
        #[arg(long = "N")]
        n: u64,
        #[arg(long, conflicts_with = "corollary", required_unless_present = "corollary")]
        k: Option<u64>,
        /// Use κ(N) in place of the weight.
        #[arg(long)]
        corollary: bool,
    },
    /// Truncated q-expansion on the q^{1/24} grid.
    Qexp {
        f: String,
        #[arg(long, default_value_t = 240)]
        terms: usize,
    },
    /// Check f = ∏ factors through a number of grid terms.
    Verify {
        f: String,
        #[arg(long, num_args = 1.., required = true)]
        factors: Vec<String>,
        #[arg(long, default_value_t = 240)]
        terms: usize,
    },
}

struct Output {
    json: Value,
    text: String,
}

fn parse(s: &str) -> Result<EtaQuotient, Error> {
    s.parse()
}

fn budget_from_env() -> Result<Option<u64>, Error> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Domain(format!("{BUDGET_ENV} must be a nonnegative integer, got {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn orders_json(a: &OrderVector) -> Value {
    Value::Object(
        a.iter()
            .map(|(t, x)| (t.to_string(), json_int(x)))
            .collect::<Map<_, _>>(),
    )
}

fn orders_text(a: &OrderVector) -> String {
    let mut s = format!("{:>8}  {:>6}  {}\n", "cusp 1/t", "width", "24·ord");
    for (t, x) in a.iter() {
        let _ = writeln!(s, "{t:>8}  {:>6}  {x}", a.width(t));
    }
    s
}

fn eta_value(f: &EtaQuotient) -> Value {
    Value::String(f.to_string())
}

fn simple(key: &str, f: &EtaQuotient) -> Output {
    Output {
        json: json!({ key: f.to_string() }),
        text: format!("{f}\n"),
    }
}

fn bound_text(r: &BoundReport) -> String {
    let mut s = format!(
        "N = {}, k = {}, R = {}, ceil(R) = {}, 2Nk = {}\n",
        r.n, r.k, r.r, r.r_ceil, r.base
    );
    if let Some(u) = &r.upsilon {
        let _ = writeln!(s, "upsilon = {u}");
    }
    match &r.bound {
        Some(b) => {
            let _ = writeln!(s, "bound = {b}");
        }
        None => {
            let _ = writeln!(s, "bound ≈ 2^{:.6e}", r.log2_bound);
        }
    }
    s
}

fn execute(cli: Cli) -> Result<Output, Error> {
    let budget = match cli.budget {
        Some(b) => b,
        None => budget_from_env()?.unwrap_or(SearchConfig::default().budget),
    };
    let cfg = SearchConfig::with_budget(budget);
    let series = SeriesConfig::default();
    let out = match cli.command {
        Command::Info { f } => {
            let f = parse(&f)?;
            let level = f.level();
            let a = orders::order_vector(&f, level)?;
            let holo = a.is_nonnegative();
            let text = format!(
                "{f}\nlevel {level}, weight2 {}, holomorphic {holo}\n{}",
                f.weight2(),
                orders_text(&a)
            );
            Output {
                json: json!({
                    "level": level,
                    "weight2": json_int(&f.weight2()),
                    "holomorphic": holo,
                    "orders24": orders_json(&a),
                }),
                text,
            }
        }
        Command::Orders { f, on } => {
            let a = orders::order_vector(&parse(&f)?, on)?;
            Output {
                json: json!({ "level": on, "orders24": orders_json(&a) }),
                text: format!("level {on}\n{}", orders_text(&a)),
            }
        }
        Command::Factorize { f, on } => match factor::factorize_on(&parse(&f)?, on, &cfg)? {
            Some(w) => Output {
                json: json!({ "g": eta_value(&w.g), "h": eta_value(&w.h) }),
                text: format!("g = {}\nh = {}\n", w.g, w.h),
            },
            None => Output {
                json: Value::Null,
                text: format!("not factorizable on level {on}\n"),
            },
        },
        Command::Factors { f, on } => {
            let all = factor::all_factors_on(&parse(&f)?, on, &cfg)?;
            let text = all.iter().map(|g| format!("{g}\n")).collect();
            Output {
                json: json!({ "level": on, "factors": all.iter().map(eta_value).collect::<Vec<_>>() }),
                text,
            }
        }
        Command::Quasi { f } => {
            let q = factor::quasi_irreducible(&parse(&f)?, &cfg)?;
            Output {
                json: json!({ "quasi_irreducible": q }),
                text: format!("quasi-irreducible: {q}\n"),
            }
        }
        Command::Irreducible { f, cap } => {
            let f = parse(&f)?;
            let cap = cap.cap.unwrap_or(4 * f.level());
            let v = factor::decide_irreducible(&f, cap, &cfg)?;
            let json = serde_json::to_value(&v).expect("verdicts serialize");
            let text = match &v {
                factor::Verdict::Reducible(w) => {
                    format!("reducible on level {}: ({}) · ({})\n", w.on_level, w.g, w.h)
                }
                factor::Verdict::Irreducible(m) => format!("irreducible ({})\n", m.tag()),
                factor::Verdict::UnknownUpTo(c) => {
                    format!("unknown: no factorization on any level up to {c}\n")
                }
            };
            Output { json, text }
        }
        Command::Minlevel { f, cap } => {
            let f = parse(&f)?;
            let cap = cap.cap.unwrap_or(4 * f.level());
            let m = factor::min_factorization_level(&f, cap, &cfg)?;
            Output {
                json: json!({ "min_level": m, "cap": cap }),
                text: match m {
                    Some(m) => format!("{m}\n"),
                    None => format!("none up to {cap}\n"),
                },
            }
        }
        Command::Lower { f, from, to } => {
            let low = transforms::lower(&parse(&f)?, from, to)?;
            let exps: Map<String, Value> = low
                .exponents()
                .iter()
                .map(|(d, x)| {
                    let v = if x.is_integer() {
                        json_int(&x.to_integer())
                    } else {
                        Value::String(x.to_string())
                    };
                    (d.to_string(), v)
                })
                .collect();
            let text = match low.to_eta() {
                Some(g) => format!("{g}\n"),
                None => {
                    let parts: Vec<String> =
                        low.exponents().iter().map(|(d, x)| format!("{d}:{x}")).collect();
                    format!("{}\n", parts.join(","))
                }
            };
            Output {
                json: json!({
                    "level": to,
                    "integral": low.is_integral(),
                    "exponents": exps,
                    "eta": low.to_eta().map(|g| g.to_string()),
                }),
                text,
            }
        }
        Command::Atkin { f, n, level } => {
            simple("result", &transforms::atkin_lehner(&parse(&f)?, n, level)?)
        }
        Command::Rescale { f, by } => {
            if by == 0 {
                return Err(Error::ZeroIndex);
            }
            simple("result", &parse(&f)?.rescale(by))
        }
        Command::Compose { f, g } => simple("result", &transforms::compose(&parse(&f)?, &parse(&g)?)?),
        Command::Extract { f } => {
            let (p, v) = parse(&f)?.extract()?;
            Output {
                json: json!({ "primitive": p.to_string(), "by": v }),
                text: format!("{p} rescaled by {v}\n"),
            }
        }
        Command::Bound { n, k, corollary } => {
            let r = if corollary {
                bounds::weight_free_bound(n)?
            } else {
                bounds::least_level_bound(n, k.expect("clap enforces --k"))?
            };
            Output {
                json: serde_json::to_value(&r).expect("reports serialize"),
                text: bound_text(&r),
            }
        }
        Command::Qexp { f, terms } => {
            let s = qoracle::qexp(&parse(&f)?, terms, &series)?;
            let mut text = format!("offset24 = {}\n", s.offset24);
            for (i, c) in s.coeffs.iter().enumerate() {
                if c.bits() != 0 {
                    let _ = writeln!(text, "q^({}/24): {c}", s.offset24 + i as i64);
                }
            }
            Output {
                json: json!({
                    "offset24": s.offset24,
                    "coeffs": s.coeffs.iter().map(json_int).collect::<Vec<_>>(),
                }),
                text,
            }
        }
        Command::Verify { f, factors, terms } => {
            let f = parse(&f)?;
            let rhs = factors.iter().map(|g| parse(g)).collect::<Result<Vec<_>, _>>()?;
            let holds = qoracle::verify_identity(&f, &rhs, terms, &series)?;
            Output {
                json: json!({ "holds": holds, "terms": terms }),
                text: format!("{}\n", if holds { "identity holds" } else { "identity fails" }),
            }
        }
    };
    Ok(out)
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_DOMAIN } else { EXIT_OK };
            return CommandResult {
                exit_code: code,
                json: json!({ "error": e.kind().to_string() }),
                text: e.render().to_string(),
            };
        }
    };
    let as_json = cli.json;
    match execute(cli) {
        Ok(out) => CommandResult {
            exit_code: EXIT_OK,
            text: if as_json {
                format!("{}\n", out.json)
            } else {
                out.text
            },
            json: out.json,
        },
        Err(e) => {
            let json = json!({ "error": e.to_string() });
            CommandResult {
                exit_code: if e.is_budget() { EXIT_BUDGET } else { EXIT_DOMAIN },
                text: if as_json { format!("{json}\n") } else { format!("error: {e}\n") },
                json,
            }
        }
    }
}
