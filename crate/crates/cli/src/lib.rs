//! Command-line frontend for the `polyquot` library.
//!
//! Every subcommand builds an ordered JSON value; CSV output is derived from
//! the same value (one row per record, nested lists joined with `;`).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Map, Value};

use polyquot::charsum::{character_sum, character_sum_profile};
use polyquot::funcfield::{
    find_irreducible, image_bound_ratios, image_kernel_stats, kernel_dimension, parse_digit_lists, FieldRing,
    FiniteField, PolyFq,
};
use polyquot::quotient::{batch_quotients, poly_quotient};
use polyquot::spectrum::{
    cyclotomic_classes, fixed_points, interpolation_count, lambda_p, prime_quotient_histogram, smallest_nonzero,
    value_profile, PolyOverFp,
};
use polyquot::verifier::{parse_prime_list, run_bound_sweep, run_suite, Exact, Grid, SweepGrid, SweepReport, SUITES};
use polyquot::waring::{representation_counts, waring_number, WaringNumber};
use polyquot::{Error, Exec, PrimeContext};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SUITE_FAILURE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

/// Largest integer emitted as a JSON number; larger ones become strings.
const MAX_SAFE_INTEGER: u64 = (1 << 53) - 1;

#[derive(Debug, Parser)]
#[command(name = "polyquot", version, about = "Polynomial quotients modulo p^2")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,

    /// Write output to PATH instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Pw {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    w: u64,
}

#[derive(Debug, Args)]
struct Pwn {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    w: u64,
    #[arg(long)]
    n: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// A single value q_{p,w}(u).
    Eval {
        #[command(flatten)]
        pw: Pw,
        #[arg(long)]
        u: u64,
    },
    /// q_{p,w}(u) for u in [0, N).
    Batch(Pwn),
    /// Value set and its size V(w, N, p).
    Valueset(Pwn),
    /// Number of u in [0, N) with q_{p,w}(u) = f(u).
    Interp {
        #[command(flatten)]
        pwn: Pwn,
        /// Ascending coefficients, e.g. `0,1` for f(x) = x.
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
    },
    /// Number of fixed points in [0, N).
    Fixed(Pwn),
    /// Waring number g(w, N, p) and the sumset trajectory.
    Waring(Pwn),
    /// Representation counts N_s(y) for every residue y.
    Repcount {
        #[command(flatten)]
        pwn: Pwn,
        #[arg(long)]
        s: u64,
    },
    /// Additive character sums |S(a)|.
    Charsum {
        #[command(flatten)]
        pwn: Pwn,
        /// Only this character.
        #[arg(long)]
        a: Option<u64>,
    },
    /// Cyclotomic classes of order d.
    Classes {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        d: u64,
    },
    /// Smallest u with q_{p,w}(u) != 0.
    Ell(Pw),
    /// Smallest L such that every residue is a Fermat quotient of some u <= L.
    Lambda {
        #[arg(long)]
        p: u64,
    },
    /// Fermat quotients of primes below N.
    Primehist {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: u64,
    },
    /// Quotients in F_q[X]/(P), q = p^r.
    Ff {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Ascending F_p coefficients of the conductor (r > 1).
        #[arg(long)]
        conductor: Option<String>,
        /// P in wire format; defaults to the smallest irreducible of degree N.
        #[arg(long, allow_hyphen_values = true)]
        modulus: Option<String>,
        /// Degree of P when --modulus is absent.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1)]
        w: u64,
        /// A single residue A in wire format; without it, image statistics.
        #[arg(long, allow_hyphen_values = true)]
        poly: Option<String>,
    },
    /// Identity suites; exit 1 if any counterexample is found.
    Verify {
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Primes, e.g. `3..31,101`; defaults to the built-in grid.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Bound sweep report for theorem 1..6.
    Sweep {
        #[arg(long)]
        theorem: u8,
        /// Primes, e.g. `101,257,509`.
        #[arg(long)]
        grid: Option<String>,
        /// Comma-separated exponents.
        #[arg(long)]
        w: Option<String>,
        /// Comma-separated interval lengths.
        #[arg(long)]
        n: Option<String>,
        /// Polynomial family for theorem 1; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        poly: Vec<String>,
    },
}

/// Failure of a subcommand, with any output that should still be written.
struct Failure {
    code: i32,
    message: String,
    partial: Option<Value>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::NotInvertible { .. } => EXIT_INVALID,
            Error::LimitExceeded(_) => EXIT_LIMIT,
            Error::Internal(_) => EXIT_SUITE_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
            partial: None,
        }
    }
}

type CmdResult = Result<Outcome, Failure>;

struct Outcome {
    value: Value,
    code: i32,
    /// Diagnostic lines for the error stream.
    notes: Vec<String>,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Outcome {
            value,
            code: EXIT_OK,
            notes: Vec::new(),
        }
    }
}

fn int(v: u64) -> Value {
    if v > MAX_SAFE_INTEGER {
        Value::String(v.to_string())
    } else {
        Value::from(v)
    }
}

fn big(v: &BigUint) -> Value {
    match u64::try_from(v) {
        Ok(small) => int(small),
        Err(_) => Value::String(v.to_string()),
    }
}

fn ints(vs: impl IntoIterator<Item = u64>) -> Value {
    Value::Array(vs.into_iter().map(int).collect())
}

fn opt_int(v: Option<u64>) -> Value {
    v.map_or(Value::Null, int)
}

/// Rounds to 9 decimal places.
fn real(x: f64) -> Value {
    let r = (x * 1e9).round() / 1e9;
    serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number)
}

fn opt_real(x: Option<f64>) -> Value {
    x.map_or(Value::Null, real)
}

fn ctx(p: u64) -> Result<PrimeContext, Error> {
    PrimeContext::new(p)
}

fn waring_value(g: WaringNumber) -> Value {
    match g {
        WaringNumber::Finite(g) => int(g),
        WaringNumber::Infinite => Value::String("infinite".into()),
    }
}

fn exact_value(e: Exact) -> Value {
    match e {
        Exact::Int(v) => int(v),
        Exact::Real(v) => real(v),
        Exact::Infinite => Value::String("infinite".into()),
    }
}

fn parse_u64_list(text: &str, what: &str) -> Result<Vec<u64>, Error> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad {what} {s:?}")))
        })
        .collect()
}

fn parse_i64_list(text: &str) -> Result<Vec<i64>, Error> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("bad coefficient {s:?}")))
        })
        .collect()
}

fn execute(command: Command) -> CmdResult {
    match command {
        Command::Eval { pw, u } => {
            let c = ctx(pw.p)?;
            if pw.w == 0 {
                return Err(Error::InvalidArgument("w must be positive".into()).into());
            }
            let q = poly_quotient(&c, pw.w, u % c.p_sq());
            Ok(Outcome::ok(
                json!({"p": int(pw.p), "w": int(pw.w), "u": int(u), "q": int(q)}),
            ))
        }
        Command::Batch(a) => {
            let values = batch_quotients(&ctx(a.p)?, a.w, a.n)?;
            Ok(Outcome::ok(
                json!({"p": int(a.p), "w": int(a.w), "n": int(a.n), "values": ints(values)}),
            ))
        }
        Command::Valueset(a) => {
            let prof = value_profile(&ctx(a.p)?, a.w, a.n)?;
            Ok(Outcome::ok(json!({
                "p": int(a.p), "w": int(a.w), "n": int(a.n),
                "v": int(prof.v),
                "max_multiplicity": int(prof.max_multiplicity()),
                "values": ints(prof.values()),
            })))
        }
        Command::Interp { pwn: a, poly } => {
            let f = PolyOverFp::parse(a.p, &poly)?;
            let count = interpolation_count(&ctx(a.p)?, a.w, a.n, &f)?;
            Ok(Outcome::ok(json!({
                "p": int(a.p), "w": int(a.w), "n": int(a.n),
                "poly": ints(f.coeffs().iter().copied()),
                "count": int(count),
            })))
        }
        Command::Fixed(a) => {
            let count = fixed_points(&ctx(a.p)?, a.w, a.n)?;
            Ok(Outcome::ok(
                json!({"p": int(a.p), "w": int(a.w), "n": int(a.n), "count": int(count)}),
            ))
        }
        Command::Waring(a) => {
            let t = waring_number(&ctx(a.p)?, a.w, a.n)?;
            Ok(Outcome::ok(json!({
                "g": waring_value(t.g),
                "p": int(a.p), "w": int(a.w), "n": int(a.n),
                "sizes": ints(t.sizes),
                "ell": opt_int(t.ell),
            })))
        }
        Command::Repcount { pwn: a, s } => {
            let r = representation_counts(&ctx(a.p)?, a.w, a.n, s)?;
            Ok(Outcome::ok(json!({
                "p": int(a.p), "w": int(a.w), "n": int(a.n), "s": int(s),
                "covers_all": r.covers_all(),
                "total": big(&r.total()),
                "counts": Value::Array(r.counts.iter().map(big).collect()),
            })))
        }
        Command::Charsum { pwn: a, a: None } => {
            let prof = character_sum_profile(&ctx(a.p)?, a.w, a.n)?;
            Ok(Outcome::ok(json!({
                "p": int(a.p), "w": int(a.w), "n": int(a.n),
                "max_nontrivial": real(prof.max_nontrivial),
                "argmax": int(prof.argmax),
                "magnitudes": Value::Array(prof.magnitudes.iter().map(|&m| real(m)).collect()),
            })))
        }
        Command::Charsum { pwn: a, a: Some(ch) } => {
            let c = ctx(a.p)?;
            let magnitude = if ch % a.p == 0 {
                // the trivial character sums to N exactly
                value_profile(&c, a.w, a.n)?.n as f64
            } else {
                let (re, im) = character_sum(&c, a.w, a.n, ch)?;
                re.hypot(im)
            };
            Ok(Outcome::ok(json!({
                "p": int(a.p), "w": int(a.w), "n": int(a.n), "a": int(ch),
                "magnitude": real(magnitude),
            })))
        }
        Command::Classes { p, d } => {
            let classes = cyclotomic_classes(&ctx(p)?, d)?;
            Ok(Outcome::ok(json!({
                "p": int(p), "d": int(d),
                "classes": Value::Array(classes.into_iter().map(ints).collect()),
            })))
        }
        Command::Ell(a) => {
            let c = ctx(a.p)?;
            if a.w == 0 {
                return Err(Error::InvalidArgument("w must be positive".into()).into());
            }
            Ok(Outcome::ok(
                json!({"p": int(a.p), "w": int(a.w), "ell": opt_int(smallest_nonzero(&c, a.w))}),
            ))
        }
        Command::Lambda { p } => {
            let lambda = lambda_p(&ctx(p)?)?;
            Ok(Outcome::ok(json!({"p": int(p), "lambda": opt_int(lambda)})))
        }
        Command::Primehist { p, n } => {
            let h = prime_quotient_histogram(&ctx(p)?, n)?;
            Ok(Outcome::ok(json!({
                "p": int(p), "n": int(n),
                "pi": int(h.pi),
                "sum_of_squares": int(h.sum_of_squares()),
                "collision_bound": int(h.collision_bound()),
                "q": ints(h.q),
            })))
        }
        Command::Ff {
            p,
            r,
            conductor,
            modulus,
            n,
            w,
            poly,
        } => funcfield(p, r, conductor.as_deref(), modulus.as_deref(), n, w, poly.as_deref()),
        Command::Verify { suite, grid } => verify(&suite, grid.as_deref()),
        Command::Sweep {
            theorem,
            grid,
            w,
            n,
            poly,
        } => sweep(theorem, grid.as_deref(), w.as_deref(), n.as_deref(), &poly),
    }
}

fn funcfield(
    p: u64,
    r: usize,
    conductor: Option<&str>,
    modulus: Option<&str>,
    n: Option<usize>,
    w: u64,
    poly: Option<&str>,
) -> CmdResult {
    if w == 0 {
        return Err(Error::InvalidArgument("w must be positive".into()).into());
    }
    let field = match (r, conductor) {
        (0, _) => return Err(Error::InvalidArgument("r must be positive".into()).into()),
        (1, None) => FiniteField::prime(p)?,
        (_, None) => FiniteField::smallest(p, r)?,
        (_, Some(text)) => {
            let c = parse_u64_list(text, "conductor coefficient")?;
            let field = FiniteField::with_conductor(p, &c)?;
            if field.r() != r {
                return Err(Error::InvalidArgument(format!("conductor has degree {}, expected {r}", field.r())).into());
            }
            field
        }
    };
    let modulus = match (modulus, n) {
        (Some(text), _) => PolyFq::from_digit_lists(&field, &parse_digit_lists(text, p)?),
        (None, Some(n)) => find_irreducible(&field, n)?,
        (None, None) => return Err(Error::InvalidArgument("give --modulus or --n".into()).into()),
    };
    let ring = FieldRing::new(field, modulus)?;
    let f = ring.field();
    let mut out = Map::new();
    out.insert("p".into(), int(p));
    out.insert("r".into(), int(r as u64));
    out.insert("q".into(), int(f.q()));
    out.insert("n".into(), int(ring.n() as u64));
    let conductor = f.conductor().map_or(Value::Null, |c| ints(c.iter().copied()));
    out.insert("conductor".into(), conductor);
    out.insert("modulus".into(), Value::String(ring.modulus().display(f).to_string()));
    out.insert("w".into(), int(w));
    match poly {
        Some(text) => {
            let a = ring.reduce(&PolyFq::from_digit_lists(f, &parse_digit_lists(text, p)?));
            let result = ring.quotient(&a, w)?;
            out.insert("a".into(), Value::String(a.display(f).to_string()));
            out.insert("value".into(), Value::String(result.value.display(f).to_string()));
            out.insert("zero_map".into(), Value::Bool(result.zero_map));
        }
        None => {
            let stats = image_kernel_stats(&ring, w)?;
            out.insert("domain_size".into(), int(stats.domain_size));
            out.insert("image_size".into(), int(stats.image_size));
            out.insert("zero_fiber_size".into(), int(stats.zero_fiber_size));
            out.insert("kernel_dimension".into(), int(kernel_dimension(&ring)));
            out.insert("relation_ok".into(), Value::Bool(stats.relation_ok));
            out.insert("companion_ok".into(), Value::Bool(stats.companion_ok));
            let ratios = image_bound_ratios(&ring, w, stats.image_size);
            out.insert(
                "bound_ratios".into(),
                Value::Array(ratios.iter().map(|&x| real(x)).collect()),
            );
        }
    }
    Ok(Outcome::ok(Value::Object(out)))
}

fn verify(suite: &str, grid: Option<&str>) -> CmdResult {
    let grid = match grid {
        Some(text) => Grid::parse(text)?,
        None => Grid::default(),
    };
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut rows = Vec::new();
    let mut failed = false;
    for name in names {
        let outcome = run_suite(name, &grid, Exec::default())?;
        failed |= !outcome.passed();
        rows.push(json!({
            "suite": outcome.name,
            "passed": outcome.passed(),
            "checks": int(outcome.checks),
            "witness": outcome.witness.map_or(Value::Null, Value::String),
        }));
    }
    let mut out = Outcome::ok(Value::Array(rows));
    if failed {
        out.code = EXIT_SUITE_FAILURE;
        out.notes.push("counterexample found".into());
    }
    Ok(out)
}

fn sweep(theorem: u8, grid: Option<&str>, w: Option<&str>, n: Option<&str>, polys: &[String]) -> CmdResult {
    let mut g = SweepGrid::default();
    if let Some(text) = grid {
        g.primes = parse_prime_list(text)?;
    }
    if let Some(text) = w {
        g.exponents = Some(parse_u64_list(text, "exponent")?);
    }
    if let Some(text) = n {
        g.lengths = Some(parse_u64_list(text, "length")?);
    }
    if !polys.is_empty() {
        g.polys = polys.iter().map(|t| parse_i64_list(t)).collect::<Result<_, _>>()?;
    }
    match run_bound_sweep(theorem, &g) {
        Ok(report) => {
            let mut out = Outcome::ok(report_value(&report));
            out.notes.push(report_meta(&report));
            let broken = report.chain_failures().count();
            if broken > 0 {
                out.code = EXIT_SUITE_FAILURE;
                out.notes.push(format!("{broken} constant-free chain rows violated"));
            }
            Ok(out)
        }
        Err(failure) => {
            let mut f = Failure::from(failure.error);
            f.message = format!("{}\n{}", report_meta(&failure.partial), f.message);
            if !failure.partial.rows.is_empty() {
                f.partial = Some(report_value(&failure.partial));
            }
            Err(f)
        }
    }
}

fn report_meta(report: &SweepReport) -> String {
    format!(
        "# theorem={} grid={} timestamp={}",
        report.meta.theorem, report.meta.grid, report.meta.timestamp
    )
}

fn report_value(report: &SweepReport) -> Value {
    Value::Array(
        report
            .rows
            .iter()
            .map(|r| {
                json!({
                    "theorem": r.theorem,
                    "p": int(r.p),
                    "w": int(r.w),
                    "N": int(r.n),
                    "stat": r.stat,
                    "exact": exact_value(r.exact),
                    "bound": opt_real(r.bound),
                    "ratio": opt_real(r.ratio),
                    "flag": r.flag.as_str(),
                })
            })
            .collect(),
    )
}

/// Canonical compact JSON followed by a newline.
pub fn to_json(value: &Value) -> String {
    let mut s = serde_json::to_string(value).expect("JSON values serialize");
    s.push('\n');
    s
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

/// CSV with a header row taken from the first record's keys.
pub fn to_csv(value: &Value) -> io::Result<String> {
    let records: Vec<&Map<String, Value>> = match value {
        Value::Object(m) => vec![m],
        Value::Array(items) => items.iter().filter_map(Value::as_object).collect(),
        _ => Vec::new(),
    };
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    if let Some(first) = records.first() {
        writer.write_record(first.keys())?;
        for rec in &records {
            writer.write_record(first.keys().map(|k| rec.get(k).map(cell).unwrap_or_default()))?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(io::Error::other)
}

fn render(value: &Value, format: Format) -> io::Result<String> {
    match format {
        Format::Json => Ok(to_json(value)),
        Format::Csv => to_csv(value),
    }
}

fn emit(text: &str, out: Option<&PathBuf>, stdout: &mut dyn Write) -> io::Result<()> {
    match out {
        Some(path) => File::create(path)?.write_all(text.as_bytes()),
        None => stdout.write_all(text.as_bytes()),
    }
}

/// Runs one invocation; `args` includes the program name. Returns the exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let (value, code, notes) = match execute(cli.command) {
        Ok(o) => (Some(o.value), o.code, o.notes),
        Err(f) => (f.partial, f.code, vec![format!("error: {}", f.message)]),
    };
    for note in notes {
        let _ = writeln!(stderr, "{note}");
    }
    if let Some(value) = value {
        let written = render(&value, cli.format).and_then(|text| emit(&text, cli.out.as_ref(), stdout));
        if let Err(e) = written {
            let _ = writeln!(stderr, "error: cannot write output: {e}");
            return EXIT_INVALID;
        }
    }
    code
}
