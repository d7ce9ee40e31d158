use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::{Float, Rational};
use serde_json::json;

use gcdsum::error_terms::identities::{identity_sides, Inner, LemmaIdentity};
use gcdsum::error_terms::{
    convolved_partial_sums, mobius_partial_sums, ratio_summatory, Coefficients, PartialValue, RatioFunction, Weight,
};
use gcdsum::arith::{PrimeSieve, INTEGER_TABLE_CEILING};
use gcdsum::exact::{m_r_identity, m_r_naive, EvalPoint, GcdFunction, GcdTables};
use gcdsum::expansions::{log_grid, render_float, to_json, write_csv, Expansion, ExpansionReport};
use gcdsum::precision::{floor_u64, parse_rational};
use gcdsum::regression::{Check, RegressionFile, REGRESSION_ENV};
use gcdsum::zeros::{floor_offset, jsum_report, load_zeros_threaded, theorem13_parts};
use gcdsum::{Error, PrecisionContext};

const EXIT_USAGE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_CONTRACT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "gcdsum", version, about = "Gcd-sum averages, their expansions and error terms")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Working precision in decimal digits
    #[arg(long, global = true, default_value_t = PrecisionContext::DEFAULT_DIGITS)]
    precision: u32,
    /// Constant C in delta(x) = exp(-C (log x)^(3/5) (log log x)^(-1/5))
    #[arg(long, global = true, default_value_t = 1.0)]
    delta_c: f64,
    /// Table limit; defaults to what the arguments need
    #[arg(long, global = true)]
    limit: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, env = REGRESSION_ENV)]
    regression_file: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Method {
    Naive,
    Identity,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Which {
    #[value(name = "20")]
    Totient,
    #[value(name = "21")]
    Mobius,
    #[value(name = "201")]
    Dedekind,
    #[value(name = "211")]
    MuMu,
    #[value(name = "211s")]
    MuAbsMu,
    #[value(name = "22")]
    IdentityTotient,
    #[value(name = "23")]
    IdentityMuTotient,
    #[value(name = "23q")]
    IdentityMuDedekind,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact value of M_r(x; f)
    Exact {
        #[arg(long)]
        x: String,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value = "id")]
        f: String,
        #[arg(long, value_enum, default_value_t = Method::Identity)]
        method: Method,
    },
    /// Residuals against the theorem side over a log-spaced grid
    Scan {
        #[arg(long, default_value = "id")]
        f: String,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long)]
        xmin: f64,
        #[arg(long)]
        xmax: f64,
        #[arg(long, default_value_t = 10)]
        points: u32,
        /// Move every grid point to [x] + 1/2
        #[arg(long)]
        half_integers: bool,
        /// Compare max |gap|/log x with this frozen regression key
        #[arg(long)]
        regression_key: Option<String>,
    },
    /// Convolution identities and summatory lemmas
    Lemmas {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        x: String,
    },
    /// Zero-sum form of K_r against the residual
    Zeros {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Recompute zeta'(rho) even when the file lists it
        #[arg(long)]
        recompute: bool,
    },
    /// J_-lambda(T) over a grid of T
    Jsum {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// `start:end:count` or a comma-separated list
        #[arg(long)]
        tgrid: String,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            message: e.to_string(),
        }
    }
}

fn contract(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONTRACT,
        message: message.into(),
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        message: message.into(),
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome<()> {
    let g = &cli.global;
    if g.threads == 0 {
        return Err(invalid("--threads must be at least 1"));
    }
    if g.limit == Some(0) {
        return Err(Error::InvalidLimit.into());
    }
    let ctx = PrecisionContext::new(g.precision)?;
    let mut sink = Sink::open(g.out.as_ref())?;
    match &cli.command {
        Command::Exact { x, r, f, method } => exact(g, x, *r, f, *method, &mut sink),
        Command::Scan {
            f,
            r,
            xmin,
            xmax,
            points,
            half_integers,
            regression_key,
        } => scan(g, &ctx, f, *r, (*xmin, *xmax, *points, *half_integers), regression_key.as_deref(), &mut sink),
        Command::Lemmas { which, x } => lemmas(g, &ctx, *which, x, &mut sink),
        Command::Zeros { file, x, r, recompute } => zeros(g, &ctx, file, x, *r, *recompute, &mut sink),
        Command::Jsum { file, lambda, tgrid } => jsum(g, &ctx, file, *lambda, tgrid, &mut sink),
    }?;
    sink.finish()
}

struct Sink {
    out: Box<dyn Write>,
    path: Option<PathBuf>,
}

impl Sink {
    fn open(path: Option<&PathBuf>) -> Outcome<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| invalid(format!("cannot write {}: {e}", p.display())))?,
            )),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Self {
            out,
            path: path.cloned(),
        })
    }

    fn line(&mut self, text: impl AsRef<str>) -> Outcome<()> {
        writeln!(self.out, "{}", text.as_ref()).map_err(|e| self.io(e))
    }

    fn json(&mut self, value: &serde_json::Value) -> Outcome<()> {
        let text = serde_json::to_string_pretty(value).expect("json renders");
        self.line(text)
    }

    fn io(&self, e: io::Error) -> Failure {
        let target = self.path.as_ref().map_or("stdout".to_string(), |p| p.display().to_string());
        invalid(format!("writing {target}: {e}"))
    }

    fn finish(mut self) -> Outcome<()> {
        self.out.flush().map_err(|e| self.io(e))
    }
}

fn parse_x(text: &str) -> Outcome<Rational> {
    Ok(parse_rational(text)?)
}

fn parse_f(text: &str) -> Outcome<GcdFunction> {
    Ok(text.parse::<GcdFunction>()?)
}

fn table_limit(g: &Global, needed: u64) -> Outcome<usize> {
    let limit = g.limit.unwrap_or(needed.max(1) as usize);
    if (limit as u64) < needed {
        return Err(Error::TableTooSmall {
            value: needed.to_string(),
            needed: needed as usize,
            limit,
        }
        .into());
    }
    if limit > INTEGER_TABLE_CEILING {
        return Err(Error::LimitTooLarge {
            requested: limit,
            ceiling: INTEGER_TABLE_CEILING,
        }
        .into());
    }
    Ok(limit)
}

fn exact(g: &Global, x: &str, r: u32, f: &str, method: Method, sink: &mut Sink) -> Outcome<()> {
    let point = EvalPoint::new(parse_x(x)?, r, parse_f(f)?)?;
    let tables = GcdTables::new(point.f(), table_limit(g, point.floor())?)?;
    let naive = matches!(method, Method::Naive | Method::Both)
        .then(|| m_r_naive(&point, &tables))
        .transpose()?;
    let ident = matches!(method, Method::Identity | Method::Both)
        .then(|| m_r_identity(&point, &tables))
        .transpose()?;
    let verdict = match (&naive, &ident) {
        (Some(a), Some(b)) => Some(if a == b { "EQUAL" } else { "DIFFERENT" }),
        _ => None,
    };
    match g.format {
        Format::Json => sink.json(&json!({
            "x": point.x().to_string(),
            "r": r,
            "f": point.f().name(),
            "naive": naive.as_ref().map(Rational::to_string),
            "identity": ident.as_ref().map(Rational::to_string),
            "verdict": verdict,
        }))?,
        Format::Csv => {
            let values: Vec<String> = [&naive, &ident].into_iter().flatten().map(Rational::to_string).collect();
            let mut text = values.join(", ");
            if let Some(v) = verdict {
                text.push_str(&format!(", {v}"));
            }
            sink.line(text)?;
        }
    }
    if verdict == Some("DIFFERENT") {
        return Err(contract("naive and identity values differ"));
    }
    Ok(())
}

fn scan(
    g: &Global,
    ctx: &PrecisionContext,
    f: &str,
    r: u32,
    (xmin, xmax, points, half): (f64, f64, u32, bool),
    key: Option<&str>,
    sink: &mut Sink,
) -> Outcome<()> {
    let f = parse_f(f)?;
    if r == 0 {
        return Err(invalid("r must be a positive integer"));
    }
    let grid = log_grid(xmin, xmax, points, half)?;
    let needed = grid.iter().map(floor_u64).collect::<Result<Vec<_>, _>>()?;
    let limit = table_limit(g, needed.into_iter().max().unwrap_or(1))?;
    let e = Expansion::new(f, limit, ctx)?.with_delta_c(g.delta_c);
    let rows = e.scan(&grid, r, g.threads)?;
    match g.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).expect("in-memory write");
            sink.line(String::from_utf8(buf).expect("ascii").trim_end())?;
        }
        Format::Json => sink.json(&to_json(&rows))?,
    }
    if let Some(key) = key {
        let worst = max_gap_over_log(&rows);
        let reg = regression(g);
        let outcome = reg.check(key, worst, Check::AtMost { slack: 1e-6 })?;
        eprintln!("{key}: {outcome}");
        if !outcome.passed() {
            return Err(contract(format!("{key}: {outcome}")));
        }
    }
    Ok(())
}

fn max_gap_over_log(rows: &[ExpansionReport]) -> f64 {
    rows.iter()
        .map(|r| (r.gap.to_f64() / r.log_x.to_f64()).abs())
        .fold(0f64, f64::max)
}

fn regression(g: &Global) -> RegressionFile {
    match &g.regression_file {
        Some(p) => RegressionFile::new(p.clone()),
        None => RegressionFile::from_env(),
    }
}

fn lemmas(g: &Global, ctx: &PrecisionContext, which: Which, x: &str, sink: &mut Sink) -> Outcome<()> {
    let x = parse_x(x)?;
    let n = floor_u64(&x)?;
    let digits = ctx.digits() as usize;
    let identity = match which {
        Which::IdentityTotient => Some(LemmaIdentity::Totient),
        Which::IdentityMuTotient => Some(LemmaIdentity::MuTotient),
        Which::IdentityMuDedekind => Some(LemmaIdentity::MuDedekind),
        _ => None,
    };
    if let Some(lemma) = identity {
        table_limit(g, n)?;
        let mut all = true;
        let mut rows = Vec::new();
        for inner in [Inner::Tau, Inner::Sigma(1), Inner::Sigma(2)] {
            let s = identity_sides(lemma, inner, &x)?;
            let eq = s.all_equal();
            all &= eq;
            rows.push((inner, eq, s));
        }
        let verdict = if all { "EXACT-EQUAL" } else { "EXACT-MISMATCH" };
        match g.format {
            Format::Csv => {
                for (inner, eq, _) in &rows {
                    sink.line(format!("{lemma} {inner} x={x}: {}", if *eq { "EXACT-EQUAL" } else { "EXACT-MISMATCH" }))?;
                }
                sink.line(verdict)?;
            }
            Format::Json => sink.json(&json!({
                "lemma": lemma.name(),
                "x": x.to_string(),
                "checks": rows.iter().map(|(inner, eq, s)| json!({
                    "inner": inner.to_string(),
                    "equal": eq,
                    "value": s.left.to_string(),
                })).collect::<Vec<_>>(),
                "verdict": verdict,
                "digits": ctx.digits(),
            }))?,
        }
        if !all {
            return Err(contract(format!("{lemma}: identity sides differ")));
        }
        return Ok(());
    }
    let sieve = PrimeSieve::new(table_limit(g, n)?)?;
    // (name, value, reference, envelope/ratio columns)
    let mut rows: Vec<Vec<(String, String)>> = Vec::new();
    let show = |v: &Float| render_float(v, digits.min(30));
    match which {
        Which::Totient | Which::Dedekind => {
            let (kind, table) = if which == Which::Totient {
                (RatioFunction::Totient, sieve.totient())
            } else {
                (RatioFunction::Dedekind, sieve.dedekind())
            };
            let rep = ratio_summatory(kind, &table, &x, ctx)?;
            rows.push(vec![
                ("quantity".into(), format!("sum_{}(n)/n", if which == Which::Totient { "phi" } else { "psi" })),
                ("x".into(), x.to_string()),
                ("value".into(), show(&rep.sum)),
                ("main".into(), show(&rep.main)),
                ("residual".into(), show(&rep.residual)),
                ("envelope".into(), show(&rep.envelope)),
                ("ratio".into(), show(&rep.ratio)),
            ]);
        }
        Which::Mobius | Which::MuMu | Which::MuAbsMu => {
            let kind = match which {
                Which::Mobius => Coefficients::Mobius,
                Which::MuMu => Coefficients::MuMu,
                _ => Coefficients::MuAbsMu,
            };
            let table = kind.table(&sieve)?;
            for w in [Weight::Unit, Weight::Inverse, Weight::InverseSquare, Weight::LogInverseSquare] {
                let (value, limit) = if kind == Coefficients::Mobius {
                    (mobius_partial_sums(&table, &x, w, ctx)?, kind.limit(w, ctx)?)
                } else {
                    convolved_partial_sums(kind, &table, &x, w, ctx)?
                };
                let rendered = match &value {
                    PartialValue::Exact(q) if q.denom().significant_bits() <= 64 => q.to_string(),
                    other => show(&other.to_float(ctx)),
                };
                let (lim, diff) = match &limit {
                    Some(l) => (show(l), show(&Float::with_val(ctx.bits(), value.to_float(ctx) - l))),
                    None => ("-".into(), "-".into()),
                };
                rows.push(vec![
                    ("quantity".into(), format!("{}:{}", kind.name(), w.name())),
                    ("x".into(), x.to_string()),
                    ("value".into(), rendered),
                    ("limit".into(), lim),
                    ("difference".into(), diff),
                ]);
            }
        }
        _ => unreachable!("identities handled above"),
    }
    emit_rows(g, ctx, &rows, sink)
}

fn emit_rows(g: &Global, ctx: &PrecisionContext, rows: &[Vec<(String, String)>], sink: &mut Sink) -> Outcome<()> {
    match g.format {
        Format::Csv => {
            if let Some(first) = rows.first() {
                let mut header: Vec<&str> = first.iter().map(|(k, _)| k.as_str()).collect();
                header.push("digits");
                sink.line(header.join(","))?;
            }
            for row in rows {
                let mut cells: Vec<String> = row.iter().map(|(_, v)| v.clone()).collect();
                cells.push(ctx.digits().to_string());
                sink.line(cells.join(","))?;
            }
            Ok(())
        }
        Format::Json => {
            let list: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let mut m = serde_json::Map::new();
                    for (k, v) in row {
                        m.insert(k.clone(), json!(v));
                    }
                    m.insert("digits".into(), json!(ctx.digits()));
                    serde_json::Value::Object(m)
                })
                .collect();
            sink.json(&serde_json::Value::Array(list))
        }
    }
}

fn zeros(g: &Global, ctx: &PrecisionContext, file: &Path, x: &str, r: u32, recompute: bool, sink: &mut Sink) -> Outcome<()> {
    let x = parse_x(x)?;
    let table = load_zeros_threaded(file, recompute, g.threads, ctx)?;
    let e = Expansion::new(GcdFunction::Id, table_limit(g, floor_u64(&x)?)?, ctx)?;
    let parts = theorem13_parts(&x, r, &table, &e)?;
    let residual = e.residual(&x, r)?;
    let offset = floor_offset(&x, ctx)?;
    let corrected = Float::with_val(ctx.bits(), &parts.value + &offset);
    let d = ctx.digits() as usize;
    let show = |v: &Float| render_float(v, d.min(30));
    let row = vec![
        ("x".to_string(), x.to_string()),
        ("r".into(), r.to_string()),
        ("zeros".into(), parts.zeros_used.to_string()),
        ("t_max".into(), show(&table.t_max())),
        ("theorem13_k".into(), show(&parts.value)),
        ("theorem_side".into(), show(&parts.theorem_side)),
        ("zero_terms".into(), show(&parts.zero_terms)),
        ("floor_offset".into(), show(&offset)),
        ("residual".into(), show(&residual)),
        ("difference".into(), show(&Float::with_val(ctx.bits(), &parts.value - &residual))),
        ("difference_with_offset".into(), show(&Float::with_val(ctx.bits(), &corrected - &residual))),
        ("imaginary_residue".into(), show(&parts.imaginary_residue)),
    ];
    if table.is_empty() {
        eprintln!("note: empty zero table; the zero terms are absent");
    }
    emit_rows(g, ctx, &[row], sink)
}

fn parse_tgrid(text: &str) -> Outcome<Vec<f64>> {
    let bad = || invalid(format!("bad --tgrid `{text}`: use start:end:count or a comma list"));
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, n] => {
            let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            match n {
                0 => return Err(bad()),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        [list] => list
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Outcome<Vec<_>>>()?,
        _ => return Err(bad()),
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}

fn jsum(g: &Global, ctx: &PrecisionContext, file: &Path, lambda: f64, tgrid: &str, sink: &mut Sink) -> Outcome<()> {
    let grid = parse_tgrid(tgrid)?;
    let table = load_zeros_threaded(file, false, g.threads, ctx)?;
    let rows = jsum_report(&grid, lambda, &table)?;
    let d = ctx.digits() as usize;
    let show = |v: &Float| if v.is_zero() { "0".to_string() } else { render_float(v, d.min(30)) };
    let out: Vec<Vec<(String, String)>> = rows
        .iter()
        .map(|row| {
            vec![
                ("T".to_string(), row.t.to_string()),
                ("lambda".into(), lambda.to_string()),
                ("N".into(), row.count.to_string()),
                ("J".into(), show(&row.j)),
                ("scale".into(), show(&row.scale)),
                ("ratio".into(), show(&row.ratio)),
            ]
        })
        .collect();
    emit_rows(g, ctx, &out, sink)
}
