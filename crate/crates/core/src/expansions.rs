//! Main terms, residuals and theorem-side expressions for `M_r(x; f)`.
//!
//! For `f = id, phi, psi` the main part is
//! `A x log x + B x + A (2 gamma - 1 - kappa + C_odd(r)) x` with
//!
//! | f   | A                   | B                  | kappa             |
//! |-----|---------------------|--------------------|-------------------|
//! | id  | 1/((r+1) zeta(2))   | 1/2                | zeta'(2)/zeta(2)  |
//! | phi | 1/((r+1) zeta(2)^2) | 1/(2 zeta(2))      | 2 zeta'(2)/zeta(2)|
//! | psi | 1/((r+1) zeta(4))   | zeta(2)/(2 zeta(4))| 2 zeta'(4)/zeta(4)|
//!
//! The residual is the exact value minus the main part (`K_r`, `L_r`, `U_r`).
//! The theorem side is `1/(r+1) sum c(d)/d (Delta(x/d) + sum_m C(r+1,2m)
//! B_2m Delta_-2m(x/d))` with `c = mu, mu*mu, mu*|mu|`, and for `psi` the
//! extra `-log x / (4 zeta(2))`.

use std::collections::HashMap;
use std::io::{self, Write};
use std::sync::{Mutex, OnceLock};

use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};
use serde::Serialize;

use crate::arith::{IntTable, PrimeSieve};
use crate::error::{Error, Result};
use crate::error_terms::{lcm_upto, tau_summatory, Coefficients, DivisorSums, WeightedSums};
use crate::error_terms::identities::ScaledSigma;
use crate::exact::{m_r_identity, EvalPoint, GcdFunction, GcdTables};
use crate::precision::{floor_u64, PrecisionContext};
use crate::special::{bernoulli_block, delta_envelope, euler_gamma, zeta_at_integer};
use crate::error_terms::loglog_envelope;

/// Up to this `floor(x)` the report's exact column is a rational.
pub const EXACT_REPORT_CEILING: u64 = 3_000;

fn bernoulli_sum(r: u32, shift: u32, ctx: &PrecisionContext) -> Result<Float> {
    let mut acc = Float::new(ctx.bits());
    for (m, w) in bernoulli_block(r) {
        let (z, _) = zeta_at_integer(2 * m + shift, ctx)?;
        acc += z * ctx.rational(&w);
    }
    Ok(acc)
}

/// `sum_{m <= [r/2]} C(r+1, 2m) B_2m zeta(2m+1)`
pub fn c_odd(r: u32, ctx: &PrecisionContext) -> Result<Float> {
    bernoulli_sum(r, 1, ctx)
}

/// `sum_{m <= [r/2]} C(r+1, 2m) B_2m zeta(2m)`
pub fn c_even(r: u32, ctx: &PrecisionContext) -> Result<Float> {
    bernoulli_sum(r, 0, ctx)
}

/// The theorem-side coefficients attached to `f`.
pub fn coefficients_for(f: GcdFunction) -> Coefficients {
    match f {
        GcdFunction::Id => Coefficients::Mobius,
        GcdFunction::Phi => Coefficients::MuMu,
        GcdFunction::Psi => Coefficients::MuAbsMu,
    }
}

/// `main = log_coeff * x log x + lin_coeff * x`.
#[derive(Debug, Clone)]
pub struct MainConstants {
    pub log_coeff: Float,
    pub lin_coeff: Float,
    /// The `x/2`-type part of `lin_coeff`, coming from `1/2 sum f(n)/n`.
    pub half_coeff: Float,
    /// `sum c(n)/n^2` over all `n`.
    pub c_limit: Float,
    /// `sum c(n) log n/n^2` over all `n`.
    pub c_log_limit: Float,
}

/// Main-term constants for `(f, r)`, cached per precision.
pub fn main_constants(f: GcdFunction, r: u32, ctx: &PrecisionContext) -> Result<MainConstants> {
    static MEMO: OnceLock<Mutex<HashMap<(GcdFunction, u32, u32), MainConstants>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (f, r, ctx.bits());
    if let Some(v) = memo.lock().expect("memo poisoned").get(&key) {
        return Ok(v.clone());
    }
    if r == 0 {
        return Err(Error::InvalidArgument("r must be a positive integer".into()));
    }
    let bits = ctx.bits();
    let (z2, dz2) = zeta_at_integer(2, ctx)?;
    let (z4, dz4) = zeta_at_integer(4, ctx)?;
    let (c_limit, kappa, half_coeff) = match f {
        GcdFunction::Id => (z2.clone().recip(), Float::with_val(bits, &dz2 / &z2), ctx.float(0.5)),
        GcdFunction::Phi => (
            z2.clone().square().recip(),
            Float::with_val(bits, &dz2 / &z2) * 2u32,
            Float::with_val(bits, z2.clone() * 2u32).recip(),
        ),
        GcdFunction::Psi => (
            z4.clone().recip(),
            Float::with_val(bits, &dz4 / &z4) * 2u32,
            Float::with_val(bits, &z2 / Float::with_val(bits, &z4 * 2u32)),
        ),
    };
    let c_log_limit = Float::with_val(bits, &c_limit * &kappa);
    let log_coeff = Float::with_val(bits, &c_limit / (r + 1));
    let block = euler_gamma(ctx) * 2u32 - 1u32 - kappa + c_odd(r, ctx)?;
    let lin_coeff = Float::with_val(bits, &half_coeff + block * &log_coeff);
    let v = MainConstants {
        log_coeff,
        lin_coeff,
        half_coeff,
        c_limit,
        c_log_limit,
    };
    memo.lock().expect("memo poisoned").insert(key, v.clone());
    Ok(v)
}

/// The displayed main part of `M_r(x; f)`; needs `x >= 2`.
pub fn main_term(f: GcdFunction, x: &Rational, r: u32, ctx: &PrecisionContext) -> Result<Float> {
    if *x < 2 {
        return Err(Error::InvalidArgument(format!("main terms need x >= 2, got {x}")));
    }
    let k = main_constants(f, r, ctx)?;
    let xf = ctx.rational(x);
    let lx = Float::with_val(ctx.bits(), xf.ln_ref());
    Ok(k.log_coeff * lx * &xf + k.lin_coeff * xf)
}

/// `M_r(x; id)` as `[x]/2 + 1/(r+1) sum mu(d)/d D(x/d)
/// + 1/(r+1) sum_m C(r+1,2m) B_2m sum mu(d)/d S_m(x/d)`, exactly.
pub fn m_r_id_divisor_form(x: &Rational, r: u32) -> Result<Rational> {
    let n = floor_u64(x)?;
    if n == 0 || r == 0 {
        return Err(Error::InvalidArgument("need x >= 1 and r >= 1".into()));
    }
    let mu = PrimeSieve::new(n as usize)?.mobius();
    let lcm = lcm_upto(n);
    // prefix[d] = lcm * sum_{d' <= d} mu(d')/d'
    let mut prefix = vec![Integer::new()];
    let mut acc = Integer::new();
    for d in 1..=n {
        let v = *mu.get(d as usize);
        if v != 0 {
            acc += Integer::from(lcm.div_exact_ref(&Integer::from(d))) * v;
        }
        prefix.push(acc.clone());
    }
    let grouped = |inner: &dyn Fn(u64) -> Integer| {
        let mut out = Integer::new();
        let mut d = 1u64;
        while d <= n {
            let q = n / d;
            let last = n / q;
            let block = Integer::from(&prefix[last as usize] - &prefix[d as usize - 1]);
            if block != 0 {
                out += block * inner(q);
            }
            d = last + 1;
        }
        out
    };
    let mut total = Rational::from((grouped(&|q| Integer::from(tau_summatory(q))), lcm.clone()));
    for (m, w) in bernoulli_block(r) {
        let s = ScaledSigma::new(m, n)?;
        let scaled = grouped(&|q| s.summatory_scaled(q));
        total += w * Rational::from((scaled, Integer::from(&lcm * s.scale())));
    }
    Ok(Rational::from((n, 2)) + total / (r + 1))
}

/// The exact column of a report.
#[derive(Debug, Clone, PartialEq)]
pub enum ExactValue {
    Rational(Rational),
    Float(Float),
}

impl ExactValue {
    pub fn to_float(&self, ctx: &PrecisionContext) -> Float {
        match self {
            ExactValue::Rational(q) => ctx.rational(q),
            ExactValue::Float(v) => Float::with_val(ctx.bits(), v),
        }
    }

    pub fn render(&self, digits: usize) -> String {
        match self {
            ExactValue::Rational(q) => q.to_string(),
            ExactValue::Float(v) => render_float(v, digits),
        }
    }
}

/// Scientific notation with `digits` significant digits.
pub fn render_float(v: &Float, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    format!("{:.*e}", digits.saturating_sub(1), v)
}

/// One row of a residual scan.
#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub x: Rational,
    pub r: u32,
    pub f: GcdFunction,
    pub exact: ExactValue,
    pub main: Float,
    pub residual: Float,
    pub theorem_side: Float,
    /// `residual - theorem_side`
    pub gap: Float,
    pub log_x: Float,
    /// `(log x)^(2/3) (log log x)^(1/3)`
    pub env_loglog: Float,
    /// `delta(x) log x`
    pub env_delta: Float,
    /// The Bernoulli block `1/(r+1) sum c(d)/d sum_m C B Delta_-2m(x/d)`
    /// contained in `theorem_side`.
    pub block: Float,
    pub digits: u32,
}

impl ExpansionReport {
    pub const COLUMNS: [&'static str; 12] = [
        "x",
        "r",
        "f",
        "exact",
        "main",
        "residual",
        "theorem_side",
        "gap",
        "log_x",
        "env_loglog",
        "env_delta",
        "digits",
    ];

    pub fn row(&self) -> Vec<String> {
        let d = (self.digits as usize).min(30);
        vec![
            self.x.to_string(),
            self.r.to_string(),
            self.f.name().to_string(),
            self.exact.render(d),
            render_float(&self.main, d),
            render_float(&self.residual, d),
            render_float(&self.theorem_side, d),
            render_float(&self.gap, d),
            render_float(&self.log_x, d),
            render_float(&self.env_loglog, d),
            render_float(&self.env_delta, d),
            self.digits.to_string(),
        ]
    }
}

pub fn write_csv<W: Write>(reports: &[ExpansionReport], mut out: W) -> io::Result<()> {
    writeln!(out, "{}", ExpansionReport::COLUMNS.join(","))?;
    for rep in reports {
        writeln!(out, "{}", rep.row().join(","))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonRow<'a> {
    x: &'a str,
    r: u32,
    f: &'a str,
    exact: &'a str,
    main: &'a str,
    residual: &'a str,
    theorem_side: &'a str,
    gap: &'a str,
    log_x: &'a str,
    env_loglog: &'a str,
    env_delta: &'a str,
    digits: u32,
}

/// One JSON object per row, keyed by the CSV column names.
pub fn to_json(reports: &[ExpansionReport]) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = reports
        .iter()
        .map(|rep| {
            let c = rep.row();
            serde_json::to_value(JsonRow {
                x: &c[0],
                r: rep.r,
                f: &c[2],
                exact: &c[3],
                main: &c[4],
                residual: &c[5],
                theorem_side: &c[6],
                gap: &c[7],
                log_x: &c[8],
                env_loglog: &c[9],
                env_delta: &c[10],
                digits: rep.digits,
            })
            .expect("rows serialize")
        })
        .collect();
    serde_json::Value::Array(rows)
}

/// Floating evaluation of the expansion's right side, split so every `r`
/// can reuse it.
#[derive(Debug, Clone)]
struct ExactParts {
    /// `sum_{n <= x} f(n)/n`
    half: Float,
    /// `sum_{d <= x} g(d)/d [x/d]`
    hyper0: Float,
    /// `sum_{d <= x} g(d)/d H_2m([x/d])`
    hyper: Vec<Float>,
}

/// Tables and cached state for one `f` up to a fixed limit.
#[derive(Debug, Clone)]
pub struct Expansion {
    f: GcdFunction,
    tables: GcdTables,
    coeffs: IntTable,
    engine: DivisorSums,
    ctx: PrecisionContext,
    delta_c: f64,
}

impl Expansion {
    pub fn new(f: GcdFunction, limit: usize, ctx: &PrecisionContext) -> Result<Self> {
        let sieve = PrimeSieve::new(limit)?;
        let tables = GcdTables::from_sieve(f, &sieve)?;
        let coeffs = coefficients_for(f).table(&sieve)?;
        let engine = DivisorSums::from_sieve(sieve, ctx)?;
        Ok(Self {
            f,
            tables,
            coeffs,
            engine,
            ctx: *ctx,
            delta_c: 1.0,
        })
    }

    /// Constant `C` in the `delta(x)` envelope.
    pub fn with_delta_c(mut self, c: f64) -> Self {
        self.delta_c = c;
        self
    }

    pub fn function(&self) -> GcdFunction {
        self.f
    }

    pub fn limit(&self) -> usize {
        self.tables.limit()
    }

    pub fn tables(&self) -> &GcdTables {
        &self.tables
    }

    pub fn coefficients(&self) -> &IntTable {
        &self.coeffs
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    fn check(&self, x: &Rational, r: u32) -> Result<u64> {
        if *x < 2 {
            return Err(Error::InvalidArgument(format!("expansions need x >= 2, got {x}")));
        }
        if r == 0 {
            return Err(Error::InvalidArgument("r must be a positive integer".into()));
        }
        let n = floor_u64(x)?;
        if n as usize > self.limit() {
            return Err(Error::TableTooSmall {
                value: x.to_string(),
                needed: n as usize,
                limit: self.limit(),
            });
        }
        Ok(n)
    }

    fn exact_parts(&self, n: u64, max_m: u32) -> ExactParts {
        let bits = self.ctx.bits();
        let zero = || Float::new(bits);
        let mut half = zero();
        for k in (1..=n).rev() {
            half += Float::with_val(bits, *self.tables.values().get(k as usize)) / k;
        }
        let mut hyper0 = zero();
        let mut hyper = vec![zero(); max_m as usize];
        let mut harmonic = vec![zero(); max_m as usize];
        let (mut t, mut tmp) = (zero(), zero());
        let mut k_done = 0u64;
        for d in (1..=n).rev() {
            let q = n / d;
            while k_done < q {
                k_done += 1;
                for (m, h) in harmonic.iter_mut().enumerate() {
                    tmp.assign(Integer::from(k_done).pow(2 * (m as u32 + 1)));
                    tmp.recip_mut();
                    *h += &tmp;
                }
            }
            let g = *self.tables.convolved().get(d as usize);
            if g == 0 {
                continue;
            }
            t.assign(g);
            t /= d;
            tmp.assign(&t * q);
            hyper0 += &tmp;
            for (acc, h) in hyper.iter_mut().zip(&harmonic) {
                tmp.assign(&t * h);
                *acc += &tmp;
            }
        }
        ExactParts { half, hyper0, hyper }
    }

    fn assemble_exact(&self, parts: &ExactParts, r: u32) -> Float {
        let bits = self.ctx.bits();
        let mut inner = Float::with_val(bits, &parts.hyper0);
        for (m, w) in bernoulli_block(r) {
            inner += Float::with_val(bits, &parts.hyper[m as usize - 1] * self.ctx.rational(&w));
        }
        Float::with_val(bits, &parts.half / 2u32) + inner / (r + 1)
    }

    fn assemble_theorem(&self, sums: &WeightedSums, x: &Rational, r: u32) -> Result<(Float, Float)> {
        let bits = self.ctx.bits();
        let mut block = Float::new(bits);
        for (m, w) in bernoulli_block(r) {
            block += sums.delta_minus(m, &self.ctx)? * self.ctx.rational(&w);
        }
        block /= r + 1;
        let mut side = sums.delta(&self.ctx) / (r + 1) + &block;
        if self.f == GcdFunction::Psi {
            side -= psi_log_term(x, &self.ctx)?;
        }
        Ok((side, block))
    }

    /// The exact value: a rational when `floor(x)` is small, otherwise a
    /// floating evaluation of the same identity.
    pub fn exact_value(&self, x: &Rational, r: u32) -> Result<ExactValue> {
        let n = self.check(x, r)?;
        if n <= EXACT_REPORT_CEILING {
            let p = EvalPoint::new(x.clone(), r, self.f)?;
            return Ok(ExactValue::Rational(m_r_identity(&p, &self.tables)?));
        }
        let parts = self.exact_parts(n, r / 2);
        Ok(ExactValue::Float(self.assemble_exact(&parts, r)))
    }

    /// `M_r(x; f)` from the floating route, whatever the size of `x`.
    pub fn exact_float(&self, x: &Rational, r: u32) -> Result<Float> {
        let n = self.check(x, r)?;
        Ok(self.assemble_exact(&self.exact_parts(n, r / 2), r))
    }

    pub fn residual(&self, x: &Rational, r: u32) -> Result<Float> {
        let exact = self.exact_value(x, r)?.to_float(&self.ctx);
        Ok(exact - main_term(self.f, x, r, &self.ctx)?)
    }

    pub fn weighted_sums(&self, x: &Rational, max_m: u32) -> Result<WeightedSums> {
        self.engine.sums(&self.coeffs, x, max_m)
    }

    pub fn theorem_side(&self, x: &Rational, r: u32) -> Result<Float> {
        self.check(x, r)?;
        let sums = self.weighted_sums(x, r / 2)?;
        Ok(self.assemble_theorem(&sums, x, r)?.0)
    }

    /// The theorem side with the `Delta_-2m` block left out.
    pub fn theorem_side_without_block(&self, x: &Rational, r: u32) -> Result<Float> {
        self.check(x, r)?;
        let sums = self.weighted_sums(x, 0)?;
        Ok(self.assemble_theorem(&sums, x, 1)?.0)
    }

    /// `residual - theorem_side` from the partial sums alone:
    /// `1/2 sum f(n)/n - B x [+ log x/(4 zeta(2))]
    ///  + x/(r+1) ((log x + 2 gamma - 1 + C_odd)(P2 - L) - (PL - L'))
    ///  - C_even/(2(r+1)) P1`.
    pub fn gap_closed_form(&self, x: &Rational, r: u32) -> Result<Float> {
        let n = self.check(x, r)?;
        let bits = self.ctx.bits();
        let k = main_constants(self.f, r, &self.ctx)?;
        let sums = self.weighted_sums(x, 0)?;
        let xf = self.ctx.rational(x);
        let parts = self.exact_parts(n, 0);
        let mut gap = Float::with_val(bits, &parts.half / 2u32) - Float::with_val(bits, &k.half_coeff * &xf);
        if self.f == GcdFunction::Psi {
            gap += psi_log_term(x, &self.ctx)?;
        }
        let lx = Float::with_val(bits, xf.ln_ref());
        let weight = lx + euler_gamma(&self.ctx) * 2u32 - 1u32 + c_odd(r, &self.ctx)?;
        let inner = weight * Float::with_val(bits, &sums.p2 - &k.c_limit) - Float::with_val(bits, &sums.pl - &k.c_log_limit);
        gap += inner * xf / (r + 1);
        gap -= c_even(r, &self.ctx)? * &sums.p1 / (2 * (r + 1));
        Ok(gap)
    }

    /// Reports for several `r` at one `x`, sharing every `O(x)` pass.
    pub fn reports(&self, x: &Rational, rs: &[u32]) -> Result<Vec<ExpansionReport>> {
        let Some(&r_max) = rs.iter().max() else {
            return Ok(Vec::new());
        };
        let n = self.check(x, r_max)?;
        for &r in rs {
            self.check(x, r)?;
        }
        let bits = self.ctx.bits();
        let max_m = r_max / 2;
        let parts = (n > EXACT_REPORT_CEILING).then(|| self.exact_parts(n, max_m));
        let sums = self.weighted_sums(x, max_m)?;
        let xf = self.ctx.rational(x);
        let log_x = Float::with_val(bits, xf.ln_ref());
        let (env_loglog, env_delta) = if xf > 5 {
            (
                loglog_envelope(&xf),
                delta_envelope(&xf, self.delta_c)? * &log_x,
            )
        } else {
            (Float::with_val(bits, f64::NAN), Float::with_val(bits, f64::NAN))
        };
        let mut out = Vec::with_capacity(rs.len());
        for &r in rs {
            let exact = match &parts {
                Some(p) => ExactValue::Float(self.assemble_exact(p, r)),
                None => {
                    let p = EvalPoint::new(x.clone(), r, self.f)?;
                    ExactValue::Rational(m_r_identity(&p, &self.tables)?)
                }
            };
            let main = main_term(self.f, x, r, &self.ctx)?;
            let residual = exact.to_float(&self.ctx) - &main;
            let (theorem_side, block) = self.assemble_theorem(&sums, x, r)?;
            let gap = Float::with_val(bits, &residual - &theorem_side);
            out.push(ExpansionReport {
                x: x.clone(),
                r,
                f: self.f,
                exact,
                main,
                residual,
                theorem_side,
                gap,
                log_x: log_x.clone(),
                env_loglog: env_loglog.clone(),
                env_delta: env_delta.clone(),
                block,
                digits: self.ctx.digits(),
            });
        }
        Ok(out)
    }

    pub fn report(&self, x: &Rational, r: u32) -> Result<ExpansionReport> {
        Ok(self.reports(x, &[r])?.remove(0))
    }

    /// Reports over a grid, in grid order; points are split across
    /// `threads` workers.
    pub fn scan(&self, grid: &[Rational], r: u32, threads: usize) -> Result<Vec<ExpansionReport>> {
        self.scan_many(grid, &[r], threads)
    }

    /// Like [`scan`](Self::scan) for several `r`; rows are grouped by
    /// grid point, then by `r` in the given order.
    pub fn scan_many(&self, grid: &[Rational], rs: &[u32], threads: usize) -> Result<Vec<ExpansionReport>> {
        for x in grid {
            for &r in rs {
                self.check(x, r)?;
            }
        }
        let threads = threads.max(1).min(grid.len().max(1));
        if threads == 1 {
            let mut out = Vec::new();
            for x in grid {
                out.extend(self.reports(x, rs)?);
            }
            return Ok(out);
        }
        let chunks: Vec<Result<Vec<ExpansionReport>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    scope.spawn(move || {
                        let mut out = Vec::new();
                        for (i, x) in grid.iter().enumerate() {
                            if i % threads == t {
                                out.push((i, self.reports(x, rs)?));
                            }
                        }
                        Ok::<_, Error>(out)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join().expect("scan worker panicked").map(|v| {
                        v.into_iter().flat_map(|(_, rows)| rows).collect::<Vec<_>>()
                    })
                })
                .collect()
        });
        // reassemble in grid order: worker t holds points t, t+threads, ...
        let mut per_worker: Vec<std::vec::IntoIter<ExpansionReport>> = Vec::new();
        for c in chunks {
            per_worker.push(c?.into_iter());
        }
        let mut out = Vec::new();
        for i in 0..grid.len() {
            for _ in rs {
                out.push(per_worker[i % threads].next().expect("row count"));
            }
        }
        Ok(out)
    }
}

/// `log x / (4 zeta(2))`
fn psi_log_term(x: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    let (z2, _) = zeta_at_integer(2, ctx)?;
    let xf = ctx.rational(x);
    Ok(Float::with_val(ctx.bits(), xf.ln_ref()) / (z2 * 4u32))
}

/// `K_r`, `L_r` or `U_r` at `x`, with tables built to `floor(x)`.
pub fn residual(f: GcdFunction, x: &Rational, r: u32, ctx: &PrecisionContext) -> Result<Float> {
    Expansion::new(f, floor_u64(x)?.max(1) as usize, ctx)?.residual(x, r)
}

/// The theorem-side expression at `x`, with tables built to `floor(x)`.
pub fn theorem_side(f: GcdFunction, x: &Rational, r: u32, ctx: &PrecisionContext) -> Result<Float> {
    Expansion::new(f, floor_u64(x)?.max(1) as usize, ctx)?.theorem_side(x, r)
}

/// `[x] + 1/2` for `x = xmin * 10^(i/per_decade)` up to `xmax`, deduplicated.
pub fn decade_grid(xmin: f64, xmax: f64, per_decade: u32, half_integers: bool) -> Result<Vec<Rational>> {
    if !(xmin >= 1.0 && xmax >= xmin) || per_decade == 0 {
        return Err(Error::InvalidArgument(format!("bad grid [{xmin}, {xmax}] with {per_decade} per decade")));
    }
    let steps = ((xmax / xmin).log10() * per_decade as f64).floor() as u32;
    grid_from(
        (0..=steps).map(|i| xmin * 10f64.powf(i as f64 / per_decade as f64)),
        xmax,
        half_integers,
    )
}

/// `points` log-spaced values from `xmin` to `xmax`.
pub fn log_grid(xmin: f64, xmax: f64, points: u32, half_integers: bool) -> Result<Vec<Rational>> {
    if !(xmin >= 1.0 && xmax >= xmin) || points == 0 {
        return Err(Error::InvalidArgument(format!("bad grid [{xmin}, {xmax}] with {points} points")));
    }
    if points == 1 {
        return grid_from(std::iter::once(xmin), xmax, half_integers);
    }
    let ratio = (xmax / xmin).ln();
    grid_from(
        (0..points).map(|i| xmin * (ratio * i as f64 / (points - 1) as f64).exp()),
        xmax,
        half_integers,
    )
}

fn grid_from(values: impl Iterator<Item = f64>, xmax: f64, half_integers: bool) -> Result<Vec<Rational>> {
    let mut out: Vec<Rational> = Vec::new();
    for v in values {
        let base = Rational::from(v.min(xmax).floor() as u64);
        let x = if half_integers { base + Rational::from((1, 2)) } else { base };
        if out.last() != Some(&x) {
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::m_r_naive;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn close(a: &Float, b: &Float, tol: f64) -> bool {
        Float::with_val(a.prec(), a - b).abs() < tol
    }

    #[test]
    fn bernoulli_constants() {
        let c = ctx();
        assert!(c_odd(1, &c).unwrap().is_zero());
        assert!(c_even(1, &c).unwrap().is_zero());
        let (z3, _) = zeta_at_integer(3, &c).unwrap();
        let (z2, _) = zeta_at_integer(2, &c).unwrap();
        assert!(close(&c_odd(2, &c).unwrap(), &(z3 / 2u32), 1e-45));
        assert!(close(&c_even(2, &c).unwrap(), &(z2 / 2u32), 1e-45));
        assert!((c_odd(2, &c).unwrap().to_f64() - 0.601028).abs() < 1e-6);
        assert!((c_even(2, &c).unwrap().to_f64() - 0.822467).abs() < 1e-6);
    }

    #[test]
    fn main_term_shapes() {
        let c = ctx();
        let x = Rational::from(1_000_000);
        let xf = c.rational(&x);
        let lx = Float::with_val(c.bits(), xf.ln_ref());
        let (z2, dz2) = zeta_at_integer(2, &c).unwrap();
        let g = euler_gamma(&c);
        let a = Float::with_val(c.bits(), z2.clone() * 2u32).recip();
        let expect = a.clone() * &lx * &xf
            + Float::with_val(c.bits(), &xf / 2u32)
            + (g * 2u32 - 1u32 - dz2 / &z2) * a * &xf;
        assert!(close(&main_term(GcdFunction::Id, &x, 1, &c).unwrap(), &expect, 1e-35));
        let (z4, _) = zeta_at_integer(4, &c).unwrap();
        let k = main_constants(GcdFunction::Psi, 2, &c).unwrap();
        assert!(close(&k.log_coeff, &Float::with_val(c.bits(), z4 * 3u32).recip(), 1e-45));
        assert!(main_term(GcdFunction::Id, &Rational::from((3, 2)), 1, &c).is_err());
    }

    #[test]
    fn residual_at_two() {
        let c = ctx();
        let x = Rational::from(2);
        let expect = c.rational(&Rational::from((9, 4))) - main_term(GcdFunction::Id, &x, 1, &c).unwrap();
        assert!(close(&residual(GcdFunction::Id, &x, 1, &c).unwrap(), &expect, 1e-45));
    }

    #[test]
    fn divisor_form_is_exact() {
        let t = GcdTables::new(GcdFunction::Id, 600).unwrap();
        for r in 1..=5 {
            for x in [Rational::from(2), Rational::from((201, 2)), Rational::from(600)] {
                let p = EvalPoint::new(x.clone(), r, GcdFunction::Id).unwrap();
                assert_eq!(m_r_id_divisor_form(&x, r).unwrap(), m_r_naive(&p, &t).unwrap());
            }
        }
    }

    #[test]
    fn float_route_matches_rational_route() {
        let c = ctx();
        for f in GcdFunction::ALL {
            let e = Expansion::new(f, 2500, &c).unwrap();
            for r in 1..=6 {
                let x = Rational::from((4001, 2));
                let exact = e.exact_value(&x, r).unwrap().to_float(&c);
                assert!(close(&exact, &e.exact_float(&x, r).unwrap(), 1e-38), "{f} r = {r}");
            }
        }
    }

    #[test]
    fn gap_routes_agree() {
        let c = ctx();
        for f in GcdFunction::ALL {
            let e = Expansion::new(f, 5000, &c).unwrap();
            for r in 1..=4 {
                for x in [Rational::from((201, 2)), Rational::from((9001, 2))] {
                    let rep = e.report(&x, r).unwrap();
                    let closed = e.gap_closed_form(&x, r).unwrap();
                    assert!(close(&rep.gap, &closed, 1e-35), "{f} r = {r} x = {x}");
                }
            }
        }
    }

    #[test]
    fn theorem_side_matches_naive_double_loop() {
        let c = ctx();
        let x = Rational::from((201, 2));
        let e = Expansion::new(GcdFunction::Id, 200, &c).unwrap();
        let mu = e.coefficients();
        // 1/3 sum mu(d)/d (Delta(x/d) + 3 B_2 Delta_-2(x/d))
        let mut naive = Float::new(c.bits());
        for d in 1..=100u64 {
            let v = *mu.get(d as usize);
            if v == 0 {
                continue;
            }
            let xd = Rational::from(&x / d);
            let inner = crate::error_terms::delta(&xd, &c).unwrap()
                + crate::error_terms::delta_minus(1, &xd, &c).unwrap() / 2u32;
            naive += inner * v / d;
        }
        naive /= 3u32;
        assert!(close(&e.theorem_side(&x, 2).unwrap(), &naive, 1e-38));
        // with r = 1 the block is absent
        let one = e.theorem_side(&x, 1).unwrap();
        let half = crate::error_terms::weighted_delta_sum(mu, &x, crate::error_terms::DeltaKind::Delta, &c).unwrap() / 2u32;
        assert!(close(&one, &half, 1e-38));
    }

    #[test]
    fn psi_theorem_side_carries_the_log_term() {
        let c = ctx();
        let x = Rational::from((2001, 2));
        let e = Expansion::new(GcdFunction::Psi, 1000, &c).unwrap();
        let sums = e.weighted_sums(&x, 0).unwrap();
        let plain = sums.delta(&c) / 2u32;
        let (z2, _) = zeta_at_integer(2, &c).unwrap();
        let logt = Float::with_val(c.bits(), c.rational(&x).ln_ref()) / (z2 * 4u32);
        assert!(close(&e.theorem_side(&x, 1).unwrap(), &(plain - logt), 1e-40));
    }

    #[test]
    fn gap_changes_with_r_only_through_the_bernoulli_block() {
        let c = ctx();
        let x = Rational::from((3001, 2));
        for f in GcdFunction::ALL {
            let e = Expansion::new(f, 1500, &c).unwrap();
            let sums = e.weighted_sums(&x, 0).unwrap();
            let k = main_constants(f, 1, &c).unwrap();
            let xf = c.rational(&x);
            let lx = Float::with_val(c.bits(), xf.ln_ref());
            // x ((log x + 2 gamma - 1)(P2 - L) - (PL - L')), shared by every r
            let shared = ((lx + euler_gamma(&c) * 2u32 - 1u32) * Float::with_val(c.bits(), &sums.p2 - &k.c_limit)
                - Float::with_val(c.bits(), &sums.pl - &k.c_log_limit))
                * &xf;
            let base = e.report(&x, 1).unwrap().gap - Float::with_val(c.bits(), &shared / 2u32);
            for r in 1..=4u32 {
                let g0 = e.report(&x, r).unwrap().gap;
                let g2 = e.report(&x, r + 2).unwrap().gap;
                let lhs = Float::with_val(c.bits(), &g0 - &base) * (r + 1) - Float::with_val(c.bits(), &g2 - &base) * (r + 3);
                let d_odd = c_odd(r, &c).unwrap() - c_odd(r + 2, &c).unwrap();
                let d_even = c_even(r, &c).unwrap() - c_even(r + 2, &c).unwrap();
                let rhs = d_odd * xf.clone() * Float::with_val(c.bits(), &sums.p2 - &k.c_limit) - d_even * &sums.p1 / 2u32;
                assert!(close(&lhs, &rhs, 1e-30), "{f} r = {r}");
            }
        }
    }

    #[test]
    fn scan_is_deterministic_and_thread_independent() {
        let c = ctx();
        let e = Expansion::new(GcdFunction::Phi, 4000, &c).unwrap();
        let grid = log_grid(100.0, 4000.0, 5, true).unwrap();
        assert_eq!(grid.len(), 5);
        assert!(grid.iter().all(|x| *x.denom() == 2));
        let a = e.scan(&grid, 2, 1).unwrap();
        let b = e.scan(&grid, 2, 3).unwrap();
        let mut ca = Vec::new();
        let mut cb = Vec::new();
        write_csv(&a, &mut ca).unwrap();
        write_csv(&b, &mut cb).unwrap();
        assert_eq!(ca, cb);
        assert_eq!(String::from_utf8(ca).unwrap().lines().count(), 6);
        let single = e.report(&grid[2], 2).unwrap();
        assert_eq!(single.gap, a[2].gap);
        assert_eq!(to_json(&a).as_array().unwrap().len(), 5);
    }

    #[test]
    fn residual_is_a_step_function_minus_main_drift() {
        let c = ctx();
        let e = Expansion::new(GcdFunction::Id, 200, &c).unwrap();
        let x = Rational::from((201, 2));
        let y = &x + Rational::from((1, 1_000_000_000));
        let drift = main_term(GcdFunction::Id, &y, 2, &c).unwrap() - main_term(GcdFunction::Id, &x, 2, &c).unwrap();
        let lhs = e.residual(&x, 2).unwrap() - e.residual(&y, 2).unwrap();
        assert!(close(&lhs, &drift, 1e-40));
    }

    #[test]
    fn grids() {
        let g = decade_grid(1000.0, 100_000.0, 50, true).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], Rational::from((2001, 2)));
        assert!(decade_grid(0.5, 10.0, 5, true).is_err());
    }
}
