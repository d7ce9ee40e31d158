//! Summatory functions and their error terms.
//!
//! `D(x) = sum_{n <= x} tau(n) = x log x + (2 gamma - 1) x + Delta(x)` and
//! `S_m(x) = sum_{n <= x} sigma_-2m(n) = zeta(1+2m) x - zeta(2m)/2 + Delta_-2m(x)`,
//! weighted partial sums of `mu` and its convolutions, and the
//! coefficient-weighted sums of `Delta(x/d)` that appear on the theorem side.

pub mod identities;
mod weighted;

use std::fmt;
use std::str::FromStr;

use rug::float::{Constant, Round};
use rug::ops::{AddAssignRound, DivAssignRound, Pow, SubAssignRound};
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::arith::{dirichlet_convolve, IntTable, PrimeSieve};
use crate::error::{Error, Result};
use crate::precision::{floor_u64, PrecisionContext};
use crate::special::{em_coefficients, euler_gamma, zeta_at_integer};

pub use weighted::{weighted_delta_sum, weighted_delta_sum_naive, DeltaKind, DivisorSums, WeightedSums};

/// Largest `floor(x)` for which weighted partial sums are returned as exact
/// rationals; beyond it the common denominator grows past practical size.
pub const EXACT_PARTIAL_CEILING: u64 = 100_000;

/// Largest argument for which `sigma_summatory` is used inside `delta_minus`
/// instead of the floating hyperbola.
const EXACT_SIGMA_CEILING: u64 = 4_096;

/// Below this `H_2m(q)` is summed directly, above it by Euler–Maclaurin.
const DIRECT_HARMONIC_CEILING: u64 = 100;

fn check_x(x: &Rational) -> Result<u64> {
    if *x < 1 {
        return Err(Error::InvalidArgument(format!("x must be at least 1, got {x}")));
    }
    floor_u64(x)
}

/// `lcm(1, 2, ..., n)`.
pub fn lcm_upto(n: u64) -> Integer {
    let mut out = Integer::from(1);
    if n < 2 {
        return out;
    }
    let sieve = PrimeSieve::new(n as usize).expect("n >= 2");
    for &p in sieve.primes() {
        let p = p as u64;
        let mut pk = p;
        while pk <= n / p {
            pk *= p;
        }
        out *= pk;
    }
    out
}

/// `sum_{n <= x} tau(n) = 2 sum_{d <= sqrt x} floor(x/d) - floor(sqrt x)^2`.
pub fn tau_summatory(n: u64) -> u64 {
    let s = n.isqrt();
    let mut acc = 0u64;
    for d in 1..=s {
        acc += n / d;
    }
    2 * acc - s * s
}

/// `Delta(x) = D(x) - x log x - (2 gamma - 1) x`.
pub fn delta(x: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    let n = check_x(x)?;
    let xf = ctx.rational(x);
    let g = euler_gamma(ctx);
    let smooth = Float::with_val(ctx.bits(), xf.ln_ref()) + g * 2u32 - 1u32;
    Ok(ctx.float(tau_summatory(n)) - smooth * xf)
}

/// `sum_{n <= x} sigma_-2m(n) = sum_{d <= x} d^-2m floor(x/d)`, exactly.
pub fn sigma_summatory(m: u32, n: u64) -> Result<Rational> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    if n == 0 {
        return Ok(Rational::new());
    }
    let lcm = lcm_upto(n);
    let mut acc = Integer::new();
    for d in 1..=n {
        let share = Integer::from(lcm.div_exact_ref(&Integer::from(d))).pow(2 * m);
        acc += share * (n / d);
    }
    Ok(Rational::from((acc, lcm.pow(2 * m))))
}

/// `H_2m(q) = sum_{l <= q} l^-2m` to working precision.
pub fn harmonic_even(m: u32, q: u64, ctx: &PrecisionContext) -> Float {
    let bits = ctx.bits();
    if q <= DIRECT_HARMONIC_CEILING {
        let mut acc = Float::new(bits);
        for l in (1..=q).rev() {
            acc += Float::with_val(bits, l).pow(-2 * m as i32);
        }
        return acc;
    }
    let (zeta, _) = zeta_at_integer(2 * m, ctx).expect("2m >= 2");
    zeta - tail_even(m, q, ctx)
}

/// `sum_{l > q} l^-2m` by Euler–Maclaurin at `q`.
fn tail_even(m: u32, q: u64, ctx: &PrecisionContext) -> Float {
    let bits = ctx.bits();
    let qf = Float::with_val(bits, q);
    let s = 2 * m;
    let q_pow = Float::with_val(bits, (&qf).pow(-(s as i32)));
    let mut acc = Float::with_val(bits, &q_pow * &qf) / (s - 1);
    acc -= Float::with_val(bits, &q_pow / 2u32);
    let eps = ctx.ten_pow_neg(ctx.digits() as i32 + 5);
    let inv_q2 = Float::with_val(bits, qf.square_ref()).recip();
    // term_j = B_2j/(2j)! * s(s+1)...(s+2j-2) * q^(-s-2j+1)
    let mut rising = Float::with_val(bits, s);
    let mut power = Float::with_val(bits, &q_pow / &qf);
    let coeffs = em_coefficients(bits, 60);
    for (j, c) in coeffs.iter().enumerate() {
        let term = Float::with_val(bits, c * &rising) * &power;
        acc += &term;
        if term.abs() < eps {
            break;
        }
        let base = s + 2 * j as u32 + 1;
        rising *= base * (base + 1);
        power *= &inv_q2;
    }
    acc
}

/// `S_m(n)` in floating point by the hyperbola method, `O(sqrt n)` harmonic
/// evaluations.
pub fn sigma_summatory_float(m: u32, n: u64, ctx: &PrecisionContext) -> Float {
    let bits = ctx.bits();
    let s = n.isqrt();
    let mut acc = Float::new(bits);
    for k in 1..=s {
        let w = Float::with_val(bits, k).pow(-2 * m as i32);
        acc += w * (n / k);
        acc += harmonic_even(m, n / k, ctx);
    }
    acc -= harmonic_even(m, s, ctx) * s;
    acc
}

/// `Delta_-2m(x) = S_m(x) - zeta(1+2m) x + zeta(2m)/2`.
pub fn delta_minus(m: u32, x: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    if m == 0 {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let n = check_x(x)?;
    let sum = if n <= EXACT_SIGMA_CEILING {
        ctx.rational(&sigma_summatory(m, n)?)
    } else {
        sigma_summatory_float(m, n, ctx)
    };
    let (z_odd, _) = zeta_at_integer(2 * m + 1, ctx)?;
    let (z_even, _) = zeta_at_integer(2 * m, ctx)?;
    Ok(sum - z_odd * ctx.rational(x) + z_even / 2u32)
}

/// An exact summatory value together with its smooth main part.
#[derive(Debug, Clone)]
pub struct SummatorySample {
    pub x: Rational,
    pub exact_sum: Rational,
    pub main_part: Float,
    pub error_value: Float,
}

/// `D(x)` split as in the divisor problem.
pub fn divisor_sample(x: &Rational, ctx: &PrecisionContext) -> Result<SummatorySample> {
    let n = check_x(x)?;
    let exact_sum = Rational::from(tau_summatory(n));
    let xf = ctx.rational(x);
    let main_part = Float::with_val(ctx.bits(), xf.ln_ref()) * &xf + (euler_gamma(ctx) * 2u32 - 1u32) * &xf;
    let error_value = ctx.rational(&exact_sum) - &main_part;
    Ok(SummatorySample {
        x: x.clone(),
        exact_sum,
        main_part,
        error_value,
    })
}

/// `S_m(x)` split as in the generalized divisor problem.
pub fn sigma_sample(m: u32, x: &Rational, ctx: &PrecisionContext) -> Result<SummatorySample> {
    let n = check_x(x)?;
    let exact_sum = sigma_summatory(m, n)?;
    let (z_odd, _) = zeta_at_integer(2 * m + 1, ctx)?;
    let (z_even, _) = zeta_at_integer(2 * m, ctx)?;
    let main_part = z_odd * ctx.rational(x) - z_even / 2u32;
    let error_value = ctx.rational(&exact_sum) - &main_part;
    Ok(SummatorySample {
        x: x.clone(),
        exact_sum,
        main_part,
        error_value,
    })
}

/// Weight `w(n)` in `sum_{n <= x} c(n) w(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// `w = 1`; with `c = mu` this is Mertens' function.
    Unit,
    Inverse,
    InverseSquare,
    /// `w(n) = log n / n^2`
    LogInverseSquare,
}

impl Weight {
    pub const ALL: [Weight; 4] = [Weight::Unit, Weight::Inverse, Weight::InverseSquare, Weight::LogInverseSquare];

    pub fn name(self) -> &'static str {
        match self {
            Weight::Unit => "mertens",
            Weight::Inverse => "inv",
            Weight::InverseSquare => "inv_square",
            Weight::LogInverseSquare => "log_inv_square",
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Weight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mertens" | "unit" | "1" => Ok(Weight::Unit),
            "inv" | "1/n" => Ok(Weight::Inverse),
            "inv_square" | "1/n2" => Ok(Weight::InverseSquare),
            "log_inv_square" | "logn/n2" => Ok(Weight::LogInverseSquare),
            other => Err(Error::InvalidArgument(format!("unknown weight `{other}`"))),
        }
    }
}

/// A partial sum, exact when that is affordable.
#[derive(Debug, Clone, PartialEq)]
pub enum PartialValue {
    Exact(Rational),
    Approx(Float),
}

impl PartialValue {
    pub fn to_float(&self, ctx: &PrecisionContext) -> Float {
        match self {
            PartialValue::Exact(q) => ctx.rational(q),
            PartialValue::Approx(f) => Float::with_val(ctx.bits(), f),
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            PartialValue::Exact(q) => Some(q),
            PartialValue::Approx(_) => None,
        }
    }
}

impl fmt::Display for PartialValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartialValue::Exact(q) => write!(f, "{q}"),
            PartialValue::Approx(v) => write!(f, "{v}"),
        }
    }
}

/// `M(n) = sum_{k <= n} mu(k)`.
pub fn mertens(mu: &IntTable, n: u64) -> Result<i64> {
    require(mu, n)?;
    Ok(mu.values()[..n as usize].iter().sum())
}

fn require(table: &IntTable, n: u64) -> Result<()> {
    if n as usize > table.limit() {
        return Err(Error::TableTooSmall {
            value: n.to_string(),
            needed: n as usize,
            limit: table.limit(),
        });
    }
    Ok(())
}

/// `sum_{n <= x} c(n) w(n)`: exact for the unit and power weights up to
/// [`EXACT_PARTIAL_CEILING`], floating otherwise.
pub fn weighted_partial_sum(c: &IntTable, x: &Rational, w: Weight, ctx: &PrecisionContext) -> Result<PartialValue> {
    let n = check_x(x)?;
    require(c, n)?;
    let terms = || (1..=n).filter_map(|k| Some((k, *c.get(k as usize))).filter(|&(_, v)| v != 0));
    match w {
        Weight::Unit => Ok(PartialValue::Exact(Rational::from(terms().map(|(_, v)| v).sum::<i64>()))),
        Weight::Inverse | Weight::InverseSquare if n <= EXACT_PARTIAL_CEILING => {
            let e = if w == Weight::Inverse { 1 } else { 2 };
            let lcm = lcm_upto(n).pow(e);
            let mut acc = Integer::new();
            for (k, v) in terms() {
                let kk = Integer::from(k).pow(e);
                acc += Integer::from(lcm.div_exact_ref(&kk)) * v;
            }
            Ok(PartialValue::Exact(Rational::from((acc, lcm))))
        }
        _ => {
            let bits = ctx.bits();
            let mut acc = Float::new(bits);
            let mut t = Float::new(bits);
            for (k, v) in terms() {
                use rug::Assign;
                t.assign(v);
                match w {
                    Weight::Inverse => t /= k,
                    Weight::InverseSquare => {
                        t /= k;
                        t /= k;
                    }
                    _ => {
                        t *= Float::with_val(bits, Float::ln_u(k as u32));
                        t /= k;
                        t /= k;
                    }
                }
                acc += &t;
            }
            Ok(PartialValue::Approx(acc))
        }
    }
}

/// `sum_{n <= x} mu(n) w(n)`; `mu` must be the Möbius table.
pub fn mobius_partial_sums(mu: &IntTable, x: &Rational, w: Weight, ctx: &PrecisionContext) -> Result<PartialValue> {
    weighted_partial_sum(mu, x, w, ctx)
}

/// A closed interval with `f64` endpoints, rounded outward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

impl Enclosure {
    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn from_floats(lo: &Float, hi: &Float) -> Self {
        Self {
            lo: lo.to_f64_round(Round::Down),
            hi: hi.to_f64_round(Round::Up),
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Enclosure of `self - other`.
    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        let mut lo = Float::with_val(53, self.lo);
        lo.sub_assign_round(other.hi, Round::Down);
        let mut hi = Float::with_val(53, self.hi);
        hi.sub_assign_round(other.lo, Round::Up);
        Enclosure::from_floats(&lo, &hi)
    }

    /// An upper bound for `|v|` over the interval.
    pub fn abs_upper(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

/// Outward-rounded enclosures of `sum_{k <= n} c(k) w(k)` for every
/// `n = 0..=n_max`, accumulated with directed rounding at `bits`.
pub fn partial_sum_enclosures(c: &IntTable, w: Weight, n_max: u64, bits: u32) -> Result<Vec<Enclosure>> {
    require(c, n_max)?;
    if w == Weight::LogInverseSquare {
        return Err(Error::InvalidArgument("enclosures support the unit and power weights".into()));
    }
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(Enclosure::point(0.0));
    let mut lo = Float::new(bits);
    let mut hi = Float::new(bits);
    for k in 1..=n_max {
        let v = *c.get(k as usize);
        if v != 0 {
            let (mut tl, mut th) = (Float::with_val(bits, v), Float::with_val(bits, v));
            match w {
                Weight::Inverse => {
                    tl.div_assign_round(k, Round::Down);
                    th.div_assign_round(k, Round::Up);
                }
                Weight::InverseSquare => {
                    tl.div_assign_round(k * k, Round::Down);
                    th.div_assign_round(k * k, Round::Up);
                }
                _ => {}
            }
            lo.add_assign_round(&tl, Round::Down);
            hi.add_assign_round(&th, Round::Up);
        }
        out.push(Enclosure::from_floats(&lo, &hi));
    }
    Ok(out)
}

/// Enclosure of `1/zeta(2) = 6/pi^2`.
pub fn inverse_zeta_two_enclosure(bits: u32) -> Enclosure {
    let (pi_lo, _) = Float::with_val_round(bits, Constant::Pi, Round::Down);
    let (pi_hi, _) = Float::with_val_round(bits, Constant::Pi, Round::Up);
    let mut lo = Float::with_val(bits, 6);
    lo.div_assign_round(Float::with_val(2 * bits, pi_hi.square_ref()), Round::Down);
    let mut hi = Float::with_val(bits, 6);
    hi.div_assign_round(Float::with_val(2 * bits, pi_lo.square_ref()), Round::Up);
    Enclosure::from_floats(&lo, &hi)
}

/// The coefficient functions `c` on the theorem side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficients {
    Mobius,
    MuMu,
    MuAbsMu,
}

impl Coefficients {
    pub fn name(self) -> &'static str {
        match self {
            Coefficients::Mobius => "mu",
            Coefficients::MuMu => "mu_mu",
            Coefficients::MuAbsMu => "mu_absmu",
        }
    }

    pub fn table(self, sieve: &PrimeSieve) -> Result<IntTable> {
        let mu = sieve.mobius();
        Ok(match self {
            Coefficients::Mobius => mu,
            Coefficients::MuMu => dirichlet_convolve(&mu, &mu)?.with_label("mu*mu"),
            Coefficients::MuAbsMu => dirichlet_convolve(&mu, &sieve.abs_mobius())?.with_label("mu*|mu|"),
        })
    }

    /// `sum_n c(n) w(n)` over all `n`, where it converges.
    pub fn limit(self, w: Weight, ctx: &PrecisionContext) -> Result<Option<Float>> {
        let (z2, dz2) = zeta_at_integer(2, ctx)?;
        let (z4, dz4) = zeta_at_integer(4, ctx)?;
        let bits = ctx.bits();
        let v = match (self, w) {
            (_, Weight::Unit) => return Ok(None),
            (Coefficients::Mobius | Coefficients::MuMu, Weight::Inverse) => Float::new(bits),
            (Coefficients::MuAbsMu, Weight::Inverse) => z2.recip(),
            (Coefficients::Mobius, Weight::InverseSquare) => z2.recip(),
            (Coefficients::MuMu, Weight::InverseSquare) => z2.square().recip(),
            (Coefficients::MuAbsMu, Weight::InverseSquare) => z4.recip(),
            (Coefficients::Mobius, Weight::LogInverseSquare) => dz2 / z2.square(),
            (Coefficients::MuMu, Weight::LogInverseSquare) => dz2 * 2u32 / z2.pow(3u32),
            (Coefficients::MuAbsMu, Weight::LogInverseSquare) => dz4 * 2u32 / z4.square(),
        };
        Ok(Some(v))
    }
}

impl FromStr for Coefficients {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu" | "mobius" => Ok(Coefficients::Mobius),
            "mu_mu" => Ok(Coefficients::MuMu),
            "mu_absmu" => Ok(Coefficients::MuAbsMu),
            other => Err(Error::UnknownFunction(other.to_string())),
        }
    }
}

/// `sum_{n <= x} c(n) w(n)` for `c` one of the two convolutions, together
/// with the limiting value it approaches.
pub fn convolved_partial_sums(
    kind: Coefficients,
    table: &IntTable,
    x: &Rational,
    w: Weight,
    ctx: &PrecisionContext,
) -> Result<(PartialValue, Option<Float>)> {
    Ok((weighted_partial_sum(table, x, w, ctx)?, kind.limit(w, ctx)?))
}

/// Summatory functions of `phi(n)/n` and `psi(n)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioFunction {
    Totient,
    Dedekind,
}

/// `sum_{n <= x} f(n)/n` against its smooth part and envelope.
#[derive(Debug, Clone)]
pub struct RatioReport {
    pub x: Rational,
    pub sum: Float,
    pub main: Float,
    pub residual: Float,
    pub envelope: Float,
    /// `residual / envelope`
    pub ratio: Float,
}

/// `(log x)^(2/3) (log log x)^(1/3)`
pub fn loglog_envelope(x: &Float) -> Float {
    let lx = Float::with_val(x.prec(), x.ln_ref());
    let llx = Float::with_val(x.prec(), lx.ln_ref());
    lx.pow(Float::with_val(x.prec(), 2) / 3u32) * llx.cbrt()
}

/// `(log x)^(2/3)`
pub fn log_two_thirds_envelope(x: &Float) -> Float {
    let lx = Float::with_val(x.prec(), x.ln_ref());
    lx.pow(Float::with_val(x.prec(), 2) / 3u32)
}

/// Residual of `sum_{n <= x} f(n)/n` after the main part `x/zeta(2)`
/// (totient) or `zeta(2) x/zeta(4) - log x/(2 zeta(2))` (Dedekind).
pub fn ratio_summatory(which: RatioFunction, f: &IntTable, x: &Rational, ctx: &PrecisionContext) -> Result<RatioReport> {
    if *x < 10 {
        return Err(Error::InvalidArgument(format!("ratio summatories need x >= 10, got {x}")));
    }
    let n = check_x(x)?;
    require(f, n)?;
    let bits = ctx.bits();
    let mut sum = Float::new(bits);
    for k in 1..=n {
        sum += Float::with_val(bits, *f.get(k as usize)) / k;
    }
    let xf = ctx.rational(x);
    let (z2, _) = zeta_at_integer(2, ctx)?;
    let (main, envelope) = match which {
        RatioFunction::Totient => (Float::with_val(bits, &xf / &z2), loglog_envelope(&xf)),
        RatioFunction::Dedekind => {
            let (z4, _) = zeta_at_integer(4, ctx)?;
            let lin = Float::with_val(bits, &z2 * &xf) / &z4;
            let log = Float::with_val(bits, xf.ln_ref()) / (z2 * 2u32);
            (lin - log, log_two_thirds_envelope(&xf))
        }
    };
    let residual = Float::with_val(bits, &sum - &main);
    let ratio = Float::with_val(bits, &residual / &envelope);
    Ok(RatioReport {
        x: x.clone(),
        sum,
        main,
        residual,
        envelope,
        ratio,
    })
}

/// `theta(t) = t - [t] - 1/2`
pub fn theta(t: &Rational) -> Rational {
    let fl = t.clone().floor();
    (t - fl) - Rational::from((1, 2))
}

/// `sum_{l <= x} mu(l)/l * theta(x/l)`.
pub fn theta_sum(mu: &IntTable, x: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    let n = check_x(x)?;
    require(mu, n)?;
    let bits = ctx.bits();
    let xf = ctx.rational(x);
    let mut acc = Float::new(bits);
    for l in 1..=n {
        let v = *mu.get(l as usize);
        if v == 0 {
            continue;
        }
        // mu(l)/l * (x/l - floor(x/l) - 1/2)
        let q = n / l;
        let frac = Float::with_val(bits, &xf / l) - q - 0.5f64;
        acc += frac * v / l;
    }
    Ok(acc)
}
