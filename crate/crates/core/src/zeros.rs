//! Nontrivial zeros on the critical line, explicit formulas for Mobius
//! partial sums, the zero-sum form of `K_r`, and `J_-lambda(T)`.
//!
//! Zeros are read from a file, never located. Every entry is checked by
//! evaluating `zeta` and `zeta'` at `1/2 + i gamma`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Assign, Float, Rational};

use crate::error::{Error, Result};
use crate::exact::GcdFunction;
use crate::expansions::{c_even, c_odd, Expansion};
use crate::precision::{floor_u64, is_half_integer, HpComplex, PrecisionContext};
use crate::special::{euler_gamma, pi, zeta_and_derivative, zeta_at_integer, VALIDATED_HEIGHT};

/// Largest `|zeta(1/2 + i gamma)|` accepted for a listed ordinate.
pub const ZERO_TOLERANCE: f64 = 1e-6;
/// Largest relative disagreement between a listed and a computed `zeta'`.
pub const ZETA_PRIME_TOLERANCE: f64 = 1e-6;
/// Below this `|zeta'(rho)|` the zero is treated as multiple.
pub const SIMPLICITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ZeroEntry {
    pub gamma: Float,
    pub zeta_prime: HpComplex,
    /// `|zeta(1/2 + i gamma)|` as computed at load time.
    pub residual_modulus: Float,
}

impl ZeroEntry {
    /// `rho = 1/2 + i gamma`
    pub fn rho(&self) -> HpComplex {
        let p = self.gamma.prec();
        HpComplex::new(Float::with_val(p, 0.5), self.gamma.clone())
    }
}

/// Zeros `1/2 + i gamma_k`, `gamma_k` increasing, with `zeta'(rho_k)`.
#[derive(Debug, Clone)]
pub struct ZeroTable {
    entries: Vec<ZeroEntry>,
    bits: u32,
}

impl ZeroTable {
    pub fn empty(ctx: &PrecisionContext) -> Self {
        Self {
            entries: Vec::new(),
            bits: ctx.bits(),
        }
    }

    pub fn entries(&self) -> &[ZeroEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest ordinate, `0` for an empty table.
    pub fn t_max(&self) -> Float {
        self.entries
            .last()
            .map_or_else(|| Float::new(self.bits), |e| e.gamma.clone())
    }

    /// The entries with `gamma <= t`.
    pub fn truncated(&self, t: f64) -> ZeroTable {
        let k = self.count_upto(t);
        Self {
            entries: self.entries[..k].to_vec(),
            bits: self.bits,
        }
    }

    /// The first `n` entries.
    pub fn first(&self, n: usize) -> ZeroTable {
        Self {
            entries: self.entries[..n.min(self.len())].to_vec(),
            bits: self.bits,
        }
    }

    /// `N(t)`: entries with `gamma <= t`.
    pub fn count_upto(&self, t: f64) -> usize {
        self.entries.partition_point(|e| e.gamma <= t)
    }
}

struct RawLine {
    line: usize,
    gamma: Float,
    zeta_prime: Option<HpComplex>,
}

fn parse_lines(text: &str, bits: u32) -> Result<Vec<RawLine>> {
    let parse = |line: usize, field: &str| -> Result<Float> {
        let v = Float::parse(field).map_err(|e| Error::MalformedZeroLine {
            line,
            message: format!("`{field}`: {e}"),
        })?;
        let v = Float::with_val(bits, v);
        if !v.is_finite() {
            return Err(Error::MalformedZeroLine {
                line,
                message: format!("`{field}` is not finite"),
            });
        }
        Ok(v)
    };
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let (gamma, zeta_prime) = match fields.as_slice() {
            [g] => (parse(line, g)?, None),
            [g, re, im] => (parse(line, g)?, Some(HpComplex::new(parse(line, re)?, parse(line, im)?))),
            _ => {
                return Err(Error::MalformedZeroLine {
                    line,
                    message: format!("expected `gamma` or `gamma re im`, found {} fields", fields.len()),
                })
            }
        };
        if gamma <= 0 {
            return Err(Error::MalformedZeroLine {
                line,
                message: "ordinates must be positive".into(),
            });
        }
        out.push(RawLine { line, gamma, zeta_prime });
    }
    Ok(out)
}

fn validate(index: usize, raw: &RawLine, recompute: bool, ctx: &PrecisionContext) -> Result<ZeroEntry> {
    if raw.gamma > VALIDATED_HEIGHT {
        return Err(Error::InvalidArgument(format!(
            "entry {index} (line {}): ordinate {} above the validated height {VALIDATED_HEIGHT}",
            raw.line,
            raw.gamma.to_f64()
        )));
    }
    let rho = HpComplex::new(ctx.float(0.5), raw.gamma.clone());
    let eval = zeta_and_derivative(&rho, ctx)?;
    let modulus = eval.value.abs();
    if !(modulus < ZERO_TOLERANCE) {
        return Err(Error::NotAZero {
            index,
            gamma: raw.gamma.to_f64().to_string(),
            modulus: format!("{:.3e}", modulus.to_f64()),
        });
    }
    if !(eval.derivative.abs() > SIMPLICITY_FLOOR) {
        return Err(Error::MultipleZero {
            index,
            gamma: raw.gamma.to_f64().to_string(),
        });
    }
    let zeta_prime = match &raw.zeta_prime {
        Some(listed) => {
            let diff = (listed - &eval.derivative).abs() / eval.derivative.abs();
            if !(diff <= ZETA_PRIME_TOLERANCE) {
                return Err(Error::ZetaPrimeMismatch {
                    index,
                    relative: format!("{:.3e}", diff.to_f64()),
                });
            }
            if recompute {
                eval.derivative
            } else {
                listed.clone()
            }
        }
        None => eval.derivative,
    };
    Ok(ZeroEntry {
        gamma: raw.gamma.clone(),
        zeta_prime,
        residual_modulus: modulus,
    })
}

/// Parses and validates a zero listing; see [`load_zeros`].
pub fn parse_zeros(text: &str, recompute_zprime: bool, threads: usize, ctx: &PrecisionContext) -> Result<ZeroTable> {
    let raw = parse_lines(text, ctx.bits())?;
    for (i, pair) in raw.windows(2).enumerate() {
        if pair[1].gamma <= pair[0].gamma {
            return Err(Error::NonIncreasingOrdinates {
                index: i + 1,
                value: pair[1].gamma.to_f64().to_string(),
            });
        }
    }
    if let Some(first) = raw.first() {
        if !(first.gamma > 14.1 && first.gamma < 14.2) {
            return Err(Error::FirstOrdinateOutOfWindow(first.gamma.to_f64().to_string()));
        }
    }
    let threads = threads.max(1).min(raw.len().max(1));
    let entries = if threads == 1 {
        raw.iter()
            .enumerate()
            .map(|(i, r)| validate(i, r, recompute_zprime, ctx))
            .collect::<Result<Vec<_>>>()?
    } else {
        let raw = &raw;
        let parts: Vec<Result<Vec<(usize, ZeroEntry)>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    scope.spawn(move || {
                        raw.iter()
                            .enumerate()
                            .filter(|(i, _)| i % threads == t)
                            .map(|(i, r)| validate(i, r, recompute_zprime, ctx).map(|e| (i, e)))
                            .collect()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("zero validation panicked")).collect()
        });
        let mut all = Vec::with_capacity(raw.len());
        for p in parts {
            all.extend(p?);
        }
        all.sort_by_key(|(i, _)| *i);
        all.into_iter().map(|(_, e)| e).collect()
    };
    Ok(ZeroTable {
        entries,
        bits: ctx.bits(),
    })
}

/// Reads `gamma` or `gamma re_zprime im_zprime` lines (`#` starts a comment).
///
/// `zeta'` is always recomputed for the checks; a listed value must agree
/// to `1e-6` relative and is kept unless `recompute_zprime` is set.
pub fn load_zeros(path: &Path, recompute_zprime: bool, ctx: &PrecisionContext) -> Result<ZeroTable> {
    load_zeros_threaded(path, recompute_zprime, 1, ctx)
}

pub fn load_zeros_threaded(path: &Path, recompute_zprime: bool, threads: usize, ctx: &PrecisionContext) -> Result<ZeroTable> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_zeros(&text, recompute_zprime, threads, ctx)
}

/// A real zero sum, accumulated over `rho` and `conj(rho)` separately.
#[derive(Debug, Clone)]
pub struct ZeroSum {
    pub value: Float,
    /// Imaginary part left after adding the conjugate terms.
    pub imaginary_residue: Float,
    pub zeros_used: usize,
}

/// `sum_{|gamma| <= t_max} x^(rho - a) / ((rho - b)^k zeta'(rho))`, ascending
/// in `gamma`.
pub fn zero_sum(table: &ZeroTable, x: &Rational, a: u32, b: u32, k: u32, ctx: &PrecisionContext) -> ZeroSum {
    let bits = ctx.bits() + 16;
    let xf = Float::with_val(bits, x);
    let lx = Float::with_val(bits, xf.ln_ref());
    // x^(1/2 - a)
    let radial = Float::with_val(bits, xf.pow(Float::with_val(bits, 0.5) - a));
    let mut re = Float::new(bits);
    let mut im = Float::new(bits);
    for e in table.entries() {
        let gamma = Float::with_val(bits, &e.gamma);
        let zp = HpComplex::new(Float::with_val(bits, &e.zeta_prime.re), Float::with_val(bits, &e.zeta_prime.im));
        for sign in [1i32, -1] {
            let g = Float::with_val(bits, &gamma * sign);
            let zp = if sign == 1 { zp.clone() } else { zp.conj() };
            let phase = HpComplex::from_polar(&radial, &Float::with_val(bits, &g * &lx));
            let mut denom = zp;
            let base = HpComplex::new(Float::with_val(bits, 0.5) - b, g);
            for _ in 0..k {
                denom = &denom * &base;
            }
            let t = &phase * &denom.recip();
            re += &t.re;
            im += &t.im;
        }
    }
    ZeroSum {
        value: Float::with_val(ctx.bits(), re),
        imaginary_residue: Float::with_val(ctx.bits(), im),
        zeros_used: table.len(),
    }
}

/// The three explicit formulas for Mobius partial sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExplicitSum {
    /// `sum mu(n)/n^2`
    InvSquare,
    /// `sum mu(n)/n^2 log(x/n)`
    InvSquareLog,
    /// `sum mu(n)/n`
    Inv,
}

impl ExplicitSum {
    pub const ALL: [ExplicitSum; 3] = [ExplicitSum::InvSquare, ExplicitSum::InvSquareLog, ExplicitSum::Inv];

    pub fn name(self) -> &'static str {
        match self {
            ExplicitSum::InvSquare => "inv_square",
            ExplicitSum::InvSquareLog => "inv_square_log",
            ExplicitSum::Inv => "inv",
        }
    }
}

impl fmt::Display for ExplicitSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExplicitSum {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown explicit sum `{s}`")))
    }
}

#[derive(Debug, Clone)]
pub struct ExplicitReport {
    pub which: ExplicitSum,
    pub x: Rational,
    /// main + zero part + correction
    pub value: Float,
    pub main: Float,
    pub zero_part: ZeroSum,
    /// The trivial-zero term in `x^-3` or `x^-4`.
    pub correction: Float,
    /// Ordinates beyond this were not summed.
    pub t_max: Float,
    /// Set when no zeros were available.
    pub empty_table: bool,
}

/// Main part, zero sum and trivial-zero correction for one of the three
/// Mobius partial sums.
pub fn explicit_mobius_sums(which: ExplicitSum, x: &Rational, table: &ZeroTable, ctx: &PrecisionContext) -> Result<ExplicitReport> {
    if *x <= 1 {
        return Err(Error::InvalidArgument(format!("explicit formulas need x > 1, got {x}")));
    }
    let bits = ctx.bits();
    let xf = ctx.rational(x);
    let (z2, dz2) = zeta_at_integer(2, ctx)?;
    let (z3, _) = zeta_at_integer(3, ctx)?;
    let pi2 = pi(ctx).square();
    let (main, zero_part, correction) = match which {
        ExplicitSum::InvSquare => (
            Float::with_val(bits, z2.recip_ref()),
            zero_sum(table, x, 2, 2, 1, ctx),
            pi2 / z3 * Float::with_val(bits, (&xf).pow(-4i32)),
        ),
        ExplicitSum::InvSquareLog => (
            (Float::with_val(bits, xf.ln_ref()) - Float::with_val(bits, &dz2 / &z2)) / &z2,
            zero_sum(table, x, 2, 2, 2, ctx),
            -(pi2 / (z3 * 4u32)) * Float::with_val(bits, (&xf).pow(-4i32)),
        ),
        ExplicitSum::Inv => (
            Float::new(bits),
            zero_sum(table, x, 1, 1, 1, ctx),
            pi2 * 4u32 / (z3 * 3u32) * Float::with_val(bits, (&xf).pow(-3i32)),
        ),
    };
    let value = Float::with_val(bits, &main + &zero_part.value) + &correction;
    Ok(ExplicitReport {
        which,
        x: x.clone(),
        value,
        main,
        zero_part,
        correction,
        t_max: table.t_max(),
        empty_table: table.is_empty(),
    })
}

/// `([x] - x)/2`: the part of `M_r(x; id)` carried by `[x]/2` that the
/// zero-sum form of `K_r` leaves out; `-1/4` at half-integers.
pub fn floor_offset(x: &Rational, ctx: &PrecisionContext) -> Result<Float> {
    let n = floor_u64(x)?;
    Ok(ctx.rational(&((Rational::from(n) - x) / 2u32)))
}

/// The zero-sum form of `K_r` at a half-integer `x`:
/// `theorem_side(id) + (2 gamma - 1 + C_odd)/(r+1) Z(2, 2, 1)
///  - C_even/(2(r+1)) Z(1, 1, 1) + 1/(r+1) Z(2, 2, 2)`, each `Z` scaled by `x`
/// as in `x^(rho-1)`.
pub fn theorem13_k(x: &Rational, r: u32, table: &ZeroTable, expansion: &Expansion) -> Result<Float> {
    Ok(theorem13_parts(x, r, table, expansion)?.value)
}

/// `theorem13_k` with its pieces.
#[derive(Debug, Clone)]
pub struct Theorem13Parts {
    pub value: Float,
    pub theorem_side: Float,
    pub zero_terms: Float,
    pub imaginary_residue: Float,
    pub zeros_used: usize,
}

pub fn theorem13_parts(x: &Rational, r: u32, table: &ZeroTable, expansion: &Expansion) -> Result<Theorem13Parts> {
    if !is_half_integer(x) {
        return Err(Error::NotHalfInteger(x.to_string()));
    }
    if expansion.function() != GcdFunction::Id {
        return Err(Error::InvalidArgument("the zero-sum form is for f = id".into()));
    }
    let ctx = *expansion.context();
    let side = expansion.theorem_side(x, r)?;
    if table.is_empty() {
        return Ok(Theorem13Parts {
            value: side.clone(),
            theorem_side: side,
            zero_terms: Float::new(ctx.bits()),
            imaginary_residue: Float::new(ctx.bits()),
            zeros_used: 0,
        });
    }
    let bits = ctx.bits();
    let xf = ctx.rational(x);
    let a = zero_sum(table, x, 2, 2, 1, &ctx);
    let b = zero_sum(table, x, 1, 1, 1, &ctx);
    let c = zero_sum(table, x, 2, 2, 2, &ctx);
    let w = euler_gamma(&ctx) * 2u32 - 1u32 + c_odd(r, &ctx)?;
    let mut zero_terms = w * Float::with_val(bits, &a.value * &xf);
    zero_terms -= c_even(r, &ctx)? * &b.value / 2u32;
    zero_terms += Float::with_val(bits, &c.value * &xf);
    zero_terms /= r + 1;
    let residue = Float::with_val(bits, a.imaginary_residue.clone().abs())
        .max(&Float::with_val(bits, b.imaginary_residue.clone().abs()))
        .max(&Float::with_val(bits, c.imaginary_residue.clone().abs()));
    let mut value = Float::with_val(bits, &side);
    value += &zero_terms;
    Ok(Theorem13Parts {
        value,
        theorem_side: side,
        zero_terms,
        imaginary_residue: residue,
        zeros_used: table.len(),
    })
}

/// `J_-lambda(T) = sum_{0 < gamma <= T} |zeta'(rho)|^(-2 lambda)`.
///
/// An empty table gives `0` for every `T`; otherwise `T` must not exceed the
/// largest ordinate.
pub fn j_minus_lambda(t: f64, lambda: f64, table: &ZeroTable) -> Result<Float> {
    check_jsum(t, lambda, table)?;
    let bits = table.bits;
    let mut acc = Float::new(bits);
    let mut term = Float::new(bits);
    for e in &table.entries[..table.count_upto(t)] {
        jsum_term(e, lambda, &mut term);
        acc += &term;
    }
    Ok(acc)
}

fn check_jsum(t: f64, lambda: f64, table: &ZeroTable) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("T must be positive, got {t}")));
    }
    if !(lambda < 1.5) {
        return Err(Error::InvalidArgument(format!("lambda must be below 3/2, got {lambda}")));
    }
    // T is an f64, so the largest ordinate counts as covered once rounded up
    if !table.is_empty() && table.t_max().to_f64_round(rug::float::Round::Up) < t {
        return Err(Error::BeyondCoverage {
            t: t.to_string(),
            t_max: table.t_max().to_f64().to_string(),
        });
    }
    Ok(())
}

fn jsum_term(e: &ZeroEntry, lambda: f64, out: &mut Float) {
    // |z'|^(-2 lambda) = exp(-lambda log |z'|^2)
    out.assign(e.zeta_prime.norm_sqr().ln());
    *out *= -lambda;
    out.exp_mut();
}

#[derive(Debug, Clone)]
pub struct JsumRow {
    pub t: f64,
    pub j: Float,
    pub count: usize,
    /// `T (log T)^((lambda - 1)^2)`
    pub scale: Float,
    /// `j / scale`, `nan` when `T <= 1`
    pub ratio: Float,
}

/// `J_-lambda` on a grid of `T`, with the normalised ratio.
pub fn jsum_report(tgrid: &[f64], lambda: f64, table: &ZeroTable) -> Result<Vec<JsumRow>> {
    let bits = table.bits;
    let exponent = (lambda - 1.0) * (lambda - 1.0);
    let mut rows = Vec::with_capacity(tgrid.len());
    for &t in tgrid {
        let j = j_minus_lambda(t, lambda, table)?;
        let tf = Float::with_val(bits, t);
        let (scale, ratio) = if t > 1.0 {
            let scale = Float::with_val(bits, tf.ln_ref()).pow(exponent) * tf;
            let ratio = Float::with_val(bits, &j / &scale);
            (scale, ratio)
        } else {
            (Float::with_val(bits, f64::NAN), Float::with_val(bits, f64::NAN))
        };
        rows.push(JsumRow {
            t,
            j,
            count: table.count_upto(t),
            scale,
            ratio,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::sieve_mobius;
    use crate::error_terms::{weighted_partial_sum, Weight};
    use std::path::PathBuf;

    fn ctx() -> PrecisionContext {
        PrecisionContext::default()
    }

    fn data(name: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
    }

    fn first_zeros(n: usize) -> String {
        let text = std::fs::read_to_string(data("zeros_2100.txt")).unwrap();
        text.lines()
            .filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty())
            .take(n)
            .collect::<Vec<_>>()
            .join("\n")
    }

    #[test]
    fn single_zero_file() {
        let c = ctx();
        let t = parse_zeros("14.134725142\n", false, 1, &c).unwrap();
        assert_eq!(t.len(), 1);
        let zp = &t.entries()[0].zeta_prime;
        // listed with the ordinate to 25 digits
        assert!((zp.re.to_f64() - 0.783_296_511_867_031).abs() < 1e-8);
        assert!((zp.im.to_f64() - 0.124_699_829_748_171).abs() < 1e-8);
        assert!((zp.abs().to_f64() - 0.793160433356506).abs() < 1e-8);
    }

    #[test]
    fn empty_and_comment_only_files() {
        let c = ctx();
        let t = parse_zeros("# nothing\n\n", false, 1, &c).unwrap();
        assert!(t.is_empty());
        assert!(t.t_max().is_zero());
        let r = explicit_mobius_sums(ExplicitSum::InvSquare, &Rational::from(1_000_000_000), &t, &c).unwrap();
        assert!(r.empty_table);
        let (z2, _) = zeta_at_integer(2, &c).unwrap();
        assert!((r.value - z2.recip()).abs() < 1e-30);
        assert!(j_minus_lambda(100.0, 0.5, &t).unwrap().is_zero());
    }

    #[test]
    fn rejections() {
        let c = ctx();
        let bad = parse_zeros("14.134725142\n21.022039639\n21.0\n", false, 1, &c).unwrap_err();
        assert!(matches!(bad, Error::NonIncreasingOrdinates { index: 2, .. }), "{bad}");
        let bad = parse_zeros("14.134725142\n# c\nabc\n", false, 1, &c).unwrap_err();
        assert!(matches!(bad, Error::MalformedZeroLine { line: 3, .. }), "{bad}");
        let bad = parse_zeros("14.134725142 1.0\n", false, 1, &c).unwrap_err();
        assert!(matches!(bad, Error::MalformedZeroLine { line: 1, .. }));
        let bad = parse_zeros("14.5\n", false, 1, &c).unwrap_err();
        assert!(matches!(bad, Error::FirstOrdinateOutOfWindow(_)));
        let bad = parse_zeros("14.134725142\n21.5\n", false, 1, &c).unwrap_err();
        assert!(matches!(bad, Error::NotAZero { index: 1, .. }), "{bad}");
        let bad = parse_zeros("14.134725142 0.79 0.12\n", false, 1, &c).unwrap_err();
        assert!(matches!(bad, Error::ZetaPrimeMismatch { index: 0, .. }), "{bad}");
    }

    #[test]
    fn listed_derivatives_agree() {
        let c = ctx();
        let kept = load_zeros(&data("zeros_10_zprime.txt"), false, &c).unwrap();
        let recomputed = load_zeros(&data("zeros_10_zprime.txt"), true, &c).unwrap();
        assert_eq!(kept.len(), 10);
        for (a, b) in kept.entries().iter().zip(recomputed.entries()) {
            let rel = (&a.zeta_prime - &b.zeta_prime).abs() / b.zeta_prime.abs();
            assert!(rel < 1e-20);
        }
    }

    #[test]
    fn threaded_load_matches_sequential() {
        let c = ctx();
        let text = first_zeros(12);
        let a = parse_zeros(&text, false, 1, &c).unwrap();
        let b = parse_zeros(&text, false, 3, &c).unwrap();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            assert_eq!(x.gamma, y.gamma);
            assert_eq!(x.zeta_prime, y.zeta_prime);
        }
    }

    #[test]
    fn conjugate_terms_cancel_imaginary_parts() {
        let c = ctx();
        let t = parse_zeros(&first_zeros(30), false, 1, &c).unwrap();
        for which in ExplicitSum::ALL {
            let r = explicit_mobius_sums(which, &Rational::from((2001, 2)), &t, &c).unwrap();
            assert!(r.zero_part.imaginary_residue.clone().abs() < 1e-40, "{which}");
        }
    }

    #[test]
    fn mertens_over_n_from_zeros() {
        let c = ctx();
        let t = parse_zeros(&first_zeros(120), false, 1, &c).unwrap();
        let x = Rational::from((2001, 2));
        let mu = sieve_mobius(1000).unwrap();
        let exact = weighted_partial_sum(&mu, &x, Weight::Inverse, &c).unwrap().to_float(&c);
        let r = explicit_mobius_sums(ExplicitSum::Inv, &x, &t, &c).unwrap();
        assert!((r.value - exact).abs() < 0.1);
    }

    #[test]
    fn theorem13_empty_table_is_the_theorem_side() {
        let c = ctx();
        let e = Expansion::new(GcdFunction::Id, 200, &c).unwrap();
        let x = Rational::from((201, 2));
        let empty = ZeroTable::empty(&c);
        for r in 1..=3 {
            assert_eq!(theorem13_k(&x, r, &empty, &e).unwrap(), e.theorem_side(&x, r).unwrap());
        }
        assert!(matches!(theorem13_k(&Rational::from(100), 1, &empty, &e), Err(Error::NotHalfInteger(_))));
        assert_eq!(floor_offset(&x, &c).unwrap(), -0.25);
    }

    #[test]
    fn theorem13_tracks_the_residual() {
        let c = ctx();
        let t = parse_zeros(&first_zeros(200), false, 1, &c).unwrap();
        let e = Expansion::new(GcdFunction::Id, 200, &c).unwrap();
        let x = Rational::from((201, 2));
        for r in 1..=2 {
            let k = theorem13_k(&x, r, &t, &e).unwrap() + floor_offset(&x, &c).unwrap();
            let res = e.residual(&x, r).unwrap();
            assert!((k - res).abs() < 0.05, "r = {r}");
        }
    }

    #[test]
    fn jsum_basics() {
        let c = ctx();
        let t = parse_zeros(&first_zeros(40), false, 1, &c).unwrap();
        assert!(j_minus_lambda(14.0, 0.5, &t).unwrap().is_zero());
        let one = j_minus_lambda(15.0, 0.5, &t).unwrap();
        assert!((one.to_f64() - 1.0 / 0.793160433356506).abs() < 1e-9);
        let tm = t.t_max().to_f64_round(rug::float::Round::Up);
        assert_eq!(j_minus_lambda(tm, 0.0, &t).unwrap(), 40);
        assert_eq!(j_minus_lambda(60.0, 0.0, &t).unwrap(), 13);
        assert!(matches!(j_minus_lambda(tm + 1.0, 0.5, &t), Err(Error::BeyondCoverage { .. })));
        assert!(j_minus_lambda(20.0, 1.5, &t).is_err());
        let grid: Vec<f64> = (0..20).map(|i| (10.0 + i as f64 * (tm - 10.0) / 19.0).min(tm)).collect();
        let rows = jsum_report(&grid, 0.5, &t).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].j >= w[0].j);
        }
    }
}
