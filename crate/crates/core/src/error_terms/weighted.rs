//! `sum_{d <= x} c(d)/d * Delta(x/d)` and `sum_{d <= x} c(d)/d * Delta_-2m(x/d)`.
//!
//! Three evaluations: a per-`d` loop over the hyperbola-evaluated error
//! terms, a per-`d` loop over sieve prefix sums, and a single pass that
//! expands each `Delta(x/d)` into its summatory and smooth parts and walks
//! `d` downward so that `floor(x/d)` only ever increases.

use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};

use super::{check_x, delta, delta_minus, require};
use crate::arith::{IntTable, PrimeSieve};
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;
use crate::special::{euler_gamma, zeta_at_integer};

/// Which error term the coefficients multiply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeltaKind {
    Delta,
    /// `Delta_-2m` with `m >= 1`
    DeltaMinus(u32),
}

impl DeltaKind {
    fn check(self) -> Result<()> {
        if self == DeltaKind::DeltaMinus(0) {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-`d` loop with each error term evaluated on the hyperbola.
pub fn weighted_delta_sum(coeffs: &IntTable, x: &Rational, kind: DeltaKind, ctx: &PrecisionContext) -> Result<Float> {
    kind.check()?;
    let n = check_x(x)?;
    require(coeffs, n)?;
    let mut acc = Float::new(ctx.bits());
    for d in 1..=n {
        let c = *coeffs.get(d as usize);
        if c == 0 {
            continue;
        }
        let xd = Rational::from(x / d);
        let v = match kind {
            DeltaKind::Delta => delta(&xd, ctx)?,
            DeltaKind::DeltaMinus(m) => delta_minus(m, &xd, ctx)?,
        };
        acc += v * c / d;
    }
    Ok(acc)
}

/// Per-`d` loop with the summatory functions read off sieve prefix sums.
pub fn weighted_delta_sum_naive(
    coeffs: &IntTable,
    x: &Rational,
    kind: DeltaKind,
    ctx: &PrecisionContext,
) -> Result<Float> {
    kind.check()?;
    let n = check_x(x)?;
    require(coeffs, n)?;
    let bits = ctx.bits();
    let sieve = PrimeSieve::new(n as usize)?;
    let xf = ctx.rational(x);
    let summatory: Vec<Float> = match kind {
        DeltaKind::Delta => {
            let mut acc = 0i64;
            std::iter::once(Float::new(bits))
                .chain(sieve.tau().values().iter().map(|t| {
                    acc += t;
                    Float::with_val(bits, acc)
                }))
                .collect()
        }
        DeltaKind::DeltaMinus(m) => {
            let mut acc = Float::new(bits);
            std::iter::once(Float::new(bits))
                .chain(sieve.sigma_minus(m).values().iter().map(|s| {
                    acc += s;
                    acc.clone()
                }))
                .collect()
        }
    };
    let gamma_part = euler_gamma(ctx) * 2u32 - 1u32;
    let mut acc = Float::new(bits);
    for d in 1..=n {
        let c = *coeffs.get(d as usize);
        if c == 0 {
            continue;
        }
        let q = (n / d) as usize;
        let xd = Float::with_val(bits, &xf / d);
        let err = match kind {
            DeltaKind::Delta => {
                let smooth = Float::with_val(bits, xd.ln_ref()) + &gamma_part;
                Float::with_val(bits, &summatory[q] - smooth * &xd)
            }
            DeltaKind::DeltaMinus(m) => {
                let (z_odd, _) = zeta_at_integer(2 * m + 1, ctx)?;
                let (z_even, _) = zeta_at_integer(2 * m, ctx)?;
                Float::with_val(bits, &summatory[q] - z_odd * &xd) + z_even / 2u32
            }
        };
        acc += err * c / d;
    }
    Ok(acc)
}

/// Tables shared by every single-pass evaluation up to `limit`.
#[derive(Debug, Clone)]
pub struct DivisorSums {
    sieve: PrimeSieve,
    tau_prefix: Vec<u64>,
    prime_logs: Vec<Float>,
    ctx: PrecisionContext,
}

/// The pieces of one single-pass evaluation at `x`.
///
/// With `P1 = sum c(d)/d`, `P2 = sum c(d)/d^2`, `PL = sum c(d) log d/d^2`:
/// `sum c(d)/d Delta(x/d) = T - x (log x + 2 gamma - 1) P2 + x PL` and
/// `sum c(d)/d Delta_-2m(x/d) = S_m - zeta(1+2m) x P2 + zeta(2m)/2 P1`.
#[derive(Debug, Clone)]
pub struct WeightedSums {
    pub x: Rational,
    /// `T = sum c(d)/d D(x/d)`
    pub tau_part: Float,
    /// `sum c(d)/d S_m(x/d)` for `m = 1..`
    pub sigma_parts: Vec<Float>,
    pub p1: Float,
    pub p2: Float,
    pub pl: Float,
}

impl WeightedSums {
    pub fn delta(&self, ctx: &PrecisionContext) -> Float {
        let bits = ctx.bits();
        let xf = ctx.rational(&self.x);
        let smooth = Float::with_val(bits, xf.ln_ref()) + euler_gamma(ctx) * 2u32 - 1u32;
        let mut out = Float::with_val(bits, &self.tau_part);
        out -= smooth * &xf * &self.p2;
        out += xf * &self.pl;
        out
    }

    pub fn delta_minus(&self, m: u32, ctx: &PrecisionContext) -> Result<Float> {
        if m == 0 || m as usize > self.sigma_parts.len() {
            return Err(Error::InvalidArgument(format!(
                "m = {m} outside the evaluated range 1..={}",
                self.sigma_parts.len()
            )));
        }
        let (z_odd, _) = zeta_at_integer(2 * m + 1, ctx)?;
        let (z_even, _) = zeta_at_integer(2 * m, ctx)?;
        let mut out = Float::with_val(ctx.bits(), &self.sigma_parts[m as usize - 1]);
        out -= z_odd * ctx.rational(&self.x) * &self.p2;
        out += z_even * &self.p1 / 2u32;
        Ok(out)
    }

    pub fn value(&self, kind: DeltaKind, ctx: &PrecisionContext) -> Result<Float> {
        match kind {
            DeltaKind::Delta => Ok(self.delta(ctx)),
            DeltaKind::DeltaMinus(m) => self.delta_minus(m, ctx),
        }
    }
}

impl DivisorSums {
    pub fn new(limit: usize, ctx: &PrecisionContext) -> Result<Self> {
        Self::from_sieve(PrimeSieve::new(limit)?, ctx)
    }

    pub fn from_sieve(sieve: PrimeSieve, ctx: &PrecisionContext) -> Result<Self> {
        let bits = ctx.bits();
        let mut tau_prefix = Vec::with_capacity(sieve.limit() + 1);
        tau_prefix.push(0u64);
        let mut acc = 0u64;
        for &t in sieve.tau().values() {
            acc += t as u64;
            tau_prefix.push(acc);
        }
        let prime_logs = sieve
            .primes()
            .iter()
            .map(|&p| Float::with_val(bits, Float::ln_u(p)))
            .collect();
        Ok(Self {
            sieve,
            tau_prefix,
            prime_logs,
            ctx: *ctx,
        })
    }

    pub fn limit(&self) -> usize {
        self.sieve.limit()
    }

    pub fn sieve(&self) -> &PrimeSieve {
        &self.sieve
    }

    pub fn context(&self) -> &PrecisionContext {
        &self.ctx
    }

    /// `D(q)` from the sieve.
    pub fn divisor_summatory(&self, q: usize) -> u64 {
        self.tau_prefix[q]
    }

    /// `log n` from the cached prime logarithms.
    pub fn ln_into(&self, mut n: usize, out: &mut Float) {
        out.assign(0);
        while n > 1 {
            let p = self.sieve.smallest_prime_factor(n);
            let mut a = 0u32;
            while n.is_multiple_of(p as usize) {
                n /= p as usize;
                a += 1;
            }
            let idx = self.sieve.primes().binary_search(&p).expect("spf is prime");
            if a == 1 {
                *out += &self.prime_logs[idx];
            } else {
                *out += Float::with_val(out.prec(), &self.prime_logs[idx] * a);
            }
        }
    }

    /// `sigma_-2m(k) = sigma_2m(k) / k^2m`.
    fn sigma_into(&self, k: usize, m: u32, out: &mut Float, scratch: &mut Float) {
        let small = (|| {
            let mut num: u128 = 1;
            let mut rest = k;
            while rest > 1 {
                let p = self.sieve.smallest_prime_factor(rest) as u128;
                let pm = p.checked_pow(2 * m)?;
                let mut term: u128 = 1;
                let mut power: u128 = 1;
                while rest.is_multiple_of(p as usize) {
                    rest /= p as usize;
                    power = power.checked_mul(pm)?;
                    term = term.checked_add(power)?;
                }
                num = num.checked_mul(term)?;
            }
            let den = (k as u128).checked_pow(2 * m)?;
            Some((num, den))
        })();
        match small {
            Some((num, den)) => {
                out.assign(num);
                scratch.assign(den);
            }
            None => {
                let mut num = Integer::from(1);
                for (p, a) in self.sieve.factorize(k) {
                    let pm = Integer::from(p).pow(2 * m);
                    let mut term = Integer::from(1);
                    let mut power = Integer::from(1);
                    for _ in 0..a {
                        power *= &pm;
                        term += &power;
                    }
                    num *= term;
                }
                out.assign(&num);
                scratch.assign(Integer::from(k).pow(2 * m));
            }
        }
        *out /= &*scratch;
    }

    /// One pass over `d = floor(x), ..., 1` collecting every piece needed
    /// for `Delta` and `Delta_-2m`, `m <= max_m`.
    pub fn sums(&self, coeffs: &IntTable, x: &Rational, max_m: u32) -> Result<WeightedSums> {
        let n = check_x(x)?;
        require(coeffs, n)?;
        if n as usize > self.limit() {
            return Err(Error::TableTooSmall {
                value: x.to_string(),
                needed: n as usize,
                limit: self.limit(),
            });
        }
        let bits = self.ctx.bits();
        let zero = || Float::new(bits);
        let mut tau_part = zero();
        let mut p1 = zero();
        let mut p2 = zero();
        let mut pl = zero();
        let mut sigma_parts = vec![zero(); max_m as usize];
        let mut running = vec![zero(); max_m as usize];
        let (mut t1, mut t2, mut tmp, mut scratch, mut lg) = (zero(), zero(), zero(), zero(), zero());
        let mut k_done = 0usize;
        for d in (1..=n as usize).rev() {
            let q = n as usize / d;
            while k_done < q {
                k_done += 1;
                for (m, s) in running.iter_mut().enumerate() {
                    self.sigma_into(k_done, m as u32 + 1, &mut tmp, &mut scratch);
                    *s += &tmp;
                }
            }
            let c = *coeffs.get(d);
            if c == 0 {
                continue;
            }
            t1.assign(c);
            t1 /= d as u64;
            p1 += &t1;
            tmp.assign(&t1 * self.tau_prefix[q]);
            tau_part += &tmp;
            for (part, s) in sigma_parts.iter_mut().zip(&running) {
                tmp.assign(&t1 * s);
                *part += &tmp;
            }
            t2.assign(&t1 / d as u64);
            p2 += &t2;
            if d > 1 {
                self.ln_into(d, &mut lg);
                lg *= &t2;
                pl += &lg;
            }
        }
        Ok(WeightedSums {
            x: x.clone(),
            tau_part,
            sigma_parts,
            p1,
            p2,
            pl,
        })
    }
}
