//! Bernoulli numbers, Euler's constant, the Riemann zeta function and its
//! derivative, and the two error envelopes used for reporting.
//!
//! Zeta is evaluated by Euler–Maclaurin summation,
//!
//! ```text
//! zeta(s) = sum_{n<N} n^-s + N^(1-s)/(s-1) + N^-s/2
//!         + sum_{k=1}^{K} B_2k/(2k)! * s(s+1)...(s+2k-2) * N^(-s-2k+1) + R_K
//! ```
//!
//! and `zeta'(s)` by differentiating every term of the same expansion in `s`.
//! `N` is tied to `|s|` so that consecutive correction terms shrink by at
//! least a factor of four; summation stops once a correction term drops
//! below the working epsilon.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Assign, Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::precision::{HpComplex, PrecisionContext};

/// Exact Bernoulli numbers `B_n` (with `B_1 = -1/2`), filled on demand.
#[derive(Debug, Clone)]
pub struct BernoulliCache {
    values: Vec<Rational>,
}

impl Default for BernoulliCache {
    fn default() -> Self {
        Self {
            values: vec![Rational::from(1)],
        }
    }
}

impl BernoulliCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// `B_n` from `sum_{j=0}^{n} C(n+1, j) B_j = 0`. Odd indices above 1 are 0.
    pub fn get(&mut self, n: u32) -> Rational {
        let n = n as usize;
        if n > 1 && n % 2 == 1 {
            return Rational::new();
        }
        while self.values.len() <= n {
            let k = self.values.len();
            let mut acc = Rational::new();
            let mut binom = Integer::from(1); // C(k+1, 0)
            for (j, bj) in self.values.iter().enumerate() {
                if j > 1 && j % 2 == 1 {
                    // zero term; keep the binomial running
                } else {
                    acc += Rational::from(bj * &binom);
                }
                binom *= (k + 1 - j) as u64;
                binom /= (j + 1) as u64;
            }
            // binom is now C(k+1, k) = k + 1
            self.values.push(-acc / binom);
        }
        self.values[n].clone()
    }
}

fn bernoulli_cache() -> &'static Mutex<BernoulliCache> {
    static CACHE: OnceLock<Mutex<BernoulliCache>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(BernoulliCache::new()))
}

/// Exact `B_n`; `B_1 = -1/2` and `B_n = 0` for odd `n > 1`.
pub fn bernoulli(n: u32) -> Rational {
    bernoulli_cache().lock().expect("bernoulli cache poisoned").get(n)
}

/// `C(r+1, 2m) * B_2m` for `m = 1..=[r/2]`, the weights of the Bernoulli block.
pub fn bernoulli_block(r: u32) -> Vec<(u32, Rational)> {
    (1..=r / 2)
        .map(|m| {
            let binom = Integer::from(Integer::binomial_u(r + 1, 2 * m));
            (m, bernoulli(2 * m) * binom)
        })
        .collect()
}

pub fn pi(ctx: &PrecisionContext) -> Float {
    Float::with_val(ctx.bits(), Constant::Pi)
}

/// Euler's constant by the Brent–McMillan scheme; truncation error is
/// below `pi * exp(-4n)` with `n` chosen from the target precision.
pub fn euler_gamma(ctx: &PrecisionContext) -> Float {
    static MEMO: OnceLock<Mutex<HashMap<u32, Float>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = memo.lock().expect("memo poisoned").get(&ctx.bits()) {
        return v.clone();
    }
    let bits = ctx.bits();
    let n = (f64::from(bits + 4) * std::f64::consts::LN_2 / 4.0).ceil() as u64 + 1;
    let wp = bits + 3 * n as u32 + 32;
    let n2 = Float::with_val(wp, n * n);
    let mut a = -Float::with_val(wp, Float::ln_u(n as u32));
    let mut b = Float::with_val(wp, 1);
    let mut u = a.clone();
    let mut v = b.clone();
    let eps = Float::with_val(wp, Float::i_exp(1, -(wp as i32)));
    let mut k = 1u64;
    loop {
        b *= &n2;
        b /= k * k;
        a *= &n2;
        a /= k;
        a += &b;
        a /= k;
        u += &a;
        v += &b;
        if k > 3 * n && b < Float::with_val(wp, &v * &eps) {
            break;
        }
        k += 1;
    }
    let g = Float::with_val(bits, u / v);
    memo.lock().expect("memo poisoned").insert(bits, g.clone());
    g
}

/// `B_2k / (2k)!` for `k = 1..=count`, cached per precision.
pub(crate) fn em_coefficients(prec: u32, count: usize) -> Vec<Float> {
    static MEMO: OnceLock<Mutex<HashMap<u32, Vec<Float>>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    {
        let guard = memo.lock().expect("memo poisoned");
        if let Some(v) = guard.get(&prec) {
            if v.len() >= count {
                return v[..count].to_vec();
            }
        }
    }
    let mut fact = Integer::from(1);
    let mut out = Vec::with_capacity(count);
    for k in 1..=count as u32 {
        fact *= (2 * k - 1) * (2 * k);
        let c = bernoulli(2 * k) / Rational::from(&fact);
        out.push(Float::with_val(prec, &c));
    }
    memo.lock().expect("memo poisoned").insert(prec, out.clone());
    out
}

/// A zeta evaluation with a flag telling whether `s` lies in the region
/// where the Euler–Maclaurin parameters have been checked.
#[derive(Debug, Clone)]
pub struct ZetaEvaluation {
    pub value: HpComplex,
    pub derivative: HpComplex,
    pub validated: bool,
}

/// Height up to which complex evaluations are considered validated.
pub const VALIDATED_HEIGHT: f64 = 5000.0;

fn complex_from_parts(prec: u32, re: &Float, im: &Float) -> HpComplex {
    HpComplex::new(Float::with_val(prec, re), Float::with_val(prec, im))
}

/// `zeta(s)` and `zeta'(s)` together from one Euler–Maclaurin pass.
pub fn zeta_and_derivative(s: &HpComplex, ctx: &PrecisionContext) -> Result<ZetaEvaluation> {
    if s.im.is_zero() && s.re == 1 {
        return Err(Error::Pole);
    }
    let bits = ctx.bits();
    let modulus = s.abs().to_f64();
    let wp = bits + (modulus + 2.0).log2().ceil() as u32 + 16;
    let s = complex_from_parts(wp, &s.re, &s.im);
    let digits = ctx.digits() as usize;
    let n_terms = (modulus / std::f64::consts::PI).ceil() as u64 + 2 * digits as u64 + 10;
    let k_cap = 3 * digits + 20;
    let coeffs = em_coefficients(wp, k_cap);

    let is_real = s.im.is_zero();
    let mut sum = HpComplex::zero(wp);
    let mut dsum = HpComplex::zero(wp);
    let neg_sigma = Float::with_val(wp, -&s.re);
    let neg_t = Float::with_val(wp, -&s.im);
    let mut ln_n = Float::new(wp);
    let mut mag = Float::new(wp);
    let mut angle = Float::new(wp);
    let mut cos = Float::new(wp);
    let mut term = HpComplex::zero(wp);
    let mut tmp = Float::new(wp);
    for n in 2..n_terms {
        ln_n.assign(Float::ln_u(n as u32));
        mag.assign(&neg_sigma * &ln_n);
        mag.exp_mut();
        if is_real {
            term.re.assign(&mag);
            term.im.assign(0);
        } else {
            angle.assign(&neg_t * &ln_n);
            angle.sin_cos_mut(&mut cos);
            term.re.assign(&mag * &cos);
            term.im.assign(&mag * &angle);
        }
        sum.add_assign_ref(&term);
        tmp.assign(&term.re * &ln_n);
        dsum.re -= &tmp;
        tmp.assign(&term.im * &ln_n);
        dsum.im -= &tmp;
    }
    sum.re += 1;

    // N^-s
    let big_n = n_terms;
    let ln_big_n = Float::with_val(wp, Float::ln_u(big_n as u32));
    let n_pow = {
        let m = Float::with_val(wp, &neg_sigma * &ln_big_n).exp();
        if is_real {
            HpComplex::from_real(m)
        } else {
            HpComplex::from_polar(&m, &Float::with_val(wp, &neg_t * &ln_big_n))
        }
    };
    let one = HpComplex::from_real(Float::with_val(wp, 1));
    let s_minus_1 = &s - &one;
    let inv_s_minus_1 = s_minus_1.recip();

    // N^(1-s)/(s-1)
    let tail_a = &n_pow.scale(&Float::with_val(wp, big_n)) * &inv_s_minus_1;
    let neg_ln = HpComplex::from_real(Float::with_val(wp, -&ln_big_n));
    let d_tail_a = &tail_a * &(&neg_ln - &inv_s_minus_1);
    // N^-s / 2
    let tail_b = n_pow.scale(&Float::with_val(wp, 0.5));
    let d_tail_b = tail_b.scale(&Float::with_val(wp, -&ln_big_n));
    sum.add_assign_ref(&tail_a);
    sum.add_assign_ref(&tail_b);
    dsum.add_assign_ref(&d_tail_a);
    dsum.add_assign_ref(&d_tail_b);

    let scale = tail_a.abs().max(&Float::with_val(wp, 1));
    let eps = Float::with_val(wp, Float::i_exp(1, -(bits as i32) - 4)) * &scale;
    let ln_big_n_c = HpComplex::from_real(ln_big_n.clone());
    // rising factorial (s)_{2k-1} and its derivative
    let mut rising = s.clone();
    let mut d_rising = HpComplex::from_real(Float::with_val(wp, 1));
    let n_sq_inv = Float::with_val(wp, Float::with_val(wp, big_n).square().recip());
    let mut n_scale = Float::with_val(wp, big_n).recip();
    let mut converged = false;
    for (k, c) in coeffs.iter().enumerate() {
        let weight = Float::with_val(wp, c * &n_scale);
        let base = n_pow.scale(&weight);
        let t = &rising * &base;
        let dt = &(&d_rising - &(&rising * &ln_big_n_c)) * &base;
        sum.add_assign_ref(&t);
        dsum.add_assign_ref(&dt);
        if t.abs() < eps && dt.abs() < Float::with_val(wp, &eps * (&ln_big_n + Float::with_val(wp, 1))) {
            converged = true;
            break;
        }
        let k = k as u32 + 1;
        for j in [2 * k - 1, 2 * k] {
            let f = &s + &HpComplex::from_real(Float::with_val(wp, j));
            d_rising = &(&d_rising * &f) + &rising;
            rising = &rising * &f;
        }
        n_scale *= &n_sq_inv;
    }
    let validated = converged && s.re > 0 && s.re < 2 && modulus <= VALIDATED_HEIGHT
        || converged && is_real && s.re > 1;
    Ok(ZetaEvaluation {
        value: complex_from_parts(bits, &sum.re, &sum.im),
        derivative: complex_from_parts(bits, &dsum.re, &dsum.im),
        validated,
    })
}

/// `zeta(s)` for complex `s != 1`.
pub fn zeta_complex(s: &HpComplex, ctx: &PrecisionContext) -> Result<(HpComplex, bool)> {
    let e = zeta_and_derivative(s, ctx)?;
    Ok((e.value, e.validated))
}

/// `zeta'(s)` for complex `s != 1`.
pub fn zeta_prime_complex(s: &HpComplex, ctx: &PrecisionContext) -> Result<(HpComplex, bool)> {
    let e = zeta_and_derivative(s, ctx)?;
    Ok((e.derivative, e.validated))
}

fn real_argument(s: &Float) -> Result<HpComplex> {
    if *s <= 1 {
        return Err(Error::InvalidArgument(format!("real zeta needs s > 1, got {s}")));
    }
    Ok(HpComplex::from_real(s.clone()))
}

/// `zeta(s)` for real `s > 1`.
pub fn zeta_real(s: &Float, ctx: &PrecisionContext) -> Result<Float> {
    Ok(zeta_and_derivative(&real_argument(s)?, ctx)?.value.re)
}

/// `zeta'(s)` for real `s > 1`.
pub fn zeta_prime_real(s: &Float, ctx: &PrecisionContext) -> Result<Float> {
    Ok(zeta_and_derivative(&real_argument(s)?, ctx)?.derivative.re)
}

/// `(zeta(k), zeta'(k))` at an integer `k >= 2`, memoized per precision.
pub fn zeta_at_integer(k: u32, ctx: &PrecisionContext) -> Result<(Float, Float)> {
    static MEMO: OnceLock<Mutex<HashMap<(u32, u32), (Float, Float)>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (k, ctx.bits());
    if let Some(v) = memo.lock().expect("memo poisoned").get(&key) {
        return Ok(v.clone());
    }
    let e = zeta_and_derivative(&HpComplex::from_real(ctx.float(k)), ctx)?;
    let v = (e.value.re, e.derivative.re);
    memo.lock().expect("memo poisoned").insert(key, v.clone());
    Ok(v)
}

fn check_envelope_domain(x: &Float) -> Result<()> {
    if *x <= 5 {
        return Err(Error::InvalidArgument(format!("envelopes need x > 5, got {x}")));
    }
    Ok(())
}

/// `exp(-C (log x)^(3/5) / (log log x)^(1/5))`
pub fn delta_envelope(x: &Float, c: f64) -> Result<Float> {
    check_envelope_domain(x)?;
    let p = x.prec();
    let lx = Float::with_val(p, x.ln_ref());
    let llx = Float::with_val(p, lx.ln_ref());
    let num = Float::with_val(p, (&lx).pow(0.6));
    let den = Float::with_val(p, (&llx).pow(0.2));
    Ok((-(num / den) * c).exp())
}

/// `log eta(x) = (log x)^(1/2) (log log x)^14`; eta itself overflows.
pub fn log_eta_envelope(x: &Float) -> Result<Float> {
    check_envelope_domain(x)?;
    let p = x.prec();
    let lx = Float::with_val(p, x.ln_ref());
    let llx = Float::with_val(p, lx.ln_ref());
    Ok(lx.sqrt() * llx.pow(14u32))
}
