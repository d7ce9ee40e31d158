//! Exact checks of the convolution identities
//!
//! `(a/id) * 1 = (c/id) * tau` and `(a/id) * id_-2m = (c/id) * sigma_-2m`
//!
//! for `(a, c) = (phi, mu), (mu*phi, mu*mu), (mu*psi, mu*|mu|)`, in their
//! summatory forms. Every rational is scaled to a common denominator once so
//! the comparisons are between integers.

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::Serialize;

use super::{lcm_upto, tau_summatory};
use crate::arith::{dirichlet_convolve, IntTable, PrimeSieve};
use crate::error::{Error, Result};

/// `S_m(n) = sum_{k <= n} sigma_-2m(k)` for all `n` up to a limit, scaled by
/// `lcm(1..limit)^2m`.
#[derive(Debug, Clone)]
pub struct ScaledSigma {
    m: u32,
    scale: Integer,
    // harmonic[q] = scale * sum_{l <= q} l^-2m
    harmonic: Vec<Integer>,
}

impl ScaledSigma {
    pub fn new(m: u32, limit: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be at least 1".into()));
        }
        let lcm = lcm_upto(limit);
        let scale = Integer::from((&lcm).pow(2 * m));
        let mut harmonic = Vec::with_capacity(limit as usize + 1);
        let mut acc = Integer::new();
        harmonic.push(acc.clone());
        for l in 1..=limit {
            acc += Integer::from(lcm.div_exact_ref(&Integer::from(l))).pow(2 * m);
            harmonic.push(acc.clone());
        }
        Ok(Self { m, scale, harmonic })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn limit(&self) -> u64 {
        self.harmonic.len() as u64 - 1
    }

    pub fn scale(&self) -> &Integer {
        &self.scale
    }

    /// `scale * H_2m(q)`
    pub fn harmonic_scaled(&self, q: u64) -> &Integer {
        &self.harmonic[q as usize]
    }

    /// `scale * S_m(n)` by the hyperbola method:
    /// `sum_{k <= s} k^-2m [n/k] + sum_{d <= s} H([n/d]) - s H(s)`.
    pub fn summatory_scaled(&self, n: u64) -> Integer {
        assert!(n <= self.limit(), "n = {n} beyond the scaled table");
        let s = n.isqrt();
        let mut acc = Integer::new();
        for k in 1..=s {
            let w = Integer::from(&self.harmonic[k as usize] - &self.harmonic[k as usize - 1]);
            acc += w * (n / k);
            acc += &self.harmonic[(n / k) as usize];
        }
        acc -= Integer::from(&self.harmonic[s as usize] * s);
        acc
    }

    pub fn summatory(&self, n: u64) -> Rational {
        Rational::from((self.summatory_scaled(n), self.scale.clone()))
    }
}

/// The three identities, named after the functions on their left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaIdentity {
    /// `a = phi`, `c = mu`
    Totient,
    /// `a = mu*phi`, `c = mu*mu`
    MuTotient,
    /// `a = mu*psi`, `c = mu*|mu|`
    MuDedekind,
}

impl LemmaIdentity {
    pub const ALL: [LemmaIdentity; 3] = [LemmaIdentity::Totient, LemmaIdentity::MuTotient, LemmaIdentity::MuDedekind];

    pub fn name(self) -> &'static str {
        match self {
            LemmaIdentity::Totient => "phi|mu",
            LemmaIdentity::MuTotient => "mu*phi|mu*mu",
            LemmaIdentity::MuDedekind => "mu*psi|mu*absmu",
        }
    }

    /// `(a, c)` on `1..=limit`.
    pub fn tables(self, sieve: &PrimeSieve) -> Result<(IntTable, IntTable)> {
        let mu = sieve.mobius();
        Ok(match self {
            LemmaIdentity::Totient => (sieve.totient(), mu),
            LemmaIdentity::MuTotient => (
                dirichlet_convolve(&mu, &sieve.totient())?,
                dirichlet_convolve(&mu, &mu)?,
            ),
            LemmaIdentity::MuDedekind => (
                dirichlet_convolve(&mu, &sieve.dedekind())?,
                dirichlet_convolve(&mu, &sieve.abs_mobius())?,
            ),
        })
    }
}

impl fmt::Display for LemmaIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `tau` or `sigma_-2m` as the inner summatory function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Inner {
    Tau,
    Sigma(u32),
}

impl fmt::Display for Inner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inner::Tau => f.write_str("tau"),
            Inner::Sigma(m) => write!(f, "sigma_-{}", 2 * m),
        }
    }
}

impl FromStr for Inner {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "tau" {
            return Ok(Inner::Tau);
        }
        let m = s
            .strip_prefix("sigma")
            .and_then(|rest| rest.trim_start_matches(['_', '-']).parse::<u32>().ok())
            .filter(|&v| v >= 2 && v % 2 == 0)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown inner function `{s}`")))?;
        Ok(Inner::Sigma(m / 2))
    }
}

/// The three evaluations of the summatory identity at one `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentitySides {
    /// `sum_{n <= x} sum_{dl = n} a(d)/d * w(l)` with `w = 1` or `l^-2m`
    pub by_n: Rational,
    /// `sum_{d <= x} a(d)/d * W(x/d)` with `W = floor` or `H_2m`
    pub left: Rational,
    /// `sum_{d <= x} c(d)/d * F(x/d)` with `F = D` or `S_m`
    pub right: Rational,
}

impl IdentitySides {
    pub fn all_equal(&self) -> bool {
        self.by_n == self.left && self.left == self.right
    }
}

/// Outcome of a sweep over `x = 1..=x_max`.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub lemma: LemmaIdentity,
    pub inner: Inner,
    pub x_max: u64,
    pub checked: u64,
    pub first_mismatch: Option<u64>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.first_mismatch.is_none() && self.checked == self.x_max
    }
}

struct Scaled {
    // common denominator of every value below
    denominator: Integer,
    // prefix sums of a(d) * L/d and c(d) * L/d
    a_prefix: Vec<Integer>,
    c_prefix: Vec<Integer>,
    a: IntTable,
    share: Vec<Integer>,
    sieve: PrimeSieve,
    inner_scale: Integer,
    sigma: Option<ScaledSigma>,
    // scale * S_m(q) for every q, each from the hyperbola
    sigma_table: Vec<Integer>,
}

impl Scaled {
    fn new(lemma: LemmaIdentity, inner: Inner, x_max: u64) -> Result<Self> {
        let sieve = PrimeSieve::new(x_max as usize)?;
        let (a, c) = lemma.tables(&sieve)?;
        let lcm = lcm_upto(x_max);
        let share: Vec<Integer> = std::iter::once(Integer::new())
            .chain((1..=x_max).map(|d| Integer::from(lcm.div_exact_ref(&Integer::from(d)))))
            .collect();
        let prefix = |t: &IntTable| {
            let mut acc = Integer::new();
            let mut out = Vec::with_capacity(x_max as usize + 1);
            out.push(acc.clone());
            for d in 1..=x_max as usize {
                let v = *t.get(d);
                if v != 0 {
                    acc += Integer::from(&share[d] * v);
                }
                out.push(acc.clone());
            }
            out
        };
        let a_prefix = prefix(&a);
        let c_prefix = prefix(&c);
        let sigma = match inner {
            Inner::Tau => None,
            Inner::Sigma(m) => Some(ScaledSigma::new(m, x_max)?),
        };
        let inner_scale = sigma.as_ref().map_or(Integer::from(1), |s| s.scale().clone());
        let sigma_table = sigma
            .as_ref()
            .map_or_else(Vec::new, |s| (0..=x_max).map(|q| s.summatory_scaled(q)).collect());
        Ok(Self {
            denominator: Integer::from(&lcm * &inner_scale),
            a_prefix,
            c_prefix,
            a,
            share,
            sieve,
            inner_scale,
            sigma,
            sigma_table,
        })
    }

    /// `sum_{d <= n} (prefix[d] - prefix[d-1]) * inner(floor(n/d))`
    fn grouped(prefix: &[Integer], n: u64, inner: impl Fn(u64) -> Integer) -> Integer {
        let mut acc = Integer::new();
        let mut d = 1u64;
        while d <= n {
            let q = n / d;
            let last = n / q;
            let block = Integer::from(&prefix[last as usize] - &prefix[d as usize - 1]);
            if block != 0 {
                acc += block * inner(q);
            }
            d = last + 1;
        }
        acc
    }

    fn left(&self, n: u64) -> Integer {
        match &self.sigma {
            None => Self::grouped(&self.a_prefix, n, Integer::from),
            Some(s) => Self::grouped(&self.a_prefix, n, |q| s.harmonic_scaled(q).clone()),
        }
    }

    fn right(&self, n: u64) -> Integer {
        match &self.sigma {
            None => Self::grouped(&self.c_prefix, n, |q| Integer::from(tau_summatory(q))),
            Some(_) => Self::grouped(&self.c_prefix, n, |q| self.sigma_table[q as usize].clone()),
        }
    }

    /// `sum_{dl = n} a(d) (L/d) * scale * w(l)`
    fn at(&self, n: u64) -> Integer {
        let mut acc = Integer::new();
        for d in divisors(&self.sieve, n) {
            let v = *self.a.get(d as usize);
            if v == 0 {
                continue;
            }
            let l = n / d;
            let w = match &self.sigma {
                None => self.inner_scale.clone(),
                Some(s) => Integer::from(s.harmonic_scaled(l) - s.harmonic_scaled(l - 1)),
            };
            acc += Integer::from(&self.share[d as usize] * v) * w;
        }
        acc
    }
}

fn divisors(sieve: &PrimeSieve, n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, a) in sieve.factorize(n as usize) {
        let len = out.len();
        let mut pk = 1u64;
        for _ in 0..a {
            pk *= p;
            for i in 0..len {
                out.push(out[i] * pk);
            }
        }
    }
    out
}

/// The three sides at a single integer or rational `x >= 1`.
pub fn identity_sides(lemma: LemmaIdentity, inner: Inner, x: &Rational) -> Result<IdentitySides> {
    if *x < 1 {
        return Err(Error::InvalidArgument(format!("x must be at least 1, got {x}")));
    }
    let n = crate::precision::floor_u64(x)?;
    let s = Scaled::new(lemma, inner, n)?;
    let mut by_n = Integer::new();
    for k in 1..=n {
        by_n += s.at(k);
    }
    let q = |v: Integer| Rational::from((v, s.denominator.clone()));
    Ok(IdentitySides {
        by_n: q(by_n),
        left: q(s.left(n)),
        right: q(s.right(n)),
    })
}

/// Sweeps `x = 1..=x_max`, comparing the three sides at every step.
pub fn check_identity(lemma: LemmaIdentity, inner: Inner, x_max: u64) -> Result<IdentityCheck> {
    if x_max == 0 {
        return Err(Error::InvalidLimit);
    }
    let s = Scaled::new(lemma, inner, x_max)?;
    let mut by_n = Integer::new();
    let mut first_mismatch = None;
    let mut checked = 0;
    for n in 1..=x_max {
        by_n += s.at(n);
        let left = s.left(n);
        if left != by_n || s.right(n) != left {
            first_mismatch = Some(n);
            break;
        }
        checked = n;
    }
    Ok(IdentityCheck {
        lemma,
        inner,
        x_max,
        checked,
        first_mismatch,
    })
}
