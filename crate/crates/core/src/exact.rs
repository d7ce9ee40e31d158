//! Exact rational evaluation of the gcd-sum average
//!
//! `M_r(x; f) = sum_{k <= x} k^-(r+1) sum_{j <= k} j^r f(gcd(j, k))`
//!
//! by brute force and through its Bernoulli-polynomial expansion
//!
//! `1/2 sum f(n)/n + 1/(r+1) sum_{dl <= x} g(d)/d
//!    + 1/(r+1) sum_m C(r+1, 2m) B_2m sum_{dl <= x} g(d) / (d l^2m)`
//!
//! with `g = mu * f`. Only `floor(x)` matters to either side.

use std::fmt;
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::arith::{dirichlet_convolve, IntTable, PrimeSieve};
use crate::error::{Error, Result};
use crate::precision::floor_u64;
use crate::special::bernoulli_block;

/// The three weights the averages are studied for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GcdFunction {
    Id,
    Phi,
    Psi,
}

impl GcdFunction {
    pub const ALL: [GcdFunction; 3] = [GcdFunction::Id, GcdFunction::Phi, GcdFunction::Psi];

    pub fn name(self) -> &'static str {
        match self {
            GcdFunction::Id => "id",
            GcdFunction::Phi => "phi",
            GcdFunction::Psi => "psi",
        }
    }
}

impl fmt::Display for GcdFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GcdFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "id" => Ok(GcdFunction::Id),
            "phi" | "totient" => Ok(GcdFunction::Phi),
            "psi" | "dedekind" => Ok(GcdFunction::Psi),
            other => Err(Error::UnknownFunction(other.to_string())),
        }
    }
}

/// A point `(x, r, f)` at which `M_r(x; f)` is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    x: Rational,
    r: u32,
    f: GcdFunction,
}

impl EvalPoint {
    pub fn new(x: Rational, r: u32, f: GcdFunction) -> Result<Self> {
        if x < 1 {
            return Err(Error::InvalidArgument(format!("x must be at least 1, got {x}")));
        }
        if r == 0 {
            return Err(Error::InvalidArgument("r must be a positive integer".into()));
        }
        floor_u64(&x)?;
        Ok(Self { x, r, f })
    }

    pub fn x(&self) -> &Rational {
        &self.x
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn f(&self) -> GcdFunction {
        self.f
    }

    pub fn floor(&self) -> u64 {
        floor_u64(&self.x).expect("checked at construction")
    }
}

/// `f` and `mu * f` on `1..=limit`.
#[derive(Debug, Clone)]
pub struct GcdTables {
    f: GcdFunction,
    values: IntTable,
    convolved: IntTable,
}

impl GcdTables {
    pub fn new(f: GcdFunction, limit: usize) -> Result<Self> {
        Self::from_sieve(f, &PrimeSieve::new(limit)?)
    }

    pub fn from_sieve(f: GcdFunction, sieve: &PrimeSieve) -> Result<Self> {
        let values = match f {
            GcdFunction::Id => IntTable::from_fn("id", sieve.limit(), |n| n as i64)?,
            GcdFunction::Phi => sieve.totient(),
            GcdFunction::Psi => sieve.dedekind(),
        };
        let mu = sieve.mobius();
        let convolved = match f {
            // mu * id is the totient; no need to convolve
            GcdFunction::Id => sieve.totient(),
            _ => dirichlet_convolve(&mu, &values)?,
        };
        Ok(Self {
            f,
            values,
            convolved: convolved.with_label(format!("mu*{}", f.name())),
        })
    }

    pub fn function(&self) -> GcdFunction {
        self.f
    }

    pub fn limit(&self) -> usize {
        self.values.limit()
    }

    pub fn values(&self) -> &IntTable {
        &self.values
    }

    /// `mu * f`.
    pub fn convolved(&self) -> &IntTable {
        &self.convolved
    }

    fn require(&self, n: u64, x: &Rational) -> Result<()> {
        if n as usize > self.limit() {
            return Err(Error::TableTooSmall {
                value: x.to_string(),
                needed: n as usize,
                limit: self.limit(),
            });
        }
        Ok(())
    }

    fn require_function(&self, point: &EvalPoint) -> Result<()> {
        if point.f != self.f {
            return Err(Error::InvalidArgument(format!(
                "point asks for f = {} but the tables hold {}",
                point.f, self.f
            )));
        }
        self.require(point.floor(), &point.x)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Pillai's function `P(n) = sum_{k <= n} gcd(k, n)`, from its values on
/// prime powers: `P(p^a) = (a + 1) p^a - a p^(a-1)`.
pub fn pillai(n: u64) -> u64 {
    assert!(n >= 1, "pillai is defined for n >= 1");
    let mut rest = n;
    let mut out = 1u64;
    let mut p = 2u64;
    while p * p <= rest {
        if rest.is_multiple_of(p) {
            let mut a = 0u64;
            let mut pa = 1u64;
            while rest.is_multiple_of(p) {
                rest /= p;
                a += 1;
                pa *= p;
            }
            out *= (a + 1) * pa - a * (pa / p);
        }
        p += 1;
    }
    if rest > 1 {
        out *= 2 * rest - 1;
    }
    out
}

/// `P(n)` by summing the gcds directly.
pub fn pillai_direct(n: u64) -> u64 {
    (1..=n).map(|k| gcd(k, n)).sum()
}

/// `sum_{j <= k} j^r f(gcd(j, k))`, in `u128` when it fits.
fn inner_sum(k: u64, r: u32, f: &IntTable) -> Integer {
    let fast = (|| {
        let mut acc: u128 = 0;
        for j in 1..=k {
            let jr = (j as u128).checked_pow(r)?;
            let fv = *f.get(gcd(j, k) as usize) as u128;
            acc = acc.checked_add(jr.checked_mul(fv)?)?;
        }
        Some(acc)
    })();
    match fast {
        Some(v) => Integer::from(v),
        None => {
            let mut acc = Integer::new();
            for j in 1..=k {
                let jr = Integer::from(j).pow(r);
                acc += jr * *f.get(gcd(j, k) as usize);
            }
            acc
        }
    }
}

fn naive_term(k: u64, r: u32, f: &IntTable) -> Rational {
    Rational::from((inner_sum(k, r, f), Integer::from(k).pow(r + 1)))
}

/// Left side of the identity by brute force; `O(x^2)` gcds.
pub fn m_r_naive(point: &EvalPoint, tables: &GcdTables) -> Result<Rational> {
    tables.require_function(point)?;
    let mut acc = Rational::new();
    for k in 1..=point.floor() {
        acc += naive_term(k, point.r, tables.values());
    }
    Ok(acc)
}

/// `[M_r(0), M_r(1), ..., M_r(n_max)]` by brute force.
pub fn m_r_naive_prefix(r: u32, tables: &GcdTables, n_max: u64) -> Result<Vec<Rational>> {
    check_prefix_args(r, tables, n_max)?;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    let mut acc = Rational::new();
    out.push(acc.clone());
    for k in 1..=n_max {
        acc += naive_term(k, r, tables.values());
        out.push(acc.clone());
    }
    Ok(out)
}

fn check_prefix_args(r: u32, tables: &GcdTables, n_max: u64) -> Result<()> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be a positive integer".into()));
    }
    tables.require(n_max, &Rational::from(n_max))
}

/// `H_2m(q) = sum_{l <= q} l^-2m` for `q = 0..=n`.
pub fn harmonic_even_table(m: u32, n: u64) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = Rational::new();
    out.push(acc.clone());
    for l in 1..=n {
        acc += Rational::from((1, Integer::from(l).pow(2 * m)));
        out.push(acc.clone());
    }
    out
}

/// `sum_{d <= n} c(d) F(floor(n/d))` where `prefix[d] = sum_{d' <= d} c(d')`,
/// grouping the `d` that share a quotient.
pub(crate) fn grouped_sum(prefix: &[Rational], inner: impl Fn(u64) -> Rational, n: u64) -> Rational {
    let mut acc = Rational::new();
    let mut d = 1u64;
    while d <= n {
        let q = n / d;
        let last = n / q;
        let block = Rational::from(&prefix[last as usize] - &prefix[d as usize - 1]);
        if block.cmp0() != std::cmp::Ordering::Equal {
            acc += block * inner(q);
        }
        d = last + 1;
    }
    acc
}

/// Right side of the identity; `O(x log x)` rational operations.
pub fn m_r_identity(point: &EvalPoint, tables: &GcdTables) -> Result<Rational> {
    tables.require_function(point)?;
    let n = point.floor();
    let r = point.r;

    let mut half = Rational::new();
    for k in 1..=n {
        half += Rational::from((*tables.values().get(k as usize), k));
    }

    // prefix[d] = sum_{d' <= d} g(d') / d'
    let mut prefix = Vec::with_capacity(n as usize + 1);
    let mut acc = Rational::new();
    prefix.push(acc.clone());
    for d in 1..=n {
        acc += Rational::from((*tables.convolved().get(d as usize), d));
        prefix.push(acc.clone());
    }

    let mut hyperbola = grouped_sum(&prefix, Rational::from, n);
    for (m, weight) in bernoulli_block(r) {
        let h = harmonic_even_table(m, n);
        hyperbola += weight * grouped_sum(&prefix, |q| h[q as usize].clone(), n);
    }
    Ok(half / 2 + hyperbola / (r + 1))
}

/// `[M_r(0), ..., M_r(n_max)]` from the identity, accumulating for each `n`
/// the hyperbola points `d l = n`.
pub fn m_r_identity_prefix(r: u32, tables: &GcdTables, n_max: u64) -> Result<Vec<Rational>> {
    check_prefix_args(r, tables, n_max)?;
    let n_max = n_max as usize;
    let block = bernoulli_block(r);
    // weight(l) = 1 + sum_m C(r+1,2m) B_2m l^-2m
    let weights: Vec<Rational> = (0..=n_max)
        .map(|l| {
            if l == 0 {
                return Rational::new();
            }
            let mut w = Rational::from(1);
            for (m, c) in &block {
                w += c / Rational::from(Integer::from(l).pow(2 * m));
            }
            w
        })
        .collect();

    let mut increments: Vec<Rational> = (0..=n_max)
        .map(|n| {
            if n == 0 {
                Rational::new()
            } else {
                Rational::from((*tables.values().get(n), 2 * n as u64))
            }
        })
        .collect();
    let mut pair = vec![Rational::new(); n_max + 1];
    for d in 1..=n_max {
        let g = *tables.convolved().get(d);
        if g == 0 {
            continue;
        }
        let gd = Rational::from((g, d as u64));
        for l in 1..=n_max / d {
            pair[d * l] += Rational::from(&gd * &weights[l]);
        }
    }
    for (inc, p) in increments.iter_mut().zip(pair) {
        *inc += p / (r + 1);
    }

    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = Rational::new();
    for inc in increments {
        acc += inc;
        out.push(acc.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn point(x: Rational, r: u32, f: GcdFunction) -> EvalPoint {
        EvalPoint::new(x, r, f).unwrap()
    }

    #[test]
    fn pillai_examples() {
        assert_eq!(pillai(1), 1);
        assert_eq!(pillai(4), 8);
        assert_eq!(pillai(6), 15);
        for n in 1..=3000 {
            assert_eq!(pillai(n), pillai_direct(n), "n = {n}");
        }
    }

    #[test]
    fn pillai_is_id_convolved_with_totient() {
        let n = 100_000;
        let sieve = PrimeSieve::new(n).unwrap();
        let id = IntTable::from_fn("id", n, |k| k as i64).unwrap();
        let conv = dirichlet_convolve(&id, &sieve.totient()).unwrap();
        for k in 1..=n {
            assert_eq!(pillai(k as u64) as i64, *conv.get(k), "n = {k}");
        }
    }

    #[test]
    fn anchors() {
        let t = GcdTables::new(GcdFunction::Id, 10).unwrap();
        let one = point(Rational::from(1), 1, GcdFunction::Id);
        assert_eq!(m_r_naive(&one, &t).unwrap(), 1);
        assert_eq!(m_r_identity(&one, &t).unwrap(), 1);
        let p = point(Rational::from(2), 1, GcdFunction::Id);
        assert_eq!(m_r_naive(&p, &t).unwrap(), Rational::from((9, 4)));
        assert_eq!(m_r_identity(&p, &t).unwrap(), Rational::from((9, 4)));
        let p = point(Rational::from(2), 2, GcdFunction::Id);
        assert_eq!(m_r_naive(&p, &t).unwrap(), Rational::from((17, 8)));
        assert_eq!(m_r_identity(&p, &t).unwrap(), Rational::from((17, 8)));
    }

    #[test]
    fn half_integer_matches_floor() {
        let t = GcdTables::new(GcdFunction::Phi, 10).unwrap();
        let a = point(Rational::from((5, 2)), 1, GcdFunction::Phi);
        let b = point(Rational::from(2), 1, GcdFunction::Phi);
        assert_eq!(m_r_naive(&a, &t).unwrap(), m_r_identity(&a, &t).unwrap());
        assert_eq!(m_r_naive(&a, &t).unwrap(), m_r_naive(&b, &t).unwrap());
    }

    #[test]
    fn prefix_variants_agree_with_pointwise() {
        for f in GcdFunction::ALL {
            let t = GcdTables::new(f, 60).unwrap();
            for r in 1..=4 {
                let naive = m_r_naive_prefix(r, &t, 60).unwrap();
                let ident = m_r_identity_prefix(r, &t, 60).unwrap();
                assert_eq!(naive, ident, "f = {f}, r = {r}");
                for n in [1u64, 7, 30, 60] {
                    let p = point(Rational::from(n), r, f);
                    assert_eq!(m_r_naive(&p, &t).unwrap(), naive[n as usize]);
                    assert_eq!(m_r_identity(&p, &t).unwrap(), naive[n as usize]);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_points() {
        assert!(EvalPoint::new(Rational::from((1, 2)), 1, GcdFunction::Id).is_err());
        assert!(EvalPoint::new(Rational::from(3), 0, GcdFunction::Id).is_err());
        let t = GcdTables::new(GcdFunction::Id, 5).unwrap();
        let p = point(Rational::from(6), 1, GcdFunction::Id);
        assert!(matches!(m_r_naive(&p, &t), Err(Error::TableTooSmall { .. })));
        let p = point(Rational::from(3), 1, GcdFunction::Psi);
        assert!(m_r_identity(&p, &t).is_err());
        assert!("sigma".parse::<GcdFunction>().is_err());
    }

    #[test]
    fn large_r_falls_back_to_big_integers() {
        let t = GcdTables::new(GcdFunction::Psi, 40).unwrap();
        let p = point(Rational::from(40), 30, GcdFunction::Psi);
        assert_eq!(m_r_naive(&p, &t).unwrap(), m_r_identity(&p, &t).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn identity_holds(twice_x in 2u64..=400, r in 1u32..=6, which in 0usize..3) {
            let f = GcdFunction::ALL[which];
            let t = GcdTables::new(f, 200).unwrap();
            let p = point(Rational::from((twice_x, 2)), r, f);
            prop_assert_eq!(m_r_naive(&p, &t).unwrap(), m_r_identity(&p, &t).unwrap());
        }
    }
}
