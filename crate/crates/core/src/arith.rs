//! Sieved arithmetic functions stored as immutable lookup tables on `1..=N`.
//!
//! Every named function is derived from one smallest-prime-factor sieve.
//! Integer-valued tables use `i64`; rational-valued tables (the negative
//! power divisor functions, or anything divided by `n`) use `rug::Rational`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Practical ceiling for `i64` tables.
pub const INTEGER_TABLE_CEILING: usize = 100_000_000;
/// Practical ceiling for `Rational` tables.
pub const RATIONAL_TABLE_CEILING: usize = 1_000_000;

/// Values a table can hold: a commutative ring with an accumulate step.
pub trait TableValue: Clone + PartialEq + fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    /// `acc += a * b`
    fn add_product(acc: &mut Self, a: &Self, b: &Self);
}

impl TableValue for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add_product(acc: &mut Self, a: &Self, b: &Self) {
        *acc += a * b;
    }
}

impl TableValue for Rational {
    fn zero() -> Self {
        Rational::new()
    }
    fn one() -> Self {
        Rational::from(1)
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
    fn add_product(acc: &mut Self, a: &Self, b: &Self) {
        *acc += Rational::from(a * b);
    }
}

/// An arithmetic function sampled on `1..=limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArithTable<T = i64> {
    label: String,
    // values[0] is padding so that values[n] = f(n)
    values: Vec<T>,
}

pub type IntTable = ArithTable<i64>;
pub type RationalTable = ArithTable<Rational>;

impl<T: TableValue> ArithTable<T> {
    fn check_limit(limit: usize, ceiling: usize) -> Result<()> {
        if limit == 0 {
            return Err(Error::InvalidLimit);
        }
        if limit > ceiling {
            return Err(Error::LimitTooLarge {
                requested: limit,
                ceiling,
            });
        }
        Ok(())
    }

    /// Builds a table from `f(1), f(2), ...`.
    pub fn from_values(label: impl Into<String>, values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidLimit);
        }
        let mut padded = Vec::with_capacity(values.len() + 1);
        padded.push(T::zero());
        padded.extend(values);
        Ok(Self {
            label: label.into(),
            values: padded,
        })
    }

    pub fn from_fn(label: impl Into<String>, limit: usize, mut f: impl FnMut(usize) -> T) -> Result<Self> {
        if limit == 0 {
            return Err(Error::InvalidLimit);
        }
        let mut values = Vec::with_capacity(limit + 1);
        values.push(T::zero());
        values.extend((1..=limit).map(&mut f));
        Ok(Self {
            label: label.into(),
            values,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn limit(&self) -> usize {
        self.values.len() - 1
    }

    /// `f(n)` for `1 <= n <= limit`.
    #[inline]
    pub fn get(&self, n: usize) -> &T {
        assert!(n >= 1, "arithmetic tables are indexed from 1");
        &self.values[n]
    }

    /// `f(1..=limit)` as a slice indexed from 0.
    pub fn values(&self) -> &[T] {
        &self.values[1..]
    }

    /// Raw storage where index `n` holds `f(n)` and index 0 is padding.
    pub fn padded(&self) -> &[T] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &T)> {
        self.values.iter().enumerate().skip(1)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Restriction to `1..=limit`.
    pub fn truncated(&self, limit: usize) -> Result<Self> {
        if limit == 0 {
            return Err(Error::InvalidLimit);
        }
        if limit > self.limit() {
            return Err(Error::TableTooSmall {
                value: self.label.clone(),
                needed: limit,
                limit: self.limit(),
            });
        }
        Ok(Self {
            label: self.label.clone(),
            values: self.values[..=limit].to_vec(),
        })
    }

    /// Cumulative sums; entry `n` is `sum_{k<=n} f(k)` and entry 0 is zero.
    pub fn prefix_sums(&self) -> Vec<T> {
        let one = T::one();
        let mut out = Vec::with_capacity(self.values.len());
        let mut acc = T::zero();
        out.push(acc.clone());
        for v in &self.values[1..] {
            T::add_product(&mut acc, v, &one);
            out.push(acc.clone());
        }
        out
    }

    /// Writes `n,value` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,value")?;
        for (n, v) in self.iter() {
            writeln!(out, "{n},{v}")?;
        }
        Ok(())
    }
}

impl IntTable {
    pub fn to_rational(&self) -> RationalTable {
        ArithTable {
            label: self.label.clone(),
            values: self.values.iter().map(|&v| Rational::from(v)).collect(),
        }
    }

    /// `f(n)/n` as an exact table.
    pub fn over_identity(&self) -> RationalTable {
        let mut values: Vec<Rational> = Vec::with_capacity(self.values.len());
        values.push(Rational::new());
        for (n, &v) in self.iter() {
            values.push(Rational::from((v, n as u64)));
        }
        ArithTable {
            label: format!("{}/id", self.label),
            values,
        }
    }

    /// `|f|`
    pub fn abs(&self) -> IntTable {
        ArithTable {
            label: format!("|{}|", self.label),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }
}

/// Linear sieve of smallest prime factors; the factorization backbone for
/// every named table.
#[derive(Debug, Clone)]
pub struct PrimeSieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl PrimeSieve {
    pub fn new(limit: usize) -> Result<Self> {
        IntTable::check_limit(limit, INTEGER_TABLE_CEILING)?;
        let mut spf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        if limit >= 1 {
            spf[1] = 1;
        }
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > limit {
                    break;
                }
                spf[m] = p;
            }
        }
        Ok(Self { spf, primes })
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    #[inline]
    pub fn smallest_prime_factor(&self, n: usize) -> u32 {
        self.spf[n]
    }

    /// Prime-power factorization `[(p, k)]` in increasing order of `p`.
    pub fn factorize(&self, mut n: usize) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut k = 0;
            while n.is_multiple_of(p) {
                n /= p;
                k += 1;
            }
            out.push((p as u64, k));
        }
        out
    }

    /// Tabulates the multiplicative function with prime-power values
    /// `at_prime_power(p, k)`.
    pub fn multiplicative<T: TableValue>(
        &self,
        label: impl Into<String>,
        mut at_prime_power: impl FnMut(u64, u32) -> T,
    ) -> ArithTable<T> {
        let limit = self.limit();
        let mut values: Vec<T> = Vec::with_capacity(limit + 1);
        values.push(T::zero());
        values.push(T::one());
        for n in 2..=limit {
            let p = self.spf[n] as usize;
            let mut m = n;
            let mut k = 0u32;
            while m % p == 0 {
                m /= p;
                k += 1;
            }
            let pk = at_prime_power(p as u64, k);
            let v = if m == 1 {
                pk
            } else {
                let mut acc = T::zero();
                T::add_product(&mut acc, &values[m], &pk);
                acc
            };
            values.push(v);
        }
        ArithTable {
            label: label.into(),
            values,
        }
    }

    pub fn mobius(&self) -> IntTable {
        self.multiplicative("mu", |_, k| if k == 1 { -1 } else { 0 })
    }

    pub fn abs_mobius(&self) -> IntTable {
        self.multiplicative("abs_mu", |_, k| i64::from(k == 1))
    }

    pub fn totient(&self) -> IntTable {
        self.multiplicative("phi", |p, k| {
            let pk1 = p.pow(k - 1) as i64;
            pk1 * (p as i64 - 1)
        })
    }

    pub fn dedekind(&self) -> IntTable {
        self.multiplicative("psi", |p, k| {
            let pk1 = p.pow(k - 1) as i64;
            pk1 * (p as i64 + 1)
        })
    }

    pub fn tau(&self) -> IntTable {
        self.multiplicative("tau", |_, k| i64::from(k) + 1)
    }

    /// `sigma_{-2m}(n) = sum_{d | n} d^{-2m}`.
    pub fn sigma_minus(&self, m: u32) -> RationalTable {
        self.multiplicative(format!("sigma_-{}", 2 * m), |p, k| {
            let q = Integer::from(p).pow(2 * m);
            // (1 + q + ... + q^k) / q^k
            let mut num = Integer::from(1);
            let mut qi = Integer::from(1);
            for _ in 0..k {
                qi *= &q;
                num += &qi;
            }
            Rational::from((num, qi))
        })
    }
}

/// The named multiplicative functions available from [`sieve_named`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedFunction {
    Totient,
    Dedekind,
    Tau,
    AbsMobius,
}

impl FromStr for NamedFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "totient" | "phi" => Ok(Self::Totient),
            "dedekind" | "psi" => Ok(Self::Dedekind),
            "tau" => Ok(Self::Tau),
            "abs_mobius" | "abs_mu" => Ok(Self::AbsMobius),
            other => Err(Error::UnknownFunction(other.to_string())),
        }
    }
}

/// `mu(n)` for `n <= limit`.
pub fn sieve_mobius(limit: usize) -> Result<IntTable> {
    Ok(PrimeSieve::new(limit)?.mobius())
}

pub fn sieve_named(name: NamedFunction, limit: usize) -> Result<IntTable> {
    let sieve = PrimeSieve::new(limit)?;
    Ok(match name {
        NamedFunction::Totient => sieve.totient(),
        NamedFunction::Dedekind => sieve.dedekind(),
        NamedFunction::Tau => sieve.tau(),
        NamedFunction::AbsMobius => sieve.abs_mobius(),
    })
}

/// `sigma_{-2m}` on `1..=limit` as exact rationals.
pub fn sigma_minus_table(m: u32, limit: usize) -> Result<RationalTable> {
    if m == 0 {
        return Err(Error::InvalidArgument("sigma_{-2m} needs m >= 1".into()));
    }
    RationalTable::check_limit(limit, RATIONAL_TABLE_CEILING)?;
    Ok(PrimeSieve::new(limit)?.sigma_minus(m))
}

/// `(f * g)(n) = sum_{d | n} f(d) g(n/d)` by iterating `d` and its multiples.
pub fn dirichlet_convolve<T: TableValue>(f: &ArithTable<T>, g: &ArithTable<T>) -> Result<ArithTable<T>> {
    if f.limit() != g.limit() {
        return Err(Error::LimitMismatch {
            left: f.limit(),
            right: g.limit(),
        });
    }
    let limit = f.limit();
    let mut values = vec![T::zero(); limit + 1];
    for d in 1..=limit {
        let fd = &f.values[d];
        if fd.is_zero() {
            continue;
        }
        for (e, ge) in g.values[1..=limit / d].iter().enumerate() {
            if !ge.is_zero() {
                T::add_product(&mut values[d * (e + 1)], fd, ge);
            }
        }
    }
    Ok(ArithTable {
        label: format!("{}*{}", f.label, g.label),
        values,
    })
}

/// The constant function 1.
pub fn ones(limit: usize) -> Result<IntTable> {
    IntTable::from_fn("1", limit, |_| 1)
}

/// The identity function `n -> n`.
pub fn identity(limit: usize) -> Result<IntTable> {
    IntTable::from_fn("id", limit, |n| n as i64)
}

/// The convolution unit: 1 at `n = 1`, zero elsewhere.
pub fn unit(limit: usize) -> Result<IntTable> {
    IntTable::from_fn("e", limit, |n| i64::from(n == 1))
}

/// `n -> n^{-2m}`, built directly rather than through the sieve.
pub fn inverse_even_power(m: u32, limit: usize) -> Result<RationalTable> {
    RationalTable::check_limit(limit, RATIONAL_TABLE_CEILING)?;
    RationalTable::from_fn(format!("id_-{}", 2 * m), limit, |n| {
        Rational::from((Integer::from(1), Integer::from(n).pow(2 * m)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gcd(mut a: u64, mut b: u64) -> u64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }

    #[test]
    fn mobius_small_values() {
        let mu = sieve_mobius(12).unwrap();
        assert_eq!(*mu.get(1), 1);
        assert_eq!(*mu.get(2), -1);
        assert_eq!(*mu.get(6), 1);
        assert_eq!(*mu.get(12), 0);
        assert_eq!(sieve_mobius(1).unwrap().values(), &[1]);
        assert!(matches!(sieve_mobius(0), Err(Error::InvalidLimit)));
    }

    #[test]
    fn named_small_values() {
        let phi = sieve_named(NamedFunction::Totient, 12).unwrap();
        let psi = sieve_named(NamedFunction::Dedekind, 12).unwrap();
        let tau = sieve_named(NamedFunction::Tau, 12).unwrap();
        assert_eq!((*phi.get(1), *psi.get(1), *tau.get(1)), (1, 1, 1));
        assert_eq!(*psi.get(4), 6);
        assert_eq!(*psi.get(6), 12);
        assert_eq!(*tau.get(12), 6);
        assert_eq!(*phi.get(9), 6);
        assert!("sigma".parse::<NamedFunction>().is_err());
    }

    #[test]
    fn named_tables_match_brute_force() {
        let n = 500;
        let phi = sieve_named(NamedFunction::Totient, n).unwrap();
        let tau = sieve_named(NamedFunction::Tau, n).unwrap();
        let psi = sieve_named(NamedFunction::Dedekind, n).unwrap();
        let mu = sieve_mobius(n).unwrap();
        for k in 1..=n as u64 {
            let coprime = (1..=k).filter(|&j| gcd(j, k) == 1).count() as i64;
            let divisors: Vec<u64> = (1..=k).filter(|d| k % d == 0).collect();
            assert_eq!(*phi.get(k as usize), coprime);
            assert_eq!(*tau.get(k as usize), divisors.len() as i64);
            // psi(n) = n prod (1 + 1/p) = sum_{d|n} |mu(d)| n/d
            let via_divisors: i64 = divisors.iter().map(|&d| mu.get(d as usize).abs() * (k / d) as i64).sum();
            assert_eq!(*psi.get(k as usize), via_divisors);
        }
    }

    #[test]
    fn convolution_examples() {
        let n = 30;
        let mu = sieve_mobius(n).unwrap();
        let one = ones(n).unwrap();
        assert_eq!(dirichlet_convolve(&mu, &one).unwrap().values(), unit(n).unwrap().values());
        let phi = dirichlet_convolve(&mu, &identity(n).unwrap()).unwrap();
        assert_eq!(*phi.get(6), 2);
        let mu_absmu = dirichlet_convolve(&mu, &mu.abs()).unwrap();
        assert_eq!(*mu_absmu.get(4), -1);
        assert!(matches!(
            dirichlet_convolve(&mu, &ones(5).unwrap()),
            Err(Error::LimitMismatch { .. })
        ));
    }

    #[test]
    fn convolution_routes_agree_to_1e5() {
        let n = 100_000;
        let sieve = PrimeSieve::new(n).unwrap();
        let mu = sieve.mobius();
        let id = identity(n).unwrap();
        assert_eq!(dirichlet_convolve(&mu, &id).unwrap().values(), sieve.totient().values());
        assert_eq!(dirichlet_convolve(&mu.abs(), &id).unwrap().values(), sieve.dedekind().values());
        assert_eq!(dirichlet_convolve(&ones(n).unwrap(), &ones(n).unwrap()).unwrap().values(), sieve.tau().values());
    }

    #[test]
    fn sigma_minus_examples() {
        let s2 = sigma_minus_table(1, 10).unwrap();
        assert_eq!(*s2.get(1), Rational::from(1));
        assert_eq!(*s2.get(4), Rational::from((21, 16)));
        let s4 = sigma_minus_table(2, 10).unwrap();
        assert_eq!(*s4.get(6), Rational::from((697, 648)));
        assert!(sigma_minus_table(0, 10).is_err());
    }

    #[test]
    fn sigma_minus_matches_convolution() {
        let n = 2_000;
        for m in 1..=3 {
            let direct = inverse_even_power(m, n).unwrap();
            let conv = dirichlet_convolve(&direct, &ones(n).unwrap().to_rational()).unwrap();
            assert_eq!(conv.values(), sigma_minus_table(m, n).unwrap().values());
        }
    }

    #[test]
    fn csv_dump() {
        let s = sigma_minus_table(1, 2).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,value\n1,1\n2,5/4\n");
    }

    #[test]
    fn deterministic_construction() {
        assert_eq!(sieve_named(NamedFunction::Dedekind, 1000).unwrap(), sieve_named(NamedFunction::Dedekind, 1000).unwrap());
    }

    proptest! {
        #[test]
        fn multiplicative_on_coprime_pairs(a in 1usize..100, b in 1usize..100) {
            prop_assume!(gcd(a as u64, b as u64) == 1);
            let sieve = PrimeSieve::new(10_000).unwrap();
            for t in [sieve.mobius(), sieve.totient(), sieve.dedekind(), sieve.tau()] {
                prop_assert_eq!(*t.get(a * b), t.get(a) * t.get(b));
            }
            let s = sieve.sigma_minus(1);
            prop_assert_eq!(s.get(a * b).clone(), Rational::from(s.get(a) * s.get(b)));
        }
    }
}
