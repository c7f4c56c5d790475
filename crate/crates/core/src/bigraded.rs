//! The bigraded Cox ring `K[x_0..x_m, y_0..y_n]` of `P^m x P^n`.
//!
//! Monomials, bidegrees, graded-piece dimensions, intersection numbers
//! and slopes. All counting is exact; intersection numbers and slopes are
//! arbitrary-precision.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational used for every slope in the crate.
pub type ExactRational = BigRational;

/// The product `P^m x P^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ambient {
    pub m: usize,
    pub n: usize,
}

impl Ambient {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "factor dimensions must be positive, got m={m}, n={n}"
            )));
        }
        Ok(Self { m, n })
    }

    /// Total dimension `m + n`.
    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    /// Number of Cox ring variables, `m + n + 2`.
    pub fn num_vars(&self) -> usize {
        self.m + self.n + 2
    }

    pub fn swapped(&self) -> Self {
        Self { m: self.n, n: self.m }
    }

    pub(crate) fn check_same(&self, other: &Ambient) -> Result<()> {
        if self != other {
            return Err(Error::AmbientMismatch {
                expected_m: self.m,
                expected_n: self.n,
                got_m: other.m,
                got_n: other.n,
            });
        }
        Ok(())
    }
}

/// The very ample line bundle `L = O(a,b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Polarization {
    pub a: u32,
    pub b: u32,
}

impl Polarization {
    pub fn new(a: u32, b: u32) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidParameter(format!(
                "polarization must be ample (a,b >= 1), got ({a},{b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn bidegree(&self) -> Bidegree {
        Bidegree::new(self.a as i64, self.b as i64)
    }

    pub fn swapped(&self) -> Self {
        Self { a: self.b, b: self.a }
    }

    pub fn max(&self) -> u32 {
        self.a.max(self.b)
    }

    pub fn min(&self) -> u32 {
        self.a.min(self.b)
    }
}

/// A bidegree `(p,q)`, possibly negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bidegree {
    pub p: i64,
    pub q: i64,
}

impl Bidegree {
    pub const fn new(p: i64, q: i64) -> Self {
        Self { p, q }
    }

    pub fn is_effective(&self) -> bool {
        self.p >= 0 && self.q >= 0
    }

    pub fn total(&self) -> i64 {
        self.p + self.q
    }

    /// Key for the canonical scan order: total degree, then `p`.
    pub fn scan_key(&self) -> (i64, i64) {
        (self.total(), self.p)
    }
}

impl std::ops::Add for Bidegree {
    type Output = Bidegree;
    fn add(self, rhs: Self) -> Self {
        Bidegree::new(self.p + rhs.p, self.q + rhs.q)
    }
}

impl std::ops::Sub for Bidegree {
    type Output = Bidegree;
    fn sub(self, rhs: Self) -> Self {
        Bidegree::new(self.p - rhs.p, self.q - rhs.q)
    }
}

impl std::ops::Neg for Bidegree {
    type Output = Bidegree;
    fn neg(self) -> Self {
        Bidegree::new(-self.p, -self.q)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.p, self.q)
    }
}

/// `C(n, k)` by the multiplicative formula.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub(crate) fn binomial_u64(n: u64, k: u64) -> u64 {
    binomial(n, k)
        .to_u64()
        .expect("binomial coefficient exceeds u64; parameters are beyond desk scale")
}

/// `dim R_(p,q) = C(m+p, m) * C(n+q, n)`, zero for non-effective degrees.
pub fn dim_graded_piece(amb: Ambient, deg: Bidegree) -> u64 {
    if !deg.is_effective() {
        return 0;
    }
    let (m, n) = (amb.m as u64, amb.n as u64);
    let (p, q) = (deg.p as u64, deg.q as u64);
    binomial_u64(m + p, m) * binomial_u64(n + q, n)
}

/// A monomial of the Cox ring: exponents of the x-variables and of the
/// y-variables.
///
/// Ordering is lexicographic on the concatenated exponent vector with
/// larger vectors first, so `x0 < x1` and `x0^2 y0` leads every list of
/// bidegree `(2,1)` monomials.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .alpha
            .cmp(&self.alpha)
            .then_with(|| other.beta.cmp(&self.beta))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    pub fn new(alpha: Vec<u32>, beta: Vec<u32>) -> Result<Self> {
        if alpha.is_empty() || beta.is_empty() {
            return Err(Error::InvalidParameter(
                "monomial needs at least one x and one y exponent".into(),
            ));
        }
        Ok(Self { alpha, beta })
    }

    pub fn one(amb: Ambient) -> Self {
        Self {
            alpha: vec![0; amb.m + 1],
            beta: vec![0; amb.n + 1],
        }
    }

    /// `x_i^a y_j^b`.
    pub fn pure_power(amb: Ambient, i: usize, j: usize, l: Polarization) -> Self {
        let mut mono = Self::one(amb);
        mono.alpha[i] = l.a;
        mono.beta[j] = l.b;
        mono
    }

    pub fn ambient(&self) -> Ambient {
        Ambient {
            m: self.alpha.len() - 1,
            n: self.beta.len() - 1,
        }
    }

    pub fn bidegree(&self) -> Bidegree {
        Bidegree::new(
            self.alpha.iter().map(|&e| e as i64).sum(),
            self.beta.iter().map(|&e| e as i64).sum(),
        )
    }

    /// Exponents of `x_0..x_m, y_0..y_n` in one vector.
    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.alpha.iter().chain(self.beta.iter()).copied()
    }

    fn same_ambient(&self, other: &Monomial) -> Result<()> {
        self.ambient().check_same(&other.ambient())
    }

    pub fn mul(&self, other: &Monomial) -> Result<Monomial> {
        self.same_ambient(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Monomial) -> Monomial {
        Monomial {
            alpha: self.alpha.iter().zip(&other.alpha).map(|(u, v)| u + v).collect(),
            beta: self.beta.iter().zip(&other.beta).map(|(u, v)| u + v).collect(),
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Result<Monomial> {
        self.same_ambient(other)?;
        Ok(Monomial {
            alpha: self.alpha.iter().zip(&other.alpha).map(|(u, v)| *u.max(v)).collect(),
            beta: self.beta.iter().zip(&other.beta).map(|(u, v)| *u.max(v)).collect(),
        })
    }

    /// Whether `self` divides `other`.
    pub fn divides(&self, other: &Monomial) -> Result<bool> {
        self.same_ambient(other)?;
        Ok(self.exponents().zip(other.exponents()).all(|(u, v)| u <= v))
    }

    /// True for `x_i^a y_j^b`: a single x-variable and a single y-variable.
    pub fn is_pure_power(&self) -> bool {
        self.alpha.iter().filter(|&&e| e > 0).count() <= 1
            && self.beta.iter().filter(|&&e| e > 0).count() <= 1
    }

    /// The same monomial read on `P^n x P^m`.
    pub fn transposed(&self) -> Monomial {
        Monomial {
            alpha: self.beta.clone(),
            beta: self.alpha.clone(),
        }
    }

    /// Parse with the ambient fixed up front.
    pub fn parse_in(text: &str, amb: Ambient) -> Result<Monomial> {
        let mut mono = Monomial::one(amb);
        let mut any = false;
        for term in text.split_whitespace() {
            any = true;
            let (var, exp) = match term.split_once('^') {
                Some((v, e)) => {
                    let e: u32 = e
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad exponent in term '{term}'")))?;
                    (v, e)
                }
                None => (term, 1),
            };
            let mut chars = var.chars();
            let kind = chars.next();
            let idx: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::Parse(format!("bad variable in term '{term}'")))?;
            let slot = match kind {
                Some('x') if idx <= amb.m => &mut mono.alpha[idx],
                Some('y') if idx <= amb.n => &mut mono.beta[idx],
                Some('x') | Some('y') => {
                    return Err(Error::Parse(format!(
                        "variable '{var}' out of range for P^{} x P^{}",
                        amb.m, amb.n
                    )))
                }
                _ => return Err(Error::Parse(format!("bad variable in term '{term}'"))),
            };
            *slot += exp;
        }
        if !any {
            return Err(Error::Parse("empty monomial".into()));
        }
        Ok(mono)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut write_var = |f: &mut fmt::Formatter<'_>, name: char, i: usize, e: u32| {
            if e == 0 {
                return Ok(());
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{name}{i}")
            } else {
                write!(f, "{name}{i}^{e}")
            }
        };
        for (i, &e) in self.alpha.iter().enumerate() {
            write_var(f, 'x', i, e)?;
        }
        for (i, &e) in self.beta.iter().enumerate() {
            write_var(f, 'y', i, e)?;
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Parsing without an ambient infers the smallest one that fits the
/// variables mentioned (at least `P^1 x P^1`).
impl FromStr for Monomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut m = 1;
        let mut n = 1;
        for term in s.split_whitespace() {
            let var = term.split('^').next().unwrap_or_default();
            let idx: usize = var
                .get(1..)
                .and_then(|i| i.parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad variable in term '{term}'")))?;
            match var.chars().next() {
                Some('x') => m = m.max(idx),
                Some('y') => n = n.max(idx),
                _ => return Err(Error::Parse(format!("bad variable in term '{term}'"))),
            }
        }
        Monomial::parse_in(s, Ambient { m, n })
    }
}

/// Parse a comma-separated list of monomials.
pub fn parse_monomial_list(text: &str, amb: Ambient) -> Result<Vec<Monomial>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| Monomial::parse_in(t, amb))
        .collect()
}

/// Compositions of `total` into `parts` non-negative parts, first part
/// largest first.
pub(crate) fn compositions(parts: usize, total: u32) -> Vec<Vec<u32>> {
    fn rec(parts: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=total).rev() {
            prefix.push(e);
            rec(parts - 1, total - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(parts, total, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// All monomials of bidegree `deg` in canonical order; empty when `deg` is
/// not effective.
pub fn enumerate_monomials(amb: Ambient, deg: Bidegree) -> Vec<Monomial> {
    if !deg.is_effective() {
        return Vec::new();
    }
    let xs = compositions(amb.m + 1, deg.p as u32);
    let ys = compositions(amb.n + 1, deg.q as u32);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for alpha in &xs {
        for beta in &ys {
            out.push(Monomial {
                alpha: alpha.clone(),
                beta: beta.clone(),
            });
        }
    }
    out
}

/// The m+n+2 variables as degree-one monomials: x's first, then y's.
pub fn variables(amb: Ambient) -> Vec<Monomial> {
    let mut out = Vec::with_capacity(amb.num_vars());
    for i in 0..=amb.m {
        let mut v = Monomial::one(amb);
        v.alpha[i] = 1;
        out.push(v);
    }
    for j in 0..=amb.n {
        let mut v = Monomial::one(amb);
        v.beta[j] = 1;
        out.push(v);
    }
    out
}

/// `L^{m+n} = C(m+n, m) a^m b^n`.
pub fn top_self_intersection(amb: Ambient, l: Polarization) -> BigInt {
    let (m, n) = (amb.m as u64, amb.n as u64);
    let c = BigInt::from(binomial(m + n, m));
    c * BigInt::from(l.a).pow(amb.m as u32) * BigInt::from(l.b).pow(amb.n as u32)
}

/// `D . L^{m+n-1}` for `D = O(x,y)`, in the integral form
/// `C(m+n-1, m-1) a^(m-1) b^n x + C(m+n-1, m) a^m b^(n-1) y`.
pub fn mixed_intersection(amb: Ambient, l: Polarization, d: Bidegree) -> BigInt {
    let (m, n) = (amb.m as u64, amb.n as u64);
    let a = BigInt::from(l.a);
    let b = BigInt::from(l.b);
    let coeff_x = BigInt::from(binomial(m + n - 1, m - 1))
        * a.pow(amb.m as u32 - 1)
        * b.pow(amb.n as u32);
    let coeff_y = BigInt::from(binomial(m + n - 1, m))
        * a.pow(amb.m as u32)
        * b.pow(amb.n as u32 - 1);
    coeff_x * BigInt::from(d.p) + coeff_y * BigInt::from(d.q)
}

/// Slope of a line bundle `O(D)`: `D . L^{d-1}`.
pub fn line_bundle_slope(amb: Ambient, l: Polarization, d: Bidegree) -> ExactRational {
    ExactRational::from_integer(mixed_intersection(amb, l, d))
}

/// Rank, first Chern class and slope of the syzygy bundle `M_V`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleNumerics {
    pub rank: usize,
    pub c1: Bidegree,
    pub slope: ExactRational,
}

pub fn syzygy_bundle_numerics(amb: Ambient, l: Polarization, r: usize) -> Result<BundleNumerics> {
    if r < 2 {
        return Err(Error::InvalidParameter(format!(
            "a syzygy bundle needs dim V >= 2, got r={r}"
        )));
    }
    let slope = ExactRational::new(-top_self_intersection(amb, l), BigInt::from(r - 1));
    Ok(BundleNumerics {
        rank: r - 1,
        c1: -l.bidegree(),
        slope,
    })
}

/// `p/q` text form of an exact rational (`p` alone when integral).
pub fn format_rational(x: &ExactRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rational(text: &str) -> Result<ExactRational> {
    let bad = || Error::Parse(format!("bad rational '{text}'"));
    match text.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(ExactRational::new(p, q))
        }
        None => Ok(ExactRational::from_integer(
            text.trim().parse().map_err(|_| bad())?,
        )),
    }
}
