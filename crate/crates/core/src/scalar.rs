//! Exact arithmetic in the real quadratic field Q(sqrt(d)).
//!
//! Lattice matrices, wavevectors and the Gram forms built from them all live
//! in Q(sqrt(3)) for the tori this crate cares about, so every shell-membership
//! and rationality decision is taken on exact values. Floats only appear at the
//! very end, through [`SurdRational::to_f64`], which is correctly rounded.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `a + b*sqrt(d)` with `a`, `b` rational and `d` a squarefree positive integer.
///
/// Canonical form: when `b == 0` the radicand is stored as 1, so a rational
/// value compares equal (and combines) regardless of which field it came from.
/// Radicand 1 is never stored with a nonzero `b`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SurdRational {
    a: BigRational,
    b: BigRational,
    d: u64,
}

fn square_free_split(d: u64) -> (u64, u64) {
    // d = s^2 * r with r squarefree
    let mut s = 1u64;
    let mut r = 1u64;
    let mut rest = d;
    let mut p = 2u64;
    while p * p <= rest {
        let mut e = 0;
        while rest % p == 0 {
            rest /= p;
            e += 1;
        }
        s *= p.pow(e / 2);
        if e % 2 == 1 {
            r *= p;
        }
        p += 1;
    }
    (s, r * rest)
}

/// True when `d` has no repeated prime factor.
pub fn is_squarefree(d: u64) -> bool {
    d > 0 && square_free_split(d).0 == 1
}

impl SurdRational {
    /// Builds `a + b*sqrt(d)`. A non-squarefree radicand is simplified,
    /// e.g. `sqrt(12)` becomes `2*sqrt(3)`.
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::BadRadicand(d));
        }
        let (s, r) = square_free_split(d);
        let b = b * BigRational::from_integer(BigInt::from(s));
        Ok(Self::canonical(a, b, r))
    }

    fn canonical(a: BigRational, b: BigRational, d: u64) -> Self {
        if b.is_zero() {
            Self { a, b, d: 1 }
        } else if d == 1 {
            Self {
                a: a + b,
                b: BigRational::zero(),
                d: 1,
            }
        } else {
            Self { a, b, d }
        }
    }

    pub fn rational(q: BigRational) -> Self {
        Self::canonical(q, BigRational::zero(), 1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        Self::rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// `(p/q) * sqrt(d)`.
    pub fn surd(p: i64, q: i64, d: u64) -> Result<Self> {
        Self::new(
            BigRational::zero(),
            BigRational::new(BigInt::from(p), BigInt::from(q)),
            d,
        )
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn surd_part(&self) -> &BigRational {
        &self.b
    }

    /// Radicand; 1 for rational values.
    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// The rational value, if the surd part vanishes.
    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| self.a.clone())
    }

    /// Galois conjugate `a - b*sqrt(d)`.
    pub fn conj(&self) -> Self {
        Self {
            a: self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    /// Field norm `a^2 - d*b^2`.
    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d))
    }

    fn common_radicand(&self, other: &Self) -> Result<u64> {
        match (self.d, other.d) {
            (x, y) if x == y => Ok(x),
            (1, y) => Ok(y),
            (x, 1) => Ok(x),
            (x, y) => Err(Error::RadicandMismatch(x, y)),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        Ok(Self::canonical(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        Ok(Self::canonical(&self.a - &other.a, &self.b - &other.b, d))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        let dd = BigRational::from_integer(BigInt::from(d));
        let a = &self.a * &other.a + &self.b * &other.b * dd;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Self::canonical(a, b, d))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        let d = self.common_radicand(other)?;
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // x / y = x * conj(y) / N(y); N(y) != 0 because sqrt(d) is irrational
        let n = other.norm();
        let num = self.checked_mul(&other.conj())?;
        Ok(Self::canonical(&num.a / &n, &num.b / &n, d))
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one().checked_div(self)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self::canonical(&self.a * q, &self.b * q, self.d)
    }

    /// Exact sign, -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sb == 0 || sa == sb {
            return if sa == 0 { sb } else { sa };
        }
        if sa == 0 {
            return sb;
        }
        // opposite signs: compare a^2 with d*b^2
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => unreachable!("sqrt(d) is irrational for squarefree d > 1"),
        }
    }

    /// Correctly rounded (round-to-nearest-even) conversion to `f64`.
    pub fn to_f64(&self) -> f64 {
        if self.b.is_zero() {
            return self.a.to_f64().unwrap_or(f64::NAN);
        }
        // a = p/D, b = r/D; value = (p + sgn(r) sqrt(r^2 d)) / D
        let den = self.a.denom().lcm(self.b.denom());
        let p = self.a.numer() * (&den / self.a.denom());
        let r = self.b.numer() * (&den / self.b.denom());
        let sgn = if r.is_negative() { -1 } else { 1 };
        let rad = &r * &r * BigInt::from(self.d);
        let mut bits = 128u32;
        loop {
            let scale = BigInt::one() << bits;
            let root = (&rad << (2 * bits)).sqrt();
            let base = &p * &scale;
            let (lo, hi) = if sgn > 0 {
                (&base + &root, &base + &root + 1)
            } else {
                (&base - &root - 1, &base - &root)
            };
            let q = &den * &scale;
            let flo = BigRational::new(lo, q.clone()).to_f64();
            let fhi = BigRational::new(hi, q).to_f64();
            if let (Some(x), Some(y)) = (flo, fhi) {
                if x == y {
                    return x;
                }
            }
            bits += 64;
            if bits > 8192 {
                // only reachable for values beyond the f64 range
                return flo.unwrap_or(f64::NAN);
            }
        }
    }
}

fn sign_of(q: &BigRational) -> i32 {
    match q.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Formats a rational as `p/q` (or `p`), the same form used in reports.
pub fn rational_string(q: &BigRational) -> String {
    format_rational(q)
}

impl fmt::Display for SurdRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", format_rational(&self.a));
        }
        let mag = self.b.abs();
        let surd = format!("{}*sqrt({})", format_rational(&mag), self.d);
        if self.a.is_zero() {
            if self.b.is_negative() {
                write!(f, "-{surd}")
            } else {
                write!(f, "{surd}")
            }
        } else {
            let op = if self.b.is_negative() { '-' } else { '+' };
            write!(f, "{}{}{}", format_rational(&self.a), op, surd)
        }
    }
}

fn parse_rational(s: &str, input: &str) -> Result<BigRational> {
    let err = |reason: &str| Error::Parse {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p, q),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| err("bad numerator"))?;
    let q: BigInt = q.parse().map_err(|_| err("bad denominator"))?;
    if q.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(BigRational::new(p, q))
}

fn parse_term(term: &str, input: &str) -> Result<SurdRational> {
    let err = |reason: &str| Error::Parse {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    let (neg, body) = match term.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, term.strip_prefix('+').unwrap_or(term)),
    };
    if body.is_empty() {
        return Err(err("empty term"));
    }
    let value = if let Some(pos) = body.find("sqrt(") {
        let coeff = match &body[..pos] {
            "" => BigRational::one(),
            c => parse_rational(c.strip_suffix('*').ok_or_else(|| err("expected '*' before sqrt"))?, input)?,
        };
        let rest = &body[pos + 5..];
        let close = rest.find(')').ok_or_else(|| err("unclosed sqrt("))?;
        let d: u64 = rest[..close].parse().map_err(|_| err("bad radicand"))?;
        let tail = &rest[close + 1..];
        let coeff = match tail.strip_prefix('/') {
            Some(q) => coeff / parse_rational(q, input)?,
            None if tail.is_empty() => coeff,
            None => return Err(err("trailing characters after sqrt(...)")),
        };
        SurdRational::new(BigRational::zero(), coeff, d)?
    } else {
        SurdRational::rational(parse_rational(body, input)?)
    };
    Ok(if neg { -value } else { value })
}

impl FromStr for SurdRational {
    type Err = Error;

    /// Accepts sums of terms like `3`, `-1/2`, `3/2*sqrt(3)`, `sqrt(3)/2`,
    /// e.g. `"1/2+3/4*sqrt(3)"`. All surd terms must share one radicand.
    fn from_str(input: &str) -> Result<Self> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse {
                input: input.to_string(),
                reason: "empty string".into(),
            });
        }
        let mut terms = Vec::new();
        let mut start = 0;
        let mut depth = 0i32;
        for (i, c) in s.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if depth == 0 && i > start && !s[..i].ends_with(['/', '*']) => {
                    terms.push(&s[start..i]);
                    start = i;
                }
                _ => {}
            }
        }
        terms.push(&s[start..]);
        let mut acc = SurdRational::zero();
        for t in terms {
            acc = acc.checked_add(&parse_term(t, input)?)?;
        }
        Ok(acc)
    }
}

impl serde::Serialize for SurdRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for SurdRational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl PartialOrd for SurdRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let diff = self.checked_sub(other).ok()?;
        Some(diff.signum().cmp(&0))
    }
}

impl Neg for SurdRational {
    type Output = SurdRational;
    fn neg(self) -> SurdRational {
        SurdRational {
            a: -self.a,
            b: -self.b,
            d: self.d,
        }
    }
}

impl Neg for &SurdRational {
    type Output = SurdRational;
    fn neg(self) -> SurdRational {
        -self.clone()
    }
}

// Operator forms panic on a radicand mismatch or division by zero, like the
// integer operators do; use the `checked_*` methods to handle those cases.
macro_rules! forward_op {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&SurdRational> for &SurdRational {
            type Output = SurdRational;
            fn $method(self, rhs: &SurdRational) -> SurdRational {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<SurdRational> for SurdRational {
            type Output = SurdRational;
            fn $method(self, rhs: SurdRational) -> SurdRational {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&SurdRational> for SurdRational {
            type Output = SurdRational;
            fn $method(self, rhs: &SurdRational) -> SurdRational {
                (&self).$method(rhs)
            }
        }
        impl $tr<SurdRational> for &SurdRational {
            type Output = SurdRational;
            fn $method(self, rhs: SurdRational) -> SurdRational {
                self.$method(&rhs)
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);
forward_op!(Div, div, checked_div);

/// `coeff * pi^power`, used to carry constants such as `16 pi^2 / 27`
/// without ever rounding pi away.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiMonomial {
    pub coeff: SurdRational,
    pub pi_power: i32,
}

impl PiMonomial {
    pub fn new(coeff: SurdRational, pi_power: i32) -> Self {
        Self { coeff, pi_power }
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(
            self.coeff.checked_mul(&other.coeff)?,
            self.pi_power + other.pi_power,
        ))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(
            self.coeff.checked_div(&other.coeff)?,
            self.pi_power - other.pi_power,
        ))
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut out = Self::new(SurdRational::one(), 0);
        for _ in 0..e {
            out = out.checked_mul(self).expect("same radicand");
        }
        out
    }

    pub fn to_f64(&self) -> f64 {
        self.coeff.to_f64() * std::f64::consts::PI.powi(self.pi_power)
    }
}

impl fmt::Display for PiMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pi_power {
            0 => write!(f, "{}", self.coeff),
            1 => write!(f, "({})*pi", self.coeff),
            p => write!(f, "({})*pi^{}", self.coeff, p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> SurdRational {
        x.parse().unwrap()
    }

    #[test]
    fn conjugate_product() {
        assert_eq!(s("1+sqrt(3)") * s("1-sqrt(3)"), s("-2"));
        assert!((s("1+sqrt(3)") * s("1-sqrt(3)")).is_rational());
    }

    #[test]
    fn surd_cancels_in_quotient() {
        assert_eq!(s("1/2*sqrt(3)") / s("3/2*sqrt(3)"), s("1/3"));
    }

    #[test]
    fn scalar_times_surd() {
        assert_eq!(s("3") * s("1/2*sqrt(3)"), s("3/2*sqrt(3)"));
    }

    #[test]
    fn division_by_zero_and_mismatch() {
        assert_eq!(s("1").checked_div(&s("0")), Err(Error::DivisionByZero));
        assert_eq!(
            s("sqrt(2)").checked_add(&s("sqrt(3)")),
            Err(Error::RadicandMismatch(2, 3))
        );
        // rationals combine with any field
        assert_eq!(s("sqrt(2)") + s("1/2"), s("1/2+sqrt(2)"));
    }

    #[test]
    fn float_conversion() {
        assert_eq!(s("1/2").to_f64(), 0.5);
        assert_eq!(s("sqrt(3)").to_f64(), 3f64.sqrt());
        // det of the hexagonal lattice, 9*sqrt(3)/2
        assert_eq!(s("9/2*sqrt(3)").to_f64(), 7.794228634059948);
        assert_eq!(s("-sqrt(2)").to_f64(), -std::f64::consts::SQRT_2);
        // near-cancellation keeps full relative accuracy
        let x = s("1351/780-sqrt(3)");
        let expected = 1351.0 / 780.0 - 3f64.sqrt();
        assert!((x.to_f64() - expected).abs() < 1e-15);
        assert!(x.to_f64() > 0.0 && x.to_f64() < 1e-6);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(s("sqrt(12)"), s("2*sqrt(3)"));
        assert_eq!(s("sqrt(3)/2"), s("1/2*sqrt(3)"));
        assert_eq!(s("1/2 + 3/4*sqrt(3)").to_string(), "1/2+3/4*sqrt(3)");
        assert_eq!(s("1/2-3/4*sqrt(3)").to_string(), "1/2-3/4*sqrt(3)");
        assert_eq!(s("-sqrt(5)").to_string(), "-1*sqrt(5)");
        assert_eq!(s("sqrt(4)"), s("2"));
        assert_eq!(s("-3/-6"), s("1/2"));
        assert!("1/0".parse::<SurdRational>().is_err());
        assert!("sqrt(x)".parse::<SurdRational>().is_err());
        assert!("sqrt(2)+sqrt(3)".parse::<SurdRational>().is_err());
        assert!("".parse::<SurdRational>().is_err());
    }

    #[test]
    fn exact_sign_and_order() {
        assert_eq!(s("1351/780-sqrt(3)").signum(), 1);
        assert_eq!(s("1351/781-sqrt(3)").signum(), -1);
        assert!(s("sqrt(3)/2") < s("1"));
        assert!(s("sqrt(2)").partial_cmp(&s("sqrt(3)")).is_none());
    }

    #[test]
    fn pi_monomials() {
        let gamma = PiMonomial::new(s("16/27"), 2);
        let two_pi = PiMonomial::new(s("2"), 1);
        let window = two_pi.checked_div(&gamma).unwrap();
        assert_eq!(window, PiMonomial::new(s("27/8"), -1));
        assert_eq!(window.to_string(), "(27/8)*pi^-1");
    }
}
