//! The universal scalar: exact rationals, quadratic surds `a + b*sqrt(d)`
//! over a single radicand, and certified intervals `value ± err`.
//!
//! Exact variants support total comparison, exact floor/ceil and closed
//! arithmetic (surds within one radicand). Interval scalars propagate their
//! error bound conservatively through every operation; any query that the
//! bound cannot certify (a floor, an ordering) fails with
//! [`Error::PrecisionExhausted`] instead of guessing.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Quadratic surd `a + b*sqrt(d)` with `b != 0` and `d` squarefree, `d >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Surd {
    pub a: BigRational,
    pub b: BigRational,
    pub d: u64,
}

/// Certified interval: the true value lies in `[value - err, value + err]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Approx {
    pub value: BigRational,
    pub err: BigRational,
}

/// Exact or certified scalar.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Real {
    Rational(BigRational),
    Surd(Surd),
    Approx(Approx),
}

/// Denominator cap used when rounding interval error bounds upward, so that
/// long computations do not accumulate giant exact error fractions.
const ERR_DENOM_BITS: u64 = 128;

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn brat(p: i64, q: i64) -> BigRational {
    BigRational::new(big(p), big(q))
}

/// Round a nonnegative rational upward onto the dyadic grid `k / 2^ERR_DENOM_BITS`.
fn round_err_up(e: &BigRational) -> BigRational {
    debug_assert!(!e.is_negative());
    if e.is_zero() {
        return e.clone();
    }
    let denom = BigInt::one() << ERR_DENOM_BITS;
    let scaled = e * BigRational::from_integer(denom.clone());
    let ceil = scaled.ceil().to_integer();
    BigRational::new(ceil, denom)
}

/// `floor(sqrt(n))` for a nonnegative big integer.
fn isqrt(n: &BigInt) -> BigInt {
    use num_integer::Roots;
    n.sqrt()
}

/// Rational enclosure `lo <= sqrt(d) <= hi` with `hi - lo = 2^-bits`.
fn sqrt_enclosure(d: u64, bits: u64) -> (BigRational, BigRational) {
    let scale = BigInt::one() << bits;
    let scaled = BigInt::from(d) * (&scale * &scale);
    let root = isqrt(&scaled);
    let lo = BigRational::new(root.clone(), scale.clone());
    let hi = BigRational::new(root + 1, scale);
    (lo, hi)
}

/// Split `n > 0` as `c^2 * d` with `d` squarefree. Trial division up to 10^6,
/// then a perfect-square check on the cofactor.
fn squarefree_decompose(mut n: u64) -> Result<(u64, u64)> {
    let mut square_part: u64 = 1;
    let mut p: u64 = 2;
    while p <= 1_000_000 && p * p <= n {
        while n % (p * p) == 0 {
            n /= p * p;
            square_part *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        let r = (n as f64).sqrt() as u64;
        for c in r.saturating_sub(1)..=r + 1 {
            if c > 0 && c * c == n {
                return Ok((square_part * c, 1));
            }
        }
    }
    Ok((square_part, n))
}

impl Real {
    pub fn zero() -> Self {
        Real::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Real::Rational(BigRational::one())
    }

    pub fn integer(n: i64) -> Self {
        Real::Rational(BigRational::from_integer(big(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Real::Rational(BigRational::from_integer(n))
    }

    /// `p/q` in lowest terms. Panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Real::Rational(brat(p, q))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Real::Rational(r)
    }

    pub fn approx(value: BigRational, err: BigRational) -> Self {
        assert!(!err.is_negative(), "error bound must be nonnegative");
        Real::Approx(Approx { value, err })
    }

    /// Exact `sqrt(n)` for a nonnegative integer, normalized to `c*sqrt(d)`
    /// with `d` squarefree (and to a rational when `n` is a perfect square).
    pub fn sqrt_u64(n: u64) -> Result<Self> {
        if n == 0 {
            return Ok(Real::zero());
        }
        let (c, d) = squarefree_decompose(n)?;
        if d == 1 {
            return Ok(Real::integer(c as i64));
        }
        Ok(Real::Surd(Surd {
            a: BigRational::zero(),
            b: BigRational::from_integer(BigInt::from(c)),
            d,
        }))
    }

    /// Exact `sqrt(p/q)` for a nonnegative rational with `p, q` fitting in u64.
    pub fn sqrt_rational(r: &BigRational) -> Result<Self> {
        if r.is_negative() {
            return Err(Error::Domain("sqrt of a negative number".into()));
        }
        if r.is_zero() {
            return Ok(Real::zero());
        }
        // sqrt(p/q) = sqrt(p*q) / q
        let p = r.numer();
        let q = r.denom();
        let pq = p * q;
        let pq_u64 = pq
            .to_u64()
            .ok_or_else(|| Error::Domain("radicand too large to normalize".into()))?;
        let root = Real::sqrt_u64(pq_u64)?;
        Ok(&root / &Real::from_rational(BigRational::from_integer(q.clone())))
    }

    fn normalize_surd(a: BigRational, b: BigRational, d: u64) -> Real {
        if b.is_zero() || d == 1 {
            debug_assert!(d == 1 || b.is_zero());
            if d == 1 {
                return Real::Rational(a + b);
            }
            return Real::Rational(a);
        }
        Real::Surd(Surd { a, b, d })
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Real::Approx(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Real::Rational(r) => Some(r),
            _ => None,
        }
    }

    pub fn is_zero_exact(&self) -> bool {
        matches!(self, Real::Rational(r) if r.is_zero())
    }

    /// Rational enclosure `[lo, hi]` of the true value. For surds the
    /// enclosure is tightened below `2^-ERR_DENOM_BITS`.
    pub fn rational_bounds(&self) -> (BigRational, BigRational) {
        match self {
            Real::Rational(r) => (r.clone(), r.clone()),
            Real::Approx(ap) => (&ap.value - &ap.err, &ap.value + &ap.err),
            Real::Surd(s) => {
                let (lo, hi) = sqrt_enclosure(s.d, ERR_DENOM_BITS);
                if s.b.is_negative() {
                    (&s.a + &s.b * hi, &s.a + &s.b * lo)
                } else {
                    (&s.a + &s.b * lo, &s.a + &s.b * hi)
                }
            }
        }
    }

    /// Demote to an interval scalar (error 0 for rationals).
    pub fn to_approx(&self) -> Approx {
        match self {
            Real::Rational(r) => Approx {
                value: r.clone(),
                err: BigRational::zero(),
            },
            Real::Approx(ap) => ap.clone(),
            Real::Surd(_) => {
                let (lo, hi) = self.rational_bounds();
                let two = brat(2, 1);
                let value = (&lo + &hi) / &two;
                let err = round_err_up(&((&hi - &lo) / &two));
                Approx { value, err }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Rational(r) => rational_to_f64(r),
            Real::Approx(ap) => rational_to_f64(&ap.value),
            Real::Surd(s) => {
                rational_to_f64(&s.a) + rational_to_f64(&s.b) * (s.d as f64).sqrt()
            }
        }
    }

    /// Exact sign for exact variants; certified sign for intervals.
    pub fn try_sign(&self) -> Result<Ordering> {
        match self {
            Real::Rational(r) => Ok(r.cmp(&BigRational::zero())),
            Real::Surd(s) => Ok(surd_sign(s)),
            Real::Approx(ap) => {
                if ap.value.abs() > ap.err {
                    Ok(ap.value.cmp(&BigRational::zero()))
                } else if ap.value.is_zero() && ap.err.is_zero() {
                    Ok(Ordering::Equal)
                } else {
                    Err(Error::PrecisionExhausted(format!(
                        "sign of {} ± {} is ambiguous",
                        ap.value, ap.err
                    )))
                }
            }
        }
    }

    /// Certified three-way comparison. Exact inputs always succeed.
    pub fn try_cmp(&self, other: &Real) -> Result<Ordering> {
        (self - other).try_sign()
    }

    /// Comparison that must be decidable; panics otherwise. Use only with
    /// exact scalars.
    pub fn cmp_exact(&self, other: &Real) -> Ordering {
        self.try_cmp(other).expect("comparison of exact scalars")
    }

    /// Exact floor for exact variants; certified floor for intervals.
    pub fn floor(&self) -> Result<BigInt> {
        match self {
            Real::Rational(r) => Ok(r.floor().to_integer()),
            Real::Surd(_) => {
                let (lo, hi) = self.rational_bounds();
                let fl = lo.floor().to_integer();
                let fh = hi.floor().to_integer();
                if fl == fh {
                    return Ok(fl);
                }
                // The enclosure straddles an integer; resolve exactly.
                // A surd is irrational, so equality with fh cannot occur.
                let boundary = Real::from_bigint(fh.clone());
                match self.try_cmp(&boundary)? {
                    Ordering::Less => Ok(fl),
                    _ => Ok(fh),
                }
            }
            Real::Approx(ap) => {
                let lo = &ap.value - &ap.err;
                let hi = &ap.value + &ap.err;
                let fl = lo.floor().to_integer();
                let fh = hi.floor().to_integer();
                if fl == fh {
                    Ok(fl)
                } else {
                    Err(Error::PrecisionExhausted(format!(
                        "floor of {} ± {} is ambiguous",
                        ap.value, ap.err
                    )))
                }
            }
        }
    }

    pub fn ceil(&self) -> Result<BigInt> {
        Ok(-((-self).floor()?))
    }

    /// Fractional part `x - floor(x)`, in `[0, 1)` for exact inputs.
    pub fn fract(&self) -> Result<Real> {
        let f = self.floor()?;
        Ok(self - &Real::from_bigint(f))
    }

    pub fn abs(&self) -> Real {
        match self.try_sign() {
            Ok(Ordering::Less) => -self,
            Ok(_) => self.clone(),
            Err(_) => {
                // Ambiguous interval around zero: |x| is in [0, |v| + e].
                let ap = self.to_approx();
                let m = ap.value.abs() + ap.err;
                let half = &m / brat(2, 1);
                Real::approx(half.clone(), round_err_up(&half))
            }
        }
    }

    /// Signed integer power (negative exponents via the exact reciprocal).
    pub fn pow_i64(&self, e: i64) -> Real {
        if e < 0 {
            return Real::one() / self.pow_i64(-e);
        }
        let mut base = self.clone();
        let mut acc = Real::one();
        let mut k = e as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Error bound carried by this scalar (zero for exact variants).
    pub fn err_bound(&self) -> BigRational {
        match self {
            Real::Approx(ap) => ap.err.clone(),
            _ => BigRational::zero(),
        }
    }

    /// Decimal rendering with enough digits to resolve `resolution`.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let (lo, hi) = self.rational_bounds();
        let mid = (&lo + &hi) / brat(2, 1);
        let neg = mid.is_negative();
        let mid = mid.abs();
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = (&mid * BigRational::from_integer(scale.clone()))
            .round()
            .to_integer();
        let (ip, fp) = scaled.div_rem(&scale);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{ip}")
        } else {
            format!("{sign}{ip}.{:0>width$}", fp.abs().to_string(), width = digits)
        }
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back through a scaled quotient when numer/denom overflow f64.
        let num_bits = r.numer().bits() as i64;
        let den_bits = r.denom().bits() as i64;
        let shift = (num_bits.max(den_bits) - 52).max(0);
        let n = r.numer() >> shift;
        let d = r.denom() >> shift;
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    })
}

fn surd_sign(s: &Surd) -> Ordering {
    let za = s.a.cmp(&BigRational::zero());
    let zb = s.b.cmp(&BigRational::zero());
    debug_assert_ne!(zb, Ordering::Equal);
    match (za, zb) {
        (Ordering::Equal, _) => zb,
        (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
        (Ordering::Less, Ordering::Less) => Ordering::Less,
        _ => {
            // a and b have opposite signs; compare a^2 with b^2 d.
            let a2 = &s.a * &s.a;
            let b2d = &s.b * &s.b * BigRational::from_integer(BigInt::from(s.d));
            match a2.cmp(&b2d) {
                Ordering::Greater => za,
                Ordering::Less => zb,
                Ordering::Equal => unreachable!("sqrt(d) is irrational"),
            }
        }
    }
}

fn add_impl(x: &Real, y: &Real) -> Real {
    use Real::*;
    match (x, y) {
        (Rational(a), Rational(b)) => Rational(a + b),
        (Rational(r), Surd(s)) | (Surd(s), Rational(r)) => Real::normalize_surd(
            &s.a + r,
            s.b.clone(),
            s.d,
        ),
        (Surd(s), Surd(t)) if s.d == t.d => {
            Real::normalize_surd(&s.a + &t.a, &s.b + &t.b, s.d)
        }
        _ => {
            let a = x.to_approx();
            let b = y.to_approx();
            Real::approx(&a.value + &b.value, round_err_up(&(&a.err + &b.err)))
        }
    }
}

fn mul_impl(x: &Real, y: &Real) -> Real {
    use Real::*;
    match (x, y) {
        (Rational(a), Rational(b)) => Rational(a * b),
        (Rational(r), Surd(s)) | (Surd(s), Rational(r)) => {
            if r.is_zero() {
                return Real::zero();
            }
            Real::normalize_surd(&s.a * r, &s.b * r, s.d)
        }
        (Surd(s), Surd(t)) if s.d == t.d => {
            let d = BigRational::from_integer(BigInt::from(s.d));
            Real::normalize_surd(
                &s.a * &t.a + &s.b * &t.b * &d,
                &s.a * &t.b + &s.b * &t.a,
                s.d,
            )
        }
        _ => {
            let a = x.to_approx();
            let b = y.to_approx();
            let value = &a.value * &b.value;
            let err =
                a.value.abs() * &b.err + b.value.abs() * &a.err + &a.err * &b.err;
            Real::approx(value, round_err_up(&err))
        }
    }
}

fn recip_impl(x: &Real) -> Real {
    use Real::*;
    match x {
        Rational(r) => {
            assert!(!r.is_zero(), "division by zero");
            Rational(r.recip())
        }
        Surd(s) => {
            // 1/(a + b sqrt(d)) = (a - b sqrt(d)) / (a^2 - b^2 d)
            let d = BigRational::from_integer(BigInt::from(s.d));
            let norm = &s.a * &s.a - &s.b * &s.b * &d;
            assert!(!norm.is_zero(), "division by zero surd");
            Real::normalize_surd(&s.a / &norm, -(&s.b / &norm), s.d)
        }
        Approx(ap) => {
            let lo_abs = ap.value.abs() - &ap.err;
            assert!(
                lo_abs.is_positive(),
                "reciprocal of an interval containing zero"
            );
            let value = ap.value.recip();
            // |1/v - 1/(v±e)| <= e / (|v| (|v| - e))
            let err = &ap.err / (ap.value.abs() * &lo_abs);
            Real::approx(value, round_err_up(&err))
        }
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $f:expr) => {
        impl $trait<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                $f(self, rhs)
            }
        }
        impl $trait<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                $f(&self, &rhs)
            }
        }
        impl $trait<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                $f(&self, rhs)
            }
        }
        impl $trait<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                $f(self, &rhs)
            }
        }
    };
}

impl_binop!(Add, add, add_impl);
impl_binop!(Mul, mul, mul_impl);
impl_binop!(Sub, sub, |a: &Real, b: &Real| add_impl(a, &-b));
impl_binop!(Div, div, |a: &Real, b: &Real| mul_impl(a, &recip_impl(b)));

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        match self {
            Real::Rational(r) => Real::Rational(-r),
            Real::Surd(s) => Real::Surd(Surd {
                a: -&s.a,
                b: -&s.b,
                d: s.d,
            }),
            Real::Approx(ap) => Real::Approx(Approx {
                value: -&ap.value,
                err: ap.err.clone(),
            }),
        }
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.try_cmp(other).ok()
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Rational(r) => write!(f, "{}", fmt_rational(r)),
            Real::Surd(s) => {
                let mut out = String::new();
                if !s.a.is_zero() {
                    out.push_str(&fmt_rational(&s.a));
                    if s.b.is_positive() {
                        out.push('+');
                    }
                }
                let b_abs = s.b.abs();
                if s.b.is_negative() {
                    out.push('-');
                }
                if !b_abs.is_one() {
                    out.push_str(&fmt_rational(&b_abs));
                    out.push('*');
                }
                out.push_str(&format!("sqrt({})", s.d));
                write!(f, "{out}")
            }
            Real::Approx(ap) => {
                write!(f, "{}±{}", fmt_rational(&ap.value), fmt_rational(&ap.err))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Sqrt,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

fn lex(input: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let bytes = input.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                toks.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                toks.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                toks.push(Tok::Star);
                i += 1;
            }
            '/' => {
                toks.push(Tok::Slash);
                i += 1;
            }
            '(' => {
                toks.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                toks.push(Tok::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                // optional exponent
                if i < bytes.len()
                    && matches!(bytes[i] as char, 'e' | 'E')
                    && i + 1 < bytes.len()
                    && matches!(bytes[i + 1] as char, '0'..='9' | '+' | '-')
                {
                    i += 2;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                }
                toks.push(Tok::Num(parse_decimal(&input[start..i])?));
            }
            's' => {
                if input[i..].starts_with("sqrt") {
                    i += 4;
                    toks.push(Tok::Sqrt);
                    // tolerate the bare form `sqrt5`
                    let start = i;
                    while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                        i += 1;
                    }
                    if i > start {
                        toks.push(Tok::LParen);
                        toks.push(Tok::Num(parse_decimal(&input[start..i])?));
                        toks.push(Tok::RParen);
                    }
                } else {
                    return Err(Error::Parse(format!("unexpected character at {i}: {input}")));
                }
            }
            _ => return Err(Error::Parse(format!("unexpected character '{c}' in '{input}'"))),
        }
    }
    Ok(toks)
}

/// Exact rational value of a decimal literal such as `0.25` or `1e-12`.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..]
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in '{s}'")))?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (int_part, frac_part) = match mant.find('.') {
        Some(pos) => (&mant[..pos], &mant[pos + 1..]),
        None => (mant, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("empty number '{s}'")));
    }
    let digits = format!("{int_part}{frac_part}");
    let n = BigInt::from_str(&digits).map_err(|_| Error::Parse(format!("bad number '{s}'")))?;
    let shift = frac_part.len() as i64 - exp;
    let base = BigInt::from(10u32);
    let r = if shift >= 0 {
        BigRational::new(n, base.pow(shift as u32))
    } else {
        BigRational::from_integer(n * base.pow((-shift) as u32))
    };
    Ok(r)
}

struct Parser<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Real> {
        let mut acc = self.term()?;
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Plus => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Real> {
        let mut acc = self.factor()?;
        while let Some(tok) = self.peek() {
            match tok {
                Tok::Star => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Tok::Slash => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    if rhs.is_zero_exact() {
                        return Err(Error::Parse("division by zero".into()));
                    }
                    acc = &acc / &rhs;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Real> {
        match self.next() {
            Some(Tok::Num(r)) => Ok(Real::Rational(r.clone())),
            Some(Tok::Minus) => Ok(-self.factor()?),
            Some(Tok::Plus) => self.factor(),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::Parse("missing ')'".into())),
                }
            }
            Some(Tok::Sqrt) => {
                let arg = self.factor()?;
                let r = arg
                    .as_rational()
                    .ok_or_else(|| Error::Parse("sqrt of a non-rational expression".into()))?;
                Real::sqrt_rational(r)
            }
            _ => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}

impl FromStr for Real {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let toks = lex(s.trim())?;
        let mut p = Parser { toks: &toks, pos: 0 };
        let v = p.expr()?;
        if p.pos != toks.len() {
            return Err(Error::Parse(format!("trailing input in '{s}'")));
        }
        if !v.is_exact() {
            return Err(Error::Parse(
                "expression mixes incompatible radicands; not exactly representable".into(),
            ));
        }
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// Serde: exact scalars as display strings, intervals as {value, abs_error}
// ---------------------------------------------------------------------------

impl serde::Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        match self {
            Real::Approx(ap) => {
                let mut st = ser.serialize_struct("Approx", 2)?;
                st.serialize_field("value", &fmt_rational(&ap.value))?;
                st.serialize_field("abs_error", &fmt_rational(&ap.err))?;
                st.end()
            }
            _ => ser.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> serde::Deserialize<'de> for Real {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Exact(String),
            Interval { value: String, abs_error: String },
        }
        match Repr::deserialize(de)? {
            Repr::Exact(s) => s.parse().map_err(DeError::custom),
            Repr::Interval { value, abs_error } => {
                let v: Real = value.parse().map_err(DeError::custom)?;
                let e: Real = abs_error.parse().map_err(DeError::custom)?;
                match (v, e) {
                    (Real::Rational(v), Real::Rational(e)) => Ok(Real::approx(v, e)),
                    _ => Err(DeError::custom("interval fields must be rational")),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Real {
        Real::ratio(p, q)
    }

    #[test]
    fn surd_arithmetic_stays_exact() {
        let golden = (&Real::sqrt_u64(5).unwrap() - &Real::one()) / &r(2, 1);
        // golden satisfies x^2 + x - 1 = 0
        let lhs = &(&golden * &golden) + &golden;
        assert_eq!(lhs, Real::one());
    }

    #[test]
    fn surd_floor_and_fract() {
        let root2 = Real::sqrt_u64(2).unwrap();
        assert_eq!(root2.floor().unwrap(), big(1));
        assert_eq!((-&root2).floor().unwrap(), big(-2));
        let f = root2.fract().unwrap();
        assert!(f.try_sign().unwrap() == Ordering::Greater);
        assert!(f.try_cmp(&Real::one()).unwrap() == Ordering::Less);
    }

    #[test]
    fn sqrt_normalizes_square_factors() {
        assert_eq!(Real::sqrt_u64(4).unwrap(), r(2, 1));
        let s12 = Real::sqrt_u64(12).unwrap();
        match &s12 {
            Real::Surd(s) => {
                assert_eq!(s.d, 3);
                assert_eq!(s.b, brat(2, 1));
            }
            _ => panic!("expected surd"),
        }
    }

    #[test]
    fn mixing_radicands_demotes_with_error() {
        let x = &Real::sqrt_u64(2).unwrap() + &Real::sqrt_u64(3).unwrap();
        match &x {
            Real::Approx(ap) => {
                let true_val = 2f64.sqrt() + 3f64.sqrt();
                assert!((rational_to_f64(&ap.value) - true_val).abs() < 1e-20);
                assert!(ap.err.is_positive());
            }
            _ => panic!("expected interval"),
        }
    }

    #[test]
    fn interval_floor_certifies_or_fails() {
        let near_two = Real::approx(brat(19999, 10000), brat(1, 10000));
        assert!(near_two.floor().is_err());
        let safely_below = Real::approx(brat(19, 10), brat(1, 100));
        assert_eq!(safely_below.floor().unwrap(), big(1));
    }

    #[test]
    fn parse_round_trips() {
        for s in ["2/5", "-7/3", "42", "(sqrt5-1)/2", "sqrt(2)-1", "-1/2+1/2*sqrt(5)"] {
            let v: Real = s.parse().unwrap();
            let again: Real = v.to_string().parse().unwrap();
            assert_eq!(v, again, "{s}");
        }
        let quarter: Real = "0.25".parse().unwrap();
        assert_eq!(quarter, r(1, 4));
        let tiny: Real = "1e-12".parse().unwrap();
        assert_eq!(tiny, Real::from_rational(BigRational::new(big(1), BigInt::from(10u64).pow(12))));
    }

    #[test]
    fn fractional_part_of_negatives_lands_in_unit_interval() {
        let x = r(-7, 3);
        let f = x.fract().unwrap();
        assert_eq!(f, r(2, 3));
    }

    #[test]
    fn json_representation_round_trips() {
        let vals = vec![
            r(5, 12),
            (&Real::sqrt_u64(5).unwrap() - &Real::one()) / &r(2, 1),
            Real::approx(brat(1234, 1000), brat(1, 1000000)),
        ];
        for v in vals {
            let js = serde_json::to_string(&v).unwrap();
            let back: Real = serde_json::from_str(&js).unwrap();
            assert_eq!(v, back);
        }
    }
}
