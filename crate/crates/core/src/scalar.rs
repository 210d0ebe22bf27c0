//! Coefficient arithmetic for amplitudes and probabilities.
//!
//! Every amplitude produced by the optical pipeline lives in the quadratic
//! extension `Q(√2)` of the rationals: ladder and pair-creation coefficients
//! are rational, and 50:50 beam splitters contribute powers of `1/√2`.
//! [`ExactScalar`] implements that field exactly on top of arbitrary-precision
//! rationals; `f64` implements the same interface for floating-point sweeps at
//! irrational parameter points.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Common interface of the exact and floating coefficient rings.
///
/// The simulation pipeline is generic over this trait; instantiating it with
/// [`ExactScalar`] gives bit-reproducible exact results, instantiating it with
/// `f64` gives the floating fallback mode.
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
    + Div<Output = Self>
    + FromStr
{
    /// True for the exact ring, false for floating point.
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    /// The rational `num/den`. Panics if `den == 0`.
    fn from_ratio(num: i64, den: i64) -> Self;

    /// The element `√2`.
    fn sqrt2() -> Self;

    /// Lifts a float into the ring; `None` for the exact ring, where
    /// transcendental values have no home.
    fn from_f64(x: f64) -> Option<Self>;

    /// Multiplicative inverse; inverting zero is an explicit error.
    fn inv(&self) -> Result<Self, Error>;

    /// Square root where representable: always for `f64` (non-negative
    /// input), and for exact rationals of the form `r²` or `2r²`.
    fn try_sqrt(&self) -> Result<Self, Error>;

    fn to_f64(&self) -> f64;

    /// Sign of the represented real number: -1, 0 or +1.
    fn sign(&self) -> i32;

    /// True when the value carries no `√2` component. Floating values carry
    /// no symbolic radical, so this is always true for `f64`.
    fn is_rational(&self) -> bool;

    /// Exact textual rendering (`"3/4"`, `"1/2+1/4√2"`); `None` in float mode.
    fn exact_str(&self) -> Option<String>;

    /// Equality up to representation noise: exact comparison in the exact
    /// ring, small relative tolerance for floats.
    fn approx_eq(&self, other: &Self) -> bool;

    fn is_negative(&self) -> bool {
        self.sign() < 0
    }

    fn is_positive(&self) -> bool {
        self.sign() > 0
    }

    fn powi(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }

    fn half(&self) -> Self {
        self.clone() * Self::from_ratio(1, 2)
    }
}

/// An element `rational + radical·√2` of `Q(√2)` with arbitrary-precision
/// rational parts.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ExactScalar {
    rational: BigRational,
    radical: BigRational,
}

impl ExactScalar {
    pub fn new(rational: BigRational, radical: BigRational) -> Self {
        ExactScalar { rational, radical }
    }

    pub fn from_big_ratio(num: BigInt, den: BigInt) -> Self {
        ExactScalar {
            rational: BigRational::new(num, den),
            radical: BigRational::zero(),
        }
    }

    /// Injects a rational as the coefficient of `√2`.
    pub fn sqrt2_times(r: BigRational) -> Self {
        ExactScalar {
            rational: BigRational::zero(),
            radical: r,
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn radical_part(&self) -> &BigRational {
        &self.radical
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.radical.is_zero() {
            return write!(f, "{}", self.rational);
        }
        let rad = |r: &BigRational| {
            if r.abs().is_one() {
                "√2".to_string()
            } else {
                format!("{}√2", r.abs())
            }
        };
        if self.rational.is_zero() {
            if self.radical.is_negative() {
                write!(f, "-{}", rad(&self.radical))
            } else {
                write!(f, "{}", rad(&self.radical))
            }
        } else if self.radical.is_negative() {
            write!(f, "{}-{}", self.rational, rad(&self.radical))
        } else {
            write!(f, "{}+{}", self.rational, rad(&self.radical))
        }
    }
}

impl FromStr for ExactScalar {
    type Err = Error;

    /// Parses plain rationals: `"3"`, `"-3/4"`. Radical literals are never
    /// needed as inputs; they only arise inside the pipeline.
    fn from_str(s: &str) -> Result<Self, Error> {
        let r = BigRational::from_str(s.trim())
            .map_err(|_| Error::InvalidParameter(format!("not a rational number: `{s}`")))?;
        Ok(ExactScalar::new(r, BigRational::zero()))
    }
}

impl Add for ExactScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        ExactScalar {
            rational: self.rational + rhs.rational,
            radical: self.radical + rhs.radical,
        }
    }
}

impl Sub for ExactScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        ExactScalar {
            rational: self.rational - rhs.rational,
            radical: self.radical - rhs.radical,
        }
    }
}

impl Mul for ExactScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        // (a + b√2)(c + d√2) = (ac + 2bd) + (ad + bc)√2
        let two = BigRational::from_integer(BigInt::from(2));
        ExactScalar {
            rational: &self.rational * &rhs.rational + two * &self.radical * &rhs.radical,
            radical: &self.rational * &rhs.radical + &self.radical * &rhs.rational,
        }
    }
}

impl Neg for ExactScalar {
    type Output = Self;
    fn neg(self) -> Self {
        ExactScalar {
            rational: -self.rational,
            radical: -self.radical,
        }
    }
}

impl Div for ExactScalar {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)] // division is multiplication by the inverse
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.inv().expect("division by zero");
        self * inv
    }
}

impl Zero for ExactScalar {
    fn zero() -> Self {
        ExactScalar::default()
    }
    fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.radical.is_zero()
    }
}

impl One for ExactScalar {
    fn one() -> Self {
        ExactScalar {
            rational: BigRational::one(),
            radical: BigRational::zero(),
        }
    }
}

/// True when `n` is a perfect square, returning its root.
fn perfect_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let root = n.sqrt();
    (&root * &root == *n).then_some(root)
}

impl Scalar for ExactScalar {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        ExactScalar::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        ExactScalar::from_big_ratio(BigInt::from(num), BigInt::from(den))
    }

    fn sqrt2() -> Self {
        ExactScalar::sqrt2_times(BigRational::one())
    }

    fn from_f64(_x: f64) -> Option<Self> {
        None
    }

    fn inv(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // 1/(a + b√2) = (a - b√2)/(a² - 2b²); the norm vanishes only at zero
        // because √2 is irrational.
        let two = BigRational::from_integer(BigInt::from(2));
        let norm = &self.rational * &self.rational - two * &self.radical * &self.radical;
        debug_assert!(!norm.is_zero());
        Ok(ExactScalar {
            rational: &self.rational / &norm,
            radical: -&self.radical / &norm,
        })
    }

    fn try_sqrt(&self) -> Result<Self, Error> {
        if !self.radical.is_zero() {
            return Err(Error::IrrationalSqrt);
        }
        if self.rational.is_negative() {
            return Err(Error::IrrationalSqrt);
        }
        if self.rational.is_zero() {
            return Ok(ExactScalar::zero());
        }
        // √(p/q) = √(pq)/q; succeed when pq = s² or pq = 2s².
        let p = self.rational.numer();
        let q = self.rational.denom();
        let pq = p * q;
        if let Some(s) = perfect_sqrt(&pq) {
            return Ok(ExactScalar::from_big_ratio(s, q.clone()));
        }
        let half = &pq / BigInt::from(2);
        if &half * BigInt::from(2) == pq {
            if let Some(s) = perfect_sqrt(&half) {
                return Ok(ExactScalar::sqrt2_times(BigRational::new(s, q.clone())));
            }
        }
        Err(Error::IrrationalSqrt)
    }

    fn to_f64(&self) -> f64 {
        let a = self.rational.to_f64().unwrap_or(f64::NAN);
        let b = self.radical.to_f64().unwrap_or(f64::NAN);
        a + b * std::f64::consts::SQRT_2
    }

    fn sign(&self) -> i32 {
        let sa = match (self.rational.is_positive(), self.rational.is_negative()) {
            (true, _) => 1,
            (_, true) => -1,
            _ => 0,
        };
        let sb = match (self.radical.is_positive(), self.radical.is_negative()) {
            (true, _) => 1,
            (_, true) => -1,
            _ => 0,
        };
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // Opposite signs: a + b√2 has the sign of the part with the larger
        // square (a² vs 2b²); equality would force √2 rational.
        let two = BigRational::from_integer(BigInt::from(2));
        let a2 = &self.rational * &self.rational;
        let b2 = two * &self.radical * &self.radical;
        if a2 > b2 {
            sa
        } else {
            sb
        }
    }

    fn is_rational(&self) -> bool {
        self.radical.is_zero()
    }

    fn exact_str(&self) -> Option<String> {
        Some(self.to_string())
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        num as f64 / den as f64
    }

    fn sqrt2() -> Self {
        std::f64::consts::SQRT_2
    }

    fn from_f64(x: f64) -> Option<Self> {
        Some(x)
    }

    fn inv(&self) -> Result<Self, Error> {
        if *self == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(1.0 / self)
    }

    fn try_sqrt(&self) -> Result<Self, Error> {
        if *self < 0.0 {
            return Err(Error::IrrationalSqrt);
        }
        Ok(self.sqrt())
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn sign(&self) -> i32 {
        if *self > 0.0 {
            1
        } else if *self < 0.0 {
            -1
        } else {
            0
        }
    }

    fn is_rational(&self) -> bool {
        true
    }

    fn exact_str(&self) -> Option<String> {
        None
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = 1.0_f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= 1e-12 * scale
    }
}

/// `n!` as a scalar.
pub fn factorial<S: Scalar>(n: u32) -> S {
    let mut acc = S::one();
    for k in 2..=i64::from(n) {
        acc = acc * S::from_int(k);
    }
    acc
}

/// Binomial coefficient as a scalar.
pub fn binomial<S: Scalar>(n: u32, k: u32) -> S {
    if k > n {
        return S::zero();
    }
    let mut acc: i64 = 1;
    for i in 0..i64::from(k) {
        acc = acc * (i64::from(n) - i) / (i + 1);
    }
    S::from_int(acc)
}
