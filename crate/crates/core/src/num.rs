//! Arithmetic used across the workbench.
//!
//! Two scalar kinds exist: exact rationals (line and matrix metrics, whose
//! inputs are decimal literals) and `f64` (planar metrics, whose Euclidean
//! distances are generally irrational). Hot loops in the greedy engine and
//! the flow solver run on a cheaper [`Key`] type: integer ticks of a common
//! decimal denominator for exact spaces, the float itself otherwise.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::metric::{Kernel, MetricError, MetricSpace, PointId};

pub type Rational = BigRational;

/// Relative tolerance applied to every float comparison.
pub const FLOAT_REL_TOL: f64 = 1e-9;

/// Field-like scalar the analysis and the public results are expressed in.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Sum
{
    type Key: Key;
    const EXACT: bool;

    /// Builds the fast distance kernel for `space` in this arithmetic.
    fn kernel(space: &MetricSpace) -> Result<Kernel<Self::Key>, MetricError>;
    fn from_key(key: Self::Key, kernel: &Kernel<Self::Key>) -> Self;
    /// Distance evaluated directly on the stored coordinates, bypassing kernels.
    fn metric_distance(space: &MetricSpace, a: PointId, b: PointId) -> Result<Self, MetricError>;
    fn from_int(v: i64) -> Self;
    fn from_ratio(numer: i64, denom: i64) -> Self;
    /// `self <= rhs`, exactly or within [`FLOAT_REL_TOL`].
    fn le_tol(&self, rhs: &Self) -> bool;
    fn eq_tol(&self, rhs: &Self) -> bool {
        self.le_tol(rhs) && rhs.le_tol(self)
    }
    fn to_f64(&self) -> f64;
    fn to_number(&self) -> Number;
}

/// Additive key used inside the greedy scan and the shortest-path search.
pub trait Key:
    Copy + fmt::Debug + PartialOrd + Send + Sync + 'static + Add<Output = Self> + Sub<Output = Self> + Neg<Output = Self>
{
    const ZERO: Self;
    fn abs(self) -> Self;
    /// Clamps tiny negative rounding residue to zero; identity for exact keys.
    fn clamp_nonneg(self) -> Self;
    fn planar(a: [f64; 2], b: [f64; 2]) -> Self;
    /// `self <= rhs` up to a tolerance proportional to `scale`.
    fn le_within(self, rhs: Self, scale: Self) -> bool;
}

impl Key for i128 {
    const ZERO: Self = 0;

    fn abs(self) -> Self {
        i128::abs(self)
    }

    fn clamp_nonneg(self) -> Self {
        self
    }

    fn planar(_: [f64; 2], _: [f64; 2]) -> Self {
        unreachable!("exact kernels never hold planar points")
    }

    fn le_within(self, rhs: Self, _scale: Self) -> bool {
        self <= rhs
    }
}

impl Key for f64 {
    const ZERO: Self = 0.0;

    fn abs(self) -> Self {
        f64::abs(self)
    }

    fn clamp_nonneg(self) -> Self {
        self.max(0.0)
    }

    fn planar(a: [f64; 2], b: [f64; 2]) -> Self {
        (a[0] - b[0]).hypot(a[1] - b[1])
    }

    fn le_within(self, rhs: Self, scale: Self) -> bool {
        self <= rhs + FLOAT_REL_TOL * scale.abs().max(1.0)
    }
}

impl Scalar for Rational {
    type Key = i128;
    const EXACT: bool = true;

    fn kernel(space: &MetricSpace) -> Result<Kernel<i128>, MetricError> {
        Kernel::exact(space)
    }

    fn from_key(key: i128, kernel: &Kernel<i128>) -> Self {
        Rational::new(BigInt::from(key), BigInt::from(kernel.denominator()))
    }

    fn metric_distance(space: &MetricSpace, a: PointId, b: PointId) -> Result<Self, MetricError> {
        space.exact_distance(a, b)
    }

    fn from_int(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Rational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn le_tol(&self, rhs: &Self) -> bool {
        self <= rhs
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn to_number(&self) -> Number {
        Number::Exact(self.clone())
    }
}

impl Scalar for f64 {
    type Key = f64;
    const EXACT: bool = false;

    fn kernel(space: &MetricSpace) -> Result<Kernel<f64>, MetricError> {
        Ok(Kernel::float(space))
    }

    fn from_key(key: f64, _kernel: &Kernel<f64>) -> Self {
        key
    }

    fn metric_distance(space: &MetricSpace, a: PointId, b: PointId) -> Result<Self, MetricError> {
        space.float_distance(a, b)
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn le_tol(&self, rhs: &Self) -> bool {
        let scale = self.abs().max(rhs.abs()).max(1.0);
        *self <= *rhs + FLOAT_REL_TOL * scale
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn to_number(&self) -> Number {
        Number::Float(*self)
    }
}

pub fn ratio_to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or_else(|| {
        // Huge numerators/denominators: fall back to a scaled division.
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// A type-erased value for reports and CSV output.
#[derive(Debug, Clone, PartialEq)]
pub enum Number {
    Exact(Rational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(r) => ratio_to_f64(r),
            Number::Float(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Number::Exact(r) => Some(r),
            Number::Float(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Exact(r) => r.is_zero(),
            Number::Float(x) => *x == 0.0,
        }
    }

    /// `a / b` for two numbers of the same kind; mixed kinds go through `f64`.
    pub fn ratio(&self, denom: &Number) -> Option<Number> {
        if denom.is_zero() {
            return None;
        }
        Some(match (self, denom) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a / b),
            _ => Number::Float(self.to_f64() / denom.to_f64()),
        })
    }

    /// JSON form: a fraction string when `exact` and rational, else a number.
    pub fn to_json(&self, exact: bool) -> serde_json::Value {
        match self {
            Number::Exact(r) if exact => serde_json::Value::String(render_fraction(r)),
            _ => serde_json::Number::from_f64(self.to_f64())
                .map(serde_json::Value::Number)
                .unwrap_or_else(|| serde_json::Value::String(self.render(false))),
        }
    }

    /// Renders as a reduced fraction (`5/3`) when `exact` and the value is
    /// rational; otherwise as a decimal.
    pub fn render(&self, exact: bool) -> String {
        match self {
            Number::Exact(r) if exact => render_fraction(r),
            Number::Exact(r) => format!("{}", ratio_to_f64(r)),
            Number::Float(x) => format!("{x}"),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(true))
    }
}

pub fn render_fraction(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses a decimal literal (`-1`, `0.25`, `+3.000001`) into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let s = text.trim();
    let (negative, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if body.contains('.') && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10u8), frac_part.len());
    let value = Rational::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Canonical decimal text for a rational whose denominator is of the form
/// 2^a 5^b. Returns `None` for values without a terminating expansion.
pub fn format_decimal(r: &Rational) -> Option<String> {
    let places = decimal_places(r.denom())?;
    let scale = num_traits::pow(BigInt::from(10u8), places);
    let scaled = r.numer() * (&scale / r.denom());
    let negative = scaled.is_negative();
    let digits = scaled.abs().to_string();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if places == 0 {
        out.push_str(&digits);
        return Some(out);
    }
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    out.push_str(int_part);
    out.push('.');
    out.push_str(frac_part);
    Some(out)
}

/// Smallest `p` with `denom | 10^p`, if any.
pub fn decimal_places(denom: &BigInt) -> Option<usize> {
    let two = BigInt::from(2u8);
    let five = BigInt::from(5u8);
    let mut d = denom.abs();
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    d.is_one().then_some(twos.max(fives))
}
