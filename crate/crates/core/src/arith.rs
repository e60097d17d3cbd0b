//! Exact rational scalars and fraction-free dense linear algebra.
//!
//! Every polytope computation in this crate runs on [`Rational`]. The
//! elimination routines scale rational rows to integers and run Bareiss
//! elimination, first in checked `i128` and, on overflow, in arbitrary
//! precision.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("MalformedNumber: {0:?} is not a decimal or fraction literal")]
    MalformedNumber(String),
    #[error("NotSquare: matrix is {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("DimensionMismatch: expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

/// An exact rational number in canonical form (positive denominator, reduced).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `numer / denom`, reduced. Panics if `denom` is zero.
    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Self {
        Rational(BigRational::new(numer, denom))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Nearest `f64`; only used where floating point is acceptable (entropy).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact decimal expansion, or `None` when the value does not terminate.
    pub fn to_decimal_string(&self) -> Option<String> {
        let mut den = self.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let (mut twos, mut fives) = (0u32, 0u32);
        while den.is_even() {
            den /= &two;
            twos += 1;
        }
        while (&den % &five).is_zero() {
            den /= &five;
            fives += 1;
        }
        if !den.is_one() {
            return None;
        }
        let digits = twos.max(fives);
        let scaled =
            self.numer() * num_traits::pow(BigInt::from(10), digits as usize) / self.denom();
        let negative = scaled.is_negative();
        let mut text = scaled.abs().to_string();
        if digits > 0 {
            let digits = digits as usize;
            if text.len() <= digits {
                text = format!("{}{}", "0".repeat(digits + 1 - text.len()), text);
            }
            text.insert(text.len() - digits, '.');
        }
        if negative {
            text.insert(0, '-');
        }
        Some(text)
    }
}

/// Parses a decimal (`"-0.35"`) or fraction (`"7/20"`) literal exactly.
///
/// Scientific notation, bare `"."`, and zero denominators are rejected.
pub fn rat_from_decimal(text: &str) -> Result<Rational, ArithError> {
    let malformed = || ArithError::MalformedNumber(text.to_string());
    let s = text.trim();
    let (negative, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let all_digits = |t: &str| !t.is_empty() && t.bytes().all(|b| b.is_ascii_digit());
    let value = if let Some((num, den)) = body.split_once('/') {
        if !all_digits(num) || !all_digits(den) {
            return Err(malformed());
        }
        let den: BigInt = den.parse().map_err(|_| malformed())?;
        if den.is_zero() {
            return Err(malformed());
        }
        BigRational::new(num.parse().map_err(|_| malformed())?, den)
    } else {
        let (int, frac) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if !all_digits(int) || (body.contains('.') && !all_digits(frac)) {
            return Err(malformed());
        }
        let numer: BigInt = format!("{int}{frac}").parse().map_err(|_| malformed())?;
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        BigRational::new(numer, denom)
    };
    Ok(Rational(if negative { -value } else { value }))
}

impl FromStr for Rational {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        rat_from_decimal(s)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        rat_from_decimal(&text).map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0 $op &rhs.0)
            }
        }
        impl<'a> $trait<&'a Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(&self.0 $op &rhs.0)
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(&self.0 $op rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);
forward_binop!(Div, div, /);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        let mut acc = Rational::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

/// Dense row-major rational matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: Vec<Rational>,
    ) -> Result<Self, ArithError> {
        if entries.len() != rows * cols {
            return Err(ArithError::DimensionMismatch {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Ok(RatMatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from integer rows; all rows must have equal length.
    pub fn from_int_rows(rows: &[Vec<i64>]) -> Result<Self, ArithError> {
        let cols = rows.first().map_or(0, Vec::len);
        let entries: Vec<Rational> = rows
            .iter()
            .flatten()
            .map(|&v| Rational::from_integer(v))
            .collect();
        Self::from_entries(rows.len(), cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: Rational) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vec<Rational>, ArithError> {
        if x.len() != self.cols {
            return Err(ArithError::DimensionMismatch {
                expected: self.cols,
                actual: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * &x[c]).sum())
            .collect())
    }
}

/// Outcome of an exact square solve.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Solution {
    Unique(Vec<Rational>),
    Singular,
}

/// Outcome of an integer solve: `x_i = numerators[i] / denominator`, where the
/// denominator is the determinant of the (row-permuted) system matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum IntSolution<T> {
    Unique { numerators: Vec<T>, denominator: T },
    Singular,
}

/// Integer ring operations needed by Bareiss elimination. Checked types return
/// `None` on overflow.
trait FractionFree: Clone {
    fn ff_zero() -> Self;
    fn ff_one() -> Self;
    fn ff_is_zero(&self) -> bool;
    fn neg(&self) -> Option<Self>;
    /// `(a*b - c*d) / e`, where the division is known to be exact.
    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Option<Self>;
}

impl FractionFree for i128 {
    fn ff_zero() -> Self {
        0
    }
    fn ff_one() -> Self {
        1
    }
    fn ff_is_zero(&self) -> bool {
        *self == 0
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Option<Self> {
        let diff = a.checked_mul(*b)?.checked_sub(c.checked_mul(*d)?)?;
        debug_assert_eq!(diff % e, 0);
        Some(diff / e)
    }
}

impl FractionFree for BigInt {
    fn ff_zero() -> Self {
        Zero::zero()
    }
    fn ff_one() -> Self {
        One::one()
    }
    fn ff_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
    fn cross_div(a: &Self, b: &Self, c: &Self, d: &Self, e: &Self) -> Option<Self> {
        let diff = a * b - c * d;
        debug_assert!(Zero::is_zero(&(&diff % e)));
        Some(diff / e)
    }
}

/// Forward Bareiss elimination on an `n x width` row-major array (`width >= n`).
///
/// Returns `Some(None)` when the leading `n x n` block is singular, and
/// `Some(Some(det))` with the signed determinant otherwise. `None` signals
/// overflow.
fn bareiss_forward<T: FractionFree>(a: &mut [T], n: usize, width: usize) -> Option<Option<T>> {
    let mut prev = T::ff_one();
    let mut negate = false;
    for k in 0..n {
        let pivot_row = (k..n).find(|&i| !a[i * width + k].ff_is_zero());
        let Some(p) = pivot_row else {
            return Some(None);
        };
        if p != k {
            for j in 0..width {
                a.swap(k * width + j, p * width + j);
            }
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..width {
                let v = T::cross_div(
                    &a[k * width + k],
                    &a[i * width + j],
                    &a[i * width + k],
                    &a[k * width + j],
                    &prev,
                )?;
                a[i * width + j] = v;
            }
            a[i * width + k] = T::ff_zero();
        }
        prev = a[k * width + k].clone();
    }
    let det = if n == 0 {
        T::ff_one()
    } else {
        a[(n - 1) * width + (n - 1)].clone()
    };
    Some(Some(if negate { det.neg()? } else { det }))
}

fn determinant_ff<T: FractionFree>(mut a: Vec<T>, n: usize) -> Option<T> {
    Some(bareiss_forward(&mut a, n, n)?.unwrap_or_else(T::ff_zero))
}

fn solve_ff<T: FractionFree>(matrix: &[T], rhs: &[T], n: usize) -> Option<IntSolution<T>> {
    let width = n + 1;
    let mut a = Vec::with_capacity(n * width);
    for i in 0..n {
        a.extend_from_slice(&matrix[i * n..(i + 1) * n]);
        a.push(rhs[i].clone());
    }
    if bareiss_forward(&mut a, n, width)?.is_none() {
        return Some(IntSolution::Singular);
    }
    // Determinant of the row-permuted matrix; Cramer makes d * x integral.
    let d = a[(n - 1) * width + (n - 1)].clone();
    let mut scaled = vec![T::ff_zero(); n];
    for i in (0..n).rev() {
        // acc = d * b_i - sum_{j>i} U_ij * scaled_j, then divide by U_ii.
        let mut acc = T::cross_div(
            &d,
            &a[i * width + n],
            &T::ff_zero(),
            &T::ff_zero(),
            &T::ff_one(),
        )?;
        for j in i + 1..n {
            acc = T::cross_div(
                &acc,
                &T::ff_one(),
                &a[i * width + j],
                &scaled[j],
                &T::ff_one(),
            )?;
        }
        scaled[i] = T::cross_div(
            &acc,
            &T::ff_one(),
            &T::ff_zero(),
            &T::ff_zero(),
            &a[i * width + i],
        )?;
    }
    Some(IntSolution::Unique {
        numerators: scaled,
        denominator: d,
    })
}

/// Solves an integer system in checked `i128`; `None` on overflow.
pub fn solve_integer_i128(matrix: &[i128], rhs: &[i128], n: usize) -> Option<IntSolution<i128>> {
    debug_assert_eq!(matrix.len(), n * n);
    solve_ff(matrix, rhs, n)
}

/// Solves an integer system in arbitrary precision.
pub fn solve_integer_big(matrix: &[BigInt], rhs: &[BigInt], n: usize) -> IntSolution<BigInt> {
    debug_assert_eq!(matrix.len(), n * n);
    solve_ff(matrix, rhs, n).expect("arbitrary precision never overflows")
}

fn lcm_of_denominators<'a>(values: impl Iterator<Item = &'a Rational>) -> BigInt {
    values.fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

fn scaled_row(row: &[Rational], scale: &BigInt) -> Vec<BigInt> {
    row.iter()
        .map(|v| v.numer() * (scale / v.denom()))
        .collect()
}

fn to_i128_all(values: &[BigInt]) -> Option<Vec<i128>> {
    values.iter().map(ToPrimitive::to_i128).collect()
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(m: &RatMatrix) -> Result<Rational, ArithError> {
    if m.rows != m.cols {
        return Err(ArithError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    let n = m.rows;
    let mut ints = Vec::with_capacity(n * n);
    let mut scale_product = BigInt::one();
    for r in 0..n {
        let row = &m.entries[r * n..(r + 1) * n];
        let scale = lcm_of_denominators(row.iter());
        ints.extend(scaled_row(row, &scale));
        scale_product *= scale;
    }
    let det = match to_i128_all(&ints).and_then(|small| determinant_ff(small, n)) {
        Some(d) => BigInt::from(d),
        None => determinant_ff(ints, n).expect("arbitrary precision never overflows"),
    };
    Ok(Rational::from_bigints(det, scale_product))
}

/// Exact solution of `M x = y`, or [`Solution::Singular`] when `det(M) = 0`.
pub fn solve_linear(m: &RatMatrix, y: &[Rational]) -> Result<Solution, ArithError> {
    if m.rows != m.cols {
        return Err(ArithError::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if y.len() != m.rows {
        return Err(ArithError::DimensionMismatch {
            expected: m.rows,
            actual: y.len(),
        });
    }
    let n = m.rows;
    let mut ints = Vec::with_capacity(n * n);
    let mut rhs = Vec::with_capacity(n);
    for r in 0..n {
        let row = &m.entries[r * n..(r + 1) * n];
        let scale = lcm_of_denominators(row.iter().chain(std::iter::once(&y[r])));
        ints.extend(scaled_row(row, &scale));
        rhs.push(y[r].numer() * (&scale / y[r].denom()));
    }
    let fast = match (to_i128_all(&ints), to_i128_all(&rhs)) {
        (Some(a), Some(b)) => solve_integer_i128(&a, &b, n).map(|s| match s {
            IntSolution::Singular => IntSolution::Singular,
            IntSolution::Unique {
                numerators,
                denominator,
            } => IntSolution::Unique {
                numerators: numerators.into_iter().map(BigInt::from).collect(),
                denominator: BigInt::from(denominator),
            },
        }),
        _ => None,
    };
    let solved = fast.unwrap_or_else(|| solve_integer_big(&ints, &rhs, n));
    Ok(match solved {
        IntSolution::Singular => Solution::Singular,
        IntSolution::Unique {
            numerators,
            denominator,
        } => Solution::Unique(
            numerators
                .into_iter()
                .map(|num| Rational::from_bigints(num, denominator.clone()))
                .collect(),
        ),
    })
}
