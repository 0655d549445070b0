//! Exact base-field arithmetic: arbitrary-precision rationals and odd prime
//! fields, plus square-class utilities.

use std::fmt;
use std::str::FromStr;

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square class of zero is undefined")]
    ZeroArgument,
    #[error("invalid field spec `{0}`: expected `Q` or `GF(p)` with p an odd prime")]
    BadFieldSpec(String),
    #[error("invalid scalar literal `{0}`")]
    BadLiteral(String),
    #[error("zero is not a unit")]
    ZeroUnit,
}

/// The base field: `Q` or `GF(p)` with `p` an odd prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldSpec {
    Rationals,
    PrimeField(u64),
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldSpec {
    /// Checked constructor for prime fields; rejects `p = 2` and non-primes.
    pub fn prime_field(p: u64) -> Result<FieldSpec, ScalarError> {
        if p != 2 && is_prime(p) {
            Ok(FieldSpec::PrimeField(p))
        } else {
            Err(ScalarError::BadFieldSpec(format!("GF({p})")))
        }
    }

    pub fn prime(&self) -> Option<u64> {
        match self {
            FieldSpec::Rationals => None,
            FieldSpec::PrimeField(p) => Some(*p),
        }
    }

    pub fn zero(&self) -> Scalar {
        Scalar::from_i64(*self, 0)
    }

    pub fn one(&self) -> Scalar {
        Scalar::from_i64(*self, 1)
    }

    /// Parses a scalar literal ("5", "-3/4", residues for prime fields) in this field.
    pub fn parse_scalar(&self, s: &str) -> Result<Scalar, ScalarError> {
        let s = s.trim();
        let bad = || ScalarError::BadLiteral(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d.is_zero() {
                return Err(ScalarError::DivisionByZero);
            }
            let num = Scalar::from_bigint(*self, n);
            let den = Scalar::from_bigint(*self, d);
            num.div(&den)
        } else {
            let n = BigInt::from_str(s).map_err(|_| bad())?;
            Ok(Scalar::from_bigint(*self, n))
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "Q"),
            FieldSpec::PrimeField(p) => write!(f, "GF({p})"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "Q" {
            return Ok(FieldSpec::Rationals);
        }
        if let Some(inner) = t.strip_prefix("GF(").and_then(|r| r.strip_suffix(')')) {
            let p: u64 = inner
                .trim()
                .parse()
                .map_err(|_| ScalarError::BadFieldSpec(s.to_string()))?;
            return FieldSpec::prime_field(p);
        }
        Err(ScalarError::BadFieldSpec(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Repr {
    Rat(BigRational),
    Mod(u64),
}

/// A canonical field element. Rationals are stored reduced with positive
/// denominator, prime-field elements as residues in `[0, p)`; equality is
/// structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar {
    field: FieldSpec,
    repr: Repr,
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn from_i64(field: FieldSpec, n: i64) -> Scalar {
        Scalar::from_bigint(field, BigInt::from(n))
    }

    pub fn from_bigint(field: FieldSpec, n: BigInt) -> Scalar {
        match field {
            FieldSpec::Rationals => Scalar {
                field,
                repr: Repr::Rat(BigRational::from_integer(n)),
            },
            FieldSpec::PrimeField(p) => {
                let r = n.mod_floor(&BigInt::from(p));
                let (_, digits) = r.to_u64_digits();
                Scalar {
                    field,
                    repr: Repr::Mod(digits.first().copied().unwrap_or(0)),
                }
            }
        }
    }

    pub fn from_rational(r: BigRational) -> Scalar {
        Scalar {
            field: FieldSpec::Rationals,
            repr: Repr::Rat(r),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Rat(r) => r.is_zero(),
            Repr::Mod(m) => *m == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Rat(r) => r.is_one(),
            Repr::Mod(m) => *m == 1,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.repr {
            Repr::Rat(r) => Some(r),
            Repr::Mod(_) => None,
        }
    }

    pub fn as_residue(&self) -> Option<u64> {
        match &self.repr {
            Repr::Rat(_) => None,
            Repr::Mod(m) => Some(*m),
        }
    }

    fn check_field(&self, other: &Scalar) {
        assert_eq!(
            self.field, other.field,
            "scalar arithmetic across base fields"
        );
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        self.check_field(other);
        let repr = match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a + b),
            (Repr::Mod(a), Repr::Mod(b)) => {
                let p = self.field.prime().unwrap();
                Repr::Mod(((*a as u128 + *b as u128) % p as u128) as u64)
            }
            _ => unreachable!(),
        };
        Scalar {
            field: self.field,
            repr,
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        self.check_field(other);
        let repr = match (&self.repr, &other.repr) {
            (Repr::Rat(a), Repr::Rat(b)) => Repr::Rat(a * b),
            (Repr::Mod(a), Repr::Mod(b)) => {
                let p = self.field.prime().unwrap();
                Repr::Mod(((*a as u128 * *b as u128) % p as u128) as u64)
            }
            _ => unreachable!(),
        };
        Scalar {
            field: self.field,
            repr,
        }
    }

    pub fn neg(&self) -> Scalar {
        let repr = match &self.repr {
            Repr::Rat(a) => Repr::Rat(-a),
            Repr::Mod(0) => Repr::Mod(0),
            Repr::Mod(a) => Repr::Mod(self.field.prime().unwrap() - a),
        };
        Scalar {
            field: self.field,
            repr,
        }
    }

    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        let repr = match &self.repr {
            Repr::Rat(a) => Repr::Rat(a.recip()),
            Repr::Mod(a) => {
                let p = self.field.prime().unwrap();
                Repr::Mod(pow_mod(*a, p - 2, p))
            }
        };
        Ok(Scalar {
            field: self.field,
            repr,
        })
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        Ok(self.mul(&other.inv()?))
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn pow(&self, n: i64) -> Result<Scalar, ScalarError> {
        if n == 0 {
            return Ok(self.field.one());
        }
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = self.field.one();
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Whether the element is a nonzero square in its field.
    pub fn is_square(&self) -> Result<bool, ScalarError> {
        Ok(match self.square_class()? {
            SquareClass::Square => true,
            SquareClass::NonSquare => false,
            SquareClass::Squarefree(r) => r.is_one(),
        })
    }

    /// The square class of a nonzero element: `Square`/`NonSquare` over a
    /// prime field (Euler criterion), the squarefree integer representative of
    /// `a (Q^x)^2` over the rationals.
    pub fn square_class(&self) -> Result<SquareClass, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::ZeroArgument);
        }
        match &self.repr {
            Repr::Mod(a) => {
                let p = self.field.prime().unwrap();
                if pow_mod(*a, (p - 1) / 2, p) == 1 {
                    Ok(SquareClass::Square)
                } else {
                    Ok(SquareClass::NonSquare)
                }
            }
            Repr::Rat(r) => {
                let n = r.numer() * r.denom();
                Ok(SquareClass::Squarefree(squarefree_part(&n)))
            }
        }
    }

    /// A canonical representative of the square class: `1` or the least
    /// nonsquare residue over `GF(p)`, the squarefree representative over `Q`.
    pub fn square_class_representative(&self) -> Result<Scalar, ScalarError> {
        match self.square_class()? {
            SquareClass::Square => Ok(self.field.one()),
            SquareClass::NonSquare => {
                let p = self.field.prime().unwrap();
                let n = (2..p)
                    .find(|&n| pow_mod(n, (p - 1) / 2, p) != 1)
                    .expect("odd prime field has a nonsquare");
                Ok(Scalar {
                    field: self.field,
                    repr: Repr::Mod(n),
                })
            }
            SquareClass::Squarefree(r) => Ok(Scalar::from_bigint(self.field, r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SquareClass {
    Square,
    NonSquare,
    Squarefree(BigInt),
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc: u64 = 1;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % p as u128) as u64;
        }
        base = ((base as u128 * base as u128) % p as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Squarefree part of a nonzero integer by trial division, sign preserved.
fn squarefree_part(n: &BigInt) -> BigInt {
    let mut out = BigInt::one();
    if n.sign() == Sign::Minus {
        out = -out;
    }
    let mut m = n.abs();
    let mut d = BigInt::from(2);
    while &d * &d <= m {
        let mut mult = 0u32;
        while (&m % &d).is_zero() {
            m /= &d;
            mult += 1;
        }
        if mult % 2 == 1 {
            out *= &d;
        }
        d += 1;
    }
    out * m
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Repr::Mod(m) => write!(f, "{m}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic() {
        let q = FieldSpec::Rationals;
        let half = q.parse_scalar("1/2").unwrap();
        let third = q.parse_scalar("1/3").unwrap();
        assert_eq!(half.add(&third), q.parse_scalar("5/6").unwrap());
    }

    #[test]
    fn prime_field_inverse_and_negation() {
        let f7 = FieldSpec::prime_field(7).unwrap();
        assert_eq!(Scalar::from_i64(f7, 3).inv().unwrap(), Scalar::from_i64(f7, 5));
        let f5 = FieldSpec::prime_field(5).unwrap();
        assert_eq!(Scalar::from_i64(f5, 2).neg(), Scalar::from_i64(f5, 3));
    }

    #[test]
    fn inverse_of_zero_fails() {
        let q = FieldSpec::Rationals;
        assert_eq!(q.zero().inv(), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn square_classes_f7_by_enumeration() {
        let f7 = FieldSpec::prime_field(7).unwrap();
        let squares: std::collections::BTreeSet<u64> = (1..7u64).map(|i| i * i % 7).collect();
        for a in 1..7u64 {
            let expect = if squares.contains(&a) {
                SquareClass::Square
            } else {
                SquareClass::NonSquare
            };
            assert_eq!(Scalar::from_i64(f7, a as i64).square_class().unwrap(), expect);
        }
        assert!(squares.contains(&2));
        assert!(!squares.contains(&3));
    }

    #[test]
    fn squarefree_representative_over_q() {
        let q = FieldSpec::Rationals;
        assert_eq!(
            Scalar::from_i64(q, 8).square_class().unwrap(),
            SquareClass::Squarefree(BigInt::from(2))
        );
        assert_eq!(
            q.parse_scalar("-4/9").unwrap().square_class().unwrap(),
            SquareClass::Squarefree(BigInt::from(-1))
        );
        assert_eq!(
            Scalar::from_i64(q, 0).square_class(),
            Err(ScalarError::ZeroArgument)
        );
    }

    #[test]
    fn field_spec_round_trip() {
        for s in ["Q", "GF(7)", "GF(3)"] {
            assert_eq!(s.parse::<FieldSpec>().unwrap().to_string(), s);
        }
        assert!("GF(2)".parse::<FieldSpec>().is_err());
        assert!("GF(9)".parse::<FieldSpec>().is_err());
    }

    #[test]
    fn field_mismatch_panics() {
        let a = Scalar::from_i64(FieldSpec::Rationals, 1);
        let b = Scalar::from_i64(FieldSpec::PrimeField(5), 1);
        assert!(std::panic::catch_unwind(|| a.add(&b)).is_err());
    }
}
