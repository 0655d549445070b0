//! Symbolic Milnor-Witt K-theory of the base field: integer combinations of
//! monomials `eta^m [a_1]...[a_k]`, the four defining relations oriented as a
//! rewrite system, and an exact evaluation backend over odd prime fields for
//! zero certification.
//!
//! Symbols are atoms keyed by field elements; no factorization is ever
//! attempted. The rewrite rules, applied to a fixpoint in this order, are
//!
//! 1. a symbol `[1]` kills its monomial;
//! 2. `eta [a][b] -> [ab] - [a] - [b]` (twisted logarithm, oriented toward
//!    the computable product);
//! 3. `eta^2 [-1] -> -2 eta`;
//! 4. adjacent `[a][1-a]` kills its monomial (Steinberg);
//! 5. adjacent `[a][a] -> [-1][a]`;
//! 6. adjacent out-of-order symbols are swapped through
//!    `[a][b] = eps [b][a]` with `eps = -1 - eta[-1]` expanded.
//!
//! Rules never rewrite a lone symbol by its square class, so normalization
//! commutes with later products: staged and one-shot multiplications reach the
//! same canonical form.
//!
//! The system is not claimed confluent; semantic equality questions route
//! through [`MwElement::is_zero_test`].

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use thiserror::Error;

use crate::scalar::{FieldSpec, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MwError {
    #[error("[0] is not a symbol")]
    ZeroSymbol,
    #[error("mixed base fields")]
    FieldMismatch,
    #[error("operation requires an odd prime base field")]
    NotPrimeField,
    #[error("prime {0} does not avoid the symbol supports")]
    BadReductionPrime(u64),
}

/// `eta^m [a_1]...[a_k]`; the degree is `k - m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MwMonomial {
    pub eta: u32,
    pub symbols: Vec<Scalar>,
}

impl MwMonomial {
    pub fn degree(&self) -> i64 {
        self.symbols.len() as i64 - self.eta as i64
    }
}

/// An element of the Milnor-Witt K-theory of the base field, kept in the
/// canonical form produced by the rewrite system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MwElement {
    field: FieldSpec,
    terms: BTreeMap<MwMonomial, BigInt>,
}

/// Outcome of a zero test: syntactically zero, certified nonzero by a sound
/// finite-field evaluation, or undecided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroTest {
    Zero,
    NonZero,
    Unknown,
}

impl MwElement {
    pub fn zero(field: FieldSpec) -> MwElement {
        MwElement {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_int(field: FieldSpec, n: i64) -> MwElement {
        MwElement::from_terms(
            field,
            vec![(
                MwMonomial {
                    eta: 0,
                    symbols: Vec::new(),
                },
                BigInt::from(n),
            )],
        )
    }

    pub fn one(field: FieldSpec) -> MwElement {
        MwElement::from_int(field, 1)
    }

    /// The generator `[a]` in degree one.
    pub fn symbol(a: &Scalar) -> Result<MwElement, MwError> {
        if a.is_zero() {
            return Err(MwError::ZeroSymbol);
        }
        Ok(MwElement::from_terms(
            a.field(),
            vec![(
                MwMonomial {
                    eta: 0,
                    symbols: vec![a.clone()],
                },
                BigInt::one(),
            )],
        ))
    }

    pub fn eta(field: FieldSpec) -> MwElement {
        MwElement::from_terms(
            field,
            vec![(
                MwMonomial {
                    eta: 1,
                    symbols: Vec::new(),
                },
                BigInt::one(),
            )],
        )
    }

    /// `<a> = 1 + eta [a]`.
    pub fn bracket_form(a: &Scalar) -> Result<MwElement, MwError> {
        if a.is_zero() {
            return Err(MwError::ZeroSymbol);
        }
        let field = a.field();
        Ok(MwElement::from_terms(
            field,
            vec![
                (
                    MwMonomial {
                        eta: 0,
                        symbols: Vec::new(),
                    },
                    BigInt::one(),
                ),
                (
                    MwMonomial {
                        eta: 1,
                        symbols: vec![a.clone()],
                    },
                    BigInt::one(),
                ),
            ],
        ))
    }

    /// `eps = -<-1> = -1 - eta[-1]`.
    pub fn epsilon(field: FieldSpec) -> MwElement {
        let neg_one = Scalar::from_i64(field, -1);
        MwElement::from_terms(
            field,
            vec![
                (
                    MwMonomial {
                        eta: 0,
                        symbols: Vec::new(),
                    },
                    BigInt::from(-1),
                ),
                (
                    MwMonomial {
                        eta: 1,
                        symbols: vec![neg_one],
                    },
                    BigInt::from(-1),
                ),
            ],
        )
    }

    pub fn eps_pow(field: FieldSpec, n: usize) -> MwElement {
        if n % 2 == 0 {
            MwElement::one(field)
        } else {
            MwElement::epsilon(field)
        }
    }

    pub fn from_terms(field: FieldSpec, terms: Vec<(MwMonomial, BigInt)>) -> MwElement {
        let mut map: BTreeMap<MwMonomial, BigInt> = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert_with(BigInt::zero) += c;
        }
        MwElement {
            field,
            terms: normalize(field, map),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn terms(&self) -> &BTreeMap<MwMonomial, BigInt> {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &MwElement) -> Result<MwElement, MwError> {
        if self.field != other.field {
            return Err(MwError::FieldMismatch);
        }
        let mut map = self.terms.clone();
        for (m, c) in &other.terms {
            *map.entry(m.clone()).or_insert_with(BigInt::zero) += c;
        }
        Ok(MwElement {
            field: self.field,
            terms: normalize(self.field, map),
        })
    }

    pub fn sub(&self, other: &MwElement) -> Result<MwElement, MwError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> MwElement {
        MwElement {
            field: self.field,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, n: &BigInt) -> MwElement {
        if n.is_zero() {
            return MwElement::zero(self.field);
        }
        MwElement {
            field: self.field,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * n))
                .collect(),
        }
    }

    pub fn mul(&self, other: &MwElement) -> Result<MwElement, MwError> {
        if self.field != other.field {
            return Err(MwError::FieldMismatch);
        }
        let mut map: BTreeMap<MwMonomial, BigInt> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut symbols = m1.symbols.clone();
                symbols.extend(m2.symbols.iter().cloned());
                let key = MwMonomial {
                    eta: m1.eta + m2.eta,
                    symbols,
                };
                *map.entry(key).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        Ok(MwElement {
            field: self.field,
            terms: normalize(self.field, map),
        })
    }

    /// The grading involution `x -> eps^{deg} x` on homogeneous pieces; used
    /// when a coefficient crosses a word of odd length.
    pub fn chi(&self) -> MwElement {
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for (m, c) in &self.terms {
            if m.degree().rem_euclid(2) == 0 {
                even.push((m.clone(), c.clone()));
            } else {
                odd.push((m.clone(), c.clone()));
            }
        }
        let even = MwElement::from_terms(self.field, even);
        let odd = MwElement::from_terms(self.field, odd);
        let eps = MwElement::epsilon(self.field);
        even.add(&eps.mul(&odd).expect("same field"))
            .expect("same field")
    }

    pub fn chi_pow(&self, n: usize) -> MwElement {
        if n % 2 == 0 {
            self.clone()
        } else {
            self.chi()
        }
    }

    /// Splits into homogeneous components by degree.
    pub fn components(&self) -> BTreeMap<i64, MwElement> {
        let mut out: BTreeMap<i64, MwElement> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.degree())
                .or_insert_with(|| MwElement::zero(self.field))
                .terms
                .insert(m.clone(), c.clone());
        }
        out
    }

    /// Reduces a rational element modulo a good odd prime via the
    /// specialization map (sound on elements whose symbols are p-units).
    pub fn reduce_mod(&self, p: u64) -> Result<MwElement, MwError> {
        if self.field != FieldSpec::Rationals {
            return Err(MwError::NotPrimeField);
        }
        let target = FieldSpec::prime_field(p).map_err(|_| MwError::BadReductionPrime(p))?;
        let pb = BigInt::from(p);
        let mut terms = Vec::new();
        for (m, c) in &self.terms {
            let mut symbols = Vec::new();
            for s in &m.symbols {
                let r = s.as_rational().expect("rational element");
                if (r.numer() % &pb).is_zero() || (r.denom() % &pb).is_zero() {
                    return Err(MwError::BadReductionPrime(p));
                }
                let num = Scalar::from_bigint(target, r.numer().clone());
                let den = Scalar::from_bigint(target, r.denom().clone());
                symbols.push(num.div(&den).expect("denominator is a p-unit"));
            }
            terms.push((
                MwMonomial {
                    eta: m.eta,
                    symbols,
                },
                c.clone(),
            ));
        }
        Ok(MwElement::from_terms(target, terms))
    }

    /// Evaluates in the actual Milnor-Witt K-theory of `F_q`: degrees above
    /// one vanish, degree one is the unit group, degree zero the
    /// Grothendieck-Witt group, negative degrees the Witt group. Monomials
    /// with two or more symbols die in every degree.
    pub fn eval_finite_field(&self) -> Result<FiniteEval, MwError> {
        let Some(q) = self.field.prime() else {
            return Err(MwError::NotPrimeField);
        };
        let neg_square = Scalar::from_i64(self.field, -1)
            .is_square()
            .expect("-1 is nonzero");
        let mut gw = GwClass::zero();
        let mut unit: u64 = 1;
        let mut witt: BTreeMap<i64, WittClass> = BTreeMap::new();
        for (m, c) in &self.terms {
            let k = m.symbols.len();
            if k >= 2 {
                continue;
            }
            match (k, m.eta) {
                (0, 0) => gw = gw.add(&GwClass::unit_form(false).scale(c)),
                (0, _) => {
                    let w = WittClass::from_rank_disc(&BigInt::one(), false, neg_square).scale(c);
                    let entry = witt
                        .entry(-(m.eta as i64))
                        .or_insert_with(|| WittClass::zero(neg_square));
                    *entry = entry.add(&w);
                }
                (1, 0) => {
                    let a = m.symbols[0].as_residue().expect("prime field");
                    let e = c.mod_floor(&BigInt::from(q - 1));
                    let (_, digits) = e.to_u64_digits();
                    unit = unit * pow_mod(a, digits.first().copied().unwrap_or(0), q) % q;
                }
                (1, eta) => {
                    let d = !m.symbols[0].is_square().expect("nonzero symbol");
                    if eta == 1 {
                        gw = gw.add(
                            &GwClass {
                                rank: BigInt::zero(),
                                disc_nonsquare: d,
                            }
                            .scale(c),
                        );
                    } else {
                        let w = WittClass::from_rank_disc(&BigInt::zero(), d, neg_square).scale(c);
                        let entry = witt
                            .entry(1 - eta as i64)
                            .or_insert_with(|| WittClass::zero(neg_square));
                        *entry = entry.add(&w);
                    }
                }
                _ => unreachable!(),
            }
        }
        let mut by_degree = BTreeMap::new();
        if !gw.is_zero() {
            by_degree.insert(0, EvalValue::Gw(gw));
        }
        if unit != 1 {
            by_degree.insert(1, EvalValue::Unit(unit));
        }
        for (d, w) in witt {
            if !w.is_zero() {
                by_degree.insert(d, EvalValue::Witt(w));
            }
        }
        Ok(FiniteEval { q, by_degree })
    }

    /// Ternary zero test. `Zero` means the canonical form is empty; `NonZero`
    /// is certified by an exact evaluation (over the own prime field, or for
    /// rational elements by specialization at good odd primes missing every
    /// symbol support); anything else is `Unknown`.
    pub fn is_zero_test(&self) -> ZeroTest {
        if self.terms.is_empty() {
            return ZeroTest::Zero;
        }
        match self.field {
            FieldSpec::PrimeField(_) => {
                let ev = self.eval_finite_field().expect("prime field");
                if ev.is_zero() {
                    ZeroTest::Unknown
                } else {
                    ZeroTest::NonZero
                }
            }
            FieldSpec::Rationals => {
                let mut tried = 0;
                for p in (3u64..1000).filter(|&p| FieldSpec::prime_field(p).is_ok()) {
                    if tried == 3 {
                        break;
                    }
                    if !self.reduction_prime_is_good(p) {
                        continue;
                    }
                    tried += 1;
                    let reduced = self.reduce_mod(p).expect("good prime");
                    if !reduced.is_empty()
                        && !reduced.eval_finite_field().expect("prime field").is_zero()
                    {
                        return ZeroTest::NonZero;
                    }
                }
                ZeroTest::Unknown
            }
        }
    }

    fn reduction_prime_is_good(&self, p: u64) -> bool {
        let pb = BigInt::from(p);
        self.terms.keys().all(|m| {
            m.symbols.iter().all(|s| {
                let r = s.as_rational().expect("rational element");
                !(r.numer() % &pb).is_zero() && !(r.denom() % &pb).is_zero()
            })
        })
    }
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

const NORMALIZE_STEP_LIMIT: usize = 2_000_000;

/// Worklist fixpoint over the oriented relations. Each popped monomial either
/// has no applicable rule and lands in the result, or is replaced.
fn normalize(
    field: FieldSpec,
    pending: BTreeMap<MwMonomial, BigInt>,
) -> BTreeMap<MwMonomial, BigInt> {
    let mut pending = pending;
    let mut result: BTreeMap<MwMonomial, BigInt> = BTreeMap::new();
    let mut steps = 0usize;
    while let Some((mono, coeff)) = pending.pop_first() {
        steps += 1;
        assert!(
            steps < NORMALIZE_STEP_LIMIT,
            "rewrite fixpoint exceeded step limit"
        );
        if coeff.is_zero() {
            continue;
        }
        match first_rule(field, &mono) {
            None => {
                let slot = result.entry(mono).or_insert_with(BigInt::zero);
                *slot += coeff;
            }
            Some(replacements) => {
                for (m, c) in replacements {
                    let slot = pending.entry(m).or_insert_with(BigInt::zero);
                    *slot += &coeff * c;
                }
            }
        }
    }
    result.retain(|_, c| !c.is_zero());
    result
}

fn first_rule(field: FieldSpec, m: &MwMonomial) -> Option<Vec<(MwMonomial, BigInt)>> {
    let k = m.symbols.len();
    // 1: [1] kills.
    if m.symbols.iter().any(|s| s.is_one()) {
        return Some(Vec::new());
    }
    // 2: eta [a][b] -> [ab] - [a] - [b].
    if m.eta >= 1 && k >= 2 {
        let a = &m.symbols[0];
        let b = &m.symbols[1];
        let rest = &m.symbols[2..];
        let with = |first: Scalar| {
            let mut symbols = vec![first];
            symbols.extend_from_slice(rest);
            MwMonomial {
                eta: m.eta - 1,
                symbols,
            }
        };
        return Some(vec![
            (with(a.mul(b)), BigInt::one()),
            (with(a.clone()), BigInt::from(-1)),
            (with(b.clone()), BigInt::from(-1)),
        ]);
    }
    let neg_one = Scalar::from_i64(field, -1);
    // 3: eta^2 [-1] -> -2 eta.
    if m.eta >= 2 {
        if let Some(pos) = m.symbols.iter().position(|s| *s == neg_one) {
            let mut symbols = m.symbols.clone();
            symbols.remove(pos);
            return Some(vec![(
                MwMonomial {
                    eta: m.eta - 1,
                    symbols,
                },
                BigInt::from(-2),
            )]);
        }
    }
    if m.eta == 0 && k >= 2 {
        let one = field.one();
        // 4: adjacent Steinberg pair kills.
        for i in 0..k - 1 {
            if m.symbols[i + 1] == one.sub(&m.symbols[i]) {
                return Some(Vec::new());
            }
        }
        // 5: adjacent equal pair [a][a] -> [-1][a].
        for i in 0..k - 1 {
            if m.symbols[i] == m.symbols[i + 1] && m.symbols[i] != neg_one {
                let mut symbols = m.symbols.clone();
                symbols[i] = neg_one.clone();
                return Some(vec![(MwMonomial { eta: 0, symbols }, BigInt::one())]);
            }
        }
        // 6: sort by eps-commutation, eps expanded.
        for i in 0..k - 1 {
            if m.symbols[i] > m.symbols[i + 1] {
                let mut swapped = m.symbols.clone();
                swapped.swap(i, i + 1);
                let mut with_neg = vec![neg_one];
                with_neg.extend(swapped.iter().cloned());
                return Some(vec![
                    (
                        MwMonomial {
                            eta: 0,
                            symbols: swapped,
                        },
                        BigInt::from(-1),
                    ),
                    (
                        MwMonomial {
                            eta: 1,
                            symbols: with_neg,
                        },
                        BigInt::from(-1),
                    ),
                ]);
            }
        }
    }
    None
}

/// `GW(F_q)` modeled faithfully by rank and discriminant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwClass {
    pub rank: BigInt,
    pub disc_nonsquare: bool,
}

impl GwClass {
    pub fn zero() -> GwClass {
        GwClass {
            rank: BigInt::zero(),
            disc_nonsquare: false,
        }
    }

    /// `<a>` given whether `a` is a nonsquare.
    pub fn unit_form(nonsquare: bool) -> GwClass {
        GwClass {
            rank: BigInt::one(),
            disc_nonsquare: nonsquare,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rank.is_zero() && !self.disc_nonsquare
    }

    pub fn add(&self, other: &GwClass) -> GwClass {
        GwClass {
            rank: &self.rank + &other.rank,
            disc_nonsquare: self.disc_nonsquare ^ other.disc_nonsquare,
        }
    }

    pub fn scale(&self, n: &BigInt) -> GwClass {
        GwClass {
            rank: &self.rank * n,
            disc_nonsquare: self.disc_nonsquare && n.is_odd(),
        }
    }

    pub fn mul(&self, other: &GwClass) -> GwClass {
        GwClass {
            rank: &self.rank * &other.rank,
            disc_nonsquare: (self.disc_nonsquare && other.rank.is_odd())
                ^ (other.disc_nonsquare && self.rank.is_odd()),
        }
    }
}

/// `W(F_q)`: the Grothendieck-Witt group modulo the hyperbolic plane. Order
/// four; cyclic exactly when `-1` is a nonsquare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WittClass {
    pub rank_odd: bool,
    pub disc_nonsquare: bool,
    neg_square: bool,
}

impl WittClass {
    pub fn zero(neg_square: bool) -> WittClass {
        WittClass {
            rank_odd: false,
            disc_nonsquare: false,
            neg_square,
        }
    }

    /// Reduces a Grothendieck-Witt representative: each hyperbolic plane that
    /// is split off twists the discriminant by the class of `-1`.
    pub fn from_rank_disc(rank: &BigInt, disc_nonsquare: bool, neg_square: bool) -> WittClass {
        let rank_odd = rank.is_odd();
        let planes: BigInt = (rank - BigInt::from(rank_odd as u8)) / 2;
        let twist = planes.is_odd() && !neg_square;
        WittClass {
            rank_odd,
            disc_nonsquare: disc_nonsquare ^ twist,
            neg_square,
        }
    }

    pub fn is_zero(&self) -> bool {
        !self.rank_odd && !self.disc_nonsquare
    }

    pub fn add(&self, other: &WittClass) -> WittClass {
        debug_assert_eq!(self.neg_square, other.neg_square);
        let rank = BigInt::from(self.rank_odd as u8) + BigInt::from(other.rank_odd as u8);
        WittClass::from_rank_disc(
            &rank,
            self.disc_nonsquare ^ other.disc_nonsquare,
            self.neg_square,
        )
    }

    pub fn neg(&self) -> WittClass {
        WittClass::from_rank_disc(
            &-BigInt::from(self.rank_odd as u8),
            self.disc_nonsquare,
            self.neg_square,
        )
    }

    pub fn scale(&self, n: &BigInt) -> WittClass {
        let rank = BigInt::from(self.rank_odd as u8) * n;
        WittClass::from_rank_disc(&rank, self.disc_nonsquare && n.is_odd(), self.neg_square)
    }

    pub fn mul(&self, other: &WittClass) -> WittClass {
        debug_assert_eq!(self.neg_square, other.neg_square);
        let rank = BigInt::from((self.rank_odd && other.rank_odd) as u8);
        WittClass::from_rank_disc(
            &rank,
            (self.disc_nonsquare && other.rank_odd) ^ (other.disc_nonsquare && self.rank_odd),
            self.neg_square,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalValue {
    Gw(GwClass),
    Unit(u64),
    Witt(WittClass),
}

/// Graded evaluation of a Milnor-Witt element over `F_q`; zero degrees are
/// omitted, so the zero element has an empty map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteEval {
    pub q: u64,
    pub by_degree: BTreeMap<i64, EvalValue>,
}

impl FiniteEval {
    pub fn is_zero(&self) -> bool {
        self.by_degree.is_empty()
    }

    pub fn add(&self, other: &FiniteEval) -> FiniteEval {
        assert_eq!(self.q, other.q);
        let mut out: BTreeMap<i64, EvalValue> = BTreeMap::new();
        let degrees: std::collections::BTreeSet<i64> = self
            .by_degree
            .keys()
            .chain(other.by_degree.keys())
            .copied()
            .collect();
        for d in degrees {
            let merged = match (self.by_degree.get(&d), other.by_degree.get(&d)) {
                (Some(v), None) | (None, Some(v)) => v.clone(),
                (Some(EvalValue::Gw(a)), Some(EvalValue::Gw(b))) => EvalValue::Gw(a.add(b)),
                (Some(EvalValue::Unit(a)), Some(EvalValue::Unit(b))) => {
                    EvalValue::Unit((*a as u128 * *b as u128 % self.q as u128) as u64)
                }
                (Some(EvalValue::Witt(a)), Some(EvalValue::Witt(b))) => EvalValue::Witt(a.add(b)),
                _ => unreachable!("degree determines the value kind"),
            };
            if !value_is_zero(&merged) {
                out.insert(d, merged);
            }
        }
        FiniteEval {
            q: self.q,
            by_degree: out,
        }
    }

    /// Graded product; degrees at or above two vanish.
    pub fn mul(&self, other: &FiniteEval) -> FiniteEval {
        assert_eq!(self.q, other.q);
        let q = self.q;
        let neg_square = pow_mod(q - 1, (q - 1) / 2, q) == 1;
        let mut out = FiniteEval {
            q,
            by_degree: BTreeMap::new(),
        };
        for (&d1, v1) in &self.by_degree {
            for (&d2, v2) in &other.by_degree {
                let d = d1 + d2;
                if d >= 2 {
                    continue;
                }
                let value = mul_values(q, neg_square, d, v1, v2);
                if value_is_zero(&value) {
                    continue;
                }
                let single = FiniteEval {
                    q,
                    by_degree: BTreeMap::from([(d, value)]),
                };
                out = out.add(&single);
            }
        }
        out
    }
}

fn value_is_zero(v: &EvalValue) -> bool {
    match v {
        EvalValue::Gw(g) => g.is_zero(),
        EvalValue::Unit(u) => *u == 1,
        EvalValue::Witt(w) => w.is_zero(),
    }
}

fn mul_values(q: u64, neg_square: bool, d: i64, v1: &EvalValue, v2: &EvalValue) -> EvalValue {
    let nonsquare = |a: u64| pow_mod(a, (q - 1) / 2, q) != 1;
    match (v1, v2) {
        (EvalValue::Gw(a), EvalValue::Gw(b)) => EvalValue::Gw(a.mul(b)),
        (EvalValue::Unit(a), EvalValue::Gw(g)) | (EvalValue::Gw(g), EvalValue::Unit(a)) => {
            let e = g.rank.mod_floor(&BigInt::from(q - 1));
            let (_, digits) = e.to_u64_digits();
            EvalValue::Unit(pow_mod(*a, digits.first().copied().unwrap_or(0), q))
        }
        (EvalValue::Gw(g), EvalValue::Witt(w)) | (EvalValue::Witt(w), EvalValue::Gw(g)) => {
            let gw = WittClass::from_rank_disc(&g.rank, g.disc_nonsquare, neg_square);
            EvalValue::Witt(gw.mul(w))
        }
        (EvalValue::Witt(a), EvalValue::Witt(b)) => EvalValue::Witt(a.mul(b)),
        (EvalValue::Unit(a), EvalValue::Witt(w)) | (EvalValue::Witt(w), EvalValue::Unit(a)) => {
            // [a] . eta^m x = eta^m ([a] x): only the rank parity of x and
            // the square class of a survive.
            let disc = w.rank_odd && nonsquare(*a);
            if d == 0 {
                EvalValue::Gw(GwClass {
                    rank: BigInt::zero(),
                    disc_nonsquare: disc,
                })
            } else {
                EvalValue::Witt(WittClass::from_rank_disc(&BigInt::zero(), disc, neg_square))
            }
        }
        (EvalValue::Unit(_), EvalValue::Unit(_)) => unreachable!("degree two vanishes"),
    }
}

impl fmt::Display for MwMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.eta {
            0 => {}
            1 => parts.push("eta".to_string()),
            m => parts.push(format!("eta^{m}")),
        }
        for s in &self.symbols {
            parts.push(format!("[{s}]"));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

impl fmt::Display for MwElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let trivial_mono = m.eta == 0 && m.symbols.is_empty();
            if trivial_mono {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> FieldSpec {
        FieldSpec::Rationals
    }

    fn s(n: i64) -> Scalar {
        Scalar::from_i64(q(), n)
    }

    fn sym(n: i64) -> MwElement {
        MwElement::symbol(&s(n)).unwrap()
    }

    #[test]
    fn symbol_of_one_vanishes() {
        assert!(MwElement::symbol(&s(1)).unwrap().is_empty());
        assert_eq!(MwElement::symbol(&s(0)), Err(MwError::ZeroSymbol));
    }

    #[test]
    fn bracket_form_of_one_is_one() {
        assert_eq!(MwElement::bracket_form(&s(1)).unwrap(), MwElement::one(q()));
    }

    #[test]
    fn epsilon_display_over_q() {
        assert_eq!(MwElement::epsilon(q()).to_string(), "-1 - eta*[-1]");
    }

    #[test]
    fn relation_two_holds_syntactically() {
        for (a, b) in [(2i64, 3i64), (5, -7), (-2, -2), (4, 9)] {
            let lhs = sym(a * b);
            let eta_ab = MwElement::eta(q())
                .mul(&sym(a))
                .unwrap()
                .mul(&sym(b))
                .unwrap();
            let rhs = sym(a).add(&sym(b)).unwrap().add(&eta_ab).unwrap();
            assert!(lhs.sub(&rhs).unwrap().is_empty(), "a={a} b={b}");
        }
    }

    #[test]
    fn relation_four_holds_syntactically() {
        // eta (2 + eta[-1]) = 0.
        let two = MwElement::from_int(q(), 2);
        let inner = two.add(&MwElement::eta(q()).mul(&sym(-1)).unwrap()).unwrap();
        assert!(MwElement::eta(q()).mul(&inner).unwrap().is_empty());
    }

    #[test]
    fn steinberg_pairs_die() {
        assert!(sym(3).mul(&sym(-2)).unwrap().is_empty());
        let half = MwElement::symbol(&q().parse_scalar("1/2").unwrap()).unwrap();
        assert!(half.mul(&half).unwrap().is_empty());
    }

    #[test]
    fn eps_identities() {
        let eps = MwElement::epsilon(q());
        assert_eq!(eps.mul(&eps).unwrap(), MwElement::one(q()));
        let eps_neg = eps.mul(&sym(-1)).unwrap();
        assert!(eps_neg.sub(&sym(-1)).unwrap().is_empty());
        // eta * eps = eta.
        let eta = MwElement::eta(q());
        assert_eq!(eta.mul(&eps).unwrap(), eta);
    }

    #[test]
    fn bracket_forms_multiply() {
        for (a, b) in [(2i64, 3), (-5, 7), (6, 6), (-1, -1)] {
            let lhs = MwElement::bracket_form(&s(a))
                .unwrap()
                .mul(&MwElement::bracket_form(&s(b)).unwrap())
                .unwrap();
            let rhs = MwElement::bracket_form(&s(a * b)).unwrap();
            assert!(lhs.sub(&rhs).unwrap().is_empty(), "a={a} b={b}");
        }
    }

    #[test]
    fn eta_commutes() {
        let x = MwElement::eta(q()).mul(&sym(5)).unwrap();
        let y = sym(5).mul(&MwElement::eta(q())).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn square_collapse_agrees_under_evaluation() {
        // [2][2] and [-1][2] agree under every graded evaluation over GF(7).
        let f7 = FieldSpec::prime_field(7).unwrap();
        let two = MwElement::symbol(&Scalar::from_i64(f7, 2)).unwrap();
        let neg = MwElement::symbol(&Scalar::from_i64(f7, -1)).unwrap();
        let x = two.mul(&two).unwrap();
        let y = neg.mul(&two).unwrap();
        assert!(x.sub(&y).unwrap().eval_finite_field().unwrap().is_zero());
    }

    #[test]
    fn eval_examples() {
        let f7 = FieldSpec::prime_field(7).unwrap();
        let a = MwElement::symbol(&Scalar::from_i64(f7, 2)).unwrap();
        let b = MwElement::symbol(&Scalar::from_i64(f7, 3)).unwrap();
        assert!(a.mul(&b).unwrap().eval_finite_field().unwrap().is_zero());

        // <2><2> = <4> evaluates to 1 in GW(F_5).
        let f5 = FieldSpec::prime_field(5).unwrap();
        let br2 = MwElement::bracket_form(&Scalar::from_i64(f5, 2)).unwrap();
        let prod = br2.mul(&br2).unwrap();
        let ev = prod.eval_finite_field().unwrap();
        assert_eq!(
            ev.by_degree.get(&0),
            Some(&EvalValue::Gw(GwClass::unit_form(false)))
        );
        assert_eq!(ev.by_degree.len(), 1);
    }

    #[test]
    fn zero_test_cases() {
        let eps = MwElement::epsilon(q());
        let x = eps.mul(&eps).unwrap().sub(&MwElement::one(q())).unwrap();
        assert_eq!(x.is_zero_test(), ZeroTest::Zero);

        let f3 = FieldSpec::prime_field(3).unwrap();
        let neg = MwElement::symbol(&Scalar::from_i64(f3, -1)).unwrap();
        assert_eq!(neg.is_zero_test(), ZeroTest::NonZero);

        assert_eq!(MwElement::zero(q()).is_zero_test(), ZeroTest::Zero);
        assert_eq!(sym(2).is_zero_test(), ZeroTest::NonZero);
    }

    #[test]
    fn chi_twists_odd_degrees() {
        let x = sym(2);
        let eps = MwElement::epsilon(q());
        assert_eq!(x.chi(), eps.mul(&x).unwrap());
        let g = MwElement::bracket_form(&s(3)).unwrap();
        assert_eq!(g.chi(), g);
        assert_eq!(x.chi().chi(), x);
    }
}
