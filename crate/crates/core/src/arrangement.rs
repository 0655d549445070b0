//! Hyperplane arrangements in affine space: deletion, restriction, the
//! intersection poset with its Moebius function, circuits, broken-circuit-free
//! index sets, and the unit group of the complement.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::scalar::{FieldSpec, Scalar, ScalarError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArrangementError {
    #[error("hyperplane has zero linear part")]
    ZeroLinearPart,
    #[error("hyperplanes {0} and {1} coincide after normalization")]
    DuplicateHyperplane(usize, usize),
    #[error("hyperplane index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("coefficient vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unit has a zero or pole along the restricted hyperplane")]
    PoleAlongRestriction,
    #[error("unit scalar must be nonzero")]
    ZeroUnitScalar,
    #[error("invalid arrangement file: {0}")]
    Json(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

/// An affine hyperplane `{c0 + c1 x1 + ... + cN xN = 0}`, stored with the
/// first nonzero coefficient among `c1..cN` scaled to one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hyperplane {
    coeffs: Vec<Scalar>,
}

impl Hyperplane {
    /// Normalizes a raw coefficient vector `(c0, c1, ..., cN)`. Returns the
    /// canonical representative together with the scaling factor that was
    /// divided out, so callers can track unit scalars.
    pub fn normalize(raw: &[Scalar]) -> Result<(Hyperplane, Scalar), ArrangementError> {
        let lead = raw
            .iter()
            .skip(1)
            .find(|c| !c.is_zero())
            .cloned()
            .ok_or(ArrangementError::ZeroLinearPart)?;
        let inv = lead.inv().expect("leading coefficient is nonzero");
        let coeffs = raw.iter().map(|c| c.mul(&inv)).collect();
        Ok((Hyperplane { coeffs }, lead))
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Index of the pivot variable, the first with coefficient one.
    pub fn pivot(&self) -> usize {
        self.coeffs
            .iter()
            .skip(1)
            .position(|c| !c.is_zero())
            .expect("normalized hyperplane has a nonzero linear part")
            + 1
    }

    /// Row `[c1, ..., cN, -c0]` of the defining equation.
    fn equation_row(&self) -> Vec<Scalar> {
        let mut row: Vec<Scalar> = self.coeffs[1..].to_vec();
        row.push(self.coeffs[0].neg());
        row
    }
}

impl fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_affine_form(&self.coeffs))
    }
}

/// Renders `c0 + c1 x1 + ...` dropping zero terms and unit coefficients.
pub fn format_affine_form(coeffs: &[Scalar]) -> String {
    let mut out = String::new();
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let neg = c.to_string().starts_with('-');
        let mag = if neg { c.neg() } else { c.clone() };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if i == 0 {
            out.push_str(&mag.to_string());
        } else if mag.is_one() {
            out.push_str(&format!("x{i}"));
        } else {
            out.push_str(&format!("{mag}*x{i}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// A finite ordered family of distinct hyperplanes in `A^N`. The order is
/// part of the identity: it fixes broken circuits and every basis choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrangement {
    field: FieldSpec,
    dim: usize,
    hyperplanes: Vec<Hyperplane>,
}

#[derive(Serialize, Deserialize)]
struct RawArrangement {
    field: String,
    dim: usize,
    hyperplanes: Vec<Vec<String>>,
}

impl Arrangement {
    pub fn new(
        field: FieldSpec,
        dim: usize,
        raw_hyperplanes: Vec<Vec<Scalar>>,
    ) -> Result<Arrangement, ArrangementError> {
        let mut hyperplanes = Vec::new();
        for raw in &raw_hyperplanes {
            if raw.len() != dim + 1 {
                return Err(ArrangementError::DimensionMismatch {
                    expected: dim + 1,
                    got: raw.len(),
                });
            }
            let (h, _) = Hyperplane::normalize(raw)?;
            hyperplanes.push(h);
        }
        for i in 0..hyperplanes.len() {
            for j in i + 1..hyperplanes.len() {
                if hyperplanes[i] == hyperplanes[j] {
                    return Err(ArrangementError::DuplicateHyperplane(i, j));
                }
            }
        }
        Ok(Arrangement {
            field,
            dim,
            hyperplanes,
        })
    }

    pub fn empty(field: FieldSpec, dim: usize) -> Arrangement {
        Arrangement {
            field,
            dim,
            hyperplanes: Vec::new(),
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn hyperplane(&self, i: usize) -> Result<&Hyperplane, ArrangementError> {
        self.hyperplanes
            .get(i)
            .ok_or(ArrangementError::IndexOutOfRange(i))
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    /// Index of the member equal to the normalization of `raw`, if any.
    pub fn find_form(&self, raw: &[Scalar]) -> Result<Option<(usize, Scalar)>, ArrangementError> {
        let (h, factor) = Hyperplane::normalize(raw)?;
        Ok(self
            .hyperplanes
            .iter()
            .position(|m| *m == h)
            .map(|i| (i, factor)))
    }

    pub fn deletion(&self, y: usize) -> Result<Arrangement, ArrangementError> {
        if y >= self.hyperplanes.len() {
            return Err(ArrangementError::IndexOutOfRange(y));
        }
        let mut hyperplanes = self.hyperplanes.clone();
        hyperplanes.remove(y);
        Ok(Arrangement {
            field: self.field,
            dim: self.dim,
            hyperplanes,
        })
    }

    /// Restricts to the hyperplane `Y` of index `y`, identifying it with
    /// `A^(N-1)` by eliminating the pivot variable of its equation. Returns
    /// the induced arrangement (empty traces dropped, proportional traces
    /// merged) and the record of what every original form restricts to.
    pub fn restriction(
        &self,
        y: usize,
    ) -> Result<(Arrangement, UnitRestrictionMap), ArrangementError> {
        let hy = self.hyperplane(y)?.clone();
        let pivot = hy.pivot();
        let mut restricted: Vec<Hyperplane> = Vec::new();
        let mut images: Vec<Option<RestrictedImage>> = vec![None; self.hyperplanes.len()];
        let mut preimages: Vec<Vec<usize>> = Vec::new();
        for (i, h) in self.hyperplanes.iter().enumerate() {
            if i == y {
                continue;
            }
            // Substitute x_pivot = -(hy_0 + sum_{q != pivot} hy_q x_q).
            let hp = h.coeffs()[pivot].clone();
            let mut subst: Vec<Scalar> = Vec::with_capacity(self.dim);
            for q in 0..=self.dim {
                if q == pivot {
                    continue;
                }
                subst.push(h.coeffs()[q].sub(&hp.mul(&hy.coeffs()[q])));
            }
            if subst.iter().skip(1).all(|c| c.is_zero()) {
                let c = subst[0].clone();
                debug_assert!(!c.is_zero(), "distinct hyperplanes have distinct traces");
                images[i] = Some(RestrictedImage::Constant(c));
                continue;
            }
            let (form, factor) = Hyperplane::normalize(&subst)?;
            let index = match restricted.iter().position(|m| *m == form) {
                Some(j) => j,
                None => {
                    restricted.push(form);
                    preimages.push(Vec::new());
                    restricted.len() - 1
                }
            };
            preimages[index].push(i);
            images[i] = Some(RestrictedImage::Form { index, factor });
        }
        let target = Arrangement {
            field: self.field,
            dim: self.dim - 1,
            hyperplanes: restricted,
        };
        Ok((
            target,
            UnitRestrictionMap {
                removed: y,
                images,
                preimages,
            },
        ))
    }

    /// All nonempty intersections of subfamilies, with Moebius values computed
    /// from the bottom (the ambient space) by the defining recursion.
    pub fn intersection_poset(&self) -> Vec<Flat> {
        let n = self.hyperplanes.len();
        assert!(n <= 20, "intersection poset enumeration is desk-scale only");
        let mut seen: BTreeMap<Vec<Vec<String>>, Flat> = BTreeMap::new();
        for mask in 0u32..(1u32 << n) {
            let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let rows: Vec<Vec<Scalar>> = subset
                .iter()
                .map(|&i| self.hyperplanes[i].equation_row())
                .collect();
            let Some((eqs, rank)) = linalg::affine_rref(rows) else {
                continue;
            };
            let key: Vec<Vec<String>> = eqs
                .iter()
                .map(|r| r.iter().map(|c| c.to_string()).collect())
                .collect();
            seen.entry(key).or_insert(Flat {
                equations: eqs,
                codim: rank,
                members: BTreeSet::new(),
                moebius: 0,
            });
        }
        let mut flats: Vec<Flat> = seen.into_values().collect();
        for flat in &mut flats {
            for (i, h) in self.hyperplanes.iter().enumerate() {
                let mut rows = flat.equations.clone();
                rows.push(h.equation_row());
                match linalg::affine_rref(rows) {
                    Some((_, rank)) if rank == flat.codim => {
                        flat.members.insert(i);
                    }
                    _ => {}
                }
            }
        }
        flats.sort_by(|a, b| (a.codim, &a.members).cmp(&(b.codim, &b.members)));
        // moebius(bottom) = 1; moebius(X) = -sum over flats strictly above X
        // in reverse inclusion, i.e. with strictly smaller member sets.
        for i in 0..flats.len() {
            if flats[i].codim == 0 {
                flats[i].moebius = 1;
                continue;
            }
            let mut acc = 0i64;
            for j in 0..flats.len() {
                if j != i && flats[j].members.is_subset(&flats[i].members) {
                    acc += flats[j].moebius;
                }
            }
            flats[i].moebius = -acc;
        }
        flats
    }

    /// Coefficients of `sum_X |mu(X)| t^codim(X)`.
    pub fn poincare_polynomial(&self) -> Vec<i64> {
        let flats = self.intersection_poset();
        let top = flats.iter().map(|f| f.codim).max().unwrap_or(0);
        let mut coeffs = vec![0i64; top + 1];
        for f in &flats {
            coeffs[f.codim] += f.moebius.abs();
        }
        coeffs
    }

    /// Minimal subsets whose forms admit a dependency
    /// `sum_j lambda_j phi_j + lambda_0 = 0` with every `lambda_j` nonzero.
    /// `lambda_0 = 0` is the central case; `lambda_0 != 0` means the subset
    /// has empty intersection. Dependencies are scaled so the first `lambda`
    /// is one.
    pub fn circuits(&self) -> Vec<Circuit> {
        let n = self.hyperplanes.len();
        let mut found: Vec<Circuit> = Vec::new();
        for size in 2..=n {
            'subsets: for mask in 0u32..(1u32 << n) {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                for c in &found {
                    if c.support.iter().all(|i| subset.contains(i)) {
                        continue 'subsets;
                    }
                }
                let columns: Vec<Vec<Scalar>> = subset
                    .iter()
                    .map(|&i| self.hyperplanes[i].coeffs()[1..].to_vec())
                    .collect();
                let kernel = linalg::kernel_basis(self.field, &columns);
                if kernel.is_empty() {
                    continue;
                }
                debug_assert_eq!(kernel.len(), 1, "minimal dependency is one-dimensional");
                let v = &kernel[0];
                let lead = v.iter().find(|c| !c.is_zero()).expect("kernel vector");
                let inv = lead.inv().expect("nonzero");
                let lambda: Vec<Scalar> = v.iter().map(|c| c.mul(&inv)).collect();
                debug_assert!(lambda.iter().all(|c| !c.is_zero()));
                let mut lambda0 = self.field.zero();
                for (k, &i) in subset.iter().enumerate() {
                    lambda0 = lambda0.sub(&lambda[k].mul(&self.hyperplanes[i].coeffs()[0]));
                }
                found.push(Circuit {
                    support: subset,
                    lambda,
                    lambda0,
                });
            }
        }
        found
    }

    /// Index sets with nonempty intersection of full codimension that contain
    /// no broken circuit. Broken circuits come from the central circuits only:
    /// a set containing an affinely dependent family already has empty
    /// intersection and is excluded by the first condition.
    pub fn nbc_sets(&self) -> Vec<Vec<usize>> {
        let n = self.hyperplanes.len();
        let broken: Vec<Vec<usize>> = self
            .circuits()
            .into_iter()
            .filter(|c| c.is_central())
            .map(|c| c.support[1..].to_vec())
            .collect();
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << n) {
            let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let rows: Vec<Vec<Scalar>> = subset
                .iter()
                .map(|&i| self.hyperplanes[i].equation_row())
                .collect();
            match linalg::affine_rref(rows) {
                Some((_, rank)) if rank == subset.len() => {}
                _ => continue,
            }
            if broken
                .iter()
                .any(|bc| bc.iter().all(|i| subset.contains(i)))
            {
                continue;
            }
            out.push(subset);
        }
        out.sort_by(|a, b| (a.len(), a.clone()).cmp(&(b.len(), b.clone())));
        out
    }

    /// Whether the hyperplanes indexed by `subset` have empty intersection.
    pub fn empty_intersection(&self, subset: &[usize]) -> bool {
        let rows: Vec<Vec<Scalar>> = subset
            .iter()
            .map(|&i| self.hyperplanes[i].equation_row())
            .collect();
        linalg::affine_rref(rows).is_none()
    }

    pub fn to_json(&self) -> String {
        let raw = RawArrangement {
            field: self.field.to_string(),
            dim: self.dim,
            hyperplanes: self
                .hyperplanes
                .iter()
                .map(|h| h.coeffs().iter().map(|c| c.to_string()).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("arrangement serializes")
    }

    pub fn from_json(text: &str) -> Result<Arrangement, ArrangementError> {
        let raw: RawArrangement =
            serde_json::from_str(text).map_err(|e| ArrangementError::Json(e.to_string()))?;
        let field: FieldSpec = raw
            .field
            .parse()
            .map_err(|e: ScalarError| ArrangementError::Json(e.to_string()))?;
        let mut planes = Vec::new();
        for row in &raw.hyperplanes {
            let mut coeffs = Vec::new();
            for entry in row {
                coeffs.push(
                    field
                        .parse_scalar(entry)
                        .map_err(|e| ArrangementError::Json(e.to_string()))?,
                );
            }
            planes.push(coeffs);
        }
        Arrangement::new(field, raw.dim, planes)
    }
}

/// A nonempty intersection of member hyperplanes, keyed by its reduced
/// equation system. `members` is the maximal subfamily cutting it out.
#[derive(Debug, Clone)]
pub struct Flat {
    pub equations: Vec<Vec<Scalar>>,
    pub codim: usize,
    pub members: BTreeSet<usize>,
    pub moebius: i64,
}

/// A minimal affine dependency `sum lambda_j phi_{support_j} + lambda0 = 0`.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub support: Vec<usize>,
    pub lambda: Vec<Scalar>,
    pub lambda0: Scalar,
}

impl Circuit {
    pub fn is_central(&self) -> bool {
        self.lambda0.is_zero()
    }

    /// The broken circuit: the support minus its least element.
    pub fn broken(&self) -> Vec<usize> {
        self.support[1..].to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RestrictedImage {
    /// The form restricts to a nonzero constant; its trace is empty.
    Constant(Scalar),
    /// The form restricts to `factor` times the normalized hyperplane `index`
    /// of the induced arrangement.
    Form { index: usize, factor: Scalar },
}

/// Kernel data of a restriction: what each original form becomes on `Y`, and
/// for each induced hyperplane the original indices mapping onto it (in input
/// order, so the first entry is the minimal preimage).
#[derive(Debug, Clone)]
pub struct UnitRestrictionMap {
    pub removed: usize,
    pub images: Vec<Option<RestrictedImage>>,
    pub preimages: Vec<Vec<usize>>,
}

/// An element `lambda * prod phi_i^{n_i}` of the unit group of the complement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Unit {
    scalar: Scalar,
    exponents: BTreeMap<usize, i64>,
}

impl Unit {
    pub fn new(scalar: Scalar, exponents: BTreeMap<usize, i64>) -> Result<Unit, ArrangementError> {
        if scalar.is_zero() {
            return Err(ArrangementError::ZeroUnitScalar);
        }
        let exponents = exponents.into_iter().filter(|(_, n)| *n != 0).collect();
        Ok(Unit { scalar, exponents })
    }

    pub fn constant(scalar: Scalar) -> Result<Unit, ArrangementError> {
        Unit::new(scalar, BTreeMap::new())
    }

    pub fn one(field: FieldSpec) -> Unit {
        Unit {
            scalar: field.one(),
            exponents: BTreeMap::new(),
        }
    }

    /// The generator `phi_i`.
    pub fn generator(field: FieldSpec, i: usize) -> Unit {
        Unit {
            scalar: field.one(),
            exponents: BTreeMap::from([(i, 1)]),
        }
    }

    pub fn scaled_generator(scalar: Scalar, i: usize) -> Result<Unit, ArrangementError> {
        Unit::new(scalar, BTreeMap::from([(i, 1)]))
    }

    pub fn scalar(&self) -> &Scalar {
        &self.scalar
    }

    pub fn exponents(&self) -> &BTreeMap<usize, i64> {
        &self.exponents
    }

    pub fn is_constant(&self) -> bool {
        self.exponents.is_empty()
    }

    /// `Some((lambda, i))` when the unit is `lambda * phi_i`.
    pub fn as_linear(&self) -> Option<(Scalar, usize)> {
        if self.exponents.len() == 1 {
            let (&i, &n) = self.exponents.iter().next().unwrap();
            if n == 1 {
                return Some((self.scalar.clone(), i));
            }
        }
        None
    }

    pub fn mul(&self, other: &Unit) -> Unit {
        let scalar = self.scalar.mul(&other.scalar);
        let mut exponents = self.exponents.clone();
        for (&i, &n) in &other.exponents {
            let e = exponents.entry(i).or_insert(0);
            *e += n;
            if *e == 0 {
                exponents.remove(&i);
            }
        }
        Unit { scalar, exponents }
    }

    pub fn inv(&self) -> Unit {
        Unit {
            scalar: self.scalar.inv().expect("unit scalar is nonzero"),
            exponents: self.exponents.iter().map(|(&i, &n)| (i, -n)).collect(),
        }
    }

    pub fn neg(&self) -> Unit {
        Unit {
            scalar: self.scalar.neg(),
            exponents: self.exponents.clone(),
        }
    }

    pub fn pow(&self, n: i64) -> Unit {
        if n == 0 {
            return Unit::one(self.scalar.field());
        }
        let base = if n < 0 { self.inv() } else { self.clone() };
        let mut acc = Unit::one(self.scalar.field());
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// Pushes the unit through a restriction map. Requires exponent zero on
    /// the removed hyperplane; constants from empty traces fold into the
    /// scalar.
    pub fn restrict(&self, map: &UnitRestrictionMap) -> Result<Unit, ArrangementError> {
        if self.exponents.contains_key(&map.removed) {
            return Err(ArrangementError::PoleAlongRestriction);
        }
        let mut scalar = self.scalar.clone();
        let mut exponents: BTreeMap<usize, i64> = BTreeMap::new();
        for (&i, &n) in &self.exponents {
            match map
                .images
                .get(i)
                .and_then(|im| im.as_ref())
                .ok_or(ArrangementError::IndexOutOfRange(i))?
            {
                RestrictedImage::Constant(c) => {
                    scalar = scalar.mul(&c.pow(n)?);
                }
                RestrictedImage::Form { index, factor } => {
                    scalar = scalar.mul(&factor.pow(n)?);
                    let e = exponents.entry(*index).or_insert(0);
                    *e += n;
                    if *e == 0 {
                        exponents.remove(index);
                    }
                }
            }
        }
        Ok(Unit { scalar, exponents })
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "u({};)", self.scalar);
        }
        let powers: Vec<String> = self
            .exponents
            .iter()
            .map(|(&i, &n)| {
                if n == 1 {
                    format!("{}", i + 1)
                } else {
                    format!("{}^{}", i + 1, n)
                }
            })
            .collect();
        write!(f, "u({}; {})", self.scalar, powers.join("*"))
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

    pub fn boolean2() -> Arrangement {
        Arrangement::new(q(), 2, vec![vec![s(0), s(1), s(0)], vec![s(0), s(0), s(1)]]).unwrap()
    }

    pub fn pencil() -> Arrangement {
        Arrangement::new(
            q(),
            2,
            vec![
                vec![s(0), s(1), s(0)],
                vec![s(0), s(0), s(1)],
                vec![s(0), s(1), s(1)],
            ],
        )
        .unwrap()
    }

    pub fn triangle() -> Arrangement {
        Arrangement::new(
            q(),
            2,
            vec![
                vec![s(0), s(1), s(0)],
                vec![s(0), s(0), s(1)],
                vec![s(-1), s(1), s(1)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn normalization() {
        let (h, factor) = Hyperplane::normalize(&[s(0), s(2), s(0)]).unwrap();
        assert_eq!(factor, s(2));
        assert_eq!(h.coeffs(), &[s(0), s(1), s(0)]);

        let (h, factor) = Hyperplane::normalize(&[s(1), s(0), s(3)]).unwrap();
        assert_eq!(factor, s(3));
        assert_eq!(h.coeffs(), &[q().parse_scalar("1/3").unwrap(), s(0), s(1)]);

        assert_eq!(
            Hyperplane::normalize(&[s(0), s(0), s(0)]),
            Err(ArrangementError::ZeroLinearPart)
        );
    }

    #[test]
    fn deletion_cases() {
        let a = boolean2();
        let d = a.deletion(1).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.hyperplane(0).unwrap().coeffs(), &[s(0), s(1), s(0)]);
        let single = d.deletion(0).unwrap();
        assert!(single.is_empty());
        let p = pencil().deletion(2).unwrap();
        assert_eq!(p, boolean2());
        assert!(a.deletion(5).is_err());
    }

    #[test]
    fn restriction_merges_and_drops() {
        // Pencil restricted to x1 = 0: both other lines trace to x2.
        let (t, map) = pencil().restriction(0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.dim(), 1);
        assert_eq!(t.hyperplane(0).unwrap().coeffs(), &[s(0), s(1)]);
        assert_eq!(
            map.images[1],
            Some(RestrictedImage::Form { index: 0, factor: s(1) })
        );
        assert_eq!(
            map.images[2],
            Some(RestrictedImage::Form { index: 0, factor: s(1) })
        );
        assert_eq!(map.preimages[0], vec![1, 2]);

        // {x1, x1 - 1, x2} restricted to x1 = 0: the parallel line drops out.
        let a = Arrangement::new(
            q(),
            2,
            vec![
                vec![s(0), s(1), s(0)],
                vec![s(-1), s(1), s(0)],
                vec![s(0), s(0), s(1)],
            ],
        )
        .unwrap();
        let (t, map) = a.restriction(0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(map.images[1], Some(RestrictedImage::Constant(s(-1))));

        let (t, _) = boolean2().restriction(0).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn poset_and_moebius() {
        let flats = boolean2().intersection_poset();
        assert_eq!(flats.len(), 4);
        let mus: Vec<i64> = flats.iter().map(|f| f.moebius).collect();
        assert_eq!(mus, vec![1, -1, -1, 1]);

        let flats = pencil().intersection_poset();
        let origin = flats.iter().find(|f| f.codim == 2).unwrap();
        assert_eq!(origin.moebius, 2);

        let empty = Arrangement::empty(q(), 2);
        let flats = empty.intersection_poset();
        assert_eq!(flats.len(), 1);
        assert_eq!(flats[0].moebius, 1);
    }

    #[test]
    fn moebius_interval_sums_vanish() {
        for a in [boolean2(), pencil(), triangle()] {
            let flats = a.intersection_poset();
            for f in flats.iter().filter(|f| f.codim > 0) {
                let total: i64 = flats
                    .iter()
                    .filter(|g| g.members.is_subset(&f.members))
                    .map(|g| g.moebius)
                    .sum();
                assert_eq!(total, 0);
            }
        }
    }

    #[test]
    fn poincare_polynomials() {
        assert_eq!(boolean2().poincare_polynomial(), vec![1, 2, 1]);
        assert_eq!(pencil().poincare_polynomial(), vec![1, 3, 2]);
        assert_eq!(triangle().poincare_polynomial(), vec![1, 3, 3]);
    }

    #[test]
    fn circuits_of_the_examples() {
        let c = pencil().circuits();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].support, vec![0, 1, 2]);
        assert_eq!(c[0].lambda, vec![s(1), s(1), s(-1)]);
        assert!(c[0].lambda0.is_zero());

        let c = triangle().circuits();
        assert_eq!(c.len(), 1);
        assert!(!c[0].lambda0.is_zero());

        assert!(boolean2().circuits().is_empty());
    }

    #[test]
    fn nbc_sets_of_the_examples() {
        assert_eq!(boolean2().nbc_sets().len(), 4);
        let pencil_nbc = pencil().nbc_sets();
        assert_eq!(pencil_nbc.len(), 6);
        assert!(!pencil_nbc.contains(&vec![1, 2]));
        assert_eq!(triangle().nbc_sets().len(), 7);
    }

    #[test]
    fn nbc_counts_match_poincare() {
        for a in [boolean2(), pencil(), triangle()] {
            let poly = a.poincare_polynomial();
            let nbc = a.nbc_sets();
            for (deg, &coeff) in poly.iter().enumerate() {
                let count = nbc.iter().filter(|s| s.len() == deg).count() as i64;
                assert_eq!(count, coeff);
            }
        }
    }

    #[test]
    fn unit_algebra() {
        let f = Unit::scaled_generator(s(2), 0).unwrap();
        let g = Unit::new(s(3), BTreeMap::from([(0, -1)])).unwrap();
        let prod = f.mul(&g);
        assert!(prod.is_constant());
        assert_eq!(prod.scalar(), &s(6));
    }

    #[test]
    fn unit_restriction() {
        let (_, map) = pencil().restriction(0).unwrap();
        let u = Unit::new(s(5), BTreeMap::from([(1, 1), (2, 1)])).unwrap();
        let r = u.restrict(&map).unwrap();
        assert_eq!(r.scalar(), &s(5));
        assert_eq!(r.exponents(), &BTreeMap::from([(0, 2)]));

        let bad = Unit::generator(q(), 0);
        assert_eq!(
            bad.restrict(&map),
            Err(ArrangementError::PoleAlongRestriction)
        );
    }

    #[test]
    fn json_round_trip() {
        let a = triangle();
        let text = a.to_json();
        let b = Arrangement::from_json(&text).unwrap();
        assert_eq!(a, b);
    }
}
