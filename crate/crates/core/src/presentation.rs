//! The unit-generated presentation of the total Milnor-Witt motivic
//! cohomology of an arrangement complement: free words in unit generators
//! with Milnor-Witt coefficients, the relation ideal, and a normal-form
//! algorithm onto the broken-circuit-free basis.
//!
//! Reduction runs in three phases. Generator splitting expands every unit
//! `(lambda prod phi_i^{n_i})` through the twisted logarithm into words over
//! the bare generators `(phi_i)`, with `(lambda g) -> [lambda] + <lambda>(g)`
//! applied left to right and `(f^-1) -> eps (f)`. Sorting rewrites adjacent
//! equal letters by `(f)^2 -> [-1](f)` and out-of-order letters by
//! anticommutativity. Circuit reduction eliminates any word containing a
//! broken circuit (or a full empty-intersection circuit) by the R-polynomial
//! of that circuit, solved for its lexicographically largest word; descent is
//! on word length, then the sorted index tuple.
//!
//! Coefficients live on the left of words and cross a word of odd length
//! through the grading involution, so the concatenation product models the
//! actual eps-graded ring.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::arrangement::{Arrangement, ArrangementError, Circuit, RestrictedImage, Unit};
use crate::milnor_witt::{MwElement, MwError};
use crate::scalar::{FieldSpec, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresError {
    #[error(transparent)]
    Mw(#[from] MwError),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error("element belongs to a different base field")]
    FieldMismatch,
    #[error("unit mentions hyperplane index {0}, not a member of the arrangement")]
    UnitNotInGroup(usize),
    #[error("units do not sum to zero")]
    SumNotZero,
    #[error("cannot verify the sum of the given units symbolically")]
    CannotVerifySum,
}

/// A finite Milnor-Witt combination of words in unit generators; the empty
/// word is the algebra unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresElement {
    field: FieldSpec,
    terms: BTreeMap<Vec<Unit>, MwElement>,
}

impl PresElement {
    pub fn zero(field: FieldSpec) -> PresElement {
        PresElement {
            field,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(field: FieldSpec) -> PresElement {
        PresElement::scalar(MwElement::one(field))
    }

    /// The coefficient as an element supported on the empty word.
    pub fn scalar(coeff: MwElement) -> PresElement {
        let field = coeff.field();
        PresElement::from_terms(field, vec![(Vec::new(), coeff)])
    }

    /// The word `(u_1)...(u_k)` with coefficient one.
    pub fn word(field: FieldSpec, units: Vec<Unit>) -> PresElement {
        PresElement::from_terms(field, vec![(units, MwElement::one(field))])
    }

    pub fn from_terms(field: FieldSpec, terms: Vec<(Vec<Unit>, MwElement)>) -> PresElement {
        let mut map: BTreeMap<Vec<Unit>, MwElement> = BTreeMap::new();
        for (w, c) in terms {
            match map.entry(w) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().add(&c).expect("same field");
                    *e.get_mut() = sum;
                }
            }
        }
        map.retain(|_, c| !c.is_empty());
        PresElement { field, terms: map }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn terms(&self) -> &BTreeMap<Vec<Unit>, MwElement> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &PresElement) -> Result<PresElement, PresError> {
        if self.field != other.field {
            return Err(PresError::FieldMismatch);
        }
        let mut terms: Vec<(Vec<Unit>, MwElement)> = self
            .terms
            .iter()
            .map(|(w, c)| (w.clone(), c.clone()))
            .collect();
        terms.extend(other.terms.iter().map(|(w, c)| (w.clone(), c.clone())));
        Ok(PresElement::from_terms(self.field, terms))
    }

    pub fn sub(&self, other: &PresElement) -> Result<PresElement, PresError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PresElement {
        PresElement {
            field: self.field,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c.neg()))
                .collect(),
        }
    }

    /// Left multiplication by a Milnor-Witt coefficient.
    pub fn scale(&self, coeff: &MwElement) -> Result<PresElement, PresError> {
        if self.field != coeff.field() {
            return Err(PresError::FieldMismatch);
        }
        let terms = self
            .terms
            .iter()
            .map(|(w, c)| (w.clone(), coeff.mul(c).expect("same field")))
            .collect();
        Ok(PresElement::from_terms(self.field, terms))
    }

    /// Concatenation product. A right coefficient crosses a left word of odd
    /// length through the grading involution.
    pub fn mul(&self, other: &PresElement) -> Result<PresElement, PresError> {
        if self.field != other.field {
            return Err(PresError::FieldMismatch);
        }
        let mut terms = Vec::new();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut w = w1.clone();
                w.extend(w2.iter().cloned());
                let coeff = c1.mul(&c2.chi_pow(w1.len())).expect("same field");
                terms.push((w, coeff));
            }
        }
        Ok(PresElement::from_terms(self.field, terms))
    }
}

/// Coordinates over the broken-circuit-free basis monomials, with
/// Milnor-Witt coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    coords: BTreeMap<Vec<usize>, MwElement>,
}

impl NormalForm {
    pub fn coords(&self) -> &BTreeMap<Vec<usize>, MwElement> {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coefficient(&self, word: &[usize]) -> Option<&MwElement> {
        self.coords.get(word)
    }

    /// Back to a presentation element on the bare generators.
    pub fn to_element(&self, field: FieldSpec) -> PresElement {
        let terms = self
            .coords
            .iter()
            .map(|(w, c)| {
                let units: Vec<Unit> = w.iter().map(|&i| Unit::generator(field, i)).collect();
                (units, c.clone())
            })
            .collect();
        PresElement::from_terms(field, terms)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationFamily {
    ConstIdent,
    Logarithm,
    Steinberg,
    Square,
    AntiComm,
    RPoly,
}

/// A concrete relation: the family, the units involved, and the element of
/// the free algebra it denotes. Every instance normalizes to zero.
#[derive(Debug, Clone)]
pub struct RelationInstance {
    pub family: RelationFamily,
    pub units: Vec<Unit>,
    pub element: PresElement,
}

struct Rule {
    trigger: Vec<usize>,
    replacement: Vec<(Vec<usize>, MwElement)>,
}

type AtomTerms = BTreeMap<Vec<usize>, MwElement>;

/// Reduction context for one arrangement: circuits, the basis index sets, and
/// one precomputed rewrite rule per circuit.
pub struct Presentation {
    arr: Arrangement,
    circuits: Vec<Circuit>,
    nbc: Vec<Vec<usize>>,
    nbc_set: BTreeSet<Vec<usize>>,
    rules: Vec<Rule>,
}

const REDUCE_STEP_LIMIT: usize = 5_000_000;

impl Presentation {
    pub fn new(arr: Arrangement) -> Presentation {
        let circuits = arr.circuits();
        let nbc = arr.nbc_sets();
        let nbc_set: BTreeSet<Vec<usize>> = nbc.iter().cloned().collect();
        let mut ctx = Presentation {
            arr,
            circuits,
            nbc,
            nbc_set,
            rules: Vec::new(),
        };
        let mut rules = Vec::new();
        for circuit in &ctx.circuits {
            rules.push(ctx.build_rule(circuit));
        }
        rules.sort_by(|a, b| {
            (a.trigger.len(), a.trigger.clone()).cmp(&(b.trigger.len(), b.trigger.clone()))
        });
        ctx.rules = rules;
        let recursive: BTreeSet<Vec<usize>> = basis_recursive(&ctx.arr).into_iter().collect();
        assert_eq!(
            recursive, ctx.nbc_set,
            "deletion-restriction basis disagrees with the broken-circuit sets"
        );
        ctx
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arr
    }

    pub fn circuits(&self) -> &[Circuit] {
        &self.circuits
    }

    fn field(&self) -> FieldSpec {
        self.arr.field()
    }

    /// The canonical units of a circuit: the constant term first when it is
    /// nonzero, then `lambda_j phi_{s_j}` in support order. They sum to zero.
    pub fn circuit_units(&self, circuit: &Circuit) -> Vec<Unit> {
        let mut units = Vec::new();
        if !circuit.lambda0.is_zero() {
            units.push(Unit::constant(circuit.lambda0.clone()).expect("nonzero"));
        }
        for (k, &i) in circuit.support.iter().enumerate() {
            units.push(Unit::scaled_generator(circuit.lambda[k].clone(), i).expect("nonzero"));
        }
        units
    }

    /// Builds the rewrite rule of one circuit: its R-polynomial solved for
    /// the lexicographically largest word, which is the broken circuit of a
    /// central circuit and the full support of an empty-intersection one.
    fn build_rule(&self, circuit: &Circuit) -> Rule {
        let field = self.field();
        let units = self.circuit_units(circuit);
        let r = self.r_formula(&units);
        let atoms = self.expand_element(&r).expect("circuit units are members");
        let reduced = self.reduce(atoms, &[]);
        let trigger: Vec<usize> = if circuit.is_central() {
            circuit.broken()
        } else {
            circuit.support.clone()
        };
        let lead = reduced
            .get(&trigger)
            .expect("R-polynomial supports its trigger word")
            .clone();
        // The leading coefficient is eps^{t+1} <Lambda>, Lambda the product of
        // the form scalars entering the trigger; invert as eps^{t+1} <1/Lambda>.
        let t = units.len() - 1;
        let mut prod = field.one();
        for lam in &circuit.lambda {
            prod = prod.mul(lam);
        }
        if circuit.is_central() {
            prod = prod.div(&circuit.lambda[0]).expect("nonzero");
        }
        let inv = MwElement::eps_pow(field, t + 1)
            .mul(&MwElement::bracket_form(&prod.inv().expect("nonzero")).expect("nonzero"))
            .expect("same field");
        assert_eq!(
            inv.mul(&lead).expect("same field"),
            MwElement::one(field),
            "leading coefficient of a circuit rule must be a unit"
        );
        let mut replacement = Vec::new();
        for (w, c) in &reduced {
            if *w == trigger {
                continue;
            }
            let coeff = inv.mul(c).expect("same field").neg();
            replacement.push((w.clone(), coeff));
        }
        Rule {
            trigger,
            replacement,
        }
    }

    /// Expands one unit generator into words over the bare `(phi_i)` by the
    /// twisted logarithm, folding factors left to right.
    fn expand_unit(&self, u: &Unit) -> Result<AtomTerms, PresError> {
        let field = self.field();
        for (&i, _) in u.exponents() {
            if i >= self.arr.len() {
                return Err(PresError::UnitNotInGroup(i));
            }
        }
        let mut acc: AtomTerms = BTreeMap::new();
        let lambda = MwElement::symbol(u.scalar())?;
        if !lambda.is_empty() {
            acc.insert(Vec::new(), lambda);
        }
        let eps = MwElement::epsilon(field);
        let one = MwElement::one(field);
        let eta = MwElement::eta(field);
        for (&i, &n) in u.exponents() {
            let factor: AtomTerms = if n > 0 {
                BTreeMap::from([(vec![i], one.clone())])
            } else {
                BTreeMap::from([(vec![i], eps.clone())])
            };
            for _ in 0..n.unsigned_abs() {
                // (f g) = (f) + (g) + eta (f)(g), f being the part already
                // consumed.
                let cross = atom_mul(&acc, &factor);
                let mut next = acc;
                merge_scaled(&mut next, &factor, &one);
                merge_scaled(&mut next, &cross, &eta);
                acc = next;
            }
        }
        Ok(acc)
    }

    fn expand_element(&self, x: &PresElement) -> Result<AtomTerms, PresError> {
        if x.field != self.field() {
            return Err(PresError::FieldMismatch);
        }
        let one = MwElement::one(self.field());
        let mut out: AtomTerms = BTreeMap::new();
        for (word, coeff) in &x.terms {
            let mut acc: AtomTerms = BTreeMap::from([(Vec::new(), coeff.clone())]);
            for u in word {
                let e = self.expand_unit(u)?;
                acc = atom_mul(&acc, &e);
            }
            merge_scaled(&mut out, &acc, &one);
        }
        Ok(out)
    }

    /// Worklist reduction of atom words: squares, anticommutativity sorting,
    /// then circuit rules on sorted strict words.
    fn reduce(&self, pending: AtomTerms, rules: &[Rule]) -> AtomTerms {
        let field = self.field();
        let eps = MwElement::epsilon(field);
        let neg_one = MwElement::symbol(&Scalar::from_i64(field, -1)).expect("nonzero");
        let mut pending = pending;
        let mut result: AtomTerms = BTreeMap::new();
        let mut steps = 0usize;
        while let Some((word, coeff)) = pending.pop_first() {
            steps += 1;
            assert!(
                steps < REDUCE_STEP_LIMIT,
                "word reduction exceeded step limit"
            );
            if coeff.is_empty() {
                continue;
            }
            // Squares: (phi)(phi) -> [-1](phi), the [-1] crossing the prefix.
            if let Some(i) = (0..word.len().saturating_sub(1)).find(|&i| word[i] == word[i + 1]) {
                let mut w = word.clone();
                w.remove(i + 1);
                let factor = MwElement::eps_pow(field, i)
                    .mul(&neg_one)
                    .expect("same field");
                let c = coeff.mul(&factor).expect("same field");
                merge_term(&mut pending, w, c);
                continue;
            }
            // Sorting: adjacent swap through eps.
            if let Some(i) = (0..word.len().saturating_sub(1)).find(|&i| word[i] > word[i + 1]) {
                let mut w = word.clone();
                w.swap(i, i + 1);
                let c = coeff.mul(&eps).expect("same field");
                merge_term(&mut pending, w, c);
                continue;
            }
            // Sorted strict word: fire the first circuit rule that applies.
            if let Some(rule) = rules.iter().find(|r| is_sorted_subset(&r.trigger, &word)) {
                let rest: Vec<usize> = word
                    .iter()
                    .copied()
                    .filter(|i| !rule.trigger.contains(i))
                    .collect();
                // (word) = eps^sigma (trigger)(rest): sigma counts the
                // crossings pulling the trigger letters to the front.
                let sigma = rule
                    .trigger
                    .iter()
                    .map(|&t| rest.iter().filter(|&&r| r < t).count())
                    .sum::<usize>();
                let twist = MwElement::eps_pow(field, sigma);
                for (w_alpha, c_alpha) in &rule.replacement {
                    let mut w = w_alpha.clone();
                    w.extend(rest.iter().copied());
                    let factor = twist.mul(c_alpha).expect("same field");
                    let c = coeff.mul(&factor).expect("same field");
                    merge_term(&mut pending, w, c);
                }
                continue;
            }
            merge_term(&mut result, word, coeff);
        }
        result.retain(|_, c| !c.is_empty());
        result
    }

    /// Normal form: coordinates of `x` over the basis monomials.
    pub fn normal_form(&self, x: &PresElement) -> Result<NormalForm, PresError> {
        let atoms = self.expand_element(x)?;
        let coords = self.reduce(atoms, &self.rules);
        for w in coords.keys() {
            assert!(
                self.nbc_set.contains(w),
                "reduction left a non-basis word {w:?}"
            );
        }
        Ok(NormalForm { coords })
    }

    /// Normal form of the concatenation product.
    pub fn multiply(&self, x: &PresElement, y: &PresElement) -> Result<NormalForm, PresError> {
        self.normal_form(&x.mul(y)?)
    }

    /// The R-polynomial formula, with no condition on the units. The first
    /// sum carries `eps^{t+i+1}`, the second `(-1)^k [-1]^k` over all ways of
    /// omitting at least two factors; the normalization is pinned by
    /// `r_minus_one_identity`.
    fn r_formula(&self, units: &[Unit]) -> PresElement {
        let field = self.field();
        let t = units.len() - 1;
        let neg_one = MwElement::symbol(&Scalar::from_i64(field, -1)).expect("nonzero");
        let mut terms: Vec<(Vec<Unit>, MwElement)> = Vec::new();
        for i in 0..=t {
            let word: Vec<Unit> = units
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, u)| u.clone())
                .collect();
            terms.push((word, MwElement::eps_pow(field, t + i + 1)));
        }
        for mask in 0u32..(1u32 << (t + 1)) {
            let omitted = mask.count_ones() as usize;
            if omitted < 2 {
                continue;
            }
            let k = omitted - 1;
            let word: Vec<Unit> = units
                .iter()
                .enumerate()
                .filter(|(j, _)| mask >> *j & 1 == 0)
                .map(|(_, u)| u.clone())
                .collect();
            let mut coeff = MwElement::one(field);
            for _ in 0..k {
                coeff = coeff.mul(&neg_one).expect("same field");
            }
            if k % 2 == 1 {
                coeff = coeff.neg();
            }
            terms.push((word, coeff));
        }
        PresElement::from_terms(field, terms)
    }

    /// The relation attached to units summing to zero.
    pub fn r_polynomial(&self, units: &[Unit]) -> Result<PresElement, PresError> {
        match self.unit_sum_check(units)? {
            SumCheck::Zero => Ok(self.r_formula(units)),
            SumCheck::NonZero => Err(PresError::SumNotZero),
        }
    }

    /// Convention check: `R(f_1, ..., f_t, -1) = eps (f_1)...(f_t)` for any
    /// units, locking the index range of the second sum.
    pub fn r_minus_one_identity(&self, units: &[Unit]) -> Result<bool, PresError> {
        let field = self.field();
        let mut extended = units.to_vec();
        extended.push(Unit::constant(Scalar::from_i64(field, -1)).expect("nonzero"));
        let r = self.r_formula(&extended);
        let eps_word =
            PresElement::word(field, units.to_vec()).scale(&MwElement::epsilon(field))?;
        Ok(self.normal_form(&r.sub(&eps_word)?)?.is_zero())
    }

    /// Checks `sum units = 0` through the affine-form representation, or by
    /// pairwise cancellation when some unit is not linear.
    fn unit_sum_check(&self, units: &[Unit]) -> Result<SumCheck, PresError> {
        if let Some(total) = self.total_affine(units) {
            return Ok(if total.iter().all(|c| c.is_zero()) {
                SumCheck::Zero
            } else {
                SumCheck::NonZero
            });
        }
        let mut rest: Vec<Unit> = units.to_vec();
        while let Some(u) = rest.pop() {
            let neg = u.neg();
            match rest.iter().position(|v| *v == neg) {
                Some(p) => {
                    rest.remove(p);
                }
                None => return Err(PresError::CannotVerifySum),
            }
        }
        Ok(SumCheck::Zero)
    }

    /// Sum of the units as an affine form, when every unit is constant or
    /// `lambda phi_i`.
    fn total_affine(&self, units: &[Unit]) -> Option<Vec<Scalar>> {
        let field = self.field();
        let mut total = vec![field.zero(); self.arr.dim() + 1];
        for u in units {
            if u.is_constant() {
                total[0] = total[0].add(u.scalar());
            } else if let Some((lam, i)) = u.as_linear() {
                let h = self.arr.hyperplane(i).ok()?;
                for (k, c) in h.coeffs().iter().enumerate() {
                    total[k] = total[k].add(&lam.mul(c));
                }
            } else {
                return None;
            }
        }
        Some(total)
    }

    /// Whether the units sum to the constant one; recognizes affine
    /// combinations and families `c_j phi_{a_j} phi_b^{-1}` over a common `b`.
    pub fn unit_sum_is_one(&self, units: &[Unit]) -> bool {
        if let Some(total) = self.total_affine(units) {
            return total[0].is_one() && total[1..].iter().all(|c| c.is_zero());
        }
        let mut common: Option<usize> = None;
        let mut numerators = Vec::new();
        for u in units {
            let exps = u.exponents();
            if exps.len() != 2 {
                return false;
            }
            let mut it = exps.iter();
            let (&a, &na) = it.next().unwrap();
            let (&b, &nb) = it.next().unwrap();
            let (num, den) = match (na, nb) {
                (1, -1) => (a, b),
                (-1, 1) => (b, a),
                _ => return false,
            };
            if *common.get_or_insert(den) != den {
                return false;
            }
            numerators.push(Unit::scaled_generator(u.scalar().clone(), num).expect("nonzero"));
        }
        let Some(den) = common else { return false };
        let Some(total) = self.total_affine(&numerators) else {
            return false;
        };
        let target = self.arr.hyperplane(den).expect("member").coeffs();
        total == target
    }

    /// Deterministic generator list for the relation ideal: identification of
    /// constants, twisted-logarithm and anticommutativity instances on seeded
    /// random units, one square per generator, and one R-polynomial per
    /// circuit.
    pub fn j_generators(&self, seed: u64) -> Vec<RelationInstance> {
        use rand::SeedableRng;
        let field = self.field();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for v in [-1i64, 2, -2, 3, 5] {
            let lam = Scalar::from_i64(field, v);
            if lam.is_zero() || lam.is_one() {
                continue;
            }
            out.push(self.const_ident_instance(&lam));
        }
        for _ in 0..4 {
            let f = self.random_unit(&mut rng);
            let g = self.random_unit(&mut rng);
            out.push(self.logarithm_instance(&f, &g));
            out.push(self.anticomm_instance(&f, &g));
        }
        for i in 0..self.arr.len() {
            out.push(self.square_instance(&Unit::generator(field, i)));
        }
        for circuit in &self.circuits {
            out.push(self.rpoly_instance(circuit));
        }
        out
    }

    /// A seeded random element of the unit group, with small scalar and
    /// exponents.
    pub fn random_unit<R: rand::Rng>(&self, rng: &mut R) -> Unit {
        let field = self.field();
        let mut u = Unit::constant(random_nonzero_scalar(field, rng)).expect("nonzero");
        for i in 0..self.arr.len() {
            let e: i64 = rng.gen_range(-1..=1);
            if e != 0 {
                u = u.mul(&Unit::generator(field, i).pow(e));
            }
        }
        u
    }

    /// Generators with units of the restricted shapes `lambda phi_i` and
    /// `lambda` only.
    pub fn j_prime_generators(&self) -> Vec<RelationInstance> {
        let field = self.field();
        let samples = [2i64, -1, 3];
        let mut out = Vec::new();
        for v in [-1i64, 2, 3] {
            let lam = Scalar::from_i64(field, v);
            if lam.is_zero() || lam.is_one() {
                continue;
            }
            out.push(self.const_ident_instance(&lam));
        }
        for i in 0..self.arr.len() {
            for v in samples {
                let lam = Scalar::from_i64(field, v);
                if lam.is_zero() {
                    continue;
                }
                let f = Unit::scaled_generator(lam, i).expect("nonzero");
                let g = Unit::generator(field, (i + 1) % self.arr.len().max(1));
                out.push(self.logarithm_instance(&f, &g));
                out.push(self.anticomm_instance(&f, &g));
            }
            out.push(self.square_instance(&Unit::generator(field, i)));
        }
        for circuit in &self.circuits {
            out.push(self.rpoly_instance(circuit));
        }
        out
    }

    /// `(lambda) - [lambda]`.
    pub fn const_ident_instance(&self, lam: &Scalar) -> RelationInstance {
        let field = self.field();
        let u = Unit::constant(lam.clone()).expect("nonzero constant");
        let element = PresElement::word(field, vec![u.clone()])
            .sub(&PresElement::scalar(
                MwElement::symbol(lam).expect("nonzero"),
            ))
            .expect("same field");
        RelationInstance {
            family: RelationFamily::ConstIdent,
            units: vec![u],
            element,
        }
    }

    /// `(fg) - (f) - (g) - eta (f)(g)`.
    pub fn logarithm_instance(&self, f: &Unit, g: &Unit) -> RelationInstance {
        let field = self.field();
        let fg = PresElement::word(field, vec![f.mul(g)]);
        let wf = PresElement::word(field, vec![f.clone()]);
        let wg = PresElement::word(field, vec![g.clone()]);
        let pair = PresElement::word(field, vec![f.clone(), g.clone()])
            .scale(&MwElement::eta(field))
            .expect("same field");
        let element = fg
            .sub(&wf)
            .and_then(|x| x.sub(&wg))
            .and_then(|x| x.sub(&pair))
            .expect("same field");
        RelationInstance {
            family: RelationFamily::Logarithm,
            units: vec![f.clone(), g.clone()],
            element,
        }
    }

    /// `(f)(g) - eps (g)(f)`.
    pub fn anticomm_instance(&self, f: &Unit, g: &Unit) -> RelationInstance {
        let field = self.field();
        let fg = PresElement::word(field, vec![f.clone(), g.clone()]);
        let gf = PresElement::word(field, vec![g.clone(), f.clone()])
            .scale(&MwElement::epsilon(field))
            .expect("same field");
        RelationInstance {
            family: RelationFamily::AntiComm,
            units: vec![f.clone(), g.clone()],
            element: fg.sub(&gf).expect("same field"),
        }
    }

    /// `(f)^2 - [-1](f)`.
    pub fn square_instance(&self, f: &Unit) -> RelationInstance {
        let field = self.field();
        let sq = PresElement::word(field, vec![f.clone(), f.clone()]);
        let neg = PresElement::word(field, vec![f.clone()])
            .scale(&MwElement::symbol(&Scalar::from_i64(field, -1)).expect("nonzero"))
            .expect("same field");
        RelationInstance {
            family: RelationFamily::Square,
            units: vec![f.clone()],
            element: sq.sub(&neg).expect("same field"),
        }
    }

    /// The R-polynomial of a circuit on its canonical units.
    pub fn rpoly_instance(&self, circuit: &Circuit) -> RelationInstance {
        let units = self.circuit_units(circuit);
        let element = self.r_formula(&units);
        RelationInstance {
            family: RelationFamily::RPoly,
            units,
            element,
        }
    }

    /// Steinberg instances `(u_1)...(u_s)` with the units summing to one, one
    /// per circuit. An empty-intersection circuit divides by its constant; a
    /// central circuit divides by its first member form.
    pub fn steinberg_instances(&self) -> Vec<RelationInstance> {
        let field = self.field();
        let mut out = Vec::new();
        for circuit in &self.circuits {
            let units: Vec<Unit> = if circuit.is_central() {
                let pivot = circuit.support[0];
                let pivot_inv = Unit::generator(field, pivot).inv();
                let lam0 = &circuit.lambda[0];
                circuit.support[1..]
                    .iter()
                    .zip(&circuit.lambda[1..])
                    .map(|(&i, lam)| {
                        let c = lam.div(lam0).expect("nonzero").neg();
                        Unit::scaled_generator(c, i)
                            .expect("nonzero")
                            .mul(&pivot_inv)
                    })
                    .collect()
            } else {
                circuit
                    .support
                    .iter()
                    .zip(&circuit.lambda)
                    .map(|(&i, lam)| {
                        let c = lam.div(&circuit.lambda0).expect("nonzero").neg();
                        Unit::scaled_generator(c, i).expect("nonzero")
                    })
                    .collect()
            };
            debug_assert!(self.unit_sum_is_one(&units));
            let element = PresElement::word(field, units.clone());
            out.push(RelationInstance {
                family: RelationFamily::Steinberg,
                units,
                element,
            });
        }
        out
    }

    /// Basis monomials; equal to the broken-circuit-free sets and to the
    /// deletion-restriction recursion, ordered by degree then lex.
    pub fn basis(&self) -> &[Vec<usize>] {
        &self.nbc
    }

    /// Per-degree ranks by the deletion-restriction recursion alone.
    pub fn rank(&self) -> Vec<usize> {
        rank_recursive(&self.arr)
    }

    /// The boundary of `x` along the last hyperplane: the coefficient of the
    /// trailing `(phi_last)` in normal form, with every remaining letter
    /// restricted. Images of the deletion map to zero.
    pub fn restriction_boundary(&self, x: &PresElement) -> Result<PresElement, PresError> {
        let n = self.arr.len();
        assert!(n > 0, "boundary requires a nonempty arrangement");
        let last = n - 1;
        let (_, map) = self.arr.restriction(last)?;
        let nf = self.normal_form(x)?;
        let field = self.field();
        let mut terms = Vec::new();
        for (word, coeff) in nf.coords() {
            if word.last() != Some(&last) {
                continue;
            }
            let mut letters = Vec::new();
            for &i in &word[..word.len() - 1] {
                match &map.images[i] {
                    Some(RestrictedImage::Form { index, factor }) => {
                        letters
                            .push(Unit::scaled_generator(factor.clone(), *index).expect("nonzero"));
                    }
                    _ => unreachable!("basis words exclude parallel pairs"),
                }
            }
            terms.push((letters, coeff.clone()));
        }
        Ok(PresElement::from_terms(field, terms))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SumCheck {
    Zero,
    NonZero,
}

fn random_nonzero_scalar<R: rand::Rng>(field: FieldSpec, rng: &mut R) -> Scalar {
    loop {
        let v: i64 = rng.gen_range(-5..=5);
        let s = Scalar::from_i64(field, v);
        if !s.is_zero() {
            return s;
        }
    }
}

fn merge_term(map: &mut AtomTerms, word: Vec<usize>, coeff: MwElement) {
    if coeff.is_empty() {
        return;
    }
    match map.entry(word) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(coeff);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = e.get().add(&coeff).expect("same field");
            if sum.is_empty() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

fn merge_scaled(target: &mut AtomTerms, source: &AtomTerms, left: &MwElement) {
    for (w, c) in source {
        let coeff = left.mul(c).expect("same field");
        merge_term(target, w.clone(), coeff);
    }
}

fn atom_mul(a: &AtomTerms, b: &AtomTerms) -> AtomTerms {
    let mut out = AtomTerms::new();
    for (w1, c1) in a {
        for (w2, c2) in b {
            let mut w = w1.clone();
            w.extend(w2.iter().copied());
            let coeff = c1.mul(&c2.chi_pow(w1.len())).expect("same field");
            merge_term(&mut out, w, coeff);
        }
    }
    out
}

fn is_sorted_subset(needle: &[usize], haystack: &[usize]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

fn basis_recursive(arr: &Arrangement) -> Vec<Vec<usize>> {
    if arr.is_empty() {
        return vec![Vec::new()];
    }
    let last = arr.len() - 1;
    let deletion = arr.deletion(last).expect("member index");
    let mut out = basis_recursive(&deletion);
    let (restricted, map) = arr.restriction(last).expect("member index");
    for s in basis_recursive(&restricted) {
        let mut lifted: Vec<usize> = s.iter().map(|&j| map.preimages[j][0]).collect();
        lifted.push(last);
        lifted.sort_unstable();
        out.push(lifted);
    }
    out
}

fn rank_recursive(arr: &Arrangement) -> Vec<usize> {
    if arr.is_empty() {
        return vec![1];
    }
    let last = arr.len() - 1;
    let deleted = rank_recursive(&arr.deletion(last).expect("member index"));
    let (restricted, _) = arr.restriction(last).expect("member index");
    let shifted = rank_recursive(&restricted);
    let mut out = vec![0usize; deleted.len().max(shifted.len() + 1)];
    for (d, &c) in deleted.iter().enumerate() {
        out[d] += c;
    }
    for (d, &c) in shifted.iter().enumerate() {
        out[d + 1] += c;
    }
    out
}

impl fmt::Display for RelationFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RelationFamily::ConstIdent => "constant-identification",
            RelationFamily::Logarithm => "twisted-logarithm",
            RelationFamily::Steinberg => "steinberg",
            RelationFamily::Square => "square",
            RelationFamily::AntiComm => "anticommutativity",
            RelationFamily::RPoly => "r-polynomial",
        };
        write!(f, "{name}")
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

    fn arrangement(rows: Vec<Vec<i64>>) -> Arrangement {
        let planes = rows
            .into_iter()
            .map(|r| r.into_iter().map(s).collect())
            .collect();
        Arrangement::new(q(), 2, planes).unwrap()
    }

    fn boolean2() -> Presentation {
        Presentation::new(arrangement(vec![vec![0, 1, 0], vec![0, 0, 1]]))
    }

    fn pencil() -> Presentation {
        Presentation::new(arrangement(vec![
            vec![0, 1, 0],
            vec![0, 0, 1],
            vec![0, 1, 1],
        ]))
    }

    fn triangle() -> Presentation {
        Presentation::new(arrangement(vec![
            vec![0, 1, 0],
            vec![0, 0, 1],
            vec![-1, 1, 1],
        ]))
    }

    fn gen(i: usize) -> PresElement {
        PresElement::word(q(), vec![Unit::generator(q(), i)])
    }

    #[test]
    fn constant_becomes_coefficient() {
        let p = boolean2();
        let two = PresElement::word(q(), vec![Unit::constant(s(2)).unwrap()]);
        let nf = p.normal_form(&two).unwrap();
        assert_eq!(nf.coefficient(&[]), Some(&MwElement::symbol(&s(2)).unwrap()));
        assert_eq!(nf.coords().len(), 1);
    }

    #[test]
    fn square_collapses() {
        let p = boolean2();
        let nf = p.multiply(&gen(0), &gen(0)).unwrap();
        assert_eq!(
            nf.coefficient(&[0]),
            Some(&MwElement::symbol(&s(-1)).unwrap())
        );
        assert_eq!(nf.coords().len(), 1);
    }

    #[test]
    fn independent_product_is_basis_word() {
        let p = boolean2();
        let nf = p.multiply(&gen(0), &gen(1)).unwrap();
        assert_eq!(nf.coefficient(&[0, 1]), Some(&MwElement::one(q())));
        assert_eq!(nf.coords().len(), 1);
    }

    #[test]
    fn pencil_reduction_lands_on_basis() {
        let p = pencil();
        let x = p.multiply(&gen(1), &gen(2)).unwrap();
        for w in x.coords().keys() {
            assert!(p.basis().contains(w));
        }
        assert!(!x.is_zero());
    }

    #[test]
    fn circuit_rpoly_normalizes_to_zero() {
        for p in [pencil(), triangle()] {
            for circuit in p.circuits().to_vec() {
                let inst = p.rpoly_instance(&circuit);
                let nf = p.normal_form(&inst.element).unwrap();
                assert!(nf.is_zero(), "rpoly of {:?}", circuit.support);
            }
        }
    }

    #[test]
    fn generator_families_normalize_to_zero() {
        for p in [boolean2(), pencil(), triangle()] {
            for inst in p.j_generators(11) {
                let nf = p.normal_form(&inst.element).unwrap();
                assert!(nf.is_zero(), "family {}", inst.family);
            }
            for inst in p.j_prime_generators() {
                let nf = p.normal_form(&inst.element).unwrap();
                assert!(nf.is_zero(), "prime family {}", inst.family);
            }
        }
    }

    #[test]
    fn steinberg_instances_normalize_to_zero() {
        for p in [pencil(), triangle()] {
            for inst in p.steinberg_instances() {
                assert!(p.unit_sum_is_one(&inst.units));
                let nf = p.normal_form(&inst.element).unwrap();
                assert!(nf.is_zero(), "steinberg {:?}", inst.units);
            }
        }
    }

    #[test]
    fn r_minus_one_identity_small() {
        let p = boolean2();
        assert!(p.r_minus_one_identity(&[Unit::generator(q(), 0)]).unwrap());
        assert!(p
            .r_minus_one_identity(&[Unit::generator(q(), 0), Unit::generator(q(), 1)])
            .unwrap());
        let f = Unit::scaled_generator(s(2), 0).unwrap();
        let g = Unit::new(s(-3), std::collections::BTreeMap::from([(1, -1)])).unwrap();
        assert!(p.r_minus_one_identity(&[f, g]).unwrap());
    }

    #[test]
    fn r_f_minus_f_vanishes() {
        let p = pencil();
        let f = Unit::new(s(5), std::collections::BTreeMap::from([(0, 1), (2, -2)])).unwrap();
        let r = p.r_polynomial(&[f.clone(), f.neg()]).unwrap();
        assert!(p.normal_form(&r).unwrap().is_zero());
    }

    #[test]
    fn constant_rpoly_vanishes() {
        let p = boolean2();
        let units = vec![
            Unit::constant(s(2)).unwrap(),
            Unit::constant(s(3)).unwrap(),
            Unit::constant(s(-5)).unwrap(),
        ];
        let r = p.r_polynomial(&units).unwrap();
        assert!(p.normal_form(&r).unwrap().is_zero());
    }

    #[test]
    fn rpoly_requires_zero_sum() {
        let p = boolean2();
        let units = vec![Unit::generator(q(), 0), Unit::generator(q(), 1)];
        assert_eq!(p.r_polynomial(&units), Err(PresError::SumNotZero));
    }

    #[test]
    fn basis_and_ranks() {
        let p = boolean2();
        assert_eq!(p.basis().len(), 4);
        assert_eq!(p.rank(), vec![1, 2, 1]);
        let p = pencil();
        assert_eq!(p.basis().len(), 6);
        assert_eq!(p.rank(), vec![1, 3, 2]);
        let empty = Presentation::new(Arrangement::empty(q(), 2));
        assert_eq!(empty.basis(), &[Vec::<usize>::new()]);
        assert_eq!(empty.rank(), vec![1]);
    }

    #[test]
    fn anticommutativity_of_normal_forms() {
        let p = pencil();
        let f = Unit::generator(q(), 1);
        let g = Unit::generator(q(), 2);
        let fg = p
            .normal_form(&PresElement::word(q(), vec![f.clone(), g.clone()]))
            .unwrap();
        let gf = p
            .normal_form(
                &PresElement::word(q(), vec![g, f])
                    .scale(&MwElement::epsilon(q()))
                    .unwrap(),
            )
            .unwrap();
        assert_eq!(fg, gf);
    }

    #[test]
    fn boundary_examples() {
        let p = boolean2();
        // boundary of (x1)(x2) along {x2 = 0} is the restricted (x1).
        let x = PresElement::word(q(), vec![Unit::generator(q(), 0), Unit::generator(q(), 1)]);
        let b = p.restriction_boundary(&x).unwrap();
        let (restricted, _) = p.arrangement().restriction(1).unwrap();
        let rp = Presentation::new(restricted);
        let nf = rp.normal_form(&b).unwrap();
        assert_eq!(nf.coefficient(&[0]), Some(&MwElement::one(q())));
        assert_eq!(nf.coords().len(), 1);

        // boundary of (x2) is 1; boundary of (x1) is 0.
        let b = p
            .restriction_boundary(&PresElement::word(q(), vec![Unit::generator(q(), 1)]))
            .unwrap();
        let nf = rp.normal_form(&b).unwrap();
        assert_eq!(nf.coefficient(&[]), Some(&MwElement::one(q())));
        let b = p
            .restriction_boundary(&PresElement::word(q(), vec![Unit::generator(q(), 0)]))
            .unwrap();
        assert!(b.is_zero());
    }

    #[test]
    fn normal_form_is_idempotent() {
        let p = pencil();
        let x = PresElement::word(
            q(),
            vec![
                Unit::scaled_generator(s(2), 1).unwrap(),
                Unit::new(s(3), std::collections::BTreeMap::from([(2, 1), (0, -1)])).unwrap(),
            ],
        );
        let nf = p.normal_form(&x).unwrap();
        let again = p.normal_form(&nf.to_element(q())).unwrap();
        assert_eq!(nf, again);
    }

    #[test]
    fn unknown_unit_is_rejected() {
        let p = boolean2();
        let bad = PresElement::word(q(), vec![Unit::generator(q(), 7)]);
        assert_eq!(p.normal_form(&bad), Err(PresError::UnitNotInGroup(7)));
    }
}
