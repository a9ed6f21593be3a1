//! Complex algebra and term algebra over a finite atom structure.
//!
//! Elements are sets of atoms. The splitting predicate `σ(a, x, y)` holds when
//! `x, y` are distinct identity atoms and both `a` and `-a` meet the block
//! `x × y = x;1 · 1;y`. Over a finite structure every element is a finite
//! join of singletons, so the complex algebra and the term algebra coincide.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::atoms::{AtomLabel, FiniteAtomStructure, ValidationReport};
use crate::error::{Error, Result};
use crate::sexpr::{self, parse_error, SExpr};

/// A set of atoms of one fixed structure.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Element {
    bits: FixedBitSet,
}

impl Element {
    pub fn empty(universe: usize) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(universe),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        Self { bits }
    }

    pub fn from_indices(universe: usize, atoms: impl IntoIterator<Item = usize>) -> Self {
        let mut e = Self::empty(universe);
        for a in atoms {
            e.bits.insert(a);
        }
        e
    }

    pub fn from_labels<'a>(
        s: &FiniteAtomStructure,
        labels: impl IntoIterator<Item = &'a AtomLabel>,
    ) -> Result<Self> {
        let mut e = Self::empty(s.len());
        for l in labels {
            e.bits.insert(s.index_of(l)?);
        }
        Ok(e)
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.bits.contains(atom)
    }

    pub fn insert(&mut self, atom: usize) {
        self.bits.insert(atom);
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn labels(&self, s: &FiniteAtomStructure) -> Vec<AtomLabel> {
        self.atoms().map(|a| s.label(a).clone()).collect()
    }

    pub fn is_subset(&self, other: &Element) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn meets(&self, other: &Element) -> bool {
        !self.bits.is_disjoint(&other.bits)
    }
}

/// Syntax of the term algebra: singletons, constants and the operations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Atom(AtomLabel),
    Identity,
    Zero,
    One,
    Plus(Box<Term>, Box<Term>),
    Minus(Box<Term>),
    Meet(Box<Term>, Box<Term>),
    Compose(Box<Term>, Box<Term>),
    Converse(Box<Term>),
}

impl Term {
    pub fn atom(label: AtomLabel) -> Self {
        Term::Atom(label)
    }

    pub fn plus(a: Term, b: Term) -> Self {
        Term::Plus(Box::new(a), Box::new(b))
    }

    pub fn meet(a: Term, b: Term) -> Self {
        Term::Meet(Box::new(a), Box::new(b))
    }

    pub fn minus(a: Term) -> Self {
        Term::Minus(Box::new(a))
    }

    pub fn compose(a: Term, b: Term) -> Self {
        Term::Compose(Box::new(a), Box::new(b))
    }

    pub fn converse(a: Term) -> Self {
        Term::Converse(Box::new(a))
    }

    /// Number of singleton leaves; constants do not count.
    pub fn leaf_count(&self) -> usize {
        match self {
            Term::Atom(_) => 1,
            Term::Identity | Term::Zero | Term::One => 0,
            Term::Minus(a) | Term::Converse(a) => a.leaf_count(),
            Term::Plus(a, b) | Term::Meet(a, b) | Term::Compose(a, b) => {
                a.leaf_count() + b.leaf_count()
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Atom(_) | Term::Identity | Term::Zero | Term::One => 1,
            Term::Minus(a) | Term::Converse(a) => 1 + a.depth(),
            Term::Plus(a, b) | Term::Meet(a, b) | Term::Compose(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    fn from_sexpr(e: &SExpr) -> Result<Self> {
        match e {
            SExpr::Word(w, offset) => match w.as_str() {
                "id" => Ok(Term::Identity),
                "zero" => Ok(Term::Zero),
                "one" => Ok(Term::One),
                _ => w
                    .parse()
                    .map(Term::Atom)
                    .map_err(|_| parse_error(*offset, format!("bad atom `{w}`"))),
            },
            SExpr::List(items, offset) => {
                let Some((SExpr::Word(op, _), args)) = items.split_first() else {
                    return Err(parse_error(*offset, "expected an operator"));
                };
                let args = args.iter().map(Term::from_sexpr).collect::<Result<Vec<_>>>()?;
                let given = args.len();
                let arity = |n: usize| {
                    if given == n {
                        Ok(())
                    } else {
                        Err(parse_error(*offset, format!("`{op}` takes {n} argument(s)")))
                    }
                };
                let mut args = args.into_iter();
                let mut next = || args.next().unwrap();
                match op.as_str() {
                    "plus" => arity(2).map(|_| Term::plus(next(), next())),
                    "meet" => arity(2).map(|_| Term::meet(next(), next())),
                    "comp" => arity(2).map(|_| Term::compose(next(), next())),
                    "minus" => arity(1).map(|_| Term::minus(next())),
                    "conv" => arity(1).map(|_| Term::converse(next())),
                    _ => Err(parse_error(*offset, format!("unknown operator `{op}`"))),
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Atom(l) => write!(f, "{l}"),
            Term::Identity => f.write_str("id"),
            Term::Zero => f.write_str("zero"),
            Term::One => f.write_str("one"),
            Term::Plus(a, b) => write!(f, "(plus {a} {b})"),
            Term::Meet(a, b) => write!(f, "(meet {a} {b})"),
            Term::Compose(a, b) => write!(f, "(comp {a} {b})"),
            Term::Minus(a) => write!(f, "(minus {a})"),
            Term::Converse(a) => write!(f, "(conv {a})"),
        }
    }
}

impl FromStr for Term {
    type Err = Error;

    /// Grammar:
    ///
    /// ```text
    /// term := LABEL | id | zero | one
    ///       | (plus term term) | (meet term term) | (comp term term)
    ///       | (minus term) | (conv term)
    /// ```
    fn from_str(s: &str) -> Result<Self> {
        Term::from_sexpr(&sexpr::parse(s)?)
    }
}

/// Pairs split by one element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitReport {
    pub element: Vec<AtomLabel>,
    pub split_pairs: Vec<(AtomLabel, AtomLabel)>,
}

/// Outcome of evaluating the sentence `∀x ∃a ∀y (∃a σ(a,x,y) → σ(a,x,y))`
/// with one explicit witness per identity atom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhiReport {
    pub holds: bool,
    pub roots: Vec<PhiRoot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhiRoot {
    pub x: AtomLabel,
    pub witness: Vec<AtomLabel>,
    /// Every `y` for which some element splits `(x, y)`.
    pub splitable_to: Vec<AtomLabel>,
    /// The subset of `splitable_to` the witness fails to split.
    pub unsplit: Vec<AtomLabel>,
}

/// The complex algebra of a finite atom structure.
pub struct ComplexAlgebra<'s> {
    s: &'s FiniteAtomStructure,
    identity: Element,
    id_atoms: Vec<usize>,
    /// Position of an atom in `id_atoms`, if it is an identity atom.
    id_pos: Vec<Option<usize>>,
    /// `x × y` for identity atoms, indexed by positions in `id_atoms`.
    blocks: Vec<Element>,
}

impl<'s> ComplexAlgebra<'s> {
    pub fn new(s: &'s FiniteAtomStructure) -> Self {
        let n = s.len();
        let id_atoms = s.identity_atoms();
        let mut id_pos = vec![None; n];
        for (p, &e) in id_atoms.iter().enumerate() {
            id_pos[e] = Some(p);
        }
        let mut alg = Self {
            s,
            identity: Element::from_indices(n, id_atoms.iter().copied()),
            id_atoms,
            id_pos,
            blocks: Vec::new(),
        };
        let one = alg.one();
        let left: Vec<Element> = alg
            .id_atoms
            .iter()
            .map(|&x| alg.compose(&Element::from_indices(n, [x]), &one))
            .collect();
        let right: Vec<Element> = alg
            .id_atoms
            .iter()
            .map(|&y| alg.compose(&one, &Element::from_indices(n, [y])))
            .collect();
        alg.blocks = left
            .iter()
            .flat_map(|xl| right.iter().map(move |ry| Self::meet_raw(xl, ry)))
            .collect();
        alg
    }

    pub fn structure(&self) -> &'s FiniteAtomStructure {
        self.s
    }

    fn check(&self, a: &Element) {
        assert_eq!(a.universe(), self.s.len(), "element of a different structure");
    }

    pub fn zero(&self) -> Element {
        Element::empty(self.s.len())
    }

    pub fn one(&self) -> Element {
        Element::full(self.s.len())
    }

    pub fn identity(&self) -> Element {
        self.identity.clone()
    }

    pub fn singleton(&self, label: &AtomLabel) -> Result<Element> {
        Ok(Element::from_indices(self.s.len(), [self.s.index_of(label)?]))
    }

    pub fn element(&self, labels: &[AtomLabel]) -> Result<Element> {
        Element::from_labels(self.s, labels)
    }

    pub fn join(&self, a: &Element, b: &Element) -> Element {
        self.check(a);
        self.check(b);
        let mut bits = a.bits.clone();
        bits.union_with(&b.bits);
        Element { bits }
    }

    fn meet_raw(a: &Element, b: &Element) -> Element {
        let mut bits = a.bits.clone();
        bits.intersect_with(&b.bits);
        Element { bits }
    }

    pub fn meet(&self, a: &Element, b: &Element) -> Element {
        self.check(a);
        self.check(b);
        Self::meet_raw(a, b)
    }

    pub fn complement(&self, a: &Element) -> Element {
        self.check(a);
        let mut bits = a.bits.clone();
        bits.toggle_range(..);
        Element { bits }
    }

    /// `X;Y = {c : P(x, y, c) for some x ∈ X, y ∈ Y}`.
    pub fn compose(&self, a: &Element, b: &Element) -> Element {
        self.check(a);
        self.check(b);
        let mut out = self.zero();
        for x in a.atoms() {
            for y in b.atoms() {
                out.bits.union_with(self.s.compose_atoms(x, y));
            }
        }
        out
    }

    /// `X˘ = {u : C(x, u) for some x ∈ X}`.
    pub fn converse(&self, a: &Element) -> Element {
        self.check(a);
        Element::from_indices(self.s.len(), a.atoms().map(|x| self.s.converse(x)))
    }

    pub fn eval(&self, t: &Term) -> Result<Element> {
        Ok(match t {
            Term::Atom(l) => self.singleton(l)?,
            Term::Identity => self.identity(),
            Term::Zero => self.zero(),
            Term::One => self.one(),
            Term::Plus(a, b) => self.join(&self.eval(a)?, &self.eval(b)?),
            Term::Meet(a, b) => self.meet(&self.eval(a)?, &self.eval(b)?),
            Term::Compose(a, b) => self.compose(&self.eval(a)?, &self.eval(b)?),
            Term::Minus(a) => self.complement(&self.eval(a)?),
            Term::Converse(a) => self.converse(&self.eval(a)?),
        })
    }

    fn block(&self, x: usize, y: usize) -> Option<&Element> {
        let (px, py) = (self.id_pos[x]?, self.id_pos[y]?);
        Some(&self.blocks[px * self.id_atoms.len() + py])
    }

    /// `x × y = x;1 · 1;y` for identity atoms `x`, `y`.
    pub fn cross(&self, x: &AtomLabel, y: &AtomLabel) -> Result<Element> {
        let (xi, yi) = (self.s.index_of(x)?, self.s.index_of(y)?);
        for (label, i) in [(x, xi), (y, yi)] {
            if !self.s.is_identity(i) {
                return Err(Error::NotIdentity(label.to_string()));
            }
        }
        Ok(self.block(xi, yi).expect("identity atoms have blocks").clone())
    }

    pub fn sigma_idx(&self, a: &Element, x: usize, y: usize) -> bool {
        if x == y {
            return false;
        }
        let Some(block) = self.block(x, y) else {
            return false;
        };
        block.meets(a) && !block.is_subset(a)
    }

    /// `σ(a, x, y)`; false whenever `x, y` are not distinct identity atoms.
    pub fn sigma(&self, a: &Element, x: &AtomLabel, y: &AtomLabel) -> bool {
        match (self.s.index_of(x), self.s.index_of(y)) {
            (Ok(x), Ok(y)) => self.sigma_idx(a, x, y),
            _ => false,
        }
    }

    /// All pairs `(x, y)` split by `a`, as atom indices in atom order.
    pub fn split_set(&self, a: &Element) -> BTreeSet<(usize, usize)> {
        self.check(a);
        let mut out = BTreeSet::new();
        for &x in &self.id_atoms {
            for &y in &self.id_atoms {
                if self.sigma_idx(a, x, y) {
                    out.insert((x, y));
                }
            }
        }
        out
    }

    pub fn splits_of(&self, a: &Element) -> SplitReport {
        SplitReport {
            element: a.labels(self.s),
            split_pairs: self
                .split_set(a)
                .into_iter()
                .map(|(x, y)| (self.s.label(x).clone(), self.s.label(y).clone()))
                .collect(),
        }
    }

    /// `(a · 1', a · -1')`.
    pub fn decompose(&self, a: &Element) -> (Element, Element) {
        let id = self.identity();
        (self.meet(a, &id), self.meet(a, &self.complement(&id)))
    }

    /// For identity-free `a`, `b`: whether `a;b` splits nothing.
    pub fn check_star(&self, a: &Element, b: &Element) -> Result<bool> {
        for (name, e) in [("a", a), ("b", b)] {
            if e.meets(&self.identity) {
                return Err(Error::Precondition(format!(
                    "`{name}` contains an identity atom"
                )));
            }
        }
        Ok(self.split_set(&self.compose(a, b)).is_empty())
    }

    fn require_identity(&self, x: &AtomLabel) -> Result<usize> {
        let xi = self.s.index_of(x)?;
        if self.s.is_identity(xi) {
            Ok(xi)
        } else {
            Err(Error::NotIdentity(x.to_string()))
        }
    }

    fn rooted(&self, x: usize, pick: impl Fn(&AtomLabel) -> bool) -> Element {
        Element::from_indices(
            self.s.len(),
            (0..self.s.len()).filter(|&a| pick(self.s.label(a)) && self.s.domain(a).ok() == Some(x)),
        )
    }

    /// The join of all `r(n,k)` atoms leaving `x`; empty unless `x` is a
    /// plant root.
    pub fn plant_witness(&self, x: &AtomLabel) -> Result<Element> {
        let xi = self.require_identity(x)?;
        Ok(self.rooted(xi, |l| matches!(l, AtomLabel::R { .. })))
    }

    /// Witness used for the existential in the splitting sentence: the
    /// plant witness at a root, the `rc(n,k)` atoms leaving a leaf end.
    pub fn phi_witness(&self, x: &AtomLabel) -> Result<Element> {
        let xi = self.require_identity(x)?;
        Ok(self.rooted(xi, |l| matches!(l, AtomLabel::R { .. } | AtomLabel::RConv { .. })))
    }

    /// Whether some element splits `(x, y)`; by finiteness a singleton will.
    pub fn some_element_splits(&self, x: usize, y: usize) -> bool {
        let n = self.s.len();
        self.block(x, y)
            .is_some_and(|b| b.atoms().any(|a| self.sigma_idx(&Element::from_indices(n, [a]), x, y)))
    }

    pub fn check_phi(&self) -> Result<PhiReport> {
        self.check_phi_with(|alg, x| alg.phi_witness(x))
    }

    /// Evaluates the splitting sentence, discharging `∃a` by `witness`.
    /// Atoms that are not identity atoms satisfy the body vacuously.
    pub fn check_phi_with<F>(&self, witness: F) -> Result<PhiReport>
    where
        F: Fn(&Self, &AtomLabel) -> Result<Element>,
    {
        if self.id_atoms.is_empty() {
            return Err(Error::Precondition("structure has no identity atoms".into()));
        }
        let mut roots = Vec::new();
        for &x in &self.id_atoms {
            let x_label = self.s.label(x);
            let a = witness(self, x_label)?;
            let targets: Vec<usize> = self
                .id_atoms
                .iter()
                .copied()
                .filter(|&y| self.some_element_splits(x, y))
                .collect();
            let unsplit = targets
                .iter()
                .filter(|&&y| !self.sigma_idx(&a, x, y))
                .map(|&y| self.s.label(y).clone())
                .collect();
            roots.push(PhiRoot {
                x: x_label.clone(),
                witness: a.labels(self.s),
                splitable_to: targets.iter().map(|&y| self.s.label(y).clone()).collect(),
                unsplit,
            });
        }
        Ok(PhiReport {
            holds: roots.iter().all(|r| r.unsplit.is_empty()),
            roots,
        })
    }
}

/// Checks `[a,b ∉ I ∧ x,y ∈ I ∧ x ≠ y ∧ P(a,b,c) ∧ P(x,c,c) ∧ P(x,d,d) ∧
/// P(c,y,c) ∧ P(d,y,d)] → P(a,b,d)` for all assignments.
///
/// Sorts prune the search: `a, b` range over diversity atoms, `c` over
/// `a;b`, `x` over the identity atoms with `P(x,c,c)`, `y` over those with
/// `P(c,y,c)`, and `d` over the atoms with `P(x,d,d) ∧ P(d,y,d)`.
pub fn diversity_product_formula_check(s: &FiniteAtomStructure) -> ValidationReport {
    let mut report = ValidationReport::new();
    let ids = s.identity_atoms();
    let n = s.len();
    let between = |x: usize, y: usize| -> Vec<usize> {
        (0..n).filter(|&d| s.p(x, d, d) && s.p(d, y, d)).collect()
    };
    let mut cache = std::collections::HashMap::new();
    let div = s.diversity_atoms();
    for &a in &div {
        for &b in &div {
            let ab = s.compose_atoms(a, b);
            for c in ab.ones() {
                for &x in ids.iter().filter(|&&x| s.p(x, c, c)) {
                    for &y in ids.iter().filter(|&&y| y != x && s.p(c, y, c)) {
                        let ds = cache.entry((x, y)).or_insert_with(|| between(x, y));
                        for &d in ds.iter().filter(|&&d| !ab.contains(d)) {
                            report.fail(
                                "diversity-product",
                                [a, b, c, d, x, y].map(|i| s.label(i).to_string()),
                            );
                        }
                    }
                }
            }
        }
    }
    report
}

/// Deterministic pseudo-random term over the atoms of `s`.
///
/// The generator is a `ChaCha8Rng` seeded with `seed`. A node at the last
/// allowed level, or with probability 1/4 at any level, is a leaf; a leaf is
/// a uniformly chosen singleton with probability 17/20 and otherwise one of
/// `id`, `zero`, `one` uniformly. Inner nodes are `plus`, `meet`, `minus`,
/// `comp`, `conv` with weights 2, 1, 1, 3, 1.
pub fn random_term(s: &FiniteAtomStructure, max_depth: usize, seed: u64) -> Result<Term> {
    if max_depth == 0 {
        return Err(Error::Precondition("max_depth must be at least 1".into()));
    }
    if s.is_empty() {
        return Err(Error::Precondition("structure has no atoms".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(gen_term(s, max_depth, &mut rng))
}

fn gen_term(s: &FiniteAtomStructure, depth: usize, rng: &mut ChaCha8Rng) -> Term {
    if depth <= 1 || rng.gen_ratio(1, 4) {
        if rng.gen_ratio(17, 20) {
            return Term::Atom(s.label(rng.gen_range(0..s.len())).clone());
        }
        return match rng.gen_range(0..3) {
            0 => Term::Identity,
            1 => Term::Zero,
            _ => Term::One,
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 | 1 => Term::plus(gen_term(s, d, rng), gen_term(s, d, rng)),
        2 => Term::meet(gen_term(s, d, rng), gen_term(s, d, rng)),
        3 => Term::minus(gen_term(s, d, rng)),
        4..=6 => Term::compose(gen_term(s, d, rng), gen_term(s, d, rng)),
        _ => Term::converse(gen_term(s, d, rng)),
    }
}
