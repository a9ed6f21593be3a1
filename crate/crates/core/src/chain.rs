//! Chain atom structures: one identity `1'`, a converse pair `x`, `x⁻`, and
//! self-converse chain elements laid out in components, each a copy of `ω`
//! or of `ℤ`.
//!
//! All diversity triples are allowed except the six rotations of
//! `(n, x, n+1)`, where `n+1` is the successor of `n` in its component.
//! Elements of the term algebra are finite or cofinite sets of atoms and are
//! handled exactly as [`FinCof`] values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Serialize, Serializer};

use crate::atoms::{AtomLabel, FiniteAtomStructure};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ChainKind {
    /// Indices `0, 1, 2, …`.
    Omega,
    /// Indices in `ℤ`.
    Zed,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainStructure {
    components: Vec<ChainKind>,
}

impl ChainStructure {
    pub fn new(components: Vec<ChainKind>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidStructure("a chain structure needs a component".into()));
        }
        Ok(Self { components })
    }

    /// `ω ∪ {1', x, x⁻}`.
    pub fn omega() -> Self {
        Self::new(vec![ChainKind::Omega]).unwrap()
    }

    /// `ω` followed by a copy of `ℤ`: a non-well-founded chain.
    pub fn omega_zed() -> Self {
        Self::new(vec![ChainKind::Omega, ChainKind::Zed]).unwrap()
    }

    pub fn components(&self) -> &[ChainKind] {
        &self.components
    }

    pub fn contains(&self, a: &ChainAtom) -> bool {
        match *a {
            ChainAtom::Elem { component, index } => match self.components.get(component) {
                Some(ChainKind::Omega) => index >= 0,
                Some(ChainKind::Zed) => true,
                None => false,
            },
            _ => true,
        }
    }

    fn elem(&self, component: usize, index: i64) -> Option<ChainAtom> {
        let a = ChainAtom::Elem { component, index };
        self.contains(&a).then_some(a)
    }

    /// The successor of a chain element within its component.
    pub fn successor(&self, a: &ChainAtom) -> Option<ChainAtom> {
        match *a {
            ChainAtom::Elem { component, index } => self.elem(component, index + 1),
            _ => None,
        }
    }

    pub fn predecessor(&self, a: &ChainAtom) -> Option<ChainAtom> {
        match *a {
            ChainAtom::Elem { component, index } => self.elem(component, index - 1),
            _ => None,
        }
    }
}

impl fmt::Display for ChainStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self
            .components
            .iter()
            .map(|k| match k {
                ChainKind::Omega => "omega",
                ChainKind::Zed => "zed",
            })
            .collect();
        f.write_str(&names.join(","))
    }
}

impl FromStr for ChainStructure {
    type Err = Error;

    /// A comma-separated component list such as `omega` or `omega,zed`.
    fn from_str(s: &str) -> Result<Self> {
        let components = s
            .split(',')
            .map(|part| match part.trim() {
                "omega" => Ok(ChainKind::Omega),
                "zed" => Ok(ChainKind::Zed),
                other => Err(Error::InvalidStructure(format!("unknown chain kind `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChainAtom {
    Identity,
    X,
    XConv,
    Elem { component: usize, index: i64 },
}

impl ChainAtom {
    pub const SPECIAL: [ChainAtom; 3] = [ChainAtom::Identity, ChainAtom::X, ChainAtom::XConv];

    pub fn elem(component: usize, index: i64) -> Self {
        Self::Elem { component, index }
    }

    pub fn is_elem(&self) -> bool {
        matches!(self, Self::Elem { .. })
    }

    pub fn converse(self) -> Self {
        match self {
            Self::X => Self::XConv,
            Self::XConv => Self::X,
            other => other,
        }
    }

    fn as_elem(&self) -> Option<(usize, i64)> {
        match *self {
            Self::Elem { component, index } => Some((component, index)),
            _ => None,
        }
    }
}

impl fmt::Display for ChainAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("1'"),
            Self::X => f.write_str("x"),
            Self::XConv => f.write_str("x-"),
            Self::Elem { component, index } => write!(f, "chain({component},{index})"),
        }
    }
}

impl FromStr for ChainAtom {
    type Err = Error;

    /// `1'`, `x`, `x-`, `chain(c,i)`, or a bare integer for component 0.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidLabel(s.to_string());
        match s {
            "1'" => return Ok(Self::Identity),
            "x" => return Ok(Self::X),
            "x-" | "x⁻" => return Ok(Self::XConv),
            _ => {}
        }
        if let Ok(index) = s.parse() {
            return Ok(Self::elem(0, index));
        }
        let args = s
            .strip_prefix("chain(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|r| r.split_once(','))
            .ok_or_else(bad)?;
        Ok(Self::elem(
            args.0.trim().parse().map_err(|_| bad())?,
            args.1.trim().parse().map_err(|_| bad())?,
        ))
    }
}

impl Serialize for ChainAtom {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Whether `m` is the successor of `n` in the same component.
fn is_succ(s: &ChainStructure, n: &ChainAtom, m: &ChainAtom) -> bool {
    s.successor(n).as_ref() == Some(m)
}

/// Membership of `(a, b, c)` in the forbidden family: the rotations
/// `(n,x,n+1)`, `(n+1,x⁻,n)`, `(n+1,n,x⁻)`, `(x⁻,n,n+1)`, `(n,n+1,x)` and
/// `(x,n+1,n)`.
pub fn forbidden(s: &ChainStructure, a: &ChainAtom, b: &ChainAtom, c: &ChainAtom) -> bool {
    use ChainAtom::{X, XConv};
    match (a, b, c) {
        (_, X, _) => is_succ(s, a, c),
        (_, XConv, _) => is_succ(s, c, a),
        (_, _, XConv) => is_succ(s, b, a),
        (XConv, _, _) => is_succ(s, b, c),
        (_, _, X) => is_succ(s, a, b),
        (X, _, _) => is_succ(s, c, b),
        _ => false,
    }
}

pub fn p_holds(s: &ChainStructure, a: &ChainAtom, b: &ChainAtom, c: &ChainAtom) -> bool {
    use ChainAtom::Identity;
    match (a, b, c) {
        (Identity, _, _) => b == c,
        (_, Identity, _) => a == c,
        (_, _, Identity) => a.converse() == *b,
        _ => !forbidden(s, a, b, c),
    }
}

/// A finite set of atoms, or the complement of one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FinCof {
    pub cofinite: bool,
    pub exceptions: BTreeSet<ChainAtom>,
}

impl FinCof {
    pub fn finite(atoms: impl IntoIterator<Item = ChainAtom>) -> Self {
        Self {
            cofinite: false,
            exceptions: atoms.into_iter().collect(),
        }
    }

    pub fn cofinite(excluded: impl IntoIterator<Item = ChainAtom>) -> Self {
        Self {
            cofinite: true,
            exceptions: excluded.into_iter().collect(),
        }
    }

    pub fn empty() -> Self {
        Self::finite([])
    }

    pub fn full() -> Self {
        Self::cofinite([])
    }

    pub fn contains(&self, a: &ChainAtom) -> bool {
        self.exceptions.contains(a) != self.cofinite
    }

    pub fn complement(&self) -> Self {
        Self {
            cofinite: !self.cofinite,
            exceptions: self.exceptions.clone(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        let (a, b) = (&self.exceptions, &other.exceptions);
        match (self.cofinite, other.cofinite) {
            (false, false) => Self::finite(a.union(b).copied()),
            (true, true) => Self::cofinite(a.intersection(b).copied()),
            (true, false) => Self::cofinite(a.difference(b).copied()),
            (false, true) => Self::cofinite(b.difference(a).copied()),
        }
    }

    pub fn meet(&self, other: &Self) -> Self {
        self.complement().union(&other.complement()).complement()
    }

    pub fn converse(&self) -> Self {
        Self {
            cofinite: self.cofinite,
            exceptions: self.exceptions.iter().map(|a| a.converse()).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.cofinite && self.exceptions.is_empty()
    }

    fn indices(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.exceptions.iter().filter_map(ChainAtom::as_elem)
    }
}

impl fmt::Display for FinCof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<_> = self.exceptions.iter().map(ToString::to_string).collect();
        if self.cofinite {
            write!(f, "cofinite{{{}}}", items.join(", "))
        } else {
            write!(f, "{{{}}}", items.join(", "))
        }
    }
}

/// `{c : P(a, b, c)}`.
pub fn atom_compose(s: &ChainStructure, a: &ChainAtom, b: &ChainAtom) -> FinCof {
    use ChainAtom::{Identity, X, XConv};
    if *a == Identity {
        return FinCof::finite([*b]);
    }
    if *b == Identity {
        return FinCof::finite([*a]);
    }
    let mut excluded = BTreeSet::new();
    if a.converse() != *b {
        excluded.insert(Identity);
    }
    let blocked = match (a, b) {
        (_, X) => s.successor(a),
        (_, XConv) => s.predecessor(a),
        (XConv, _) => s.successor(b),
        (X, _) => s.predecessor(b),
        _ if is_succ(s, b, a) => Some(XConv),
        _ if is_succ(s, a, b) => Some(X),
        _ => None,
    };
    excluded.extend(blocked);
    FinCof::cofinite(excluded)
}

/// Per-component sample points for quantifying over `X` and `Y`.
struct Frontier {
    /// Chain atoms within distance 2 of a mentioned index (and the first
    /// three indices of each `ω` component).
    near: BTreeSet<ChainAtom>,
    /// One atom per component standing for every atom outside `near`.
    tail: Vec<ChainAtom>,
    /// One atom per component far from `near` and from `tail`.
    far: Vec<ChainAtom>,
}

fn frontier(s: &ChainStructure, sets: &[&FinCof]) -> Frontier {
    let mut near = BTreeSet::new();
    let mut mentioned: BTreeMap<usize, Vec<i64>> = BTreeMap::new();
    for set in sets {
        for (c, i) in set.indices() {
            mentioned.entry(c).or_default().push(i);
        }
    }
    let (mut tail, mut far) = (Vec::new(), Vec::new());
    for (c, kind) in s.components().iter().enumerate() {
        let mut idx: BTreeSet<i64> = mentioned
            .get(&c)
            .into_iter()
            .flatten()
            .flat_map(|&i| i - 2..=i + 2)
            .collect();
        if *kind == ChainKind::Omega {
            idx.extend(0..=2);
            idx.retain(|&i| i >= 0);
        }
        let t = idx.last().map_or(0, |&m| m + 1);
        near.extend(idx.into_iter().map(|i| ChainAtom::elem(c, i)));
        tail.push(ChainAtom::elem(c, t));
        far.push(ChainAtom::elem(c, t + 3));
    }
    Frontier { near, tail, far }
}

/// Whether `c ∈ X;Y`, exactly.
pub fn compose_contains(s: &ChainStructure, x: &FinCof, y: &FinCof, c: &ChainAtom) -> bool {
    let fr = frontier(s, &[x, y]);
    compose_contains_in(s, &fr, x, y, c)
}

fn compose_contains_in(s: &ChainStructure, fr: &Frontier, x: &FinCof, y: &FinCof, c: &ChainAtom) -> bool {
    let samples: Vec<ChainAtom> = ChainAtom::SPECIAL
        .into_iter()
        .chain(fr.near.iter().copied())
        .chain(fr.tail.iter().copied())
        .chain(fr.far.iter().copied())
        .chain(c.is_elem().then_some(*c))
        .collect();
    let xs: Vec<_> = samples.iter().filter(|a| x.contains(a)).collect();
    let ys: Vec<_> = samples.iter().filter(|b| y.contains(b)).collect();
    xs.iter().any(|a| ys.iter().any(|b| p_holds(s, a, b, c)))
}

/// `X;Y`, exact. Every atom outside the frontier behaves like the tail
/// representative of its component.
pub fn compose(s: &ChainStructure, x: &FinCof, y: &FinCof) -> FinCof {
    let fr = frontier(s, &[x, y]);
    let tails: Vec<bool> = fr
        .tail
        .iter()
        .map(|t| compose_contains_in(s, &fr, x, y, t))
        .collect();
    let cofinite = tails[0];
    debug_assert!(tails.iter().all(|&t| t == cofinite));
    let exceptions = ChainAtom::SPECIAL
        .iter()
        .chain(fr.near.iter())
        .filter(|c| compose_contains_in(s, &fr, x, y, c) != cofinite)
        .copied();
    FinCof {
        cofinite,
        exceptions: exceptions.collect(),
    }
}

/// Whether `n` and `m` are self-converse diversity atoms with `(n, x, m)`
/// excluded from composition, i.e. `m` is the successor of `n`.
pub fn succ_holds(s: &ChainStructure, n: &ChainAtom, m: &ChainAtom) -> bool {
    let self_converse_diversity = |a: &ChainAtom| *a != ChainAtom::Identity && a.converse() == *a;
    self_converse_diversity(n) && self_converse_diversity(m) && !p_holds(s, n, &ChainAtom::X, m)
}

/// `q` is an immediate predecessor of `m` in the order read off
/// `direction`: `x` orders chains upwards, `x⁻` downwards.
fn pred_of(s: &ChainStructure, direction: ChainAtom, m: &ChainAtom) -> Option<ChainAtom> {
    match direction {
        ChainAtom::X => s.predecessor(m),
        _ => s.successor(m),
    }
}

fn succ_of(s: &ChainStructure, direction: ChainAtom, m: &ChainAtom) -> Option<ChainAtom> {
    match direction {
        ChainAtom::X => s.successor(m),
        _ => s.predecessor(m),
    }
}

fn check_direction(direction: ChainAtom) -> Result<()> {
    match direction {
        ChainAtom::X | ChainAtom::XConv => Ok(()),
        other => Err(Error::Precondition(format!("`{other}` is not a direction atom"))),
    }
}

/// Whether `a` contains the predecessor of each of its chain elements.
pub fn is_pred_closed(s: &ChainStructure, direction: ChainAtom, a: &FinCof) -> Result<bool> {
    check_direction(direction)?;
    // Pairs away from the exceptions agree with the polarity, so only
    // pairs touching an exception can break closure.
    Ok(a.exceptions.iter().filter(|e| e.is_elem()).all(|e| {
        let below = pred_of(s, direction, e).map_or(true, |p| !a.contains(e) || a.contains(&p));
        let above = succ_of(s, direction, e).map_or(true, |q| !a.contains(&q) || a.contains(e));
        below && above
    }))
}

/// A predecessor-closed subset of one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Template {
    Empty,
    /// Everything at or before `t` in the direction's order.
    Cut(i64),
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub holds: bool,
    pub witness: Option<FinCof>,
    pub templates: Option<Vec<Template>>,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Size {
    Finite,
    Cofinite,
    Neither,
}

fn template_size(kind: ChainKind, direction: ChainAtom, t: Template) -> Size {
    match (t, kind, direction) {
        (Template::Empty, ..) => Size::Finite,
        (Template::Full, ..) => Size::Cofinite,
        (Template::Cut(_), ChainKind::Zed, _) => Size::Neither,
        (Template::Cut(_), ChainKind::Omega, ChainAtom::X) => Size::Finite,
        (Template::Cut(_), ChainKind::Omega, _) => Size::Cofinite,
    }
}

fn template_contains(direction: ChainAtom, t: Template, index: i64) -> bool {
    match t {
        Template::Empty => false,
        Template::Full => true,
        Template::Cut(c) if direction == ChainAtom::X => index <= c,
        Template::Cut(c) => index >= c,
    }
}

fn template_cuts(kind: ChainKind, around: Option<i64>) -> Vec<Template> {
    let cuts: Vec<i64> = match around {
        Some(n) => (n - 1..=n + 1).collect(),
        None => vec![0],
    };
    let mut out = vec![Template::Empty];
    out.extend(
        cuts.into_iter()
            .filter(|&c| kind == ChainKind::Zed || c >= 0)
            .map(Template::Cut),
    );
    out.push(Template::Full);
    out
}

fn template_element(
    s: &ChainStructure,
    direction: ChainAtom,
    templates: &[Template],
    cofinite: bool,
) -> FinCof {
    let mut exceptions = BTreeSet::new();
    for (c, t) in templates.iter().enumerate() {
        if let (Template::Cut(cut), ChainKind::Omega) = (t, s.components()[c]) {
            let range = if direction == ChainAtom::X { 0..=*cut } else { 0..=*cut - 1 };
            exceptions.extend(range.map(|i| ChainAtom::elem(c, i)));
        }
    }
    FinCof { cofinite, exceptions }
}

/// Decides whether some finite or cofinite element is closed under
/// predecessors (in the order given by `direction`), contains `n` and
/// omits the successor of `n`.
///
/// Predecessor-closed subsets of a component are empty, full, or a cut;
/// a cut of `ℤ` is neither finite nor cofinite. The search runs over every
/// combination of per-component templates, with cuts near `n` in its own
/// component and one representative cut elsewhere.
pub fn decide_pred_split(s: &ChainStructure, direction: ChainAtom, n: &ChainAtom) -> Result<Decision> {
    check_direction(direction)?;
    let Some((home, index)) = n.as_elem().filter(|_| s.contains(n)) else {
        return Err(Error::Precondition(format!("`{n}` is not a chain element of {s}")));
    };
    let next = succ_of(s, direction, n);
    let options: Vec<Vec<Template>> = s
        .components()
        .iter()
        .enumerate()
        .map(|(c, &kind)| template_cuts(kind, (c == home).then_some(index)))
        .collect();
    let mut trace = Vec::new();
    let mut choice = vec![0usize; options.len()];
    loop {
        let templates: Vec<Template> = choice.iter().zip(&options).map(|(&k, o)| o[k]).collect();
        let sizes: Vec<Size> = templates
            .iter()
            .zip(s.components())
            .map(|(&t, &kind)| template_size(kind, direction, t))
            .collect();
        let has_n = template_contains(direction, templates[home], index);
        let has_next = next
            .and_then(|m| m.as_elem())
            .is_some_and(|(_, i)| template_contains(direction, templates[home], i));
        let verdict = if !has_n {
            Err(format!("misses {n}"))
        } else if has_next {
            Err(format!("contains {}", next.unwrap()))
        } else if sizes.iter().all(|&z| z == Size::Finite) {
            Ok(false)
        } else if sizes.iter().all(|&z| z == Size::Cofinite) {
            Ok(true)
        } else {
            Err("neither finite nor cofinite".to_string())
        };
        match verdict {
            Ok(cofinite) => {
                let witness = template_element(s, direction, &templates, cofinite);
                debug_assert!(is_pred_closed(s, direction, &witness).unwrap());
                trace.push(format!("{templates:?}: witness {witness}"));
                return Ok(Decision {
                    holds: true,
                    witness: Some(witness),
                    templates: Some(templates),
                    trace,
                });
            }
            Err(reason) => trace.push(format!("{templates:?}: {reason}")),
        }
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return Ok(Decision {
                    holds: false,
                    witness: None,
                    templates: None,
                    trace,
                });
            }
            choice[pos] += 1;
            if choice[pos] < options[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainPhiReport {
    pub holds: bool,
    pub decisions: Vec<(ChainAtom, Decision)>,
}

/// The chain elements `check_phi_hh` decides: indices `0..=20` of each `ω`
/// component and `-1, 0, 1` of each `ℤ` component. Cuts are translation
/// invariant away from the start of `ω`, so these cover every case.
pub fn phi_representatives(s: &ChainStructure) -> Vec<ChainAtom> {
    s.components()
        .iter()
        .enumerate()
        .flat_map(|(c, kind)| {
            let range = match kind {
                ChainKind::Omega => 0..=20,
                ChainKind::Zed => -1..=1,
            };
            range.map(move |i| ChainAtom::elem(c, i))
        })
        .collect()
}

/// For every chain element `n`: some element is closed under predecessors,
/// contains `n` and omits `n+1`.
pub fn check_phi_hh(s: &ChainStructure) -> ChainPhiReport {
    let decisions: Vec<_> = phi_representatives(s)
        .into_iter()
        .map(|n| (n, decide_pred_split(s, ChainAtom::X, &n).expect("representative is a chain element")))
        .collect();
    ChainPhiReport {
        holds: decisions.iter().all(|(_, d)| d.holds),
        decisions,
    }
}

/// The finite structure on `1', x, x⁻` and the chain elements with index in
/// `windows[c]` for component `c`. Triples reaching outside the window are
/// dropped.
pub fn truncate(s: &ChainStructure, windows: &[(i64, i64)]) -> Result<FiniteAtomStructure> {
    if windows.len() != s.components().len() {
        return Err(Error::Precondition(format!(
            "{} windows for {} components",
            windows.len(),
            s.components().len()
        )));
    }
    let mut atoms: Vec<ChainAtom> = ChainAtom::SPECIAL.to_vec();
    for (c, &(lo, hi)) in windows.iter().enumerate() {
        if lo > hi || !s.contains(&ChainAtom::elem(c, lo)) {
            return Err(Error::Precondition(format!("empty or invalid window [{lo},{hi}]")));
        }
        atoms.extend((lo..=hi).map(|i| ChainAtom::elem(c, i)));
    }
    let label = |a: &ChainAtom| AtomLabel::opaque(a.to_string());
    let mut triples = Vec::new();
    for a in &atoms {
        for b in &atoms {
            for c in &atoms {
                if p_holds(s, a, b, c) {
                    triples.push((label(a), label(b), label(c)));
                }
            }
        }
    }
    FiniteAtomStructure::from_relations(
        atoms.iter().map(label).collect(),
        [label(&ChainAtom::Identity)],
        atoms.iter().map(|a| (label(a), label(&a.converse()))),
        triples,
    )
}

/// A random element whose chain exceptions lie in `ranges[c]` for
/// component `c`.
pub fn random_fincof<R: Rng>(s: &ChainStructure, ranges: &[(i64, i64)], rng: &mut R) -> FinCof {
    let mut exceptions = BTreeSet::new();
    for a in ChainAtom::SPECIAL {
        if rng.gen_bool(0.3) {
            exceptions.insert(a);
        }
    }
    for _ in 0..rng.gen_range(0..=6) {
        let c = rng.gen_range(0..s.components().len());
        let (lo, hi) = ranges[c];
        exceptions.insert(ChainAtom::elem(c, rng.gen_range(lo..=hi)));
    }
    FinCof {
        cofinite: rng.gen_bool(0.5),
        exceptions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{ComplexAlgebra, Element};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use ChainAtom::{Identity, X, XConv};

    fn e(i: i64) -> ChainAtom {
        ChainAtom::elem(0, i)
    }

    #[test]
    fn forbidden_patterns() {
        let h = ChainStructure::omega();
        assert!(forbidden(&h, &e(5), &X, &e(6)));
        assert!(forbidden(&h, &e(6), &XConv, &e(5)));
        assert!(!forbidden(&h, &e(5), &X, &e(7)));
        assert!(forbidden(&h, &e(6), &e(5), &XConv));
        assert!(forbidden(&h, &XConv, &e(5), &e(6)));
        assert!(forbidden(&h, &e(5), &e(6), &X));
        assert!(forbidden(&h, &X, &e(6), &e(5)));
        let hz = ChainStructure::omega_zed();
        assert!(!forbidden(&hz, &e(5), &X, &ChainAtom::elem(1, 6)));
    }

    #[test]
    fn p_examples() {
        let h = ChainStructure::omega();
        assert!(p_holds(&h, &Identity, &X, &X));
        assert!(p_holds(&h, &X, &XConv, &Identity));
        assert!(!p_holds(&h, &e(3), &X, &e(4)));
        assert!(!p_holds(&h, &X, &X, &Identity));
    }

    #[test]
    fn atom_compose_examples() {
        let h = ChainStructure::omega();
        assert_eq!(atom_compose(&h, &e(3), &X), FinCof::cofinite([Identity, e(4)]));
        assert_eq!(atom_compose(&h, &Identity, &e(7)), FinCof::finite([e(7)]));
        assert_eq!(atom_compose(&h, &X, &XConv), FinCof::full());
        assert_eq!(atom_compose(&h, &e(0), &XConv), FinCof::cofinite([Identity]));
    }

    /// `atom_compose` agrees with a scan of `p_holds` and excludes at most
    /// one diversity atom.
    #[test]
    fn atom_compose_matches_scan() {
        let s = ChainStructure::omega_zed();
        let mut atoms = ChainAtom::SPECIAL.to_vec();
        atoms.extend((0..8).map(e));
        atoms.extend((-4..4).map(|i| ChainAtom::elem(1, i)));
        for a in &atoms[..14] {
            for b in &atoms[..14] {
                let ab = atom_compose(&s, a, b);
                for c in &atoms {
                    assert_eq!(ab.contains(c), p_holds(&s, a, b, c), "{a} {b} {c}");
                }
                if ab.cofinite {
                    assert!(ab.exceptions.iter().filter(|c| **c != Identity).count() <= 1);
                }
            }
        }
    }

    #[test]
    fn compose_examples() {
        let h = ChainStructure::omega();
        let three = FinCof::finite([e(3)]);
        assert_eq!(compose(&h, &three, &FinCof::finite([X])), FinCof::cofinite([Identity, e(4)]));
        let x = FinCof::cofinite([e(2), X]);
        assert_eq!(compose(&h, &x, &FinCof::finite([Identity])), x);
        assert_eq!(compose(&h, &FinCof::full(), &FinCof::full()), FinCof::full());
        assert_eq!(compose(&h, &FinCof::empty(), &FinCof::full()), FinCof::empty());
    }

    #[test]
    fn boolean_and_converse() {
        assert_eq!(FinCof::finite([X, e(3)]).converse(), FinCof::finite([XConv, e(3)]));
        assert_eq!(FinCof::finite([e(1)]).complement(), FinCof::cofinite([e(1)]));
        assert_eq!(FinCof::cofinite([Identity]).union(&FinCof::finite([Identity])), FinCof::full());
        assert_eq!(
            FinCof::cofinite([e(1), e(2)]).meet(&FinCof::finite([e(2), e(3)])),
            FinCof::finite([e(3)])
        );
    }

    #[test]
    fn successor_definability() {
        let s = ChainStructure::omega_zed();
        assert!(succ_holds(&s, &e(5), &e(6)));
        assert!(!succ_holds(&s, &e(6), &e(5)));
        let z = |i| ChainAtom::elem(1, i);
        assert!(succ_holds(&s, &z(0), &z(1)));
        let mut atoms = ChainAtom::SPECIAL.to_vec();
        atoms.extend((0..12).map(e));
        atoms.extend((-6..6).map(z));
        for n in &atoms {
            for m in &atoms {
                assert_eq!(succ_holds(&s, n, m), s.successor(n).as_ref() == Some(m), "{n} {m}");
            }
        }
    }

    #[test]
    fn pred_split_examples() {
        let h = ChainStructure::omega();
        let d = decide_pred_split(&h, X, &e(7)).unwrap();
        assert!(d.holds);
        assert_eq!(d.witness, Some(FinCof::finite((0..=7).map(e))));
        let d = decide_pred_split(&h, X, &e(0)).unwrap();
        assert_eq!(d.witness, Some(FinCof::finite([e(0)])));
        let up = decide_pred_split(&h, XConv, &e(4)).unwrap();
        assert_eq!(up.witness, Some(FinCof::cofinite((0..4).map(e))));
        let hz = ChainStructure::omega_zed();
        for dir in [X, XConv] {
            let d = decide_pred_split(&hz, dir, &ChainAtom::elem(1, 0)).unwrap();
            assert!(!d.holds && d.witness.is_none() && !d.trace.is_empty());
        }
        assert!(decide_pred_split(&h, X, &X).is_err());
        assert!(decide_pred_split(&h, Identity, &e(1)).is_err());
    }

    #[test]
    fn phi_on_chain_structures() {
        assert!(check_phi_hh(&ChainStructure::omega()).holds);
        assert!(!check_phi_hh(&ChainStructure::omega_zed()).holds);
        assert!(check_phi_hh(&"omega,omega".parse().unwrap()).holds);
    }

    #[test]
    fn closure_check() {
        let h = ChainStructure::omega();
        assert!(is_pred_closed(&h, X, &FinCof::finite((0..=3).map(e))).unwrap());
        assert!(!is_pred_closed(&h, X, &FinCof::finite([e(0), e(2)])).unwrap());
        assert!(!is_pred_closed(&h, X, &FinCof::cofinite([e(2)])).unwrap());
        assert!(is_pred_closed(&h, XConv, &FinCof::cofinite([e(0), e(1)])).unwrap());
    }

    #[test]
    fn truncation_sizes() {
        assert_eq!(truncate(&ChainStructure::omega(), &[(0, 10)]).unwrap().len(), 14);
        assert_eq!(truncate(&ChainStructure::omega_zed(), &[(0, 5), (-3, 3)]).unwrap().len(), 16);
        assert!(truncate(&ChainStructure::omega(), &[(3, 2)]).is_err());
        assert!(truncate(&ChainStructure::omega(), &[(-1, 2)]).is_err());
    }

    #[test]
    fn parsing() {
        let s: ChainStructure = "omega,zed".parse().unwrap();
        assert_eq!(s, ChainStructure::omega_zed());
        assert_eq!(s.to_string(), "omega,zed");
        assert!("omega,foo".parse::<ChainStructure>().is_err());
        for a in [Identity, X, XConv, ChainAtom::elem(1, -3)] {
            assert_eq!(a.to_string().parse::<ChainAtom>().unwrap(), a);
        }
        assert_eq!("5".parse::<ChainAtom>().unwrap(), e(5));
    }

    fn to_element(
        s: &ChainStructure,
        t: &FiniteAtomStructure,
        atoms: &[ChainAtom],
        x: &FinCof,
    ) -> Element {
        let idx = atoms
            .iter()
            .filter(|a| x.contains(a) && s.contains(a))
            .map(|a| t.index_of(&AtomLabel::opaque(a.to_string())).unwrap());
        Element::from_indices(t.len(), idx)
    }

    #[test]
    fn compose_agrees_with_truncation() {
        let s = ChainStructure::omega_zed();
        let windows = [(0, 16), (-10, 10)];
        let t = truncate(&s, &windows).unwrap();
        let alg = ComplexAlgebra::new(&t);
        let atoms: Vec<_> = t
            .atoms()
            .iter()
            .map(|l| l.to_string().parse::<ChainAtom>().unwrap())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = random_fincof(&s, &[(0, 12), (-6, 6)], &mut rng);
            let y = random_fincof(&s, &[(0, 12), (-6, 6)], &mut rng);
            let exact = compose(&s, &x, &y);
            let brute = alg.compose(&to_element(&s, &t, &atoms, &x), &to_element(&s, &t, &atoms, &y));
            for (k, a) in atoms.iter().enumerate() {
                let inside = match a.as_elem() {
                    Some((0, i)) => i <= 14,
                    Some((_, i)) => (-8..=8).contains(&i),
                    None => true,
                };
                if inside {
                    assert_eq!(exact.contains(a), brute.contains(k), "{x} ; {y} at {a}");
                }
            }
        }
    }
}
